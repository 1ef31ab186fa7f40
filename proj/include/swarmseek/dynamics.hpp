#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

#include <Eigen/Dense>

#include "swarmseek/ascent.hpp"
#include "swarmseek/common.hpp"
#include "swarmseek/field.hpp"
#include "swarmseek/ode.hpp"
#include "swarmseek/swarm.hpp"

namespace swarmseek {

enum class Mode { Free, Unicycle };

/// Which ascent input drives the free dynamics: the true centroid gradient
/// (idealized flow, monotone by construction) or the readings-only estimate
/// (deployable flow, equilibrium slightly offset from the source).
enum class DirectionSource { Exact, Measured };

/// How the unicycle controller obtains the guiding direction's angular rate:
/// the exact chain-rule formula (needs gradient and Hessian access) or a
/// readings-only probe estimate.
enum class GuidingRateMode { Analytic, Measured };

struct SimConfig {
  Mode mode = Mode::Free;
  double u_r = 1.0;      // constant forward speed (unicycle)
  double k_gamma = 1.0;  // heading-error gain (unicycle)
  double rtol = 1e-8;
  double atol = 1e-10;
  double t_end = 5000.0;
  double sample_dt = 5.0;
  double epsilon = 0.5;  // success radius around the source
  std::uint64_t seed = 1;
  OdeMethod integrator = OdeMethod::Dopri45;
  double h_fixed = 0.01;  // rk4 step

  void validate() const {
    if (!(u_r > 0.0)) throw ConfigError("sim.u_r: must be > 0");
    if (!(k_gamma > 0.0)) throw ConfigError("sim.k_gamma: must be > 0");
    if (!(rtol > 0.0)) throw ConfigError("sim.rtol: must be > 0");
    if (!(atol > 0.0)) throw ConfigError("sim.atol: must be > 0");
    if (!(t_end > 0.0)) throw ConfigError("sim.t_end: must be > 0");
    if (!(sample_dt > 0.0)) throw ConfigError("sim.sample_dt: must be > 0");
    if (!(epsilon > 0.0)) throw ConfigError("sim.epsilon: must be > 0");
    if (!(h_fixed > 0.0)) throw ConfigError("sim.h_fixed: must be > 0");
  }
};

struct AscentOptions {
  /// Ascent-norm threshold below which the guiding direction is undefined;
  /// negative selects the default, 1e-9 times the field's gradient bound.
  double eta_l = -1.0;
  GuidingRateMode omega_d_mode = GuidingRateMode::Measured;
  DirectionSource direction = DirectionSource::Measured;

  double resolve_threshold(const SignalField& field) const {
    if (eta_l >= 0.0) return eta_l;
    return default_guiding_threshold(field.bounds());
  }
};

/// Singularity bookkeeping for one integration: evaluations where the
/// guiding direction was undefined and the angular-rate feedforward was held
/// at zero (the run continues; this is policy, not an error).
struct GuidanceLog {
  std::int64_t singular_holds = 0;
  double first_singular_time = std::numeric_limits<double>::quiet_NaN();

  void record(double t) {
    if (singular_holds == 0) first_singular_time = t;
    ++singular_holds;
  }
};

// State layout: free mode packs positions column-wise; unicycle appends the
// headings and the integrated heading errors.
//   free:      y = [r_1; ...; r_N]                       (n*N)
//   unicycle:  y = [r_1; ...; r_N; alpha; delta]         (2N + N + N)
inline Eigen::VectorXd pack_state(const SwarmState& s) {
  const int n = s.dim(), N = s.count();
  if (s.has_headings()) {
    Eigen::VectorXd y(2 * N + 2 * N);
    y.head(2 * N) = Eigen::Map<const Eigen::VectorXd>(s.positions.data(), 2 * N);
    y.segment(2 * N, N) = s.headings;
    y.tail(N) = s.heading_error;
    return y;
  }
  return Eigen::Map<const Eigen::VectorXd>(s.positions.data(), n * N);
}

inline SwarmState unpack_state(const Eigen::VectorXd& y, int dim, int count,
                               Mode mode, double t) {
  SwarmState s;
  s.t = t;
  s.positions =
      Eigen::Map<const Eigen::MatrixXd>(y.data(), dim, count);
  if (mode == Mode::Unicycle) {
    s.headings = y.segment(Eigen::Index{2} * count, count);
    s.heading_error = y.tail(count);
  }
  return s;
}

/// Gradient-ascent flow of the whole swarm: every robot drifts with the same
/// ascent vector, so the formation translates rigidly. Signature matches
/// integrate_ode's rhs.
class FreeDynamics {
 public:
  FreeDynamics(const SignalField& field, int dim, int count,
               DirectionSource source)
      : field_(&field), dim_(dim), count_(count), source_(source) {}

  void operator()(double, const Eigen::VectorXd& y,
                  Eigen::VectorXd& dydt) const {
    const Eigen::Map<const Eigen::MatrixXd> positions(y.data(), dim_, count_);
    const Geometry geom = decompose(positions);
    AscentVector l;
    if (source_ == DirectionSource::Exact) {
      l = ascent_from_gradient(field_->gradient(geom.centroid), geom);
    } else {
      Eigen::VectorXd readings(count_);
      for (int i = 0; i < count_; ++i) {
        readings[i] = field_->value(positions.col(i));
      }
      l = ascent_from_readings(readings, geom);
    }
    for (int i = 0; i < count_; ++i) {
      dydt.segment(Eigen::Index{i} * dim_, dim_) = l.value;
    }
  }

 private:
  const SignalField* field_;
  int dim_, count_;
  DirectionSource source_;
};

/// Constant-speed unicycle swarm tracking the guiding direction. Each robot
/// turns with rate -k_gamma * delta_i where delta_i is its integrated heading
/// error; the error dynamics subtract the guiding direction's own angular
/// rate as a feedforward. When the guiding direction is undefined the
/// feedforward is held at zero and the event is logged; the run never aborts
/// for that.
class UnicycleDynamics {
 public:
  UnicycleDynamics(const SignalField& field, int count, const SimConfig& sim,
                   GuidingRateMode rate_mode, double threshold,
                   GuidanceLog* log)
      : field_(&field),
        count_(count),
        u_r_(sim.u_r),
        k_gamma_(sim.k_gamma),
        rate_mode_(rate_mode),
        threshold_(threshold),
        log_(log) {}

  void operator()(double t, const Eigen::VectorXd& y,
                  Eigen::VectorXd& dydt) const {
    const int N = count_;
    const Eigen::Map<const Eigen::MatrixXd> positions(y.data(), 2, N);
    const auto alpha = y.segment(Eigen::Index{2} * N, N);
    const auto delta = y.tail(N);

    Eigen::MatrixXd velocities(2, N);
    for (int i = 0; i < N; ++i) {
      velocities(0, i) = u_r_ * std::cos(alpha[i]);
      velocities(1, i) = u_r_ * std::sin(alpha[i]);
    }

    double omega_d = 0.0;
    try {
      omega_d = rate_mode_ == GuidingRateMode::Analytic
                    ? guiding_rate_analytic(*field_, positions, velocities,
                                            threshold_)
                    : guiding_rate_measured(*field_, positions, velocities,
                                            threshold_);
    } catch (const SingularGuidanceError&) {
      omega_d = 0.0;
      if (log_ != nullptr) log_->record(t);
    }

    for (int i = 0; i < N; ++i) {
      dydt[2 * i] = velocities(0, i);
      dydt[2 * i + 1] = velocities(1, i);
      const double omega_i = -k_gamma_ * delta[i];
      dydt[2 * N + i] = omega_i;
      dydt[2 * N + N + i] = omega_i - omega_d;
    }
  }

 private:
  const SignalField* field_;
  int count_;
  double u_r_, k_gamma_;
  GuidingRateMode rate_mode_;
  double threshold_;
  GuidanceLog* log_;
};

/// Guiding direction at a state, from the estimator matching `rate_mode`
/// (readings-based for Measured, gradient-based for Analytic).
inline GuidingDirection guiding_direction_at(const SignalField& field,
                                             const Eigen::MatrixXd& positions,
                                             GuidingRateMode rate_mode,
                                             double threshold) {
  const Geometry geom = decompose(positions);
  if (geom.spread <= 0.0) return GuidingDirection{};
  AscentVector l;
  if (rate_mode == GuidingRateMode::Analytic) {
    l = ascent_from_gradient(field.gradient(geom.centroid), geom);
  } else {
    Eigen::VectorXd readings(positions.cols());
    for (Eigen::Index i = 0; i < positions.cols(); ++i) {
      readings[i] = field.value(positions.col(i));
    }
    l = ascent_from_readings(readings, geom);
  }
  return guiding_direction(l, threshold);
}

/// Heading errors at a state: wrapped angle from the guiding direction to
/// each robot's heading. Throws SingularGuidanceError when the guiding
/// direction is undefined (callers reject such initial states).
inline Eigen::VectorXd initial_heading_error(const SignalField& field,
                                             const SwarmState& state,
                                             GuidingRateMode rate_mode,
                                             double threshold) {
  if (!state.has_headings()) {
    throw ConfigError("swarm.headings: required in unicycle mode");
  }
  const GuidingDirection g =
      guiding_direction_at(field, state.positions, rate_mode, threshold);
  if (!g.defined) {
    throw SingularGuidanceError(
        "initial state: guiding direction undefined at the start");
  }
  Eigen::VectorXd delta(state.count());
  for (int i = 0; i < state.count(); ++i) {
    const Eigen::Vector2d heading(std::cos(state.headings[i]),
                                  std::sin(state.headings[i]));
    delta[i] = wrapped_angle(heading, g.direction);
  }
  return delta;
}

}  // namespace swarmseek
