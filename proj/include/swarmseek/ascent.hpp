#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "swarmseek/common.hpp"
#include "swarmseek/field.hpp"
#include "swarmseek/swarm.hpp"

namespace swarmseek {

/// Ascent direction estimate with its Euclidean norm cached; the norm is what
/// the singularity policy thresholds against.
struct AscentVector {
  Eigen::VectorXd value;
  double norm = 0.0;
};

/// Readings-only ascent direction: (1 / (N spread^2)) * sum_i sigma_i * x_i,
/// where x_i are the centroid offsets. Consumes one scalar reading per robot
/// and the swarm geometry; no gradient access. Offsets sum to zero, so any
/// common constant in the readings cancels.
inline AscentVector ascent_from_readings(const Eigen::VectorXd& readings,
                                         const Geometry& geom) {
  const auto n_robots = geom.offsets.cols();
  if (readings.size() != n_robots) {
    throw ConfigError("ascent: one reading per robot required");
  }
  if (!readings.allFinite()) {
    throw ConfigError("ascent: readings must be finite");
  }
  if (geom.spread <= 0.0) {
    throw DegenerateSwarmError("ascent: swarm spread is zero");
  }
  const double w = 1.0 / (static_cast<double>(n_robots) * geom.spread * geom.spread);
  Eigen::VectorXd v = w * (geom.offsets * readings);
  const double norm = v.norm();
  return AscentVector{std::move(v), norm};
}

/// Idealized counterpart driven by the true centroid gradient:
/// (1 / (N spread^2)) * sum_i (grad . x_i) * x_i.
inline AscentVector ascent_from_gradient(const Eigen::VectorXd& centroid_gradient,
                                         const Geometry& geom) {
  if (centroid_gradient.size() != geom.offsets.rows()) {
    throw ConfigError("ascent: gradient dimension mismatch");
  }
  if (geom.spread <= 0.0) {
    throw DegenerateSwarmError("ascent: swarm spread is zero");
  }
  const auto n_robots = geom.offsets.cols();
  const double w = 1.0 / (static_cast<double>(n_robots) * geom.spread * geom.spread);
  Eigen::VectorXd v =
      w * (geom.offsets * (geom.offsets.transpose() * centroid_gradient));
  const double norm = v.norm();
  return AscentVector{std::move(v), norm};
}

/// Quarter-turn rotation, the planar generator of rotations.
inline Eigen::Vector2d perp(const Eigen::Vector2d& v) {
  return Eigen::Vector2d(-v.y(), v.x());
}

/// Unit guiding direction, undefined at or below the norm threshold.
struct GuidingDirection {
  Eigen::Vector2d direction = Eigen::Vector2d::Zero();
  bool defined = false;
};

/// Default norm threshold below which the guiding direction is treated as
/// undefined, proportional to the field's gradient bound.
inline double default_guiding_threshold(const FieldBounds& bounds) {
  return 1e-9 * bounds.gradient_max;
}

inline GuidingDirection guiding_direction(const AscentVector& ascent,
                                          double threshold) {
  if (ascent.value.size() != 2) {
    throw ConfigError("guiding direction: planar workspaces only");
  }
  GuidingDirection g;
  if (ascent.norm > threshold && std::isfinite(ascent.norm)) {
    g.direction = ascent.value / ascent.norm;
    g.defined = true;
  }
  return g;
}

/// Signed angle of `m_i` relative to `m_d`, wrapped to (-pi, pi]. Positive
/// means m_i points counterclockwise of m_d. Inputs need not be normalized
/// but must be nonzero.
inline double wrapped_angle(const Eigen::Vector2d& m_i,
                            const Eigen::Vector2d& m_d) {
  const double cross = m_d.x() * m_i.y() - m_d.y() * m_i.x();
  const double dot = m_d.dot(m_i);
  double a = std::atan2(cross, dot);
  if (a == -kPi) a = kPi;
  return a;
}

/// Exact angular rate of the normalized ascent direction along given robot
/// velocities. The normalization drops the 1/(N spread^2) prefactor (it
/// cancels), so the rate never differentiates the non-smooth spread term.
/// Throws SingularGuidanceError when the ascent norm is at or below the
/// threshold, where the direction (and hence its rate) is undefined.
inline double guiding_rate_analytic(const SignalField& field,
                                    const Eigen::MatrixXd& positions,
                                    const Eigen::MatrixXd& velocities,
                                    double threshold) {
  if (positions.rows() != 2) {
    throw ConfigError("guiding rate: planar workspaces only");
  }
  if (velocities.rows() != positions.rows() ||
      velocities.cols() != positions.cols()) {
    throw ConfigError("guiding rate: velocity shape mismatch");
  }
  const Geometry geom = decompose(positions);
  if (geom.spread <= 0.0) {
    throw DegenerateSwarmError("guiding rate: swarm spread is zero");
  }
  const auto n_robots = positions.cols();
  const FieldSample fs = field.evaluate(geom.centroid);

  const Eigen::VectorXd proj = geom.offsets.transpose() * fs.gradient;  // grad . x_i
  Eigen::Vector2d s = geom.offsets * proj;
  const double s_norm = s.norm();
  const double scaled_norm =
      s_norm / (static_cast<double>(n_robots) * geom.spread * geom.spread);
  if (!(scaled_norm > threshold)) {
    throw SingularGuidanceError("guiding rate: ascent direction undefined");
  }

  const Eigen::Vector2d centroid_vel = velocities.rowwise().mean();
  const Eigen::MatrixXd offset_vel = velocities.colwise() - centroid_vel;
  const Eigen::VectorXd proj_dot =
      geom.offsets.transpose() * (fs.hessian * centroid_vel) +
      offset_vel.transpose() * fs.gradient;
  const Eigen::Vector2d s_dot = geom.offsets * proj_dot + offset_vel * proj;

  const Eigen::Vector2d m = s / s_norm;
  return s_dot.dot(perp(m)) / s_norm;
}

/// Exact angular rate of the readings-based direction, by the same chain
/// rule applied through each robot's reading (d/dt sigma(r_i) = grad(r_i) .
/// v_i). Needs per-robot gradient access, so it is a verification oracle,
/// not a deployable controller path.
inline double guiding_rate_readings_analytic(const SignalField& field,
                                             const Eigen::MatrixXd& positions,
                                             const Eigen::MatrixXd& velocities,
                                             double threshold) {
  if (positions.rows() != 2) {
    throw ConfigError("guiding rate: planar workspaces only");
  }
  if (velocities.rows() != positions.rows() ||
      velocities.cols() != positions.cols()) {
    throw ConfigError("guiding rate: velocity shape mismatch");
  }
  const Geometry geom = decompose(positions);
  if (geom.spread <= 0.0) {
    throw DegenerateSwarmError("guiding rate: swarm spread is zero");
  }
  const auto n_robots = positions.cols();
  Eigen::VectorXd readings(n_robots), reading_rates(n_robots);
  for (Eigen::Index i = 0; i < n_robots; ++i) {
    readings[i] = field.value(positions.col(i));
    reading_rates[i] = field.gradient(positions.col(i)).dot(velocities.col(i));
  }
  const Eigen::Vector2d s = geom.offsets * readings;
  const double s_norm = s.norm();
  const double scaled_norm =
      s_norm / (static_cast<double>(n_robots) * geom.spread * geom.spread);
  if (!(scaled_norm > threshold)) {
    throw SingularGuidanceError("guiding rate: ascent direction undefined");
  }
  const Eigen::Vector2d centroid_vel = velocities.rowwise().mean();
  const Eigen::MatrixXd offset_vel = velocities.colwise() - centroid_vel;
  const Eigen::Vector2d s_dot =
      geom.offsets * reading_rates + offset_vel * readings;
  const Eigen::Vector2d m = s / s_norm;
  return s_dot.dot(perp(m)) / s_norm;
}

/// Readings-only estimate of the same rate: central difference of the
/// readings-based direction's angle over a short probe step along the given
/// velocities. Second-order accurate in probe_dt; costs three reading sweeps
/// (one to reject undefined directions at the current state, matching the
/// analytic variant's contract, plus the two probes). When the direction
/// flips between the probes (the centroid passing the source closer than
/// u * probe_dt), the estimate saturates at pi / (2 probe_dt); adaptive
/// integrators may fail to resolve that near-discontinuity.
inline double guiding_rate_measured(const SignalField& field,
                                    const Eigen::MatrixXd& positions,
                                    const Eigen::MatrixXd& velocities,
                                    double threshold, double probe_dt = 1e-6) {
  if (positions.rows() != 2) {
    throw ConfigError("guiding rate: planar workspaces only");
  }
  if (velocities.rows() != positions.rows() ||
      velocities.cols() != positions.cols()) {
    throw ConfigError("guiding rate: velocity shape mismatch");
  }
  if (!(probe_dt > 0.0)) {
    throw ConfigError("guiding rate: probe step must be > 0");
  }
  const auto n_robots = positions.cols();
  const auto probe_direction = [&](double tau) {
    const Eigen::MatrixXd r = positions + tau * velocities;
    const Geometry geom = decompose(r);
    Eigen::VectorXd readings(n_robots);
    for (Eigen::Index i = 0; i < n_robots; ++i) {
      readings[i] = field.value(r.col(i));
    }
    return guiding_direction(ascent_from_readings(readings, geom), threshold);
  };
  if (!probe_direction(0.0).defined) {
    throw SingularGuidanceError("guiding rate: ascent direction undefined");
  }
  const GuidingDirection fwd = probe_direction(probe_dt);
  const GuidingDirection bwd = probe_direction(-probe_dt);
  if (!fwd.defined || !bwd.defined) {
    throw SingularGuidanceError("guiding rate: ascent direction undefined");
  }
  return wrapped_angle(fwd.direction, bwd.direction) / (2.0 * probe_dt);
}

}  // namespace swarmseek
