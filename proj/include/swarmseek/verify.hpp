#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "swarmseek/ascent.hpp"
#include "swarmseek/common.hpp"
#include "swarmseek/dynamics.hpp"
#include "swarmseek/field.hpp"
#include "swarmseek/harness.hpp"
#include "swarmseek/rng.hpp"
#include "swarmseek/swarm.hpp"

namespace swarmseek {

/// Outcome of one verified property. `violations == 0` is the pass
/// condition; `worst_margin` is the property-specific slack at the worst
/// sample (negative on violation, except for reported-only constants, see
/// each check's description). Every report is reproducible from its seed.
struct VerificationReport {
  std::string property;
  std::int64_t samples = 0;
  std::int64_t violations = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  std::uint64_t witness_seed = 0;
  std::string witness;

  bool pass() const { return violations == 0; }
};

namespace detail {

struct DrawnSample {
  SignalField field;
  Eigen::MatrixXd positions;
  Geometry geom;
};

// Random field/swarm/centroid placement used by the algebraic checks.
// Every fourth draw is a quadratic field, the rest gaussians.
inline DrawnSample draw_sample(std::uint64_t seed, std::uint64_t index) {
  Rng rng(Rng::derive(seed, index));
  const Eigen::Vector2d source(rng.uniform(-20.0, 20.0),
                               rng.uniform(-20.0, 20.0));
  SignalField field = [&] {
    if (index % 4 == 3) {
      const double angle = rng.uniform(0.0, 2.0 * kPi);
      Eigen::Matrix2d rot;
      rot << std::cos(angle), -std::sin(angle), std::sin(angle),
          std::cos(angle);
      Eigen::Matrix2d diag = Eigen::Matrix2d::Zero();
      diag(0, 0) = rng.uniform(0.005, 0.05);
      diag(1, 1) = rng.uniform(0.005, 0.05);
      return SignalField::quadratic(rng.uniform(0.5, 5.0), 50.0,
                                    rot * diag * rot.transpose(), source, 1.0);
    }
    const double scale = rng.uniform(5.0, 20.0);
    return SignalField::gaussian(rng.uniform(0.5, 5.0), scale, source);
  }();
  const double place_scale =
      field.kind() == FieldKind::Gaussian ? 1.5 * field.scale() : 15.0;
  const Eigen::Vector2d center =
      source + Eigen::Vector2d(rng.normal(0.0, place_scale),
                               rng.normal(0.0, place_scale));
  const int count = 3 + static_cast<int>(rng.next_u64() % 6);
  const double spread = rng.uniform(0.5, 3.0);
  Eigen::MatrixXd positions(2, count);
  for (int i = 0; i < count; ++i) {
    const double radius = rng.uniform(0.3 * spread, spread);
    const double angle = rng.uniform(0.0, 2.0 * kPi);
    positions.col(i) =
        center + radius * Eigen::Vector2d(std::cos(angle), std::sin(angle));
  }
  Geometry geom = decompose(positions);
  return DrawnSample{std::move(field), std::move(positions), std::move(geom)};
}

inline Eigen::VectorXd readings_at(const SignalField& field,
                                   const Eigen::MatrixXd& positions) {
  Eigen::VectorXd readings(positions.cols());
  for (Eigen::Index i = 0; i < positions.cols(); ++i) {
    readings[i] = field.value(positions.col(i));
  }
  return readings;
}

inline Eigen::MatrixXd heading_velocities(const SwarmState& s, double u_r) {
  Eigen::MatrixXd v(2, s.count());
  for (int i = 0; i < s.count(); ++i) {
    v(0, i) = u_r * std::cos(s.headings[i]);
    v(1, i) = u_r * std::sin(s.headings[i]);
  }
  return v;
}

// Central finite difference of the gradient-based direction's angle along
// frozen velocities; the independent oracle for the analytic rate.
inline double fd_guiding_rate(const SignalField& field,
                              const Eigen::MatrixXd& positions,
                              const Eigen::MatrixXd& velocities, double tau) {
  const auto direction_at = [&](double dt) {
    const Eigen::MatrixXd r = positions + dt * velocities;
    const Geometry geom = decompose(r);
    const AscentVector l = ascent_from_gradient(field.gradient(geom.centroid), geom);
    return Eigen::Vector2d(l.value / l.norm);
  };
  return wrapped_angle(direction_at(tau), direction_at(-tau)) / (2.0 * tau);
}

inline std::string describe_state(const Eigen::MatrixXd& positions) {
  const Geometry g = decompose(positions);
  return "centroid=(" + std::to_string(g.centroid[0]) + "," +
         std::to_string(g.centroid[1]) +
         "), robots=" + std::to_string(positions.cols()) +
         ", spread=" + std::to_string(g.spread);
}

}  // namespace detail

/// Runs the property checks and reports margins. Checks:
///   estimate-error-bound          readings estimate within curvature*spread
///                                 of the gradient-based ascent vector
///   ascent-alignment              ascent vector has positive product with
///                                 the gradient; reports the empirical
///                                 conditioning constant
///   deformation-bound             unicycle offset drift <= 2 pi u_r / k_gamma
///   error-consensus-decay         pairwise heading-error differences decay
///                                 as exp(-k_gamma t) within 1e-6 relative
///   guiding-rate-bound            |rate| finite on gradient-floor samples;
///                                 reports the empirical bound (margin holds
///                                 the reported constant, not a slack)
///   heading-attractivity          once all |heading errors| enter the
///                                 interval set by the empirical rate bound
///                                 they stay inside while the gradient floor
///                                 holds
///   idealized-flow-monotonicity   sigma at the centroid non-decreasing
///                                 within 1e-9 along exact free runs
///   guiding-rate-consistency      analytic rate matches a central
///                                 finite-difference oracle within 1e-5
inline std::vector<VerificationReport> verify_suite(
    std::uint64_t seed, std::int64_t sample_count = 10000) {
  if (sample_count < 1) {
    throw ConfigError("verify: sample_count must be >= 1");
  }
  std::vector<VerificationReport> reports;

  // --- (a) readings-estimate error bound -------------------------------
  {
    VerificationReport rep;
    rep.property = "estimate-error-bound";
    rep.witness_seed = seed;
    for (std::int64_t i = 0; i < sample_count; ++i) {
      const auto s = detail::draw_sample(seed, static_cast<std::uint64_t>(i));
      if (s.geom.spread <= 0.0) continue;
      const AscentVector l_est =
          ascent_from_readings(detail::readings_at(s.field, s.positions), s.geom);
      const AscentVector l_exact = ascent_from_gradient(
          s.field.gradient(s.geom.centroid), s.geom);
      const double bound = s.field.bounds().curvature * s.geom.spread;
      const double margin = bound - (l_est.value - l_exact.value).norm();
      ++rep.samples;
      if (margin < rep.worst_margin) {
        rep.worst_margin = margin;
        rep.witness_seed = Rng::derive(seed, static_cast<std::uint64_t>(i));
        rep.witness = detail::describe_state(s.positions);
      }
      if (margin < 0.0) ++rep.violations;
    }
    reports.push_back(std::move(rep));
  }

  // --- (b) alignment with the gradient ---------------------------------
  {
    VerificationReport rep;
    rep.property = "ascent-alignment";
    rep.witness_seed = seed;
    double min_ratio = std::numeric_limits<double>::infinity();
    for (std::int64_t i = 0; i < sample_count; ++i) {
      const auto s =
          detail::draw_sample(seed, 0x10000000ull + static_cast<std::uint64_t>(i));
      if (s.geom.spread <= 0.0 || is_degenerate(s.geom)) continue;
      const Eigen::VectorXd grad = s.field.gradient(s.geom.centroid);
      const double g2 = grad.squaredNorm();
      if (g2 == 0.0) continue;
      const AscentVector l = ascent_from_gradient(grad, s.geom);
      const double ratio = l.value.dot(grad) / g2;  // 1/C at this sample
      ++rep.samples;
      if (ratio < min_ratio) {
        min_ratio = ratio;
        rep.witness_seed =
            Rng::derive(seed, 0x10000000ull + static_cast<std::uint64_t>(i));
        rep.witness = detail::describe_state(s.positions);
      }
      if (!(ratio > 0.0)) ++rep.violations;
    }
    rep.worst_margin = min_ratio;
    rep.witness += rep.witness.empty() ? "" : "; ";
    rep.witness += "empirical conditioning constant C = " +
                   std::to_string(min_ratio > 0.0 ? 1.0 / min_ratio : 0.0);
    reports.push_back(std::move(rep));
  }

  const Eigen::Vector2d origin = Eigen::Vector2d::Zero();
  const SignalField field = SignalField::gaussian(100.0, 10.0, origin);
  RandomSwarmParams swarm_params;
  swarm_params.center_std = 10.0;

  // --- (c) deformation bound along unicycle runs -----------------------
  {
    VerificationReport rep;
    rep.property = "deformation-bound";
    const double gains[] = {1.0, 2.0, 5.0, 10.0};
    int run_idx = 0;
    for (const double k_gamma : gains) {
      SimConfig sim;
      sim.mode = Mode::Unicycle;
      sim.u_r = 1.0;
      sim.k_gamma = k_gamma;
      sim.t_end = 40.0;
      sim.sample_dt = 0.2;
      AscentOptions opts;
      opts.omega_d_mode = GuidingRateMode::Analytic;
      RandomSwarmParams p = swarm_params;
      p.with_headings = true;
      const std::uint64_t run_seed =
          Rng::derive(seed, 0x20000000ull + static_cast<std::uint64_t>(run_idx));
      const ScenarioResult res =
          run_scenario(field, random_swarm(run_seed, p), sim, opts);
      const double bound = 2.0 * kPi * sim.u_r / sim.k_gamma + 1e-6;
      for (const auto& sample : res.trajectory.samples) {
        ++rep.samples;
        const double margin = bound - sample.deformation;
        if (margin < rep.worst_margin) {
          rep.worst_margin = margin;
          rep.witness_seed = run_seed;
          rep.witness = "k_gamma=" + std::to_string(k_gamma) +
                        ", t=" + std::to_string(sample.t);
        }
        if (margin < 0.0) ++rep.violations;
      }
      ++run_idx;
    }
    reports.push_back(std::move(rep));
  }

  // --- (d) pairwise heading-error exponential decay --------------------
  {
    VerificationReport rep;
    rep.property = "error-consensus-decay";
    SimConfig sim;
    sim.mode = Mode::Unicycle;
    sim.k_gamma = 2.0;
    sim.t_end = 10.0 / sim.k_gamma;
    sim.sample_dt = 0.05;
    sim.rtol = 1e-9;
    sim.atol = 1e-14;
    AscentOptions opts;
    opts.omega_d_mode = GuidingRateMode::Analytic;
    RandomSwarmParams p = swarm_params;
    p.with_headings = true;
    const std::uint64_t run_seed = Rng::derive(seed, 0x30000000ull);
    const ScenarioResult res =
        run_scenario(field, random_swarm(run_seed, p), sim, opts);
    rep.witness_seed = run_seed;
    const Eigen::VectorXd delta0 =
        res.trajectory.samples.front().state.heading_error;
    const int N = static_cast<int>(delta0.size());
    for (const auto& sample : res.trajectory.samples) {
      const double decay = std::exp(-sim.k_gamma * sample.t);
      for (int i = 0; i < N; ++i) {
        for (int j = i + 1; j < N; ++j) {
          const double expected = (delta0[j] - delta0[i]) * decay;
          if (std::abs(delta0[j] - delta0[i]) < 1e-2) continue;
          const double actual =
              sample.state.heading_error[j] - sample.state.heading_error[i];
          const double rel = std::abs(actual - expected) / std::abs(expected);
          ++rep.samples;
          const double margin = 1e-6 - rel;
          if (margin < rep.worst_margin) {
            rep.worst_margin = margin;
            rep.witness = "pair (" + std::to_string(i) + "," +
                          std::to_string(j) + ") at t=" + std::to_string(sample.t);
          }
          if (margin < 0.0) ++rep.violations;
        }
      }
    }
    reports.push_back(std::move(rep));
  }

  // --- (e) empirical guiding-rate bound, (f) attractive interval -------
  {
    const double grad_floor = 0.05 * field.bounds().gradient_max;
    const double threshold = default_guiding_threshold(field.bounds());

    VerificationReport rate_rep;
    rate_rep.property = "guiding-rate-bound";
    SimConfig pre;
    pre.mode = Mode::Unicycle;
    pre.k_gamma = 4.0;
    pre.t_end = 60.0;
    pre.sample_dt = 0.2;
    AscentOptions opts;
    opts.omega_d_mode = GuidingRateMode::Analytic;
    RandomSwarmParams p = swarm_params;
    p.with_headings = true;
    const std::uint64_t pre_seed = Rng::derive(seed, 0x40000000ull);
    const ScenarioResult pre_res =
        run_scenario(field, random_swarm(pre_seed, p), pre, opts);
    double omega_bound = 0.0;
    for (const auto& sample : pre_res.trajectory.samples) {
      if (sample.gradient_norm < grad_floor) continue;
      double rate = std::numeric_limits<double>::quiet_NaN();
      try {
        rate = guiding_rate_analytic(
            field, sample.state.positions,
            detail::heading_velocities(sample.state, pre.u_r), threshold);
      } catch (const SingularGuidanceError&) {
      }
      ++rate_rep.samples;
      if (!std::isfinite(rate)) {
        ++rate_rep.violations;
        rate_rep.witness = "undefined rate at t=" + std::to_string(sample.t);
        rate_rep.witness_seed = pre_seed;
        continue;
      }
      if (std::abs(rate) > omega_bound) {
        omega_bound = std::abs(rate);
        rate_rep.witness_seed = pre_seed;
        rate_rep.witness = "max |rate| at t=" + std::to_string(sample.t);
      }
    }
    // Reported constant, not a slack: the bound exists, its value is data.
    rate_rep.worst_margin = omega_bound;
    rate_rep.witness += "; empirical rate bound = " + std::to_string(omega_bound);
    reports.push_back(std::move(rate_rep));

    VerificationReport attr_rep;
    attr_rep.property = "heading-attractivity";
    const double gamma =
        std::clamp(1.1 * 2.0 * omega_bound / pre.k_gamma, 0.05, 0.9 * kPi);
    SimConfig main = pre;
    main.k_gamma = std::max(pre.k_gamma, 1.2 * 2.0 * omega_bound / gamma);
    const std::uint64_t main_seed = Rng::derive(seed, 0x50000000ull);
    const ScenarioResult main_res =
        run_scenario(field, random_swarm(main_seed, p), main, opts);
    attr_rep.witness_seed = main_seed;
    bool entered = false;
    for (const auto& sample : main_res.trajectory.samples) {
      if (sample.gradient_norm < grad_floor) {
        if (entered) break;  // the claim holds only on the gradient floor
        continue;
      }
      const double worst = sample.state.heading_error.cwiseAbs().maxCoeff();
      if (!entered) {
        entered = worst < gamma;
        if (!entered) continue;
      }
      ++attr_rep.samples;
      const double margin = gamma - worst;
      if (margin < attr_rep.worst_margin) {
        attr_rep.worst_margin = margin;
        attr_rep.witness = "t=" + std::to_string(sample.t) +
                           ", interval half-width=" + std::to_string(gamma);
      }
      if (margin <= 0.0) ++attr_rep.violations;
    }
    if (!entered) {
      attr_rep.witness = "interval never entered while on the gradient floor";
    }
    reports.push_back(std::move(attr_rep));
  }

  // --- (g) idealized-flow monotonicity ---------------------------------
  {
    VerificationReport rep;
    rep.property = "idealized-flow-monotonicity";
    for (int run = 0; run < 3; ++run) {
      SimConfig sim;
      sim.mode = Mode::Free;
      sim.t_end = 500.0;
      sim.sample_dt = 5.0;
      sim.rtol = 1e-9;
      sim.atol = 1e-11;
      AscentOptions opts;
      opts.direction = DirectionSource::Exact;
      const std::uint64_t run_seed =
          Rng::derive(seed, 0x60000000ull + static_cast<std::uint64_t>(run));
      const ScenarioResult res =
          run_scenario(field, random_swarm(run_seed, swarm_params), sim, opts);
      const auto& samples = res.trajectory.samples;
      for (std::size_t i = 1; i < samples.size(); ++i) {
        ++rep.samples;
        const double margin =
            1e-9 - (samples[i - 1].sigma_centroid - samples[i].sigma_centroid);
        if (margin < rep.worst_margin) {
          rep.worst_margin = margin;
          rep.witness_seed = run_seed;
          rep.witness = "t=" + std::to_string(samples[i].t);
        }
        if (margin < 0.0) ++rep.violations;
      }
    }
    reports.push_back(std::move(rep));
  }

  // --- (h) analytic rate vs finite-difference oracle -------------------
  {
    VerificationReport rep;
    rep.property = "guiding-rate-consistency";
    const double threshold = default_guiding_threshold(field.bounds());
    const double grad_floor = 0.1 * field.bounds().gradient_max;
    for (int run = 0; run < 2; ++run) {
      SimConfig sim;
      sim.mode = Mode::Unicycle;
      sim.k_gamma = 2.0;
      sim.t_end = 50.0;
      sim.sample_dt = 0.1;
      AscentOptions opts;
      opts.omega_d_mode = GuidingRateMode::Analytic;
      RandomSwarmParams p = swarm_params;
      p.with_headings = true;
      const std::uint64_t run_seed =
          Rng::derive(seed, 0x70000000ull + static_cast<std::uint64_t>(run));
      const ScenarioResult res =
          run_scenario(field, random_swarm(run_seed, p), sim, opts);
      for (const auto& sample : res.trajectory.samples) {
        if (sample.gradient_norm < grad_floor) continue;
        const Eigen::MatrixXd vel =
            detail::heading_velocities(sample.state, sim.u_r);
        double analytic = 0.0;
        try {
          analytic = guiding_rate_analytic(field, sample.state.positions, vel,
                                           threshold);
        } catch (const SingularGuidanceError&) {
          continue;
        }
        const double fd =
            detail::fd_guiding_rate(field, sample.state.positions, vel, 1e-6);
        ++rep.samples;
        const double margin = 1e-5 - std::abs(analytic - fd);
        if (margin < rep.worst_margin) {
          rep.worst_margin = margin;
          rep.witness_seed = run_seed;
          rep.witness = "t=" + std::to_string(sample.t);
        }
        if (margin < 0.0) ++rep.violations;
      }
    }
    reports.push_back(std::move(rep));
  }

  return reports;
}

}  // namespace swarmseek
