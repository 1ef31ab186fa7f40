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
#include "swarmseek/ode.hpp"
#include "swarmseek/rng.hpp"
#include "swarmseek/swarm.hpp"

namespace swarmseek {

struct RandomSwarmParams {
  int count = 5;
  double center_std = 25.0;  // swarm center ~ N(0, center_std^2 I)
  double radius_min = 0.5;   // per-robot polar offset from the center
  double radius_max = 2.0;
  bool with_headings = false;
  enum class Layout {
    Scatter,             // independent polar offsets
    NearDegenerateLine,  // on a line, perpendicular jitter 1e-3 * radius_max
  } layout = Layout::Scatter;
};

/// Draws a planar swarm. Draw order is part of the output contract (it pins
/// byte-identical reruns): center x,y; then per robot radius, angle (Scatter)
/// or along-line offset, jitter (NearDegenerateLine); then headings.
inline SwarmState random_swarm(std::uint64_t seed, const RandomSwarmParams& p) {
  if (p.count < 1) throw ConfigError("swarm.random.count: must be >= 1");
  if (!(p.center_std >= 0.0)) {
    throw ConfigError("swarm.random.center_std: must be >= 0");
  }
  if (!(p.radius_min >= 0.0) || !(p.radius_max >= p.radius_min)) {
    throw ConfigError("swarm.random.radius_range: need 0 <= min <= max");
  }
  Rng rng(seed);
  SwarmState s;
  s.positions.resize(2, p.count);
  const Eigen::Vector2d center(rng.normal(0.0, p.center_std),
                               rng.normal(0.0, p.center_std));
  if (p.layout == RandomSwarmParams::Layout::Scatter) {
    for (int i = 0; i < p.count; ++i) {
      const double radius = rng.uniform(p.radius_min, p.radius_max);
      const double angle = rng.uniform(0.0, 2.0 * kPi);
      s.positions.col(i) =
          center + radius * Eigen::Vector2d(std::cos(angle), std::sin(angle));
    }
  } else {
    const double line_angle = rng.uniform(0.0, 2.0 * kPi);
    const Eigen::Vector2d dir(std::cos(line_angle), std::sin(line_angle));
    for (int i = 0; i < p.count; ++i) {
      const double along = rng.uniform(-p.radius_max, p.radius_max);
      const double jitter = rng.normal(0.0, 1e-3 * p.radius_max);
      s.positions.col(i) = center + along * dir + jitter * perp(dir);
    }
  }
  if (p.with_headings) {
    s.headings.resize(p.count);
    for (int i = 0; i < p.count; ++i) {
      s.headings[i] = rng.uniform(0.0, 2.0 * kPi);
    }
  }
  return s;
}

struct ResilienceEvent {
  enum class Action { Remove, Add };
  Action action = Action::Remove;
  double time = 0.0;
  int index = -1;            // Remove: column to drop
  Eigen::VectorXd position;  // Add
  double heading = 0.0;      // Add, unicycle mode
};

/// Applies a mid-run swarm change. Headings-bearing states get their heading
/// errors re-derived from the post-event guiding direction; if that direction
/// is undefined the previous errors are kept (wrapped), zero for a new robot.
/// Appends a warning when the post-event geometry is degenerate.
inline SwarmState apply_resilience_event(const SwarmState& state,
                                         const ResilienceEvent& ev,
                                         const SignalField& field,
                                         GuidingRateMode rate_mode,
                                         double threshold,
                                         std::vector<std::string>* warnings) {
  SwarmState out;
  out.t = state.t;
  const int n = state.dim(), N = state.count();
  if (ev.action == ResilienceEvent::Action::Remove) {
    if (ev.index < 0 || ev.index >= N) {
      throw ConfigError("harness.events: remove index out of range");
    }
    if (N <= 1) {
      throw ConfigError("harness.events: cannot remove the last robot");
    }
    out.positions.resize(n, N - 1);
    if (state.has_headings()) {
      out.headings.resize(N - 1);
    }
    Eigen::VectorXd old_error(N - 1);
    for (int i = 0, j = 0; i < N; ++i) {
      if (i == ev.index) continue;
      out.positions.col(j) = state.positions.col(i);
      if (state.has_headings()) {
        out.headings[j] = state.headings[i];
        old_error[j] = state.heading_error[i];
      }
      ++j;
    }
    if (state.has_headings()) out.heading_error = old_error;
  } else {
    if (ev.position.size() != n) {
      throw ConfigError("harness.events: add position dimension mismatch");
    }
    if (!ev.position.allFinite() || !std::isfinite(ev.heading)) {
      throw ConfigError("harness.events: add position/heading must be finite");
    }
    out.positions.resize(n, N + 1);
    out.positions.leftCols(N) = state.positions;
    out.positions.col(N) = ev.position;
    if (state.has_headings()) {
      out.headings.resize(N + 1);
      out.headings.head(N) = state.headings;
      out.headings[N] = ev.heading;
      out.heading_error.resize(N + 1);
      out.heading_error.head(N) = state.heading_error;
      out.heading_error[N] = 0.0;
    }
  }

  if (out.has_headings()) {
    const GuidingDirection g =
        guiding_direction_at(field, out.positions, rate_mode, threshold);
    if (g.defined) {
      for (int i = 0; i < out.count(); ++i) {
        const Eigen::Vector2d heading(std::cos(out.headings[i]),
                                      std::sin(out.headings[i]));
        out.heading_error[i] = wrapped_angle(heading, g.direction);
      }
    } else {
      for (int i = 0; i < out.count(); ++i) {
        out.heading_error[i] = wrapped_angle(
            Eigen::Vector2d(std::cos(out.heading_error[i]),
                            std::sin(out.heading_error[i])),
            Eigen::Vector2d(1.0, 0.0));
      }
      if (warnings != nullptr) {
        warnings->push_back(
            "event at t=" + std::to_string(ev.time) +
            ": guiding direction undefined, heading errors kept");
      }
    }
  }

  if (warnings != nullptr) {
    const Geometry geom = decompose(out.positions);
    if (is_degenerate(geom)) {
      warnings->push_back(
          "event at t=" + std::to_string(ev.time) +
          ": swarm degenerate, offsets no longer span the workspace");
    }
  }
  return out;
}

struct TrajectorySample {
  double t = 0.0;
  SwarmState state;
  Eigen::VectorXd centroid;
  double source_distance = 0.0;
  double sigma_centroid = 0.0;
  double gradient_norm = 0.0;
  double deformation = 0.0;   // max offset change within the current segment
  double ascent_angle = 0.0;  // angle between ascent vector and gradient
  bool guiding_defined = false;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
};

struct Metrics {
  bool trapped = false;
  double trapped_since = std::numeric_limits<double>::quiet_NaN();
  double final_distance = std::numeric_limits<double>::quiet_NaN();
  double min_distance = std::numeric_limits<double>::quiet_NaN();
  double max_deformation = 0.0;
  double max_sigma_decrease = 0.0;  // worst drop between consecutive samples
  std::int64_t singular_holds = 0;
  double first_singular_time = std::numeric_limits<double>::quiet_NaN();
  int robots_final = 0;
  OdeStats ode;
  std::vector<std::string> warnings;
  std::vector<std::string> events_applied;
  bool failed = false;
  std::string error;
  double error_time = std::numeric_limits<double>::quiet_NaN();
};

struct ScenarioResult {
  Trajectory trajectory;
  Metrics metrics;
};

namespace detail {

inline double alignment_angle(const SignalField& field, const Geometry& geom) {
  const Eigen::VectorXd grad = field.gradient(geom.centroid);
  const double gn = grad.norm();
  if (gn == 0.0 || geom.spread <= 0.0) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  const AscentVector l = ascent_from_gradient(grad, geom);
  if (l.norm == 0.0) return std::numeric_limits<double>::quiet_NaN();
  const double c = std::clamp(l.value.dot(grad) / (l.norm * gn), -1.0, 1.0);
  return std::acos(c);
}

}  // namespace detail

/// Integrates one scenario and samples diagnostics on the uniform grid
/// t = 0, sample_dt, 2*sample_dt, ..., floor(t_end/sample_dt)*sample_dt.
/// Resilience events split the integration; deformation baselines reset at
/// each event. Dynamics errors are recorded in the metrics together with the
/// partial trajectory rather than thrown.
inline ScenarioResult run_scenario(const SignalField& field, SwarmState initial,
                                   const SimConfig& sim,
                                   const AscentOptions& ascent = {},
                                   std::vector<ResilienceEvent> events = {}) {
  sim.validate();
  if (initial.dim() != field.dim()) {
    throw ConfigError("swarm: position dimension does not match the field");
  }
  if (sim.mode == Mode::Unicycle && initial.dim() != 2) {
    throw ConfigError("sim.mode: unicycle runs are planar only");
  }
  if (sim.mode == Mode::Free && initial.headings.size() > 0) {
    throw ConfigError("swarm.headings: not used in free mode");
  }
  initial.t = 0.0;

  ScenarioResult result;
  Metrics& metrics = result.metrics;

  Geometry geom0 = decompose(initial.positions);
  if (field.gradient(geom0.centroid).norm() == 0.0) {
    throw ConfigError(
        "initial state: field gradient vanishes at the swarm centroid; "
        "the ascent direction is undefined there");
  }
  if (is_degenerate(geom0)) {
    metrics.warnings.push_back(
        "initial swarm is degenerate: offsets do not span the workspace");
  }

  const double threshold = ascent.resolve_threshold(field);
  if (sim.mode == Mode::Unicycle &&
      initial.heading_error.size() != initial.count()) {
    try {
      initial.heading_error = initial_heading_error(
          field, initial, ascent.omega_d_mode, threshold);
    } catch (const SingularGuidanceError& e) {
      throw ConfigError(std::string("initial state rejected: ") + e.what());
    }
  }

  std::stable_sort(events.begin(), events.end(),
                   [](const ResilienceEvent& a, const ResilienceEvent& b) {
                     return a.time < b.time;
                   });
  for (const auto& ev : events) {
    if (!(ev.time >= 0.0) || !(ev.time <= sim.t_end)) {
      throw ConfigError("harness.events: event time outside [0, t_end]");
    }
  }

  const auto sample_count =
      static_cast<std::int64_t>(std::floor(sim.t_end / sim.sample_dt + 1e-9)) + 1;
  std::vector<double> grid(static_cast<std::size_t>(sample_count));
  for (std::int64_t k = 0; k < sample_count; ++k) {
    grid[static_cast<std::size_t>(k)] = static_cast<double>(k) * sim.sample_dt;
  }

  OdeOptions ode_opt;
  ode_opt.method = sim.integrator;
  ode_opt.rtol = sim.rtol;
  ode_opt.atol = sim.atol;
  ode_opt.h_fixed = sim.h_fixed;

  GuidanceLog guidance;
  SwarmState state = initial;
  Geometry baseline = geom0;

  const auto emit_sample = [&](double t, const Eigen::VectorXd& y) {
    TrajectorySample s;
    s.t = t;
    s.state = unpack_state(y, state.dim(), state.count(), sim.mode, t);
    const Geometry geom = decompose(s.state.positions);
    s.centroid = geom.centroid;
    s.source_distance = (geom.centroid - field.source()).norm();
    s.sigma_centroid = field.value(geom.centroid);
    s.gradient_norm = field.gradient(geom.centroid).norm();
    double deform = 0.0;
    if (geom.offsets.cols() == baseline.offsets.cols()) {
      deform = (geom.offsets - baseline.offsets).colwise().norm().maxCoeff();
    }
    s.deformation = deform;
    s.ascent_angle = detail::alignment_angle(field, geom);
    const GuidingRateMode estimator = sim.mode == Mode::Unicycle
                                          ? ascent.omega_d_mode
                                          : (ascent.direction == DirectionSource::Exact
                                                 ? GuidingRateMode::Analytic
                                                 : GuidingRateMode::Measured);
    // Definedness is the ascent-norm test in any dimension (the planar
    // guiding direction adds nothing to it).
    bool defined = geom.spread > 0.0;
    if (defined) {
      const AscentVector l =
          estimator == GuidingRateMode::Analytic
              ? ascent_from_gradient(field.gradient(geom.centroid), geom)
              : ascent_from_readings(
                    [&] {
                      Eigen::VectorXd readings(geom.offsets.cols());
                      for (Eigen::Index i = 0; i < readings.size(); ++i) {
                        readings[i] = field.value(s.state.positions.col(i));
                      }
                      return readings;
                    }(),
                    geom);
      defined = std::isfinite(l.norm) && l.norm > threshold;
    }
    s.guiding_defined = defined;
    result.trajectory.samples.push_back(std::move(s));
  };

  // Segment boundaries: event times plus the end time.
  std::size_t next_grid = 0;
  std::size_t next_event = 0;
  double t_cursor = 0.0;
  try {
    while (true) {
      const double t_stop =
          next_event < events.size() ? events[next_event].time : sim.t_end;
      const double t_target = std::min(t_stop, sim.t_end);

      std::vector<double> seg_samples;
      std::size_t g = next_grid;
      while (g < grid.size() && grid[g] <= t_target) {
        seg_samples.push_back(grid[g]);
        ++g;
      }

      Eigen::VectorXd y = pack_state(state);
      const int dim = state.dim(), count = state.count();
      OdeStats seg_stats;
      if (sim.mode == Mode::Free) {
        FreeDynamics rhs(field, dim, count, ascent.direction);
        seg_stats = integrate_ode(rhs, t_cursor, t_target, y, seg_samples,
                                  emit_sample, ode_opt);
      } else {
        UnicycleDynamics rhs(field, count, sim, ascent.omega_d_mode, threshold,
                             &guidance);
        seg_stats = integrate_ode(rhs, t_cursor, t_target, y, seg_samples,
                                  emit_sample, ode_opt);
      }
      metrics.ode.steps += seg_stats.steps;
      metrics.ode.accepted += seg_stats.accepted;
      metrics.ode.rejected += seg_stats.rejected;
      metrics.ode.evals += seg_stats.evals;
      next_grid = g;
      state = unpack_state(y, dim, count, sim.mode, t_target);
      t_cursor = t_target;

      if (next_event >= events.size()) break;
      const ResilienceEvent& ev = events[next_event];
      state = apply_resilience_event(state, ev, field,
                                     sim.mode == Mode::Unicycle
                                         ? ascent.omega_d_mode
                                         : GuidingRateMode::Measured,
                                     threshold, &metrics.warnings);
      metrics.events_applied.push_back(
          ev.action == ResilienceEvent::Action::Remove
              ? "remove robot " + std::to_string(ev.index) + " at t=" +
                    std::to_string(ev.time)
              : "add robot at t=" + std::to_string(ev.time));
      baseline = decompose(state.positions);
      ++next_event;
      if (t_cursor >= sim.t_end) break;
    }
  } catch (const IntegrationError& e) {
    metrics.failed = true;
    metrics.error = e.what();
    metrics.error_time = e.time();
  } catch (const DegenerateSwarmError& e) {
    metrics.failed = true;
    metrics.error = e.what();
    metrics.error_time = t_cursor;
  }

  metrics.singular_holds = guidance.singular_holds;
  metrics.first_singular_time = guidance.first_singular_time;
  metrics.robots_final = state.count();

  const auto& samples = result.trajectory.samples;
  if (!samples.empty()) {
    metrics.final_distance = samples.back().source_distance;
    double min_dist = std::numeric_limits<double>::infinity();
    double max_def = 0.0, worst_drop = 0.0;
    std::ptrdiff_t last_outside = -1;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      min_dist = std::min(min_dist, samples[i].source_distance);
      max_def = std::max(max_def, samples[i].deformation);
      if (i > 0) {
        worst_drop = std::max(worst_drop, samples[i - 1].sigma_centroid -
                                              samples[i].sigma_centroid);
      }
      if (samples[i].source_distance >= sim.epsilon) {
        last_outside = static_cast<std::ptrdiff_t>(i);
      }
    }
    metrics.min_distance = min_dist;
    metrics.max_deformation = max_def;
    metrics.max_sigma_decrease = worst_drop;
    if (!metrics.failed) {
      const std::size_t first_inside = static_cast<std::size_t>(last_outside + 1);
      if (first_inside < samples.size()) {
        metrics.trapped = true;
        metrics.trapped_since = samples[first_inside].t;
      }
    }
  }
  return result;
}

}  // namespace swarmseek
