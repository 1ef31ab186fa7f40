#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>

#include <Eigen/Dense>

#include "swarmseek/common.hpp"

namespace swarmseek {

enum class OdeMethod { Dopri45, Rk4 };

struct OdeOptions {
  OdeMethod method = OdeMethod::Dopri45;
  double rtol = 1e-8;
  double atol = 1e-10;
  double h_fixed = 0.01;  // rk4 step
  double h_min = 1e-12;   // adaptive: below this the step controller gives up
  std::int64_t max_steps = 100'000'000;
};

struct OdeStats {
  std::int64_t steps = 0;
  std::int64_t accepted = 0;
  std::int64_t rejected = 0;
  std::int64_t evals = 0;
};

namespace detail {

// Dormand-Prince 5(4) tableau, FSAL form.
inline constexpr double kC2 = 0.2, kC3 = 0.3, kC4 = 0.8, kC5 = 8.0 / 9.0;
inline constexpr double kA21 = 0.2;
inline constexpr double kA31 = 3.0 / 40.0, kA32 = 9.0 / 40.0;
inline constexpr double kA41 = 44.0 / 45.0, kA42 = -56.0 / 15.0,
                        kA43 = 32.0 / 9.0;
inline constexpr double kA51 = 19372.0 / 6561.0, kA52 = -25360.0 / 2187.0,
                        kA53 = 64448.0 / 6561.0, kA54 = -212.0 / 729.0;
inline constexpr double kA61 = 9017.0 / 3168.0, kA62 = -355.0 / 33.0,
                        kA63 = 46732.0 / 5247.0, kA64 = 49.0 / 176.0,
                        kA65 = -5103.0 / 18656.0;
inline constexpr double kA71 = 35.0 / 384.0, kA73 = 500.0 / 1113.0,
                        kA74 = 125.0 / 192.0, kA75 = -2187.0 / 6784.0,
                        kA76 = 11.0 / 84.0;
// Difference between the 5th- and embedded 4th-order weights.
inline constexpr double kE1 = 71.0 / 57600.0, kE3 = -71.0 / 16695.0,
                        kE4 = 71.0 / 1920.0, kE5 = -17253.0 / 339200.0,
                        kE6 = 22.0 / 525.0, kE7 = -1.0 / 40.0;
// Weights of the quartic interpolant's highest term.
inline constexpr double kD1 = -12715105075.0 / 11282082432.0,
                        kD3 = 87487479700.0 / 32700410799.0,
                        kD4 = -10690763975.0 / 1880347072.0,
                        kD5 = 701980252875.0 / 199316789632.0,
                        kD6 = -1453857185.0 / 822651844.0,
                        kD7 = 69997945.0 / 29380423.0;

// Continuous extension over one accepted step; order 4 in the step size.
struct DenseSegment {
  double t0 = 0.0, h = 0.0;
  Eigen::VectorXd r1, r2, r3, r4, r5;

  Eigen::VectorXd at(double t) const {
    const double theta = h != 0.0 ? (t - t0) / h : 0.0;
    const double th = std::clamp(theta, 0.0, 1.0);
    const double th1 = 1.0 - th;
    return r1 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
  }
};

// Cubic Hermite over one fixed step, for rk4 sampling.
struct HermiteSegment {
  double t0 = 0.0, h = 0.0;
  Eigen::VectorXd y0, y1, f0, f1;

  Eigen::VectorXd at(double t) const {
    const double th = h != 0.0 ? std::clamp((t - t0) / h, 0.0, 1.0) : 0.0;
    const double th2 = th * th, th3 = th2 * th;
    return (2.0 * th3 - 3.0 * th2 + 1.0) * y0 +
           ((th3 - 2.0 * th2 + th) * h) * f0 +
           (-2.0 * th3 + 3.0 * th2) * y1 + ((th3 - th2) * h) * f1;
  }
};

inline double error_norm(const Eigen::VectorXd& err, const Eigen::VectorXd& y0,
                         const Eigen::VectorXd& y1, double atol, double rtol) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < err.size(); ++i) {
    const double sk =
        atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const double q = err[i] / sk;
    acc += q * q;
  }
  return std::sqrt(acc / static_cast<double>(err.size()));
}

template <class Rhs>
double initial_step(Rhs& rhs, double t0, const Eigen::VectorXd& y0,
                    const Eigen::VectorXd& f0, double t1, double atol,
                    double rtol, OdeStats& stats) {
  const double span = t1 - t0;
  double dnf = 0.0, dny = 0.0;
  for (Eigen::Index i = 0; i < y0.size(); ++i) {
    const double sk = atol + rtol * std::abs(y0[i]);
    dnf += (f0[i] / sk) * (f0[i] / sk);
    dny += (y0[i] / sk) * (y0[i] / sk);
  }
  double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * std::sqrt(dny / dnf);
  h = std::min(h, span);

  Eigen::VectorXd y1 = y0 + h * f0;
  Eigen::VectorXd f1(y0.size());
  rhs(t0 + h, y1, f1);
  ++stats.evals;
  double der2 = 0.0;
  for (Eigen::Index i = 0; i < y0.size(); ++i) {
    const double sk = atol + rtol * std::abs(y0[i]);
    const double d = (f1[i] - f0[i]) / sk;
    der2 += d * d;
  }
  der2 = std::sqrt(der2) / h;
  const double der12 = std::max(der2, std::sqrt(dnf));
  const double h1 =
      der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
  return std::min({100.0 * h, h1, span});
}

}  // namespace detail

/// Integrates y' = rhs(t, y) from t0 to t1 (t1 >= t0), emitting dense-output
/// samples at the requested ascending times (all within [t0, t1]); `y` holds
/// y(t1) on return.
///
///   rhs(t, y, dydt)   fills dydt, same size as y
///   on_sample(t, y)   called once per entry of sample_times, in order
///
/// Adaptive path is Dormand-Prince 5(4) with the classic quartic continuous
/// extension and PI step control; a step collapse below h_min raises
/// IntegrationError carrying the time of failure. The rk4 path takes fixed
/// h_fixed steps (final step truncated) and samples via cubic Hermite.
/// Both paths are bitwise deterministic for identical inputs.
template <class Rhs, class Sampler>
OdeStats integrate_ode(Rhs&& rhs, double t0, double t1, Eigen::VectorXd& y,
                       std::span<const double> sample_times,
                       Sampler&& on_sample, const OdeOptions& opt = {}) {
  if (!(t1 >= t0)) throw ConfigError("ode: t1 must be >= t0");
  if (!(opt.rtol > 0.0) || !(opt.atol > 0.0)) {
    throw ConfigError("ode: tolerances must be > 0");
  }
  for (std::size_t i = 0; i < sample_times.size(); ++i) {
    if (i > 0 && !(sample_times[i] >= sample_times[i - 1])) {
      throw ConfigError("ode: sample times must be ascending");
    }
    if (sample_times[i] < t0 - 1e-12 || sample_times[i] > t1 + 1e-12) {
      throw ConfigError("ode: sample time outside [t0, t1]");
    }
  }

  OdeStats stats;
  std::size_t next_sample = 0;
  const auto emit_until = [&](double t_reached, const auto& segment) {
    while (next_sample < sample_times.size() &&
           sample_times[next_sample] <= t_reached) {
      on_sample(sample_times[next_sample], segment.at(sample_times[next_sample]));
      ++next_sample;
    }
  };
  const auto emit_point = [&](double t, const Eigen::VectorXd& yt) {
    while (next_sample < sample_times.size() &&
           sample_times[next_sample] <= t) {
      on_sample(sample_times[next_sample], yt);
      ++next_sample;
    }
  };

  emit_point(t0, y);
  if (t1 == t0) {
    emit_point(t1, y);
    return stats;
  }

  const Eigen::Index n = y.size();
  Eigen::VectorXd k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n);

  if (opt.method == OdeMethod::Rk4) {
    if (!(opt.h_fixed > 0.0)) throw ConfigError("ode: h_fixed must be > 0");
    double t = t0;
    rhs(t, y, k1);
    ++stats.evals;
    detail::HermiteSegment seg;
    while (t < t1) {
      if (stats.steps >= opt.max_steps) {
        throw IntegrationError("ode: step limit exceeded", t);
      }
      const double h = std::min(opt.h_fixed, t1 - t);
      ytmp = y + (0.5 * h) * k1;
      rhs(t + 0.5 * h, ytmp, k2);
      ytmp = y + (0.5 * h) * k2;
      rhs(t + 0.5 * h, ytmp, k3);
      ytmp = y + h * k3;
      rhs(t + h, ytmp, k4);
      Eigen::VectorXd y1 =
          y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      const double t_new = t + h;
      rhs(t_new, y1, k7);  // start slope of the next step
      stats.evals += 4;
      ++stats.steps;
      ++stats.accepted;
      seg = detail::HermiteSegment{t, h, y, y1, k1, k7};
      emit_until(t_new, seg);
      y.swap(y1);
      k1.swap(k7);
      t = t_new;
    }
    emit_point(t1, y);
    return stats;
  }

  // Dormand-Prince 5(4).
  using namespace detail;
  constexpr double kSafe = 0.9, kBeta = 0.04, kExpo1 = 0.2 - kBeta * 0.75;
  constexpr double kFacc1 = 1.0 / 0.2, kFacc2 = 1.0 / 10.0;
  double t = t0;
  rhs(t, y, k1);
  ++stats.evals;
  double h = initial_step(rhs, t, y, k1, t1, opt.atol, opt.rtol, stats);
  double facold = 1e-4;
  bool rejected = false;
  DenseSegment seg;

  while (t < t1) {
    if (stats.steps >= opt.max_steps) {
      throw IntegrationError("ode: step limit exceeded", t);
    }
    bool last = false;
    if (t + 1.01 * h >= t1) {
      h = t1 - t;
      last = true;
    }

    ytmp = y + h * (kA21 * k1);
    rhs(t + kC2 * h, ytmp, k2);
    ytmp = y + h * (kA31 * k1 + kA32 * k2);
    rhs(t + kC3 * h, ytmp, k3);
    ytmp = y + h * (kA41 * k1 + kA42 * k2 + kA43 * k3);
    rhs(t + kC4 * h, ytmp, k4);
    ytmp = y + h * (kA51 * k1 + kA52 * k2 + kA53 * k3 + kA54 * k4);
    rhs(t + kC5 * h, ytmp, k5);
    ytmp = y + h * (kA61 * k1 + kA62 * k2 + kA63 * k3 + kA64 * k4 + kA65 * k5);
    rhs(t + h, ytmp, k6);
    Eigen::VectorXd y1 =
        y + h * (kA71 * k1 + kA73 * k3 + kA74 * k4 + kA75 * k5 + kA76 * k6);
    rhs(t + h, y1, k7);
    stats.evals += 6;
    ++stats.steps;

    const Eigen::VectorXd errv =
        h * (kE1 * k1 + kE3 * k3 + kE4 * k4 + kE5 * k5 + kE6 * k6 + kE7 * k7);
    double err = error_norm(errv, y, y1, opt.atol, opt.rtol);
    if (!std::isfinite(err)) err = 1e10;

    const double fac11 = std::pow(err, kExpo1);
    double fac = fac11 / std::pow(facold, kBeta);
    fac = std::max(kFacc2, std::min(kFacc1, fac / kSafe));
    double h_new = h / fac;

    if (err <= 1.0) {
      facold = std::max(err, 1e-4);
      ++stats.accepted;
      const Eigen::VectorXd ydiff = y1 - y;
      const Eigen::VectorXd bspl = h * k1 - ydiff;
      seg.t0 = t;
      seg.h = h;
      seg.r1 = y;
      seg.r2 = ydiff;
      seg.r3 = bspl;
      seg.r4 = ydiff - h * k7 - bspl;
      seg.r5 = h * (kD1 * k1 + kD3 * k3 + kD4 * k4 + kD5 * k5 + kD6 * k6 +
                    kD7 * k7);
      const double t_new = last ? t1 : t + h;
      emit_until(t_new, seg);
      k1.swap(k7);  // first-same-as-last
      y.swap(y1);
      t = t_new;
      if (rejected) h_new = std::min(h_new, h);
      rejected = false;
      h = h_new;
    } else {
      ++stats.rejected;
      h_new = h / std::min(kFacc1, fac11 / kSafe);
      rejected = true;
      if (!(h_new >= opt.h_min)) {
        throw IntegrationError("ode: step size collapsed below h_min", t);
      }
      h = h_new;
    }
  }
  emit_point(t1, y);
  return stats;
}

}  // namespace swarmseek
