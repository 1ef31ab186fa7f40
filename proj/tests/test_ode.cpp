#include "helpers.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

using namespace swarmseek;
using Catch::Matchers::WithinAbs;

namespace {

const auto decay = [](double, const Eigen::VectorXd& y, Eigen::VectorXd& dydt) {
  dydt = -y;
};

std::vector<double> grid(double t0, double t1, double dt) {
  std::vector<double> g;
  for (double t = t0; t <= t1 + 1e-12; t += dt) g.push_back(std::min(t, t1));
  return g;
}

}  // namespace

TEST_CASE("adaptive integrator solves exponential decay", "[ode]") {
  Eigen::VectorXd y(1);
  y[0] = 1.0;
  const std::vector<double> samples = grid(0.0, 1.0, 0.1);
  std::vector<double> seen_t, seen_y;
  const OdeStats stats = integrate_ode(
      decay, 0.0, 1.0, y, samples,
      [&](double t, const Eigen::VectorXd& yt) {
        seen_t.push_back(t);
        seen_y.push_back(yt[0]);
      });
  CHECK_THAT(y[0], WithinAbs(0.36787944117144233, 1e-7));
  REQUIRE(seen_t.size() == samples.size());
  for (std::size_t i = 0; i < seen_t.size(); ++i) {
    CHECK(seen_t[i] == samples[i]);
    CHECK_THAT(seen_y[i], WithinAbs(std::exp(-seen_t[i]), 1e-6));
  }
  CHECK(stats.accepted + stats.rejected == stats.steps);
  CHECK(stats.accepted > 0);
}

TEST_CASE("zero right-hand side leaves the state bitwise unchanged", "[ode]") {
  Eigen::VectorXd y(3);
  y << 0.1, -2.5, 7.75;
  const Eigen::VectorXd y0 = y;
  const std::vector<double> samples = {0.0, 1.3, 5.0};
  integrate_ode(
      [](double, const Eigen::VectorXd& s, Eigen::VectorXd& dydt) {
        dydt = Eigen::VectorXd::Zero(s.size());
      },
      0.0, 5.0, y, samples,
      [&](double, const Eigen::VectorXd& yt) { CHECK((yt - y0).norm() == 0.0); });
  CHECK((y - y0).norm() == 0.0);
}

TEST_CASE("harmonic oscillator conserves energy at tight tolerance", "[ode]") {
  Eigen::VectorXd y(2);
  y << 1.0, 0.0;
  OdeOptions opt;
  opt.rtol = 1e-9;
  opt.atol = 1e-12;
  integrate_ode(
      [](double, const Eigen::VectorXd& s, Eigen::VectorXd& dydt) {
        dydt.resize(2);
        dydt[0] = s[1];
        dydt[1] = -s[0];
      },
      0.0, 100.0, y, {}, [](double, const Eigen::VectorXd&) {}, opt);
  const double energy = 0.5 * (y[0] * y[0] + y[1] * y[1]);
  CHECK_THAT(energy, WithinAbs(0.5, 0.5 * 1e-6));
}

TEST_CASE("tightening the tolerance tightens the solution", "[ode]") {
  const auto solve = [&](double rtol) {
    Eigen::VectorXd y(1);
    y[0] = 1.0;
    OdeOptions opt;
    opt.rtol = rtol;
    opt.atol = rtol * 1e-2;
    integrate_ode(decay, 0.0, 1.0, y, {}, [](double, const Eigen::VectorXd&) {}, opt);
    return std::abs(y[0] - std::exp(-1.0));
  };
  const double loose = solve(1e-5);
  const double tight = solve(1e-9);
  CHECK(tight < loose);
  CHECK(tight < 1e-8);
}

TEST_CASE("finite-time blowup raises an integration error with its time", "[ode]") {
  Eigen::VectorXd y(1);
  y[0] = 1.0;  // y' = y^2 has a pole at t = 1
  try {
    integrate_ode(
        [](double, const Eigen::VectorXd& s, Eigen::VectorXd& dydt) {
          dydt.resize(1);
          dydt[0] = s[0] * s[0];
        },
        0.0, 2.0, y, {}, [](double, const Eigen::VectorXd&) {});
    FAIL("expected IntegrationError");
  } catch (const IntegrationError& e) {
    CHECK(e.time() > 0.9);
    CHECK(e.time() < 1.05);
  }
}

TEST_CASE("step limit raises an integration error", "[ode]") {
  Eigen::VectorXd y(1);
  y[0] = 1.0;
  OdeOptions opt;
  opt.max_steps = 2;
  CHECK_THROWS_AS(integrate_ode(decay, 0.0, 100.0, y, {},
                                [](double, const Eigen::VectorXd&) {}, opt),
                  IntegrationError);
}

TEST_CASE("fixed-step path matches the adaptive result", "[ode]") {
  Eigen::VectorXd y(1);
  y[0] = 1.0;
  OdeOptions opt;
  opt.method = OdeMethod::Rk4;
  opt.h_fixed = 0.001;
  const std::vector<double> samples = grid(0.0, 1.0, 0.25);
  const OdeStats stats = integrate_ode(
      decay, 0.0, 1.0, y, samples,
      [&](double t, const Eigen::VectorXd& yt) {
        CHECK_THAT(yt[0], WithinAbs(std::exp(-t), 1e-10));
      },
      opt);
  CHECK_THAT(y[0], WithinAbs(0.36787944117144233, 1e-12));
  CHECK(stats.steps >= 1000);
  CHECK(stats.steps <= 1001);
  CHECK(stats.rejected == 0);
}

TEST_CASE("integration over an empty span emits the initial state", "[ode]") {
  Eigen::VectorXd y(2);
  y << 4.0, -1.0;
  const Eigen::VectorXd y0 = y;
  int emitted = 0;
  const std::vector<double> samples = {3.0};
  integrate_ode(decay, 3.0, 3.0, y, samples, [&](double t, const Eigen::VectorXd& yt) {
    CHECK(t == 3.0);
    CHECK((yt - y0).norm() == 0.0);
    ++emitted;
  });
  CHECK(emitted == 1);
  CHECK((y - y0).norm() == 0.0);
}

TEST_CASE("integration input validation", "[ode]") {
  Eigen::VectorXd y(1);
  y[0] = 1.0;
  const auto noop = [](double, const Eigen::VectorXd&) {};

  CHECK_THROWS_AS(integrate_ode(decay, 1.0, 0.0, y, {}, noop), ConfigError);

  const std::vector<double> unordered = {0.5, 0.2};
  CHECK_THROWS_AS(integrate_ode(decay, 0.0, 1.0, y, unordered, noop), ConfigError);

  const std::vector<double> outside = {1.5};
  CHECK_THROWS_AS(integrate_ode(decay, 0.0, 1.0, y, outside, noop), ConfigError);

  OdeOptions bad;
  bad.rtol = 0.0;
  CHECK_THROWS_AS(integrate_ode(decay, 0.0, 1.0, y, {}, noop, bad), ConfigError);
}
