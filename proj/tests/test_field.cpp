#include "helpers.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace swarmseek;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

SignalField unit_gaussian() { return SignalField::gaussian(1.0, 10.0, Eigen::Vector2d(0, 0)); }

}  // namespace

TEST_CASE("gaussian field at the peak", "[field]") {
  const auto field = unit_gaussian();
  const Eigen::Vector2d peak(0, 0);
  CHECK(field.value(peak) == 1.0);
  CHECK(field.gradient(peak).norm() == 0.0);
  const Eigen::MatrixXd hess = field.hessian(peak);
  CHECK_THAT(hess(0, 0), WithinAbs(-0.01, 1e-18));
  CHECK_THAT(hess(1, 1), WithinAbs(-0.01, 1e-18));
  CHECK_THAT(hess(0, 1), WithinAbs(0.0, 1e-18));
}

TEST_CASE("gaussian field one length-scale from the peak", "[field]") {
  // Frozen: sigma = exp(-1/2), grad = (-sigma/10, 0); the radial Hessian entry
  // vanishes on the gradient-max ring rho = s, the tangential one is -sigma/s^2.
  const auto field = unit_gaussian();
  const Eigen::Vector2d at(10, 0);
  CHECK_THAT(field.value(at), WithinRel(0.6065306597126334236, 1e-15));
  CHECK_THAT(field.gradient(at)[0], WithinRel(-0.06065306597126334236, 1e-15));
  CHECK_THAT(field.gradient(at)[1], WithinAbs(0.0, 1e-18));
  const Eigen::MatrixXd hess = field.hessian(at);
  CHECK_THAT(hess(0, 0), WithinAbs(0.0, 1e-17));
  CHECK_THAT(hess(1, 1), WithinRel(-0.006065306597126334236, 1e-15));
}

TEST_CASE("quadratic field closed forms", "[field]") {
  const auto field = SignalField::quadratic(1.0, 10.0, Eigen::Matrix2d::Identity(),
                                            Eigen::Vector2d(0, 0), 50.0);
  const Eigen::Vector2d at(1, 2);
  CHECK_THAT(field.value(at), WithinRel(5.0, 1e-15));
  CHECK_THAT(field.gradient(at)[0], WithinRel(-2.0, 1e-15));
  CHECK_THAT(field.gradient(at)[1], WithinRel(-4.0, 1e-15));
  const Eigen::MatrixXd hess = field.hessian(at);
  CHECK_THAT(hess(0, 0), WithinRel(-2.0, 1e-15));
  CHECK_THAT(hess(1, 1), WithinRel(-2.0, 1e-15));
  CHECK_THAT(hess(0, 1), WithinAbs(0.0, 1e-18));
}

TEST_CASE("field bounds closed forms", "[field]") {
  // curvature is half the Hessian spectral-norm bound, so compare 2 * curvature.
  const FieldBounds gauss = unit_gaussian().bounds();
  CHECK_THAT(gauss.gradient_max, WithinRel(0.06065306597126334236, 1e-15));
  CHECK_THAT(2.0 * gauss.curvature, WithinRel(0.01, 1e-15));

  const auto quad = SignalField::quadratic(1.0, 10.0, Eigen::Matrix2d::Identity(),
                                           Eigen::Vector2d(0, 0), 50.0);
  const FieldBounds qb = quad.bounds();
  CHECK_THAT(qb.gradient_max, WithinRel(100.0, 1e-15));
  CHECK_THAT(2.0 * qb.curvature, WithinRel(2.0, 1e-15));
}

TEST_CASE("field bounds dominate sampled derivatives", "[field]") {
  Rng rng(17);
  const auto gauss = SignalField::gaussian(3.0, 7.0, Eigen::Vector2d(2, -1));
  const double radius = 40.0;
  const auto quad =
      SignalField::quadratic(0.5, 20.0,
                             (Eigen::Matrix2d() << 2.0, 0.3, 0.3, 1.0).finished(),
                             Eigen::Vector2d(-3, 4), radius);
  const FieldBounds gb = gauss.bounds();
  const FieldBounds qb = quad.bounds();
  for (int i = 0; i < 10000; ++i) {
    const Eigen::VectorXd pg = test::annulus_point(rng, gauss.source(), 0.0, 60.0);
    CHECK(gauss.gradient(pg).norm() <= gb.gradient_max * (1.0 + 1e-12));
    const Eigen::VectorXd ev =
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(gauss.hessian(pg)).eigenvalues();
    CHECK(ev.cwiseAbs().maxCoeff() <= 2.0 * gb.curvature * (1.0 + 1e-12));

    const Eigen::VectorXd pq = test::annulus_point(rng, quad.source(), 0.0, radius);
    CHECK(quad.gradient(pq).norm() <= qb.gradient_max * (1.0 + 1e-12));
    const Eigen::VectorXd evq =
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(quad.hessian(pq)).eigenvalues();
    CHECK(evq.cwiseAbs().maxCoeff() <= 2.0 * qb.curvature * (1.0 + 1e-12));
  }
}

TEST_CASE("analytic derivatives match central differences", "[field]") {
  Rng rng(99);
  const auto gauss = SignalField::gaussian(2.0, 12.0, Eigen::Vector2d(5, 5));
  const auto quad =
      SignalField::quadratic(1.5, 30.0,
                             (Eigen::Matrix2d() << 1.0, -0.2, -0.2, 0.7).finished(),
                             Eigen::Vector2d(0, 0), 25.0);
  for (const auto* field : {&gauss, &quad}) {
    for (int i = 0; i < 200; ++i) {
      const Eigen::VectorXd p = test::annulus_point(rng, field->source(), 0.5, 20.0);
      const Eigen::VectorXd g = field->gradient(p);
      const Eigen::VectorXd g_fd = test::fd_gradient(*field, p);
      REQUIRE((g - g_fd).norm() <= 1e-6 * std::max(1.0, g.norm()));
      const Eigen::MatrixXd h = field->hessian(p);
      const Eigen::MatrixXd h_fd = test::fd_hessian(*field, p);
      REQUIRE((h - h_fd).norm() <= 1e-4 * std::max(1.0, h.norm()));
    }
  }
}

TEST_CASE("source is the maximizer", "[field]") {
  Rng rng(3);
  const auto gauss = SignalField::gaussian(2.0, 9.0, Eigen::Vector2d(-4, 1));
  const auto quad = SignalField::quadratic(1.0, 50.0, Eigen::Matrix2d::Identity(),
                                           Eigen::Vector2d(3, 3), 40.0);
  for (const auto* field : {&gauss, &quad}) {
    const double peak = field->value(field->source());
    for (int i = 0; i < 500; ++i) {
      const Eigen::VectorXd p = test::annulus_point(rng, field->source(), 1e-3, 35.0);
      CHECK(field->value(p) < peak);
    }
  }
}

TEST_CASE("three-dimensional gaussian", "[field]") {
  const auto field = SignalField::gaussian(1.0, 5.0, Eigen::Vector3d(1, 2, 3));
  CHECK(field.dim() == 3);
  const Eigen::Vector3d at(1, 2, 8);
  CHECK_THAT(field.value(at), WithinRel(std::exp(-0.5), 1e-14));
  const Eigen::VectorXd g = field.gradient(at);
  const Eigen::VectorXd g_fd = test::fd_gradient(field, at);
  CHECK((g - g_fd).norm() <= 1e-6 * g.norm());
}

TEST_CASE("field construction rejects bad parameters", "[field]") {
  CHECK_THROWS_AS(SignalField::gaussian(0.0, 10.0, Eigen::Vector2d(0, 0)), ConfigError);
  CHECK_THROWS_AS(SignalField::gaussian(1.0, -1.0, Eigen::Vector2d(0, 0)), ConfigError);
  CHECK_THROWS_AS(SignalField::gaussian(1.0, 10.0, Eigen::VectorXd::Zero(1)), ConfigError);

  Eigen::Matrix2d indefinite;
  indefinite << 1.0, 0.0, 0.0, -1.0;
  CHECK_THROWS_AS(SignalField::quadratic(1.0, 10.0, indefinite, Eigen::Vector2d(0, 0), 10.0),
                  ConfigError);
  Eigen::Matrix2d asym;
  asym << 1.0, 0.5, 0.0, 1.0;
  CHECK_THROWS_AS(SignalField::quadratic(1.0, 10.0, asym, Eigen::Vector2d(0, 0), 10.0),
                  ConfigError);

  // Quadratic bounds are only defined over a declared operating radius.
  const auto unbounded = SignalField::quadratic(1.0, 10.0, Eigen::Matrix2d::Identity(),
                                                Eigen::Vector2d(0, 0));
  CHECK_THROWS_AS(unbounded.bounds(), ConfigError);
}
