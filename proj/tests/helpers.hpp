#pragma once

#include <swarmseek/swarmseek.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <vector>

namespace swarmseek::test {

// Central-difference gradient of a field, step scaled to the point's magnitude.
inline Eigen::VectorXd fd_gradient(const SignalField& field, const Eigen::VectorXd& point,
                                   double h = 1e-5) {
  const double step = h * std::max(1.0, point.norm());
  Eigen::VectorXd g(point.size());
  for (Eigen::Index k = 0; k < point.size(); ++k) {
    Eigen::VectorXd hi = point, lo = point;
    hi[k] += step;
    lo[k] -= step;
    g[k] = (field.value(hi) - field.value(lo)) / (2.0 * step);
  }
  return g;
}

// Central-difference Hessian computed as the Jacobian of the analytic gradient.
inline Eigen::MatrixXd fd_hessian(const SignalField& field, const Eigen::VectorXd& point,
                                  double h = 1e-5) {
  const double step = h * std::max(1.0, point.norm());
  Eigen::MatrixXd hess(point.size(), point.size());
  for (Eigen::Index k = 0; k < point.size(); ++k) {
    Eigen::VectorXd hi = point, lo = point;
    hi[k] += step;
    lo[k] -= step;
    hess.col(k) = (field.gradient(hi) - field.gradient(lo)) / (2.0 * step);
  }
  return hess;
}

// Uniform draw from the annulus rho in [r_lo, r_hi] around `center`.
inline Eigen::VectorXd annulus_point(Rng& rng, const Eigen::VectorXd& center, double r_lo,
                                     double r_hi) {
  const double rho = r_lo + (r_hi - r_lo) * rng.uniform();
  const double ang = 2.0 * kPi * rng.uniform();
  Eigen::VectorXd p = center;
  p[0] += rho * std::cos(ang);
  p[1] += rho * std::sin(ang);
  return p;
}

// N robots on a circle of radius `radius` around `center`, equally spaced.
inline Eigen::MatrixXd circle_positions(const Eigen::VectorXd& center, double radius, int count,
                                        double phase = 0.0) {
  Eigen::MatrixXd pos(2, count);
  for (int i = 0; i < count; ++i) {
    const double a = phase + 2.0 * kPi * i / count;
    pos.col(i) = center + radius * Eigen::Vector2d(std::cos(a), std::sin(a));
  }
  return pos;
}

// The four-robot cross used throughout: offsets (+-1, 0), (0, +-1) around `center`.
inline Eigen::MatrixXd cross_positions(const Eigen::VectorXd& center) {
  Eigen::MatrixXd pos(2, 4);
  pos.col(0) = center + Eigen::Vector2d(1, 0);
  pos.col(1) = center + Eigen::Vector2d(-1, 0);
  pos.col(2) = center + Eigen::Vector2d(0, 1);
  pos.col(3) = center + Eigen::Vector2d(0, -1);
  return pos;
}

inline Eigen::VectorXd readings_of(const SignalField& field, const Eigen::MatrixXd& positions) {
  Eigen::VectorXd r(positions.cols());
  for (Eigen::Index i = 0; i < positions.cols(); ++i) r[i] = field.value(positions.col(i));
  return r;
}

}  // namespace swarmseek::test
