#pragma once

#include <cmath>
#include <limits>
#include <utility>

#include <Eigen/Dense>

#include "swarmseek/common.hpp"

namespace swarmseek {

enum class FieldKind { Gaussian, Quadratic };

struct FieldSample {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

/// Global bounds of a field over its domain of validity:
///   gradient_max  >= ||grad(r)||            for all admissible r
///   curvature     >= ||hessian(r)||_2 / 2   (spectral norm)
struct FieldBounds {
  double gradient_max = 0.0;
  double curvature = 0.0;
};

/// Smooth scalar signal over the plane (or 3-space) with a unique maximum at
/// the source. Two closed-form models:
///
///   gaussian:   sigma(r) = amplitude * exp(-||r - source||^2 / (2 scale^2))
///   quadratic:  sigma(r) = amplitude * (offset - (r - source)^T Q (r - source))
///
/// Gradients and Hessians are exact. Bounds are closed-form for the gaussian;
/// the quadratic has an unbounded gradient, so its bounds are taken over a
/// caller-supplied operating radius around the source.
class SignalField {
 public:
  static SignalField gaussian(double amplitude, double scale,
                              Eigen::VectorXd source) {
    if (!(amplitude > 0.0)) throw ConfigError("field.amplitude: must be > 0");
    if (!(scale > 0.0)) throw ConfigError("field.scale: must be > 0");
    check_source(source);
    SignalField f;
    f.kind_ = FieldKind::Gaussian;
    f.amplitude_ = amplitude;
    f.scale_ = scale;
    f.source_ = std::move(source);
    return f;
  }

  static SignalField quadratic(
      double amplitude, double offset, Eigen::MatrixXd curvature,
      Eigen::VectorXd source,
      double operating_radius = std::numeric_limits<double>::quiet_NaN()) {
    if (!(amplitude > 0.0)) throw ConfigError("field.amplitude: must be > 0");
    if (!(offset > 0.0)) throw ConfigError("field.offset: must be > 0");
    check_source(source);
    if (curvature.rows() != source.size() ||
        curvature.cols() != source.size()) {
      throw ConfigError("field.curvature: shape must match field.source");
    }
    if (!curvature.allFinite()) {
      throw ConfigError("field.curvature: entries must be finite");
    }
    const double skew = (curvature - curvature.transpose()).norm();
    if (skew > 1e-12 * std::max(1.0, curvature.norm())) {
      throw ConfigError("field.curvature: must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(curvature);
    if (es.eigenvalues().minCoeff() <= 0.0) {
      throw ConfigError("field.curvature: must be positive definite");
    }
    if (!std::isnan(operating_radius) && !(operating_radius > 0.0)) {
      throw ConfigError("field.operating_radius: must be > 0");
    }
    SignalField f;
    f.kind_ = FieldKind::Quadratic;
    f.amplitude_ = amplitude;
    f.offset_ = offset;
    f.curvature_ = std::move(curvature);
    f.curvature_max_eig_ = es.eigenvalues().maxCoeff();
    f.source_ = std::move(source);
    f.operating_radius_ = operating_radius;
    return f;
  }

  FieldKind kind() const noexcept { return kind_; }
  int dim() const noexcept { return static_cast<int>(source_.size()); }
  const Eigen::VectorXd& source() const noexcept { return source_; }
  double amplitude() const noexcept { return amplitude_; }
  double scale() const noexcept { return scale_; }
  double offset() const noexcept { return offset_; }
  const Eigen::MatrixXd& curvature() const noexcept { return curvature_; }
  double operating_radius() const noexcept { return operating_radius_; }

  double value(const Eigen::VectorXd& r) const {
    check_point(r);
    const Eigen::VectorXd q = r - source_;
    if (kind_ == FieldKind::Gaussian) {
      return amplitude_ * std::exp(-q.squaredNorm() / (2.0 * scale_ * scale_));
    }
    return amplitude_ * (offset_ - q.dot(curvature_ * q));
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& r) const {
    check_point(r);
    const Eigen::VectorXd q = r - source_;
    if (kind_ == FieldKind::Gaussian) {
      const double s2 = scale_ * scale_;
      const double v = amplitude_ * std::exp(-q.squaredNorm() / (2.0 * s2));
      return (-v / s2) * q;
    }
    return -2.0 * amplitude_ * (curvature_ * q);
  }

  Eigen::MatrixXd hessian(const Eigen::VectorXd& r) const {
    check_point(r);
    const Eigen::VectorXd q = r - source_;
    const auto n = source_.size();
    if (kind_ == FieldKind::Gaussian) {
      const double s2 = scale_ * scale_;
      const double v = amplitude_ * std::exp(-q.squaredNorm() / (2.0 * s2));
      return (v / (s2 * s2)) * (q * q.transpose()) -
             (v / s2) * Eigen::MatrixXd::Identity(n, n);
    }
    return -2.0 * amplitude_ * curvature_;
  }

  FieldSample evaluate(const Eigen::VectorXd& r) const {
    return FieldSample{value(r), gradient(r), hessian(r)};
  }

  /// Closed-form bounds. Gaussian: the radial gradient profile peaks at
  /// ||q|| = scale, giving gradient_max = amplitude / (scale sqrt(e)); the
  /// Hessian spectral norm is maximal at the source where it equals
  /// amplitude / scale^2 (the radial branch further out stays below it), so
  /// curvature = amplitude / (2 scale^2). Quadratic: the Hessian is constant
  /// and the gradient grows linearly, bounded over the operating radius.
  FieldBounds bounds() const {
    if (kind_ == FieldKind::Gaussian) {
      return FieldBounds{amplitude_ / (scale_ * std::sqrt(std::exp(1.0))),
                         amplitude_ / (2.0 * scale_ * scale_)};
    }
    if (std::isnan(operating_radius_)) {
      throw ConfigError(
          "field.operating_radius: required to bound a quadratic field "
          "(its gradient is unbounded)");
    }
    const double lam = 2.0 * amplitude_ * curvature_max_eig_;
    return FieldBounds{lam * operating_radius_, lam / 2.0};
  }

 private:
  SignalField() = default;

  static void check_source(const Eigen::VectorXd& source) {
    if (source.size() != 2 && source.size() != 3) {
      throw ConfigError("field.source: dimension must be 2 or 3");
    }
    if (!source.allFinite()) {
      throw ConfigError("field.source: coordinates must be finite");
    }
  }

  void check_point(const Eigen::VectorXd& r) const {
    if (r.size() != source_.size()) {
      throw ConfigError("field evaluation: point dimension mismatch");
    }
  }

  FieldKind kind_ = FieldKind::Gaussian;
  double amplitude_ = 1.0;
  double scale_ = 1.0;
  double offset_ = 0.0;
  Eigen::MatrixXd curvature_;
  double curvature_max_eig_ = 0.0;
  Eigen::VectorXd source_;
  double operating_radius_ = std::numeric_limits<double>::quiet_NaN();
};

}  // namespace swarmseek
