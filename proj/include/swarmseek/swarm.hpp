#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "swarmseek/common.hpp"

namespace swarmseek {

/// Full state of a swarm of point robots. Positions are column vectors of an
/// n x N matrix. Headings and heading errors are only populated for the
/// constant-speed (unicycle) mode; heading_error is integrated as state, so
/// it is not kept wrapped.
struct SwarmState {
  double t = 0.0;
  Eigen::MatrixXd positions;     // n x N
  Eigen::VectorXd headings;      // N (unicycle mode), else empty
  Eigen::VectorXd heading_error; // N (unicycle mode), else empty

  int dim() const { return static_cast<int>(positions.rows()); }
  int count() const { return static_cast<int>(positions.cols()); }
  bool has_headings() const {
    return headings.size() > 0 && headings.size() == positions.cols();
  }
};

/// Centroid decomposition of a position set: positions = centroid + offsets,
/// offsets sum to zero, spread = max offset norm.
struct Geometry {
  Eigen::VectorXd centroid;  // n
  Eigen::MatrixXd offsets;   // n x N
  double spread = 0.0;
};

inline Geometry decompose(const Eigen::MatrixXd& positions) {
  if (positions.cols() < 1) {
    throw DegenerateSwarmError("swarm: at least one robot required");
  }
  if (!positions.allFinite()) {
    throw ConfigError("swarm: positions must be finite");
  }
  Geometry g;
  g.centroid = positions.rowwise().mean();
  g.offsets = positions.colwise() - g.centroid;
  g.spread = g.offsets.colwise().norm().maxCoeff();
  return g;
}

inline Geometry decompose(const SwarmState& state) {
  return decompose(state.positions);
}

/// Smallest singular value of the offsets normalized by the spread. Zero if
/// and only if the offsets fail to span the workspace (all robots collinear
/// through the centroid in 2-D, coplanar in 3-D, or coincident).
inline double degeneracy_margin(const Geometry& g) {
  if (g.spread <= 0.0) return 0.0;
  const auto n = g.offsets.rows();
  if (g.offsets.cols() < n) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(g.offsets / g.spread);
  return svd.singularValues().minCoeff();
}

/// Margin below which a swarm is reported as degenerate.
inline double degeneracy_threshold(int count) {
  return 1e-6 * std::sqrt(static_cast<double>(count));
}

inline bool is_degenerate(const Geometry& g) {
  return degeneracy_margin(g) <=
         degeneracy_threshold(static_cast<int>(g.offsets.cols()));
}

}  // namespace swarmseek
