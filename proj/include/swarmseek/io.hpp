#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "swarmseek/common.hpp"
#include "swarmseek/harness.hpp"
#include "swarmseek/verify.hpp"

namespace swarmseek {

/// Shortest round-trip decimal rendering; the reason repeated runs are
/// byte-identical regardless of locale or stream state.
inline std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw ConfigError("io: number formatting failed");
  return std::string(buf, ptr);
}

inline std::string trajectory_csv(const Trajectory& trajectory, int dim) {
  std::string out = dim == 3
                        ? "t,rc_x,rc_y,rc_z,dist,sigma_rc,grad_norm,"
                          "deformation,theta,guiding_defined\n"
                        : "t,rc_x,rc_y,dist,sigma_rc,grad_norm,"
                          "deformation,theta,guiding_defined\n";
  for (const auto& s : trajectory.samples) {
    out += format_double(s.t);
    for (int d = 0; d < dim; ++d) {
      out += ',';
      out += format_double(s.centroid[d]);
    }
    out += ',';
    out += format_double(s.source_distance);
    out += ',';
    out += format_double(s.sigma_centroid);
    out += ',';
    out += format_double(s.gradient_norm);
    out += ',';
    out += format_double(s.deformation);
    out += ',';
    out += format_double(s.ascent_angle);
    out += ',';
    out += s.guiding_defined ? '1' : '0';
    out += '\n';
  }
  return out;
}

namespace detail {
using nlohmann::ordered_json;
}

inline detail::ordered_json trajectory_json(const Trajectory& trajectory,
                                            int dim) {
  detail::ordered_json samples = detail::ordered_json::array();
  for (const auto& s : trajectory.samples) {
    detail::ordered_json row;
    row["t"] = s.t;
    detail::ordered_json rc = detail::ordered_json::array();
    for (int d = 0; d < dim; ++d) rc.push_back(s.centroid[d]);
    row["rc"] = std::move(rc);
    row["dist"] = s.source_distance;
    row["sigma_rc"] = s.sigma_centroid;
    row["grad_norm"] = s.gradient_norm;
    row["deformation"] = s.deformation;
    row["theta"] = s.ascent_angle;
    row["guiding_defined"] = s.guiding_defined;
    samples.push_back(std::move(row));
  }
  detail::ordered_json root;
  root["samples"] = std::move(samples);
  return root;
}

inline detail::ordered_json metrics_json(const Metrics& m) {
  detail::ordered_json j;
  j["trapped"] = m.trapped;
  j["trapped_since"] = m.trapped_since;
  j["final_distance"] = m.final_distance;
  j["min_distance"] = m.min_distance;
  j["max_deformation"] = m.max_deformation;
  j["max_sigma_decrease"] = m.max_sigma_decrease;
  j["singular_holds"] = m.singular_holds;
  j["first_singular_time"] = m.first_singular_time;
  j["robots_final"] = m.robots_final;
  detail::ordered_json ode;
  ode["steps"] = m.ode.steps;
  ode["accepted"] = m.ode.accepted;
  ode["rejected"] = m.ode.rejected;
  ode["evals"] = m.ode.evals;
  j["ode"] = std::move(ode);
  j["warnings"] = m.warnings;
  j["events_applied"] = m.events_applied;
  j["failed"] = m.failed;
  j["error"] = m.error;
  j["error_time"] = m.error_time;
  return j;
}

inline detail::ordered_json reports_json(
    const std::vector<VerificationReport>& reports) {
  detail::ordered_json arr = detail::ordered_json::array();
  for (const auto& r : reports) {
    detail::ordered_json j;
    j["property"] = r.property;
    j["pass"] = r.pass();
    j["samples"] = r.samples;
    j["violations"] = r.violations;
    j["worst_margin"] = r.worst_margin;
    j["witness_seed"] = r.witness_seed;
    j["witness"] = r.witness;
    arr.push_back(std::move(j));
  }
  detail::ordered_json root;
  root["reports"] = std::move(arr);
  return root;
}

inline std::string report_line(const VerificationReport& r) {
  return std::string(r.pass() ? "[PASS] " : "[FAIL] ") + r.property +
         ": samples=" + std::to_string(r.samples) +
         " violations=" + std::to_string(r.violations) +
         " worst_margin=" + format_double(r.worst_margin);
}

inline void write_text_file(const std::filesystem::path& path,
                            const std::string& content) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ConfigError("io: cannot open " + path.string() + " for writing");
  }
  out << content;
  if (!out) throw ConfigError("io: write failed for " + path.string());
}

}  // namespace swarmseek
