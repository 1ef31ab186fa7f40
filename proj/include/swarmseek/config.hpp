#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "swarmseek/common.hpp"
#include "swarmseek/dynamics.hpp"
#include "swarmseek/field.hpp"
#include "swarmseek/harness.hpp"

namespace swarmseek {

enum class Preset { Convergence, NearDegenerate, KgammaSweep, Resilience };
enum class OutputFormat { Csv, Json };

struct FieldConfig {
  FieldKind kind = FieldKind::Gaussian;
  double amplitude = 1.0;
  double scale = 10.0;                        // gaussian
  double offset = 1.0;                        // quadratic
  std::optional<Eigen::MatrixXd> curvature;   // quadratic, required
  Eigen::VectorXd source = Eigen::Vector2d::Zero();
  double operating_radius = std::numeric_limits<double>::quiet_NaN();
};

struct SwarmConfig {
  std::optional<Eigen::MatrixXd> positions;  // n x N, column per robot
  std::optional<Eigen::VectorXd> headings;
  RandomSwarmParams random;  // used when positions are absent
};

struct HarnessConfig {
  int runs = 1;
  std::vector<double> sweep_k_gamma = {1.0, 10.0};
  std::vector<ResilienceEvent> events;
  Preset preset = Preset::Convergence;
};

struct OutputConfig {
  std::string directory = "out";
  OutputFormat format = OutputFormat::Csv;
};

namespace detail {

using nlohmann::ordered_json;

[[noreturn]] inline void bad_key(const std::string& path,
                                 const std::string& what) {
  throw ConfigError("config: " + path + ": " + what);
}

inline void reject_unknown(const ordered_json& obj, const std::string& path,
                           std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* a : allowed) {
      if (key == a) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw ConfigError("config: unknown key '" +
                        (path.empty() ? key : path + "." + key) + "'");
    }
  }
}

inline double as_number(const ordered_json& j, const std::string& path) {
  if (!j.is_number()) bad_key(path, "expected a number");
  return j.get<double>();
}

inline std::uint64_t as_seed(const ordered_json& j, const std::string& path) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) {
    bad_key(path, "expected a non-negative integer");
  }
  if (j.is_number_integer() && j.get<std::int64_t>() < 0) {
    bad_key(path, "expected a non-negative integer");
  }
  return j.get<std::uint64_t>();
}

inline int as_count(const ordered_json& j, const std::string& path) {
  if (!j.is_number_integer()) bad_key(path, "expected an integer");
  return j.get<int>();
}

inline std::string as_string(const ordered_json& j, const std::string& path) {
  if (!j.is_string()) bad_key(path, "expected a string");
  return j.get<std::string>();
}

inline Eigen::VectorXd as_vector(const ordered_json& j,
                                 const std::string& path) {
  if (!j.is_array() || j.empty()) bad_key(path, "expected a numeric array");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = as_number(j[i], path);
  }
  return v;
}

inline Eigen::MatrixXd as_row_matrix(const ordered_json& j,
                                     const std::string& path) {
  if (!j.is_array() || j.empty()) {
    bad_key(path, "expected an array of coordinate rows");
  }
  Eigen::MatrixXd m;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const Eigen::VectorXd row = as_vector(j[i], path + "[" + std::to_string(i) + "]");
    if (i == 0) {
      m.resize(row.size(), static_cast<Eigen::Index>(j.size()));
    } else if (row.size() != m.rows()) {
      bad_key(path, "rows must have equal length");
    }
    m.col(static_cast<Eigen::Index>(i)) = row;
  }
  return m;
}

inline ordered_json vector_to_json(const Eigen::VectorXd& v) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline ordered_json columns_to_json(const Eigen::MatrixXd& m) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    a.push_back(vector_to_json(m.col(c)));
  }
  return a;
}

}  // namespace detail

/// One complete run description: field model, initial swarm, integration
/// setup, ascent options, harness plan, output sink. Parsing rejects unknown
/// keys with their full path; serialization round-trips to an equal config.
struct RunConfig {
  FieldConfig field;
  SwarmConfig swarm;
  SimConfig sim;
  AscentOptions ascent;
  HarnessConfig harness;
  OutputConfig output;

  static RunConfig defaults() { return RunConfig{}; }

  SignalField make_field() const {
    if (field.kind == FieldKind::Gaussian) {
      return SignalField::gaussian(field.amplitude, field.scale, field.source);
    }
    if (!field.curvature.has_value()) {
      throw ConfigError("config: field.curvature: required for quadratic fields");
    }
    return SignalField::quadratic(field.amplitude, field.offset,
                                  *field.curvature, field.source,
                                  field.operating_radius);
  }

  /// Initial swarm: explicit positions if given, otherwise a seeded draw.
  /// The preset picks the random layout; unicycle mode draws headings.
  SwarmState initial_swarm(std::uint64_t seed) const {
    if (swarm.positions.has_value()) {
      SwarmState s;
      s.positions = *swarm.positions;
      if (swarm.headings.has_value()) {
        if (swarm.headings->size() != s.positions.cols()) {
          throw ConfigError("config: swarm.headings: one heading per robot");
        }
        s.headings = *swarm.headings;
      } else if (sim.mode == Mode::Unicycle) {
        throw ConfigError(
            "config: swarm.headings: required with explicit positions in "
            "unicycle mode");
      }
      return s;
    }
    RandomSwarmParams p = swarm.random;
    p.with_headings = sim.mode == Mode::Unicycle;
    p.layout = harness.preset == Preset::NearDegenerate
                   ? RandomSwarmParams::Layout::NearDegenerateLine
                   : RandomSwarmParams::Layout::Scatter;
    return random_swarm(seed, p);
  }

  /// Events for one scenario; the resilience preset injects its default
  /// removal when none are configured.
  std::vector<ResilienceEvent> scenario_events() const {
    if (!harness.events.empty() || harness.preset != Preset::Resilience) {
      return harness.events;
    }
    ResilienceEvent ev;
    ev.action = ResilienceEvent::Action::Remove;
    ev.time = 5.0;
    ev.index = 0;
    return {ev};
  }

  static RunConfig from_json_text(const std::string& text) {
    detail::ordered_json root;
    try {
      root = detail::ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      std::size_t line = 1, col = 1;
      const std::size_t stop =
          std::min(text.size(), e.byte > 0 ? e.byte - 1 : 0);
      for (std::size_t i = 0; i < stop; ++i) {
        if (text[i] == '\n') {
          ++line;
          col = 1;
        } else {
          ++col;
        }
      }
      throw ConfigError("config: parse error at line " + std::to_string(line) +
                        ", column " + std::to_string(col));
    }
    return from_json(root);
  }

  static RunConfig from_json(const detail::ordered_json& root) {
    using detail::as_count;
    using detail::as_number;
    using detail::as_seed;
    using detail::as_string;
    using detail::bad_key;
    using detail::reject_unknown;

    if (!root.is_object()) throw ConfigError("config: expected a JSON object");
    reject_unknown(root, "",
                   {"field", "swarm", "sim", "ascent", "harness", "output"});
    RunConfig cfg;

    if (root.contains("field")) {
      const auto& f = root["field"];
      if (!f.is_object()) bad_key("field", "expected an object");
      reject_unknown(f, "field",
                     {"kind", "amplitude", "scale", "offset", "source",
                      "curvature", "operating_radius"});
      if (f.contains("kind")) {
        const std::string kind = as_string(f["kind"], "field.kind");
        if (kind == "gaussian") {
          cfg.field.kind = FieldKind::Gaussian;
        } else if (kind == "quadratic") {
          cfg.field.kind = FieldKind::Quadratic;
        } else {
          bad_key("field.kind", "expected \"gaussian\" or \"quadratic\"");
        }
      }
      if (f.contains("amplitude")) {
        cfg.field.amplitude = as_number(f["amplitude"], "field.amplitude");
      }
      if (f.contains("scale")) {
        cfg.field.scale = as_number(f["scale"], "field.scale");
      }
      if (f.contains("offset")) {
        cfg.field.offset = as_number(f["offset"], "field.offset");
      }
      if (f.contains("source")) {
        cfg.field.source = detail::as_vector(f["source"], "field.source");
      }
      if (f.contains("curvature")) {
        cfg.field.curvature =
            detail::as_row_matrix(f["curvature"], "field.curvature");
      }
      if (f.contains("operating_radius")) {
        cfg.field.operating_radius =
            as_number(f["operating_radius"], "field.operating_radius");
      }
    }

    if (root.contains("swarm")) {
      const auto& s = root["swarm"];
      if (!s.is_object()) bad_key("swarm", "expected an object");
      reject_unknown(s, "swarm", {"positions", "headings", "random"});
      if (s.contains("positions")) {
        cfg.swarm.positions =
            detail::as_row_matrix(s["positions"], "swarm.positions");
      }
      if (s.contains("headings")) {
        cfg.swarm.headings =
            detail::as_vector(s["headings"], "swarm.headings");
      }
      if (s.contains("random")) {
        const auto& r = s["random"];
        if (!r.is_object()) bad_key("swarm.random", "expected an object");
        reject_unknown(r, "swarm.random",
                       {"count", "center_std", "radius_range"});
        if (s.contains("positions")) {
          bad_key("swarm.random", "mutually exclusive with swarm.positions");
        }
        if (r.contains("count")) {
          cfg.swarm.random.count = as_count(r["count"], "swarm.random.count");
        }
        if (r.contains("center_std")) {
          cfg.swarm.random.center_std =
              as_number(r["center_std"], "swarm.random.center_std");
        }
        if (r.contains("radius_range")) {
          const Eigen::VectorXd range =
              detail::as_vector(r["radius_range"], "swarm.random.radius_range");
          if (range.size() != 2) {
            bad_key("swarm.random.radius_range", "expected [min, max]");
          }
          cfg.swarm.random.radius_min = range[0];
          cfg.swarm.random.radius_max = range[1];
        }
      }
    }

    if (root.contains("sim")) {
      const auto& s = root["sim"];
      if (!s.is_object()) bad_key("sim", "expected an object");
      reject_unknown(s, "sim",
                     {"mode", "u_r", "k_gamma", "rtol", "atol", "t_end",
                      "sample_dt", "epsilon", "integrator", "h_fixed", "seed"});
      if (s.contains("mode")) {
        const std::string mode = as_string(s["mode"], "sim.mode");
        if (mode == "free") {
          cfg.sim.mode = Mode::Free;
        } else if (mode == "unicycle") {
          cfg.sim.mode = Mode::Unicycle;
        } else {
          bad_key("sim.mode", "expected \"free\" or \"unicycle\"");
        }
      }
      if (s.contains("u_r")) cfg.sim.u_r = as_number(s["u_r"], "sim.u_r");
      if (s.contains("k_gamma")) {
        cfg.sim.k_gamma = as_number(s["k_gamma"], "sim.k_gamma");
      }
      if (s.contains("rtol")) cfg.sim.rtol = as_number(s["rtol"], "sim.rtol");
      if (s.contains("atol")) cfg.sim.atol = as_number(s["atol"], "sim.atol");
      if (s.contains("t_end")) {
        cfg.sim.t_end = as_number(s["t_end"], "sim.t_end");
      }
      if (s.contains("sample_dt")) {
        cfg.sim.sample_dt = as_number(s["sample_dt"], "sim.sample_dt");
      }
      if (s.contains("epsilon")) {
        cfg.sim.epsilon = as_number(s["epsilon"], "sim.epsilon");
      }
      if (s.contains("integrator")) {
        const std::string integ = as_string(s["integrator"], "sim.integrator");
        if (integ == "dopri45") {
          cfg.sim.integrator = OdeMethod::Dopri45;
        } else if (integ == "rk4") {
          cfg.sim.integrator = OdeMethod::Rk4;
        } else {
          bad_key("sim.integrator", "expected \"dopri45\" or \"rk4\"");
        }
      }
      if (s.contains("h_fixed")) {
        cfg.sim.h_fixed = as_number(s["h_fixed"], "sim.h_fixed");
      }
      if (s.contains("seed")) cfg.sim.seed = as_seed(s["seed"], "sim.seed");
    }

    if (root.contains("ascent")) {
      const auto& a = root["ascent"];
      if (!a.is_object()) bad_key("ascent", "expected an object");
      reject_unknown(a, "ascent", {"eta_l", "omega_d_mode", "direction"});
      if (a.contains("eta_l")) {
        const double eta = as_number(a["eta_l"], "ascent.eta_l");
        if (!(eta >= 0.0)) bad_key("ascent.eta_l", "must be >= 0");
        cfg.ascent.eta_l = eta;
      }
      if (a.contains("omega_d_mode")) {
        const std::string m = as_string(a["omega_d_mode"], "ascent.omega_d_mode");
        if (m == "analytic") {
          cfg.ascent.omega_d_mode = GuidingRateMode::Analytic;
        } else if (m == "measured") {
          cfg.ascent.omega_d_mode = GuidingRateMode::Measured;
        } else {
          bad_key("ascent.omega_d_mode", "expected \"analytic\" or \"measured\"");
        }
      }
      if (a.contains("direction")) {
        const std::string d = as_string(a["direction"], "ascent.direction");
        if (d == "exact") {
          cfg.ascent.direction = DirectionSource::Exact;
        } else if (d == "measured") {
          cfg.ascent.direction = DirectionSource::Measured;
        } else {
          bad_key("ascent.direction", "expected \"exact\" or \"measured\"");
        }
      }
    }

    if (root.contains("harness")) {
      const auto& h = root["harness"];
      if (!h.is_object()) bad_key("harness", "expected an object");
      reject_unknown(h, "harness", {"runs", "sweep", "events", "preset"});
      if (h.contains("runs")) {
        cfg.harness.runs = as_count(h["runs"], "harness.runs");
        if (cfg.harness.runs < 1) bad_key("harness.runs", "must be >= 1");
      }
      if (h.contains("sweep")) {
        const auto& sw = h["sweep"];
        if (!sw.is_object()) bad_key("harness.sweep", "expected an object");
        reject_unknown(sw, "harness.sweep", {"k_gamma"});
        if (sw.contains("k_gamma")) {
          const Eigen::VectorXd list =
              detail::as_vector(sw["k_gamma"], "harness.sweep.k_gamma");
          cfg.harness.sweep_k_gamma.assign(list.data(),
                                           list.data() + list.size());
        }
      }
      if (h.contains("events")) {
        const auto& evs = h["events"];
        if (!evs.is_array()) bad_key("harness.events", "expected an array");
        cfg.harness.events.clear();
        for (std::size_t i = 0; i < evs.size(); ++i) {
          const std::string path = "harness.events[" + std::to_string(i) + "]";
          const auto& e = evs[i];
          if (!e.is_object()) bad_key(path, "expected an object");
          reject_unknown(e, path, {"t", "action", "index", "position", "heading"});
          ResilienceEvent ev;
          if (!e.contains("t")) bad_key(path + ".t", "required");
          ev.time = as_number(e["t"], path + ".t");
          if (!e.contains("action")) bad_key(path + ".action", "required");
          const std::string action = as_string(e["action"], path + ".action");
          if (action == "remove") {
            ev.action = ResilienceEvent::Action::Remove;
            if (!e.contains("index")) bad_key(path + ".index", "required");
            ev.index = as_count(e["index"], path + ".index");
          } else if (action == "add") {
            ev.action = ResilienceEvent::Action::Add;
            if (!e.contains("position")) bad_key(path + ".position", "required");
            ev.position = detail::as_vector(e["position"], path + ".position");
            if (e.contains("heading")) {
              ev.heading = as_number(e["heading"], path + ".heading");
            }
          } else {
            bad_key(path + ".action", "expected \"remove\" or \"add\"");
          }
          cfg.harness.events.push_back(std::move(ev));
        }
      }
      if (h.contains("preset")) {
        const std::string p = as_string(h["preset"], "harness.preset");
        if (p == "convergence") {
          cfg.harness.preset = Preset::Convergence;
        } else if (p == "near_degenerate") {
          cfg.harness.preset = Preset::NearDegenerate;
        } else if (p == "kgamma_sweep") {
          cfg.harness.preset = Preset::KgammaSweep;
        } else if (p == "resilience") {
          cfg.harness.preset = Preset::Resilience;
        } else {
          bad_key("harness.preset",
                  "expected \"convergence\", \"near_degenerate\", "
                  "\"kgamma_sweep\" or \"resilience\"");
        }
      }
    }

    if (root.contains("output")) {
      const auto& o = root["output"];
      if (!o.is_object()) bad_key("output", "expected an object");
      reject_unknown(o, "output", {"directory", "format"});
      if (o.contains("directory")) {
        cfg.output.directory = as_string(o["directory"], "output.directory");
      }
      if (o.contains("format")) {
        const std::string fmt = as_string(o["format"], "output.format");
        if (fmt == "csv") {
          cfg.output.format = OutputFormat::Csv;
        } else if (fmt == "json") {
          cfg.output.format = OutputFormat::Json;
        } else {
          bad_key("output.format", "expected \"csv\" or \"json\"");
        }
      }
    }

    cfg.validate();
    return cfg;
  }

  /// Cross-key checks that do not need the field/swarm instantiated.
  void validate() const {
    sim.validate();
    if (field.kind == FieldKind::Quadratic && !field.curvature.has_value()) {
      throw ConfigError("config: field.curvature: required for quadratic fields");
    }
    if (swarm.headings.has_value() && !swarm.positions.has_value()) {
      throw ConfigError(
          "config: swarm.headings: only valid with explicit swarm.positions");
    }
    if (swarm.positions.has_value() &&
        swarm.positions->cols() < 1) {
      throw ConfigError("config: swarm.positions: at least one robot");
    }
    for (const auto& ev : harness.events) {
      if (!(ev.time >= 0.0)) {
        throw ConfigError("config: harness.events: t must be >= 0");
      }
    }
    make_field();  // field parameter constraints
  }

  detail::ordered_json to_json() const {
    using detail::ordered_json;
    ordered_json root;

    ordered_json f;
    f["kind"] = field.kind == FieldKind::Gaussian ? "gaussian" : "quadratic";
    f["amplitude"] = field.amplitude;
    if (field.kind == FieldKind::Gaussian) {
      f["scale"] = field.scale;
    } else {
      f["offset"] = field.offset;
      if (field.curvature.has_value()) {
        f["curvature"] = detail::columns_to_json(*field.curvature);
      }
    }
    f["source"] = detail::vector_to_json(field.source);
    if (!std::isnan(field.operating_radius)) {
      f["operating_radius"] = field.operating_radius;
    }
    root["field"] = std::move(f);

    ordered_json s;
    if (swarm.positions.has_value()) {
      s["positions"] = detail::columns_to_json(*swarm.positions);
      if (swarm.headings.has_value()) {
        s["headings"] = detail::vector_to_json(*swarm.headings);
      }
    } else {
      ordered_json r;
      r["count"] = swarm.random.count;
      r["center_std"] = swarm.random.center_std;
      r["radius_range"] =
          ordered_json::array({swarm.random.radius_min, swarm.random.radius_max});
      s["random"] = std::move(r);
    }
    root["swarm"] = std::move(s);

    ordered_json m;
    m["mode"] = sim.mode == Mode::Free ? "free" : "unicycle";
    m["u_r"] = sim.u_r;
    m["k_gamma"] = sim.k_gamma;
    m["rtol"] = sim.rtol;
    m["atol"] = sim.atol;
    m["t_end"] = sim.t_end;
    m["sample_dt"] = sim.sample_dt;
    m["epsilon"] = sim.epsilon;
    m["integrator"] =
        sim.integrator == OdeMethod::Dopri45 ? "dopri45" : "rk4";
    m["h_fixed"] = sim.h_fixed;
    m["seed"] = sim.seed;
    root["sim"] = std::move(m);

    ordered_json a;
    if (ascent.eta_l >= 0.0) a["eta_l"] = ascent.eta_l;
    a["omega_d_mode"] =
        ascent.omega_d_mode == GuidingRateMode::Analytic ? "analytic"
                                                         : "measured";
    a["direction"] =
        ascent.direction == DirectionSource::Exact ? "exact" : "measured";
    root["ascent"] = std::move(a);

    ordered_json h;
    h["runs"] = harness.runs;
    switch (harness.preset) {
      case Preset::Convergence: h["preset"] = "convergence"; break;
      case Preset::NearDegenerate: h["preset"] = "near_degenerate"; break;
      case Preset::KgammaSweep: h["preset"] = "kgamma_sweep"; break;
      case Preset::Resilience: h["preset"] = "resilience"; break;
    }
    ordered_json sweep;
    sweep["k_gamma"] = harness.sweep_k_gamma;
    h["sweep"] = std::move(sweep);
    ordered_json events = ordered_json::array();
    for (const auto& ev : harness.events) {
      ordered_json e;
      e["t"] = ev.time;
      if (ev.action == ResilienceEvent::Action::Remove) {
        e["action"] = "remove";
        e["index"] = ev.index;
      } else {
        e["action"] = "add";
        e["position"] = detail::vector_to_json(ev.position);
        e["heading"] = ev.heading;
      }
      events.push_back(std::move(e));
    }
    h["events"] = std::move(events);
    root["harness"] = std::move(h);

    ordered_json o;
    o["directory"] = output.directory;
    o["format"] = output.format == OutputFormat::Csv ? "csv" : "json";
    root["output"] = std::move(o);
    return root;
  }

  std::string to_json_text() const { return to_json().dump(2) + "\n"; }
};

}  // namespace swarmseek
