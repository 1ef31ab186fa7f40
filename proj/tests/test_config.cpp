#include "helpers.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <string>

using namespace swarmseek;
using Catch::Matchers::ContainsSubstring;

TEST_CASE("defaults survive an empty document", "[config]") {
  const RunConfig cfg = RunConfig::from_json_text("{}");
  CHECK(cfg.field.kind == FieldKind::Gaussian);
  CHECK(cfg.field.amplitude == 1.0);
  CHECK(cfg.field.scale == 10.0);
  CHECK_FALSE(cfg.swarm.positions.has_value());
  CHECK(cfg.swarm.random.count == 5);
  CHECK(cfg.swarm.random.center_std == 25.0);
  CHECK(cfg.sim.mode == Mode::Free);
  CHECK(cfg.sim.rtol == 1e-8);
  CHECK(cfg.sim.t_end == 5000.0);
  CHECK(cfg.sim.seed == 1);
  CHECK(cfg.ascent.eta_l == -1.0);
  CHECK(cfg.ascent.omega_d_mode == GuidingRateMode::Measured);
  CHECK(cfg.ascent.direction == DirectionSource::Measured);
  CHECK(cfg.harness.runs == 1);
  CHECK(cfg.harness.preset == Preset::Convergence);
  CHECK(cfg.output.format == OutputFormat::Csv);

  CHECK(cfg.to_json_text() == RunConfig::defaults().to_json_text());
}

TEST_CASE("unknown keys are rejected with their full path", "[config]") {
  CHECK_THROWS_WITH(RunConfig::from_json_text(R"({"sim": {"tend": 5}})"),
                    ContainsSubstring("sim.tend"));
  CHECK_THROWS_WITH(RunConfig::from_json_text(R"({"speling": {}})"),
                    ContainsSubstring("speling"));
  CHECK_THROWS_WITH(
      RunConfig::from_json_text(R"({"swarm": {"random": {"centre_std": 1}}})"),
      ContainsSubstring("swarm.random.centre_std"));
}

TEST_CASE("invalid values name the failing key", "[config]") {
  CHECK_THROWS_WITH(RunConfig::from_json_text(R"({"sim": {"u_r": -1}})"),
                    ContainsSubstring("sim.u_r: must be > 0"));
  CHECK_THROWS_WITH(RunConfig::from_json_text(R"({"field": {"amplitude": "big"}})"),
                    ContainsSubstring("field.amplitude"));
  CHECK_THROWS_WITH(RunConfig::from_json_text(R"({"sim": {"seed": -4}})"),
                    ContainsSubstring("sim.seed"));
  CHECK_THROWS_WITH(
      RunConfig::from_json_text(R"({"swarm": {"random": {"radius_range": [1]}}})"),
      ContainsSubstring("radius_range"));
  CHECK_THROWS_WITH(RunConfig::from_json_text(R"({"ascent": {"eta_l": -2}})"),
                    ContainsSubstring("eta_l"));
  CHECK_THROWS_WITH(RunConfig::from_json_text(R"({"field": {"kind": "conical"}})"),
                    ContainsSubstring("field.kind"));
}

TEST_CASE("syntax errors report line and column", "[config]") {
  const std::string broken = "{\n  \"sim\": {\n    oops\n  }\n}";
  CHECK_THROWS_WITH(RunConfig::from_json_text(broken), ContainsSubstring("line 3"));
}

TEST_CASE("serialization round-trips", "[config]") {
  const std::string text = R"({
    "field": {
      "kind": "quadratic",
      "amplitude": 2.0,
      "offset": 30.0,
      "curvature": [[0.02, 0.001], [0.001, 0.04]],
      "source": [3.0, -4.0],
      "operating_radius": 40.0
    },
    "swarm": {
      "positions": [[10.0, 0.0], [11.0, 1.0], [10.5, -1.0], [9.0, 0.5]],
      "headings": [0.0, 1.5, -2.0, 3.0]
    },
    "sim": {
      "mode": "unicycle",
      "u_r": 0.8,
      "k_gamma": 4.0,
      "rtol": 1e-9,
      "atol": 1e-12,
      "t_end": 120.0,
      "sample_dt": 0.5,
      "epsilon": 2.0,
      "integrator": "rk4",
      "h_fixed": 0.005,
      "seed": 99
    },
    "ascent": {"eta_l": 1e-8, "omega_d_mode": "analytic", "direction": "exact"},
    "harness": {
      "runs": 3,
      "sweep": {"k_gamma": [1.0, 3.0, 9.0]},
      "events": [
        {"t": 5.0, "action": "remove", "index": 1},
        {"t": 8.0, "action": "add", "position": [12.0, 0.0], "heading": 0.3}
      ],
      "preset": "resilience"
    },
    "output": {"directory": "results", "format": "json"}
  })";

  const RunConfig cfg = RunConfig::from_json_text(text);
  const std::string once = cfg.to_json_text();
  const RunConfig again = RunConfig::from_json_text(once);
  CHECK(again.to_json_text() == once);

  CHECK(cfg.sim.mode == Mode::Unicycle);
  CHECK(cfg.sim.integrator == OdeMethod::Rk4);
  CHECK(cfg.field.kind == FieldKind::Quadratic);
  REQUIRE(cfg.swarm.positions.has_value());
  CHECK(cfg.swarm.positions->cols() == 4);
  REQUIRE(cfg.harness.events.size() == 2);
  CHECK(cfg.harness.events[0].action == ResilienceEvent::Action::Remove);
  CHECK(cfg.harness.events[1].action == ResilienceEvent::Action::Add);
  CHECK(cfg.harness.sweep_k_gamma == std::vector<double>{1.0, 3.0, 9.0});

  // The sentinel "auto" threshold is represented by key absence.
  const std::string defaults_text = RunConfig::defaults().to_json_text();
  CHECK(defaults_text.find("eta_l") == std::string::npos);
}

TEST_CASE("initial swarm honors explicit positions and presets", "[config]") {
  RunConfig cfg;
  Eigen::MatrixXd pos(2, 3);
  pos.col(0) = Eigen::Vector2d(1, 0);
  pos.col(1) = Eigen::Vector2d(0, 1);
  pos.col(2) = Eigen::Vector2d(-1, -1);
  cfg.swarm.positions = pos;

  const SwarmState s = cfg.initial_swarm(5);
  CHECK((s.positions - pos).norm() == 0.0);
  CHECK_FALSE(s.has_headings());

  // Unicycle mode needs headings alongside explicit positions.
  cfg.sim.mode = Mode::Unicycle;
  CHECK_THROWS_AS(cfg.initial_swarm(5), ConfigError);
  cfg.swarm.headings = Eigen::VectorXd::Zero(3);
  CHECK(cfg.initial_swarm(5).has_headings());
  cfg.swarm.headings = Eigen::VectorXd::Zero(2);  // wrong arity
  CHECK_THROWS_AS(cfg.initial_swarm(5), ConfigError);

  // Random draws follow the preset layout and the mode.
  RunConfig rnd;
  rnd.sim.mode = Mode::Unicycle;
  const SwarmState drawn = rnd.initial_swarm(11);
  CHECK(drawn.has_headings());
  CHECK(drawn.count() == 5);

  RunConfig near;
  near.harness.preset = Preset::NearDegenerate;
  const double margin = degeneracy_margin(decompose(near.initial_swarm(11).positions));
  CHECK(margin < 0.05);
}

TEST_CASE("resilience preset injects a default removal", "[config]") {
  RunConfig cfg;
  cfg.harness.preset = Preset::Resilience;
  const auto events = cfg.scenario_events();
  REQUIRE(events.size() == 1);
  CHECK(events[0].action == ResilienceEvent::Action::Remove);
  CHECK(events[0].time == 5.0);
  CHECK(events[0].index == 0);

  // Explicit events win over the preset default.
  ResilienceEvent ev;
  ev.action = ResilienceEvent::Action::Add;
  ev.time = 2.0;
  ev.position = Eigen::Vector2d(1, 1);
  cfg.harness.events = {ev};
  REQUIRE(cfg.scenario_events().size() == 1);
  CHECK(cfg.scenario_events()[0].action == ResilienceEvent::Action::Add);

  // Other presets add nothing.
  RunConfig plain;
  CHECK(plain.scenario_events().empty());
}

TEST_CASE("cross-key validation", "[config]") {
  CHECK_THROWS_WITH(RunConfig::from_json_text(R"({"field": {"kind": "quadratic"}})"),
                    ContainsSubstring("field.curvature"));
  CHECK_THROWS_WITH(RunConfig::from_json_text(R"({"swarm": {"headings": [0, 1]}})"),
                    ContainsSubstring("swarm.headings"));
  CHECK_THROWS_WITH(
      RunConfig::from_json_text(
          R"({"swarm": {"positions": [[1, 2]], "random": {"count": 3}}})"),
      ContainsSubstring("mutually exclusive"));
  CHECK_THROWS_WITH(
      RunConfig::from_json_text(
          R"({"harness": {"events": [{"t": 1.0, "action": "remove"}]}})"),
      ContainsSubstring("index"));
  CHECK_THROWS_WITH(
      RunConfig::from_json_text(
          R"({"harness": {"events": [{"t": 1.0, "action": "add"}]}})"),
      ContainsSubstring("position"));
  CHECK_THROWS_WITH(
      RunConfig::from_json_text(R"({"harness": {"events": [{"action": "remove", "index": 0}]}})"),
      ContainsSubstring(".t"));
}
