// Command-line front end: seeded scenario runs, gain sweeps, and the
// verification suite, with deterministic CSV/JSON export.
//
// Exit codes: 0 success, 1 verification failure, 2 configuration error,
// 3 simulation error.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "swarmseek/swarmseek.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitSimError = 3;

struct CliOptions {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  std::string format;
};

swarmseek::RunConfig load_config(const CliOptions& opt) {
  swarmseek::RunConfig cfg;
  if (!opt.config_path.empty()) {
    std::ifstream in(opt.config_path, std::ios::binary);
    if (!in) {
      throw swarmseek::ConfigError("config: cannot read " + opt.config_path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    cfg = swarmseek::RunConfig::from_json_text(buf.str());
  }
  if (opt.seed.has_value()) cfg.sim.seed = *opt.seed;
  if (!opt.out_dir.empty()) cfg.output.directory = opt.out_dir;
  if (!opt.format.empty()) {
    if (opt.format == "csv") {
      cfg.output.format = swarmseek::OutputFormat::Csv;
    } else if (opt.format == "json") {
      cfg.output.format = swarmseek::OutputFormat::Json;
    } else {
      throw swarmseek::ConfigError("--format: expected csv or json");
    }
  }
  return cfg;
}

std::string run_tag(int index, int total) {
  if (total <= 1) return "";
  std::string n = std::to_string(index);
  while (n.size() < 3) n.insert(n.begin(), '0');
  return "_" + n;
}

void write_trajectory(const swarmseek::RunConfig& cfg,
                      const swarmseek::Trajectory& trajectory, int dim,
                      const std::string& stem) {
  const std::filesystem::path dir(cfg.output.directory);
  if (cfg.output.format == swarmseek::OutputFormat::Csv) {
    swarmseek::write_text_file(dir / (stem + ".csv"),
                               swarmseek::trajectory_csv(trajectory, dim));
  } else {
    swarmseek::write_text_file(
        dir / (stem + ".json"),
        swarmseek::trajectory_json(trajectory, dim).dump(2) + "\n");
  }
}

// Runs scenarios for indices [0, total) across `jobs` threads; results land
// in index order, so output bytes never depend on scheduling.
template <typename RunOne>
std::vector<swarmseek::ScenarioResult> run_indexed(int total, int jobs,
                                                   RunOne&& run_one) {
  std::vector<swarmseek::ScenarioResult> results(
      static_cast<std::size_t>(total));
  if (jobs <= 1 || total <= 1) {
    for (int i = 0; i < total; ++i) results[static_cast<std::size_t>(i)] = run_one(i);
    return results;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(total));
  const int workers = std::min(jobs, total);
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < total; i = next.fetch_add(1)) {
        try {
          results[static_cast<std::size_t>(i)] = run_one(i);
        } catch (...) {
          errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

int do_sweep(const swarmseek::RunConfig& cfg, int jobs) {
  const swarmseek::SignalField field = cfg.make_field();
  const std::uint64_t run_seed = swarmseek::Rng::derive(cfg.sim.seed, 0);
  const swarmseek::SwarmState initial = cfg.initial_swarm(run_seed);
  const auto& gains = cfg.harness.sweep_k_gamma;
  const int total = static_cast<int>(gains.size());
  if (total == 0) {
    throw swarmseek::ConfigError("config: harness.sweep.k_gamma: empty list");
  }

  const auto results = run_indexed(total, jobs, [&](int i) {
    swarmseek::SimConfig sim = cfg.sim;
    sim.k_gamma = gains[static_cast<std::size_t>(i)];
    return swarmseek::run_scenario(field, initial, sim, cfg.ascent,
                                   cfg.scenario_events());
  });

  bool any_failed = false;
  nlohmann::ordered_json summary = nlohmann::ordered_json::array();
  for (int i = 0; i < total; ++i) {
    const auto& res = results[static_cast<std::size_t>(i)];
    const std::string tag = swarmseek::format_double(gains[static_cast<std::size_t>(i)]);
    write_trajectory(cfg, res.trajectory, initial.dim(),
                     "trajectory_kgamma_" + tag);
    swarmseek::write_text_file(
        std::filesystem::path(cfg.output.directory) /
            ("metrics_kgamma_" + tag + ".json"),
        swarmseek::metrics_json(res.metrics).dump(2) + "\n");
    nlohmann::ordered_json row;
    row["k_gamma"] = gains[static_cast<std::size_t>(i)];
    row["max_deformation"] = res.metrics.max_deformation;
    row["trapped"] = res.metrics.trapped;
    row["failed"] = res.metrics.failed;
    summary.push_back(std::move(row));
    any_failed = any_failed || res.metrics.failed;
    std::cout << "k_gamma=" << tag
              << " max_deformation=" << swarmseek::format_double(res.metrics.max_deformation)
              << (res.metrics.failed ? " FAILED" : "") << "\n";
  }
  nlohmann::ordered_json root;
  root["sweep"] = std::move(summary);
  swarmseek::write_text_file(
      std::filesystem::path(cfg.output.directory) / "sweep_summary.json",
      root.dump(2) + "\n");
  return any_failed ? kExitSimError : kExitOk;
}

int do_run(const swarmseek::RunConfig& cfg, int jobs) {
  if (cfg.harness.preset == swarmseek::Preset::KgammaSweep) {
    return do_sweep(cfg, jobs);
  }
  const swarmseek::SignalField field = cfg.make_field();
  const int total = cfg.harness.runs;

  const auto results = run_indexed(total, jobs, [&](int i) {
    const std::uint64_t run_seed =
        swarmseek::Rng::derive(cfg.sim.seed, static_cast<std::uint64_t>(i));
    return swarmseek::run_scenario(field, cfg.initial_swarm(run_seed), cfg.sim,
                                   cfg.ascent, cfg.scenario_events());
  });

  bool any_failed = false;
  int trapped_count = 0;
  nlohmann::ordered_json summary = nlohmann::ordered_json::array();
  for (int i = 0; i < total; ++i) {
    const auto& res = results[static_cast<std::size_t>(i)];
    const std::string tag = run_tag(i, total);
    write_trajectory(cfg, res.trajectory, field.dim(), "trajectory" + tag);
    swarmseek::write_text_file(
        std::filesystem::path(cfg.output.directory) /
            ("metrics" + tag + ".json"),
        swarmseek::metrics_json(res.metrics).dump(2) + "\n");
    any_failed = any_failed || res.metrics.failed;
    trapped_count += res.metrics.trapped ? 1 : 0;
    nlohmann::ordered_json row;
    row["run"] = i;
    row["seed"] = swarmseek::Rng::derive(cfg.sim.seed, static_cast<std::uint64_t>(i));
    row["trapped"] = res.metrics.trapped;
    row["trapped_since"] = res.metrics.trapped_since;
    row["final_distance"] = res.metrics.final_distance;
    row["failed"] = res.metrics.failed;
    summary.push_back(std::move(row));
    std::cout << "run " << i << ": trapped=" << (res.metrics.trapped ? 1 : 0)
              << " final_distance="
              << swarmseek::format_double(res.metrics.final_distance)
              << (res.metrics.failed
                      ? " FAILED (" + res.metrics.error + ")"
                      : "")
              << "\n";
  }
  if (total > 1) {
    nlohmann::ordered_json root;
    root["runs"] = total;
    root["trapped"] = trapped_count;
    root["results"] = std::move(summary);
    swarmseek::write_text_file(
        std::filesystem::path(cfg.output.directory) / "summary.json",
        root.dump(2) + "\n");
  }
  return any_failed ? kExitSimError : kExitOk;
}

int do_verify(const swarmseek::RunConfig& cfg) {
  const auto reports = swarmseek::verify_suite(cfg.sim.seed, 10000);
  bool all_pass = true;
  for (const auto& r : reports) {
    std::cout << swarmseek::report_line(r) << "\n";
    all_pass = all_pass && r.pass();
  }
  swarmseek::write_text_file(
      std::filesystem::path(cfg.output.directory) / "verification.json",
      swarmseek::reports_json(reports).dump(2) + "\n");
  return all_pass ? kExitOk : kExitVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Source seeking for robot swarms: scalar-reading ascent "
               "directions, free and constant-speed dynamics, and a "
               "property verification suite"};
  app.require_subcommand(0, 1);

  CliOptions opt;
  bool print_defaults_flag = false;
  app.add_flag("--print-defaults", print_defaults_flag,
               "Print the default configuration as JSON and exit");

  const auto add_common = [&opt](CLI::App* cmd) {
    cmd->add_option("--config", opt.config_path, "JSON configuration file");
    cmd->add_option("--out", opt.out_dir, "Output directory override");
    cmd->add_option("--seed", opt.seed, "Master seed override");
    cmd->add_option("--jobs", opt.jobs, "Worker threads for independent runs")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--format", opt.format, "Output format: csv or json");
  };

  CLI::App* cmd_run = app.add_subcommand("run", "Integrate scenario(s)");
  CLI::App* cmd_sweep =
      app.add_subcommand("sweep", "Run the k_gamma sweep with matched seeds");
  CLI::App* cmd_verify =
      app.add_subcommand("verify", "Run the property verification suite");
  CLI::App* cmd_defaults =
      app.add_subcommand("print-defaults", "Print the default configuration");
  add_common(cmd_run);
  add_common(cmd_sweep);
  add_common(cmd_verify);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (print_defaults_flag || cmd_defaults->parsed()) {
      std::cout << swarmseek::RunConfig::defaults().to_json_text();
      return kExitOk;
    }
    if (cmd_sweep->parsed()) {
      return do_sweep(load_config(opt), opt.jobs);
    }
    if (cmd_verify->parsed()) {
      return do_verify(load_config(opt));
    }
    if (cmd_run->parsed()) {
      return do_run(load_config(opt), opt.jobs);
    }
    std::cerr << app.help();
    return kExitConfigError;
  } catch (const swarmseek::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSimError;
  }
}
