#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "adaptiveh/harness/config.hpp"
#include "adaptiveh/harness/experiment.hpp"
#include "adaptiveh/harness/summary.hpp"
#include "adaptiveh/harness/sweep.hpp"

namespace fs = std::filesystem;
using namespace adaptiveh::harness;

namespace {

constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

std::vector<std::string> split_keys(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string k;
  while (std::getline(ss, k, ',')) {
    if (!k.empty()) out.push_back(k);
  }
  return out;
}

ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides,
                             const std::string& out) {
  KeyValues kv = load_key_values(path);
  apply_overrides(kv, overrides);
  if (!out.empty()) kv["output"] = out;
  return resolve(kv);
}

int cmd_run(const std::string& config, const std::vector<std::string>& sets,
            const std::string& out, int jobs) {
  const ExperimentConfig cfg = load_config(config, sets, out);
  const RunArtifacts run = run_experiment(cfg, jobs);
  write_artifacts(run, cfg.output);
  std::cout << "wrote " << cfg.output << " (" << cfg.seeds.size() << " seeds x "
            << cfg.episodes << " episodes)\n";
  return 0;
}

int cmd_summarize(const std::string& in, const std::string& group) {
  const auto runs = find_runs(in);
  if (runs.empty()) throw ConfigError("no runs found under '" + in + "'");
  std::vector<SummaryInput> inputs;
  for (const auto& dir : runs) inputs.push_back(load_run(dir));
  Summary s;
  try {
    s = summarize(inputs, split_keys(group));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const std::string csv = summary_csv(s);
  write_file_atomic(fs::path(in) / "summary.csv", csv);
  std::cout << csv;
  return 0;
}

int cmd_sweep(const std::string& config, const std::vector<std::string>& varies,
              const std::vector<std::string>& sets, const std::string& out,
              int jobs) {
  KeyValues base = load_key_values(config);
  apply_overrides(base, sets);
  std::vector<SweepAxis> axes;
  std::vector<std::string> keys;
  for (const auto& v : varies) {
    axes.push_back(parse_vary(v));
    keys.push_back(axes.back().key);
  }
  const std::string root = out.empty() ? resolve(base).output : out;
  const auto points = expand_sweep(base, axes);

  // Resolve everything first so a bad value fails before any run starts.
  std::vector<ExperimentConfig> cfgs;
  for (const auto& p : points) {
    KeyValues kv = p.kv;
    kv["output"] = (fs::path(root) / p.name).string();
    cfgs.push_back(resolve(kv));
  }
  std::vector<SummaryInput> inputs;
  for (const auto& cfg : cfgs) {
    const RunArtifacts run = run_experiment(cfg, jobs);
    write_artifacts(run, cfg.output);
    std::cout << "wrote " << cfg.output << '\n';
    SummaryInput in{to_key_values(cfg), {}};
    for (const auto& sr : run.seeds) {
      in.rows.insert(in.rows.end(), sr.rows.begin(), sr.rows.end());
    }
    inputs.push_back(std::move(in));
  }
  std::size_t rows = 0;
  for (const auto& in : inputs) rows += in.rows.size();
  if (rows > 0) {
    write_file_atomic(fs::path(root) / "summary.csv",
                      summary_csv(summarize(inputs, keys)));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive-window RKHS policy gradient experiments"};
  app.require_subcommand(1);

  std::string config, out, in, group;
  std::vector<std::string> sets, varies;
  int jobs = 1;

  auto* run = app.add_subcommand("run", "Run one experiment");
  run->add_option("--config", config, "Config file")->required();
  run->add_option("--set", sets, "Override key=value")->take_all();
  run->add_option("--out", out, "Output directory");
  run->add_option("--jobs", jobs, "Seeds run in parallel")->check(CLI::PositiveNumber);

  auto* sum = app.add_subcommand("summarize", "Aggregate run directories");
  sum->add_option("--in", in, "Run or sweep directory")->required();
  sum->add_option("--group", group, "Comma-separated group keys")->required();

  auto* sweep = app.add_subcommand("sweep", "Run a grid of experiments");
  sweep->add_option("--config", config, "Config file")->required();
  sweep->add_option("--vary", varies, "key=v1,v2,...")->required()->take_all();
  sweep->add_option("--set", sets, "Override key=value")->take_all();
  sweep->add_option("--out", out, "Output root");
  sweep->add_option("--jobs", jobs, "Seeds run in parallel")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*run) return cmd_run(config, sets, out, jobs);
    if (*sum) return cmd_summarize(in, group);
    if (*sweep) return cmd_sweep(config, varies, sets, out, jobs);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kConfigError;
}
