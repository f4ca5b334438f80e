#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "adaptiveh/harness/config.hpp"

namespace adaptiveh::harness {

inline constexpr const char* kEpisodesHeader =
    "seed,episode,return,disc_return,retreats,mean_H,median_H,dict_size,ms";

struct EpisodeRow {
  std::uint64_t seed = 0;
  int episode = 0;
  double ret = 0.0;
  double disc_ret = 0.0;
  int retreats = 0;
  // Over every window of the episode, the one closed by the episode end
  // included; 0 for the random agent.
  double mean_h = 0.0;
  double median_h = 0.0;
  std::size_t dict_size = 0;
  double ms = 0.0;
};

struct SeedResult {
  std::uint64_t seed = 0;
  std::vector<EpisodeRow> rows;
  std::vector<double> regret;
  // Per episode, the windows that ended because the checkpoint fired.
  std::vector<std::vector<int>> retreat_windows;
};

struct RunArtifacts {
  ExperimentConfig config;
  // In config.seeds order.
  std::vector<SeedResult> seeds;
};

/// All episodes for one seed. Per-seed streams: episode e resets with
/// derive_seed(seed, kEpisodeReset, e); actions draw from (seed, kPolicy) or
/// (seed, kRandomAgent).
SeedResult run_seed(const ExperimentConfig& cfg, std::uint64_t seed);

/// Runs every seed, `jobs` at a time. Results do not depend on `jobs`.
/// The first seed failure (in seed order) is rethrown after all workers stop.
RunArtifacts run_experiment(const ExperimentConfig& cfg, int jobs = 1);

std::string episodes_csv(const RunArtifacts& run);
std::string regret_csv(const RunArtifacts& run);
/// gnuplot columns: episode, seed-mean return, running mean of that.
std::string curve_dat(const RunArtifacts& run);

/// Writes config.snapshot.json, episodes.csv, regret.csv, summary.csv and
/// curve.dat into `dir`, each through a temporary file and rename.
void write_artifacts(const RunArtifacts& run, const std::filesystem::path& dir);

void write_file_atomic(const std::filesystem::path& path,
                       const std::string& contents);

/// Shortest round-trip decimal form.
std::string format_number(double v);

}  // namespace adaptiveh::harness
