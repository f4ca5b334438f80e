#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "adaptiveh/harness/config.hpp"
#include "adaptiveh/harness/experiment.hpp"

namespace adaptiveh::harness {

/// One run to aggregate: its resolved configuration plus per-episode rows.
struct SummaryInput {
  KeyValues attributes;
  std::vector<EpisodeRow> rows;
};

struct SummaryRow {
  std::vector<std::string> group;
  std::string metric;
  std::size_t n = 0;
  double mean = 0.0;
  double std = 0.0;
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
};

struct Summary {
  std::vector<std::string> keys;
  std::vector<SummaryRow> rows;
};

/// Per group and metric: n, mean, sample std, median, min, max. Group keys
/// name either an episodes.csv column (seed, episode) or a config key. The
/// metrics are the numeric episode columns plus `regret`, the running-best
/// discounted-return proxy per seed. Throws std::invalid_argument on empty
/// input or an unknown key.
Summary summarize(const std::vector<SummaryInput>& runs,
                  const std::vector<std::string>& keys);

/// Long-format CSV: group keys..., metric, n, mean, std, median, min, max.
std::string summary_csv(const Summary& summary);

std::vector<EpisodeRow> parse_episodes_csv(const std::string& text);

/// Every run directory at or below `root` (those holding episodes.csv and
/// config.snapshot.json), sorted by path.
std::vector<std::filesystem::path> find_runs(const std::filesystem::path& root);

SummaryInput load_run(const std::filesystem::path& dir);

}  // namespace adaptiveh::harness
