#include "adaptiveh/harness/summary.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "adaptiveh/adaptive_h.hpp"
#include "adaptiveh/harness/stats.hpp"

namespace adaptiveh::harness {

namespace {

const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names{
      "return", "disc_return", "retreats", "mean_H", "median_H",
      "dict_size", "ms", "regret"};
  return names;
}

std::vector<double> metric_values(const EpisodeRow& r) {
  return {r.ret, r.disc_ret, static_cast<double>(r.retreats), r.mean_h,
          r.median_h, static_cast<double>(r.dict_size), r.ms};
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double to_double(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("bad number '" + s + "'");
  return v;
}

}  // namespace

std::vector<EpisodeRow> parse_episodes_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kEpisodesHeader) {
    throw std::invalid_argument("episodes.csv: unexpected header");
  }
  std::vector<EpisodeRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 9) {
      throw std::invalid_argument("episodes.csv: expected 9 columns in '" + line + "'");
    }
    EpisodeRow r;
    r.seed = std::stoull(cells[0]);
    r.episode = std::stoi(cells[1]);
    r.ret = to_double(cells[2]);
    r.disc_ret = to_double(cells[3]);
    r.retreats = std::stoi(cells[4]);
    r.mean_h = to_double(cells[5]);
    r.median_h = to_double(cells[6]);
    r.dict_size = std::stoull(cells[7]);
    r.ms = to_double(cells[8]);
    rows.push_back(r);
  }
  return rows;
}

std::vector<std::filesystem::path> find_runs(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  std::vector<fs::path> runs;
  if (!fs::is_directory(root)) return runs;
  auto is_run = [](const fs::path& p) {
    return fs::is_regular_file(p / "episodes.csv") &&
           fs::is_regular_file(p / "config.snapshot.json");
  };
  if (is_run(root)) runs.push_back(root);
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_directory() && is_run(entry.path())) runs.push_back(entry.path());
  }
  std::sort(runs.begin(), runs.end());
  return runs;
}

SummaryInput load_run(const std::filesystem::path& dir) {
  SummaryInput in;
  in.attributes = to_key_values(from_json(read_file(dir / "config.snapshot.json")));
  in.rows = parse_episodes_csv(read_file(dir / "episodes.csv"));
  return in;
}

Summary summarize(const std::vector<SummaryInput>& runs,
                  const std::vector<std::string>& keys) {
  std::size_t total = 0;
  for (const auto& r : runs) total += r.rows.size();
  if (total == 0) throw std::invalid_argument("summarize: no episode rows");

  auto group_value = [](const SummaryInput& run, const EpisodeRow& row,
                        const std::string& key) -> std::string {
    if (key == "seed") return std::to_string(row.seed);
    if (key == "episode") return std::to_string(row.episode);
    auto it = run.attributes.find(key);
    if (it == run.attributes.end()) {
      throw std::invalid_argument("summarize: unknown group key '" + key + "'");
    }
    return it->second;
  };

  // group -> metric index -> values, in first-seen group order.
  std::vector<std::vector<std::string>> order;
  std::map<std::vector<std::string>, std::vector<std::vector<double>>> groups;
  const std::size_t n_metrics = metric_names().size();

  for (const auto& run : runs) {
    // Regret is a per-seed series over episodes in order.
    std::map<std::uint64_t, double> best;
    for (const auto& row : run.rows) {
      std::vector<std::string> g;
      for (const auto& k : keys) g.push_back(group_value(run, row, k));
      auto [it, inserted] = groups.try_emplace(g, n_metrics);
      if (inserted) order.push_back(g);
      const auto vals = metric_values(row);
      for (std::size_t m = 0; m < vals.size(); ++m) it->second[m].push_back(vals[m]);
      auto [b, fresh] = best.try_emplace(row.seed, row.disc_ret);
      if (!fresh) b->second = std::max(b->second, row.disc_ret);
      it->second[n_metrics - 1].push_back(b->second - row.disc_ret);
    }
  }

  Summary s;
  s.keys = keys;
  for (const auto& g : order) {
    const auto& per_metric = groups.at(g);
    for (std::size_t m = 0; m < n_metrics; ++m) {
      const auto& v = per_metric[m];
      SummaryRow row;
      row.group = g;
      row.metric = metric_names()[m];
      row.n = v.size();
      row.mean = mean(v);
      row.std = stddev(v);
      row.median = median(v);
      row.min = *std::min_element(v.begin(), v.end());
      row.max = *std::max_element(v.begin(), v.end());
      s.rows.push_back(std::move(row));
    }
  }
  return s;
}

std::string summary_csv(const Summary& summary) {
  std::ostringstream out;
  for (const auto& k : summary.keys) out << k << ',';
  out << "metric,n,mean,std,median,min,max\n";
  for (const auto& r : summary.rows) {
    for (const auto& g : r.group) {
      // Quote values holding commas (vector-valued config keys).
      if (g.find(',') != std::string::npos) {
        out << '"' << g << "\",";
      } else {
        out << g << ',';
      }
    }
    out << r.metric << ',' << r.n << ',' << format_number(r.mean) << ','
        << format_number(r.std) << ',' << format_number(r.median) << ','
        << format_number(r.min) << ',' << format_number(r.max) << '\n';
  }
  return out.str();
}

}  // namespace adaptiveh::harness
