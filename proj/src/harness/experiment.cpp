#include "adaptiveh/harness/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#ifdef __GLIBC__
#include <malloc.h>
#endif

#include "adaptiveh/harness/stats.hpp"
#include "adaptiveh/harness/summary.hpp"

namespace adaptiveh::harness {

namespace {

using Clock = std::chrono::steady_clock;

// Q refits allocate and free multi-megabyte matrices. With glibc defaults
// these go back to the kernel each time and every refit page-faults them in
// again, which costs about as much as the arithmetic.
void keep_freed_memory() {
#ifdef __GLIBC__
  static std::once_flag once;
  std::call_once(once, [] {
    mallopt(M_MMAP_THRESHOLD, 256 << 20);
    mallopt(M_TRIM_THRESHOLD, 512 << 20);
  });
#endif
}

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

EpisodeRow random_episode(NsEnv& env, const ExperimentConfig& cfg,
                          std::uint64_t reset_seed, Rng& rng) {
  EpisodeRow row;
  const ActionBounds& b = env.action_bounds();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  env.reset(reset_seed);
  double disc = 1.0;
  for (int t = 0; t < cfg.max_steps; ++t) {
    ActionVector a(b.lo.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      a[i] = b.lo[i] + (b.hi[i] - b.lo[i]) * unit(rng);
    }
    const StepResult r = env.step(a);
    row.ret += r.reward;
    row.disc_ret += disc * r.reward;
    disc *= cfg.gamma;
    if (r.terminal) break;
  }
  return row;
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

SeedResult run_seed(const ExperimentConfig& cfg, std::uint64_t seed) {
  SeedResult out;
  out.seed = seed;
  auto env = make_env(cfg);
  std::vector<double> disc_returns;

  if (cfg.agent == AgentKind::kRandom) {
    Rng rng = make_rng(seed, Stream::kRandomAgent);
    for (int e = 0; e < cfg.episodes; ++e) {
      const auto start = Clock::now();
      EpisodeRow row = random_episode(
          *env, cfg, derive_seed(seed, Stream::kEpisodeReset, e), rng);
      row.seed = seed;
      row.episode = e;
      if (cfg.wall_clock) row.ms = elapsed_ms(start);
      disc_returns.push_back(row.disc_ret);
      out.rows.push_back(row);
      out.retreat_windows.emplace_back();
    }
    out.regret = regret_series(disc_returns);
    return out;
  }

  const Bandwidth bw = bandwidth(cfg);
  AdaptiveHLearner learner(
      learner_config(cfg), checkpoint_rule(cfg),
      GaussianPolicy::zero(env->action_dim(), variance_at(cfg, 0), bw),
      KernelDictionary(bw, {cfg.nu, cfg.max_centers}));
  Rng policy_rng = make_rng(seed, Stream::kPolicy);

  for (int e = 0; e < cfg.episodes; ++e) {
    const auto start = Clock::now();
    if (cfg.variance_final != cfg.variance) learner.set_variance(variance_at(cfg, e));
    EpisodeRecord rec = learner.run_episode(
        *env, derive_seed(seed, Stream::kEpisodeReset, e), policy_rng);

    EpisodeRow row;
    row.seed = seed;
    row.episode = e;
    row.ret = rec.undiscounted_return;
    row.disc_ret = rec.discounted_return;
    row.retreats = static_cast<int>(rec.retreat_points.size());
    if (!rec.h_windows.empty()) {
      std::vector<double> h(rec.h_windows.begin(), rec.h_windows.end());
      row.mean_h = mean(h);
      row.median_h = median(h);
    }
    row.dict_size = rec.dictionary_size;
    if (cfg.wall_clock) row.ms = elapsed_ms(start);

    disc_returns.push_back(row.disc_ret);
    out.rows.push_back(row);
    out.retreat_windows.emplace_back(
        rec.h_windows.begin(),
        rec.h_windows.begin() + static_cast<std::ptrdiff_t>(rec.retreat_points.size()));
  }
  out.regret = regret_series(disc_returns);
  return out;
}

RunArtifacts run_experiment(const ExperimentConfig& cfg, int jobs) {
  validate(cfg);
  keep_freed_memory();
  RunArtifacts run;
  run.config = cfg;
  const std::size_t n = cfg.seeds.size();
  run.seeds.resize(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        run.seeds[i] = run_seed(cfg, cfg.seeds[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), 1, n == 0 ? 1 : n);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
  return run;
}

std::string episodes_csv(const RunArtifacts& run) {
  std::ostringstream out;
  out << kEpisodesHeader << '\n';
  for (const auto& sr : run.seeds) {
    for (const auto& r : sr.rows) {
      out << r.seed << ',' << r.episode << ',' << format_number(r.ret) << ','
          << format_number(r.disc_ret) << ',' << r.retreats << ','
          << format_number(r.mean_h) << ',' << format_number(r.median_h) << ','
          << r.dict_size << ',' << format_number(r.ms) << '\n';
    }
  }
  return out.str();
}

std::string regret_csv(const RunArtifacts& run) {
  std::ostringstream out;
  out << "seed,episode,regret\n";
  for (const auto& sr : run.seeds) {
    for (std::size_t e = 0; e < sr.regret.size(); ++e) {
      out << sr.seed << ',' << e << ',' << format_number(sr.regret[e]) << '\n';
    }
  }
  return out.str();
}

std::string curve_dat(const RunArtifacts& run) {
  std::ostringstream out;
  out << "# episode mean_return running_mean\n";
  const int episodes = run.config.episodes;
  double running = 0.0;
  for (int e = 0; e < episodes; ++e) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& sr : run.seeds) {
      if (static_cast<std::size_t>(e) < sr.rows.size()) {
        sum += sr.rows[e].ret;
        ++count;
      }
    }
    const double m = count ? sum / static_cast<double>(count) : 0.0;
    running += (m - running) / static_cast<double>(e + 1);
    out << e << ' ' << format_number(m) << ' ' << format_number(running) << '\n';
  }
  return out.str();
}

void write_file_atomic(const std::filesystem::path& path,
                       const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + tmp.string());
    f << contents;
    f.flush();
    if (!f) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_artifacts(const RunArtifacts& run, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / "config.snapshot.json", to_json(run.config));
  write_file_atomic(dir / "episodes.csv", episodes_csv(run));
  write_file_atomic(dir / "regret.csv", regret_csv(run));
  write_file_atomic(dir / "curve.dat", curve_dat(run));

  SummaryInput input{to_key_values(run.config), {}};
  for (const auto& sr : run.seeds) {
    input.rows.insert(input.rows.end(), sr.rows.begin(), sr.rows.end());
  }
  if (input.rows.empty()) {
    write_file_atomic(dir / "summary.csv", summary_csv(Summary{{"env", "agent"}, {}}));
  } else {
    write_file_atomic(dir / "summary.csv",
                      summary_csv(summarize({input}, {"env", "agent"})));
  }
}

}  // namespace adaptiveh::harness
