// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.
//
//   acceptance [--configs DIR] [--jobs N] [criterion ...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "adaptiveh/adaptive_h.hpp"
#include "adaptiveh/harness/config.hpp"
#include "adaptiveh/harness/experiment.hpp"
#include "adaptiveh/harness/stats.hpp"

namespace {

namespace fs = std::filesystem;
using namespace adaptiveh;
using namespace adaptiveh::harness;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Eigen::VectorXd vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

// ---------------------------------------------------------------------------
// Experiment runs shared between criteria.

fs::path g_configs = ADAPTIVEH_CONFIG_DIR;
int g_jobs = 1;

ExperimentConfig load(const std::string& env, const std::vector<std::string>& sets) {
  KeyValues kv = load_key_values((g_configs / (env + ".cfg")).string());
  apply_overrides(kv, sets);
  return resolve(kv);
}

std::map<std::string, RunArtifacts> g_cache;

const RunArtifacts& run(const std::string& env, const std::vector<std::string>& sets) {
  std::string key = env;
  for (const auto& s : sets) key += " " + s;
  auto it = g_cache.find(key);
  if (it == g_cache.end()) {
    it = g_cache.emplace(key, run_experiment(load(env, sets), g_jobs)).first;
  }
  return it->second;
}

// Seeds run independently, so the first n seeds of a larger run equal a run
// over just those seeds.
RunArtifacts first_seeds(const RunArtifacts& r, std::size_t n) {
  RunArtifacts out{r.config, {}};
  out.config.seeds.resize(std::min(n, out.config.seeds.size()));
  out.seeds.assign(r.seeds.begin(), r.seeds.begin() + static_cast<std::ptrdiff_t>(
                                                        out.config.seeds.size()));
  return out;
}

double window_mean(const SeedResult& sr, int first, int count) {
  double s = 0.0;
  for (int e = first; e < first + count; ++e) s += sr.rows[e].ret;
  return s / count;
}

// ---------------------------------------------------------------------------
// 1. RKHS algebra

RkhsFunctional random_functional(std::mt19937_64& rng, Eigen::Index dim,
                                 Eigen::Index out, int terms) {
  std::normal_distribution<double> n(0.0, 1.0);
  RkhsFunctional f(out);
  for (int t = 0; t < terms; ++t) {
    StateVector c(dim);
    Eigen::VectorXd a(out);
    for (auto& x : c) x = n(rng);
    for (auto& x : a) x = n(rng);
    f.add_term(c, a);
  }
  return f;
}

Outcome rkhs_algebra() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> dim_d(1, 6), out_d(1, 3), terms_d(1, 6), pts_d(2, 40);
  std::uniform_real_distribution<double> bw_d(0.05, 4.0), coef(-2.0, 2.0);
  std::normal_distribution<double> n(0.0, 1.0);
  constexpr int kCases = 10000;
  double worst_rep = 0.0, worst_lin = 0.0, worst_sym = 0.0, min_norm = 0.0, min_eig = 1.0;
  int failures = 0;
  for (int c = 0; c < kCases; ++c) {
    const Eigen::Index d = dim_d(rng), m = out_d(rng);
    Eigen::VectorXd diag(d);
    for (auto& x : diag) x = bw_d(rng);
    const Bandwidth bw(diag);
    const RkhsFunctional f = random_functional(rng, d, m, terms_d(rng));
    const RkhsFunctional g = random_functional(rng, d, m, terms_d(rng));
    const RkhsFunctional h = random_functional(rng, d, m, terms_d(rng));

    StateVector s(d);
    Eigen::VectorXd v(m);
    for (auto& x : s) x = n(rng);
    for (auto& x : v) x = n(rng);
    const double rep = std::abs(f.evaluate(s, bw).dot(v) -
                                inner(f, RkhsFunctional::singleton(s, v), bw));
    const double a = coef(rng), b = coef(rng);
    const double lin = std::abs(inner(axpy(axpy(RkhsFunctional(m), f, a), g, b), h, bw) -
                                (a * inner(f, h, bw) + b * inner(g, h, bw)));
    const double sym = std::abs(inner(f, g, bw) - inner(g, f, bw));
    const double norm = inner(f, f, bw);
    worst_rep = std::max(worst_rep, rep);
    worst_lin = std::max(worst_lin, lin);
    worst_sym = std::max(worst_sym, sym);
    min_norm = std::min(min_norm, norm);

    const int p = pts_d(rng);
    Eigen::MatrixXd pts(p, d);
    for (Eigen::Index i = 0; i < pts.size(); ++i) pts.data()[i] = n(rng);
    // Near-duplicate rows make the Gram matrix close to singular.
    if (c % 3 == 0) pts.row(p - 1) = pts.row(0).array() + 1e-9;
    Eigen::MatrixXd gram = kernel_matrix(pts, pts, bw);
    gram.diagonal().array() += 1e-10;
    const double eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(
                           gram, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
    min_eig = std::min(min_eig, eig);

    if (rep > 1e-10 || lin > 1e-9 || sym > 1e-12 || norm < 0.0 || eig < -1e-8) ++failures;
  }
  return {failures == 0,
          fmt("%d cases, %d failing; max |reproducing| %.1e, |bilinear| %.1e, "
              "|symmetry| %.1e; min <f,f> %.1e; min Gram eig %.1e",
              kCases, failures, worst_rep, worst_lin, worst_sym, min_norm, min_eig)};
}

// ---------------------------------------------------------------------------
// 2. LSTD oracle

KernelDictionary dict_of(const std::vector<StateVector>& states, const Bandwidth& bw) {
  KernelDictionary d(bw, {0.0, 100});
  for (const auto& s : states) d.admit(s);
  return d;
}

Outcome lstd_oracle() {
  const Bandwidth bw(vec({1.0}));
  const auto policy = GaussianPolicy::zero(1, vec({1.0}), bw);
  double worst = 0.0;

  // One state looping on itself with reward 1: Q = 1 / (1 - 0.5) = 2.
  const StateVector s = vec({0.0});
  const Eigen::VectorXd a = vec({0.5});
  const std::vector<Transition> loop{{s, a, 1.0, s, a, false}};
  const QModel q1 = lstd_fit(QModel(1e-8, 0.5, bw), loop, policy, dict_of({s}, bw));
  worst = std::max(worst, std::abs(q1.evaluate(policy, s, a) - 2.0));

  // s0 -> s1 -> s2 -> end with rewards (0, 0, 1) and discount 0.9.
  const std::vector<StateVector> st{vec({0.0}), vec({10.0}), vec({20.0})};
  const std::vector<Eigen::VectorXd> ac{vec({0.3}), vec({-0.2}), vec({0.5})};
  const std::vector<Transition> chain{{st[0], ac[0], 0.0, st[1], ac[1], false},
                                      {st[1], ac[1], 0.0, st[2], ac[2], false},
                                      {st[2], ac[2], 1.0, st[2], vec({0.0}), true}};
  const QModel q3 = lstd_fit(QModel(1e-8, 0.9, bw), chain, policy, dict_of(st, bw));
  const double want[] = {0.81, 0.9, 1.0};
  for (int i = 0; i < 3; ++i) {
    worst = std::max(worst, std::abs(q3.evaluate(policy, st[i], ac[i]) - want[i]));
  }
  return {worst <= 1e-6, fmt("self-loop and 3-state chain, max |Q - Q*| = %.2e (ridge 1e-8)", worst)};
}

// ---------------------------------------------------------------------------
// 3 and 4. Gaussian bandit r(a) = -(a - 2)^2 at a single state, Sigma = 1.

const StateVector kBandit = vec({0.0});

double bandit_reward(double a) { return -(a - 2.0) * (a - 2.0); }

GaussianPolicy bandit_policy(double mean) {
  return GaussianPolicy(RkhsFunctional::singleton(kBandit, vec({mean})), vec({1.0}),
                        Bandwidth(vec({1.0})));
}

RkhsFunctional averaged_estimate(const GaussianPolicy& p, int samples, Rng& rng) {
  double sum = 0.0;
  for (int i = 0; i < samples; ++i) {
    const ActionVector a = sample_action(p, kBandit, rng);
    sum += estimate_gradient(p, bandit_reward(a[0]), kBandit, a).functional.terms()[0].coeff[0];
  }
  return RkhsFunctional::singleton(kBandit, vec({sum / samples}));
}

Outcome gradient_oracle() {
  const GaussianPolicy p = bandit_policy(0.0);
  Rng rng(31);
  const RkhsFunctional g = averaged_estimate(p, 100000, rng);
  const double mc = g.terms()[0].coeff[0];
  const double analytic = 2.0 * (2.0 - 0.0);
  const double rel_analytic = std::abs(mc - analytic) / analytic;

  // Directional derivatives along k(c, .) e_1 for several centers c.
  auto objective = [](const GaussianPolicy& q) {
    const double m = q.mean_action(kBandit)[0];
    return -((m - 2.0) * (m - 2.0) + 1.0);
  };
  double rel_fd = 0.0;
  for (double c : {0.0, 0.5, -1.0, 1.5}) {
    const auto dir = RkhsFunctional::singleton(vec({c}), vec({1.0}));
    constexpr double eps = 1e-4;
    const GaussianPolicy plus(axpy(p.mean(), dir, eps), p.variance(), p.bandwidth());
    const GaussianPolicy minus(axpy(p.mean(), dir, -eps), p.variance(), p.bandwidth());
    const double fd = (objective(plus) - objective(minus)) / (2.0 * eps);
    const double est = inner(g, dir, p.bandwidth());
    rel_fd = std::max(rel_fd, std::abs(est - fd) / std::abs(fd));
  }
  return {rel_analytic <= 0.05 && rel_fd <= 0.05,
          fmt("MC mean %.4f vs analytic 4 (rel %.2f%%); worst finite-difference rel %.2f%% "
              "over 4 kernel directions",
              mc, 100 * rel_analytic, 100 * rel_fd)};
}

Outcome bandit_convergence() {
  const Bandwidth bw(vec({1.0}));
  KernelDictionary dict(bw);
  dict.admit(kBandit);
  int ok = 0;
  std::string finals;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    GaussianPolicy p = bandit_policy(0.0);
    Rng rng = make_rng(seed, Stream::kPolicy);
    for (int k = 0; k < 50; ++k) {
      p = policy_update(p, averaged_estimate(p, 200, rng), 0.05, dict);
    }
    const double h = p.mean_action(kBandit)[0];
    if (std::abs(h - 2.0) <= 0.2) ++ok;
    finals += fmt(" %.3f", h);
  }
  return {ok >= 9, fmt("%d/10 seeds within 0.2 of 2.0 after 50 updates (alpha 0.05, 200 "
                       "samples each); final h:%s",
                       ok, finals.c_str())};
}

// ---------------------------------------------------------------------------
// 5. Window length under faster drift

const std::vector<std::string> kTwentySeeds{"seeds=0..19"};

Outcome drift_windows() {
  const ExperimentConfig base = load("cartpole", kTwentySeeds);
  const std::string fast = "drift.rate=" + format_number(4.0 * base.drift.rate);
  const RunArtifacts& slow_run = run("cartpole", kTwentySeeds);
  const RunArtifacts& fast_run = run("cartpole", {"seeds=0..19", fast});
  std::size_t pos = 0, neg = 0;
  std::vector<double> slow_med, fast_med;
  for (std::size_t i = 0; i < slow_run.seeds.size(); ++i) {
    auto pooled = [](const SeedResult& sr) {
      std::vector<double> w;
      for (const auto& ep : sr.retreat_windows) w.insert(w.end(), ep.begin(), ep.end());
      return w.empty() ? 0.0 : median(w);
    };
    const double a = pooled(slow_run.seeds[i]), b = pooled(fast_run.seeds[i]);
    slow_med.push_back(a);
    fast_med.push_back(b);
    if (b < a) ++pos;
    if (b > a) ++neg;
  }
  const double p = sign_test_p(pos, neg);
  return {p < 0.05,
          fmt("median window %.2f at rate %g vs %.2f at 4x; fast smaller on %zu, larger on "
              "%zu of 20 seeds; sign test p = %.4f",
              median(slow_med), base.drift.rate, median(fast_med), pos, neg, p)};
}

// ---------------------------------------------------------------------------
// 6. Adaptive against fixed windows

const std::vector<std::string> kTenSeeds{"seeds=0..9"};

double final_mean(const RunArtifacts& r) {
  double s = 0.0;
  for (const auto& sr : r.seeds) s += window_mean(sr, r.config.episodes - 20, 20);
  return s / static_cast<double>(r.seeds.size());
}

Outcome adaptive_vs_fixed() {
  const double adaptive = final_mean(first_seeds(run("cartpole", kTwentySeeds), 10));
  double best = -1e300;
  int best_h = 0;
  std::string all;
  for (int h : {5, 10, 20}) {
    const double m = final_mean(
        run("cartpole", {"seeds=0..9", "agent=fixed-h", "agent.H=" + std::to_string(h)}));
    all += fmt(" H=%d %.1f", h, m);
    if (m > best) {
      best = m;
      best_h = h;
    }
  }
  return {adaptive >= best, fmt("final-20 mean return: adaptive %.1f, best fixed H=%d %.1f;%s",
                                adaptive, best_h, best, all.c_str())};
}

// ---------------------------------------------------------------------------
// 7. Learning signal on every environment

Outcome learning_signal() {
  bool pass = true;
  std::string detail;
  for (const char* env : {"cartpole", "pendulum", "reach"}) {
    const RunArtifacts r = std::string(env) == "cartpole"
                               ? first_seeds(run(env, kTwentySeeds), 10)
                               : run(env, kTenSeeds);
    const int n = r.config.episodes;
    int improved = 0;
    double first = 0.0, last = 0.0;
    for (const auto& sr : r.seeds) {
      const double a = window_mean(sr, 0, 20), b = window_mean(sr, n - 20, 20);
      first += a / 10.0;
      last += b / 10.0;
      if (b > a) ++improved;
    }
    pass = pass && improved >= 8;
    detail += fmt("%s %d/10 (%.1f -> %.1f over %d episodes); ", env, improved, first, last, n);
  }
  detail.resize(detail.size() - 2);
  return {pass, detail};
}

// ---------------------------------------------------------------------------
// 8. Regret proxy

Outcome regret_trend() {
  bool nonneg = true;
  for (const auto& [key, r] : g_cache) {
    for (const auto& sr : r.seeds) {
      for (double x : sr.regret) nonneg = nonneg && x >= 0.0;
    }
  }
  const RunArtifacts r = first_seeds(run("cartpole", kTwentySeeds), 10);
  const int n = r.config.episodes;
  std::vector<double> episode(n), mean_regret(n, 0.0);
  for (int e = 0; e < n; ++e) {
    episode[e] = e;
    for (const auto& sr : r.seeds) mean_regret[e] += sr.regret[e] / 10.0;
  }
  const double rho = spearman(episode, mean_regret);
  int seeds_nonpos = 0;
  for (const auto& sr : r.seeds) {
    if (spearman(episode, sr.regret) <= 0.0) ++seeds_nonpos;
  }
  return {nonneg && rho <= 0.0,
          fmt("non-negative across %zu runs: %s; Spearman(episode, seed-mean regret) = %.3f "
              "(%d/10 seeds individually <= 0)",
              g_cache.size(), nonneg ? "yes" : "no", rho, seeds_nonpos)};
}

// ---------------------------------------------------------------------------
// 9. Determinism

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "adaptiveh_acceptance_determinism";
  fs::remove_all(root);
  bool same = true;
  std::string detail;
  for (const char* env : {"cartpole", "pendulum", "reach"}) {
    const ExperimentConfig cfg = load(env, {"seeds=0..7", "episodes=15"});
    std::string bytes[3];
    const int jobs[3] = {1, 1, 8};
    for (int i = 0; i < 3; ++i) {
      const fs::path dir = root / (std::string(env) + std::to_string(i));
      write_artifacts(run_experiment(cfg, jobs[i]), dir);
      bytes[i] = read_file(dir / "episodes.csv");
    }
    const bool ok = bytes[0] == bytes[1] && bytes[0] == bytes[2];
    same = same && ok;
    detail += fmt("%s %s (%zu bytes); ", env, ok ? "identical" : "DIFFERENT", bytes[0].size());
  }
  fs::remove_all(root);
  detail += "jobs 1, 1, 8";
  return {same, detail};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> check;
};

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--configs" && i + 1 < argc) {
      g_configs = argv[++i];
    } else if (arg == "--jobs" && i + 1 < argc) {
      g_jobs = std::max(1, std::atoi(argv[++i]));
    } else {
      only.insert(std::atoi(arg.c_str()));
    }
  }

  const std::vector<Criterion> criteria{
      {1, "rkhs algebra", 10, rkhs_algebra},
      {2, "lstd oracle", 1, lstd_oracle},
      {3, "gradient oracle", 30, gradient_oracle},
      {4, "bandit convergence", 30, bandit_convergence},
      {5, "window shrinks under 4x drift", 600, drift_windows},
      {6, "adaptive vs fixed H", 900, adaptive_vs_fixed},
      {7, "learning signal", 1800, learning_signal},
      {8, "regret proxy", 60, regret_trend},
      {9, "determinism", 300, determinism},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto start = Clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = seconds_since(start);
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::printf("criterion %d %s  %s: %s [%.1f s, budget %.0f s%s]\n", c.id,
                pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs, c.budget_s,
                in_time ? "" : ", OVER BUDGET");
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
