#include "adaptiveh/harness/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "adaptiveh/envs/cartpole.hpp"
#include "adaptiveh/envs/pendulum.hpp"
#include "adaptiveh/envs/reach.hpp"

namespace adaptiveh::harness {

namespace {

using nlohmann::json;

std::string trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fmt(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += fmt(v[i]);
  }
  return out;
}

double parse_double(const std::string& key, const std::string& text) {
  if (text == "inf" || text == "+inf") return INFINITY;
  if (text == "-inf") return -INFINITY;
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  if (!text.empty() && *first == '+') ++first;
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last || text.empty()) {
    throw ConfigError(key + ": expected a number, got '" + text + "'");
  }
  return v;
}

long long parse_int(const std::string& key, const std::string& text) {
  long long v = 0;
  const char* first = text.data();
  const char* last = first + text.size();
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last || text.empty()) {
    throw ConfigError(key + ": expected an integer, got '" + text + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + text + "'");
}

std::vector<double> parse_doubles(const std::string& key,
                                  const std::string& text) {
  std::vector<double> out;
  for (const auto& part : split(text, ',')) out.push_back(parse_double(key, part));
  return out;
}

// "0,1,5" or inclusive ranges "0..9", mixed.
std::vector<std::uint64_t> parse_seeds(const std::string& key,
                                       const std::string& text) {
  std::vector<std::uint64_t> out;
  for (const auto& part : split(text, ',')) {
    const auto dots = part.find("..");
    if (dots == std::string::npos) {
      const long long v = parse_int(key, part);
      if (v < 0) throw ConfigError(key + ": seeds must be >= 0");
      out.push_back(static_cast<std::uint64_t>(v));
      continue;
    }
    const long long lo = parse_int(key, trim(part.substr(0, dots)));
    const long long hi = parse_int(key, trim(part.substr(dots + 2)));
    if (lo < 0 || hi < lo) throw ConfigError(key + ": bad seed range '" + part + "'");
    for (long long s = lo; s <= hi; ++s) out.push_back(static_cast<std::uint64_t>(s));
  }
  return out;
}

// Broadcasts a single value to `dim` entries.
std::vector<double> fit_dim(const std::string& key, std::vector<double> v,
                            std::size_t dim) {
  if (v.size() == 1 && dim > 1) v.assign(dim, v[0]);
  if (v.size() != dim) {
    throw ConfigError(key + ": expected " + std::to_string(dim) +
                      " entries, got " + std::to_string(v.size()));
  }
  return v;
}

struct EnvShape {
  std::size_t state_dim;
  std::size_t action_dim;
  double action_half_range;
  int max_steps;
  ScheduleParams drift;
  std::vector<double> bandwidth;
};

EnvShape env_shape(const std::string& env) {
  if (env == "cartpole") {
    CartPoleParams p;
    return {4, 1, p.force_max, p.max_steps, p.gravity, {0.25, 1.0, 0.01, 0.25}};
  }
  if (env == "pendulum") {
    PendulumParams p;
    return {3, 1, p.max_torque, p.max_steps, p.noise, {0.1, 0.1, 1.0}};
  }
  if (env == "reach") {
    ReachParams p;
    return {6, 3, p.speed_cap, p.max_steps, p.target_speed,
            std::vector<double>(6, 0.04)};
  }
  throw ConfigError("env: unknown environment '" + env +
                    "' (expected cartpole, pendulum or reach)");
}

ExperimentConfig defaults_for(const std::string& env) {
  const EnvShape shape = env_shape(env);
  ExperimentConfig cfg;
  cfg.env = env;
  cfg.drift = shape.drift;
  cfg.bandwidth = shape.bandwidth;
  const double sd = 0.2 * shape.action_half_range;
  cfg.variance.assign(shape.action_dim, sd * sd);
  cfg.variance_final = cfg.variance;
  cfg.max_steps = shape.max_steps;
  return cfg;
}

}  // namespace

std::string_view to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::kAdaptiveH:
      return "adaptive-h";
    case AgentKind::kFixedH:
      return "fixed-h";
    case AgentKind::kRandom:
      return "random";
  }
  return "?";
}

AgentKind parse_agent_kind(std::string_view name) {
  if (name == "adaptive-h") return AgentKind::kAdaptiveH;
  if (name == "fixed-h") return AgentKind::kFixedH;
  if (name == "random") return AgentKind::kRandom;
  throw ConfigError("agent: unknown agent '" + std::string(name) +
                    "' (expected adaptive-h, fixed-h or random)");
}

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys{
      "env",           "agent",           "agent.H",
      "episodes",      "max_steps",       "seeds",
      "output",        "wall_clock",      "drift.kind",
      "drift.base",    "drift.amplitude", "drift.rate",
      "drift.min",     "drift.max",       "drift.random_phase",
      "kernel.bandwidth", "kernel.nu",    "kernel.max_centers",
      "policy.variance",  "policy.variance_final",
      "learner.alpha", "learner.gamma",   "learner.tau",
      "learner.h_min", "learner.window",  "learner.ridge",
      "learner.signal"};
  return keys;
}

KeyValues parse_key_values(std::string_view text) {
  KeyValues kv;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = trim(body.substr(0, eq));
    std::string value = trim(body.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    }
    if (!kv.emplace(key, value).second) {
      throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" +
                        key + "'");
    }
  }
  return kv;
}

KeyValues load_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_key_values(buf.str());
}

void apply_overrides(KeyValues& kv, const std::vector<std::string>& overrides) {
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("override '" + o + "': expected key=value");
    }
    std::string key = trim(o.substr(0, eq));
    if (key.empty()) throw ConfigError("override '" + o + "': empty key");
    kv[key] = trim(o.substr(eq + 1));
  }
}

ExperimentConfig resolve(const KeyValues& kv) {
  const std::set<std::string> known(known_keys().begin(), known_keys().end());
  for (const auto& [key, value] : kv) {
    if (!known.count(key)) throw ConfigError("unknown key '" + key + "'");
  }
  auto get = [&](const std::string& key) -> const std::string* {
    auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };

  const std::string env = get("env") ? *get("env") : std::string("cartpole");
  const EnvShape shape = env_shape(env);
  ExperimentConfig cfg = defaults_for(env);

  if (auto v = get("agent")) cfg.agent = parse_agent_kind(*v);
  if (auto v = get("agent.H")) cfg.fixed_h = static_cast<int>(parse_int("agent.H", *v));
  if (auto v = get("episodes")) cfg.episodes = static_cast<int>(parse_int("episodes", *v));
  if (auto v = get("max_steps")) cfg.max_steps = static_cast<int>(parse_int("max_steps", *v));
  if (auto v = get("seeds")) cfg.seeds = parse_seeds("seeds", *v);
  if (auto v = get("output")) cfg.output = *v;
  if (auto v = get("wall_clock")) cfg.wall_clock = parse_bool("wall_clock", *v);

  if (auto v = get("drift.kind")) {
    try {
      cfg.drift.kind = parse_schedule_kind(*v);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("drift.kind: ") + e.what());
    }
  }
  if (auto v = get("drift.base")) cfg.drift.base = parse_double("drift.base", *v);
  if (auto v = get("drift.amplitude")) cfg.drift.amplitude = parse_double("drift.amplitude", *v);
  if (auto v = get("drift.rate")) cfg.drift.rate = parse_double("drift.rate", *v);
  if (auto v = get("drift.min")) cfg.drift.min = parse_double("drift.min", *v);
  if (auto v = get("drift.max")) cfg.drift.max = parse_double("drift.max", *v);
  if (auto v = get("drift.random_phase")) cfg.drift.random_phase = parse_bool("drift.random_phase", *v);

  if (auto v = get("kernel.bandwidth")) {
    cfg.bandwidth = fit_dim("kernel.bandwidth", parse_doubles("kernel.bandwidth", *v),
                            shape.state_dim);
  }
  if (auto v = get("kernel.nu")) cfg.nu = parse_double("kernel.nu", *v);
  if (auto v = get("kernel.max_centers")) {
    const long long n = parse_int("kernel.max_centers", *v);
    if (n < 1) throw ConfigError("kernel.max_centers must be >= 1");
    cfg.max_centers = static_cast<std::size_t>(n);
  }
  if (auto v = get("policy.variance")) {
    cfg.variance = fit_dim("policy.variance", parse_doubles("policy.variance", *v),
                           shape.action_dim);
    cfg.variance_final = cfg.variance;
  }
  if (auto v = get("policy.variance_final")) {
    cfg.variance_final = fit_dim("policy.variance_final",
                                 parse_doubles("policy.variance_final", *v),
                                 shape.action_dim);
  }

  if (auto v = get("learner.alpha")) cfg.alpha = parse_double("learner.alpha", *v);
  if (auto v = get("learner.gamma")) cfg.gamma = parse_double("learner.gamma", *v);
  if (auto v = get("learner.tau")) cfg.tau = parse_double("learner.tau", *v);
  if (auto v = get("learner.h_min")) cfg.h_min = static_cast<int>(parse_int("learner.h_min", *v));
  if (auto v = get("learner.window")) {
    const long long n = parse_int("learner.window", *v);
    if (n < 1) throw ConfigError("learner.window must be >= 1");
    cfg.window = static_cast<std::size_t>(n);
  }
  if (auto v = get("learner.ridge")) cfg.ridge = parse_double("learner.ridge", *v);
  if (auto v = get("learner.signal")) {
    try {
      cfg.signal = parse_gradient_signal(*v);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("learner.signal: ") + e.what());
    }
  }

  validate(cfg);
  return cfg;
}

void validate(const ExperimentConfig& cfg) {
  const EnvShape shape = env_shape(cfg.env);
  auto positive = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(),
                       [](double x) { return std::isfinite(x) && x > 0.0; });
  };
  if (cfg.bandwidth.size() != shape.state_dim || !positive(cfg.bandwidth)) {
    throw ConfigError("kernel.bandwidth: need " + std::to_string(shape.state_dim) +
                      " positive entries");
  }
  if (!(cfg.nu >= 0.0 && cfg.nu <= 1.0)) {
    throw ConfigError("kernel.nu must lie in [0, 1]");
  }
  if (cfg.max_centers < 1) throw ConfigError("kernel.max_centers must be >= 1");
  if (cfg.variance.size() != shape.action_dim || !positive(cfg.variance)) {
    throw ConfigError("policy.variance: need " + std::to_string(shape.action_dim) +
                      " positive entries");
  }
  if (cfg.variance_final.size() != shape.action_dim ||
      !positive(cfg.variance_final)) {
    throw ConfigError("policy.variance_final: need " +
                      std::to_string(shape.action_dim) + " positive entries");
  }
  if (!(cfg.alpha > 0.0) || !std::isfinite(cfg.alpha)) {
    throw ConfigError("learner.alpha must be > 0");
  }
  if (!(cfg.gamma >= 0.0 && cfg.gamma < 1.0)) {
    throw ConfigError("learner.gamma must lie in [0, 1)");
  }
  if (std::isnan(cfg.tau)) throw ConfigError("learner.tau must not be nan");
  if (cfg.h_min < 1) throw ConfigError("learner.h_min must be >= 1");
  if (cfg.window < 1) throw ConfigError("learner.window must be >= 1");
  if (!(cfg.ridge > 0.0) || !std::isfinite(cfg.ridge)) {
    throw ConfigError("learner.ridge must be > 0");
  }
  if (cfg.fixed_h < 1) throw ConfigError("agent.H must be >= 1");
  if (cfg.episodes < 0) throw ConfigError("episodes must be >= 0");
  if (cfg.max_steps < 1) throw ConfigError("max_steps must be >= 1");
  if (cfg.seeds.empty()) throw ConfigError("seeds must not be empty");
  if (std::set<std::uint64_t>(cfg.seeds.begin(), cfg.seeds.end()).size() !=
      cfg.seeds.size()) {
    throw ConfigError("seeds must be distinct");
  }
  if (cfg.output.empty()) throw ConfigError("output must not be empty");
  const ScheduleParams& d = cfg.drift;
  if (!std::isfinite(d.base) || !std::isfinite(d.amplitude) ||
      !std::isfinite(d.rate) || !std::isfinite(d.min) || !std::isfinite(d.max)) {
    throw ConfigError("drift parameters must be finite");
  }
  if (d.min > d.max) throw ConfigError("drift.min must be <= drift.max");
  if (d.amplitude < 0.0) throw ConfigError("drift.amplitude must be >= 0");
  if (d.rate < 0.0) throw ConfigError("drift.rate must be >= 0");
}

KeyValues to_key_values(const ExperimentConfig& cfg) {
  KeyValues kv;
  kv["env"] = cfg.env;
  kv["agent"] = std::string(to_string(cfg.agent));
  kv["agent.H"] = std::to_string(cfg.fixed_h);
  kv["episodes"] = std::to_string(cfg.episodes);
  kv["max_steps"] = std::to_string(cfg.max_steps);
  std::string seeds;
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
    if (i) seeds += ',';
    seeds += std::to_string(cfg.seeds[i]);
  }
  kv["seeds"] = seeds;
  kv["output"] = cfg.output;
  kv["wall_clock"] = cfg.wall_clock ? "true" : "false";
  kv["drift.kind"] = std::string(to_string(cfg.drift.kind));
  kv["drift.base"] = fmt(cfg.drift.base);
  kv["drift.amplitude"] = fmt(cfg.drift.amplitude);
  kv["drift.rate"] = fmt(cfg.drift.rate);
  kv["drift.min"] = fmt(cfg.drift.min);
  kv["drift.max"] = fmt(cfg.drift.max);
  kv["drift.random_phase"] = cfg.drift.random_phase ? "true" : "false";
  kv["kernel.bandwidth"] = fmt(cfg.bandwidth);
  kv["kernel.nu"] = fmt(cfg.nu);
  kv["kernel.max_centers"] = std::to_string(cfg.max_centers);
  kv["policy.variance"] = fmt(cfg.variance);
  kv["policy.variance_final"] = fmt(cfg.variance_final);
  kv["learner.alpha"] = fmt(cfg.alpha);
  kv["learner.gamma"] = fmt(cfg.gamma);
  kv["learner.tau"] = fmt(cfg.tau);
  kv["learner.h_min"] = std::to_string(cfg.h_min);
  kv["learner.window"] = std::to_string(cfg.window);
  kv["learner.ridge"] = fmt(cfg.ridge);
  kv["learner.signal"] = std::string(to_string(cfg.signal));
  return kv;
}

std::string to_json(const ExperimentConfig& cfg) {
  // Non-finite numbers (tau = -inf) have no JSON form and stay strings.
  auto num = [](double v) -> json {
    if (std::isfinite(v)) return v;
    return fmt(v);
  };
  auto nums = [&](const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(num(x));
    return a;
  };
  json j;
  j["env"] = cfg.env;
  j["agent"] = std::string(to_string(cfg.agent));
  j["agent.H"] = cfg.fixed_h;
  j["episodes"] = cfg.episodes;
  j["max_steps"] = cfg.max_steps;
  j["seeds"] = cfg.seeds;
  j["output"] = cfg.output;
  j["wall_clock"] = cfg.wall_clock;
  j["drift.kind"] = std::string(to_string(cfg.drift.kind));
  j["drift.base"] = num(cfg.drift.base);
  j["drift.amplitude"] = num(cfg.drift.amplitude);
  j["drift.rate"] = num(cfg.drift.rate);
  j["drift.min"] = num(cfg.drift.min);
  j["drift.max"] = num(cfg.drift.max);
  j["drift.random_phase"] = cfg.drift.random_phase;
  j["kernel.bandwidth"] = nums(cfg.bandwidth);
  j["kernel.nu"] = num(cfg.nu);
  j["kernel.max_centers"] = cfg.max_centers;
  j["policy.variance"] = nums(cfg.variance);
  j["policy.variance_final"] = nums(cfg.variance_final);
  j["learner.alpha"] = num(cfg.alpha);
  j["learner.gamma"] = num(cfg.gamma);
  j["learner.tau"] = num(cfg.tau);
  j["learner.h_min"] = cfg.h_min;
  j["learner.window"] = cfg.window;
  j["learner.ridge"] = num(cfg.ridge);
  j["learner.signal"] = std::string(to_string(cfg.signal));
  return j.dump(2) + "\n";
}

ExperimentConfig from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("snapshot: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("snapshot: expected a JSON object");
  auto scalar = [](const std::string& key, const json& v) -> std::string {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
    if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
    if (v.is_number_float()) return fmt(v.get<double>());
    throw ConfigError("snapshot: unsupported value for '" + key + "'");
  };
  KeyValues kv;
  for (const auto& [key, value] : j.items()) {
    if (value.is_array()) {
      std::string joined;
      for (std::size_t i = 0; i < value.size(); ++i) {
        if (i) joined += ',';
        joined += scalar(key, value[i]);
      }
      kv[key] = joined;
    } else {
      kv[key] = scalar(key, value);
    }
  }
  return resolve(kv);
}

std::unique_ptr<NsEnv> make_env(const ExperimentConfig& cfg) {
  if (cfg.env == "cartpole") {
    CartPoleParams p;
    p.gravity = cfg.drift;
    p.max_steps = cfg.max_steps;
    return std::make_unique<CartPole>(p);
  }
  if (cfg.env == "pendulum") {
    PendulumParams p;
    p.noise = cfg.drift;
    p.max_steps = cfg.max_steps;
    return std::make_unique<Pendulum>(p);
  }
  if (cfg.env == "reach") {
    ReachParams p;
    p.target_speed = cfg.drift;
    p.max_steps = cfg.max_steps;
    return std::make_unique<ReachTask>(p);
  }
  throw ConfigError("env: unknown environment '" + cfg.env + "'");
}

AdaptiveHConfig learner_config(const ExperimentConfig& cfg) {
  AdaptiveHConfig c;
  c.threshold = cfg.tau;
  c.step_size = cfg.alpha;
  c.discount = cfg.gamma;
  c.max_episode_len = cfg.max_steps;
  c.min_window = cfg.h_min;
  c.replay_window = cfg.window;
  c.ridge = cfg.ridge;
  c.signal = cfg.signal;
  return c;
}

CheckpointRule checkpoint_rule(const ExperimentConfig& cfg) {
  if (cfg.agent == AgentKind::kFixedH) return CheckpointRule::fixed(cfg.fixed_h);
  return CheckpointRule::adaptive();
}

Bandwidth bandwidth(const ExperimentConfig& cfg) {
  return Bandwidth(Eigen::Map<const Eigen::VectorXd>(
      cfg.bandwidth.data(), static_cast<Eigen::Index>(cfg.bandwidth.size())));
}

Eigen::VectorXd variance_at(const ExperimentConfig& cfg, int episode) {
  const auto n = static_cast<Eigen::Index>(cfg.variance.size());
  Eigen::Map<const Eigen::VectorXd> v0(cfg.variance.data(), n);
  Eigen::Map<const Eigen::VectorXd> v1(cfg.variance_final.data(), n);
  if (cfg.episodes <= 1) return v0;
  const double frac = std::clamp(
      static_cast<double>(episode) / static_cast<double>(cfg.episodes - 1), 0.0, 1.0);
  return v0 + frac * (v1 - v0);
}

}  // namespace adaptiveh::harness
