#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "adaptiveh/adaptive_h.hpp"
#include "adaptiveh/envs/env.hpp"
#include "adaptiveh/envs/schedule.hpp"

namespace adaptiveh::harness {

/// Raised for anything wrong with a configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class AgentKind { kAdaptiveH, kFixedH, kRandom };

std::string_view to_string(AgentKind kind);
AgentKind parse_agent_kind(std::string_view name);

/// Fully resolved experiment description. Every field has a value after
/// resolve(); environment-dependent defaults are filled from the env id.
struct ExperimentConfig {
  std::string env = "cartpole";
  ScheduleParams drift;

  // Kernel bandwidth diagonal (squared state units), one entry per state dim.
  std::vector<double> bandwidth;
  double nu = 0.1;
  std::size_t max_centers = 2000;

  // Policy variance diagonal, one entry per action dim.
  std::vector<double> variance;
  // Variance at the last episode; equal to `variance` for no decay.
  std::vector<double> variance_final;

  double alpha = 0.1;
  double gamma = 0.95;
  double tau = 0.0;
  int h_min = 2;
  std::size_t window = 2000;
  double ridge = 1e-3;
  GradientSignal signal = GradientSignal::kAdvantage;

  AgentKind agent = AgentKind::kAdaptiveH;
  int fixed_h = 10;

  int episodes = 200;
  int max_steps = 200;
  std::vector<std::uint64_t> seeds{0};
  std::string output = "runs/default";
  // Record per-episode wall-clock time; off keeps artifacts byte-stable.
  bool wall_clock = false;

  bool operator==(const ExperimentConfig&) const = default;
};

using KeyValues = std::map<std::string, std::string>;

/// Parses `key = value` lines; `#` starts a comment. Duplicate keys, missing
/// `=` and empty keys are errors.
KeyValues parse_key_values(std::string_view text);
KeyValues load_key_values(const std::string& path);

/// Applies `key=value` overrides on top of `kv`.
void apply_overrides(KeyValues& kv, const std::vector<std::string>& overrides);

/// Resolves raw keys into a validated config. Unknown keys, malformed values
/// and out-of-range values raise ConfigError.
ExperimentConfig resolve(const KeyValues& kv);

/// Inverse of resolve(): every field as a key/value pair.
KeyValues to_key_values(const ExperimentConfig& cfg);

/// Throws ConfigError describing the first invalid field.
void validate(const ExperimentConfig& cfg);

std::string to_json(const ExperimentConfig& cfg);
ExperimentConfig from_json(std::string_view text);

/// Known configuration keys.
const std::vector<std::string>& known_keys();

// Builders for the run components.
std::unique_ptr<NsEnv> make_env(const ExperimentConfig& cfg);
AdaptiveHConfig learner_config(const ExperimentConfig& cfg);
CheckpointRule checkpoint_rule(const ExperimentConfig& cfg);
Bandwidth bandwidth(const ExperimentConfig& cfg);
Eigen::VectorXd variance_at(const ExperimentConfig& cfg, int episode);

}  // namespace adaptiveh::harness
