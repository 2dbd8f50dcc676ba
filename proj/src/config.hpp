#pragma once

#include "agent.hpp"
#include "discriminator.hpp"
#include "env.hpp"
#include "theory.hpp"

#include <map>
#include <string>
#include <variant>
#include <vector>

namespace idrl {

// Parsed TOML subset: [section] headers, `key = value` with numbers,
// "strings", booleans and flat arrays of numbers, `#` comments.
using TomlValue = std::variant<double, std::string, bool, std::vector<double>>;
using TomlTable = std::map<std::string, std::map<std::string, TomlValue>>;

TomlTable parse_toml(const std::string& text);

struct BcConfig {
  std::vector<int> hidden{64, 64};
  double lr = 1e-3;
  int epochs = 50;
  int batch_size = 256;
};

struct ExpertConfig {
  long total_steps = 30000;
  int trajectories = 10;
  bool deterministic = true;
};

struct RunConfig {
  // [run]
  std::uint64_t seed = 0;
  long total_steps = 200000;
  long eval_interval = 5000;
  int eval_episodes = 10;
  long warmup_steps = 1000;
  int batch_size = 256;
  long buffer_capacity = 1000000;
  long checkpoint_interval = 0;  // 0: only the final checkpoint
  int disc_updates = 1;          // discriminator updates per environment step
  int policy_updates = 1;        // agent updates per environment step
  std::string expert_path;

  // [env]
  std::string env_id = "pendulum";
  EnvParams env_params;
  int delay = 0;

  // [agent]
  int delay_tau = -1;  // -1: min(1, delay)
  int n_step = -1;     // -1: max(1, delay - delay_tau)
  AgentConfig agent;

  DiscConfig disc;
  BcConfig bc;
  ExpertConfig expert;
  CertifySuiteConfig certify;

  // Fills the derived defaults and checks every field; throws ValidationError.
  void resolve();
  // Round-trips through parse_config.
  std::string to_toml() const;
};

// Applies IDRL_SEED when set, then resolve().
RunConfig parse_config(const std::string& text, bool apply_env_seed = true);
RunConfig load_config(const std::string& path, bool apply_env_seed = true);

}  // namespace idrl
