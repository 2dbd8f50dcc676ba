#pragma once

#include "common.hpp"
#include "nn.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace idrl {

struct EnvSpec {
  std::string id;
  int state_dim = 1;
  ActionSpace action_space;
  int horizon = 1;
  double gamma = 0.99;
  double r_max = 1.0;

  int action_dim() const { return action_space.dim; }
  void validate() const;
};

// Exact finite MDP. States and actions are indices; the environment wrapper
// exposes them to learners as one-hot vectors.
struct TabularMDP {
  int n_states = 0;
  int n_actions = 0;
  std::vector<Mat> transition;  // per action, n_states x n_states, row-stochastic
  Mat reward;                   // n_states x n_actions
  Vec initial_dist;
  Vec embedding;  // 1-D coordinate per state for W1 / Euclidean distances

  const Mat& T(int a) const { return transition[a]; }
  double r_max() const { return reward.cwiseAbs().maxCoeff(); }
  // Throws ValidationError when rows or initial_dist are not normalized to 1e-12.
  void validate() const;
};

struct StepResult {
  Vec next_state;
  double reward = 0.0;
  bool terminal = false;
};

struct LipschitzConstants {
  bool available = false;
  double transition = 0.0;  // L_T
  double reward = 0.0;      // L_R
};

class Env {
 public:
  explicit Env(EnvSpec spec) : spec_(std::move(spec)) { spec_.validate(); }
  virtual ~Env() = default;

  const EnvSpec& spec() const { return spec_; }

  // Initial state drawn from rho_0; identical for identical seeds.
  virtual Vec reset(std::uint64_t seed) const = 0;
  // Pure: the same (state, action, noise_seed) always yields the same result.
  virtual StepResult step(const Vec& state, const Vec& action, std::uint64_t noise_seed) const = 0;
  virtual double reward(const Vec& state, const Vec& action) const = 0;
  virtual LipschitzConstants lipschitz_constants() const = 0;
  virtual const TabularMDP* tabular() const { return nullptr; }

  // Validated and, for box spaces, clamped copy of `action`.
  Vec conform_action(const Vec& action) const;

 private:
  EnvSpec spec_;
};

class TabularEnv final : public Env {
 public:
  TabularEnv(std::string id, TabularMDP mdp, int horizon, double gamma);

  Vec reset(std::uint64_t seed) const override;
  StepResult step(const Vec& state, const Vec& action, std::uint64_t noise_seed) const override;
  double reward(const Vec& state, const Vec& action) const override;
  LipschitzConstants lipschitz_constants() const override;
  const TabularMDP* tabular() const override { return &mdp_; }

  int state_index(const Vec& state) const;
  Vec state_vector(int s) const { return one_hot(s, mdp_.n_states); }

 private:
  TabularMDP mdp_;
};

// Exact L_T and L_R for a tabular MDP under its embedding.
LipschitzConstants tabular_lipschitz(const TabularMDP& mdp);

struct ChainParams {
  int n_states = 6;
  double slip = 0.1;
  int goal = -1;  // -1: rightmost state
  int horizon = 50;
  double gamma = 0.9;
};
TabularMDP chain_mdp(const ChainParams& p);

struct GridParams {
  double slip = 0.1;
  int horizon = 50;
  double gamma = 0.9;
};
TabularMDP grid5_mdp(const GridParams& p);

// Inverted pendulum around the upright position (theta = 0), semi-implicit Euler.
// Beyond |theta| = fail_angle the pole lies on a stop that gravity keeps it
// pressed against, since max_torque < m g l sin(fail_angle) by default.
struct PendulumParams {
  double gravity = 10.0;
  double length = 1.0;
  double mass = 1.0;
  double max_torque = 2.0;
  double max_speed = 8.0;
  double dt = 0.05;
  double init_angle = 0.1;     // theta_0 ~ U(-init_angle, init_angle)
  double init_velocity = 0.1;  // omega_0 ~ U(-init_velocity, init_velocity)
  double fail_angle = 0.5;     // reward reaches 0 here; the pole rests on a stop or the episode ends
  double noise_std = 0.0;      // process noise on omega, scaled by sqrt(dt)
  int horizon = 200;
  double gamma = 0.99;
  bool terminate = false;      // end the episode at the stop instead of resting on it
};

class PendulumEnv final : public Env {
 public:
  explicit PendulumEnv(PendulumParams p);
  Vec reset(std::uint64_t seed) const override;
  StepResult step(const Vec& state, const Vec& action, std::uint64_t noise_seed) const override;
  double reward(const Vec& state, const Vec& action) const override;
  LipschitzConstants lipschitz_constants() const override;
  const PendulumParams& params() const { return p_; }

 private:
  PendulumParams p_;
};

// s' = clamp(s + a dt), cost s^2 + 0.1 a^2.
struct PointMassParams {
  double dt = 0.05;
  double bound = 1.0;
  double init = 1.0;
  int horizon = 100;
  double gamma = 0.99;
};

class PointMassEnv final : public Env {
 public:
  explicit PointMassEnv(PointMassParams p);
  Vec reset(std::uint64_t seed) const override;
  StepResult step(const Vec& state, const Vec& action, std::uint64_t noise_seed) const override;
  double reward(const Vec& state, const Vec& action) const override;
  LipschitzConstants lipschitz_constants() const override;

 private:
  PointMassParams p_;
};

using EnvParams = std::map<std::string, double>;

// "chain", "grid5", "pendulum", "pointmass"; unknown ids or keys throw ValidationError.
std::shared_ptr<const Env> make_env(const std::string& id, const EnvParams& params = {});
// Every tunable key for `id` with its default value.
EnvParams default_env_params(const std::string& id);

}  // namespace idrl
