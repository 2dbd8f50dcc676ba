#pragma once

#include "env.hpp"

#include <deque>
#include <limits>
#include <memory>
#include <vector>

namespace idrl {

// x_t = (s_{t-Δ}, a_{t-Δ}, ..., a_{t-1}).
struct AugmentedState {
  Vec obs;
  std::vector<Vec> window;  // oldest action first

  int delay() const { return static_cast<int>(window.size()); }
  Vec flatten() const;
  bool operator==(const AugmentedState& o) const { return obs == o.obs && window == o.window; }
};

AugmentedState augment(const Vec& obs, const std::vector<Vec>& window, int delay);

struct DelayedStep {
  AugmentedState x;
  double reward = 0.0;           // R(s_t, a_t) of the action just taken
  double revealed_reward = 0.0;  // R(s_{t-Δ}, a_{t-Δ}), arriving with its state
  bool done = false;
  bool terminal = false;
};

// Constant observation delay around a delay-free env. At reset the agent
// observes s_{-Δ} ~ ρ0 and the true system runs the Δ padding actions, so the
// episode follows ρ_Δ and T_Δ exactly.
class DelayedEnv {
 public:
  DelayedEnv(std::shared_ptr<const Env> base, int delay);

  const Env& base() const { return *base_; }
  int delay() const { return delay_; }

  AugmentedState reset(std::uint64_t seed);
  DelayedStep step(const Vec& action, std::uint64_t noise_seed);

  const AugmentedState& current() const { return x_; }
  // Yet-unrevealed true states s_{t-Δ+1} ... s_t, oldest first.
  const std::deque<Vec>& pending() const { return pending_; }
  const Vec& true_state() const { return true_state_; }
  int t() const { return t_; }
  bool done() const { return done_; }
  bool terminal() const { return terminal_; }

 private:
  std::shared_ptr<const Env> base_;
  int delay_;
  AugmentedState x_;
  std::deque<Vec> pending_;
  std::deque<double> pending_rewards_;
  Vec true_state_;
  int t_ = 0;
  bool active_ = false;
  bool done_ = false;
  bool terminal_ = false;
};

// Exact distribution over tabular states (probs) or a weighted particle set.
struct BeliefDist {
  Vec probs;
  Mat particles;
  Vec weights;

  bool exact() const { return probs.size() > 0; }
};

// Row of Π_i T_{a_{t-Δ+i}} indexed by s_{t-Δ}.
Vec belief_exact(const TabularMDP& mdp, int obs, const std::vector<int>& window);
BeliefDist belief_exact(const TabularMDP& mdp, const AugmentedState& x);
BeliefDist belief_mc(const Env& env, const AugmentedState& x, int n_particles, std::uint64_t seed);
// Histogram of a particle belief over the one-hot states of a tabular env.
Vec belief_histogram(const BeliefDist& b, int n_states);

// Enumeration of the tabular augmented space S x A^Δ. Index = s·|A|^Δ + window
// digits with the oldest action most significant.
class AugmentedIndexer {
 public:
  AugmentedIndexer(int n_states, int n_actions, int delay);

  int size() const { return size_; }
  int n_states() const { return n_states_; }
  int n_actions() const { return n_actions_; }
  int delay() const { return delay_; }

  int index(int obs, const std::vector<int>& window) const;
  int obs(int x) const { return x / window_count_; }
  std::vector<int> window(int x) const;
  // Successor index after taking `a` with next observation `next_obs`.
  int shift(int x, int a, int next_obs) const;
  int index(const AugmentedState& x) const;
  AugmentedState state(int x) const;

 private:
  int n_states_, n_actions_, delay_;
  int window_count_ = 1;
  int size_ = 0;
};

// The delayed MDP (S x A^Δ, T_Δ, R_Δ, ρ_Δ) built from a tabular MDP.
struct DelayedTabular {
  AugmentedIndexer idx;
  const TabularMDP* mdp = nullptr;
  double gamma = 0.9;
  Mat beliefs;        // size x n_states
  Mat delayed_reward;  // R_Δ(x, a) = E_{s~b(x)} R(s, a)
  Mat obs_reward;      // R(s_{t-Δ}, a)
  Vec initial;         // ρ_Δ

  int size() const { return idx.size(); }
  // T_Δ(x'|x,a): nonzero only when x' = shift(x, a, s') for some s'.
  double transition(int x, int a, int x_next) const;
};

DelayedTabular make_delayed_tabular(const TabularMDP& mdp, int delay, double gamma);

struct ValueResult {
  Vec v;
  Mat q;
  double residual = 0.0;
  int iterations = 0;
};

// V^π for a stochastic policy (size x n_actions rows summing to 1) under a
// reward table over augmented states.
ValueResult evaluate_policy_iterative(const DelayedTabular& d, const Mat& policy, const Mat& reward, double tol = 1e-10,
                                      int max_iter = 1000000);
Vec evaluate_policy_exact(const DelayedTabular& d, const Mat& policy, const Mat& reward);
ValueResult value_iteration(const DelayedTabular& d, const Mat& reward, double tol = 1e-10, int max_iter = 1000000);

struct TabularTrajectory {
  std::vector<int> x;  // augmented indices x_0 ... x_L
  std::vector<int> a;  // a_0 ... a_{L-1}
};

// log ρ_Δ(x_0) + Σ_t [t log γ + log T_Δ(x_{t+1}|x_t,a_t) + log π(a_t|x_t)];
// -infinity when any factor vanishes.
double delayed_traj_logprob(const DelayedTabular& d, const Mat& policy, const TabularTrajectory& traj);

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace idrl
