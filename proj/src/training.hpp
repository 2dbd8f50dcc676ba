#pragma once

#include "agent.hpp"
#include "config.hpp"
#include "data.hpp"
#include "discriminator.hpp"

#include <functional>
#include <string>
#include <vector>

namespace idrl {

struct MetricsRow {
  long step = 0;
  double eval_return_mean = 0.0;
  double eval_return_std = 0.0;
  double disc_loss = 0.0;
  double critic_loss = 0.0;
  double actor_loss = 0.0;
  double reward_mean = 0.0;
};

inline constexpr const char* kMetricsHeader =
    "step,eval_return_mean,eval_return_std,disc_loss,critic_loss,actor_loss,reward_mean";

std::string metrics_csv(const std::vector<MetricsRow>& rows);
std::string metrics_csv_row(const MetricsRow& r);
std::vector<MetricsRow> parse_metrics_csv(const std::string& text);

struct EvalResult {
  double mean = 0.0;
  double std = 0.0;  // population std over episodes
  std::vector<double> returns;
};

using DelayedPolicyFn = std::function<Vec(const AugmentedState&)>;

// Undiscounted true return of `policy` in the delayed env.
EvalResult evaluate(std::shared_ptr<const Env> env, int delay, const DelayedPolicyFn& policy, int episodes,
                    std::uint64_t seed);

// Runs a delayed env and turns each step into replay records as soon as
// their n-step successors exist (using the hindsight-revealed true states).
class Collector {
 public:
  Collector(std::shared_ptr<const Env> env, const AugmentLayout& layout, std::uint64_t seed);

  // Current augmented state, starting an episode when none is active.
  const AugmentedState& current();
  std::vector<TransitionRecord> step(const Vec& action);

  long episodes() const { return episodes_; }
  double last_return() const { return last_return_; }
  // Restarts from episode `episodes` (resume).
  void restart(long episodes);

 private:
  void begin();

  std::shared_ptr<const Env> env_;
  AugmentLayout layout_;
  std::uint64_t seed_;
  DelayedEnv denv_;
  DelayedTrajectory traj_;
  Rng noise_;
  bool active_ = false;
  long episodes_ = 0;
  double return_ = 0.0;
  double last_return_ = 0.0;
};

Vec random_action(const ActionSpace& space, Rng& rng);

struct TrainOptions {
  std::string out_dir;  // empty: keep everything in memory
  bool resume = false;
  std::function<void(const MetricsRow&)> on_eval;
  std::shared_ptr<const Env> env;  // replaces make_env(cfg.env_id, cfg.env_params) when set
};

struct IdrlResult {
  AuxDelayAgent agent;
  Discriminator disc;
  std::vector<MetricsRow> metrics;
};

// IDRL training loop. The environment's true reward is read only by the evaluator.
IdrlResult train_idrl(const RunConfig& cfg, const ExpertDataset& expert, const TrainOptions& opt = {});

struct ExpertResult {
  AuxDelayAgent agent;
  ExpertDataset dataset;
  std::vector<double> returns;  // true return of every recorded trajectory
  std::vector<MetricsRow> metrics;
};

// Trains the auxiliary-delay agent on true rewards for cfg.expert.total_steps
// and records cfg.expert.trajectories episodes in the delayed format.
ExpertResult train_expert(const RunConfig& cfg, const TrainOptions& opt = {});

// Auxiliary-delay actor-critic on true rewards (expert training and the delay-free sanity run).
struct SacResult {
  AuxDelayAgent agent;
  std::vector<MetricsRow> metrics;
};
SacResult train_true_reward(const RunConfig& cfg, long total_steps, const TrainOptions& opt = {});

ExpertDataset rollout_dataset(const AuxDelayAgent& agent, std::shared_ptr<const Env> env, int delay, int trajectories,
                              bool deterministic, std::uint64_t seed, std::vector<double>* returns = nullptr);

enum class BcMode { DelayedObs, Augmented };

struct BcResult {
  Policy policy;
  BcMode mode = BcMode::Augmented;
  std::vector<MetricsRow> metrics;
  EvalResult final_eval;
};

BcResult train_bc(const RunConfig& cfg, const ExpertDataset& expert, BcMode mode, const TrainOptions& opt = {});
// Policy saved by train_bc under <out_dir>/checkpoints/bc.ckpt.
BcResult load_bc(const RunConfig& cfg, const Checkpoint& ckpt);
// Deterministic action of a BC policy for an augmented state.
Vec bc_act(const Policy& policy, BcMode mode, const AugmentedState& x);

// Seed of the evaluation episodes used by every trainer for this config.
std::uint64_t eval_seed(const RunConfig& cfg);

// Rebuilds the agent described by `cfg` from a checkpoint written by a run.
AuxDelayAgent load_agent(const RunConfig& cfg, const std::string& checkpoint_path);

}  // namespace idrl
