#pragma once

#include "delay.hpp"
#include "nn.hpp"

#include <optional>
#include <string>
#include <vector>

namespace idrl {

// Shapes shared by the collector, the expert loader and the agent.
struct AugmentLayout {
  int state_dim = 1;
  int action_dim = 1;
  int delay = 0;      // Δ
  int delay_tau = 0;  // Δ^τ
  int n = 1;
  Vec zero_action;

  int x_dim() const { return state_dim + delay * action_dim; }
  int x_tau_dim() const { return state_dim + delay_tau * action_dim; }
  int disc_dim() const { return x_dim() + action_dim; }
  // Inverse of AugmentedState::flatten for a state of the given delay.
  AugmentedState split(const Vec& flat, int delay) const;
  void validate() const;
};

AugmentLayout make_layout(const EnvSpec& spec, int delay, int delay_tau, int n);

struct TransitionRecord {
  Vec x, x_tau, a;
  Vec r_seq;  // n slots; filled from true_rewards or the learned reward
  Vec x_n, x_tau_n;
  bool done = false;
  Mat step_inputs;   // n x disc_dim: (x_{t+i}, a_{t+i}) for each reward slot
  Vec true_rewards;  // n slots, zero beyond termination
  int n_valid = 0;   // slots before the episode ended
};

// One episode on the agent's timeline: obs[k] = s_{k-Δ}. Collectors may append
// the hindsight-revealed states so obs can run past actions.size().
struct DelayedTrajectory {
  std::vector<Vec> obs;
  std::vector<Vec> actions;
  std::vector<double> rewards;  // R(s_t, a_t) when known
  bool complete = false;
  bool terminal = false;

  int length() const { return static_cast<int>(actions.size()); }
};

// Record starting at time t, or nothing when the data it needs is not yet
// available, or (for complete episodes) when it crosses a time-limit end.
std::optional<TransitionRecord> try_build_record(const DelayedTrajectory& traj, const AugmentLayout& layout, int t);
std::vector<TransitionRecord> build_records(const DelayedTrajectory& traj, const AugmentLayout& layout);

class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(TransitionRecord r);
  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::uint64_t inserted() const { return inserted_; }
  // Live record i in insertion order (0 = oldest).
  const TransitionRecord& at(std::size_t i) const;

  std::vector<std::size_t> sample_indices(std::size_t batch, Rng& rng) const;
  std::vector<std::size_t> sample_indices(std::size_t batch, std::uint64_t seed) const;

  void save(Checkpoint& ckpt, const std::string& prefix) const;
  void load(const Checkpoint& ckpt, const std::string& prefix);

 private:
  std::size_t capacity_;
  std::vector<TransitionRecord> data_;
  std::size_t head_ = 0;  // next slot to overwrite once full
  std::uint64_t inserted_ = 0;
};

struct Batch {
  Mat x, x_tau, a, r, x_n, x_tau_n;
  Vec done;
  Mat step_inputs;  // (B*n) x disc_dim, record-major
  Mat step_mask;    // B x n, 1 for valid slots
};

Batch gather(const ReplayBuffer& buf, const std::vector<std::size_t>& idx);
Batch gather(const std::vector<TransitionRecord>& records, const std::vector<std::size_t>& idx);

// -------------------------------------------------------------- expert data

inline constexpr std::uint32_t kExpertVersion = 1;

struct ExpertHeader {
  std::uint32_t version = kExpertVersion;
  std::string env_id;
  std::uint32_t delay = 0;
  std::uint32_t state_dim = 0;
  std::uint32_t action_dim = 0;
};

// On disk a trajectory is a u32 frame count followed by o_0, a_0, o_1, a_1, ...
// An odd count ends on the final observation (time-limit end); an even count
// marks a terminal episode.
struct ExpertDataset {
  ExpertHeader header;
  std::vector<DelayedTrajectory> trajectories;

  void validate() const;
};

std::string encode_expert(const ExpertDataset& ds);
ExpertDataset decode_expert(const std::string& bytes);
void save_expert(const std::string& path, const ExpertDataset& ds);
ExpertDataset load_expert(const std::string& path);

// Every expert (x_t, a_t) pair, flattened; rows of xa are (x_t, a_t).
struct StateActionPairs {
  Mat x;
  Mat a;
  Mat xa;
};
StateActionPairs expert_pairs(const ExpertDataset& ds, const AugmentLayout& layout);

// Augmentation of every expert trajectory.
std::vector<TransitionRecord> augment_expert(const ExpertDataset& ds, const AugmentLayout& layout);

// CSV: trajectory,length,return plus mean/std/min/max rows.
std::string expert_summary_csv(const ExpertDataset& ds, const std::vector<double>& returns);

}  // namespace idrl
