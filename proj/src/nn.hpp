#pragma once

#include "autodiff.hpp"
#include "common.hpp"

#include <map>
#include <span>
#include <string>
#include <vector>

namespace idrl {

struct ActionSpace {
  enum class Kind { Discrete, Continuous };
  Kind kind = Kind::Continuous;
  int dim = 1;              // one-hot width for discrete spaces
  std::vector<double> low;  // continuous only
  std::vector<double> high;

  static ActionSpace discrete(int n);
  static ActionSpace box(std::vector<double> low, std::vector<double> high);
  bool is_discrete() const { return kind == Kind::Discrete; }
  // Padding action used before the first real action: zeros, or index 0.
  Vec zero_action() const;
};

// Fully connected network with ReLU on hidden layers and a linear output.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::vector<int> widths, Rng& rng);

  int input_dim() const { return widths_.front(); }
  int output_dim() const { return widths_.back(); }
  const std::vector<int>& widths() const { return widths_; }
  std::size_t parameter_count() const;

  // W0, b0, W1, b1, ... with W_i of shape (in, out) and b_i of shape (1, out).
  std::vector<Mat>& params() { return params_; }
  const std::vector<Mat>& params() const { return params_; }

  std::vector<ad::Var> bind(ad::Tape& tape, bool requires_grad) const;
  ad::Var forward(std::span<const ad::Var> params, const ad::Var& input) const;
  Mat eval(const Mat& input) const;

 private:
  std::vector<int> widths_;
  std::vector<Mat> params_;
};

struct AdamState {
  static constexpr double beta1 = 0.9;
  static constexpr double beta2 = 0.999;
  static constexpr double eps = 1e-8;
  long step = 0;
  std::vector<Mat> m;
  std::vector<Mat> v;
};

void adam_step(AdamState& state, std::vector<Mat>& params, std::span<const Mat> grads, double lr);

// Policy over a (flattened) state vector: squashed/unsquashed diagonal
// Gaussian for box actions, categorical over one-hot actions otherwise.
class Policy {
 public:
  static constexpr double kLogStdMin = -5.0;
  static constexpr double kLogStdMax = 2.0;

  Policy() = default;
  Policy(int input_dim, ActionSpace space, std::vector<int> hidden, Rng& rng, bool squash = true);

  const ActionSpace& space() const { return space_; }
  int input_dim() const { return net_.input_dim(); }
  bool squashed() const { return squash_; }
  Mlp& net() { return net_; }
  const Mlp& net() const { return net_; }

  // Number of standard-normal (continuous) or uniform (discrete) draws per row.
  int noise_dim() const { return space_.is_discrete() ? 1 : space_.dim; }
  Mat draw_noise(Eigen::Index rows, Rng& rng) const;

  struct Sample {
    ad::Var action;  // rows x action dim (one-hot rows when discrete)
    ad::Var logp;    // rows x 1
  };
  // Reparameterized sample. For discrete spaces the action is a constant
  // one-hot drawn by inverse CDF from the uniform noise.
  Sample sample(std::span<const ad::Var> params, const ad::Var& x, const Mat& noise) const;
  ad::Var log_prob(std::span<const ad::Var> params, const ad::Var& x, const Mat& actions) const;
  // Discrete only: rows x n log-probabilities of every action.
  ad::Var log_probs_all(std::span<const ad::Var> params, const ad::Var& x) const;

  // Tape-free conveniences.
  Mat log_prob(const Mat& x, const Mat& actions) const;
  Mat deterministic_action(const Mat& x) const;
  Mat sample_actions(const Mat& x, Rng& rng) const;

 private:
  Mlp net_;
  ActionSpace space_;
  bool squash_ = true;
};

// Named f64 matrices in the IDRLCKPT container.
struct Checkpoint {
  std::vector<std::pair<std::string, Mat>> sections;

  void add(const std::string& name, const Mat& m) { sections.emplace_back(name, m); }
  void add_scalar(const std::string& name, double v) { sections.emplace_back(name, Mat::Constant(1, 1, v)); }
  void add_params(const std::string& prefix, const std::vector<Mat>& params);
  void add_adam(const std::string& prefix, const AdamState& state);

  const Mat& get(const std::string& name) const;
  bool has(const std::string& name) const;
  double get_scalar(const std::string& name) const { return get(name)(0, 0); }
  void load_params(const std::string& prefix, std::vector<Mat>& params) const;
  void load_adam(const std::string& prefix, AdamState& state) const;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(const std::string& bytes);
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

// Gradient of the input-gradient penalty (||d net / d x|| - 1)^2 at a single
// point, with the one-sided ||g||^2 form when the input gradient vanishes.
struct PenaltyResult {
  double penalty = 0.0;
  std::vector<Mat> param_grads;
};
PenaltyResult grad_input_penalty(const Mlp& net, const Vec& point);

// Per-row penalty on a tape; `inputs` must be a leaf requiring grad that
// `outputs` (n x 1) was computed from. Returns n x 1.
ad::Var input_gradient_penalty(ad::Tape& tape, const ad::Var& outputs, const ad::Var& inputs);

}  // namespace idrl
