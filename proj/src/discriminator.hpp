#pragma once

#include "nn.hpp"

#include <vector>

namespace idrl {

struct DiscConfig {
  std::vector<int> hidden{64, 64};
  double lr = 3e-4;
  double lambda_gp = 10.0;
  double lambda_ent = 1e-3;
  double delta = 1e-7;
};

// D(x,a) = exp(R_θ) / (exp(R_θ) + π(a|x)), evaluated as σ(R_θ - log π).
// Inputs are rows of (flattened x, a); log π is supplied by the caller and
// treated as a constant.
class Discriminator {
 public:
  static constexpr double kMinLogDensity = -690.7755278982137;  // log(1e-300)

  Discriminator() = default;
  Discriminator(int input_dim, DiscConfig cfg, Rng& rng);

  const DiscConfig& config() const { return cfg_; }
  Mlp& net() { return net_; }
  const Mlp& net() const { return net_; }
  AdamState& adam() { return adam_; }
  const AdamState& adam() const { return adam_; }

  Vec reward_net(const Mat& xa) const;  // R_θ
  Vec logits(const Mat& xa, const Vec& logpi) const;
  Vec d_value(const Mat& xa, const Vec& logpi) const;
  // log(D + δ) - log(1 - D + δ)
  Vec reward(const Mat& xa, const Vec& logpi) const;

  struct Loss {
    double total = 0.0;
    double bce = 0.0;
    double penalty = 0.0;
    double entropy = 0.0;  // mean binary entropy of D over both batches
    std::vector<Mat> grads;
  };
  // `mix` (rows of the generator batch) holds the interpolation weight of
  // the paired expert row; expert row i pairs with generator row i.
  Loss loss(const Mat& expert_xa, const Vec& expert_logpi, const Mat& gen_xa, const Vec& gen_logpi,
            const Vec& mix) const;
  Loss update(const Mat& expert_xa, const Vec& expert_logpi, const Mat& gen_xa, const Vec& gen_logpi, Rng& rng);

 private:
  Mlp net_;
  DiscConfig cfg_;
  AdamState adam_;
};

}  // namespace idrl
