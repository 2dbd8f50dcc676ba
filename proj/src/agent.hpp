#pragma once

#include "data.hpp"
#include "nn.hpp"

#include <vector>

namespace idrl {

struct AgentConfig {
  std::vector<int> actor_hidden{256, 256};
  std::vector<int> critic_hidden{256, 256};
  double lr = 3e-4;
  double alpha = 0.2;
  double gamma = 0.99;
  double polyak = 0.995;
  bool squash = true;
};

// Auxiliary-delay soft actor-critic: critics and an auxiliary actor live on
// x^τ (delay Δ^τ), the acting policy π_ψ on x (delay Δ), and n-step returns
// bridge the gap. Discrete action spaces use exact expectations over actions
// in place of sampled â.
class AuxDelayAgent {
 public:
  AuxDelayAgent() = default;
  AuxDelayAgent(const AugmentLayout& layout, const ActionSpace& space, AgentConfig cfg, Rng& rng);

  const AgentConfig& config() const { return cfg_; }
  const AugmentLayout& layout() const { return layout_; }
  bool discrete() const { return actor.space().is_discrete(); }

  Policy actor;      // π_ψ
  Policy aux_actor;  // π^τ_φ
  Mlp q1, q2, q1_target, q2_target;
  AdamState adam_actor, adam_aux, adam_q1, adam_q2;

  // Noise for sampled actions: rows x policy noise_dim. Ignored for discrete.
  struct TargetNoise {
    Mat aux;
    Mat full;
  };
  TargetNoise draw_target_noise(Eigen::Index rows, Rng& rng) const;

  Vec td_target(const Batch& b, const TargetNoise& noise) const;

  struct CriticLoss {
    double loss = 0.0;
    double q_mean = 0.0;
    std::vector<Mat> grads1, grads2;
  };
  CriticLoss critic_loss(const Batch& b, const Vec& y) const;

  struct ActorLoss {
    double loss = 0.0;
    double entropy = 0.0;  // -mean log π
    std::vector<Mat> grads;
  };
  // E[α log π(â|·) - min_i Q_i(x^τ, â)] for the auxiliary (true) or full actor.
  ActorLoss actor_loss(const Batch& b, bool aux, const Mat& noise) const;

  void critic_update(const Batch& b, const Vec& y, CriticLoss* out = nullptr);
  // coin > 0.5 updates the auxiliary actor, otherwise π_ψ. Returns true for
  // the auxiliary branch.
  bool actor_update(const Batch& b, double coin, const Mat& noise, ActorLoss* out = nullptr);
  void soft_update(double rho);

  struct Stats {
    double critic_loss = 0.0;
    double actor_loss = 0.0;
    double q_mean = 0.0;
    double entropy = 0.0;
    bool aux_branch = false;
  };
  // One update iteration with all randomness drawn from rng.
  Stats update(const Batch& b, Rng& rng);

  Mat act(const Mat& x, bool deterministic, Rng& rng) const;

  void save(Checkpoint& ckpt, const std::string& prefix) const;
  void load(const Checkpoint& ckpt, const std::string& prefix);

 private:
  AugmentLayout layout_;
  AgentConfig cfg_;
};

}  // namespace idrl
