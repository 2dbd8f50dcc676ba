#include "agent.hpp"

#include <cmath>

namespace idrl {

namespace {

std::vector<int> mlp_widths(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> w{in};
  w.insert(w.end(), hidden.begin(), hidden.end());
  w.push_back(out);
  return w;
}

ad::Var q_value(const Mlp& q, std::span<const ad::Var> params, const ad::Var& x, const ad::Var& a) {
  return q.forward(params, ad::concat_cols(x, a));
}

// rows x n_actions matrix of Q(x, e_j).
ad::Var q_all_actions(const Mlp& q, std::span<const ad::Var> params, const ad::Var& x, int n_actions) {
  ad::Tape& t = *x.tape();
  ad::Var out;
  for (int j = 0; j < n_actions; ++j) {
    Mat e = Mat::Zero(x.rows(), n_actions);
    e.col(j).setOnes();
    ad::Var qj = q_value(q, params, x, t.constant(e));
    out = j == 0 ? qj : ad::concat_cols(out, qj);
  }
  return out;
}

void polyak(std::vector<Mat>& target, const std::vector<Mat>& online, double rho) {
  for (std::size_t i = 0; i < target.size(); ++i) target[i] = rho * target[i] + (1.0 - rho) * online[i];
}

}  // namespace

AuxDelayAgent::AuxDelayAgent(const AugmentLayout& layout, const ActionSpace& space, AgentConfig cfg, Rng& rng)
    : layout_(layout), cfg_(std::move(cfg)) {
  layout_.validate();
  if (!(cfg_.gamma > 0.0 && cfg_.gamma < 1.0)) throw ValidationError("gamma must lie strictly inside (0, 1)");
  if (cfg_.alpha < 0.0) throw ValidationError("alpha must be >= 0");
  if (cfg_.polyak < 0.0 || cfg_.polyak > 1.0) throw ValidationError("polyak must lie in [0, 1]");
  if (!(cfg_.lr > 0.0)) throw ValidationError("learning rate must be positive");
  actor = Policy(layout_.x_dim(), space, cfg_.actor_hidden, rng, cfg_.squash);
  aux_actor = Policy(layout_.x_tau_dim(), space, cfg_.actor_hidden, rng, cfg_.squash);
  const int q_in = layout_.x_tau_dim() + layout_.action_dim;
  q1 = Mlp(mlp_widths(q_in, cfg_.critic_hidden, 1), rng);
  q2 = Mlp(mlp_widths(q_in, cfg_.critic_hidden, 1), rng);
  q1_target = q1;
  q2_target = q2;
}

AuxDelayAgent::TargetNoise AuxDelayAgent::draw_target_noise(Eigen::Index rows, Rng& rng) const {
  return {aux_actor.draw_noise(rows, rng), actor.draw_noise(rows, rng)};
}

Vec AuxDelayAgent::td_target(const Batch& b, const TargetNoise& noise) const {
  const Eigen::Index rows = b.x.rows();
  const int n = layout_.n;
  if (b.r.cols() != n) throw ValidationError("reward sequence length differs from n");
  ad::Tape tape(false);
  auto p1 = q1_target.bind(tape, false);
  auto p2 = q2_target.bind(tape, false);
  auto pa = aux_actor.net().bind(tape, false);
  auto pf = actor.net().bind(tape, false);
  ad::Var xtn = tape.constant(b.x_tau_n);
  ad::Var xn = tape.constant(b.x_n);
  const double alpha = cfg_.alpha;

  Mat y1, y2;
  if (discrete()) {
    const int na = layout_.action_dim;
    auto soft_value = [&](const ad::Var& logp, const ad::Var& q) {
      return ad::row_sum(ad::mul(ad::exp(logp), ad::sub(q, ad::scale(logp, alpha)))).value();
    };
    y1 = soft_value(aux_actor.log_probs_all(pa, xtn), q_all_actions(q1_target, p1, xtn, na));
    y2 = soft_value(actor.log_probs_all(pf, xn), q_all_actions(q2_target, p2, xtn, na));
  } else {
    auto s1 = aux_actor.sample(pa, xtn, noise.aux);
    y1 = ad::sub(q_value(q1_target, p1, xtn, s1.action), ad::scale(s1.logp, alpha)).value();
    auto s2 = actor.sample(pf, xn, noise.full);
    y2 = ad::sub(q_value(q2_target, p2, xtn, s2.action), ad::scale(s2.logp, alpha)).value();
  }

  Vec y(rows);
  const double gn = std::pow(cfg_.gamma, n);
  for (Eigen::Index i = 0; i < rows; ++i) {
    double ret = 0.0, g = 1.0;
    for (int k = 0; k < n; ++k, g *= cfg_.gamma) ret += g * b.r(i, k);
    y[i] = b.done[i] != 0.0 ? ret : ret + gn * std::min(y1(i, 0), y2(i, 0));
  }
  return y;
}

AuxDelayAgent::CriticLoss AuxDelayAgent::critic_loss(const Batch& b, const Vec& y) const {
  ad::Tape tape;
  auto p1 = q1.bind(tape, true);
  auto p2 = q2.bind(tape, true);
  ad::Var xt = tape.constant(b.x_tau);
  ad::Var a = tape.constant(b.a);
  ad::Var target = tape.constant(Mat(y));
  ad::Var v1 = q_value(q1, p1, xt, a);
  ad::Var v2 = q_value(q2, p2, xt, a);
  ad::Var l1 = ad::mean(ad::square(ad::sub(v1, target)));
  ad::Var l2 = ad::mean(ad::square(ad::sub(v2, target)));
  CriticLoss out;
  out.loss = l1.scalar() + l2.scalar();
  out.q_mean = 0.5 * (v1.value().mean() + v2.value().mean());
  for (const auto& g : tape.grad(l1, p1)) out.grads1.push_back(g.value());
  for (const auto& g : tape.grad(l2, p2)) out.grads2.push_back(g.value());
  return out;
}

AuxDelayAgent::ActorLoss AuxDelayAgent::actor_loss(const Batch& b, bool aux, const Mat& noise) const {
  const Policy& pol = aux ? aux_actor : actor;
  ad::Tape tape;
  auto pp = pol.net().bind(tape, true);
  auto p1 = q1.bind(tape, false);
  auto p2 = q2.bind(tape, false);
  ad::Var x = tape.constant(aux ? b.x_tau : b.x);
  ad::Var xt = tape.constant(b.x_tau);
  const double alpha = cfg_.alpha;

  ad::Var loss, entropy;
  if (discrete()) {
    const int na = layout_.action_dim;
    ad::Var logp = pol.log_probs_all(pp, x);
    ad::Var qmin = ad::minimum(q_all_actions(q1, p1, xt, na), q_all_actions(q2, p2, xt, na));
    ad::Var probs = ad::exp(logp);
    loss = ad::mean(ad::row_sum(ad::mul(probs, ad::sub(ad::scale(logp, alpha), qmin))));
    entropy = ad::neg(ad::mean(ad::row_sum(ad::mul(probs, logp))));
  } else {
    auto s = pol.sample(pp, x, noise);
    ad::Var qmin = ad::minimum(q_value(q1, p1, xt, s.action), q_value(q2, p2, xt, s.action));
    loss = ad::mean(ad::sub(ad::scale(s.logp, alpha), qmin));
    entropy = ad::neg(ad::mean(s.logp));
  }
  ActorLoss out;
  out.loss = loss.scalar();
  out.entropy = entropy.scalar();
  for (const auto& g : tape.grad(loss, pp)) out.grads.push_back(g.value());
  return out;
}

void AuxDelayAgent::critic_update(const Batch& b, const Vec& y, CriticLoss* out) {
  CriticLoss l = critic_loss(b, y);
  if (!std::isfinite(l.loss)) throw NumericalError("critic loss is not finite");
  adam_step(adam_q1, q1.params(), l.grads1, cfg_.lr);
  adam_step(adam_q2, q2.params(), l.grads2, cfg_.lr);
  if (out) *out = std::move(l);
}

bool AuxDelayAgent::actor_update(const Batch& b, double coin, const Mat& noise, ActorLoss* out) {
  const bool aux = coin > 0.5;
  ActorLoss l = actor_loss(b, aux, noise);
  if (!std::isfinite(l.loss)) throw NumericalError("actor loss is not finite");
  if (aux)
    adam_step(adam_aux, aux_actor.net().params(), l.grads, cfg_.lr);
  else
    adam_step(adam_actor, actor.net().params(), l.grads, cfg_.lr);
  if (out) *out = std::move(l);
  return aux;
}

void AuxDelayAgent::soft_update(double rho) {
  polyak(q1_target.params(), q1.params(), rho);
  polyak(q2_target.params(), q2.params(), rho);
}

AuxDelayAgent::Stats AuxDelayAgent::update(const Batch& b, Rng& rng) {
  const Vec y = td_target(b, draw_target_noise(b.x.rows(), rng));
  CriticLoss cl;
  critic_update(b, y, &cl);
  const double coin = uniform01(rng);
  const Mat noise = actor.draw_noise(b.x.rows(), rng);
  ActorLoss al;
  Stats s;
  s.aux_branch = actor_update(b, coin, noise, &al);
  soft_update(cfg_.polyak);
  s.critic_loss = cl.loss;
  s.q_mean = cl.q_mean;
  s.actor_loss = al.loss;
  s.entropy = al.entropy;
  return s;
}

Mat AuxDelayAgent::act(const Mat& x, bool deterministic, Rng& rng) const {
  return deterministic ? actor.deterministic_action(x) : actor.sample_actions(x, rng);
}

void AuxDelayAgent::save(Checkpoint& ckpt, const std::string& prefix) const {
  ckpt.add_params(prefix + ".actor", actor.net().params());
  ckpt.add_params(prefix + ".aux_actor", aux_actor.net().params());
  ckpt.add_params(prefix + ".q1", q1.params());
  ckpt.add_params(prefix + ".q2", q2.params());
  ckpt.add_params(prefix + ".q1_target", q1_target.params());
  ckpt.add_params(prefix + ".q2_target", q2_target.params());
  ckpt.add_adam(prefix + ".adam_actor", adam_actor);
  ckpt.add_adam(prefix + ".adam_aux", adam_aux);
  ckpt.add_adam(prefix + ".adam_q1", adam_q1);
  ckpt.add_adam(prefix + ".adam_q2", adam_q2);
}

void AuxDelayAgent::load(const Checkpoint& ckpt, const std::string& prefix) {
  ckpt.load_params(prefix + ".actor", actor.net().params());
  ckpt.load_params(prefix + ".aux_actor", aux_actor.net().params());
  ckpt.load_params(prefix + ".q1", q1.params());
  ckpt.load_params(prefix + ".q2", q2.params());
  ckpt.load_params(prefix + ".q1_target", q1_target.params());
  ckpt.load_params(prefix + ".q2_target", q2_target.params());
  ckpt.load_adam(prefix + ".adam_actor", adam_actor);
  ckpt.load_adam(prefix + ".adam_aux", adam_aux);
  ckpt.load_adam(prefix + ".adam_q1", adam_q1);
  ckpt.load_adam(prefix + ".adam_q2", adam_q2);
}

}  // namespace idrl
