#include "discriminator.hpp"

#include <cmath>

namespace idrl {

Discriminator::Discriminator(int input_dim, DiscConfig cfg, Rng& rng) : cfg_(std::move(cfg)) {
  if (cfg_.lambda_gp < 0 || cfg_.lambda_ent < 0) throw ValidationError("discriminator penalties must be >= 0");
  if (cfg_.delta < 0) throw ValidationError("delta must be >= 0");
  std::vector<int> widths{input_dim};
  widths.insert(widths.end(), cfg_.hidden.begin(), cfg_.hidden.end());
  widths.push_back(1);
  net_ = Mlp(std::move(widths), rng);
}

Vec Discriminator::reward_net(const Mat& xa) const { return net_.eval(xa).col(0); }

Vec Discriminator::logits(const Mat& xa, const Vec& logpi) const {
  if (logpi.size() != xa.rows()) throw ValidationError("one log-density per row required");
  return reward_net(xa) - logpi.cwiseMax(kMinLogDensity);
}

Vec Discriminator::d_value(const Mat& xa, const Vec& logpi) const {
  return logits(xa, logpi).unaryExpr([](double z) { return ad::sigmoid(z); });
}

Vec Discriminator::reward(const Mat& xa, const Vec& logpi) const {
  const Vec z = logits(xa, logpi);
  const double delta = cfg_.delta;
  return z.unaryExpr([delta](double v) {
    if (delta == 0.0) return ad::softplus(v) - ad::softplus(-v);  // log σ(z) - log σ(-z)
    return std::log(ad::sigmoid(v) + delta) - std::log(ad::sigmoid(-v) + delta);
  });
}

Discriminator::Loss Discriminator::loss(const Mat& expert_xa, const Vec& expert_logpi, const Mat& gen_xa,
                                        const Vec& gen_logpi, const Vec& mix) const {
  const Eigen::Index ne = expert_xa.rows(), ng = gen_xa.rows();
  if (ne == 0 || ng == 0) throw ValidationError("discriminator batches must be non-empty");
  if (expert_xa.cols() != net_.input_dim() || gen_xa.cols() != net_.input_dim())
    throw ValidationError("discriminator input width mismatch");
  if (expert_logpi.size() != ne || gen_logpi.size() != ng || mix.size() != ng)
    throw ValidationError("discriminator batch shape mismatch");

  ad::Tape tape;
  auto params = net_.bind(tape, true);
  auto logit = [&](const Mat& xa, const Vec& lp) {
    Mat l = lp.cwiseMax(kMinLogDensity);
    return ad::sub(net_.forward(params, tape.constant(xa)), tape.constant(l));
  };
  ad::Var ze = logit(expert_xa, expert_logpi);
  ad::Var zg = logit(gen_xa, gen_logpi);
  // -log D = softplus(-z), -log(1 - D) = softplus(z)
  ad::Var bce = ad::add(ad::mean(ad::softplus(ad::neg(ze))), ad::mean(ad::softplus(zg)));

  auto entropy_sum = [](const ad::Var& z) {
    ad::Var d = ad::sigmoid(z);
    ad::Var h = ad::add(ad::mul(d, ad::softplus(ad::neg(z))),
                        ad::mul(ad::add_scalar(ad::neg(d), 1.0), ad::softplus(z)));
    return ad::sum(h);
  };
  ad::Var entropy = ad::scale(ad::add(entropy_sum(ze), entropy_sum(zg)), 1.0 / static_cast<double>(ne + ng));

  Mat interp(ng, gen_xa.cols());
  for (Eigen::Index i = 0; i < ng; ++i) interp.row(i) = mix[i] * expert_xa.row(i % ne) + (1.0 - mix[i]) * gen_xa.row(i);
  ad::Var xi = tape.leaf(interp, true);
  ad::Var gp = ad::mean(input_gradient_penalty(tape, net_.forward(params, xi), xi));

  ad::Var total = ad::add(ad::add(bce, ad::scale(gp, cfg_.lambda_gp)), ad::scale(entropy, -cfg_.lambda_ent));
  Loss out;
  out.total = total.scalar();
  out.bce = bce.scalar();
  out.penalty = gp.scalar();
  out.entropy = entropy.scalar();
  for (const auto& g : tape.grad(total, params)) out.grads.push_back(g.value());
  return out;
}

Discriminator::Loss Discriminator::update(const Mat& expert_xa, const Vec& expert_logpi, const Mat& gen_xa,
                                          const Vec& gen_logpi, Rng& rng) {
  Vec mix(gen_xa.rows());
  for (auto& m : mix) m = uniform01(rng);
  Loss l = loss(expert_xa, expert_logpi, gen_xa, gen_logpi, mix);
  if (!std::isfinite(l.total)) throw NumericalError("discriminator loss is not finite");
  adam_step(adam_, net_.params(), l.grads, cfg_.lr);
  return l;
}

}  // namespace idrl
