#include "theory.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

namespace idrl {

BoundCertificate make_certificate(std::string kind, double lhs, double rhs, int delay, double lt, double lr,
                                  double gamma, double r_max) {
  BoundCertificate c;
  c.kind = std::move(kind);
  c.lhs = lhs;
  c.rhs = rhs;
  c.slack = rhs - lhs;
  c.delay = delay;
  c.lt = lt;
  c.lr = lr;
  c.gamma = gamma;
  c.r_max = r_max;
  c.pass = c.slack >= -kCertificateTolerance;
  return c;
}

double w1_discrete(const Vec& p, const Vec& q, const Vec& coords) {
  if (p.size() != q.size() || p.size() != coords.size() || p.size() == 0)
    throw ValidationError("w1_discrete: distributions and coordinates must share one non-empty support");
  for (const Vec* d : {&p, &q})
    if ((d->array() < -1e-12).any() || std::abs(d->sum() - 1.0) > 1e-9)
      throw ValidationError("w1_discrete: input is not a normalized distribution");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(p.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return coords[a] < coords[b]; });
  double cdf = 0.0, w = 0.0;
  for (std::size_t i = 0; i + 1 < order.size(); ++i) {
    cdf += p[order[i]] - q[order[i]];
    w += std::abs(cdf) * (coords[order[i + 1]] - coords[order[i]]);
  }
  return w;
}

std::vector<BoundCertificate> certify_belief_bound(const TabularMDP& mdp, int delay_max, std::optional<double> lt) {
  if (delay_max < 1) throw ValidationError("delay_max must be >= 1");
  const LipschitzConstants lc = tabular_lipschitz(mdp);
  const double l_t = lt.value_or(lc.transition);
  std::vector<BoundCertificate> out;
  for (int d = 1; d <= delay_max; ++d) {
    const AugmentedIndexer idx(mdp.n_states, mdp.n_actions, d);
    for (int x = 0; x < idx.size(); ++x) {
      const int s = idx.obs(x);
      const Vec b = belief_exact(mdp, s, idx.window(x));
      const double lhs = w1_discrete(b, one_hot(s, mdp.n_states), mdp.embedding);
      BoundCertificate c = make_certificate("belief", lhs, d * l_t, d, l_t, lc.reward, 0.0, mdp.r_max());
      c.x = x;
      out.push_back(c);
    }
  }
  return out;
}

std::vector<double> belief_telescoping_gaps(const TabularMDP& mdp, int obs, const std::vector<int>& window) {
  const Vec dirac = one_hot(obs, mdp.n_states);
  std::vector<int> prefix;
  Vec prev = dirac;
  std::vector<double> gaps;
  for (int a : window) {
    prefix.push_back(a);
    const Vec cur = belief_exact(mdp, obs, prefix);
    gaps.push_back(w1_discrete(prev, cur, mdp.embedding) + w1_discrete(prev, dirac, mdp.embedding) -
                   w1_discrete(cur, dirac, mdp.embedding));
    prev = cur;
  }
  return gaps;
}

std::vector<BoundCertificate> certify_reward_bound(const TabularMDP& mdp, int delay, const std::optional<Mat>& reward,
                                                   std::optional<double> lt) {
  if (delay < 0) throw ValidationError("delay must be >= 0");
  TabularMDP m = mdp;
  if (reward) {
    if (reward->rows() != mdp.n_states || reward->cols() != mdp.n_actions)
      throw ValidationError("reward table must be (states x actions)");
    m.reward = *reward;
  }
  const LipschitzConstants lc = tabular_lipschitz(m);
  const double l_t = lt.value_or(lc.transition);
  const AugmentedIndexer idx(m.n_states, m.n_actions, delay);
  std::vector<BoundCertificate> out;
  for (int x = 0; x < idx.size(); ++x) {
    const int s = idx.obs(x);
    const Vec b = belief_exact(m, s, idx.window(x));
    for (int a = 0; a < m.n_actions; ++a) {
      const double lhs = std::abs(b.dot(m.reward.col(a)) - m.reward(s, a));
      BoundCertificate c = make_certificate("reward", lhs, delay * lc.reward * l_t, delay, l_t, lc.reward, 0.0,
                                            m.r_max());
      c.x = x;
      c.action = a;
      out.push_back(c);
    }
  }
  return out;
}

namespace {

double declared_lt(const Env& env) {
  const LipschitzConstants lc = env.lipschitz_constants();
  if (!lc.available) throw ValidationError("environment '" + env.spec().id + "' has no declared Lipschitz constants");
  return lc.transition;
}

}  // namespace

std::vector<BoundCertificate> certify_reward_bound_mc(const Env& env, const RewardFn& reward, double lr,
                                                      const std::vector<std::pair<AugmentedState, Vec>>& points,
                                                      int n_particles, std::uint64_t seed) {
  const double l_t = declared_lt(env);
  std::vector<BoundCertificate> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& [x, a] = points[i];
    const BeliefDist b = belief_mc(env, x, n_particles, mix_seed(seed, i));
    double mean = 0.0;
    for (Eigen::Index k = 0; k < b.particles.rows(); ++k) mean += b.weights[k] * reward(b.particles.row(k).transpose(), a);
    const double lhs = std::abs(mean - reward(x.obs, a));
    out.push_back(make_certificate("reward_mc", lhs, x.delay() * lr * l_t, x.delay(), l_t, lr, env.spec().gamma,
                                   env.spec().r_max));
  }
  return out;
}

std::vector<BoundCertificate> certify_belief_bound_mc(const Env& env, const std::vector<AugmentedState>& points,
                                                      int n_particles, std::uint64_t seed) {
  const LipschitzConstants lc = env.lipschitz_constants();
  const double l_t = declared_lt(env);
  std::vector<BoundCertificate> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& x = points[i];
    const BeliefDist b = belief_mc(env, x, n_particles, mix_seed(seed, i));
    double lhs = 0.0;
    for (Eigen::Index k = 0; k < b.particles.rows(); ++k)
      lhs += b.weights[k] * (b.particles.row(k).transpose() - x.obs).norm();
    out.push_back(make_certificate("belief_mc", lhs, x.delay() * l_t, x.delay(), l_t, lc.reward, env.spec().gamma,
                                   env.spec().r_max));
  }
  return out;
}

double estimate_lipschitz(const Mlp& net, const Mat& points, int col_start, int col_count) {
  if (net.output_dim() != 1) throw ValidationError("estimate_lipschitz requires a scalar-output network");
  if (col_start < 0 || col_count < 1 || col_start + col_count > net.input_dim())
    throw ValidationError("estimate_lipschitz: column range out of bounds");
  ad::Tape tape;
  auto params = net.bind(tape, false);
  ad::Var x = tape.leaf(points, true);
  const std::array<ad::Var, 1> wrt{x};
  const Mat g = tape.grad(ad::sum(net.forward(params, x)), wrt)[0].value();
  return 1.1 * g.middleCols(col_start, col_count).rowwise().norm().maxCoeff();
}

BoundCertificate certify_perf_bound(const TabularMDP& mdp, const Mat& policy_aug, const Mat& policy_obs, int delay,
                                    double gamma, std::optional<double> lt) {
  const DelayedTabular d = make_delayed_tabular(mdp, delay, gamma);
  if (policy_obs.rows() != mdp.n_states || policy_obs.cols() != mdp.n_actions)
    throw ValidationError("observation policy must be (states x actions)");
  Mat lifted(d.size(), mdp.n_actions);
  for (int x = 0; x < d.size(); ++x) lifted.row(x) = policy_obs.row(d.idx.obs(x));
  Vec v_aug, v_obs;
  if (d.size() <= 2000) {
    v_aug = evaluate_policy_exact(d, policy_aug, d.delayed_reward);
    v_obs = evaluate_policy_exact(d, lifted, d.obs_reward);
  } else {
    v_aug = evaluate_policy_iterative(d, policy_aug, d.delayed_reward).v;
    v_obs = evaluate_policy_iterative(d, lifted, d.obs_reward).v;
  }
  const LipschitzConstants lc = tabular_lipschitz(mdp);
  const double l_t = lt.value_or(lc.transition);
  const double r_max = mdp.r_max();
  const double lhs = (v_aug - v_obs).cwiseAbs().maxCoeff();
  return make_certificate("performance", lhs, (r_max + delay * lc.reward * l_t) / (1.0 - gamma), delay, l_t, lc.reward,
                          gamma, r_max);
}

namespace {

Vec dirichlet_row(int n, Rng& rng, bool sparse) {
  Vec w(n);
  for (auto& v : w) v = -std::log(1.0 - uniform01(rng));
  if (sparse && n > 1) {
    const int keep = 1 + static_cast<int>(uniform01(rng) * n);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    for (int i = keep; i < n; ++i) w[order[i]] = 0.0;
  }
  return w / w.sum();
}

}  // namespace

TabularMDP random_mdp(int n_states, int n_actions, Rng& rng) {
  TabularMDP m;
  m.n_states = n_states;
  m.n_actions = n_actions;
  for (int a = 0; a < n_actions; ++a) {
    Mat t(n_states, n_states);
    for (int s = 0; s < n_states; ++s) t.row(s) = dirichlet_row(n_states, rng, true).transpose();
    m.transition.push_back(std::move(t));
  }
  m.reward.resize(n_states, n_actions);
  for (Eigen::Index i = 0; i < m.reward.size(); ++i) m.reward.data()[i] = uniform01(rng);
  m.initial_dist = dirichlet_row(n_states, rng, false);
  m.embedding = Vec::LinSpaced(n_states, 0.0, n_states - 1.0);
  m.validate();
  return m;
}

Mat random_policy(int rows, int n_actions, Rng& rng) {
  Mat p(rows, n_actions);
  for (int r = 0; r < rows; ++r) p.row(r) = dirichlet_row(n_actions, rng, false).transpose();
  return p;
}

std::vector<BoundCertificate> run_certify_suite(const CertifySuiteConfig& cfg) {
  if (cfg.n_mdps < 1 || cfg.max_states < 2 || cfg.max_actions < 2 || cfg.max_delay < 1)
    throw ValidationError("certify suite needs >= 1 MDP, >= 2 states, >= 2 actions and max_delay >= 1");
  if (!(cfg.gamma > 0.0 && cfg.gamma < 1.0)) throw ValidationError("gamma must lie strictly inside (0, 1)");
  Rng rng(mix_seed(cfg.seed, 0xce27));
  std::vector<BoundCertificate> out;
  auto tag = [&](std::vector<BoundCertificate> certs, int i) {
    for (auto& c : certs) {
      c.instance = i;
      if (c.gamma == 0.0) c.gamma = cfg.gamma;
      out.push_back(std::move(c));
    }
  };
  for (int i = 0; i < cfg.n_mdps; ++i) {
    const int ns = 2 + static_cast<int>(uniform01(rng) * (cfg.max_states - 1));
    const int na = 2 + static_cast<int>(uniform01(rng) * (cfg.max_actions - 1));
    const TabularMDP mdp = random_mdp(ns, na, rng);
    const double lt = cfg.lt_scale * tabular_lipschitz(mdp).transition;
    tag(certify_belief_bound(mdp, cfg.max_delay, lt), i);
    for (int d = 1; d <= cfg.max_delay; ++d) {
      tag(certify_reward_bound(mdp, d, std::nullopt, lt), i);
      const AugmentedIndexer idx(ns, na, d);
      const Mat pa = random_policy(idx.size(), na, rng);
      const Mat po = random_policy(ns, na, rng);
      tag({certify_perf_bound(mdp, pa, po, d, cfg.gamma, lt)}, i);
    }
  }
  return out;
}

CertifySummary summarize(const std::vector<BoundCertificate>& certs) {
  CertifySummary s;
  std::map<std::string, std::pair<int, int>> kinds;
  for (const auto& c : certs) {
    ++s.total;
    auto& k = kinds[c.kind];
    ++k.first;
    if (!c.pass) {
      ++s.failures;
      ++k.second;
    }
    s.min_slack = s.total == 1 ? c.slack : std::min(s.min_slack, c.slack);
  }
  s.by_kind.assign(kinds.begin(), kinds.end());
  return s;
}

std::string certificates_csv(const std::vector<BoundCertificate>& certs) {
  std::ostringstream os;
  os.precision(17);
  os << "kind,instance,delay,x,action,lhs,rhs,slack,L_T,L_R,gamma,R_max,pass\n";
  for (const auto& c : certs)
    os << c.kind << ',' << c.instance << ',' << c.delay << ',' << c.x << ',' << c.action << ',' << c.lhs << ','
       << c.rhs << ',' << c.slack << ',' << c.lt << ',' << c.lr << ',' << c.gamma << ',' << c.r_max << ','
       << (c.pass ? 1 : 0) << '\n';
  return os.str();
}

std::string summary_json(const CertifySummary& s) {
  nlohmann::ordered_json j;
  j["total"] = s.total;
  j["failures"] = s.failures;
  j["min_slack"] = s.min_slack;
  j["tolerance"] = kCertificateTolerance;
  for (const auto& [kind, counts] : s.by_kind) j["by_kind"][kind] = {{"total", counts.first}, {"failures", counts.second}};
  return j.dump(2) + "\n";
}

}  // namespace idrl
