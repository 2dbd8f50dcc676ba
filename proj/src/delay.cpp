#include "delay.hpp"

#include <cmath>

namespace idrl {

Vec AugmentedState::flatten() const {
  Eigen::Index n = obs.size();
  for (const auto& a : window) n += a.size();
  Vec out(n);
  out.head(obs.size()) = obs;
  Eigen::Index pos = obs.size();
  for (const auto& a : window) {
    out.segment(pos, a.size()) = a;
    pos += a.size();
  }
  return out;
}

AugmentedState augment(const Vec& obs, const std::vector<Vec>& window, int delay) {
  if (static_cast<int>(window.size()) != delay)
    throw ValidationError("action window has length " + std::to_string(window.size()) + ", delay is " +
                          std::to_string(delay));
  return {obs, window};
}

// ---------------------------------------------------------------- DelayedEnv

DelayedEnv::DelayedEnv(std::shared_ptr<const Env> base, int delay) : base_(std::move(base)), delay_(delay) {
  if (!base_) throw ValidationError("delayed env needs a base env");
  if (delay < 0) throw ValidationError("delay must be >= 0");
}

AugmentedState DelayedEnv::reset(std::uint64_t seed) {
  const Vec zero = base_->spec().action_space.zero_action();
  const Vec s0 = base_->reset(seed);
  x_ = {s0, std::vector<Vec>(delay_, zero)};
  pending_.clear();
  pending_rewards_.clear();
  true_state_ = s0;
  t_ = 0;
  done_ = terminal_ = false;
  active_ = true;
  for (int i = 0; i < delay_; ++i) {
    const StepResult r = base_->step(true_state_, zero, mix_seed(seed, 1 + i));
    pending_rewards_.push_back(r.reward);
    true_state_ = r.next_state;
    pending_.push_back(true_state_);
    if (r.terminal) {
      terminal_ = done_ = true;
      break;
    }
  }
  return x_;
}

DelayedStep DelayedEnv::step(const Vec& action, std::uint64_t noise_seed) {
  if (!active_) throw ValidationError("step called before reset");
  if (done_) throw ValidationError("step called on a finished episode");
  const Vec a = base_->conform_action(action);
  const StepResult r = base_->step(true_state_, a, noise_seed);
  true_state_ = r.next_state;
  pending_.push_back(true_state_);
  pending_rewards_.push_back(r.reward);

  DelayedStep out;
  out.reward = r.reward;
  out.revealed_reward = pending_rewards_.front();
  pending_rewards_.pop_front();
  x_.obs = pending_.front();
  pending_.pop_front();
  if (delay_ > 0) {
    x_.window.erase(x_.window.begin());
    x_.window.push_back(a);
  }
  ++t_;
  terminal_ = r.terminal;
  done_ = terminal_ || t_ >= base_->spec().horizon;
  out.x = x_;
  out.done = done_;
  out.terminal = terminal_;
  return out;
}

// ---------------------------------------------------------------- beliefs

Vec belief_exact(const TabularMDP& mdp, int obs, const std::vector<int>& window) {
  if (obs < 0 || obs >= mdp.n_states) throw ValidationError("observation index out of range");
  Eigen::RowVectorXd b = Eigen::RowVectorXd::Zero(mdp.n_states);
  b[obs] = 1.0;
  for (int a : window) {
    if (a < 0 || a >= mdp.n_actions) throw ValidationError("window action out of range");
    b = b * mdp.T(a);
  }
  return b.transpose();
}

BeliefDist belief_exact(const TabularMDP& mdp, const AugmentedState& x) {
  std::vector<int> w;
  for (const auto& a : x.window) w.push_back(argmax(a));
  return {belief_exact(mdp, argmax(x.obs), w), {}, {}};
}

BeliefDist belief_mc(const Env& env, const AugmentedState& x, int n_particles, std::uint64_t seed) {
  if (n_particles < 1) throw ValidationError("n_particles must be >= 1");
  const int n = x.window.empty() ? 1 : n_particles;
  BeliefDist b;
  b.particles.resize(n, x.obs.size());
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    Vec s = x.obs;
    for (const auto& a : x.window) s = env.step(s, a, rng()).next_state;
    b.particles.row(i) = s.transpose();
  }
  b.weights = Vec::Constant(n, 1.0 / n);
  return b;
}

Vec belief_histogram(const BeliefDist& b, int n_states) {
  if (b.exact()) return b.probs;
  Vec h = Vec::Zero(n_states);
  for (Eigen::Index i = 0; i < b.particles.rows(); ++i) h[argmax(b.particles.row(i).transpose())] += b.weights[i];
  return h;
}

// ---------------------------------------------------------------- augmented tabular

AugmentedIndexer::AugmentedIndexer(int n_states, int n_actions, int delay)
    : n_states_(n_states), n_actions_(n_actions), delay_(delay) {
  if (n_states < 1 || n_actions < 1 || delay < 0) throw ValidationError("bad augmented space dimensions");
  double total = n_states;
  for (int i = 0; i < delay; ++i) {
    window_count_ *= n_actions;
    total *= n_actions;
  }
  if (total > 1e7) throw ValidationError("augmented state space too large to enumerate");
  size_ = n_states * window_count_;
}

int AugmentedIndexer::index(int obs, const std::vector<int>& window) const {
  if (static_cast<int>(window.size()) != delay_) throw ValidationError("window length does not match delay");
  int w = 0;
  for (int a : window) w = w * n_actions_ + a;
  return obs * window_count_ + w;
}

std::vector<int> AugmentedIndexer::window(int x) const {
  std::vector<int> w(delay_);
  int rest = x % window_count_;
  for (int i = delay_ - 1; i >= 0; --i) {
    w[i] = rest % n_actions_;
    rest /= n_actions_;
  }
  return w;
}

int AugmentedIndexer::shift(int x, int a, int next_obs) const {
  if (delay_ == 0) return next_obs;
  const int w = x % window_count_;
  return next_obs * window_count_ + (w * n_actions_) % window_count_ + a;
}

int AugmentedIndexer::index(const AugmentedState& x) const {
  std::vector<int> w;
  for (const auto& a : x.window) w.push_back(argmax(a));
  return index(argmax(x.obs), w);
}

AugmentedState AugmentedIndexer::state(int x) const {
  AugmentedState out;
  out.obs = one_hot(obs(x), n_states_);
  for (int a : window(x)) out.window.push_back(one_hot(a, n_actions_));
  return out;
}

double DelayedTabular::transition(int x, int a, int x_next) const {
  const int s = idx.obs(x);
  const int s_next = idx.obs(x_next);
  if (idx.shift(x, a, s_next) != x_next) return 0.0;
  const int oldest = idx.delay() == 0 ? a : idx.window(x).front();
  return mdp->T(oldest)(s, s_next);
}

DelayedTabular make_delayed_tabular(const TabularMDP& mdp, int delay, double gamma) {
  mdp.validate();
  DelayedTabular d{AugmentedIndexer(mdp.n_states, mdp.n_actions, delay), &mdp, gamma, {}, {}, {}, {}};
  const int n = d.size();
  d.beliefs.resize(n, mdp.n_states);
  d.delayed_reward.resize(n, mdp.n_actions);
  d.obs_reward.resize(n, mdp.n_actions);
  d.initial = Vec::Zero(n);
  for (int x = 0; x < n; ++x) {
    const Vec b = belief_exact(mdp, d.idx.obs(x), d.idx.window(x));
    d.beliefs.row(x) = b.transpose();
    d.delayed_reward.row(x) = b.transpose() * mdp.reward;
    d.obs_reward.row(x) = mdp.reward.row(d.idx.obs(x));
  }
  for (int s = 0; s < mdp.n_states; ++s) d.initial[d.idx.index(s, std::vector<int>(delay, 0))] = mdp.initial_dist[s];
  return d;
}

namespace {

void check_policy(const DelayedTabular& d, const Mat& policy, const Mat& reward) {
  if (policy.rows() != d.size() || policy.cols() != d.mdp->n_actions)
    throw ValidationError("policy table must be (augmented states x actions)");
  if (reward.rows() != d.size() || reward.cols() != d.mdp->n_actions)
    throw ValidationError("reward table must be (augmented states x actions)");
}

// Q(x,a) = r(x,a) + γ Σ_{s'} T(s'|s, oldest(x,a)) V(shift(x,a,s')).
Mat backup(const DelayedTabular& d, const Mat& reward, const Vec& v) {
  const TabularMDP& m = *d.mdp;
  Mat q = reward;
  for (int x = 0; x < d.size(); ++x) {
    const int s = d.idx.obs(x);
    const int oldest_or_none = d.idx.delay() == 0 ? -1 : d.idx.window(x).front();
    for (int a = 0; a < m.n_actions; ++a) {
      const int u = oldest_or_none < 0 ? a : oldest_or_none;
      double ev = 0.0;
      for (int s2 = 0; s2 < m.n_states; ++s2) {
        const double p = m.T(u)(s, s2);
        if (p != 0.0) ev += p * v[d.idx.shift(x, a, s2)];
      }
      q(x, a) += d.gamma * ev;
    }
  }
  return q;
}

}  // namespace

ValueResult evaluate_policy_iterative(const DelayedTabular& d, const Mat& policy, const Mat& reward, double tol,
                                      int max_iter) {
  check_policy(d, policy, reward);
  ValueResult r;
  r.v = Vec::Zero(d.size());
  for (r.iterations = 1; r.iterations <= max_iter; ++r.iterations) {
    r.q = backup(d, reward, r.v);
    const Vec next = policy.cwiseProduct(r.q).rowwise().sum();
    r.residual = (next - r.v).cwiseAbs().maxCoeff();
    r.v = next;
    if (r.residual <= tol) break;
  }
  return r;
}

Vec evaluate_policy_exact(const DelayedTabular& d, const Mat& policy, const Mat& reward) {
  check_policy(d, policy, reward);
  const int n = d.size();
  if (n > 5000) throw ValidationError("augmented space too large for a dense solve");
  const TabularMDP& m = *d.mdp;
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
  Vec rhs = policy.cwiseProduct(reward).rowwise().sum();
  for (int x = 0; x < n; ++x) {
    const int s = d.idx.obs(x);
    for (int act = 0; act < m.n_actions; ++act) {
      const double pa = policy(x, act);
      if (pa == 0.0) continue;
      const int u = d.idx.delay() == 0 ? act : d.idx.window(x).front();
      for (int s2 = 0; s2 < m.n_states; ++s2) a(x, d.idx.shift(x, act, s2)) -= d.gamma * pa * m.T(u)(s, s2);
    }
  }
  return a.partialPivLu().solve(rhs);
}

ValueResult value_iteration(const DelayedTabular& d, const Mat& reward, double tol, int max_iter) {
  check_policy(d, Mat::Constant(d.size(), d.mdp->n_actions, 1.0 / d.mdp->n_actions), reward);
  ValueResult r;
  r.v = Vec::Zero(d.size());
  for (r.iterations = 1; r.iterations <= max_iter; ++r.iterations) {
    r.q = backup(d, reward, r.v);
    const Vec next = r.q.rowwise().maxCoeff();
    r.residual = (next - r.v).cwiseAbs().maxCoeff();
    r.v = next;
    if (r.residual <= tol) break;
  }
  r.q = backup(d, reward, r.v);
  return r;
}

double delayed_traj_logprob(const DelayedTabular& d, const Mat& policy, const TabularTrajectory& traj) {
  if (traj.x.size() != traj.a.size() + 1) throw ValidationError("trajectory needs one more state than actions");
  if (policy.rows() != d.size() || policy.cols() != d.mdp->n_actions)
    throw ValidationError("policy table must be (augmented states x actions)");
  for (int x : traj.x)
    if (x < 0 || x >= d.size()) throw ValidationError("augmented index out of range");
  for (int a : traj.a)
    if (a < 0 || a >= d.mdp->n_actions) throw ValidationError("action index out of range");

  double lp = std::log(d.initial[traj.x[0]]);
  const double log_gamma = std::log(d.gamma);
  for (std::size_t t = 0; t < traj.a.size(); ++t) {
    const double p = d.transition(traj.x[t], traj.a[t], traj.x[t + 1]) * policy(traj.x[t], traj.a[t]);
    lp += static_cast<double>(t) * log_gamma + std::log(p);
  }
  return std::isnan(lp) ? kNegInf : lp;
}

}  // namespace idrl
