#include "env.hpp"

#include <algorithm>
#include <cmath>

namespace idrl {

void EnvSpec::validate() const {
  if (state_dim < 1) throw ValidationError("state_dim must be positive");
  if (action_space.dim < 1) throw ValidationError("action_dim must be positive");
  if (horizon < 1) throw ValidationError("horizon must be >= 1");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ValidationError("gamma must lie strictly inside (0, 1)");
  if (!(r_max > 0.0)) throw ValidationError("r_max must be positive");
}

void TabularMDP::validate() const {
  if (n_states < 1 || n_actions < 1) throw ValidationError("tabular MDP needs states and actions");
  if (static_cast<int>(transition.size()) != n_actions) throw ValidationError("one transition matrix per action required");
  for (int a = 0; a < n_actions; ++a) {
    const Mat& t = transition[a];
    if (t.rows() != n_states || t.cols() != n_states) throw ValidationError("transition matrix has wrong shape");
    if ((t.array() < 0.0).any()) throw ValidationError("transition probabilities must be non-negative");
    for (int s = 0; s < n_states; ++s)
      if (std::abs(t.row(s).sum() - 1.0) > 1e-12)
        throw ValidationError("transition row (s=" + std::to_string(s) + ", a=" + std::to_string(a) +
                              ") does not sum to 1");
  }
  if (reward.rows() != n_states || reward.cols() != n_actions) throw ValidationError("reward table has wrong shape");
  if (initial_dist.size() != n_states || std::abs(initial_dist.sum() - 1.0) > 1e-12 ||
      (initial_dist.array() < 0.0).any())
    throw ValidationError("initial_dist must be a probability vector");
  if (embedding.size() != n_states) throw ValidationError("embedding needs one coordinate per state");
}

Vec Env::conform_action(const Vec& action) const {
  const ActionSpace& space = spec_.action_space;
  if (action.size() != space.dim)
    throw ValidationError("action has dimension " + std::to_string(action.size()) + ", expected " +
                          std::to_string(space.dim));
  if (!action.allFinite()) throw ValidationError("action contains non-finite values");
  if (space.is_discrete()) return one_hot(argmax(action), space.dim);
  Vec a = action;
  for (int i = 0; i < space.dim; ++i) a[i] = std::clamp(a[i], space.low[i], space.high[i]);
  return a;
}

namespace {

int sample_index(const Eigen::Ref<const Vec>& probs, double u) {
  double cdf = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    cdf += probs[i];
    if (u < cdf) return static_cast<int>(i);
  }
  // u landed in the rounding gap above the last cumulative sum
  for (Eigen::Index i = probs.size() - 1; i >= 0; --i)
    if (probs[i] > 0.0) return static_cast<int>(i);
  return 0;
}

EnvSpec tabular_spec(std::string id, const TabularMDP& mdp, int horizon, double gamma) {
  EnvSpec s;
  s.id = std::move(id);
  s.state_dim = mdp.n_states;
  s.action_space = ActionSpace::discrete(mdp.n_actions);
  s.horizon = horizon;
  s.gamma = gamma;
  s.r_max = std::max(mdp.r_max(), 1e-12);
  return s;
}

}  // namespace

// ---------------------------------------------------------------- tabular

TabularEnv::TabularEnv(std::string id, TabularMDP mdp, int horizon, double gamma)
    : Env(tabular_spec(std::move(id), mdp, horizon, gamma)), mdp_(std::move(mdp)) {
  mdp_.validate();
}

int TabularEnv::state_index(const Vec& state) const {
  if (state.size() != mdp_.n_states) throw ValidationError("tabular state must be one-hot over n_states");
  return argmax(state);
}

Vec TabularEnv::reset(std::uint64_t seed) const {
  Rng rng(seed);
  return state_vector(sample_index(mdp_.initial_dist, uniform01(rng)));
}

StepResult TabularEnv::step(const Vec& state, const Vec& action, std::uint64_t noise_seed) const {
  const int s = state_index(state);
  const int a = argmax(conform_action(action));
  Rng rng(noise_seed);
  const int next = sample_index(mdp_.T(a).row(s).transpose(), uniform01(rng));
  return {state_vector(next), mdp_.reward(s, a), false};
}

double TabularEnv::reward(const Vec& state, const Vec& action) const {
  return mdp_.reward(state_index(state), argmax(conform_action(action)));
}

LipschitzConstants TabularEnv::lipschitz_constants() const { return tabular_lipschitz(mdp_); }

LipschitzConstants tabular_lipschitz(const TabularMDP& mdp) {
  LipschitzConstants c;
  c.available = true;
  for (int a = 0; a < mdp.n_actions; ++a) {
    for (int s = 0; s < mdp.n_states; ++s) {
      // W1 against a point mass is the expected distance to it.
      double w1 = 0.0;
      for (int j = 0; j < mdp.n_states; ++j) w1 += mdp.T(a)(s, j) * std::abs(mdp.embedding[j] - mdp.embedding[s]);
      c.transition = std::max(c.transition, w1);
      for (int s2 = 0; s2 < mdp.n_states; ++s2) {
        const double d = std::abs(mdp.embedding[s] - mdp.embedding[s2]);
        if (d > 0.0) c.reward = std::max(c.reward, std::abs(mdp.reward(s, a) - mdp.reward(s2, a)) / d);
      }
    }
  }
  return c;
}

TabularMDP chain_mdp(const ChainParams& p) {
  if (p.n_states < 2) throw ValidationError("chain needs at least 2 states");
  if (p.slip < 0.0 || p.slip > 1.0) throw ValidationError("chain slip must lie in [0, 1]");
  const int goal = p.goal < 0 ? p.n_states - 1 : p.goal;
  if (goal >= p.n_states) throw ValidationError("chain goal out of range");
  TabularMDP m;
  m.n_states = p.n_states;
  m.n_actions = 2;  // 0 = left, 1 = right
  m.transition.assign(2, Mat::Zero(p.n_states, p.n_states));
  for (int s = 0; s < p.n_states; ++s) {
    const int left = std::max(s - 1, 0);
    const int right = std::min(s + 1, p.n_states - 1);
    m.transition[0](s, left) += 1.0 - p.slip;
    m.transition[0](s, right) += p.slip;
    m.transition[1](s, right) += 1.0 - p.slip;
    m.transition[1](s, left) += p.slip;
  }
  m.reward = Mat::Zero(p.n_states, 2);
  m.reward.row(goal).setConstant(1.0);
  m.initial_dist = one_hot(0, p.n_states);
  m.embedding = Vec::LinSpaced(p.n_states, 0.0, p.n_states - 1.0);
  m.validate();
  return m;
}

TabularMDP grid5_mdp(const GridParams& p) {
  if (p.slip < 0.0 || p.slip > 1.0) throw ValidationError("grid slip must lie in [0, 1]");
  constexpr int kSide = 5;
  constexpr int kStates = kSide * kSide;
  TabularMDP m;
  m.n_states = kStates;
  m.n_actions = 4;  // up, down, left, right
  m.transition.assign(4, Mat::Zero(kStates, kStates));
  const int dr[4] = {-1, 1, 0, 0};
  const int dc[4] = {0, 0, -1, 1};
  auto move = [&](int s, int dir) {
    const int r = std::clamp(s / kSide + dr[dir], 0, kSide - 1);
    const int c = std::clamp(s % kSide + dc[dir], 0, kSide - 1);
    return r * kSide + c;
  };
  for (int s = 0; s < kStates; ++s) {
    for (int a = 0; a < 4; ++a) {
      m.transition[a](s, move(s, a)) += 1.0 - p.slip;
      for (int d = 0; d < 4; ++d) m.transition[a](s, move(s, d)) += p.slip / 4.0;
    }
  }
  m.reward = Mat::Zero(kStates, 4);
  m.reward.row(kStates - 1).setConstant(1.0);
  m.initial_dist = one_hot(0, kStates);
  m.embedding = Vec::LinSpaced(kStates, 0.0, kStates - 1.0);
  m.validate();
  return m;
}

// ---------------------------------------------------------------- pendulum

namespace {

EnvSpec pendulum_spec(const PendulumParams& p) {
  EnvSpec s;
  s.id = "pendulum";
  s.state_dim = 2;
  s.action_space = ActionSpace::box({-p.max_torque}, {p.max_torque});
  s.horizon = p.horizon;
  s.gamma = p.gamma;
  s.r_max = 1.0;
  return s;
}

}  // namespace

PendulumEnv::PendulumEnv(PendulumParams p) : Env(pendulum_spec(p)), p_(p) {
  if (!(p_.dt > 0 && p_.length > 0 && p_.mass > 0 && p_.fail_angle > 0 && p_.max_speed > 0))
    throw ValidationError("pendulum parameters must be positive");
  if (p_.init_angle < 0 || p_.init_velocity < 0 || p_.noise_std < 0)
    throw ValidationError("pendulum init box and noise must be non-negative");
}

Vec PendulumEnv::reset(std::uint64_t seed) const {
  Rng rng(seed);
  Vec s(2);
  s[0] = std::uniform_real_distribution<double>(-p_.init_angle, p_.init_angle)(rng);
  s[1] = std::uniform_real_distribution<double>(-p_.init_velocity, p_.init_velocity)(rng);
  return s;
}

StepResult PendulumEnv::step(const Vec& state, const Vec& action, std::uint64_t noise_seed) const {
  if (state.size() != 2) throw ValidationError("pendulum state is (theta, omega)");
  const double u = conform_action(action)[0];
  const double theta = state[0], omega = state[1];
  double accel = p_.gravity / p_.length * std::sin(theta) + u / (p_.mass * p_.length * p_.length);
  double next_omega = omega + p_.dt * accel;
  if (p_.noise_std > 0.0) {
    Rng rng(noise_seed);
    next_omega += p_.noise_std * std::sqrt(p_.dt) * standard_normal(rng);
  }
  next_omega = std::clamp(next_omega, -p_.max_speed, p_.max_speed);
  Vec next(2);
  next[0] = theta + p_.dt * next_omega;
  next[1] = next_omega;
  const bool fallen = std::abs(next[0]) > p_.fail_angle;
  if (fallen && !p_.terminate) next[0] = std::clamp(next[0], -p_.fail_angle, p_.fail_angle);
  return {next, reward(state, action), fallen && p_.terminate};
}

double PendulumEnv::reward(const Vec& state, const Vec&) const {
  const double r = state[0] / p_.fail_angle;
  return std::max(0.0, 1.0 - r * r);
}

LipschitzConstants PendulumEnv::lipschitz_constants() const {
  if (p_.noise_std > 0.0) return {};
  const double accel = p_.gravity / p_.length + p_.max_torque / (p_.mass * p_.length * p_.length);
  LipschitzConstants c;
  c.available = true;
  c.transition = std::hypot(p_.dt * p_.max_speed, p_.dt * accel);
  c.reward = 2.0 / p_.fail_angle;
  return c;
}

// ---------------------------------------------------------------- point mass

namespace {

EnvSpec pointmass_spec(const PointMassParams& p) {
  EnvSpec s;
  s.id = "pointmass";
  s.state_dim = 1;
  s.action_space = ActionSpace::box({-1.0}, {1.0});
  s.horizon = p.horizon;
  s.gamma = p.gamma;
  s.r_max = p.bound * p.bound + 0.1;
  return s;
}

}  // namespace

PointMassEnv::PointMassEnv(PointMassParams p) : Env(pointmass_spec(p)), p_(p) {
  if (!(p_.dt > 0 && p_.bound > 0) || p_.init < 0) throw ValidationError("point-mass parameters out of range");
}

Vec PointMassEnv::reset(std::uint64_t seed) const {
  Rng rng(seed);
  const double lim = std::min(p_.init, p_.bound);
  return Vec::Constant(1, std::uniform_real_distribution<double>(-lim, lim)(rng));
}

StepResult PointMassEnv::step(const Vec& state, const Vec& action, std::uint64_t) const {
  if (state.size() != 1) throw ValidationError("point-mass state is 1-D");
  const double a = conform_action(action)[0];
  Vec next = Vec::Constant(1, std::clamp(state[0] + a * p_.dt, -p_.bound, p_.bound));
  return {next, reward(state, action), false};
}

double PointMassEnv::reward(const Vec& state, const Vec& action) const {
  const double a = conform_action(action)[0];
  return -(state[0] * state[0] + 0.1 * a * a);
}

LipschitzConstants PointMassEnv::lipschitz_constants() const {
  LipschitzConstants c;
  c.available = true;
  c.transition = p_.dt;  // |a| <= 1
  c.reward = std::max(2.0 * p_.bound, 0.2);
  return c;
}

// ---------------------------------------------------------------- factory

EnvParams default_env_params(const std::string& id) {
  if (id == "chain") {
    ChainParams p;
    return {{"n_states", p.n_states}, {"slip", p.slip}, {"goal", p.goal}, {"horizon", p.horizon}, {"gamma", p.gamma}};
  }
  if (id == "grid5") {
    GridParams p;
    return {{"slip", p.slip}, {"horizon", p.horizon}, {"gamma", p.gamma}};
  }
  if (id == "pendulum") {
    PendulumParams p;
    return {{"gravity", p.gravity},
            {"length", p.length},
            {"mass", p.mass},
            {"max_torque", p.max_torque},
            {"max_speed", p.max_speed},
            {"dt", p.dt},
            {"init_angle", p.init_angle},
            {"init_velocity", p.init_velocity},
            {"fail_angle", p.fail_angle},
            {"noise_std", p.noise_std},
            {"horizon", p.horizon},
            {"gamma", p.gamma},
            {"terminate", p.terminate ? 1.0 : 0.0}};
  }
  if (id == "pointmass") {
    PointMassParams p;
    return {{"dt", p.dt}, {"bound", p.bound}, {"init", p.init}, {"horizon", p.horizon}, {"gamma", p.gamma}};
  }
  throw ValidationError("unknown environment id '" + id + "'");
}

std::shared_ptr<const Env> make_env(const std::string& id, const EnvParams& overrides) {
  EnvParams v = default_env_params(id);
  for (const auto& [k, x] : overrides) {
    if (!v.contains(k)) throw ValidationError("unknown parameter '" + k + "' for environment '" + id + "'");
    v[k] = x;
  }
  auto integer = [&](const std::string& k) {
    const double x = v.at(k);
    if (x != std::floor(x)) throw ValidationError("parameter '" + k + "' must be an integer");
    return static_cast<int>(x);
  };
  if (id == "chain") {
    ChainParams p{integer("n_states"), v["slip"], integer("goal"), integer("horizon"), v["gamma"]};
    return std::make_shared<TabularEnv>("chain", chain_mdp(p), p.horizon, p.gamma);
  }
  if (id == "grid5") {
    GridParams p{v["slip"], integer("horizon"), v["gamma"]};
    return std::make_shared<TabularEnv>("grid5", grid5_mdp(p), p.horizon, p.gamma);
  }
  if (id == "pendulum") {
    PendulumParams p{v["gravity"],    v["length"],        v["mass"],       v["max_torque"],
                     v["max_speed"],  v["dt"],            v["init_angle"], v["init_velocity"],
                     v["fail_angle"], v["noise_std"],     integer("horizon"), v["gamma"],
                     integer("terminate") != 0};
    return std::make_shared<PendulumEnv>(p);
  }
  PointMassParams p{v["dt"], v["bound"], v["init"], integer("horizon"), v["gamma"]};
  return std::make_shared<PointMassEnv>(p);
}

}  // namespace idrl
