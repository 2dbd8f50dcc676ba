#include "delay.hpp"
#include "oracles/oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace idrl;

namespace {

TabularMDP chain2(const Mat& t0, const Mat& t1) {
  TabularMDP m;
  m.n_states = 2;
  m.n_actions = 2;
  m.transition = {t0, t1};
  m.reward = Mat::Zero(2, 2);
  m.reward << 0.0, 0.5, 1.0, 0.2;
  m.initial_dist = Vec(2);
  m.initial_dist << 0.7, 0.3;
  m.embedding = Vec::LinSpaced(2, 0.0, 1.0);
  return m;
}

double tv(const Vec& p, const Vec& q) { return 0.5 * (p - q).cwiseAbs().sum(); }

}  // namespace

TEST_CASE("augment concatenates observation and window") {
  CHECK(augment(Vec::Constant(1, 0.3), {}, 0).flatten() == Vec::Constant(1, 0.3));
  Vec expected(3);
  expected << 0.1, 0.5, -0.3;
  CHECK(augment(Vec::Constant(1, 0.1), {Vec::Constant(1, 0.5), Vec::Constant(1, -0.3)}, 2).flatten() == expected);
  CHECK_THROWS_AS(augment(Vec::Constant(1, 0.1), {Vec::Constant(1, 0.5)}, 2), ValidationError);
}

TEST_CASE("delayed env reveals states in FIFO order") {
  auto pm = make_env("pointmass", {{"init", 0.0}});
  SUBCASE("delay 1 on the point mass") {
    DelayedEnv d(pm, 1);
    const AugmentedState x0 = d.reset(0);
    CHECK(x0.flatten() == Vec::Zero(2));
    const auto st = d.step(Vec::Constant(1, 1.0), 0);
    CHECK(st.x.obs[0] == 0.0);
    CHECK(st.x.window.size() == 1);
    CHECK(st.x.window[0][0] == 1.0);
    CHECK(d.true_state()[0] == doctest::Approx(0.05));
  }
  SUBCASE("padding starts at the zero action") {
    DelayedEnv d(make_env("pointmass"), 3);
    const auto x0 = d.reset(5);
    CHECK(x0.flatten().tail(3) == Vec::Zero(3));
    CHECK(d.pending().size() == 3);
  }
  SUBCASE("window consistency and queue length") {
    DelayedEnv d(make_env("pendulum"), 3);
    AugmentedState x = d.reset(11);
    Rng rng(1);
    while (!d.done()) {
      const Vec a = Vec::Constant(1, 2 * uniform01(rng) - 1);
      const auto st = d.step(a, rng());
      std::vector<Vec> expect(x.window.begin() + 1, x.window.end());
      expect.push_back(a);
      CHECK(st.x.window == expect);
      CHECK(d.pending().size() == 3);
      x = st.x;
    }
    CHECK(d.t() == 200);
    CHECK_THROWS_AS(d.step(Vec::Zero(1), 0), ValidationError);
  }
}

TEST_CASE("delay zero reproduces the base env bitwise") {
  auto env = make_env("pendulum", {{"noise_std", 0.2}});
  DelayedEnv d(env, 0);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Vec s = env->reset(seed);
    CHECK(d.reset(seed).obs == s);
    for (int t = 0; t < 50; ++t) {
      const Vec a = Vec::Constant(1, std::sin(0.3 * t));
      const auto base = env->step(s, a, mix_seed(seed, t));
      const auto st = d.step(a, mix_seed(seed, t));
      CHECK(st.x.obs == base.next_state);
      CHECK(st.reward == base.reward);
      CHECK(st.done == base.terminal);
      s = base.next_state;
    }
  }
}

TEST_CASE("revealed state marginal follows the base chain") {
  ChainParams cp;
  cp.n_states = 4;
  cp.slip = 0.3;
  auto env = std::make_shared<TabularEnv>("chain", chain_mdp(cp), 50, 0.9);
  const TabularMDP& m = *env->tabular();
  DelayedEnv d(env, 2);
  const int episodes = 100000, t_obs = 5;
  Vec freq = Vec::Zero(4);
  for (int ep = 0; ep < episodes; ++ep) {
    d.reset(mix_seed(1, ep));
    AugmentedState x;
    for (int t = 0; t < t_obs; ++t) x = d.step(one_hot(1, 2), mix_seed(2, ep * 16 + t)).x;
    freq[argmax(x.obs)] += 1.0 / episodes;
  }
  // After 5 steps the agent sees s_3: s_{-2} ~ ρ0, two padding steps with
  // action 0, then three steps with action 1.
  Vec p = m.initial_dist;
  for (int i = 0; i < 2; ++i) p = (p.transpose() * m.T(0)).transpose();
  for (int i = 0; i < t_obs - 2; ++i) p = (p.transpose() * m.T(1)).transpose();
  CHECK(tv(freq, p) <= 0.02);
}

TEST_CASE("exact beliefs") {
  Mat t(2, 2);
  t << 0.9, 0.1, 0.2, 0.8;
  const TabularMDP m = chain2(t, Mat::Identity(2, 2));
  SUBCASE("worked example") {
    const Vec b = belief_exact(m, 0, {0, 0});
    CHECK(b[0] == doctest::Approx(0.83).epsilon(1e-14));
    CHECK(b[1] == doctest::Approx(0.17).epsilon(1e-14));
    CHECK((b - oracle::belief_by_paths(m, 0, {0, 0})).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("empty window and identity dynamics give a point mass") {
    CHECK(belief_exact(m, 1, {}) == one_hot(1, 2));
    CHECK(belief_exact(m, 0, {1, 1, 1}) == one_hot(0, 2));
  }
  SUBCASE("path enumeration on 2- and 3-state chains") {
    Rng rng(3);
    for (int S : {2, 3}) {
      for (int k = 0; k < 20; ++k) {
        const TabularMDP r = oracle::random_tabular(S, 2, rng);
        for (int delay = 0; delay <= 4; ++delay) {
          std::vector<int> w(delay);
          for (int& a : w) a = static_cast<int>(rng() % 2);
          const int obs = static_cast<int>(rng() % S);
          CHECK((belief_exact(r, obs, w) - oracle::belief_by_paths(r, obs, w)).cwiseAbs().maxCoeff() <= 1e-12);
        }
      }
    }
  }
  SUBCASE("one more window action is one more transition") {
    Rng rng(4);
    const TabularMDP r = oracle::random_tabular(5, 3, rng);
    std::vector<int> w{2, 0, 1};
    const Vec shorter = belief_exact(r, 3, {2, 0});
    CHECK((belief_exact(r, 3, w) - (shorter.transpose() * r.T(1)).transpose()).cwiseAbs().maxCoeff() <= 1e-14);
  }
}

TEST_CASE("Monte-Carlo beliefs") {
  ChainParams cp;
  cp.n_states = 3;
  cp.slip = 0.25;
  auto env = std::make_shared<TabularEnv>("chain", chain_mdp(cp), 10, 0.9);
  const AugmentedState x = augment(one_hot(1, 3), {one_hot(0, 2), one_hot(1, 2)}, 2);
  const BeliefDist mc = belief_mc(*env, x, 100000, 9);
  CHECK(std::abs(mc.weights.sum() - 1.0) < 1e-9);
  CHECK(tv(belief_histogram(mc, 3), belief_exact(*env->tabular(), x).probs) <= 0.02);

  auto pm = make_env("pointmass");
  const AugmentedState y = augment(Vec::Constant(1, 0.2), {Vec::Constant(1, 0.5), Vec::Constant(1, -1.0)}, 2);
  const BeliefDist det = belief_mc(*pm, y, 50, 1);
  CHECK((det.particles.rowwise() - det.particles.row(0)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(belief_mc(*pm, augment(Vec::Constant(1, 0.2), {}, 0), 1000, 1).particles.rows() == 1);
}

TEST_CASE("augmented indexer round trips") {
  AugmentedIndexer idx(3, 2, 3);
  CHECK(idx.size() == 24);
  for (int x = 0; x < idx.size(); ++x) {
    CHECK(idx.index(idx.obs(x), idx.window(x)) == x);
    CHECK(idx.index(idx.state(x)) == x);
  }
  CHECK(idx.window(idx.index(1, {1, 0, 0}))[0] == 1);
  const int x = idx.index(2, {1, 0, 1});
  const int y = idx.shift(x, 0, 1);
  CHECK(idx.obs(y) == 1);
  CHECK(idx.window(y) == std::vector<int>{0, 1, 0});
}

TEST_CASE("policy evaluation: exact solve agrees with iteration") {
  Rng rng(6);
  for (int k = 0; k < 10; ++k) {
    const TabularMDP m = oracle::random_tabular(3, 2, rng);
    const DelayedTabular d = make_delayed_tabular(m, 2, 0.9);
    Mat pi(d.size(), 2);
    for (int x = 0; x < d.size(); ++x) {
      pi(x, 0) = uniform01(rng);
      pi(x, 1) = 1.0 - pi(x, 0);
    }
    const ValueResult it = evaluate_policy_iterative(d, pi, d.delayed_reward);
    CHECK(it.residual <= 1e-10);
    CHECK((it.v - evaluate_policy_exact(d, pi, d.delayed_reward)).cwiseAbs().maxCoeff() <= 1e-8);
    const ValueResult vi = value_iteration(d, d.delayed_reward);
    CHECK(vi.residual <= 1e-10);
    CHECK((vi.v.array() >= it.v.array() - 1e-8).all());
  }
}


TEST_CASE("delayed trajectory log-probability matches exhaustive enumeration") {
  Mat t0(2, 2), t1(2, 2);
  t0 << 0.9, 0.1, 0.3, 0.7;
  t1 << 0.2, 0.8, 0.0, 1.0;
  const TabularMDP m = chain2(t0, t1);
  for (int delay : {0, 1, 2}) {
    for (double gamma : {1.0, 0.9}) {
      const DelayedTabular d = make_delayed_tabular(m, delay, gamma);
      const Mat pi = Mat::Constant(d.size(), 2, 0.5);
      const int L = 3, n = d.size();
      double mass = 0.0;
      // Every (x_0..x_3, a_0..a_2).
      std::vector<int> digits(L + 1 + L, 0);
      while (true) {
        TabularTrajectory tr;
        for (int i = 0; i <= L; ++i) tr.x.push_back(digits[i]);
        for (int i = 0; i < L; ++i) tr.a.push_back(digits[L + 1 + i]);
        const double got = delayed_traj_logprob(d, pi, tr);
        const double want = oracle::delayed_logprob(m, delay, d.idx, pi, gamma, tr);
        if (std::isinf(want)) {
          CHECK(std::isinf(got));
        } else {
          CHECK(std::abs(got - want) <= 1e-12);
          if (gamma == 1.0) mass += std::exp(got);
        }
        int j = 0;
        while (j < static_cast<int>(digits.size())) {
          const int base = j <= L ? n : 2;
          if (++digits[j] < base) break;
          digits[j++] = 0;
        }
        if (j == static_cast<int>(digits.size())) break;
      }
      if (gamma == 1.0) CHECK(std::abs(mass - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("trajectory log-probability special cases") {
  Mat id = Mat::Identity(2, 2);
  const TabularMDP m = chain2(id, id);
  const DelayedTabular d = make_delayed_tabular(m, 1, 1.0);
  Mat pi = Mat::Zero(d.size(), 2);
  pi.col(1).setOnes();
  // Deterministic dynamics and policy: every factor after ρ_Δ is 1.
  TabularTrajectory ok{{d.idx.index(0, {0}), d.idx.index(0, {1}), d.idx.index(0, {1})}, {1, 1}};
  CHECK(delayed_traj_logprob(d, pi, ok) == doctest::Approx(std::log(0.7)).epsilon(1e-15));
  // Window not shifted by the action taken.
  TabularTrajectory bad{{d.idx.index(0, {0}), d.idx.index(0, {0})}, {1}};
  CHECK(delayed_traj_logprob(d, pi, bad) == kNegInf);
}
