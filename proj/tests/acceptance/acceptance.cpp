// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset.

#include "agent.hpp"
#include "binary_io.hpp"
#include "delay.hpp"
#include "discriminator.hpp"
#include "oracles/oracles.hpp"
#include "theory.hpp"
#include "training.hpp"

#include <idrl/idrl.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>

using namespace idrl;
namespace fs = std::filesystem;

namespace {

// Tolerances and budgets.
constexpr double kCertSlack = -1e-9;
constexpr double kCertSeconds = 120.0;
constexpr double kExactTol = 1e-12;
constexpr double kFdRelTol = 1e-4;
constexpr double kFdKinkFraction = 0.01;  // entries allowed to straddle a ReLU kink
constexpr int kFdTrials = 100;
constexpr double kIdentityTol = 1e-9;
constexpr long kSanitySteps = 50000;
constexpr double kSanitySeconds = 300.0;
constexpr double kExpertFraction = 0.8;
constexpr long kIdrlSteps = 30000;  // of the 200k allowed
constexpr long kIdrlStepBudget = 200000;
constexpr double kTrendTieFraction = 0.01;  // of the expert return
constexpr double kOccupancyTv = 0.15;
constexpr long kOccupancySteps = 10000;

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double median3(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

Mat randn(Eigen::Index r, Eigen::Index c, Rng& rng) {
  Mat m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = standard_normal(rng);
  return m;
}

std::vector<Mat*> pointers(std::vector<Mat>& ps) {
  std::vector<Mat*> out;
  for (auto& m : ps) out.push_back(&m);
  return out;
}

RunConfig pendulum_config() { return load_config(IDRL_SOURCE_DIR "/configs/pendulum_delay2.toml", false); }

Vec greedy(const AuxDelayAgent& agent, const AugmentedState& x) {
  return agent.actor.deterministic_action(x.flatten().transpose()).row(0).transpose();
}

// ---------------------------------------------------------------------------

Outcome disclaimer() {
  return {true,
          "large-scale continuous-control benchmark numbers (up to 10M steps) are not reproduced; "
          "criteria 2-10 are property checks and scaled analogues"};
}

Outcome certification() {
  const auto t0 = std::chrono::steady_clock::now();
  CertifySuiteConfig cfg;
  cfg.n_mdps = 100;
  cfg.max_states = 6;
  cfg.max_actions = 3;
  cfg.max_delay = 3;
  const auto s = summarize(run_certify_suite(cfg));
  cfg.lt_scale = 0.5;
  const auto neg = summarize(run_certify_suite(cfg));
  const double secs = seconds_since(t0);
  const bool pass = s.failures == 0 && s.min_slack >= kCertSlack && s.by_kind.size() == 3 && neg.failures > 0 &&
                    secs <= kCertSeconds;
  return {pass, std::to_string(s.total) + " certificates, " + std::to_string(s.failures) + " failures, min slack " +
                    fmt("%.3g", s.min_slack) + "; halved L_T: " + std::to_string(neg.failures) + " failures; " +
                    fmt("%.1f", secs) + " s"};
}

// Hand n-step targets on a deterministic 5-state chain with linear target
// critics and uniform policies.
double td_target_error() {
  constexpr int kStates = 5, delay = 3;
  const double gamma = 0.9, alpha = 0.3;
  auto next = [](int s, int a) { return std::clamp(s + (a == 1 ? 1 : -1), 0, kStates - 1); };
  auto reward = [](int s, int a) { return s + 0.5 * a; };
  Rng rng(2);
  std::vector<int> acts(delay, 0);
  for (int k = 0; k < 12; ++k) acts.push_back(k % 3 == 0 ? 0 : 1);
  std::vector<int> states{2};
  for (int a : acts) states.push_back(next(states.back(), a));
  auto s_at = [&](int t) { return states[t + delay]; };
  auto a_at = [&](int t) { return acts[t + delay]; };

  const int length = static_cast<int>(acts.size()) - 2 * delay;
  DelayedTrajectory traj;
  for (int k = 0; k < length + delay + 1; ++k) traj.obs.push_back(one_hot(s_at(k - delay), kStates));
  for (int t = 0; t < length; ++t) {
    traj.actions.push_back(one_hot(a_at(t), 2));
    traj.rewards.push_back(reward(s_at(t), a_at(t)));
  }
  traj.complete = true;

  double worst = 0.0;
  for (int n = 1; n <= 3; ++n) {
    AugmentLayout layout;
    layout.state_dim = kStates;
    layout.action_dim = 2;
    layout.delay = delay;
    layout.delay_tau = delay - n;
    layout.n = n;
    layout.zero_action = one_hot(0, 2);
    const int dt = layout.delay_tau;
    AgentConfig cfg;
    cfg.critic_hidden = {};
    cfg.actor_hidden = {4};
    cfg.alpha = alpha;
    cfg.gamma = gamma;
    AuxDelayAgent agent(layout, ActionSpace::discrete(2), cfg, rng);
    for (auto* p : {&agent.actor, &agent.aux_actor})
      for (auto& m : p->net().params()) m.setZero();
    const int q_in = layout.x_tau_dim() + 2;
    const Vec w1 = randn(q_in, 1, rng).col(0), w2 = randn(q_in, 1, rng).col(0);
    const double b1 = 0.7, b2 = -0.4;
    agent.q1_target.params() = {Mat(w1), Mat::Constant(1, 1, b1)};
    agent.q2_target.params() = {Mat(w2), Mat::Constant(1, 1, b2)};
    auto q_hand = [&](const Vec& w, double b, int k, int a) {
      double q = b + w[s_at(k - dt)];
      for (int i = 0; i < dt; ++i) q += w[kStates + 2 * i + a_at(k - dt + i)];
      return q + w[kStates + 2 * dt + a];
    };
    const auto recs = build_records(traj, layout);
    std::vector<std::size_t> idx(recs.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    const Vec y = agent.td_target(gather(recs, idx), agent.draw_target_noise(idx.size(), rng));
    if (recs.size() < 4) return INFINITY;
    for (std::size_t t = 0; t < recs.size(); ++t) {
      const int k = static_cast<int>(t) + n;
      double ret = 0.0;
      for (int i = 0; i < n; ++i) ret += std::pow(gamma, i) * reward(s_at(t + i), a_at(t + i));
      const double ent = alpha * std::log(2.0);
      const double v1 = 0.5 * (q_hand(w1, b1, k, 0) + q_hand(w1, b1, k, 1)) + ent;
      const double v2 = 0.5 * (q_hand(w2, b2, k, 0) + q_hand(w2, b2, k, 1)) + ent;
      worst = std::max(worst, std::abs(y[t] - (ret + std::pow(gamma, n) * std::min(v1, v2))));
    }
  }
  return worst;
}

Outcome exact_oracles() {
  Rng rng(3);
  double belief = 0.0;
  for (int S : {2, 3})
    for (int k = 0; k < 50; ++k) {
      const TabularMDP m = oracle::random_tabular(S, 2, rng);
      for (int delay = 0; delay <= 4; ++delay) {
        std::vector<int> w(delay);
        for (int& a : w) a = static_cast<int>(rng() % 2);
        const int obs = static_cast<int>(rng() % S);
        belief = std::max(belief, (belief_exact(m, obs, w) - oracle::belief_by_paths(m, obs, w)).cwiseAbs().maxCoeff());
      }
    }

  double logprob = 0.0;
  bool support_ok = true;
  for (int delay : {0, 1, 2}) {
    const TabularMDP m = oracle::random_tabular(2, 2, rng);
    const DelayedTabular d = make_delayed_tabular(m, delay, 0.9);
    Mat pi(d.size(), 2);
    for (int x = 0; x < d.size(); ++x) {
      pi(x, 0) = uniform01(rng);
      pi(x, 1) = 1.0 - pi(x, 0);
    }
    const int L = 3, n = d.size();
    std::vector<int> digits(2 * L + 1, 0);
    while (true) {
      TabularTrajectory tr;
      for (int i = 0; i <= L; ++i) tr.x.push_back(digits[i]);
      for (int i = 0; i < L; ++i) tr.a.push_back(digits[L + 1 + i]);
      const double got = delayed_traj_logprob(d, pi, tr);
      const double want = oracle::delayed_logprob(m, delay, d.idx, pi, 0.9, tr);
      if (std::isinf(want) || std::isinf(got))
        support_ok = support_ok && std::isinf(want) && std::isinf(got);
      else
        logprob = std::max(logprob, std::abs(got - want));
      std::size_t j = 0;
      while (j < digits.size()) {
        const int base = static_cast<int>(j) <= L ? n : 2;
        if (++digits[j] < base) break;
        digits[j++] = 0;
      }
      if (j == digits.size()) break;
    }
  }

  const double td = td_target_error();
  const bool pass = belief <= kExactTol && logprob <= kExactTol && support_ok && td <= kExactTol;
  return {pass, "max error: belief " + fmt("%.2g", belief) + ", log-prob " + fmt("%.2g", logprob) +
                    (support_ok ? "" : " (support mismatch)") + ", td target " + fmt("%.2g", td)};
}

struct FdTally {
  long checked = 0, mismatched = 0;
  void add(const oracle::FdReport& r) {
    checked += r.checked;
    mismatched += r.mismatched;
  }
  bool ok() const { return checked > 0 && mismatched <= kFdKinkFraction * checked; }
  std::string str() const { return std::to_string(mismatched) + "/" + std::to_string(checked); }
};

Batch random_batch(const AugmentLayout& l, Eigen::Index rows, Rng& rng) {
  Batch b;
  b.x = randn(rows, l.x_dim(), rng);
  b.x_tau = randn(rows, l.x_tau_dim(), rng);
  b.a = randn(rows, l.action_dim, rng).array().tanh().matrix();
  b.r = randn(rows, l.n, rng);
  b.x_n = randn(rows, l.x_dim(), rng);
  b.x_tau_n = randn(rows, l.x_tau_dim(), rng);
  b.done = Vec::Zero(rows);
  for (Eigen::Index i = 0; i < rows; ++i) b.done[i] = uniform01(rng) < 0.2;
  b.step_inputs = Mat::Zero(rows * l.n, l.disc_dim());
  b.step_mask = Mat::Ones(rows, l.n);
  return b;
}

Outcome differentiation() {
  Rng rng(9);
  FdTally disc, critic, actor, aux;
  for (int trial = 0; trial < kFdTrials; ++trial) {
    DiscConfig cfg;
    cfg.hidden = {8, 8};
    cfg.lambda_ent = 0.05;
    Discriminator d(3, cfg, rng);
    const Mat e = randn(4, 3, rng), g = randn(4, 3, rng);
    const Vec elp = randn(4, 1, rng).col(0), glp = randn(4, 1, rng).col(0);
    Vec mix(4);
    for (auto& m : mix) m = uniform01(rng);
    const auto analytic = d.loss(e, elp, g, glp, mix).grads;
    const auto numeric =
        oracle::fd_gradient([&] { return d.loss(e, elp, g, glp, mix).total; }, pointers(d.net().params()));
    disc.add(oracle::compare_gradients(analytic, numeric, kFdRelTol));
  }

  AgentConfig acfg;
  acfg.actor_hidden = {8, 8};
  acfg.critic_hidden = {8, 8};
  const auto env = make_env("pendulum");
  const auto layout = make_layout(env->spec(), 2, 1, 1);
  for (int trial = 0; trial < kFdTrials; ++trial) {
    AuxDelayAgent agent(layout, env->spec().action_space, acfg, rng);
    const Batch b = random_batch(layout, 4, rng);
    const Vec y = randn(4, 1, rng).col(0);
    const auto l = agent.critic_loss(b, y);
    critic.add(oracle::compare_gradients(
        l.grads1, oracle::fd_gradient([&] { return agent.critic_loss(b, y).loss; }, pointers(agent.q1.params())),
        kFdRelTol));
    critic.add(oracle::compare_gradients(
        l.grads2, oracle::fd_gradient([&] { return agent.critic_loss(b, y).loss; }, pointers(agent.q2.params())),
        kFdRelTol));
    for (bool branch : {true, false}) {
      Policy& pol = branch ? agent.aux_actor : agent.actor;
      const Mat noise = pol.draw_noise(4, rng);
      const auto al = agent.actor_loss(b, branch, noise);
      const auto numeric = oracle::fd_gradient([&] { return agent.actor_loss(b, branch, noise).loss; },
                                               pointers(pol.net().params()));
      (branch ? aux : actor).add(oracle::compare_gradients(al.grads, numeric, kFdRelTol));
    }
  }
  const bool pass = disc.ok() && critic.ok() && actor.ok() && aux.ok();
  return {pass, "entries outside rel 1e-4 over " + std::to_string(kFdTrials) + " trials each: discriminator " +
                    disc.str() + ", critic " + critic.str() + ", actor " + actor.str() + ", auxiliary actor " +
                    aux.str()};
}

Outcome identity() {
  Rng rng(12);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    DiscConfig cfg;
    cfg.hidden = {32, 32};
    cfg.delta = 0.0;
    const int dim = 2 + static_cast<int>(rng() % 8);
    Discriminator d(dim, cfg, rng);
    const Mat in = randn(16, dim, rng);
    const Vec logpi = randn(16, 1, rng).col(0) * 5.0;
    worst = std::max(worst, (d.reward(in, logpi) - (d.reward_net(in) - logpi)).cwiseAbs().maxCoeff());
  }
  return {worst <= kIdentityTol, "max |reward - (R - log pi)| = " + fmt("%.2g", worst) + " over 100 networks"};
}

Outcome delay_free_sanity() {
  const auto t0 = std::chrono::steady_clock::now();
  const RunConfig cfg = parse_config(R"([run]
seed = 1
eval_interval = 5000
eval_episodes = 5
warmup_steps = 1000
batch_size = 64
[env]
id = "chain"
delay = 0
[agent]
delay_tau = 0
n_step = 1
actor_hidden = [64, 64]
critic_hidden = [64, 64]
alpha = 0.05
)",
                                     false);
  const SacResult r = train_true_reward(cfg, kSanitySteps);
  const auto env = make_env("chain");
  const TabularMDP& m = *env->tabular();
  const Mat q = oracle::q_value_iteration(m, 0.9);
  int agree = 0;
  for (int s = 0; s < m.n_states; ++s) {
    Vec row = q.row(s).transpose();
    AugmentedState x;
    x.obs = one_hot(s, m.n_states);
    agree += argmax(greedy(r.agent, x)) == argmax(row);
  }
  const double secs = seconds_since(t0);
  return {agree == m.n_states && secs <= kSanitySeconds,
          std::to_string(agree) + "/" + std::to_string(m.n_states) + " states agree after " +
              std::to_string(kSanitySteps) + " steps, " + fmt("%.1f", secs) + " s"};
}

// Shared pendulum experiment for criteria 7 and 8.
struct PendulumStudy {
  double expert_return = 0.0;
  std::map<int, std::vector<double>> idrl;  // trajectories -> final return per seed
  std::vector<double> bc;                   // BC on delayed observations, 1000 trajectories
  double seconds = 0.0;
};

PendulumStudy run_pendulum_study(bool with_trend) {
  const auto t0 = std::chrono::steady_clock::now();
  PendulumStudy st;
  RunConfig cfg = pendulum_config();
  cfg.expert.trajectories = 1000;
  const ExpertResult ex = train_expert(cfg);
  const auto env = make_env(cfg.env_id, cfg.env_params);
  st.expert_return = evaluate(
                         env, cfg.delay, [&](const AugmentedState& x) { return greedy(ex.agent, x); },
                         cfg.eval_episodes, eval_seed(cfg))
                         .mean;
  std::fprintf(stderr, "  expert return %.3f (%.0f s)\n", st.expert_return, seconds_since(t0));

  const std::vector<int> sizes = with_trend ? std::vector<int>{10, 100, 1000} : std::vector<int>{1000};
  for (std::uint64_t seed : {1, 2, 3}) {
    RunConfig c = cfg;
    c.seed = seed;
    c.total_steps = kIdrlSteps;
    for (int n : sizes) {
      ExpertDataset subset = ex.dataset;
      subset.trajectories.resize(static_cast<std::size_t>(n));
      const IdrlResult r = train_idrl(c, subset);
      st.idrl[n].push_back(r.metrics.back().eval_return_mean);
      std::fprintf(stderr, "  idrl seed %lu, %d trajectories: %.3f (%.0f s)\n", static_cast<unsigned long>(seed), n,
                   st.idrl[n].back(), seconds_since(t0));
    }
    st.bc.push_back(train_bc(c, ex.dataset, BcMode::DelayedObs).final_eval.mean);
    std::fprintf(stderr, "  bc-delayed seed %lu: %.3f (%.0f s)\n", static_cast<unsigned long>(seed), st.bc.back(),
                 seconds_since(t0));
  }
  st.seconds = seconds_since(t0);
  return st;
}

Outcome end_to_end(const PendulumStudy& st) {
  const double idrl = median3(st.idrl.at(1000)), bc = median3(st.bc);
  const bool pass = kIdrlSteps <= kIdrlStepBudget && idrl >= kExpertFraction * st.expert_return && idrl > bc;
  return {pass, "median over 3 seeds after " + std::to_string(kIdrlSteps) + " steps: idrl " + fmt("%.3f", idrl) +
                    " vs expert " + fmt("%.3f", st.expert_return) + " (" +
                    fmt("%.1f", 100.0 * idrl / st.expert_return) + "%), bc-delayed " + fmt("%.3f", bc)};
}

Outcome quantity_trend(const PendulumStudy& st) {
  const double r10 = median3(st.idrl.at(10)), r100 = median3(st.idrl.at(100)), r1000 = median3(st.idrl.at(1000));
  const double tie = kTrendTieFraction * std::abs(st.expert_return);
  const bool pass = r10 <= r100 + tie && r100 <= r1000 + tie;
  return {pass, "median final return for 10/100/1000 trajectories: " + fmt("%.3f", r10) + " / " + fmt("%.3f", r100) +
                    " / " + fmt("%.3f", r1000) + " (ties within " + fmt("%.2f", tie) + "); study took " +
                    fmt("%.0f", st.seconds) + " s"};
}

Outcome occupancy() {
  const RunConfig cfg = parse_config(R"([run]
seed = 1
total_steps = 20000
eval_interval = 5000
eval_episodes = 5
warmup_steps = 1000
batch_size = 64
[env]
id = "chain"
delay = 1
goal = 3
[agent]
actor_hidden = [64, 64]
critic_hidden = [64, 64]
[disc]
hidden = [64, 64]
)",
                                     false);
  const auto env = make_env(cfg.env_id, cfg.env_params);
  const TabularMDP& m = *env->tabular();
  const DelayedTabular d = make_delayed_tabular(m, cfg.delay, 0.9);
  const Mat q = value_iteration(d, d.delayed_reward).q;
  auto expert_policy = [&](const AugmentedState& x) {
    Vec row = q.row(d.idx.index(x)).transpose();
    return one_hot(argmax(row), m.n_actions);
  };

  // Expert demonstrations.
  ExpertDataset ds;
  ds.header.env_id = cfg.env_id;
  ds.header.delay = cfg.delay;
  ds.header.state_dim = env->spec().state_dim;
  ds.header.action_dim = env->spec().action_dim();
  DelayedEnv denv(env, cfg.delay);
  for (int ep = 0; ep < 100; ++ep) {
    AugmentedState x = denv.reset(mix_seed(1000, ep));
    DelayedTrajectory tr;
    while (!denv.done()) {
      tr.obs.push_back(x.obs);
      tr.actions.push_back(expert_policy(x));
      x = denv.step(tr.actions.back(), mix_seed(2000, ep) + static_cast<std::uint64_t>(denv.t())).x;
    }
    tr.complete = true;
    tr.terminal = denv.terminal();
    if (!tr.terminal) tr.obs.push_back(x.obs);
    ds.trajectories.push_back(tr);
  }

  const IdrlResult r = train_idrl(cfg, ds);

  // Empirical augmented state-action frequencies over kOccupancySteps steps.
  auto occupancy_of = [&](const DelayedPolicyFn& policy) {
    Vec counts = Vec::Zero(d.size() * m.n_actions);
    DelayedEnv e(env, cfg.delay);
    long steps = 0;
    for (int ep = 0; steps < kOccupancySteps; ++ep) {
      AugmentedState x = e.reset(mix_seed(3000, ep));
      while (!e.done() && steps < kOccupancySteps) {
        const Vec a = policy(x);
        counts[d.idx.index(x) * m.n_actions + argmax(a)] += 1.0;
        ++steps;
        x = e.step(a, mix_seed(4000, ep) + static_cast<std::uint64_t>(e.t())).x;
      }
    }
    return Vec(counts / counts.sum());
  };
  const Vec pe = occupancy_of(expert_policy);
  const Vec pi = occupancy_of([&](const AugmentedState& x) { return greedy(r.agent, x); });
  Rng coin(5);
  const Vec pu = occupancy_of([&](const AugmentedState&) { return one_hot(static_cast<int>(coin() % 2), 2); });
  const double tv = 0.5 * (pe - pi).cwiseAbs().sum();
  return {tv <= kOccupancyTv, "TV(expert, imitator) = " + fmt("%.4f", tv) + " over " +
                                  std::to_string(kOccupancySteps) + "-step rollouts on the delay-1 chain (uniform policy: " +
                                  fmt("%.4f", 0.5 * (pe - pu).cwiseAbs().sum()) + ", expert support " +
                                  std::to_string((pe.array() > 0).count()) + " pairs)"};
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) h = (h ^ c) * 1099511628211ull;
  return h;
}

// Hash of every file under dir, keyed by relative path.
std::map<std::string, std::uint64_t> tree_hashes(const fs::path& dir) {
  std::map<std::string, std::uint64_t> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = fnv1a(bin::read_file(e.path().string()));
  return out;
}

Outcome determinism() {
  const char* toml = R"([run]
seed = 11
total_steps = 1500
eval_interval = 500
eval_episodes = 3
warmup_steps = 300
batch_size = 32
checkpoint_interval = 500
[env]
id = "pendulum"
delay = 2
[agent]
actor_hidden = [32]
critic_hidden = [32]
[disc]
hidden = [32]
[bc]
hidden = [32]
epochs = 3
[expert]
total_steps = 1000
trajectories = 5
[certify]
n_mdps = 5
)";
  const fs::path root = fs::temp_directory_path() / "idrl_acceptance_determinism";
  fs::remove_all(root);
  std::vector<std::map<std::string, std::uint64_t>> hashes;
  bool ok = true;
  for (int rep = 0; rep < 2; ++rep) {
    const fs::path dir = root / std::to_string(rep);
    fs::create_directories(dir);
    idrl_config* cfg = nullptr;
    ok = ok && idrl_config_parse(toml, &cfg) == IDRL_OK;
    const std::string expert = (dir / "expert.bin").string();
    ok = ok && idrl_cmd_expert(cfg, 0, expert.c_str(), (dir / "expert.csv").string().c_str()) == IDRL_OK;
    ok = ok && idrl_cmd_train(cfg, "idrl", expert.c_str(), (dir / "idrl").string().c_str(), 0) == IDRL_OK;
    ok = ok && idrl_cmd_train(cfg, "bc-delayed", expert.c_str(), (dir / "bc").string().c_str(), 0) == IDRL_OK;
    ok = ok && idrl_cmd_certify(cfg, (dir / "certify").string().c_str(), nullptr) == IDRL_OK;
    idrl_config_free(cfg);
    if (!ok) return {false, std::string("command failed: ") + idrl_last_error()};
    hashes.push_back(tree_hashes(dir));
  }
  fs::remove_all(root);
  long ckpts = 0, differing = 0;
  for (const auto& [path, h] : hashes[0]) {
    ckpts += path.find(".ckpt") != std::string::npos;
    const auto it = hashes[1].find(path);
    differing += it == hashes[1].end() || it->second != h;
  }
  const bool pass = hashes[0].size() == hashes[1].size() && differing == 0 && ckpts >= 4;
  return {pass, std::to_string(hashes[0].size()) + " files (" + std::to_string(ckpts) +
                    " checkpoints) from expert/train/certify reruns, " + std::to_string(differing) + " differ"};
}

}  // namespace

int main(int argc, char** argv) {
  unsetenv("IDRL_SEED");
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  auto wanted = [&](int k) { return only.empty() || only.count(k) > 0; };

  std::map<int, std::pair<std::string, std::function<Outcome()>>> criteria{
      {1, {"scope", disclaimer}},
      {2, {"bound certification", certification}},
      {3, {"exact oracles", exact_oracles}},
      {4, {"gradients vs finite differences", differentiation}},
      {5, {"reward identity at delta 0", identity}},
      {6, {"delay-free sanity", delay_free_sanity}},
      {9, {"occupancy matching", occupancy}},
      {10, {"determinism", determinism}},
  };
  std::unique_ptr<PendulumStudy> study;
  auto get_study = [&]() -> const PendulumStudy& {
    if (!study) study = std::make_unique<PendulumStudy>(run_pendulum_study(wanted(8)));
    return *study;
  };
  criteria[7] = {"end-to-end pendulum", [&] { return end_to_end(get_study()); }};
  criteria[8] = {"demonstration quantity trend", [&] { return quantity_trend(get_study()); }};

  int failed = 0;
  for (auto& [k, c] : criteria) {
    if (!wanted(k)) continue;
    Outcome o;
    try {
      o = c.second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("criterion %d %s: %s: %s\n", k, o.pass ? "PASS" : "FAIL", c.first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
