#include "binary_io.hpp"
#include "theory.hpp"
#include "training.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>

using namespace idrl;
namespace fs = std::filesystem;

namespace {

RunConfig small_config(const std::string& extra = "") {
  return parse_config(R"([run]
seed = 3
total_steps = 300
eval_interval = 100
eval_episodes = 2
warmup_steps = 100
batch_size = 16
[env]
id = "pendulum"
delay = 2
[agent]
actor_hidden = [16]
critic_hidden = [16]
[disc]
hidden = [16]
[bc]
hidden = [16]
epochs = 3
batch_size = 64
)" + extra,
                      false);
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("idrl_test_" + name)) {
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
};

// Pendulum controller acting on the state predicted by replaying the action
// window through the noise-free model.
Vec predictive_controller(const Env& env, const AugmentedState& x) {
  Vec s = x.obs;
  for (const auto& a : x.window) s = env.step(s, a, 0).next_state;
  return Vec::Constant(1, std::clamp(-(20.0 * s[0] + 5.0 * s[1]), -2.0, 2.0));
}

ExpertDataset collect(std::shared_ptr<const Env> env, int delay, int n, const DelayedPolicyFn& policy) {
  ExpertDataset ds;
  ds.header.env_id = env->spec().id;
  ds.header.delay = delay;
  ds.header.state_dim = env->spec().state_dim;
  ds.header.action_dim = env->spec().action_dim();
  DelayedEnv denv(env, delay);
  for (int ep = 0; ep < n; ++ep) {
    AugmentedState x = denv.reset(mix_seed(77, ep));
    DelayedTrajectory tr;
    while (!denv.done()) {
      tr.obs.push_back(x.obs);
      tr.actions.push_back(policy(x));
      x = denv.step(tr.actions.back(), ep).x;
    }
    tr.complete = true;
    tr.terminal = denv.terminal();
    if (!tr.terminal) tr.obs.push_back(x.obs);
    ds.trajectories.push_back(tr);
  }
  return ds;
}

// Pendulum whose reward is NaN everywhere.
class NanRewardEnv final : public Env {
 public:
  NanRewardEnv() : Env(make_env("pendulum")->spec()), inner_(make_env("pendulum")) {}
  Vec reset(std::uint64_t seed) const override { return inner_->reset(seed); }
  StepResult step(const Vec& s, const Vec& a, std::uint64_t seed) const override {
    StepResult r = inner_->step(s, a, seed);
    r.reward = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  double reward(const Vec&, const Vec&) const override { return std::numeric_limits<double>::quiet_NaN(); }
  LipschitzConstants lipschitz_constants() const override { return {}; }

 private:
  std::shared_ptr<const Env> inner_;
};

ExpertDataset pendulum_expert(int delay, int n) {
  const auto env = make_env("pendulum");
  return collect(env, delay, n, [&](const AugmentedState& x) { return predictive_controller(*env, x); });
}

}  // namespace

TEST_CASE("metrics csv round trip") {
  std::vector<MetricsRow> rows{{100, 1.0 / 3.0, 0.25, -1e-300, 2.0, -3.5, 1e300}, {200, 5, 0, 0, 0, 0, 0}};
  const std::string text = metrics_csv(rows);
  CHECK(text.rfind(std::string(kMetricsHeader) + "\n", 0) == 0);
  const auto back = parse_metrics_csv(text);
  REQUIRE(back.size() == 2);
  CHECK(back[0].eval_return_mean == rows[0].eval_return_mean);
  CHECK(back[0].disc_loss == rows[0].disc_loss);
  CHECK(back[0].reward_mean == rows[0].reward_mean);
  CHECK(metrics_csv(back) == text);
  CHECK_THROWS_AS(parse_metrics_csv("a,b\n1,2\n"), FormatError);
  CHECK_THROWS_AS(parse_metrics_csv(std::string(kMetricsHeader) + "\n1,2,3\n"), FormatError);
}

TEST_CASE("collector emits one record per revealed step") {
  const auto env = make_env("pointmass");
  for (int n : {1, 2}) {
    const auto layout = make_layout(env->spec(), 2, 2 - n, n);
    Collector c(env, layout, 5);
    Rng rng(1);
    std::vector<Vec> xs;
    std::vector<TransitionRecord> recs;
    while (c.episodes() == 0) {
      xs.push_back(c.current().flatten());
      for (auto& r : c.step(random_action(env->spec().action_space, rng))) recs.push_back(r);
    }
    // The time limit ends the episode, so the last n - 1 records are dropped.
    CHECK(xs.size() == 100);
    REQUIRE(recs.size() == 100 - (n - 1));
    for (std::size_t t = 0; t < recs.size(); ++t) {
      CHECK(recs[t].x == xs[t]);
      if (t + n < xs.size()) CHECK(recs[t].x_n == xs[t + n]);
    }
    CHECK(std::isfinite(c.last_return()));
  }
}

TEST_CASE("zero steps leave the initial agent and no metrics") {
  RunConfig cfg = small_config();
  cfg.total_steps = 0;
  const auto expert = pendulum_expert(2, 2);
  TempDir dir("zero");
  const auto a = train_idrl(cfg, expert, {dir.str()});
  const auto b = train_idrl(cfg, expert);
  CHECK(a.metrics.empty());
  CHECK(a.agent.actor.net().params() == b.agent.actor.net().params());
  CHECK(bin::read_file((dir.path / "metrics.csv").string()) == std::string(kMetricsHeader) + "\n");
  CHECK(fs::exists(dir.path / "resolved_config.toml"));
}

TEST_CASE("training is deterministic and resumable") {
  RunConfig cfg = small_config();
  cfg.total_steps = 400;
  cfg.checkpoint_interval = 200;
  const auto expert = pendulum_expert(2, 3);
  TempDir a("det_a"), b("det_b");
  const auto ra = train_idrl(cfg, expert, {a.str()});
  train_idrl(cfg, expert, {b.str()});
  const std::string metrics = bin::read_file((a.path / "metrics.csv").string());
  CHECK(metrics == bin::read_file((b.path / "metrics.csv").string()));
  CHECK(parse_metrics_csv(metrics).size() == 4);
  const std::string ckpt = "checkpoints/step_000000400.ckpt";
  CHECK(bin::read_file((a.path / ckpt).string()) == bin::read_file((b.path / ckpt).string()));
  for (const auto& r : ra.metrics) CHECK(std::isfinite(r.disc_loss));

  // Interrupt b after step 200 (an episode boundary) and resume.
  fs::remove(b.path / "checkpoints/step_000000400.ckpt");
  fs::remove(b.path / "checkpoints/step_000000400.state");
  TrainOptions resume{b.str()};
  resume.resume = true;
  const auto rb = train_idrl(cfg, expert, resume);
  CHECK(bin::read_file((b.path / "metrics.csv").string()) == metrics);
  CHECK(rb.agent.actor.net().params() == ra.agent.actor.net().params());

  // A changed config refuses to resume.
  RunConfig other = cfg;
  other.seed = 4;
  CHECK_THROWS_AS(train_idrl(other, expert, resume), ValidationError);
}

TEST_CASE("idrl never reads the true reward during training") {
  RunConfig cfg = small_config();
  cfg.eval_interval = 1000;  // no evaluation inside the run
  const auto expert = pendulum_expert(2, 3);
  TrainOptions nan_env;
  nan_env.env = std::make_shared<NanRewardEnv>();
  const auto a = train_idrl(cfg, expert, nan_env);
  const auto b = train_idrl(cfg, expert);
  for (const auto& m : a.agent.q1.params()) CHECK(m.allFinite());
  CHECK(a.agent.q1.params() == b.agent.q1.params());
  CHECK(a.agent.actor.net().params() == b.agent.actor.net().params());
  CHECK(a.disc.net().params() == b.disc.net().params());

  // True-reward training does read it and fails loudly.
  TempDir dir("nan");
  TrainOptions opt{dir.str()};
  opt.env = nan_env.env;
  try {
    train_true_reward(cfg, cfg.total_steps, opt);
    FAIL("expected a numerical error");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("at step 101") != std::string::npos);
  }
  CHECK(fs::exists(dir.path / "checkpoints/diagnostic.ckpt"));
}

TEST_CASE("idrl input checks") {
  RunConfig cfg = small_config();
  ExpertDataset ds = pendulum_expert(2, 1);
  ds.header.env_id = "pointmass";
  CHECK_THROWS_AS(train_idrl(cfg, ds), ValidationError);
  ExpertDataset wrong_delay = pendulum_expert(1, 1);
  CHECK_THROWS_AS(train_idrl(cfg, wrong_delay), ValidationError);
}

TEST_CASE("expert generation") {
  RunConfig cfg = small_config();
  cfg.expert.total_steps = 200;
  cfg.expert.trajectories = 4;
  const auto r = train_expert(cfg);
  CHECK(r.dataset.trajectories.size() == 4);
  CHECK(r.returns.size() == 4);
  CHECK(r.dataset.header.delay == 2);
  CHECK(decode_expert(encode_expert(r.dataset)).trajectories.size() == 4);
  CHECK_FALSE(augment_expert(r.dataset, make_layout(make_env("pendulum")->spec(), 2, 1, 1)).empty());
}

TEST_CASE("behavior cloning") {
  SUBCASE("zero epochs return the initial policy") {
    RunConfig cfg = small_config();
    cfg.bc.epochs = 0;
    const auto a = train_bc(cfg, pendulum_expert(2, 2), BcMode::Augmented);
    const auto b = train_bc(cfg, pendulum_expert(2, 5), BcMode::Augmented);
    CHECK(a.metrics.empty());
    CHECK(a.policy.net().params() == b.policy.net().params());
  }

  SUBCASE("augmented bc reproduces a tabular expert") {
    const RunConfig cfg = parse_config(R"([run]
seed = 1
eval_episodes = 1
[env]
id = "chain"
delay = 1
[bc]
hidden = [32]
epochs = 40
batch_size = 32
lr = 0.01
)",
                       false);
    const auto env = make_env("chain");
    const TabularMDP& mdp = *env->tabular();
    const auto d = make_delayed_tabular(mdp, 1, 0.9);
    const Mat q = value_iteration(d, d.delayed_reward).q;
    auto expert_action = [&](const AugmentedState& x) {
      Vec row = q.row(d.idx.index(x)).transpose();
      return one_hot(argmax(row), mdp.n_actions);
    };
    const auto data = collect(env, 1, 40, expert_action);
    TempDir dir("bc");
    const auto bc = train_bc(cfg, data, BcMode::Augmented, {dir.str()});
    long agree = 0, total = 0;
    for (const auto& tr : data.trajectories)
      for (int t = 0; t < tr.length(); ++t) {
        AugmentedState x;
        x.obs = tr.obs[t];
        x.window = {t == 0 ? one_hot(0, mdp.n_actions) : tr.actions[t - 1]};
        agree += argmax(bc_act(bc.policy, BcMode::Augmented, x)) == argmax(tr.actions[t]);
        ++total;
      }
    CHECK(agree >= 0.99 * total);

    const auto loaded = load_bc(cfg, load_checkpoint((dir.path / "checkpoints/bc.ckpt").string()));
    CHECK(loaded.mode == BcMode::Augmented);
    CHECK(loaded.policy.net().params() == bc.policy.net().params());
    CHECK(parse_metrics_csv(bin::read_file((dir.path / "metrics.csv").string())).size() == 40);
  }

  SUBCASE("bc fits a delayed pendulum controller") {
    const int delay = 4;
    const RunConfig cfg = parse_config(R"([run]
seed = 2
eval_episodes = 5
[env]
id = "pendulum"
delay = 4
[bc]
hidden = [32, 32]
epochs = 15
batch_size = 64
)",
                                       false);
    const auto env = make_env("pendulum");
    const auto data = pendulum_expert(delay, 20);
    const auto expert = evaluate(
        env, delay, [&](const AugmentedState& x) { return predictive_controller(*env, x); }, 5, eval_seed(cfg));
    CHECK(expert.mean > 150.0);
    for (BcMode mode : {BcMode::Augmented, BcMode::DelayedObs}) {
      const auto bc = train_bc(cfg, data, mode);
      REQUIRE(bc.metrics.size() == 15);
      CHECK(bc.metrics.back().actor_loss < 0.5 * bc.metrics.front().actor_loss);
      for (const auto& p : bc.policy.net().params()) CHECK(p.allFinite());
    }
    // Observed 162 for the delayed-observation policy; augmented BC copies
    // the last action in the window and falls over.
    CHECK(train_bc(cfg, data, BcMode::DelayedObs).final_eval.mean > 100.0);
  }
}

TEST_CASE("learned chain reward satisfies the reward bound") {
  const RunConfig cfg = parse_config(R"([run]
seed = 4
total_steps = 1500
eval_interval = 1500
eval_episodes = 1
warmup_steps = 300
batch_size = 32
[env]
id = "chain"
delay = 1
[agent]
actor_hidden = [16]
critic_hidden = [16]
[disc]
hidden = [16]
)",
                                     false);
  const auto env = make_env("chain");
  const TabularMDP& m = *env->tabular();
  const auto data = collect(env, 1, 10, [](const AugmentedState&) { return one_hot(1, 2); });
  const auto r = train_idrl(cfg, data);
  // R_θ(s, zero window, a) as a state-action table.
  Mat table(m.n_states, m.n_actions);
  for (int s = 0; s < m.n_states; ++s)
    for (int a = 0; a < m.n_actions; ++a) {
      AugmentedState x;
      x.obs = one_hot(s, m.n_states);
      x.window = {one_hot(0, m.n_actions)};
      Mat in(1, m.n_states + 2 * m.n_actions);
      in << x.flatten().transpose(), one_hot(a, m.n_actions).transpose();
      table(s, a) = r.disc.reward_net(in)[0];
    }
  CHECK(table.allFinite());
  CHECK(table.maxCoeff() - table.minCoeff() > 0.0);
  const auto certs = certify_reward_bound(m, 1, table);
  CHECK(certs.size() == static_cast<std::size_t>(m.n_states * m.n_actions * m.n_actions));
  for (const auto& c : certs) CHECK(c.pass);
}
