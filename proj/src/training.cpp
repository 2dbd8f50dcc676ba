#include "training.hpp"

#include "binary_io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

namespace fs = std::filesystem;

namespace idrl {

// ---------------------------------------------------------------- metrics

std::string metrics_csv_row(const MetricsRow& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%ld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.step, r.eval_return_mean,
                r.eval_return_std, r.disc_loss, r.critic_loss, r.actor_loss, r.reward_mean);
  return buf;
}

std::string metrics_csv(const std::vector<MetricsRow>& rows) {
  std::string out = std::string(kMetricsHeader) + "\n";
  for (const auto& r : rows) out += metrics_csv_row(r);
  return out;
}

std::vector<MetricsRow> parse_metrics_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("step,eval_return_mean,eval_return_std", 0) != 0)
    throw FormatError("metrics.csv", "missing or unexpected header");
  std::vector<MetricsRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> v;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      v.push_back(std::strtod(cell.c_str(), &end));
      if (cell.empty() || *end != '\0') throw FormatError("metrics.csv", "bad number on line " + std::to_string(lineno));
    }
    if (v.size() != 7) throw FormatError("metrics.csv", "expected 7 columns on line " + std::to_string(lineno));
    rows.push_back({static_cast<long>(v[0]), v[1], v[2], v[3], v[4], v[5], v[6]});
  }
  return rows;
}

// ---------------------------------------------------------------- evaluation

EvalResult evaluate(std::shared_ptr<const Env> env, int delay, const DelayedPolicyFn& policy, int episodes,
                    std::uint64_t seed) {
  if (episodes < 1) throw ValidationError("evaluation needs at least one episode");
  EvalResult r;
  DelayedEnv denv(env, delay);
  for (int ep = 0; ep < episodes; ++ep) {
    const std::uint64_t ep_seed = mix_seed(seed, static_cast<std::uint64_t>(ep));
    AugmentedState x = denv.reset(ep_seed);
    Rng noise(mix_seed(ep_seed, 0x5eed));
    double ret = 0.0;
    while (!denv.done()) {
      const DelayedStep st = denv.step(policy(x), noise());
      ret += st.reward;
      x = st.x;
    }
    r.returns.push_back(ret);
  }
  const double n = static_cast<double>(episodes);
  r.mean = std::accumulate(r.returns.begin(), r.returns.end(), 0.0) / n;
  double var = 0.0;
  for (double v : r.returns) var += (v - r.mean) * (v - r.mean);
  r.std = std::sqrt(var / n);
  return r;
}

// ---------------------------------------------------------------- collector

Vec random_action(const ActionSpace& space, Rng& rng) {
  if (space.is_discrete()) return one_hot(std::uniform_int_distribution<int>(0, space.dim - 1)(rng), space.dim);
  Vec a(space.dim);
  for (int i = 0; i < space.dim; ++i) a[i] = space.low[i] + (space.high[i] - space.low[i]) * uniform01(rng);
  return a;
}

Collector::Collector(std::shared_ptr<const Env> env, const AugmentLayout& layout, std::uint64_t seed)
    : env_(env), layout_(layout), seed_(seed), denv_(env, layout.delay) {}

void Collector::restart(long episodes) {
  episodes_ = episodes;
  active_ = false;
}

void Collector::begin() {
  const std::uint64_t ep_seed = mix_seed(seed_, static_cast<std::uint64_t>(episodes_));
  traj_ = {};
  traj_.obs.push_back(denv_.reset(ep_seed).obs);
  for (const auto& s : denv_.pending()) traj_.obs.push_back(s);
  noise_.seed(mix_seed(ep_seed, 0x5eed));
  return_ = 0.0;
  active_ = true;
}

const AugmentedState& Collector::current() {
  while (!active_ || denv_.done()) {
    if (active_) {  // episode ended during padding
      ++episodes_;
      active_ = false;
    }
    begin();
  }
  return denv_.current();
}

std::vector<TransitionRecord> Collector::step(const Vec& action) {
  current();
  const DelayedStep st = denv_.step(action, noise_());
  traj_.actions.push_back(env_->conform_action(action));
  traj_.rewards.push_back(st.reward);
  traj_.obs.push_back(denv_.true_state());
  return_ += st.reward;
  std::vector<TransitionRecord> out;
  const int len = traj_.length();
  if (st.done) {
    traj_.complete = true;
    traj_.terminal = st.terminal;
    for (int t = std::max(0, len - layout_.n); t < len; ++t)
      if (auto r = try_build_record(traj_, layout_, t)) out.push_back(std::move(*r));
    last_return_ = return_;
    ++episodes_;
    active_ = false;
  } else if (len - layout_.n >= 0) {
    if (auto r = try_build_record(traj_, layout_, len - layout_.n)) out.push_back(std::move(*r));
  }
  return out;
}

// ---------------------------------------------------------------- shared loop

namespace {

enum Stream : std::uint64_t { kTrainRng = 1, kCollect = 2, kEval = 3, kAgentInit = 4, kDiscInit = 5, kRollout = 6 };

AugmentLayout layout_for(const RunConfig& cfg, const Env& env) {
  return make_layout(env.spec(), cfg.delay, cfg.delay_tau, cfg.n_step);
}

AuxDelayAgent make_agent(const RunConfig& cfg, const Env& env) {
  Rng init(mix_seed(cfg.seed, kAgentInit));
  return AuxDelayAgent(layout_for(cfg, env), env.spec().action_space, cfg.agent, init);
}

std::string hexd(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

class Loop {
 public:
  Loop(const RunConfig& cfg, const TrainOptions& opt, const StateActionPairs* expert)
      : cfg_(cfg),
        opt_(opt),
        env_(opt.env ? opt.env : make_env(cfg.env_id, cfg.env_params)),
        layout_(layout_for(cfg, *env_)),
        agent_(make_agent(cfg, *env_)),
        buffer_(static_cast<std::size_t>(cfg.buffer_capacity)),
        collector_(env_, layout_, mix_seed(cfg.seed, kCollect)),
        rng_(mix_seed(cfg.seed, kTrainRng)),
        expert_(expert) {
    if (expert_) {
      Rng init(mix_seed(cfg.seed, kDiscInit));
      disc_ = Discriminator(layout_.disc_dim(), cfg.disc, init);
      if (expert_->xa.rows() == 0) throw ValidationError("expert dataset contains no transitions");
    }
  }

  void run(long total_steps) {
    prepare_output();
    try {
      while (step_ < total_steps) {
        ++step_;
        env_step();
        if (step_ > cfg_.warmup_steps && buffer_.size() > 0) {
          if (expert_)
            for (int k = 0; k < cfg_.disc_updates; ++k) disc_update();
          for (int k = 0; k < cfg_.policy_updates; ++k) policy_update();
        }
        if (step_ % cfg_.eval_interval == 0) record_eval();
        if (!opt_.out_dir.empty() && cfg_.checkpoint_interval > 0 && step_ % cfg_.checkpoint_interval == 0)
          save_state();
      }
    } catch (const NumericalError& e) {
      if (!opt_.out_dir.empty()) save_checkpoint(checkpoint_dir() / "diagnostic.ckpt", checkpoint());
      throw NumericalError(std::string(e.what()) + " at step " + std::to_string(step_));
    }
    if (!opt_.out_dir.empty() && !fs::exists(state_path(step_))) save_state();
  }

  AuxDelayAgent& agent() { return agent_; }
  Discriminator& disc() { return disc_; }
  std::vector<MetricsRow>& metrics() { return metrics_; }
  const AugmentLayout& layout() const { return layout_; }
  std::shared_ptr<const Env> env() const { return env_; }

 private:
  fs::path checkpoint_dir() const { return fs::path(opt_.out_dir) / "checkpoints"; }
  fs::path state_path(long step) const {
    char name[64];
    std::snprintf(name, sizeof name, "step_%09ld.state", step);
    return checkpoint_dir() / name;
  }
  fs::path ckpt_path(long step) const {
    char name[64];
    std::snprintf(name, sizeof name, "step_%09ld.ckpt", step);
    return checkpoint_dir() / name;
  }

  void prepare_output() {
    if (opt_.out_dir.empty()) return;
    std::error_code ec;
    fs::create_directories(checkpoint_dir(), ec);
    if (ec) throw IoError("cannot create run directory " + opt_.out_dir + ": " + ec.message());
    const fs::path resolved = fs::path(opt_.out_dir) / "resolved_config.toml";
    const std::string toml = cfg_.to_toml();
    const fs::path metrics = fs::path(opt_.out_dir) / "metrics.csv";
    if (opt_.resume) {
      if (fs::exists(resolved) && bin::read_file(resolved.string()) != toml)
        throw ValidationError("resume: config differs from " + resolved.string());
      long latest = -1;
      for (const auto& e : fs::directory_iterator(checkpoint_dir())) {
        const std::string n = e.path().filename().string();
        if (n.rfind("step_", 0) == 0 && e.path().extension() == ".state")
          latest = std::max(latest, std::stol(n.substr(5, n.size() - 11)));
      }
      if (latest >= 0) {
        load_state(latest);
        std::vector<MetricsRow> kept;
        if (fs::exists(metrics))
          for (const auto& r : parse_metrics_csv(bin::read_file(metrics.string())))
            if (r.step <= step_) kept.push_back(r);
        metrics_ = kept;
        bin::write_file(metrics.string(), metrics_csv(metrics_));
        return;
      }
    }
    bin::write_file(resolved.string(), toml);
    bin::write_file(metrics.string(), std::string(kMetricsHeader) + "\n");
  }

  Checkpoint checkpoint() const {
    Checkpoint c;
    c.add_scalar("step", static_cast<double>(step_));
    agent_.save(c, "agent");
    if (expert_) {
      c.add_params("disc.net", disc_.net().params());
      c.add_adam("disc.adam", disc_.adam());
    }
    buffer_.save(c, "buffer");
    return c;
  }

  void save_state() {
    save_checkpoint(ckpt_path(step_).string(), checkpoint());
    std::ostringstream s;
    s << "step " << step_ << "\n"
      << "episodes " << collector_.episodes() << "\n"
      << "acc " << hexd(acc_disc_) << ' ' << hexd(acc_critic_) << ' ' << hexd(acc_actor_) << ' ' << hexd(acc_reward_)
      << ' ' << n_disc_ << ' ' << n_policy_ << "\n"
      << "rng " << rng_ << "\n";
    bin::write_file(state_path(step_).string(), s.str());
  }

  void load_state(long step) {
    const Checkpoint c = load_checkpoint(ckpt_path(step).string());
    agent_.load(c, "agent");
    if (expert_) {
      c.load_params("disc.net", disc_.net().params());
      c.load_adam("disc.adam", disc_.adam());
    }
    buffer_.load(c, "buffer");
    std::istringstream s(bin::read_file(state_path(step).string()));
    std::string key, a, b, cc, d;
    long episodes = 0;
    s >> key >> step_ >> key >> episodes >> key >> a >> b >> cc >> d >> n_disc_ >> n_policy_ >> key >> rng_;
    if (!s || key != "rng") throw FormatError(state_path(step).string(), "malformed run state");
    acc_disc_ = std::strtod(a.c_str(), nullptr);
    acc_critic_ = std::strtod(b.c_str(), nullptr);
    acc_actor_ = std::strtod(cc.c_str(), nullptr);
    acc_reward_ = std::strtod(d.c_str(), nullptr);
    collector_.restart(episodes);
  }

  void env_step() {
    const AugmentedState& x = collector_.current();
    Vec action;
    if (step_ <= cfg_.warmup_steps) {
      action = random_action(env_->spec().action_space, rng_);
    } else {
      action = agent_.act(x.flatten().transpose(), false, rng_).row(0).transpose();
    }
    for (auto& r : collector_.step(action)) {
      if (expert_) {  // the learned reward fills r_seq at update time
        r.true_rewards.setZero();
        r.r_seq.setZero();
      }
      buffer_.push(std::move(r));
    }
  }

  Vec policy_logp(const Mat& xa) const {
    return agent_.actor.log_prob(xa.leftCols(layout_.x_dim()), xa.rightCols(layout_.action_dim)).col(0);
  }

  void disc_update() {
    const auto b = static_cast<std::size_t>(cfg_.batch_size);
    std::uniform_int_distribution<Eigen::Index> pick(0, expert_->xa.rows() - 1);
    Mat exp_xa(cfg_.batch_size, layout_.disc_dim());
    for (Eigen::Index i = 0; i < exp_xa.rows(); ++i) exp_xa.row(i) = expert_->xa.row(pick(rng_));
    const Batch gen = gather(buffer_, buffer_.sample_indices(b, rng_));
    Mat gen_xa(gen.x.rows(), layout_.disc_dim());
    gen_xa << gen.x, gen.a;
    const auto l = disc_.update(exp_xa, policy_logp(exp_xa), gen_xa, policy_logp(gen_xa), rng_);
    acc_disc_ += l.total;
    ++n_disc_;
  }

  void policy_update() {
    Batch batch = gather(buffer_, buffer_.sample_indices(static_cast<std::size_t>(cfg_.batch_size), rng_));
    if (expert_) {
      // θ is frozen here: the rewards are computed once into this batch copy.
      const Vec r = disc_.reward(batch.step_inputs, policy_logp(batch.step_inputs));
      const Eigen::Index n = batch.r.cols();
      for (Eigen::Index i = 0; i < batch.r.rows(); ++i)
        for (Eigen::Index k = 0; k < n; ++k) batch.r(i, k) = batch.step_mask(i, k) * r[i * n + k];
      const double valid = batch.step_mask.sum();
      if (valid > 0) acc_reward_ += batch.r.sum() / valid;
    } else {
      acc_reward_ += batch.r.col(0).mean();
    }
    const auto s = agent_.update(batch, rng_);
    acc_critic_ += s.critic_loss;
    acc_actor_ += s.actor_loss;
    ++n_policy_;
  }

  void record_eval() {
    const AuxDelayAgent& agent = agent_;
    auto act = [&](const AugmentedState& x) -> Vec {
      return agent.actor.deterministic_action(x.flatten().transpose()).row(0).transpose();
    };
    const EvalResult e = evaluate(env_, layout_.delay, act, cfg_.eval_episodes, mix_seed(cfg_.seed, kEval));
    MetricsRow row;
    row.step = step_;
    row.eval_return_mean = e.mean;
    row.eval_return_std = e.std;
    row.disc_loss = n_disc_ ? acc_disc_ / static_cast<double>(n_disc_) : 0.0;
    row.critic_loss = n_policy_ ? acc_critic_ / static_cast<double>(n_policy_) : 0.0;
    row.actor_loss = n_policy_ ? acc_actor_ / static_cast<double>(n_policy_) : 0.0;
    row.reward_mean = n_policy_ ? acc_reward_ / static_cast<double>(n_policy_) : 0.0;
    acc_disc_ = acc_critic_ = acc_actor_ = acc_reward_ = 0.0;
    n_disc_ = n_policy_ = 0;
    metrics_.push_back(row);
    if (!opt_.out_dir.empty()) {
      std::ofstream f(fs::path(opt_.out_dir) / "metrics.csv", std::ios::app | std::ios::binary);
      f << metrics_csv_row(row);
      if (!f) throw IoError("cannot append to metrics.csv in " + opt_.out_dir);
    }
    if (opt_.on_eval) opt_.on_eval(row);
  }

  const RunConfig& cfg_;
  const TrainOptions& opt_;
  std::shared_ptr<const Env> env_;
  AugmentLayout layout_;
  AuxDelayAgent agent_;
  Discriminator disc_;
  ReplayBuffer buffer_;
  Collector collector_;
  Rng rng_;
  const StateActionPairs* expert_;
  long step_ = 0;
  std::vector<MetricsRow> metrics_;
  double acc_disc_ = 0.0, acc_critic_ = 0.0, acc_actor_ = 0.0, acc_reward_ = 0.0;
  long n_disc_ = 0, n_policy_ = 0;
};

}  // namespace

namespace {

std::shared_ptr<const Env> run_env(const RunConfig& cfg, const TrainOptions& opt) {
  return opt.env ? opt.env : make_env(cfg.env_id, cfg.env_params);
}

}  // namespace

IdrlResult train_idrl(const RunConfig& cfg, const ExpertDataset& expert, const TrainOptions& opt) {
  const auto env = run_env(cfg, opt);
  if (expert.header.env_id != cfg.env_id)
    throw ValidationError("expert dataset was generated on '" + expert.header.env_id + "', run uses '" + cfg.env_id +
                          "'");
  const StateActionPairs pairs = expert_pairs(expert, layout_for(cfg, *env));
  Loop loop(cfg, opt, &pairs);
  loop.run(cfg.total_steps);
  return {loop.agent(), loop.disc(), loop.metrics()};
}

SacResult train_true_reward(const RunConfig& cfg, long total_steps, const TrainOptions& opt) {
  Loop loop(cfg, opt, nullptr);
  loop.run(total_steps);
  return {loop.agent(), loop.metrics()};
}

ExpertDataset rollout_dataset(const AuxDelayAgent& agent, std::shared_ptr<const Env> env, int delay, int trajectories,
                              bool deterministic, std::uint64_t seed, std::vector<double>* returns) {
  if (trajectories < 1) throw ValidationError("at least one trajectory required");
  ExpertDataset ds;
  ds.header.env_id = env->spec().id;
  ds.header.delay = static_cast<std::uint32_t>(delay);
  ds.header.state_dim = static_cast<std::uint32_t>(env->spec().state_dim);
  ds.header.action_dim = static_cast<std::uint32_t>(env->spec().action_dim());
  if (returns) returns->clear();
  DelayedEnv denv(env, delay);
  Rng act_rng(mix_seed(seed, 0xac7));
  for (std::uint64_t ep = 0; static_cast<int>(ds.trajectories.size()) < trajectories; ++ep) {
    if (ep > 100ULL * static_cast<std::uint64_t>(trajectories))
      throw std::runtime_error("rollout: episodes keep terminating before the first action");
    const std::uint64_t ep_seed = mix_seed(seed, ep);
    AugmentedState x = denv.reset(ep_seed);
    if (denv.done()) continue;
    Rng noise(mix_seed(ep_seed, 0x5eed));
    DelayedTrajectory tr;
    double ret = 0.0;
    while (!denv.done()) {
      tr.obs.push_back(x.obs);
      const Vec a = agent.act(x.flatten().transpose(), deterministic, act_rng).row(0).transpose();
      const DelayedStep st = denv.step(a, noise());
      tr.actions.push_back(env->conform_action(a));
      ret += st.reward;
      x = st.x;
    }
    tr.complete = true;
    tr.terminal = denv.terminal();
    if (!tr.terminal) tr.obs.push_back(x.obs);
    ds.trajectories.push_back(std::move(tr));
    if (returns) returns->push_back(ret);
  }
  return ds;
}

ExpertResult train_expert(const RunConfig& cfg, const TrainOptions& opt) {
  SacResult sac = train_true_reward(cfg, cfg.expert.total_steps, opt);
  const auto env = run_env(cfg, opt);
  ExpertResult r;
  r.dataset = rollout_dataset(sac.agent, env, cfg.delay, cfg.expert.trajectories, cfg.expert.deterministic,
                              mix_seed(cfg.seed, kRollout), &r.returns);
  r.agent = std::move(sac.agent);
  r.metrics = std::move(sac.metrics);
  return r;
}

// ---------------------------------------------------------------- behavior cloning

Vec bc_act(const Policy& policy, BcMode mode, const AugmentedState& x) {
  const Vec in = mode == BcMode::Augmented ? x.flatten() : x.obs;
  return policy.deterministic_action(in.transpose()).row(0).transpose();
}

BcResult train_bc(const RunConfig& cfg, const ExpertDataset& expert, BcMode mode, const TrainOptions& opt) {
  const auto env = run_env(cfg, opt);
  if (expert.header.env_id != cfg.env_id)
    throw ValidationError("expert dataset was generated on '" + expert.header.env_id + "', run uses '" + cfg.env_id +
                          "'");
  const AugmentLayout layout = layout_for(cfg, *env);
  const StateActionPairs pairs = expert_pairs(expert, layout);
  if (pairs.x.rows() == 0) throw ValidationError("expert dataset contains no transitions");
  const Mat inputs = mode == BcMode::Augmented ? pairs.x : Mat(pairs.x.leftCols(layout.state_dim));

  Rng rng(mix_seed(cfg.seed, kAgentInit));
  BcResult r;
  r.mode = mode;
  r.policy = Policy(static_cast<int>(inputs.cols()), env->spec().action_space, cfg.bc.hidden, rng, cfg.agent.squash);
  AdamState adam;

  std::string metrics_path;
  if (!opt.out_dir.empty()) {
    std::error_code ec;
    fs::create_directories(opt.out_dir, ec);
    if (ec) throw IoError("cannot create run directory " + opt.out_dir + ": " + ec.message());
    bin::write_file((fs::path(opt.out_dir) / "resolved_config.toml").string(), cfg.to_toml());
    metrics_path = (fs::path(opt.out_dir) / "metrics.csv").string();
  }
  auto eval_now = [&] {
    return evaluate(
        env, cfg.delay, [&](const AugmentedState& x) { return bc_act(r.policy, mode, x); }, cfg.eval_episodes,
        mix_seed(cfg.seed, kEval));
  };

  std::vector<Eigen::Index> order(static_cast<std::size_t>(inputs.rows()));
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 1; epoch <= cfg.bc.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.bc.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.bc.batch_size));
      Mat xb(static_cast<Eigen::Index>(end - start), inputs.cols());
      Mat ab(xb.rows(), pairs.a.cols());
      for (std::size_t i = start; i < end; ++i) {
        xb.row(static_cast<Eigen::Index>(i - start)) = inputs.row(order[i]);
        ab.row(static_cast<Eigen::Index>(i - start)) = pairs.a.row(order[i]);
      }
      ad::Tape tape;
      auto params = r.policy.net().bind(tape, true);
      ad::Var nll = ad::neg(ad::mean(r.policy.log_prob(params, tape.constant(xb), ab)));
      if (!std::isfinite(nll.scalar())) throw NumericalError("behavior cloning loss is not finite");
      std::vector<Mat> grads;
      for (const auto& g : tape.grad(nll, params)) grads.push_back(g.value());
      adam_step(adam, r.policy.net().params(), grads, cfg.bc.lr);
      loss_sum += nll.scalar();
      ++batches;
    }
    const EvalResult e = eval_now();
    MetricsRow row;
    row.step = epoch;
    row.eval_return_mean = e.mean;
    row.eval_return_std = e.std;
    row.actor_loss = loss_sum / batches;
    r.metrics.push_back(row);
    if (opt.on_eval) opt.on_eval(row);
  }
  r.final_eval = eval_now();
  if (!metrics_path.empty()) {
    bin::write_file(metrics_path, metrics_csv(r.metrics));
    fs::create_directories(fs::path(opt.out_dir) / "checkpoints");
    Checkpoint c;
    c.add_scalar("bc.mode", mode == BcMode::Augmented ? 1.0 : 0.0);
    c.add_params("bc.policy", r.policy.net().params());
    save_checkpoint((fs::path(opt.out_dir) / "checkpoints" / "bc.ckpt").string(), c);
  }
  return r;
}

BcResult load_bc(const RunConfig& cfg, const Checkpoint& ckpt) {
  const auto env = make_env(cfg.env_id, cfg.env_params);
  const AugmentLayout layout = layout_for(cfg, *env);
  BcResult r;
  r.mode = ckpt.get_scalar("bc.mode") > 0.5 ? BcMode::Augmented : BcMode::DelayedObs;
  const int in = r.mode == BcMode::Augmented ? layout.x_dim() : layout.state_dim;
  Rng rng(0);
  r.policy = Policy(in, env->spec().action_space, cfg.bc.hidden, rng, cfg.agent.squash);
  ckpt.load_params("bc.policy", r.policy.net().params());
  return r;
}

std::uint64_t eval_seed(const RunConfig& cfg) { return mix_seed(cfg.seed, kEval); }

AuxDelayAgent load_agent(const RunConfig& cfg, const std::string& checkpoint_path) {
  const auto env = make_env(cfg.env_id, cfg.env_params);
  AuxDelayAgent agent = make_agent(cfg, *env);
  agent.load(load_checkpoint(checkpoint_path), "agent");
  return agent;
}

}  // namespace idrl
