#include "data.hpp"

#include "binary_io.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace idrl {

void AugmentLayout::validate() const {
  if (state_dim < 1 || action_dim < 1) throw ValidationError("state and action dims must be positive");
  if (delay < 0 || delay_tau < 0) throw ValidationError("delays must be >= 0");
  if (delay_tau > delay)
    throw ValidationError("auxiliary delay " + std::to_string(delay_tau) + " exceeds delay " + std::to_string(delay));
  if (n < 1) throw ValidationError("n-step horizon must be >= 1");
  if (zero_action.size() != action_dim) throw ValidationError("padding action has the wrong dimension");
}

AugmentLayout make_layout(const EnvSpec& spec, int delay, int delay_tau, int n) {
  AugmentLayout l{spec.state_dim, spec.action_dim(), delay, delay_tau, n, spec.action_space.zero_action()};
  l.validate();
  return l;
}

AugmentedState AugmentLayout::split(const Vec& flat, int d) const {
  if (flat.size() != state_dim + d * action_dim) throw ValidationError("flattened state has the wrong length");
  AugmentedState x;
  x.obs = flat.head(state_dim);
  for (int i = 0; i < d; ++i) x.window.push_back(flat.segment(state_dim + i * action_dim, action_dim));
  return x;
}

// ---------------------------------------------------------------- records

namespace {

class Timeline {
 public:
  Timeline(const DelayedTrajectory& tr, const AugmentLayout& l) : tr_(tr), l_(l) {}

  const Vec& action(int k) const { return k < 0 ? l_.zero_action : tr_.actions[k]; }

  // (s_{k-d}, a_{k-d}, ..., a_{k-1}); s_{k-d} lives at obs[k + Δ - d].
  std::optional<Vec> state(int k, int d) const {
    const int o = k + l_.delay - d;
    if (o < 0 || o >= static_cast<int>(tr_.obs.size())) return std::nullopt;
    Vec out(l_.state_dim + d * l_.action_dim);
    out.head(l_.state_dim) = tr_.obs[o];
    for (int i = 0; i < d; ++i) out.segment(l_.state_dim + i * l_.action_dim, l_.action_dim) = action(k - d + i);
    return out;
  }

 private:
  const DelayedTrajectory& tr_;
  const AugmentLayout& l_;
};

}  // namespace

std::optional<TransitionRecord> try_build_record(const DelayedTrajectory& traj, const AugmentLayout& layout, int t) {
  const int len = traj.length();
  if (t < 0 || t >= len) return std::nullopt;
  const Timeline tl(traj, layout);
  auto x = tl.state(t, layout.delay);
  auto x_tau = tl.state(t, layout.delay_tau);
  if (!x || !x_tau) return std::nullopt;

  TransitionRecord r;
  r.x = std::move(*x);
  r.x_tau = std::move(*x_tau);
  r.a = traj.actions[t];
  const int end = t + layout.n;
  const bool terminal_end = traj.complete && traj.terminal;
  if (end > len) {
    if (!terminal_end) return std::nullopt;
    r.done = true;
  } else {
    r.done = terminal_end && end == len;
    auto x_n = tl.state(end, layout.delay);
    auto x_tau_n = tl.state(end, layout.delay_tau);
    if (x_n && x_tau_n) {
      r.x_n = std::move(*x_n);
      r.x_tau_n = std::move(*x_tau_n);
    } else if (!r.done) {
      return std::nullopt;
    }
  }
  if (r.done && r.x_n.size() == 0) {
    // placeholders; a terminal record never bootstraps
    r.x_n = r.x;
    r.x_tau_n = r.x_tau;
  }

  r.n_valid = std::min(layout.n, len - t);
  r.step_inputs = Mat::Zero(layout.n, layout.disc_dim());
  r.true_rewards = Vec::Zero(layout.n);
  for (int i = 0; i < r.n_valid; ++i) {
    auto xi = tl.state(t + i, layout.delay);
    if (!xi) return std::nullopt;
    r.step_inputs.row(i).head(layout.x_dim()) = xi->transpose();
    r.step_inputs.row(i).tail(layout.action_dim) = traj.actions[t + i].transpose();
    if (static_cast<int>(traj.rewards.size()) > t + i) r.true_rewards[i] = traj.rewards[t + i];
  }
  r.r_seq = r.true_rewards;
  return r;
}

std::vector<TransitionRecord> build_records(const DelayedTrajectory& traj, const AugmentLayout& layout) {
  std::vector<TransitionRecord> out;
  for (int t = 0; t < traj.length(); ++t)
    if (auto r = try_build_record(traj, layout, t)) out.push_back(std::move(*r));
  return out;
}

// ---------------------------------------------------------------- replay

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ValidationError("replay capacity must be positive");
}

void ReplayBuffer::push(TransitionRecord r) {
  if (data_.size() < capacity_) {
    data_.push_back(std::move(r));
  } else {
    data_[head_] = std::move(r);
    head_ = (head_ + 1) % capacity_;
  }
  ++inserted_;
}

const TransitionRecord& ReplayBuffer::at(std::size_t i) const {
  if (i >= data_.size()) throw ValidationError("replay index out of range");
  return data_[(head_ + i) % data_.size()];
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t batch, Rng& rng) const {
  if (data_.empty()) throw ValidationError("cannot sample from an empty buffer");
  std::uniform_int_distribution<std::size_t> pick(0, data_.size() - 1);
  std::vector<std::size_t> idx(batch);
  for (auto& i : idx) i = pick(rng);
  return idx;
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t batch, std::uint64_t seed) const {
  Rng rng(seed);
  return sample_indices(batch, rng);
}

void ReplayBuffer::save(Checkpoint& ckpt, const std::string& prefix) const {
  ckpt.add_scalar(prefix + ".capacity", static_cast<double>(capacity_));
  ckpt.add_scalar(prefix + ".inserted", static_cast<double>(inserted_));
  ckpt.add_scalar(prefix + ".size", static_cast<double>(data_.size()));
  if (data_.empty()) return;
  const auto& f = data_.front();
  const Eigen::Index n = f.r_seq.size();
  const Eigen::Index din = f.step_inputs.cols();
  const Eigen::Index rows = static_cast<Eigen::Index>(data_.size());
  Mat x(rows, f.x.size()), xt(rows, f.x_tau.size()), a(rows, f.a.size()), r(rows, n), xn(rows, f.x_n.size()),
      xtn(rows, f.x_tau_n.size()), flags(rows, 2), steps(rows, n * din), tr(rows, n);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& rec = at(static_cast<std::size_t>(i));
    x.row(i) = rec.x.transpose();
    xt.row(i) = rec.x_tau.transpose();
    a.row(i) = rec.a.transpose();
    r.row(i) = rec.r_seq.transpose();
    xn.row(i) = rec.x_n.transpose();
    xtn.row(i) = rec.x_tau_n.transpose();
    flags(i, 0) = rec.done ? 1.0 : 0.0;
    flags(i, 1) = rec.n_valid;
    steps.row(i) = Eigen::Map<const Eigen::RowVectorXd>(rec.step_inputs.data(), n * din);
    tr.row(i) = rec.true_rewards.transpose();
  }
  ckpt.add(prefix + ".x", x);
  ckpt.add(prefix + ".x_tau", xt);
  ckpt.add(prefix + ".a", a);
  ckpt.add(prefix + ".r_seq", r);
  ckpt.add(prefix + ".x_n", xn);
  ckpt.add(prefix + ".x_tau_n", xtn);
  ckpt.add(prefix + ".flags", flags);
  ckpt.add(prefix + ".step_inputs", steps);
  ckpt.add(prefix + ".true_rewards", tr);
}

void ReplayBuffer::load(const Checkpoint& ckpt, const std::string& prefix) {
  const auto cap = static_cast<std::size_t>(ckpt.get_scalar(prefix + ".capacity"));
  if (cap != capacity_)
    throw ValidationError("checkpoint buffer capacity " + std::to_string(cap) + " differs from configured " +
                          std::to_string(capacity_));
  data_.clear();
  head_ = 0;
  const auto size = static_cast<std::size_t>(ckpt.get_scalar(prefix + ".size"));
  if (size > 0) {
    const Mat& x = ckpt.get(prefix + ".x");
    const Mat& xt = ckpt.get(prefix + ".x_tau");
    const Mat& a = ckpt.get(prefix + ".a");
    const Mat& r = ckpt.get(prefix + ".r_seq");
    const Mat& xn = ckpt.get(prefix + ".x_n");
    const Mat& xtn = ckpt.get(prefix + ".x_tau_n");
    const Mat& flags = ckpt.get(prefix + ".flags");
    const Mat& steps = ckpt.get(prefix + ".step_inputs");
    const Mat& tr = ckpt.get(prefix + ".true_rewards");
    const Eigen::Index n = r.cols();
    if (x.rows() != static_cast<Eigen::Index>(size) || n == 0 || steps.cols() % n != 0)
      throw FormatError(prefix, "inconsistent replay sections");
    const Eigen::Index din = steps.cols() / n;
    for (std::size_t k = 0; k < size; ++k) {
      const auto i = static_cast<Eigen::Index>(k);
      TransitionRecord rec;
      rec.x = x.row(i).transpose();
      rec.x_tau = xt.row(i).transpose();
      rec.a = a.row(i).transpose();
      rec.r_seq = r.row(i).transpose();
      rec.x_n = xn.row(i).transpose();
      rec.x_tau_n = xtn.row(i).transpose();
      rec.done = flags(i, 0) != 0.0;
      rec.n_valid = static_cast<int>(flags(i, 1));
      rec.step_inputs = Eigen::Map<const Mat>(steps.row(i).data(), n, din);
      rec.true_rewards = tr.row(i).transpose();
      push(std::move(rec));
    }
  }
  inserted_ = static_cast<std::uint64_t>(ckpt.get_scalar(prefix + ".inserted"));
}

namespace {

template <class Get>
Batch gather_impl(std::size_t count, const std::vector<std::size_t>& idx, Get get) {
  if (idx.empty()) throw ValidationError("empty batch");
  if (count == 0) throw ValidationError("cannot gather from an empty record set");
  const auto& f = get(idx.front());
  const Eigen::Index b = static_cast<Eigen::Index>(idx.size());
  const Eigen::Index n = f.r_seq.size();
  Batch out;
  out.x.resize(b, f.x.size());
  out.x_tau.resize(b, f.x_tau.size());
  out.a.resize(b, f.a.size());
  out.r.resize(b, n);
  out.x_n.resize(b, f.x_n.size());
  out.x_tau_n.resize(b, f.x_tau_n.size());
  out.done.resize(b);
  out.step_inputs.resize(b * n, f.step_inputs.cols());
  out.step_mask = Mat::Zero(b, n);
  for (Eigen::Index i = 0; i < b; ++i) {
    const auto& rec = get(idx[static_cast<std::size_t>(i)]);
    out.x.row(i) = rec.x.transpose();
    out.x_tau.row(i) = rec.x_tau.transpose();
    out.a.row(i) = rec.a.transpose();
    out.r.row(i) = rec.r_seq.transpose();
    out.x_n.row(i) = rec.x_n.transpose();
    out.x_tau_n.row(i) = rec.x_tau_n.transpose();
    out.done[i] = rec.done ? 1.0 : 0.0;
    out.step_inputs.middleRows(i * n, n) = rec.step_inputs;
    out.step_mask.row(i).head(rec.n_valid).setOnes();
  }
  return out;
}

}  // namespace

Batch gather(const ReplayBuffer& buf, const std::vector<std::size_t>& idx) {
  return gather_impl(buf.size(), idx, [&](std::size_t i) -> const TransitionRecord& { return buf.at(i); });
}

Batch gather(const std::vector<TransitionRecord>& records, const std::vector<std::size_t>& idx) {
  return gather_impl(records.size(), idx, [&](std::size_t i) -> const TransitionRecord& {
    if (i >= records.size()) throw ValidationError("record index out of range");
    return records[i];
  });
}

// ---------------------------------------------------------------- expert files

namespace {

constexpr char kExpertMagic[] = "IDRLEXP1";

std::string traj_field(std::size_t i, const char* what) { return "trajectory[" + std::to_string(i) + "]." + what; }

}  // namespace

void ExpertDataset::validate() const {
  if (header.version != kExpertVersion) throw ValidationError("unsupported expert version");
  if (header.state_dim == 0 || header.action_dim == 0) throw ValidationError("expert dims must be positive");
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    const auto& tr = trajectories[i];
    const std::size_t want = tr.actions.size() + (tr.terminal ? 0 : 1);
    if (tr.obs.size() != want)
      throw ValidationError(traj_field(i, "obs") + " has " + std::to_string(tr.obs.size()) + " observations, expected " +
                            std::to_string(want));
    if (want == 0) throw ValidationError(traj_field(i, "length") + " is empty");
    for (const auto& o : tr.obs)
      if (o.size() != header.state_dim) throw ValidationError(traj_field(i, "obs") + " dimension mismatch");
    for (const auto& a : tr.actions)
      if (a.size() != header.action_dim) throw ValidationError(traj_field(i, "actions") + " dimension mismatch");
  }
}

std::string encode_expert(const ExpertDataset& ds) {
  ds.validate();
  std::string out(kExpertMagic, 8);
  bin::put_u32(out, ds.header.version);
  bin::put_str(out, ds.header.env_id);
  bin::put_u32(out, ds.header.delay);
  bin::put_u32(out, ds.header.state_dim);
  bin::put_u32(out, ds.header.action_dim);
  bin::put_u32(out, static_cast<std::uint32_t>(ds.trajectories.size()));
  for (const auto& tr : ds.trajectories) {
    bin::put_u32(out, static_cast<std::uint32_t>(tr.obs.size() + tr.actions.size()));
    for (std::size_t t = 0; t < tr.obs.size(); ++t) {
      for (double v : tr.obs[t]) bin::put_f64(out, v);
      if (t < tr.actions.size())
        for (double v : tr.actions[t]) bin::put_f64(out, v);
    }
  }
  return out;
}

ExpertDataset decode_expert(const std::string& bytes) {
  bin::Reader in(bytes);
  if (in.bytes(8, "magic") != std::string(kExpertMagic, 8)) throw FormatError("magic", "expected IDRLEXP1");
  ExpertDataset ds;
  ds.header.version = in.u32("version");
  if (ds.header.version != kExpertVersion)
    throw FormatError("version", "unsupported version " + std::to_string(ds.header.version));
  ds.header.env_id = in.str("env_id");
  ds.header.delay = in.u32("delay");
  ds.header.state_dim = in.u32("state_dim");
  if (ds.header.state_dim == 0) throw FormatError("state_dim", "must be positive");
  ds.header.action_dim = in.u32("action_dim");
  if (ds.header.action_dim == 0) throw FormatError("action_dim", "must be positive");
  const std::uint32_t n_traj = in.u32("n_traj");
  const std::size_t sd = ds.header.state_dim, ad = ds.header.action_dim;
  for (std::uint32_t i = 0; i < n_traj; ++i) {
    const std::uint32_t frames = in.u32(traj_field(i, "length"));
    if (frames == 0) throw FormatError(traj_field(i, "length"), "empty trajectory");
    const std::size_t n_obs = (frames + 1) / 2, n_act = frames / 2;
    if (in.remaining() / 8 < n_obs * sd + n_act * ad) throw FormatError(traj_field(i, "frames"), "unexpected end of file");
    DelayedTrajectory tr;
    tr.complete = true;
    tr.terminal = frames % 2 == 0;
    for (std::size_t t = 0; t < n_obs; ++t) {
      Vec o(sd);
      for (auto& v : o) v = in.f64(traj_field(i, "frames"));
      tr.obs.push_back(std::move(o));
      if (t < n_act) {
        Vec a(ad);
        for (auto& v : a) v = in.f64(traj_field(i, "frames"));
        tr.actions.push_back(std::move(a));
      }
    }
    ds.trajectories.push_back(std::move(tr));
  }
  if (in.remaining() != 0) throw FormatError("trailer", std::to_string(in.remaining()) + " unexpected trailing bytes");
  return ds;
}

void save_expert(const std::string& path, const ExpertDataset& ds) { bin::write_file(path, encode_expert(ds)); }

ExpertDataset load_expert(const std::string& path) { return decode_expert(bin::read_file(path)); }

namespace {

void check_expert_layout(const ExpertDataset& ds, const AugmentLayout& layout) {
  layout.validate();
  if (static_cast<int>(ds.header.delay) != layout.delay)
    throw ValidationError("expert dataset has delay " + std::to_string(ds.header.delay) + " but the run uses delay " +
                          std::to_string(layout.delay));
  if (static_cast<int>(ds.header.state_dim) != layout.state_dim ||
      static_cast<int>(ds.header.action_dim) != layout.action_dim)
    throw ValidationError("expert dataset dims (" + std::to_string(ds.header.state_dim) + ", " +
                          std::to_string(ds.header.action_dim) + ") do not match the environment (" +
                          std::to_string(layout.state_dim) + ", " + std::to_string(layout.action_dim) + ")");
  ds.validate();
}

}  // namespace

StateActionPairs expert_pairs(const ExpertDataset& ds, const AugmentLayout& layout) {
  check_expert_layout(ds, layout);
  Eigen::Index rows = 0;
  for (const auto& tr : ds.trajectories) rows += tr.length();
  StateActionPairs p;
  p.x.resize(rows, layout.x_dim());
  p.a.resize(rows, layout.action_dim);
  Eigen::Index r = 0;
  for (const auto& tr : ds.trajectories) {
    const Timeline tl(tr, layout);
    for (int t = 0; t < tr.length(); ++t, ++r) {
      p.x.row(r) = tl.state(t, layout.delay)->transpose();
      p.a.row(r) = tr.actions[t].transpose();
    }
  }
  p.xa.resize(rows, layout.disc_dim());
  p.xa << p.x, p.a;
  return p;
}

std::vector<TransitionRecord> augment_expert(const ExpertDataset& ds, const AugmentLayout& layout) {
  check_expert_layout(ds, layout);
  std::vector<TransitionRecord> out;
  for (const auto& tr : ds.trajectories) {
    auto recs = build_records(tr, layout);
    std::move(recs.begin(), recs.end(), std::back_inserter(out));
  }
  return out;
}

std::string expert_summary_csv(const ExpertDataset& ds, const std::vector<double>& returns) {
  if (returns.size() != ds.trajectories.size()) throw ValidationError("one return per trajectory required");
  std::ostringstream os;
  os.precision(17);
  os << "trajectory,length,return\n";
  double sum = 0.0, lo = 0.0, hi = 0.0, len_sum = 0.0;
  for (std::size_t i = 0; i < returns.size(); ++i) {
    const int len = ds.trajectories[i].length();
    os << i << ',' << len << ',' << returns[i] << '\n';
    sum += returns[i];
    len_sum += len;
    lo = i == 0 ? returns[i] : std::min(lo, returns[i]);
    hi = i == 0 ? returns[i] : std::max(hi, returns[i]);
  }
  if (!returns.empty()) {
    const double n = static_cast<double>(returns.size());
    const double mean = sum / n;
    double var = 0.0;
    for (double r : returns) var += (r - mean) * (r - mean);
    os << "mean," << len_sum / n << ',' << mean << '\n';
    os << "std,," << std::sqrt(var / n) << '\n';
    os << "min,," << lo << '\n';
    os << "max,," << hi << '\n';
  }
  return os.str();
}

}  // namespace idrl
