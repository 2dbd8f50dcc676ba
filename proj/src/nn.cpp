#include "nn.hpp"

#include "binary_io.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace idrl {

namespace {
constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5 * log(2 pi)
constexpr double kSquashClip = 1.0 - 1e-6;
}  // namespace

ActionSpace ActionSpace::discrete(int n) {
  if (n < 1) throw ValidationError("discrete action space needs n >= 1");
  ActionSpace s;
  s.kind = Kind::Discrete;
  s.dim = n;
  return s;
}

ActionSpace ActionSpace::box(std::vector<double> low, std::vector<double> high) {
  if (low.empty() || low.size() != high.size()) throw ValidationError("box bounds must be non-empty and equal length");
  for (std::size_t i = 0; i < low.size(); ++i)
    if (!(low[i] < high[i])) throw ValidationError("box bounds must satisfy low < high");
  ActionSpace s;
  s.kind = Kind::Continuous;
  s.dim = static_cast<int>(low.size());
  s.low = std::move(low);
  s.high = std::move(high);
  return s;
}

Vec ActionSpace::zero_action() const { return is_discrete() ? one_hot(0, dim) : Vec::Zero(dim); }

// ---------------------------------------------------------------- Mlp

Mlp::Mlp(std::vector<int> widths, Rng& rng) : widths_(std::move(widths)) {
  if (widths_.size() < 2) throw ValidationError("Mlp needs at least input and output widths");
  for (int w : widths_)
    if (w < 1) throw ValidationError("Mlp widths must be positive");
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    const int in = widths_[l], out = widths_[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    std::uniform_real_distribution<double> u(-bound, bound);
    Mat w(in, out), b(1, out);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = u(rng);
    for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = u(rng);
    params_.push_back(std::move(w));
    params_.push_back(std::move(b));
  }
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p.size());
  return n;
}

std::vector<ad::Var> Mlp::bind(ad::Tape& tape, bool requires_grad) const {
  std::vector<ad::Var> vars;
  vars.reserve(params_.size());
  for (const auto& p : params_) vars.push_back(tape.leaf(p, requires_grad));
  return vars;
}

ad::Var Mlp::forward(std::span<const ad::Var> params, const ad::Var& input) const {
  if (input.cols() != input_dim()) throw ValidationError("Mlp input dimension mismatch");
  ad::Var h = input;
  const std::size_t layers = params.size() / 2;
  for (std::size_t l = 0; l < layers; ++l) {
    h = ad::add_row(ad::matmul(h, params[2 * l]), params[2 * l + 1]);
    if (l + 1 < layers) h = ad::relu(h);
  }
  return h;
}

Mat Mlp::eval(const Mat& input) const {
  if (input.cols() != input_dim()) throw ValidationError("Mlp input dimension mismatch");
  Mat h = input;
  const std::size_t layers = params_.size() / 2;
  for (std::size_t l = 0; l < layers; ++l) {
    Mat next = h * params_[2 * l];
    next.rowwise() += params_[2 * l + 1].row(0);
    if (l + 1 < layers) next = next.cwiseMax(0.0);
    h = std::move(next);
  }
  return h;
}

// ---------------------------------------------------------------- Adam

void adam_step(AdamState& s, std::vector<Mat>& params, std::span<const Mat> grads, double lr) {
  if (grads.size() != params.size()) throw ValidationError("adam_step: gradient count mismatch");
  if (s.m.empty()) {
    for (const auto& p : params) {
      s.m.push_back(Mat::Zero(p.rows(), p.cols()));
      s.v.push_back(Mat::Zero(p.rows(), p.cols()));
    }
  }
  ++s.step;
  const double c1 = 1.0 - std::pow(AdamState::beta1, static_cast<double>(s.step));
  const double c2 = 1.0 - std::pow(AdamState::beta2, static_cast<double>(s.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (grads[i].rows() != params[i].rows() || grads[i].cols() != params[i].cols())
      throw ValidationError("adam_step: gradient shape mismatch");
    s.m[i] = AdamState::beta1 * s.m[i] + (1.0 - AdamState::beta1) * grads[i];
    s.v[i] = AdamState::beta2 * s.v[i] + (1.0 - AdamState::beta2) * grads[i].cwiseProduct(grads[i]);
    params[i].array() -= lr * (s.m[i].array() / c1) / ((s.v[i].array() / c2).sqrt() + AdamState::eps);
  }
}

// ---------------------------------------------------------------- Policy

Policy::Policy(int input_dim, ActionSpace space, std::vector<int> hidden, Rng& rng, bool squash)
    : space_(std::move(space)), squash_(squash) {
  std::vector<int> widths{input_dim};
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(space_.is_discrete() ? space_.dim : 2 * space_.dim);
  net_ = Mlp(std::move(widths), rng);
}

Mat Policy::draw_noise(Eigen::Index rows, Rng& rng) const {
  Mat noise(rows, noise_dim());
  for (Eigen::Index i = 0; i < noise.size(); ++i)
    noise.data()[i] = space_.is_discrete() ? uniform01(rng) : standard_normal(rng);
  return noise;
}

namespace {

struct BoxAffine {
  Mat half;    // rows x d
  Mat center;  // rows x d
  double log_half_sum = 0.0;
};

BoxAffine box_affine(const ActionSpace& space, Eigen::Index rows) {
  BoxAffine a;
  a.half.resize(rows, space.dim);
  a.center.resize(rows, space.dim);
  for (int j = 0; j < space.dim; ++j) {
    const double h = 0.5 * (space.high[j] - space.low[j]);
    a.half.col(j).setConstant(h);
    a.center.col(j).setConstant(0.5 * (space.high[j] + space.low[j]));
    a.log_half_sum += std::log(h);
  }
  return a;
}

// log(1 - tanh(u)^2) = 2 (log 2 - u - softplus(-2u))
ad::Var log_one_minus_tanh_sq(const ad::Var& u) {
  return ad::scale(ad::add_scalar(ad::neg(ad::add(u, ad::softplus(ad::scale(u, -2.0)))), std::numbers::ln2), 2.0);
}

Mat one_hot_rows(const Mat& actions) {
  Mat out = Mat::Zero(actions.rows(), actions.cols());
  for (Eigen::Index i = 0; i < actions.rows(); ++i) {
    Eigen::Index j = 0;
    actions.row(i).maxCoeff(&j);
    out(i, j) = 1.0;
  }
  return out;
}

}  // namespace

Policy::Sample Policy::sample(std::span<const ad::Var> params, const ad::Var& x, const Mat& noise) const {
  ad::Tape& t = *x.tape();
  const Eigen::Index rows = x.rows();
  if (noise.rows() != rows || noise.cols() != noise_dim()) throw ValidationError("policy noise shape mismatch");
  if (space_.is_discrete()) {
    ad::Var logp_all = log_probs_all(params, x);
    Mat onehot = Mat::Zero(rows, space_.dim);
    for (Eigen::Index i = 0; i < rows; ++i) {
      double cdf = 0.0;
      int pick = space_.dim - 1;
      for (int a = 0; a < space_.dim; ++a) {
        cdf += std::exp(logp_all.value()(i, a));
        if (noise(i, 0) < cdf) {
          pick = a;
          break;
        }
      }
      onehot(i, pick) = 1.0;
    }
    ad::Var action = t.constant(onehot);
    ad::Var logp = ad::row_sum(ad::mul(logp_all, action));
    return {action, logp};
  }
  const int d = space_.dim;
  ad::Var out = net_.forward(params, x);
  ad::Var mean = ad::slice_cols(out, 0, d);
  ad::Var log_std = ad::clamp(ad::slice_cols(out, d, d), kLogStdMin, kLogStdMax);
  ad::Var eps = t.constant(noise);
  ad::Var u = ad::add(mean, ad::mul(ad::exp(log_std), eps));
  ad::Var base = ad::add_scalar(ad::row_sum(ad::add(ad::scale(ad::square(eps), -0.5), ad::neg(log_std))),
                                -kHalfLog2Pi * d);
  if (!squash_) return {u, base};
  BoxAffine aff = box_affine(space_, rows);
  ad::Var action = ad::add(ad::mul(ad::tanh(u), t.constant(aff.half)), t.constant(aff.center));
  ad::Var logp = ad::add_scalar(ad::sub(base, ad::row_sum(log_one_minus_tanh_sq(u))), -aff.log_half_sum);
  return {action, logp};
}

ad::Var Policy::log_probs_all(std::span<const ad::Var> params, const ad::Var& x) const {
  if (!space_.is_discrete()) throw ValidationError("log_probs_all requires a discrete action space");
  return ad::log_softmax_rows(net_.forward(params, x));
}

ad::Var Policy::log_prob(std::span<const ad::Var> params, const ad::Var& x, const Mat& actions) const {
  ad::Tape& t = *x.tape();
  if (actions.rows() != x.rows() || actions.cols() != space_.dim) throw ValidationError("log_prob: action shape mismatch");
  if (space_.is_discrete()) return ad::row_sum(ad::mul(log_probs_all(params, x), t.constant(one_hot_rows(actions))));
  const int d = space_.dim;
  ad::Var out = net_.forward(params, x);
  ad::Var mean = ad::slice_cols(out, 0, d);
  ad::Var log_std = ad::clamp(ad::slice_cols(out, d, d), kLogStdMin, kLogStdMax);
  Mat u = actions;
  double correction = 0.0;
  Mat corr_rows = Mat::Zero(actions.rows(), 1);
  if (squash_) {
    BoxAffine aff = box_affine(space_, actions.rows());
    Mat y = ((actions - aff.center).array() / aff.half.array()).cwiseMax(-kSquashClip).cwiseMin(kSquashClip);
    u = y.array().atanh();
    // log(1 - y^2) per element, summed per row
    corr_rows = (1.0 - y.array().square()).log().matrix().rowwise().sum();
    correction = aff.log_half_sum;
  }
  ad::Var z = ad::mul(ad::sub(t.constant(u), mean), ad::exp(ad::neg(log_std)));
  ad::Var lp = ad::row_sum(ad::sub(ad::scale(ad::square(z), -0.5), log_std));
  return ad::add_scalar(ad::sub(lp, t.constant(corr_rows)), -kHalfLog2Pi * d - correction);
}

Mat Policy::log_prob(const Mat& x, const Mat& actions) const {
  ad::Tape tape(false);
  auto params = net_.bind(tape, false);
  return log_prob(params, tape.constant(x), actions).value();
}

Mat Policy::deterministic_action(const Mat& x) const {
  Mat out = net_.eval(x);
  if (space_.is_discrete()) return one_hot_rows(out);
  Mat mean = out.leftCols(space_.dim);
  if (!squash_) return mean;
  BoxAffine aff = box_affine(space_, x.rows());
  return (mean.array().tanh() * aff.half.array() + aff.center.array()).matrix();
}

Mat Policy::sample_actions(const Mat& x, Rng& rng) const {
  ad::Tape tape(false);
  auto params = net_.bind(tape, false);
  return sample(params, tape.constant(x), draw_noise(x.rows(), rng)).action.value();
}

// ---------------------------------------------------------------- penalty

ad::Var input_gradient_penalty(ad::Tape& tape, const ad::Var& outputs, const ad::Var& inputs) {
  const std::array<ad::Var, 1> wrt{inputs};
  ad::Var g = tape.grad(ad::sum(outputs), wrt, /*create_graph=*/true)[0];
  ad::Var sq = ad::row_sum(ad::square(g));
  Mat nonzero = (sq.value().array() > 0.0).cast<double>();
  ad::Var m = tape.constant(nonzero);
  ad::Var zero_rows = tape.constant((1.0 - nonzero.array()).matrix());
  // sqrt(sq + 1) on zero rows keeps the derivative finite; those rows are
  // masked out and use the one-sided ||g||^2 form instead.
  ad::Var norm = ad::sqrt(ad::add(sq, zero_rows));
  ad::Var two_sided = ad::square(ad::add_scalar(norm, -1.0));
  return ad::add(ad::mul(m, two_sided), ad::mul(zero_rows, sq));
}

PenaltyResult grad_input_penalty(const Mlp& net, const Vec& point) {
  if (net.output_dim() != 1) throw ValidationError("grad_input_penalty requires a scalar-output network");
  ad::Tape tape;
  auto params = net.bind(tape, true);
  ad::Var x = tape.leaf(point.transpose(), true);
  ad::Var pen = input_gradient_penalty(tape, net.forward(params, x), x);
  ad::Var total = ad::sum(pen);
  PenaltyResult r;
  r.penalty = total.scalar();
  for (const auto& g : tape.grad(total, params)) r.param_grads.push_back(g.value());
  return r;
}

// ---------------------------------------------------------------- checkpoints

void Checkpoint::add_params(const std::string& prefix, const std::vector<Mat>& params) {
  for (std::size_t i = 0; i < params.size(); ++i) add(prefix + "." + std::to_string(i), params[i]);
}

void Checkpoint::add_adam(const std::string& prefix, const AdamState& state) {
  add_scalar(prefix + ".step", static_cast<double>(state.step));
  add_params(prefix + ".m", state.m);
  add_params(prefix + ".v", state.v);
}

bool Checkpoint::has(const std::string& name) const {
  for (const auto& [n, m] : sections)
    if (n == name) return true;
  return false;
}

const Mat& Checkpoint::get(const std::string& name) const {
  for (const auto& [n, m] : sections)
    if (n == name) return m;
  throw FormatError(name, "section missing from checkpoint");
}

void Checkpoint::load_params(const std::string& prefix, std::vector<Mat>& params) const {
  for (std::size_t i = 0; i < params.size(); ++i) {
    const std::string name = prefix + "." + std::to_string(i);
    const Mat& m = get(name);
    if (m.rows() != params[i].rows() || m.cols() != params[i].cols())
      throw FormatError(name, "shape does not match the configured network");
    params[i] = m;
  }
}

void Checkpoint::load_adam(const std::string& prefix, AdamState& state) const {
  state.step = static_cast<long>(get_scalar(prefix + ".step"));
  state.m.clear();
  state.v.clear();
  for (std::size_t i = 0; has(prefix + ".m." + std::to_string(i)); ++i) {
    state.m.push_back(get(prefix + ".m." + std::to_string(i)));
    state.v.push_back(get(prefix + ".v." + std::to_string(i)));
  }
}

std::string encode_checkpoint(const Checkpoint& ckpt) {
  std::string out = "IDRLCKPT";
  bin::put_u32(out, kCheckpointVersion);
  bin::put_u32(out, static_cast<std::uint32_t>(ckpt.sections.size()));
  for (const auto& [name, m] : ckpt.sections) {
    bin::put_str(out, name);
    bin::put_u32(out, static_cast<std::uint32_t>(m.rows()));
    bin::put_u32(out, static_cast<std::uint32_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.size(); ++i) bin::put_f64(out, m.data()[i]);
  }
  return out;
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  bin::Reader r(bytes);
  if (r.bytes(8, "magic") != "IDRLCKPT") throw FormatError("magic", "not an IDRLCKPT file");
  const auto version = r.u32("version");
  if (version != kCheckpointVersion) throw FormatError("version", "unsupported version " + std::to_string(version));
  const auto n = r.u32("section_count");
  Checkpoint ckpt;
  for (std::uint32_t s = 0; s < n; ++s) {
    std::string name = r.str("section_name");
    const auto rows = r.u32(name + ".rows");
    const auto cols = r.u32(name + ".cols");
    Mat m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = r.f64(name + ".data");
    ckpt.sections.emplace_back(std::move(name), std::move(m));
  }
  if (r.remaining() != 0) throw FormatError("trailer", "unexpected bytes after last section");
  return ckpt;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) { bin::write_file(path, encode_checkpoint(ckpt)); }

Checkpoint load_checkpoint(const std::string& path) { return decode_checkpoint(bin::read_file(path)); }

namespace bin {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path);
}

}  // namespace bin

}  // namespace idrl
