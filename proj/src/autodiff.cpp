#include "autodiff.hpp"

#include <cmath>

namespace idrl::ad {

const Mat& Var::value() const { return tape_->value(id_); }
bool Var::requires_grad() const { return tape_->requires_grad(id_); }

Var Tape::leaf(Mat value, bool requires_grad) {
  nodes_.push_back(Node{std::move(value), {-1, -1}, requires_grad, nullptr});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::record(Mat value, std::initializer_list<Var> parents, Backward backward) {
  Node node;
  node.value = std::move(value);
  bool any = false;
  int k = 0;
  for (const Var& p : parents) {
    node.parents[k++] = p.id();
    any = any || p.requires_grad();
  }
  node.requires_grad = recording_ && any;
  if (node.requires_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

std::vector<Var> Tape::grad(const Var& y, std::span<const Var> wrt, bool create_graph) {
  if (y.tape() != this || y.rows() != 1 || y.cols() != 1)
    throw std::invalid_argument("grad: output must be a 1x1 node on this tape");
  const int n = y.id() + 1;

  // Restrict the sweep to nodes on a path between wrt and y.
  std::vector<char> reaches(n, 0);
  for (const Var& w : wrt)
    if (w.id() < n) reaches[w.id()] = 1;
  for (int id = 0; id < n; ++id) {
    const Node& node = nodes_[id];
    if (reaches[id] || !node.backward) continue;
    for (int p : node.parents)
      if (p >= 0 && reaches[p]) reaches[id] = 1;
  }

  const bool saved = recording_;
  recording_ = create_graph;
  std::vector<Var> adj(n);
  adj[y.id()] = constant(Mat::Ones(1, 1));
  for (int id = y.id(); id >= 0; --id) {
    if (!reaches[id] || !adj[id].valid()) continue;
    const Node& node = nodes_[id];
    if (!node.backward) continue;
    std::array<bool, 2> need{};
    for (int k = 0; k < 2; ++k) need[k] = node.parents[k] >= 0 && reaches[node.parents[k]];
    if (!need[0] && !need[1]) continue;
    std::array<Var, 2> out{};
    node.backward(*this, id, adj[id], need, out);
    for (int k = 0; k < 2; ++k) {
      if (!need[k] || !out[k].valid()) continue;
      const int p = node.parents[k];
      adj[p] = adj[p].valid() ? add(adj[p], out[k]) : out[k];
    }
  }
  recording_ = saved;

  std::vector<Var> result;
  result.reserve(wrt.size());
  for (const Var& w : wrt) {
    if (w.id() < n && adj[w.id()].valid())
      result.push_back(adj[w.id()]);
    else
      result.push_back(constant(Mat::Zero(w.rows(), w.cols())));
  }
  return result;
}

namespace {

Tape& tape_of(const Var& a) { return *a.tape(); }

void check_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument(std::string(op) + ": shape mismatch");
}

}  // namespace

Var add(const Var& a, const Var& b) {
  check_same_shape(a, b, "add");
  return tape_of(a).record(a.value() + b.value(), {a, b},
                           [](Tape&, int, const Var& g, std::array<bool, 2>, std::array<Var, 2>& out) {
                             out[0] = g;
                             out[1] = g;
                           });
}

Var sub(const Var& a, const Var& b) {
  check_same_shape(a, b, "sub");
  return tape_of(a).record(a.value() - b.value(), {a, b},
                           [](Tape&, int, const Var& g, std::array<bool, 2> need, std::array<Var, 2>& out) {
                             out[0] = g;
                             if (need[1]) out[1] = neg(g);
                           });
}

Var mul(const Var& a, const Var& b) {
  check_same_shape(a, b, "mul");
  return tape_of(a).record(a.value().cwiseProduct(b.value()), {a, b},
                           [a, b](Tape&, int, const Var& g, std::array<bool, 2> need, std::array<Var, 2>& out) {
                             if (need[0]) out[0] = mul(g, b);
                             if (need[1]) out[1] = mul(g, a);
                           });
}

Var div(const Var& a, const Var& b) {
  check_same_shape(a, b, "div");
  return tape_of(a).record(
      a.value().cwiseQuotient(b.value()), {a, b},
      [a, b](Tape& t, int self, const Var& g, std::array<bool, 2> need, std::array<Var, 2>& out) {
        if (need[0]) out[0] = div(g, b);
        if (need[1]) out[1] = neg(div(mul(g, Var(&t, self)), b));
      });
}

Var neg(const Var& a) {
  return tape_of(a).record(-a.value(), {a},
                           [](Tape&, int, const Var& g, std::array<bool, 2>, std::array<Var, 2>& out) {
                             out[0] = neg(g);
                           });
}

Var scale(const Var& a, double c) {
  return tape_of(a).record(a.value() * c, {a},
                           [c](Tape&, int, const Var& g, std::array<bool, 2>, std::array<Var, 2>& out) {
                             out[0] = scale(g, c);
                           });
}

Var add_scalar(const Var& a, double c) {
  return tape_of(a).record(a.value().array() + c, {a},
                           [](Tape&, int, const Var& g, std::array<bool, 2>, std::array<Var, 2>& out) {
                             out[0] = g;
                           });
}

Var matmul(const Var& a, const Var& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dimension mismatch");
  return tape_of(a).record(a.value() * b.value(), {a, b},
                           [a, b](Tape&, int, const Var& g, std::array<bool, 2> need, std::array<Var, 2>& out) {
                             if (need[0]) out[0] = matmul_nt(g, b);
                             if (need[1]) out[1] = matmul_tn(a, g);
                           });
}

Var matmul_nt(const Var& a, const Var& b) {
  if (a.cols() != b.cols()) throw std::invalid_argument("matmul_nt: inner dimension mismatch");
  return tape_of(a).record(a.value() * b.value().transpose(), {a, b},
                           [a, b](Tape&, int, const Var& g, std::array<bool, 2> need, std::array<Var, 2>& out) {
                             if (need[0]) out[0] = matmul(g, b);
                             if (need[1]) out[1] = matmul_tn(g, a);
                           });
}

Var matmul_tn(const Var& a, const Var& b) {
  if (a.rows() != b.rows()) throw std::invalid_argument("matmul_tn: inner dimension mismatch");
  return tape_of(a).record(a.value().transpose() * b.value(), {a, b},
                           [a, b](Tape&, int, const Var& g, std::array<bool, 2> need, std::array<Var, 2>& out) {
                             if (need[0]) out[0] = matmul_nt(b, g);
                             if (need[1]) out[1] = matmul(a, g);
                           });
}

Var add_row(const Var& a, const Var& row) {
  if (row.rows() != 1 || row.cols() != a.cols()) throw std::invalid_argument("add_row: bad row shape");
  Mat v = a.value();
  v.rowwise() += row.value().row(0);
  return tape_of(a).record(std::move(v), {a, row},
                           [](Tape&, int, const Var& g, std::array<bool, 2> need, std::array<Var, 2>& out) {
                             out[0] = g;
                             if (need[1]) out[1] = col_sum(g);
                           });
}

Var relu(const Var& a) {
  return tape_of(a).record(a.value().cwiseMax(0.0), {a},
                           [a](Tape& t, int, const Var& g, std::array<bool, 2>, std::array<Var, 2>& out) {
                             Mat mask = (a.value().array() > 0.0).cast<double>();
                             out[0] = mul(g, t.constant(std::move(mask)));
                           });
}

Var tanh(const Var& a) {
  return tape_of(a).record(a.value().array().tanh(), {a},
                           [](Tape& t, int self, const Var& g, std::array<bool, 2>, std::array<Var, 2>& out) {
                             Var y(&t, self);
                             out[0] = mul(g, add_scalar(neg(square(y)), 1.0));
                           });
}

Var exp(const Var& a) {
  return tape_of(a).record(a.value().array().exp(), {a},
                           [](Tape& t, int self, const Var& g, std::array<bool, 2>, std::array<Var, 2>& out) {
                             out[0] = mul(g, Var(&t, self));
                           });
}

Var log(const Var& a) {
  return tape_of(a).record(a.value().array().log(), {a},
                           [a](Tape&, int, const Var& g, std::array<bool, 2>, std::array<Var, 2>& out) {
                             out[0] = div(g, a);
                           });
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Var sigmoid(const Var& a) {
  return tape_of(a).record(a.value().unaryExpr([](double x) { return sigmoid(x); }), {a},
                           [](Tape& t, int self, const Var& g, std::array<bool, 2>, std::array<Var, 2>& out) {
                             Var y(&t, self);
                             out[0] = mul(g, mul(y, add_scalar(neg(y), 1.0)));
                           });
}

Var softplus(const Var& a) {
  return tape_of(a).record(a.value().unaryExpr([](double x) { return softplus(x); }), {a},
                           [a](Tape&, int, const Var& g, std::array<bool, 2>, std::array<Var, 2>& out) {
                             out[0] = mul(g, sigmoid(a));
                           });
}

Var square(const Var& a) {
  return tape_of(a).record(a.value().array().square(), {a},
                           [a](Tape&, int, const Var& g, std::array<bool, 2>, std::array<Var, 2>& out) {
                             out[0] = mul(g, scale(a, 2.0));
                           });
}

Var sqrt(const Var& a) {
  return tape_of(a).record(a.value().array().sqrt(), {a},
                           [](Tape& t, int self, const Var& g, std::array<bool, 2>, std::array<Var, 2>& out) {
                             out[0] = div(scale(g, 0.5), Var(&t, self));
                           });
}

Var clamp(const Var& a, double lo, double hi) {
  return tape_of(a).record(a.value().cwiseMax(lo).cwiseMin(hi), {a},
                           [a, lo, hi](Tape& t, int, const Var& g, std::array<bool, 2>, std::array<Var, 2>& out) {
                             Mat mask = (a.value().array() >= lo && a.value().array() <= hi).cast<double>();
                             out[0] = mul(g, t.constant(std::move(mask)));
                           });
}

Var minimum(const Var& a, const Var& b) {
  check_same_shape(a, b, "minimum");
  return tape_of(a).record(
      a.value().cwiseMin(b.value()), {a, b},
      [a, b](Tape& t, int, const Var& g, std::array<bool, 2> need, std::array<Var, 2>& out) {
        Mat take_a = (a.value().array() <= b.value().array()).cast<double>();
        if (need[1]) out[1] = mul(g, t.constant((1.0 - take_a.array()).matrix()));
        if (need[0]) out[0] = mul(g, t.constant(std::move(take_a)));
      });
}

Var sum(const Var& a) {
  const auto r = a.rows(), c = a.cols();
  return tape_of(a).record(Mat::Constant(1, 1, a.value().sum()), {a},
                           [r, c](Tape&, int, const Var& g, std::array<bool, 2>, std::array<Var, 2>& out) {
                             out[0] = broadcast_scalar(g, r, c);
                           });
}

Var mean(const Var& a) { return scale(sum(a), 1.0 / static_cast<double>(a.rows() * a.cols())); }

Var row_sum(const Var& a) {
  const auto c = a.cols();
  return tape_of(a).record(a.value().rowwise().sum(), {a},
                           [c](Tape&, int, const Var& g, std::array<bool, 2>, std::array<Var, 2>& out) {
                             out[0] = broadcast_col(g, c);
                           });
}

Var col_sum(const Var& a) {
  const auto r = a.rows();
  return tape_of(a).record(a.value().colwise().sum(), {a},
                           [r](Tape&, int, const Var& g, std::array<bool, 2>, std::array<Var, 2>& out) {
                             out[0] = broadcast_row(g, r);
                           });
}

Var broadcast_scalar(const Var& a, Eigen::Index rows, Eigen::Index cols) {
  if (a.rows() != 1 || a.cols() != 1) throw std::invalid_argument("broadcast_scalar: expects 1x1");
  return tape_of(a).record(Mat::Constant(rows, cols, a.scalar()), {a},
                           [](Tape&, int, const Var& g, std::array<bool, 2>, std::array<Var, 2>& out) {
                             out[0] = sum(g);
                           });
}

Var broadcast_col(const Var& a, Eigen::Index cols) {
  if (a.cols() != 1) throw std::invalid_argument("broadcast_col: expects n x 1");
  return tape_of(a).record(a.value().col(0).replicate(1, cols), {a},
                           [](Tape&, int, const Var& g, std::array<bool, 2>, std::array<Var, 2>& out) {
                             out[0] = row_sum(g);
                           });
}

Var broadcast_row(const Var& a, Eigen::Index rows) {
  if (a.rows() != 1) throw std::invalid_argument("broadcast_row: expects 1 x m");
  return tape_of(a).record(a.value().row(0).replicate(rows, 1), {a},
                           [](Tape&, int, const Var& g, std::array<bool, 2>, std::array<Var, 2>& out) {
                             out[0] = col_sum(g);
                           });
}

Var concat_cols(const Var& a, const Var& b) {
  if (a.rows() != b.rows()) throw std::invalid_argument("concat_cols: row mismatch");
  const auto ca = a.cols(), cb = b.cols();
  Mat v(a.rows(), ca + cb);
  v << a.value(), b.value();
  return tape_of(a).record(std::move(v), {a, b},
                           [ca, cb](Tape&, int, const Var& g, std::array<bool, 2> need, std::array<Var, 2>& out) {
                             if (need[0]) out[0] = slice_cols(g, 0, ca);
                             if (need[1]) out[1] = slice_cols(g, ca, cb);
                           });
}

Var slice_cols(const Var& a, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || start + count > a.cols()) throw std::invalid_argument("slice_cols: out of range");
  const auto total = a.cols();
  return tape_of(a).record(a.value().middleCols(start, count), {a},
                           [start, total](Tape&, int, const Var& g, std::array<bool, 2>, std::array<Var, 2>& out) {
                             out[0] = pad_cols(g, start, total);
                           });
}

Var pad_cols(const Var& a, Eigen::Index start, Eigen::Index total) {
  const auto count = a.cols();
  if (start < 0 || start + count > total) throw std::invalid_argument("pad_cols: out of range");
  Mat v = Mat::Zero(a.rows(), total);
  v.middleCols(start, count) = a.value();
  return tape_of(a).record(std::move(v), {a},
                           [start, count](Tape&, int, const Var& g, std::array<bool, 2>, std::array<Var, 2>& out) {
                             out[0] = slice_cols(g, start, count);
                           });
}

Var logsumexp_rows(const Var& a) {
  const Mat& x = a.value();
  Mat v(x.rows(), 1);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double m = x.row(i).maxCoeff();
    v(i, 0) = m + std::log((x.row(i).array() - m).exp().sum());
  }
  const auto c = x.cols();
  return tape_of(a).record(std::move(v), {a},
                           [a, c](Tape& t, int self, const Var& g, std::array<bool, 2>, std::array<Var, 2>& out) {
                             Var softmax = exp(sub(a, broadcast_col(Var(&t, self), c)));
                             out[0] = mul(broadcast_col(g, c), softmax);
                           });
}

Var log_softmax_rows(const Var& a) { return sub(a, broadcast_col(logsumexp_rows(a), a.cols())); }

}  // namespace idrl::ad
