#pragma once

// Matrix-valued reverse-mode differentiation on an append-only tape.
//
// Every backward rule is itself written with tape operations, so calling
// Tape::grad with create_graph=true yields gradients that can be
// differentiated again (used by the discriminator's input-gradient penalty).

#include "common.hpp"

#include <array>
#include <deque>
#include <functional>
#include <span>
#include <vector>

namespace idrl::ad {

class Tape;

class Var {
 public:
  Var() = default;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  bool valid() const { return tape_ != nullptr && id_ >= 0; }
  int id() const { return id_; }
  Tape* tape() const { return tape_; }

  const Mat& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  double scalar() const { return value()(0, 0); }
  bool requires_grad() const;

 private:
  Tape* tape_ = nullptr;
  int id_ = -1;
};

class Tape {
 public:
  // Fills out[k] with the adjoint of parent k when need[k] is set.
  using Backward = std::function<void(Tape&, int self, const Var& grad, std::array<bool, 2> need,
                                      std::array<Var, 2>& out)>;

  explicit Tape(bool recording = true) : recording_(recording) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var leaf(Mat value, bool requires_grad = true);
  Var constant(Mat value) { return leaf(std::move(value), false); }
  Var scalar(double v) { return constant(Mat::Constant(1, 1, v)); }

  // Gradients of the 1x1 node `y` with respect to `wrt`. Entries that `y`
  // does not depend on come back as exact zeros.
  std::vector<Var> grad(const Var& y, std::span<const Var> wrt, bool create_graph = false);

  bool recording() const { return recording_; }
  std::size_t size() const { return nodes_.size(); }

  // Used by op implementations.
  Var record(Mat value, std::initializer_list<Var> parents, Backward backward);
  const Mat& value(int id) const { return nodes_[id].value; }
  bool requires_grad(int id) const { return nodes_[id].requires_grad; }

 private:
  struct Node {
    Mat value;
    std::array<int, 2> parents{-1, -1};
    bool requires_grad = false;
    Backward backward;
  };

  std::deque<Node> nodes_;
  bool recording_;
};

// Elementwise and shape ops. Binary ops require equal shapes unless noted.
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var div(const Var& a, const Var& b);
Var neg(const Var& a);
Var scale(const Var& a, double c);
Var add_scalar(const Var& a, double c);
Var matmul(const Var& a, const Var& b);     // a * b
Var matmul_nt(const Var& a, const Var& b);  // a * b^T
Var matmul_tn(const Var& a, const Var& b);  // a^T * b
Var add_row(const Var& a, const Var& row);  // row is 1 x cols, broadcast down
Var relu(const Var& a);
Var tanh(const Var& a);
Var exp(const Var& a);
Var log(const Var& a);
Var sigmoid(const Var& a);
Var softplus(const Var& a);
Var square(const Var& a);
Var sqrt(const Var& a);
Var clamp(const Var& a, double lo, double hi);
Var minimum(const Var& a, const Var& b);
Var sum(const Var& a);             // -> 1x1
Var mean(const Var& a);            // -> 1x1
Var row_sum(const Var& a);         // n x m -> n x 1
Var col_sum(const Var& a);         // n x m -> 1 x m
Var broadcast_scalar(const Var& a, Eigen::Index rows, Eigen::Index cols);
Var broadcast_col(const Var& a, Eigen::Index cols);  // n x 1 -> n x cols
Var broadcast_row(const Var& a, Eigen::Index rows);  // 1 x m -> rows x m
Var concat_cols(const Var& a, const Var& b);
Var slice_cols(const Var& a, Eigen::Index start, Eigen::Index count);
Var pad_cols(const Var& a, Eigen::Index start, Eigen::Index total);
Var logsumexp_rows(const Var& a);  // n x m -> n x 1
Var log_softmax_rows(const Var& a);

inline Var operator+(const Var& a, const Var& b) { return add(a, b); }
inline Var operator-(const Var& a, const Var& b) { return sub(a, b); }
inline Var operator*(const Var& a, const Var& b) { return mul(a, b); }
inline Var operator-(const Var& a) { return neg(a); }

// Numerically stable scalar helpers shared with non-tape code.
double softplus(double x);
double sigmoid(double x);

}  // namespace idrl::ad
