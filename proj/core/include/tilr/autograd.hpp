#pragma once

// Minimal reverse-mode differentiation over dense row-major tensors.
//
// A Tape records every operation applied to Vars created from it; Backward()
// replays the records in reverse. Vars without a tape are constants: ops on
// two constants fold immediately and never touch a tape.

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

#include "tilr/scalar_ops.hpp"

namespace tilr::grad {

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);
  static Tensor Scalar(double v) { return Tensor({}, std::vector<double>{v}); }

  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  std::size_t rows() const;  // rank-2 only
  std::size_t cols() const;  // rank-2 only

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }
  std::vector<double>& data() noexcept { return data_; }
  const std::vector<double>& data() const noexcept { return data_; }

  bool same_shape(const Tensor& o) const noexcept { return shape_ == o.shape_; }
  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

class Tape;

class Var {
 public:
  Var() = default;
  /// Tape-less constant.
  explicit Var(double constant) : constant_(constant) {}

  bool is_constant() const noexcept { return tape_ == nullptr; }
  Tape* tape() const noexcept { return tape_; }
  std::size_t id() const noexcept { return id_; }
  const Tensor& value() const;
  /// Value of a single-element Var.
  double scalar() const;

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
  double constant_ = 0.0;
};

class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Differentiable leaf.
  Var Leaf(Tensor value);
  /// Leaf that never receives a gradient.
  Var Input(Tensor value);

  /// Seeds d(output)/d(output) = 1 for a single-element output and
  /// propagates to every recorded node.
  void Backward(Var output);

  /// Gradient of the last Backward() call w.r.t. `v`; zeros if unreached.
  Tensor Grad(Var v) const;

  std::size_t size() const noexcept { return nodes_.size(); }
  void Clear() { nodes_.clear(); }

  // Used by op implementations.
  Var Record(Tensor value, bool requires_grad, BackwardFn backward);
  const Tensor& ValueOf(std::size_t id) const { return nodes_[id].value; }
  bool RequiresGrad(std::size_t id) const { return nodes_[id].requires_grad; }
  /// Gradient buffer of a node, allocated on first use.
  Tensor& GradOf(std::size_t id);

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    BackwardFn backward;
  };
  std::vector<Node> nodes_;
};

// ---------------------------------------------------------------------------
// Tensor ops. Shapes are checked; mismatches throw ValidationError.

Var MatMul(const Var& a, const Var& b);          // [m,k] x [k,n]
Var AddBias(const Var& x, const Var& bias);      // [m,n] + [n]
Var Relu(const Var& x);
Var Sigmoid(const Var& x);
Var SoftmaxRows(const Var& x);                   // softmax along the last axis of [m,n]
Var Minimum(const Var& a, const Var& b);         // elementwise, gradient to `a` on ties
Var Maximum(const Var& a, const Var& b);         // elementwise, gradient to `a` on ties
Var Clamp(const Var& x, double lo, double hi);   // zero gradient outside [lo, hi]
Var OneMinus(const Var& x);
Var Add(const Var& a, const Var& b);
Var Scale(const Var& x, double factor);
/// Mean binary cross-entropy of probabilities `p` against 0/1 `targets`,
/// with p clipped into [eps, 1 - eps] first.
Var BinaryCrossEntropy(const Var& p, const Tensor& targets, double eps = 1e-7);
/// Mean categorical cross-entropy of row-wise probabilities [m,n] against
/// class indices.
Var CrossEntropy(const Var& probs, std::span<const std::size_t> classes, double eps = 1e-12);

/// Single element of `x` (row-major flat index) as a scalar Var.
Var Element(const Var& x, std::size_t flat_index);
/// Stacks scalar Vars into a rank-1 Var.
Var Stack(std::span<const Var> scalars);
/// sum(w_i x_i) / sum(w_i) over scalar Vars.
Var WeightedMean(std::span<const Var> xs, std::span<const double> weights);
/// Arithmetic mean of all elements.
Var Mean(const Var& x);

}  // namespace tilr::grad

namespace tilr {

template <>
struct ScalarOps<grad::Var> {
  static double value(const grad::Var& x) { return x.scalar(); }
  static grad::Var constant(double c) { return grad::Var(c); }
  static grad::Var min(const grad::Var& a, const grad::Var& b) { return grad::Minimum(a, b); }
  static grad::Var max(const grad::Var& a, const grad::Var& b) { return grad::Maximum(a, b); }
  static grad::Var one_minus(const grad::Var& x) { return grad::OneMinus(x); }
  static grad::Var clamp01(const grad::Var& x) { return grad::Clamp(x, 0.0, 1.0); }
  static grad::Var weighted_mean(std::span<const grad::Var> xs, std::span<const double> w) {
    return grad::WeightedMean(xs, w);
  }
  static bool same(const grad::Var& a, const grad::Var& b) {
    if (a.is_constant() && b.is_constant()) return a.scalar() == b.scalar();
    return a.tape() == b.tape() && a.id() == b.id();
  }
};

}  // namespace tilr
