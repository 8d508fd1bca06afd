#include "tilr/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tilr/error.hpp"

namespace tilr::grad {

namespace {

std::size_t Product(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string ShapeString(const std::vector<std::size_t>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) s += (i ? "," : "") + std::to_string(shape[i]);
  return s + "]";
}

[[noreturn]] void ShapeMismatch(const char* op, const Tensor& a, const Tensor& b) {
  throw ValidationError(std::string(op) + ": shape mismatch " + ShapeString(a.shape()) + " vs " +
                        ShapeString(b.shape()));
}

Tape* TapeOf(const Var& a, const Var& b) { return a.tape() ? a.tape() : b.tape(); }

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), data_(Product(shape_), fill) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != Product(shape_)) {
    throw ValidationError("tensor: " + std::to_string(data_.size()) + " values for shape " +
                          ShapeString(shape_));
  }
}

std::size_t Tensor::rows() const {
  if (rank() != 2) throw ValidationError("rows() on a tensor of rank " + std::to_string(rank()));
  return shape_[0];
}

std::size_t Tensor::cols() const {
  if (rank() != 2) throw ValidationError("cols() on a tensor of rank " + std::to_string(rank()));
  return shape_[1];
}

const Tensor& Var::value() const {
  if (!tape_) throw std::logic_error("tape-less constant has no tensor value");
  return tape_->ValueOf(id_);
}

double Var::scalar() const {
  if (!tape_) return constant_;
  const Tensor& t = tape_->ValueOf(id_);
  if (t.size() != 1) throw ValidationError("scalar() on a tensor of " + std::to_string(t.size()) + " values");
  return t[0];
}

// ---------------------------------------------------------------------------

Var Tape::Leaf(Tensor value) { return Record(std::move(value), true, nullptr); }
Var Tape::Input(Tensor value) { return Record(std::move(value), false, nullptr); }

Var Tape::Record(Tensor value, bool requires_grad, BackwardFn backward) {
  nodes_.push_back({std::move(value), Tensor{}, requires_grad, std::move(backward)});
  return Var(this, nodes_.size() - 1);
}

Tensor& Tape::GradOf(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.size() != n.value.size()) n.grad = Tensor(n.value.shape(), 0.0);
  return n.grad;
}

void Tape::Backward(Var output) {
  if (output.tape() != this) throw ValidationError("Backward: output belongs to another tape");
  if (ValueOf(output.id()).size() != 1) throw ValidationError("Backward: output must be a scalar");
  for (auto& n : nodes_) n.grad = Tensor{};
  GradOf(output.id())[0] = 1.0;
  for (std::size_t id = output.id() + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.requires_grad || !n.backward || n.grad.size() == 0) continue;
    n.backward(*this, id);
  }
}

Tensor Tape::Grad(Var v) const {
  const Node& n = nodes_[v.id()];
  if (n.grad.size() == n.value.size()) return n.grad;
  return Tensor(n.value.shape(), 0.0);
}

// ---------------------------------------------------------------------------

Var MatMul(const Var& a, const Var& b) {
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (A.rank() != 2 || B.rank() != 2 || A.cols() != B.rows()) ShapeMismatch("MatMul", A, B);
  const std::size_t m = A.rows(), k = A.cols(), n = B.cols();
  Tensor out({m, n}, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = &A.data()[i * k];
    double* orow = &out.data()[i * n];
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = &B.data()[p * n];
      for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  }
  Tape* tape = a.tape();
  const std::size_t ia = a.id(), ib = b.id();
  const bool rg = tape->RequiresGrad(ia) || tape->RequiresGrad(ib);
  return tape->Record(std::move(out), rg, [ia, ib, m, k, n](Tape& t, std::size_t self) {
    const Tensor& G = t.GradOf(self);
    if (t.RequiresGrad(ia)) {
      // dA = G B^T
      const Tensor& Bv = t.ValueOf(ib);
      Tensor& dA = t.GradOf(ia);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          const double g = G.data()[i * n + j];
          if (g == 0.0) continue;
          for (std::size_t p = 0; p < k; ++p) dA.data()[i * k + p] += g * Bv.data()[p * n + j];
        }
      }
    }
    if (t.RequiresGrad(ib)) {
      // dB = A^T G
      const Tensor& Av = t.ValueOf(ia);
      Tensor& dB = t.GradOf(ib);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          const double av = Av.data()[i * k + p];
          if (av == 0.0) continue;
          for (std::size_t j = 0; j < n; ++j) dB.data()[p * n + j] += av * G.data()[i * n + j];
        }
      }
    }
  });
}

Var AddBias(const Var& x, const Var& bias) {
  const Tensor& X = x.value();
  const Tensor& B = bias.value();
  if (X.rank() != 2 || B.rank() != 1 || B.size() != X.cols()) ShapeMismatch("AddBias", X, B);
  Tensor out = X;
  const std::size_t m = X.rows(), n = X.cols();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out.data()[i * n + j] += B[j];
  Tape* tape = x.tape();
  const std::size_t ix = x.id(), ib = bias.id();
  const bool rg = tape->RequiresGrad(ix) || tape->RequiresGrad(ib);
  return tape->Record(std::move(out), rg, [ix, ib, m, n](Tape& t, std::size_t self) {
    const Tensor& G = t.GradOf(self);
    if (t.RequiresGrad(ix)) {
      Tensor& dx = t.GradOf(ix);
      for (std::size_t i = 0; i < G.size(); ++i) dx[i] += G[i];
    }
    if (t.RequiresGrad(ib)) {
      Tensor& db = t.GradOf(ib);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) db[j] += G.data()[i * n + j];
    }
  });
}

namespace {

// Elementwise unary op with derivative expressed through input and output.
template <class F, class D>
Var Unary(const Var& x, F f, D dfdx) {
  const Tensor& X = x.value();
  Tensor out(X.shape(), 0.0);
  for (std::size_t i = 0; i < X.size(); ++i) out[i] = f(X[i]);
  Tape* tape = x.tape();
  const std::size_t ix = x.id();
  return tape->Record(std::move(out), tape->RequiresGrad(ix), [ix, dfdx](Tape& t, std::size_t self) {
    const Tensor& G = t.GradOf(self);
    const Tensor& X = t.ValueOf(ix);
    const Tensor& Y = t.ValueOf(self);
    Tensor& dx = t.GradOf(ix);
    for (std::size_t i = 0; i < G.size(); ++i) dx[i] += G[i] * dfdx(X[i], Y[i]);
  });
}

// Elementwise selection between a and b; `pick_a(x, y)` decides per element.
template <class Pick>
Var Select(const Var& a, const Var& b, Pick pick_a, const char* name) {
  if (a.is_constant() && b.is_constant()) {
    return Var(pick_a(a.scalar(), b.scalar()) ? a.scalar() : b.scalar());
  }
  Tape* tape = TapeOf(a, b);
  const Tensor A = a.is_constant() ? Tensor::Scalar(a.scalar()) : a.value();
  const Tensor B = b.is_constant() ? Tensor::Scalar(b.scalar()) : b.value();
  const bool a_bcast = a.is_constant(), b_bcast = b.is_constant();
  if (!a_bcast && !b_bcast && !A.same_shape(B)) ShapeMismatch(name, A, B);
  const Tensor& shape_src = a_bcast ? B : A;
  Tensor out(shape_src.shape(), 0.0);
  std::vector<char> took_a(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double x = A[a_bcast ? 0 : i], y = B[b_bcast ? 0 : i];
    took_a[i] = pick_a(x, y);
    out[i] = took_a[i] ? x : y;
  }
  const std::size_t ia = a.id(), ib = b.id();
  const bool rg = (!a_bcast && tape->RequiresGrad(ia)) || (!b_bcast && tape->RequiresGrad(ib));
  return tape->Record(std::move(out), rg,
                      [ia, ib, a_bcast, b_bcast, took_a = std::move(took_a)](Tape& t, std::size_t self) {
                        const Tensor& G = t.GradOf(self);
                        if (!a_bcast && t.RequiresGrad(ia)) {
                          Tensor& da = t.GradOf(ia);
                          for (std::size_t i = 0; i < G.size(); ++i)
                            if (took_a[i]) da[i] += G[i];
                        }
                        if (!b_bcast && t.RequiresGrad(ib)) {
                          Tensor& db = t.GradOf(ib);
                          for (std::size_t i = 0; i < G.size(); ++i)
                            if (!took_a[i]) db[i] += G[i];
                        }
                      });
}

}  // namespace

Var Relu(const Var& x) {
  return Unary(x, [](double v) { return v > 0.0 ? v : 0.0; },
               [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Var Sigmoid(const Var& x) {
  return Unary(
      x,
      [](double v) {
        return v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
      },
      [](double, double y) { return y * (1.0 - y); });
}

Var SoftmaxRows(const Var& x) {
  const Tensor& X = x.value();
  if (X.rank() != 2) throw ValidationError("SoftmaxRows expects a rank-2 tensor");
  const std::size_t m = X.rows(), n = X.cols();
  Tensor out(X.shape(), 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double mx = X.at(i, 0);
    for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, X.at(i, j));
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) z += (out.at(i, j) = std::exp(X.at(i, j) - mx));
    for (std::size_t j = 0; j < n; ++j) out.at(i, j) /= z;
  }
  Tape* tape = x.tape();
  const std::size_t ix = x.id();
  return tape->Record(std::move(out), tape->RequiresGrad(ix), [ix, m, n](Tape& t, std::size_t self) {
    const Tensor& G = t.GradOf(self);
    const Tensor& Y = t.ValueOf(self);
    Tensor& dx = t.GradOf(ix);
    for (std::size_t i = 0; i < m; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < n; ++j) dot += G.at(i, j) * Y.at(i, j);
      for (std::size_t j = 0; j < n; ++j) dx.at(i, j) += Y.at(i, j) * (G.at(i, j) - dot);
    }
  });
}

Var Minimum(const Var& a, const Var& b) {
  return Select(a, b, [](double x, double y) { return !(y < x); }, "Minimum");
}

Var Maximum(const Var& a, const Var& b) {
  return Select(a, b, [](double x, double y) { return !(y > x); }, "Maximum");
}

Var Clamp(const Var& x, double lo, double hi) {
  if (x.is_constant()) return Var(std::clamp(x.scalar(), lo, hi));
  return Unary(x, [lo, hi](double v) { return std::clamp(v, lo, hi); },
               [lo, hi](double v, double) { return v >= lo && v <= hi ? 1.0 : 0.0; });
}

Var OneMinus(const Var& x) {
  if (x.is_constant()) return Var(1.0 - x.scalar());
  return Unary(x, [](double v) { return 1.0 - v; }, [](double, double) { return -1.0; });
}

Var Scale(const Var& x, double factor) {
  if (x.is_constant()) return Var(factor * x.scalar());
  return Unary(x, [factor](double v) { return factor * v; },
               [factor](double, double) { return factor; });
}

Var Add(const Var& a, const Var& b) {
  if (a.is_constant() && b.is_constant()) return Var(a.scalar() + b.scalar());
  if (a.is_constant() || b.is_constant()) {
    const Var& v = a.is_constant() ? b : a;
    const double c = a.is_constant() ? a.scalar() : b.scalar();
    return Unary(v, [c](double x) { return x + c; }, [](double, double) { return 1.0; });
  }
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (!A.same_shape(B)) ShapeMismatch("Add", A, B);
  Tensor out = A;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += B[i];
  Tape* tape = a.tape();
  const std::size_t ia = a.id(), ib = b.id();
  const bool rg = tape->RequiresGrad(ia) || tape->RequiresGrad(ib);
  return tape->Record(std::move(out), rg, [ia, ib](Tape& t, std::size_t self) {
    const Tensor G = t.GradOf(self);
    if (t.RequiresGrad(ia)) {
      Tensor& da = t.GradOf(ia);
      for (std::size_t i = 0; i < G.size(); ++i) da[i] += G[i];
    }
    if (t.RequiresGrad(ib)) {
      Tensor& db = t.GradOf(ib);
      for (std::size_t i = 0; i < G.size(); ++i) db[i] += G[i];
    }
  });
}

Var BinaryCrossEntropy(const Var& p, const Tensor& targets, double eps) {
  if (p.is_constant()) {
    const double q = std::clamp(p.scalar(), eps, 1.0 - eps);
    const double y = targets[0];
    return Var(-(y * std::log(q) + (1.0 - y) * std::log(1.0 - q)));
  }
  const Tensor& P = p.value();
  if (P.size() != targets.size()) ShapeMismatch("BinaryCrossEntropy", P, targets);
  const double n = static_cast<double>(P.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < P.size(); ++i) {
    const double q = std::clamp(P[i], eps, 1.0 - eps);
    loss -= targets[i] * std::log(q) + (1.0 - targets[i]) * std::log(1.0 - q);
  }
  Tape* tape = p.tape();
  const std::size_t ip = p.id();
  return tape->Record(Tensor::Scalar(loss / n), tape->RequiresGrad(ip),
                      [ip, targets, eps, n](Tape& t, std::size_t self) {
                        const double g = t.GradOf(self)[0];
                        const Tensor& P = t.ValueOf(ip);
                        Tensor& dp = t.GradOf(ip);
                        for (std::size_t i = 0; i < P.size(); ++i) {
                          if (P[i] < eps || P[i] > 1.0 - eps) continue;  // clipped
                          const double y = targets[i], q = P[i];
                          dp[i] += g * (-(y / q) + (1.0 - y) / (1.0 - q)) / n;
                        }
                      });
}

Var CrossEntropy(const Var& probs, std::span<const std::size_t> classes, double eps) {
  const Tensor& P = probs.value();
  if (P.rank() != 2 || P.rows() != classes.size()) {
    throw ValidationError("CrossEntropy: one class index per row required");
  }
  const std::size_t m = P.rows(), n = P.cols();
  double loss = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (classes[i] >= n) throw ValidationError("CrossEntropy: class index out of range");
    loss -= std::log(std::max(P.at(i, classes[i]), eps));
  }
  std::vector<std::size_t> cls(classes.begin(), classes.end());
  Tape* tape = probs.tape();
  const std::size_t ip = probs.id();
  return tape->Record(Tensor::Scalar(loss / static_cast<double>(m)), tape->RequiresGrad(ip),
                      [ip, cls = std::move(cls), eps, m, n](Tape& t, std::size_t self) {
                        const double g = t.GradOf(self)[0];
                        const Tensor& P = t.ValueOf(ip);
                        Tensor& dp = t.GradOf(ip);
                        for (std::size_t i = 0; i < m; ++i) {
                          const double q = P.at(i, cls[i]);
                          if (q < eps) continue;
                          dp.data()[i * n + cls[i]] -= g / (q * static_cast<double>(m));
                        }
                      });
}

Var Element(const Var& x, std::size_t flat_index) {
  if (x.is_constant()) {
    if (flat_index != 0) throw ValidationError("Element: index out of range");
    return x;
  }
  const Tensor& X = x.value();
  if (flat_index >= X.size()) throw ValidationError("Element: index out of range");
  Tape* tape = x.tape();
  const std::size_t ix = x.id();
  return tape->Record(Tensor::Scalar(X[flat_index]), tape->RequiresGrad(ix),
                      [ix, flat_index](Tape& t, std::size_t self) {
                        const double g = t.GradOf(self)[0];
                        t.GradOf(ix)[flat_index] += g;
                      });
}

Var Stack(std::span<const Var> scalars) {
  Tape* tape = nullptr;
  for (const auto& s : scalars) tape = tape ? tape : s.tape();
  if (!tape) throw ValidationError("Stack: needs at least one tape variable");
  std::vector<double> data;
  std::vector<std::size_t> ids;
  std::vector<char> live;
  bool rg = false;
  for (const auto& s : scalars) {
    data.push_back(s.scalar());
    ids.push_back(s.id());
    live.push_back(!s.is_constant() && tape->RequiresGrad(s.id()));
    rg = rg || live.back();
  }
  const std::size_t count = data.size();
  return tape->Record(Tensor({count}, std::move(data)), rg,
                      [ids = std::move(ids), live = std::move(live)](Tape& t, std::size_t self) {
                        const Tensor G = t.GradOf(self);
                        for (std::size_t i = 0; i < ids.size(); ++i)
                          if (live[i]) t.GradOf(ids[i])[0] += G[i];
                      });
}

Var WeightedMean(std::span<const Var> xs, std::span<const double> weights) {
  if (xs.empty() || xs.size() != weights.size()) {
    throw ValidationError("WeightedMean: need matching non-empty values and weights");
  }
  double total = 0.0, acc = 0.0;
  Tape* tape = nullptr;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    total += weights[i];
    acc += weights[i] * xs[i].scalar();
    tape = tape ? tape : xs[i].tape();
  }
  if (xs.size() == 1) return xs[0];
  if (!tape) return Var(acc / total);
  std::vector<std::size_t> ids;
  std::vector<double> coef;
  bool rg = false;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i].is_constant() || !tape->RequiresGrad(xs[i].id())) continue;
    ids.push_back(xs[i].id());
    coef.push_back(weights[i] / total);
    rg = true;
  }
  return tape->Record(Tensor::Scalar(acc / total), rg,
                      [ids = std::move(ids), coef = std::move(coef)](Tape& t, std::size_t self) {
                        const double g = t.GradOf(self)[0];
                        for (std::size_t i = 0; i < ids.size(); ++i) t.GradOf(ids[i])[0] += g * coef[i];
                      });
}

Var Mean(const Var& x) {
  if (x.is_constant()) return x;
  const Tensor& X = x.value();
  double s = 0.0;
  for (double v : X.data()) s += v;
  const double n = static_cast<double>(X.size());
  Tape* tape = x.tape();
  const std::size_t ix = x.id();
  return tape->Record(Tensor::Scalar(s / n), tape->RequiresGrad(ix), [ix, n](Tape& t, std::size_t self) {
    const double g = t.GradOf(self)[0];
    Tensor& dx = t.GradOf(ix);
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += g / n;
  });
}

}  // namespace tilr::grad
