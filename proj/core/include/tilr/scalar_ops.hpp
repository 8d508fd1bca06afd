#pragma once

#include <algorithm>
#include <span>

namespace tilr {

/// Arithmetic used by the graph forward pass and the refinement engine.
/// Specialised for double here and for grad::Var in autograd.hpp.
/// min/max return the left operand on ties.
template <class T>
struct ScalarOps;

template <>
struct ScalarOps<double> {
  static double value(double x) { return x; }
  static double constant(double c) { return c; }
  static double min(double a, double b) { return b < a ? b : a; }
  static double max(double a, double b) { return b > a ? b : a; }
  static double one_minus(double x) { return 1.0 - x; }
  static double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }
  /// sum(w_i x_i) / sum(w_i)
  static double weighted_mean(std::span<const double> xs, std::span<const double> weights) {
    double s = 0.0, total = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      s += weights[i] * xs[i];
      total += weights[i];
    }
    return s / total;
  }
  /// Interchangeable as refinement targets.
  static bool same(double a, double b) { return a == b; }
};

}  // namespace tilr
