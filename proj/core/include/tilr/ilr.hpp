#pragma once

// Iterative local refinement over a compiled min/max/neg graph.
//
// Each iteration runs a forward pass, then pushes a target value from the
// output node down to the leaves using the closed-form minimal refinement of
// each node:
//
//   Neg             child -> 1 - t
//   Min, t >= v     every child below t -> t
//   Min, t <  v     the smallest child -> t
//   Max, t >  v     the largest child -> t
//   Max, t <= v     every child above t -> t
//   Const           nothing (constants cannot be refined)
//
// Implication-tagged Max(Neg(a), b) nodes raise the consequent b up to the
// antecedent's degree, min(t, a), instead of raising the larger child: the
// Goedel residuum a => b is restored at the same L1 cost by lowering a or by
// raising b, and the tie goes to the consequent. Lowering follows the Max rule.
//
// Extremal children are chosen leftmost on ties. A node reached by several
// targets handles each independently; a leaf takes the mean of its
// proposals, clamped to [0,1]. Leaves without proposals keep their value.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "tilr/fuzzy.hpp"
#include "tilr/graph.hpp"
#include "tilr/scalar_ops.hpp"

namespace tilr {

struct RefinementConfig {
  double target = 1.0;
  std::size_t max_iterations = 10;
  double tolerance = 1e-6;

  /// Throws ValidationError unless max_iterations >= 1, tolerance > 0 and
  /// target lies in [0,1].
  void Validate() const;
};

template <class T>
struct RefinementState {
  std::vector<T> props;   // row-major n x |P|
  std::vector<T> labels;  // in CompiledGraph::labels() order
  T value{};              // output value after the last update
  std::size_t iterations = 0;
  bool converged = false;
};

struct RefinementResult {
  FuzzyTrace trace;
  LabelVector labels;
  double value = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Per-child targets of one node; children left alone keep their value.
std::vector<double> RefineNode(NodeKind kind, std::span<const double> children, double target,
                               bool implication = false);

namespace detail {

/// Calls propose(child_position, target) for every child the node's rule
/// moves. Comparisons use plain values; the targets keep T's provenance.
template <class T, class Ops, class Propose>
void ProposeTargets(const GraphNode& node, std::span<const T> child, const T& target,
                    Propose&& propose) {
  const double t = Ops::value(target);
  switch (node.kind) {
    case NodeKind::kNeg:
      propose(0, Ops::one_minus(target));
      return;
    case NodeKind::kMin:
    case NodeKind::kMax: {
      const bool is_min = node.kind == NodeKind::kMin;
      std::size_t best = 0;
      for (std::size_t c = 1; c < child.size(); ++c) {
        const double x = Ops::value(child[c]), b = Ops::value(child[best]);
        if (is_min ? x < b : x > b) best = c;
      }
      const double v = Ops::value(child[best]);
      if (is_min) {
        if (t >= v) {
          for (std::size_t c = 0; c < child.size(); ++c) {
            if (Ops::value(child[c]) < t) propose(c, target);
          }
        } else {
          propose(best, target);
        }
        return;
      }
      if (t > v) {
        if (node.implication) {
          const T lifted = Ops::max(child[1], Ops::min(target, Ops::one_minus(child[0])));
          if (Ops::value(lifted) > Ops::value(child[1])) propose(1, lifted);
        } else {
          propose(best, target);
        }
      } else {
        for (std::size_t c = 0; c < child.size(); ++c) {
          if (Ops::value(child[c]) > t) propose(c, target);
        }
      }
      return;
    }
    default:
      return;
  }
}

}  // namespace detail

/// Generic refinement loop. `props` and `labels` are the initial leaves.
/// Stops when |v - t| <= tolerance, after max_iterations backward passes, or
/// at a fixed point (a pass that changes no leaf, which later passes would
/// repeat). `iterations` counts the backward passes that changed a leaf.
template <class T, class Ops = ScalarOps<T>>
RefinementState<T> IlrRefineValues(const CompiledGraph& graph, std::vector<T> props,
                                   std::vector<T> labels, const RefinementConfig& cfg) {
  cfg.Validate();
  RefinementState<T> state;
  state.props = std::move(props);
  state.labels = std::move(labels);
  const T target = Ops::constant(cfg.target);
  const std::size_t width = graph.alphabet().size();

  struct Proposal {
    T value;
    double weight;
  };
  std::vector<std::vector<Proposal>> inbox(graph.size());
  std::vector<T> child_values;

  while (true) {
    const std::vector<T> values = ForwardValues<T, Ops>(
        graph, std::span<const T>(state.props), std::span<const T>(state.labels));
    state.value = values[graph.output()];
    if (std::abs(Ops::value(state.value) - cfg.target) <= cfg.tolerance) {
      state.converged = true;
      break;
    }
    if (state.iterations >= cfg.max_iterations) break;

    for (auto& box : inbox) box.clear();
    inbox[graph.output()].push_back({target, 1.0});
    auto deliver = [&](NodeId to, const T& value, double weight) {
      for (auto& p : inbox[to]) {
        if (Ops::same(p.value, value)) {
          p.weight += weight;
          return;
        }
      }
      inbox[to].push_back({value, weight});
    };

    bool changed = false;
    for (std::size_t id = graph.size(); id-- > 0;) {
      if (inbox[id].empty()) continue;
      const GraphNode& node = graph.node(static_cast<NodeId>(id));
      if (node.kind == NodeKind::kLeafProp || node.kind == NodeKind::kLeafLabel) {
        std::vector<T> xs;
        std::vector<double> ws;
        for (const auto& p : inbox[id]) {
          xs.push_back(p.value);
          ws.push_back(p.weight);
        }
        T refined = Ops::clamp01(Ops::weighted_mean(std::span<const T>(xs), std::span<const double>(ws)));
        T& slot = node.kind == NodeKind::kLeafProp
                      ? state.props[(node.instant - 1) * width + node.index]
                      : state.labels[node.index];
        if (Ops::value(refined) != Ops::value(slot)) changed = true;
        slot = refined;
        continue;
      }
      child_values.clear();
      for (NodeId c : node.children) child_values.push_back(values[c]);
      for (const auto& p : inbox[id]) {
        detail::ProposeTargets<T, Ops>(node, std::span<const T>(child_values), p.value,
                                       [&](std::size_t pos, const T& t) {
                                         deliver(node.children[pos], t, p.weight);
                                       });
      }
    }
    if (!changed) break;
    ++state.iterations;
  }
  return state;
}

/// Refines a fuzzy trace and label vector against `graph` (built over the
/// same alphabet and labels).
RefinementResult IlrRefine(const CompiledGraph& graph, const FuzzyTrace& trace,
                           const LabelVector& labels, const RefinementConfig& cfg = {});

/// Step function on refined labels: degree >= threshold means true.
std::vector<bool> Predict(const RefinementResult& result, double threshold = 0.5);

}  // namespace tilr
