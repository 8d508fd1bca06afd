#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "tilr/formula.hpp"
#include "tilr/fuzzy.hpp"
#include "tilr/scalar_ops.hpp"

namespace tilr {

using NodeId = std::uint32_t;

enum class NodeKind { kLeafProp, kLeafLabel, kConst, kNeg, kMin, kMax };

struct GraphNode {
  NodeKind kind;
  std::size_t instant = 0;  // LeafProp: 1-based instant
  std::size_t index = 0;    // LeafProp: atom column; LeafLabel: label index
  double constant = 0.0;    // Const: 0 or 1
  std::vector<NodeId> children;
  /// Max(Neg(a), b) that came from an implication a -> b. Forward value is
  /// unchanged; refinement raises the consequent instead of the larger child.
  bool implication = false;
};

struct Provenance {
  std::size_t subformula;  // index into CompiledGraph::subformulas()
  std::size_t instant;     // 1-based
};

/// Min/max/neg DAG unfolding a formula over a fixed trace length. Nodes are
/// stored children-first; each (node kind, payload, children) tuple occurs
/// once, so (subformula, instant) pairs are shared.
class CompiledGraph {
 public:
  std::size_t size() const noexcept { return nodes_.size(); }
  const GraphNode& node(NodeId id) const { return nodes_[id]; }
  const std::vector<GraphNode>& nodes() const noexcept { return nodes_; }
  NodeId output() const noexcept { return output_; }
  std::size_t trace_length() const noexcept { return trace_length_; }
  const Alphabet& alphabet() const noexcept { return alphabet_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::vector<Formula>& subformulas() const noexcept { return subformulas_; }
  /// Subformula and instant that first produced each node (leaves and
  /// constants may be shared by several).
  const std::vector<Provenance>& provenance() const noexcept { return provenance_; }

 private:
  friend CompiledGraph Compile(const Formula&, std::size_t, const Alphabet&,
                               std::span<const std::string>);
  friend class GraphBuilder;

  std::vector<GraphNode> nodes_;
  std::vector<Provenance> provenance_;
  std::vector<Formula> subformulas_;
  NodeId output_ = 0;
  std::size_t trace_length_ = 0;
  Alphabet alphabet_;
  std::vector<std::string> labels_;
};

/// Unrolls `phi` over `trace_length` instants. Until is expanded backwards
/// as b_i | (a_i & U_{i+1}) with U_n = b_n, Next at the last instant becomes
/// Const(0), derived temporal operators are desugared. Implies nodes compile
/// to implication-tagged Max(Neg(a), b); pass Desugar(phi) to avoid tagging.
CompiledGraph Compile(const Formula& phi, std::size_t trace_length, const Alphabet& alphabet,
                      std::span<const std::string> labels = {});

/// Forward pass over an arbitrary scalar type. `props` is the row-major
/// n x |P| leaf matrix, `labels` the label leaves.
template <class T, class Ops = ScalarOps<T>>
std::vector<T> ForwardValues(const CompiledGraph& graph, std::span<const T> props,
                             std::span<const T> labels) {
  const std::size_t width = graph.alphabet().size();
  std::vector<T> value;
  value.reserve(graph.size());
  for (const GraphNode& n : graph.nodes()) {
    switch (n.kind) {
      case NodeKind::kLeafProp:
        value.push_back(props[(n.instant - 1) * width + n.index]);
        break;
      case NodeKind::kLeafLabel:
        value.push_back(labels[n.index]);
        break;
      case NodeKind::kConst:
        value.push_back(Ops::constant(n.constant));
        break;
      case NodeKind::kNeg:
        value.push_back(Ops::one_minus(value[n.children[0]]));
        break;
      case NodeKind::kMin: {
        T acc = value[n.children[0]];
        for (std::size_t c = 1; c < n.children.size(); ++c) acc = Ops::min(acc, value[n.children[c]]);
        value.push_back(acc);
        break;
      }
      case NodeKind::kMax: {
        T acc = value[n.children[0]];
        for (std::size_t c = 1; c < n.children.size(); ++c) acc = Ops::max(acc, value[n.children[c]]);
        value.push_back(acc);
        break;
      }
    }
  }
  return value;
}

/// Value of every node for a fuzzy trace and label assignment.
/// Throws ValidationError if the assignment does not cover the leaves.
std::vector<double> GraphForward(const CompiledGraph& graph, const FuzzyTrace& trace,
                                 const LabelVector& labels = {});

/// Thread-safe cache of compiled graphs keyed by (formula text, trace length).
class GraphCache {
 public:
  GraphCache(Alphabet alphabet, std::vector<std::string> labels)
      : alphabet_(std::move(alphabet)), labels_(std::move(labels)) {}

  std::shared_ptr<const CompiledGraph> Get(const Formula& phi, std::size_t trace_length);
  std::size_t size() const;

 private:
  Alphabet alphabet_;
  std::vector<std::string> labels_;
  mutable std::mutex mutex_;
  std::map<std::pair<std::string, std::size_t>, std::shared_ptr<const CompiledGraph>> graphs_;
};

}  // namespace tilr
