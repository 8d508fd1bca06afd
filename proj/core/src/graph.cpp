#include "tilr/graph.hpp"

#include <algorithm>

#include "subformulas.hpp"
#include "tilr/error.hpp"

namespace tilr {

class GraphBuilder {
 public:
  GraphBuilder(CompiledGraph& g, const detail::SubformulaTable& table)
      : g_(g), table_(table), memo_(table.size() * g.trace_length_, kUnset) {}

  NodeId Build(std::size_t k, std::size_t instant) {
    NodeId& slot = memo_[k * g_.trace_length_ + (instant - 1)];
    if (slot != kUnset) return slot;
    slot = BuildUncached(k, instant);
    return slot;
  }

  void ResolveAtoms() {
    column_.assign(table_.size(), 0);
    is_label_.assign(table_.size(), false);
    for (std::size_t k = 0; k < table_.size(); ++k) {
      if (table_[k].kind != FormulaKind::kAtom) continue;
      if (auto idx = g_.alphabet_.index_of(table_[k].name)) {
        column_[k] = *idx;
        continue;
      }
      auto it = std::find(g_.labels_.begin(), g_.labels_.end(), table_[k].name);
      if (it == g_.labels_.end()) {
        throw ValidationError("formula atom '" + table_[k].name + "' is neither an atom nor a label");
      }
      column_[k] = static_cast<std::size_t>(it - g_.labels_.begin());
      is_label_[k] = true;
    }
  }

 private:
  static constexpr NodeId kUnset = ~NodeId{0};

  NodeId Intern(GraphNode node, std::size_t k, std::size_t instant) {
    auto key = std::make_tuple(node.kind, node.instant, node.index, node.constant, node.children,
                               node.implication);
    auto [it, inserted] = index_.try_emplace(std::move(key), static_cast<NodeId>(g_.nodes_.size()));
    if (inserted) {
      g_.nodes_.push_back(std::move(node));
      g_.provenance_.push_back({k, instant});
    }
    return it->second;
  }

  NodeId Const(double c, std::size_t k, std::size_t i) {
    return Intern({NodeKind::kConst, 0, 0, c, {}, false}, k, i);
  }

  NodeId BuildUncached(std::size_t k, std::size_t i) {
    const auto& s = table_[k];
    const std::size_t n = g_.trace_length_;
    switch (s.kind) {
      case FormulaKind::kAtom:
        if (is_label_[k]) return Intern({NodeKind::kLeafLabel, 0, column_[k], 0.0, {}, false}, k, i);
        return Intern({NodeKind::kLeafProp, i, column_[k], 0.0, {}, false}, k, i);
      case FormulaKind::kTrue: return Const(1.0, k, i);
      case FormulaKind::kFalse: return Const(0.0, k, i);
      case FormulaKind::kNot:
        return Intern({NodeKind::kNeg, 0, 0, 0.0, {Build(s.lhs, i)}, false}, k, i);
      case FormulaKind::kAnd:
        return Intern({NodeKind::kMin, 0, 0, 0.0, {Build(s.lhs, i), Build(s.rhs, i)}, false}, k, i);
      case FormulaKind::kOr:
        return Intern({NodeKind::kMax, 0, 0, 0.0, {Build(s.lhs, i), Build(s.rhs, i)}, false}, k, i);
      case FormulaKind::kImplies: {
        NodeId neg = Intern({NodeKind::kNeg, 0, 0, 0.0, {Build(s.lhs, i)}, false}, k, i);
        return Intern({NodeKind::kMax, 0, 0, 0.0, {neg, Build(s.rhs, i)}, true}, k, i);
      }
      case FormulaKind::kNext:
        if (i == n) return Const(0.0, k, i);
        return Build(s.lhs, i + 1);
      case FormulaKind::kUntil: {
        if (i == n) return Build(s.rhs, n);
        NodeId keep = Intern({NodeKind::kMin, 0, 0, 0.0, {Build(s.lhs, i), Build(k, i + 1)}, false},
                             k, i);
        return Intern({NodeKind::kMax, 0, 0, 0.0, {Build(s.rhs, i), keep}, false}, k, i);
      }
      default:
        throw std::logic_error("derived operator survived lowering");
    }
  }

  CompiledGraph& g_;
  const detail::SubformulaTable& table_;
  std::vector<NodeId> memo_;
  std::vector<std::size_t> column_;
  std::vector<bool> is_label_;
  std::map<std::tuple<NodeKind, std::size_t, std::size_t, double, std::vector<NodeId>, bool>, NodeId>
      index_;
};

CompiledGraph Compile(const Formula& phi, std::size_t trace_length, const Alphabet& alphabet,
                      std::span<const std::string> labels) {
  if (trace_length < 1) throw ValidationError("graph compilation needs trace length >= 1");
  CompiledGraph g;
  g.trace_length_ = trace_length;
  g.alphabet_ = alphabet;
  g.labels_.assign(labels.begin(), labels.end());
  const detail::SubformulaTable table(detail::LowerKeepImplies(phi));
  for (std::size_t k = 0; k < table.size(); ++k) g.subformulas_.push_back(table[k].formula);
  GraphBuilder builder(g, table);
  builder.ResolveAtoms();
  g.output_ = builder.Build(table.root(), 1);
  return g;
}

std::vector<double> GraphForward(const CompiledGraph& graph, const FuzzyTrace& trace,
                                 const LabelVector& labels) {
  if (trace.length() != graph.trace_length() || trace.width() != graph.alphabet().size()) {
    throw ValidationError("leaf assignment shape does not match the compiled graph");
  }
  std::vector<double> label_values(graph.labels().size(), 0.0);
  for (std::size_t k = 0; k < graph.labels().size(); ++k) {
    auto it = std::find(labels.names.begin(), labels.names.end(), graph.labels()[k]);
    if (it == labels.names.end()) {
      throw ValidationError("missing value for label '" + graph.labels()[k] + "'");
    }
    label_values[k] = labels.values[static_cast<std::size_t>(it - labels.names.begin())];
  }
  return ForwardValues<double>(graph, std::span<const double>(trace.values()),
                               std::span<const double>(label_values));
}

std::shared_ptr<const CompiledGraph> GraphCache::Get(const Formula& phi, std::size_t trace_length) {
  auto key = std::make_pair(FormatFormula(phi), trace_length);
  std::lock_guard lock(mutex_);
  auto it = graphs_.find(key);
  if (it != graphs_.end()) return it->second;
  auto graph = std::make_shared<const CompiledGraph>(Compile(phi, trace_length, alphabet_, labels_));
  graphs_.emplace(std::move(key), graph);
  return graph;
}

std::size_t GraphCache::size() const {
  std::lock_guard lock(mutex_);
  return graphs_.size();
}

}  // namespace tilr
