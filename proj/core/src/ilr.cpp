#include "tilr/ilr.hpp"

#include <algorithm>

#include "tilr/error.hpp"

namespace tilr {

void RefinementConfig::Validate() const {
  if (max_iterations < 1) throw ValidationError("refinement needs max_iterations >= 1");
  if (!(tolerance > 0.0)) throw ValidationError("refinement tolerance must be positive");
  if (!(target >= 0.0 && target <= 1.0)) throw ValidationError("refinement target outside [0,1]");
}

std::vector<double> RefineNode(NodeKind kind, std::span<const double> children, double target,
                               bool implication) {
  if (kind == NodeKind::kConst || kind == NodeKind::kLeafProp || kind == NodeKind::kLeafLabel) {
    return {};
  }
  if (kind == NodeKind::kNeg && children.size() != 1) {
    throw ValidationError("negation takes exactly one child");
  }
  if (children.empty()) throw ValidationError("min/max nodes need at least one child");
  if (implication && (kind != NodeKind::kMax || children.size() != 2)) {
    throw ValidationError("implication nodes are binary Max nodes");
  }
  GraphNode node{kind, 0, 0, 0.0, {}, implication};
  std::vector<double> out(children.begin(), children.end());
  detail::ProposeTargets<double, ScalarOps<double>>(
      node, children, target, [&](std::size_t pos, double t) { out[pos] = t; });
  return out;
}

RefinementResult IlrRefine(const CompiledGraph& graph, const FuzzyTrace& trace,
                           const LabelVector& labels, const RefinementConfig& cfg) {
  if (trace.length() != graph.trace_length() || trace.width() != graph.alphabet().size()) {
    throw ValidationError("fuzzy trace shape does not match the compiled graph");
  }
  std::vector<double> label_values(graph.labels().size(), 0.0);
  for (std::size_t k = 0; k < graph.labels().size(); ++k) {
    auto it = std::find(labels.names.begin(), labels.names.end(), graph.labels()[k]);
    if (it == labels.names.end()) {
      throw ValidationError("missing value for label '" + graph.labels()[k] + "'");
    }
    label_values[k] = labels.values[static_cast<std::size_t>(it - labels.names.begin())];
  }
  auto state = IlrRefineValues<double>(graph, trace.values(), std::move(label_values), cfg);
  RefinementResult out;
  out.trace = FuzzyTrace(trace.length(), trace.width(), std::move(state.props));
  out.labels.names = graph.labels();
  out.labels.values = std::move(state.labels);
  out.value = state.value;
  out.iterations = state.iterations;
  out.converged = state.converged;
  return out;
}

std::vector<bool> Predict(const RefinementResult& result, double threshold) {
  std::vector<bool> out;
  out.reserve(result.labels.values.size());
  for (double y : result.labels.values) out.push_back(y >= threshold);
  return out;
}

}  // namespace tilr
