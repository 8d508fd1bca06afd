#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "tilr/formula.hpp"

namespace tilr {

struct PatternInstance {
  std::string name;
  std::vector<std::string> atoms;
};

struct DeclareTemplate {
  std::string_view name;
  std::size_t arity;
  /// LTLf encoding over placeholder atoms `a` (and `b`).
  std::string_view encoding;
};

/// The shipped template library: 20 standard DECLARE templates.
const std::vector<DeclareTemplate>& DeclareLibrary();

/// Instantiates a template over the given atoms.
/// Throws ValidationError for an unknown template or arity mismatch.
Formula DeclarePattern(const PatternInstance& instance);

/// Canonical benchmark instance: unary templates over p0, binary over (p0, p1).
PatternInstance CanonicalInstance(const DeclareTemplate& t);

/// Parses "name(atom, atom)" into a PatternInstance.
PatternInstance ParsePatternInstance(std::string_view text);

/// Random formula over p0..p{k-1} built from binary templates:
/// for k = 2 a single pattern over (p0, p1); for k > 2 the conjunction of
/// k - 1 patterns over the overlapping pairs (p0,p1), (p1,p2), ...
/// Deterministic in `seed`.
struct SampledFormula {
  Formula formula;
  std::vector<PatternInstance> parts;
};
SampledFormula SampleConjunctionFormula(const Alphabet& alphabet, std::uint64_t seed);

}  // namespace tilr
