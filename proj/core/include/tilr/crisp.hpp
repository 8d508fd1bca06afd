#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "tilr/formula.hpp"

namespace tilr {

/// Mutually exclusive (one atom per instant) or non mutually exclusive
/// (one or two atoms per instant) trace spaces.
enum class TraceMode { kMe, kNme };

std::string_view ToString(TraceMode mode);
TraceMode ParseTraceMode(std::string_view text);

/// Bitmask over alphabet indices: bit j set iff atom j holds.
using AtomSet = std::uint64_t;

/// Finite, non-empty sequence of atom subsets.
struct SymbolicTrace {
  std::vector<AtomSet> instants;

  std::size_t length() const noexcept { return instants.size(); }
  bool holds(std::size_t instant, std::size_t atom) const {
    return (instants[instant] >> atom) & 1U;
  }
  friend auto operator<=>(const SymbolicTrace&, const SymbolicTrace&) = default;
};

/// "{p0},{p1,p2}" rendering, atoms in alphabet order.
std::string FormatTrace(const SymbolicTrace& trace, const Alphabet& alphabet);
SymbolicTrace ParseTrace(std::string_view text, const Alphabet& alphabet);

/// Checks non-emptiness, atom range and (optionally) the ME/NME shape.
void ValidateTrace(const SymbolicTrace& trace, const Alphabet& alphabet);
bool MatchesMode(const SymbolicTrace& trace, TraceMode mode);

/// tau, i |= f with 1-based instant i. Next is strong: false at the last
/// instant. Derived operators are desugared first.
bool SatisfiesAt(const SymbolicTrace& trace, std::size_t instant, const Formula& f,
                 const Alphabet& alphabet);

/// tau |= f, i.e. SatisfiesAt(trace, 1, f).
bool Satisfies(const SymbolicTrace& trace, const Formula& f, const Alphabet& alphabet);

/// Truth value of `f` at every instant (index 0 is instant 1).
std::vector<bool> SatisfactionProfile(const SymbolicTrace& trace, const Formula& f,
                                      const Alphabet& alphabet);

/// The instant alternatives of a mode in enumeration order: singletons by
/// atom index, then (NME) pairs in lexicographic order.
std::vector<AtomSet> InstantChoices(std::size_t alphabet_size, TraceMode mode);

/// Number of traces with exactly `length` instants.
std::uint64_t CountTraces(std::size_t alphabet_size, std::size_t length, TraceMode mode);

/// Visits every trace with min_len <= length <= max_len exactly once, in
/// length-lexicographic order. Stops early when `visit` returns false.
void ForEachTrace(std::size_t alphabet_size, std::size_t min_len, std::size_t max_len,
                  TraceMode mode, const std::function<bool(const SymbolicTrace&)>& visit);

std::vector<SymbolicTrace> EnumerateTraces(std::size_t alphabet_size, std::size_t min_len,
                                           std::size_t max_len, TraceMode mode);

}  // namespace tilr
