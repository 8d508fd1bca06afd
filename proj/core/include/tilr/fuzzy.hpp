#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "tilr/crisp.hpp"
#include "tilr/formula.hpp"

namespace tilr {

/// n x |P| matrix of truth degrees; entry (i, j) is the degree of atom j at
/// 0-based instant i. Column order follows the Alphabet.
class FuzzyTrace {
 public:
  FuzzyTrace() = default;
  FuzzyTrace(std::size_t length, std::size_t width, double fill = 0.0);
  FuzzyTrace(std::size_t length, std::size_t width, std::vector<double> values);

  /// 0/1 trace equal to the indicator of `trace` over `width` atoms.
  static FuzzyTrace FromSymbolic(const SymbolicTrace& trace, std::size_t width);

  std::size_t length() const noexcept { return length_; }
  std::size_t width() const noexcept { return width_; }
  double at(std::size_t instant, std::size_t atom) const { return values_[instant * width_ + atom]; }
  double& at(std::size_t instant, std::size_t atom) { return values_[instant * width_ + atom]; }
  const std::vector<double>& values() const noexcept { return values_; }

  friend bool operator==(const FuzzyTrace&, const FuzzyTrace&) = default;

 private:
  void Validate() const;

  std::size_t length_ = 0;
  std::size_t width_ = 0;
  std::vector<double> values_;
};

/// Sequence-level label atoms y_1..y_m with degrees in [0,1].
struct LabelVector {
  std::vector<std::string> names;
  std::vector<double> values;

  /// All labels at 0, the initial state before refinement.
  static LabelVector Zeros(std::vector<std::string> names);
  std::size_t size() const noexcept { return names.size(); }
};

/// Zadeh value of `f` at instant 1: and = min, or = max, not = 1 - x,
/// a -> b = max(1 - a, b). Until is computed backwards from the last instant;
/// Next at the last instant is 0. Atoms not in `alphabet` are looked up in
/// `labels` and are constant over time.
double Evaluate(const Formula& f, const Alphabet& alphabet, const FuzzyTrace& trace,
                const LabelVector& labels = {});

/// (phi -> y) & (!phi -> !y), fully desugared.
Formula BuildKnowledgeFormula(const Formula& phi, const std::string& label);

/// Same formula with both implications kept as Implies nodes over the
/// desugared phi. Compiling this form marks the two implications so the
/// refinement engine can treat them as implications.
Formula KnowledgeFormula(const Formula& phi, const std::string& label);

/// (phi_1 -> y_1) & ... & (phi_m -> y_m) with implications kept.
Formula ImplicationKnowledge(const std::vector<std::pair<Formula, std::string>>& rules);

/// CSV fuzzy traces: header row of atom names, then one row per instant.
struct CsvTrace {
  Alphabet alphabet;
  FuzzyTrace trace;
};
/// Shortest text that reads back as the same double.
std::string FormatDouble(double v);

CsvTrace ReadFuzzyTraceCsv(std::istream& in);
void WriteFuzzyTraceCsv(std::ostream& out, const Alphabet& alphabet, const FuzzyTrace& trace);

}  // namespace tilr
