#pragma once

// Hash-consed, topologically ordered view of a formula's subformulas.
// Shared by the crisp and fuzzy evaluators and the graph compiler.

#include <cstddef>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "tilr/formula.hpp"

namespace tilr::detail {

struct Subformula {
  FormulaKind kind;
  std::size_t lhs = 0;
  std::size_t rhs = 0;
  std::string name;
  Formula formula;
};

/// Desugar() except that Implies nodes are kept (with lowered operands).
inline Formula LowerKeepImplies(const Formula& f) {
  switch (f.kind()) {
    case FormulaKind::kImplies:
      return Formula::Implies(LowerKeepImplies(f.lhs()), LowerKeepImplies(f.rhs()));
    case FormulaKind::kAtom:
    case FormulaKind::kTrue:
    case FormulaKind::kFalse:
      return f;
    case FormulaKind::kNot: return Formula::Not(LowerKeepImplies(f.child()));
    case FormulaKind::kNext: return Formula::Next(LowerKeepImplies(f.child()));
    case FormulaKind::kAnd: return Formula::And(LowerKeepImplies(f.lhs()), LowerKeepImplies(f.rhs()));
    case FormulaKind::kOr: return Formula::Or(LowerKeepImplies(f.lhs()), LowerKeepImplies(f.rhs()));
    case FormulaKind::kUntil:
      return Formula::Until(LowerKeepImplies(f.lhs()), LowerKeepImplies(f.rhs()));
    case FormulaKind::kRelease:
      return Formula::Not(Formula::Until(Formula::Not(LowerKeepImplies(f.lhs())),
                                         Formula::Not(LowerKeepImplies(f.rhs()))));
    case FormulaKind::kGlobally:
      return Formula::Not(
          Formula::Until(Formula::True(), Formula::Not(LowerKeepImplies(f.child()))));
    case FormulaKind::kEventually:
      return Formula::Until(Formula::True(), LowerKeepImplies(f.child()));
  }
  return f;
}

class SubformulaTable {
 public:
  /// `f` may contain any kind; evaluators lower derived kinds themselves.
  explicit SubformulaTable(const Formula& f) { root_ = Intern(f); }

  std::size_t root() const noexcept { return root_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  const Subformula& operator[](std::size_t i) const { return nodes_[i]; }

 private:
  std::size_t Intern(const Formula& f) {
    std::size_t l = 0, r = 0;
    if (f.arity() >= 1) l = Intern(f.lhs());
    if (f.arity() == 2) r = Intern(f.rhs());
    auto key = std::make_tuple(f.kind(), f.name(), l, r);
    auto [it, inserted] = index_.try_emplace(key, nodes_.size());
    if (inserted) nodes_.push_back({f.kind(), l, r, f.name(), f});
    return it->second;
  }

  std::map<std::tuple<FormulaKind, std::string, std::size_t, std::size_t>, std::size_t> index_;
  std::vector<Subformula> nodes_;
  std::size_t root_ = 0;
};

}  // namespace tilr::detail
