#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tilr {

/// Ordered set of propositional atom names. The order fixes the column index
/// of each atom in every trace matrix.
class Alphabet {
 public:
  Alphabet() = default;
  explicit Alphabet(std::vector<std::string> atoms);

  /// p0, p1, ..., p{n-1}: the atom-to-digit convention used by the benchmark.
  static Alphabet Indexed(std::size_t n);

  std::size_t size() const noexcept { return atoms_.size(); }
  const std::string& operator[](std::size_t i) const { return atoms_[i]; }
  const std::vector<std::string>& atoms() const noexcept { return atoms_; }
  std::optional<std::size_t> index_of(std::string_view name) const;
  bool contains(std::string_view name) const { return index_of(name).has_value(); }

  friend bool operator==(const Alphabet&, const Alphabet&) = default;

 private:
  std::vector<std::string> atoms_;
};

/// True for identifiers usable as atom names (not keywords, right charset).
bool IsValidAtomName(std::string_view name);

enum class FormulaKind {
  kAtom,
  kTrue,
  kFalse,
  kNot,
  kAnd,
  kOr,
  kImplies,
  kNext,
  kUntil,
  kRelease,
  kGlobally,
  kEventually,
};

/// Immutable LTLf syntax tree. Copies share structure.
class Formula {
 public:
  static Formula Atom(std::string name);
  static Formula True();
  static Formula False();
  static Formula Not(Formula f);
  static Formula And(Formula lhs, Formula rhs);
  static Formula Or(Formula lhs, Formula rhs);
  static Formula Implies(Formula lhs, Formula rhs);
  static Formula Next(Formula f);
  static Formula Until(Formula lhs, Formula rhs);
  static Formula Release(Formula lhs, Formula rhs);
  static Formula Globally(Formula f);
  static Formula Eventually(Formula f);

  /// Left-nested conjunction of a non-empty list.
  static Formula Conjunction(std::span<const Formula> parts);

  FormulaKind kind() const noexcept { return node_->kind; }
  /// Atom name; empty for every other kind.
  const std::string& name() const noexcept { return node_->name; }
  std::size_t arity() const noexcept;
  /// Operand of unary nodes, left operand of binary nodes.
  const Formula& lhs() const;
  const Formula& rhs() const;
  const Formula& child() const { return lhs(); }

  bool is_core() const noexcept;  // uses only Atom/True/False/Not/And/Or/Next/Until
  std::size_t size() const noexcept;  // number of syntax nodes
  std::set<std::string> atoms() const;

  /// Identity of the shared node; equal ids imply structural equality.
  const void* id() const noexcept { return node_.get(); }

  friend bool operator==(const Formula& a, const Formula& b);

 private:
  struct Node {
    FormulaKind kind;
    std::string name;
    std::vector<Formula> children;
  };

  explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  static Formula Make(FormulaKind kind, std::string name, std::vector<Formula> children);

  std::shared_ptr<const Node> node_;
};

bool IsBinary(FormulaKind kind) noexcept;
bool IsUnary(FormulaKind kind) noexcept;

/// Parses the text syntax
///   atoms, true, false, ! (not), & (and), | (or), -> (implies),
///   X (next), G / [] (globally), F / <> (eventually), U (until), R (release).
/// Precedence, tightest first: unary operators, U/R (right-assoc), &, |,
/// -> (right-assoc). Every atom must belong to `alphabet` or `labels`.
Formula ParseFormula(std::string_view text, const Alphabet& alphabet,
                     std::span<const std::string> labels = {});

/// Inverse of ParseFormula up to whitespace.
std::string FormatFormula(const Formula& f);

/// Rewrites R, G, F and -> into the core connectives:
///   a -> b  =>  !a | b
///   a R b   =>  !(!a U !b)
///   G a     =>  !(true U !a)
///   F a     =>  true U a
Formula Desugar(const Formula& f);

}  // namespace tilr
