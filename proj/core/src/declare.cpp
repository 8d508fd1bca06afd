#include "tilr/declare.hpp"

#include <algorithm>
#include <cctype>
#include <random>

#include "tilr/error.hpp"

namespace tilr {

const std::vector<DeclareTemplate>& DeclareLibrary() {
  static const std::vector<DeclareTemplate> library = {
      {"existence", 1, "F(a)"},
      {"absence", 1, "!F(a)"},
      {"absence2", 1, "!F(a & X(F(a)))"},
      {"exactly1", 1, "F(a) & !F(a & X(F(a)))"},
      {"init", 1, "a"},
      {"end", 1, "F(a & !X(true))"},
      {"responded_existence", 2, "F(a) -> F(b)"},
      {"response", 2, "G(a -> F(b))"},
      {"precedence", 2, "(!b U a) | G(!b)"},
      {"chain_response", 2, "G(a -> X(b))"},
      {"chain_precedence", 2, "G(X(b) -> a)"},
      {"alternate_response", 2, "G(a -> X(!a U b))"},
      {"alternate_precedence", 2, "((!b U a) | G(!b)) & G(b -> (!X(true) | X((!b U a) | G(!b))))"},
      {"co_existence", 2, "(F(a) -> F(b)) & (F(b) -> F(a))"},
      {"not_co_existence", 2, "!(F(a) & F(b))"},
      {"not_succession", 2, "G(a -> !F(b))"},
      {"choice", 2, "F(a) | F(b)"},
      {"exclusive_choice", 2, "(F(a) | F(b)) & !(F(a) & F(b))"},
      {"succession", 2, "G(a -> F(b)) & ((!b U a) | G(!b))"},
      {"not_chain_succession", 2, "G(a -> !X(b))"},
  };
  return library;
}

namespace {

const DeclareTemplate& FindTemplate(std::string_view name) {
  const auto& lib = DeclareLibrary();
  auto it = std::find_if(lib.begin(), lib.end(), [&](const auto& t) { return t.name == name; });
  if (it == lib.end()) throw ValidationError("unknown DECLARE template '" + std::string(name) + "'");
  return *it;
}

Formula Substitute(const Formula& f, const std::string& a, const std::string& b) {
  switch (f.kind()) {
    case FormulaKind::kAtom: return Formula::Atom(f.name() == "a" ? a : b);
    case FormulaKind::kTrue:
    case FormulaKind::kFalse: return f;
    case FormulaKind::kNot: return Formula::Not(Substitute(f.child(), a, b));
    case FormulaKind::kNext: return Formula::Next(Substitute(f.child(), a, b));
    case FormulaKind::kGlobally: return Formula::Globally(Substitute(f.child(), a, b));
    case FormulaKind::kEventually: return Formula::Eventually(Substitute(f.child(), a, b));
    case FormulaKind::kAnd:
      return Formula::And(Substitute(f.lhs(), a, b), Substitute(f.rhs(), a, b));
    case FormulaKind::kOr:
      return Formula::Or(Substitute(f.lhs(), a, b), Substitute(f.rhs(), a, b));
    case FormulaKind::kImplies:
      return Formula::Implies(Substitute(f.lhs(), a, b), Substitute(f.rhs(), a, b));
    case FormulaKind::kUntil:
      return Formula::Until(Substitute(f.lhs(), a, b), Substitute(f.rhs(), a, b));
    case FormulaKind::kRelease:
      return Formula::Release(Substitute(f.lhs(), a, b), Substitute(f.rhs(), a, b));
  }
  return f;
}

std::string Trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

Formula DeclarePattern(const PatternInstance& instance) {
  const DeclareTemplate& t = FindTemplate(instance.name);
  if (instance.atoms.size() != t.arity) {
    throw ValidationError("template '" + instance.name + "' takes " + std::to_string(t.arity) +
                          " atom(s), got " + std::to_string(instance.atoms.size()));
  }
  for (const auto& atom : instance.atoms) {
    if (!IsValidAtomName(atom)) throw ValidationError("invalid atom name '" + atom + "'");
  }
  static const Alphabet placeholders({"a", "b"});
  Formula skeleton = ParseFormula(t.encoding, placeholders);
  const std::string& a = instance.atoms[0];
  const std::string& b = t.arity > 1 ? instance.atoms[1] : instance.atoms[0];
  return Substitute(skeleton, a, b);
}

PatternInstance CanonicalInstance(const DeclareTemplate& t) {
  PatternInstance inst{std::string(t.name), {"p0"}};
  if (t.arity == 2) inst.atoms.push_back("p1");
  return inst;
}

PatternInstance ParsePatternInstance(std::string_view text) {
  auto open = text.find('(');
  auto close = text.rfind(')');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open ||
      !Trim(text.substr(close + 1)).empty()) {
    throw ValidationError("pattern must look like name(atom, ...): '" + std::string(text) + "'");
  }
  PatternInstance inst{Trim(text.substr(0, open)), {}};
  std::string_view args = text.substr(open + 1, close - open - 1);
  while (true) {
    auto comma = args.find(',');
    inst.atoms.push_back(Trim(args.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    args.remove_prefix(comma + 1);
  }
  FindTemplate(inst.name);
  return inst;
}

SampledFormula SampleConjunctionFormula(const Alphabet& alphabet, std::uint64_t seed) {
  if (alphabet.size() < 2) throw ValidationError("conjunction sampling needs at least 2 atoms");
  std::vector<const DeclareTemplate*> binary;
  for (const auto& t : DeclareLibrary()) {
    if (t.arity == 2) binary.push_back(&t);
  }
  std::mt19937_64 rng(seed);
  SampledFormula out{Formula::True(), {}};
  std::vector<Formula> parts;
  for (std::size_t i = 0; i + 1 < alphabet.size(); ++i) {
    const DeclareTemplate* t = binary[rng() % binary.size()];
    PatternInstance inst{std::string(t->name), {alphabet[i], alphabet[i + 1]}};
    parts.push_back(DeclarePattern(inst));
    out.parts.push_back(std::move(inst));
  }
  out.formula = Formula::Conjunction(parts);
  return out;
}

}  // namespace tilr
