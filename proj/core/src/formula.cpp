#include "tilr/formula.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

#include "tilr/error.hpp"

namespace tilr {

namespace {

constexpr std::string_view kKeywords[] = {"true", "false", "X", "G", "F", "U", "R"};

bool IsKeyword(std::string_view word) {
  return std::find(std::begin(kKeywords), std::end(kKeywords), word) != std::end(kKeywords);
}

bool IsIdentStart(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool IsIdentChar(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

}  // namespace

bool IsValidAtomName(std::string_view name) {
  if (name.empty() || !IsIdentStart(name.front())) return false;
  if (!std::all_of(name.begin(), name.end(), IsIdentChar)) return false;
  return !IsKeyword(name);
}

Alphabet::Alphabet(std::vector<std::string> atoms) : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw ValidationError("alphabet must contain at least one atom");
  std::unordered_set<std::string> seen;
  for (const auto& a : atoms_) {
    if (!IsValidAtomName(a)) throw ValidationError("invalid atom name '" + a + "'");
    if (!seen.insert(a).second) throw ValidationError("duplicate atom name '" + a + "'");
  }
}

Alphabet Alphabet::Indexed(std::size_t n) {
  std::vector<std::string> atoms;
  atoms.reserve(n);
  for (std::size_t i = 0; i < n; ++i) atoms.push_back("p" + std::to_string(i));
  return Alphabet(std::move(atoms));
}

std::optional<std::size_t> Alphabet::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (atoms_[i] == name) return i;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Formula

bool IsBinary(FormulaKind kind) noexcept {
  switch (kind) {
    case FormulaKind::kAnd:
    case FormulaKind::kOr:
    case FormulaKind::kImplies:
    case FormulaKind::kUntil:
    case FormulaKind::kRelease:
      return true;
    default:
      return false;
  }
}

bool IsUnary(FormulaKind kind) noexcept {
  switch (kind) {
    case FormulaKind::kNot:
    case FormulaKind::kNext:
    case FormulaKind::kGlobally:
    case FormulaKind::kEventually:
      return true;
    default:
      return false;
  }
}

Formula Formula::Make(FormulaKind kind, std::string name, std::vector<Formula> children) {
  return Formula(std::make_shared<const Node>(Node{kind, std::move(name), std::move(children)}));
}

Formula Formula::Atom(std::string name) { return Make(FormulaKind::kAtom, std::move(name), {}); }
Formula Formula::True() { return Make(FormulaKind::kTrue, {}, {}); }
Formula Formula::False() { return Make(FormulaKind::kFalse, {}, {}); }
Formula Formula::Not(Formula f) { return Make(FormulaKind::kNot, {}, {std::move(f)}); }
Formula Formula::And(Formula l, Formula r) {
  return Make(FormulaKind::kAnd, {}, {std::move(l), std::move(r)});
}
Formula Formula::Or(Formula l, Formula r) {
  return Make(FormulaKind::kOr, {}, {std::move(l), std::move(r)});
}
Formula Formula::Implies(Formula l, Formula r) {
  return Make(FormulaKind::kImplies, {}, {std::move(l), std::move(r)});
}
Formula Formula::Next(Formula f) { return Make(FormulaKind::kNext, {}, {std::move(f)}); }
Formula Formula::Until(Formula l, Formula r) {
  return Make(FormulaKind::kUntil, {}, {std::move(l), std::move(r)});
}
Formula Formula::Release(Formula l, Formula r) {
  return Make(FormulaKind::kRelease, {}, {std::move(l), std::move(r)});
}
Formula Formula::Globally(Formula f) { return Make(FormulaKind::kGlobally, {}, {std::move(f)}); }
Formula Formula::Eventually(Formula f) {
  return Make(FormulaKind::kEventually, {}, {std::move(f)});
}

Formula Formula::Conjunction(std::span<const Formula> parts) {
  if (parts.empty()) throw ValidationError("conjunction of zero formulas");
  Formula acc = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) acc = And(acc, parts[i]);
  return acc;
}

std::size_t Formula::arity() const noexcept { return node_->children.size(); }

const Formula& Formula::lhs() const {
  if (node_->children.empty()) throw std::logic_error("formula node has no operands");
  return node_->children[0];
}

const Formula& Formula::rhs() const {
  if (node_->children.size() < 2) throw std::logic_error("formula node has no right operand");
  return node_->children[1];
}

bool Formula::is_core() const noexcept {
  switch (kind()) {
    case FormulaKind::kImplies:
    case FormulaKind::kRelease:
    case FormulaKind::kGlobally:
    case FormulaKind::kEventually:
      return false;
    default:
      return std::all_of(node_->children.begin(), node_->children.end(),
                         [](const Formula& c) { return c.is_core(); });
  }
}

std::size_t Formula::size() const noexcept {
  std::size_t n = 1;
  for (const auto& c : node_->children) n += c.size();
  return n;
}

std::set<std::string> Formula::atoms() const {
  std::set<std::string> out;
  if (kind() == FormulaKind::kAtom) out.insert(name());
  for (const auto& c : node_->children) {
    auto sub = c.atoms();
    out.insert(sub.begin(), sub.end());
  }
  return out;
}

bool operator==(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return true;
  if (a.kind() != b.kind() || a.name() != b.name() || a.arity() != b.arity()) return false;
  for (std::size_t i = 0; i < a.arity(); ++i) {
    if (!(a.node_->children[i] == b.node_->children[i])) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

enum class Tok { kIdent, kTrue, kFalse, kNot, kAnd, kOr, kImplies, kNext, kGlobally,
                 kEventually, kUntil, kRelease, kLParen, kRParen, kEnd };

struct Token {
  Tok kind;
  std::size_t pos;
  std::string text;
};

std::vector<Token> Tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (IsIdentStart(c)) {
      while (i < text.size() && IsIdentChar(text[i])) ++i;
      std::string word(text.substr(start, i - start));
      Tok kind = Tok::kIdent;
      if (word == "true") kind = Tok::kTrue;
      else if (word == "false") kind = Tok::kFalse;
      else if (word == "X") kind = Tok::kNext;
      else if (word == "G") kind = Tok::kGlobally;
      else if (word == "F") kind = Tok::kEventually;
      else if (word == "U") kind = Tok::kUntil;
      else if (word == "R") kind = Tok::kRelease;
      out.push_back({kind, start, std::move(word)});
      continue;
    }
    auto two = text.substr(i, 2);
    if (two == "->") { out.push_back({Tok::kImplies, start, "->"}); i += 2; continue; }
    if (two == "[]") { out.push_back({Tok::kGlobally, start, "[]"}); i += 2; continue; }
    if (two == "<>") { out.push_back({Tok::kEventually, start, "<>"}); i += 2; continue; }
    switch (c) {
      case '!': out.push_back({Tok::kNot, start, "!"}); break;
      case '&': out.push_back({Tok::kAnd, start, "&"}); break;
      case '|': out.push_back({Tok::kOr, start, "|"}); break;
      case '(': out.push_back({Tok::kLParen, start, "("}); break;
      case ')': out.push_back({Tok::kRParen, start, ")"}); break;
      default:
        throw SyntaxError(start, std::string("unexpected character '") + c + "'");
    }
    ++i;
  }
  out.push_back({Tok::kEnd, text.size(), ""});
  return out;
}

class Parser {
 public:
  Parser(std::string_view text, const Alphabet& alphabet, std::span<const std::string> labels)
      : tokens_(Tokenize(text)), alphabet_(alphabet), labels_(labels) {}

  Formula Parse() {
    Formula f = ParseImplies();
    if (peek().kind != Tok::kEnd) Fail("'->', '|', '&', 'U', 'R', ')' or end of input");
    return f;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& advance() { return tokens_[pos_++]; }

  [[noreturn]] void Fail(const std::string& expected) const {
    const Token& t = peek();
    std::string found = t.kind == Tok::kEnd ? "end of input" : "'" + t.text + "'";
    throw SyntaxError(t.pos, "expected " + expected + ", found " + found);
  }

  Formula ParseImplies() {
    Formula lhs = ParseOr();
    if (peek().kind == Tok::kImplies) {
      advance();
      return Formula::Implies(lhs, ParseImplies());
    }
    return lhs;
  }

  Formula ParseOr() {
    Formula acc = ParseAnd();
    while (peek().kind == Tok::kOr) {
      advance();
      acc = Formula::Or(acc, ParseAnd());
    }
    return acc;
  }

  Formula ParseAnd() {
    Formula acc = ParseTemporalBinary();
    while (peek().kind == Tok::kAnd) {
      advance();
      acc = Formula::And(acc, ParseTemporalBinary());
    }
    return acc;
  }

  Formula ParseTemporalBinary() {
    Formula lhs = ParseUnary();
    if (peek().kind == Tok::kUntil) {
      advance();
      return Formula::Until(lhs, ParseTemporalBinary());
    }
    if (peek().kind == Tok::kRelease) {
      advance();
      return Formula::Release(lhs, ParseTemporalBinary());
    }
    return lhs;
  }

  Formula ParseUnary() {
    switch (peek().kind) {
      case Tok::kNot: advance(); return Formula::Not(ParseUnary());
      case Tok::kNext: advance(); return Formula::Next(ParseUnary());
      case Tok::kGlobally: advance(); return Formula::Globally(ParseUnary());
      case Tok::kEventually: advance(); return Formula::Eventually(ParseUnary());
      default: return ParsePrimary();
    }
  }

  Formula ParsePrimary() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::kTrue: advance(); return Formula::True();
      case Tok::kFalse: advance(); return Formula::False();
      case Tok::kIdent: {
        if (!alphabet_.contains(t.text) &&
            std::find(labels_.begin(), labels_.end(), t.text) == labels_.end()) {
          throw SyntaxError(t.pos, "unknown atom '" + t.text + "'");
        }
        advance();
        return Formula::Atom(t.text);
      }
      case Tok::kLParen: {
        advance();
        Formula inner = ParseImplies();
        if (peek().kind != Tok::kRParen) Fail("')'");
        advance();
        return inner;
      }
      default:
        Fail("atom, 'true', 'false', '(', '!', 'X', 'G', 'F'");
    }
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  const Alphabet& alphabet_;
  std::span<const std::string> labels_;
};

}  // namespace

Formula ParseFormula(std::string_view text, const Alphabet& alphabet,
                     std::span<const std::string> labels) {
  if (std::all_of(text.begin(), text.end(),
                  [](char c) { return std::isspace(static_cast<unsigned char>(c)); })) {
    throw SyntaxError(0, "empty formula");
  }
  return Parser(text, alphabet, labels).Parse();
}

// ---------------------------------------------------------------------------
// Printer

namespace {

bool IsPrimary(const Formula& f) {
  return f.kind() == FormulaKind::kAtom || f.kind() == FormulaKind::kTrue ||
         f.kind() == FormulaKind::kFalse;
}

void Print(const Formula& f, std::string& out);

// Binary operands are bare when atomic or unary, parenthesised otherwise.
void PrintOperand(const Formula& f, std::string& out) {
  if (IsBinary(f.kind())) {
    out += '(';
    Print(f, out);
    out += ')';
  } else {
    Print(f, out);
  }
}

void Print(const Formula& f, std::string& out) {
  switch (f.kind()) {
    case FormulaKind::kAtom: out += f.name(); return;
    case FormulaKind::kTrue: out += "true"; return;
    case FormulaKind::kFalse: out += "false"; return;
    case FormulaKind::kNot:
      out += '!';
      if (IsPrimary(f.child()) || IsUnary(f.child().kind())) {
        Print(f.child(), out);
      } else {
        out += '(';
        Print(f.child(), out);
        out += ')';
      }
      return;
    case FormulaKind::kNext:
    case FormulaKind::kGlobally:
    case FormulaKind::kEventually:
      out += f.kind() == FormulaKind::kNext ? "X(" : f.kind() == FormulaKind::kGlobally ? "G(" : "F(";
      Print(f.child(), out);
      out += ')';
      return;
    default: break;
  }
  const char* op = "";
  switch (f.kind()) {
    case FormulaKind::kAnd: op = " & "; break;
    case FormulaKind::kOr: op = " | "; break;
    case FormulaKind::kImplies: op = " -> "; break;
    case FormulaKind::kUntil: op = " U "; break;
    case FormulaKind::kRelease: op = " R "; break;
    default: break;
  }
  PrintOperand(f.lhs(), out);
  out += op;
  PrintOperand(f.rhs(), out);
}

}  // namespace

std::string FormatFormula(const Formula& f) {
  std::string out;
  Print(f, out);
  return out;
}

// ---------------------------------------------------------------------------

Formula Desugar(const Formula& f) {
  switch (f.kind()) {
    case FormulaKind::kAtom:
    case FormulaKind::kTrue:
    case FormulaKind::kFalse:
      return f;
    case FormulaKind::kNot: return Formula::Not(Desugar(f.child()));
    case FormulaKind::kNext: return Formula::Next(Desugar(f.child()));
    case FormulaKind::kAnd: return Formula::And(Desugar(f.lhs()), Desugar(f.rhs()));
    case FormulaKind::kOr: return Formula::Or(Desugar(f.lhs()), Desugar(f.rhs()));
    case FormulaKind::kUntil: return Formula::Until(Desugar(f.lhs()), Desugar(f.rhs()));
    case FormulaKind::kImplies:
      return Formula::Or(Formula::Not(Desugar(f.lhs())), Desugar(f.rhs()));
    case FormulaKind::kRelease:
      return Formula::Not(
          Formula::Until(Formula::Not(Desugar(f.lhs())), Formula::Not(Desugar(f.rhs()))));
    case FormulaKind::kGlobally:
      return Formula::Not(Formula::Until(Formula::True(), Formula::Not(Desugar(f.child()))));
    case FormulaKind::kEventually:
      return Formula::Until(Formula::True(), Desugar(f.child()));
  }
  return f;
}

}  // namespace tilr
