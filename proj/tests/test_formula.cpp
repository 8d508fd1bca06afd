#include <catch_amalgamated.hpp>

#include <cctype>
#include <map>
#include <set>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "tilr/error.hpp"
#include "tilr/formula.hpp"

using namespace tilr;

namespace {

// Shunting-yard reference parser for the operator table; no error handling.
Formula ReferenceParse(const std::string& text) {
  std::vector<std::string> tokens;
  for (std::size_t i = 0; i < text.size();) {
    if (text[i] == ' ') { ++i; continue; }
    if (text.compare(i, 2, "->") == 0) { tokens.push_back("->"); i += 2; continue; }
    if (std::string("()!&|").find(text[i]) != std::string::npos) { tokens.emplace_back(1, text[i]); ++i; continue; }
    std::size_t j = i;
    while (j < text.size() && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_')) ++j;
    tokens.push_back(text.substr(i, j - i));
    i = j;
  }
  const std::map<std::string, std::pair<int, bool>> binary = {
      {"U", {4, true}}, {"R", {4, true}}, {"&", {3, false}}, {"|", {2, false}}, {"->", {1, true}}};
  const std::set<std::string> unary = {"!", "X", "G", "F"};
  std::vector<Formula> out;
  std::vector<std::string> ops;
  auto reduce = [&] {
    const std::string op = ops.back();
    ops.pop_back();
    if (unary.count(op)) {
      Formula a = out.back();
      out.pop_back();
      out.push_back(op == "!" ? Formula::Not(a) : op == "X" ? Formula::Next(a)
                    : op == "G" ? Formula::Globally(a) : Formula::Eventually(a));
      return;
    }
    Formula b = out.back();
    out.pop_back();
    Formula a = out.back();
    out.pop_back();
    out.push_back(op == "U" ? Formula::Until(a, b) : op == "R" ? Formula::Release(a, b)
                  : op == "&" ? Formula::And(a, b) : op == "|" ? Formula::Or(a, b) : Formula::Implies(a, b));
  };
  auto prec = [&](const std::string& op) { return unary.count(op) ? 5 : binary.at(op).first; };
  for (const auto& t : tokens) {
    if (t == "(" || unary.count(t)) {
      ops.push_back(t);
    } else if (t == ")") {
      while (ops.back() != "(") reduce();
      ops.pop_back();
    } else if (binary.count(t)) {
      const auto [p, right] = binary.at(t);
      while (!ops.empty() && ops.back() != "(" && (prec(ops.back()) > p || (prec(ops.back()) == p && !right))) {
        reduce();
      }
      ops.push_back(t);
    } else {
      out.push_back(t == "true" ? Formula::True() : t == "false" ? Formula::False() : Formula::Atom(t));
    }
  }
  while (!ops.empty()) reduce();
  return out.back();
}

std::string RandomText(std::mt19937_64& rng, int depth) {
  static const char* atoms[] = {"a", "b", "c", "true"};
  static const char* unary[] = {"!", "X ", "G ", "F "};
  static const char* binary[] = {" U ", " R ", " & ", " | ", " -> "};
  std::string s;
  const int terms = 1 + static_cast<int>(rng() % 4);
  for (int t = 0; t < terms; ++t) {
    if (t) s += binary[rng() % 5];
    if (rng() % 3 == 0) s += unary[rng() % 4];
    if (depth > 0 && rng() % 4 == 0) {
      s += "(" + RandomText(rng, depth - 1) + ")";
    } else {
      s += atoms[rng() % 4];
    }
  }
  return s;
}

const Alphabet kAbc({"a", "b", "c"});

}  // namespace

TEST_CASE("alphabet validation") {
  CHECK_THROWS_AS(Alphabet(std::vector<std::string>{}), ValidationError);
  CHECK_THROWS_AS(Alphabet({"a", "a"}), ValidationError);
  CHECK_THROWS_AS(Alphabet({"1a"}), ValidationError);
  CHECK_THROWS_AS(Alphabet({"X"}), ValidationError);
  CHECK_THROWS_AS(Alphabet({"true"}), ValidationError);
  const Alphabet ab({"x1", "_y"});
  CHECK(ab.index_of("_y") == 1u);
  CHECK_FALSE(ab.contains("z"));
  CHECK(Alphabet::Indexed(3).atoms() == std::vector<std::string>{"p0", "p1", "p2"});
}

TEST_CASE("parse examples") {
  const Alphabet ab({"a", "b"});
  CHECK(ParseFormula("G(a -> X b)", ab) ==
        Formula::Globally(Formula::Implies(Formula::Atom("a"), Formula::Next(Formula::Atom("b")))));
  CHECK(ParseFormula("a", Alphabet({"a"})) == Formula::Atom("a"));
  CHECK(ParseFormula("a U b | c", kAbc) ==
        Formula::Or(Formula::Until(Formula::Atom("a"), Formula::Atom("b")), Formula::Atom("c")));
  CHECK(ParseFormula("a U b | c", kAbc) == ReferenceParse("a U b | c"));
}

TEST_CASE("parse associativity and aliases") {
  const auto a = Formula::Atom("a"), b = Formula::Atom("b"), c = Formula::Atom("c");
  CHECK(ParseFormula("a -> b -> c", kAbc) == Formula::Implies(a, Formula::Implies(b, c)));
  CHECK(ParseFormula("a U b U c", kAbc) == Formula::Until(a, Formula::Until(b, c)));
  CHECK(ParseFormula("a & b & c", kAbc) == Formula::And(Formula::And(a, b), c));
  CHECK(ParseFormula("[] <> a", kAbc) == Formula::Globally(Formula::Eventually(a)));
  CHECK(ParseFormula("!a R b", kAbc) == Formula::Release(Formula::Not(a), b));
  CHECK(ParseFormula("(a | b) & c", kAbc) == Formula::And(Formula::Or(a, b), c));
}

TEST_CASE("parse agrees with a shunting-yard reference on random texts") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 2000; ++i) {
    const std::string text = RandomText(rng, 2);
    INFO(text);
    CHECK(ParseFormula(text, kAbc) == ReferenceParse(text));
  }
}

TEST_CASE("parse errors") {
  CHECK_THROWS_AS(ParseFormula("", kAbc), SyntaxError);
  CHECK_THROWS_AS(ParseFormula("   ", kAbc), SyntaxError);
  CHECK_THROWS_AS(ParseFormula("a &", kAbc), SyntaxError);
  CHECK_THROWS_AS(ParseFormula("(a", kAbc), SyntaxError);
  CHECK_THROWS_AS(ParseFormula("a b", kAbc), SyntaxError);
  CHECK_THROWS_AS(ParseFormula("a $ b", kAbc), SyntaxError);
  CHECK_THROWS_AS(ParseFormula("d", kAbc), SyntaxError);
  CHECK_THROWS_WITH(ParseFormula("a & d", kAbc), Catch::Matchers::ContainsSubstring("unknown atom 'd'"));
  try {
    ParseFormula("a & ", kAbc);
    FAIL("no throw");
  } catch (const SyntaxError& e) {
    CHECK(e.position() == 4);
    CHECK(std::string(e.what()).find("expected") != std::string::npos);
  }
  const std::vector<std::string> labels{"y"};
  CHECK(ParseFormula("a -> y", kAbc, labels) == Formula::Implies(Formula::Atom("a"), Formula::Atom("y")));
}

TEST_CASE("format examples") {
  const auto a = Formula::Atom("a"), b = Formula::Atom("b"), c = Formula::Atom("c");
  CHECK(FormatFormula(Formula::Globally(a)) == "G(a)");
  CHECK(FormatFormula(Formula::Or(a, Formula::And(b, c))) == "a | (b & c)");
  const auto u = Formula::Until(a, Formula::Until(b, c));
  CHECK(FormatFormula(u) == "a U (b U c)");
  CHECK(ParseFormula(FormatFormula(u), kAbc) == u);
}

TEST_CASE("format round-trips random formulas") {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 2000; ++i) {
    const Formula f = oracle::RandomFormula(rng, {"a", "b", "c"}, 4);
    INFO(FormatFormula(f));
    CHECK(ParseFormula(FormatFormula(f), kAbc) == f);
  }
}

TEST_CASE("desugar examples") {
  const auto a = Formula::Atom("a");
  CHECK(Desugar(Formula::Eventually(a)) == Formula::Until(Formula::True(), a));
  CHECK(Desugar(Formula::Globally(a)) == Formula::Not(Formula::Until(Formula::True(), Formula::Not(a))));
  CHECK(Desugar(a) == a);
  CHECK(Desugar(Formula::Implies(a, a)) == Formula::Or(Formula::Not(a), a));
}

TEST_CASE("desugar is sound on all traces up to length 4") {
  std::mt19937_64 rng(17);
  const Alphabet ab({"a", "b", "c"});
  const auto me = tilr::EnumerateTraces(3, 1, 4, TraceMode::kMe);
  const auto nme = tilr::EnumerateTraces(3, 1, 3, TraceMode::kNme);
  for (int i = 0; i < 150; ++i) {
    const Formula f = oracle::RandomFormula(rng, {"a", "b", "c"}, 3);
    const Formula d = Desugar(f);
    REQUIRE(d.is_core());
    for (const auto* traces : {&me, &nme}) {
      for (const auto& t : *traces) {
        REQUIRE(oracle::Sat(t, 0, f, ab) == oracle::Sat(t, 0, d, ab));
      }
    }
  }
}
