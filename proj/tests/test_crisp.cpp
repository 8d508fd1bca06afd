#include <catch_amalgamated.hpp>

#include "oracles.hpp"
#include "tilr/crisp.hpp"
#include "tilr/declare.hpp"
#include "tilr/error.hpp"

using namespace tilr;

TEST_CASE("satisfies_at examples") {
  const Alphabet digits({"d0", "d1", "d2"});
  const Formula g = ParseFormula("G(d2 -> X d0)", digits);
  const SymbolicTrace t = ParseTrace("{d2},{d0}", digits);
  CHECK(SatisfiesAt(t, 1, g, digits) == oracle::Sat(t, 0, g, digits));
  CHECK(SatisfiesAt(t, 1, g, digits));

  const Alphabet ab({"a", "b"});
  CHECK_FALSE(SatisfiesAt(ParseTrace("{a}", ab), 1, ParseFormula("X a", ab), ab));
  const SymbolicTrace ab2 = ParseTrace("{a},{b}", ab);
  const Formula u = ParseFormula("a U b", ab);
  CHECK(SatisfiesAt(ab2, 1, u, ab) == oracle::Sat(ab2, 0, u, ab));
  CHECK(SatisfiesAt(ab2, 1, u, ab));
  CHECK_THROWS_AS(SatisfiesAt(ab2, 0, u, ab), ValidationError);
  CHECK_THROWS_AS(SatisfiesAt(ab2, 3, u, ab), ValidationError);
}

TEST_CASE("satisfies examples") {
  const Alphabet ab({"a", "b"});
  CHECK(Satisfies(ParseTrace("{a}", ab), Formula::True(), ab));
  CHECK_FALSE(Satisfies(ParseTrace("{a}", ab), Formula::False(), ab));
  const SymbolicTrace t = ParseTrace("{a},{a},{b}", ab);
  const Formula f = ParseFormula("F b", ab);
  CHECK(Satisfies(t, f, ab) == oracle::Sat(t, 0, f, ab));
  CHECK(Satisfies(t, f, ab));
}

TEST_CASE("next is strong and until includes the last instant") {
  const Alphabet ab({"a", "b"});
  const SymbolicTrace t = ParseTrace("{a},{b}", ab);
  CHECK(SatisfiesAt(t, 1, ParseFormula("X b", ab), ab));
  CHECK_FALSE(SatisfiesAt(t, 2, ParseFormula("X true", ab), ab));
  CHECK(SatisfiesAt(t, 2, ParseFormula("a U b", ab), ab));
}

TEST_CASE("enumeration counts and order") {
  CHECK(EnumerateTraces(2, 1, 1, TraceMode::kMe).size() == 2);
  CHECK(EnumerateTraces(2, 1, 4, TraceMode::kMe).size() == 2 + 4 + 8 + 16);
  const auto nme1 = EnumerateTraces(2, 1, 1, TraceMode::kNme);
  REQUIRE(nme1.size() == 3);
  const Alphabet ab({"a", "b"});
  CHECK(FormatTrace(nme1[0], ab) == "{a}");
  CHECK(FormatTrace(nme1[1], ab) == "{b}");
  CHECK(FormatTrace(nme1[2], ab) == "{a,b}");
  CHECK(EnumerateTraces(2, 1, 4, TraceMode::kNme).size() == 3 + 9 + 27 + 81);
  CHECK(EnumerateTraces(3, 2, 2, TraceMode::kNme).size() == 36);
  CHECK(CountTraces(4, 3, TraceMode::kNme) == 1000);
  CHECK_THROWS_AS(EnumerateTraces(2, 0, 2, TraceMode::kMe), ValidationError);
  CHECK_THROWS_AS(EnumerateTraces(2, 3, 2, TraceMode::kMe), ValidationError);

  const auto all = EnumerateTraces(3, 1, 3, TraceMode::kNme);
  for (std::size_t i = 1; i < all.size(); ++i) {
    const bool shorter = all[i - 1].length() < all[i].length();
    CHECK((shorter || (all[i - 1].length() == all[i].length() && all[i - 1] < all[i]) ||
           all[i - 1].length() == all[i].length()));
    CHECK_FALSE(all[i - 1] == all[i]);
  }
  std::set<SymbolicTrace> unique(all.begin(), all.end());
  CHECK(unique.size() == all.size());
  for (const auto& t : all) CHECK(MatchesMode(t, TraceMode::kNme));
}

TEST_CASE("trace text and validation") {
  const Alphabet ab({"a", "b", "c"});
  const SymbolicTrace t = ParseTrace("{a,c}, {b}", ab);
  CHECK(FormatTrace(t, ab) == "{a,c},{b}");
  CHECK_FALSE(MatchesMode(t, TraceMode::kMe));
  CHECK(MatchesMode(t, TraceMode::kNme));
  CHECK_FALSE(MatchesMode(ParseTrace("{a,b,c}", ab), TraceMode::kNme));
  CHECK_THROWS(ParseTrace("{d}", ab));
  CHECK_THROWS(ParseTrace("", ab));
  CHECK_THROWS(ParseTrace("{a", ab));
  CHECK_THROWS_AS(ValidateTrace(SymbolicTrace{}, ab), ValidationError);
  CHECK_THROWS_AS(ValidateTrace(SymbolicTrace{{AtomSet{8}}}, ab), ValidationError);
}

TEST_CASE("dynamic program equals the recursive reference") {
  const Alphabet ab({"p0", "p1", "p2"});
  std::vector<Formula> formulas;
  for (const auto& t : DeclareLibrary()) {
    formulas.push_back(DeclarePattern(t.arity == 1 ? PatternInstance{std::string(t.name), {"p1"}}
                                                   : PatternInstance{std::string(t.name), {"p2", "p0"}}));
  }
  std::mt19937_64 rng(23);
  for (int i = 0; i < 60; ++i) formulas.push_back(oracle::RandomFormula(rng, {"p0", "p1", "p2"}, 4));
  const auto traces = EnumerateTraces(3, 1, 4, TraceMode::kMe);
  const auto nme = EnumerateTraces(3, 1, 3, TraceMode::kNme);
  for (const auto& f : formulas) {
    for (const auto* set : {&traces, &nme}) {
      for (const auto& t : *set) {
        const auto profile = SatisfactionProfile(t, f, ab);
        for (std::size_t i = 0; i < t.length(); ++i) REQUIRE(profile[i] == oracle::Sat(t, i, f, ab));
      }
    }
  }
}

TEST_CASE("eventually is preserved by extension") {
  const Alphabet ab({"a", "b"});
  const Formula f = ParseFormula("F b", ab);
  for (const auto& t : EnumerateTraces(2, 1, 3, TraceMode::kNme)) {
    if (!Satisfies(t, f, ab)) continue;
    for (AtomSet s : InstantChoices(2, TraceMode::kNme)) {
      SymbolicTrace longer = t;
      longer.instants.push_back(s);
      CHECK(Satisfies(longer, f, ab));
    }
  }
}

TEST_CASE("globally equals not eventually not") {
  const Alphabet ab({"a", "b"});
  const Formula g = ParseFormula("G(a -> X b)", ab);
  const Formula alt = ParseFormula("!F !(a -> X b)", ab);
  for (const auto& t : EnumerateTraces(2, 1, 5, TraceMode::kNme)) {
    CHECK(Satisfies(t, g, ab) == Satisfies(t, alt, ab));
  }
}
