#include "tilr/crisp.hpp"

#include <bit>

#include "subformulas.hpp"
#include "tilr/error.hpp"

namespace tilr {

std::string_view ToString(TraceMode mode) { return mode == TraceMode::kMe ? "me" : "nme"; }

TraceMode ParseTraceMode(std::string_view text) {
  if (text == "me" || text == "ME") return TraceMode::kMe;
  if (text == "nme" || text == "NME") return TraceMode::kNme;
  throw ValidationError("unknown trace mode '" + std::string(text) + "' (expected me or nme)");
}

std::string FormatTrace(const SymbolicTrace& trace, const Alphabet& alphabet) {
  std::string out;
  for (std::size_t i = 0; i < trace.length(); ++i) {
    if (i) out += ',';
    out += '{';
    bool first = true;
    for (std::size_t j = 0; j < alphabet.size(); ++j) {
      if (!trace.holds(i, j)) continue;
      if (!first) out += ',';
      out += alphabet[j];
      first = false;
    }
    out += '}';
  }
  return out;
}

SymbolicTrace ParseTrace(std::string_view text, const Alphabet& alphabet) {
  SymbolicTrace trace;
  std::size_t i = 0;
  auto skip_ws = [&] {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
  };
  while (true) {
    skip_ws();
    if (i >= text.size() || text[i] != '{') {
      throw FormatError("trace: expected '{' at position " + std::to_string(i));
    }
    ++i;
    AtomSet set = 0;
    while (true) {
      skip_ws();
      if (i < text.size() && text[i] == '}') break;
      std::size_t start = i;
      while (i < text.size() && text[i] != ',' && text[i] != '}' && text[i] != ' ') ++i;
      std::string name(text.substr(start, i - start));
      auto idx = alphabet.index_of(name);
      if (!idx) throw FormatError("trace: unknown atom '" + name + "'");
      set |= AtomSet{1} << *idx;
      skip_ws();
      if (i < text.size() && text[i] == ',') ++i;
    }
    ++i;  // '}'
    trace.instants.push_back(set);
    skip_ws();
    if (i >= text.size()) break;
    if (text[i] != ',') throw FormatError("trace: expected ',' at position " + std::to_string(i));
    ++i;
  }
  return trace;
}

bool MatchesMode(const SymbolicTrace& trace, TraceMode mode) {
  for (AtomSet s : trace.instants) {
    int n = std::popcount(s);
    if (n < 1) return false;
    if (mode == TraceMode::kMe && n != 1) return false;
    if (mode == TraceMode::kNme && n > 2) return false;
  }
  return true;
}

void ValidateTrace(const SymbolicTrace& trace, const Alphabet& alphabet) {
  if (trace.instants.empty()) throw ValidationError("trace must be non-empty");
  if (alphabet.size() > 64) throw ValidationError("alphabets larger than 64 atoms are unsupported");
  const AtomSet allowed = alphabet.size() == 64 ? ~AtomSet{0} : (AtomSet{1} << alphabet.size()) - 1;
  for (AtomSet s : trace.instants) {
    if (s & ~allowed) throw ValidationError("trace references an atom outside the alphabet");
  }
}

std::vector<bool> SatisfactionProfile(const SymbolicTrace& trace, const Formula& f,
                                      const Alphabet& alphabet) {
  ValidateTrace(trace, alphabet);
  const detail::SubformulaTable table(f.is_core() ? f : Desugar(f));
  const std::size_t n = trace.length();
  const std::size_t m = table.size();
  std::vector<std::size_t> column(m, 0);
  for (std::size_t k = 0; k < m; ++k) {
    if (table[k].kind != FormulaKind::kAtom) continue;
    auto idx = alphabet.index_of(table[k].name);
    if (!idx) throw ValidationError("formula atom '" + table[k].name + "' not in alphabet");
    column[k] = *idx;
  }
  // value[i * m + k]: subformula k at 0-based instant i. Filled backwards so
  // Next and Until can read instant i + 1.
  std::vector<char> value(n * m, 0);
  for (std::size_t ii = n; ii-- > 0;) {
    for (std::size_t k = 0; k < m; ++k) {
      const auto& s = table[k];
      bool v = false;
      switch (s.kind) {
        case FormulaKind::kAtom: v = trace.holds(ii, column[k]); break;
        case FormulaKind::kTrue: v = true; break;
        case FormulaKind::kFalse: v = false; break;
        case FormulaKind::kNot: v = !value[ii * m + s.lhs]; break;
        case FormulaKind::kAnd: v = value[ii * m + s.lhs] && value[ii * m + s.rhs]; break;
        case FormulaKind::kOr: v = value[ii * m + s.lhs] || value[ii * m + s.rhs]; break;
        case FormulaKind::kNext: v = ii + 1 < n && value[(ii + 1) * m + s.lhs]; break;
        case FormulaKind::kUntil:
          v = value[ii * m + s.rhs] ||
              (value[ii * m + s.lhs] && ii + 1 < n && value[(ii + 1) * m + k]);
          break;
        default:
          throw std::logic_error("non-core subformula after desugaring");
      }
      value[ii * m + k] = v;
    }
  }
  std::vector<bool> out(n);
  for (std::size_t ii = 0; ii < n; ++ii) out[ii] = value[ii * m + table.root()];
  return out;
}

bool SatisfiesAt(const SymbolicTrace& trace, std::size_t instant, const Formula& f,
                 const Alphabet& alphabet) {
  if (instant < 1 || instant > trace.length()) {
    throw ValidationError("instant " + std::to_string(instant) + " outside trace of length " +
                          std::to_string(trace.length()));
  }
  return SatisfactionProfile(trace, f, alphabet)[instant - 1];
}

bool Satisfies(const SymbolicTrace& trace, const Formula& f, const Alphabet& alphabet) {
  return SatisfiesAt(trace, 1, f, alphabet);
}

std::vector<AtomSet> InstantChoices(std::size_t alphabet_size, TraceMode mode) {
  std::vector<AtomSet> out;
  for (std::size_t j = 0; j < alphabet_size; ++j) out.push_back(AtomSet{1} << j);
  if (mode == TraceMode::kNme) {
    for (std::size_t a = 0; a < alphabet_size; ++a) {
      for (std::size_t b = a + 1; b < alphabet_size; ++b) {
        out.push_back((AtomSet{1} << a) | (AtomSet{1} << b));
      }
    }
  }
  return out;
}

std::uint64_t CountTraces(std::size_t alphabet_size, std::size_t length, TraceMode mode) {
  const std::uint64_t base = InstantChoices(alphabet_size, mode).size();
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < length; ++i) total *= base;
  return total;
}

void ForEachTrace(std::size_t alphabet_size, std::size_t min_len, std::size_t max_len,
                  TraceMode mode, const std::function<bool(const SymbolicTrace&)>& visit) {
  if (min_len < 1 || min_len > max_len) {
    throw ValidationError("trace enumeration needs 1 <= min_len <= max_len");
  }
  const auto choices = InstantChoices(alphabet_size, mode);
  for (std::size_t len = min_len; len <= max_len; ++len) {
    std::vector<std::size_t> digits(len, 0);
    SymbolicTrace trace{std::vector<AtomSet>(len, choices[0])};
    bool more = true;
    while (more) {
      if (!visit(trace)) return;
      // Odometer increment, last instant fastest.
      more = false;
      for (std::size_t pos = len; pos-- > 0;) {
        if (++digits[pos] < choices.size()) {
          trace.instants[pos] = choices[digits[pos]];
          more = true;
          break;
        }
        digits[pos] = 0;
        trace.instants[pos] = choices[0];
      }
    }
  }
}

std::vector<SymbolicTrace> EnumerateTraces(std::size_t alphabet_size, std::size_t min_len,
                                           std::size_t max_len, TraceMode mode) {
  std::vector<SymbolicTrace> out;
  ForEachTrace(alphabet_size, min_len, max_len, mode, [&](const SymbolicTrace& t) {
    out.push_back(t);
    return true;
  });
  return out;
}

}  // namespace tilr
