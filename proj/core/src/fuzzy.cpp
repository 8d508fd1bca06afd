#include "tilr/fuzzy.hpp"

#include <algorithm>
#include <charconv>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "subformulas.hpp"
#include "tilr/error.hpp"

namespace tilr {

FuzzyTrace::FuzzyTrace(std::size_t length, std::size_t width, double fill)
    : length_(length), width_(width), values_(length * width, fill) {
  Validate();
}

FuzzyTrace::FuzzyTrace(std::size_t length, std::size_t width, std::vector<double> values)
    : length_(length), width_(width), values_(std::move(values)) {
  if (values_.size() != length_ * width_) {
    throw ValidationError("fuzzy trace: expected " + std::to_string(length_ * width_) +
                          " values, got " + std::to_string(values_.size()));
  }
  Validate();
}

void FuzzyTrace::Validate() const {
  if (length_ < 1) throw ValidationError("fuzzy trace must have at least one instant");
  for (double v : values_) {
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("fuzzy trace value outside [0,1]");
  }
}

FuzzyTrace FuzzyTrace::FromSymbolic(const SymbolicTrace& trace, std::size_t width) {
  FuzzyTrace out(trace.length(), width, 0.0);
  for (std::size_t i = 0; i < trace.length(); ++i) {
    for (std::size_t j = 0; j < width; ++j) out.at(i, j) = trace.holds(i, j) ? 1.0 : 0.0;
  }
  return out;
}

LabelVector LabelVector::Zeros(std::vector<std::string> names) {
  LabelVector out;
  out.values.assign(names.size(), 0.0);
  out.names = std::move(names);
  return out;
}

double Evaluate(const Formula& f, const Alphabet& alphabet, const FuzzyTrace& trace,
                const LabelVector& labels) {
  if (trace.width() != alphabet.size()) {
    throw ValidationError("fuzzy trace width does not match the alphabet");
  }
  // Implies survives lowering so a -> b reads max(1 - a, b) directly.
  const detail::SubformulaTable table(detail::LowerKeepImplies(f));
  const std::size_t n = trace.length();
  const std::size_t m = table.size();

  std::vector<double> leaf_label(m, 0.0);
  std::vector<std::ptrdiff_t> column(m, -1);
  for (std::size_t k = 0; k < m; ++k) {
    if (table[k].kind != FormulaKind::kAtom) continue;
    if (auto idx = alphabet.index_of(table[k].name)) {
      column[k] = static_cast<std::ptrdiff_t>(*idx);
      continue;
    }
    auto it = std::find(labels.names.begin(), labels.names.end(), table[k].name);
    if (it == labels.names.end()) {
      throw ValidationError("formula atom '" + table[k].name + "' is neither an atom nor a label");
    }
    leaf_label[k] = labels.values[static_cast<std::size_t>(it - labels.names.begin())];
  }

  std::vector<double> value(n * m, 0.0);
  auto at = [&](std::size_t i, std::size_t k) -> double& { return value[i * m + k]; };
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t k = 0; k < m; ++k) {
      const auto& s = table[k];
      double v = 0.0;
      switch (s.kind) {
        case FormulaKind::kAtom:
          v = column[k] >= 0 ? trace.at(i, static_cast<std::size_t>(column[k])) : leaf_label[k];
          break;
        case FormulaKind::kTrue: v = 1.0; break;
        case FormulaKind::kFalse: v = 0.0; break;
        case FormulaKind::kNot: v = 1.0 - at(i, s.lhs); break;
        case FormulaKind::kAnd: v = std::min(at(i, s.lhs), at(i, s.rhs)); break;
        case FormulaKind::kOr: v = std::max(at(i, s.lhs), at(i, s.rhs)); break;
        case FormulaKind::kImplies: v = std::max(1.0 - at(i, s.lhs), at(i, s.rhs)); break;
        case FormulaKind::kNext: v = i + 1 < n ? at(i + 1, s.lhs) : 0.0; break;
        case FormulaKind::kUntil: {
          const double tail = i + 1 < n ? at(i + 1, k) : 0.0;
          v = std::max(at(i, s.rhs), std::min(at(i, s.lhs), tail));
          break;
        }
        default:
          throw std::logic_error("derived operator survived lowering");
      }
      at(i, k) = v;
    }
  }
  return at(0, table.root());
}

Formula BuildKnowledgeFormula(const Formula& phi, const std::string& label) {
  return Desugar(KnowledgeFormula(phi, label));
}

Formula KnowledgeFormula(const Formula& phi, const std::string& label) {
  Formula body = Desugar(phi);
  Formula y = Formula::Atom(label);
  return Formula::And(Formula::Implies(body, y),
                      Formula::Implies(Formula::Not(body), Formula::Not(y)));
}

Formula ImplicationKnowledge(const std::vector<std::pair<Formula, std::string>>& rules) {
  std::vector<Formula> parts;
  for (const auto& [phi, label] : rules) {
    parts.push_back(Formula::Implies(Desugar(phi), Formula::Atom(label)));
  }
  return Formula::Conjunction(parts);
}

namespace {

std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    auto b = cell.find_first_not_of(" \t\r");
    auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
  }
  return out;
}

}  // namespace

CsvTrace ReadFuzzyTraceCsv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") != std::string::npos) header = SplitCsvLine(line);
  }
  if (header.empty()) throw FormatError("fuzzy trace CSV: missing header row");
  Alphabet alphabet(header);
  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = SplitCsvLine(line);
    if (cells.size() != header.size()) {
      throw FormatError("fuzzy trace CSV line " + std::to_string(line_no) + ": expected " +
                        std::to_string(header.size()) + " columns");
    }
    for (const auto& c : cells) {
      double v = 0.0;
      auto [p, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
      if (ec != std::errc{} || p != c.data() + c.size()) {
        throw FormatError("fuzzy trace CSV line " + std::to_string(line_no) + ": bad number '" +
                          c + "'");
      }
      values.push_back(v);
    }
    ++rows;
  }
  return {alphabet, FuzzyTrace(rows, header.size(), std::move(values))};
}

std::string FormatDouble(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void WriteFuzzyTraceCsv(std::ostream& out, const Alphabet& alphabet, const FuzzyTrace& trace) {
  for (std::size_t j = 0; j < alphabet.size(); ++j) out << (j ? "," : "") << alphabet[j];
  out << '\n';
  for (std::size_t i = 0; i < trace.length(); ++i) {
    for (std::size_t j = 0; j < trace.width(); ++j) out << (j ? "," : "") << FormatDouble(trace.at(i, j));
    out << '\n';
  }
}

}  // namespace tilr
