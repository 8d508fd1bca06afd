#include "tilr/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "tilr/error.hpp"

namespace tilr {

using json = nlohmann::json;

namespace {

// Lengths whose trace space is at most this large are enumerated outright.
constexpr std::uint64_t kEnumerationLimit = std::uint64_t{1} << 17;
// Random draws per stratum slot before giving up on a sparse stratum.
constexpr std::size_t kDrawsPerSlot = 200;

struct Stratum {
  std::size_t length;
  bool accepted;
  std::vector<SymbolicTrace> pool;  // distinct, in random order
  std::size_t planned = 0;
  std::size_t take = 0;
};

SymbolicTrace RandomTrace(std::size_t length, const std::vector<AtomSet>& choices, std::mt19937_64& rng) {
  SymbolicTrace t;
  t.instants.resize(length);
  for (auto& s : t.instants) s = choices[rng() % choices.size()];
  return t;
}

// Fills both label strata of one length with distinct traces.
void FillLength(const Formula& phi, const Alphabet& alphabet, TraceMode mode, Stratum& acc, Stratum& rej,
                std::size_t want, std::mt19937_64& rng) {
  const std::size_t length = acc.length;
  if (CountTraces(alphabet.size(), length, mode) <= kEnumerationLimit) {
    ForEachTrace(alphabet.size(), length, length, mode, [&](const SymbolicTrace& t) {
      (Satisfies(t, phi, alphabet) ? acc : rej).pool.push_back(t);
      return true;
    });
    std::shuffle(acc.pool.begin(), acc.pool.end(), rng);
    std::shuffle(rej.pool.begin(), rej.pool.end(), rng);
    return;
  }
  const auto choices = InstantChoices(alphabet.size(), mode);
  std::set<SymbolicTrace> seen;
  const std::size_t budget = kDrawsPerSlot * std::max<std::size_t>(want, 1) * 2;
  for (std::size_t draw = 0; draw < budget && (acc.pool.size() < want || rej.pool.size() < want); ++draw) {
    SymbolicTrace t = RandomTrace(length, choices, rng);
    if (!seen.insert(t).second) continue;
    Stratum& s = Satisfies(t, phi, alphabet) ? acc : rej;
    if (s.pool.size() < want) s.pool.push_back(std::move(t));
  }
}

struct SplitPair {
  std::vector<LabelledTrace> train, test;
};

// Balanced draw of 2 * per_split traces over lengths [lo, hi], split into
// disjoint halves.
SplitPair Stratify(const Formula& phi, const Alphabet& alphabet, TraceMode mode, std::size_t lo,
                   std::size_t hi, std::size_t per_split, std::mt19937_64& rng, SymbolicDataset& out) {
  const std::size_t total = 2 * per_split;
  std::vector<Stratum> strata;
  for (std::size_t len = lo; len <= hi; ++len) {
    strata.push_back({len, true, {}});
    strata.push_back({len, false, {}});
  }
  const std::size_t base = total / strata.size(), extra = total % strata.size();
  for (std::size_t i = 0; i < strata.size(); ++i) strata[i].planned = base + (i < extra ? 1 : 0);
  // Searching beyond the plan leaves room for rebalancing.
  for (std::size_t i = 0; i < strata.size(); i += 2) {
    const std::size_t want = std::max(strata[i].planned, strata[i + 1].planned) * 2 + 1;
    FillLength(phi, alphabet, mode, strata[i], strata[i + 1], want, rng);
  }

  std::size_t deficit = 0;
  for (auto& s : strata) {
    s.take = std::min(s.planned, s.pool.size());
    deficit += s.planned - s.take;
    if (s.pool.empty()) {
      out.warnings.push_back("stratum (length " + std::to_string(s.length) + ", " +
                             (s.accepted ? "accepted" : "rejected") + ") has no traces; dropped");
    }
  }
  // Hand the shortfall out one trace at a time to strata with spare traces.
  while (deficit > 0) {
    bool progressed = false;
    for (auto& s : strata) {
      if (deficit == 0) break;
      if (s.take < s.pool.size()) {
        ++s.take;
        --deficit;
        progressed = true;
      }
    }
    if (!progressed) break;
  }

  std::vector<LabelledTrace> chosen;
  std::size_t moved = 0;
  for (auto& s : strata) {
    for (std::size_t i = 0; i < s.take; ++i) chosen.push_back({s.pool[i], s.accepted});
    if (s.take < s.planned && !s.pool.empty()) {
      out.warnings.push_back("stratum (length " + std::to_string(s.length) + ", " +
                             (s.accepted ? "accepted" : "rejected") + ") planned " +
                             std::to_string(s.planned) + ", drew " + std::to_string(s.take));
    }
    moved += s.take > s.planned ? s.take - s.planned : 0;
    out.strata.push_back({s.length, s.accepted, s.planned, s.pool.size(), s.take});
  }

  if (moved > 0) {
    out.warnings.push_back(std::to_string(moved) + " traces rebalanced into strata with spare traces");
  }
  SplitPair split;
  for (std::size_t i = 0; i < chosen.size(); ++i) (i % 2 == 0 ? split.train : split.test).push_back(chosen[i]);
  if (chosen.size() < total) {
    out.with_replacement = true;
    out.warnings.push_back("only " + std::to_string(chosen.size()) + " distinct traces for lengths " +
                           std::to_string(lo) + ".." + std::to_string(hi) +
                           "; splits filled by sampling with replacement");
    if (split.test.empty()) split.test = split.train;  // a single trace exists
    for (auto* part : {&split.train, &split.test}) {
      const std::size_t distinct = part->size();
      while (part->size() < per_split) part->push_back((*part)[rng() % distinct]);
    }
  }
  return split;
}

void WarnOnBalance(SymbolicDataset& out) {
  std::size_t acc = 0, all = 0;
  for (const auto* part : {&out.train, &out.test}) {
    for (const auto& t : *part) acc += t.accepted ? 1 : 0;
    all += part->size();
  }
  if (acc == 0 || acc == all) {
    out.warnings.push_back(std::string("every trace is ") + (acc ? "accepted" : "rejected") +
                           "; the label is uninformative");
  }
}

}  // namespace

std::string_view ToString(Protocol protocol) {
  return protocol == Protocol::kExhaustive ? "exhaustive" : "stratified";
}

Protocol ParseProtocol(std::string_view text) {
  if (text == "exhaustive") return Protocol::kExhaustive;
  if (text == "stratified") return Protocol::kStratified;
  throw ValidationError("unknown sampling protocol '" + std::string(text) + "'");
}

SamplingPlan SamplingPlan::Exhaustive(std::size_t atoms, TraceMode mode) {
  SamplingPlan p;
  p.atoms = atoms;
  p.min_len = 1;
  p.max_len = 4;
  p.mode = mode;
  p.protocol = Protocol::kExhaustive;
  return p;
}

SamplingPlan SamplingPlan::Stratified(std::size_t atoms, std::size_t max_len, TraceMode mode,
                                      std::uint64_t seed) {
  SamplingPlan p;
  p.atoms = atoms;
  p.min_len = mode == TraceMode::kMe ? 2 : 1;
  p.max_len = max_len;
  p.mode = mode;
  p.protocol = Protocol::kStratified;
  p.seed = seed;
  return p;
}

void SamplingPlan::Validate() const {
  if (atoms < 1 || atoms > 10) throw ValidationError("atoms must be in 1..10 (one digit per atom)");
  if (min_len < 1 || min_len > max_len) throw ValidationError("need 1 <= min_len <= max_len");
  if (per_split == 0) throw ValidationError("per_split must be positive");
  if (!(short_fraction >= 0.0 && short_fraction <= 1.0)) throw ValidationError("short_fraction must lie in [0,1]");
}

SymbolicDataset SampleSymbolicDataset(const Formula& phi, const Alphabet& alphabet, const SamplingPlan& plan) {
  plan.Validate();
  if (alphabet.size() != plan.atoms) throw ValidationError("alphabet size differs from the plan");
  for (const auto& a : phi.atoms()) {
    if (!alphabet.contains(a)) throw ValidationError("formula atom '" + a + "' is not in the alphabet");
  }
  SymbolicDataset out;
  if (plan.protocol == Protocol::kExhaustive) {
    ForEachTrace(alphabet.size(), plan.min_len, plan.max_len, plan.mode, [&](const SymbolicTrace& t) {
      out.train.push_back({t, Satisfies(t, phi, alphabet)});
      return true;
    });
    out.test = out.train;
    WarnOnBalance(out);
    return out;
  }

  std::mt19937_64 rng(plan.seed);
  auto append = [&](SplitPair part) {
    out.train.insert(out.train.end(), part.train.begin(), part.train.end());
    out.test.insert(out.test.end(), part.test.begin(), part.test.end());
  };
  if (plan.mode == TraceMode::kNme && plan.min_len <= plan.short_len && plan.short_len < plan.max_len) {
    const auto short_count = static_cast<std::size_t>(std::llround(plan.short_fraction * plan.per_split));
    if (short_count > 0) {
      append(Stratify(phi, alphabet, plan.mode, plan.min_len, plan.short_len, short_count, rng, out));
    }
    if (short_count < plan.per_split) {
      append(Stratify(phi, alphabet, plan.mode, plan.short_len + 1, plan.max_len,
                      plan.per_split - short_count, rng, out));
    }
  } else {
    append(Stratify(phi, alphabet, plan.mode, plan.min_len, plan.max_len, plan.per_split, rng, out));
  }
  WarnOnBalance(out);
  return out;
}

std::vector<DatasetRecord> AttachImages(std::span<const LabelledTrace> traces, const Formula& phi,
                                        const Alphabet& alphabet, TraceMode mode, const MnistStore& store,
                                        std::size_t copies, std::uint64_t seed) {
  if (copies == 0) throw ValidationError("copies must be positive");
  if (alphabet.size() > 10) throw ValidationError("at most 10 atoms can be drawn as digits");
  for (std::size_t j = 0; j < alphabet.size(); ++j) {
    if (store.by_digit(j).empty()) {
      throw ValidationError("MNIST " + std::string(ToString(store.split())) + " split has no images of digit " +
                            std::to_string(j));
    }
  }
  const std::string text = FormatFormula(phi);
  std::mt19937_64 rng(seed);
  std::vector<DatasetRecord> records;
  records.reserve(traces.size() * copies);
  for (const auto& lt : traces) {
    ValidateTrace(lt.trace, alphabet);
    if (!MatchesMode(lt.trace, mode)) throw ValidationError("trace does not fit the " + std::string(ToString(mode)) + " mode");
    for (std::size_t c = 0; c < copies; ++c) {
      DatasetRecord r{text, alphabet.atoms(), mode, store.split(), lt.trace, lt.accepted, {}};
      for (AtomSet s : lt.trace.instants) {
        std::vector<std::uint32_t> ids;
        for (std::size_t j = 0; j < alphabet.size(); ++j) {
          if ((s >> j) & 1U) {
            const auto& pool = store.by_digit(j);
            ids.push_back(pool[rng() % pool.size()]);
          }
        }
        r.images.push_back(std::move(ids));
      }
      records.push_back(std::move(r));
    }
  }
  return records;
}

std::vector<double> ComposeObservation(const MnistStore& store, std::span<const std::uint32_t> images) {
  std::vector<double> x(store.pixels(), 0.0);
  for (auto id : images) {
    const auto img = store.image(id);
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = std::max(x[k], static_cast<double>(img[k]));
  }
  return x;
}

std::string RecordToJson(const DatasetRecord& r) {
  json j;
  j["formula"] = r.formula;
  j["alphabet"] = r.alphabet;
  j["mode"] = std::string(ToString(r.mode));
  j["split"] = std::string(ToString(r.split));
  j["trace"] = FormatTrace(r.trace, Alphabet(r.alphabet));
  j["label"] = r.accepted;
  j["images"] = r.images;
  return j.dump();
}

void WriteDataset(std::ostream& out, std::span<const DatasetRecord> records) {
  for (const auto& r : records) out << RecordToJson(r) << '\n';
  if (!out) throw IoError("failed writing dataset");
}

void WriteDataset(const std::filesystem::path& path, std::span<const DatasetRecord> records) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  WriteDataset(out, records);
}

DatasetReader::DatasetReader(std::istream& in, const MnistStore* store) : in_(&in), store_(store) {}

DatasetReader::DatasetReader(const std::filesystem::path& path, const MnistStore* store)
    : owned_(std::make_unique<std::ifstream>(path)), in_(owned_.get()), store_(store) {
  if (!*owned_) throw IoError("cannot open " + path.string());
}

DatasetReader::~DatasetReader() = default;

bool DatasetReader::Next(DatasetRecord& record) {
  std::string text;
  while (std::getline(*in_, text)) {
    ++line_;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "dataset line " + std::to_string(line_) + ": ";
    DatasetRecord r;
    try {
      const json j = json::parse(text);
      r.formula = j.at("formula").get<std::string>();
      r.alphabet = j.at("alphabet").get<std::vector<std::string>>();
      r.mode = ParseTraceMode(j.at("mode").get<std::string>());
      r.split = ParseSplit(j.at("split").get<std::string>());
      r.trace = ParseTrace(j.at("trace").get<std::string>(), Alphabet(r.alphabet));
      r.accepted = j.at("label").get<bool>();
      r.images = j.at("images").get<std::vector<std::vector<std::uint32_t>>>();
    } catch (const json::exception& e) {
      throw FormatError(where + e.what());
    } catch (const Error& e) {
      throw FormatError(where + e.what());
    }
    try {
      Check(r);
    } catch (const Error& e) {
      throw ValidationError(where + e.what());
    }
    record = std::move(r);
    return true;
  }
  return false;
}

void DatasetReader::Check(const DatasetRecord& r) const {
  const Alphabet alphabet(r.alphabet);
  auto key = std::make_pair(r.formula, r.alphabet);
  auto it = formulas_.find(key);
  if (it == formulas_.end()) it = formulas_.emplace(key, ParseFormula(r.formula, alphabet)).first;
  if (!MatchesMode(r.trace, r.mode)) throw ValidationError("trace does not fit its mode");
  if (Satisfies(r.trace, it->second, alphabet) != r.accepted) {
    throw ValidationError("label disagrees with the formula on this trace");
  }
  if (r.images.size() != r.trace.length()) throw ValidationError("one image list per instant required");
  for (std::size_t i = 0; i < r.trace.length(); ++i) {
    const AtomSet s = r.trace.instants[i];
    if (r.images[i].size() != static_cast<std::size_t>(std::popcount(s))) {
      throw ValidationError("instant " + std::to_string(i + 1) + " needs one image per true atom");
    }
    if (!store_) continue;
    if (store_->split() != r.split) throw ValidationError("record split differs from the image store");
    std::size_t k = 0;
    for (std::size_t j = 0; j < alphabet.size(); ++j) {
      if (!((s >> j) & 1U)) continue;
      const auto id = r.images[i][k++];
      if (id >= store_->size()) throw ValidationError("image id " + std::to_string(id) + " out of range");
      if (store_->label(id) != j) {
        throw ValidationError("image " + std::to_string(id) + " shows digit " + std::to_string(store_->label(id)) +
                              ", expected " + std::to_string(j));
      }
    }
  }
}

std::vector<DatasetRecord> ReadDataset(const std::filesystem::path& path, const MnistStore* store) {
  DatasetReader reader(path, store);
  std::vector<DatasetRecord> out;
  DatasetRecord r;
  while (reader.Next(r)) out.push_back(std::move(r));
  return out;
}

}  // namespace tilr
