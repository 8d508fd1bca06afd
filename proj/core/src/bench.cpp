#include "tilr/bench.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <tuple>

#include "tilr/declare.hpp"
#include "tilr/error.hpp"

namespace tilr {

namespace {

std::uint64_t Mix(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
  // splitmix64 over the combined key
  std::uint64_t z = seed ^ (a * 0x9E3779B97F4A7C15ULL) ^ (b * 0xC2B2AE3D27D4EB4FULL) ^ (c * 0x165667B19E3779F9ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::string Cell(std::optional<double> v) {
  if (!v) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", *v);
  return buf;
}

void RunOne(const BenchmarkConfig& config, BenchmarkRun& run, const Formula& phi, const SamplingPlan& plan,
            const MnistStore& train_store, const MnistStore& test_store) {
  const Alphabet alphabet = Alphabet::Indexed(run.atoms);
  const SymbolicDataset ds = SampleSymbolicDataset(phi, alphabet, plan);
  const auto train = AttachImages(ds.train, phi, alphabet, run.mode, train_store, config.copies,
                                  Mix(plan.seed, 1));
  const auto test = AttachImages(ds.test, phi, alphabet, run.mode, test_store, config.copies, Mix(plan.seed, 2));
  TrainConfig tc;
  tc.epochs = config.epochs;
  tc.seed = Mix(plan.seed, 3);
  tc.timeout_minutes = config.timeout_minutes;
  tc.refinement = config.refinement;
  tc.evaluate_each_epoch = false;
  run.metrics = Train(tc, train, train_store, test, test_store).metrics;
  run.ok = true;
}

}  // namespace

std::string_view ToString(Suite suite) { return suite == Suite::kRq1 ? "rq1" : "rq2"; }

Suite ParseSuite(std::string_view text) {
  if (text == "rq1") return Suite::kRq1;
  if (text == "rq2") return Suite::kRq2;
  throw ValidationError("unknown suite '" + std::string(text) + "' (expected rq1 or rq2)");
}

void BenchmarkConfig::Validate() const {
  if (modes.empty()) throw ValidationError("benchmark selects no modes");
  if (suite == Suite::kRq2) {
    if (atoms.empty() || lengths.empty() || formulas_per_size == 0) {
      throw ValidationError("benchmark selects no configurations");
    }
    for (auto a : atoms) {
      if (a < 2 || a > 10) throw ValidationError("RQ2 alphabet sizes must lie in 2..10");
    }
    for (auto l : lengths) {
      if (l < 2) throw ValidationError("RQ2 maximum lengths must be at least 2");
    }
  }
  for (const auto& t : templates) {
    const auto& lib = DeclareLibrary();
    if (std::none_of(lib.begin(), lib.end(), [&](const DeclareTemplate& d) { return d.name == t; })) {
      throw ValidationError("unknown template '" + t + "'");
    }
  }
  if (copies == 0) throw ValidationError("copies must be positive");
  if (epochs == 0) throw ValidationError("epochs must be at least 1");
  if (!(timeout_minutes > 0.0)) throw ValidationError("timeout_minutes must be positive");
}

Formula Rq2Formula(std::size_t atoms, std::size_t index, std::uint64_t seed) {
  return SampleConjunctionFormula(Alphabet::Indexed(atoms), Mix(seed, atoms, index, 7)).formula;
}

std::vector<BenchmarkRun> RunBenchmark(const BenchmarkConfig& config,
                                       const std::function<void(const BenchmarkRun&)>& on_run) {
  config.Validate();
  const MnistStore train_store = LoadMnist(config.mnist_dir, Split::kTrain);
  const MnistStore test_store = LoadMnist(config.mnist_dir, Split::kTest);
  std::vector<BenchmarkRun> runs;
  auto finish = [&](BenchmarkRun& run, const Formula& phi, const SamplingPlan& plan) {
    try {
      RunOne(config, run, phi, plan, train_store, test_store);
    } catch (const std::exception& e) {
      run.ok = false;
      run.error = e.what();
    }
    runs.push_back(run);
    if (on_run) on_run(run);
  };

  if (config.suite == Suite::kRq1) {
    const auto& lib = DeclareLibrary();
    for (TraceMode mode : config.modes) {
      for (std::size_t i = 0; i < lib.size(); ++i) {
        if (!config.templates.empty() &&
            std::find(config.templates.begin(), config.templates.end(), lib[i].name) == config.templates.end()) {
          continue;
        }
        const Formula phi = DeclarePattern(CanonicalInstance(lib[i]));
        BenchmarkRun run{Suite::kRq1, mode, 2, 4, i, FormatFormula(phi), false, {}, {}};
        SamplingPlan plan = SamplingPlan::Exhaustive(2, mode);
        plan.seed = Mix(config.seed, i, static_cast<std::uint64_t>(mode));
        finish(run, phi, plan);
      }
    }
    return runs;
  }
  for (TraceMode mode : config.modes) {
    for (std::size_t atoms : config.atoms) {
      for (std::size_t len : config.lengths) {
        for (std::size_t k = 0; k < config.formulas_per_size; ++k) {
          const Formula phi = Rq2Formula(atoms, k, config.seed);
          BenchmarkRun run{Suite::kRq2, mode, atoms, len, k, FormatFormula(phi), false, {}, {}};
          const auto plan = SamplingPlan::Stratified(atoms, len, mode,
                                                     Mix(config.seed, atoms * 1000 + len, k,
                                                         static_cast<std::uint64_t>(mode) + 11));
          finish(run, phi, plan);
        }
      }
    }
  }
  return runs;
}

void WriteRunsCsv(const std::filesystem::path& path, const std::vector<BenchmarkRun>& runs) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "suite,mode,atoms,max_len,formula_index,formula,status,grounding_accuracy,grounding_exact,"
         "sequence_accuracy,minutes,epochs,timed_out,error\n";
  for (const auto& r : runs) {
    std::string err = r.error;
    std::replace(err.begin(), err.end(), '"', '\'');
    out << ToString(r.suite) << ',' << ToString(r.mode) << ',' << r.atoms << ',' << r.max_len << ','
        << r.formula_index << ",\"" << r.formula << "\"," << (r.ok ? "ok" : "failed") << ','
        << Cell(r.ok ? std::optional(r.metrics.grounding_accuracy) : std::nullopt) << ','
        << Cell(r.ok ? std::optional(r.metrics.grounding_exact) : std::nullopt) << ','
        << Cell(r.ok ? std::optional(r.metrics.sequence_accuracy) : std::nullopt) << ','
        << Cell(r.ok ? std::optional(r.metrics.minutes) : std::nullopt) << ',' << r.metrics.epochs.size() << ','
        << (r.metrics.timed_out ? 1 : 0) << ",\"" << err << "\"\n";
  }
}

void WriteRq1TableCsv(const std::filesystem::path& path, const std::vector<BenchmarkRun>& runs) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "setting,dfa_accuracy,dfa_wins,tilr_accuracy,tilr_wins,runs\n";
  for (TraceMode mode : {TraceMode::kMe, TraceMode::kNme}) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& r : runs) {
      if (r.suite == Suite::kRq1 && r.mode == mode && r.ok) {
        sum += r.metrics.grounding_accuracy;
        ++n;
      }
    }
    std::string name(ToString(mode));
    std::transform(name.begin(), name.end(), name.begin(), ::toupper);
    out << name << ",NA,NA," << Cell(n ? std::optional(sum / n) : std::nullopt) << ",NA," << n << '\n';
  }
}

void WriteRq2TableCsv(const std::filesystem::path& path, const std::vector<BenchmarkRun>& runs) {
  std::vector<std::size_t> lengths{5, 10, 20};
  std::vector<std::size_t> atoms{2, 3, 4};
  for (const auto& r : runs) {
    if (r.suite != Suite::kRq2) continue;
    if (std::find(lengths.begin(), lengths.end(), r.max_len) == lengths.end()) lengths.push_back(r.max_len);
    if (std::find(atoms.begin(), atoms.end(), r.atoms) == atoms.end()) atoms.push_back(r.atoms);
  }
  std::sort(lengths.begin(), lengths.end());
  std::sort(atoms.begin(), atoms.end());
  std::map<std::tuple<TraceMode, std::size_t, std::size_t>, std::pair<double, double>> sums;
  std::map<std::tuple<TraceMode, std::size_t, std::size_t>, std::size_t> counts;
  for (const auto& r : runs) {
    if (r.suite != Suite::kRq2 || !r.ok) continue;
    auto key = std::make_tuple(r.mode, r.atoms, r.max_len);
    sums[key].first += r.metrics.grounding_accuracy;
    sums[key].second += r.metrics.minutes;
    ++counts[key];
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "setting,atoms,dfa_time";
  for (auto l : lengths) {
    out << ",len" << l << "_dfa_acc,len" << l << "_dfa_time,len" << l << "_tilr_acc,len" << l << "_tilr_time";
  }
  out << '\n';
  for (TraceMode mode : {TraceMode::kMe, TraceMode::kNme}) {
    std::string name(ToString(mode));
    std::transform(name.begin(), name.end(), name.begin(), ::toupper);
    for (auto a : atoms) {
      out << name << ',' << a << ",NA";
      for (auto l : lengths) {
        const auto key = std::make_tuple(mode, a, l);
        const auto it = counts.find(key);
        std::optional<double> acc, time;
        if (it != counts.end()) {
          acc = sums[key].first / it->second;
          time = sums[key].second / it->second;
        }
        out << ",NA,NA," << Cell(acc) << ',' << Cell(time);
      }
      out << '\n';
    }
  }
}

}  // namespace tilr
