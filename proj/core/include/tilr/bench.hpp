#pragma once

// Benchmark suites: the exhaustive per-template protocol (RQ1) and the
// scalability grid over alphabet size and maximum length (RQ2).

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "tilr/crisp.hpp"
#include "tilr/ilr.hpp"
#include "tilr/train.hpp"

namespace tilr {

enum class Suite { kRq1, kRq2 };
std::string_view ToString(Suite suite);
Suite ParseSuite(std::string_view text);

struct BenchmarkConfig {
  Suite suite = Suite::kRq1;
  std::vector<TraceMode> modes{TraceMode::kMe, TraceMode::kNme};
  /// RQ1: template names to run (empty means the whole library).
  std::vector<std::string> templates;
  /// RQ2 grid.
  std::vector<std::size_t> atoms{2, 3, 4};
  std::vector<std::size_t> lengths{5, 10, 20};
  std::size_t formulas_per_size = 5;

  std::size_t epochs = 20;
  std::size_t copies = 5;
  std::uint64_t seed = 0;
  double timeout_minutes = 60.0;
  RefinementConfig refinement;
  std::filesystem::path mnist_dir;

  void Validate() const;
};

struct BenchmarkRun {
  Suite suite;
  TraceMode mode;
  std::size_t atoms;
  std::size_t max_len;
  std::size_t formula_index;  // template index (RQ1) or sample index (RQ2)
  std::string formula;
  bool ok = false;
  std::string error;
  Metrics metrics;
};

/// Runs every selected configuration; a failing run is recorded and the
/// suite continues. Throws ValidationError on an empty selection.
std::vector<BenchmarkRun> RunBenchmark(const BenchmarkConfig& config,
                                       const std::function<void(const BenchmarkRun&)>& on_run = {});

/// Formula sampled for RQ2 cell (atoms, index); shared by all lengths.
Formula Rq2Formula(std::size_t atoms, std::size_t index, std::uint64_t seed);

void WriteRunsCsv(const std::filesystem::path& path, const std::vector<BenchmarkRun>& runs);
/// Mean accuracy per setting, with the baseline columns left as NA.
void WriteRq1TableCsv(const std::filesystem::path& path, const std::vector<BenchmarkRun>& runs);
/// Full setting x |P| x length grid; cells without runs are NA.
void WriteRq2TableCsv(const std::filesystem::path& path, const std::vector<BenchmarkRun>& runs);

}  // namespace tilr
