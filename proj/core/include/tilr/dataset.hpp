#pragma once

// Benchmark datasets: labelled symbolic traces, image sequences built from
// MNIST, and their JSON Lines serialisation.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "tilr/crisp.hpp"
#include "tilr/formula.hpp"
#include "tilr/mnist.hpp"

namespace tilr {

struct LabelledTrace {
  SymbolicTrace trace;
  bool accepted = false;
  friend bool operator==(const LabelledTrace&, const LabelledTrace&) = default;
};

enum class Protocol {
  kExhaustive,  // every trace in [min_len, max_len], same traces in both splits
  kStratified,  // balanced over (length, label) cells, disjoint splits
};
std::string_view ToString(Protocol protocol);
Protocol ParseProtocol(std::string_view text);

struct SamplingPlan {
  std::size_t atoms = 2;
  std::size_t min_len = 2;
  std::size_t max_len = 5;
  TraceMode mode = TraceMode::kMe;
  Protocol protocol = Protocol::kStratified;
  std::size_t per_split = 500;
  /// NME only: share of each split drawn from all traces of length <= short_len.
  double short_fraction = 0.2;
  std::size_t short_len = 4;
  std::uint64_t seed = 0;

  /// Exhaustive lengths 1..4.
  static SamplingPlan Exhaustive(std::size_t atoms, TraceMode mode);
  /// 500 + 500 traces; ME from length 2, NME with the short-trace share.
  static SamplingPlan Stratified(std::size_t atoms, std::size_t max_len, TraceMode mode,
                                 std::uint64_t seed);

  /// Throws ValidationError on an empty length range, atoms outside 1..10,
  /// per_split == 0 or a fraction outside [0,1].
  void Validate() const;
};

struct StratumReport {
  std::size_t length;
  bool accepted;
  std::size_t planned;
  std::size_t available;  // distinct traces found (capped by the search)
  std::size_t drawn;
};

struct SymbolicDataset {
  std::vector<LabelledTrace> train;
  std::vector<LabelledTrace> test;
  std::vector<StratumReport> strata;
  std::vector<std::string> warnings;
  /// Some split had to repeat traces to reach its size.
  bool with_replacement = false;
};

/// Labels traces with the crisp oracle. Stratified plans split distinct
/// traces between train and test; strata without traces are dropped and
/// their quota moved to the others, with a warning. Deterministic in seed.
SymbolicDataset SampleSymbolicDataset(const Formula& phi, const Alphabet& alphabet,
                                      const SamplingPlan& plan);

struct DatasetRecord {
  std::string formula;
  std::vector<std::string> alphabet;
  TraceMode mode = TraceMode::kMe;
  Split split = Split::kTrain;
  SymbolicTrace trace;
  bool accepted = false;
  /// Per instant, one image index per true atom, in atom order. Atom p_j is
  /// drawn as digit j.
  std::vector<std::vector<std::uint32_t>> images;

  friend bool operator==(const DatasetRecord&, const DatasetRecord&) = default;
};

/// `copies` image sequences per trace, images drawn from `store` (its split
/// becomes the records' split). Throws ValidationError if a needed digit
/// has no images.
std::vector<DatasetRecord> AttachImages(std::span<const LabelledTrace> traces, const Formula& phi,
                                        const Alphabet& alphabet, TraceMode mode,
                                        const MnistStore& store, std::size_t copies,
                                        std::uint64_t seed);

/// Single 784-pixel observation: the pixel-wise maximum of the images.
std::vector<double> ComposeObservation(const MnistStore& store, std::span<const std::uint32_t> images);

std::string RecordToJson(const DatasetRecord& record);
void WriteDataset(std::ostream& out, std::span<const DatasetRecord> records);
void WriteDataset(const std::filesystem::path& path, std::span<const DatasetRecord> records);

/// Streaming JSONL reader. Every record is checked: trace shape for its
/// mode, label against the crisp oracle, one image per true atom and, when
/// a store is given, image range, split and digit class.
class DatasetReader {
 public:
  explicit DatasetReader(std::istream& in, const MnistStore* store = nullptr);
  explicit DatasetReader(const std::filesystem::path& path, const MnistStore* store = nullptr);
  ~DatasetReader();

  /// False at end of input. Throws FormatError / ValidationError naming the line.
  bool Next(DatasetRecord& record);
  std::size_t line() const noexcept { return line_; }

 private:
  void Check(const DatasetRecord& record) const;

  std::unique_ptr<std::istream> owned_;
  std::istream* in_;
  const MnistStore* store_;
  std::size_t line_ = 0;
  mutable std::map<std::pair<std::string, std::vector<std::string>>, Formula> formulas_;
};

std::vector<DatasetRecord> ReadDataset(const std::filesystem::path& path,
                                       const MnistStore* store = nullptr);

}  // namespace tilr
