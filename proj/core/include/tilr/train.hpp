#pragma once

// Weakly supervised training: perception -> fuzzy trace -> refinement of the
// knowledge formula -> binary cross-entropy on the refined label.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tilr/autograd.hpp"
#include "tilr/dataset.hpp"
#include "tilr/graph.hpp"
#include "tilr/ilr.hpp"
#include "tilr/mnist.hpp"
#include "tilr/perception.hpp"

namespace tilr {

struct TrainConfig {
  std::filesystem::path train_data;
  std::filesystem::path test_data;
  std::filesystem::path mnist_dir;
  std::filesystem::path checkpoint;  // written after training when non-empty
  std::filesystem::path metrics;     // per-epoch CSV when non-empty
  std::size_t epochs = 20;
  std::size_t batch_size = 64;
  double lr = 0.001;
  std::uint64_t seed = 0;
  double timeout_minutes = 60.0;
  std::size_t hidden = 128;
  /// Test-set metrics after every epoch instead of only at the end.
  bool evaluate_each_epoch = true;
  RefinementConfig refinement;

  /// Throws ValidationError unless epochs >= 1, batch_size >= 1, lr > 0 and
  /// timeout_minutes > 0.
  void Validate() const;
};

struct EpochMetrics {
  std::size_t epoch = 0;  // 1-based
  double loss = 0.0;      // mean training loss over the batches run
  double sequence_accuracy = 0.0;
  double grounding_accuracy = 0.0;
  double grounding_exact = 0.0;
  double minutes = 0.0;   // wall clock since training started
  bool partial = false;   // cut short by the timeout
};

struct Metrics {
  std::vector<EpochMetrics> epochs;
  double sequence_accuracy = 0.0;   // percent, test split
  double grounding_accuracy = 0.0;  // percent, test split
  double grounding_exact = 0.0;     // percent of instants with every atom right
  double minutes = 0.0;
  bool timed_out = false;
};

struct TrainResult {
  PerceptionModel model;
  Metrics metrics;
};

/// Formula, alphabet and mode shared by every record of a dataset.
struct Task {
  Formula phi;
  Alphabet alphabet;
  TraceMode mode;
  std::string label;  // label atom name, distinct from the alphabet
};
/// Throws ValidationError on an empty dataset or mixed records.
Task TaskOf(std::span<const DatasetRecord> records);

/// Row-major [sum of lengths, 784] observations of `records`, instant by instant.
grad::Tensor Observations(std::span<const DatasetRecord> records, const MnistStore& store);

/// Mean BCE between refined labels and `targets` for a batch of equal-length
/// sequences. `observations` holds batch * n rows. With `grads` non-null the
/// gradient w.r.t. {w1, b1, w2, b2} is stored there.
double KnowledgeLoss(const PerceptionModel& model, const CompiledGraph& graph,
                     const grad::Tensor& observations, std::span<const double> targets,
                     const RefinementConfig& cfg, std::vector<grad::Tensor>* grads = nullptr);

struct GroundingAccuracy {
  double accuracy = 0.0;  // ME: argmax hits; NME: per-atom hits at threshold 0.5
  double exact = 0.0;     // instants with every atom right
};
GroundingAccuracy EvaluateGrounding(const PerceptionModel& model, std::span<const DatasetRecord> records,
                                    const MnistStore& store);

/// Percentage of records whose refined, thresholded label matches.
double EvaluateSequence(const PerceptionModel& model, std::span<const DatasetRecord> records,
                        const MnistStore& store, const RefinementConfig& cfg = {});

using EpochCallback = std::function<void(const EpochMetrics&)>;

TrainResult Train(const TrainConfig& config, std::span<const DatasetRecord> train,
                  const MnistStore& train_store, std::span<const DatasetRecord> test,
                  const MnistStore& test_store, const EpochCallback& on_epoch = {});

/// Loads datasets and MNIST named in `config`, trains, and writes the
/// checkpoint and metrics files if requested.
TrainResult Train(const TrainConfig& config, const EpochCallback& on_epoch = {});

void WriteMetricsCsv(const std::filesystem::path& path, const Metrics& metrics);

}  // namespace tilr
