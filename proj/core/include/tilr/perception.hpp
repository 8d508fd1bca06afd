#pragma once

// Perception network: a 784 -> hidden -> |P| MLP with a ReLU hidden layer
// and a softmax (ME) or sigmoid (NME) head.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tilr/autograd.hpp"
#include "tilr/crisp.hpp"

namespace tilr {

inline constexpr std::size_t kImagePixels = 28 * 28;

struct PerceptionModel {
  TraceMode head = TraceMode::kMe;
  grad::Tensor w1;  // [784, hidden]
  grad::Tensor b1;  // [hidden]
  grad::Tensor w2;  // [hidden, outputs]
  grad::Tensor b2;  // [outputs]

  /// He-uniform weights, zero biases. Deterministic in `seed`.
  static PerceptionModel Init(std::size_t outputs, TraceMode head, std::uint64_t seed,
                              std::size_t hidden = 128);
  /// All parameters zero.
  static PerceptionModel Zeros(std::size_t outputs, TraceMode head, std::size_t hidden = 128);

  std::size_t hidden() const { return b1.size(); }
  std::size_t outputs() const { return b2.size(); }
  std::vector<grad::Tensor*> parameters() { return {&w1, &b1, &w2, &b2}; }
  std::vector<const grad::Tensor*> parameters() const { return {&w1, &b1, &w2, &b2}; }
};

/// Parameters recorded as differentiable leaves on one tape.
struct BoundModel {
  TraceMode head;
  grad::Var w1, b1, w2, b2;

  std::vector<grad::Var> parameters() const { return {w1, b1, w2, b2}; }
};
BoundModel Bind(grad::Tape& tape, const PerceptionModel& model);

/// [m, 784] observations to [m, |P|] truth degrees.
grad::Var Forward(const BoundModel& model, const grad::Var& images);

/// Truth degrees for a single flattened 28x28 image in [0,1].
std::vector<double> Perceive(const PerceptionModel& model, std::span<const double> image);
/// Row-major [m, 784] batch to [m, |P|].
grad::Tensor PerceiveBatch(const PerceptionModel& model, const grad::Tensor& images);

/// JSON checkpoint; see README for the layout.
void SaveCheckpoint(const std::filesystem::path& path, const PerceptionModel& model);
PerceptionModel LoadCheckpoint(const std::filesystem::path& path);
std::string CheckpointToJson(const PerceptionModel& model);
PerceptionModel CheckpointFromJson(const std::string& text);

}  // namespace tilr
