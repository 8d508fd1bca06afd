#include "tilr/perception.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tilr/error.hpp"

namespace tilr {

using grad::Tensor;
using grad::Var;
using json = nlohmann::json;

namespace {

constexpr const char* kCheckpointFormat = "tilr-perception";
constexpr int kCheckpointVersion = 1;

Tensor HeUniform(std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Tensor t({fan_in, fan_out});
  for (double& x : t.data()) x = dist(rng);
  return t;
}

}  // namespace

PerceptionModel PerceptionModel::Init(std::size_t outputs, TraceMode head, std::uint64_t seed,
                                      std::size_t hidden) {
  if (outputs == 0 || hidden == 0) throw ValidationError("perception model needs non-zero layer sizes");
  std::mt19937_64 rng(seed);
  PerceptionModel m;
  m.head = head;
  m.w1 = HeUniform(kImagePixels, hidden, rng);
  m.b1 = Tensor({hidden});
  m.w2 = HeUniform(hidden, outputs, rng);
  m.b2 = Tensor({outputs});
  return m;
}

PerceptionModel PerceptionModel::Zeros(std::size_t outputs, TraceMode head, std::size_t hidden) {
  if (outputs == 0 || hidden == 0) throw ValidationError("perception model needs non-zero layer sizes");
  PerceptionModel m;
  m.head = head;
  m.w1 = Tensor({kImagePixels, hidden});
  m.b1 = Tensor({hidden});
  m.w2 = Tensor({hidden, outputs});
  m.b2 = Tensor({outputs});
  return m;
}

BoundModel Bind(grad::Tape& tape, const PerceptionModel& model) {
  return {model.head, tape.Leaf(model.w1), tape.Leaf(model.b1), tape.Leaf(model.w2),
          tape.Leaf(model.b2)};
}

Var Forward(const BoundModel& model, const Var& images) {
  const Tensor& x = images.value();
  if (x.rank() != 2 || x.cols() != kImagePixels) {
    throw ValidationError("perception input must be [m, 784]");
  }
  Var h = grad::Relu(grad::AddBias(grad::MatMul(images, model.w1), model.b1));
  Var z = grad::AddBias(grad::MatMul(h, model.w2), model.b2);
  return model.head == TraceMode::kMe ? grad::SoftmaxRows(z) : grad::Sigmoid(z);
}

Tensor PerceiveBatch(const PerceptionModel& model, const Tensor& images) {
  grad::Tape tape;
  BoundModel bound{model.head, tape.Input(model.w1), tape.Input(model.b1), tape.Input(model.w2),
                   tape.Input(model.b2)};
  return Forward(bound, tape.Input(images)).value();
}

std::vector<double> Perceive(const PerceptionModel& model, std::span<const double> image) {
  if (image.size() != kImagePixels) {
    throw ValidationError("image must have 784 pixels, got " + std::to_string(image.size()));
  }
  Tensor x({1, kImagePixels}, std::vector<double>(image.begin(), image.end()));
  return PerceiveBatch(model, x).data();
}

std::string CheckpointToJson(const PerceptionModel& model) {
  json j;
  j["format"] = kCheckpointFormat;
  j["version"] = kCheckpointVersion;
  j["head"] = std::string(ToString(model.head));
  j["input"] = kImagePixels;
  j["hidden"] = model.hidden();
  j["outputs"] = model.outputs();
  const char* names[] = {"w1", "b1", "w2", "b2"};
  const auto params = model.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) {
    j["tensors"][names[i]] = {{"shape", params[i]->shape()}, {"values", params[i]->data()}};
  }
  return j.dump();
}

PerceptionModel CheckpointFromJson(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != kCheckpointFormat) {
      throw FormatError("not a perception checkpoint");
    }
    if (j.at("version").get<int>() != kCheckpointVersion) {
      throw FormatError("unsupported checkpoint version " + std::to_string(j.at("version").get<int>()));
    }
    const auto hidden = j.at("hidden").get<std::size_t>();
    const auto outputs = j.at("outputs").get<std::size_t>();
    if (j.at("input").get<std::size_t>() != kImagePixels) throw FormatError("checkpoint input size must be 784");
    PerceptionModel m = PerceptionModel::Zeros(outputs, ParseTraceMode(j.at("head").get<std::string>()), hidden);
    const char* names[] = {"w1", "b1", "w2", "b2"};
    auto params = m.parameters();
    for (std::size_t i = 0; i < params.size(); ++i) {
      const json& t = j.at("tensors").at(names[i]);
      auto shape = t.at("shape").get<std::vector<std::size_t>>();
      if (shape != params[i]->shape()) throw FormatError(std::string("checkpoint tensor ") + names[i] + " has the wrong shape");
      *params[i] = Tensor(std::move(shape), t.at("values").get<std::vector<double>>());
    }
    return m;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed checkpoint: ") + e.what());
  } catch (const ValidationError& e) {
    throw FormatError(std::string("malformed checkpoint: ") + e.what());
  }
}

void SaveCheckpoint(const std::filesystem::path& path, const PerceptionModel& model) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << CheckpointToJson(model) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

PerceptionModel LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return CheckpointFromJson(ss.str());
}

}  // namespace tilr
