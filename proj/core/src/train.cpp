#include "tilr/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <random>

#include "tilr/adam.hpp"
#include "tilr/error.hpp"
#include "tilr/fuzzy.hpp"

namespace tilr {

using grad::Tensor;
using grad::Var;

namespace {

using Clock = std::chrono::steady_clock;

double MinutesSince(Clock::time_point start) {
  return std::chrono::duration<double, std::ratio<60>>(Clock::now() - start).count();
}

double Percent(std::size_t hits, std::size_t total) {
  return total == 0 ? 0.0 : 100.0 * static_cast<double>(hits) / static_cast<double>(total);
}

}  // namespace

void TrainConfig::Validate() const {
  if (epochs < 1) throw ValidationError("epochs must be at least 1");
  if (batch_size < 1) throw ValidationError("batch_size must be at least 1");
  if (!(lr > 0.0)) throw ValidationError("lr must be positive");
  if (!(timeout_minutes > 0.0)) throw ValidationError("timeout_minutes must be positive");
  if (hidden < 1) throw ValidationError("hidden must be at least 1");
  refinement.Validate();
}

Task TaskOf(std::span<const DatasetRecord> records) {
  if (records.empty()) throw ValidationError("dataset is empty");
  const DatasetRecord& first = records.front();
  for (const auto& r : records) {
    if (r.formula != first.formula || r.alphabet != first.alphabet || r.mode != first.mode) {
      throw ValidationError("dataset mixes formulas, alphabets or modes");
    }
  }
  Alphabet alphabet(first.alphabet);
  if (alphabet.size() > 10) throw ValidationError("at most 10 atoms can be grounded on digits");
  std::string label = "y";
  while (alphabet.contains(label)) label += "_";
  return {ParseFormula(first.formula, alphabet), alphabet, first.mode, label};
}

Tensor Observations(std::span<const DatasetRecord> records, const MnistStore& store) {
  std::size_t rows = 0;
  for (const auto& r : records) rows += r.images.size();
  Tensor x({rows, kImagePixels});
  std::size_t row = 0;
  for (const auto& r : records) {
    for (const auto& ids : r.images) {
      const auto obs = ComposeObservation(store, ids);
      if (obs.size() != kImagePixels) throw ValidationError("MNIST images must be 28x28");
      std::copy(obs.begin(), obs.end(), x.data().begin() + static_cast<std::ptrdiff_t>(row * kImagePixels));
      ++row;
    }
  }
  return x;
}

double KnowledgeLoss(const PerceptionModel& model, const CompiledGraph& graph, const Tensor& observations,
                     std::span<const double> targets, const RefinementConfig& cfg,
                     std::vector<Tensor>* grads) {
  const std::size_t n = graph.trace_length(), width = graph.alphabet().size();
  const std::size_t batch = targets.size();
  if (graph.labels().size() != 1) throw ValidationError("knowledge graph must have exactly one label");
  if (model.outputs() != width) throw ValidationError("model outputs differ from the alphabet size");
  if (observations.rank() != 2 || observations.rows() != batch * n) {
    throw ValidationError("observations must hold batch * trace_length rows");
  }
  grad::Tape tape;
  const BoundModel bound = Bind(tape, model);
  const Var probs = Forward(bound, tape.Input(observations));

  std::vector<Var> yhat;
  yhat.reserve(batch);
  std::vector<Var> props(n * width);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t k = 0; k < n * width; ++k) props[k] = grad::Element(probs, b * n * width + k);
    auto state = IlrRefineValues<Var>(graph, props, {Var(0.0)}, cfg);
    yhat.push_back(state.labels[0]);
  }
  const bool any_tape = std::any_of(yhat.begin(), yhat.end(), [](const Var& v) { return !v.is_constant(); });
  const Tensor target_tensor({batch}, std::vector<double>(targets.begin(), targets.end()));
  if (!any_tape) {
    double loss = 0.0;
    for (std::size_t b = 0; b < batch; ++b) {
      loss += grad::BinaryCrossEntropy(yhat[b], Tensor::Scalar(targets[b])).scalar();
    }
    if (grads) {
      grads->clear();
      for (const auto* p : model.parameters()) grads->emplace_back(p->shape(), 0.0);
    }
    return loss / static_cast<double>(batch);
  }
  const Var loss = grad::BinaryCrossEntropy(grad::Stack(yhat), target_tensor);
  if (grads) {
    tape.Backward(loss);
    grads->clear();
    for (const Var& p : bound.parameters()) grads->push_back(tape.Grad(p));
  }
  return loss.scalar();
}

GroundingAccuracy EvaluateGrounding(const PerceptionModel& model, std::span<const DatasetRecord> records,
                                    const MnistStore& store) {
  std::size_t hits = 0, total = 0, exact = 0, instants = 0;
  for (const auto& r : records) {
    if (r.mode != model.head) throw ValidationError("record mode differs from the model head");
    const Tensor out = PerceiveBatch(model, Observations({&r, 1}, store));
    const std::size_t width = out.cols();
    for (std::size_t i = 0; i < r.trace.length(); ++i) {
      bool all = true;
      if (r.mode == TraceMode::kMe) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < width; ++j) {
          if (out.at(i, j) > out.at(i, best)) best = j;
        }
        all = r.trace.holds(i, best);
        hits += all ? 1 : 0;
        ++total;
      } else {
        for (std::size_t j = 0; j < width; ++j) {
          const bool ok = (out.at(i, j) >= 0.5) == r.trace.holds(i, j);
          hits += ok ? 1 : 0;
          all = all && ok;
          ++total;
        }
      }
      exact += all ? 1 : 0;
      ++instants;
    }
  }
  return {Percent(hits, total), Percent(exact, instants)};
}

double EvaluateSequence(const PerceptionModel& model, std::span<const DatasetRecord> records,
                        const MnistStore& store, const RefinementConfig& cfg) {
  if (records.empty()) return 0.0;
  const Task task = TaskOf(records);
  GraphCache graphs(task.alphabet, {task.label});
  const Formula knowledge = KnowledgeFormula(task.phi, task.label);
  std::size_t hits = 0;
  for (const auto& r : records) {
    const Tensor out = PerceiveBatch(model, Observations({&r, 1}, store));
    const FuzzyTrace trace(r.trace.length(), task.alphabet.size(), out.data());
    const auto graph = graphs.Get(knowledge, r.trace.length());
    const RefinementResult res = IlrRefine(*graph, trace, LabelVector::Zeros({task.label}), cfg);
    hits += Predict(res)[0] == r.accepted ? 1 : 0;
  }
  return Percent(hits, records.size());
}

TrainResult Train(const TrainConfig& config, std::span<const DatasetRecord> train, const MnistStore& train_store,
                  std::span<const DatasetRecord> test, const MnistStore& test_store, const EpochCallback& on_epoch) {
  config.Validate();
  const Task task = TaskOf(train);
  if (!test.empty()) {
    const Task t = TaskOf(test);
    if (FormatFormula(t.phi) != FormatFormula(task.phi) || !(t.alphabet == task.alphabet) || t.mode != task.mode) {
      throw ValidationError("train and test datasets describe different tasks");
    }
  }
  const auto start = Clock::now();
  std::mt19937_64 rng(config.seed);
  TrainResult result{PerceptionModel::Init(task.alphabet.size(), task.mode, rng(), config.hidden), {}};
  AdamState adam;
  adam.lr = config.lr;
  GraphCache graphs(task.alphabet, {task.label});
  const Formula knowledge = KnowledgeFormula(task.phi, task.label);

  std::map<std::size_t, std::vector<std::size_t>> by_length;
  for (std::size_t i = 0; i < train.size(); ++i) by_length[train[i].trace.length()].push_back(i);

  auto evaluate = [&](EpochMetrics& m) {
    if (test.empty()) return;
    const auto g = EvaluateGrounding(result.model, test, test_store);
    m.grounding_accuracy = g.accuracy;
    m.grounding_exact = g.exact;
    m.sequence_accuracy = EvaluateSequence(result.model, test, test_store, config.refinement);
  };

  std::vector<Tensor> grads;
  for (std::size_t epoch = 1; epoch <= config.epochs && !result.metrics.timed_out; ++epoch) {
    std::vector<std::vector<std::size_t>> batches;
    for (auto& [len, idx] : by_length) {
      std::shuffle(idx.begin(), idx.end(), rng);
      for (std::size_t s = 0; s < idx.size(); s += config.batch_size) {
        batches.emplace_back(idx.begin() + static_cast<std::ptrdiff_t>(s),
                             idx.begin() + static_cast<std::ptrdiff_t>(std::min(idx.size(), s + config.batch_size)));
      }
    }
    std::shuffle(batches.begin(), batches.end(), rng);

    EpochMetrics m;
    m.epoch = epoch;
    double loss_sum = 0.0;
    std::size_t seen = 0;
    for (const auto& batch : batches) {
      if (MinutesSince(start) > config.timeout_minutes) {
        result.metrics.timed_out = true;
        m.partial = true;
        break;
      }
      std::vector<DatasetRecord> records;
      std::vector<double> targets;
      for (std::size_t i : batch) {
        records.push_back(train[i]);
        targets.push_back(train[i].accepted ? 1.0 : 0.0);
      }
      const auto graph = graphs.Get(knowledge, records.front().trace.length());
      const double loss = KnowledgeLoss(result.model, *graph, Observations(records, train_store), targets,
                                        config.refinement, &grads);
      loss_sum += loss * static_cast<double>(batch.size());
      seen += batch.size();
      AdamStep(result.model.parameters(), grads, adam);
    }
    m.loss = seen ? loss_sum / static_cast<double>(seen) : 0.0;
    if (config.evaluate_each_epoch || epoch == config.epochs || result.metrics.timed_out) evaluate(m);
    m.minutes = MinutesSince(start);
    result.metrics.epochs.push_back(m);
    if (on_epoch) on_epoch(m);
  }
  const EpochMetrics& last = result.metrics.epochs.back();
  result.metrics.sequence_accuracy = last.sequence_accuracy;
  result.metrics.grounding_accuracy = last.grounding_accuracy;
  result.metrics.grounding_exact = last.grounding_exact;
  result.metrics.minutes = MinutesSince(start);
  return result;
}

TrainResult Train(const TrainConfig& config, const EpochCallback& on_epoch) {
  config.Validate();
  const MnistStore train_store = LoadMnist(config.mnist_dir, Split::kTrain);
  const MnistStore test_store = LoadMnist(config.mnist_dir, Split::kTest);
  const auto train = ReadDataset(config.train_data, &train_store);
  std::vector<DatasetRecord> test;
  if (!config.test_data.empty()) test = ReadDataset(config.test_data, &test_store);
  TrainResult result = Train(config, train, train_store, test, test_store, on_epoch);
  if (!config.checkpoint.empty()) SaveCheckpoint(config.checkpoint, result.model);
  if (!config.metrics.empty()) WriteMetricsCsv(config.metrics, result.metrics);
  return result;
}

void WriteMetricsCsv(const std::filesystem::path& path, const Metrics& metrics) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "epoch,loss,sequence_accuracy,grounding_accuracy,grounding_exact,minutes,partial\n";
  out.precision(10);
  for (const auto& e : metrics.epochs) {
    out << e.epoch << ',' << e.loss << ',' << e.sequence_accuracy << ',' << e.grounding_accuracy << ','
        << e.grounding_exact << ',' << e.minutes << ',' << (e.partial ? 1 : 0) << '\n';
  }
}

}  // namespace tilr
