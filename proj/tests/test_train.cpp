#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "synthetic.hpp"
#include "tilr/bench.hpp"
#include "tilr/config.hpp"
#include "tilr/dataset.hpp"
#include "tilr/declare.hpp"
#include "tilr/error.hpp"
#include "tilr/train.hpp"

using namespace tilr;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / ("tilr_train_" + std::to_string(std::random_device{}()))) {
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

// Hand-built network that reads the synthetic digit bands almost perfectly.
PerceptionModel BandReader(std::size_t outputs, TraceMode head) {
  auto m = PerceptionModel::Zeros(outputs, head, 10);
  for (std::size_t p = 0; p < 780; ++p) m.w1.at(p, p / 78) = 1.0;
  for (std::size_t d = 0; d < 10; ++d) m.b1[d] = -30.0;
  for (std::size_t j = 0; j < outputs; ++j) {
    m.w2.at(j, j) = 1.0;
    m.b2[j] = head == TraceMode::kNme ? -15.0 : 0.0;
  }
  return m;
}

std::vector<DatasetRecord> Records(const Formula& phi, std::size_t atoms, TraceMode mode, const MnistStore& store,
                                   std::size_t copies = 1) {
  const Alphabet ab = Alphabet::Indexed(atoms);
  const auto ds = SampleSymbolicDataset(phi, ab, SamplingPlan::Exhaustive(atoms, mode));
  return AttachImages(store.split() == Split::kTrain ? ds.train : ds.test, phi, ab, mode, store, copies, 3);
}

void WriteMnist(const fs::path& dir, bool drop_zero) {
  for (auto [prefix, seed] : {std::pair{"train", 1}, std::pair{"t10k", 2}}) {
    std::vector<std::uint8_t> labels;
    auto img = synthetic::Images(3, seed, labels);
    if (drop_zero) {
      for (auto& l : labels) l = l == 0 ? 9 : l;
    }
    WriteIdxImages(dir / (std::string(prefix) + "-images-idx3-ubyte"), img);
    WriteIdxLabels(dir / (std::string(prefix) + "-labels-idx1-ubyte"), labels);
  }
}

}  // namespace

TEST_CASE("train config validation") {
  TrainConfig c;
  CHECK_NOTHROW(c.Validate());
  c.epochs = 0;
  CHECK_THROWS_AS(c.Validate(), ValidationError);
  c = {};
  c.batch_size = 0;
  CHECK_THROWS_AS(c.Validate(), ValidationError);
  c = {};
  c.lr = 0.0;
  CHECK_THROWS_AS(c.Validate(), ValidationError);
  c = {};
  c.timeout_minutes = 0.0;
  CHECK_THROWS_AS(c.Validate(), ValidationError);
  const auto store = synthetic::Store(Split::kTrain);
  const auto recs = Records(DeclarePattern({"existence", {"p0"}}), 2, TraceMode::kMe, store);
  c = {};
  c.epochs = 0;
  CHECK_THROWS_AS(Train(c, recs, store, recs, store), ValidationError);
}

TEST_CASE("key-value config files") {
  std::istringstream in("# training\nepochs = 3\n\nlr=0.01  # inline\ntrain_data = a b.jsonl\n");
  const KeyValues kv = ParseKeyValues(in);
  CHECK(kv.at("epochs") == "3");
  CHECK(kv.at("lr") == "0.01");
  CHECK(kv.at("train_data") == "a b.jsonl");
  TrainConfig c;
  ApplyTrainConfig(kv, c);
  CHECK(c.epochs == 3);
  CHECK(c.lr == 0.01);
  CHECK(c.train_data == "a b.jsonl");

  auto parse = [](const char* text) {
    std::istringstream s(text);
    return ParseKeyValues(s);
  };
  CHECK_THROWS_AS(parse("epochs 3\n"), FormatError);
  CHECK_THROWS_AS(parse(" = 3\n"), FormatError);
  CHECK_THROWS_AS(parse("a = 1\na = 2\n"), FormatError);
  try {
    parse("a = 1\nbroken\n");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(ApplyTrainConfig({{"colour", "red"}}, c), ValidationError);
  CHECK_THROWS_AS(ApplyTrainConfig({{"epochs", "many"}}, c), ValidationError);
  CHECK_THROWS_AS(ApplyTrainConfig({{"evaluate_each_epoch", "maybe"}}, c), ValidationError);
  ApplyTrainConfig({{"target", "0.9"}, {"max_iterations", "4"}, {"tolerance", "1e-3"}}, c);
  CHECK(c.refinement.target == 0.9);
  CHECK(c.refinement.max_iterations == 4);
  CHECK_THROWS_AS(ReadKeyValueFile("/nonexistent/tilr.cfg"), IoError);
}

TEST_CASE("task of a dataset") {
  const auto store = synthetic::Store(Split::kTrain);
  const auto recs = Records(DeclarePattern({"response", {"p0", "p1"}}), 2, TraceMode::kMe, store);
  const Task t = TaskOf(recs);
  CHECK(t.label == "y");
  CHECK(t.mode == TraceMode::kMe);
  CHECK(t.alphabet == Alphabet::Indexed(2));
  CHECK_THROWS_AS(TaskOf({}), ValidationError);
  auto mixed = recs;
  mixed[1].formula = "F p1";
  CHECK_THROWS_AS(TaskOf(mixed), ValidationError);
  auto clash = recs;
  for (auto& r : clash) r.alphabet = {"y", "p1"};
  for (auto& r : clash) r.formula = "F y";
  CHECK(TaskOf(clash).label != "y");
}

TEST_CASE("grounding of a uniform model is the leftmost base rate") {
  const auto store = synthetic::Store(Split::kTest);
  const auto me = Records(DeclarePattern({"response", {"p0", "p1"}}), 2, TraceMode::kMe, store);
  std::size_t instants = 0, leftmost = 0;
  for (const auto& r : me) {
    for (std::size_t i = 0; i < r.trace.length(); ++i) {
      ++instants;
      leftmost += r.trace.holds(i, 0);
    }
  }
  const auto g = EvaluateGrounding(PerceptionModel::Zeros(2, TraceMode::kMe), me, store);
  CHECK(g.accuracy == Catch::Approx(100.0 * leftmost / instants));
  CHECK(g.accuracy == Catch::Approx(50.0));

  const auto nme = Records(DeclarePattern({"response", {"p0", "p1"}}), 2, TraceMode::kNme, store);
  std::size_t cells = 0, on = 0, full = 0, steps = 0;
  for (const auto& r : nme) {
    for (std::size_t i = 0; i < r.trace.length(); ++i) {
      ++steps;
      full += r.trace.holds(i, 0) && r.trace.holds(i, 1);
      for (std::size_t j = 0; j < 2; ++j) {
        ++cells;
        on += r.trace.holds(i, j);
      }
    }
  }
  const auto gn = EvaluateGrounding(PerceptionModel::Zeros(2, TraceMode::kNme), nme, store);
  CHECK(gn.accuracy == Catch::Approx(100.0 * on / cells));
  CHECK(gn.exact == Catch::Approx(100.0 * full / steps));
}

TEST_CASE("perfect perception gives perfect accuracy") {
  const auto store = synthetic::Store(Split::kTest);
  for (const auto mode : {TraceMode::kMe, TraceMode::kNme}) {
    const auto reader = BandReader(2, mode);
    for (const auto& t : DeclareLibrary()) {
      const auto recs = Records(DeclarePattern(CanonicalInstance(t)), 2, mode, store);
      INFO(t.name << " " << ToString(mode));
      const auto g = EvaluateGrounding(reader, recs, store);
      CHECK(g.accuracy == 100.0);
      CHECK(g.exact == 100.0);
      CHECK(EvaluateSequence(reader, recs, store) == 100.0);
    }
  }
  const auto yes = Records(Formula::True(), 2, TraceMode::kMe, store);
  CHECK(EvaluateSequence(PerceptionModel::Init(2, TraceMode::kMe, 5, 8), yes, store) == 100.0);
}

TEST_CASE("knowledge loss gradient matches finite differences") {
  const auto store = synthetic::Store(Split::kTrain);
  const Formula phi = DeclarePattern({"chain_response", {"p0", "p1"}});
  auto recs = Records(phi, 2, TraceMode::kMe, store);
  std::vector<DatasetRecord> batch;
  for (const auto& r : recs) {
    if (r.trace.length() == 3 && batch.size() < 4) batch.push_back(r);
  }
  const Task task = TaskOf(batch);
  const auto graph = Compile(KnowledgeFormula(task.phi, task.label), 3, task.alphabet,
                             std::vector<std::string>{task.label});
  const auto obs = Observations(batch, store);
  CHECK(obs.rows() == 12);
  std::vector<double> targets;
  for (const auto& r : batch) targets.push_back(r.accepted);
  auto model = PerceptionModel::Init(2, TraceMode::kMe, 21, 6);
  std::vector<grad::Tensor> grads;
  const RefinementConfig cfg;
  KnowledgeLoss(model, graph, obs, targets, cfg, &grads);
  REQUIRE(grads.size() == 4);
  int compared = 0;
  double norm = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    for (std::size_t i = 0; i < grads[k].size(); i += 97) {
      auto plus = model, minus = model;
      (*plus.parameters()[k])[i] += 1e-5;
      (*minus.parameters()[k])[i] -= 1e-5;
      const double fd = (KnowledgeLoss(plus, graph, obs, targets, cfg) - KnowledgeLoss(minus, graph, obs, targets, cfg)) / 2e-5;
      CHECK(std::abs(fd - grads[k][i]) <= 1e-3 * std::max(1.0, std::abs(fd)));
      norm += std::abs(grads[k][i]);
      ++compared;
    }
  }
  CHECK(compared > 10);
  CHECK(norm > 0.0);
}

TEST_CASE("training improves grounding and honours the timeout") {
  const auto train_store = synthetic::Store(Split::kTrain, 6, 1);
  const auto test_store = synthetic::Store(Split::kTest, 6, 2);
  const Formula phi = DeclarePattern({"chain_response", {"p0", "p1"}});
  const auto train = Records(phi, 2, TraceMode::kMe, train_store, 5);
  const auto test = Records(phi, 2, TraceMode::kMe, test_store, 2);
  TrainConfig c;
  c.epochs = 5;
  c.hidden = 16;
  c.batch_size = 16;
  c.lr = 0.01;
  std::vector<EpochMetrics> seen;
  const auto r = Train(c, train, train_store, test, test_store, [&](const EpochMetrics& m) { seen.push_back(m); });
  CHECK(seen.size() == 5);
  CHECK(r.metrics.epochs.size() == 5);
  CHECK_FALSE(r.metrics.timed_out);
  CHECK(r.metrics.grounding_accuracy >= 90.0);
  CHECK(r.metrics.epochs.back().loss < r.metrics.epochs.front().loss);

  c.timeout_minutes = 1e-9;
  const auto cut = Train(c, train, train_store, test, test_store);
  CHECK(cut.metrics.timed_out);
  REQUIRE(cut.metrics.epochs.size() == 1);
  CHECK(cut.metrics.epochs[0].partial);
  CHECK(cut.metrics.grounding_accuracy >= 0.0);

  TempDir dir;
  WriteMetricsCsv(dir.path / "m.csv", r.metrics);
  std::ifstream in(dir.path / "m.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "epoch,loss,sequence_accuracy,grounding_accuracy,grounding_exact,minutes,partial");
}

TEST_CASE("benchmark selection and run shapes") {
  BenchmarkConfig c;
  c.modes.clear();
  CHECK_THROWS_AS(c.Validate(), ValidationError);
  c = {};
  c.suite = Suite::kRq2;
  CHECK(c.atoms.size() * c.lengths.size() * c.formulas_per_size == 45);
  c.atoms.clear();
  CHECK_THROWS_AS(c.Validate(), ValidationError);
  c = {};
  c.templates = {"no_such_template"};
  CHECK_THROWS_AS(c.Validate(), ValidationError);
  BenchmarkConfig none;
  none.modes.clear();
  CHECK_THROWS_AS(RunBenchmark(none), ValidationError);
  CHECK(ParseSuite("rq2") == Suite::kRq2);
  CHECK(Rq2Formula(3, 1, 0) == Rq2Formula(3, 1, 0));
  CHECK(Rq2Formula(3, 1, 0).atoms().size() == 3);

  // No images of digit 0: every run fails at image attachment and is recorded.
  TempDir dir;
  WriteMnist(dir.path, true);
  c = {};
  c.mnist_dir = dir.path;
  std::size_t callbacks = 0;
  const auto rq1 = RunBenchmark(c, [&](const BenchmarkRun&) { ++callbacks; });
  CHECK(rq1.size() == 40);
  CHECK(callbacks == 40);
  for (const auto& r : rq1) {
    CHECK_FALSE(r.ok);
    CHECK(r.error.find("digit 0") != std::string::npos);
  }
  c.templates = {"response", "init"};
  CHECK(RunBenchmark(c).size() == 4);
}

TEST_CASE("benchmark tables") {
  std::vector<BenchmarkRun> runs;
  auto add = [&](Suite s, TraceMode m, std::size_t atoms, std::size_t len, double acc, bool ok = true) {
    BenchmarkRun r{s, m, atoms, len, 0, "F p0", ok, ok ? "" : "boom", {}};
    r.metrics.grounding_accuracy = acc;
    r.metrics.minutes = 0.5;
    runs.push_back(r);
  };
  add(Suite::kRq1, TraceMode::kMe, 2, 4, 90.0);
  add(Suite::kRq1, TraceMode::kMe, 2, 4, 100.0);
  add(Suite::kRq1, TraceMode::kNme, 2, 4, 0.0, false);
  add(Suite::kRq2, TraceMode::kMe, 3, 10, 80.0);
  TempDir dir;
  auto lines = [](const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::string> out;
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
  };
  WriteRq1TableCsv(dir.path / "t1.csv", runs);
  const auto t1 = lines(dir.path / "t1.csv");
  REQUIRE(t1.size() == 3);
  CHECK(t1[1] == "ME,NA,NA,95.00,NA,2");
  CHECK(t1[2] == "NME,NA,NA,NA,NA,0");

  WriteRq2TableCsv(dir.path / "t2.csv", runs);
  const auto t2 = lines(dir.path / "t2.csv");
  REQUIRE(t2.size() == 7);
  CHECK(t2[0].rfind("setting,atoms,dfa_time,len5_dfa_acc", 0) == 0);
  CHECK(t2[2] == "ME,3,NA,NA,NA,NA,NA,NA,NA,80.00,0.50,NA,NA,NA,NA");
  CHECK(t2[6] == "NME,4,NA,NA,NA,NA,NA,NA,NA,NA,NA,NA,NA,NA,NA");

  WriteRunsCsv(dir.path / "runs.csv", runs);
  CHECK(lines(dir.path / "runs.csv").size() == 5);
}
