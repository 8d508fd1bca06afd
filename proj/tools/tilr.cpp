// tilr: command-line front end.
//
// Exit codes: 0 success, 1 unexpected failure, 2 bad usage, 3 formula syntax,
// 4 validation, 5 I/O, 6 malformed file contents.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tilr/bench.hpp"
#include "tilr/config.hpp"
#include "tilr/crisp.hpp"
#include "tilr/dataset.hpp"
#include "tilr/declare.hpp"
#include "tilr/error.hpp"
#include "tilr/formula.hpp"
#include "tilr/fuzzy.hpp"
#include "tilr/graph.hpp"
#include "tilr/ilr.hpp"
#include "tilr/perception.hpp"
#include "tilr/train.hpp"

namespace fs = std::filesystem;
using namespace tilr;

namespace {

std::vector<std::string> SplitList(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(' ');
    const auto e = item.find_last_not_of(' ');
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

fs::path MnistDir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("TILR_MNIST_DIR")) return env;
  throw ValidationError("no MNIST directory: pass --mnist-dir or set TILR_MNIST_DIR");
}

CsvTrace ReadCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return ReadFuzzyTraceCsv(in);
}

// "y=0.3,z=1" -> label vector over `names`, unspecified labels at 0.
LabelVector Labels(const std::vector<std::string>& names, const std::vector<std::string>& inits) {
  LabelVector labels = LabelVector::Zeros(names);
  for (const auto& item : inits) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ValidationError("label value '" + item + "' is not name=value");
    const std::string name = item.substr(0, eq);
    std::size_t k = 0;
    while (k < names.size() && names[k] != name) ++k;
    if (k == names.size()) throw ValidationError("unknown label '" + name + "'");
    labels.values[k] = std::stod(item.substr(eq + 1));
    if (!(labels.values[k] >= 0.0 && labels.values[k] <= 1.0)) throw ValidationError("label values lie in [0,1]");
  }
  return labels;
}

struct FormulaArgs {
  std::string text;
  std::string pattern;
  std::string atoms;
  std::string labels;

  void Add(CLI::App* cmd, bool atoms_required) {
    cmd->add_option("formula", text, "LTLf formula text");
    cmd->add_option("--pattern", pattern, "DECLARE instance such as response(p0, p1)");
    auto* a = cmd->add_option("--atoms", atoms, "comma-separated alphabet");
    if (atoms_required) a->required();
    cmd->add_option("--labels", labels, "comma-separated label atoms");
  }
  Formula Build(const Alphabet& alphabet) const {
    if (text.empty() == pattern.empty()) throw ValidationError("give exactly one of a formula or --pattern");
    if (!pattern.empty()) return DeclarePattern(ParsePatternInstance(pattern));
    return ParseFormula(text, alphabet, SplitList(labels));
  }
};

int Run(int argc, char** argv) {
  CLI::App app{"Temporal iterative local refinement toolkit"};
  app.require_subcommand(1);

  // parse
  FormulaArgs parse_args;
  bool parse_desugar = false;
  auto* parse = app.add_subcommand("parse", "parse and pretty-print a formula");
  parse_args.Add(parse, true);
  parse->add_flag("--desugar", parse_desugar, "print the core-operator form");
  parse->callback([&] {
    const Alphabet alphabet(SplitList(parse_args.atoms));
    const Formula f = parse_args.Build(alphabet);
    std::cout << FormatFormula(parse_desugar ? Desugar(f) : f) << '\n';
  });

  // eval
  FormulaArgs eval_args;
  std::string eval_trace, eval_symbolic;
  std::vector<std::string> eval_label_values;
  auto* eval = app.add_subcommand("eval", "evaluate a formula on a fuzzy CSV trace or a symbolic trace");
  eval_args.Add(eval, false);
  eval->add_option("--trace", eval_trace, "CSV fuzzy trace (header row of atom names)");
  eval->add_option("--symbolic", eval_symbolic, "symbolic trace such as {a},{a,b}");
  eval->add_option("--label-value", eval_label_values, "label degree name=value");
  eval->callback([&] {
    if (eval_trace.empty() == eval_symbolic.empty()) throw ValidationError("give exactly one of --trace or --symbolic");
    if (!eval_symbolic.empty()) {
      const Alphabet alphabet(SplitList(eval_args.atoms));
      const Formula f = eval_args.Build(alphabet);
      const SymbolicTrace t = ParseTrace(eval_symbolic, alphabet);
      std::cout << (Satisfies(t, f, alphabet) ? "true" : "false") << '\n';
      return;
    }
    const CsvTrace csv = ReadCsv(eval_trace);
    if (!eval_args.atoms.empty() && !(Alphabet(SplitList(eval_args.atoms)) == csv.alphabet)) {
      throw ValidationError("--atoms differs from the CSV header");
    }
    const Formula f = eval_args.Build(csv.alphabet);
    const LabelVector labels = Labels(SplitList(eval_args.labels), eval_label_values);
    std::cout << FormatDouble(Evaluate(f, csv.alphabet, csv.trace, labels)) << '\n';
  });

  // refine
  FormulaArgs refine_args;
  std::string refine_trace, refine_knowledge;
  std::vector<std::string> refine_label_values;
  RefinementConfig refine_cfg;
  auto* refine = app.add_subcommand("refine", "refine a fuzzy trace and labels towards a target value");
  refine_args.Add(refine, false);
  refine->add_option("--trace", refine_trace, "CSV fuzzy trace")->required();
  refine->add_option("--knowledge", refine_knowledge,
                     "label name y: refine (phi -> y) & (!phi -> !y) instead of phi");
  refine->add_option("--label-value", refine_label_values, "initial label degree name=value");
  refine->add_option("--target", refine_cfg.target, "target value t");
  refine->add_option("--max-iters", refine_cfg.max_iterations, "iteration limit");
  refine->add_option("--eps", refine_cfg.tolerance, "convergence tolerance");
  refine->callback([&] {
    const CsvTrace csv = ReadCsv(refine_trace);
    std::vector<std::string> label_names = SplitList(refine_args.labels);
    Formula f = refine_args.Build(csv.alphabet);
    if (!refine_knowledge.empty()) {
      if (std::find(label_names.begin(), label_names.end(), refine_knowledge) == label_names.end()) {
        label_names.push_back(refine_knowledge);
      }
      f = KnowledgeFormula(f, refine_knowledge);
    }
    const LabelVector labels = Labels(label_names, refine_label_values);
    const CompiledGraph graph = Compile(f, csv.trace.length(), csv.alphabet, label_names);
    const RefinementResult r = IlrRefine(graph, csv.trace, labels, refine_cfg);
    WriteFuzzyTraceCsv(std::cout, csv.alphabet, r.trace);
    for (std::size_t k = 0; k < r.labels.size(); ++k) {
      std::cout << "# label " << r.labels.names[k] << " = " << FormatDouble(r.labels.values[k]) << '\n';
    }
    std::cout << "# value = " << FormatDouble(r.value) << "\n# iterations = " << r.iterations
              << "\n# converged = " << (r.converged ? "true" : "false") << '\n';
  });

  // gen-data
  std::string gen_formula, gen_pattern, gen_mode = "me", gen_mnist, gen_out, gen_protocol = "stratified";
  std::size_t gen_atoms = 2, gen_min = 0, gen_max = 5, gen_copies = 5, gen_per_split = 500;
  std::uint64_t gen_seed = 0;
  auto* gen = app.add_subcommand("gen-data", "sample labelled traces and build image-sequence datasets");
  gen->add_option("--formula", gen_formula, "formula over p0..p{k-1}");
  gen->add_option("--pattern", gen_pattern, "DECLARE instance such as chain_response(p0, p1)");
  gen->add_option("--atoms", gen_atoms, "alphabet size k (atoms p0..p{k-1}, drawn as digits 0..k-1)");
  gen->add_option("--mode", gen_mode, "me or nme");
  gen->add_option("--protocol", gen_protocol, "stratified or exhaustive");
  gen->add_option("--min-len", gen_min, "minimum trace length (default: 2 for ME, 1 otherwise)");
  gen->add_option("--max-len", gen_max, "maximum trace length");
  gen->add_option("--per-split", gen_per_split, "symbolic traces per split (stratified)");
  gen->add_option("--copies", gen_copies, "image sequences per symbolic trace");
  gen->add_option("--seed", gen_seed, "random seed");
  gen->add_option("--mnist-dir", gen_mnist, "directory with MNIST IDX files");
  gen->add_option("--out", gen_out, "output directory for train.jsonl and test.jsonl")->required();
  gen->callback([&] {
    const Alphabet alphabet = Alphabet::Indexed(gen_atoms);
    if (gen_formula.empty() == gen_pattern.empty()) throw ValidationError("give exactly one of --formula or --pattern");
    const Formula phi = gen_pattern.empty() ? ParseFormula(gen_formula, alphabet)
                                            : DeclarePattern(ParsePatternInstance(gen_pattern));
    const TraceMode mode = ParseTraceMode(gen_mode);
    SamplingPlan plan = ParseProtocol(gen_protocol) == Protocol::kExhaustive
                            ? SamplingPlan::Exhaustive(gen_atoms, mode)
                            : SamplingPlan::Stratified(gen_atoms, gen_max, mode, gen_seed);
    plan.max_len = gen_max;
    if (gen_min > 0) plan.min_len = gen_min;
    plan.per_split = gen_per_split;
    plan.seed = gen_seed;
    const SymbolicDataset ds = SampleSymbolicDataset(phi, alphabet, plan);
    for (const auto& w : ds.warnings) std::cerr << "warning: " << w << '\n';
    const fs::path dir = MnistDir(gen_mnist);
    const MnistStore train_store = LoadMnist(dir, Split::kTrain);
    const MnistStore test_store = LoadMnist(dir, Split::kTest);
    const auto train = AttachImages(ds.train, phi, alphabet, mode, train_store, gen_copies, gen_seed * 2 + 1);
    const auto test = AttachImages(ds.test, phi, alphabet, mode, test_store, gen_copies, gen_seed * 2 + 2);
    fs::create_directories(gen_out);
    WriteDataset(fs::path(gen_out) / "train.jsonl", train);
    WriteDataset(fs::path(gen_out) / "test.jsonl", test);
    std::cout << "formula " << FormatFormula(phi) << "\ntraces " << ds.train.size() << " train, " << ds.test.size()
              << " test\nrecords " << train.size() << " train, " << test.size() << " test\n";
  });

  // train
  std::string train_config_path, train_data, test_data, train_mnist, train_ckpt, train_metrics;
  std::size_t train_epochs = 0, train_batch = 0;
  double train_lr = 0.0, train_timeout = 0.0;
  std::uint64_t train_seed = 0;
  auto* train = app.add_subcommand("train", "train the perception model through the refinement layer");
  train->add_option("--config", train_config_path, "key = value configuration file");
  train->add_option("--train", train_data, "training JSONL");
  train->add_option("--test", test_data, "test JSONL");
  train->add_option("--mnist-dir", train_mnist, "directory with MNIST IDX files");
  train->add_option("--checkpoint", train_ckpt, "checkpoint output path");
  train->add_option("--metrics", train_metrics, "per-epoch metrics CSV output path");
  auto* epochs_opt = train->add_option("--epochs", train_epochs, "number of epochs");
  auto* batch_opt = train->add_option("--batch-size", train_batch, "batch size");
  auto* lr_opt = train->add_option("--lr", train_lr, "Adam learning rate");
  auto* timeout_opt = train->add_option("--timeout", train_timeout, "wall-clock limit in minutes");
  auto* seed_opt = train->add_option("--seed", train_seed, "random seed");
  train->callback([&] {
    TrainConfig cfg;
    if (!train_config_path.empty()) ApplyTrainConfig(ReadKeyValueFile(train_config_path), cfg);
    if (!train_data.empty()) cfg.train_data = train_data;
    if (!test_data.empty()) cfg.test_data = test_data;
    if (!train_ckpt.empty()) cfg.checkpoint = train_ckpt;
    if (!train_metrics.empty()) cfg.metrics = train_metrics;
    if (!train_mnist.empty() || cfg.mnist_dir.empty()) cfg.mnist_dir = MnistDir(train_mnist);
    if (*epochs_opt) cfg.epochs = train_epochs;
    if (*batch_opt) cfg.batch_size = train_batch;
    if (*lr_opt) cfg.lr = train_lr;
    if (*timeout_opt) cfg.timeout_minutes = train_timeout;
    if (*seed_opt) cfg.seed = train_seed;
    if (cfg.train_data.empty()) throw ValidationError("no training data: pass --train or set train_data");
    const TrainResult r = Train(cfg, [](const EpochMetrics& m) {
      std::printf("epoch %zu loss %.6f sequence %.2f%% grounding %.2f%% (exact %.2f%%) %.2f min%s\n", m.epoch,
                  m.loss, m.sequence_accuracy, m.grounding_accuracy, m.grounding_exact, m.minutes,
                  m.partial ? " [timeout]" : "");
      std::fflush(stdout);
    });
    if (r.metrics.timed_out) std::printf("stopped by the %.2f minute timeout\n", cfg.timeout_minutes);
  });

  // test
  std::string test_ckpt, test_path, test_mnist;
  RefinementConfig test_cfg;
  auto* test = app.add_subcommand("test", "evaluate a checkpoint on a dataset");
  test->add_option("--checkpoint", test_ckpt, "checkpoint path")->required();
  test->add_option("--data", test_path, "JSONL dataset")->required();
  test->add_option("--mnist-dir", test_mnist, "directory with MNIST IDX files");
  test->callback([&] {
    const PerceptionModel model = LoadCheckpoint(test_ckpt);
    const fs::path dir = MnistDir(test_mnist);
    // The records name their split; load the matching store.
    std::ifstream probe(test_path);
    if (!probe) throw IoError("cannot open " + test_path);
    DatasetReader peek(probe);
    DatasetRecord first;
    if (!peek.Next(first)) throw ValidationError("dataset is empty");
    const MnistStore store = LoadMnist(dir, first.split);
    const auto records = ReadDataset(test_path, &store);
    const auto g = EvaluateGrounding(model, records, store);
    std::printf("records %zu\ngrounding_accuracy %.2f\ngrounding_exact %.2f\nsequence_accuracy %.2f\n",
                records.size(), g.accuracy, g.exact, EvaluateSequence(model, records, store, test_cfg));
  });

  // bench
  std::string bench_suite = "rq1", bench_modes = "me,nme", bench_templates, bench_atoms = "2,3,4",
              bench_lengths = "5,10,20", bench_mnist, bench_out;
  BenchmarkConfig bench_cfg;
  auto* bench = app.add_subcommand("bench", "run a benchmark suite and write result tables");
  bench->add_option("--suite", bench_suite, "rq1 (per-template, exhaustive) or rq2 (size x length grid)");
  bench->add_option("--modes", bench_modes, "comma-separated subset of me,nme");
  bench->add_option("--templates", bench_templates, "rq1: comma-separated template names");
  bench->add_option("--atoms", bench_atoms, "rq2: comma-separated alphabet sizes");
  bench->add_option("--lengths", bench_lengths, "rq2: comma-separated maximum lengths");
  bench->add_option("--formulas", bench_cfg.formulas_per_size, "rq2: formulas per alphabet size");
  bench->add_option("--epochs", bench_cfg.epochs, "epochs per run");
  bench->add_option("--copies", bench_cfg.copies, "image sequences per symbolic trace");
  bench->add_option("--seed", bench_cfg.seed, "random seed");
  bench->add_option("--timeout", bench_cfg.timeout_minutes, "per-run wall-clock limit in minutes");
  bench->add_option("--mnist-dir", bench_mnist, "directory with MNIST IDX files");
  bench->add_option("--out", bench_out, "output directory")->required();
  bench->callback([&] {
    bench_cfg.suite = ParseSuite(bench_suite);
    bench_cfg.modes.clear();
    for (const auto& m : SplitList(bench_modes)) bench_cfg.modes.push_back(ParseTraceMode(m));
    bench_cfg.templates = SplitList(bench_templates);
    bench_cfg.atoms.clear();
    for (const auto& a : SplitList(bench_atoms)) bench_cfg.atoms.push_back(std::stoul(a));
    bench_cfg.lengths.clear();
    for (const auto& l : SplitList(bench_lengths)) bench_cfg.lengths.push_back(std::stoul(l));
    bench_cfg.mnist_dir = MnistDir(bench_mnist);
    bench_cfg.Validate();
    fs::create_directories(bench_out);
    const auto runs = RunBenchmark(bench_cfg, [](const BenchmarkRun& r) {
      if (r.ok) {
        std::printf("%s %s |P|=%zu len<=%zu #%zu %s: grounding %.2f%% sequence %.2f%% %.2f min\n",
                    std::string(ToString(r.suite)).c_str(), std::string(ToString(r.mode)).c_str(), r.atoms,
                    r.max_len, r.formula_index, r.formula.c_str(), r.metrics.grounding_accuracy,
                    r.metrics.sequence_accuracy, r.metrics.minutes);
      } else {
        std::printf("%s %s |P|=%zu len<=%zu #%zu %s: FAILED %s\n", std::string(ToString(r.suite)).c_str(),
                    std::string(ToString(r.mode)).c_str(), r.atoms, r.max_len, r.formula_index, r.formula.c_str(),
                    r.error.c_str());
      }
      std::fflush(stdout);
    });
    const fs::path out(bench_out);
    WriteRunsCsv(out / "runs.csv", runs);
    if (bench_cfg.suite == Suite::kRq1) {
      WriteRq1TableCsv(out / "table_rq1.csv", runs);
    } else {
      WriteRq2TableCsv(out / "table_rq2.csv", runs);
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) { return Run(argc, argv); }
