#include <catch_amalgamated.hpp>

#include <random>

#include "oracles.hpp"
#include "tilr/autograd.hpp"
#include "tilr/crisp.hpp"
#include "tilr/declare.hpp"
#include "tilr/error.hpp"
#include "tilr/fuzzy.hpp"
#include "tilr/graph.hpp"
#include "tilr/ilr.hpp"

using namespace tilr;
using Catch::Approx;

namespace {

double Op(NodeKind kind, const std::vector<double>& x) {
  switch (kind) {
    case NodeKind::kNeg: return 1.0 - x[0];
    case NodeKind::kMin: return *std::min_element(x.begin(), x.end());
    default: return *std::max_element(x.begin(), x.end());
  }
}

double Distance(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

const Alphabet kPq({"p", "q"});

}  // namespace

TEST_CASE("refine node examples") {
  const std::vector<double> two{0.3, 0.8};
  CHECK(RefineNode(NodeKind::kMin, two, 1.0) == std::vector<double>{1.0, 1.0});
  CHECK(RefineNode(NodeKind::kMax, two, 1.0) == std::vector<double>{0.3, 1.0});
  CHECK(RefineNode(NodeKind::kNeg, std::vector<double>{0.4}, 1.0) == std::vector<double>{0.0});
  CHECK(RefineNode(NodeKind::kMin, two, 0.1) == std::vector<double>{0.1, 0.8});
  CHECK(RefineNode(NodeKind::kMax, two, 0.1) == std::vector<double>{0.1, 0.1});
  CHECK(RefineNode(NodeKind::kMax, std::vector<double>{0.5, 0.5}, 0.9) == std::vector<double>{0.9, 0.5});
  CHECK(RefineNode(NodeKind::kMin, std::vector<double>{0.5, 0.5}, 0.1) == std::vector<double>{0.1, 0.5});
  const auto max_op = [](const std::vector<double>& x) { return Op(NodeKind::kMax, x); };
  CHECK(Distance(RefineNode(NodeKind::kMax, two, 1.0), two) == Approx(oracle::GridOptimum(two, 1.0, max_op)));
  CHECK_THROWS_AS(RefineNode(NodeKind::kNeg, two, 1.0), ValidationError);
  CHECK_THROWS_AS(RefineNode(NodeKind::kMin, std::vector<double>{}, 1.0), ValidationError);
}

TEST_CASE("implication nodes raise the consequent") {
  // children are (1 - a, b) for a -> b; b is raised to min(t, a)
  const auto lifted = RefineNode(NodeKind::kMax, std::vector<double>{0.7, 0.2}, 1.0, true);
  CHECK(lifted[0] == 0.7);
  CHECK(lifted[1] == Approx(0.3).margin(1e-15));
  CHECK(RefineNode(NodeKind::kMax, std::vector<double>{0.0, 0.2}, 1.0, true) == std::vector<double>{0.0, 1.0});
  CHECK(RefineNode(NodeKind::kMax, std::vector<double>{0.0, 0.2}, 0.6, true) == std::vector<double>{0.0, 0.6});
  CHECK(RefineNode(NodeKind::kMax, std::vector<double>{0.7, 0.9}, 1.0, true) == std::vector<double>{0.7, 0.9});
  CHECK(RefineNode(NodeKind::kMax, std::vector<double>{0.7, 0.2}, 0.5, true) == std::vector<double>{0.5, 0.2});
}

TEST_CASE("refined nodes hit the target exactly") {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const NodeKind kind = std::array{NodeKind::kNeg, NodeKind::kMin, NodeKind::kMax}[rng() % 3];
    std::vector<double> x(kind == NodeKind::kNeg ? 1 : 1 + rng() % 4);
    for (double& v : x) v = u(rng);
    const double t = u(rng);
    const double got = Op(kind, RefineNode(kind, x, t));
    if (kind == NodeKind::kNeg) {
      REQUIRE(got == Approx(t).margin(1e-15));
    } else {
      REQUIRE(got == t);
    }
  }
}

TEST_CASE("refined nodes are minimal on a 0.01 grid") {
  std::mt19937_64 rng(67);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 60; ++i) {
    const NodeKind kind = std::array{NodeKind::kNeg, NodeKind::kMin, NodeKind::kMax}[rng() % 3];
    std::vector<double> x(kind == NodeKind::kNeg ? 1 : 1 + rng() % 3);
    for (double& v : x) v = u(rng);
    const double t = static_cast<double>(rng() % 101) / 100.0;
    const double best = oracle::GridOptimum(x, t, [&](const std::vector<double>& y) { return Op(kind, y); });
    REQUIRE(Distance(RefineNode(kind, x, t), x) <= best + 0.01);
  }
}

TEST_CASE("single label leaf") {
  const std::vector<std::string> labels{"y"};
  const CompiledGraph g = Compile(Formula::Atom("y"), 2, kPq, labels);
  const auto r = IlrRefine(g, FuzzyTrace(2, 2, 0.4), LabelVector::Zeros(labels));
  CHECK(r.labels.values[0] == 1.0);
  CHECK(r.iterations == 1);
  CHECK(r.converged);
  CHECK(r.trace == FuzzyTrace(2, 2, 0.4));
}

TEST_CASE("knowledge refinement recovers the crisp label") {
  const Alphabet ab = Alphabet::Indexed(2);
  const std::vector<std::string> labels{"y"};
  for (const auto& t : DeclareLibrary()) {
    const Formula phi = DeclarePattern(CanonicalInstance(t));
    const Formula k = KnowledgeFormula(phi, "y");
    for (const auto mode : {TraceMode::kMe, TraceMode::kNme}) {
      for (std::size_t n = 1; n <= 4; ++n) {
        const CompiledGraph g = Compile(k, n, ab, labels);
        for (const auto& tr : EnumerateTraces(2, n, n, mode)) {
          const FuzzyTrace f = FuzzyTrace::FromSymbolic(tr, 2);
          const auto r = IlrRefine(g, f, LabelVector::Zeros(labels));
          INFO(t.name << " " << FormatTrace(tr, ab));
          REQUIRE(r.converged);
          REQUIRE(r.value == 1.0);
          REQUIRE(r.iterations <= 2);
          REQUIRE(r.trace == f);
          REQUIRE(r.labels.values[0] == (Satisfies(tr, phi, ab) ? 1.0 : 0.0));
        }
      }
    }
  }
}

TEST_CASE("refinement of a satisfied assignment changes nothing") {
  std::mt19937_64 rng(71);
  int checked = 0;
  for (int i = 0; i < 300; ++i) {
    const Formula f = oracle::RandomFormula(rng, {"p", "q"}, 3);
    const std::size_t n = 1 + rng() % 5;
    const CompiledGraph g = Compile(Desugar(f), n, kPq);
    const auto first = IlrRefine(g, oracle::RandomFuzzyTrace(rng, n, 2), {});
    if (!first.converged) continue;
    ++checked;
    const auto again = IlrRefine(g, first.trace, {});
    REQUIRE(again.iterations == 0);
    REQUIRE(again.converged);
    REQUIRE(again.trace == first.trace);
  }
  CHECK(checked > 100);
}

TEST_CASE("constants stop at a fixed point") {
  const CompiledGraph g = Compile(Formula::False(), 3, kPq);
  const auto r = IlrRefine(g, FuzzyTrace(3, 2, 0.5), {});
  CHECK(r.iterations == 0);
  CHECK_FALSE(r.converged);
  CHECK(r.value == 0.0);
}

TEST_CASE("differentiable refinement matches plain refinement") {
  std::mt19937_64 rng(73);
  const std::vector<std::string> labels{"y"};
  for (int i = 0; i < 100; ++i) {
    const Formula phi = oracle::RandomFormula(rng, {"p", "q"}, 3);
    const std::size_t n = 1 + rng() % 4;
    const CompiledGraph g = Compile(KnowledgeFormula(phi, "y"), n, kPq, labels);
    const FuzzyTrace t = oracle::RandomFuzzyTrace(rng, n, 2);
    const RefinementConfig cfg;
    const auto plain = IlrRefine(g, t, LabelVector::Zeros(labels), cfg);
    grad::Tape tape;
    std::vector<grad::Var> props;
    for (double v : t.values()) props.push_back(tape.Leaf(grad::Tensor::Scalar(v)));
    const auto state = IlrRefineValues<grad::Var>(g, props, {grad::Var(0.0)}, cfg);
    REQUIRE(state.iterations == plain.iterations);
    REQUIRE(state.labels[0].scalar() == plain.labels.values[0]);
    for (std::size_t k = 0; k < props.size(); ++k) REQUIRE(state.props[k].scalar() == plain.trace.values()[k]);
  }
}

TEST_CASE("predict uses a closed threshold") {
  RefinementResult r;
  r.labels = LabelVector{{"a", "b", "c"}, {0.9, 0.5, 0.1}};
  CHECK(Predict(r) == std::vector<bool>{true, true, false});
  CHECK(Predict(r, 0.95) == std::vector<bool>{false, false, false});
}

TEST_CASE("refinement config validation") {
  RefinementConfig cfg;
  CHECK_NOTHROW(cfg.Validate());
  cfg.max_iterations = 0;
  CHECK_THROWS_AS(cfg.Validate(), ValidationError);
  cfg = {};
  cfg.tolerance = 0.0;
  CHECK_THROWS_AS(cfg.Validate(), ValidationError);
  cfg = {};
  cfg.target = 1.5;
  CHECK_THROWS_AS(cfg.Validate(), ValidationError);
  const CompiledGraph g = Compile(Formula::Atom("p"), 2, kPq);
  CHECK_THROWS_AS(IlrRefine(g, FuzzyTrace(3, 2), {}), ValidationError);
}
