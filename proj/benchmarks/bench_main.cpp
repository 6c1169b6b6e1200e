#include <benchmark/benchmark.h>

#include <random>

#include "relucert/bench_harness.hpp"
#include "relucert/digest.hpp"
#include "relucert/reuse_engine.hpp"

using namespace relucert;

namespace {

Network bench_net(int layers, int width, int input_dim) {
  return random_mlp(layers, width, input_dim, 7);
}

Budget bench_budget() {
  Budget b;
  b.max_splits = 100000;
  b.max_time = std::chrono::seconds(30);
  return b;
}

void BM_PropagateBoxChain(benchmark::State& state) {
  const Network net = bench_net(static_cast<int>(state.range(0)), 32, 8);
  const Box d_in = Box::uniform(8, -1, 1);
  for (auto _ : state) {
    Box cur = d_in;
    for (const Layer& l : net.layers()) cur = propagate_box(l, cur);
    benchmark::DoNotOptimize(cur);
  }
}
BENCHMARK(BM_PropagateBoxChain)->Arg(3)->Arg(6)->Arg(10);

void BM_PropagateSymbolic(benchmark::State& state) {
  const Network net = bench_net(static_cast<int>(state.range(0)), 32, 8);
  const Box d_in = Box::uniform(8, -1, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        propagate_symbolic(net, 1, net.num_layers(), d_in));
  }
}
BENCHMARK(BM_PropagateSymbolic)->Arg(3)->Arg(6)->Arg(10);

void BM_VerifyFull(benchmark::State& state) {
  const Network net = bench_net(6, static_cast<int>(state.range(0)), 4);
  const Box d_in = Box::uniform(4, -1, 1);
  const auto chain = build_state_abstraction(net, d_in, AbstractionMode::Box);
  const VerificationProblem problem(net, d_in,
                                    chain.output_box().widened(0.5));
  for (auto _ : state) {
    benchmark::DoNotOptimize(verify_full(problem, bench_budget()));
  }
}
BENCHMARK(BM_VerifyFull)->Arg(8)->Arg(16)->Arg(32);

void BM_CheckContainmentSplitting(benchmark::State& state) {
  // A target between the true maximum and the interval bound forces real
  // branch-and-bound work.
  std::mt19937_64 rng(17);
  const Network net = bench_net(3, 8, 2);
  const Box d_in = Box::uniform(2, -1, 1);
  const OutputBoundResult mo = max_output(net, 1, 3, d_in, 0, bench_budget());
  Box cur = d_in;
  for (const Layer& l : net.layers()) cur = propagate_box(l, cur);
  const double target_hi = 0.5 * (mo.upper + cur.hi()[0]);
  const Box target(Eigen::VectorXd::Constant(1, cur.lo()[0] - 1.0),
                   Eigen::VectorXd::Constant(1, target_hi));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        check_containment({net, 1, 3, d_in, target}, bench_budget()));
  }
}
BENCHMARK(BM_CheckContainmentSplitting);

void BM_PerLayerTransfer(benchmark::State& state) {
  const Network net = bench_net(6, 16, 4);
  const Box d_in = Box::uniform(4, -1, 1);
  const auto chain =
      build_state_abstraction(net, d_in, AbstractionMode::Box, 0.01);
  ProofArtifact artifact;
  artifact.network_hash = network_digest(net);
  artifact.d_out = chain.output_box().widened(0.5);
  artifact.problem_hash = problem_digest(net, d_in, artifact.d_out);
  artifact.state_abs = chain;
  const Network tuned = perturb(net, 1e-4, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(check_per_layer_transfer(
        tuned, d_in, artifact.state_abs, artifact.d_out, bench_budget()));
  }
}
BENCHMARK(BM_PerLayerTransfer);

void BM_ReverifyVersusFull(benchmark::State& state) {
  const Network net = bench_net(6, 16, 4);
  const Box d_in = Box::uniform(4, -1, 1);
  CertifyOptions opts;
  opts.padding = 0.01;
  const auto chain =
      build_state_abstraction(net, d_in, AbstractionMode::Box, 0.01);
  const VerificationProblem base(net, d_in, chain.output_box().widened(0.5));
  const CertifyResult certified = solve_and_certify(base, opts);
  const Network tuned = perturb(net, 1e-4, 5);
  const VerificationProblem problem(tuned, d_in, base.d_out);
  if (state.range(0) == 0) {
    for (auto _ : state) {
      benchmark::DoNotOptimize(
          reverify(problem, *certified.artifact, {}, bench_budget()));
    }
  } else {
    for (auto _ : state) {
      benchmark::DoNotOptimize(solve_and_certify(problem, opts));
    }
  }
}
BENCHMARK(BM_ReverifyVersusFull)
    ->Arg(0)  // reuse path
    ->Arg(1);  // from scratch

}  // namespace

BENCHMARK_MAIN();
