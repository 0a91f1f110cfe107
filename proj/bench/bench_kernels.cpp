#include <benchmark/benchmark.h>

#include <algorithm>

#include "skeladv/constraints.hpp"
#include "skeladv/kernels.hpp"
#include "skeladv/net.hpp"
#include "skeladv/synth.hpp"

using namespace skeladv;

namespace {

Tensor3 random_motion(int frames, std::uint64_t seed) {
  Rng rng(seed);
  Tensor3 x(Shape{frames, 25, 3});
  for (double& v : x.values()) v = 0.2 + 0.6 * rng.uniform();
  return x;
}

Exec exec_of(const benchmark::State& state) { return state.range(1) == 0 ? Exec::Serial : Exec::Parallel; }

void BM_GraphConvForward(benchmark::State& state) {
  const Topology& topo = ntu25_topology();
  const Matrix adj = topo.normalized_adjacency();
  Rng rng(1);
  Matrix w(16, 32);
  for (double& v : w.data) v = rng.uniform() - 0.5;
  Tensor3 in(Shape{static_cast<int>(state.range(0)), 25, 16});
  for (double& v : in.values()) v = rng.uniform();
  Tensor3 agg, pre, post;
  for (auto _ : state) {
    kernels::graph_conv_forward(adj, w, in, agg, pre, post, exec_of(state));
    benchmark::DoNotOptimize(post.values().data());
  }
}

void BM_GraphConvBackward(benchmark::State& state) {
  const Topology& topo = ntu25_topology();
  const Matrix adj = topo.normalized_adjacency();
  Rng rng(2);
  Matrix w(16, 32);
  for (double& v : w.data) v = rng.uniform() - 0.5;
  Tensor3 in(Shape{static_cast<int>(state.range(0)), 25, 16});
  for (double& v : in.values()) v = rng.uniform();
  Tensor3 agg, pre, post, grad_in;
  kernels::graph_conv_forward(adj, w, in, agg, pre, post, Exec::Serial);
  Tensor3 grad_post(post.shape(), 0.1);
  for (auto _ : state) {
    Matrix gw(16, 32);
    kernels::graph_conv_backward(adj, w, agg, pre, grad_post, grad_in, &gw, exec_of(state));
    benchmark::DoNotOptimize(gw.data.data());
  }
}

void BM_BoneProjection(benchmark::State& state) {
  const Topology& topo = ntu25_topology();
  const Tensor3 x = random_motion(static_cast<int>(state.range(0)), 3);
  Tensor3 y = x;
  Rng rng(4);
  for (double& v : y.values()) v = std::clamp(v + 0.2 * (rng.uniform() - 0.5), 0.0, 1.0);
  for (auto _ : state) {
    Tensor3 out = y;
    kernels::bone_project_frames(x, out, topo, 0.1, exec_of(state));
    benchmark::DoNotOptimize(out.values().data());
  }
}

void BM_Logits(benchmark::State& state) {
  const GraphConvClassifier m(default_net_config(ntu25_topology(), 5), ntu25_topology(), 5);
  const Tensor3 x = random_motion(static_cast<int>(state.range(0)), 6);
  for (auto _ : state) benchmark::DoNotOptimize(logits(m, x, exec_of(state)));
}

// Second argument: 0 serial, 1 OpenMP.
void frame_args(benchmark::internal::Benchmark* b) {
  for (int frames : {20, 300})
    for (int par : {0, 1}) b->Args({frames, par});
  b->ArgNames({"frames", "parallel"});
}

}  // namespace

BENCHMARK(BM_GraphConvForward)->Apply(frame_args);
BENCHMARK(BM_GraphConvBackward)->Apply(frame_args);
BENCHMARK(BM_BoneProjection)->Apply(frame_args);
BENCHMARK(BM_Logits)->Apply(frame_args);

BENCHMARK_MAIN();
