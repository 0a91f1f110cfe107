#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "skeladv/constraints.hpp"
#include "skeladv/kernels.hpp"
#include "skeladv/net.hpp"

using namespace skeladv;

TEST_CASE("graph convolution forward and backward are bit-identical across execution paths") {
  const Topology& topo = ntu25_topology();
  const Matrix adj = topo.normalized_adjacency();
  Rng rng(1);
  Matrix w(3, 16);
  for (double& v : w.data) v = rng.uniform() - 0.5;
  const Tensor3 in = oracle::random_tensor(rng, Shape{32, 25, 3});
  Tensor3 agg_s, pre_s, post_s, agg_p, pre_p, post_p;
  kernels::graph_conv_forward(adj, w, in, agg_s, pre_s, post_s, Exec::Serial);
  kernels::graph_conv_forward(adj, w, in, agg_p, pre_p, post_p, Exec::Parallel);
  CHECK(agg_s == agg_p);
  CHECK(pre_s == pre_p);
  CHECK(post_s == post_p);

  const Tensor3 gpost = oracle::random_tensor(rng, post_s.shape(), -1.0, 1.0);
  Tensor3 gin_s, gin_p;
  Matrix gw_s(3, 16), gw_p(3, 16);
  kernels::graph_conv_backward(adj, w, agg_s, pre_s, gpost, gin_s, &gw_s, Exec::Serial);
  kernels::graph_conv_backward(adj, w, agg_p, pre_p, gpost, gin_p, &gw_p, Exec::Parallel);
  CHECK(gin_s == gin_p);
  CHECK(gw_s == gw_p);
}

TEST_CASE("whole network passes are bit-identical across execution paths") {
  const GraphConvClassifier m(default_net_config(ntu25_topology(), 5), ntu25_topology(), 2);
  Rng rng(2);
  const Tensor3 x = oracle::random_tensor(rng, Shape{20, 25, 3});
  const auto s = forward(m, x, Exec::Serial);
  const auto p = forward(m, x, Exec::Parallel);
  CHECK(s.logits == p.logits);
  const auto gs = backward(m, s.tape, {1, 0, -1, 0.5, 0}, true, Exec::Serial);
  const auto gp = backward(m, p.tape, {1, 0, -1, 0.5, 0}, true, Exec::Parallel);
  CHECK(gs.input == gp.input);
  CHECK(gs.weights == gp.weights);
}

TEST_CASE("bone projection is bit-identical across execution paths") {
  const Topology& topo = ntu25_topology();
  Rng rng(3);
  ConstraintConfig cfg;
  for (int rep = 0; rep < 10; ++rep) {
    const Tensor3 x = oracle::random_tensor(rng, Shape{20, 25, 3}, 0.2, 0.8);
    Tensor3 y = x;
    for (double& v : y.values()) v = std::clamp(v + 0.2 * (rng.uniform() - 0.5), 0.0, 1.0);
    CHECK(bone_project(x, y, topo, cfg, Exec::Serial) == bone_project(x, y, topo, cfg, Exec::Parallel));
    CHECK(theta(x, y, topo, cfg, Exec::Serial) == theta(x, y, topo, cfg, Exec::Parallel));
  }
}

TEST_CASE("parallel kernels called from inside a parallel region stay correct") {
  const GraphConvClassifier m(default_net_config(ntu25_topology(), 5), ntu25_topology(), 2);
  Rng rng(4);
  std::vector<Tensor3> xs;
  for (int i = 0; i < 8; ++i) xs.push_back(oracle::random_tensor(rng, Shape{10, 25, 3}));
  std::vector<std::vector<double>> out(8);
#pragma omp parallel for
  for (int i = 0; i < 8; ++i) out[i] = logits(m, xs[i], Exec::Parallel);
  for (int i = 0; i < 8; ++i) CHECK(out[i] == logits(m, xs[i], Exec::Serial));
}

TEST_CASE("mean pool") {
  Tensor3 f(Shape{2, 2, 2});
  f.values() = {1, 2, 3, 4, 5, 6, 7, 8};
  const auto p = kernels::mean_pool(f);
  CHECK(p[0] == doctest::Approx(4.0));
  CHECK(p[1] == doctest::Approx(5.0));
}
