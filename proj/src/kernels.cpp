#include "skeladv/kernels.hpp"

#include <algorithm>
#include <cmath>

#if defined(_OPENMP)
#include <omp.h>
#endif

#include "skeladv/topology.hpp"

namespace skeladv::kernels {

int max_threads() {
#if defined(_OPENMP)
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace {

bool in_parallel() {
#if defined(_OPENMP)
  return omp_in_parallel() != 0;
#else
  return false;
#endif
}

template <class F>
void for_frames(int frames, Exec exec, F&& body) {
  if (exec == Exec::Serial || in_parallel()) {
    for (int t = 0; t < frames; ++t) body(t);
    return;
  }
#pragma omp parallel for schedule(static)
  for (int t = 0; t < frames; ++t) body(t);
}

void conv_forward_frame(const Matrix& adj, const Matrix& w, const Tensor3& in, Tensor3& agg,
                        Tensor3& pre, Tensor3& post, int t) {
  const int n = in.joints();
  const int cin = in.channels();
  const int cout = w.cols;
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < cin; ++c) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += adj(i, j) * in(t, j, c);
      agg(t, i, c) = s;
    }
    for (int o = 0; o < cout; ++o) {
      double s = 0.0;
      for (int c = 0; c < cin; ++c) s += agg(t, i, c) * w(c, o);
      pre(t, i, o) = s;
      post(t, i, o) = s > 0.0 ? s : 0.0;
    }
  }
}

void conv_backward_frame(const Matrix& adj, const Matrix& w, const Tensor3& pre,
                         const Tensor3& grad_post, Tensor3& grad_in, int t) {
  const int n = pre.joints();
  const int cin = w.rows;
  const int cout = w.cols;
  // grad_agg[i][c] = Σ_o grad_pre[i][o] · w[c][o]; grad_in[j][c] = Σ_i adj[i][j] · grad_agg[i][c]
  std::vector<double> grad_agg(static_cast<std::size_t>(n) * cin, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < cin; ++c) {
      double s = 0.0;
      for (int o = 0; o < cout; ++o) {
        if (pre(t, i, o) > 0.0) s += grad_post(t, i, o) * w(c, o);
      }
      grad_agg[static_cast<std::size_t>(i) * cin + c] = s;
    }
  }
  for (int j = 0; j < n; ++j) {
    for (int c = 0; c < cin; ++c) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += adj(i, j) * grad_agg[static_cast<std::size_t>(i) * cin + c];
      grad_in(t, j, c) = s;
    }
  }
}

void weight_grad_row(const Tensor3& agg, const Tensor3& pre, const Tensor3& grad_post, Matrix& gw, int c) {
  for (int t = 0; t < agg.frames(); ++t) {
    for (int i = 0; i < agg.joints(); ++i) {
      const double a = agg(t, i, c);
      if (a == 0.0) continue;
      for (int o = 0; o < gw.cols; ++o) {
        if (pre(t, i, o) > 0.0) gw(c, o) += a * grad_post(t, i, o);
      }
    }
  }
}

bool inside_box(std::span<const double> p) {
  return std::all_of(p.begin(), p.end(), [](double v) { return v >= 0.0 && v <= 1.0; });
}

// Finds a point inside the unit box whose distance from `parent` is at least `lo`,
// starting from `cand` (already at distance ≤ hi). Returns false if none was found.
bool place_in_box(std::span<const double> parent, std::vector<double>& cand, double lo) {
  const std::size_t d = parent.size();
  std::vector<double> v(d);
  for (int iter = 0; iter < 16; ++iter) {
    for (std::size_t k = 0; k < d; ++k) cand[k] = std::clamp(cand[k], 0.0, 1.0);
    for (std::size_t k = 0; k < d; ++k) v[k] = cand[k] - parent[k];
    const double r = l2_norm(v);
    if (r >= lo) return true;
    if (r < 1e-12) break;
    for (std::size_t k = 0; k < d; ++k) cand[k] = parent[k] + v[k] / r * lo;
    if (inside_box(cand)) return true;
  }
  // Segment towards the farthest box corner stays inside the box.
  for (std::size_t k = 0; k < d; ++k) v[k] = (parent[k] < 0.5 ? 1.0 : 0.0) - parent[k];
  const double dist = l2_norm(v);
  if (dist < lo) return false;
  for (std::size_t k = 0; k < d; ++k) cand[k] = std::clamp(parent[k] + v[k] / dist * lo, 0.0, 1.0);
  return true;
}

void bone_project_frame(const Tensor3& x, Tensor3& xp, const Topology& topo, double eps_b, int t) {
  const int d = x.channels();
  std::vector<double> d_ori(d), d_adv(d), cand(d);
  for (int j : topo.bfs_order()) {
    if (j == topo.root()) continue;
    const int p = topo.parent(j);
    for (int k = 0; k < d; ++k) {
      d_ori[k] = x(t, j, k) - x(t, p, k);
      d_adv[k] = xp(t, j, k) - xp(t, p, k);
    }
    const double len_ori = l2_norm(d_ori);
    const double len_adv = l2_norm(d_adv);
    const double lo = (1.0 - eps_b) * len_ori;
    const double hi = (1.0 + eps_b) * len_ori;
    auto joint = xp.joint(t, j);
    auto par = xp.joint(t, p);
    if (len_adv >= 1e-12 && len_adv >= lo && len_adv <= hi) continue;  // already feasible
    if (len_adv < 1e-12 && len_ori < 1e-12) {
      for (int k = 0; k < d; ++k) joint[k] = par[k] + d_ori[k];
      continue;
    }
    const double target = std::clamp(len_adv, lo, hi);
    const auto& dir = len_adv >= 1e-12 ? d_adv : d_ori;
    const double dir_len = len_adv >= 1e-12 ? len_adv : len_ori;
    for (int k = 0; k < d; ++k) cand[k] = par[k] + dir[k] / dir_len * target;
    if (!inside_box(cand) && inside_box(par)) place_in_box(par, cand, lo);
    for (int k = 0; k < d; ++k) joint[k] = cand[k];
  }
}

}  // namespace

void graph_conv_forward(const Matrix& adj, const Matrix& weight, const Tensor3& in, Tensor3& agg,
                        Tensor3& pre, Tensor3& post, Exec exec) {
  const Shape out_shape{in.frames(), in.joints(), weight.cols};
  agg = Tensor3(in.shape());
  pre = Tensor3(out_shape);
  post = Tensor3(out_shape);
  for_frames(in.frames(), exec, [&](int t) { conv_forward_frame(adj, weight, in, agg, pre, post, t); });
}

void graph_conv_backward(const Matrix& adj, const Matrix& weight, const Tensor3& agg, const Tensor3& pre,
                         const Tensor3& grad_post, Tensor3& grad_in, Matrix* grad_weight, Exec exec) {
  grad_in = Tensor3(Shape{pre.frames(), pre.joints(), weight.rows});
  for_frames(pre.frames(), exec, [&](int t) { conv_backward_frame(adj, weight, pre, grad_post, grad_in, t); });
  if (grad_weight == nullptr) return;
  // Each row sums over (t, i) in the same order on both paths.
  if (exec == Exec::Serial || in_parallel()) {
    for (int c = 0; c < weight.rows; ++c) weight_grad_row(agg, pre, grad_post, *grad_weight, c);
  } else {
#pragma omp parallel for schedule(static)
    for (int c = 0; c < weight.rows; ++c) weight_grad_row(agg, pre, grad_post, *grad_weight, c);
  }
}

std::vector<double> mean_pool(const Tensor3& features) {
  std::vector<double> out(features.channels(), 0.0);
  for (int t = 0; t < features.frames(); ++t) {
    for (int i = 0; i < features.joints(); ++i) {
      for (int k = 0; k < features.channels(); ++k) out[k] += features(t, i, k);
    }
  }
  const double scale = 1.0 / (static_cast<double>(features.frames()) * features.joints());
  for (double& v : out) v *= scale;
  return out;
}

void bone_project_frames(const Tensor3& original, Tensor3& perturbed, const Topology& topo, double epsilon_b,
                         Exec exec) {
  for_frames(original.frames(), exec,
             [&](int t) { bone_project_frame(original, perturbed, topo, epsilon_b, t); });
}

}  // namespace skeladv::kernels
