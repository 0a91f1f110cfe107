#include "skeladv/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace skeladv {

void ConstraintConfig::validate() const {
  if (!(epsilon_b > 0.0 && epsilon_b < 1.0)) throw Error("epsilon_b must lie in (0, 1)");
  if (!(alpha > 0.0)) throw Error("alpha must be positive");
  if (!(zero_norm_threshold > 0.0)) throw Error("zero_norm_threshold must be positive");
}

double tdc(std::span<const double> dir_prev, std::span<const double> dir_curr, double zero_norm_threshold) {
  if (dir_prev.size() != dir_curr.size()) throw Error("tdc: direction lengths differ");
  const double np = l2_norm(dir_prev);
  const double nc = l2_norm(dir_curr);
  if (np < zero_norm_threshold || nc < zero_norm_threshold) return 1.0;
  const double cosine = std::clamp(dot(dir_prev, dir_curr) / (np * nc), -1.0, 1.0);
  return 0.5 * cosine + 0.5;
}

double decay_weight(double tdc_value, double alpha) { return std::exp(-alpha * tdc_value); }

Tensor3 temporal_correct(const Tensor3& original, const Tensor3& perturbed, const ConstraintConfig& cfg) {
  if (original.shape() != perturbed.shape()) throw Error("temporal_correct: shape mismatch");
  Tensor3 out = perturbed;
  const std::size_t fs = original.shape().frame_size();
  std::vector<double> prev(fs), curr(fs);
  for (int k = 1; k < original.frames(); ++k) {
    auto x_prev = original.frame(k - 1);
    auto xp_prev = out.frame(k - 1);
    auto x_curr = original.frame(k);
    auto xp_curr = out.frame(k);
    for (std::size_t e = 0; e < fs; ++e) {
      prev[e] = xp_prev[e] - x_prev[e];
      curr[e] = xp_curr[e] - x_curr[e];
    }
    const double lambda = decay_weight(tdc(prev, curr, cfg.zero_norm_threshold), cfg.alpha);
    for (std::size_t e = 0; e < fs; ++e) xp_curr[e] = x_curr[e] + lambda * prev[e] + (1.0 - lambda) * curr[e];
  }
  return out;
}

Tensor3 bone_project(const Tensor3& original, const Tensor3& perturbed, const Topology& topo,
                     const ConstraintConfig& cfg, Exec exec) {
  if (original.shape() != perturbed.shape()) throw Error("bone_project: shape mismatch");
  if (original.joints() != topo.joint_count()) throw Error("bone_project: topology mismatch");
  Tensor3 out = perturbed;
  kernels::bone_project_frames(original, out, topo, cfg.epsilon_b, exec);
  return out;
}

namespace {

void clamp_unit(Tensor3& x) {
  for (double& v : x.values()) v = std::clamp(v, 0.0, 1.0);
}

}  // namespace

Tensor3 theta(const Tensor3& original, const Tensor3& perturbed, const Topology& topo, const ConstraintConfig& cfg,
              Exec exec) {
  Tensor3 out = cfg.temporal ? temporal_correct(original, perturbed, cfg) : perturbed;
  clamp_unit(out);
  out = bone_project(original, out, topo, cfg, exec);
  clamp_unit(out);
  return out;
}

}  // namespace skeladv
