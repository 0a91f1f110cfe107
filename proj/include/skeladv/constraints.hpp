#pragma once

#include <span>

#include "skeladv/kernels.hpp"
#include "skeladv/tensor.hpp"
#include "skeladv/topology.hpp"

namespace skeladv {

struct ConstraintConfig {
  double epsilon_b = 0.1;
  double alpha = 10.0;
  /// Below this direction norm TDC is defined as 1.
  double zero_norm_threshold = 1e-9;
  /// When false, theta skips the temporal sweep (bone projection and clamp only).
  bool temporal = true;

  void validate() const;
};

/// 0.5·cos(prev, curr) + 0.5, or 1 when either vector is (near) zero.
double tdc(std::span<const double> dir_prev, std::span<const double> dir_curr,
           double zero_norm_threshold = 1e-9);

/// exp(−alpha · tdc_value)
double decay_weight(double tdc_value, double alpha);

/// Sequential sweep over frames 1..T−1 blending each frame's perturbation direction with the
/// already-corrected direction of its predecessor. Frame 0 is left as is.
Tensor3 temporal_correct(const Tensor3& original, const Tensor3& perturbed, const ConstraintConfig& cfg);

/// Root-down per-frame projection of every bone length into [1−ε_b, 1+ε_b] × original length.
/// The root joint of `perturbed` is kept. Bones whose projected end point would leave the unit
/// box are re-placed inside it (still within the interval) so a later clamp cannot break them.
Tensor3 bone_project(const Tensor3& original, const Tensor3& perturbed, const Topology& topo,
                     const ConstraintConfig& cfg, Exec exec = Exec::Parallel);

/// Θ: temporal correction, clamp to [0,1], bone projection, final clamp to [0,1].
Tensor3 theta(const Tensor3& original, const Tensor3& perturbed, const Topology& topo,
              const ConstraintConfig& cfg, Exec exec = Exec::Parallel);

}  // namespace skeladv
