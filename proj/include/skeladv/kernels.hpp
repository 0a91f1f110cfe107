#pragma once

// Frame-parallel inner loops. Every kernel has a serial reference path and an OpenMP path;
// the two write disjoint outputs per frame (or sum in the same order), so their results are
// bit-identical and the serial path doubles as the test oracle for the parallel one.

#include "skeladv/tensor.hpp"

namespace skeladv {

class Topology;

enum class Exec { Serial, Parallel };

namespace kernels {

/// Number of OpenMP threads available, 1 when built without OpenMP.
int max_threads();

/// pre[t] = adj · in[t] · weight, post[t] = relu(pre[t]) for every frame t.
/// `agg` receives adj · in[t] (needed for the weight gradient).
void graph_conv_forward(const Matrix& adj, const Matrix& weight, const Tensor3& in, Tensor3& agg,
                        Tensor3& pre, Tensor3& post, Exec exec);

/// Back-propagates `grad_post` (∂y/∂post) through relu and the graph convolution.
/// Writes ∂y/∂in into `grad_in` and, when `grad_weight` is non-null, accumulates
/// Σ_t agg[t]ᵀ · grad_pre[t] into it.
void graph_conv_backward(const Matrix& adj, const Matrix& weight, const Tensor3& agg,
                         const Tensor3& pre, const Tensor3& grad_post, Tensor3& grad_in,
                         Matrix* grad_weight, Exec exec);

/// Mean over frames and joints, one value per channel.
std::vector<double> mean_pool(const Tensor3& features);

/// Per-frame root-down bone-length projection (see constraints::bone_project).
void bone_project_frames(const Tensor3& original, Tensor3& perturbed, const Topology& topo,
                         double epsilon_b, Exec exec);

}  // namespace kernels
}  // namespace skeladv
