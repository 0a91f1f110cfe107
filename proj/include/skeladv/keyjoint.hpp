#pragma once

#include <filesystem>
#include <vector>

#include "skeladv/motion.hpp"
#include "skeladv/net.hpp"

namespace skeladv {

/// Grad-CAM significance L^c[t][i] ≥ 0, stored as a T×N×1 tensor.
using SignificanceMap = Tensor3;

/// Per-frame Grad-CAM at conv layer `layer` (−1 selects the last one):
/// α_k = mean_i ∂y^c/∂F_{k,i}, L[t][i] = relu(Σ_k α_k F_{k,i}).
SignificanceMap gradcam_scores(const GraphConvClassifier& model, const Tensor3& input, int cls, int layer = -1);

/// N_k highest-scoring joints per frame; ties go to the lower joint index. Each set is sorted.
std::vector<std::vector<int>> top_joints_per_frame(const SignificanceMap& map, int nk);

/// Mask of the N_k joints that appear most often across the per-frame sets (ties: lower index).
JointMask aggregate_key_joints(const std::vector<std::vector<int>>& per_frame, int joints, int nk);

/// |a ∩ b| / sqrt(|a|·|b|)
double mask_cosine_similarity(const JointMask& a, const JointMask& b);

/// Key joints of a motion, using the surrogate's own predicted class.
JointMask extract_key_joints(const GraphConvClassifier& surrogate, const Tensor3& input, int nk, int layer = -1);

/// Two readings of the key-joint similarity statistic for one motion.
struct KeyJointSimilarity {
  /// Mean cosine similarity over all pairs of distinct frames' top-N_k sets.
  double frame_pairs = 0.0;
  /// Mean cosine similarity between each frame's set and the aggregated mask.
  double frame_to_aggregate = 0.0;
};

KeyJointSimilarity key_joint_similarity(const std::vector<std::vector<int>>& per_frame, int joints, int nk);

void save_mask(const JointMask& mask, const std::filesystem::path& path);
JointMask load_mask(const std::filesystem::path& path);

}  // namespace skeladv
