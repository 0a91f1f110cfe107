#pragma once

#include <string>
#include <utility>
#include <vector>

#include "skeladv/tensor.hpp"

namespace skeladv {

using MotionPair = std::pair<Tensor3, Tensor3>;  // (original, adversarial)

/// Mean over motions of Σ_{t, j≠root} |‖x_tj − x_tc‖ − ‖x'_tj − x'_tc‖|.
double l_c(const std::vector<MotionPair>& pairs, int root);

/// (1/(n·T·N)) Σ_i ‖ẍ_i − ẍ'_i‖ with ẍ[t] = x[t+1] − 2x[t] + x[t−1] over t = 1..T−2 and the
/// norm taken over the whole acceleration array of motion i.
double delta_a(const std::vector<MotionPair>& pairs);

/// Per-frame TDC of the perturbation x' − x; entry k compares frames k−1 and k (entry 0 is 1).
std::vector<double> tdc_profile(const Tensor3& original, const Tensor3& adversarial,
                                double zero_norm_threshold = 1e-9);

struct SampleRecord {
  int sample = 0;
  int label = -1;
  bool skipped = false;
  bool success = false;
  long queries = 0;
  long verification_queries = 0;
  double linf = 0.0;
  double l_c = 0.0;
  double delta_a = 0.0;
};

struct CampaignStats {
  int attempted = 0;
  int successes = 0;
  int skipped = 0;
  double asr = 0.0;
  double aq = 0.0;
  double l_c = 0.0;
  double delta_a = 0.0;
};

/// ASR over attempted (non-skipped) samples; AQ, l_c and Δa over successes within `budget`.
/// Per-sample l_c and Δa fields hold the single-pair values, so the aggregates are their means
/// (for Δa the single-pair value is already divided by T·N).
CampaignStats aggregate(const std::vector<SampleRecord>& records, long budget);

}  // namespace skeladv
