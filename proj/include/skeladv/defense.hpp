#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "skeladv/constraints.hpp"
#include "skeladv/isaac_n.hpp"
#include "skeladv/net.hpp"

namespace skeladv {

enum class ATVariant { K, NR, NRL, NRA };
ATVariant parse_at_variant(const std::string& name);
std::string at_variant_name(ATVariant v);

/// One replacement choice: a posture spliced into a set of regions.
struct Replacement {
  PostureTemplate posture;
  std::vector<Region> regions;
};

/// K: φ = id, δ = 1, M_x = key joints. NR: φ = worst replacement, δ = 0. NRL: φ = sampled
/// replacement, δ = 1, M_x = replaced joints. NRA: as NRL with M_x = all joints.
struct ATVariantConfig {
  ATVariant variant = ATVariant::K;
  int inner_steps = 5;
  double epsilon = 0.4;
  /// PGD step; non-positive means epsilon / 4.
  double step_size = 0.0;
  int nk = 18;
  ConstraintConfig constraints;
  std::vector<Replacement> pool;

  double step() const { return step_size > 0.0 ? step_size : epsilon / 4.0; }
};

/// The four shipped postures on the lower body.
std::vector<Replacement> default_replacement_pool();

struct InnerResult {
  Tensor3 example;
  /// φ(x): the point the perturbation is measured from.
  Tensor3 base;
  JointMask mask;
  /// Number of coordinates where example differs from base.
  long perturbed_dims = 0;
};

/// Worst-case training example for (x, y) under the variant. `stream` seeds the replacement
/// sampling of NRL/NRA.
InnerResult inner_max(const GraphConvClassifier& model, const Tensor3& x, int y, const ATVariantConfig& cfg,
                      const Topology& topo, std::uint64_t stream);

struct ATResult {
  std::vector<EpochStats> history;
  /// Mean perturbed-dimension count k_x over the examples of the last epoch.
  double mean_perturbed_dims = 0.0;
};

/// Adversarial fine-tuning: every training input is replaced by its inner_max example.
/// Robust accuracy per epoch is measured on the test split against the same inner maximization.
ATResult at_train(GraphConvClassifier& model, const Dataset& data, const ATVariantConfig& cfg,
                  const TrainConfig& train_cfg, const Topology& topo, bool measure_robust = true);

}  // namespace skeladv
