#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "skeladv/constraints.hpp"
#include "skeladv/motion.hpp"
#include "skeladv/net.hpp"

namespace skeladv {

/// Hard-label victim. Every call to `query` counts exactly once.
class Oracle {
 public:
  virtual ~Oracle() = default;
  int query(const Tensor3& x) {
    ++count_;
    return classify(x);
  }
  long count() const { return count_.load(); }

 protected:
  virtual int classify(const Tensor3& x) = 0;

 private:
  std::atomic<long> count_{0};
};

class FunctionOracle : public Oracle {
 public:
  explicit FunctionOracle(std::function<int(const Tensor3&)> fn) : fn_(std::move(fn)) {}

 protected:
  int classify(const Tensor3& x) override { return fn_(x); }

 private:
  std::function<int(const Tensor3&)> fn_;
};

/// In-process victim backed by a classifier.
class ModelOracle : public Oracle {
 public:
  explicit ModelOracle(const GraphConvClassifier& model) : model_(model) {}

 protected:
  int classify(const Tensor3& x) override { return predict(model_, x); }

 private:
  const GraphConvClassifier& model_;
};

struct AttackConfig {
  double epsilon = 0.4;
  long query_limit = 2000;
  ConstraintConfig constraints;
  /// Joints the search may perturb. An empty mask means all joints.
  JointMask mask;
  double tolerance = 1e-3;
  /// Stop bisecting once the verified radius already meets the success threshold.
  bool early_stop = false;
};

/// Per-sample outcome. `queries` counts search queries (including the final re-verification);
/// `verification_queries` counts queries that only check a replacement. Their sum equals the
/// oracle counter delta of the attack.
struct AttackReport {
  bool success = false;
  long queries = 0;
  long verification_queries = 0;
  /// Queries spent when the first adversarial point was verified (−1 if none).
  long first_adversarial_queries = -1;
  /// Best verified ray radius (infinity if none was found).
  double radius = std::numeric_limits<double>::infinity();
  /// Per-coordinate magnitude of the pre-projection perturbation, radius/√m.
  double linf_raw = std::numeric_limits<double>::infinity();
  /// ℓ∞ distance of the stored adversarial motion from the attacked motion, after Θ.
  double linf_final = std::numeric_limits<double>::infinity();
  int stage = 0;
  /// "", "budget", "stall", "not-adversarial", "verification".
  std::string failure;
  int final_label = -1;
  std::optional<Tensor3> adversarial;
  /// Motion the search started from (the spliced motion for replacement attacks).
  std::optional<Tensor3> start;
  std::vector<long> donor_queries;
};

/// Θ(x, x + r·d/‖d‖₂). Consumes no queries.
Tensor3 candidate_point(const Tensor3& x, const std::vector<double>& d, double r, const Topology& topo,
                        const ConstraintConfig& cfg);

struct GResResult {
  std::optional<double> radius;  // verified adversarial radius, if any
  long queries = 0;
  bool exhausted = false;        // budget ran out mid-search
  long first_hit = -1;           // queries spent when the first adversarial answer arrived
};

/// Fast check at r_hi, then bisection of (0, r_hi] down to `tolerance`. `max_queries` caps
/// the queries this call may spend; `stop_radius` ends the bisection as soon as a verified
/// radius at or below it is found (0 disables).
GResResult g_res(const Tensor3& x, const std::vector<double>& d, Oracle& oracle,
                 const std::function<bool(int)>& is_adversarial, double r_hi, double tolerance,
                 const Topology& topo, const ConstraintConfig& cfg,
                 long max_queries = std::numeric_limits<long>::max(), double stop_radius = 0.0);

/// Masked-dimension indices into the flattened T×N×D tensor, frame-major then joint then coordinate.
std::vector<std::size_t> masked_dims(const Shape& shape, const JointMask& mask);

/// Untargeted ISAAC-K search from x whose clean label is `label`. The initial direction is +1
/// on every masked dimension.
AttackReport hierarchical_search(const Tensor3& x, int label, Oracle& oracle, const Topology& topo,
                                 const AttackConfig& cfg);

enum class TargetInit { TargetSign, Ones };

/// Targeted search. Spends one counted query checking that x_t is classified as the target.
AttackReport attack_targeted(const Tensor3& x, int target_class, const Tensor3& x_t, Oracle& oracle,
                             const Topology& topo, const AttackConfig& cfg,
                             TargetInit init = TargetInit::TargetSign);

/// Uniformly random N_k-subset of the joints.
JointMask baseline_random_mask(int joints, int nk, std::uint64_t seed);

}  // namespace skeladv
