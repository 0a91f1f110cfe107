#include "skeladv/rays.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "skeladv/synth.hpp"

namespace skeladv {

Tensor3 candidate_point(const Tensor3& x, const std::vector<double>& d, double r, const Topology& topo,
                        const ConstraintConfig& cfg) {
  if (d.size() != x.size()) throw Error("candidate_point: direction size mismatch");
  const double norm = l2_norm(d);
  if (norm == 0.0) throw Error("candidate_point: zero direction");
  Tensor3 raw = x;
  const double scale = r / norm;
  auto& v = raw.values();
  for (std::size_t e = 0; e < v.size(); ++e) v[e] += scale * d[e];
  return theta(x, raw, topo, cfg);
}

GResResult g_res(const Tensor3& x, const std::vector<double>& d, Oracle& oracle,
                 const std::function<bool(int)>& is_adversarial, double r_hi, double tolerance,
                 const Topology& topo, const ConstraintConfig& cfg, long max_queries, double stop_radius) {
  if (!(r_hi > 0.0) || !std::isfinite(r_hi)) throw Error("g_res: search interval must be (0, r_hi] with finite r_hi");
  if (!(tolerance > 0.0)) throw Error("g_res: tolerance must be positive");
  GResResult out;
  auto probe = [&](double r) -> std::optional<bool> {
    if (out.queries >= max_queries) {
      out.exhausted = true;
      return std::nullopt;
    }
    ++out.queries;
    return is_adversarial(oracle.query(candidate_point(x, d, r, topo, cfg)));
  };
  const auto fast = probe(r_hi);
  if (!fast || !*fast) return out;
  out.first_hit = out.queries;
  double lo = 0.0;
  double hi = r_hi;
  out.radius = hi;
  while (hi - lo >= tolerance) {
    if (stop_radius > 0.0 && hi <= stop_radius) break;
    const double mid = 0.5 * (lo + hi);
    const auto adv = probe(mid);
    if (!adv) break;
    if (*adv) {
      hi = mid;
      out.radius = hi;
    } else {
      lo = mid;
    }
  }
  return out;
}

std::vector<std::size_t> masked_dims(const Shape& shape, const JointMask& mask) {
  std::vector<std::size_t> dims;
  for (int t = 0; t < shape.frames; ++t) {
    for (int i = 0; i < shape.joints; ++i) {
      if (!mask[i]) continue;
      for (int k = 0; k < shape.channels; ++k) {
        dims.push_back((static_cast<std::size_t>(t) * shape.joints + i) * shape.channels + k);
      }
    }
  }
  return dims;
}

namespace {

JointMask effective_mask(const Tensor3& x, const AttackConfig& cfg) {
  if (cfg.mask.joints() == 0) return JointMask::all(x.joints());
  if (cfg.mask.joints() != x.joints()) throw Error("attack mask joint count does not match the motion");
  if (cfg.mask.count() == 0) throw Error("attack mask selects no joints");
  return cfg.mask;
}

void validate(const AttackConfig& cfg) {
  if (!(cfg.epsilon > 0.0)) throw Error("epsilon must be positive");
  if (cfg.query_limit < 0) throw Error("query limit must be non-negative");
  cfg.constraints.validate();
}

class RaySearch {
 public:
  RaySearch(const Tensor3& x, Oracle& oracle, const Topology& topo, const AttackConfig& cfg,
            std::function<bool(int)> is_adversarial, const JointMask& mask)
      : x_(x), oracle_(oracle), topo_(topo), cfg_(cfg), pred_(std::move(is_adversarial)),
        dims_(masked_dims(x.shape(), mask)), sqrt_m_(std::sqrt(static_cast<double>(dims_.size()))),
        threshold_(cfg.epsilon * sqrt_m_) {}

  AttackReport run(std::vector<double> d, long used) {
    used_ = used;
    AttackReport rep;
    const long search_limit = cfg_.query_limit - 1;  // one query is kept for the final re-verification
    auto evaluate = [&](const std::vector<double>& dir, double r_hi) -> std::optional<double> {
      const long left = std::max(0L, search_limit - used_);
      const long before = used_;
      const GResResult g = g_res(x_, dir, oracle_, pred_, r_hi, cfg_.tolerance, topo_, cfg_.constraints, left,
                                 cfg_.early_stop ? threshold_ : 0.0);
      used_ += g.queries;
      if (first_hit_ < 0 && g.first_hit >= 0) first_hit_ = before + g.first_hit;
      exhausted_ = exhausted_ || g.exhausted;
      return g.radius;
    };
    auto accept = [&](double r) { r_best_ = r; };
    auto succeeded = [&] { return r_best_ <= threshold_ * (1.0 + 1e-12); };

    if (const auto r = evaluate(d, sqrt_m_)) accept(*r);
    const std::size_t m = dims_.size();
    int stage = 0;
    while (!succeeded() && !exhausted_) {
      const std::size_t blocks = std::min<std::size_t>(std::size_t{1} << std::min(stage, 62), m);
      bool improved = false;
      for (std::size_t b = 0; b < blocks && !succeeded() && !exhausted_; ++b) {
        const std::size_t begin = b * m / blocks;
        const std::size_t end = (b + 1) * m / blocks;
        std::vector<double> trial = d;
        for (std::size_t e = begin; e < end; ++e) trial[dims_[e]] = -trial[dims_[e]];
        const double r_hi = std::isfinite(r_best_) ? r_best_ : sqrt_m_;
        const auto r = evaluate(trial, r_hi);
        if (r && *r < r_best_) {
          d = std::move(trial);
          accept(*r);
          improved = true;
        }
      }
      if (succeeded() || exhausted_) break;
      if (!improved) {
        if (blocks == m) {
          rep.failure = "stall";
          break;
        }
        ++stage;
      }
    }
    rep.stage = stage;
    rep.first_adversarial_queries = first_hit_;
    rep.radius = r_best_;
    rep.linf_raw = r_best_ / sqrt_m_;
    if (std::isfinite(r_best_)) {
      Tensor3 adv = candidate_point(x_, d, r_best_, topo_, cfg_.constraints);
      rep.linf_final = linf_distance(adv.values(), x_.values());
      if (succeeded()) {
        // Final re-verification, counted like any other query.
        ++used_;
        rep.final_label = oracle_.query(adv);
        rep.success = pred_(rep.final_label);
        if (!rep.success) rep.failure = "verification";
      }
      rep.adversarial = std::move(adv);
    }
    if (!rep.success && rep.failure.empty()) rep.failure = "budget";
    rep.queries = used_;
    return rep;
  }

  const std::vector<std::size_t>& dims() const { return dims_; }

 private:
  const Tensor3& x_;
  Oracle& oracle_;
  const Topology& topo_;
  const AttackConfig& cfg_;
  std::function<bool(int)> pred_;
  std::vector<std::size_t> dims_;
  double sqrt_m_;
  double threshold_;
  double r_best_ = std::numeric_limits<double>::infinity();
  long used_ = 0;
  long first_hit_ = -1;
  bool exhausted_ = false;
};

}  // namespace

AttackReport hierarchical_search(const Tensor3& x, int label, Oracle& oracle, const Topology& topo,
                                 const AttackConfig& cfg) {
  validate(cfg);
  const JointMask mask = effective_mask(x, cfg);
  RaySearch search(x, oracle, topo, cfg, [label](int y) { return y != label; }, mask);
  std::vector<double> d(x.size(), 0.0);
  for (std::size_t e : search.dims()) d[e] = 1.0;
  AttackReport rep = search.run(std::move(d), 0);
  rep.start = x;
  return rep;
}

AttackReport attack_targeted(const Tensor3& x, int target_class, const Tensor3& x_t, Oracle& oracle,
                             const Topology& topo, const AttackConfig& cfg, TargetInit init) {
  validate(cfg);
  if (x_t.shape() != x.shape()) throw Error("attack_targeted: target motion shape mismatch");
  const JointMask mask = effective_mask(x, cfg);
  if (cfg.query_limit < 1 || oracle.query(x_t) != target_class) throw Error("invalid target anchor");
  RaySearch search(x, oracle, topo, cfg, [target_class](int y) { return y == target_class; }, mask);
  std::vector<double> d(x.size(), 0.0);
  for (std::size_t e : search.dims()) {
    d[e] = (init == TargetInit::TargetSign && x_t.values()[e] - x.values()[e] < 0.0) ? -1.0 : 1.0;
  }
  AttackReport rep = search.run(std::move(d), 1);
  rep.start = x;
  return rep;
}

JointMask baseline_random_mask(int joints, int nk, std::uint64_t seed) {
  if (nk < 1 || nk > joints) throw Error("baseline_random_mask: N_k must lie in [1, N]");
  std::vector<int> idx(joints);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  for (int i = 0; i < nk; ++i) {
    const int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(joints - i)));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(nk);
  return JointMask::from_indices(joints, idx);
}

}  // namespace skeladv
