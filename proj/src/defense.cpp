#include "skeladv/defense.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>

#include "skeladv/keyjoint.hpp"
#include "skeladv/synth.hpp"

namespace skeladv {

ATVariant parse_at_variant(const std::string& name) {
  if (name == "k") return ATVariant::K;
  if (name == "nr") return ATVariant::NR;
  if (name == "nrl") return ATVariant::NRL;
  if (name == "nra") return ATVariant::NRA;
  throw Error("unknown AT variant '" + name + "' (expected k, nr, nrl or nra)");
}

std::string at_variant_name(ATVariant v) {
  switch (v) {
    case ATVariant::K: return "k";
    case ATVariant::NR: return "nr";
    case ATVariant::NRL: return "nrl";
    case ATVariant::NRA: return "nra";
  }
  return "?";
}

std::vector<Replacement> default_replacement_pool() {
  std::vector<Replacement> pool;
  for (const auto& name : kTemplateNames) {
    pool.push_back({builtin_template(name), {Region::LeftLeg, Region::RightLeg}});
  }
  return pool;
}

namespace {

double ce_loss(const GraphConvClassifier& model, const Tensor3& x, int y) {
  return loss_value(logits(model, x, Exec::Serial), LossSpec{LossSpec::Kind::CrossEntropy, y, 0});
}

long count_changed(const Tensor3& a, const Tensor3& b) {
  long n = 0;
  for (std::size_t e = 0; e < a.size(); ++e) n += a.values()[e] != b.values()[e] ? 1 : 0;
  return n;
}

Tensor3 pgd(const GraphConvClassifier& model, const Tensor3& base, int y, const JointMask& mask,
            const ATVariantConfig& cfg, const Topology& topo) {
  Tensor3 adv = base;
  const double step = cfg.step();
  const LossSpec spec{LossSpec::Kind::CrossEntropy, y, 0};
  const int d = base.channels();
  for (int s = 0; s < cfg.inner_steps; ++s) {
    const Tensor3 g = input_gradient(model, adv, spec);
    Tensor3 next = adv;
    for (int t = 0; t < base.frames(); ++t) {
      for (int j = 0; j < base.joints(); ++j) {
        for (int k = 0; k < d; ++k) {
          if (!mask[j]) {
            next(t, j, k) = base(t, j, k);
            continue;
          }
          const double gv = g(t, j, k);
          const double v = next(t, j, k) + step * (gv > 0.0 ? 1.0 : (gv < 0.0 ? -1.0 : 0.0));
          next(t, j, k) = std::clamp(v, base(t, j, k) - cfg.epsilon, base(t, j, k) + cfg.epsilon);
        }
      }
    }
    adv = theta(base, next, topo, cfg.constraints, Exec::Serial);
  }
  return adv;
}

}  // namespace

InnerResult inner_max(const GraphConvClassifier& model, const Tensor3& x, int y, const ATVariantConfig& cfg,
                      const Topology& topo, std::uint64_t stream) {
  InnerResult out;
  switch (cfg.variant) {
    case ATVariant::K: {
      out.base = x;
      out.mask = extract_key_joints(model, x, cfg.nk);
      out.example = pgd(model, x, y, out.mask, cfg, topo);
      break;
    }
    case ATVariant::NR: {
      if (cfg.pool.empty()) throw Error("AT-NR needs a nonempty replacement pool");
      double best = -std::numeric_limits<double>::infinity();
      for (const auto& rep : cfg.pool) {
        const JointMask mr = region_mask(topo, rep.regions);
        Tensor3 cand = splice(x, template_motion(rep.posture, 1), mr, topo).motion;
        const double loss = ce_loss(model, cand, y);
        if (loss > best) {
          best = loss;
          out.example = std::move(cand);
          out.mask = mr;
        }
      }
      out.base = out.example;
      break;
    }
    case ATVariant::NRL:
    case ATVariant::NRA: {
      if (cfg.pool.empty()) throw Error("AT-NRL/NRA needs a nonempty replacement pool");
      Rng rng(stream);
      const Replacement& rep = cfg.pool[rng.below(cfg.pool.size())];
      const JointMask mr = region_mask(topo, rep.regions);
      out.base = splice(x, template_motion(rep.posture, 1), mr, topo).motion;
      out.mask = cfg.variant == ATVariant::NRL ? mr : JointMask::all(x.joints());
      out.example = pgd(model, out.base, y, out.mask, cfg, topo);
      break;
    }
  }
  out.perturbed_dims = count_changed(out.example, out.base);
  return out;
}

ATResult at_train(GraphConvClassifier& model, const Dataset& data, const ATVariantConfig& cfg,
                  const TrainConfig& train_cfg, const Topology& topo, bool measure_robust) {
  ATResult result;
  std::atomic<long> dims{0};
  std::atomic<long> examples{0};
  int epoch_seen = 0;
  BatchTransform transform = [&](const GraphConvClassifier& m, const Motion& motion, int label, std::uint64_t stream) {
    InnerResult r = inner_max(m, motion.coords(), label, cfg, topo, stream);
    dims += r.perturbed_dims;
    ++examples;
    return std::move(r.example);
  };
  const auto test = data.test_motions();
  EpochHook hook = [&](const GraphConvClassifier& m, EpochStats& st) {
    ++epoch_seen;
    if (examples > 0) result.mean_perturbed_dims = static_cast<double>(dims) / static_cast<double>(examples);
    dims = 0;
    examples = 0;
    if (!measure_robust || test.empty()) return;
    std::vector<int> ok(test.size(), 0);
#pragma omp parallel for schedule(dynamic)
    for (std::size_t i = 0; i < test.size(); ++i) {
      const int label = test[i].label().value();
      const auto r = inner_max(m, test[i].coords(), label, cfg, topo, mix_seed(train_cfg.seed ^ 0x5eedULL, i));
      ok[i] = predict(m, r.example) == label ? 1 : 0;
    }
    long correct = 0;
    for (int v : ok) correct += v;
    st.robust_accuracy = static_cast<double>(correct) / static_cast<double>(test.size());
  };
  result.history = train(model, data, train_cfg, transform, hook);
  return result;
}

}  // namespace skeladv
