#include "skeladv/isaac_n.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <nlohmann/json.hpp>

#include "skeladv/synth.hpp"
#include "skeladv/textio.hpp"

namespace skeladv {

namespace {

struct LegPose {
  std::array<double, 3> knee, ankle, foot;
};

PostureTemplate legs_template(const std::string& name, const LegPose& left, const LegPose& right) {
  PostureTemplate tpl;
  tpl.name = name;
  tpl.topology = "ntu25";
  tpl.regions = {Region::LeftLeg, Region::RightLeg};
  tpl.attachments = {12, 16};
  for (const auto& p : ntu25_rest_pose()) tpl.joints.push_back({p[0], p[1], p[2]});
  auto put = [&](int j, const std::array<double, 3>& p) { tpl.joints[j] = {p[0], p[1], p[2]}; };
  put(13, left.knee);
  put(14, left.ankle);
  put(15, left.foot);
  put(17, right.knee);
  put(18, right.ankle);
  put(19, right.foot);
  return tpl;
}

LegPose mirror(const LegPose& p) {
  return {{-p.knee[0], p.knee[1], p.knee[2]}, {-p.ankle[0], p.ankle[1], p.ankle[2]}, {-p.foot[0], p.foot[1], p.foot[2]}};
}

}  // namespace

PostureTemplate builtin_template(const std::string& name) {
  const LegPose sit{{-0.11, -0.04, 0.42}, {-0.12, -0.44, 0.42}, {-0.12, -0.47, 0.52}};
  const LegPose crouch{{-0.14, -0.30, 0.30}, {-0.12, -0.62, 0.08}, {-0.12, -0.65, 0.18}};
  const LegPose kneel{{-0.11, -0.45, 0.0}, {-0.12, -0.47, -0.40}, {-0.12, -0.50, -0.45}};
  const LegPose step{{-0.11, -0.25, 0.38}, {-0.12, -0.65, 0.40}, {-0.12, -0.68, 0.50}};
  if (name == "sit") return legs_template(name, sit, mirror(sit));
  if (name == "crouch") return legs_template(name, crouch, mirror(crouch));
  if (name == "kneel") return legs_template(name, kneel, mirror(kneel));
  if (name == "half-kneel") return legs_template(name, kneel, mirror(step));
  throw Error("unknown posture template '" + name + "'");
}

void save_template(const PostureTemplate& tpl, const std::filesystem::path& path) {
  nlohmann::json regions = nlohmann::json::array();
  for (Region r : tpl.regions) regions.push_back(std::string(region_name(r)));
  nlohmann::json doc{{"name", tpl.name},
                     {"topology", tpl.topology},
                     {"regions", regions},
                     {"attachments", tpl.attachments},
                     {"joints", tpl.joints}};
  write_file_atomic(path, dump_json17(doc));
}

PostureTemplate load_template(const std::filesystem::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError("template file: malformed: " + std::string(e.what()));
  }
  PostureTemplate tpl;
  for (const char* key : {"name", "topology", "regions", "attachments", "joints"}) {
    if (!doc.contains(key)) throw FormatError(std::string("template file: missing field '") + key + "'");
  }
  try {
    tpl.name = doc.at("name").get<std::string>();
    tpl.topology = doc.at("topology").get<std::string>();
    for (const auto& r : doc.at("regions")) tpl.regions.push_back(parse_region(r.get<std::string>()));
    tpl.attachments = doc.at("attachments").get<std::vector<int>>();
    tpl.joints = doc.at("joints").get<std::vector<std::vector<double>>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("template file: wrong field type: " + std::string(e.what()));
  }
  return tpl;
}

PostureTemplate resolve_template(const std::string& name_or_path) {
  if (std::find(kTemplateNames.begin(), kTemplateNames.end(), name_or_path) != kTemplateNames.end()) {
    return builtin_template(name_or_path);
  }
  return load_template(name_or_path);
}

JointMask region_mask(const Topology& topo, const std::vector<Region>& regions) {
  JointMask mask = JointMask::none(topo.joint_count());
  for (int j = 0; j < topo.joint_count(); ++j) {
    if (std::find(regions.begin(), regions.end(), topo.region(j)) != regions.end()) mask.set(j, true);
  }
  return mask;
}

std::vector<Region> parse_region_list(const std::string& spec) {
  if (spec == "lower-body") return {Region::LeftLeg, Region::RightLeg};
  if (spec == "upper-body") return {Region::LeftHand, Region::RightHand};
  std::vector<Region> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_region(item));
  if (out.empty()) throw Error("empty region list");
  return out;
}

Tensor3 template_motion(const PostureTemplate& tpl, int frames) {
  const int n = static_cast<int>(tpl.joints.size());
  if (n == 0) throw Error("template '" + tpl.name + "' has no joints");
  const int d = static_cast<int>(tpl.joints.front().size());
  Tensor3 out(Shape{frames, n, d});
  for (int t = 0; t < frames; ++t) {
    for (int j = 0; j < n; ++j) {
      if (static_cast<int>(tpl.joints[j].size()) != d) throw Error("template '" + tpl.name + "' has ragged joints");
      for (int k = 0; k < d; ++k) out(t, j, k) = tpl.joints[j][k];
    }
  }
  return out;
}

std::vector<int> replacement_attachments(const JointMask& mask, const Topology& topo) {
  if (mask.joints() != topo.joint_count()) throw Error("replacement mask joint count does not match topology");
  if (mask.count() == 0) throw Error("replacement mask selects no joints");
  if (mask[topo.root()]) throw Error("replacement region must not contain the root joint");
  std::vector<int> attachments;
  for (int j = 0; j < topo.joint_count(); ++j) {
    if (!mask[j]) continue;
    for (int c : topo.children(j)) {
      if (!mask[c]) throw Error("disconnected replacement region");
    }
    if (!mask[topo.parent(j)]) attachments.push_back(j);
  }
  return attachments;
}

SpliceResult splice(const Tensor3& x, const Tensor3& donor, const JointMask& replace, const Topology& topo) {
  if (x.joints() != topo.joint_count() || donor.joints() != x.joints() || donor.channels() != x.channels()) {
    throw Error("splice: host and donor must share the topology");
  }
  if (donor.frames() != 1 && donor.frames() != x.frames()) throw Error("splice: donor frame count mismatch");
  const std::vector<int> attachments = replacement_attachments(replace, topo);
  const int d = x.channels();
  Tensor3 out = x;
  std::vector<double> hb(d), db(d);
  for (int t = 0; t < x.frames(); ++t) {
    const int td = donor.frames() == 1 ? 0 : t;
    for (int a : attachments) {
      const int p = topo.parent(a);
      for (int k = 0; k < d; ++k) {
        hb[k] = x(t, a, k) - x(t, p, k);
        db[k] = donor(td, a, k) - donor(td, p, k);
      }
      const double ld = l2_norm(db);
      const double s = ld < 1e-12 ? 1.0 : l2_norm(hb) / ld;
      for (int j : topo.subtree(a)) {
        for (int k = 0; k < d; ++k) out(t, j, k) = x(t, a, k) + s * (donor(td, j, k) - donor(td, a, k));
      }
    }
  }
  const bool inside = std::all_of(out.values().begin(), out.values().end(), [](double v) { return v >= 0.0 && v <= 1.0; });
  if (inside) return {std::move(out), NormalizationRecord{std::vector<double>(d, 0.0), 1.0}};
  auto [motion, record] = normalize(out, topo.name());
  return {motion.coords(), std::move(record)};
}

namespace {

AttackReport replacement_attack(const Tensor3& x, int label, const Tensor3& donor, const JointMask& replace,
                                Oracle& oracle, const Topology& topo, const AttackConfig* cfg,
                                const JointMask* search_mask) {
  SpliceResult sp = splice(x, donor, replace, topo);
  AttackReport rep;
  rep.verification_queries = 1;
  rep.final_label = oracle.query(sp.motion);
  rep.start = sp.motion;
  if (rep.final_label != label) {
    rep.success = true;
    rep.first_adversarial_queries = 0;
    rep.radius = 0.0;
    rep.linf_raw = 0.0;
    rep.linf_final = 0.0;
    rep.adversarial = sp.motion;
    return rep;
  }
  if (cfg == nullptr || cfg->query_limit == 0) {
    rep.failure = "not-adversarial";
    return rep;
  }
  AttackConfig sub = *cfg;
  sub.mask = *search_mask;
  AttackReport search = hierarchical_search(sp.motion, label, oracle, topo, sub);
  search.verification_queries = 1;
  search.start = std::move(sp.motion);
  return search;
}

}  // namespace

AttackReport attack_nr(const Tensor3& x, int label, const Tensor3& donor, const JointMask& replace, Oracle& oracle,
                       const Topology& topo) {
  return replacement_attack(x, label, donor, replace, oracle, topo, nullptr, nullptr);
}

AttackReport attack_nrl(const Tensor3& x, int label, const Tensor3& donor, const JointMask& replace,
                        Oracle& oracle, const Topology& topo, const AttackConfig& cfg) {
  return replacement_attack(x, label, donor, replace, oracle, topo, &cfg, &replace);
}

AttackReport attack_nra(const Tensor3& x, int label, const Tensor3& donor, const JointMask& replace,
                        Oracle& oracle, const Topology& topo, const AttackConfig& cfg) {
  const JointMask all = JointMask::all(x.joints());
  return replacement_attack(x, label, donor, replace, oracle, topo, &cfg, &all);
}

AttackReport targeted_replace(const Tensor3& x, int target_class, const std::vector<Tensor3>& donors,
                              const JointMask& replace, Oracle& oracle, const Topology& topo,
                              const AttackConfig& cfg, ReplaceStrategy strategy) {
  if (donors.empty()) throw Error("targeted_replace: empty donor set");
  AttackReport total;
  total.failure = "budget";
  long remaining = cfg.query_limit;
  for (const Tensor3& donor : donors) {
    SpliceResult sp = splice(x, donor, replace, topo);
    ++total.verification_queries;
    const int y = oracle.query(sp.motion);
    if (y == target_class) {
      total.donor_queries.push_back(0);
      total.success = true;
      total.failure.clear();
      total.final_label = y;
      total.first_adversarial_queries = total.queries;
      total.radius = total.linf_raw = total.linf_final = 0.0;
      total.start = sp.motion;
      total.adversarial = std::move(sp.motion);
      return total;
    }
    if (strategy == ReplaceStrategy::NR || remaining < 2) {
      total.donor_queries.push_back(0);
      continue;
    }
    AttackConfig sub = cfg;
    sub.query_limit = remaining;
    sub.mask = strategy == ReplaceStrategy::NRL ? replace : JointMask::all(x.joints());
    Tensor3 anchor = donor;
    if (donor.frames() == 1) {
      anchor = Tensor3(x.shape());
      for (int t = 0; t < x.frames(); ++t) std::copy(donor.frame(0).begin(), donor.frame(0).end(), anchor.frame(t).begin());
    }
    AttackReport r;
    const long before = oracle.count();
    try {
      r = attack_targeted(sp.motion, target_class, anchor, oracle, topo, sub);
    } catch (const Error&) {
      // Donor not classified as the target: its anchor query is spent, move on.
      const long spent = oracle.count() - before;
      total.donor_queries.push_back(spent);
      total.queries += spent;
      remaining -= spent;
      continue;
    }
    total.donor_queries.push_back(r.queries);
    total.queries += r.queries;
    remaining -= r.queries;
    if (r.success) {
      const long q = total.queries;
      const long v = total.verification_queries;
      auto dq = std::move(total.donor_queries);
      const long offset = q - r.queries;
      total = std::move(r);
      if (total.first_adversarial_queries >= 0) total.first_adversarial_queries += offset;
      total.queries = q;
      total.verification_queries = v;
      total.donor_queries = std::move(dq);
      total.start = std::move(sp.motion);
      return total;
    }
  }
  if (strategy == ReplaceStrategy::NR) total.failure = "not-adversarial";
  return total;
}

}  // namespace skeladv
