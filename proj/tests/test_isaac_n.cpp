#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "oracles.hpp"
#include "skeladv/isaac_n.hpp"

using namespace skeladv;
namespace fs = std::filesystem;

namespace {

const Topology& topo() { return ntu25_topology(); }

Tensor3 host_motion(std::uint64_t seed = 3) {
  return generate_dataset(default_class_specs(), 2, 8, topo(), seed).motions[0].coords();
}

double dist(const Tensor3& a, int t, int i, int j, int ta = -1) {
  double s = 0.0;
  for (int k = 0; k < a.channels(); ++k) s += std::pow(a(ta < 0 ? t : ta, i, k) - a(ta < 0 ? t : ta, j, k), 2);
  return std::sqrt(s);
}

const JointMask& legs() {
  static const JointMask m = region_mask(topo(), {Region::LeftLeg, Region::RightLeg});
  return m;
}

}  // namespace

TEST_CASE("region masks and attachments of the lower body") {
  CHECK(legs().indices() == std::vector<int>{12, 13, 14, 15, 16, 17, 18, 19});
  CHECK(replacement_attachments(legs(), topo()) == std::vector<int>{12, 16});
  CHECK(parse_region_list("lower-body") == std::vector<Region>{Region::LeftLeg, Region::RightLeg});
  CHECK(parse_region_list("head,spine") == std::vector<Region>{Region::Head, Region::Spine});
  CHECK_THROWS_AS(parse_region_list("tail"), Error);
}

TEST_CASE("replacement regions must be closed under children and exclude the root") {
  CHECK_THROWS_WITH_AS(replacement_attachments(JointMask::from_indices(25, {13}), topo()),
                       doctest::Contains("disconnected replacement region"), Error);
  CHECK_THROWS_WITH_AS(replacement_attachments(JointMask::from_indices(25, {12, 13, 15}), topo()),
                       doctest::Contains("disconnected replacement region"), Error);
  CHECK_THROWS_AS(replacement_attachments(JointMask::from_indices(25, {20}), topo()), Error);
  CHECK_THROWS_AS(replacement_attachments(JointMask::none(25), topo()), Error);
  CHECK(replacement_attachments(JointMask::from_indices(25, {14, 15}), topo()) == std::vector<int>{14});
}

TEST_CASE("splicing a motion into itself is the identity") {
  const Tensor3 x = host_motion();
  const SpliceResult r = splice(x, x, legs(), topo());
  for (std::size_t e = 0; e < x.size(); ++e) CHECK(r.motion.values()[e] == doctest::Approx(x.values()[e]).epsilon(1e-14));
  CHECK(r.record.scale == 1.0);
}

TEST_CASE("sit template splice keeps the host elsewhere and scales donor offsets") {
  const Tensor3 x = host_motion();
  const Tensor3 donor = template_motion(builtin_template("sit"), 1);
  const SpliceResult r = splice(x, donor, legs(), topo());
  REQUIRE(r.record.scale == 1.0);
  const Tensor3& y = r.motion;
  for (int t = 0; t < x.frames(); ++t) {
    for (int j = 0; j < 25; ++j) {
      if (legs()[j] && j != 12 && j != 16) continue;
      for (int k = 0; k < 3; ++k) CHECK(y(t, j, k) == x(t, j, k));
    }
    for (int a : {12, 16}) {
      const int p = topo().parent(a);
      const double s = dist(x, t, a, p) / dist(donor, 0, a, p, 0);
      for (int j : topo().subtree(a)) {
        for (int k = 0; k < 3; ++k)
          CHECK(y(t, j, k) - y(t, a, k) == doctest::Approx(s * (donor(0, j, k) - donor(0, a, k))).epsilon(1e-12));
      }
      // Knee sits well forward of the hip in the sitting pose.
      CHECK(y(t, a + 1, 2) - y(t, a, 2) > 0.1 * s);
    }
  }
}

TEST_CASE("splices leaving the box are refit into it") {
  Tensor3 x = host_motion();
  PostureTemplate tpl = builtin_template("sit");
  for (int j : {13, 14, 15}) tpl.joints[j][1] -= 3.0;  // very long left leg
  const SpliceResult r = splice(x, template_motion(tpl, 1), legs(), topo());
  CHECK(r.record.scale < 1.0);
  for (double v : r.motion.values()) CHECK((v >= 0.0 && v <= 1.0));
}

TEST_CASE("donor frame counts") {
  const Tensor3 x = host_motion();
  CHECK_NOTHROW(splice(x, template_motion(builtin_template("kneel"), x.frames()), legs(), topo()));
  CHECK_THROWS_AS(splice(x, template_motion(builtin_template("kneel"), 2), legs(), topo()), Error);
}

TEST_CASE("templates round-trip and the shipped files match the built-ins") {
  const fs::path p = fs::temp_directory_path() / "skeladv_test_tpl.json";
  for (const auto& name : kTemplateNames) {
    const PostureTemplate a = builtin_template(name);
    save_template(a, p);
    const PostureTemplate b = load_template(p);
    CHECK(b.joints == a.joints);
    CHECK(b.regions == a.regions);
    CHECK(b.attachments == a.attachments);
    const PostureTemplate shipped = load_template(fs::path(SKELADV_DATA_DIR) / "templates" / (name + ".json"));
    CHECK(shipped.joints == a.joints);
    CHECK(resolve_template(name).joints == a.joints);
  }
  CHECK_THROWS_AS(builtin_template("lie"), Error);
}

TEST_CASE("NR spends exactly one verification query") {
  const Tensor3 x = host_motion();
  const Tensor3 donor = template_motion(builtin_template("sit"), 1);
  FunctionOracle fooled([](const Tensor3&) { return 4; });
  const AttackReport a = attack_nr(x, 0, donor, legs(), fooled, topo());
  CHECK(a.success);
  CHECK(a.queries == 0);
  CHECK(a.verification_queries == 1);
  CHECK(fooled.count() == 1);
  CHECK(a.final_label == 4);

  FunctionOracle robust([](const Tensor3&) { return 0; });
  const AttackReport b = attack_nr(x, 0, donor, legs(), robust, topo());
  CHECK(!b.success);
  CHECK(b.failure == "not-adversarial");
  CHECK(b.queries + b.verification_queries == robust.count());
}

TEST_CASE("NRL with no search budget behaves like NR") {
  const Tensor3 x = host_motion();
  const Tensor3 donor = template_motion(builtin_template("crouch"), 1);
  AttackConfig cfg;
  cfg.query_limit = 0;
  FunctionOracle a([](const Tensor3&) { return 0; }), b([](const Tensor3&) { return 0; });
  const AttackReport nr = attack_nr(x, 0, donor, legs(), a, topo());
  const AttackReport nrl = attack_nrl(x, 0, donor, legs(), b, topo(), cfg);
  CHECK(nr.success == nrl.success);
  CHECK(nr.failure == nrl.failure);
  CHECK(nr.queries == nrl.queries);
  CHECK(nr.verification_queries == nrl.verification_queries);
  CHECK(a.count() == b.count());
}

TEST_CASE("NRL searches only the replaced joints while NRA may move any joint") {
  const Tensor3 x = host_motion();
  const Tensor3 donor = template_motion(builtin_template("sit"), 1);
  const Tensor3 start = splice(x, donor, legs(), topo()).motion;
  auto make = [&] {
    return FunctionOracle([&](const Tensor3& a) { return linf_distance(a.values(), start.values()) > 0.02 ? 1 : 0; });
  };
  AttackConfig cfg;
  FunctionOracle v1 = make();
  const AttackReport nrl = attack_nrl(x, 0, donor, legs(), v1, topo(), cfg);
  CHECK(nrl.success);
  CHECK(nrl.verification_queries == 1);
  CHECK(nrl.queries + nrl.verification_queries == v1.count());
  REQUIRE(nrl.adversarial.has_value());
  for (int t = 0; t < x.frames(); ++t)
    for (int j = 0; j < 25; ++j)
      if (!legs()[j])
        for (int k = 0; k < 3; ++k) CHECK((*nrl.adversarial)(t, j, k) == start(t, j, k));

  FunctionOracle v2 = make();
  const AttackReport nra = attack_nra(x, 0, donor, legs(), v2, topo(), cfg);
  CHECK(nra.success);
  CHECK(nra.queries + nra.verification_queries == v2.count());
  bool upper_moved = false;
  for (int t = 0; t < x.frames(); ++t)
    for (int k = 0; k < 3; ++k) upper_moved = upper_moved || (*nra.adversarial)(t, 11, k) != start(t, 11, k);
  CHECK(upper_moved);
}

TEST_CASE("targeted replacement shares the budget across donors") {
  const Tensor3 x = host_motion();
  std::vector<Tensor3> donors;
  for (const auto& n : kTemplateNames) donors.push_back(template_motion(builtin_template(n), 1));
  AttackConfig cfg;
  CHECK_THROWS_AS(targeted_replace(x, 1, {}, legs(), *std::make_unique<FunctionOracle>([](const Tensor3&) { return 0; }),
                                   topo(), cfg, ReplaceStrategy::NR),
                  Error);

  FunctionOracle none([](const Tensor3&) { return 0; });
  const AttackReport nr = targeted_replace(x, 1, donors, legs(), none, topo(), cfg, ReplaceStrategy::NR);
  CHECK(!nr.success);
  CHECK(nr.failure == "not-adversarial");
  CHECK(nr.verification_queries == 4);
  CHECK(nr.queries == 0);
  CHECK(none.count() == 4);

  // Donors are never classified as the target, so each anchor costs one search query.
  FunctionOracle v([](const Tensor3&) { return 0; });
  cfg.query_limit = 50;
  const AttackReport nrl = targeted_replace(x, 1, donors, legs(), v, topo(), cfg, ReplaceStrategy::NRL);
  CHECK(!nrl.success);
  CHECK(nrl.queries == 4);
  CHECK(nrl.verification_queries == 4);
  CHECK(nrl.queries + nrl.verification_queries == v.count());
  CHECK(nrl.queries <= cfg.query_limit);
}
