#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <httplib.h>

#include <cstdlib>
#include <filesystem>

#include "oracles.hpp"
#include "skeladv/harness.hpp"

using namespace skeladv;
namespace fs = std::filesystem;

namespace {

const Topology& topo() { return ntu25_topology(); }

struct Fixture {
  Dataset data;
  GraphConvClassifier victim;
  GraphConvClassifier surrogate;
};

GraphConvClassifier trained(const Dataset& d, std::uint64_t seed) {
  NetConfig cfg = default_net_config(topo(), 5);
  cfg.channels = {8, 16};
  GraphConvClassifier m(cfg, topo(), seed);
  TrainConfig tc;
  tc.epochs = 12;
  tc.seed = seed;
  train(m, d, tc);
  return m;
}

const Fixture& fixture() {
  static const Fixture f = [] {
    Dataset d = generate_dataset(default_class_specs(), 20, 10, topo(), 5);
    GraphConvClassifier v = trained(d, 1);
    GraphConvClassifier s = trained(d, 2);
    return Fixture{std::move(d), std::move(v), std::move(s)};
  }();
  return f;
}

CampaignInputs local_inputs() {
  CampaignInputs in;
  in.topology = &topo();
  in.pool = fixture().data.test_motions();
  in.surrogate = &fixture().surrogate;
  in.make_oracle = [](int) { return std::make_unique<ModelOracle>(fixture().victim); };
  return in;
}

CampaignConfig small_config(const std::string& method) {
  CampaignConfig c;
  c.method = method;
  c.samples = 8;
  c.seed = 4;
  c.budget = 300;
  return c;
}

}  // namespace

TEST_CASE("campaign configs round-trip through JSON") {
  CampaignConfig c = small_config("isaac-nrl");
  c.targeted = true;
  c.target_class = 2;
  c.epsilon = 0.123456789012345;
  const CampaignConfig back = campaign_config_from_json(campaign_config_to_json(c));
  CHECK(campaign_config_to_json(back) == campaign_config_to_json(c));
  CHECK(back.epsilon == c.epsilon);
  CHECK_THROWS_AS(campaign_config_from_json("[1"), FormatError);
}

TEST_CASE("reports are byte-identical across runs and oracle deltas match the reported counts") {
  for (const std::string method : {"isaac-k", "isaac-k-all", "random-mask", "isaac-nr", "isaac-nrl", "isaac-nra"}) {
    const CampaignResult a = run_campaign(small_config(method), local_inputs());
    const CampaignResult b = run_campaign(small_config(method), local_inputs());
    CHECK(report_to_json(a) == report_to_json(b));
    REQUIRE(a.samples.size() == 8);
    for (const auto& s : a.samples) {
      if (s.record.skipped) continue;
      CHECK(s.oracle_delta == s.record.queries + s.record.verification_queries);
      CHECK(s.record.queries <= 300);
      if (method == "isaac-nr") {
        CHECK(s.record.queries == 0);
        CHECK(s.record.verification_queries == 1);
      }
    }
  }
}

TEST_CASE("reports round-trip through files and render as table or CSV") {
  const CampaignResult r = run_campaign(small_config("isaac-k"), local_inputs());
  const fs::path p = fs::temp_directory_path() / "skeladv_test_report.json";
  write_report(r, p);
  const LoadedReport back = load_report(p);
  REQUIRE(back.records.size() == r.samples.size());
  CHECK(back.stats.asr == r.stats.asr);
  CHECK(back.stats.aq == r.stats.aq);
  CHECK(back.budget == 300);
  const std::string csv = format_report(back, "csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') >= 9);
  CHECK(format_report(back, "table").find("ASR") != std::string::npos);
  CHECK_THROWS_AS(format_report(back, "xml"), Error);
}

TEST_CASE("misclassified and already-target samples are skipped") {
  CampaignInputs in = local_inputs();
  // A victim that always answers class 0 misclassifies every other class.
  in.make_oracle = [](int) { return std::make_unique<FunctionOracle>([](const Tensor3&) { return 0; }); };
  CampaignConfig c = small_config("isaac-k-all");
  c.samples = 20;
  const CampaignResult r = run_campaign(c, in);
  for (const auto& s : r.samples) {
    if (s.record.label != 0) {
      CHECK(s.record.skipped);
      CHECK(s.failure == "misclassified");
    } else {
      CHECK(!s.record.skipped);
    }
  }

  CampaignInputs t = local_inputs();
  int created = 0;
  t.make_oracle = [&](int) {
#pragma omp atomic
    ++created;
    return std::make_unique<ModelOracle>(fixture().victim);
  };
  for (const auto& m : fixture().data.test_motions())
    if (m.label() == 3 && predict(fixture().victim, m.coords()) == 3) t.target_pool.push_back(m);
  REQUIRE(!t.target_pool.empty());
  CampaignConfig tc = small_config("isaac-nr");
  tc.samples = 20;
  tc.targeted = true;
  tc.target_class = 3;
  const CampaignResult tr = run_campaign(tc, t);
  int already = 0;
  for (const auto& s : tr.samples) {
    if (s.record.label == 3) {
      CHECK(s.failure == "already-target");
      ++already;
    }
  }
  CHECK(already > 0);
  CHECK(created == 20 - already);
}

TEST_CASE("victim server counts every request and enforces its limit") {
  VictimServer server(fixture().victim, topo(), 3);
  const int port = server.start("127.0.0.1", 0);
  const std::string url = "http://127.0.0.1:" + std::to_string(port);
  const Tensor3& x = fixture().data.motions[0].coords();
  RemoteOracle remote(url, "ntu25", "s1");
  for (int i = 0; i < 3; ++i) CHECK(remote.query(x) == predict(fixture().victim, x));
  CHECK_THROWS_WITH_AS(remote.query(x), doctest::Contains("limit"), Error);
  CHECK(server.session_count("s1") == 4);
  CHECK(remote.server_count() == 4);

  httplib::Client client("127.0.0.1", port);
  const auto bad = client.Post("/classify", httplib::Headers{{"X-Session", "s2"}}, "{not json", "application/json");
  REQUIRE(bad);
  CHECK(bad->status == 400);
  const auto wrong = client.Post("/classify", httplib::Headers{{"X-Session", "s2"}},
                                 motion_to_json(Motion(Tensor3(Shape{3, 5, 3}, 0.5), "toy5")), "application/json");
  REQUIRE(wrong);
  CHECK(wrong->status == 400);
  CHECK(server.session_count("s2") == 2);
  CHECK(server.total_count() == 6);
  const auto stats = client.Get("/stats?session=s1");
  REQUIRE(stats);
  const auto doc = nlohmann::json::parse(stats->body);
  CHECK(doc.at("total").get<long>() == 6);
  CHECK(doc.at("queries").get<long>() == 4);
  server.stop();
}

TEST_CASE("remote and in-process victims give identical campaigns") {
  VictimServer server(fixture().victim, topo());
  const int port = server.start("127.0.0.1", 0);
  const std::string url = "http://127.0.0.1:" + std::to_string(port);
  CampaignInputs remote = local_inputs();
  remote.make_oracle = [&](int s) { return std::make_unique<RemoteOracle>(url, "ntu25", "t-" + std::to_string(s)); };
  const CampaignConfig c = small_config("isaac-k");
  const CampaignResult a = run_campaign(c, local_inputs());
  const CampaignResult b = run_campaign(c, remote);
  CHECK(report_to_json(a) == report_to_json(b));
  long total = 0;
  for (std::size_t s = 0; s < b.samples.size(); ++s) {
    const long session = server.session_count("t-" + std::to_string(s));
    // One clean-label check precedes the attack in every session.
    CHECK(session == b.samples[s].oracle_delta + 1);
    total += session;
  }
  CHECK(server.total_count() == total);
  server.stop();
}

TEST_CASE("animation export writes one frame file per frame and a lossless CSV") {
  const Tensor3& x = fixture().data.motions[3].coords();
  Tensor3 y = x;
  for (double& v : y.values()) v = std::clamp(v + 0.01, 0.0, 1.0);
  const fs::path dir = fs::temp_directory_path() / "skeladv_test_anim";
  fs::remove_all(dir);
  CHECK(export_animation(x, y, topo(), dir) == x.frames());
  int svgs = 0;
  for (const auto& e : fs::directory_iterator(dir)) svgs += e.path().extension() == ".svg" ? 1 : 0;
  CHECK(svgs == x.frames());
  CHECK(fs::exists(dir / "frame_0000.svg"));
  const auto [a, b] = load_animation_csv(dir / "coords.csv");
  CHECK(a == x);
  CHECK(b == y);
}

TEST_CASE("seed resolution prefers the explicit value, then the environment") {
  ::unsetenv("SKEL_ADV_SEED");
  CHECK(resolve_seed(std::nullopt, 7) == 7);
  ::setenv("SKEL_ADV_SEED", "1234", 1);
  CHECK(resolve_seed(std::nullopt, 7) == 1234);
  CHECK(resolve_seed(99, 7) == 99);
  ::setenv("SKEL_ADV_SEED", "abc", 1);
  CHECK_THROWS_AS(resolve_seed(std::nullopt, 7), Error);
  ::unsetenv("SKEL_ADV_SEED");
}
