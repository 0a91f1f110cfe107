#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "skeladv/metrics.hpp"
#include "skeladv/net.hpp"
#include "skeladv/rays.hpp"

namespace skeladv {

inline constexpr const char* kToolkitVersion = "0.1.0";

/// Everything that determines a campaign; embedded verbatim in its report.
struct CampaignConfig {
  /// isaac-k, isaac-k-all, random-mask, isaac-nr, isaac-nrl, isaac-nra
  std::string method = "isaac-k";
  std::string victim;
  std::string surrogate;
  std::string data;
  int samples = 100;
  std::uint64_t seed = 0;
  int nk = 18;
  double epsilon = 0.4;
  double epsilon_b = 0.1;
  double alpha = 10.0;
  long budget = 2000;
  double tolerance = 1e-3;
  bool targeted = false;
  int target_class = -1;
  std::string target_motion;
  /// Targeted ISAAC-N: number of target-class donors tried per sample.
  int donors = 3;
  std::string posture = "sit";
  std::string region = "lower-body";
  /// Targeted ISAAC-K: start from sgn(x_t − x) ("target-sign") or all ones ("ones").
  std::string target_init = "target-sign";
  std::string out;
};

std::string campaign_config_to_json(const CampaignConfig& cfg);
CampaignConfig campaign_config_from_json(const std::string& text);

struct SampleResult {
  SampleRecord record;
  int final_label = -1;
  long first_adversarial_queries = -1;
  /// Counter delta of the sample's oracle session, excluding the clean-label check.
  long oracle_delta = 0;
  std::string failure;
  std::vector<int> mask;
  std::optional<Tensor3> adversarial;
};

struct CampaignResult {
  CampaignConfig config;
  std::vector<SampleResult> samples;
  CampaignStats stats;
};

using OracleFactory = std::function<std::unique_ptr<Oracle>(int sample)>;

struct CampaignInputs {
  const Topology* topology = nullptr;
  /// Candidate motions with labels, in pool order.
  std::vector<Motion> pool;
  OracleFactory make_oracle;
  const GraphConvClassifier* surrogate = nullptr;
  /// Target anchors / donors for targeted campaigns (already classified as the target).
  std::vector<Motion> target_pool;
  std::optional<Motion> target_motion;
};

/// Picks `samples` motions from the pool (seeded shuffle), skips motions the victim misclassifies,
/// and attacks the rest, in parallel over samples with one oracle session each.
CampaignResult run_campaign(const CampaignConfig& cfg, const CampaignInputs& in);

/// Report text: config, toolkit version, per-sample records and aggregates. Deterministic.
std::string report_to_json(const CampaignResult& result);
void write_report(const CampaignResult& result, const std::filesystem::path& path);

struct LoadedReport {
  nlohmann::json config;
  std::vector<SampleRecord> records;
  CampaignStats stats;
  long budget = 0;
};
LoadedReport load_report(const std::filesystem::path& path);
/// Aggregates plus per-sample rows as an aligned text table or CSV.
std::string format_report(const LoadedReport& report, const std::string& format);

/// Hard-label HTTP victim: POST /classify (motion file body, optional X-Session header) answers
/// {"label": y}; GET /stats reports per-session query counts.
class VictimServer {
 public:
  /// `query_limit` ≤ 0 disables the per-session limit.
  VictimServer(GraphConvClassifier model, const Topology& topo, long query_limit = 0);
  ~VictimServer();
  VictimServer(const VictimServer&) = delete;
  VictimServer& operator=(const VictimServer&) = delete;

  /// Binds and serves on a background thread; port 0 picks a free port. Returns the port.
  int start(const std::string& host, int port);
  /// Blocks serving on the calling thread.
  void listen(const std::string& host, int port);
  void stop();
  long session_count(const std::string& session) const;
  long total_count() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Oracle backed by a remote victim. Each instance is one session.
class RemoteOracle : public Oracle {
 public:
  RemoteOracle(const std::string& url, std::string topology, std::string session = "default");
  ~RemoteOracle() override;
  /// Server-side count for this session.
  long server_count();

 protected:
  int classify(const Tensor3& x) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Writes frame_0000.svg … (one per frame, both skeletons overlaid, x/y orthographic view)
/// and coords.csv (frame, joint, role, x, y, z). Returns the number of frame files.
int export_animation(const Tensor3& original, const Tensor3& adversarial, const Topology& topo,
                     const std::filesystem::path& out_dir);
/// Reads coords.csv back as (original, adversarial).
std::pair<Tensor3, Tensor3> load_animation_csv(const std::filesystem::path& csv_path);

/// Seed from an explicit value, else the SKEL_ADV_SEED environment variable, else `fallback`.
std::uint64_t resolve_seed(std::optional<std::uint64_t> explicit_seed, std::uint64_t fallback = 0);

}  // namespace skeladv
