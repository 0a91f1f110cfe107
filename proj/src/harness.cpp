#include "skeladv/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>

#include "skeladv/isaac_n.hpp"
#include "skeladv/keyjoint.hpp"
#include "skeladv/synth.hpp"
#include "skeladv/textio.hpp"

namespace skeladv {

namespace {

nlohmann::json config_json(const CampaignConfig& c) {
  return {{"method", c.method},         {"victim", c.victim},
          {"surrogate", c.surrogate},   {"data", c.data},
          {"samples", c.samples},       {"seed", c.seed},
          {"nk", c.nk},                 {"epsilon", c.epsilon},
          {"epsilon_b", c.epsilon_b},   {"alpha", c.alpha},
          {"budget", c.budget},         {"tolerance", c.tolerance},
          {"targeted", c.targeted},     {"target_class", c.target_class},
          {"target_motion", c.target_motion}, {"donors", c.donors},
          {"posture", c.posture},       {"region", c.region},
          {"target_init", c.target_init}, {"out", c.out}};
}

const std::vector<std::string> kMethods = {"isaac-k", "isaac-k-all", "random-mask", "isaac-nr", "isaac-nrl", "isaac-nra"};

bool is_replacement(const std::string& m) { return m == "isaac-nr" || m == "isaac-nrl" || m == "isaac-nra"; }

}  // namespace

std::string campaign_config_to_json(const CampaignConfig& cfg) { return dump_json17(config_json(cfg)); }

CampaignConfig campaign_config_from_json(const std::string& text) {
  CampaignConfig c;
  try {
    const auto j = nlohmann::json::parse(text);
    c.method = j.value("method", c.method);
    c.victim = j.value("victim", c.victim);
    c.surrogate = j.value("surrogate", c.surrogate);
    c.data = j.value("data", c.data);
    c.samples = j.value("samples", c.samples);
    c.seed = j.value("seed", c.seed);
    c.nk = j.value("nk", c.nk);
    c.epsilon = j.value("epsilon", c.epsilon);
    c.epsilon_b = j.value("epsilon_b", c.epsilon_b);
    c.alpha = j.value("alpha", c.alpha);
    c.budget = j.value("budget", c.budget);
    c.tolerance = j.value("tolerance", c.tolerance);
    c.targeted = j.value("targeted", c.targeted);
    c.target_class = j.value("target_class", c.target_class);
    c.target_motion = j.value("target_motion", c.target_motion);
    c.donors = j.value("donors", c.donors);
    c.posture = j.value("posture", c.posture);
    c.region = j.value("region", c.region);
    c.target_init = j.value("target_init", c.target_init);
    c.out = j.value("out", c.out);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("campaign config: " + std::string(e.what()));
  }
  return c;
}

CampaignResult run_campaign(const CampaignConfig& cfg, const CampaignInputs& in) {
  if (std::find(kMethods.begin(), kMethods.end(), cfg.method) == kMethods.end()) {
    throw Error("unknown attack method '" + cfg.method + "'");
  }
  if (in.topology == nullptr || !in.make_oracle) throw Error("campaign needs a topology and a victim");
  if (in.pool.empty()) throw Error("campaign sample pool is empty");
  if (cfg.method == "isaac-k" && in.surrogate == nullptr) throw Error("isaac-k needs a surrogate model");
  if (cfg.targeted && (cfg.target_class < 0)) throw Error("targeted campaign needs a target class");
  const Topology& topo = *in.topology;

  std::vector<int> order(in.pool.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(cfg.seed);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  order.resize(std::min<std::size_t>(order.size(), static_cast<std::size_t>(std::max(cfg.samples, 0))));

  AttackConfig base;
  base.epsilon = cfg.epsilon;
  base.query_limit = cfg.budget;
  base.tolerance = cfg.tolerance;
  base.constraints.epsilon_b = cfg.epsilon_b;
  base.constraints.alpha = cfg.alpha;

  std::optional<Tensor3> donor;
  JointMask replace;
  if (is_replacement(cfg.method)) {
    replace = region_mask(topo, parse_region_list(cfg.region));
    if (!cfg.targeted) donor = template_motion(resolve_template(cfg.posture), 1);
  }
  std::vector<Tensor3> target_donors;
  if (cfg.targeted) {
    if (in.target_motion) target_donors.push_back(in.target_motion->coords());
    for (const auto& m : in.target_pool) {
      if (static_cast<int>(target_donors.size()) >= std::max(cfg.donors, 1)) break;
      target_donors.push_back(m.coords());
    }
    if (target_donors.empty()) throw Error("targeted campaign needs a target motion or target-class donors");
  }
  const TargetInit init = cfg.target_init == "ones" ? TargetInit::Ones : TargetInit::TargetSign;

  CampaignResult result;
  result.config = cfg;
  result.samples.resize(order.size());
  std::vector<std::string> errors(order.size());

#pragma omp parallel for schedule(dynamic)
  for (std::size_t s = 0; s < order.size(); ++s) {
    try {
      const Motion& m = in.pool[order[s]];
      SampleResult& out = result.samples[s];
      out.record.sample = order[s];
      out.record.label = m.label().value_or(-1);
      const Tensor3& x = m.coords();
      if (cfg.targeted && out.record.label == cfg.target_class) {
        out.record.skipped = true;
        out.failure = "already-target";
        continue;
      }
      auto oracle = in.make_oracle(static_cast<int>(s));
      if (oracle->query(x) != out.record.label) {
        out.record.skipped = true;
        out.failure = "misclassified";
        continue;
      }
      const long before = oracle->count();
      AttackConfig ac = base;
      AttackReport rep;
      if (cfg.method == "isaac-k") {
        ac.mask = extract_key_joints(*in.surrogate, x, cfg.nk);
      } else if (cfg.method == "random-mask") {
        ac.mask = baseline_random_mask(x.joints(), cfg.nk, mix_seed(cfg.seed, static_cast<std::uint64_t>(order[s])));
      } else if (cfg.method == "isaac-k-all") {
        ac.mask = JointMask::all(x.joints());
      }
      if (is_replacement(cfg.method)) {
        if (cfg.targeted) {
          const ReplaceStrategy st = cfg.method == "isaac-nr"    ? ReplaceStrategy::NR
                                     : cfg.method == "isaac-nrl" ? ReplaceStrategy::NRL
                                                                 : ReplaceStrategy::NRA;
          rep = targeted_replace(x, cfg.target_class, target_donors, replace, *oracle, topo, ac, st);
        } else if (cfg.method == "isaac-nr") {
          rep = attack_nr(x, out.record.label, *donor, replace, *oracle, topo);
        } else if (cfg.method == "isaac-nrl") {
          rep = attack_nrl(x, out.record.label, *donor, replace, *oracle, topo, ac);
        } else {
          rep = attack_nra(x, out.record.label, *donor, replace, *oracle, topo, ac);
        }
        out.mask = (cfg.method == "isaac-nra" ? JointMask::all(x.joints()) : replace).indices();
      } else {
        out.mask = ac.mask.indices();
        rep = cfg.targeted ? attack_targeted(x, cfg.target_class, target_donors.front(), *oracle, topo, ac, init)
                           : hierarchical_search(x, out.record.label, *oracle, topo, ac);
      }
      out.oracle_delta = oracle->count() - before;
      out.record.success = rep.success;
      out.record.queries = rep.queries;
      out.record.verification_queries = rep.verification_queries;
      out.final_label = rep.final_label;
      out.first_adversarial_queries = rep.first_adversarial_queries;
      out.failure = rep.failure;
      if (rep.success && rep.adversarial) {
        const std::vector<MotionPair> pair{{x, *rep.adversarial}};
        out.record.linf = linf_distance(x.values(), rep.adversarial->values());
        out.record.l_c = l_c(pair, topo.root());
        out.record.delta_a = delta_a(pair);
        out.adversarial = rep.adversarial;
      }
    } catch (const std::exception& e) {
      errors[s] = e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw Error("campaign failed: " + e);
  }
  std::vector<SampleRecord> records;
  for (const auto& s : result.samples) records.push_back(s.record);
  result.stats = aggregate(records, cfg.budget);
  return result;
}

std::string report_to_json(const CampaignResult& result) {
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& s : result.samples) {
    const auto& r = s.record;
    samples.push_back({{"sample", r.sample},
                       {"label", r.label},
                       {"skipped", r.skipped},
                       {"success", r.success},
                       {"queries", r.queries},
                       {"verification_queries", r.verification_queries},
                       {"oracle_queries", s.oracle_delta},
                       {"first_adversarial_queries", s.first_adversarial_queries},
                       {"final_label", s.final_label},
                       {"linf", r.linf},
                       {"l_c", r.l_c},
                       {"delta_a", r.delta_a},
                       {"failure", s.failure},
                       {"mask", s.mask}});
  }
  const auto& st = result.stats;
  nlohmann::json doc{{"format_version", 1},
                     {"toolkit_version", kToolkitVersion},
                     {"seed", result.config.seed},
                     {"config", config_json(result.config)},
                     {"aggregates",
                      {{"attempted", st.attempted},
                       {"successes", st.successes},
                       {"skipped", st.skipped},
                       {"asr", st.asr},
                       {"aq", st.aq},
                       {"l_c", st.l_c},
                       {"delta_a", st.delta_a}}},
                     {"samples", samples}};
  return dump_json17(doc);
}

void write_report(const CampaignResult& result, const std::filesystem::path& path) {
  write_file_atomic(path, report_to_json(result));
}

LoadedReport load_report(const std::filesystem::path& path) {
  LoadedReport out;
  try {
    const auto doc = nlohmann::json::parse(read_file(path));
    out.config = doc.at("config");
    out.budget = out.config.at("budget").get<long>();
    for (const auto& s : doc.at("samples")) {
      SampleRecord r;
      r.sample = s.at("sample").get<int>();
      r.label = s.at("label").get<int>();
      r.skipped = s.at("skipped").get<bool>();
      r.success = s.at("success").get<bool>();
      r.queries = s.at("queries").get<long>();
      r.verification_queries = s.at("verification_queries").get<long>();
      r.linf = s.at("linf").get<double>();
      r.l_c = s.at("l_c").get<double>();
      r.delta_a = s.at("delta_a").get<double>();
      out.records.push_back(r);
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("report file: " + std::string(e.what()));
  }
  out.stats = aggregate(out.records, out.budget);
  return out;
}

std::string format_report(const LoadedReport& report, const std::string& format) {
  const auto& st = report.stats;
  std::ostringstream os;
  char buf[256];
  if (format == "csv") {
    os << "sample,label,skipped,success,queries,verification_queries,linf,l_c,delta_a\n";
    for (const auto& r : report.records) {
      os << r.sample << ',' << r.label << ',' << (r.skipped ? 1 : 0) << ',' << (r.success ? 1 : 0) << ','
         << r.queries << ',' << r.verification_queries << ',' << format_double(r.linf) << ','
         << format_double(r.l_c) << ',' << format_double(r.delta_a) << '\n';
    }
    os << "# asr," << format_double(st.asr) << ",aq," << format_double(st.aq) << ",l_c," << format_double(st.l_c)
       << ",delta_a," << format_double(st.delta_a) << '\n';
    return os.str();
  }
  if (format != "table") throw Error("unknown report format '" + format + "' (expected table or csv)");
  std::snprintf(buf, sizeof buf, "method %s  attempted %d  skipped %d\n",
                report.config.value("method", std::string("?")).c_str(), st.attempted, st.skipped);
  os << buf;
  std::snprintf(buf, sizeof buf, "ASR %.4f  AQ %.2f  l_c %.4f  delta_a %.6f\n\n", st.asr, st.aq, st.l_c, st.delta_a);
  os << buf;
  std::snprintf(buf, sizeof buf, "%7s %5s %7s %7s %7s %8s %10s %10s\n", "sample", "label", "status", "queries",
                "verify", "linf", "l_c", "delta_a");
  os << buf;
  for (const auto& r : report.records) {
    const char* status = r.skipped ? "skipped" : (r.success && r.queries <= report.budget ? "success" : "failure");
    std::snprintf(buf, sizeof buf, "%7d %5d %7s %7ld %7ld %8.4f %10.4f %10.6f\n", r.sample, r.label, status, r.queries,
                  r.verification_queries, r.linf, r.l_c, r.delta_a);
    os << buf;
  }
  return os.str();
}

namespace {

void svg_skeleton(std::ostream& os, const Tensor3& x, int t, const Topology& topo, const char* color,
                  const char* dash) {
  auto px = [](double v) { return 20.0 + 360.0 * v; };
  auto py = [](double v) { return 380.0 - 360.0 * v; };
  char buf[256];
  for (int j : topo.bone_joints()) {
    const int p = topo.parent(j);
    std::snprintf(buf, sizeof buf,
                  "  <line x1=\"%.3f\" y1=\"%.3f\" x2=\"%.3f\" y2=\"%.3f\" stroke=\"%s\" stroke-width=\"2\"%s/>\n",
                  px(x(t, p, 0)), py(x(t, p, 1)), px(x(t, j, 0)), py(x(t, j, 1)), color, dash);
    os << buf;
  }
  for (int j = 0; j < x.joints(); ++j) {
    std::snprintf(buf, sizeof buf, "  <circle cx=\"%.3f\" cy=\"%.3f\" r=\"2.5\" fill=\"%s\"/>\n", px(x(t, j, 0)),
                  py(x(t, j, 1)), color);
    os << buf;
  }
}

}  // namespace

int export_animation(const Tensor3& original, const Tensor3& adversarial, const Topology& topo,
                     const std::filesystem::path& out_dir) {
  if (original.shape() != adversarial.shape()) throw Error("export_animation: motions differ in shape");
  if (original.joints() != topo.joint_count()) throw Error("export_animation: topology mismatch");
  if (original.channels() < 2) throw Error("export_animation: need at least 2 coordinate dimensions");
  std::filesystem::create_directories(out_dir);
  for (int t = 0; t < original.frames(); ++t) {
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"400\" height=\"400\" viewBox=\"0 0 400 400\">\n";
    os << "  <rect width=\"400\" height=\"400\" fill=\"white\"/>\n";
    svg_skeleton(os, original, t, topo, "#1f4e9c", "");
    svg_skeleton(os, adversarial, t, topo, "#c0392b", " stroke-dasharray=\"4 3\"");
    os << "</svg>\n";
    char name[32];
    std::snprintf(name, sizeof name, "frame_%04d.svg", t);
    write_file_atomic(out_dir / name, os.str());
  }
  std::ostringstream csv;
  csv << "frame,joint,role";
  const char* axis[] = {"x", "y", "z"};
  for (int k = 0; k < original.channels(); ++k) csv << ',' << (k < 3 ? axis[k] : ("c" + std::to_string(k)).c_str());
  csv << '\n';
  for (int t = 0; t < original.frames(); ++t) {
    for (const auto* which : {&original, &adversarial}) {
      for (int j = 0; j < original.joints(); ++j) {
        csv << t << ',' << j << ',' << (which == &original ? "original" : "adversarial");
        for (int k = 0; k < original.channels(); ++k) csv << ',' << format_double((*which)(t, j, k));
        csv << '\n';
      }
    }
  }
  write_file_atomic(out_dir / "coords.csv", csv.str());
  return original.frames();
}

std::pair<Tensor3, Tensor3> load_animation_csv(const std::filesystem::path& csv_path) {
  std::istringstream in(read_file(csv_path));
  std::string line;
  if (!std::getline(in, line)) throw FormatError("animation csv: empty file");
  const int dims = static_cast<int>(std::count(line.begin(), line.end(), ',')) - 2;
  struct Row {
    int t, j;
    bool adv;
    std::vector<double> v;
  };
  std::vector<Row> rows;
  int frames = 0, joints = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    Row r;
    std::getline(ls, cell, ',');
    r.t = std::stoi(cell);
    std::getline(ls, cell, ',');
    r.j = std::stoi(cell);
    std::getline(ls, cell, ',');
    r.adv = cell == "adversarial";
    while (std::getline(ls, cell, ',')) r.v.push_back(std::stod(cell));
    if (static_cast<int>(r.v.size()) != dims) throw FormatError("animation csv: wrong column count");
    frames = std::max(frames, r.t + 1);
    joints = std::max(joints, r.j + 1);
    rows.push_back(std::move(r));
  }
  Tensor3 a(Shape{frames, joints, dims}), b(Shape{frames, joints, dims});
  for (const auto& r : rows) {
    for (int k = 0; k < dims; ++k) (r.adv ? b : a)(r.t, r.j, k) = r.v[k];
  }
  return {a, b};
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> explicit_seed, std::uint64_t fallback) {
  if (explicit_seed) return *explicit_seed;
  if (const char* env = std::getenv("SKEL_ADV_SEED"); env != nullptr && *env != '\0') {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw Error(std::string("SKEL_ADV_SEED is not an unsigned integer: '") + env + "'");
  }
  return fallback;
}

}  // namespace skeladv
