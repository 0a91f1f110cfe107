// skel-adv: command-line front end of the toolkit.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "skeladv/defense.hpp"
#include "skeladv/harness.hpp"
#include "skeladv/isaac_n.hpp"
#include "skeladv/keyjoint.hpp"
#include "skeladv/synth.hpp"
#include "skeladv/textio.hpp"

namespace fs = std::filesystem;
using namespace skeladv;

namespace {

const Topology& topology_for(const std::string& name, const std::string& file, std::optional<Topology>& storage) {
  if (!file.empty()) {
    storage = load_topology(file);
    return *storage;
  }
  return builtin_topology(name);
}

std::optional<std::uint64_t> opt_seed(const CLI::Option* opt, std::uint64_t value) {
  return opt->count() > 0 ? std::optional<std::uint64_t>(value) : std::nullopt;
}

NetConfig parse_arch(const std::string& arch, const Topology& topo, int classes) {
  NetConfig cfg = default_net_config(topo, classes);
  if (arch.empty() || arch == "default") return cfg;
  if (fs::exists(arch)) {
    const auto doc = nlohmann::json::parse(read_file(arch));
    cfg.channels = doc.value("channels", cfg.channels);
    cfg.center_joint = doc.value("center_joint", cfg.center_joint);
    return cfg;
  }
  cfg.channels.clear();
  std::stringstream ss(arch);
  std::string item;
  while (std::getline(ss, item, ',')) cfg.channels.push_back(std::stoi(item));
  if (cfg.channels.empty()) throw Error("empty --arch channel list");
  return cfg;
}

void print_history(const std::vector<EpochStats>& history) {
  for (const auto& e : history) {
    std::printf("epoch %3d  loss %.4f  train %.3f  test %.3f", e.epoch, e.loss, e.train_accuracy, e.test_accuracy);
    if (e.robust_accuracy >= 0.0) std::printf("  robust %.3f", e.robust_accuracy);
    std::printf("\n");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hard-label black-box attacks and defenses for skeleton action recognition"};
  app.require_subcommand(1);

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic labeled motion dataset");
  std::string gen_classes = "default", gen_out, gen_topo = "ntu25";
  int gen_per_class = 100, gen_frames = 20;
  std::uint64_t gen_seed = 0;
  gen->add_option("--classes", gen_classes, "Class spec file, or 'default' / 'toy'");
  gen->add_option("--per-class", gen_per_class, "Samples per class");
  gen->add_option("--frames", gen_frames, "Frames per motion");
  auto* gen_seed_opt = gen->add_option("--seed", gen_seed, "Generator seed (default: SKEL_ADV_SEED or 0)");
  gen->add_option("--topology", gen_topo, "Built-in topology name");
  gen->add_option("--out", gen_out, "Output directory")->required();

  // train
  auto* tr = app.add_subcommand("train", "Train a graph-convolution classifier");
  std::string tr_data, tr_arch = "default", tr_out;
  TrainConfig tr_cfg;
  std::uint64_t tr_seed = 1;
  tr->add_option("--data", tr_data, "Dataset directory")->required();
  tr->add_option("--arch", tr_arch, "'default', a channel list like 16,32, or an architecture file");
  auto* tr_seed_opt = tr->add_option("--seed", tr_seed, "Initialization and shuffling seed");
  tr->add_option("--epochs", tr_cfg.epochs, "Training epochs");
  tr->add_option("--lr", tr_cfg.learning_rate, "Learning rate");
  tr->add_option("--batch", tr_cfg.batch_size, "Mini-batch size");
  tr->add_option("--out", tr_out, "Checkpoint path")->required();

  // keyjoints
  auto* kj = app.add_subcommand("keyjoints", "Extract key joints of a motion with Grad-CAM");
  std::string kj_model, kj_motion, kj_out;
  int kj_nk = 18, kj_layer = -1;
  kj->add_option("--model", kj_model, "Surrogate checkpoint")->required();
  kj->add_option("--motion", kj_motion, "Motion file")->required();
  kj->add_option("--nk", kj_nk, "Number of key joints");
  kj->add_option("--layer", kj_layer, "Conv layer (-1: last)");
  kj->add_option("--out", kj_out, "Mask file")->required();

  // attack
  auto* at = app.add_subcommand("attack", "Run an attack campaign");
  CampaignConfig cc;
  std::uint64_t at_seed = 0;
  std::string at_save;
  at->add_option("--method", cc.method, "isaac-k | isaac-k-all | random-mask | isaac-nr | isaac-nrl | isaac-nra");
  at->add_option("--victim", cc.victim, "Victim checkpoint or http://host:port")->required();
  at->add_option("--surrogate", cc.surrogate, "Surrogate checkpoint (isaac-k)");
  at->add_option("--data", cc.data, "Dataset directory")->required();
  at->add_option("--samples", cc.samples, "Number of test motions to draw");
  auto* at_seed_opt = at->add_option("--seed", at_seed, "Campaign seed (default: SKEL_ADV_SEED or 0)");
  at->add_option("--nk", cc.nk, "Key joints per motion");
  at->add_option("--eps", cc.epsilon, "l-infinity success radius");
  at->add_option("--eps-b", cc.epsilon_b, "Bone-length tolerance");
  at->add_option("--alpha", cc.alpha, "Temporal decay constant");
  at->add_option("--budget", cc.budget, "Query budget per sample");
  at->add_option("--tolerance", cc.tolerance, "Bisection tolerance");
  at->add_flag("--targeted", cc.targeted, "Targeted attack");
  at->add_option("--target-class", cc.target_class, "Target class");
  at->add_option("--target-motion", cc.target_motion, "Target anchor motion (default: test motions of the class)");
  at->add_option("--target-init", cc.target_init, "target-sign | ones");
  at->add_option("--donors", cc.donors, "Donors tried per sample by targeted replacement");
  at->add_option("--template", cc.posture, "sit | crouch | kneel | half-kneel | template file");
  at->add_option("--region", cc.region, "lower-body or comma-separated region tags");
  at->add_option("--save-adv", at_save, "Directory for adversarial motion files");
  at->add_option("--out", cc.out, "Report path")->required();

  // defend
  auto* df = app.add_subcommand("defend", "Adversarially fine-tune a model");
  std::string df_variant = "k", df_model, df_data, df_out;
  ATVariantConfig df_cfg;
  df_cfg.epsilon = 0.05;
  TrainConfig df_train;
  df_train.epochs = 10;
  df_train.learning_rate = 0.005;
  std::uint64_t df_seed = 0;
  df->add_option("--variant", df_variant, "k | nr | nrl | nra");
  df->add_option("--model", df_model, "Input checkpoint")->required();
  df->add_option("--data", df_data, "Dataset directory")->required();
  df->add_option("--epochs", df_train.epochs, "Fine-tuning epochs");
  df->add_option("--lr", df_train.learning_rate, "Learning rate");
  auto* df_seed_opt = df->add_option("--seed", df_seed, "Training seed (default: SKEL_ADV_SEED or 0)");
  df->add_option("--eps", df_cfg.epsilon, "Inner-maximization radius");
  df->add_option("--steps", df_cfg.inner_steps, "PGD steps");
  df->add_option("--nk", df_cfg.nk, "Key joints (variant k)");
  df->add_option("--out", df_out, "Hardened checkpoint")->required();

  // report
  auto* rp = app.add_subcommand("report", "Print a campaign report");
  std::string rp_in, rp_format = "table";
  rp->add_option("--in", rp_in, "Report file")->required();
  rp->add_option("--format", rp_format, "table | csv");

  // serve
  auto* sv = app.add_subcommand("serve", "Serve a victim over HTTP (hard labels only)");
  std::string sv_model, sv_host = "127.0.0.1";
  int sv_port = 8080;
  long sv_limit = 0;
  sv->add_option("--model", sv_model, "Victim checkpoint")->required();
  sv->add_option("--host", sv_host, "Bind address");
  sv->add_option("--port", sv_port, "Port");
  sv->add_option("--limit", sv_limit, "Per-session query limit (0: none)");

  // export-anim
  auto* ea = app.add_subcommand("export-anim", "Render original and adversarial motions frame by frame");
  std::string ea_orig, ea_adv, ea_out, ea_topo_file;
  ea->add_option("--original", ea_orig, "Original motion file")->required();
  ea->add_option("--adversarial", ea_adv, "Adversarial motion file")->required();
  ea->add_option("--topology-file", ea_topo_file, "Topology file (default: built-in by name)");
  ea->add_option("--out", ea_out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    std::optional<Topology> topo_storage;
    if (gen->parsed()) {
      const Topology& topo = builtin_topology(gen_topo);
      std::vector<MotionClassSpec> specs;
      if (gen_classes == "default") {
        specs = default_class_specs();
      } else if (gen_classes == "toy") {
        specs = toy_class_specs();
      } else {
        specs = load_class_specs(gen_classes);
      }
      const auto seed = resolve_seed(opt_seed(gen_seed_opt, gen_seed));
      const Dataset data = generate_dataset(specs, gen_per_class, gen_frames, topo, seed);
      save_dataset(data, gen_out);
      std::printf("wrote %zu motions (%zu train, %zu test) to %s\n", data.motions.size(), data.train.size(),
                  data.test.size(), gen_out.c_str());
    } else if (tr->parsed()) {
      const Dataset data = load_dataset(tr_data);
      const Topology& topo = builtin_topology(data.topology);
      tr_cfg.seed = resolve_seed(opt_seed(tr_seed_opt, tr_seed), 1);
      GraphConvClassifier model(parse_arch(tr_arch, topo, static_cast<int>(data.class_names.size())), topo,
                                tr_cfg.seed);
      print_history(train(model, data, tr_cfg));
      save_checkpoint(model, tr_out);
    } else if (kj->parsed()) {
      const GraphConvClassifier model = load_checkpoint(kj_model);
      const Motion motion = load_motion(kj_motion);
      const int cls = predict(model, motion.coords());
      const auto per_frame = top_joints_per_frame(gradcam_scores(model, motion.coords(), cls, kj_layer), kj_nk);
      const JointMask mask = aggregate_key_joints(per_frame, motion.joints(), kj_nk);
      save_mask(mask, kj_out);
      const auto sim = key_joint_similarity(per_frame, motion.joints(), kj_nk);
      std::printf("class %d, %d key joints; frame-pair similarity %.4f, frame-to-aggregate %.4f\n", cls, mask.count(),
                  sim.frame_pairs, sim.frame_to_aggregate);
    } else if (at->parsed()) {
      cc.seed = resolve_seed(opt_seed(at_seed_opt, at_seed));
      const Dataset data = load_dataset(cc.data);
      const Topology& topo = builtin_topology(data.topology);
      std::optional<GraphConvClassifier> victim;
      std::optional<GraphConvClassifier> surrogate;
      CampaignInputs in;
      in.topology = &topo;
      in.pool = data.test_motions();
      const bool remote = cc.victim.rfind("http://", 0) == 0;
      if (remote) {
        const std::string url = cc.victim;
        const std::string name = topo.name();
        const auto seed = cc.seed;
        in.make_oracle = [url, name, seed](int s) {
          return std::make_unique<RemoteOracle>(url, name, "c" + std::to_string(seed) + "-s" + std::to_string(s));
        };
      } else {
        victim = load_checkpoint(cc.victim);
        in.make_oracle = [&victim](int) { return std::make_unique<ModelOracle>(*victim); };
      }
      if (!cc.surrogate.empty()) {
        surrogate = load_checkpoint(cc.surrogate);
        in.surrogate = &*surrogate;
      }
      if (cc.targeted) {
        if (!cc.target_motion.empty()) in.target_motion = load_motion(cc.target_motion, topo);
        for (const auto& m : data.test_motions()) {
          if (m.label() == cc.target_class) in.target_pool.push_back(m);
        }
      }
      const CampaignResult result = run_campaign(cc, in);
      write_report(result, cc.out);
      if (!at_save.empty()) {
        fs::create_directories(at_save);
        for (const auto& s : result.samples) {
          if (!s.adversarial) continue;
          save_motion(Motion(*s.adversarial, topo.name(), s.final_label),
                      fs::path(at_save) / ("adv_" + std::to_string(s.record.sample) + ".skel"));
        }
      }
      std::printf("ASR %.4f  AQ %.2f  (%d attempted, %d skipped)\n", result.stats.asr, result.stats.aq,
                  result.stats.attempted, result.stats.skipped);
    } else if (df->parsed()) {
      GraphConvClassifier model = load_checkpoint(df_model);
      const Dataset data = load_dataset(df_data);
      const Topology& topo = builtin_topology(data.topology);
      df_cfg.variant = parse_at_variant(df_variant);
      df_cfg.pool = default_replacement_pool();
      df_train.seed = resolve_seed(opt_seed(df_seed_opt, df_seed));
      const ATResult r = at_train(model, data, df_cfg, df_train, topo);
      print_history(r.history);
      std::printf("mean perturbed dimensions k_x %.1f\n", r.mean_perturbed_dims);
      save_checkpoint(model, df_out);
    } else if (rp->parsed()) {
      std::cout << format_report(load_report(rp_in), rp_format);
    } else if (sv->parsed()) {
      GraphConvClassifier model = load_checkpoint(sv_model);
      const Topology& topo = builtin_topology(model.config().topology);
      VictimServer server(std::move(model), topo, sv_limit);
      std::printf("serving on http://%s:%d\n", sv_host.c_str(), sv_port);
      std::fflush(stdout);
      server.listen(sv_host, sv_port);
    } else if (ea->parsed()) {
      const Motion a = load_motion(ea_orig);
      const Motion b = load_motion(ea_adv);
      const Topology& topo = topology_for(a.topology(), ea_topo_file, topo_storage);
      const int n = export_animation(a.coords(), b.coords(), topo, ea_out);
      std::printf("wrote %d frames to %s\n", n, ea_out.c_str());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "skel-adv: %s\n", e.what());
    return 1;
  }
  return 0;
}
