#include "skeladv/synth.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <nlohmann/json.hpp>

#include "skeladv/textio.hpp"

namespace skeladv {

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = 0.0;
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

std::uint64_t Rng::below(std::uint64_t n) {
  // Rejection sampling keeps the draw unbiased and platform independent.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t v;
  do {
    v = engine_();
  } while (v >= limit);
  return v % n;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<Motion> Dataset::train_motions() const {
  std::vector<Motion> out;
  for (int i : train) out.push_back(motions[i]);
  return out;
}

std::vector<Motion> Dataset::test_motions() const {
  std::vector<Motion> out;
  for (int i : test) out.push_back(motions[i]);
  return out;
}

const std::vector<std::array<double, 3>>& ntu25_rest_pose() {
  static const std::vector<std::array<double, 3>> pose = {
      {0.0, 0.0, 0.0},       // 0 spine base
      {0.0, 0.25, 0.0},      // 1 spine mid
      {0.0, 0.58, 0.0},      // 2 neck
      {0.0, 0.72, 0.0},      // 3 head
      {-0.18, 0.48, 0.0},    // 4 left shoulder
      {-0.22, 0.22, 0.0},    // 5 left elbow
      {-0.24, -0.02, 0.0},   // 6 left wrist
      {-0.25, -0.08, 0.0},   // 7 left hand
      {0.18, 0.48, 0.0},     // 8 right shoulder
      {0.22, 0.22, 0.0},     // 9 right elbow
      {0.24, -0.02, 0.0},    // 10 right wrist
      {0.25, -0.08, 0.0},    // 11 right hand
      {-0.10, -0.02, 0.0},   // 12 left hip
      {-0.11, -0.45, 0.0},   // 13 left knee
      {-0.12, -0.85, 0.0},   // 14 left ankle
      {-0.12, -0.88, 0.10},  // 15 left foot
      {0.10, -0.02, 0.0},    // 16 right hip
      {0.11, -0.45, 0.0},    // 17 right knee
      {0.12, -0.85, 0.0},    // 18 right ankle
      {0.12, -0.88, 0.10},   // 19 right foot
      {0.0, 0.50, 0.0},      // 20 spine shoulder (root)
      {-0.26, -0.14, 0.0},   // 21 left hand tip
      {-0.22, -0.10, 0.03},  // 22 left thumb
      {0.26, -0.14, 0.0},    // 23 right hand tip
      {0.22, -0.10, 0.03},   // 24 right thumb
  };
  return pose;
}

const std::vector<std::array<double, 3>>& toy5_rest_pose() {
  static const std::vector<std::array<double, 3>> pose = {
      {0.0, 0.0, 0.0}, {0.0, 0.5, 0.0}, {0.0, 0.75, 0.0}, {0.3, 0.2, 0.0}, {0.0, -0.8, 0.0}};
  return pose;
}

namespace {

JointTrajectory traj(int joint, std::vector<double> offset, std::vector<double> amplitude, double freq,
                     double phase = 0.0) {
  return JointTrajectory{joint, std::move(offset), std::move(amplitude), freq, phase};
}

const std::vector<std::array<double, 3>>& rest_pose_for(const Topology& topo) {
  if (topo.name() == "ntu25") return ntu25_rest_pose();
  if (topo.name() == "toy5") return toy5_rest_pose();
  throw Error("no rest pose for topology '" + topo.name() + "'");
}

}  // namespace

std::vector<MotionClassSpec> default_class_specs() {
  constexpr double kNoise = 0.02;
  constexpr double kPi = std::numbers::pi;
  std::vector<MotionClassSpec> specs;

  specs.push_back({0, "raise-arm",
                   {traj(9, {0.02, 0.52, 0.0}, {0.0, 0.04, 0.0}, 1.0), traj(10, {0.01, 1.00, 0.0}, {0.0, 0.06, 0.0}, 1.0),
                    traj(11, {0.0, 1.12, 0.0}, {0.0, 0.07, 0.0}, 1.0), traj(23, {0.0, 1.24, 0.0}, {0.0, 0.08, 0.0}, 1.0),
                    traj(24, {-0.01, 1.16, 0.0}, {0.0, 0.07, 0.0}, 1.0)},
                   kNoise});

  specs.push_back({1, "wave",
                   {traj(9, {0.15, 0.10, 0.0}, {0.03, 0.0, 0.0}, 3.0), traj(10, {0.16, 0.64, 0.0}, {0.12, 0.0, 0.0}, 3.0),
                    traj(11, {0.16, 0.78, 0.0}, {0.15, 0.0, 0.0}, 3.0), traj(23, {0.16, 0.92, 0.0}, {0.17, 0.0, 0.0}, 3.0),
                    traj(24, {0.14, 0.86, 0.0}, {0.15, 0.0, 0.0}, 3.0)},
                   kNoise});

  specs.push_back({2, "clap",
                   {traj(5, {0.05, 0.05, 0.15}, {-0.02, 0.0, 0.0}, 4.0), traj(6, {0.19, 0.32, 0.35}, {-0.06, 0.0, 0.0}, 4.0),
                    traj(7, {0.22, 0.38, 0.38}, {-0.06, 0.0, 0.0}, 4.0), traj(21, {0.24, 0.44, 0.42}, {-0.06, 0.0, 0.0}, 4.0),
                    traj(22, {0.20, 0.40, 0.38}, {-0.06, 0.0, 0.0}, 4.0), traj(9, {-0.05, 0.05, 0.15}, {0.02, 0.0, 0.0}, 4.0),
                    traj(10, {-0.19, 0.32, 0.35}, {0.06, 0.0, 0.0}, 4.0), traj(11, {-0.22, 0.38, 0.38}, {0.06, 0.0, 0.0}, 4.0),
                    traj(23, {-0.24, 0.44, 0.42}, {0.06, 0.0, 0.0}, 4.0), traj(24, {-0.20, 0.40, 0.38}, {0.06, 0.0, 0.0}, 4.0)},
                   kNoise});

  MotionClassSpec squat{3, "squat", {}, kNoise};
  for (int j : {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 16, 20, 21, 22, 23, 24}) {
    squat.joints.push_back(traj(j, {0.0, -0.30, -0.08}, {0.0, 0.05, 0.0}, 1.0, -kPi / 2));
  }
  squat.joints.push_back(traj(13, {0.0, -0.15, 0.25}, {0.0, 0.03, 0.03}, 1.0, -kPi / 2));
  squat.joints.push_back(traj(17, {0.0, -0.15, 0.25}, {0.0, 0.03, 0.03}, 1.0, -kPi / 2));
  specs.push_back(std::move(squat));

  specs.push_back({4, "kick",
                   {traj(17, {0.0, 0.15, 0.25}, {0.0, 0.05, 0.10}, 2.0), traj(18, {0.0, 0.35, 0.55}, {0.0, 0.10, 0.20}, 2.0),
                    traj(19, {0.0, 0.40, 0.60}, {0.0, 0.10, 0.20}, 2.0)},
                   kNoise});
  return specs;
}

std::vector<MotionClassSpec> toy_class_specs() {
  constexpr double kNoise = 0.02;
  return {
      {0, "hand-up", {traj(3, {0.0, 0.6, 0.0}, {0.0, 0.05, 0.0}, 1.0)}, kNoise},
      {1, "hand-wave", {traj(3, {0.0, 0.3, 0.0}, {0.2, 0.0, 0.0}, 3.0)}, kNoise},
      {2, "kick", {traj(4, {0.0, 0.3, 0.5}, {0.0, 0.05, 0.1}, 2.0)}, kNoise},
  };
}

Tensor3 class_trajectory(const MotionClassSpec& spec, int frames, const Topology& topo) {
  const auto& rest = rest_pose_for(topo);
  const int n = topo.joint_count();
  const int d = 3;
  Tensor3 raw(Shape{frames, n, d});
  for (int t = 0; t < frames; ++t) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < d; ++k) raw(t, j, k) = rest[j][k];
    }
    for (const auto& jt : spec.joints) {
      if (jt.joint < 0 || jt.joint >= n) throw Error("class '" + spec.name + "' references joint out of range");
      const double s = std::sin(2.0 * std::numbers::pi * jt.frequency * t / frames + jt.phase);
      for (int k = 0; k < d; ++k) {
        const double off = k < static_cast<int>(jt.offset.size()) ? jt.offset[k] : 0.0;
        const double amp = k < static_cast<int>(jt.amplitude.size()) ? jt.amplitude[k] : 0.0;
        raw(t, jt.joint, k) += off + amp * s;
      }
    }
  }
  return raw;
}

Dataset generate_dataset(const std::vector<MotionClassSpec>& specs, int n_per_class, int frames, const Topology& topo,
                         std::uint64_t seed) {
  if (specs.empty()) throw Error("generate_dataset: class spec list is empty");
  if (n_per_class < 2) throw Error("generate_dataset: need at least 2 samples per class");
  if (frames < 3) throw Error("generate_dataset: need at least 3 frames");
  for (const auto& s : specs) {
    if (s.noise_sigma < 0.0) throw Error("class '" + s.name + "' has negative noise_sigma");
  }
  Dataset data;
  data.topology = topo.name();
  data.frames = frames;
  data.seed = seed;
  for (const auto& s : specs) data.class_names.push_back(s.name);

  const int train_per_class = n_per_class / 2;
  for (std::size_t c = 0; c < specs.size(); ++c) {
    const Tensor3 base = class_trajectory(specs[c], frames, topo);
    for (int s = 0; s < n_per_class; ++s) {
      const int index = static_cast<int>(data.motions.size());
      Rng rng(mix_seed(seed, static_cast<std::uint64_t>(index)));
      Tensor3 raw = base;
      if (specs[c].noise_sigma > 0.0) {
        for (double& v : raw.values()) v += specs[c].noise_sigma * rng.normal();
      }
      data.motions.push_back(normalize(raw, topo.name(), specs[c].class_id).first);
      (s < train_per_class ? data.train : data.test).push_back(index);
    }
  }
  return data;
}

std::vector<MotionClassSpec> load_class_specs(const std::filesystem::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError("class spec file: malformed: " + std::string(e.what()));
  }
  if (!doc.contains("classes")) throw FormatError("class spec file: missing field 'classes'");
  std::vector<MotionClassSpec> specs;
  try {
    for (const auto& c : doc.at("classes")) {
      MotionClassSpec s;
      s.class_id = c.at("class_id").get<int>();
      s.name = c.at("name").get<std::string>();
      s.noise_sigma = c.at("noise_sigma").get<double>();
      for (const auto& j : c.at("joints")) {
        JointTrajectory jt;
        jt.joint = j.at("joint").get<int>();
        jt.offset = j.value("offset", std::vector<double>{});
        jt.amplitude = j.value("amplitude", std::vector<double>{});
        jt.frequency = j.value("frequency", 1.0);
        jt.phase = j.value("phase", 0.0);
        s.joints.push_back(std::move(jt));
      }
      specs.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("class spec file: " + std::string(e.what()));
  }
  return specs;
}

void save_class_specs(const std::vector<MotionClassSpec>& specs, const std::filesystem::path& path) {
  nlohmann::json classes = nlohmann::json::array();
  for (const auto& s : specs) {
    nlohmann::json joints = nlohmann::json::array();
    for (const auto& jt : s.joints) {
      joints.push_back({{"joint", jt.joint},
                        {"offset", jt.offset},
                        {"amplitude", jt.amplitude},
                        {"frequency", jt.frequency},
                        {"phase", jt.phase}});
    }
    classes.push_back({{"class_id", s.class_id}, {"name", s.name}, {"noise_sigma", s.noise_sigma}, {"joints", joints}});
  }
  write_file_atomic(path, dump_json17(nlohmann::json{{"classes", classes}}));
}

namespace {

std::string sample_file(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "sample_%05d.skel", index);
  return buf;
}

}  // namespace

void save_dataset(const Dataset& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json files = nlohmann::json::array();
  for (std::size_t i = 0; i < data.motions.size(); ++i) {
    const auto name = sample_file(static_cast<int>(i));
    save_motion(data.motions[i], dir / name);
    files.push_back(name);
  }
  nlohmann::json manifest{{"format_version", 1},    {"topology", data.topology}, {"frames", data.frames},
                          {"seed", data.seed},      {"rng", kRngAlgorithm},      {"classes", data.class_names},
                          {"files", files},         {"train", data.train},       {"test", data.test}};
  write_file_atomic(dir / "manifest.json", manifest.dump(1) + "\n");
}

Dataset load_dataset(const std::filesystem::path& dir) {
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(read_file(dir / "manifest.json"));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError("dataset manifest: malformed: " + std::string(e.what()));
  }
  Dataset data;
  try {
    data.topology = m.at("topology").get<std::string>();
    data.frames = m.at("frames").get<int>();
    data.seed = m.at("seed").get<std::uint64_t>();
    data.class_names = m.at("classes").get<std::vector<std::string>>();
    data.train = m.at("train").get<std::vector<int>>();
    data.test = m.at("test").get<std::vector<int>>();
    for (const auto& f : m.at("files")) data.motions.push_back(load_motion(dir / f.get<std::string>()));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("dataset manifest: " + std::string(e.what()));
  }
  const int n = static_cast<int>(data.motions.size());
  for (int i : data.train) {
    if (i < 0 || i >= n) throw FormatError("dataset manifest: train index out of range");
  }
  for (int i : data.test) {
    if (i < 0 || i >= n) throw FormatError("dataset manifest: test index out of range");
  }
  return data;
}

}  // namespace skeladv
