#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "skeladv/motion.hpp"
#include "skeladv/topology.hpp"

namespace skeladv {

/// Identifier recorded in manifests for the noise stream: mt19937_64 words mapped to
/// uniform doubles via the top 53 bits, Gaussians via Box-Muller.
inline constexpr const char* kRngAlgorithm = "mt19937_64/top53-uniform/box-muller";

/// Portable random stream (std distributions are implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform();  // [0, 1)
  double normal();
  std::uint64_t next() { return engine_(); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Derives an independent seed from a base seed and a stream id (splitmix64 finalizer).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/// Sinusoidal displacement of one joint: offset + amplitude · sin(2π·frequency·t/T + phase).
struct JointTrajectory {
  int joint = 0;
  std::vector<double> offset;
  std::vector<double> amplitude;
  double frequency = 1.0;
  double phase = 0.0;
};

struct MotionClassSpec {
  int class_id = 0;
  std::string name;
  std::vector<JointTrajectory> joints;
  double noise_sigma = 0.0;
};

struct Dataset {
  std::string topology;
  int frames = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> class_names;
  std::vector<Motion> motions;
  std::vector<int> train;
  std::vector<int> test;

  std::vector<Motion> train_motions() const;
  std::vector<Motion> test_motions() const;
};

/// Standing rest pose (metres, y up) for the 25-joint skeleton.
const std::vector<std::array<double, 3>>& ntu25_rest_pose();
/// Rest pose for the 5-joint toy skeleton.
const std::vector<std::array<double, 3>>& toy5_rest_pose();

/// Five hand-designed classes on the 25-joint skeleton: raise-arm, wave, clap (upper-body
/// driven), squat and kick (lower-body driven).
std::vector<MotionClassSpec> default_class_specs();
/// Three simple classes on the toy skeleton for fast tests.
std::vector<MotionClassSpec> toy_class_specs();

/// Generates n_per_class motions per class; the first half of each class goes to the training
/// split, the rest to the test split. Every motion is normalized per motion.
Dataset generate_dataset(const std::vector<MotionClassSpec>& specs, int n_per_class, int frames,
                         const Topology& topo, std::uint64_t seed);

/// Raw (un-normalized) noiseless motion of a class, useful for tests.
Tensor3 class_trajectory(const MotionClassSpec& spec, int frames, const Topology& topo);

std::vector<MotionClassSpec> load_class_specs(const std::filesystem::path& path);
void save_class_specs(const std::vector<MotionClassSpec>& specs, const std::filesystem::path& path);

/// Writes one motion file per sample plus manifest.json listing the splits.
void save_dataset(const Dataset& data, const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace skeladv
