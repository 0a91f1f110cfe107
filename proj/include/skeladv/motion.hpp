#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "skeladv/tensor.hpp"
#include "skeladv/topology.hpp"

namespace skeladv {

/// Raised by the motion/topology/template readers. The message names the offending field.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A normalized T×N×D motion. Construction enforces T ≥ 3 and coordinates in [0, 1].
class Motion {
 public:
  Motion(Tensor3 coords, std::string topology, std::optional<int> label = std::nullopt);

  const Tensor3& coords() const { return coords_; }
  const Shape& shape() const { return coords_.shape(); }
  int frames() const { return coords_.frames(); }
  int joints() const { return coords_.joints(); }
  int dims() const { return coords_.channels(); }
  const std::string& topology() const { return topology_; }
  const std::optional<int>& label() const { return label_; }

  Motion with_label(std::optional<int> label) const;
  Motion with_coords(Tensor3 coords) const;

  bool operator==(const Motion&) const = default;

 private:
  Tensor3 coords_;
  std::string topology_;
  std::optional<int> label_;
};

/// Throws unless the motion's joint count and topology name match `topo`.
void check_conforms(const Motion& motion, const Topology& topo);

/// Per-joint selector broadcast over frames and coordinates.
class JointMask {
 public:
  JointMask() = default;
  explicit JointMask(std::vector<bool> selected) : selected_(std::move(selected)) {}
  static JointMask all(int joints) { return JointMask(std::vector<bool>(joints, true)); }
  static JointMask none(int joints) { return JointMask(std::vector<bool>(joints, false)); }
  static JointMask from_indices(int joints, const std::vector<int>& indices);

  int joints() const { return static_cast<int>(selected_.size()); }
  bool operator[](int joint) const { return selected_[joint]; }
  void set(int joint, bool on) { selected_[joint] = on; }
  int count() const;
  double sparsity() const { return joints() == 0 ? 0.0 : static_cast<double>(count()) / joints(); }
  std::vector<int> indices() const;
  const std::vector<bool>& selected() const { return selected_; }

  bool operator==(const JointMask&) const = default;

 private:
  std::vector<bool> selected_;
};

/// Affine map applied by `normalize`: y = (x + offset) · scale.
struct NormalizationRecord {
  std::vector<double> offset;
  double scale = 1.0;
};

/// Shifts each dimension's minimum to 0 and divides by the largest per-dimension extent,
/// so the motion fits [0,1] with its aspect ratio preserved.
std::pair<Motion, NormalizationRecord> normalize(const Tensor3& raw, std::string topology,
                                                 std::optional<int> label = std::nullopt);
Tensor3 denormalize(const Tensor3& normalized, const NormalizationRecord& record);

/// Per-frame bone lengths, one per non-root joint in `topo.bone_joints()` order.
std::vector<std::vector<double>> bone_lengths(const Tensor3& coords, const Topology& topo);

Motion load_motion(const std::filesystem::path& path);
Motion load_motion(const std::filesystem::path& path, const Topology& expected);
void save_motion(const Motion& motion, const std::filesystem::path& path);

std::string motion_to_json(const Motion& motion);
Motion motion_from_json(const std::string& text);

/// Writes `contents` to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace skeladv
