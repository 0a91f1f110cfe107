#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "skeladv/tensor.hpp"

namespace skeladv {

enum class Region { LeftHand, RightHand, LeftLeg, RightLeg, Spine, Head };

inline constexpr std::array<Region, 6> kAllRegions = {Region::LeftHand, Region::RightHand,
                                                      Region::LeftLeg,  Region::RightLeg,
                                                      Region::Spine,    Region::Head};

std::string_view region_name(Region r);
Region parse_region(std::string_view name);

/// Rooted kinematic tree over N joints with a body-region tag per joint.
///
/// The constructor validates the tree: exactly one fixed point of `parent`
/// (the root) and every joint reaching the root in fewer than N steps.
class Topology {
 public:
  Topology(std::string name, std::vector<int> parent, int root, std::vector<Region> regions);

  const std::string& name() const { return name_; }
  int joint_count() const { return static_cast<int>(parent_.size()); }
  int root() const { return root_; }
  int parent(int joint) const { return parent_[joint]; }
  const std::vector<int>& parents() const { return parent_; }
  const std::vector<Region>& regions() const { return regions_; }
  Region region(int joint) const { return regions_[joint]; }
  const std::vector<int>& children(int joint) const { return children_[joint]; }

  /// Joints in breadth-first order from the root; parents always precede children.
  const std::vector<int>& bfs_order() const { return bfs_; }

  /// Non-root joints in index order; bone b connects bone_joints()[b] to its parent.
  const std::vector<int>& bone_joints() const { return bone_joints_; }

  bool is_ancestor(int ancestor, int joint) const;
  std::vector<int> subtree(int joint) const;

  /// Row-normalized (adjacency + self loops), N×N.
  Matrix normalized_adjacency() const;

  bool operator==(const Topology& o) const {
    return name_ == o.name_ && parent_ == o.parent_ && root_ == o.root_ && regions_ == o.regions_;
  }

 private:
  std::string name_;
  std::vector<int> parent_;
  int root_;
  std::vector<Region> regions_;
  std::vector<std::vector<int>> children_;
  std::vector<int> bfs_;
  std::vector<int> bone_joints_;
};

/// 25-joint NTU-style skeleton, root at the spine-shoulder joint (index 20).
const Topology& ntu25_topology();
/// 5-joint toy skeleton: hip, chest (root), head, hand, foot.
const Topology& toy5_topology();
/// Looks up a built-in topology by name ("ntu25", "toy5").
const Topology& builtin_topology(std::string_view name);
bool has_builtin_topology(std::string_view name);

/// Partition of joints by region tag. Regions without joints are omitted.
std::map<Region, std::vector<int>> region_partition(const Topology& topo);

Topology load_topology(const std::filesystem::path& path);
void save_topology(const Topology& topo, const std::filesystem::path& path);

}  // namespace skeladv
