#include "skeladv/topology.hpp"

#include <deque>
#include <nlohmann/json.hpp>

#include "skeladv/motion.hpp"

namespace skeladv {

namespace {

constexpr std::array<std::string_view, 6> kRegionNames = {"left-hand", "right-hand", "left-leg",
                                                          "right-leg", "spine",      "head"};

}  // namespace

std::string_view region_name(Region r) { return kRegionNames[static_cast<int>(r)]; }

Region parse_region(std::string_view name) {
  for (std::size_t i = 0; i < kRegionNames.size(); ++i) {
    if (kRegionNames[i] == name) return static_cast<Region>(i);
  }
  throw FormatError("unknown region tag '" + std::string(name) + "'");
}

Topology::Topology(std::string name, std::vector<int> parent, int root, std::vector<Region> regions)
    : name_(std::move(name)), parent_(std::move(parent)), root_(root), regions_(std::move(regions)) {
  const int n = static_cast<int>(parent_.size());
  if (n == 0) throw Error("topology '" + name_ + "' has no joints");
  if (root_ < 0 || root_ >= n) throw Error("topology root index out of range");
  if (static_cast<int>(regions_.size()) != n) {
    throw Error("topology '" + name_ + "': every joint needs exactly one region tag");
  }
  if (parent_[root_] != root_) throw Error("topology root must be its own parent");
  for (int j = 0; j < n; ++j) {
    if (parent_[j] < 0 || parent_[j] >= n) throw Error("parent index out of range at joint " + std::to_string(j));
    if (j != root_ && parent_[j] == j) throw Error("topology has more than one root (joint " + std::to_string(j) + ")");
  }
  for (int j = 0; j < n; ++j) {
    int cur = j;
    int steps = 0;
    while (cur != root_) {
      cur = parent_[cur];
      if (++steps >= n) throw Error("topology parent links contain a cycle at joint " + std::to_string(j));
    }
  }

  children_.assign(n, {});
  for (int j = 0; j < n; ++j) {
    if (j != root_) children_[parent_[j]].push_back(j);
    if (j != root_) bone_joints_.push_back(j);
  }
  std::deque<int> queue{root_};
  while (!queue.empty()) {
    int j = queue.front();
    queue.pop_front();
    bfs_.push_back(j);
    for (int c : children_[j]) queue.push_back(c);
  }
}

bool Topology::is_ancestor(int ancestor, int joint) const {
  while (joint != root_) {
    joint = parent_[joint];
    if (joint == ancestor) return true;
  }
  return false;
}

std::vector<int> Topology::subtree(int joint) const {
  std::vector<int> out{joint};
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (int c : children_[out[i]]) out.push_back(c);
  }
  return out;
}

Matrix Topology::normalized_adjacency() const {
  const int n = joint_count();
  Matrix a(n, n);
  for (int j = 0; j < n; ++j) {
    a(j, j) = 1.0;
    if (j != root_) {
      a(j, parent_[j]) = 1.0;
      a(parent_[j], j) = 1.0;
    }
  }
  for (int r = 0; r < n; ++r) {
    double sum = 0.0;
    for (int c = 0; c < n; ++c) sum += a(r, c);
    for (int c = 0; c < n; ++c) a(r, c) /= sum;
  }
  return a;
}

const Topology& ntu25_topology() {
  using R = Region;
  static const Topology topo(
      "ntu25",
      {1, 20, 20, 2, 20, 4, 5, 6, 20, 8, 9, 10, 0, 12, 13, 14, 0, 16, 17, 18, 20, 7, 7, 11, 11}, 20,
      {R::Spine,    R::Spine,    R::Head,     R::Head,     R::LeftHand, R::LeftHand, R::LeftHand,
       R::LeftHand, R::RightHand, R::RightHand, R::RightHand, R::RightHand, R::LeftLeg, R::LeftLeg,
       R::LeftLeg,  R::LeftLeg,  R::RightLeg, R::RightLeg, R::RightLeg, R::RightLeg, R::Spine,
       R::LeftHand, R::LeftHand, R::RightHand, R::RightHand});
  return topo;
}

const Topology& toy5_topology() {
  using R = Region;
  static const Topology topo("toy5", {1, 1, 1, 1, 0}, 1,
                             {R::Spine, R::Spine, R::Head, R::RightHand, R::RightLeg});
  return topo;
}

bool has_builtin_topology(std::string_view name) { return name == "ntu25" || name == "toy5"; }

const Topology& builtin_topology(std::string_view name) {
  if (name == "ntu25") return ntu25_topology();
  if (name == "toy5") return toy5_topology();
  throw Error("unknown topology '" + std::string(name) + "'");
}

std::map<Region, std::vector<int>> region_partition(const Topology& topo) {
  std::map<Region, std::vector<int>> out;
  for (int j = 0; j < topo.joint_count(); ++j) out[topo.region(j)].push_back(j);
  return out;
}

Topology load_topology(const std::filesystem::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError("topology file " + path.string() + ": malformed: " + e.what());
  }
  auto field = [&](const char* key) -> const nlohmann::json& {
    if (!doc.contains(key)) throw FormatError(std::string("topology file: missing field '") + key + "'");
    return doc.at(key);
  };
  try {
    auto name = field("name").get<std::string>();
    int count = field("joint_count").get<int>();
    auto parent = field("parent").get<std::vector<int>>();
    int root = field("root").get<int>();
    std::vector<Region> regions;
    for (const auto& r : field("regions")) regions.push_back(parse_region(r.get<std::string>()));
    if (static_cast<int>(parent.size()) != count) {
      throw FormatError("topology file: field 'parent' has " + std::to_string(parent.size()) +
                        " entries, expected joint_count = " + std::to_string(count));
    }
    if (static_cast<int>(regions.size()) != count) {
      throw FormatError("topology file: field 'regions' has " + std::to_string(regions.size()) +
                        " entries, expected joint_count = " + std::to_string(count));
    }
    return Topology(std::move(name), std::move(parent), root, std::move(regions));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("topology file: wrong field type: ") + e.what());
  }
}

void save_topology(const Topology& topo, const std::filesystem::path& path) {
  nlohmann::json doc;
  doc["name"] = topo.name();
  doc["joint_count"] = topo.joint_count();
  doc["parent"] = topo.parents();
  doc["root"] = topo.root();
  std::vector<std::string> regions;
  for (Region r : topo.regions()) regions.emplace_back(region_name(r));
  doc["regions"] = regions;
  write_file_atomic(path, doc.dump(2) + "\n");
}

}  // namespace skeladv
