#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "skeladv/motion.hpp"
#include "skeladv/rays.hpp"

namespace skeladv {

/// Static full-body pose whose `regions` are spliced into a host motion.
struct PostureTemplate {
  std::string name;
  std::string topology;
  std::vector<Region> regions;
  /// Region joints whose parent lies outside the region.
  std::vector<int> attachments;
  /// N rows of D coordinates (any units; splicing rescales).
  std::vector<std::vector<double>> joints;
};

/// The four shipped lower-body postures for the 25-joint skeleton.
inline const std::vector<std::string> kTemplateNames = {"sit", "crouch", "kneel", "half-kneel"};
PostureTemplate builtin_template(const std::string& name);
PostureTemplate load_template(const std::filesystem::path& path);
void save_template(const PostureTemplate& tpl, const std::filesystem::path& path);
/// Built-in name or path to a template file.
PostureTemplate resolve_template(const std::string& name_or_path);

/// Mask selecting exactly the joints of the given regions.
JointMask region_mask(const Topology& topo, const std::vector<Region>& regions);
/// "lower-body" or a comma-separated list of region tags.
std::vector<Region> parse_region_list(const std::string& spec);

/// The template pose repeated over `frames` frames.
Tensor3 template_motion(const PostureTemplate& tpl, int frames);

/// Joints of `mask` whose parent is outside it. Throws "disconnected replacement region" unless
/// the mask is closed under taking children, and rejects masks containing the root.
std::vector<int> replacement_attachments(const JointMask& mask, const Topology& topo);

struct SpliceResult {
  Tensor3 motion;
  /// Map from the spliced raw coordinates to `motion` (identity when no refit was needed).
  NormalizationRecord record;
};

/// Ψ: per frame and per attachment a (parent p), selected joints j of the component become
/// x[a] + s·(x_t[j] − x_t[a]) with s = ‖x[a] − x[p]‖ / ‖x_t[a] − x_t[p]‖. The result is refit
/// into [0,1] when it leaves the box. `donor` may have one frame (a static pose) or T frames.
SpliceResult splice(const Tensor3& x, const Tensor3& donor, const JointMask& replace, const Topology& topo);

/// Replacement only: one verification query, zero optimization queries.
AttackReport attack_nr(const Tensor3& x, int label, const Tensor3& donor, const JointMask& replace, Oracle& oracle,
                       const Topology& topo);
/// Replacement, then ISAAC-K search from the spliced motion restricted to the replaced joints.
AttackReport attack_nrl(const Tensor3& x, int label, const Tensor3& donor, const JointMask& replace,
                        Oracle& oracle, const Topology& topo, const AttackConfig& cfg);
/// Replacement, then search over all joints.
AttackReport attack_nra(const Tensor3& x, int label, const Tensor3& donor, const JointMask& replace,
                        Oracle& oracle, const Topology& topo, const AttackConfig& cfg);

enum class ReplaceStrategy { NR, NRL, NRA };

/// Tries each donor in turn (splice, verify, then targeted search for NRL/NRA), sharing the
/// query budget across donors; the first success wins.
AttackReport targeted_replace(const Tensor3& x, int target_class, const std::vector<Tensor3>& donors,
                              const JointMask& replace, Oracle& oracle, const Topology& topo,
                              const AttackConfig& cfg, ReplaceStrategy strategy);

}  // namespace skeladv
