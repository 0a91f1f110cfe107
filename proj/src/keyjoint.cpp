#include "skeladv/keyjoint.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <nlohmann/json.hpp>

namespace skeladv {

SignificanceMap gradcam_scores(const GraphConvClassifier& model, const Tensor3& input, int cls, int layer) {
  if (layer < 0) layer = model.layer_count() - 1;
  if (layer >= model.layer_count()) {
    throw Error("gradcam_scores: invalid layer index " + std::to_string(layer));
  }
  if (cls < 0 || cls >= model.classes()) throw Error("gradcam_scores: invalid class index " + std::to_string(cls));
  const ForwardResult fwd = forward(model, input);
  const std::vector<Tensor3> grads = feature_gradients(model, fwd.tape, cls);
  const Tensor3& f = fwd.tape.features[layer];
  const Tensor3& g = grads[layer];
  const int n = f.joints();
  const int c = f.channels();
  SignificanceMap map(Shape{f.frames(), n, 1});
  std::vector<double> alpha(c);
  for (int t = 0; t < f.frames(); ++t) {
    std::fill(alpha.begin(), alpha.end(), 0.0);
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < c; ++k) alpha[k] += g(t, i, k);
    }
    for (double& a : alpha) a /= n;
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int k = 0; k < c; ++k) s += alpha[k] * f(t, i, k);
      map(t, i, 0) = s > 0.0 ? s : 0.0;
    }
  }
  return map;
}

std::vector<std::vector<int>> top_joints_per_frame(const SignificanceMap& map, int nk) {
  const int n = map.joints();
  if (nk < 1 || nk > n) throw Error("top_joints_per_frame: N_k must lie in [1, " + std::to_string(n) + "]");
  std::vector<std::vector<int>> out;
  std::vector<int> order(n);
  for (int t = 0; t < map.frames(); ++t) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return map(t, a, 0) > map(t, b, 0); });
    std::vector<int> top(order.begin(), order.begin() + nk);
    std::sort(top.begin(), top.end());
    out.push_back(std::move(top));
  }
  return out;
}

JointMask aggregate_key_joints(const std::vector<std::vector<int>>& per_frame, int joints, int nk) {
  if (per_frame.empty()) throw Error("aggregate_key_joints: no frames");
  if (nk < 1 || nk > joints) throw Error("aggregate_key_joints: N_k out of range");
  std::vector<int> count(joints, 0);
  for (const auto& set : per_frame) {
    for (int j : set) {
      if (j < 0 || j >= joints) throw Error("aggregate_key_joints: joint index out of range");
      ++count[j];
    }
  }
  std::vector<int> order(joints);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return count[a] > count[b]; });
  order.resize(nk);
  return JointMask::from_indices(joints, order);
}

double mask_cosine_similarity(const JointMask& a, const JointMask& b) {
  if (a.joints() != b.joints()) throw Error("mask_cosine_similarity: masks differ in joint count");
  const int ca = a.count();
  const int cb = b.count();
  if (ca == 0 || cb == 0) throw Error("mask_cosine_similarity: empty mask");
  int both = 0;
  for (int j = 0; j < a.joints(); ++j) both += (a[j] && b[j]) ? 1 : 0;
  return both / std::sqrt(static_cast<double>(ca) * cb);
}

JointMask extract_key_joints(const GraphConvClassifier& surrogate, const Tensor3& input, int nk, int layer) {
  const int cls = predict(surrogate, input);
  const auto per_frame = top_joints_per_frame(gradcam_scores(surrogate, input, cls, layer), nk);
  return aggregate_key_joints(per_frame, input.joints(), nk);
}

KeyJointSimilarity key_joint_similarity(const std::vector<std::vector<int>>& per_frame, int joints, int nk) {
  KeyJointSimilarity out;
  const JointMask agg = aggregate_key_joints(per_frame, joints, nk);
  std::vector<JointMask> masks;
  for (const auto& s : per_frame) masks.push_back(JointMask::from_indices(joints, s));
  double pair_sum = 0.0;
  long pairs = 0;
  for (std::size_t a = 0; a < masks.size(); ++a) {
    out.frame_to_aggregate += mask_cosine_similarity(masks[a], agg);
    for (std::size_t b = a + 1; b < masks.size(); ++b) {
      pair_sum += mask_cosine_similarity(masks[a], masks[b]);
      ++pairs;
    }
  }
  out.frame_to_aggregate /= static_cast<double>(masks.size());
  out.frame_pairs = pairs == 0 ? 1.0 : pair_sum / static_cast<double>(pairs);
  return out;
}

void save_mask(const JointMask& mask, const std::filesystem::path& path) {
  nlohmann::json doc{{"joint_count", mask.joints()}, {"selected", mask.indices()}};
  write_file_atomic(path, doc.dump(1) + "\n");
}

JointMask load_mask(const std::filesystem::path& path) {
  try {
    const auto doc = nlohmann::json::parse(read_file(path));
    return JointMask::from_indices(doc.at("joint_count").get<int>(), doc.at("selected").get<std::vector<int>>());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("mask file: " + std::string(e.what()));
  }
}

}  // namespace skeladv
