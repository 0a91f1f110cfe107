#include "skeladv/metrics.hpp"

#include <cmath>

#include "skeladv/constraints.hpp"

namespace skeladv {

namespace {

void check_pairs(const std::vector<MotionPair>& pairs) {
  if (pairs.empty()) throw Error("metric needs at least one pair");
  for (const auto& [a, b] : pairs) {
    if (a.shape() != b.shape()) throw Error("metric pair shapes differ");
  }
}

double root_distance(const Tensor3& x, int t, int j, int c) {
  double s = 0.0;
  for (int k = 0; k < x.channels(); ++k) {
    const double v = x(t, j, k) - x(t, c, k);
    s += v * v;
  }
  return std::sqrt(s);
}

}  // namespace

double l_c(const std::vector<MotionPair>& pairs, int root) {
  check_pairs(pairs);
  double total = 0.0;
  for (const auto& [x, xa] : pairs) {
    if (root < 0 || root >= x.joints()) throw Error("l_c: root index out of range");
    double s = 0.0;
    for (int t = 0; t < x.frames(); ++t) {
      for (int j = 0; j < x.joints(); ++j) {
        if (j == root) continue;
        s += std::abs(root_distance(x, t, j, root) - root_distance(xa, t, j, root));
      }
    }
    total += s;
  }
  return total / static_cast<double>(pairs.size());
}

double delta_a(const std::vector<MotionPair>& pairs) {
  check_pairs(pairs);
  double total = 0.0;
  for (const auto& [x, xa] : pairs) {
    if (x.frames() < 3) throw Error("delta_a: need at least 3 frames");
    double s = 0.0;
    for (int t = 1; t + 1 < x.frames(); ++t) {
      for (int j = 0; j < x.joints(); ++j) {
        for (int k = 0; k < x.channels(); ++k) {
          const double acc = x(t + 1, j, k) - 2.0 * x(t, j, k) + x(t - 1, j, k);
          const double acc_adv = xa(t + 1, j, k) - 2.0 * xa(t, j, k) + xa(t - 1, j, k);
          s += (acc - acc_adv) * (acc - acc_adv);
        }
      }
    }
    total += std::sqrt(s);
  }
  const Tensor3& first = pairs.front().first;
  return total / (static_cast<double>(pairs.size()) * first.frames() * first.joints());
}

std::vector<double> tdc_profile(const Tensor3& original, const Tensor3& adversarial, double zero_norm_threshold) {
  if (original.shape() != adversarial.shape()) throw Error("tdc_profile: shape mismatch");
  const std::size_t fs = original.shape().frame_size();
  std::vector<double> out(original.frames(), 1.0);
  std::vector<double> prev(fs), curr(fs);
  for (int t = 0; t < original.frames(); ++t) {
    auto x = original.frame(t);
    auto xa = adversarial.frame(t);
    for (std::size_t e = 0; e < fs; ++e) curr[e] = xa[e] - x[e];
    if (t > 0) out[t] = tdc(prev, curr, zero_norm_threshold);
    std::swap(prev, curr);
  }
  return out;
}

CampaignStats aggregate(const std::vector<SampleRecord>& records, long budget) {
  if (records.empty()) throw Error("aggregate: no records");
  CampaignStats st;
  double q = 0.0;
  for (const auto& r : records) {
    if (r.skipped) {
      ++st.skipped;
      continue;
    }
    ++st.attempted;
    if (!r.success || r.queries > budget) continue;
    ++st.successes;
    q += static_cast<double>(r.queries);
    st.l_c += r.l_c;
    st.delta_a += r.delta_a;
  }
  if (st.attempted > 0) st.asr = static_cast<double>(st.successes) / st.attempted;
  if (st.successes > 0) {
    st.aq = q / st.successes;
    st.l_c /= st.successes;
    st.delta_a /= st.successes;
  }
  return st;
}

}  // namespace skeladv
