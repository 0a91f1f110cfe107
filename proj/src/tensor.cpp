#include "skeladv/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace skeladv {

std::string to_string(const Shape& s) {
  return std::to_string(s.frames) + "x" + std::to_string(s.joints) + "x" +
         std::to_string(s.channels);
}

double l2_norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double linf_distance(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace skeladv
