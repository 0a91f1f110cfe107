#include "skeladv/motion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <sstream>

#include "skeladv/textio.hpp"

namespace skeladv {

namespace {

void validate_coords(const Tensor3& coords) {
  if (coords.frames() < 3) {
    throw Error("motion needs at least 3 frames, got " + std::to_string(coords.frames()));
  }
  if (coords.joints() < 1 || coords.channels() < 1) throw Error("motion has empty joint or coordinate axis");
  const auto& v = coords.values();
  for (std::size_t idx = 0; idx < v.size(); ++idx) {
    if (!(v[idx] >= 0.0 && v[idx] <= 1.0)) {
      throw Error("coordinate out of range: value " + format_double(v[idx]) + " at flat index " +
                  std::to_string(idx));
    }
  }
}

}  // namespace

Motion::Motion(Tensor3 coords, std::string topology, std::optional<int> label)
    : coords_(std::move(coords)), topology_(std::move(topology)), label_(label) {
  validate_coords(coords_);
}

Motion Motion::with_label(std::optional<int> label) const {
  Motion m = *this;
  m.label_ = label;
  return m;
}

Motion Motion::with_coords(Tensor3 coords) const { return Motion(std::move(coords), topology_, label_); }

void check_conforms(const Motion& motion, const Topology& topo) {
  if (motion.topology() != topo.name()) {
    throw Error("topology mismatch: motion uses '" + motion.topology() + "', expected '" + topo.name() + "'");
  }
  if (motion.joints() != topo.joint_count()) {
    throw Error("topology mismatch: motion has " + std::to_string(motion.joints()) + " joints, topology '" +
                topo.name() + "' has " + std::to_string(topo.joint_count()));
  }
}

JointMask JointMask::from_indices(int joints, const std::vector<int>& indices) {
  std::vector<bool> sel(joints, false);
  for (int i : indices) {
    if (i < 0 || i >= joints) throw Error("joint index " + std::to_string(i) + " out of range");
    sel[i] = true;
  }
  return JointMask(std::move(sel));
}

int JointMask::count() const { return static_cast<int>(std::count(selected_.begin(), selected_.end(), true)); }

std::vector<int> JointMask::indices() const {
  std::vector<int> out;
  for (int i = 0; i < joints(); ++i) {
    if (selected_[i]) out.push_back(i);
  }
  return out;
}

std::pair<Motion, NormalizationRecord> normalize(const Tensor3& raw, std::string topology,
                                                 std::optional<int> label) {
  const int d = raw.channels();
  std::vector<double> lo(d, std::numeric_limits<double>::infinity());
  std::vector<double> hi(d, -std::numeric_limits<double>::infinity());
  for (int t = 0; t < raw.frames(); ++t) {
    for (int i = 0; i < raw.joints(); ++i) {
      for (int k = 0; k < d; ++k) {
        double v = raw(t, i, k);
        if (!std::isfinite(v)) throw Error("normalize: non-finite coordinate");
        lo[k] = std::min(lo[k], v);
        hi[k] = std::max(hi[k], v);
      }
    }
  }
  double extent = 0.0;
  for (int k = 0; k < d; ++k) extent = std::max(extent, hi[k] - lo[k]);
  if (!(extent > 0.0)) throw Error("degenerate extent: motion has zero spatial extent");

  NormalizationRecord rec;
  rec.scale = 1.0 / extent;
  rec.offset.resize(d);
  for (int k = 0; k < d; ++k) rec.offset[k] = -lo[k];

  Tensor3 out(raw.shape());
  for (int t = 0; t < raw.frames(); ++t) {
    for (int i = 0; i < raw.joints(); ++i) {
      for (int k = 0; k < d; ++k) {
        // Rounding can leave values a few ulps outside the unit box.
        out(t, i, k) = std::clamp((raw(t, i, k) + rec.offset[k]) * rec.scale, 0.0, 1.0);
      }
    }
  }
  return {Motion(std::move(out), std::move(topology), label), rec};
}

Tensor3 denormalize(const Tensor3& normalized, const NormalizationRecord& record) {
  Tensor3 out(normalized.shape());
  for (int t = 0; t < normalized.frames(); ++t) {
    for (int i = 0; i < normalized.joints(); ++i) {
      for (int k = 0; k < normalized.channels(); ++k) {
        out(t, i, k) = normalized(t, i, k) / record.scale - record.offset[k];
      }
    }
  }
  return out;
}

std::vector<std::vector<double>> bone_lengths(const Tensor3& coords, const Topology& topo) {
  const auto& bones = topo.bone_joints();
  std::vector<std::vector<double>> out(coords.frames(), std::vector<double>(bones.size()));
  for (int t = 0; t < coords.frames(); ++t) {
    for (std::size_t b = 0; b < bones.size(); ++b) {
      const int j = bones[b];
      const int p = topo.parent(j);
      double s = 0.0;
      for (int k = 0; k < coords.channels(); ++k) {
        double diff = coords(t, j, k) - coords(t, p, k);
        s += diff * diff;
      }
      out[t][b] = std::sqrt(s);
    }
  }
  return out;
}

std::string motion_to_json(const Motion& m) {
  std::ostringstream os;
  os << "{\"format_version\": 1, \"topology\": " << nlohmann::json(m.topology()).dump() << ", \"label\": ";
  if (m.label()) {
    os << *m.label();
  } else {
    os << "null";
  }
  os << ", \"T\": " << m.frames() << ", \"N\": " << m.joints() << ", \"D\": " << m.dims() << ",\n \"frames\": [";
  for (int t = 0; t < m.frames(); ++t) {
    os << (t ? ",\n  [" : "\n  [");
    for (int i = 0; i < m.joints(); ++i) {
      os << (i ? ", [" : "[");
      for (int k = 0; k < m.dims(); ++k) {
        if (k) os << ", ";
        os << format_double(m.coords()(t, i, k));
      }
      os << "]";
    }
    os << "]";
  }
  os << "\n ]\n}\n";
  return os.str();
}

Motion motion_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("malformed motion file: ") + e.what());
  }
  if (!doc.is_object()) throw FormatError("malformed motion file: top level must be an object");
  auto field = [&](const char* key) -> const nlohmann::json& {
    if (!doc.contains(key)) throw FormatError(std::string("missing field '") + key + "'");
    return doc.at(key);
  };
  auto int_field = [&](const char* key) {
    const auto& v = field(key);
    if (!v.is_number_integer()) throw FormatError(std::string("field '") + key + "' must be an integer");
    return v.get<int>();
  };
  if (int_field("format_version") != 1) throw FormatError("unsupported format_version");
  const auto& topo = field("topology");
  if (!topo.is_string()) throw FormatError("field 'topology' must be a string");
  std::optional<int> label;
  const auto& lab = field("label");
  if (lab.is_number_integer()) {
    label = lab.get<int>();
  } else if (!lab.is_null()) {
    throw FormatError("field 'label' must be an integer or null");
  }
  const int T = int_field("T");
  const int N = int_field("N");
  const int D = int_field("D");
  if (T < 3) throw FormatError("field 'T' must be at least 3");
  if (N < 1 || D < 1) throw FormatError("fields 'N' and 'D' must be positive");
  const auto& frames = field("frames");
  if (!frames.is_array() || static_cast<int>(frames.size()) != T) {
    throw FormatError("field 'frames' must hold T = " + std::to_string(T) + " frames");
  }
  Tensor3 coords(Shape{T, N, D});
  for (int t = 0; t < T; ++t) {
    const auto& fr = frames[t];
    if (!fr.is_array() || static_cast<int>(fr.size()) != N) {
      throw FormatError("field 'frames[" + std::to_string(t) + "]' must hold N = " + std::to_string(N) + " joints");
    }
    for (int i = 0; i < N; ++i) {
      const auto& jt = fr[i];
      const std::string where = "frames[" + std::to_string(t) + "][" + std::to_string(i) + "]";
      if (!jt.is_array() || static_cast<int>(jt.size()) != D) {
        throw FormatError("field '" + where + "' must hold D = " + std::to_string(D) + " coordinates");
      }
      for (int k = 0; k < D; ++k) {
        if (!jt[k].is_number()) throw FormatError("field '" + where + "[" + std::to_string(k) + "]' is not a number");
        double v = jt[k].get<double>();
        if (!(v >= 0.0 && v <= 1.0)) {
          throw FormatError("coordinate out of range at '" + where + "[" + std::to_string(k) + "]': " + format_double(v));
        }
        coords(t, i, k) = v;
      }
    }
  }
  return Motion(std::move(coords), topo.get<std::string>(), label);
}

Motion load_motion(const std::filesystem::path& path) { return motion_from_json(read_file(path)); }

Motion load_motion(const std::filesystem::path& path, const Topology& expected) {
  Motion m = load_motion(path);
  if (m.topology() != expected.name() || m.joints() != expected.joint_count()) {
    throw FormatError("topology mismatch in " + path.string() + ": file declares '" + m.topology() + "' with N = " +
                      std::to_string(m.joints()) + ", expected '" + expected.name() + "' with N = " +
                      std::to_string(expected.joint_count()));
  }
  return m;
}

void save_motion(const Motion& motion, const std::filesystem::path& path) {
  write_file_atomic(path, motion_to_json(motion));
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out << contents;
    if (!out.flush()) throw Error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace skeladv
