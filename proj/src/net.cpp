#include "skeladv/net.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "skeladv/synth.hpp"
#include "skeladv/textio.hpp"

namespace skeladv {

NetConfig default_net_config(const Topology& topo, int classes) {
  NetConfig cfg;
  cfg.topology = topo.name();
  cfg.joints = topo.joint_count();
  cfg.classes = classes;
  cfg.center_joint = topo.root();
  return cfg;
}

GraphConvClassifier::GraphConvClassifier(NetConfig config, const Topology& topo, std::uint64_t seed)
    : config_(std::move(config)), adjacency_(topo.normalized_adjacency()) {
  if (config_.joints != topo.joint_count()) throw Error("network joint count does not match topology");
  Rng rng(seed);
  int in = config_.in_dims;
  for (int width : config_.channels) {
    Matrix w(in, width);
    const double bound = std::sqrt(6.0 / in);
    for (double& v : w.data) v = (2.0 * rng.uniform() - 1.0) * bound;
    weights_.push_back(std::move(w));
    in = width;
  }
  head_ = Matrix(config_.classes, in);
  const double bound = std::sqrt(6.0 / (in + config_.classes));
  for (double& v : head_.data) v = (2.0 * rng.uniform() - 1.0) * bound;
  head_bias_.assign(config_.classes, 0.0);
  check();
}

GraphConvClassifier::GraphConvClassifier(NetConfig config, Matrix adjacency, std::vector<Matrix> weights,
                                         Matrix head, std::vector<double> head_bias)
    : config_(std::move(config)),
      adjacency_(std::move(adjacency)),
      weights_(std::move(weights)),
      head_(std::move(head)),
      head_bias_(std::move(head_bias)) {
  check();
}

void GraphConvClassifier::check() const {
  if (config_.channels.size() != weights_.size() || weights_.empty()) {
    throw Error("network needs one weight matrix per configured layer");
  }
  if (adjacency_.rows != config_.joints || adjacency_.cols != config_.joints) {
    throw Error("adjacency must be joints x joints");
  }
  int in = config_.in_dims;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    if (weights_[l].rows != in || weights_[l].cols != config_.channels[l]) {
      throw Error("layer " + std::to_string(l) + " weight has wrong shape");
    }
    in = weights_[l].cols;
  }
  if (head_.rows != config_.classes || head_.cols != in) throw Error("head weight has wrong shape");
  if (static_cast<int>(head_bias_.size()) != config_.classes) throw Error("head bias has wrong size");
  if (config_.center_joint < -1 || config_.center_joint >= config_.joints) throw Error("center joint out of range");
}

ForwardResult forward(const GraphConvClassifier& model, const Tensor3& input, Exec exec) {
  const auto& cfg = model.config();
  if (input.joints() != cfg.joints || input.channels() != cfg.in_dims || input.frames() < 1) {
    throw Error("dimension mismatch: network expects Tx" + std::to_string(cfg.joints) + "x" +
                std::to_string(cfg.in_dims) + ", got " + to_string(input.shape()));
  }
  ForwardResult out;
  FeatureTape& tape = out.tape;
  tape.input = input;
  if (const int c = cfg.center_joint; c >= 0) {
    for (int t = 0; t < input.frames(); ++t) {
      for (int i = 0; i < input.joints(); ++i) {
        for (int k = 0; k < input.channels(); ++k) tape.input(t, i, k) = input(t, i, k) - input(t, c, k);
      }
    }
  }
  const int layers = model.layer_count();
  tape.aggregated.resize(layers);
  tape.pre.resize(layers);
  tape.features.resize(layers);
  for (int l = 0; l < layers; ++l) {
    const Tensor3& h = l == 0 ? tape.input : tape.features[l - 1];
    kernels::graph_conv_forward(model.adjacency(), model.weights()[l], h, tape.aggregated[l], tape.pre[l],
                                tape.features[l], exec);
  }
  tape.pooled = kernels::mean_pool(tape.features.back());
  const Matrix& head = model.head();
  out.logits.assign(head.rows, 0.0);
  for (int c = 0; c < head.rows; ++c) {
    double s = model.head_bias()[c];
    for (int k = 0; k < head.cols; ++k) s += head(c, k) * tape.pooled[k];
    out.logits[c] = s;
  }
  return out;
}

std::vector<double> logits(const GraphConvClassifier& model, const Tensor3& input, Exec exec) {
  return forward(model, input, exec).logits;
}

int predict(const GraphConvClassifier& model, const Tensor3& input) {
  auto y = logits(model, input);
  return static_cast<int>(std::max_element(y.begin(), y.end()) - y.begin());
}

Gradients backward(const GraphConvClassifier& model, const FeatureTape& tape, const std::vector<double>& grad_logits,
                   bool parameter_grads, Exec exec) {
  const Matrix& head = model.head();
  const int layers = model.layer_count();
  Gradients g;
  g.features.resize(layers);

  std::vector<double> grad_pooled(head.cols, 0.0);
  for (int c = 0; c < head.rows; ++c) {
    if (grad_logits[c] == 0.0) continue;
    for (int k = 0; k < head.cols; ++k) grad_pooled[k] += grad_logits[c] * head(c, k);
  }
  const Tensor3& last = tape.features.back();
  const double pool = 1.0 / (static_cast<double>(last.frames()) * last.joints());
  Tensor3& g_last = g.features.back();
  g_last = Tensor3(last.shape());
  for (int t = 0; t < last.frames(); ++t) {
    for (int i = 0; i < last.joints(); ++i) {
      for (int k = 0; k < last.channels(); ++k) g_last(t, i, k) = grad_pooled[k] * pool;
    }
  }
  if (parameter_grads) {
    g.head = Matrix(head.rows, head.cols);
    for (int c = 0; c < head.rows; ++c) {
      for (int k = 0; k < head.cols; ++k) g.head(c, k) = grad_logits[c] * tape.pooled[k];
    }
    g.head_bias = grad_logits;
    for (const auto& w : model.weights()) g.weights.emplace_back(w.rows, w.cols);
  }
  for (int l = layers - 1; l >= 0; --l) {
    Tensor3& grad_in = l == 0 ? g.input : g.features[l - 1];
    kernels::graph_conv_backward(model.adjacency(), model.weights()[l], tape.aggregated[l], tape.pre[l], g.features[l],
                                 grad_in, parameter_grads ? &g.weights[l] : nullptr, exec);
  }
  if (const int c = model.config().center_joint; c >= 0) {
    Tensor3& gi = g.input;
    for (int t = 0; t < gi.frames(); ++t) {
      for (int k = 0; k < gi.channels(); ++k) {
        double s = 0.0;
        for (int i = 0; i < gi.joints(); ++i) s += gi(t, i, k);
        gi(t, c, k) -= s;
      }
    }
  }
  return g;
}

std::vector<Tensor3> feature_gradients(const GraphConvClassifier& model, const FeatureTape& tape, int cls) {
  if (cls < 0 || cls >= model.classes()) throw Error("invalid class index " + std::to_string(cls));
  std::vector<double> onehot(model.classes(), 0.0);
  onehot[cls] = 1.0;
  return backward(model, tape, onehot, false).features;
}

std::vector<double> softmax(const std::vector<double>& logits) {
  const double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) z += (p[i] = std::exp(logits[i] - m));
  for (double& v : p) v /= z;
  return p;
}

double loss_value(const std::vector<double>& logits, const LossSpec& spec) {
  const int n = static_cast<int>(logits.size());
  if (spec.label < 0 || spec.label >= n) throw Error("invalid class index " + std::to_string(spec.label));
  switch (spec.kind) {
    case LossSpec::Kind::CrossEntropy: {
      const double m = *std::max_element(logits.begin(), logits.end());
      double z = 0.0;
      for (double v : logits) z += std::exp(v - m);
      return m + std::log(z) - logits[spec.label];
    }
    case LossSpec::Kind::LogitDifference:
      if (spec.other < 0 || spec.other >= n) throw Error("invalid class index " + std::to_string(spec.other));
      return logits[spec.label] - logits[spec.other];
  }
  return 0.0;
}

std::vector<double> loss_logit_gradient(const std::vector<double>& logits, const LossSpec& spec) {
  const int n = static_cast<int>(logits.size());
  if (spec.label < 0 || spec.label >= n) throw Error("invalid class index " + std::to_string(spec.label));
  std::vector<double> g(n, 0.0);
  switch (spec.kind) {
    case LossSpec::Kind::CrossEntropy:
      g = softmax(logits);
      g[spec.label] -= 1.0;
      break;
    case LossSpec::Kind::LogitDifference:
      if (spec.other < 0 || spec.other >= n) throw Error("invalid class index " + std::to_string(spec.other));
      g[spec.label] += 1.0;
      g[spec.other] -= 1.0;
      break;
  }
  return g;
}

Tensor3 input_gradient(const GraphConvClassifier& model, const Tensor3& input, const LossSpec& spec) {
  auto fwd = forward(model, input);
  return backward(model, fwd.tape, loss_logit_gradient(fwd.logits, spec), false).input;
}

double accuracy(const GraphConvClassifier& model, const std::vector<Motion>& motions) {
  if (motions.empty()) return 0.0;
  int hits = 0;
  for (const auto& m : motions) hits += predict(model, m.coords()) == m.label().value_or(-1);
  return static_cast<double>(hits) / motions.size();
}

namespace {

struct SampleGrad {
  double loss = 0.0;
  bool correct = false;
  Gradients grads;
};

void add_scaled(Matrix& dst, const Matrix& src, double s) {
  for (std::size_t i = 0; i < dst.data.size(); ++i) dst.data[i] += s * src.data[i];
}

}  // namespace

std::vector<EpochStats> train(GraphConvClassifier& model, const Dataset& data, const TrainConfig& cfg,
                              const BatchTransform& transform, const EpochHook& hook) {
  if (data.train.empty()) throw Error("training set is empty");
  std::vector<EpochStats> history;
  if (cfg.epochs <= 0) return history;
  const auto test = data.test_motions();

  std::vector<Matrix> vel_w;
  for (const auto& w : model.weights()) vel_w.emplace_back(w.rows, w.cols);
  Matrix vel_head(model.head().rows, model.head().cols);
  std::vector<double> vel_bias(model.classes(), 0.0);

  Rng rng(cfg.seed);
  std::vector<int> order = data.train;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    double loss_sum = 0.0;
    int correct = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const int count = static_cast<int>(std::min<std::size_t>(cfg.batch_size, order.size() - start));
      std::vector<SampleGrad> per(count);
      // Per-sample gradients are independent; they are summed below in batch order.
#pragma omp parallel for schedule(dynamic)
      for (int b = 0; b < count; ++b) {
        const Motion& m = data.motions[order[start + b]];
        const int label = m.label().value();
        const std::uint64_t stream = mix_seed(cfg.seed, (static_cast<std::uint64_t>(epoch) << 32) + start + b);
        Tensor3 x = transform ? transform(model, m, label, stream) : m.coords();
        auto fwd = forward(model, x, Exec::Serial);
        LossSpec spec{LossSpec::Kind::CrossEntropy, label, 0};
        per[b].loss = loss_value(fwd.logits, spec);
        per[b].correct =
            std::max_element(fwd.logits.begin(), fwd.logits.end()) - fwd.logits.begin() == label;
        per[b].grads = backward(model, fwd.tape, loss_logit_gradient(fwd.logits, spec), true, Exec::Serial);
      }
      const double scale = 1.0 / count;
      std::vector<Matrix> gw;
      for (const auto& w : model.weights()) gw.emplace_back(w.rows, w.cols);
      Matrix gh(model.head().rows, model.head().cols);
      std::vector<double> gb(model.classes(), 0.0);
      for (const auto& s : per) {
        loss_sum += s.loss;
        correct += s.correct;
        for (std::size_t l = 0; l < gw.size(); ++l) add_scaled(gw[l], s.grads.weights[l], scale);
        add_scaled(gh, s.grads.head, scale);
        for (int c = 0; c < model.classes(); ++c) gb[c] += scale * s.grads.head_bias[c];
      }
      if (!std::isfinite(loss_sum)) {
        throw DivergenceError("training diverged: loss became non-finite in epoch " + std::to_string(epoch));
      }
      for (std::size_t l = 0; l < gw.size(); ++l) {
        auto& w = model.weights()[l].data;
        auto& v = vel_w[l].data;
        for (std::size_t i = 0; i < w.size(); ++i) {
          v[i] = cfg.momentum * v[i] - cfg.learning_rate * gw[l].data[i];
          w[i] += v[i];
        }
      }
      for (std::size_t i = 0; i < gh.data.size(); ++i) {
        vel_head.data[i] = cfg.momentum * vel_head.data[i] - cfg.learning_rate * gh.data[i];
        model.head().data[i] += vel_head.data[i];
      }
      for (int c = 0; c < model.classes(); ++c) {
        vel_bias[c] = cfg.momentum * vel_bias[c] - cfg.learning_rate * gb[c];
        model.head_bias()[c] += vel_bias[c];
      }
    }
    EpochStats st;
    st.epoch = epoch;
    st.loss = loss_sum / order.size();
    st.train_accuracy = static_cast<double>(correct) / order.size();
    st.test_accuracy = accuracy(model, test);
    if (!std::isfinite(st.loss)) {
      throw DivergenceError("training diverged: loss became non-finite in epoch " + std::to_string(epoch));
    }
    if (hook) hook(model, st);
    history.push_back(st);
  }
  return history;
}

namespace {

nlohmann::json matrix_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < m.rows; ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c < m.cols; ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const nlohmann::json& j, const std::string& field) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) throw FormatError("checkpoint field '" + field + "' must be a matrix");
  Matrix m(static_cast<int>(j.size()), static_cast<int>(j[0].size()));
  for (int r = 0; r < m.rows; ++r) {
    if (static_cast<int>(j[r].size()) != m.cols) throw FormatError("checkpoint field '" + field + "' is ragged");
    for (int c = 0; c < m.cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

}  // namespace

std::string checkpoint_to_json(const GraphConvClassifier& model) {
  const auto& cfg = model.config();
  nlohmann::json doc;
  doc["format_version"] = 1;
  doc["architecture"] = {{"topology", cfg.topology},
                         {"joints", cfg.joints},
                         {"in_dims", cfg.in_dims},
                         {"channels", cfg.channels},
                         {"classes", cfg.classes},
                         {"center_joint", cfg.center_joint}};
  doc["adjacency"] = matrix_json(model.adjacency());
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& w : model.weights()) layers.push_back(matrix_json(w));
  doc["layers"] = layers;
  doc["head"] = matrix_json(model.head());
  doc["head_bias"] = model.head_bias();
  return dump_json17(doc);
}

GraphConvClassifier checkpoint_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("malformed checkpoint: ") + e.what());
  }
  try {
    for (const char* key : {"architecture", "adjacency", "layers", "head", "head_bias"}) {
      if (!doc.contains(key)) throw FormatError(std::string("checkpoint: missing field '") + key + "'");
    }
    const auto& a = doc.at("architecture");
    NetConfig cfg;
    cfg.topology = a.at("topology").get<std::string>();
    cfg.joints = a.at("joints").get<int>();
    cfg.in_dims = a.at("in_dims").get<int>();
    cfg.channels = a.at("channels").get<std::vector<int>>();
    cfg.classes = a.at("classes").get<int>();
    cfg.center_joint = a.value("center_joint", -1);
    std::vector<Matrix> layers;
    for (std::size_t l = 0; l < doc.at("layers").size(); ++l) {
      layers.push_back(matrix_from_json(doc.at("layers")[l], "layers[" + std::to_string(l) + "]"));
    }
    return GraphConvClassifier(cfg, matrix_from_json(doc.at("adjacency"), "adjacency"), std::move(layers),
                               matrix_from_json(doc.at("head"), "head"),
                               doc.at("head_bias").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint: wrong field type: ") + e.what());
  }
}

void save_checkpoint(const GraphConvClassifier& model, const std::filesystem::path& path) {
  write_file_atomic(path, checkpoint_to_json(model));
}

GraphConvClassifier load_checkpoint(const std::filesystem::path& path) {
  return checkpoint_from_json(read_file(path));
}

}  // namespace skeladv
