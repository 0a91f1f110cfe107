#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "skeladv/kernels.hpp"
#include "skeladv/motion.hpp"
#include "skeladv/tensor.hpp"
#include "skeladv/topology.hpp"

namespace skeladv {

struct Dataset;

struct NetConfig {
  std::string topology = "ntu25";
  int joints = 25;
  int in_dims = 3;
  std::vector<int> channels{16, 32};
  int classes = 5;
  /// Joint subtracted from every joint of its frame before the first layer (−1: none).
  int center_joint = 20;

  bool operator==(const NetConfig&) const = default;
};

/// Defaults for a topology: its joint count and root as the centering joint.
NetConfig default_net_config(const Topology& topo, int classes);

/// Graph-convolution classifier: per frame H^{l+1} = relu(Â·H^l·W^l), mean pooling over
/// frames and joints, then a linear head with bias. H^0 holds the joint coordinates, taken
/// relative to `center_joint` when one is configured.
class GraphConvClassifier {
 public:
  /// He-uniform initialization from a seeded mt19937_64 stream; head bias starts at zero.
  GraphConvClassifier(NetConfig config, const Topology& topo, std::uint64_t seed);
  /// Takes explicit weights (used by checkpoint loading and tests).
  GraphConvClassifier(NetConfig config, Matrix adjacency, std::vector<Matrix> weights, Matrix head,
                      std::vector<double> head_bias);

  const NetConfig& config() const { return config_; }
  int layer_count() const { return static_cast<int>(weights_.size()); }
  int classes() const { return config_.classes; }
  const Matrix& adjacency() const { return adjacency_; }
  const std::vector<Matrix>& weights() const { return weights_; }
  std::vector<Matrix>& weights() { return weights_; }
  /// classes × C_L
  const Matrix& head() const { return head_; }
  Matrix& head() { return head_; }
  const std::vector<double>& head_bias() const { return head_bias_; }
  std::vector<double>& head_bias() { return head_bias_; }

  bool operator==(const GraphConvClassifier&) const = default;

 private:
  void check() const;

  NetConfig config_;
  Matrix adjacency_;
  std::vector<Matrix> weights_;
  Matrix head_;
  std::vector<double> head_bias_;
};

/// Cached forward pass. features[l] is F^l (post-activation output of conv layer l).
struct FeatureTape {
  Tensor3 input;  // H^0 (after centering)
  std::vector<Tensor3> aggregated;  // Â·H^l
  std::vector<Tensor3> pre;         // Â·H^l·W^l
  std::vector<Tensor3> features;    // relu(pre)
  std::vector<double> pooled;
};

struct ForwardResult {
  std::vector<double> logits;
  FeatureTape tape;
};

ForwardResult forward(const GraphConvClassifier& model, const Tensor3& input, Exec exec = Exec::Parallel);
std::vector<double> logits(const GraphConvClassifier& model, const Tensor3& input, Exec exec = Exec::Parallel);
int predict(const GraphConvClassifier& model, const Tensor3& input);

struct Gradients {
  std::vector<Tensor3> features;  // ∂y/∂F^l, same layout as the tape
  Tensor3 input;                  // ∂y/∂x
  std::vector<Matrix> weights;    // ∂y/∂W^l (only when requested)
  Matrix head;
  std::vector<double> head_bias;
};

/// Reverse pass for an arbitrary upstream gradient over the logits.
Gradients backward(const GraphConvClassifier& model, const FeatureTape& tape,
                   const std::vector<double>& grad_logits, bool parameter_grads,
                   Exec exec = Exec::Parallel);

/// ∂y^c/∂F^l for every layer l.
std::vector<Tensor3> feature_gradients(const GraphConvClassifier& model, const FeatureTape& tape, int cls);

/// Scalar objectives over the logits whose input gradients are exposed.
struct LossSpec {
  enum class Kind {
    CrossEntropy,     // -log softmax(y)[label]
    LogitDifference,  // y[label] - y[other]
  };
  Kind kind = Kind::CrossEntropy;
  int label = 0;
  int other = 0;
};

double loss_value(const std::vector<double>& logits, const LossSpec& spec);
std::vector<double> loss_logit_gradient(const std::vector<double>& logits, const LossSpec& spec);

/// ∂loss/∂x over the T×N×D input.
Tensor3 input_gradient(const GraphConvClassifier& model, const Tensor3& input, const LossSpec& spec);

std::vector<double> softmax(const std::vector<double>& logits);

struct TrainConfig {
  int epochs = 30;
  double learning_rate = 0.05;
  double momentum = 0.9;
  int batch_size = 16;
  std::uint64_t seed = 1;
};

struct EpochStats {
  int epoch = 0;
  double loss = 0.0;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  /// Filled by an epoch hook when one measures it; negative otherwise.
  double robust_accuracy = -1.0;
};

/// Raised when the training loss stops being finite.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// Maps each training motion to the input actually fed to the gradient step (identity for
/// plain training, inner maximization for adversarial training). `stream` is a per-sample
/// random-stream id derived from the training seed, epoch and batch position.
using BatchTransform = std::function<Tensor3(const GraphConvClassifier& model, const Motion& motion,
                                             int label, std::uint64_t stream)>;

/// Called after every epoch with the updated model; may add statistics.
using EpochHook = std::function<void(const GraphConvClassifier& model, EpochStats& stats)>;

/// Mini-batch SGD with momentum on cross-entropy. Deterministic given the seed.
std::vector<EpochStats> train(GraphConvClassifier& model, const Dataset& data, const TrainConfig& cfg,
                              const BatchTransform& transform = {}, const EpochHook& hook = {});

double accuracy(const GraphConvClassifier& model, const std::vector<Motion>& motions);

void save_checkpoint(const GraphConvClassifier& model, const std::filesystem::path& path);
GraphConvClassifier load_checkpoint(const std::filesystem::path& path);
std::string checkpoint_to_json(const GraphConvClassifier& model);
GraphConvClassifier checkpoint_from_json(const std::string& text);

}  // namespace skeladv
