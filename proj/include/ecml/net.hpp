#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ecml/data.hpp"
#include "ecml/losses.hpp"
#include "ecml/opinion.hpp"

namespace ecml {

enum class EvidenceHead { softplus, relu };
enum class OptimizerKind { adam, sgd };

const char* head_name(EvidenceHead head);
EvidenceHead parse_head(std::string_view name);
const char* optimizer_name(OptimizerKind kind);
OptimizerKind parse_optimizer(std::string_view name);

struct NetConfig {
  std::vector<std::size_t> input_dims;      ///< D_v per view
  std::vector<std::size_t> hidden{64};      ///< hidden widths, shared by every view
  std::size_t num_classes = 2;
  EvidenceHead head = EvidenceHead::softplus;
  OptimizerKind optimizer = OptimizerKind::adam;
  std::uint64_t seed = 0;
  double learning_rate = 3e-3;
  int epochs = 100;
  std::size_t batch_size = 32;

  void validate() const;
  /// D_v, hidden..., K
  std::vector<std::size_t> layer_sizes(std::size_t view) const;
};

/// Fully connected layer, weights row-major (out x in).
struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weight;
  std::vector<double> bias;

  DenseLayer() = default;
  DenseLayer(std::size_t in_dim, std::size_t out_dim)
      : in(in_dim), out(out_dim), weight(in_dim * out_dim, 0.0), bias(out_dim, 0.0) {}

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// One layer stack per view. Also used for gradients and optimizer moments.
using ParameterSet = std::vector<std::vector<DenseLayer>>;

struct ForwardResult {
  std::vector<Evidence> evidence;   ///< per view
  std::vector<Opinion> opinions;    ///< per view
  Evidence fused_evidence;
  Opinion fused;
};

struct Prediction {
  Decision decision;
  Opinion fused;
  std::vector<Opinion> opinions;
  std::vector<std::vector<double>> conflict;  ///< V x V conflictive degrees
};

struct BackwardResult {
  LossBreakdown loss;
  ParameterSet gradients;
  ForwardResult forward;
};

struct EpochRecord {
  int epoch = 0;
  double lambda = 0.0;
  LossBreakdown loss;  ///< batch-averaged over the epoch
  double train_accuracy = 0.0;
};

struct TrainTrace {
  std::vector<EpochRecord> epochs;
};

class EvidentialNet {
 public:
  /// Builds the per-view layer stacks with seeded fan-in scaled uniform init.
  explicit EvidentialNet(NetConfig config);
  /// Restores a network from stored parameters (shapes are checked).
  EvidentialNet(NetConfig config, ParameterSet parameters);

  const NetConfig& config() const { return config_; }
  const ParameterSet& parameters() const { return params_; }
  ParameterSet& mutable_parameters() { return params_; }
  std::size_t num_views() const { return params_.size(); }

  ForwardResult forward(const Instance& instance) const;

  /// Loss of one instance and its gradient with respect to every parameter.
  BackwardResult backward(const Instance& instance, std::span<const double> y, int epoch,
                          const LossConfig& loss) const;

  Prediction predict(const Instance& instance) const;

  /// Applies one optimizer step with the given (batch-averaged) gradients.
  void apply_gradients(const ParameterSet& gradients);

  friend bool operator==(const EvidentialNet& lhs, const EvidentialNet& rhs) {
    return lhs.params_ == rhs.params_;
  }

 private:
  NetConfig config_;
  ParameterSet params_;
  ParameterSet first_moment_;
  ParameterSet second_moment_;
  std::uint64_t steps_ = 0;
};

/// Zero-filled parameter set with the same shapes.
ParameterSet zeros_like(const ParameterSet& params);

/// Mini-batch training with epochs numbered from 1. The shuffle order is a
/// function of the net seed. Throws std::invalid_argument for an empty or
/// mismatched dataset and std::runtime_error on a non-finite loss.
TrainTrace train(EvidentialNet& net, const MultiViewDataset& dataset, const LossConfig& loss);

}  // namespace ecml
