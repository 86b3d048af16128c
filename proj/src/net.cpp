#include "ecml/net.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>

#include "ecml/random.hpp"

namespace ecml {
namespace {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEpsilon = 1e-8;

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }
double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Pre-activations and layer inputs of one view, kept for the backward pass.
struct ViewTrace {
  std::vector<std::vector<double>> inputs;  // inputs[l] feeds layer l
  std::vector<double> logits;
  std::vector<double> evidence;
};

ViewTrace run_view(const std::vector<DenseLayer>& layers, std::span<const double> x,
                   EvidenceHead head) {
  ViewTrace trace;
  trace.inputs.reserve(layers.size());
  trace.inputs.emplace_back(x.begin(), x.end());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    const auto& in = trace.inputs.back();
    std::vector<double> out(layer.bias);
    for (std::size_t o = 0; o < layer.out; ++o) {
      const double* w = layer.weight.data() + o * layer.in;
      double acc = 0.0;
      for (std::size_t i = 0; i < layer.in; ++i) acc += w[i] * in[i];
      out[o] += acc;
    }
    if (l + 1 < layers.size()) {
      for (double& v : out) v = std::max(v, 0.0);
      trace.inputs.push_back(std::move(out));
    } else {
      trace.logits = std::move(out);
    }
  }
  trace.evidence.resize(trace.logits.size());
  for (std::size_t k = 0; k < trace.logits.size(); ++k) {
    trace.evidence[k] = head == EvidenceHead::softplus ? softplus(trace.logits[k])
                                                       : std::max(trace.logits[k], 0.0);
  }
  return trace;
}

void backprop_view(const std::vector<DenseLayer>& layers, const ViewTrace& trace,
                   std::span<const double> grad_evidence, EvidenceHead head,
                   std::vector<DenseLayer>& grads) {
  std::vector<double> delta(grad_evidence.size());
  for (std::size_t k = 0; k < delta.size(); ++k) {
    const double slope = head == EvidenceHead::softplus ? sigmoid(trace.logits[k])
                                                        : (trace.logits[k] > 0.0 ? 1.0 : 0.0);
    delta[k] = grad_evidence[k] * slope;
  }
  for (std::size_t l = layers.size(); l-- > 0;) {
    const auto& layer = layers[l];
    auto& g = grads[l];
    const auto& in = trace.inputs[l];
    for (std::size_t o = 0; o < layer.out; ++o) {
      g.bias[o] += delta[o];
      double* gw = g.weight.data() + o * layer.in;
      for (std::size_t i = 0; i < layer.in; ++i) gw[i] += delta[o] * in[i];
    }
    if (l == 0) break;
    std::vector<double> next(layer.in, 0.0);
    for (std::size_t o = 0; o < layer.out; ++o) {
      const double* w = layer.weight.data() + o * layer.in;
      for (std::size_t i = 0; i < layer.in; ++i) next[i] += w[i] * delta[o];
    }
    // in = relu(pre), so the mask is in > 0.
    for (std::size_t i = 0; i < layer.in; ++i) {
      if (!(in[i] > 0.0)) next[i] = 0.0;
    }
    delta = std::move(next);
  }
}

void check_instance(const NetConfig& config, const Instance& instance) {
  if (instance.size() != config.input_dims.size()) {
    throw std::invalid_argument("instance has " + std::to_string(instance.size()) +
                                " views, network expects " +
                                std::to_string(config.input_dims.size()));
  }
  for (std::size_t v = 0; v < instance.size(); ++v) {
    if (instance[v].size() != config.input_dims[v]) {
      throw std::invalid_argument("view " + std::to_string(v) + " has dimension " +
                                  std::to_string(instance[v].size()) + ", expected " +
                                  std::to_string(config.input_dims[v]));
    }
  }
}

ForwardResult assemble(const std::vector<ViewTrace>& traces) {
  std::vector<Evidence> evidence;
  std::vector<Opinion> opinions;
  for (const auto& t : traces) {
    evidence.emplace_back(t.evidence);
    opinions.push_back(evidence_to_opinion(evidence.back()));
  }
  Evidence fused_evidence = fuse_evidence(evidence);
  Opinion fused = evidence_to_opinion(fused_evidence);
  return ForwardResult{std::move(evidence), std::move(opinions), std::move(fused_evidence),
                       std::move(fused)};
}

}  // namespace

const char* head_name(EvidenceHead head) {
  return head == EvidenceHead::softplus ? "softplus" : "relu";
}

EvidenceHead parse_head(std::string_view name) {
  if (name == "softplus") return EvidenceHead::softplus;
  if (name == "relu") return EvidenceHead::relu;
  throw std::invalid_argument("unknown evidence head '" + std::string(name) + "'");
}

const char* optimizer_name(OptimizerKind kind) {
  return kind == OptimizerKind::adam ? "adam" : "sgd";
}

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "adam") return OptimizerKind::adam;
  if (name == "sgd") return OptimizerKind::sgd;
  throw std::invalid_argument("unknown optimizer '" + std::string(name) + "'");
}

void NetConfig::validate() const {
  if (input_dims.empty()) throw std::invalid_argument("network needs at least one view");
  for (auto d : input_dims) {
    if (d == 0) throw std::invalid_argument("view input dimension must be positive");
  }
  for (auto h : hidden) {
    if (h == 0) throw std::invalid_argument("hidden widths must be positive");
  }
  if (num_classes < 2) throw std::invalid_argument("network needs at least two classes");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (epochs < 1) throw std::invalid_argument("epochs must be positive");
  if (batch_size == 0) throw std::invalid_argument("batch size must be positive");
}

std::vector<std::size_t> NetConfig::layer_sizes(std::size_t view) const {
  std::vector<std::size_t> sizes{input_dims.at(view)};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(num_classes);
  return sizes;
}

ParameterSet zeros_like(const ParameterSet& params) {
  ParameterSet out;
  out.reserve(params.size());
  for (const auto& view : params) {
    auto& layers = out.emplace_back();
    for (const auto& layer : view) layers.emplace_back(layer.in, layer.out);
  }
  return out;
}

EvidentialNet::EvidentialNet(NetConfig config) : config_(std::move(config)) {
  config_.validate();
  Rng rng(derive_seed(config_.seed, "init"));
  for (std::size_t v = 0; v < config_.input_dims.size(); ++v) {
    const auto sizes = config_.layer_sizes(v);
    auto& layers = params_.emplace_back();
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
      DenseLayer layer(sizes[l], sizes[l + 1]);
      const double bound = 1.0 / std::sqrt(static_cast<double>(sizes[l]));
      for (double& w : layer.weight) w = rng.uniform(-bound, bound);
      for (double& b : layer.bias) b = rng.uniform(-bound, bound);
      layers.push_back(std::move(layer));
    }
  }
  first_moment_ = zeros_like(params_);
  second_moment_ = zeros_like(params_);
}

EvidentialNet::EvidentialNet(NetConfig config, ParameterSet parameters)
    : config_(std::move(config)), params_(std::move(parameters)) {
  config_.validate();
  if (params_.size() != config_.input_dims.size()) {
    throw std::invalid_argument("parameter set has the wrong number of views");
  }
  for (std::size_t v = 0; v < params_.size(); ++v) {
    const auto sizes = config_.layer_sizes(v);
    if (params_[v].size() + 1 != sizes.size()) {
      throw std::invalid_argument("view " + std::to_string(v) + " has the wrong number of layers");
    }
    for (std::size_t l = 0; l < params_[v].size(); ++l) {
      const auto& layer = params_[v][l];
      if (layer.in != sizes[l] || layer.out != sizes[l + 1] ||
          layer.weight.size() != layer.in * layer.out || layer.bias.size() != layer.out) {
        throw std::invalid_argument("view " + std::to_string(v) + " layer " + std::to_string(l) +
                                    " has the wrong shape");
      }
    }
  }
  first_moment_ = zeros_like(params_);
  second_moment_ = zeros_like(params_);
}

ForwardResult EvidentialNet::forward(const Instance& instance) const {
  check_instance(config_, instance);
  std::vector<ViewTrace> traces;
  for (std::size_t v = 0; v < params_.size(); ++v) {
    traces.push_back(run_view(params_[v], instance[v], config_.head));
  }
  return assemble(traces);
}

BackwardResult EvidentialNet::backward(const Instance& instance, std::span<const double> y,
                                       int epoch, const LossConfig& loss) const {
  check_instance(config_, instance);
  std::vector<ViewTrace> traces;
  for (std::size_t v = 0; v < params_.size(); ++v) {
    traces.push_back(run_view(params_[v], instance[v], config_.head));
  }
  ForwardResult fwd = assemble(traces);

  const std::size_t views = params_.size();
  std::vector<DirichletParams> view_alphas;
  for (const auto& e : fwd.evidence) view_alphas.push_back(DirichletParams::from_evidence(e));
  const auto fused_alpha = DirichletParams::from_evidence(fwd.fused_evidence);

  const LossBreakdown breakdown =
      total_loss(fused_alpha, view_alphas, fwd.opinions, y, epoch, loss);

  // d alpha / d e = 1 and the fused evidence is the mean of the views.
  const auto fused_grad = grad_acc_loss(fused_alpha, y, epoch, loss);
  const auto consistency_grad =
      loss.gamma > 0.0 ? grad_consistency_loss(fwd.opinions, view_alphas)
                       : std::vector<std::vector<double>>{};
  ParameterSet gradients = zeros_like(params_);
  const double share = 1.0 / static_cast<double>(views);
  for (std::size_t v = 0; v < views; ++v) {
    std::vector<double> grad_e(fused_grad.size());
    const auto view_grad =
        loss.beta > 0.0 ? grad_acc_loss(view_alphas[v], y, epoch, loss) : std::vector<double>{};
    for (std::size_t k = 0; k < grad_e.size(); ++k) {
      grad_e[k] = share * fused_grad[k];
      if (loss.beta > 0.0) grad_e[k] += loss.beta * view_grad[k];
      if (loss.gamma > 0.0) grad_e[k] += loss.gamma * consistency_grad[v][k];
    }
    backprop_view(params_[v], traces[v], grad_e, config_.head, gradients[v]);
  }
  return BackwardResult{breakdown, std::move(gradients), std::move(fwd)};
}

Prediction EvidentialNet::predict(const Instance& instance) const {
  auto fwd = forward(instance);
  Prediction p{decide(fwd.fused), fwd.fused, fwd.opinions, conflict_matrix(fwd.opinions)};
  return p;
}

void EvidentialNet::apply_gradients(const ParameterSet& gradients) {
  ++steps_;
  const double lr = config_.learning_rate;
  const double correction1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(steps_));
  const double correction2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(steps_));
  auto update = [&](std::vector<double>& param, const std::vector<double>& grad,
                    std::vector<double>& m, std::vector<double>& s) {
    for (std::size_t i = 0; i < param.size(); ++i) {
      if (config_.optimizer == OptimizerKind::sgd) {
        param[i] -= lr * grad[i];
        continue;
      }
      m[i] = kAdamBeta1 * m[i] + (1.0 - kAdamBeta1) * grad[i];
      s[i] = kAdamBeta2 * s[i] + (1.0 - kAdamBeta2) * grad[i] * grad[i];
      const double m_hat = m[i] / correction1;
      const double s_hat = s[i] / correction2;
      param[i] -= lr * m_hat / (std::sqrt(s_hat) + kAdamEpsilon);
    }
  };
  for (std::size_t v = 0; v < params_.size(); ++v) {
    for (std::size_t l = 0; l < params_[v].size(); ++l) {
      auto& p = params_[v][l];
      const auto& g = gradients.at(v).at(l);
      update(p.weight, g.weight, first_moment_[v][l].weight, second_moment_[v][l].weight);
      update(p.bias, g.bias, first_moment_[v][l].bias, second_moment_[v][l].bias);
    }
  }
}

TrainTrace train(EvidentialNet& net, const MultiViewDataset& dataset, const LossConfig& loss) {
  loss.validate();
  const auto& config = net.config();
  if (dataset.size() == 0) throw std::invalid_argument("train: empty dataset");
  if (dataset.view_dims() != config.input_dims || dataset.num_classes() != config.num_classes) {
    throw std::invalid_argument("train: dataset shape does not match the network");
  }

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(config.seed, "shuffle"));

  TrainTrace trace;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(order);
    EpochRecord record;
    record.epoch = epoch;
    record.lambda = annealing_coefficient(epoch, loss.annealing_step);
    std::size_t correct = 0;

    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      ParameterSet batch_grad = zeros_like(net.parameters());
      for (std::size_t i = start; i < stop; ++i) {
        const std::size_t n = order[i];
        const auto y = dataset.one_hot(n);
        std::optional<BackwardResult> result;
        try {
          result = net.backward(dataset.instance(n), y, epoch, loss);
        } catch (const std::invalid_argument& e) {
          // Shapes were checked above, so this is overflowing evidence.
          throw std::runtime_error("non-finite evidence at epoch " + std::to_string(epoch) +
                                   ", instance " + std::to_string(n) + ": " + e.what());
        }
        if (!std::isfinite(result->loss.total)) {
          throw std::runtime_error("non-finite loss at epoch " + std::to_string(epoch) +
                                   ", instance " + std::to_string(n));
        }
        record.loss.ace += result->loss.ace;
        record.loss.kl += result->loss.kl;
        record.loss.acc += result->loss.acc;
        record.loss.view_acc += result->loss.view_acc;
        record.loss.consistency += result->loss.consistency;
        record.loss.total += result->loss.total;
        if (decide(result->forward.fused).label == dataset.label(n)) ++correct;
        for (std::size_t v = 0; v < batch_grad.size(); ++v) {
          for (std::size_t l = 0; l < batch_grad[v].size(); ++l) {
            auto& acc = batch_grad[v][l];
            const auto& g = result->gradients[v][l];
            for (std::size_t j = 0; j < acc.weight.size(); ++j) acc.weight[j] += g.weight[j];
            for (std::size_t j = 0; j < acc.bias.size(); ++j) acc.bias[j] += g.bias[j];
          }
        }
      }
      const double scale = 1.0 / static_cast<double>(stop - start);
      for (auto& view : batch_grad) {
        for (auto& layer : view) {
          for (double& g : layer.weight) g *= scale;
          for (double& g : layer.bias) g *= scale;
        }
      }
      net.apply_gradients(batch_grad);
    }

    const double n = static_cast<double>(dataset.size());
    record.loss.ace /= n;
    record.loss.kl /= n;
    record.loss.acc /= n;
    record.loss.view_acc /= n;
    record.loss.consistency /= n;
    record.loss.total /= n;
    record.loss.lambda = record.lambda;
    record.train_accuracy = static_cast<double>(correct) / n;
    trace.epochs.push_back(record);
  }
  return trace;
}

}  // namespace ecml
