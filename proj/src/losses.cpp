#include "ecml/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ecml/numerics.hpp"

namespace ecml {
namespace {

using numerics::digamma;
using numerics::log_gamma;
using numerics::trigamma;

std::size_t checked_label(const DirichletParams& alpha, std::span<const double> y) {
  if (y.size() != alpha.num_classes()) {
    throw std::invalid_argument("label length " + std::to_string(y.size()) +
                                " does not match class count " +
                                std::to_string(alpha.num_classes()));
  }
  return hot_index(y);
}

double sign(double x) { return (x > 0.0) - (x < 0.0); }

}  // namespace

void LossConfig::validate() const {
  if (annealing_step < 1) {
    throw std::invalid_argument("annealing step must be >= 1");
  }
  if (!(beta >= 0.0) || !(gamma >= 0.0)) {
    throw std::invalid_argument("loss weights beta and gamma must be >= 0");
  }
}

std::vector<double> one_hot(std::size_t label, std::size_t num_classes) {
  if (label >= num_classes) {
    throw std::invalid_argument("label out of range");
  }
  std::vector<double> y(num_classes, 0.0);
  y[label] = 1.0;
  return y;
}

std::size_t hot_index(std::span<const double> y) {
  std::size_t hot = y.size();
  for (std::size_t k = 0; k < y.size(); ++k) {
    if (y[k] == 1.0 && hot == y.size()) {
      hot = k;
    } else if (y[k] != 0.0) {
      throw std::invalid_argument("label is not one-hot");
    }
  }
  if (hot == y.size()) {
    throw std::invalid_argument("label is not one-hot");
  }
  return hot;
}

double ace_loss(const DirichletParams& alpha, std::span<const double> y) {
  const std::size_t label = checked_label(alpha, y);
  return digamma(alpha.strength()) - digamma(alpha[label]);
}

double kl_loss(const DirichletParams& alpha, std::span<const double> y) {
  const std::size_t label = checked_label(alpha, y);
  const std::size_t k = alpha.num_classes();
  double strength = 0.0;
  std::vector<double> tilde(k);
  for (std::size_t i = 0; i < k; ++i) {
    tilde[i] = i == label ? 1.0 : alpha[i];
    strength += tilde[i];
  }
  const double psi_strength = digamma(strength);
  double value = log_gamma(strength) - log_gamma(static_cast<double>(k));
  for (std::size_t i = 0; i < k; ++i) {
    if (tilde[i] == 1.0) {
      continue;  // log Gamma(1) = 0 and the (alpha - 1) factor vanishes
    }
    value += (tilde[i] - 1.0) * (digamma(tilde[i]) - psi_strength) - log_gamma(tilde[i]);
  }
  // Exact zero when no misleading evidence is left; rounding can otherwise
  // leave a tiny negative residue.
  return std::max(value, 0.0);
}

double annealing_coefficient(int epoch, int annealing_step) {
  if (annealing_step < 1) {
    throw std::invalid_argument("annealing step must be >= 1");
  }
  if (epoch <= 0) {
    return 0.0;
  }
  return std::min(1.0, static_cast<double>(epoch) / static_cast<double>(annealing_step));
}

double acc_loss(const DirichletParams& alpha, std::span<const double> y, int epoch,
                const LossConfig& config) {
  const double lambda = annealing_coefficient(epoch, config.annealing_step);
  const double ace = ace_loss(alpha, y);
  return lambda == 0.0 ? ace : ace + lambda * kl_loss(alpha, y);
}

double consistency_loss(std::span<const Opinion> opinions) {
  const std::size_t views = opinions.size();
  if (views < 2) {
    return 0.0;
  }
  double total = 0.0;
  for (std::size_t p = 0; p < views; ++p) {
    for (std::size_t q = 0; q < views; ++q) {
      if (p != q) {
        total += conflictive_degree(opinions[p], opinions[q]);
      }
    }
  }
  return total / static_cast<double>(views - 1);
}

LossBreakdown total_loss(const DirichletParams& fused_alpha,
                         std::span<const DirichletParams> view_alphas,
                         std::span<const Opinion> view_opinions, std::span<const double> y,
                         int epoch, const LossConfig& config) {
  if (view_alphas.size() != view_opinions.size()) {
    throw std::invalid_argument("total_loss: view count mismatch");
  }
  LossBreakdown out;
  out.lambda = annealing_coefficient(epoch, config.annealing_step);
  out.ace = ace_loss(fused_alpha, y);
  out.kl = kl_loss(fused_alpha, y);
  out.acc = out.ace + out.lambda * out.kl;
  for (const auto& alpha : view_alphas) {
    out.view_acc += acc_loss(alpha, y, epoch, config);
  }
  out.consistency = consistency_loss(view_opinions);
  out.total = out.acc + config.beta * out.view_acc + config.gamma * out.consistency;
  return out;
}

std::vector<double> grad_acc_loss(const DirichletParams& alpha, std::span<const double> y,
                                  int epoch, const LossConfig& config) {
  const std::size_t label = checked_label(alpha, y);
  const std::size_t k = alpha.num_classes();
  const double lambda = annealing_coefficient(epoch, config.annealing_step);

  std::vector<double> grad(k, trigamma(alpha.strength()));
  grad[label] -= trigamma(alpha[label]);

  if (lambda > 0.0) {
    // alpha~ pins the label entry to 1, so only the other entries move:
    //   dKL/dalpha_i = (alpha_i - 1) psi'(alpha_i) - (S~ - K) psi'(S~)
    double tilde_strength = 1.0;
    for (std::size_t i = 0; i < k; ++i) {
      if (i != label) {
        tilde_strength += alpha[i];
      }
    }
    const double shared = (tilde_strength - static_cast<double>(k)) * trigamma(tilde_strength);
    for (std::size_t i = 0; i < k; ++i) {
      if (i != label) {
        grad[i] += lambda * ((alpha[i] - 1.0) * trigamma(alpha[i]) - shared);
      }
    }
  }
  return grad;
}

std::vector<std::vector<double>> grad_consistency_loss(std::span<const Opinion> opinions,
                                                       std::span<const DirichletParams> alphas) {
  const std::size_t views = opinions.size();
  if (alphas.size() != views) {
    throw std::invalid_argument("grad_consistency_loss: view count mismatch");
  }
  std::vector<std::vector<double>> grads;
  grads.reserve(views);
  for (const auto& alpha : alphas) {
    grads.emplace_back(alpha.num_classes(), 0.0);
  }
  if (views < 2) {
    return grads;
  }

  std::vector<ProjectedProbability> projected;
  projected.reserve(views);
  for (const auto& w : opinions) {
    projected.push_back(project(w));
  }

  // For evidence-backed opinions p_k = (alpha_k - 1 + a_k K) / S and u = K / S:
  //   dp_k/dalpha_j = (delta_kj - p_k) / S,   du/dalpha_j = -u / S.
  const double scale = 2.0 / static_cast<double>(views - 1);
  const std::size_t k = alphas.front().num_classes();
  std::vector<double> signs(k);
  for (std::size_t p = 0; p < views; ++p) {
    for (std::size_t q = p + 1; q < views; ++q) {
      const auto& pp = projected[p];
      const auto& pq = projected[q];
      double distance = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        signs[i] = sign(pp[i] - pq[i]);
        distance += std::abs(pp[i] - pq[i]);
      }
      distance /= 2.0;
      const double up = opinions[p].uncertainty();
      const double uq = opinions[q].uncertainty();
      const double certainty = (1.0 - up) * (1.0 - uq);

      double dot_p = 0.0;
      double dot_q = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        dot_p += signs[i] * pp[i];
        dot_q += signs[i] * pq[i];
      }
      const double sp = alphas[p].strength();
      const double sq = alphas[q].strength();
      const double certainty_p = distance * (1.0 - uq) * up / sp;
      const double certainty_q = distance * (1.0 - up) * uq / sq;
      for (std::size_t j = 0; j < k; ++j) {
        grads[p][j] += scale * (certainty * (signs[j] - dot_p) / (2.0 * sp) + certainty_p);
        grads[q][j] += scale * (-certainty * (signs[j] - dot_q) / (2.0 * sq) + certainty_q);
      }
    }
  }
  return grads;
}

}  // namespace ecml
