#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ecml/opinion.hpp"

// Training objective for evidential multi-view classification:
//
//   L = L_acc(alpha_fused) + beta * sum_v L_acc(alpha_v) + gamma * L_con
//   L_acc = L_ace + lambda_t * L_KL,   lambda_t = min(1, t / T)
//
// Labels are one-hot vectors; the functions throw std::invalid_argument for
// anything else.

namespace ecml {

struct LossConfig {
  int annealing_step = 10;  ///< T, in epochs
  double beta = 1.0;        ///< weight of the per-view terms
  double gamma = 1.0;       ///< weight of the consistency term

  void validate() const;
};

struct LossBreakdown {
  double ace = 0.0;          ///< fused-opinion adjusted cross entropy
  double kl = 0.0;           ///< fused-opinion KL regulariser
  double acc = 0.0;          ///< ace + lambda * kl
  double view_acc = 0.0;     ///< sum over views of the per-view acc terms
  double consistency = 0.0;  ///< pairwise conflictive degree term
  double total = 0.0;
  double lambda = 0.0;
};

std::vector<double> one_hot(std::size_t label, std::size_t num_classes);

/// Index of the hot entry; throws std::invalid_argument if y is not one-hot.
std::size_t hot_index(std::span<const double> y);

/// sum_j y_j (psi(S) - psi(alpha_j))
double ace_loss(const DirichletParams& alpha, std::span<const double> y);

/// KL[ Dir(alpha~) || Dir(1) ] with alpha~ = y + (1 - y) * alpha.
double kl_loss(const DirichletParams& alpha, std::span<const double> y);

double annealing_coefficient(int epoch, int annealing_step);

double acc_loss(const DirichletParams& alpha, std::span<const double> y, int epoch,
                const LossConfig& config);

/// (1 / (V - 1)) sum_p sum_{q != p} c(w_p, w_q). Every unordered pair counts
/// twice. Zero for V < 2.
double consistency_loss(std::span<const Opinion> opinions);

LossBreakdown total_loss(const DirichletParams& fused_alpha,
                         std::span<const DirichletParams> view_alphas,
                         std::span<const Opinion> view_opinions, std::span<const double> y,
                         int epoch, const LossConfig& config);

/// d acc_loss / d alpha.
std::vector<double> grad_acc_loss(const DirichletParams& alpha, std::span<const double> y,
                                  int epoch, const LossConfig& config);

/// d consistency_loss / d alpha_v for every view. The opinions must be the
/// evidence-backed opinions of the given Dirichlet parameters. |x| uses the
/// subgradient sign(0) = 0.
std::vector<std::vector<double>> grad_consistency_loss(std::span<const Opinion> opinions,
                                                       std::span<const DirichletParams> alphas);

}  // namespace ecml
