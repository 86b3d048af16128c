#pragma once

#include <cstddef>
#include <span>
#include <vector>

// Subjective-logic opinions backed by Dirichlet evidence.
//
// An opinion over K classes is the triple (b, u, a): belief masses b,
// uncertainty mass u and base rates a, with sum(b) + u = 1. Evidence e >= 0
// maps to Dirichlet parameters alpha = e + 1 and to the opinion
// b = e / S, u = K / S, where S = sum(alpha).

namespace ecml {

/// Tolerance used when validating externally supplied simplex vectors.
inline constexpr double kSimplexTolerance = 1e-9;

class Evidence {
 public:
  /// Throws std::invalid_argument unless K >= 2 and every entry is finite and >= 0.
  explicit Evidence(std::vector<double> values);

  std::size_t num_classes() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t k) const { return values_[k]; }

 private:
  std::vector<double> values_;
};

class DirichletParams {
 public:
  /// Throws std::invalid_argument unless K >= 2 and every alpha_k >= 1.
  explicit DirichletParams(std::vector<double> alpha);
  static DirichletParams from_evidence(const Evidence& evidence);

  std::size_t num_classes() const { return alpha_.size(); }
  std::span<const double> alpha() const { return alpha_; }
  double operator[](std::size_t k) const { return alpha_[k]; }
  double strength() const { return strength_; }

 private:
  std::vector<double> alpha_;
  double strength_ = 0.0;
};

class Opinion {
 public:
  /// Validates b >= 0, u >= 0, sum(b) + u = 1, a >= 0, sum(a) = 1 (all within
  /// kSimplexTolerance) and matching lengths >= 2. Throws std::invalid_argument.
  Opinion(std::vector<double> belief, double uncertainty, std::vector<double> base_rate);

  /// The opinion with no evidence at all: b = 0, u = 1, uniform base rate.
  static Opinion vacuous(std::size_t num_classes);

  std::size_t num_classes() const { return belief_.size(); }
  std::span<const double> belief() const { return belief_; }
  double uncertainty() const { return uncertainty_; }
  std::span<const double> base_rate() const { return base_rate_; }

  friend bool operator==(const Opinion&, const Opinion&) = default;

 private:
  std::vector<double> belief_;
  double uncertainty_;
  std::vector<double> base_rate_;
};

/// Point probability summary P_k = b_k + a_k u.
class ProjectedProbability {
 public:
  explicit ProjectedProbability(std::vector<double> values);

  std::size_t num_classes() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t k) const { return values_[k]; }

 private:
  std::vector<double> values_;
};

struct Decision {
  std::size_t label = 0;
  double reliability = 0.0;
};

std::vector<double> uniform_base_rate(std::size_t num_classes);

Opinion evidence_to_opinion(const Evidence& evidence, std::span<const double> base_rate);
Opinion evidence_to_opinion(const Evidence& evidence);

/// Inverse of evidence_to_opinion: e_k = b_k K / u. Requires u > 0
/// (std::domain_error otherwise).
Evidence opinion_to_evidence(const Opinion& opinion);

ProjectedProbability project(const Opinion& opinion);

/// log D(p | alpha) for p strictly inside the simplex. Throws std::domain_error
/// if some p_k <= 0 or |sum(p) - 1| > 1e-9.
double dirichlet_pdf_log(std::span<const double> p, const DirichletParams& alpha);

/// Conflictive aggregation of two opinions:
///   b_k = (b_k^A u^B + b_k^B u^A) / (u^A + u^B)
///   u   = 2 u^A u^B / (u^A + u^B)
///   a_k = (a_k^A + a_k^B) / 2
/// Rejects u^A + u^B == 0 with std::domain_error.
Opinion aggregate_pair(const Opinion& lhs, const Opinion& rhs);

/// Component-wise arithmetic mean of the view evidences.
Evidence fuse_evidence(std::span<const Evidence> evidences);

/// V-way fusion: the opinion of the averaged evidence, with averaged base rate.
/// Coincides with aggregate_pair for two views.
Opinion fuse_opinions(std::span<const Opinion> opinions);

/// c_p = sum_k |P_k^A - P_k^B| / 2.
double projected_distance(const Opinion& lhs, const Opinion& rhs);

/// c_c = (1 - u^A)(1 - u^B).
double conjunctive_certainty(const Opinion& lhs, const Opinion& rhs);

/// c = c_p * c_c, in [0, 1].
double conflictive_degree(const Opinion& lhs, const Opinion& rhs);

/// Pairwise conflictive degrees, V x V with a zero diagonal.
std::vector<std::vector<double>> conflict_matrix(std::span<const Opinion> opinions);

/// argmax of the projected probability (lowest index on ties), reliability 1 - u.
Decision decide(const Opinion& opinion);

}  // namespace ecml
