#include "ecml/opinion.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "ecml/numerics.hpp"

namespace ecml {
namespace {

void require_same_classes(std::size_t lhs, std::size_t rhs, const char* what) {
  if (lhs != rhs) {
    throw std::invalid_argument(std::string(what) + ": class count mismatch (" +
                                std::to_string(lhs) + " vs " + std::to_string(rhs) + ")");
  }
}

void require_classes(std::size_t k, const char* what) {
  if (k < 2) {
    throw std::invalid_argument(std::string(what) + ": need at least 2 classes");
  }
}

double sum(std::span<const double> values) {
  return std::accumulate(values.begin(), values.end(), 0.0);
}

void require_simplex_part(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0) {
      throw std::invalid_argument(std::string(what) + ": entries must be finite and >= 0");
    }
  }
}

}  // namespace

Evidence::Evidence(std::vector<double> values) : values_(std::move(values)) {
  require_classes(values_.size(), "Evidence");
  require_simplex_part(values_, "Evidence");
}

DirichletParams::DirichletParams(std::vector<double> alpha) : alpha_(std::move(alpha)) {
  require_classes(alpha_.size(), "DirichletParams");
  for (double a : alpha_) {
    if (!std::isfinite(a) || a < 1.0) {
      throw std::invalid_argument("DirichletParams: alpha entries must be finite and >= 1");
    }
  }
  strength_ = sum(alpha_);
}

DirichletParams DirichletParams::from_evidence(const Evidence& evidence) {
  std::vector<double> alpha(evidence.values().begin(), evidence.values().end());
  for (double& a : alpha) {
    a += 1.0;
  }
  return DirichletParams(std::move(alpha));
}

Opinion::Opinion(std::vector<double> belief, double uncertainty, std::vector<double> base_rate)
    : belief_(std::move(belief)), uncertainty_(uncertainty), base_rate_(std::move(base_rate)) {
  require_classes(belief_.size(), "Opinion");
  require_same_classes(belief_.size(), base_rate_.size(), "Opinion");
  require_simplex_part(belief_, "Opinion belief");
  require_simplex_part(base_rate_, "Opinion base rate");
  if (!std::isfinite(uncertainty_) || uncertainty_ < 0.0) {
    throw std::invalid_argument("Opinion: uncertainty must be finite and >= 0");
  }
  if (std::abs(sum(belief_) + uncertainty_ - 1.0) > kSimplexTolerance) {
    throw std::invalid_argument("Opinion: belief masses plus uncertainty must sum to 1");
  }
  if (std::abs(sum(base_rate_) - 1.0) > kSimplexTolerance) {
    throw std::invalid_argument("Opinion: base rate must sum to 1");
  }
}

Opinion Opinion::vacuous(std::size_t num_classes) {
  return Opinion(std::vector<double>(num_classes, 0.0), 1.0, uniform_base_rate(num_classes));
}

ProjectedProbability::ProjectedProbability(std::vector<double> values)
    : values_(std::move(values)) {
  require_classes(values_.size(), "ProjectedProbability");
  require_simplex_part(values_, "ProjectedProbability");
  if (std::abs(sum(values_) - 1.0) > kSimplexTolerance) {
    throw std::invalid_argument("ProjectedProbability: must sum to 1");
  }
}

std::vector<double> uniform_base_rate(std::size_t num_classes) {
  require_classes(num_classes, "uniform_base_rate");
  return std::vector<double>(num_classes, 1.0 / static_cast<double>(num_classes));
}

Opinion evidence_to_opinion(const Evidence& evidence, std::span<const double> base_rate) {
  const std::size_t k = evidence.num_classes();
  require_same_classes(k, base_rate.size(), "evidence_to_opinion");
  const double strength = sum(evidence.values()) + static_cast<double>(k);
  std::vector<double> belief(k);
  for (std::size_t i = 0; i < k; ++i) {
    belief[i] = evidence[i] / strength;
  }
  return Opinion(std::move(belief), static_cast<double>(k) / strength,
                 std::vector<double>(base_rate.begin(), base_rate.end()));
}

Opinion evidence_to_opinion(const Evidence& evidence) {
  const auto base_rate = uniform_base_rate(evidence.num_classes());
  return evidence_to_opinion(evidence, base_rate);
}

Evidence opinion_to_evidence(const Opinion& opinion) {
  if (!(opinion.uncertainty() > 0.0)) {
    throw std::domain_error("opinion_to_evidence: opinion with zero uncertainty has no finite evidence");
  }
  const double strength = static_cast<double>(opinion.num_classes()) / opinion.uncertainty();
  std::vector<double> evidence(opinion.num_classes());
  for (std::size_t k = 0; k < evidence.size(); ++k) {
    evidence[k] = opinion.belief()[k] * strength;
  }
  return Evidence(std::move(evidence));
}

ProjectedProbability project(const Opinion& opinion) {
  std::vector<double> p(opinion.num_classes());
  for (std::size_t k = 0; k < p.size(); ++k) {
    p[k] = opinion.belief()[k] + opinion.base_rate()[k] * opinion.uncertainty();
  }
  return ProjectedProbability(std::move(p));
}

double dirichlet_pdf_log(std::span<const double> p, const DirichletParams& alpha) {
  require_same_classes(p.size(), alpha.num_classes(), "dirichlet_pdf_log");
  double total = 0.0;
  for (double pk : p) {
    if (!(pk > 0.0)) {
      throw std::domain_error("dirichlet_pdf_log: point must lie strictly inside the simplex");
    }
    total += pk;
  }
  if (std::abs(total - 1.0) > kSimplexTolerance) {
    throw std::domain_error("dirichlet_pdf_log: point must sum to 1");
  }
  double log_beta = -numerics::log_gamma(alpha.strength());
  double kernel = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    log_beta += numerics::log_gamma(alpha[k]);
    kernel += (alpha[k] - 1.0) * std::log(p[k]);
  }
  return kernel - log_beta;
}

Opinion aggregate_pair(const Opinion& lhs, const Opinion& rhs) {
  const std::size_t k = lhs.num_classes();
  require_same_classes(k, rhs.num_classes(), "aggregate_pair");
  const double ua = lhs.uncertainty();
  const double ub = rhs.uncertainty();
  const double denom = ua + ub;
  if (!(denom > 0.0)) {
    throw std::domain_error("aggregate_pair: both opinions have zero uncertainty");
  }
  std::vector<double> belief(k);
  std::vector<double> base_rate(k);
  for (std::size_t i = 0; i < k; ++i) {
    belief[i] = (lhs.belief()[i] * ub + rhs.belief()[i] * ua) / denom;
    base_rate[i] = (lhs.base_rate()[i] + rhs.base_rate()[i]) / 2.0;
  }
  return Opinion(std::move(belief), 2.0 * ua * ub / denom, std::move(base_rate));
}

Evidence fuse_evidence(std::span<const Evidence> evidences) {
  if (evidences.empty()) {
    throw std::invalid_argument("fuse_evidence: no views");
  }
  const std::size_t k = evidences.front().num_classes();
  std::vector<double> mean(k, 0.0);
  for (const auto& e : evidences) {
    require_same_classes(k, e.num_classes(), "fuse_evidence");
    for (std::size_t i = 0; i < k; ++i) {
      mean[i] += e[i];
    }
  }
  const double views = static_cast<double>(evidences.size());
  for (double& m : mean) {
    m /= views;
  }
  return Evidence(std::move(mean));
}

Opinion fuse_opinions(std::span<const Opinion> opinions) {
  if (opinions.empty()) {
    throw std::invalid_argument("fuse_opinions: no views");
  }
  const std::size_t k = opinions.front().num_classes();
  std::vector<Evidence> evidences;
  evidences.reserve(opinions.size());
  std::vector<double> base_rate(k, 0.0);
  for (const auto& w : opinions) {
    require_same_classes(k, w.num_classes(), "fuse_opinions");
    evidences.push_back(opinion_to_evidence(w));
    for (std::size_t i = 0; i < k; ++i) {
      base_rate[i] += w.base_rate()[i];
    }
  }
  const double views = static_cast<double>(opinions.size());
  for (double& a : base_rate) {
    a /= views;
  }
  return evidence_to_opinion(fuse_evidence(evidences), base_rate);
}

double projected_distance(const Opinion& lhs, const Opinion& rhs) {
  require_same_classes(lhs.num_classes(), rhs.num_classes(), "projected_distance");
  const auto pa = project(lhs);
  const auto pb = project(rhs);
  double total = 0.0;
  for (std::size_t k = 0; k < pa.num_classes(); ++k) {
    total += std::abs(pa[k] - pb[k]);
  }
  return total / 2.0;
}

double conjunctive_certainty(const Opinion& lhs, const Opinion& rhs) {
  return (1.0 - lhs.uncertainty()) * (1.0 - rhs.uncertainty());
}

double conflictive_degree(const Opinion& lhs, const Opinion& rhs) {
  return projected_distance(lhs, rhs) * conjunctive_certainty(lhs, rhs);
}

std::vector<std::vector<double>> conflict_matrix(std::span<const Opinion> opinions) {
  const std::size_t v = opinions.size();
  std::vector<std::vector<double>> matrix(v, std::vector<double>(v, 0.0));
  for (std::size_t p = 0; p < v; ++p) {
    for (std::size_t q = p + 1; q < v; ++q) {
      matrix[p][q] = matrix[q][p] = conflictive_degree(opinions[p], opinions[q]);
    }
  }
  return matrix;
}

Decision decide(const Opinion& opinion) {
  const auto p = project(opinion);
  std::size_t best = 0;
  for (std::size_t k = 1; k < p.num_classes(); ++k) {
    if (p[k] > p[best]) {
      best = k;
    }
  }
  return {best, 1.0 - opinion.uncertainty()};
}

}  // namespace ecml
