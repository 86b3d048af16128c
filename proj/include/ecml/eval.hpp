#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ecml/data.hpp"
#include "ecml/net.hpp"

namespace ecml {

inline constexpr const char* kReportSchema = "ecml-eval-report";
inline constexpr int kReportSchemaVersion = 1;
inline constexpr std::size_t kUncertaintyBins = 50;

struct InstanceRecord {
  std::size_t index = 0;
  std::size_t prediction = 0;
  std::size_t label = 0;
  double uncertainty = 0.0;
  double reliability = 0.0;
  TagKind tag = TagKind::normal;
  double mean_conflict = 0.0;  ///< mean conflictive degree over view pairs
  double max_conflict = 0.0;

  bool correct() const { return prediction == label; }
  friend bool operator==(const InstanceRecord&, const InstanceRecord&) = default;
};

struct GroupStats {
  TagKind tag = TagKind::normal;
  std::size_t count = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;
  double mean_uncertainty = 0.0;
  std::vector<double> uncertainty_density;  ///< kUncertaintyBins densities over [0, 1]
  double mean_conflict = 0.0;
  std::vector<std::vector<double>> conflict_matrix;  ///< mean V x V over the group

  friend bool operator==(const GroupStats&, const GroupStats&) = default;
};

struct EvalReport {
  std::size_t num_views = 0;
  std::size_t num_classes = 0;
  std::optional<double> accuracy_normal;
  std::optional<double> accuracy_conflictive;  ///< every non-normal instance
  std::vector<double> bin_edges;               ///< kUncertaintyBins + 1 edges
  std::vector<GroupStats> groups;              ///< present groups, in tag order
  std::vector<InstanceRecord> records;

  const GroupStats* group(TagKind tag) const;
  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

/// Predicts every instance of a (tagged) test set and summarises by tag.
/// Throws std::invalid_argument for an empty test set.
EvalReport evaluate(const EvidentialNet& net, const MultiViewDataset& test);

std::string report_to_string(const EvalReport& report);
EvalReport report_from_string(const std::string& text);

void export_report(const EvalReport& report, const std::filesystem::path& path);
EvalReport load_report(const std::filesystem::path& path);

}  // namespace ecml
