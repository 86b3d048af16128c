#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ecml/checkpoint.hpp"
#include "ecml/data.hpp"
#include "ecml/eval.hpp"
#include "ecml/net.hpp"
#include "ecml/run_config.hpp"

namespace ecml {

/// Train and test halves after standardisation (train statistics), with the
/// configured conflict injection applied to the test half only.
struct PreparedData {
  MultiViewDataset train;
  MultiViewDataset test;
  Standardizer standardizer;
};

/// Raw (unstandardised, uninjected) stratified split of the configured source.
std::pair<MultiViewDataset, MultiViewDataset> split_source(const RunConfig& config,
                                                           std::uint64_t seed);

/// Loads or generates the dataset for one run. Every random step draws from
/// derive_seed(seed, <step name>).
PreparedData prepare_data(const RunConfig& config, std::uint64_t seed);

/// Applies the configured noise and unaligned injection (in that order).
MultiViewDataset apply_injection(const MultiViewDataset& test, const InjectionSpec& injection,
                                 std::uint64_t seed);

struct ExperimentResult {
  Checkpoint checkpoint;
  TrainTrace trace;
  EvalReport report;
};

ExperimentResult run_experiment(const RunConfig& config, std::uint64_t seed);

struct MetricSummary {
  std::string name;
  double mean = 0.0;
  double stddev = 0.0;  ///< sample standard deviation, 0 for a single run
  std::vector<double> values;
};

struct MultiRunSummary {
  std::vector<std::uint64_t> seeds;
  std::vector<MetricSummary> metrics;

  const MetricSummary* metric(const std::string& name) const;
};

/// Runs train + evaluate with seeds config.seed ... config.seed + runs - 1
/// and aggregates every metric present in all runs.
MultiRunSummary multi_run(const RunConfig& config, int runs);

std::string summary_to_string(const MultiRunSummary& summary);

/// JSON line for one epoch of the training log.
std::string epoch_record_json(const EpochRecord& record);

}  // namespace ecml
