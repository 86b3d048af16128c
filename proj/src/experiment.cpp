#include "ecml/experiment.hpp"

#include <cmath>
#include <map>

#include <json.hpp>

#include "ecml/random.hpp"

namespace ecml {

using nlohmann::json;

MultiViewDataset apply_injection(const MultiViewDataset& test, const InjectionSpec& injection,
                                 std::uint64_t seed) {
  MultiViewDataset out = test;
  if (injection.noise_fraction > 0.0) {
    out = inject_noise_views(out, injection.noise_fraction, injection.noise_sigma,
                             derive_seed(seed, "noise"));
  }
  if (injection.unaligned_fraction > 0.0) {
    out = inject_unaligned_views(out, injection.unaligned_fraction, derive_seed(seed, "unaligned"));
  }
  return out;
}

std::pair<MultiViewDataset, MultiViewDataset> split_source(const RunConfig& config,
                                                           std::uint64_t seed) {
  MultiViewDataset full = [&] {
    if (config.source == DataSource::csv) return load_csv(config.data_path);
    SyntheticSpec spec = config.synthetic;
    spec.seed = derive_seed(seed, "data");
    return generate_synthetic(spec);
  }();
  return split(full, SplitSpec{config.train_fraction, derive_seed(seed, "split")});
}

PreparedData prepare_data(const RunConfig& config, std::uint64_t seed) {
  auto [train, test] = split_source(config, seed);
  auto standardizer = Standardizer::fit(train);
  auto train_z = standardizer.apply(train);
  auto test_z = apply_injection(standardizer.apply(test), config.injection, seed);
  return PreparedData{std::move(train_z), std::move(test_z), std::move(standardizer)};
}

ExperimentResult run_experiment(const RunConfig& config, std::uint64_t seed) {
  auto data = prepare_data(config, seed);
  NetConfig net_config = config.net;
  net_config.input_dims = data.train.view_dims();
  net_config.num_classes = data.train.num_classes();
  net_config.seed = seed;
  EvidentialNet net(net_config);
  auto trace = train(net, data.train, config.loss);
  auto report = evaluate(net, data.test);
  Checkpoint checkpoint{net.config(), config.loss, std::move(data.standardizer), net.parameters()};
  return ExperimentResult{std::move(checkpoint), std::move(trace), std::move(report)};
}

const MetricSummary* MultiRunSummary::metric(const std::string& name) const {
  for (const auto& m : metrics) {
    if (m.name == name) return &m;
  }
  return nullptr;
}

MultiRunSummary multi_run(const RunConfig& config, int runs) {
  if (runs < 1) throw std::invalid_argument("multi_run: need at least one run");
  MultiRunSummary summary;
  std::map<std::string, std::vector<double>> values;
  std::vector<std::string> order;
  auto record = [&](const std::string& name, double v) {
    auto [it, inserted] = values.try_emplace(name);
    if (inserted) order.push_back(name);
    it->second.push_back(v);
  };

  for (int r = 0; r < runs; ++r) {
    const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(r);
    summary.seeds.push_back(seed);
    const auto result = run_experiment(config, seed);
    const auto& report = result.report;
    if (report.accuracy_normal) record("accuracy_normal", *report.accuracy_normal);
    if (report.accuracy_conflictive) record("accuracy_conflictive", *report.accuracy_conflictive);
    for (const auto& g : report.groups) {
      record(std::string("accuracy.") + tag_name(g.tag), g.accuracy);
      record(std::string("mean_uncertainty.") + tag_name(g.tag), g.mean_uncertainty);
      record(std::string("mean_conflict.") + tag_name(g.tag), g.mean_conflict);
    }
    record("final_train_loss", result.trace.epochs.back().loss.total);
    record("final_train_accuracy", result.trace.epochs.back().train_accuracy);
  }

  for (const auto& name : order) {
    const auto& v = values.at(name);
    if (v.size() != static_cast<std::size_t>(runs)) continue;
    MetricSummary m;
    m.name = name;
    m.values = v;
    for (double x : v) m.mean += x;
    m.mean /= static_cast<double>(v.size());
    if (v.size() > 1) {
      double ss = 0.0;
      for (double x : v) ss += (x - m.mean) * (x - m.mean);
      m.stddev = std::sqrt(ss / static_cast<double>(v.size() - 1));
    }
    summary.metrics.push_back(std::move(m));
  }
  return summary;
}

std::string summary_to_string(const MultiRunSummary& summary) {
  json doc;
  doc["schema"] = "ecml-multi-run";
  doc["schema_version"] = 1;
  doc["seeds"] = summary.seeds;
  json metrics = json::object();
  for (const auto& m : summary.metrics) {
    metrics[m.name] = {{"mean", m.mean}, {"std", m.stddev}, {"values", m.values}};
  }
  doc["metrics"] = std::move(metrics);
  return doc.dump(1) + "\n";
}

std::string epoch_record_json(const EpochRecord& record) {
  json line = {{"epoch", record.epoch},
               {"lambda", record.lambda},
               {"train_accuracy", record.train_accuracy},
               {"ace", record.loss.ace},
               {"kl", record.loss.kl},
               {"acc", record.loss.acc},
               {"view_acc", record.loss.view_acc},
               {"consistency", record.loss.consistency},
               {"total", record.loss.total}};
  return line.dump();
}

}  // namespace ecml
