#include "ecml/eval.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace ecml {

using nlohmann::json;

namespace {

constexpr std::array<TagKind, 3> kTagOrder = {TagKind::normal, TagKind::noise_view,
                                              TagKind::unaligned_view};

std::size_t bin_of(double u) {
  const auto bin = static_cast<std::size_t>(u * static_cast<double>(kUncertaintyBins));
  return std::min(bin, kUncertaintyBins - 1);
}

}  // namespace

const GroupStats* EvalReport::group(TagKind tag) const {
  for (const auto& g : groups) {
    if (g.tag == tag) return &g;
  }
  return nullptr;
}

EvalReport evaluate(const EvidentialNet& net, const MultiViewDataset& test) {
  if (test.size() == 0) throw std::invalid_argument("evaluate: empty test set");
  const std::size_t views = test.num_views();

  EvalReport report;
  report.num_views = views;
  report.num_classes = test.num_classes();
  for (std::size_t b = 0; b <= kUncertaintyBins; ++b) {
    report.bin_edges.push_back(static_cast<double>(b) / static_cast<double>(kUncertaintyBins));
  }

  std::vector<std::vector<std::vector<double>>> conflict_sums;
  std::vector<std::vector<std::size_t>> bin_counts;
  for (TagKind tag : kTagOrder) {
    GroupStats g;
    g.tag = tag;
    report.groups.push_back(g);
    conflict_sums.emplace_back(views, std::vector<double>(views, 0.0));
    bin_counts.emplace_back(kUncertaintyBins, 0);
  }

  const double pairs = static_cast<double>(views * (views - 1) / 2);
  for (std::size_t n = 0; n < test.size(); ++n) {
    const auto prediction = net.predict(test.instance(n));
    InstanceRecord r;
    r.index = n;
    r.prediction = prediction.decision.label;
    r.label = test.label(n);
    r.uncertainty = prediction.fused.uncertainty();
    r.reliability = prediction.decision.reliability;
    r.tag = test.tag(n).kind;
    double total = 0.0;
    for (std::size_t p = 0; p < views; ++p) {
      for (std::size_t q = p + 1; q < views; ++q) {
        total += prediction.conflict[p][q];
        r.max_conflict = std::max(r.max_conflict, prediction.conflict[p][q]);
      }
    }
    r.mean_conflict = pairs > 0.0 ? total / pairs : 0.0;

    const auto slot = static_cast<std::size_t>(r.tag);
    auto& g = report.groups[slot];
    ++g.count;
    if (r.correct()) ++g.correct;
    g.mean_uncertainty += r.uncertainty;
    g.mean_conflict += r.mean_conflict;
    ++bin_counts[slot][bin_of(r.uncertainty)];
    for (std::size_t p = 0; p < views; ++p) {
      for (std::size_t q = 0; q < views; ++q) conflict_sums[slot][p][q] += prediction.conflict[p][q];
    }
    report.records.push_back(r);
  }

  const double width = 1.0 / static_cast<double>(kUncertaintyBins);
  std::size_t conflictive = 0;
  std::size_t conflictive_correct = 0;
  std::vector<GroupStats> present;
  for (std::size_t slot = 0; slot < report.groups.size(); ++slot) {
    auto g = report.groups[slot];
    if (g.count == 0) continue;
    const double count = static_cast<double>(g.count);
    g.accuracy = static_cast<double>(g.correct) / count;
    g.mean_uncertainty /= count;
    g.mean_conflict /= count;
    for (std::size_t b = 0; b < kUncertaintyBins; ++b) {
      g.uncertainty_density.push_back(static_cast<double>(bin_counts[slot][b]) / (count * width));
    }
    g.conflict_matrix = conflict_sums[slot];
    for (auto& row : g.conflict_matrix) {
      for (double& c : row) c /= count;
    }
    if (g.tag == TagKind::normal) {
      report.accuracy_normal = g.accuracy;
    } else {
      conflictive += g.count;
      conflictive_correct += g.correct;
    }
    present.push_back(std::move(g));
  }
  if (conflictive > 0) {
    report.accuracy_conflictive =
        static_cast<double>(conflictive_correct) / static_cast<double>(conflictive);
  }
  report.groups = std::move(present);
  return report;
}

std::string report_to_string(const EvalReport& report) {
  json doc;
  doc["schema"] = kReportSchema;
  doc["schema_version"] = kReportSchemaVersion;
  doc["num_views"] = report.num_views;
  doc["num_classes"] = report.num_classes;
  doc["num_instances"] = report.records.size();
  doc["accuracy_normal"] = report.accuracy_normal ? json(*report.accuracy_normal) : json(nullptr);
  doc["accuracy_conflictive"] =
      report.accuracy_conflictive ? json(*report.accuracy_conflictive) : json(nullptr);
  doc["uncertainty_bin_edges"] = report.bin_edges;
  json groups = json::object();
  for (const auto& g : report.groups) {
    groups[tag_name(g.tag)] = {
        {"count", g.count},
        {"correct", g.correct},
        {"accuracy", g.accuracy},
        {"mean_uncertainty", g.mean_uncertainty},
        {"uncertainty_density", g.uncertainty_density},
        {"mean_conflict", g.mean_conflict},
        {"conflict_matrix", g.conflict_matrix},
    };
  }
  doc["groups"] = std::move(groups);
  json records = json::array();
  for (const auto& r : report.records) {
    records.push_back({{"index", r.index},
                       {"prediction", r.prediction},
                       {"label", r.label},
                       {"uncertainty", r.uncertainty},
                       {"reliability", r.reliability},
                       {"tag", tag_name(r.tag)},
                       {"mean_conflict", r.mean_conflict},
                       {"max_conflict", r.max_conflict}});
  }
  doc["instances"] = std::move(records);
  return doc.dump(1) + "\n";
}

EvalReport report_from_string(const std::string& text) {
  const json doc = json::parse(text);
  if (doc.value("schema", "") != kReportSchema ||
      doc.value("schema_version", -1) != kReportSchemaVersion) {
    throw std::invalid_argument("not an ecml evaluation report");
  }
  EvalReport report;
  report.num_views = doc.at("num_views").get<std::size_t>();
  report.num_classes = doc.at("num_classes").get<std::size_t>();
  if (!doc.at("accuracy_normal").is_null()) {
    report.accuracy_normal = doc.at("accuracy_normal").get<double>();
  }
  if (!doc.at("accuracy_conflictive").is_null()) {
    report.accuracy_conflictive = doc.at("accuracy_conflictive").get<double>();
  }
  report.bin_edges = doc.at("uncertainty_bin_edges").get<std::vector<double>>();
  for (TagKind tag : kTagOrder) {
    const auto& groups = doc.at("groups");
    if (!groups.contains(tag_name(tag))) continue;
    const auto& g = groups.at(tag_name(tag));
    GroupStats s;
    s.tag = tag;
    s.count = g.at("count").get<std::size_t>();
    s.correct = g.at("correct").get<std::size_t>();
    s.accuracy = g.at("accuracy").get<double>();
    s.mean_uncertainty = g.at("mean_uncertainty").get<double>();
    s.uncertainty_density = g.at("uncertainty_density").get<std::vector<double>>();
    s.mean_conflict = g.at("mean_conflict").get<double>();
    s.conflict_matrix = g.at("conflict_matrix").get<std::vector<std::vector<double>>>();
    report.groups.push_back(std::move(s));
  }
  for (const auto& r : doc.at("instances")) {
    InstanceRecord rec;
    rec.index = r.at("index").get<std::size_t>();
    rec.prediction = r.at("prediction").get<std::size_t>();
    rec.label = r.at("label").get<std::size_t>();
    rec.uncertainty = r.at("uncertainty").get<double>();
    rec.reliability = r.at("reliability").get<double>();
    rec.tag = parse_tag_kind(r.at("tag").get<std::string>());
    rec.mean_conflict = r.at("mean_conflict").get<double>();
    rec.max_conflict = r.at("max_conflict").get<double>();
    report.records.push_back(rec);
  }
  return report;
}

void export_report(const EvalReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report " + path.string());
  out << report_to_string(report);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

EvalReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open report " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return report_from_string(buffer.str());
}

}  // namespace ecml
