#include "ecml/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "ecml/random.hpp"

namespace ecml {
namespace {

std::string location(const std::filesystem::path& file, std::size_t line) {
  return file.string() + ":" + std::to_string(line);
}

double parse_double(std::string_view cell, const std::filesystem::path& file, std::size_t line) {
  while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
  while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t' || cell.back() == '\r')) {
    cell.remove_suffix(1);
  }
  double value = 0.0;
  const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (cell.empty() || ec != std::errc() || end != cell.data() + cell.size() || !std::isfinite(value)) {
    throw DataError(location(file, line) + ": non-numeric cell '" + std::string(cell) + "'");
  }
  return value;
}

std::vector<std::string> read_lines(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) {
    throw DataError("cannot open " + file.string());
  }
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  // A trailing newline is not an extra row.
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) {
    throw DataError(file.string() + ": empty file");
  }
  return lines;
}

std::vector<std::string_view> split_cells(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

Matrix read_matrix(const std::filesystem::path& file) {
  const auto lines = read_lines(file);
  Matrix m;
  m.rows = lines.size();
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto cells = split_cells(lines[i]);
    if (i == 0) {
      m.cols = cells.size();
      m.values.reserve(m.rows * m.cols);
    } else if (cells.size() != m.cols) {
      throw DataError(location(file, i + 1) + ": expected " + std::to_string(m.cols) +
                      " columns, found " + std::to_string(cells.size()));
    }
    for (auto cell : cells) {
      m.values.push_back(parse_double(cell, file, i + 1));
    }
  }
  return m;
}

std::string format_double(double value) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, end);
}

std::size_t round_count(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
}

void require_fraction(double fraction, const char* what) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument(std::string(what) + ": fraction must be in [0, 1]");
  }
}

// Selected normal instances in ascending order.
std::vector<std::size_t> pick_normal(const MultiViewDataset& dataset, double fraction, Rng& rng) {
  std::vector<std::size_t> candidates;
  for (std::size_t n = 0; n < dataset.size(); ++n) {
    if (dataset.tag(n).is_normal()) candidates.push_back(n);
  }
  rng.shuffle(candidates);
  const std::size_t count = std::min(round_count(fraction, dataset.size()), candidates.size());
  candidates.resize(count);
  std::sort(candidates.begin(), candidates.end());
  return candidates;
}

}  // namespace

const char* tag_name(TagKind kind) {
  switch (kind) {
    case TagKind::normal:
      return "normal";
    case TagKind::noise_view:
      return "noise_view";
    case TagKind::unaligned_view:
      return "unaligned_view";
  }
  return "normal";
}

TagKind parse_tag_kind(std::string_view name) {
  if (name == "normal") return TagKind::normal;
  if (name == "noise_view") return TagKind::noise_view;
  if (name == "unaligned_view") return TagKind::unaligned_view;
  throw std::invalid_argument("unknown instance tag '" + std::string(name) + "'");
}

MultiViewDataset::MultiViewDataset(std::vector<Matrix> views, std::vector<std::size_t> labels,
                                   std::size_t num_classes, std::vector<InstanceTag> tags)
    : views_(std::move(views)),
      labels_(std::move(labels)),
      num_classes_(num_classes),
      tags_(std::move(tags)) {
  if (views_.empty()) {
    throw std::invalid_argument("dataset needs at least one view");
  }
  if (num_classes_ < 2) {
    throw std::invalid_argument("dataset needs at least two classes");
  }
  for (std::size_t v = 0; v < views_.size(); ++v) {
    const auto& m = views_[v];
    if (m.rows != labels_.size() || m.values.size() != m.rows * m.cols) {
      throw std::invalid_argument("view " + std::to_string(v) + " has " + std::to_string(m.rows) +
                                  " rows, expected " + std::to_string(labels_.size()));
    }
    if (m.cols == 0) {
      throw std::invalid_argument("view " + std::to_string(v) + " has no features");
    }
  }
  for (std::size_t label : labels_) {
    if (label >= num_classes_) {
      throw std::invalid_argument("label " + std::to_string(label) + " out of range");
    }
  }
  if (tags_.empty()) {
    tags_.resize(labels_.size());
  } else if (tags_.size() != labels_.size()) {
    throw std::invalid_argument("tag count does not match instance count");
  }
  for (const auto& tag : tags_) {
    if (!tag.is_normal() && tag.view >= views_.size()) {
      throw std::invalid_argument("tag refers to a view that does not exist");
    }
  }
}

std::vector<std::size_t> MultiViewDataset::view_dims() const {
  std::vector<std::size_t> dims;
  for (const auto& m : views_) dims.push_back(m.cols);
  return dims;
}

Instance MultiViewDataset::instance(std::size_t n) const {
  Instance out;
  out.reserve(views_.size());
  for (const auto& m : views_) out.push_back(m.row(n));
  return out;
}

std::vector<double> MultiViewDataset::one_hot(std::size_t n) const {
  std::vector<double> y(num_classes_, 0.0);
  y[labels_[n]] = 1.0;
  return y;
}

MultiViewDataset MultiViewDataset::subset(std::span<const std::size_t> indices) const {
  std::vector<Matrix> views;
  for (const auto& m : views_) {
    Matrix sub(indices.size(), m.cols);
    for (std::size_t i = 0; i < indices.size(); ++i) {
      const auto src = m.row(indices[i]);
      std::copy(src.begin(), src.end(), sub.row(i).begin());
    }
    views.push_back(std::move(sub));
  }
  std::vector<std::size_t> labels;
  std::vector<InstanceTag> tags;
  for (std::size_t idx : indices) {
    labels.push_back(labels_.at(idx));
    tags.push_back(tags_.at(idx));
  }
  return MultiViewDataset(std::move(views), std::move(labels), num_classes_, std::move(tags));
}

MultiViewDataset load_csv(const std::filesystem::path& directory) {
  std::vector<Matrix> views;
  for (std::size_t v = 0;; ++v) {
    const auto file = directory / ("view_" + std::to_string(v) + ".csv");
    if (!std::filesystem::exists(file)) break;
    views.push_back(read_matrix(file));
  }
  if (views.empty()) {
    throw DataError(directory.string() + ": no view_0.csv found");
  }

  const auto label_file = directory / "labels.csv";
  const auto label_lines = read_lines(label_file);
  std::vector<long long> raw;
  raw.reserve(label_lines.size());
  for (std::size_t i = 0; i < label_lines.size(); ++i) {
    std::string_view cell = label_lines[i];
    while (!cell.empty() && cell.back() == ' ') cell.remove_suffix(1);
    while (!cell.empty() && cell.front() == ' ') cell.remove_prefix(1);
    long long id = 0;
    const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), id);
    if (cell.empty() || ec != std::errc() || end != cell.data() + cell.size()) {
      throw DataError(location(label_file, i + 1) + ": invalid class id '" + std::string(cell) + "'");
    }
    raw.push_back(id);
  }
  for (std::size_t v = 0; v < views.size(); ++v) {
    if (views[v].rows != raw.size()) {
      throw DataError("view_" + std::to_string(v) + ".csv has " + std::to_string(views[v].rows) +
                      " rows but labels.csv has " + std::to_string(raw.size()));
    }
  }

  std::map<long long, std::size_t> dense;
  for (long long id : raw) dense.emplace(id, 0);
  std::size_t next = 0;
  for (auto& [id, index] : dense) index = next++;
  std::vector<std::size_t> labels;
  labels.reserve(raw.size());
  for (long long id : raw) labels.push_back(dense.at(id));

  std::vector<InstanceTag> tags;
  const auto tag_file = directory / "tags.csv";
  if (std::filesystem::exists(tag_file)) {
    const auto lines = read_lines(tag_file);
    tags.resize(raw.size());
    for (std::size_t i = 1; i < lines.size(); ++i) {
      const auto cells = split_cells(lines[i]);
      if (cells.size() != 5) {
        throw DataError(location(tag_file, i + 1) + ": expected 5 columns");
      }
      const auto index = static_cast<std::size_t>(parse_double(cells[0], tag_file, i + 1));
      if (index >= tags.size()) {
        throw DataError(location(tag_file, i + 1) + ": instance index out of range");
      }
      InstanceTag tag;
      try {
        tag.kind = parse_tag_kind(cells[1]);
      } catch (const std::invalid_argument& e) {
        throw DataError(location(tag_file, i + 1) + ": " + e.what());
      }
      tag.view = static_cast<std::size_t>(parse_double(cells[2], tag_file, i + 1));
      tag.sigma = parse_double(cells[3], tag_file, i + 1);
      tag.donor = static_cast<std::size_t>(parse_double(cells[4], tag_file, i + 1));
      tags[index] = tag;
    }
  }

  try {
    return MultiViewDataset(std::move(views), std::move(labels), next, std::move(tags));
  } catch (const std::invalid_argument& e) {
    throw DataError(directory.string() + ": " + e.what());
  }
}

void save_csv(const MultiViewDataset& dataset, const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);
  auto open = [&](const std::string& name) {
    std::ofstream out(directory / name);
    if (!out) throw DataError("cannot write " + (directory / name).string());
    return out;
  };
  for (std::size_t v = 0; v < dataset.num_views(); ++v) {
    auto out = open("view_" + std::to_string(v) + ".csv");
    const auto& m = dataset.view(v);
    for (std::size_t i = 0; i < m.rows; ++i) {
      const auto row = m.row(i);
      for (std::size_t j = 0; j < row.size(); ++j) {
        if (j) out << ',';
        out << format_double(row[j]);
      }
      out << '\n';
    }
  }
  auto labels = open("labels.csv");
  for (std::size_t label : dataset.labels()) labels << label << '\n';
  auto tags = open("tags.csv");
  tags << "index,tag,view,sigma,donor\n";
  for (std::size_t n = 0; n < dataset.size(); ++n) {
    const auto& t = dataset.tag(n);
    tags << n << ',' << tag_name(t.kind) << ',' << t.view << ',' << format_double(t.sigma) << ','
         << t.donor << '\n';
  }
}

MultiViewDataset generate_synthetic(const SyntheticSpec& spec) {
  if (spec.views == 0 || spec.classes < 2 || spec.instances == 0 || spec.dim == 0 ||
      !(spec.separation >= 0.0)) {
    throw std::invalid_argument("generate_synthetic: invalid specification");
  }
  Rng rng(spec.seed);
  std::vector<Matrix> views;
  for (std::size_t v = 0; v < spec.views; ++v) {
    Matrix means(spec.classes, spec.dim);
    for (double& x : means.values) x = spec.separation * rng.normal();
    Matrix m(spec.instances, spec.dim);
    for (std::size_t n = 0; n < spec.instances; ++n) {
      const auto centre = means.row(n % spec.classes);
      auto row = m.row(n);
      for (std::size_t d = 0; d < spec.dim; ++d) row[d] = centre[d] + rng.normal();
    }
    views.push_back(std::move(m));
  }
  std::vector<std::size_t> labels(spec.instances);
  for (std::size_t n = 0; n < spec.instances; ++n) labels[n] = n % spec.classes;
  return MultiViewDataset(std::move(views), std::move(labels), spec.classes);
}

MultiViewDataset inject_noise_views(const MultiViewDataset& dataset, double fraction, double sigma,
                                    std::uint64_t seed) {
  require_fraction(fraction, "inject_noise_views");
  if (!(sigma >= 0.0)) {
    throw std::invalid_argument("inject_noise_views: sigma must be >= 0");
  }
  Rng rng(seed);
  const auto selected = pick_normal(dataset, fraction, rng);
  auto views = dataset.views();
  auto tags = dataset.tags();
  for (std::size_t n : selected) {
    const std::size_t v = rng.index(dataset.num_views());
    for (double& x : views[v].row(n)) x += sigma * rng.normal();
    tags[n] = InstanceTag{TagKind::noise_view, v, sigma, 0};
  }
  return MultiViewDataset(std::move(views), dataset.labels(), dataset.num_classes(),
                          std::move(tags));
}

MultiViewDataset inject_unaligned_views(const MultiViewDataset& dataset, double fraction,
                                        std::uint64_t seed) {
  require_fraction(fraction, "inject_unaligned_views");
  Rng rng(seed);
  const auto selected = pick_normal(dataset, fraction, rng);

  std::vector<std::vector<std::size_t>> by_class(dataset.num_classes());
  for (std::size_t n = 0; n < dataset.size(); ++n) by_class[dataset.label(n)].push_back(n);

  auto views = dataset.views();
  auto tags = dataset.tags();
  for (std::size_t n : selected) {
    const std::size_t own = dataset.label(n);
    const std::size_t pool = dataset.size() - by_class[own].size();
    if (pool == 0) {
      throw std::invalid_argument("inject_unaligned_views: no instance of a different class");
    }
    const std::size_t v = rng.index(dataset.num_views());
    // Draw uniformly among instances of other classes without materialising the pool.
    std::size_t pick = rng.index(pool);
    std::size_t donor = 0;
    for (std::size_t c = 0; c < by_class.size(); ++c) {
      if (c == own) continue;
      if (pick < by_class[c].size()) {
        donor = by_class[c][pick];
        break;
      }
      pick -= by_class[c].size();
    }
    const auto src = dataset.view(v).row(donor);
    std::copy(src.begin(), src.end(), views[v].row(n).begin());
    tags[n] = InstanceTag{TagKind::unaligned_view, v, 0.0, donor};
  }
  return MultiViewDataset(std::move(views), dataset.labels(), dataset.num_classes(),
                          std::move(tags));
}

std::pair<MultiViewDataset, MultiViewDataset> split(const MultiViewDataset& dataset,
                                                    const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw std::invalid_argument("split: train fraction must be in (0, 1)");
  }
  for (const auto& tag : dataset.tags()) {
    if (!tag.is_normal()) {
      throw std::invalid_argument("split: dataset must contain only normal instances");
    }
  }
  std::vector<std::vector<std::size_t>> by_class(dataset.num_classes());
  for (std::size_t n = 0; n < dataset.size(); ++n) by_class[dataset.label(n)].push_back(n);

  Rng rng(spec.seed);
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto members = by_class[c];
    if (members.size() < 2) {
      throw std::invalid_argument("split: class " + std::to_string(c) +
                                  " has fewer than 2 instances");
    }
    rng.shuffle(members);
    const std::size_t n_train =
        std::clamp<std::size_t>(round_count(spec.train_fraction, members.size()), 1,
                                members.size() - 1);
    train.insert(train.end(), members.begin(), members.begin() + n_train);
    test.insert(test.end(), members.begin() + n_train, members.end());
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {dataset.subset(train), dataset.subset(test)};
}

Standardizer Standardizer::fit(const MultiViewDataset& dataset) {
  Standardizer s;
  const double n = static_cast<double>(dataset.size());
  for (const auto& m : dataset.views()) {
    std::vector<double> mean(m.cols, 0.0);
    std::vector<double> var(m.cols, 0.0);
    for (std::size_t i = 0; i < m.rows; ++i) {
      const auto row = m.row(i);
      for (std::size_t j = 0; j < m.cols; ++j) mean[j] += row[j];
    }
    for (double& x : mean) x /= n;
    for (std::size_t i = 0; i < m.rows; ++i) {
      const auto row = m.row(i);
      for (std::size_t j = 0; j < m.cols; ++j) var[j] += (row[j] - mean[j]) * (row[j] - mean[j]);
    }
    for (double& x : var) {
      x = std::sqrt(x / n);
      if (x < 1e-12) x = 1.0;  // constant feature
    }
    s.mean.push_back(std::move(mean));
    s.scale.push_back(std::move(var));
  }
  return s;
}

MultiViewDataset Standardizer::apply(const MultiViewDataset& dataset) const {
  if (dataset.view_dims().size() != mean.size()) {
    throw std::invalid_argument("standardizer: view count mismatch");
  }
  auto views = dataset.views();
  for (std::size_t v = 0; v < views.size(); ++v) {
    auto& m = views[v];
    if (m.cols != mean[v].size()) {
      throw std::invalid_argument("standardizer: feature count mismatch in view " +
                                  std::to_string(v));
    }
    for (std::size_t i = 0; i < m.rows; ++i) {
      auto row = m.row(i);
      for (std::size_t j = 0; j < m.cols; ++j) row[j] = (row[j] - mean[v][j]) / scale[v][j];
    }
  }
  return MultiViewDataset(std::move(views), dataset.labels(), dataset.num_classes(),
                          dataset.tags());
}

}  // namespace ecml
