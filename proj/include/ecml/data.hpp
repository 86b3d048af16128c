#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ecml {

/// Raised for malformed or inconsistent input files.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense row-major matrix of features, one row per instance.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

  std::span<const double> row(std::size_t i) const { return {values.data() + i * cols, cols}; }
  std::span<double> row(std::size_t i) { return {values.data() + i * cols, cols}; }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

enum class TagKind { normal, noise_view, unaligned_view };

struct InstanceTag {
  TagKind kind = TagKind::normal;
  std::size_t view = 0;    ///< corrupted view (noise / unaligned)
  double sigma = 0.0;      ///< noise standard deviation
  std::size_t donor = 0;   ///< source instance of an unaligned view

  bool is_normal() const { return kind == TagKind::normal; }
  friend bool operator==(const InstanceTag&, const InstanceTag&) = default;
};

const char* tag_name(TagKind kind);
TagKind parse_tag_kind(std::string_view name);

/// One feature vector per view.
using Instance = std::vector<std::span<const double>>;

class MultiViewDataset {
 public:
  /// Validates V >= 1, K >= 2, shared N across views and labels < K.
  /// An empty tag list means every instance is normal.
  MultiViewDataset(std::vector<Matrix> views, std::vector<std::size_t> labels,
                   std::size_t num_classes, std::vector<InstanceTag> tags = {});

  std::size_t size() const { return labels_.size(); }
  std::size_t num_views() const { return views_.size(); }
  std::size_t num_classes() const { return num_classes_; }
  std::vector<std::size_t> view_dims() const;

  const std::vector<Matrix>& views() const { return views_; }
  const Matrix& view(std::size_t v) const { return views_[v]; }
  const std::vector<std::size_t>& labels() const { return labels_; }
  std::size_t label(std::size_t n) const { return labels_[n]; }
  const std::vector<InstanceTag>& tags() const { return tags_; }
  const InstanceTag& tag(std::size_t n) const { return tags_[n]; }

  Instance instance(std::size_t n) const;
  std::vector<double> one_hot(std::size_t n) const;

  /// Rows at the given indices, in that order.
  MultiViewDataset subset(std::span<const std::size_t> indices) const;

  friend bool operator==(const MultiViewDataset&, const MultiViewDataset&) = default;

 private:
  std::vector<Matrix> views_;
  std::vector<std::size_t> labels_;
  std::size_t num_classes_;
  std::vector<InstanceTag> tags_;
};

/// Reads view_0.csv ... view_{V-1}.csv and labels.csv (plus tags.csv when
/// present) from a directory. Class ids are densified to 0..K-1 in sorted
/// order. Throws DataError naming the file and line on malformed input.
MultiViewDataset load_csv(const std::filesystem::path& directory);

/// Writes the layout read by load_csv, plus tags.csv. Values use round-trip
/// precision.
void save_csv(const MultiViewDataset& dataset, const std::filesystem::path& directory);

struct SyntheticSpec {
  std::size_t views = 3;
  std::size_t classes = 4;
  std::size_t instances = 1000;
  std::size_t dim = 10;
  double separation = 5.0;
  std::uint64_t seed = 0;
};

/// Per view and class, an isotropic unit-variance Gaussian cluster whose mean
/// is drawn from N(0, separation^2 I). Labels cycle through the classes so
/// the set is balanced.
MultiViewDataset generate_synthetic(const SyntheticSpec& spec);

/// Adds N(0, sigma^2) noise to one uniformly chosen view of round(fraction N)
/// normal instances. Identical seeds select the same instances, views and
/// noise directions for every sigma.
MultiViewDataset inject_noise_views(const MultiViewDataset& dataset, double fraction, double sigma,
                                    std::uint64_t seed);

/// Replaces one uniformly chosen view of round(fraction N) normal instances
/// with the same view of a random instance from a different class.
MultiViewDataset inject_unaligned_views(const MultiViewDataset& dataset, double fraction,
                                        std::uint64_t seed);

struct SplitSpec {
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
};

/// Class-stratified partition; each class keeps at least one instance on
/// both sides. Requires an all-normal dataset.
std::pair<MultiViewDataset, MultiViewDataset> split(const MultiViewDataset& dataset,
                                                    const SplitSpec& spec);

/// Per-feature z-scoring with statistics from a reference (training) set.
struct Standardizer {
  std::vector<std::vector<double>> mean;
  std::vector<std::vector<double>> scale;

  static Standardizer fit(const MultiViewDataset& dataset);
  MultiViewDataset apply(const MultiViewDataset& dataset) const;

  friend bool operator==(const Standardizer&, const Standardizer&) = default;
};

}  // namespace ecml
