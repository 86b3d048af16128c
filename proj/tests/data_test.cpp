#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "ecml/data.hpp"

using namespace ecml;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = ECML_FIXTURES_DIR;

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("ecml_data_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string error_of(const fs::path& dir) {
  try {
    load_csv(dir);
  } catch (const DataError& e) {
    return e.what();
  }
  return {};
}

// Nearest class centroid on one view, fitted on train and scored on test.
double centroid_accuracy(const MultiViewDataset& train, const MultiViewDataset& test, std::size_t v) {
  const std::size_t k = train.num_classes();
  const std::size_t d = train.view(v).cols;
  std::vector<std::vector<double>> centroid(k, std::vector<double>(d, 0.0));
  std::vector<double> count(k, 0.0);
  for (std::size_t n = 0; n < train.size(); ++n) {
    const auto row = train.view(v).row(n);
    for (std::size_t j = 0; j < d; ++j) centroid[train.label(n)][j] += row[j];
    count[train.label(n)] += 1.0;
  }
  for (std::size_t c = 0; c < k; ++c) {
    for (double& x : centroid[c]) x /= count[c];
  }
  std::size_t correct = 0;
  for (std::size_t n = 0; n < test.size(); ++n) {
    const auto row = test.view(v).row(n);
    std::size_t best = 0;
    double best_distance = INFINITY;
    for (std::size_t c = 0; c < k; ++c) {
      double dist = 0.0;
      for (std::size_t j = 0; j < d; ++j) dist += (row[j] - centroid[c][j]) * (row[j] - centroid[c][j]);
      if (dist < best_distance) {
        best_distance = dist;
        best = c;
      }
    }
    correct += best == test.label(n);
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

// Column 0 holds the instance index, column 1 the view index.
MultiViewDataset toy(std::size_t n, std::size_t views, std::size_t classes) {
  std::vector<Matrix> mats;
  for (std::size_t v = 0; v < views; ++v) {
    Matrix m(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
      m.row(i)[0] = static_cast<double>(i);
      m.row(i)[1] = static_cast<double>(v);
    }
    mats.push_back(std::move(m));
  }
  std::vector<std::size_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = i % classes;
  return MultiViewDataset(std::move(mats), std::move(labels), classes);
}

}  // namespace

TEST_CASE("MultiViewDataset validation") {
  CHECK_THROWS_AS(MultiViewDataset({}, {0, 1}, 2), std::invalid_argument);
  CHECK_THROWS_AS(MultiViewDataset({Matrix(2, 1)}, {0, 1}, 1), std::invalid_argument);
  CHECK_THROWS_AS(MultiViewDataset({Matrix(2, 1), Matrix(3, 1)}, {0, 1}, 2), std::invalid_argument);
  CHECK_THROWS_AS(MultiViewDataset({Matrix(2, 1)}, {0, 2}, 2), std::invalid_argument);
  const MultiViewDataset ok({Matrix(2, 3)}, {0, 1}, 2);
  CHECK(ok.tag(1).is_normal());
  CHECK(ok.one_hot(1) == std::vector<double>{0.0, 1.0});
}

TEST_CASE("load_csv") {
  SUBCASE("small fixture") {
    const auto data = load_csv(kFixtures / "tiny");
    CHECK(data.size() == 4);
    CHECK(data.num_views() == 2);
    CHECK(data.num_classes() == 2);
    CHECK(data.view_dims() == std::vector<std::size_t>{3, 2});
    CHECK(data.labels() == std::vector<std::size_t>{1, 0, 1, 0});
    CHECK(data.view(0).row(2)[2] == 0.0);
    CHECK(data.view(1).row(3)[1] == 23.0);
  }
  SUBCASE("ragged rows name the file and line") {
    CHECK(error_of(kFixtures / "ragged").find("view_0.csv:3") != std::string::npos);
  }
  SUBCASE("non-numeric cell") {
    const auto message = error_of(kFixtures / "bad_cell");
    CHECK(message.find("view_0.csv:2") != std::string::npos);
    CHECK(message.find("abc") != std::string::npos);
  }
  SUBCASE("row count mismatch") {
    CHECK(error_of(kFixtures / "row_mismatch").find("labels.csv") != std::string::npos);
  }
  SUBCASE("missing directory") {
    CHECK_FALSE(error_of(kFixtures / "does_not_exist").empty());
  }
  SUBCASE("empty file") {
    const auto dir = scratch_dir("empty");
    fs::create_directories(dir);
    std::ofstream(dir / "view_0.csv").close();
    std::ofstream(dir / "labels.csv") << "0\n";
    CHECK(error_of(dir).find("empty") != std::string::npos);
  }
}

TEST_CASE("save_csv round trip keeps values and tags") {
  const auto base = generate_synthetic({2, 3, 30, 4, 2.0, 9});
  const auto data = inject_unaligned_views(inject_noise_views(base, 0.2, 0.37, 1), 0.2, 2);
  const auto dir = scratch_dir("roundtrip");
  save_csv(data, dir);
  CHECK(fs::exists(dir / "tags.csv"));
  CHECK(load_csv(dir) == data);
}

TEST_CASE("generate_synthetic") {
  const SyntheticSpec spec{3, 4, 400, 10, 5.0, 42};
  const auto a = generate_synthetic(spec);
  CHECK(a.size() == 400);
  CHECK(a.num_views() == 3);
  CHECK(a.view_dims() == std::vector<std::size_t>{10, 10, 10});
  CHECK(a == generate_synthetic(spec));
  auto other = spec;
  other.seed = 43;
  CHECK_FALSE(a == generate_synthetic(other));

  std::vector<std::size_t> per_class(4, 0);
  for (auto label : a.labels()) ++per_class[label];
  CHECK(per_class == std::vector<std::size_t>(4, 100));

  const auto [train, test] = split(a, {0.8, 1});
  for (std::size_t v = 0; v < 3; ++v) CHECK(centroid_accuracy(train, test, v) >= 0.99);

  CHECK_THROWS_AS(generate_synthetic({3, 1, 10, 2, 1.0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(generate_synthetic({3, 2, 10, 0, 1.0, 0}), std::invalid_argument);
}

TEST_CASE("zero separation is chance level") {
  const auto flat = generate_synthetic({2, 4, 4000, 10, 0.0, 3});
  const auto [train, test] = split(flat, {0.5, 1});
  CHECK(std::abs(centroid_accuracy(train, test, 0) - 0.25) < 0.05);
}

TEST_CASE("inject_noise_views") {
  const auto base = generate_synthetic({3, 4, 200, 5, 3.0, 1});
  CHECK(inject_noise_views(base, 0.0, 10.0, 5) == base);

  const auto noisy = inject_noise_views(base, 0.5, 2.0, 5);
  CHECK(noisy.labels() == base.labels());
  CHECK(noisy == inject_noise_views(base, 0.5, 2.0, 5));
  std::size_t tagged = 0;
  for (std::size_t n = 0; n < base.size(); ++n) {
    const auto& tag = noisy.tag(n);
    for (std::size_t v = 0; v < 3; ++v) {
      const bool changed = !std::ranges::equal(noisy.view(v).row(n), base.view(v).row(n));
      CHECK(changed == (tag.kind == TagKind::noise_view && tag.view == v));
    }
    if (tag.kind == TagKind::noise_view) {
      ++tagged;
      CHECK(tag.sigma == 2.0);
    }
  }
  CHECK(tagged == 100);

  SUBCASE("zero sigma tags without changing values") {
    const auto zero = inject_noise_views(base, 0.5, 0.0, 5);
    CHECK(zero.views() == base.views());
    CHECK(std::ranges::count_if(zero.tags(), [](const auto& t) { return !t.is_normal(); }) == 100);
  }
  SUBCASE("noise scales linearly with sigma") {
    const auto small = inject_noise_views(base, 0.5, 1.0, 5);
    for (std::size_t n = 0; n < base.size(); ++n) {
      const auto& tag = small.tag(n);
      if (tag.is_normal()) continue;
      CHECK(noisy.tag(n).view == tag.view);
      for (std::size_t j = 0; j < 5; ++j) {
        const double d1 = small.view(tag.view).row(n)[j] - base.view(tag.view).row(n)[j];
        const double d2 = noisy.view(tag.view).row(n)[j] - base.view(tag.view).row(n)[j];
        CHECK(std::abs(d2 - 2.0 * d1) <= 1e-9 * (1.0 + std::abs(d2)));
      }
    }
  }
  CHECK_THROWS_AS(inject_noise_views(base, 1.5, 1.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(inject_noise_views(base, 0.5, -1.0, 0), std::invalid_argument);
}

TEST_CASE("inject_unaligned_views") {
  const auto base = toy(40, 2, 2);
  CHECK(inject_unaligned_views(base, 0.0, 3) == base);
  const auto swapped = inject_unaligned_views(base, 1.0, 3);
  CHECK(swapped.labels() == base.labels());
  CHECK(swapped == inject_unaligned_views(base, 1.0, 3));
  for (std::size_t n = 0; n < base.size(); ++n) {
    const auto& tag = swapped.tag(n);
    REQUIRE(tag.kind == TagKind::unaligned_view);
    CHECK(base.label(tag.donor) != base.label(n));
    for (std::size_t v = 0; v < 2; ++v) {
      const auto expected = v == tag.view ? base.view(v).row(tag.donor) : base.view(v).row(n);
      CHECK(std::ranges::equal(swapped.view(v).row(n), expected));
    }
  }

  SUBCASE("already corrupted instances are left alone") {
    const auto noisy = inject_noise_views(base, 0.5, 1.0, 1);
    const auto both = inject_unaligned_views(noisy, 1.0, 2);
    for (std::size_t n = 0; n < base.size(); ++n) {
      if (noisy.tag(n).kind == TagKind::noise_view) CHECK(both.tag(n) == noisy.tag(n));
    }
  }
}

TEST_CASE("split") {
  const auto data = toy(100, 2, 10);
  const auto [train, test] = split(data, {0.8, 7});
  CHECK(train.size() == 80);
  CHECK(test.size() == 20);
  std::vector<std::size_t> train_count(10, 0);
  std::vector<std::size_t> test_count(10, 0);
  for (auto l : train.labels()) ++train_count[l];
  for (auto l : test.labels()) ++test_count[l];
  CHECK(train_count == std::vector<std::size_t>(10, 8));
  CHECK(test_count == std::vector<std::size_t>(10, 2));

  std::set<double> seen;
  for (const auto* part : {&train, &test}) {
    for (std::size_t n = 0; n < part->size(); ++n) CHECK(seen.insert(part->view(0).row(n)[0]).second);
  }
  CHECK(seen.size() == 100);

  const auto again = split(data, {0.8, 7});
  CHECK(again.first == train);
  CHECK(again.second == test);
  CHECK_FALSE(split(data, {0.8, 8}).first == train);

  CHECK_THROWS_AS(split(toy(3, 1, 3), {0.8, 0}), std::invalid_argument);
  CHECK_THROWS_AS(split(inject_noise_views(data, 0.1, 1.0, 0), {0.8, 0}), std::invalid_argument);
}

TEST_CASE("Standardizer") {
  const auto data = generate_synthetic({2, 3, 90, 4, 4.0, 5});
  const auto stats = Standardizer::fit(data);
  const auto z = stats.apply(data);
  for (std::size_t v = 0; v < 2; ++v) {
    for (std::size_t j = 0; j < 4; ++j) {
      double mean = 0.0;
      double sq = 0.0;
      for (std::size_t n = 0; n < z.size(); ++n) mean += z.view(v).row(n)[j];
      mean /= static_cast<double>(z.size());
      for (std::size_t n = 0; n < z.size(); ++n) sq += std::pow(z.view(v).row(n)[j] - mean, 2);
      CHECK(std::abs(mean) <= 1e-12);
      CHECK(std::abs(sq / static_cast<double>(z.size()) - 1.0) <= 1e-12);
    }
  }
  CHECK(z.labels() == data.labels());

  Matrix constant(3, 1);
  for (std::size_t i = 0; i < 3; ++i) constant.row(i)[0] = 4.0;
  const MultiViewDataset flat({constant}, {0, 1, 0}, 2);
  const auto flat_stats = Standardizer::fit(flat);
  CHECK(flat_stats.scale[0][0] == 1.0);
  CHECK(flat_stats.apply(flat).view(0).row(1)[0] == 0.0);
}
