#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "ecml/data.hpp"
#include "ecml/losses.hpp"
#include "ecml/net.hpp"

// Flat "key = value" run configuration. Blank lines and lines starting with
// '#' are ignored; unknown keys, duplicate keys and ill-typed values are
// rejected with the offending line number.

namespace ecml {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class DataSource { synthetic, csv };

struct InjectionSpec {
  double noise_fraction = 0.0;
  double noise_sigma = 0.0;
  double unaligned_fraction = 0.0;
};

struct RunConfig {
  std::uint64_t seed = 0;
  DataSource source = DataSource::synthetic;
  std::filesystem::path data_path;
  SyntheticSpec synthetic;  ///< seed field unused; derived from the run seed
  double train_fraction = 0.8;
  NetConfig net;            ///< input_dims, num_classes and seed are filled per run
  LossConfig loss;
  InjectionSpec injection;
  int runs = 1;
  std::filesystem::path output_dir = "runs";
  bool timestamp = false;

  void validate() const;
};

RunConfig parse_run_config(const std::string& text);
/// Relative data paths are resolved against the directory of the file.
RunConfig load_run_config(const std::filesystem::path& path);

/// Canonical text form: every key, fixed order, round-trip precision.
std::string to_string(const RunConfig& config);

/// Hex digest of the canonical text without the output.* keys, used to name
/// run directories.
std::string config_hash(const RunConfig& config);

}  // namespace ecml
