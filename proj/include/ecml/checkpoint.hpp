#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "ecml/data.hpp"
#include "ecml/losses.hpp"
#include "ecml/net.hpp"

namespace ecml {

inline constexpr const char* kCheckpointFormat = "ecml-checkpoint";
inline constexpr int kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything needed to rebuild a trained model and preprocess new data.
struct Checkpoint {
  NetConfig net;
  LossConfig loss;
  Standardizer standardizer;
  ParameterSet parameters;

  EvidentialNet make_net() const { return EvidentialNet(net, parameters); }
};

/// JSON document; doubles are written with round-trip precision so loading
/// restores every parameter bit for bit.
std::string checkpoint_to_string(const Checkpoint& checkpoint);
Checkpoint checkpoint_from_string(const std::string& text);

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
/// Throws CheckpointError for unreadable files, a foreign format or a version mismatch.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace ecml
