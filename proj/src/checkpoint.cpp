#include "ecml/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace ecml {

using nlohmann::json;

std::string checkpoint_to_string(const Checkpoint& checkpoint) {
  const auto& net = checkpoint.net;
  json doc;
  doc["format"] = kCheckpointFormat;
  doc["version"] = kCheckpointVersion;
  doc["config"] = {
      {"input_dims", net.input_dims},
      {"hidden", net.hidden},
      {"num_classes", net.num_classes},
      {"head", head_name(net.head)},
      {"optimizer", optimizer_name(net.optimizer)},
      {"seed", net.seed},
      {"learning_rate", net.learning_rate},
      {"epochs", net.epochs},
      {"batch_size", net.batch_size},
  };
  doc["loss"] = {{"annealing_step", checkpoint.loss.annealing_step},
                 {"beta", checkpoint.loss.beta},
                 {"gamma", checkpoint.loss.gamma}};
  doc["standardizer"] = {{"mean", checkpoint.standardizer.mean},
                         {"scale", checkpoint.standardizer.scale}};
  json views = json::array();
  for (const auto& layers : checkpoint.parameters) {
    json stack = json::array();
    for (const auto& layer : layers) {
      stack.push_back({{"in", layer.in},
                       {"out", layer.out},
                       {"weight", layer.weight},
                       {"bias", layer.bias}});
    }
    views.push_back(std::move(stack));
  }
  doc["parameters"] = std::move(views);
  return doc.dump(1) + "\n";
}

Checkpoint checkpoint_from_string(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw CheckpointError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || doc.value("format", "") != kCheckpointFormat) {
    throw CheckpointError("not an ecml checkpoint");
  }
  const int version = doc.value("version", -1);
  if (version != kCheckpointVersion) {
    throw CheckpointError("checkpoint version " + std::to_string(version) +
                          " is not supported (expected " + std::to_string(kCheckpointVersion) +
                          ")");
  }
  try {
    Checkpoint cp;
    const auto& c = doc.at("config");
    cp.net.input_dims = c.at("input_dims").get<std::vector<std::size_t>>();
    cp.net.hidden = c.at("hidden").get<std::vector<std::size_t>>();
    cp.net.num_classes = c.at("num_classes").get<std::size_t>();
    cp.net.head = parse_head(c.at("head").get<std::string>());
    cp.net.optimizer = parse_optimizer(c.at("optimizer").get<std::string>());
    cp.net.seed = c.at("seed").get<std::uint64_t>();
    cp.net.learning_rate = c.at("learning_rate").get<double>();
    cp.net.epochs = c.at("epochs").get<int>();
    cp.net.batch_size = c.at("batch_size").get<std::size_t>();
    const auto& l = doc.at("loss");
    cp.loss.annealing_step = l.at("annealing_step").get<int>();
    cp.loss.beta = l.at("beta").get<double>();
    cp.loss.gamma = l.at("gamma").get<double>();
    cp.standardizer.mean = doc.at("standardizer").at("mean").get<std::vector<std::vector<double>>>();
    cp.standardizer.scale =
        doc.at("standardizer").at("scale").get<std::vector<std::vector<double>>>();
    for (const auto& stack : doc.at("parameters")) {
      auto& layers = cp.parameters.emplace_back();
      for (const auto& entry : stack) {
        DenseLayer layer;
        layer.in = entry.at("in").get<std::size_t>();
        layer.out = entry.at("out").get<std::size_t>();
        layer.weight = entry.at("weight").get<std::vector<double>>();
        layer.bias = entry.at("bias").get<std::vector<double>>();
        layers.push_back(std::move(layer));
      }
    }
    // Shape validation happens here rather than at first use.
    (void)cp.make_net();
    if (cp.standardizer.mean.size() != cp.net.input_dims.size() ||
        cp.standardizer.scale.size() != cp.net.input_dims.size()) {
      throw CheckpointError("standardizer does not match the network views");
    }
    return cp;
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("malformed checkpoint: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw CheckpointError(std::string("inconsistent checkpoint: ") + e.what());
  }
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw CheckpointError("cannot write " + path.string());
  out << checkpoint_to_string(checkpoint);
  if (!out) throw CheckpointError("write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return checkpoint_from_string(buffer.str());
}

}  // namespace ecml
