#include "ecml/run_config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "ecml/random.hpp"

namespace ecml {
namespace {

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

std::string fmt(double v) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

template <typename T>
T parse_integer(const std::string& value) {
  T out{};
  const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (value.empty() || ec != std::errc() || end != value.data() + value.size()) {
    throw std::invalid_argument("expected an integer, got '" + value + "'");
  }
  return out;
}

double parse_real(const std::string& value) {
  double out = 0.0;
  const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (value.empty() || ec != std::errc() || end != value.data() + value.size() ||
      !std::isfinite(out)) {
    throw std::invalid_argument("expected a real number, got '" + value + "'");
  }
  return out;
}

bool parse_bool(const std::string& value) {
  if (value == "true") return true;
  if (value == "false") return false;
  throw std::invalid_argument("expected true or false, got '" + value + "'");
}

std::vector<std::size_t> parse_widths(const std::string& value) {
  std::vector<std::size_t> widths;
  if (value.empty() || value == "none") return widths;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) widths.push_back(parse_integer<std::size_t>(trim(item)));
  return widths;
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"seed", [](RunConfig& c, const std::string& v) { c.seed = parse_integer<std::uint64_t>(v); }},
      {"data.source",
       [](RunConfig& c, const std::string& v) {
         if (v == "synthetic") {
           c.source = DataSource::synthetic;
         } else if (v == "csv") {
           c.source = DataSource::csv;
         } else {
           throw std::invalid_argument("expected synthetic or csv, got '" + v + "'");
         }
       }},
      {"data.path", [](RunConfig& c, const std::string& v) { c.data_path = v; }},
      {"synthetic.views",
       [](RunConfig& c, const std::string& v) { c.synthetic.views = parse_integer<std::size_t>(v); }},
      {"synthetic.classes",
       [](RunConfig& c, const std::string& v) { c.synthetic.classes = parse_integer<std::size_t>(v); }},
      {"synthetic.instances",
       [](RunConfig& c, const std::string& v) {
         c.synthetic.instances = parse_integer<std::size_t>(v);
       }},
      {"synthetic.dim",
       [](RunConfig& c, const std::string& v) { c.synthetic.dim = parse_integer<std::size_t>(v); }},
      {"synthetic.separation",
       [](RunConfig& c, const std::string& v) { c.synthetic.separation = parse_real(v); }},
      {"split.train_fraction",
       [](RunConfig& c, const std::string& v) { c.train_fraction = parse_real(v); }},
      {"net.hidden", [](RunConfig& c, const std::string& v) { c.net.hidden = parse_widths(v); }},
      {"net.head", [](RunConfig& c, const std::string& v) { c.net.head = parse_head(v); }},
      {"net.optimizer",
       [](RunConfig& c, const std::string& v) { c.net.optimizer = parse_optimizer(v); }},
      {"net.learning_rate",
       [](RunConfig& c, const std::string& v) { c.net.learning_rate = parse_real(v); }},
      {"net.epochs", [](RunConfig& c, const std::string& v) { c.net.epochs = parse_integer<int>(v); }},
      {"net.batch_size",
       [](RunConfig& c, const std::string& v) { c.net.batch_size = parse_integer<std::size_t>(v); }},
      {"loss.beta", [](RunConfig& c, const std::string& v) { c.loss.beta = parse_real(v); }},
      {"loss.gamma", [](RunConfig& c, const std::string& v) { c.loss.gamma = parse_real(v); }},
      {"loss.annealing_step",
       [](RunConfig& c, const std::string& v) { c.loss.annealing_step = parse_integer<int>(v); }},
      {"inject.noise_fraction",
       [](RunConfig& c, const std::string& v) { c.injection.noise_fraction = parse_real(v); }},
      {"inject.noise_sigma",
       [](RunConfig& c, const std::string& v) { c.injection.noise_sigma = parse_real(v); }},
      {"inject.unaligned_fraction",
       [](RunConfig& c, const std::string& v) { c.injection.unaligned_fraction = parse_real(v); }},
      {"runs", [](RunConfig& c, const std::string& v) { c.runs = parse_integer<int>(v); }},
      {"output.dir", [](RunConfig& c, const std::string& v) { c.output_dir = v; }},
      {"output.timestamp",
       [](RunConfig& c, const std::string& v) { c.timestamp = parse_bool(v); }},
  };
  return table;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace

void RunConfig::validate() const {
  require(source != DataSource::csv || !data_path.empty(), "data.path: required for csv source");
  if (source == DataSource::synthetic) {
    require(synthetic.views >= 1, "synthetic.views: must be >= 1");
    require(synthetic.classes >= 2, "synthetic.classes: must be >= 2");
    require(synthetic.instances >= 2 * synthetic.classes,
            "synthetic.instances: need at least two instances per class");
    require(synthetic.dim >= 1, "synthetic.dim: must be >= 1");
    require(synthetic.separation >= 0.0, "synthetic.separation: must be >= 0");
  }
  require(train_fraction > 0.0 && train_fraction < 1.0, "split.train_fraction: must be in (0, 1)");
  for (auto h : net.hidden) require(h > 0, "net.hidden: widths must be positive");
  require(net.learning_rate > 0.0, "net.learning_rate: must be positive");
  require(net.epochs >= 1, "net.epochs: must be >= 1");
  require(net.batch_size >= 1, "net.batch_size: must be >= 1");
  require(loss.beta >= 0.0, "loss.beta: must be >= 0");
  require(loss.gamma >= 0.0, "loss.gamma: must be >= 0");
  require(loss.annealing_step >= 1, "loss.annealing_step: must be >= 1");
  require(injection.noise_fraction >= 0.0 && injection.noise_fraction <= 1.0,
          "inject.noise_fraction: must be in [0, 1]");
  require(injection.noise_sigma >= 0.0, "inject.noise_sigma: must be >= 0");
  require(injection.unaligned_fraction >= 0.0 && injection.unaligned_fraction <= 1.0,
          "inject.unaligned_fraction: must be in [0, 1]");
  require(runs >= 1, "runs: must be >= 1");
}

RunConfig parse_run_config(const std::string& text) {
  RunConfig config;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) {
      throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    if (!seen.insert(key).second) {
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    try {
      it->second(config, value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + key + ": " + e.what());
    }
  }
  config.validate();
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  RunConfig config = parse_run_config(buffer.str());
  // Relative data paths are taken relative to the config file.
  if (!config.data_path.empty() && config.data_path.is_relative()) {
    config.data_path = path.parent_path() / config.data_path;
  }
  return config;
}

std::string to_string(const RunConfig& c) {
  std::ostringstream out;
  std::string hidden;
  for (std::size_t i = 0; i < c.net.hidden.size(); ++i) {
    hidden += (i ? "," : "") + std::to_string(c.net.hidden[i]);
  }
  out << "seed = " << c.seed << '\n'
      << "data.source = " << (c.source == DataSource::csv ? "csv" : "synthetic") << '\n'
      << "data.path = " << c.data_path.string() << '\n'
      << "synthetic.views = " << c.synthetic.views << '\n'
      << "synthetic.classes = " << c.synthetic.classes << '\n'
      << "synthetic.instances = " << c.synthetic.instances << '\n'
      << "synthetic.dim = " << c.synthetic.dim << '\n'
      << "synthetic.separation = " << fmt(c.synthetic.separation) << '\n'
      << "split.train_fraction = " << fmt(c.train_fraction) << '\n'
      << "net.hidden = " << (hidden.empty() ? "none" : hidden) << '\n'
      << "net.head = " << head_name(c.net.head) << '\n'
      << "net.optimizer = " << optimizer_name(c.net.optimizer) << '\n'
      << "net.learning_rate = " << fmt(c.net.learning_rate) << '\n'
      << "net.epochs = " << c.net.epochs << '\n'
      << "net.batch_size = " << c.net.batch_size << '\n'
      << "loss.beta = " << fmt(c.loss.beta) << '\n'
      << "loss.gamma = " << fmt(c.loss.gamma) << '\n'
      << "loss.annealing_step = " << c.loss.annealing_step << '\n'
      << "inject.noise_fraction = " << fmt(c.injection.noise_fraction) << '\n'
      << "inject.noise_sigma = " << fmt(c.injection.noise_sigma) << '\n'
      << "inject.unaligned_fraction = " << fmt(c.injection.unaligned_fraction) << '\n'
      << "runs = " << c.runs << '\n'
      << "output.dir = " << c.output_dir.string() << '\n'
      << "output.timestamp = " << (c.timestamp ? "true" : "false") << '\n';
  return out.str();
}

std::string config_hash(const RunConfig& config) {
  // Where the results go does not change them.
  RunConfig experiment = config;
  experiment.output_dir = RunConfig{}.output_dir;
  experiment.timestamp = false;
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(to_string(experiment))));
  return buf;
}

}  // namespace ecml
