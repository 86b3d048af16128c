#include "ecml/opinion_json.hpp"

#include <stdexcept>

namespace ecml {

using nlohmann::json;

namespace {

std::vector<double> numbers(const json& value, const char* field) {
  if (!value.is_array()) {
    throw std::invalid_argument(std::string("'") + field + "' must be an array of numbers");
  }
  std::vector<double> out;
  for (const auto& x : value) {
    if (!x.is_number()) {
      throw std::invalid_argument(std::string("'") + field + "' must be an array of numbers");
    }
    out.push_back(x.get<double>());
  }
  return out;
}

}  // namespace

json to_json(const Opinion& opinion) {
  return {{"belief", std::vector<double>(opinion.belief().begin(), opinion.belief().end())},
          {"uncertainty", opinion.uncertainty()},
          {"base_rate",
           std::vector<double>(opinion.base_rate().begin(), opinion.base_rate().end())}};
}

json to_json(const Evidence& evidence) {
  return {{"evidence", std::vector<double>(evidence.values().begin(), evidence.values().end())}};
}

Opinion opinion_from_json(const json& value) {
  if (!value.is_object()) throw std::invalid_argument("expected a JSON object");
  if (value.contains("evidence")) {
    Evidence e(numbers(value.at("evidence"), "evidence"));
    if (value.contains("base_rate")) {
      return evidence_to_opinion(e, numbers(value.at("base_rate"), "base_rate"));
    }
    return evidence_to_opinion(e);
  }
  if (!value.contains("belief") || !value.contains("uncertainty")) {
    throw std::invalid_argument("object needs 'evidence' or 'belief' and 'uncertainty'");
  }
  auto belief = numbers(value.at("belief"), "belief");
  if (!value.at("uncertainty").is_number()) {
    throw std::invalid_argument("'uncertainty' must be a number");
  }
  const double u = value.at("uncertainty").get<double>();
  auto base_rate = value.contains("base_rate") ? numbers(value.at("base_rate"), "base_rate")
                                               : uniform_base_rate(belief.size());
  return Opinion(std::move(belief), u, std::move(base_rate));
}

std::vector<Opinion> read_opinion_stream(std::istream& in) {
  std::vector<Opinion> out;
  try {
    while (true) {
      in >> std::ws;
      if (in.peek() == std::char_traits<char>::eof()) break;
      json value;
      in >> value;  // non-strict: stops after one value
      if (value.is_array()) {
        for (const auto& item : value) out.push_back(opinion_from_json(item));
      } else {
        out.push_back(opinion_from_json(value));
      }
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed JSON: ") + e.what());
  }
  return out;
}

}  // namespace ecml
