#pragma once

#include <istream>
#include <vector>

#include <json.hpp>

#include "ecml/opinion.hpp"

// {"belief": [...], "uncertainty": u, "base_rate": [...]}  and  {"evidence": [...]}

namespace ecml {

nlohmann::json to_json(const Opinion& opinion);
nlohmann::json to_json(const Evidence& evidence);

/// Accepts either object form. Evidence objects map through
/// evidence_to_opinion (with their own "base_rate" if given, else uniform).
/// An opinion object without "base_rate" gets the uniform base rate.
/// Throws std::invalid_argument on malformed input.
Opinion opinion_from_json(const nlohmann::json& value);

/// Reads a stream holding one JSON array of objects or a sequence of
/// whitespace-separated objects.
std::vector<Opinion> read_opinion_stream(std::istream& in);

}  // namespace ecml
