#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "upmp/core.hpp"

namespace upmp {

using Json = nlohmann::ordered_json;

/// Thrown for structurally wrong JSON documents; the message names the field.
class JsonFieldError : public Error {
public:
    using Error::Error;
};

Json state_to_json(const WarehouseState& state);

/// `field` prefixes error messages, e.g. "lanes" or "warehouse_states[2]".
WarehouseState state_from_json(const Json& j, const std::string& field);

/// Parses a list of states (the three-level nested list used by scorers).
std::vector<WarehouseState> states_from_json(const Json& j, const std::string& field);

Json states_to_json(const std::vector<WarehouseState>& states);

/// Parses text, turning nlohmann parse errors into JsonFieldError with the
/// origin and line/column.
Json parse_json_text(const std::string& text, const std::string& origin);

std::string read_text_file(const std::string& path);

}  // namespace upmp
