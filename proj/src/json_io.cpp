#include "upmp/json_io.hpp"

#include <fstream>
#include <sstream>

namespace upmp {

Json state_to_json(const WarehouseState& state) {
    Json lanes = Json::array();
    for (const Lane& lane : state.lanes()) {
        lanes.push_back(lane);
    }
    return lanes;
}

WarehouseState state_from_json(const Json& j, const std::string& field) {
    if (!j.is_array() || j.empty()) {
        throw JsonFieldError("field '" + field + "': expected a non-empty list of lanes");
    }
    std::vector<Lane> lanes;
    lanes.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        const Json& lane = j[i];
        const std::string where = field + "[" + std::to_string(i) + "]";
        if (!lane.is_array()) {
            throw JsonFieldError("field '" + where + "': expected a list of integers");
        }
        Lane slots;
        slots.reserve(lane.size());
        for (std::size_t k = 0; k < lane.size(); ++k) {
            if (!lane[k].is_number_integer()) {
                throw JsonFieldError("field '" + where + "[" + std::to_string(k) + "]': expected an integer");
            }
            slots.push_back(lane[k].get<SlotValue>());
        }
        lanes.push_back(std::move(slots));
    }
    try {
        return WarehouseState(std::move(lanes));
    } catch (const MalformedLane& e) {
        throw JsonFieldError("field '" + field + "': " + e.what());
    }
}

std::vector<WarehouseState> states_from_json(const Json& j, const std::string& field) {
    if (!j.is_array()) {
        throw JsonFieldError("field '" + field + "': expected a list of warehouse states");
    }
    std::vector<WarehouseState> states;
    states.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        states.push_back(state_from_json(j[i], field + "[" + std::to_string(i) + "]"));
    }
    return states;
}

Json states_to_json(const std::vector<WarehouseState>& states) {
    Json out = Json::array();
    for (const auto& s : states) {
        out.push_back(state_to_json(s));
    }
    return out;
}

Json parse_json_text(const std::string& text, const std::string& origin) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw JsonFieldError(origin + ": " + e.what());
    }
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace upmp
