#include "upmp/core.hpp"

#include <algorithm>
#include <cstdint>
#include <sstream>

namespace upmp {

namespace {

constexpr SlotValue kMaxSlotValue = 0xFFFF;

void require_valid(std::span<const SlotValue> lane) {
    if (!validate_lane(lane)) {
        throw MalformedLane("zero slot after a load");
    }
}

// Number of empty slots; equals the index of the accessible load.
std::size_t empty_prefix(std::span<const SlotValue> lane) {
    return static_cast<std::size_t>(
        std::find_if(lane.begin(), lane.end(), [](SlotValue v) { return v != 0; }) - lane.begin());
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
}

}  // namespace

MalformedLane::MalformedLane(const std::string& detail) : Error("malformed lane: " + detail) {}

IllegalMove::IllegalMove(const std::string& detail) : Error("illegal move: " + detail) {}

bool validate_lane(std::span<const SlotValue> lane) {
    bool seen_load = false;
    for (SlotValue v : lane) {
        if (v < 0) {
            return false;
        }
        if (v == 0 && seen_load) {
            return false;
        }
        seen_load = seen_load || v != 0;
    }
    return true;
}

std::vector<std::size_t> blocking_indices(std::span<const SlotValue> lane) {
    require_valid(lane);
    // Walk inward-to-outward tracking the most urgent load seen deeper.
    std::vector<std::size_t> out;
    SlotValue deepest_min = 0;
    for (std::size_t i = lane.size(); i-- > 0;) {
        const SlotValue v = lane[i];
        if (v == 0) {
            break;
        }
        if (deepest_min != 0 && deepest_min < v) {
            out.push_back(i);
        } else {
            deepest_min = v;
        }
    }
    std::reverse(out.begin(), out.end());
    return out;
}

std::optional<std::size_t> accessible_index(std::span<const SlotValue> lane) {
    require_valid(lane);
    const std::size_t idx = empty_prefix(lane);
    if (idx == lane.size()) {
        return std::nullopt;
    }
    return idx;
}

WarehouseState::WarehouseState(std::vector<Lane> lanes) : lanes_(std::move(lanes)) {
    if (lanes_.empty()) {
        throw MalformedLane("state has no lanes");
    }
    const std::size_t depth = lanes_.front().size();
    if (depth == 0) {
        throw MalformedLane("lane depth must be at least 1");
    }
    for (std::size_t i = 0; i < lanes_.size(); ++i) {
        const Lane& lane = lanes_[i];
        if (lane.size() != depth) {
            throw MalformedLane("lane " + std::to_string(i) + " has depth " + std::to_string(lane.size()) +
                                ", expected " + std::to_string(depth));
        }
        if (!validate_lane(lane)) {
            throw MalformedLane("lane " + std::to_string(i) + " has a zero slot after a load");
        }
        if (std::any_of(lane.begin(), lane.end(), [](SlotValue v) { return v > kMaxSlotValue; })) {
            throw MalformedLane("lane " + std::to_string(i) + " has a priority class above 65535");
        }
    }
}

std::size_t count_blocking(const WarehouseState& state) {
    std::size_t total = 0;
    for (const Lane& lane : state.lanes()) {
        total += blocking_indices(lane).size();
    }
    return total;
}

bool is_blockage_free(const WarehouseState& state) { return count_blocking(state) == 0; }

std::vector<Move> enumerate_moves(const WarehouseState& state) {
    const std::size_t n = state.lane_count();
    std::vector<bool> has_load(n);
    std::vector<bool> has_space(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Lane& lane = state.lane(i);
        has_load[i] = lane.back() != 0;
        has_space[i] = lane.front() == 0;
    }
    std::vector<Move> moves;
    for (std::size_t s = 0; s < n; ++s) {
        if (!has_load[s]) {
            continue;
        }
        for (std::size_t d = 0; d < n; ++d) {
            if (d != s && has_space[d]) {
                moves.push_back({s, d});
            }
        }
    }
    return moves;
}

std::optional<std::string> move_violation(const WarehouseState& state, Move move) {
    const std::size_t n = state.lane_count();
    if (move.source >= n || move.dest >= n) {
        return "lane index out of range (" + std::to_string(n) + " lanes)";
    }
    if (move.source == move.dest) {
        return "source equals destination";
    }
    if (state.lane(move.source).back() == 0) {
        return "source lane " + std::to_string(move.source) + " is empty";
    }
    if (state.lane(move.dest).front() != 0) {
        return "destination lane " + std::to_string(move.dest) + " is full";
    }
    return std::nullopt;
}

WarehouseState apply_move(const WarehouseState& state, Move move) {
    if (auto why = move_violation(state, move)) {
        throw IllegalMove(to_string(move) + ": " + *why);
    }
    std::vector<Lane> lanes = state.lanes();
    Lane& src = lanes[move.source];
    Lane& dst = lanes[move.dest];
    const std::size_t from = empty_prefix(src);
    const std::size_t to = empty_prefix(dst) - 1;
    dst[to] = src[from];
    src[from] = 0;
    return WarehouseState(std::move(lanes), WarehouseState::Unchecked{});
}

std::string canonical_key(const WarehouseState& state) {
    std::string key;
    key.reserve(8 + 2 * state.lane_count() * state.depth());
    put_u32(key, static_cast<std::uint32_t>(state.lane_count()));
    put_u32(key, static_cast<std::uint32_t>(state.depth()));
    for (const Lane& lane : state.lanes()) {
        for (SlotValue v : lane) {
            key.push_back(static_cast<char>(v & 0xFF));
            key.push_back(static_cast<char>((v >> 8) & 0xFF));
        }
    }
    return key;
}

std::string to_string(const WarehouseState& state) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < state.lane_count(); ++i) {
        if (i) os << ", ";
        os << '[';
        const Lane& lane = state.lane(i);
        for (std::size_t j = 0; j < lane.size(); ++j) {
            if (j) os << ", ";
            os << lane[j];
        }
        os << ']';
    }
    os << ']';
    return os.str();
}

std::string to_string(Move move) {
    return "(" + std::to_string(move.source) + ", " + std::to_string(move.dest) + ")";
}

}  // namespace upmp
