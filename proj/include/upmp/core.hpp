#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace upmp {

/// Base class for all domain errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class MalformedLane : public Error {
public:
    explicit MalformedLane(const std::string& detail);
};

class IllegalMove : public Error {
public:
    explicit IllegalMove(const std::string& detail);
};

/// Slot content: 0 is empty, 1..P is a priority class with 1 the most urgent.
using SlotValue = int;

/// Slots of one lane. Index 0 is the outermost (accessible) slot.
using Lane = std::vector<SlotValue>;

struct Move {
    std::size_t source = 0;
    std::size_t dest = 0;

    friend bool operator==(const Move&, const Move&) = default;
    friend auto operator<=>(const Move&, const Move&) = default;
};

/// True iff the empty slots of the lane form a prefix and no value is negative.
bool validate_lane(std::span<const SlotValue> lane);

/// Indices of loads that sit in front of a strictly more urgent load.
std::vector<std::size_t> blocking_indices(std::span<const SlotValue> lane);

/// Index of the outermost load, or nullopt for an empty lane.
std::optional<std::size_t> accessible_index(std::span<const SlotValue> lane);

/// An immutable warehouse snapshot: equally deep lanes, each zero-prefixed.
class WarehouseState {
public:
    /// Throws MalformedLane when a lane breaks the zero-prefix rule, lanes
    /// differ in depth, or the state has no lanes.
    explicit WarehouseState(std::vector<Lane> lanes);

    [[nodiscard]] std::size_t lane_count() const { return lanes_.size(); }
    [[nodiscard]] std::size_t depth() const { return lanes_.front().size(); }
    [[nodiscard]] const Lane& lane(std::size_t i) const { return lanes_.at(i); }
    [[nodiscard]] const std::vector<Lane>& lanes() const { return lanes_; }

    friend bool operator==(const WarehouseState&, const WarehouseState&) = default;

private:
    struct Unchecked {};
    WarehouseState(std::vector<Lane> lanes, Unchecked) : lanes_(std::move(lanes)) {}

    std::vector<Lane> lanes_;

    friend WarehouseState apply_move(const WarehouseState& state, Move move);
};

std::size_t count_blocking(const WarehouseState& state);

bool is_blockage_free(const WarehouseState& state);

/// All legal moves in lexicographic (source, dest) order.
std::vector<Move> enumerate_moves(const WarehouseState& state);

/// Checks legality without applying; returns the violated precondition, if any.
std::optional<std::string> move_violation(const WarehouseState& state, Move move);

/// Moves the accessible load of `move.source` into the deepest empty slot of
/// `move.dest`. Throws IllegalMove.
WarehouseState apply_move(const WarehouseState& state, Move move);

/// Stable byte encoding: u32 lane count, u32 depth (little endian), then every
/// slot as u16 little endian, lane-major. Equal shapes map injectively.
std::string canonical_key(const WarehouseState& state);

/// "[[0, 1], [2, 3]]" style rendering used in messages and the CLI.
std::string to_string(const WarehouseState& state);
std::string to_string(Move move);

}  // namespace upmp
