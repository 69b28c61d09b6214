#include <doctest.h>

#include <algorithm>
#include <map>

#include "../support/random_states.hpp"
#include "upmp/core.hpp"

using namespace upmp;

namespace {

WarehouseState S(std::vector<Lane> lanes) { return WarehouseState(std::move(lanes)); }

std::vector<std::size_t> brute_blocking(const Lane& lane) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < lane.size(); ++i) {
        if (lane[i] == 0) continue;
        for (std::size_t j = i + 1; j < lane.size(); ++j) {
            if (lane[j] > 0 && lane[j] < lane[i]) {
                out.push_back(i);
                break;
            }
        }
    }
    return out;
}

std::map<int, int> value_histogram(const WarehouseState& s) {
    std::map<int, int> h;
    for (const auto& lane : s.lanes())
        for (int v : lane) ++h[v];
    return h;
}

}  // namespace

TEST_CASE("validate_lane follows the zero-prefix rule") {
    CHECK_FALSE(validate_lane(Lane{1, 1, 0, 0}));
    CHECK_FALSE(validate_lane(Lane{2, 0, 2}));
    CHECK(validate_lane(Lane{0, 0, 1, 2}));
    CHECK(validate_lane(Lane{1, 2, 3, 3}));
    CHECK(validate_lane(Lane{0, 0, 0}));
    CHECK_FALSE(validate_lane(Lane{0, -1}));
}

TEST_CASE("blocking_indices") {
    using V = std::vector<std::size_t>;
    CHECK(blocking_indices(Lane{0, 4, 1}) == V{1});
    CHECK(blocking_indices(Lane{3, 3, 2}) == V{0, 1});
    CHECK(blocking_indices(Lane{0, 5, 1, 5, 2}) == V{1, 3});
    CHECK(blocking_indices(Lane{0, 4, 4, 3}) == V{1, 2});
    CHECK(blocking_indices(Lane{1, 2, 3, 3}).empty());
    CHECK_THROWS_WITH_AS(blocking_indices(Lane{1, 0}), doctest::Contains("malformed lane"), MalformedLane);
}

TEST_CASE("count_blocking and is_blockage_free") {
    CHECK(count_blocking(S({{0, 2, 3}, {0, 5, 5}, {5, 1, 1}})) == 1);
    CHECK(count_blocking(S({{0, 0, 1, 2}, {1, 2, 3, 3}})) == 0);
    CHECK(count_blocking(S({{0, 5, 1, 5, 2}})) == 2);
    CHECK(is_blockage_free(S({{0, 0, 1, 2}, {1, 2, 3, 3}})));
    CHECK_FALSE(is_blockage_free(S({{0, 4, 1}})));
    CHECK(is_blockage_free(S({{0, 0, 0}})));
}

TEST_CASE("accessible_index") {
    CHECK(accessible_index(Lane{0, 0, 1, 2}) == 2u);
    CHECK(accessible_index(Lane{5, 1, 1}) == 0u);
    CHECK_FALSE(accessible_index(Lane{0, 0, 0}).has_value());
    CHECK_THROWS_AS(accessible_index(Lane{3, 0}), MalformedLane);
}

TEST_CASE("WarehouseState rejects malformed input") {
    CHECK_THROWS_AS(S({}), MalformedLane);
    CHECK_THROWS_AS(S({{1, 0}}), MalformedLane);
    CHECK_THROWS_AS(S({{0, 1}, {1}}), MalformedLane);
    CHECK_THROWS_AS(S({{}}), MalformedLane);
}

TEST_CASE("enumerate_moves") {
    CHECK(enumerate_moves(S({{0, 0}, {5, 1}})) == std::vector<Move>{{1, 0}});
    CHECK(enumerate_moves(S({{0, 1}, {0, 2}})) == std::vector<Move>{{0, 1}, {1, 0}});
    CHECK(enumerate_moves(S({{1, 2}, {3, 4}})).empty());
}

TEST_CASE("apply_move") {
    CHECK(apply_move(S({{0, 0}, {5, 1}}), {1, 0}) == S({{0, 5}, {0, 1}}));
    CHECK(apply_move(S({{0, 1}, {0, 2}}), {0, 1}) == S({{0, 0}, {1, 2}}));
    CHECK_THROWS_WITH_AS(apply_move(S({{1, 2}, {3, 4}}), {0, 1}), doctest::Contains("full"), IllegalMove);
    CHECK_THROWS_WITH_AS(apply_move(S({{0, 0}, {0, 4}}), {0, 1}), doctest::Contains("empty"), IllegalMove);
    CHECK_THROWS_AS(apply_move(S({{0, 1}, {0, 2}}), {1, 1}), IllegalMove);
    CHECK_THROWS_AS(apply_move(S({{0, 1}, {0, 2}}), {0, 7}), IllegalMove);

    const WarehouseState before = S({{0, 0, 3}, {0, 2, 1}});
    const WarehouseState copy = before;
    apply_move(before, {1, 0});
    CHECK(before == copy);
}

TEST_CASE("canonical_key") {
    CHECK(canonical_key(S({{0, 1}})) == canonical_key(S({{0, 1}})));
    CHECK(canonical_key(S({{0, 1}})) != canonical_key(S({{1, 1}})));
    CHECK(canonical_key(S({{0, 1}, {0, 2}})) != canonical_key(S({{0, 2}, {0, 1}})));
    CHECK(canonical_key(S({{0, 1}})).size() == 8 + 2 * 2);
    // Lane count and depth are part of the key.
    CHECK(canonical_key(S({{0, 0, 0, 1}})) != canonical_key(S({{0, 0}, {0, 1}})));
}

TEST_CASE("property: blocking matches the definition and its characterization") {
    SplitMix64 rng(11);
    for (int t = 0; t < 2000; ++t) {
        const WarehouseState s = testing::random_state(rng, 1 + rng.below(4), 1 + rng.below(6), 1 + rng.below(5));
        for (const auto& lane : s.lanes()) {
            const auto got = blocking_indices(lane);
            REQUIRE(got == brute_blocking(lane));
            const auto first = std::find_if(lane.begin(), lane.end(), [](int v) { return v != 0; });
            CHECK(got.empty() == std::is_sorted(first, lane.end()));
        }
    }
}

TEST_CASE("property: move enumeration is complete and moves conserve loads") {
    SplitMix64 rng(12);
    for (int t = 0; t < 1000; ++t) {
        const WarehouseState s = testing::random_state(rng, 1 + rng.below(4), 1 + rng.below(4), 1 + rng.below(4));
        const auto moves = enumerate_moves(s);
        CHECK(std::is_sorted(moves.begin(), moves.end()));
        for (std::size_t a = 0; a < s.lane_count(); ++a) {
            for (std::size_t b = 0; b < s.lane_count(); ++b) {
                const bool legal = a != b && std::any_of(s.lane(a).begin(), s.lane(a).end(), [](int v) { return v; }) &&
                                   std::count(s.lane(b).begin(), s.lane(b).end(), 0) > 0;
                const bool listed = std::find(moves.begin(), moves.end(), Move{a, b}) != moves.end();
                REQUIRE(legal == listed);
                CHECK(legal == !move_violation(s, {a, b}).has_value());
            }
        }
        for (const Move& m : moves) {
            const WarehouseState next = apply_move(s, m);
            for (const auto& lane : next.lanes()) REQUIRE(validate_lane(lane));
            CHECK(value_histogram(next) == value_histogram(s));
            // The moved load lands in the deepest empty slot of dest.
            const auto src_idx = *accessible_index(s.lane(m.source));
            const auto dst_idx = *accessible_index(next.lane(m.dest));
            CHECK(next.lane(m.dest)[dst_idx] == s.lane(m.source)[src_idx]);
            CHECK(dst_idx + 1 == static_cast<std::size_t>(std::count(s.lane(m.dest).begin(), s.lane(m.dest).end(), 0)));
        }
    }
}

TEST_CASE("property: a move followed by its reverse restores the state") {
    SplitMix64 rng(13);
    for (int t = 0; t < 500; ++t) {
        const WarehouseState s = testing::random_state(rng, 2 + rng.below(3), 1 + rng.below(4), 1 + rng.below(5));
        for (const Move& m : enumerate_moves(s)) {
            const WarehouseState there = apply_move(s, m);
            CHECK(apply_move(there, {m.dest, m.source}) == s);
        }
    }
}

TEST_CASE("to_string") {
    CHECK(to_string(S({{0, 1}, {2, 3}})) == "[[0, 1], [2, 3]]");
    CHECK(to_string(Move{1, 0}) == "(1, 0)");
}
