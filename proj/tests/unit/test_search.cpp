#include <doctest.h>

#include <set>

#include "upmp/instances.hpp"
#include "upmp/search.hpp"

using namespace upmp;

namespace {

WarehouseState S(std::vector<Lane> lanes) { return WarehouseState(std::move(lanes)); }

class ConstantScorer final : public Scorer {
public:
    [[nodiscard]] std::string name() const override { return "constant"; }
    int calls = 0;

protected:
    std::vector<double> do_score(std::span<const WarehouseState> states, Deadline) override {
        ++calls;
        return std::vector<double>(states.size(), 1.0);
    }
};

class ThrowingScorer final : public Scorer {
public:
    [[nodiscard]] std::string name() const override { return "throwing"; }

protected:
    std::vector<double> do_score(std::span<const WarehouseState>, Deadline) override {
        throw ScorerError("runtime", "boom");
    }
};

}  // namespace

TEST_CASE("solve: already blockage-free") {
    auto scorer = lookup_scorer("blocking");
    const auto r = solve(S({{0, 0, 1, 2}, {1, 2, 3, 3}}), *scorer, 100);
    CHECK(r.solved);
    CHECK(r.status == SolveStatus::solved);
    CHECK(r.moves.empty());
    CHECK(r.move_count == 0);

    const auto full = solve(S({{1, 2}, {3, 4}}), *scorer, 100);
    CHECK(full.solved);
    CHECK(full.move_count == 0);
}

TEST_CASE("solve: one relocation clears the only blocker") {
    auto scorer = lookup_scorer("blocking");
    const auto r = solve(S({{0, 0}, {5, 1}}), *scorer, 100);
    CHECK(r.solved);
    CHECK(r.moves == std::vector<Move>{{1, 0}});
    CHECK(r.move_count == 1);
    CHECK(r.expanded_states == 1);
}

TEST_CASE("solve: dead end where every successor was visited") {
    // One empty slot shuttles a load back and forth between two lanes.
    auto scorer = lookup_scorer("blocking");
    const auto r = solve(S({{0, 1}, {2, 1}}), *scorer, 100);
    CHECK_FALSE(r.solved);
    CHECK(r.status == SolveStatus::dead_end);
    CHECK(r.move_count == 100);
    CHECK(r.moves == std::vector<Move>{{1, 0}});
}

TEST_CASE("solve: budget exhaustion reports m_max") {
    auto scorer = lookup_scorer("blocking");
    const WarehouseState hard = S({{0, 0, 0}, {3, 2, 1}, {0, 0, 0}});
    const auto r = solve(hard, *scorer, 1);
    CHECK_FALSE(r.solved);
    CHECK(r.status == SolveStatus::budget_exhausted);
    CHECK(r.moves.size() == 1);
    CHECK(r.move_count == 1);
    CHECK(solve(hard, *scorer, 10).solved);
}

TEST_CASE("solve: ties go to the lexicographically smallest move") {
    ConstantScorer scorer;
    const auto r = solve(S({{0, 0, 0}, {0, 2, 1}, {0, 0, 0}}), scorer, 1);
    REQUIRE(r.moves.size() == 1);
    CHECK(r.moves[0] == Move{1, 0});
}

TEST_CASE("solve: scorer failures are reported separately") {
    ThrowingScorer scorer;
    const auto r = solve(S({{0, 0}, {5, 1}}), scorer, 100);
    CHECK_FALSE(r.solved);
    CHECK(r.status == SolveStatus::scorer_failure);
    CHECK(r.move_count == 100);
    CHECK(r.failure.find("boom") != std::string::npos);
}

TEST_CASE("solve: an expired deadline stops the search") {
    ConstantScorer scorer;
    const auto r = solve(S({{0, 0}, {5, 1}}), scorer, SolveOptions{50, Clock::now() - std::chrono::seconds(1)});
    CHECK(r.status == SolveStatus::timeout);
    CHECK(r.move_count == 50);
    CHECK(scorer.calls == 0);
}

TEST_CASE("replay") {
    const WarehouseState x = S({{0, 0}, {5, 1}});
    CHECK(replay(x, {}) == x);
    CHECK(replay(x, std::vector<Move>{{1, 0}}) == S({{0, 5}, {0, 1}}));
    try {
        replay(x, std::vector<Move>{{1, 0}, {1, 0}, {1, 0}});  // lane 1 is empty by the third move
        FAIL("expected ReplayError");
    } catch (const ReplayError& e) {
        CHECK(e.index() == 2);
    }
}

TEST_CASE("property: solve is sound, deterministic and never revisits a state") {
    for (const std::string name : {"blocking", "qwen-ceoh", "gpt4o-eoh"}) {
        auto scorer = lookup_scorer(name);
        for (std::uint64_t seed = 0; seed < 30; ++seed) {
            InstanceConfig c;
            c.bay_rows = 4;
            c.bay_cols = 4;
            c.fill_pct = 0.5;
            c.seed = seed;
            const Instance inst = generate_instance(c);
            const SolveResult r = solve(inst.initial, *scorer, 100);
            const SolveResult again = solve(inst.initial, *scorer, 100);
            CHECK(r.moves == again.moves);
            CHECK(r.status == again.status);

            std::set<std::string> seen{canonical_key(inst.initial)};
            WarehouseState cur = inst.initial;
            for (const Move& m : r.moves) {
                cur = apply_move(cur, m);
                CHECK(seen.insert(canonical_key(cur)).second);
            }
            if (r.solved) {
                CHECK(is_blockage_free(cur));
                CHECK(r.move_count == r.moves.size());
                CHECK(r.move_count >= inst.lower_bound);
            } else {
                CHECK(r.move_count == 100);
            }
        }
    }
}
