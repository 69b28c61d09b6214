#include "upmp/search.hpp"

#include <unordered_set>

namespace upmp {

std::string to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::solved: return "solved";
        case SolveStatus::budget_exhausted: return "budget_exhausted";
        case SolveStatus::dead_end: return "dead_end";
        case SolveStatus::scorer_failure: return "scorer_failure";
        case SolveStatus::timeout: return "timeout";
    }
    return "unknown";
}

SolveResult solve(const WarehouseState& initial, Scorer& scorer, const SolveOptions& options) {
    const auto started = Clock::now();
    SolveResult result;
    auto finish = [&](SolveStatus status) {
        result.status = status;
        result.solved = status == SolveStatus::solved;
        result.move_count = result.solved ? result.moves.size() : options.m_max;
        result.wall_time = Clock::now() - started;
        return result;
    };

    WarehouseState current = initial;
    std::unordered_set<std::string> visited{canonical_key(current)};
    std::vector<Move> candidates;
    std::vector<WarehouseState> successors;
    std::vector<std::string> keys;

    for (;;) {
        if (is_blockage_free(current)) {
            return finish(SolveStatus::solved);
        }
        if (result.moves.size() >= options.m_max) {
            return finish(SolveStatus::budget_exhausted);
        }
        if (options.deadline && Clock::now() >= *options.deadline) {
            return finish(SolveStatus::timeout);
        }

        candidates.clear();
        successors.clear();
        keys.clear();
        for (const Move& m : enumerate_moves(current)) {
            WarehouseState next = apply_move(current, m);
            std::string key = canonical_key(next);
            if (visited.contains(key)) continue;
            candidates.push_back(m);
            successors.push_back(std::move(next));
            keys.push_back(std::move(key));
        }
        if (successors.empty()) {
            return finish(SolveStatus::dead_end);
        }
        result.expanded_states += successors.size();

        std::vector<double> scores;
        try {
            scores = scorer.score(successors, options.deadline);
        } catch (const ScorerError& e) {
            result.failure = e.what();
            return finish(e.kind() == "timeout" ? SolveStatus::timeout : SolveStatus::scorer_failure);
        } catch (const std::exception& e) {
            result.failure = e.what();
            return finish(SolveStatus::scorer_failure);
        }

        // Candidates are in lexicographic order, so the first maximum wins ties.
        std::size_t best = 0;
        for (std::size_t i = 1; i < scores.size(); ++i) {
            if (scores[i] > scores[best]) best = i;
        }
        result.moves.push_back(candidates[best]);
        visited.insert(std::move(keys[best]));
        current = std::move(successors[best]);
    }
}

ReplayError::ReplayError(std::size_t index, const std::string& detail)
    : IllegalMove("move " + std::to_string(index) + " " + detail), index_(index) {}

WarehouseState replay(const WarehouseState& initial, std::span<const Move> moves) {
    WarehouseState state = initial;
    for (std::size_t i = 0; i < moves.size(); ++i) {
        if (auto why = move_violation(state, moves[i])) {
            throw ReplayError(i, to_string(moves[i]) + ": " + *why);
        }
        state = apply_move(state, moves[i]);
    }
    return state;
}

}  // namespace upmp
