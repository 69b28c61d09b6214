#pragma once

#include <chrono>
#include <string>
#include <vector>

#include "upmp/core.hpp"
#include "upmp/heuristics.hpp"

namespace upmp {

enum class SolveStatus {
    solved,
    budget_exhausted,  ///< m_max moves committed without reaching a blockage-free state
    dead_end,          ///< every successor was already visited, or no move exists
    scorer_failure,    ///< the scorer threw or returned an unusable vector
    timeout,           ///< wall-clock deadline passed
};

std::string to_string(SolveStatus status);

struct SolveResult {
    bool solved = false;
    SolveStatus status = SolveStatus::budget_exhausted;
    /// Moves committed in order, also when unsolved.
    std::vector<Move> moves;
    /// |moves| when solved, m_max otherwise.
    std::size_t move_count = 0;
    std::size_t expanded_states = 0;
    std::chrono::nanoseconds wall_time{0};
    /// Scorer error text for scorer_failure, empty otherwise.
    std::string failure;
};

struct SolveOptions {
    std::size_t m_max = 100;
    Deadline deadline;
};

/// Greedy best-first descent: score every unvisited successor in one batch,
/// commit the best (ties go to the smallest (source, dest)), repeat until the
/// state is blockage-free or the budget runs out.
SolveResult solve(const WarehouseState& initial, Scorer& scorer, const SolveOptions& options);

inline SolveResult solve(const WarehouseState& initial, Scorer& scorer, std::size_t m_max) {
    return solve(initial, scorer, SolveOptions{m_max, std::nullopt});
}

/// Raised by replay; `index` is the position of the first illegal move.
class ReplayError : public IllegalMove {
public:
    ReplayError(std::size_t index, const std::string& detail);
    [[nodiscard]] std::size_t index() const { return index_; }

private:
    std::size_t index_;
};

WarehouseState replay(const WarehouseState& initial, std::span<const Move> moves);

}  // namespace upmp
