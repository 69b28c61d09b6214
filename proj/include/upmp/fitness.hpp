#pragma once

#include <chrono>
#include <span>
#include <string>
#include <vector>

#include "upmp/heuristics.hpp"
#include "upmp/instances.hpp"
#include "upmp/json_io.hpp"
#include "upmp/search.hpp"

namespace upmp {

class FitnessError : public Error {
public:
    using Error::Error;
};

/// Mean relative excess of move counts over lower bounds:
/// (1/|I|) * sum_i (m_i - lb_i) / lb_i. Lower is better.
/// Throws FitnessError on empty or mismatched input, lb = 0 ("degenerate lower
/// bound") or m < lb ("bound violation").
double fitness_value(std::span<const std::size_t> ms, std::span<const std::size_t> lbs);

struct InstanceOutcome {
    std::string instance_id;
    std::size_t m = 0;
    std::size_t lower_bound = 0;
    bool solved = false;
    SolveStatus status = SolveStatus::budget_exhausted;
    std::string failure;
    std::chrono::nanoseconds solve_time{0};
};

struct FitnessReport {
    std::vector<InstanceOutcome> per_instance;
    double fitness = 0.0;
    std::chrono::system_clock::time_point evaluated_at;
    std::chrono::nanoseconds mean_solve_time{0};

    [[nodiscard]] std::size_t solved_count() const;
};

struct EvaluateOptions {
    std::size_t m_max = 100;
    std::chrono::milliseconds per_instance_timeout{60000};
    unsigned workers = 1;
};

/// Solves every instance with a fresh scorer from `factory`. Unsolved,
/// crashed and timed-out instances count as m_max. Output order follows input
/// order. Throws Error if `instances` is empty or m_max is below a lower bound.
FitnessReport evaluate(const ScorerFactory& factory, std::span<const Instance> instances,
                       const EvaluateOptions& options);

Json report_to_json(const FitnessReport& report);

}  // namespace upmp
