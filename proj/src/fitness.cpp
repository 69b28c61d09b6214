#include "upmp/fitness.hpp"

#include <algorithm>
#include <atomic>
#include <ctime>
#include <iomanip>
#include <sstream>
#include <thread>

namespace upmp {

double fitness_value(std::span<const std::size_t> ms, std::span<const std::size_t> lbs) {
    if (ms.empty() || ms.size() != lbs.size()) {
        throw FitnessError("fitness needs equally many move counts and lower bounds (got " +
                           std::to_string(ms.size()) + " and " + std::to_string(lbs.size()) + ")");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < ms.size(); ++i) {
        if (lbs[i] == 0) {
            throw FitnessError("degenerate lower bound at index " + std::to_string(i));
        }
        if (ms[i] < lbs[i]) {
            throw FitnessError("bound violation at index " + std::to_string(i) + ": m=" + std::to_string(ms[i]) +
                               " < lb=" + std::to_string(lbs[i]));
        }
        sum += static_cast<double>(ms[i] - lbs[i]) / static_cast<double>(lbs[i]);
    }
    return sum / static_cast<double>(ms.size());
}

std::size_t FitnessReport::solved_count() const {
    return static_cast<std::size_t>(
        std::count_if(per_instance.begin(), per_instance.end(), [](const InstanceOutcome& o) { return o.solved; }));
}

namespace {

InstanceOutcome run_one(const ScorerFactory& factory, const Instance& inst, const EvaluateOptions& options) {
    InstanceOutcome out;
    out.instance_id = inst.id;
    out.lower_bound = inst.lower_bound;
    const auto started = Clock::now();
    const Deadline deadline = started + options.per_instance_timeout;
    try {
        auto scorer = factory();
        SolveResult r = solve(inst.initial, *scorer, SolveOptions{options.m_max, deadline});
        out.solved = r.solved;
        out.status = r.status;
        out.m = r.move_count;
        out.failure = r.failure;
    } catch (const ScorerError& e) {
        out.status = e.kind() == "timeout" ? SolveStatus::timeout : SolveStatus::scorer_failure;
        out.m = options.m_max;
        out.failure = e.what();
    } catch (const std::exception& e) {
        out.status = SolveStatus::scorer_failure;
        out.m = options.m_max;
        out.failure = e.what();
    }
    out.solve_time = Clock::now() - started;
    return out;
}

std::string iso8601(std::chrono::system_clock::time_point t) {
    const std::time_t tt = std::chrono::system_clock::to_time_t(t);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

}  // namespace

FitnessReport evaluate(const ScorerFactory& factory, std::span<const Instance> instances,
                       const EvaluateOptions& options) {
    if (instances.empty()) {
        throw Error("evaluation needs at least one instance");
    }
    for (const auto& inst : instances) {
        if (inst.lower_bound == 0) {
            throw FitnessError("instance '" + inst.id + "' has a degenerate lower bound");
        }
        if (options.m_max < inst.lower_bound) {
            throw Error("m_max " + std::to_string(options.m_max) + " is below the lower bound of instance '" +
                        inst.id + "'");
        }
    }

    FitnessReport report;
    report.per_instance.resize(instances.size());
    const unsigned workers = std::clamp<unsigned>(options.workers, 1, static_cast<unsigned>(instances.size()));
    if (workers == 1) {
        for (std::size_t i = 0; i < instances.size(); ++i) {
            report.per_instance[i] = run_one(factory, instances[i], options);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < instances.size(); i = next++) {
                    report.per_instance[i] = run_one(factory, instances[i], options);
                }
            });
        }
    }

    std::vector<std::size_t> ms;
    std::vector<std::size_t> lbs;
    std::chrono::nanoseconds total{0};
    for (const auto& o : report.per_instance) {
        ms.push_back(o.m);
        lbs.push_back(o.lower_bound);
        total += o.solve_time;
    }
    report.fitness = fitness_value(ms, lbs);
    report.mean_solve_time = total / static_cast<long>(report.per_instance.size());
    report.evaluated_at = std::chrono::system_clock::now();
    return report;
}

Json report_to_json(const FitnessReport& report) {
    Json j;
    j["fitness"] = report.fitness;
    j["solved"] = report.solved_count();
    j["instances"] = report.per_instance.size();
    j["evaluated_at"] = iso8601(report.evaluated_at);
    j["mean_solve_time_ms"] = std::chrono::duration<double, std::milli>(report.mean_solve_time).count();
    Json rows = Json::array();
    for (const auto& o : report.per_instance) {
        Json row;
        row["instance"] = o.instance_id;
        row["lower_bound"] = o.lower_bound;
        row["m"] = o.m;
        row["solved"] = o.solved;
        row["status"] = to_string(o.status);
        if (!o.failure.empty()) row["failure"] = o.failure;
        row["time_ms"] = std::chrono::duration<double, std::milli>(o.solve_time).count();
        rows.push_back(std::move(row));
    }
    j["per_instance"] = std::move(rows);
    return j;
}

}  // namespace upmp
