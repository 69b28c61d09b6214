#include "upmp/heuristics.hpp"

#include <cmath>
#include <limits>

#include "upmp/json_io.hpp"

namespace upmp {

namespace {

using NativeFn = std::vector<double> (*)(std::span<const WarehouseState>);

struct NativeEntry {
    const char* name;
    NativeFn fn;
};

constexpr NativeEntry kNative[] = {
    {"blocking", &score_blocking_baseline},
    {"qwen-ceoh", &score_qwen_ceoh},
    {"gpt4o-eoh", &score_gpt4o_eoh},
};

constexpr const char* kSandboxPrefix = "sandbox:";

class NativeScorer final : public Scorer {
public:
    NativeScorer(std::string name, NativeFn fn) : name_(std::move(name)), fn_(fn) {}
    [[nodiscard]] std::string name() const override { return name_; }

protected:
    std::vector<double> do_score(std::span<const WarehouseState> states, Deadline) override { return fn_(states); }

private:
    std::string name_;
    NativeFn fn_;
};

double qwen_state_score(const WarehouseState& state) {
    double score = 0;
    long long total_units = 0;
    for (const Lane& lane : state.lanes()) {
        for (SlotValue u : lane) total_units += (u != 0);
    }
    const auto num_lanes = static_cast<double>(state.lane_count());

    for (const Lane& lane : state.lanes()) {
        double highest_priority_seen = std::numeric_limits<double>::infinity();
        bool blocking_occurred = false;
        long long non_zero_count = 0;
        for (SlotValue u : lane) non_zero_count += (u != 0);
        const double density_weight =
            total_units > 0
                ? std::pow(static_cast<double>(non_zero_count) / static_cast<double>(total_units), 2.0)
                : 1.0;
        const double block_penalty_factor = 4 + density_weight * num_lanes * 1.2;
        long long priority_balance = 0;
        for (SlotValue u : lane) priority_balance += static_cast<long long>(u) * (5 - u);

        for (std::size_t j = 0; j < lane.size(); ++j) {
            const SlotValue unit = lane[lane.size() - 1 - j];
            if (unit == 0) continue;
            if (unit > highest_priority_seen) {
                const double penalty = static_cast<double>(static_cast<long long>(unit) * unit) *
                                       block_penalty_factor * std::pow(0.9, static_cast<double>(j));
                score -= penalty;
                blocking_occurred = true;
            } else {
                highest_priority_seen = unit;
            }
        }

        score += static_cast<double>(priority_balance) * density_weight * 1.8;
        if (!blocking_occurred) {
            score += static_cast<double>(non_zero_count * non_zero_count) * (1 + density_weight * 0.6);
        }
    }
    return score;
}

double gpt4o_state_score(const WarehouseState& state) {
    double score = 0;
    for (const Lane& stack : state.lanes()) {
        double bonus = 0;
        double penalty = 0;
        bool can_access = true;
        for (std::size_t k = stack.size(); k-- > 0;) {
            const double v = stack[k];
            const double i = static_cast<double>(k);
            const double priority_adjustment = 1 / (1 + std::exp(-0.7 * v));
            if (can_access) {
                bonus += v * (1 + std::exp(-0.5 * i));
            }
            if (k > 0 && stack[k] < stack[k - 1]) {
                penalty += (1 - priority_adjustment) * (stack[k - 1] - stack[k]) * (1 / (1 + std::exp(0.5 * i)));
                can_access = false;
            }
        }
        score += bonus - penalty;
    }
    return score;
}

template <typename F>
std::vector<double> map_states(std::span<const WarehouseState> states, F f) {
    std::vector<double> out;
    out.reserve(states.size());
    for (const auto& s : states) out.push_back(f(s));
    return out;
}

}  // namespace

ScorerError::ScorerError(std::string kind, const std::string& message)
    : Error("scorer " + kind + ": " + message), kind_(std::move(kind)) {}

std::vector<double> Scorer::score(std::span<const WarehouseState> states, Deadline deadline) {
    std::vector<double> out = do_score(states, deadline);
    if (out.size() != states.size()) {
        throw ScorerError("bad_shape", name() + " returned " + std::to_string(out.size()) + " scores for " +
                                           std::to_string(states.size()) + " states");
    }
    for (double v : out) {
        if (!std::isfinite(v)) {
            throw ScorerError("non_numeric", name() + " returned a non-finite score");
        }
    }
    return out;
}

std::vector<double> score_blocking_baseline(std::span<const WarehouseState> states) {
    return map_states(states, [](const WarehouseState& s) {
        return 0.0 - static_cast<double>(count_blocking(s));  // +0.0 for clean states, unlike unary minus
    });
}

std::vector<double> score_qwen_ceoh(std::span<const WarehouseState> states) {
    return map_states(states, qwen_state_score);
}

std::vector<double> score_gpt4o_eoh(std::span<const WarehouseState> states) {
    return map_states(states, gpt4o_state_score);
}

std::vector<std::string> builtin_scorer_names() {
    std::vector<std::string> names;
    for (const auto& e : kNative) names.emplace_back(e.name);
    return names;
}

namespace {

std::string unknown_scorer_message(const std::string& name) {
    std::string msg = "unknown scorer '" + name + "'; available:";
    for (const auto& e : kNative) msg += std::string(" ") + e.name;
    msg += " sandbox:<path>";
    return msg;
}

}  // namespace

std::unique_ptr<Scorer> lookup_scorer(const std::string& name, const SandboxOptions& sandbox) {
    return scorer_factory(name, sandbox)();
}

ScorerFactory scorer_factory(const std::string& name, const SandboxOptions& sandbox) {
    for (const auto& e : kNative) {
        if (name == e.name) {
            return [n = name, fn = e.fn] { return std::make_unique<NativeScorer>(n, fn); };
        }
    }
    if (name.rfind(kSandboxPrefix, 0) == 0) {
        const std::string path = name.substr(std::char_traits<char>::length(kSandboxPrefix));
        if (path.empty()) {
            throw Error("scorer 'sandbox:' needs a heuristic source path");
        }
        std::string code = read_text_file(path);
        return [name, code = std::move(code), sandbox] {
            return std::make_unique<SandboxScorer>(name, code, sandbox);
        };
    }
    throw Error(unknown_scorer_message(name));
}

SandboxScorer::SandboxScorer(std::string label, const std::string& code, const SandboxOptions& options)
    : label_(std::move(label)), options_(options), session_([&] {
          try {
              return SandboxSession(options);
          } catch (const SandboxFailure& e) {
              throw ScorerError(to_string(e.kind()), e.what());
          }
      }()) {
    try {
        session_.load(code);
    } catch (const SandboxFailure& e) {
        throw ScorerError(to_string(e.kind()), e.what());
    }
}

std::vector<double> SandboxScorer::do_score(std::span<const WarehouseState> states, Deadline deadline) {
    std::optional<std::chrono::milliseconds> timeout;
    if (deadline) {
        auto left = std::chrono::duration_cast<std::chrono::milliseconds>(*deadline - Clock::now());
        if (left.count() <= 0) {
            throw ScorerError("timeout", "deadline passed before scoring");
        }
        timeout = std::min(left, options_.request_timeout);
    }
    try {
        return session_.score(states, timeout);
    } catch (const SandboxFailure& e) {
        throw ScorerError(to_string(e.kind()), e.what());
    }
}

}  // namespace upmp
