#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "upmp/core.hpp"
#include "upmp/sandbox.hpp"

namespace upmp {

using Clock = std::chrono::steady_clock;
using Deadline = std::optional<Clock::time_point>;

/// Raised by a scorer that cannot produce a usable score vector. `kind` is a
/// short machine-readable tag ("bad_shape", "non_numeric", "timeout", ...).
class ScorerError : public Error {
public:
    ScorerError(std::string kind, const std::string& message);
    [[nodiscard]] const std::string& kind() const { return kind_; }

private:
    std::string kind_;
};

/// Scores a batch of candidate states; a higher score is better.
class Scorer {
public:
    virtual ~Scorer() = default;

    [[nodiscard]] virtual std::string name() const = 0;

    /// Returns one finite score per state or throws ScorerError.
    std::vector<double> score(std::span<const WarehouseState> states, Deadline deadline = std::nullopt);

protected:
    virtual std::vector<double> do_score(std::span<const WarehouseState> states, Deadline deadline) = 0;
};

using ScorerFactory = std::function<std::unique_ptr<Scorer>()>;

/// -count_blocking per state.
std::vector<double> score_blocking_baseline(std::span<const WarehouseState> states);

/// Priority balance, density-weighted blocking penalties with geometric decay,
/// and a bonus for lanes without blocking. Mirrors the reference listing
/// statement by statement, including its evaluation order.
std::vector<double> score_qwen_ceoh(std::span<const WarehouseState> states);

/// Logistic priority adjustment with an access latch: loads are rewarded from
/// the innermost slot outwards until the first descent, and each descent is
/// penalised. Mirrors the reference listing statement by statement.
std::vector<double> score_gpt4o_eoh(std::span<const WarehouseState> states);

/// Names accepted by lookup_scorer, excluding the "sandbox:<path>" form.
std::vector<std::string> builtin_scorer_names();

/// "blocking", "qwen-ceoh", "gpt4o-eoh" or "sandbox:<path to heuristic source>".
/// Throws Error listing the available names when `name` is unknown.
std::unique_ptr<Scorer> lookup_scorer(const std::string& name, const SandboxOptions& sandbox = {});

/// Like lookup_scorer, but validated up front and producing a fresh scorer per
/// call (one sandbox process per solve for sandbox scorers).
ScorerFactory scorer_factory(const std::string& name, const SandboxOptions& sandbox = {});

/// Runs generated heuristic source in a sandbox session.
class SandboxScorer final : public Scorer {
public:
    /// Spawns the runner and loads `code`. Throws ScorerError on failure.
    SandboxScorer(std::string label, const std::string& code, const SandboxOptions& options);

    [[nodiscard]] std::string name() const override { return label_; }

protected:
    std::vector<double> do_score(std::span<const WarehouseState> states, Deadline deadline) override;

private:
    std::string label_;
    SandboxOptions options_;
    SandboxSession session_;
};

}  // namespace upmp
