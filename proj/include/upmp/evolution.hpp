#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "upmp/fitness.hpp"
#include "upmp/json_io.hpp"
#include "upmp/llm.hpp"
#include "upmp/prompt.hpp"
#include "upmp/rng.hpp"
#include "upmp/sandbox.hpp"

namespace upmp {

struct EvolutionConfig {
    std::size_t population_size = 20;
    std::size_t generations = 20;
    std::size_t samples_per_strategy = 20;
    std::size_t parents = 5;
    std::size_t init_calls = 40;
    PromptMode mode = PromptMode::ceoh;
    std::size_t m_max = 100;
    std::uint64_t rng_seed = 0;

    /// Throws InvalidConfig.
    void validate() const;
};

/// Parents a strategy consumes: 0 for I0, 1 for M1/M2, `config.parents` for E1/E2.
std::size_t parent_arity(Strategy strategy, const EvolutionConfig& config);

/// Rank-proportional sampling without replacement. After sorting by fitness
/// (ties by id), rank k (best = 1) has weight 1 / (k + population size).
/// Throws Error if the population is smaller than `count` or contains
/// unevaluated records.
std::vector<HeuristicRecord> select_parents(std::span<const HeuristicRecord> population, std::size_t count,
                                            SplitMix64& rng);

/// The `keep` records with the lowest fitness, ties to the older id, in
/// ascending fitness order. Returns all records when fewer are available.
std::vector<HeuristicRecord> survivor_selection(std::span<const HeuristicRecord> population, std::size_t keep);

/// A run-log line: the record plus what produced it.
struct LoggedRecord {
    HeuristicRecord record;
    std::string prompt_sha256;
    std::vector<SectionLabel> prompt_sections;
    std::string raw_response;
    std::string invalid_reason;
    /// Full prompt text, only kept when requested.
    std::optional<std::string> prompt;
};

Json record_to_json(const HeuristicRecord& record);
HeuristicRecord record_from_json(const Json& j);
Json logged_record_to_json(const LoggedRecord& entry);

class RunLogSink {
public:
    virtual ~RunLogSink() = default;
    virtual void append(const LoggedRecord& entry) = 0;
    /// Number of entries successfully appended so far.
    [[nodiscard]] virtual std::size_t size() const = 0;
};

/// Append-only JSONL file, flushed after every line.
class JsonlRunLog final : public RunLogSink {
public:
    /// Truncates `path` unless `keep_lines` is set, in which case the file is
    /// cut back to its first `keep_lines` lines (for resuming a run).
    explicit JsonlRunLog(const std::filesystem::path& path, std::optional<std::size_t> keep_lines = std::nullopt);
    void append(const LoggedRecord& entry) override;
    [[nodiscard]] std::size_t size() const override { return lines_; }

private:
    std::filesystem::path path_;
    std::ofstream out_;
    std::size_t lines_ = 0;
};

class MemoryRunLog final : public RunLogSink {
public:
    void append(const LoggedRecord& entry) override;
    [[nodiscard]] std::size_t size() const override { return entries.size(); }

    std::vector<LoggedRecord> entries;
    /// The JSONL bytes a file sink would have written.
    std::string text;
};

struct EvaluationOutcome {
    std::optional<double> fitness;
    std::string failure;
};

/// Assigns fitness to generated code. Must never execute it in-process.
class HeuristicEvaluator {
public:
    virtual ~HeuristicEvaluator() = default;
    virtual EvaluationOutcome evaluate(const std::string& code) = 0;
};

/// Runs the code in the sandbox runner over an instance set. The code is
/// invalid when it fails to load or when no instance ran without a scorer
/// failure or timeout.
class SandboxEvaluator final : public HeuristicEvaluator {
public:
    SandboxEvaluator(std::vector<Instance> instances, EvaluateOptions options, SandboxOptions sandbox);
    EvaluationOutcome evaluate(const std::string& code) override;

private:
    std::vector<Instance> instances_;
    EvaluateOptions options_;
    SandboxOptions sandbox_;
};

/// Position of the run, written after every finalized record.
struct EvolutionCheckpoint {
    EvolutionConfig config;
    std::uint64_t rng_state = 0;
    std::uint64_t next_id = 1;
    std::size_t llm_calls = 0;
    std::size_t generation = 0;
    std::size_t step = 0;
    std::size_t logged = 0;
    std::vector<HeuristicRecord> population;
    std::vector<double> best_after_selection;

    void save(const std::filesystem::path& path) const;
    static EvolutionCheckpoint load(const std::filesystem::path& path);
};

/// Thrown when the run log or checkpoint cannot be written. The last
/// checkpoint on disk (if any) resumes the run.
class EvolutionAborted : public Error {
public:
    using Error::Error;
};

struct EvolutionRunOptions {
    PromptTemplates templates = PromptTemplates::defaults();
    std::optional<std::filesystem::path> checkpoint_path;
    std::optional<EvolutionCheckpoint> resume_from;
    bool log_prompts = false;
    /// Called after every finalized record.
    std::function<void(const LoggedRecord&)> on_record;
};

struct EvolutionResult {
    std::vector<HeuristicRecord> population;
    /// Best fitness of the population after each survivor selection,
    /// starting with the initial population.
    std::vector<double> best_after_selection;
    std::size_t records = 0;
    std::size_t llm_calls = 0;
};

/// init_calls I0 samples form the initial population (best population_size).
/// Each generation then draws samples_per_strategy samples for E1, E2, M1, M2
/// in that order; evaluated samples join the working population at once, and
/// survivor selection closes the generation.
EvolutionResult run_evolution(const EvolutionConfig& config, LlmClient& llm, HeuristicEvaluator& evaluator,
                              RunLogSink& sink, const EvolutionRunOptions& options = {});

}  // namespace upmp
