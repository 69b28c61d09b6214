#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "upmp/core.hpp"

namespace upmp {

enum class Strategy { I0, E1, E2, M1, M2 };
enum class PromptMode { ceoh, eoh };
enum class RecordStatus { pending, evaluated, invalid };

std::string to_string(Strategy s);
std::string to_string(PromptMode m);
std::string to_string(RecordStatus s);
std::optional<Strategy> strategy_from_string(const std::string& s);
std::optional<PromptMode> prompt_mode_from_string(const std::string& s);
std::optional<RecordStatus> record_status_from_string(const std::string& s);

/// A generated heuristic: the model's one-sentence thought plus its code.
struct HeuristicRecord {
    std::uint64_t id = 0;
    std::string thought;
    std::string code;
    Strategy strategy = Strategy::I0;
    std::vector<std::uint64_t> parent_ids;
    int generation = 0;
    std::optional<double> fitness;
    RecordStatus status = RecordStatus::pending;

    friend bool operator==(const HeuristicRecord&, const HeuristicRecord&) = default;
};

enum class SectionLabel { task, problem_description, parents, output_instructions, additional_instructions };

std::string to_string(SectionLabel label);

struct PromptSection {
    SectionLabel label;
    std::string text;
};

struct PromptBundle {
    std::vector<PromptSection> sections;

    [[nodiscard]] bool has(SectionLabel label) const;
    /// Text of the section, or nullptr.
    [[nodiscard]] const std::string* find(SectionLabel label) const;
    /// Sections in order, separated by one blank line.
    [[nodiscard]] std::string render() const;
};

/// Named template texts (file stem -> contents). Required names: task,
/// problem_description, parents, output_ceoh, output_eoh,
/// additional_instructions, strategy_E1, strategy_E2, strategy_M1,
/// strategy_M2. Placeholders: {{function_name}}, {{strategy_sentence}},
/// {{parents}}, {{parent_count}}.
class PromptTemplates {
public:
    /// The templates compiled into the library.
    static PromptTemplates defaults();
    /// Reads <name>.txt for every required name. Throws Error naming the first
    /// missing file.
    static PromptTemplates from_directory(const std::filesystem::path& dir);

    [[nodiscard]] const std::string& get(const std::string& name) const;

    std::string function_name = "select_next_move";

private:
    std::map<std::string, std::string> texts_;
};

class PromptError : public Error {
public:
    using Error::Error;
};

/// Assembles the five-part prompt. I0 takes no parents, M1/M2 exactly one,
/// E1/E2 at least one. CEoH adds the problem description; EoH omits it.
PromptBundle build_prompt(Strategy strategy, PromptMode mode, std::span<const HeuristicRecord> parents,
                          const PromptTemplates& templates = PromptTemplates::defaults());

enum class ParseFailure { none, missing_thought, missing_code, missing_function };

std::string to_string(ParseFailure f);

struct ParsedResponse {
    ParseFailure failure = ParseFailure::none;
    std::string thought;
    std::string code;

    [[nodiscard]] bool ok() const { return failure == ParseFailure::none; }
};

/// Thought: contents of the first balanced {...} block. Code: the first fenced
/// block if any, else everything from the first "def " header. Never throws.
ParsedResponse parse_response(const std::string& text, const std::string& function_name = "select_next_move");

}  // namespace upmp
