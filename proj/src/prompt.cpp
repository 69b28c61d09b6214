#include "upmp/prompt.hpp"

#include <array>
#include <regex>

#include "upmp/json_io.hpp"

namespace upmp {

const std::map<std::string, std::string>& embedded_templates();

namespace {

constexpr std::array kRequiredTemplates = {
    "task",        "problem_description", "parents",     "output_ceoh", "output_eoh", "additional_instructions",
    "strategy_E1", "strategy_E2",         "strategy_M1", "strategy_M2",
};

constexpr std::array kStrategyNames = {"I0", "E1", "E2", "M1", "M2"};
constexpr std::array kStatusNames = {"pending", "evaluated", "invalid"};
constexpr std::array kSectionNames = {"task", "problem_description", "parents", "output_instructions",
                                      "additional_instructions"};

std::string trim_trailing_newlines(std::string s) {
    while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
    return s;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string substitute(std::string text, const std::map<std::string, std::string>& values) {
    for (const auto& [key, value] : values) {
        const std::string token = "{{" + key + "}}";
        for (std::size_t pos = text.find(token); pos != std::string::npos; pos = text.find(token, pos + value.size())) {
            text.replace(pos, token.size(), value);
        }
    }
    return text;
}

}  // namespace

std::string to_string(Strategy s) { return kStrategyNames[static_cast<int>(s)]; }
std::string to_string(PromptMode m) { return m == PromptMode::ceoh ? "ceoh" : "eoh"; }
std::string to_string(RecordStatus s) { return kStatusNames[static_cast<int>(s)]; }
std::string to_string(SectionLabel label) { return kSectionNames[static_cast<int>(label)]; }

std::optional<Strategy> strategy_from_string(const std::string& s) {
    for (std::size_t i = 0; i < kStrategyNames.size(); ++i) {
        if (s == kStrategyNames[i]) return static_cast<Strategy>(i);
    }
    return std::nullopt;
}

std::optional<PromptMode> prompt_mode_from_string(const std::string& s) {
    if (s == "ceoh" || s == "CEoH") return PromptMode::ceoh;
    if (s == "eoh" || s == "EoH") return PromptMode::eoh;
    return std::nullopt;
}

std::optional<RecordStatus> record_status_from_string(const std::string& s) {
    for (std::size_t i = 0; i < kStatusNames.size(); ++i) {
        if (s == kStatusNames[i]) return static_cast<RecordStatus>(i);
    }
    return std::nullopt;
}

bool PromptBundle::has(SectionLabel label) const { return find(label) != nullptr; }

const std::string* PromptBundle::find(SectionLabel label) const {
    for (const auto& s : sections) {
        if (s.label == label) return &s.text;
    }
    return nullptr;
}

std::string PromptBundle::render() const {
    std::string out;
    for (const auto& s : sections) {
        if (!out.empty()) out += "\n\n";
        out += s.text;
    }
    return out;
}

PromptTemplates PromptTemplates::defaults() {
    PromptTemplates t;
    t.texts_ = embedded_templates();
    return t;
}

PromptTemplates PromptTemplates::from_directory(const std::filesystem::path& dir) {
    PromptTemplates t;
    for (const char* name : kRequiredTemplates) {
        const auto path = dir / (std::string(name) + ".txt");
        if (!std::filesystem::is_regular_file(path)) {
            throw PromptError("missing template file '" + path.string() + "'");
        }
        t.texts_[name] = read_text_file(path.string());
    }
    return t;
}

const std::string& PromptTemplates::get(const std::string& name) const {
    auto it = texts_.find(name);
    if (it == texts_.end()) {
        throw PromptError("missing template '" + name + "'");
    }
    return it->second;
}

PromptBundle build_prompt(Strategy strategy, PromptMode mode, std::span<const HeuristicRecord> parents,
                          const PromptTemplates& templates) {
    switch (strategy) {
        case Strategy::I0:
            if (!parents.empty()) throw PromptError("I0 takes no parents");
            break;
        case Strategy::M1:
        case Strategy::M2:
            if (parents.size() != 1) throw PromptError(to_string(strategy) + " takes exactly one parent");
            break;
        case Strategy::E1:
        case Strategy::E2:
            if (parents.empty()) throw PromptError(to_string(strategy) + " needs at least one parent");
            break;
    }

    std::map<std::string, std::string> values{{"function_name", templates.function_name}};
    if (strategy == Strategy::I0) {
        values["strategy_sentence"] = "";
    } else {
        values["strategy_sentence"] = trim_trailing_newlines(templates.get("strategy_" + to_string(strategy))) + "\n";
    }

    auto section = [&](SectionLabel label, const std::string& name) {
        return PromptSection{label, trim_trailing_newlines(substitute(templates.get(name), values))};
    };

    PromptBundle bundle;
    bundle.sections.push_back(section(SectionLabel::task, "task"));
    if (mode == PromptMode::ceoh) {
        bundle.sections.push_back(section(SectionLabel::problem_description, "problem_description"));
    }
    if (!parents.empty()) {
        std::string listing;
        for (std::size_t i = 0; i < parents.size(); ++i) {
            if (i) listing += "\n";
            listing += "No. " + std::to_string(i + 1) + " heuristic's thought and code:\n";
            listing += "{" + parents[i].thought + "}\n";
            listing += parents[i].code;
            if (!parents[i].code.empty() && parents[i].code.back() != '\n') listing += "\n";
        }
        values["parents"] = trim_trailing_newlines(listing);
        values["parent_count"] = std::to_string(parents.size());
        bundle.sections.push_back(section(SectionLabel::parents, "parents"));
    }
    bundle.sections.push_back(
        section(SectionLabel::output_instructions, mode == PromptMode::ceoh ? "output_ceoh" : "output_eoh"));
    bundle.sections.push_back(section(SectionLabel::additional_instructions, "additional_instructions"));
    return bundle;
}

std::string to_string(ParseFailure f) {
    switch (f) {
        case ParseFailure::none: return "none";
        case ParseFailure::missing_thought: return "missing_thought";
        case ParseFailure::missing_code: return "missing_code";
        case ParseFailure::missing_function: return "missing_function";
    }
    return "unknown";
}

ParsedResponse parse_response(const std::string& text, const std::string& function_name) {
    ParsedResponse out;

    // Thought: first balanced brace block.
    std::size_t thought_end = std::string::npos;
    if (const auto open = text.find('{'); open != std::string::npos) {
        int depth = 0;
        for (std::size_t i = open; i < text.size(); ++i) {
            if (text[i] == '{') ++depth;
            if (text[i] == '}' && --depth == 0) {
                out.thought = trim(text.substr(open + 1, i - open - 1));
                thought_end = i + 1;
                break;
            }
        }
    }
    if (thought_end == std::string::npos || out.thought.empty()) {
        out.failure = ParseFailure::missing_thought;
        out.thought.clear();
        return out;
    }

    // Code: first fenced block, else from the first top-level def/import line.
    const auto fence_open = text.find("```");
    const auto body = fence_open == std::string::npos ? std::string::npos : text.find('\n', fence_open);
    const auto fence_close = body == std::string::npos ? std::string::npos : text.find("```", body + 1);
    if (fence_close != std::string::npos) {
        out.code = text.substr(body + 1, fence_close - body - 1);
    } else {
        static const std::regex start(R"((^|\n)(def |import |from ))");
        std::smatch s;
        const std::string tail = text.substr(thought_end);
        if (std::regex_search(tail, s, start)) {
            out.code = tail.substr(static_cast<std::size_t>(s.position(2)));
        }
    }
    if (trim(out.code).empty()) {
        out.failure = ParseFailure::missing_code;
        out.code.clear();
        return out;
    }
    const std::regex header("def\\s+" + function_name + "\\s*\\(");
    if (!std::regex_search(out.code, header)) {
        out.failure = ParseFailure::missing_function;
    }
    return out;
}

}  // namespace upmp
