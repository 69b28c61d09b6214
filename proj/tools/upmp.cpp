#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <regex>
#include <sstream>

#include <CLI11.hpp>

#include "upmp/evolution.hpp"
#include "upmp/fitness.hpp"
#include "upmp/heuristics.hpp"
#include "upmp/instances.hpp"
#include "upmp/json_io.hpp"
#include "upmp/llm.hpp"
#include "upmp/search.hpp"

namespace fs = std::filesystem;
using namespace upmp;

namespace {

/// Bad flag values found after CLI11 parsing; exits with status 2.
class UsageError : public Error {
public:
    using Error::Error;
};

std::pair<int, int> parse_dims(const std::string& text, const std::string& flag) {
    static const std::regex re(R"((\d+)x(\d+))");
    std::smatch m;
    if (!std::regex_match(text, m, re)) throw UsageError(flag + " expects RxC, got '" + text + "'");
    return {std::stoi(m[1]), std::stoi(m[2])};
}

std::pair<std::uint64_t, std::uint64_t> parse_seeds(const std::string& text) {
    static const std::regex range(R"((\d+)\.\.(\d+))");
    static const std::regex single(R"(\d+)");
    std::smatch m;
    if (std::regex_match(text, m, range)) {
        const auto a = std::stoull(m[1]);
        const auto b = std::stoull(m[2]);
        if (b < a) throw UsageError("--seeds range is empty: " + text);
        return {a, b};
    }
    if (std::regex_match(text, single)) return {std::stoull(text), std::stoull(text)};
    throw UsageError("--seeds expects a..b or a single seed, got '" + text + "'");
}

std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string format_ms(std::chrono::nanoseconds d) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1fms", std::chrono::duration<double, std::milli>(d).count());
    return buf;
}

SandboxOptions sandbox_options(const std::string& runner, double timeout_s) {
    SandboxOptions o;
    if (!runner.empty()) {
        std::istringstream in(runner);
        o.command.clear();
        for (std::string w; in >> w;) o.command.push_back(w);
    }
    o.request_timeout = std::chrono::milliseconds(static_cast<long long>(timeout_s * 1000));
    return o;
}

void write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) throw Error("cannot write '" + path.string() + "'");
}

struct GenerateArgs {
    std::string bay = "5x5";
    std::string warehouse = "1x1";
    double fill = 0.6;
    int classes = 5;
    std::string seeds = "0..9";
    std::string out = "instances";
};

int cmd_generate(const GenerateArgs& a) {
    InstanceConfig c;
    std::tie(c.bay_rows, c.bay_cols) = parse_dims(a.bay, "--bay");
    std::tie(c.warehouse_x, c.warehouse_y) = parse_dims(a.warehouse, "--warehouse");
    c.fill_pct = a.fill;
    c.priority_classes = a.classes;
    const auto [first, last] = parse_seeds(a.seeds);
    try {
        c.validate();
    } catch (const InvalidConfig& e) {
        throw UsageError(e.what());
    }
    fs::create_directories(a.out);
    for (std::uint64_t s = first; s <= last; ++s) {
        c.seed = s;
        const Instance inst = generate_instance(c);
        const fs::path path = fs::path(a.out) / (c.file_stem() + ".json");
        write_instance(inst, path);
        std::cout << path.string() << " lb=" << inst.lower_bound << '\n';
    }
    return 0;
}

struct SolveArgs {
    std::string instance;
    std::string scorer = "blocking";
    std::size_t m_max = 100;
    double timeout = 60;
    std::string runner;
    std::string out;
};

int cmd_solve(const SolveArgs& a) {
    const Instance inst = read_instance(a.instance);
    auto scorer = lookup_scorer(a.scorer, sandbox_options(a.runner, a.timeout));
    const auto deadline = Clock::now() + std::chrono::milliseconds(static_cast<long long>(a.timeout * 1000));
    const SolveResult r = solve(inst.initial, *scorer, SolveOptions{a.m_max, deadline});
    if (r.solved) {
        replay(inst.initial, r.moves);  // throws if the search ever emitted an illegal move
        std::cout << "solved";
    } else {
        std::cout << "unsolved (" << to_string(r.status) << ")";
    }
    std::cout << " m=" << r.move_count << " lb=" << inst.lower_bound << " time=" << format_ms(r.wall_time) << '\n';
    if (!r.failure.empty()) std::cerr << "scorer failure: " << r.failure << '\n';

    if (!a.out.empty()) {
        Json j;
        j["instance"] = inst.id;
        j["scorer"] = a.scorer;
        j["solved"] = r.solved;
        j["status"] = to_string(r.status);
        j["m"] = r.move_count;
        j["lower_bound"] = inst.lower_bound;
        Json moves = Json::array();
        for (const Move& m : r.moves) moves.push_back(Json::array({m.source, m.dest}));
        j["moves"] = std::move(moves);
        write_file(a.out, j.dump(2) + "\n");
    }
    return 0;
}

struct EvaluateArgs {
    std::string instances = "instances";
    std::string scorer = "blocking";
    std::size_t m_max = 100;
    double timeout = 60;
    std::size_t workers = 1;
    std::string runner;
    std::string report;
};

int cmd_evaluate(const EvaluateArgs& a) {
    const auto instances = read_instance_dir(a.instances);
    const SandboxOptions sandbox = sandbox_options(a.runner, a.timeout);
    const EvaluateOptions options{a.m_max, std::chrono::milliseconds(static_cast<long long>(a.timeout * 1000)),
                                  static_cast<unsigned>(a.workers)};
    const FitnessReport r = evaluate(scorer_factory(a.scorer, sandbox), instances, options);

    std::size_t width = 8;
    for (const auto& o : r.per_instance) width = std::max(width, o.instance_id.size());
    std::printf("%-*s %5s %5s %-8s %10s\n", static_cast<int>(width), "instance", "lb", "m", "solved", "time");
    for (const auto& o : r.per_instance) {
        std::printf("%-*s %5zu %5zu %-8s %10s\n", static_cast<int>(width), o.instance_id.c_str(), o.lower_bound, o.m,
                    o.solved ? "yes" : to_string(o.status).c_str(), format_ms(o.solve_time).c_str());
    }
    std::printf("solved %zu/%zu  f = %s\n", r.solved_count(), r.per_instance.size(), format_number(r.fitness).c_str());
    if (!a.report.empty()) write_file(a.report, report_to_json(r).dump(2) + "\n");
    return 0;
}

struct EvolveArgs {
    std::string mode = "ceoh";
    std::string instances = "instances";
    EvolutionConfig config;
    std::string endpoint = LlmConfig{}.endpoint;
    std::string model = LlmConfig{}.model;
    std::string api_key_env = LlmConfig{}.api_key_env;
    int max_retries = LlmConfig{}.max_retries;
    double llm_timeout = 180;
    std::string log = "run.jsonl";
    std::string checkpoint;
    bool resume = false;
    std::string runner;
    double timeout = 60;
    std::size_t workers = 1;
    std::string templates;
    bool log_prompts = false;
};

int cmd_evolve(EvolveArgs a) {
    const auto mode = prompt_mode_from_string(a.mode);
    if (!mode) throw UsageError("--mode must be ceoh or eoh");
    a.config.mode = *mode;
    try {
        a.config.validate();
    } catch (const InvalidConfig& e) {
        throw UsageError(e.what());
    }
    if (a.resume && a.checkpoint.empty()) throw UsageError("--resume needs --checkpoint");

    LlmConfig llm_config;
    llm_config.endpoint = a.endpoint;
    llm_config.model = a.model;
    llm_config.api_key_env = a.api_key_env;
    llm_config.max_retries = a.max_retries;
    llm_config.request_timeout = std::chrono::milliseconds(static_cast<long long>(a.llm_timeout * 1000));
    HttpLlmClient llm(llm_config);

    const auto instances = read_instance_dir(a.instances);
    SandboxEvaluator evaluator(instances,
                               EvaluateOptions{a.config.m_max,
                                               std::chrono::milliseconds(static_cast<long long>(a.timeout * 1000)),
                                               static_cast<unsigned>(a.workers)},
                               sandbox_options(a.runner, a.timeout));

    EvolutionRunOptions options;
    if (!a.templates.empty()) options.templates = PromptTemplates::from_directory(a.templates);
    if (!a.checkpoint.empty()) options.checkpoint_path = fs::path(a.checkpoint);
    options.log_prompts = a.log_prompts;
    options.on_record = [](const LoggedRecord& e) {
        const auto& r = e.record;
        std::cerr << "[gen " << r.generation << "] #" << r.id << ' ' << to_string(r.strategy) << ' ';
        if (r.fitness) {
            std::cerr << "f=" << format_number(*r.fitness);
        } else {
            std::cerr << "invalid: " << e.invalid_reason.substr(0, 120);
        }
        std::cerr << '\n';
    };

    std::optional<JsonlRunLog> log;
    if (a.resume) {
        options.resume_from = EvolutionCheckpoint::load(a.checkpoint);
        log.emplace(a.log, options.resume_from->logged);
    } else {
        log.emplace(a.log);
    }

    const EvolutionResult result = run_evolution(a.config, llm, evaluator, *log, options);
    std::cout << "records " << result.records << ", llm calls " << result.llm_calls << '\n';
    std::cout << "best fitness after each selection:";
    for (double b : result.best_after_selection) std::cout << ' ' << format_number(b);
    std::cout << "\nfinal population (" << result.population.size() << "):\n";
    for (const auto& r : result.population) {
        std::cout << "  #" << r.id << " gen " << r.generation << ' ' << to_string(r.strategy)
                  << " f=" << format_number(*r.fitness) << "  " << r.thought.substr(0, 100) << '\n';
    }
    return 0;
}

struct ScoreArgs {
    std::string state;
    std::string scorer = "blocking";
    std::string runner;
    double timeout = 60;
};

int cmd_score(const ScoreArgs& a) {
    const Json j = parse_json_text(read_text_file(a.state), a.state);
    std::vector<WarehouseState> states;
    const bool batch = j.is_array() && !j.empty() && j[0].is_array() && !j[0].empty() && j[0][0].is_array();
    if (batch) {
        states = states_from_json(j, "warehouse_states");
    } else {
        states.push_back(state_from_json(j, "state"));
    }
    auto scorer = lookup_scorer(a.scorer, sandbox_options(a.runner, a.timeout));
    const auto scores = scorer->score(states);
    std::cout << '[';
    for (std::size_t i = 0; i < scores.size(); ++i) std::cout << (i ? ", " : "") << format_number(scores[i]);
    std::cout << "]\n";
    return 0;
}

void add_runner_flags(CLI::App* cmd, std::string& runner, double& timeout) {
    cmd->add_option("--runner", runner,
                    "Heuristic runner command for sandbox: scorers (default $UPMP_SANDBOX_RUNNER or upmp-sandbox-runner)");
    cmd->add_option("--timeout", timeout, "Seconds per instance solve / runner request")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Unit-load pre-marshalling: instances, greedy search, heuristic scoring and evolution"};
    app.set_config("--config", "", "TOML/INI file with default flag values");
    app.require_subcommand(1);
    const std::string scorer_help = "blocking, qwen-ceoh, gpt4o-eoh or sandbox:<file.py>";

    GenerateArgs gen;
    auto* generate = app.add_subcommand("generate", "Write seeded instance files");
    generate->add_option("--bay", gen.bay, "Bay rows x columns, e.g. 5x5")->capture_default_str();
    generate->add_option("--warehouse", gen.warehouse, "Bays in x and y")->capture_default_str();
    generate->add_option("--fill", gen.fill, "Fraction of occupied slots")->capture_default_str();
    generate->add_option("--classes", gen.classes, "Number of priority classes")->capture_default_str();
    generate->add_option("--seeds", gen.seeds, "Seed or inclusive range a..b")->capture_default_str();
    generate->add_option("--out", gen.out, "Output directory")->capture_default_str();

    SolveArgs sol;
    auto* solve_cmd = app.add_subcommand("solve", "Solve one instance with greedy best-first search");
    solve_cmd->add_option("--instance", sol.instance, "Instance JSON file")->required();
    solve_cmd->add_option("--scorer", sol.scorer, scorer_help)->capture_default_str();
    solve_cmd->add_option("--m-max", sol.m_max, "Move budget")->capture_default_str()->check(CLI::PositiveNumber);
    solve_cmd->add_option("--out", sol.out, "Solution JSON file");
    add_runner_flags(solve_cmd, sol.runner, sol.timeout);

    EvaluateArgs ev;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Fitness of a scorer over an instance directory");
    evaluate_cmd->add_option("--instances", ev.instances, "Instance directory")->capture_default_str();
    evaluate_cmd->add_option("--scorer", ev.scorer, scorer_help)->capture_default_str();
    evaluate_cmd->add_option("--m-max", ev.m_max, "Move budget")->capture_default_str()->check(CLI::PositiveNumber);
    evaluate_cmd->add_option("--workers", ev.workers, "Parallel instance solves")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    evaluate_cmd->add_option("--report", ev.report, "Write the JSON report here");
    add_runner_flags(evaluate_cmd, ev.runner, ev.timeout);

    EvolveArgs evo;
    auto* evolve = app.add_subcommand("evolve", "Run the LLM-driven heuristic evolution");
    evolve->add_option("--mode", evo.mode, "ceoh (with problem description) or eoh")
        ->capture_default_str()
        ->check(CLI::IsMember({"ceoh", "eoh"}));
    evolve->add_option("--instances", evo.instances, "Instance directory for fitness")->capture_default_str();
    evolve->add_option("--generations", evo.config.generations, "Generations")->capture_default_str();
    evolve->add_option("--pop", evo.config.population_size, "Population size")->capture_default_str();
    evolve->add_option("--samples", evo.config.samples_per_strategy, "Samples per strategy and generation")
        ->capture_default_str();
    evolve->add_option("--parents", evo.config.parents, "Parents for E1/E2")->capture_default_str();
    evolve->add_option("--init-calls", evo.config.init_calls, "I0 calls for the initial population")
        ->capture_default_str();
    evolve->add_option("--m-max", evo.config.m_max, "Move budget per instance")->capture_default_str();
    evolve->add_option("--seed", evo.config.rng_seed, "Parent selection seed")->capture_default_str();
    evolve->add_option("--llm-endpoint", evo.endpoint, "Chat-completions URL")->capture_default_str();
    evolve->add_option("--llm-model", evo.model, "Model name")->capture_default_str();
    evolve->add_option("--api-key-env", evo.api_key_env, "Environment variable holding the API key")
        ->capture_default_str();
    evolve->add_option("--max-retries", evo.max_retries, "Retries per LLM request")->capture_default_str();
    evolve->add_option("--llm-timeout", evo.llm_timeout, "Seconds per LLM request")->capture_default_str();
    evolve->add_option("--log", evo.log, "JSONL run log")->capture_default_str();
    evolve->add_option("--checkpoint", evo.checkpoint, "Checkpoint file, rewritten after every record");
    evolve->add_flag("--resume", evo.resume, "Continue from --checkpoint");
    evolve->add_option("--workers", evo.workers, "Parallel instance solves")->capture_default_str();
    evolve->add_option("--templates", evo.templates, "Directory overriding the built-in prompt templates");
    evolve->add_flag("--log-prompts", evo.log_prompts, "Store full prompt text in the run log");
    add_runner_flags(evolve, evo.runner, evo.timeout);

    ScoreArgs sc;
    auto* score = app.add_subcommand("score", "Print the scores a heuristic gives to states");
    score->add_option("--state", sc.state, "JSON state or list of states")->required();
    score->add_option("--scorer", sc.scorer, scorer_help)->capture_default_str();
    add_runner_flags(score, sc.runner, sc.timeout);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*generate) return cmd_generate(gen);
        if (*solve_cmd) return cmd_solve(sol);
        if (*evaluate_cmd) return cmd_evaluate(ev);
        if (*evolve) return cmd_evolve(evo);
        if (*score) return cmd_score(sc);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\nRun with --help for usage.\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
