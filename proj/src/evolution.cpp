#include "upmp/evolution.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "upmp/sha256.hpp"

namespace upmp {

namespace {

constexpr std::array kGenerationStrategies = {Strategy::E1, Strategy::E2, Strategy::M1, Strategy::M2};

bool fitter(const HeuristicRecord& a, const HeuristicRecord& b) {
    if (*a.fitness != *b.fitness) return *a.fitness < *b.fitness;
    return a.id < b.id;
}

void require_evaluated(std::span<const HeuristicRecord> population) {
    for (const auto& r : population) {
        if (r.status != RecordStatus::evaluated || !r.fitness) {
            throw Error("record " + std::to_string(r.id) + " is not evaluated");
        }
    }
}

Json config_to_json(const EvolutionConfig& c) {
    Json j;
    j["population_size"] = c.population_size;
    j["generations"] = c.generations;
    j["samples_per_strategy"] = c.samples_per_strategy;
    j["parents"] = c.parents;
    j["init_calls"] = c.init_calls;
    j["mode"] = to_string(c.mode);
    j["m_max"] = c.m_max;
    j["rng_seed"] = c.rng_seed;
    return j;
}

EvolutionConfig config_from_json(const Json& j) {
    EvolutionConfig c;
    c.population_size = j.at("population_size").get<std::size_t>();
    c.generations = j.at("generations").get<std::size_t>();
    c.samples_per_strategy = j.at("samples_per_strategy").get<std::size_t>();
    c.parents = j.at("parents").get<std::size_t>();
    c.init_calls = j.at("init_calls").get<std::size_t>();
    const auto mode = prompt_mode_from_string(j.at("mode").get<std::string>());
    if (!mode) throw JsonFieldError("field 'config.mode': unknown mode");
    c.mode = *mode;
    c.m_max = j.at("m_max").get<std::size_t>();
    c.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    return c;
}

bool same_config(const EvolutionConfig& a, const EvolutionConfig& b) { return config_to_json(a) == config_to_json(b); }

}  // namespace

void EvolutionConfig::validate() const {
    auto positive = [](std::size_t v, const char* name) {
        if (v < 1) throw InvalidConfig(std::string(name) + " must be at least 1");
    };
    positive(population_size, "population_size");
    positive(generations, "generations");
    positive(samples_per_strategy, "samples_per_strategy");
    positive(parents, "parents");
    positive(init_calls, "init_calls");
    positive(m_max, "m_max");
    if (init_calls < population_size) {
        throw InvalidConfig("init_calls (" + std::to_string(init_calls) + ") must be at least population_size (" +
                            std::to_string(population_size) + ")");
    }
}

std::size_t parent_arity(Strategy strategy, const EvolutionConfig& config) {
    switch (strategy) {
        case Strategy::I0: return 0;
        case Strategy::M1:
        case Strategy::M2: return 1;
        case Strategy::E1:
        case Strategy::E2: return config.parents;
    }
    return 0;
}

std::vector<HeuristicRecord> select_parents(std::span<const HeuristicRecord> population, std::size_t count,
                                            SplitMix64& rng) {
    if (population.size() < count) {
        throw Error("cannot select " + std::to_string(count) + " parents from a population of " +
                    std::to_string(population.size()));
    }
    require_evaluated(population);
    std::vector<HeuristicRecord> ranked(population.begin(), population.end());
    std::sort(ranked.begin(), ranked.end(), fitter);

    const double n = static_cast<double>(ranked.size());
    std::vector<double> weights(ranked.size());
    for (std::size_t k = 0; k < ranked.size(); ++k) {
        weights[k] = 1.0 / (static_cast<double>(k + 1) + n);
    }
    std::vector<bool> taken(ranked.size(), false);
    std::vector<HeuristicRecord> chosen;
    chosen.reserve(count);
    for (std::size_t c = 0; c < count; ++c) {
        double total = 0.0;
        for (std::size_t k = 0; k < ranked.size(); ++k) {
            if (!taken[k]) total += weights[k];
        }
        const double target = rng.unit() * total;
        double acc = 0.0;
        std::size_t pick = ranked.size();
        for (std::size_t k = 0; k < ranked.size(); ++k) {
            if (taken[k]) continue;
            pick = k;  // falls back to the last free slot on rounding
            acc += weights[k];
            if (target < acc) break;
        }
        taken[pick] = true;
        chosen.push_back(ranked[pick]);
    }
    return chosen;
}

std::vector<HeuristicRecord> survivor_selection(std::span<const HeuristicRecord> population, std::size_t keep) {
    require_evaluated(population);
    std::vector<HeuristicRecord> sorted(population.begin(), population.end());
    std::stable_sort(sorted.begin(), sorted.end(), fitter);
    if (sorted.size() > keep) sorted.resize(keep);
    return sorted;
}

Json record_to_json(const HeuristicRecord& r) {
    Json j;
    j["id"] = r.id;
    j["generation"] = r.generation;
    j["strategy"] = to_string(r.strategy);
    j["parent_ids"] = r.parent_ids;
    j["status"] = to_string(r.status);
    j["fitness"] = r.fitness ? Json(*r.fitness) : Json(nullptr);
    j["thought"] = r.thought;
    j["code"] = r.code;
    return j;
}

HeuristicRecord record_from_json(const Json& j) {
    HeuristicRecord r;
    r.id = j.at("id").get<std::uint64_t>();
    r.generation = j.at("generation").get<int>();
    const auto strategy = strategy_from_string(j.at("strategy").get<std::string>());
    const auto status = record_status_from_string(j.at("status").get<std::string>());
    if (!strategy || !status) throw JsonFieldError("record " + std::to_string(r.id) + ": bad strategy or status");
    r.strategy = *strategy;
    r.status = *status;
    r.parent_ids = j.at("parent_ids").get<std::vector<std::uint64_t>>();
    if (!j.at("fitness").is_null()) r.fitness = j.at("fitness").get<double>();
    r.thought = j.at("thought").get<std::string>();
    r.code = j.at("code").get<std::string>();
    return r;
}

Json logged_record_to_json(const LoggedRecord& e) {
    Json j = record_to_json(e.record);
    j["invalid_reason"] = e.invalid_reason;
    j["prompt_sha256"] = e.prompt_sha256;
    Json sections = Json::array();
    for (auto s : e.prompt_sections) sections.push_back(to_string(s));
    j["prompt_sections"] = std::move(sections);
    j["raw_response"] = e.raw_response;
    if (e.prompt) j["prompt"] = *e.prompt;
    return j;
}

JsonlRunLog::JsonlRunLog(const std::filesystem::path& path, std::optional<std::size_t> keep_lines) : path_(path) {
    if (keep_lines) {
        std::string kept;
        if (std::filesystem::exists(path)) {
            const std::string text = read_text_file(path.string());
            std::size_t pos = 0;
            while (lines_ < *keep_lines) {
                const auto nl = text.find('\n', pos);
                if (nl == std::string::npos) break;
                pos = nl + 1;
                ++lines_;
            }
            kept = text.substr(0, pos);
        }
        if (lines_ != *keep_lines) {
            throw Error("run log '" + path.string() + "' has " + std::to_string(lines_) + " lines, checkpoint expects " +
                        std::to_string(*keep_lines));
        }
        std::ofstream rewrite(path, std::ios::binary | std::ios::trunc);
        rewrite << kept;
        if (!rewrite) throw Error("cannot rewrite run log '" + path.string() + "'");
    }
    out_.open(path, std::ios::binary | (keep_lines ? std::ios::app : std::ios::trunc));
    if (!out_) throw Error("cannot open run log '" + path.string() + "'");
}

void JsonlRunLog::append(const LoggedRecord& entry) {
    out_ << logged_record_to_json(entry).dump(-1, ' ', false, Json::error_handler_t::replace) << '\n';
    out_.flush();
    if (!out_) throw Error("write to run log '" + path_.string() + "' failed");
    ++lines_;
}

void MemoryRunLog::append(const LoggedRecord& entry) {
    text += logged_record_to_json(entry).dump(-1, ' ', false, Json::error_handler_t::replace);
    text += '\n';
    entries.push_back(entry);
}

SandboxEvaluator::SandboxEvaluator(std::vector<Instance> instances, EvaluateOptions options, SandboxOptions sandbox)
    : instances_(std::move(instances)), options_(options), sandbox_(std::move(sandbox)) {
    if (instances_.empty()) throw Error("evaluator needs at least one instance");
}

EvaluationOutcome SandboxEvaluator::evaluate(const std::string& code) {
    try {
        SandboxSession probe(sandbox_);
        probe.load(code);
        probe.shutdown();
    } catch (const SandboxFailure& e) {
        return {std::nullopt, e.what()};
    }
    const ScorerFactory factory = [&] { return std::make_unique<SandboxScorer>("generated", code, sandbox_); };
    const FitnessReport report = upmp::evaluate(factory, instances_, options_);
    const bool all_failed = std::all_of(report.per_instance.begin(), report.per_instance.end(), [](const auto& o) {
        return o.status == SolveStatus::scorer_failure || o.status == SolveStatus::timeout;
    });
    if (all_failed) {
        return {std::nullopt, "no instance ran cleanly: " + report.per_instance.front().failure};
    }
    return {report.fitness, {}};
}

void EvolutionCheckpoint::save(const std::filesystem::path& path) const {
    Json j;
    j["version"] = 1;
    j["config"] = config_to_json(config);
    j["rng_state"] = rng_state;
    j["next_id"] = next_id;
    j["llm_calls"] = llm_calls;
    j["generation"] = generation;
    j["step"] = step;
    j["logged"] = logged;
    Json pop = Json::array();
    for (const auto& r : population) pop.push_back(record_to_json(r));
    j["population"] = std::move(pop);
    j["best_after_selection"] = best_after_selection;

    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << j.dump(1, ' ', false, Json::error_handler_t::replace) << '\n';
        if (!out) throw Error("cannot write checkpoint '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error("cannot move checkpoint into place: " + ec.message());
}

EvolutionCheckpoint EvolutionCheckpoint::load(const std::filesystem::path& path) {
    const Json j = parse_json_text(read_text_file(path.string()), path.string());
    try {
        EvolutionCheckpoint c;
        c.config = config_from_json(j.at("config"));
        c.rng_state = j.at("rng_state").get<std::uint64_t>();
        c.next_id = j.at("next_id").get<std::uint64_t>();
        c.llm_calls = j.at("llm_calls").get<std::size_t>();
        c.generation = j.at("generation").get<std::size_t>();
        c.step = j.at("step").get<std::size_t>();
        c.logged = j.at("logged").get<std::size_t>();
        for (const auto& r : j.at("population")) c.population.push_back(record_from_json(r));
        c.best_after_selection = j.at("best_after_selection").get<std::vector<double>>();
        return c;
    } catch (const Json::exception& e) {
        throw JsonFieldError(path.string() + ": " + e.what());
    }
}

namespace {

class EvolutionRun {
public:
    EvolutionRun(const EvolutionConfig& config, LlmClient& llm, HeuristicEvaluator& evaluator, RunLogSink& sink,
                 const EvolutionRunOptions& options)
        : config_(config), llm_(llm), evaluator_(evaluator), sink_(sink), options_(options), rng_(config.rng_seed) {
        if (options.resume_from) {
            const EvolutionCheckpoint& c = *options.resume_from;
            if (!same_config(c.config, config)) {
                throw Error("checkpoint was written for a different evolution config");
            }
            if (sink.size() != c.logged) {
                throw Error("run log holds " + std::to_string(sink.size()) + " records, checkpoint expects " +
                            std::to_string(c.logged));
            }
            rng_ = SplitMix64(c.rng_state);
            next_id_ = c.next_id;
            llm_calls_ = c.llm_calls;
            generation_ = c.generation;
            step_ = c.step;
            working_ = c.population;
            best_ = c.best_after_selection;
        }
    }

    EvolutionResult run() {
        while (generation_ <= config_.generations) {
            const std::size_t steps = generation_ == 0 ? config_.init_calls
                                                       : kGenerationStrategies.size() * config_.samples_per_strategy;
            while (step_ < steps) {
                const Strategy strategy = generation_ == 0
                                              ? Strategy::I0
                                              : kGenerationStrategies[step_ / config_.samples_per_strategy];
                LoggedRecord entry = sample(strategy);
                try {
                    sink_.append(entry);
                } catch (const std::exception& e) {
                    throw EvolutionAborted(std::string("run log append failed: ") + e.what());
                }
                if (entry.record.status == RecordStatus::evaluated) {
                    working_.push_back(entry.record);
                }
                ++step_;
                if (options_.on_record) options_.on_record(entry);
                checkpoint();
            }
            working_ = survivor_selection(working_, config_.population_size);
            if (!working_.empty()) best_.push_back(*working_.front().fitness);
            ++generation_;
            step_ = 0;
            checkpoint();
        }
        return EvolutionResult{working_, best_, sink_.size(), llm_calls_};
    }

private:
    LoggedRecord sample(Strategy strategy) {
        LoggedRecord entry;
        HeuristicRecord& rec = entry.record;
        rec.id = next_id_++;
        rec.generation = static_cast<int>(generation_);
        rec.strategy = strategy;

        auto invalid = [&](std::string reason) {
            rec.status = RecordStatus::invalid;
            rec.fitness.reset();
            entry.invalid_reason = std::move(reason);
            return entry;
        };

        const std::size_t arity = parent_arity(strategy, config_);
        if (working_.size() < arity) {
            return invalid("insufficient_population: need " + std::to_string(arity) + ", have " +
                           std::to_string(working_.size()));
        }
        const std::vector<HeuristicRecord> parents = select_parents(working_, arity, rng_);
        for (const auto& p : parents) rec.parent_ids.push_back(p.id);

        const PromptBundle bundle = build_prompt(strategy, config_.mode, parents, options_.templates);
        const std::string prompt = bundle.render();
        entry.prompt_sha256 = sha256_hex(prompt);
        for (const auto& s : bundle.sections) entry.prompt_sections.push_back(s.label);
        if (options_.log_prompts) entry.prompt = prompt;

        ++llm_calls_;
        try {
            entry.raw_response = llm_.complete(bundle);
        } catch (const std::exception& e) {
            return invalid(std::string("transport: ") + e.what());
        }

        ParsedResponse parsed = parse_response(entry.raw_response, options_.templates.function_name);
        rec.thought = parsed.thought;
        rec.code = parsed.code;
        if (!parsed.ok()) {
            return invalid("parse: " + to_string(parsed.failure));
        }

        EvaluationOutcome outcome;
        try {
            outcome = evaluator_.evaluate(rec.code);
        } catch (const std::exception& e) {
            outcome = {std::nullopt, e.what()};
        }
        if (!outcome.fitness || !std::isfinite(*outcome.fitness)) {
            return invalid("evaluation: " + outcome.failure);
        }
        rec.fitness = outcome.fitness;
        rec.status = RecordStatus::evaluated;
        return entry;
    }

    void checkpoint() {
        if (!options_.checkpoint_path) return;
        EvolutionCheckpoint c;
        c.config = config_;
        c.rng_state = rng_.state();
        c.next_id = next_id_;
        c.llm_calls = llm_calls_;
        c.generation = generation_;
        c.step = step_;
        c.logged = sink_.size();
        c.population = working_;
        c.best_after_selection = best_;
        try {
            c.save(*options_.checkpoint_path);
        } catch (const std::exception& e) {
            throw EvolutionAborted(std::string("checkpoint write failed: ") + e.what());
        }
    }

    const EvolutionConfig& config_;
    LlmClient& llm_;
    HeuristicEvaluator& evaluator_;
    RunLogSink& sink_;
    const EvolutionRunOptions& options_;
    SplitMix64 rng_;
    std::uint64_t next_id_ = 1;
    std::size_t llm_calls_ = 0;
    std::size_t generation_ = 0;
    std::size_t step_ = 0;
    std::vector<HeuristicRecord> working_;
    std::vector<double> best_;
};

}  // namespace

EvolutionResult run_evolution(const EvolutionConfig& config, LlmClient& llm, HeuristicEvaluator& evaluator,
                              RunLogSink& sink, const EvolutionRunOptions& options) {
    config.validate();
    EvolutionRun run(config, llm, evaluator, sink, options);
    return run.run();
}

}  // namespace upmp
