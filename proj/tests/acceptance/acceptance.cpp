// Acceptance gate: one PASS/FAIL line per primary criterion. Exit status is
// non-zero when any criterion fails. Needs no heuristic runner.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../support/bfs_oracle.hpp"
#include "../support/scripted_llm.hpp"
#include "upmp/evolution.hpp"
#include "upmp/fitness.hpp"
#include "upmp/heuristics.hpp"
#include "upmp/instances.hpp"
#include "upmp/json_io.hpp"
#include "upmp/prompt.hpp"
#include "upmp/search.hpp"
#include "upmp/sha256.hpp"

using namespace upmp;

namespace {

/// Collects the first few reasons a criterion failed.
class Check {
public:
    void expect(bool ok, const std::string& what) {
        if (ok) return;
        ++failures_;
        if (failures_ <= 5) detail_ << (failures_ > 1 ? "; " : "") << what;
    }
    [[nodiscard]] bool ok() const { return failures_ == 0; }
    [[nodiscard]] std::string detail() const {
        std::string d = detail_.str();
        if (failures_ > 5) d += "; ... (" + std::to_string(failures_) + " failures)";
        return d;
    }
    /// Free-form summary printed after the verdict.
    std::string note;

private:
    int failures_ = 0;
    std::ostringstream detail_;
};

std::vector<Instance> seeded_suite() {
    // 200 instances: 3x3 and 4x4 bays, fill 40%, 50%, 60%, 1x1 warehouse.
    std::vector<Instance> out;
    const double fills[] = {0.4, 0.5, 0.6};
    for (std::uint64_t i = 0; i < 200; ++i) {
        InstanceConfig c;
        c.bay_rows = c.bay_cols = i % 2 == 0 ? 3 : 4;
        c.fill_pct = fills[(i / 2) % 3];
        c.priority_classes = 5;
        c.seed = i;
        out.push_back(generate_instance(c));
    }
    return out;
}

void description_examples(Check& c) {
    using Lane = std::vector<int>;
    const std::vector<std::pair<Lane, std::vector<std::size_t>>> blocking = {
        {{0, 4, 1}, {1}}, {{3, 3, 2}, {0, 1}}, {{0, 5, 1, 5, 2}, {1, 3}}, {{0, 4, 4, 3}, {1, 2}}};
    for (const auto& [lane, expected] : blocking) {
        c.expect(blocking_indices(lane) == expected, "blocking_indices(" + to_string(WarehouseState({lane})) + ")");
    }
    const std::vector<std::pair<Lane, bool>> validity = {
        {{1, 1, 0, 0}, false}, {{2, 0, 2}, false}, {{0, 0, 1, 2}, true}, {{1, 2, 3, 3}, true}};
    for (const auto& [lane, expected] : validity) {
        c.expect(validate_lane(lane) == expected, "validate_lane case " + std::to_string(lane.size()));
    }
}

void prompt_fidelity(Check& c) {
    const std::string ceoh = build_prompt(Strategy::I0, PromptMode::ceoh, {}).render();
    const std::string eoh = build_prompt(Strategy::I0, PromptMode::eoh, {}).render();
    // Problem description lines as they must appear in plain text.
    const char* required[] = {
        "A 1 represents the highest priority class.",
        "A 5 represents the lowest priority class.",
        "A 0 represents an empty slot.",
        "In the lane [0, 4, 4, 3], the two 4s block access to the 3.",
        "[[[0, 2, 3], [0, 5, 5], [5, 1, 1]],\n [[0, 2, 3], [5, 5, 5], [0, 1, 1]],\n [[5, 2, 3], [1, 5, 5], [0, 0, 1]]]",
        "[[[2, 2, 3, 5], [0, 3, 5, 4], [0, 0, 2, 2]],\n [[0, 0, 3, 5], [2, 3, 5, 4], [0, 2, 2, 2]],\n"
        " [[0, 2, 3, 5], [0, 0, 5, 4], [3, 2, 2, 2]],\n [[0, 0, 3, 5], [0, 3, 5, 4], [2, 2, 2, 2]]]",
        "First example for 'scores':\n[-3, -1, -4]",
        "Second example for 'scores':\n[0, 1, 3, 1]",
    };
    for (const char* line : required) {
        c.expect(ceoh.find(line) != std::string::npos, std::string("CEoH prompt lacks: ") + line);
        c.expect(eoh.find(line) == std::string::npos, std::string("EoH prompt contains: ") + line);
    }
    const auto bundle = build_prompt(Strategy::I0, PromptMode::eoh, {});
    c.expect(!bundle.has(SectionLabel::problem_description), "EoH bundle has a problem_description section");

    auto golden_hash = [](const std::string& name) {
        const std::string text = read_text_file(std::string(UPMP_TEST_GOLDEN_DIR) + "/" + name);
        return text.substr(0, text.find('\n'));
    };
    c.expect(sha256_hex(ceoh) == golden_hash("ceoh_i0_prompt.sha256"), "CEoH golden hash mismatch");
    c.expect(sha256_hex(eoh) == golden_hash("eoh_i0_prompt.sha256"), "EoH golden hash mismatch");
}

void fitness_function(Check& c) {
    using Counts = std::vector<std::size_t>;
    c.expect(fitness_value(Counts{12}, Counts{10}) == 0.2, "fitness_value([12],[10]) != 0.2");
    c.expect(fitness_value(Counts{4, 9, 17}, Counts{4, 9, 17}) == 0.0, "fitness_value(ms = lbs) != 0");
    SplitMix64 rng(77);
    for (int t = 0; t < 1000; ++t) {
        const std::size_t n = 1 + rng.below(10);
        Counts lbs(n);
        Counts ms(n);
        for (std::size_t i = 0; i < n; ++i) {
            lbs[i] = 1 + rng.below(30);
            ms[i] = lbs[i] + rng.below(100);
        }
        const double f = fitness_value(ms, lbs);
        Counts more = ms;
        more[rng.below(n)] += 1 + rng.below(10);
        c.expect(fitness_value(more, lbs) >= f, "monotonicity case " + std::to_string(t));
        c.expect(f >= 0.0, "negative fitness in case " + std::to_string(t));
    }
}

void search_soundness(Check& c, const std::vector<Instance>& suite) {
    auto scorer = lookup_scorer("blocking");
    std::size_t solved = 0;
    for (const auto& inst : suite) {
        const SolveResult r = solve(inst.initial, *scorer, 100);
        const std::string tag = "instance " + std::to_string(inst.config.seed);
        c.expect(r.move_count <= 100 && r.moves.size() <= 100, tag + " exceeded m_max");
        std::set<std::string> seen{canonical_key(inst.initial)};
        WarehouseState cur = inst.initial;
        bool legal = true;
        for (const Move& m : r.moves) {
            if (move_violation(cur, m)) {
                legal = false;
                break;
            }
            cur = apply_move(cur, m);
            c.expect(seen.insert(canonical_key(cur)).second, tag + " revisited a committed state");
        }
        c.expect(legal, tag + " emitted an illegal move");
        try {
            replay(inst.initial, r.moves);
        } catch (const ReplayError&) {
            c.expect(false, tag + " failed replay");
        }
        if (r.solved) {
            ++solved;
            c.expect(is_blockage_free(cur), tag + " solved but terminal state blocks");
            c.expect(r.move_count == r.moves.size(), tag + " solved with m != |moves|");
        } else {
            c.expect(r.move_count == 100, tag + " unsolved without the m_max penalty");
        }
    }
    c.note = std::to_string(solved) + "/" + std::to_string(suite.size()) + " solved by the baseline";
}

void optimality_floor(Check& c, const std::vector<Instance>& suite) {
    auto scorer = lookup_scorer("blocking");
    std::size_t checked = 0;
    std::size_t unit = 0;
    for (const auto& inst : suite) {
        if (inst.initial.lane_count() * inst.initial.depth() > 9 || inst.initial.lane_count() > 3) continue;
        const auto opt = testing::bfs_optimal_moves(inst.initial);
        const std::string tag = "instance " + std::to_string(inst.config.seed);
        if (!opt) {
            c.expect(false, tag + " has no BFS solution");
            continue;
        }
        ++checked;
        c.expect(lower_bound_blocking(inst.initial) <= *opt, tag + " lower bound exceeds optimum");
        if (*opt == 1 && inst.lower_bound == 1) {
            ++unit;
            c.expect(solve(inst.initial, *scorer, 100).move_count == 1, tag + " greedy missed the 1-move optimum");
        }
    }
    c.expect(checked > 0, "no small instances in the suite");
    c.note = std::to_string(checked) + " instances checked, " + std::to_string(unit) + " with optimum = lb = 1";
}

void reference_fixtures(Check& c) {
    const Json j =
        parse_json_text(read_text_file(std::string(UPMP_TEST_FIXTURES_DIR) + "/scorer_fixtures.json"), "fixtures");
    const auto states = states_from_json(j.at("states"), "states");
    const auto qwen_ref = j.at("qwen-ceoh").get<std::vector<double>>();
    const auto gpt_ref = j.at("gpt4o-eoh").get<std::vector<double>>();
    c.expect(states.size() == 20 && qwen_ref.size() == 20 && gpt_ref.size() == 20, "fixture size is not 20");
    const auto q = score_qwen_ceoh(states);
    const auto g = score_gpt4o_eoh(states);
    double worst = 0.0;
    for (std::size_t i = 0; i < states.size() && i < qwen_ref.size() && i < gpt_ref.size(); ++i) {
        worst = std::max({worst, std::abs(q[i] - qwen_ref[i]), std::abs(g[i] - gpt_ref[i])});
    }
    c.expect(worst <= 1e-9, "fixture deviation " + std::to_string(worst));
    const std::vector<WarehouseState> anchor{WarehouseState({{0, 1}})};
    c.expect(std::abs(score_qwen_ceoh(anchor)[0] - 8.8) <= 1e-12, "qwen-ceoh([[0,1]]) != 8.8");
    c.expect(std::abs(score_gpt4o_eoh(anchor)[0] - (1.0 + std::exp(-0.5))) <= 1e-4, "gpt4o-eoh([[0,1]]) != 1+e^-0.5");
    char buf[64];
    std::snprintf(buf, sizeof buf, "max deviation %.3g", worst);
    c.note = buf;
}

void desk_scale(Check& c) {
    std::vector<Instance> instances;
    for (std::uint64_t s = 0; s < 10; ++s) {
        InstanceConfig cfg;  // 5x5 bay, 1x1 warehouse, 60% fill, 5 classes
        cfg.seed = s;
        instances.push_back(generate_instance(cfg));
    }
    const FitnessReport r = evaluate(scorer_factory("qwen-ceoh"), instances, {100, std::chrono::seconds(60), 1});
    c.expect(r.solved_count() >= 9, "qwen-ceoh solved only " + std::to_string(r.solved_count()) + "/10");
    std::ostringstream note;
    note << r.solved_count() << "/10 solved, f = " << r.fitness;
    c.note = note.str();
}

void evolution_dry_run(Check& c) {
    EvolutionConfig config;  // defaults except the generation count
    config.generations = 2;
    testing::VariantEvaluator evaluator;
    auto run = [&](MemoryRunLog& log) {
        testing::ScriptedLlm llm(10);
        return run_evolution(config, llm, evaluator, log);
    };
    MemoryRunLog first;
    const auto r = run(first);
    MemoryRunLog second;
    run(second);

    std::size_t malformed = 0;
    for (const auto& e : first.entries) malformed += e.invalid_reason.rfind("parse:", 0) == 0;
    c.expect(first.entries.size() == 40 + 160, "logged " + std::to_string(first.entries.size()) + " records");
    c.expect(malformed > 0, "no malformed replies were exercised");
    c.expect(r.population.size() == 20, "final population " + std::to_string(r.population.size()));
    for (std::size_t g = 1; g < r.best_after_selection.size(); ++g) {
        c.expect(r.best_after_selection[g] <= r.best_after_selection[g - 1], "best fitness increased");
    }
    c.expect(r.best_after_selection.size() == 3, "expected 3 survivor selections");
    c.expect(first.text == second.text, "run log differs on re-execution");
    c.note = std::to_string(malformed) + " malformed replies, log " + sha256_hex(first.text).substr(0, 12);
}

}  // namespace

int main() {
    const auto suite = seeded_suite();
    const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria = {
        {"problem description examples (blocking and lane validity)", description_examples},
        {"prompt fidelity (CEoH description present, EoH omits it, golden hashes)", prompt_fidelity},
        {"fitness function (exact values, 1000-case monotonicity)", fitness_function},
        {"search soundness (200 seeded instances, m_max 100)", [&](Check& c) { search_soundness(c, suite); }},
        {"optimality floor (exhaustive BFS on <= 9 slots, <= 3 lanes)", [&](Check& c) { optimality_floor(c, suite); }},
        {"reference heuristic fixtures (20 states each, 1e-9)", reference_fixtures},
        {"desk-scale solve (qwen-ceoh, 5x5 seeds 0-9, >= 9 solved)", desk_scale},
        {"evolution dry run (scripted model, 200 records, population 20)", evolution_dry_run},
    };

    int failed = 0;
    for (const auto& [name, body] : criteria) {
        Check c;
        const auto start = std::chrono::steady_clock::now();
        try {
            body(c);
        } catch (const std::exception& e) {
            c.expect(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s  %s  [%.2fs]", c.ok() ? "PASS" : "FAIL", name.c_str(), secs);
        if (!c.note.empty()) std::printf("  %s", c.note.c_str());
        if (!c.ok()) std::printf("\n      %s", c.detail().c_str());
        std::printf("\n");
        failed += !c.ok();
    }
    std::printf("%d/%zu acceptance criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
