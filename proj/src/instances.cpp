#include "upmp/instances.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "upmp/json_io.hpp"
#include "upmp/rng.hpp"

namespace upmp {

namespace {

constexpr int kMaxAttempts = 100000;

std::string shortest(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

template <typename T>
T get_field(const Json& obj, const char* key, const std::string& prefix) {
    const std::string where = prefix + key;
    if (!obj.contains(key)) {
        throw JsonFieldError("missing field '" + where + "'");
    }
    const Json& v = obj.at(key);
    if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) {
            throw JsonFieldError("field '" + where + "': expected a number");
        }
    } else {
        if (!v.is_number_integer()) {
            throw JsonFieldError("field '" + where + "': expected an integer");
        }
        if constexpr (std::is_unsigned_v<T>) {
            if (!v.is_number_unsigned()) {
                throw JsonFieldError("field '" + where + "': expected a non-negative integer");
            }
        }
    }
    return v.get<T>();
}

}  // namespace

std::size_t InstanceConfig::lane_count() const {
    return static_cast<std::size_t>(warehouse_x) * static_cast<std::size_t>(warehouse_y) *
           static_cast<std::size_t>(bay_cols);
}

std::size_t InstanceConfig::load_count() const {
    return static_cast<std::size_t>(std::floor(fill_pct * static_cast<double>(slot_count()) + 0.5));
}

void InstanceConfig::validate() const {
    auto positive = [](int v, const char* name) {
        if (v < 1) {
            throw InvalidConfig(std::string(name) + " must be at least 1");
        }
    };
    positive(bay_rows, "bay_rows");
    positive(bay_cols, "bay_cols");
    positive(warehouse_x, "warehouse_x");
    positive(warehouse_y, "warehouse_y");
    positive(priority_classes, "priority_classes");
    if (!(fill_pct > 0.0 && fill_pct < 1.0)) {
        throw InvalidConfig("fill_pct must lie strictly between 0 and 1, got " + shortest(fill_pct));
    }
    const std::size_t k = load_count();
    if (k >= slot_count()) {
        throw InvalidConfig("fill_pct " + shortest(fill_pct) + " yields " + std::to_string(k) + " loads for " +
                            std::to_string(slot_count()) + " slots; at least one slot must stay empty");
    }
    if (k < 2 || priority_classes < 2) {
        throw InvalidConfig("configuration cannot produce a blocking load (needs >= 2 loads and >= 2 classes)");
    }
}

std::string InstanceConfig::file_stem() const {
    return "b" + std::to_string(bay_rows) + "x" + std::to_string(bay_cols) + "_w" + std::to_string(warehouse_x) +
           "x" + std::to_string(warehouse_y) + "_f" + shortest(fill_pct) + "_p" + std::to_string(priority_classes) +
           "_s" + std::to_string(seed);
}

std::size_t lower_bound_blocking(const WarehouseState& state) { return count_blocking(state); }

Instance generate_instance(const InstanceConfig& config) {
    config.validate();
    const std::size_t lanes = config.lane_count();
    const std::size_t depth = config.depth();
    const std::size_t loads = config.load_count();
    const auto classes = static_cast<std::uint64_t>(config.priority_classes);

    SplitMix64 rng(config.seed);
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        std::vector<SlotValue> priorities(loads);
        for (auto& p : priorities) {
            p = static_cast<SlotValue>(1 + rng.below(classes));
        }
        std::vector<Lane> grid(lanes, Lane(depth, 0));
        std::vector<std::size_t> free_slots(lanes, depth);
        std::vector<std::size_t> candidates;
        for (SlotValue p : priorities) {
            candidates.clear();
            for (std::size_t l = 0; l < lanes; ++l) {
                if (free_slots[l] > 0) {
                    candidates.push_back(l);
                }
            }
            const std::size_t lane = candidates[rng.below(candidates.size())];
            grid[lane][--free_slots[lane]] = p;
        }
        WarehouseState state(std::move(grid));
        const std::size_t lb = lower_bound_blocking(state);
        if (lb >= 1) {
            return Instance{config, std::move(state), lb, config.file_stem()};
        }
    }
    throw InvalidConfig("no instance with a blocking load after " + std::to_string(kMaxAttempts) + " attempts");
}

std::string serialize_instance(const Instance& instance) {
    const InstanceConfig& c = instance.config;
    Json j;
    j["config"] = {
        {"bay_rows", c.bay_rows},
        {"bay_cols", c.bay_cols},
        {"warehouse_x", c.warehouse_x},
        {"warehouse_y", c.warehouse_y},
        {"fill_pct", c.fill_pct},
        {"priority_classes", c.priority_classes},
        {"seed", c.seed},
    };
    j["lanes"] = state_to_json(instance.initial);
    j["lower_bound"] = instance.lower_bound;
    return j.dump(2) + "\n";
}

Instance parse_instance(const std::string& text, const std::string& origin) {
    try {
        const Json j = parse_json_text(text, "syntax");
        if (!j.is_object()) {
            throw JsonFieldError("top level must be an object");
        }
        if (!j.contains("config") || !j["config"].is_object()) {
            throw JsonFieldError("missing object field 'config'");
        }
        const Json& cj = j["config"];
        InstanceConfig c;
        c.bay_rows = get_field<int>(cj, "bay_rows", "config.");
        c.bay_cols = get_field<int>(cj, "bay_cols", "config.");
        c.warehouse_x = get_field<int>(cj, "warehouse_x", "config.");
        c.warehouse_y = get_field<int>(cj, "warehouse_y", "config.");
        c.fill_pct = get_field<double>(cj, "fill_pct", "config.");
        c.priority_classes = get_field<int>(cj, "priority_classes", "config.");
        c.seed = get_field<std::uint64_t>(cj, "seed", "config.");
        if (!j.contains("lanes")) {
            throw JsonFieldError("missing field 'lanes'");
        }
        WarehouseState initial = state_from_json(j["lanes"], "lanes");
        const auto lb = get_field<std::size_t>(j, "lower_bound", "");
        if (initial.lane_count() != c.lane_count() || initial.depth() != c.depth()) {
            throw JsonFieldError("field 'lanes': shape " + std::to_string(initial.lane_count()) + "x" +
                                 std::to_string(initial.depth()) + " does not match config " +
                                 std::to_string(c.lane_count()) + "x" + std::to_string(c.depth()));
        }
        const std::size_t blocking = lower_bound_blocking(initial);
        if (lb != blocking) {
            throw JsonFieldError("field 'lower_bound': " + std::to_string(lb) + " differs from blocking count " +
                                 std::to_string(blocking));
        }
        Instance inst{c, std::move(initial), lb, origin};
        return inst;
    } catch (const JsonFieldError& e) {
        throw InstanceParseError(origin + ": " + e.what());
    }
}

void write_instance(const Instance& instance, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write '" + path.string() + "'");
    }
    out << serialize_instance(instance);
    if (!out) {
        throw Error("write failed for '" + path.string() + "'");
    }
}

Instance read_instance(const std::filesystem::path& path) {
    Instance inst = parse_instance(read_text_file(path.string()), path.string());
    inst.id = path.stem().string();
    return inst;
}

std::vector<Instance> read_instance_dir(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw Error("'" + dir.string() + "' is not a directory");
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
            files.push_back(entry.path());
        }
    }
    if (files.empty()) {
        throw Error("no instance files (*.json) in '" + dir.string() + "'");
    }
    std::sort(files.begin(), files.end());
    std::vector<Instance> out;
    out.reserve(files.size());
    for (const auto& f : files) {
        out.push_back(read_instance(f));
    }
    return out;
}

}  // namespace upmp
