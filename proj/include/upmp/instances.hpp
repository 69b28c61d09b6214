#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "upmp/core.hpp"

namespace upmp {

class InvalidConfig : public Error {
public:
    using Error::Error;
};

class InstanceParseError : public Error {
public:
    using Error::Error;
};

/// One-tier, north-access layout. Every bay column is a lane of depth
/// `bay_rows`; bays are flattened into one lane sequence.
struct InstanceConfig {
    int bay_rows = 5;
    int bay_cols = 5;
    int warehouse_x = 1;
    int warehouse_y = 1;
    double fill_pct = 0.6;
    int priority_classes = 5;
    std::uint64_t seed = 0;

    [[nodiscard]] std::size_t lane_count() const;
    [[nodiscard]] std::size_t depth() const { return static_cast<std::size_t>(bay_rows); }
    [[nodiscard]] std::size_t slot_count() const { return lane_count() * depth(); }

    /// round-half-up(fill_pct * slot_count).
    [[nodiscard]] std::size_t load_count() const;

    /// Throws InvalidConfig naming the offending field.
    void validate() const;

    /// File stem used by the CLI, e.g. "b5x5_w1x1_f0.6_p5_s3".
    [[nodiscard]] std::string file_stem() const;

    friend bool operator==(const InstanceConfig&, const InstanceConfig&) = default;
};

struct Instance {
    InstanceConfig config;
    WarehouseState initial;
    std::size_t lower_bound = 0;
    /// Display name; file stem when loaded from disk. Not serialized.
    std::string id;

    friend bool operator==(const Instance& a, const Instance& b) {
        return a.config == b.config && a.initial == b.initial && a.lower_bound == b.lower_bound;
    }
};

/// Every blocking load has to leave its lane at least once, so the blocking
/// count never exceeds the optimal number of moves.
std::size_t lower_bound_blocking(const WarehouseState& state);

/// Deterministic in `config`. Draws from SplitMix64(seed): first one priority
/// class per load (1 + next() % P), then for each load in order one lane among
/// those with a free slot (next() % candidates). Loads fill lanes innermost
/// first. If the result is blockage-free the same stream keeps drawing a new
/// attempt, so the seed itself never changes.
Instance generate_instance(const InstanceConfig& config);

std::string serialize_instance(const Instance& instance);
Instance parse_instance(const std::string& text, const std::string& origin = "<memory>");

void write_instance(const Instance& instance, const std::filesystem::path& path);
Instance read_instance(const std::filesystem::path& path);

/// All *.json files in `dir`, sorted by file name. Throws on an empty directory.
std::vector<Instance> read_instance_dir(const std::filesystem::path& dir);

}  // namespace upmp
