#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qnet/config.hpp"
#include "qnet/effects.hpp"

namespace qnet {

/// Command-line overrides applied on top of a config.
struct RunOptions {
    std::optional<std::filesystem::path> output_directory;
    std::optional<double> dt;
    std::optional<std::uint64_t> seed;
    /// 0 = hardware concurrency.
    int workers = 0;
};

RunConfig apply_options(RunConfig cfg, const RunOptions& options);

struct RunOutcome {
    Trajectory trajectory;
    std::vector<std::string> columns;
    std::filesystem::path table;  // empty for metadata-only runs
    std::filesystem::path metadata;
    nlohmann::json meta;
};

/// Propagate, write <prefix>.csv and <prefix>.meta.json. On an invariant
/// violation the partial table is kept, the metadata says so, and the
/// exception is rethrown.
RunOutcome run(const RunConfig& cfg, const RunOptions& options = {});

struct SweepOutcome {
    std::vector<double> values;
    std::vector<double> times;
    std::vector<std::string> sites;
    /// data[v][t][s]
    std::vector<std::vector<std::vector<double>>> data;
    std::optional<EffectReport> effect;
    std::filesystem::path table;
    std::filesystem::path metadata;
};

/// One propagation per value, run concurrently; rows ordered by value then time.
SweepOutcome sweep(const SweepConfig& cfg, const RunOptions& options = {});

inline constexpr double kSteadyOracleTolerance = 1e-9;

/// Null-space report; writes <prefix>.steady.json. Throws OracleMismatch
/// (after writing) when a pump preset misses its closed form.
nlohmann::json steady(const RunConfig& cfg, const RunOptions& options = {});

nlohmann::json to_json(const EffectReport& report);

/// printf("%.17g")
std::string format_number17(double v);

}  // namespace qnet
