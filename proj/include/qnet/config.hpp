#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "qnet/dynamics.hpp"
#include "qnet/model.hpp"

namespace qnet {

inline constexpr const char* kToolVersion = "qnet 1.0.0";

struct InitialStateRequest {
    enum class Kind { preset_default, occupations, dicke, matrix_file };
    Kind kind = Kind::preset_default;
    std::vector<int> occupations;
    std::vector<std::string> dicke_sites;  // empty: every qubit whose label starts with 'r'
    int dicke_n = 0;
    std::filesystem::path matrix_file;
};

struct ObservableRequest {
    /// Site labels; "*" expands to every site.
    std::vector<std::string> populations;
    bool purity = false;
    bool purity_rate = false;
    bool trace = false;
    bool min_eigenvalue = false;
    /// Computational-basis elements rho(i, j).
    std::vector<std::pair<std::size_t, std::size_t>> coherences;
    /// Elements <n|rho|m> in the sorted Hamiltonian eigenbasis.
    std::vector<std::pair<std::size_t, std::size_t>> eigen_coherences;
    /// Population pairs (x, y) analysed for the staircase effect.
    std::vector<std::pair<std::string, std::string>> parametric;

    bool empty() const {
        return populations.empty() && !purity && !purity_rate && !trace && !min_eigenvalue && coherences.empty() &&
               eigen_coherences.empty() && parametric.empty();
    }
};

struct RunConfig {
    std::optional<PresetParams> preset;
    std::optional<NetworkSpec> spec;
    InitialStateRequest initial;
    std::optional<double> t_max;
    std::optional<int> samples;
    std::optional<double> dt;
    PropagationMethod method = PropagationMethod::fixed_step_rk4;
    bool rehermitize = false;
    bool number_sector_filter = false;
    ObservableRequest observables;
    std::filesystem::path output_directory = "qnet_out";
    std::string prefix = "run";
    std::uint64_t seed = 0;
    /// The parsed document, echoed into metadata.
    nlohmann::json source;
};

struct SweepConfig {
    RunConfig base;
    /// Preset parameter name, or "jumps.<k>.rate" / "hoppings.<k>.amplitude" /
    /// "onsite.<k>.energy" for inline specs.
    std::string parameter;
    std::vector<double> values;
    std::vector<double> sample_times;
    /// Populations reported per (value, time) row.
    std::vector<std::string> sites;
    /// Optional detector over the last sample time: "congestion_valley".
    std::optional<std::string> detect;
    std::string detect_site;
    int workers = 0;
};

/// Relative paths inside the document resolve against base_dir.
RunConfig parse_run_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);
SweepConfig parse_sweep_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
SweepConfig load_sweep_config(const std::filesystem::path& path);

NetworkSpec parse_network_spec(const nlohmann::json& doc);
nlohmann::json to_json(const NetworkSpec& spec);

/// Everything needed to propagate: network, state, grid, metadata.
struct ResolvedRun {
    NetworkSpec spec;
    DensityMatrix initial;
    std::string initial_label;
    PropagationConfig propagation;
    std::map<std::string, double> parameters;
    std::map<std::string, std::string> options;
    std::map<std::string, std::string> metadata;
    std::string preset_name;
    std::string reaction_center;
};

ResolvedRun resolve(const RunConfig& cfg);

/// Set a swept parameter on a copy of the config.
RunConfig with_parameter(const RunConfig& cfg, const std::string& parameter, double value);

}  // namespace qnet
