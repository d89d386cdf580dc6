#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qnet/hilbert.hpp"

namespace qnet {

/// amplitude * (lower_a raise_b + raise_a lower_b)
struct Hopping {
    std::string a;
    std::string b;
    double amplitude = 0.0;
};

/// energy * number(site)
struct OnsiteEnergy {
    std::string site;
    double energy = 0.0;
};

/// L = sqrt(rate) lower(from) raise(to)
struct Transfer {
    std::string from;
    std::string to;
    double rate = 0.0;
};
/// L = sqrt(rate) raise(site)
struct Injection {
    std::string site;
    double rate = 0.0;
};
/// L = sqrt(rate) lower(site)
struct Extraction {
    std::string site;
    double rate = 0.0;
};
/// L = sqrt(rate) lower(site); same operator as Extraction, kept distinct for reporting.
struct Dissipation {
    std::string site;
    double rate = 0.0;
};
/// L = sqrt(rate) number(site)
struct Dephasing {
    std::string site;
    double rate = 0.0;
};

using JumpProcess = std::variant<Transfer, Injection, Extraction, Dissipation, Dephasing>;

const char* jump_type_name(const JumpProcess& jump);
double jump_rate(const JumpProcess& jump);
void set_jump_rate(JumpProcess& jump, double rate);

struct NetworkSpec {
    std::vector<SiteDescriptor> sites;
    std::vector<Hopping> hoppings;
    std::vector<OnsiteEnergy> onsite_energies;
    std::vector<JumpProcess> jumps;
    std::string units_note;

    /// Throws ValidationError when a reference, amplitude, or rate is invalid.
    void validate() const;
    ProductBasis basis() const;
    /// True when every jump is a Transfer (total number conserved).
    bool number_conserving() const;
};

SparseMatrix build_hamiltonian_sparse(const NetworkSpec& spec, const ProductBasis& basis);
Matrix build_hamiltonian(const NetworkSpec& spec, const ProductBasis& basis);

/// One operator per entry of spec.jumps, in order.
std::vector<SparseMatrix> build_jump_operators_sparse(const NetworkSpec& spec, const ProductBasis& basis);
std::vector<Matrix> build_jump_operators(const NetworkSpec& spec, const ProductBasis& basis);

/// Constant c in the static-noise profile eps_j = scale * cos(c j).
inline constexpr double kCosineNoiseConstant = 2.718281828459045;

/// eps_j = scale * cos(kCosineNoiseConstant * j), j = 1..count.
std::vector<double> cosine_noise(double scale, int count);

/// eps_j uniform in [-scale, scale] from a seeded mt19937_64.
std::vector<double> uniform_noise(double scale, int count, std::uint64_t seed);

/// hbar in meV*ps, used to convert meV energies to ps^-1 angular frequencies.
inline constexpr double kHbarMeVps = 0.6582119569;

/// Named numeric/string parameters for a preset. Unset keys take the
/// preset's documented defaults.
struct PresetParams {
    std::string name;
    std::map<std::string, double> values;
    std::map<std::string, std::string> options;
    std::uint64_t seed = 0;
};

struct TimeGrid {
    double t_max = 10.0;
    int samples = 101;  // including t = 0
    std::vector<double> times() const;
};

struct Preset {
    NetworkSpec spec;
    DensityMatrix initial;
    std::string initial_label;
    TimeGrid grid;
    /// Every parameter after defaults were applied, in the preset's own units.
    std::map<std::string, double> resolved;
    std::map<std::string, std::string> resolved_options;
    /// Free-form notes: hopping convention, unit conversion, noise constant.
    std::map<std::string, std::string> metadata;
    /// Site playing the reaction-center role, empty when none.
    std::string reaction_center;
};

struct PresetInfo {
    std::string name;
    std::string summary;
    std::map<std::string, double> defaults;
    std::map<std::string, std::string> option_defaults;
};

const std::vector<PresetInfo>& preset_catalog();
const PresetInfo& preset_info(const std::string& name);

/// Build a preset network, its initial state, and default grid.
Preset preset(const PresetParams& params);

}  // namespace qnet
