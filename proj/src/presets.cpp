#include <cmath>
#include <sstream>

#include "qnet/error.hpp"
#include "qnet/model.hpp"

namespace qnet {

namespace {

std::string format_number(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::vector<PresetInfo> make_catalog() {
    return {
        {"two_site_transfer",
         "two qubits with incoherent transfer s1 -> s2",
         {{"gamma", 1.0}, {"t_max", 20.0}, {"samples", 201}},
         {{"initial", "10"}}},
        {"qubit_to_battery",
         "qubit transferring into a (2s+1)-level battery",
         {{"gamma", 1.0},
          {"battery_dimension", 3},
          {"qubit_occupation", 1},
          {"battery_occupation", 0},
          {"t_max", 5.0},
          {"samples", 501}},
         {}},
        {"four_site_congestion",
         "hopping s1<->s2, transfer s2->s3 (gamma) and s3->s4 (gamma_b)",
         {{"J", 1.0}, {"gamma", 0.1}, {"gamma_b", 0.3}, {"excitations", 2}, {"t_max", 100.0}, {"samples", 1001}},
         {{"hopping_convention", "half"}}},
        {"two_site_pump",
         "injection on s1, hopping s1<->s2, extraction on s2",
         {{"J", 2.0}, {"gamma_in", 0.2}, {"gamma_out", 0.3}, {"t_max", 40.0}, {"samples", 4001}},
         {{"initial", "00"}, {"hopping_convention", "half"}}},
        {"three_site_pump",
         "injection on s1, uniform chain s1<->s2<->s3, extraction on s3",
         {{"J", 2.0}, {"gamma_in", 0.2}, {"gamma_out", 0.3}, {"t_max", 40.0}, {"samples", 4001}},
         {{"initial", "000"}, {"hopping_convention", "half"}}},
        {"hop_transfer",
         "hopping s1<->s2 with transfer s2->s3",
         {{"J", 2.0}, {"gamma", 1.0}, {"t_max", 10.0}, {"samples", 1001}},
         {{"initial", "110"}, {"hopping_convention", "half"}}},
        {"lh1_ring",
         "dimerized ring, central site, reaction center and optional battery",
         {{"N", 4},
          {"t", 1.0},
          {"J", 1.0},
          {"delta", 0.12},
          {"gamma", 0.3},
          {"gamma_b", 0.1},
          {"gamma_diss", 0.0},
          {"gamma_deph", 0.0},
          {"battery_dimension", 3},
          {"n", 2},
          {"noise_scale", NAN},
          {"t_max", 200.0},
          {"samples", 401}},
         {{"noise", "cosine"}, {"units", "meV_ps"}}},
        {"open_chain_pump",
         "open chain with injection on the first and extraction on the last site",
         {{"N", 6},
          {"J", 1.0},
          {"gamma_in", 0.2},
          {"gamma_out", 0.3},
          {"gamma_diss", 0.0},
          {"gamma_deph", 0.0},
          {"noise_scale", NAN},
          {"t_max", 100.0},
          {"samples", 1001}},
         {{"noise", "none"}}},
    };
}

class Resolver {
public:
    Resolver(const PresetParams& params, const PresetInfo& info) {
        for (const auto& [k, v] : params.values) {
            if (!info.defaults.count(k))
                throw ValidationError("preset '" + info.name + "' has no parameter '" + k + "'");
            if (!std::isfinite(v)) throw ValidationError("parameter '" + k + "' must be finite");
        }
        for (const auto& [k, v] : params.options)
            if (!info.option_defaults.count(k))
                throw ValidationError("preset '" + info.name + "' has no option '" + k + "'");
        values_ = info.defaults;
        for (const auto& [k, v] : params.values) values_[k] = v;
        options_ = info.option_defaults;
        for (const auto& [k, v] : params.options) options_[k] = v;
    }

    double get(const std::string& key) const { return values_.at(key); }

    double rate(const std::string& key) const {
        const double v = get(key);
        if (v < 0.0) throw ValidationError("rate '" + key + "' must be >= 0");
        return v;
    }

    int integer(const std::string& key, int lo, int hi) const {
        const double v = get(key);
        if (v != std::floor(v) || v < lo || v > hi)
            throw ValidationError("parameter '" + key + "' must be an integer in [" + std::to_string(lo) + ", " +
                                  std::to_string(hi) + "]");
        return static_cast<int>(v);
    }

    const std::string& option(const std::string& key) const { return options_.at(key); }

    void set(const std::string& key, double v) { values_[key] = v; }

    TimeGrid grid() const {
        return TimeGrid{get("t_max"), integer("samples", 2, 10'000'000)};
    }

    const std::map<std::string, double>& values() const { return values_; }
    const std::map<std::string, std::string>& options() const { return options_; }

private:
    std::map<std::string, double> values_;
    std::map<std::string, std::string> options_;
};

std::vector<SiteDescriptor> qubits(const std::string& prefix, int count) {
    std::vector<SiteDescriptor> s;
    for (int i = 1; i <= count; ++i) s.push_back(SiteDescriptor::qubit(prefix + std::to_string(i)));
    return s;
}

/// Occupation string such as "110" -> {1,1,0}.
std::vector<int> parse_occupations(const std::string& text, std::size_t sites) {
    if (text.size() != sites) throw ValidationError("initial occupation '" + text + "' needs " + std::to_string(sites) + " digits");
    std::vector<int> occ;
    for (char c : text) {
        if (c < '0' || c > '9') throw ValidationError("initial occupation '" + text + "' must be digits");
        occ.push_back(c - '0');
    }
    return occ;
}

/// Toy presets default to matrix element J/2; "full" uses J.
double toy_amplitude(const Resolver& r, std::map<std::string, std::string>& meta) {
    const std::string& convention = r.option("hopping_convention");
    const double J = r.get("J");
    if (convention == "half") {
        meta["hopping_convention"] = "matrix element J/2 (H = (J/2)(s1- s2+ + h.c.))";
        return 0.5 * J;
    }
    if (convention == "full") {
        meta["hopping_convention"] = "matrix element J";
        return J;
    }
    throw ValidationError("hopping_convention must be 'half' or 'full'");
}

Preset finish(NetworkSpec spec, const PureState& psi, std::string label, const Resolver& r,
              std::map<std::string, std::string> meta, std::string reaction_center = {}) {
    spec.validate();
    meta["initial_state"] = label;
    return Preset{std::move(spec),   DensityMatrix::from_pure(psi), std::move(label),
                  r.grid(),          r.values(),                     r.options(),
                  std::move(meta),   std::move(reaction_center)};
}

Preset make_two_site_transfer(const Resolver& r) {
    NetworkSpec spec;
    spec.sites = qubits("s", 2);
    spec.jumps.push_back(Transfer{"s1", "s2", r.rate("gamma")});
    spec.units_note = "hbar = 1, dimensionless time";
    const auto basis = spec.basis();
    const std::string init = r.option("initial");
    return finish(spec, basis_state(basis, parse_occupations(init, 2)), "|" + init + ">", r, {});
}

Preset make_qubit_to_battery(const Resolver& r) {
    const int d = r.integer("battery_dimension", 2, 64);
    const int q = r.integer("qubit_occupation", 0, 1);
    const int b = r.integer("battery_occupation", 0, d - 1);
    NetworkSpec spec;
    spec.sites = {SiteDescriptor::qubit("q"), SiteDescriptor::spin("bat", d)};
    spec.jumps.push_back(Transfer{"q", "bat", r.rate("gamma")});
    spec.units_note = "hbar = 1, dimensionless time";
    const auto basis = spec.basis();
    std::map<std::string, std::string> meta{{"spin_s", format_number(0.5 * (d - 1))},
                                            {"n_tot", std::to_string(q + b)}};
    return finish(spec, basis_state(basis, {q, b}),
                  "|" + std::to_string(q) + ">|eta=" + std::to_string(b) + ">", r, meta);
}

Preset make_four_site(const Resolver& r) {
    std::map<std::string, std::string> meta;
    const double amp = toy_amplitude(r, meta);
    const int exc = r.integer("excitations", 1, 2);
    NetworkSpec spec;
    spec.sites = qubits("s", 4);
    spec.hoppings.push_back({"s1", "s2", amp});
    spec.jumps.push_back(Transfer{"s2", "s3", r.rate("gamma")});
    spec.jumps.push_back(Transfer{"s3", "s4", r.rate("gamma_b")});
    spec.units_note = "hbar = 1, dimensionless time";
    const auto basis = spec.basis();
    const std::vector<int> occ = exc == 2 ? std::vector<int>{1, 1, 0, 0} : std::vector<int>{1, 0, 0, 0};
    return finish(spec, basis_state(basis, occ), exc == 2 ? "|1,1,0,0>" : "|1,0,0,0>", r, meta);
}

Preset make_pump(const Resolver& r, int sites) {
    std::map<std::string, std::string> meta;
    const double amp = toy_amplitude(r, meta);
    NetworkSpec spec;
    spec.sites = qubits("s", sites);
    for (int i = 1; i < sites; ++i)
        spec.hoppings.push_back({"s" + std::to_string(i), "s" + std::to_string(i + 1), amp});
    spec.jumps.push_back(Injection{"s1", r.rate("gamma_in")});
    spec.jumps.push_back(Extraction{"s" + std::to_string(sites), r.rate("gamma_out")});
    spec.units_note = "hbar = 1, dimensionless time";
    meta["frequency"] = "omega = sqrt(4J^2 - (gamma_in - gamma_out)^2) = 2 Im(lambda) of the population mode";
    const auto basis = spec.basis();
    const std::string init = r.option("initial");
    return finish(spec, basis_state(basis, parse_occupations(init, static_cast<std::size_t>(sites))), "|" + init + ">",
                  r, meta);
}

Preset make_hop_transfer(const Resolver& r) {
    std::map<std::string, std::string> meta;
    const double amp = toy_amplitude(r, meta);
    NetworkSpec spec;
    spec.sites = qubits("s", 3);
    spec.hoppings.push_back({"s1", "s2", amp});
    spec.jumps.push_back(Transfer{"s2", "s3", r.rate("gamma")});
    spec.units_note = "hbar = 1, dimensionless time";
    const auto basis = spec.basis();
    const std::string init = r.option("initial");
    return finish(spec, basis_state(basis, parse_occupations(init, 3)), "|" + init + ">", r, meta);
}

/// Energy scale factor and metadata for the unit option.
double energy_scale(const std::string& units, std::map<std::string, std::string>& meta, NetworkSpec& spec) {
    if (units == "meV_ps") {
        meta["units"] = "energies in meV converted to ps^-1 via E/hbar; rates in ps^-1; time in ps";
        meta["hbar_meV_ps"] = format_number(kHbarMeVps);
        spec.units_note = "time in ps, hbar = " + format_number(kHbarMeVps) + " meV ps";
        return 1.0 / kHbarMeVps;
    }
    if (units == "natural") {
        meta["units"] = "hbar = 1, energies and rates in the same arbitrary unit";
        spec.units_note = "hbar = 1, arbitrary units";
        return 1.0;
    }
    throw ValidationError("units must be 'meV_ps' or 'natural'");
}

std::vector<double> noise_profile(const Resolver& r, double scale, int count, std::uint64_t seed,
                                  std::map<std::string, std::string>& meta) {
    const std::string& kind = r.option("noise");
    meta["noise_profile"] = kind;
    if (kind == "none") return std::vector<double>(static_cast<std::size_t>(count), 0.0);
    meta["noise_scale"] = format_number(scale);
    if (kind == "cosine") {
        meta["noise_constant"] = format_number(kCosineNoiseConstant) + " (Euler's number, assumed)";
        return cosine_noise(scale, count);
    }
    if (kind == "uniform") {
        meta["noise_seed"] = std::to_string(seed);
        return uniform_noise(scale, count, seed);
    }
    throw ValidationError("noise must be 'none', 'cosine' or 'uniform'");
}

Preset make_lh1_ring(Resolver& r, std::uint64_t seed) {
    const int N = r.integer("N", 3, 8);
    const int d = r.integer("battery_dimension", 0, 16);
    if (d == 1) throw ValidationError("battery_dimension must be 0 (no battery) or >= 2");
    const int n = r.integer("n", 0, N);
    if (std::isnan(r.get("noise_scale"))) r.set("noise_scale", r.get("t"));

    std::map<std::string, std::string> meta;
    NetworkSpec spec;
    const double scale = energy_scale(r.option("units"), meta, spec);
    spec.sites = qubits("r", N);
    spec.sites.push_back(SiteDescriptor::qubit("c"));
    spec.sites.push_back(SiteDescriptor::qubit("rc"));
    if (d >= 2) spec.sites.push_back(SiteDescriptor::spin("bat", d));

    const double t = r.get("t"), delta = r.get("delta"), J = r.get("J");
    for (int j = 1; j <= N; ++j) {
        const double tj = t * (1.0 + delta * (j % 2 == 0 ? 1.0 : -1.0));
        const int next = j % N + 1;
        spec.hoppings.push_back({"r" + std::to_string(j), "r" + std::to_string(next), tj * scale});
    }
    for (int j = 1; j <= N; ++j) spec.hoppings.push_back({"r" + std::to_string(j), "c", J * scale});
    const auto eps = noise_profile(r, r.get("noise_scale"), N, seed, meta);
    for (int j = 1; j <= N; ++j)
        if (eps[static_cast<std::size_t>(j - 1)] != 0.0)
            spec.onsite_energies.push_back({"r" + std::to_string(j), eps[static_cast<std::size_t>(j - 1)] * scale});

    spec.jumps.push_back(Transfer{"c", "rc", r.rate("gamma")});
    if (d >= 2) spec.jumps.push_back(Transfer{"rc", "bat", r.rate("gamma_b")});
    const double diss = r.rate("gamma_diss"), deph = r.rate("gamma_deph");
    for (int j = 1; j <= N; ++j) {
        if (diss > 0.0) spec.jumps.push_back(Dissipation{"r" + std::to_string(j), diss});
        if (deph > 0.0) spec.jumps.push_back(Dephasing{"r" + std::to_string(j), deph});
    }
    meta["hopping_convention"] = "matrix elements t_j = t(1 + delta(-1)^j) on ring bonds and J to the central site";
    meta["central_coupling"] = "every ring site couples to the central site";
    meta["noise_sites"] = "ring sites only";

    const auto basis = spec.basis();
    std::vector<std::string> ring;
    for (int j = 1; j <= N; ++j) ring.push_back("r" + std::to_string(j));
    return finish(spec, dicke_state(basis, ring, n), "Dicke(N=" + std::to_string(N) + ", n=" + std::to_string(n) + ")", r,
                  meta, "rc");
}

Preset make_open_chain(Resolver& r, std::uint64_t seed) {
    const int N = r.integer("N", 2, 10);
    if (std::isnan(r.get("noise_scale"))) r.set("noise_scale", r.get("J"));
    std::map<std::string, std::string> meta;
    NetworkSpec spec;
    spec.sites = qubits("s", N);
    const double J = r.get("J");
    for (int j = 1; j < N; ++j) spec.hoppings.push_back({"s" + std::to_string(j), "s" + std::to_string(j + 1), J});
    const auto eps = noise_profile(r, r.get("noise_scale"), N, seed, meta);
    for (int j = 1; j <= N; ++j)
        if (eps[static_cast<std::size_t>(j - 1)] != 0.0)
            spec.onsite_energies.push_back({"s" + std::to_string(j), eps[static_cast<std::size_t>(j - 1)]});
    spec.jumps.push_back(Injection{"s1", r.rate("gamma_in")});
    spec.jumps.push_back(Extraction{"s" + std::to_string(N), r.rate("gamma_out")});
    const double diss = r.rate("gamma_diss"), deph = r.rate("gamma_deph");
    for (int j = 2; j <= N - 1; ++j) {
        if (diss > 0.0) spec.jumps.push_back(Dissipation{"s" + std::to_string(j), diss});
        if (deph > 0.0) spec.jumps.push_back(Dephasing{"s" + std::to_string(j), deph});
    }
    spec.units_note = "hbar = 1, arbitrary units";
    meta["hopping_convention"] = "matrix element J on every bond";
    meta["noise_sites"] = "all chain sites; dissipation and dephasing on inner sites 2..N-1";
    const auto basis = spec.basis();
    std::vector<int> empty(static_cast<std::size_t>(N), 0);
    return finish(spec, basis_state(basis, empty), "|0...0>", r, meta);
}

}  // namespace

const std::vector<PresetInfo>& preset_catalog() {
    static const std::vector<PresetInfo> catalog = make_catalog();
    return catalog;
}

const PresetInfo& preset_info(const std::string& name) {
    for (const auto& info : preset_catalog())
        if (info.name == name) return info;
    throw ValidationError("unknown preset '" + name + "'");
}

Preset preset(const PresetParams& params) {
    const PresetInfo& info = preset_info(params.name);
    Resolver r(params, info);
    if (params.name == "two_site_transfer") return make_two_site_transfer(r);
    if (params.name == "qubit_to_battery") return make_qubit_to_battery(r);
    if (params.name == "four_site_congestion") return make_four_site(r);
    if (params.name == "two_site_pump") return make_pump(r, 2);
    if (params.name == "three_site_pump") return make_pump(r, 3);
    if (params.name == "hop_transfer") return make_hop_transfer(r);
    if (params.name == "lh1_ring") return make_lh1_ring(r, params.seed);
    if (params.name == "open_chain_pump") return make_open_chain(r, params.seed);
    throw ValidationError("unknown preset '" + params.name + "'");
}

}  // namespace qnet
