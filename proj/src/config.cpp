#include "qnet/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "qnet/error.hpp"

namespace qnet {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw ValidationError(where + " must be an object");
    for (const auto& [key, _] : obj.items())
        if (!allowed.count(key)) throw ValidationError("unknown key '" + key + "' in " + where);
}

template <class T>
T get(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key)) throw ValidationError(where + " is missing '" + key + "'");
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ValidationError(where + "." + key + ": " + e.what());
    }
}

template <class T>
T get_or(const json& obj, const std::string& key, T fallback, const std::string& where) {
    return obj.contains(key) ? get<T>(obj, key, where) : fallback;
}

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("'" + path.string() + "' is not valid JSON: " + e.what());
    }
}

std::pair<std::size_t, std::size_t> index_pair(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number_unsigned() || !j[1].is_number_unsigned())
        throw ValidationError(where + " entries must be [i, j] with non-negative integers");
    return {j[0].get<std::size_t>(), j[1].get<std::size_t>()};
}

ObservableRequest parse_observables(const json& o) {
    reject_unknown(o, {"populations", "purity", "purity_rate", "trace", "min_eigenvalue", "coherences",
                       "eigen_coherences", "parametric"},
                   "observables");
    ObservableRequest req;
    if (o.contains("populations")) {
        const auto& p = o.at("populations");
        if (p.is_string() && p.get<std::string>() == "all")
            req.populations = {"*"};
        else
            req.populations = get<std::vector<std::string>>(o, "populations", "observables");
    }
    req.purity = get_or(o, "purity", false, "observables");
    req.purity_rate = get_or(o, "purity_rate", false, "observables");
    req.trace = get_or(o, "trace", false, "observables");
    req.min_eigenvalue = get_or(o, "min_eigenvalue", false, "observables");
    for (const auto& c : o.value("coherences", json::array())) req.coherences.push_back(index_pair(c, "coherences"));
    for (const auto& c : o.value("eigen_coherences", json::array()))
        req.eigen_coherences.push_back(index_pair(c, "eigen_coherences"));
    for (const auto& p : o.value("parametric", json::array())) {
        if (!p.is_array() || p.size() != 2 || !p[0].is_string() || !p[1].is_string())
            throw ValidationError("parametric entries must be [site_x, site_y]");
        req.parametric.emplace_back(p[0].get<std::string>(), p[1].get<std::string>());
    }
    return req;
}

InitialStateRequest parse_initial(const json& o, const std::filesystem::path& base_dir) {
    reject_unknown(o, {"occupations", "dicke", "matrix_file"}, "initial");
    if (o.size() != 1) throw ValidationError("initial needs exactly one of occupations, dicke, matrix_file");
    InitialStateRequest req;
    if (o.contains("occupations")) {
        req.kind = InitialStateRequest::Kind::occupations;
        req.occupations = get<std::vector<int>>(o, "occupations", "initial");
    } else if (o.contains("dicke")) {
        const auto& d = o.at("dicke");
        reject_unknown(d, {"n", "sites"}, "initial.dicke");
        req.kind = InitialStateRequest::Kind::dicke;
        req.dicke_n = get<int>(d, "n", "initial.dicke");
        req.dicke_sites = get_or(d, "sites", std::vector<std::string>{}, "initial.dicke");
    } else {
        req.kind = InitialStateRequest::Kind::matrix_file;
        std::filesystem::path p = get<std::string>(o, "matrix_file", "initial");
        req.matrix_file = p.is_relative() ? base_dir / p : p;
    }
    return req;
}

Matrix read_matrix_file(const std::filesystem::path& path) {
    const json doc = read_json(path);
    reject_unknown(doc, {"real", "imag"}, "matrix file");
    const auto re = get<std::vector<std::vector<double>>>(doc, "real", "matrix file");
    const auto im = get_or(doc, "imag", std::vector<std::vector<double>>{}, "matrix file");
    const auto n = static_cast<Eigen::Index>(re.size());
    Matrix m = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (static_cast<Eigen::Index>(re[i].size()) != n) throw ValidationError("matrix file: real part is not square");
        for (Eigen::Index j = 0; j < n; ++j) m(i, j) = re[i][j];
    }
    if (!im.empty()) {
        if (static_cast<Eigen::Index>(im.size()) != n) throw ValidationError("matrix file: imag part has wrong shape");
        for (Eigen::Index i = 0; i < n; ++i) {
            if (static_cast<Eigen::Index>(im[i].size()) != n) throw ValidationError("matrix file: imag part has wrong shape");
            for (Eigen::Index j = 0; j < n; ++j) m(i, j) += kI * im[i][j];
        }
    }
    return m;
}

/// "jumps.3.rate" -> ("jumps", 3, "rate")
std::tuple<std::string, std::size_t, std::string> split_path(const std::string& path) {
    const auto a = path.find('.');
    const auto b = a == std::string::npos ? std::string::npos : path.find('.', a + 1);
    if (b == std::string::npos) throw ValidationError("parameter path '" + path + "' must look like jumps.<k>.rate");
    const std::string index = path.substr(a + 1, b - a - 1);
    if (index.empty() || !std::all_of(index.begin(), index.end(), ::isdigit))
        throw ValidationError("parameter path '" + path + "' has a bad index");
    return {path.substr(0, a), std::stoul(index), path.substr(b + 1)};
}

}  // namespace

NetworkSpec parse_network_spec(const json& doc) {
    reject_unknown(doc, {"sites", "hoppings", "onsite", "jumps", "units_note"}, "spec");
    NetworkSpec spec;
    for (const auto& s : get<json>(doc, "sites", "spec")) {
        reject_unknown(s, {"label", "kind", "dimension"}, "spec.sites");
        const auto label = get<std::string>(s, "label", "spec.sites");
        const auto kind = get_or<std::string>(s, "kind", "qubit", "spec.sites");
        if (kind == "qubit") {
            if (s.contains("dimension") && get<int>(s, "dimension", "spec.sites") != 2)
                throw ValidationError("qubit '" + label + "' must have dimension 2");
            spec.sites.push_back(SiteDescriptor::qubit(label));
        } else if (kind == "spin") {
            spec.sites.push_back(SiteDescriptor::spin(label, get<int>(s, "dimension", "spec.sites")));
        } else {
            throw ValidationError("site kind must be 'qubit' or 'spin', got '" + kind + "'");
        }
    }
    for (const auto& h : doc.value("hoppings", json::array())) {
        reject_unknown(h, {"a", "b", "amplitude"}, "spec.hoppings");
        spec.hoppings.push_back({get<std::string>(h, "a", "spec.hoppings"), get<std::string>(h, "b", "spec.hoppings"),
                                 get<double>(h, "amplitude", "spec.hoppings")});
    }
    for (const auto& e : doc.value("onsite", json::array())) {
        reject_unknown(e, {"site", "energy"}, "spec.onsite");
        spec.onsite_energies.push_back({get<std::string>(e, "site", "spec.onsite"), get<double>(e, "energy", "spec.onsite")});
    }
    for (const auto& j : doc.value("jumps", json::array())) {
        const auto type = get<std::string>(j, "type", "spec.jumps");
        const double rate = get<double>(j, "rate", "spec.jumps");
        if (type == "transfer") {
            reject_unknown(j, {"type", "from", "to", "rate"}, "spec.jumps");
            spec.jumps.push_back(Transfer{get<std::string>(j, "from", "spec.jumps"), get<std::string>(j, "to", "spec.jumps"), rate});
            continue;
        }
        reject_unknown(j, {"type", "site", "rate"}, "spec.jumps");
        const auto site = get<std::string>(j, "site", "spec.jumps");
        if (type == "injection")
            spec.jumps.push_back(Injection{site, rate});
        else if (type == "extraction")
            spec.jumps.push_back(Extraction{site, rate});
        else if (type == "dissipation")
            spec.jumps.push_back(Dissipation{site, rate});
        else if (type == "dephasing")
            spec.jumps.push_back(Dephasing{site, rate});
        else
            throw ValidationError("unknown jump type '" + type + "'");
    }
    spec.units_note = get_or<std::string>(doc, "units_note", "", "spec");
    spec.validate();
    return spec;
}

json to_json(const NetworkSpec& spec) {
    json doc;
    doc["sites"] = json::array();
    for (const auto& s : spec.sites)
        doc["sites"].push_back({{"label", s.label}, {"kind", to_string(s.kind)}, {"dimension", s.dimension}});
    doc["hoppings"] = json::array();
    for (const auto& h : spec.hoppings) doc["hoppings"].push_back({{"a", h.a}, {"b", h.b}, {"amplitude", h.amplitude}});
    doc["onsite"] = json::array();
    for (const auto& e : spec.onsite_energies) doc["onsite"].push_back({{"site", e.site}, {"energy", e.energy}});
    doc["jumps"] = json::array();
    for (const auto& jp : spec.jumps) {
        json j{{"type", jump_type_name(jp)}, {"rate", jump_rate(jp)}};
        std::visit(
            [&j](const auto& v) {
                if constexpr (std::is_same_v<std::decay_t<decltype(v)>, Transfer>) {
                    j["from"] = v.from;
                    j["to"] = v.to;
                } else {
                    j["site"] = v.site;
                }
            },
            jp);
        doc["jumps"].push_back(j);
    }
    doc["units_note"] = spec.units_note;
    return doc;
}

RunConfig parse_run_config(const json& doc, const std::filesystem::path& base_dir) {
    reject_unknown(doc, {"network", "initial", "time", "observables", "output", "seed", "propagation"}, "config");
    RunConfig cfg;
    cfg.source = doc;
    const auto& net = get<json>(doc, "network", "config");
    reject_unknown(net, {"preset", "params", "options", "spec"}, "network");
    if (net.contains("preset") == net.contains("spec"))
        throw ValidationError("network needs exactly one of 'preset' or 'spec'");
    cfg.seed = get_or<std::uint64_t>(doc, "seed", 0, "config");
    if (net.contains("preset")) {
        PresetParams p;
        p.name = get<std::string>(net, "preset", "network");
        p.values = get_or(net, "params", std::map<std::string, double>{}, "network");
        p.options = get_or(net, "options", std::map<std::string, std::string>{}, "network");
        p.seed = cfg.seed;
        preset_info(p.name);  // unknown names fail here
        cfg.preset = std::move(p);
    } else {
        if (net.contains("params") || net.contains("options"))
            throw ValidationError("params and options apply to presets only");
        cfg.spec = parse_network_spec(net.at("spec"));
    }
    if (doc.contains("initial")) cfg.initial = parse_initial(doc.at("initial"), base_dir);
    if (doc.contains("time")) {
        const auto& t = doc.at("time");
        reject_unknown(t, {"t_max", "samples", "dt", "method"}, "time");
        if (t.contains("t_max")) cfg.t_max = get<double>(t, "t_max", "time");
        if (t.contains("samples")) cfg.samples = get<int>(t, "samples", "time");
        if (t.contains("dt")) cfg.dt = get<double>(t, "dt", "time");
        const auto method = get_or<std::string>(t, "method", "rk4", "time");
        if (method == "rk4")
            cfg.method = PropagationMethod::fixed_step_rk4;
        else if (method == "expm")
            cfg.method = PropagationMethod::superoperator_expm;
        else
            throw ValidationError("time.method must be 'rk4' or 'expm'");
    }
    if (doc.contains("propagation")) {
        const auto& p = doc.at("propagation");
        reject_unknown(p, {"rehermitize", "number_sector_filter"}, "propagation");
        cfg.rehermitize = get_or(p, "rehermitize", false, "propagation");
        cfg.number_sector_filter = get_or(p, "number_sector_filter", false, "propagation");
    }
    if (doc.contains("observables")) {
        cfg.observables = parse_observables(doc.at("observables"));
    } else {
        cfg.observables.populations = {"*"};
        cfg.observables.purity = true;
    }
    if (doc.contains("output")) {
        const auto& o = doc.at("output");
        reject_unknown(o, {"directory", "prefix"}, "output");
        std::filesystem::path dir = get_or<std::string>(o, "directory", "qnet_out", "output");
        cfg.output_directory = dir.is_relative() && !base_dir.empty() ? base_dir / dir : dir;
        cfg.prefix = get_or<std::string>(o, "prefix", "run", "output");
        if (cfg.prefix.empty() || cfg.prefix.find('/') != std::string::npos)
            throw ValidationError("output.prefix must be a plain file name stem");
    }
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    return parse_run_config(read_json(path), path.parent_path());
}

SweepConfig parse_sweep_config(const json& doc, const std::filesystem::path& base_dir) {
    reject_unknown(doc, {"base", "parameter", "values", "logspace", "linspace", "sample_times", "sites", "detect",
                         "workers"},
                   "sweep");
    SweepConfig cfg;
    cfg.base = parse_run_config(get<json>(doc, "base", "sweep"), base_dir);
    cfg.parameter = get<std::string>(doc, "parameter", "sweep");
    const int given = static_cast<int>(doc.contains("values")) + static_cast<int>(doc.contains("logspace")) +
                      static_cast<int>(doc.contains("linspace"));
    if (given != 1) throw ValidationError("sweep needs exactly one of values, logspace, linspace");
    if (doc.contains("values")) {
        cfg.values = get<std::vector<double>>(doc, "values", "sweep");
    } else {
        const bool log = doc.contains("logspace");
        const auto spec = get<std::vector<double>>(doc, log ? "logspace" : "linspace", "sweep");
        if (spec.size() != 3 || spec[2] < 2 || spec[2] != std::floor(spec[2]))
            throw ValidationError("logspace/linspace take [start, stop, count] with count >= 2");
        const int n = static_cast<int>(spec[2]);
        for (int k = 0; k < n; ++k) {
            const double x = spec[0] + (spec[1] - spec[0]) * k / (n - 1);
            cfg.values.push_back(log ? std::pow(10.0, x) : x);
        }
    }
    if (cfg.values.size() < 2) throw ValidationError("sweep needs at least 2 values");
    for (std::size_t k = 1; k < cfg.values.size(); ++k)
        if (!(cfg.values[k] > cfg.values[k - 1])) throw ValidationError("sweep values must be strictly ascending");
    cfg.sample_times = get<std::vector<double>>(doc, "sample_times", "sweep");
    if (cfg.sample_times.empty()) throw ValidationError("sweep needs at least one sample time");
    for (std::size_t k = 0; k < cfg.sample_times.size(); ++k) {
        if (!(cfg.sample_times[k] >= 0.0)) throw ValidationError("sample times must be >= 0");
        if (k > 0 && !(cfg.sample_times[k] > cfg.sample_times[k - 1]))
            throw ValidationError("sample times must be strictly ascending");
    }
    cfg.sites = get<std::vector<std::string>>(doc, "sites", "sweep");
    if (cfg.sites.empty()) throw ValidationError("sweep needs at least one site");
    if (doc.contains("detect")) {
        const auto& d = doc.at("detect");
        reject_unknown(d, {"effect", "site"}, "sweep.detect");
        cfg.detect = get<std::string>(d, "effect", "sweep.detect");
        if (*cfg.detect != "congestion_valley") throw ValidationError("sweep.detect.effect must be congestion_valley");
        cfg.detect_site = get_or<std::string>(d, "site", cfg.sites.front(), "sweep.detect");
        if (std::find(cfg.sites.begin(), cfg.sites.end(), cfg.detect_site) == cfg.sites.end())
            throw ValidationError("sweep.detect.site must be one of the swept sites");
    }
    cfg.workers = get_or(doc, "workers", 0, "sweep");
    if (cfg.workers < 0) throw ValidationError("workers must be >= 0");
    with_parameter(cfg.base, cfg.parameter, cfg.values.front());  // path must resolve
    return cfg;
}

SweepConfig load_sweep_config(const std::filesystem::path& path) {
    return parse_sweep_config(read_json(path), path.parent_path());
}

RunConfig with_parameter(const RunConfig& cfg, const std::string& parameter, double value) {
    RunConfig out = cfg;
    if (out.preset) {
        const auto& info = preset_info(out.preset->name);
        if (!info.defaults.count(parameter))
            throw ValidationError("preset '" + info.name + "' has no parameter '" + parameter + "'");
        out.preset->values[parameter] = value;
        return out;
    }
    auto [group, k, field] = split_path(parameter);
    NetworkSpec& spec = *out.spec;
    if (group == "jumps" && field == "rate") {
        if (k >= spec.jumps.size()) throw ValidationError("parameter path '" + parameter + "' is out of range");
        set_jump_rate(spec.jumps[k], value);
    } else if (group == "hoppings" && field == "amplitude") {
        if (k >= spec.hoppings.size()) throw ValidationError("parameter path '" + parameter + "' is out of range");
        spec.hoppings[k].amplitude = value;
    } else if (group == "onsite" && field == "energy") {
        if (k >= spec.onsite_energies.size()) throw ValidationError("parameter path '" + parameter + "' is out of range");
        spec.onsite_energies[k].energy = value;
    } else {
        throw ValidationError("parameter path '" + parameter + "' is not a swept quantity");
    }
    spec.validate();
    return out;
}

ResolvedRun resolve(const RunConfig& cfg) {
    std::optional<Preset> p;
    NetworkSpec spec;
    TimeGrid grid;
    ResolvedRun out{NetworkSpec{}, DensityMatrix(Matrix::Identity(1, 1)), {}, {}, {}, {}, {}, {}, {}};
    if (cfg.preset) {
        p = preset(*cfg.preset);
        spec = p->spec;
        grid = p->grid;
        out.parameters = p->resolved;
        out.options = p->resolved_options;
        out.metadata = p->metadata;
        out.preset_name = cfg.preset->name;
        out.reaction_center = p->reaction_center;
    } else {
        spec = *cfg.spec;
        if (!cfg.t_max || !cfg.samples) throw ValidationError("inline specs need time.t_max and time.samples");
    }
    if (cfg.t_max) grid.t_max = *cfg.t_max;
    if (cfg.samples) grid.samples = *cfg.samples;

    const ProductBasis basis = spec.basis();
    switch (cfg.initial.kind) {
        case InitialStateRequest::Kind::preset_default:
            if (p) {
                out.initial = p->initial;
                out.initial_label = p->initial_label;
            } else {
                const std::vector<int> vacuum(basis.site_count(), 0);
                out.initial = DensityMatrix::from_pure(basis_state(basis, vacuum));
                out.initial_label = "vacuum";
            }
            break;
        case InitialStateRequest::Kind::occupations: {
            out.initial = DensityMatrix::from_pure(basis_state(basis, cfg.initial.occupations));
            std::string label = "|";
            for (std::size_t i = 0; i < cfg.initial.occupations.size(); ++i)
                label += (i ? "," : "") + std::to_string(cfg.initial.occupations[i]);
            out.initial_label = label + ">";
            break;
        }
        case InitialStateRequest::Kind::dicke: {
            std::vector<std::string> sites = cfg.initial.dicke_sites;
            if (sites.empty())
                for (const auto& s : basis.sites())
                    if (s.kind == SiteKind::qubit && s.label.size() > 1 && s.label[0] == 'r' &&
                        std::all_of(s.label.begin() + 1, s.label.end(), ::isdigit))
                        sites.push_back(s.label);
            if (sites.empty()) throw ValidationError("dicke state needs a list of ring sites");
            out.initial = DensityMatrix::from_pure(dicke_state(basis, sites, cfg.initial.dicke_n));
            out.initial_label = "Dicke(N=" + std::to_string(sites.size()) + ", n=" + std::to_string(cfg.initial.dicke_n) + ")";
            break;
        }
        case InitialStateRequest::Kind::matrix_file: {
            Matrix m = read_matrix_file(cfg.initial.matrix_file);
            if (static_cast<std::size_t>(m.rows()) != basis.dimension())
                throw ValidationError("initial matrix has dimension " + std::to_string(m.rows()) + ", network needs " +
                                      std::to_string(basis.dimension()));
            out.initial = DensityMatrix(std::move(m));
            out.initial_label = "matrix file " + cfg.initial.matrix_file.filename().string();
            break;
        }
    }

    out.spec = std::move(spec);
    out.propagation.method = cfg.method;
    out.propagation.times = grid.times();
    if (cfg.dt) out.propagation.dt = *cfg.dt;
    if (!(out.propagation.dt > 0.0)) throw ValidationError("dt must be > 0");
    out.propagation.rehermitize = cfg.rehermitize;
    out.propagation.number_sector_filter = cfg.number_sector_filter;
    out.propagation.coherences = cfg.observables.coherences;
    for (const auto& [i, j] : cfg.observables.coherences)
        if (i >= basis.dimension() || j >= basis.dimension()) throw ValidationError("coherence index out of range");
    for (const auto& [i, j] : cfg.observables.eigen_coherences)
        if (i >= basis.dimension() || j >= basis.dimension()) throw ValidationError("eigen coherence index out of range");
    return out;
}

}  // namespace qnet
