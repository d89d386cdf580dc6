#include "qnet/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "qnet/error.hpp"
#include "qnet/hilbert.hpp"
#include "qnet/observables.hpp"
#include "qnet/oracle.hpp"

namespace qnet {

using nlohmann::json;

std::string format_number17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

RunConfig apply_options(RunConfig cfg, const RunOptions& options) {
    if (options.output_directory) cfg.output_directory = *options.output_directory;
    if (options.dt) cfg.dt = *options.dt;
    if (options.seed) {
        cfg.seed = *options.seed;
        if (cfg.preset) cfg.preset->seed = *options.seed;
    }
    return cfg;
}

json to_json(const EffectReport& report) {
    json j{{"effect", to_string(report.effect)}, {"detected", report.detected}, {"diagnostics", report.diagnostics}};
    j["numbers"] = json::object();
    for (const auto& [k, v] : report.numbers) j["numbers"][k] = v;
    j["intervals"] = json::array();
    for (const auto& [a, b] : report.intervals) j["intervals"].push_back({a, b});
    return j;
}

namespace {

std::filesystem::path prepare_directory(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
        throw ValidationError("output directory '" + dir.string() + "' is not writable");
    return dir;
}

void write_json(const std::filesystem::path& path, const json& doc) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write '" + path.string() + "'");
    out << doc.dump(2) << '\n';
}

json invariants_json(const InvariantSummary& inv, const PropagationConfig& cfg) {
    return {{"max_trace_error", inv.max_trace_error},
            {"max_hermiticity_error", inv.max_hermiticity_error},
            {"min_eigenvalue", inv.min_eigenvalue},
            {"trace_tolerance", cfg.trace_tolerance},
            {"hermiticity_tolerance", cfg.hermiticity_tolerance},
            {"positivity_tolerance", cfg.positivity_tolerance},
            {"ok", inv.ok(cfg)}};
}

const char* method_name(PropagationMethod m) {
    return m == PropagationMethod::fixed_step_rk4 ? "fixed_step_rk4" : "superoperator_expm";
}

/// Metadata common to run, sweep and steady.
json base_metadata(const RunConfig& cfg, const ResolvedRun& r) {
    json meta;
    meta["tool_version"] = kToolVersion;
    meta["config"] = cfg.source;
    meta["seed"] = cfg.seed;
    meta["preset"] = r.preset_name;
    meta["parameters"] = r.parameters;
    meta["options"] = r.options;
    meta["preset_metadata"] = r.metadata;
    meta["network"] = to_json(r.spec);
    meta["initial_state"] = r.initial_label;
    meta["constants"] = {{"hbar_meV_ps", kHbarMeVps}, {"cosine_noise_constant", kCosineNoiseConstant}};
    const auto& p = r.propagation;
    meta["propagation"] = {{"method", method_name(p.method)},
                           {"dt", p.dt},
                           {"samples", p.times.size()},
                           {"t_max", p.times.back()},
                           {"rehermitize", p.rehermitize},
                           {"number_sector_filter", p.number_sector_filter}};
    return meta;
}

std::vector<std::string> expand_sites(const ProductBasis& basis, const std::vector<std::string>& requested) {
    std::vector<std::string> out;
    auto add = [&out](const std::string& s) {
        if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
    };
    for (const auto& s : requested) {
        if (s == "*") {
            for (const auto& site : basis.sites()) add(site.label);
        } else {
            basis.site_index(s);
            add(s);
        }
    }
    return out;
}

void note_rehermitize(const PropagationConfig& p) {
    if (p.rehermitize) std::cerr << "qnet: re-Hermitization after every step is active\n";
}

}  // namespace

RunOutcome run(const RunConfig& config, const RunOptions& options) {
    const RunConfig cfg = apply_options(config, options);
    const ResolvedRun r = resolve(cfg);
    const ProductBasis basis = r.spec.basis();
    const auto& obs = cfg.observables;

    std::vector<std::string> sites = expand_sites(basis, obs.populations);
    for (const auto& [a, b] : obs.parametric) {
        for (const auto& s : expand_sites(basis, {a, b}))
            if (std::find(sites.begin(), sites.end(), s) == sites.end()) sites.push_back(s);
    }
    std::vector<std::size_t> site_idx;
    for (const auto& s : sites) site_idx.push_back(basis.site_index(s));

    RunOutcome outcome;
    auto& cols = outcome.columns;
    cols.push_back("t");
    for (const auto& s : sites) cols.push_back("n_" + s);
    if (obs.purity) cols.push_back("purity");
    if (obs.purity_rate) cols.push_back("purity_rate");
    if (obs.trace) cols.push_back("trace");
    if (obs.min_eigenvalue) cols.push_back("min_eigenvalue");
    for (const auto& [i, j] : obs.coherences) {
        cols.push_back("re_rho_" + std::to_string(i) + "_" + std::to_string(j));
        cols.push_back("im_rho_" + std::to_string(i) + "_" + std::to_string(j));
    }
    for (const auto& [i, j] : obs.eigen_coherences) {
        cols.push_back("re_eig_" + std::to_string(i) + "_" + std::to_string(j));
        cols.push_back("im_eig_" + std::to_string(i) + "_" + std::to_string(j));
    }

    const auto dir = prepare_directory(cfg.output_directory);
    outcome.metadata = dir / (cfg.prefix + ".meta.json");
    std::ofstream table;
    if (!obs.empty()) {
        outcome.table = dir / (cfg.prefix + ".csv");
        table.open(outcome.table);
        if (!table) throw ValidationError("cannot write '" + outcome.table.string() + "'");
        for (std::size_t c = 0; c < cols.size(); ++c) table << (c ? "," : "") << cols[c];
        table << '\n';
    }

    const LindbladGenerator gen(r.spec, basis);
    std::optional<Eigenbasis> eigen;
    if (!obs.eigen_coherences.empty()) eigen.emplace(gen.hamiltonian());

    SampleObserver observer;
    if (!obs.empty()) {
        observer = [&](std::size_t, double t, const Matrix& rho) {
            std::vector<double> row{t};
            for (std::size_t s : site_idx) {
                double n = 0.0;
                for (std::size_t i = 0; i < basis.dimension(); ++i)
                    n += basis.occupation(i, s) * rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real();
                row.push_back(n);
            }
            if (obs.purity || obs.purity_rate) {
                const auto pr = purity_and_rate(rho, gen);
                if (obs.purity) row.push_back(pr.purity);
                if (obs.purity_rate) row.push_back(pr.rate);
            }
            if (obs.trace) row.push_back(rho.trace().real());
            if (obs.min_eigenvalue) row.push_back(min_eigenvalue(rho));
            for (const auto& [i, j] : obs.coherences) {
                const Complex z = rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                row.push_back(z.real());
                row.push_back(z.imag());
            }
            for (const auto& [i, j] : obs.eigen_coherences) {
                const Complex z = eigen->element(rho, i, j);
                row.push_back(z.real());
                row.push_back(z.imag());
            }
            for (std::size_t c = 0; c < row.size(); ++c) table << (c ? "," : "") << format_number17(row[c]);
            table << '\n';
        };
    }

    json meta = base_metadata(cfg, r);
    meta["columns"] = cols;
    meta["table"] = outcome.table.empty() ? json(nullptr) : json(outcome.table.filename().string());
    note_rehermitize(r.propagation);
    try {
        // The generator is rebuilt inside propagate when the sector filter applies.
        outcome.trajectory = r.propagation.number_sector_filter
                                 ? propagate(r.spec, r.initial, r.propagation, observer)
                                 : propagate(gen, basis, r.initial, r.propagation, observer);
    } catch (const InvariantViolation& e) {
        table.flush();
        meta["status"] = "invariant_violation";
        meta["partial"] = true;
        meta["error"] = e.what();
        write_json(outcome.metadata, meta);
        throw;
    }
    table.flush();
    meta["status"] = "ok";
    meta["partial"] = false;
    meta["propagation"]["number_sector_used"] = outcome.trajectory.number_sector_used;
    meta["invariants"] = invariants_json(outcome.trajectory.invariants, r.propagation);

    json effects = json::array();
    for (const auto& [a, b] : obs.parametric) {
        try {
            auto rep = staircase_steps(outcome.trajectory.times, outcome.trajectory.population(a),
                                       outcome.trajectory.population(b));
            json j = to_json(rep);
            j["pair"] = {a, b};
            effects.push_back(j);
        } catch (const ValidationError& e) {
            effects.push_back({{"effect", "staircase"}, {"pair", {a, b}}, {"error", e.what()}});
        }
    }
    meta["effects"] = effects;
    write_json(outcome.metadata, meta);
    outcome.meta = std::move(meta);
    return outcome;
}

SweepOutcome sweep(const SweepConfig& config, const RunOptions& options) {
    const RunConfig base = apply_options(config.base, options);
    SweepOutcome out;
    out.values = config.values;
    out.times = config.sample_times;
    out.sites = config.sites;
    out.data.assign(config.values.size(), {});

    std::vector<double> grid = config.sample_times;
    const bool prepend_zero = grid.front() != 0.0;
    if (prepend_zero) grid.insert(grid.begin(), 0.0);

    std::vector<std::exception_ptr> errors(config.values.size());
    std::vector<InvariantSummary> invariants(config.values.size());
    std::vector<json> first_meta(1);
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t k = next++; k < config.values.size(); k = next++) {
            try {
                const RunConfig cfg = with_parameter(base, config.parameter, config.values[k]);
                ResolvedRun r = resolve(cfg);
                r.propagation.times = grid;
                const ProductBasis basis = r.spec.basis();
                for (const auto& s : config.sites) basis.site_index(s);
                const Trajectory traj = propagate(r.spec, r.initial, r.propagation);
                invariants[k] = traj.invariants;
                for (std::size_t t = prepend_zero ? 1 : 0; t < traj.times.size(); ++t) {
                    std::vector<double> row;
                    for (const auto& s : config.sites) row.push_back(traj.populations[t][basis.site_index(s)]);
                    out.data[k].push_back(std::move(row));
                }
                if (k == 0) {
                    first_meta[0] = base_metadata(cfg, r);
                    first_meta[0]["propagation"]["number_sector_used"] = traj.number_sector_used;
                }
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    int workers = options.workers > 0 ? options.workers : config.workers;
    if (workers <= 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    workers = std::min<int>(workers, static_cast<int>(config.values.size()));
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    for (std::size_t k = 0; k < errors.size(); ++k) {
        if (!errors[k]) continue;
        const std::string where = "sweep value " + config.parameter + " = " + format_number17(config.values[k]);
        try {
            std::rethrow_exception(errors[k]);
        } catch (const Error& e) {
            throw Error(e.kind(), where + ": " + e.what());
        } catch (const std::exception& e) {
            throw std::runtime_error(where + ": " + e.what());
        }
    }

    if (config.detect) {
        const auto s = static_cast<std::size_t>(
            std::find(config.sites.begin(), config.sites.end(), config.detect_site) - config.sites.begin());
        std::vector<double> slice;
        for (const auto& rows : out.data) slice.push_back(rows.back()[s]);
        out.effect = detect_congestion_valley(config.values, slice);
    }

    const auto dir = prepare_directory(base.output_directory);
    out.table = dir / (base.prefix + ".sweep.csv");
    out.metadata = dir / (base.prefix + ".sweep.meta.json");
    std::ofstream table(out.table);
    if (!table) throw ValidationError("cannot write '" + out.table.string() + "'");
    table << "value,t";
    for (const auto& s : config.sites) table << ",n_" << s;
    table << '\n';
    for (std::size_t k = 0; k < config.values.size(); ++k)
        for (std::size_t t = 0; t < config.sample_times.size(); ++t) {
            table << format_number17(config.values[k]) << ',' << format_number17(config.sample_times[t]);
            for (double v : out.data[k][t]) table << ',' << format_number17(v);
            table << '\n';
        }

    json meta = first_meta[0];
    InvariantSummary worst;
    worst.min_eigenvalue = std::numeric_limits<double>::infinity();
    for (const auto& inv : invariants) {
        worst.max_trace_error = std::max(worst.max_trace_error, inv.max_trace_error);
        worst.max_hermiticity_error = std::max(worst.max_hermiticity_error, inv.max_hermiticity_error);
        worst.min_eigenvalue = std::min(worst.min_eigenvalue, inv.min_eigenvalue);
    }
    meta["config"] = {{"base", base.source}, {"parameter", config.parameter}};
    meta["sweep"] = {{"parameter", config.parameter},
                     {"values", config.values},
                     {"sample_times", config.sample_times},
                     {"sites", config.sites},
                     {"rows", config.values.size() * config.sample_times.size()},
                     {"workers", workers}};
    meta["invariants"] = invariants_json(worst, PropagationConfig{});
    meta["effect"] = out.effect ? to_json(*out.effect) : json(nullptr);
    meta["status"] = "ok";
    write_json(out.metadata, meta);
    return out;
}

json steady(const RunConfig& config, const RunOptions& options) {
    const RunConfig cfg = apply_options(config, options);
    const ResolvedRun r = resolve(cfg);
    const ProductBasis basis = r.spec.basis();
    const LindbladGenerator gen(r.spec, basis);
    const Matrix S = build_superoperator(gen);
    const SteadyStateResult res = steady_states(S);

    json report = base_metadata(cfg, r);
    report.erase("propagation");
    report["multiplicity"] = res.multiplicity;
    report["traceless_modes"] = res.traceless_modes.size();
    report["rotating_modes"] = json::array();
    for (const auto& l : res.rotating_modes) report["rotating_modes"].push_back({l.real(), l.imag()});
    report["states"] = json::array();
    for (std::size_t k = 0; k < res.states.size(); ++k) {
        json st;
        for (const auto& s : basis.sites()) st["populations"][s.label] = population(basis, res.states[k], s.label);
        st["residual"] = res.residuals[k];
        st["min_eigenvalue"] = min_eigenvalue(res.states[k]);
        report["states"].push_back(st);
    }

    if (r.preset_name == "two_site_pump" || r.preset_name == "three_site_pump") {
        const double J = r.parameters.at("J"), gi = r.parameters.at("gamma_in"), go = r.parameters.at("gamma_out");
        json o;
        if (res.states.size() == 1) {
            const Matrix& rho = res.states.front();
            if (r.preset_name == "two_site_pump") {
                const auto rec = oracle::pump_two_site(J, gi, go);
                const double dn = std::max(std::abs(population(basis, rho, "s1") - rec.scalar("n1_inf")),
                                           std::abs(population(basis, rho, "s2") - rec.scalar("n2_inf")));
                o["population_deviation"] = dn;
                o["matrix_deviation"] = max_abs(to_display_order(basis, rho) - rec.matrix("rho_inf"));
                o["matrix_deviation_transposed"] = max_abs(to_display_order(basis, rho) - rec.matrix("rho_inf").transpose());
            } else {
                const auto rec = oracle::pump_three_site(J, gi, go);
                const double n1 = population(basis, rho, "s1"), n2 = population(basis, rho, "s2"),
                             n3 = population(basis, rho, "s3");
                o["population_deviation"] = std::max({std::abs(n1 - rec.scalar("n1_inf")),
                                                      std::abs(n2 - rec.scalar("n2_inf")),
                                                      std::abs(n3 - rec.scalar("n3_inf"))});
                o["ordered_n1_ge_n2_ge_n3"] = n1 >= n2 && n2 >= n3;
            }
            o["hopping_convention"] = r.options.count("hopping_convention") ? r.options.at("hopping_convention") : "";
        } else {
            o["note"] = "steady state is not unique; oracle comparison skipped";
        }
        report["oracle"] = o;
    }

    const auto dir = prepare_directory(cfg.output_directory);
    write_json(dir / (cfg.prefix + ".steady.json"), report);
    if (report.contains("oracle") && report["oracle"].contains("population_deviation")) {
        const double dev = report["oracle"]["population_deviation"].get<double>();
        if (!(dev <= kSteadyOracleTolerance))
            throw OracleMismatch("steady populations deviate from the closed form by " + format_number17(dev));
    }
    return report;
}

}  // namespace qnet
