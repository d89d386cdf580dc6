#include "qnet/validate.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include "qnet/dynamics.hpp"
#include "qnet/error.hpp"
#include "qnet/model.hpp"
#include "qnet/observables.hpp"
#include "qnet/oracle.hpp"

namespace qnet {

bool ValidationReport::all_passed() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return !checks.empty();
}

namespace {

Preset make(const std::string& name, std::map<std::string, double> values = {},
            std::map<std::string, std::string> options = {}) {
    PresetParams p;
    p.name = name;
    p.values = std::move(values);
    p.options = std::move(options);
    return preset(p);
}

PropagationConfig grid(double t_max, int samples, double dt,
                       PropagationMethod method = PropagationMethod::fixed_step_rk4) {
    PropagationConfig cfg;
    cfg.method = method;
    cfg.dt = dt;
    cfg.times = TimeGrid{t_max, samples}.times();
    cfg.snapshots = SnapshotPolicy::all;
    return cfg;
}

/// Random full-rank state from a fixed seed.
Matrix random_density(std::mt19937_64& rng, Eigen::Index d) {
    std::normal_distribution<double> g;
    Matrix a(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) a(i, j) = Complex(g(rng), g(rng));
    Matrix rho = a * a.adjoint();
    rho /= rho.trace().real();
    return hermitian_part(rho);
}

class Suite {
public:
    void check(std::string name, double value, double tol, std::string detail = {}) {
        report.checks.push_back({std::move(name), value, tol, std::isfinite(value) && value <= tol, std::move(detail)});
    }
    /// Runs fn; a thrown qnet error or std exception becomes a failed check.
    template <class F>
    void guarded(const std::string& name, F&& fn) {
        try {
            fn();
        } catch (const std::exception& e) {
            report.checks.push_back({name, NAN, 0.0, false, std::string("threw: ") + e.what()});
        }
    }
    ValidationReport report;
};

}  // namespace

ValidationReport run_validation(const ValidationOptions& options) {
    Suite suite;
    const double dt = options.dt;

    suite.guarded("convention calibration", [&] {
        const double J = 2.0, gi = 0.2, go = 0.3;
        const auto rec = oracle::pump_two_site(J, gi, go);
        std::string best;
        double best_dev = INFINITY, best_freq = NAN;
        std::ostringstream detail;
        for (const std::string conv : {"half", "full"}) {
            const Preset p = make("two_site_pump", {{"J", J}, {"gamma_in", gi}, {"gamma_out", go}},
                                  {{"hopping_convention", conv}});
            const ProductBasis basis = p.spec.basis();
            const Matrix S = build_superoperator(LindbladGenerator(p.spec, basis));
            const auto ss = steady_states(S);
            const double dev = std::max(std::abs(population(basis, ss.states[0], "s1") - rec.scalar("n1_inf")),
                                        std::abs(population(basis, ss.states[0], "s2") - rec.scalar("n2_inf")));
            const double im = population_oscillation_frequency(S, basis);
            detail << conv << ": steady deviation " << dev << ", 2 Im(lambda) " << 2.0 * im << "; ";
            if (dev < best_dev) {
                best_dev = dev;
                best = conv;
                best_freq = 2.0 * im;
            }
        }
        suite.report.selected_convention = best;
        detail << "selected " << best;
        suite.check("convention: steady state matches asymptotic populations", best_dev, 1e-9, detail.str());
        suite.check("convention: printed omega equals 2 Im(lambda)",
                    std::abs(best_freq - rec.scalar("omega")) / rec.scalar("omega"), 1e-9);
    });

    suite.guarded("two-site transfer map", [&] {
        std::mt19937_64 rng(7);
        double worst = 0.0;
        for (double gamma : {0.1, 1.0}) {
            const Preset p = make("two_site_transfer", {{"gamma", gamma}});
            const ProductBasis basis = p.spec.basis();
            const LindbladGenerator gen(p.spec, basis);
            for (int k = 0; k < 3; ++k) {
                const Matrix rho0 = random_density(rng, 4);
                const auto traj = propagate(gen, basis, DensityMatrix(rho0), grid(5.0, 51, dt));
                const Matrix shown = to_display_order(basis, rho0);
                for (std::size_t s = 0; s < traj.times.size(); ++s) {
                    const Matrix want = oracle::two_site_transfer_map(shown, gamma, traj.times[s]);
                    worst = std::max(worst, max_abs(to_display_order(basis, traj.snapshots[s]) - want));
                }
            }
        }
        suite.check("two-site transfer: propagated map vs closed form", worst, 1e-6);
    });

    suite.guarded("exponential depletion", [&] {
        const Preset p = make("two_site_transfer", {{"gamma", 1.0}});
        const auto traj = propagate(p.spec, p.initial, grid(5.0, 51, dt));
        double worst = 0.0;
        const auto n1 = traj.population("s1");
        for (std::size_t s = 0; s < n1.size(); ++s) worst = std::max(worst, std::abs(n1[s] - std::exp(-traj.times[s])));
        suite.check("two-site transfer: n1 = exp(-t)", worst, 1e-6);
    });

    suite.guarded("battery rate law", [&] {
        double worst_rel = 0.0, worst_end = 0.0;
        for (int d : {3, 5}) {
            const double s = 0.5 * (d - 1);
            for (int b = 0; b + 1 < d; ++b) {
                const Preset p = make("qubit_to_battery", {{"battery_dimension", d}, {"battery_occupation", b}});
                const ProductBasis basis = p.spec.basis();
                const LindbladGenerator gen(p.spec, basis);
                const double slope = -population(basis, gen.apply(p.initial.matrix()), "q");
                const double want = oracle::spin_battery_rate(1.0, s, 1.0 + b);
                worst_rel = std::max(worst_rel, std::abs(slope - want) / want);
            }
            for (auto [q, b] : {std::pair{0, 0}, std::pair{1, d - 1}}) {
                const Preset p = make("qubit_to_battery",
                                      {{"battery_dimension", d}, {"qubit_occupation", q}, {"battery_occupation", b}});
                const ProductBasis basis = p.spec.basis();
                const LindbladGenerator gen(p.spec, basis);
                worst_end = std::max(worst_end, std::abs(population(basis, gen.apply(p.initial.matrix()), "q")));
            }
        }
        suite.check("battery: initial flow equals gamma n(2s+1-n)", worst_rel, 1e-9);
        suite.check("battery: no flow when empty or full", worst_end, 1e-9);
    });

    suite.guarded("four-site closed forms", [&] {
        const double J = 1.0;
        double worst1 = 0.0;
        {
            const Preset p = make("four_site_congestion", {{"J", J}, {"gamma", 0.05}, {"excitations", 1}});
            const auto traj = propagate(p.spec, p.initial, grid(100.0, 201, dt));
            const auto n1 = traj.population("s1"), n2 = traj.population("s2");
            for (std::size_t s = 0; s < n1.size(); ++s) {
                const auto [a, b] = oracle::four_site_single_excitation(J, 0.05, traj.times[s]);
                worst1 = std::max({worst1, std::abs(n1[s] - a), std::abs(n2[s] - b)});
            }
        }
        suite.check("four-site: single-excitation n1, n2", worst1, 1e-6);
        double worst4 = 0.0;
        for (double gb : {0.3, 0.1}) {
            const Preset p = make("four_site_congestion", {{"J", J}, {"gamma", 0.1}, {"gamma_b", gb}, {"excitations", 2}});
            const auto traj = propagate(p.spec, p.initial, grid(100.0, 201, dt));
            const auto n4 = traj.population("s4");
            for (std::size_t s = 0; s < n4.size(); ++s)
                worst4 = std::max(worst4, std::abs(n4[s] - oracle::four_site_two_excitation_n4(0.1, gb, traj.times[s])));
        }
        suite.check("four-site: two-excitation n4 (incl. gamma = gamma_b)", worst4, 1e-6);
    });

    suite.guarded("pump steady state", [&] {
        const double J = 2.0, gi = 0.2, go = 0.3;
        const Preset p = make("two_site_pump", {{"J", J}, {"gamma_in", gi}, {"gamma_out", go}});
        const ProductBasis basis = p.spec.basis();
        const LindbladGenerator gen(p.spec, basis);
        const Matrix S = build_superoperator(gen);
        const auto ss = steady_states(S);
        const auto rec = oracle::pump_two_site(J, gi, go);
        suite.check("pump: steady state is unique", std::abs(static_cast<double>(ss.multiplicity) - 1.0), 0.0);
        const Matrix shown = to_display_order(basis, ss.states[0]);
        const double dev = max_abs(shown - rec.matrix("rho_inf"));
        const double dev_t = max_abs(shown - rec.matrix("rho_inf").transpose());
        std::ostringstream note;
        note << "deviation from the transposed display " << dev_t;
        suite.check("pump: null space vs displayed asymptotic matrix", dev, 1e-9, note.str());
        suite.check("pump: n1, n2 vs asymptotic populations",
                    std::max(std::abs(population(basis, ss.states[0], "s1") - rec.scalar("n1_inf")),
                             std::abs(population(basis, ss.states[0], "s2") - rec.scalar("n2_inf"))),
                    1e-9);
        const int long_samples = 201;
        const auto traj = propagate(gen, basis, p.initial, grid(200.0, long_samples, dt, PropagationMethod::superoperator_expm));
        suite.check("pump: long-time propagation reaches the steady state", max_abs(traj.snapshots.back() - ss.states[0]),
                    1e-6);

        const Preset p3 = make("three_site_pump", {{"J", J}, {"gamma_in", gi}, {"gamma_out", go}});
        const ProductBasis b3 = p3.spec.basis();
        const auto s3 = steady_states(build_superoperator(LindbladGenerator(p3.spec, b3)));
        const auto r3 = oracle::pump_three_site(J, gi, go);
        suite.check("three-site pump: asymptotic populations",
                    std::max({std::abs(population(b3, s3.states[0], "s1") - r3.scalar("n1_inf")),
                              std::abs(population(b3, s3.states[0], "s2") - r3.scalar("n2_inf")),
                              std::abs(population(b3, s3.states[0], "s3") - r3.scalar("n3_inf"))}),
                    1e-9);
    });

    suite.guarded("duality", [&] {
        const auto a = make("two_site_pump", {{"gamma_in", 0.2}, {"gamma_out", 0.3}}, {{"initial", "10"}});
        const auto b = make("two_site_pump", {{"gamma_in", 0.3}, {"gamma_out", 0.2}}, {{"initial", "10"}});
        const auto ta = propagate(a.spec, a.initial, grid(20.0, 201, dt));
        const auto tb = propagate(b.spec, b.initial, grid(20.0, 201, dt));
        suite.check("pump: duality n1(gin, gout) = 1 - n2(gout, gin)", oracle::duality_gap(ta, tb), 1e-6);
    });

    suite.guarded("hop transfer", [&] {
        const double J = 2.0, gamma = 1.0;
        const Preset p = make("hop_transfer", {{"J", J}, {"gamma", gamma}});
        const ProductBasis basis = p.spec.basis();
        const LindbladGenerator gen(p.spec, basis);
        const auto traj = propagate(gen, basis, p.initial, grid(10.0, 101, dt));
        const auto rec0 = oracle::hop_transfer_closed_forms(J, gamma, 0.0);
        const Matrix rho_tilde = kron(from_display_order(reduced_basis(basis, {"s1", "s2"}), rec0.matrix("rho_tilde_12")),
                                      embed_site_operator(ProductBasis({SiteDescriptor::qubit("x")}), "x", OpKind::number));
        double worst_d = 0.0, worst_p = 0.0;
        for (std::size_t s = 0; s < traj.times.size(); ++s) {
            const auto rec = oracle::hop_transfer_closed_forms(J, gamma, traj.times[s]);
            worst_d = std::max(worst_d, std::abs(unitarity_distance(traj.snapshots[s], rho_tilde, gen.hamiltonian(),
                                                                   traj.times[s]) -
                                                rec.scalar("distance")));
            worst_p = std::max(worst_p, std::abs(traj.purity[s] - rec.scalar("purity")));
        }
        suite.check("hop transfer: distance = exp(-gamma t)", worst_d, 1e-6);
        suite.check("hop transfer: purity closed form", worst_p, 1e-6);
    });

    suite.guarded("unitary sanity", [&] {
        NetworkSpec spec;
        spec.sites = {SiteDescriptor::qubit("a"), SiteDescriptor::qubit("b")};
        spec.hoppings.push_back({"a", "b", 0.7});
        const auto traj = propagate(spec, DensityMatrix::from_pure(basis_state(spec.basis(), {1, 0})), grid(10.0, 101, dt));
        double worst = 0.0;
        for (double p : traj.purity) worst = std::max(worst, std::abs(p - 1.0));
        suite.check("no jumps: purity stays 1", worst, 1e-9);
    });

    suite.guarded("integrator vs exact map", [&] {
        double worst = 0.0;
        const std::vector<Preset> toys = {make("two_site_transfer"),
                                          make("qubit_to_battery"),
                                          make("four_site_congestion"),
                                          make("two_site_pump"),
                                          make("three_site_pump"),
                                          make("hop_transfer")};
        for (const auto& p : toys) {
            const ProductBasis basis = p.spec.basis();
            const LindbladGenerator gen(p.spec, basis);
            const auto a = propagate(gen, basis, p.initial, grid(10.0, 101, dt));
            const auto b = propagate(gen, basis, p.initial, grid(10.0, 101, dt, PropagationMethod::superoperator_expm));
            for (std::size_t s = 0; s < a.snapshots.size(); ++s)
                worst = std::max(worst, max_abs(a.snapshots[s] - b.snapshots[s]));
        }
        suite.check("fixed-step vs superoperator exponential, toy presets", worst, 1e-8);
    });

    return suite.report;
}

void print_report(std::ostream& os, const ValidationReport& report) {
    for (const auto& c : report.checks) {
        os << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << std::setprecision(3) << std::scientific << c.value
           << " (tol " << c.tolerance << ")" << std::defaultfloat;
        if (!c.detail.empty()) os << "  [" << c.detail << "]";
        os << '\n';
    }
    os << "selected hopping convention: " << report.selected_convention << '\n';
    os << (report.all_passed() ? "all checks passed" : "some checks failed") << '\n';
}

}  // namespace qnet
