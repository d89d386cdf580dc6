#include "qnet/oracle.hpp"

#include <cmath>

#include "qnet/error.hpp"
#include "qnet/hilbert.hpp"

namespace qnet::oracle {

namespace {

void require_nonnegative(double v, const char* what) {
    if (!std::isfinite(v) || v < 0.0) throw ValidationError(std::string(what) + " must be finite and >= 0");
}

void require_pump_rates(double gamma_in, double gamma_out) {
    require_nonnegative(gamma_in, "gamma_in");
    require_nonnegative(gamma_out, "gamma_out");
    if (gamma_in == 0.0 && gamma_out == 0.0)
        throw ValidationError("injection and extraction rates are both zero; the asymptotic state is not unique");
}

double real_checked(Complex z, const char* what) {
    if (std::abs(z.imag()) > 1e-10 * std::max(1.0, std::abs(z.real())))
        throw InvariantViolation(std::string(what) + " has an imaginary part " + std::to_string(z.imag()), 0.0);
    return z.real();
}

/// (cosh z - 1) / z^2 and sinh z / z, with their series near z = 0.
Complex cosh_m1_over_sq(Complex z) {
    if (std::abs(z) < 1e-3) return 0.5 + z * z / 24.0;
    return (std::cosh(z) - 1.0) / (z * z);
}
Complex sinh_over(Complex z) {
    if (std::abs(z) < 1e-3) return 1.0 + z * z / 6.0;
    return std::sinh(z) / z;
}

}  // namespace

double ClosedFormRecord::scalar(const std::string& key) const {
    auto it = scalars.find(key);
    if (it == scalars.end()) throw ValidationError(model + " record has no value '" + key + "'");
    return it->second;
}

const Matrix& ClosedFormRecord::matrix(const std::string& key) const {
    auto it = matrices.find(key);
    if (it == matrices.end()) throw ValidationError(model + " record has no matrix '" + key + "'");
    return it->second;
}

Matrix two_site_transfer_map(const Matrix& rho0, double gamma, double t) {
    if (rho0.rows() != 4 || rho0.cols() != 4) throw ValidationError("two-site map needs a 4x4 matrix");
    const DensityMatrix checked(rho0);
    require_nonnegative(gamma, "gamma");
    require_nonnegative(t, "t");
    const double full = std::exp(-gamma * t);
    const double half = std::exp(-0.5 * gamma * t);
    Matrix out = checked.matrix();
    // Row and column of |1,0> (display position 2) decay; its population moves to |0,1>.
    for (Eigen::Index k = 0; k < 4; ++k) {
        if (k == 1) continue;
        out(1, k) *= half;
        out(k, 1) *= half;
    }
    out(1, 1) = full * rho0(1, 1);
    out(2, 2) = (1.0 - full) * rho0(1, 1) + rho0(2, 2);
    return out;
}

double spin_battery_rate(double gamma, double s, double n_tot) {
    require_nonnegative(gamma, "gamma");
    if (!(s > 0.0) || std::abs(2.0 * s - std::round(2.0 * s)) > 1e-12)
        throw ValidationError("spin s must be a positive half-integer");
    const double top = 2.0 * s + 1.0;
    if (!(n_tot >= 0.0 && n_tot <= top)) throw ValidationError("n_tot must lie in [0, 2s+1]");
    return gamma * n_tot * (top - n_tot);
}

std::pair<double, double> four_site_single_excitation(double J, double gamma, double t) {
    require_nonnegative(gamma, "gamma");
    require_nonnegative(t, "t");
    if (!std::isfinite(J)) throw ValidationError("J must be finite");
    // n1 = e^{-t g/2}/w^3 [-2J^2 w + (g^2 - 2J^2) w cosh(tw/2) + g w^2 sinh(tw/2)]
    // n2 = 2J^2 e^{-t g/2}/w^2 [cosh(tw/2) - 1], rewritten with g^2 = w^2 + 4J^2
    // so that w -> 0 and imaginary w share one path.
    const Complex w = std::sqrt(Complex(gamma * gamma - 4.0 * J * J, 0.0));
    const Complex z = 0.5 * t * w;
    const Complex decay = std::exp(-0.5 * gamma * t);
    const Complex c = cosh_m1_over_sq(z) * (0.25 * t * t);
    const Complex n1 = decay * (2.0 * J * J * c + std::cosh(z) + gamma * 0.5 * t * sinh_over(z));
    const Complex n2 = decay * 2.0 * J * J * c;
    return {real_checked(n1, "n1"), real_checked(n2, "n2")};
}

double four_site_two_excitation_n4(double gamma, double gamma_b, double t) {
    require_nonnegative(gamma, "gamma");
    require_nonnegative(gamma_b, "gamma_b");
    require_nonnegative(t, "t");
    // [g(1 - e^{-t gb}) - gb(1 - e^{-t g})]/(g - gb)
    //   = 1 - e^{-t g} - g (e^{-t gb} - e^{-t g})/(g - gb)
    const double d = gamma - gamma_b;
    double divided;  // (e^{-t gb} - e^{-t g}) / (g - gb)
    if (std::abs(t * d) < 1.0) {
        const double x = t * d;
        const double ratio = x == 0.0 ? 1.0 : std::expm1(x) / x;
        divided = t * std::exp(-t * gamma) * ratio;
    } else {
        divided = (std::exp(-t * gamma_b) - std::exp(-t * gamma)) / d;
    }
    return 1.0 - std::exp(-t * gamma) - gamma * divided;
}

ClosedFormRecord pump_two_site(double J, double gamma_in, double gamma_out, std::optional<double> t_eval) {
    require_pump_rates(gamma_in, gamma_out);
    if (!std::isfinite(J)) throw ValidationError("J must be finite");
    const double gi = gamma_in, go = gamma_out, J2 = J * J, sum = gi + go;
    const double norm = sum * (J2 + gi * go);

    ClosedFormRecord rec;
    rec.model = "two_site_pump";
    rec.parameters = {{"J", J}, {"gamma_in", gi}, {"gamma_out", go}};
    rec.time = t_eval;
    Matrix rho = Matrix::Zero(4, 4);
    rho(0, 0) = J2 * gi * gi / sum;
    rho(1, 1) = gi * go * (J2 + sum * sum) / sum;
    rho(1, 2) = kI * J * gi * go;
    rho(2, 1) = -kI * J * gi * go;
    rho(2, 2) = J2 * gi * go / sum;
    rho(3, 3) = J2 * go * go / sum;
    rho /= norm;
    rec.matrices["rho_inf"] = rho;
    rec.scalars["n1_inf"] = gi * (J2 + gi * go + go * go) / norm;
    rec.scalars["n2_inf"] = gi * J2 / norm;

    const double disc = 4.0 * J2 - (gi - go) * (gi - go);
    const bool oscillating = disc > 0.0;
    rec.scalars["oscillating"] = oscillating ? 1.0 : 0.0;
    if (oscillating) {
        rec.scalars["omega"] = std::sqrt(disc);
        rec.scalars["T0"] = 2.0 * M_PI / std::sqrt(disc);
    } else {
        rec.notes.push_back("overdamped: |gamma_in - gamma_out| >= 2|J|, no oscillation frequency");
    }
    rec.notes.push_back("asymptotic state is independent of the initial state");
    if (t_eval) rec.notes.push_back("only asymptotic quantities have closed forms; time recorded for reference");
    return rec;
}

ClosedFormRecord pump_three_site(double J, double gamma_in, double gamma_out) {
    require_pump_rates(gamma_in, gamma_out);
    if (!std::isfinite(J)) throw ValidationError("J must be finite");
    const double gi = gamma_in, go = gamma_out, J2 = J * J;
    const double norm = (gi + go) * (J2 + gi * go);
    ClosedFormRecord rec;
    rec.model = "three_site_pump";
    rec.parameters = {{"J", J}, {"gamma_in", gi}, {"gamma_out", go}};
    rec.scalars["n1_inf"] = gi * (J2 + gi * go + go * go) / norm;
    rec.scalars["n2_inf"] = gi * (J2 + go * go) / norm;
    rec.scalars["n3_inf"] = gi * J2 / norm;
    rec.notes.push_back("uniform chain J12 = J23 = J");
    return rec;
}

ClosedFormRecord hop_transfer_closed_forms(double J, double gamma, double t) {
    if (!std::isfinite(J) || J == 0.0) throw ValidationError("hop_transfer closed forms degenerate at J = 0");
    if (!std::isfinite(gamma) || gamma <= 0.0)
        throw ValidationError("hop_transfer closed forms degenerate at gamma = 0 (no transfer)");
    require_nonnegative(t, "t");
    const double J2 = J * J, g2 = gamma * gamma, s = J2 + g2;

    ClosedFormRecord rec;
    rec.model = "hop_transfer";
    rec.parameters = {{"J", J}, {"gamma", gamma}};
    rec.time = t;
    Matrix rt = Matrix::Zero(4, 4);
    rt(1, 1) = J2 + 2.0 * g2;
    rt(1, 2) = -kI * J * gamma;
    rt(2, 1) = kI * J * gamma;
    rt(2, 2) = J2;
    rt /= 2.0 * s;
    rec.matrices["rho_tilde_12"] = rt;
    rec.scalars["n1_tilde"] = 0.5 + g2 / (2.0 * s);
    rec.scalars["n2_tilde"] = 0.5 - g2 / (2.0 * s);

    const double e1 = std::exp(-gamma * t), e2 = std::exp(-2.0 * gamma * t);
    rec.scalars["purity"] =
        1.0 - J2 / (2.0 * s) + (-2.0 * e1 * (s + g2 * std::cos(J * t)) + e2 * (3.0 * J2 + 4.0 * g2)) / (2.0 * s);
    const Complex coherence = gamma / (kI * J + gamma) * (e1 - std::cos(J * t) - kI * std::sin(J * t));
    rec.complex_values["coherence"] = coherence;
    rec.complex_values["coherence_normalized"] = -0.5 * coherence;
    rec.scalars["distance"] = e1;
    rec.scalars["radius"] = gamma / std::sqrt(s);
    rec.scalars["radius_normalized"] = 0.5 * gamma / std::sqrt(s);
    rec.notes.push_back("initial state |1,1,0>; rho~ = rho~_12 (x) |1><1|");
    rec.notes.push_back("coherence_normalized is <psi-|rho_12(t)|psi+> with psi+- = (|1,0> +- |0,1>)/sqrt(2); "
                        "the coherence entry is -2 times it");
    return rec;
}

double duality_gap(const Trajectory& a, const Trajectory& b, const std::string& injection_site,
                   const std::string& extraction_site) {
    if (a.times.size() != b.times.size()) throw ValidationError("duality gap: time grids differ in length");
    for (std::size_t k = 0; k < a.times.size(); ++k)
        if (std::abs(a.times[k] - b.times[k]) > 1e-12 * std::max(1.0, std::abs(a.times[k])))
            throw ValidationError("duality gap: time grids differ");
    const auto n1 = a.population(injection_site);
    const auto n2 = b.population(extraction_site);
    double gap = 0.0;
    for (std::size_t k = 0; k < n1.size(); ++k) gap = std::max(gap, std::abs(n1[k] - (1.0 - n2[k])));
    return gap;
}

}  // namespace qnet::oracle
