#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qnet/dynamics.hpp"
#include "qnet/linalg.hpp"

namespace qnet::oracle {

/// Closed-form evaluation at one parameter point. Matrices are given in the
/// display order {|1,1>, |1,0>, |0,1>, |0,0>} (see display_order in hilbert).
struct ClosedFormRecord {
    std::string model;
    std::map<std::string, double> parameters;
    std::optional<double> time;
    std::map<std::string, double> scalars;
    std::map<std::string, Complex> complex_values;
    std::map<std::string, Matrix> matrices;
    std::vector<std::string> notes;

    double scalar(const std::string& key) const;
    const Matrix& matrix(const std::string& key) const;
};

/// Two qubits, L = sqrt(gamma) s1- s2+. rho0 in display order.
Matrix two_site_transfer_map(const Matrix& rho0, double gamma, double t);

/// gamma n_tot ((2s+1) - n_tot)
double spin_battery_rate(double gamma, double s, double n_tot);

/// (n1, n2) from |1,0,0,0> with omega = sqrt(gamma^2 - 4J^2), any sign under the root.
std::pair<double, double> four_site_single_excitation(double J, double gamma, double t);

/// n4 from |1,1,0,0>; the gamma = gamma_b limit is 1 - e^{-gamma t}(1 + gamma t).
double four_site_two_excitation_n4(double gamma, double gamma_b, double t);

/// Asymptotic state, its populations, and the printed frequency and period.
ClosedFormRecord pump_two_site(double J, double gamma_in, double gamma_out,
                               std::optional<double> t_eval = std::nullopt);

/// Asymptotic populations n1, n2, n3 of the uniform three-site chain.
ClosedFormRecord pump_three_site(double J, double gamma_in, double gamma_out);

/// rho~_12, purity(t), the coherence <psi-|rho_12|psi+>(t), distance(t) and the
/// circle radius, for the initial state |1,1,0>. "coherence" and "radius" keep the
/// closed form as printed, which is -2 (resp. 2) times the element for normalized
/// psi+-; the "_normalized" entries are the element itself.
ClosedFormRecord hop_transfer_closed_forms(double J, double gamma, double t);

/// max_t |n_inj^A(t) - (1 - n_ext^B(t))| for run A and the rate-swapped dual run B.
double duality_gap(const Trajectory& a, const Trajectory& b, const std::string& injection_site = "s1",
                   const std::string& extraction_site = "s2");

}  // namespace qnet::oracle
