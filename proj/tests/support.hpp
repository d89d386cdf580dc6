#pragma once

#include <random>

#include "qnet/dynamics.hpp"
#include "qnet/model.hpp"

namespace qnet::testing {

inline PropagationConfig grid(double t_max, int samples, double dt = 1e-3,
                              PropagationMethod method = PropagationMethod::fixed_step_rk4) {
    PropagationConfig cfg;
    cfg.method = method;
    cfg.dt = dt;
    cfg.times = TimeGrid{t_max, samples}.times();
    cfg.snapshots = SnapshotPolicy::all;
    return cfg;
}

inline Preset make_preset(const std::string& name, std::map<std::string, double> values = {},
                          std::map<std::string, std::string> options = {}, std::uint64_t seed = 0) {
    PresetParams p;
    p.name = name;
    p.values = std::move(values);
    p.options = std::move(options);
    p.seed = seed;
    return preset(p);
}

inline Matrix random_matrix(std::mt19937_64& rng, Eigen::Index d) {
    std::normal_distribution<double> g;
    Matrix a(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) a(i, j) = Complex(g(rng), g(rng));
    return a;
}

inline Matrix random_hermitian(std::mt19937_64& rng, Eigen::Index d) {
    const Matrix a = random_matrix(rng, d);
    return 0.5 * (a + a.adjoint());
}

/// Full-rank density matrix A A^dag / tr.
inline Matrix random_density(std::mt19937_64& rng, Eigen::Index d) {
    const Matrix a = random_matrix(rng, d);
    Matrix rho = a * a.adjoint();
    rho /= rho.trace().real();
    return 0.5 * (rho + rho.adjoint());
}

}  // namespace qnet::testing
