#include "qnet/model.hpp"

#include <cmath>
#include <random>

#include "qnet/error.hpp"

namespace qnet {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_site(const ProductBasis& basis, const std::string& label, const char* what) {
    if (!basis.has_site(label)) throw ValidationError(std::string(what) + " references unknown site '" + label + "'");
}

void require_rate(double rate, const char* what) {
    if (!std::isfinite(rate) || rate < 0.0)
        throw ValidationError(std::string(what) + " rate must be finite and >= 0, got " + std::to_string(rate));
}

}  // namespace

const char* jump_type_name(const JumpProcess& jump) {
    return std::visit(overloaded{[](const Transfer&) { return "transfer"; },
                                 [](const Injection&) { return "injection"; },
                                 [](const Extraction&) { return "extraction"; },
                                 [](const Dissipation&) { return "dissipation"; },
                                 [](const Dephasing&) { return "dephasing"; }},
                      jump);
}

double jump_rate(const JumpProcess& jump) {
    return std::visit([](const auto& j) { return j.rate; }, jump);
}

void set_jump_rate(JumpProcess& jump, double rate) {
    std::visit([rate](auto& j) { j.rate = rate; }, jump);
}

void NetworkSpec::validate() const {
    const ProductBasis b(sites);  // labels and dimensions
    for (const auto& h : hoppings) {
        require_site(b, h.a, "hopping");
        require_site(b, h.b, "hopping");
        if (h.a == h.b) throw ValidationError("self-hopping on site '" + h.a + "'");
        if (!std::isfinite(h.amplitude)) throw ValidationError("hopping amplitude is not finite");
    }
    for (const auto& e : onsite_energies) {
        require_site(b, e.site, "onsite energy");
        if (!std::isfinite(e.energy)) throw ValidationError("onsite energy is not finite");
    }
    for (const auto& jump : jumps) {
        std::visit(overloaded{[&](const Transfer& t) {
                                  require_site(b, t.from, "transfer");
                                  require_site(b, t.to, "transfer");
                                  if (t.from == t.to) throw ValidationError("transfer from a site onto itself");
                                  require_rate(t.rate, "transfer");
                              },
                              [&](const auto& j) {
                                  require_site(b, j.site, jump_type_name(jump));
                                  require_rate(j.rate, jump_type_name(jump));
                              }},
                   jump);
    }
}

ProductBasis NetworkSpec::basis() const { return ProductBasis(sites); }

bool NetworkSpec::number_conserving() const {
    for (const auto& j : jumps)
        if (!std::holds_alternative<Transfer>(j)) return false;
    return true;
}

SparseMatrix build_hamiltonian_sparse(const NetworkSpec& spec, const ProductBasis& basis) {
    spec.validate();
    const auto dim = static_cast<Eigen::Index>(basis.dimension());
    SparseMatrix h(dim, dim);
    for (const auto& hop : spec.hoppings) {
        const SparseMatrix term = embed_site_operator_sparse(basis, hop.a, OpKind::lower) *
                                  embed_site_operator_sparse(basis, hop.b, OpKind::raise);
        h += hop.amplitude * (term + SparseMatrix(term.adjoint()));
    }
    for (const auto& e : spec.onsite_energies) h += e.energy * embed_site_operator_sparse(basis, e.site, OpKind::number);
    h.prune(Complex{});
    return h;
}

Matrix build_hamiltonian(const NetworkSpec& spec, const ProductBasis& basis) {
    return Matrix(build_hamiltonian_sparse(spec, basis));
}

std::vector<SparseMatrix> build_jump_operators_sparse(const NetworkSpec& spec, const ProductBasis& basis) {
    spec.validate();
    std::vector<SparseMatrix> ops;
    ops.reserve(spec.jumps.size());
    for (const auto& jump : spec.jumps) {
        const double amp = std::sqrt(jump_rate(jump));
        SparseMatrix op = std::visit(
            overloaded{[&](const Transfer& t) -> SparseMatrix {
                           return SparseMatrix(embed_site_operator_sparse(basis, t.from, OpKind::lower) *
                                               embed_site_operator_sparse(basis, t.to, OpKind::raise));
                       },
                       [&](const Injection& j) { return embed_site_operator_sparse(basis, j.site, OpKind::raise); },
                       [&](const Extraction& j) { return embed_site_operator_sparse(basis, j.site, OpKind::lower); },
                       [&](const Dissipation& j) { return embed_site_operator_sparse(basis, j.site, OpKind::lower); },
                       [&](const Dephasing& j) { return embed_site_operator_sparse(basis, j.site, OpKind::number); }},
            jump);
        ops.push_back(amp * op);
    }
    return ops;
}

std::vector<Matrix> build_jump_operators(const NetworkSpec& spec, const ProductBasis& basis) {
    std::vector<Matrix> out;
    for (const auto& op : build_jump_operators_sparse(spec, basis)) out.emplace_back(op);
    return out;
}

std::vector<double> cosine_noise(double scale, int count) {
    if (count < 1) throw ValidationError("noise profile needs at least one site");
    std::vector<double> eps(static_cast<std::size_t>(count));
    for (int j = 1; j <= count; ++j) eps[static_cast<std::size_t>(j - 1)] = scale * std::cos(kCosineNoiseConstant * j);
    return eps;
}

std::vector<double> uniform_noise(double scale, int count, std::uint64_t seed) {
    if (count < 1) throw ValidationError("noise profile needs at least one site");
    std::mt19937_64 rng(seed);
    // Map raw 64-bit draws by hand so the sequence does not depend on the
    // standard library's distribution implementation.
    std::vector<double> eps(static_cast<std::size_t>(count));
    for (auto& e : eps) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        e = scale * (2.0 * u - 1.0);
    }
    return eps;
}

std::vector<double> TimeGrid::times() const {
    if (!(t_max > 0.0) || samples < 2) throw ValidationError("time grid needs t_max > 0 and at least 2 samples");
    std::vector<double> t(static_cast<std::size_t>(samples));
    for (int k = 0; k < samples; ++k) t[static_cast<std::size_t>(k)] = t_max * k / (samples - 1);
    return t;
}

}  // namespace qnet
