#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "qtn/tensor.hpp"

namespace qtn {

/// Dense density matrix of an N-qubit register, dimension 2^N.
using DensityMatrix = Matrix;

inline constexpr std::size_t kDenseCap = 12;  // default qubit cap for dense paths

/// Locally purified density operator. Site tensors carry axes
/// (left virtual, physical, Kraus, right virtual); boundary virtual extents
/// are 1. The represented operator rho = Tr_K |psi><psi| is positive
/// semidefinite by construction.
struct Lpdo {
    std::vector<Tensor> sites;

    std::size_t n_sites() const { return sites.size(); }
    std::size_t phys_dim() const { return sites.empty() ? 0 : sites[0].extent(1); }
    std::size_t bond_dim(std::size_t bond) const { return sites.at(bond).extent(3); }
    std::size_t kraus_dim(std::size_t site) const { return sites.at(site).extent(2); }
    std::size_t max_bond_dim() const;
    std::size_t max_kraus_dim() const;
};

/// Matrix product operator. Site tensors carry axes
/// (left virtual, ket physical, bra physical, right virtual). Hermiticity and
/// positivity are not structural.
struct Mpo {
    std::vector<Tensor> sites;

    std::size_t n_sites() const { return sites.size(); }
    std::size_t phys_dim() const { return sites.empty() ? 0 : sites[0].extent(1); }
    std::size_t bond_dim(std::size_t bond) const { return sites.at(bond).extent(3); }
    std::size_t max_bond_dim() const;
};

namespace axis {
// Lpdo site axes
inline constexpr std::size_t kLeft = 0;
inline constexpr std::size_t kPhys = 1;
inline constexpr std::size_t kKraus = 2;
inline constexpr std::size_t kRight = 3;
// Mpo site axes
inline constexpr std::size_t kKet = 1;
inline constexpr std::size_t kBra = 2;
}  // namespace axis

/// Throws std::invalid_argument when the chain structure is malformed.
void validate(const Lpdo& l);
void validate(const Mpo& m);

/// Pure product state with one normalized amplitude pair per site
/// (chi = 1, d_kappa = 1 everywhere).
Lpdo product_lpdo(std::span<const std::array<Complex, 2>> amplitudes);
Lpdo product_lpdo(std::size_t n_sites, const std::array<Complex, 2>& amplitude);

/// Local MPO tensor of the LPDO's operator view,
/// B_j = sum_k A_j (x) conj(A_j), with fused virtual pairs.
Tensor lpdo_mpo_site(const Lpdo& l, std::size_t site);

/// Contract Kraus legs pairwise at every site: D(bond) = chi(bond)^2.
Mpo lpdo_to_mpo(const Lpdo& l);

/// Exact contraction into a 2^N x 2^N matrix. Site 0 carries the most
/// significant bit. Throws std::length_error above the cap.
DensityMatrix to_dense(const Mpo& m, std::size_t cap = kDenseCap);
DensityMatrix to_dense(const Lpdo& l, std::size_t cap = kDenseCap);

Complex trace(const Lpdo& l);
Complex trace(const Mpo& m);

/// Squared Frobenius norm Tr(rho^dagger rho); equals Tr(rho^2) for Hermitian
/// representations.
double purity(const Lpdo& l);
double purity(const Mpo& m);

enum class NormMode { ByTrace, ByFrobenius };

/// Rescales the last site tensor so that Tr(rho) = 1 (ByTrace) or
/// Tr(rho^2) = 1 (ByFrobenius).
Lpdo normalize(Lpdo l, NormMode mode);
Mpo normalize(Mpo m, NormMode mode);

/// Plain operator-product trace Tr(a b), contracted as a network.
Complex overlap_trace(const Mpo& a, const Mpo& b);
Complex overlap_trace(const Lpdo& a, const Lpdo& b);
Complex overlap_trace(const Mpo& a, const Lpdo& b);
inline Complex overlap_trace(const Lpdo& a, const Mpo& b) { return overlap_trace(b, a); }
Complex overlap_trace(const Mpo& a, const DensityMatrix& b);
Complex overlap_trace(const Lpdo& a, const DensityMatrix& b);

/// f = Tr(rho_a rho_b) / sqrt(purity_a * purity_b), clamped to [-1, 1].
template <class A, class B>
double supervector_fidelity(const A& a, const B& b);

double supervector_fidelity(const Mpo& a, const DensityMatrix& b);
double supervector_fidelity(const Lpdo& a, const DensityMatrix& b);
inline double supervector_fidelity(const DensityMatrix& a, const Mpo& b) {
    return supervector_fidelity(b, a);
}
inline double supervector_fidelity(const DensityMatrix& a, const Lpdo& b) {
    return supervector_fidelity(b, a);
}

/// Von Neumann entropy (natural log) of the supervector |rho>> Schmidt
/// spectrum across the vertical cut after `cut_bond` sites (1 <= cut_bond
/// <= N-1). LPDOs are evaluated through their MPO view.
double entanglement_entropy(const Mpo& m, std::size_t cut_bond);
double entanglement_entropy(const Lpdo& l, std::size_t cut_bond);

/// Sum of singular values of the trace-normalized dense matrix; exceeds 1
/// when the operator has negative spectral weight. Dense-only.
double trace_norm(const Mpo& m, std::size_t cap = kDenseCap);
double trace_norm(const Lpdo& l, std::size_t cap = kDenseCap);

template <class A, class B>
double supervector_fidelity(const A& a, const B& b) {
    if (a.n_sites() != b.n_sites())
        throw std::invalid_argument("supervector_fidelity: size mismatch");
    const double pa = purity(a);
    const double pb = purity(b);
    if (pa <= 0.0 || pb <= 0.0)
        throw std::runtime_error("supervector_fidelity: zero norm");
    const double f = std::real(overlap_trace(a, b)) / std::sqrt(pa * pb);
    return std::clamp(f, -1.0, 1.0);
}

}  // namespace qtn
