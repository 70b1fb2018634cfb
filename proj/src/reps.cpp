#include "qtn/reps.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/SVD>

namespace qtn {

namespace {

void check_chain(const std::vector<Tensor>& sites, const char* what) {
    if (sites.empty()) throw std::invalid_argument(std::string(what) + ": empty chain");
    for (std::size_t j = 0; j < sites.size(); ++j) {
        if (sites[j].rank() != 4)
            throw std::invalid_argument(std::string(what) + ": site tensors must be rank 4");
        if (!sites[j].all_finite())
            throw std::invalid_argument(std::string(what) + ": non-finite entries");
        if (j + 1 < sites.size() && sites[j].extent(axis::kRight) != sites[j + 1].extent(axis::kLeft))
            throw std::invalid_argument(std::string(what) + ": adjacent virtual extents mismatch");
    }
    if (sites.front().extent(axis::kLeft) != 1 || sites.back().extent(axis::kRight) != 1)
        throw std::invalid_argument(std::string(what) + ": boundary virtual extents must be 1");
}

Tensor identity_tensor(std::size_t d) {
    Tensor id({d, d});
    for (std::size_t i = 0; i < d; ++i) id.at({i, i}) = 1.0;
    return id;
}

// Trace over the physical legs of an MPO-view site: T[left, right].
Tensor site_phys_trace(const Tensor& b) {
    return contract(b, identity_tensor(b.extent(axis::kKet)),
                    {{axis::kKet, 0}, {axis::kBra, 1}});
}

double entropy_from_schmidt(const Eigen::VectorXd& s) {
    if (s.size() == 0) return 0.0;
    const double smax = s.maxCoeff();
    if (smax <= 0.0) return 0.0;
    double total = 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) >= 1e-14 * smax) total += s(i) * s(i);
    double h = 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s(i) < 1e-14 * smax) continue;
        const double p = s(i) * s(i) / total;
        if (p > 0.0) h -= p * std::log(p);
    }
    return h;
}

// Mixed-canonical sweep of an MPS-like chain (rank-4 sites, two fused
// physical legs), returning the Schmidt values at cut_bond.
Eigen::VectorXd schmidt_values(std::vector<Tensor> sites, std::size_t cut_bond) {
    const std::size_t n = sites.size();
    for (std::size_t j = n; j-- > 1;) {
        auto [l, q] = lq_split(sites[j], {axis::kLeft});
        sites[j] = q;
        sites[j - 1] = contract(sites[j - 1], l, {{axis::kRight, 0}});
    }
    for (std::size_t j = 0; j < cut_bond; ++j) {
        auto [q, r] = qr_split(sites[j], {axis::kLeft, axis::kKet, axis::kBra});
        sites[j] = q;
        sites[j + 1] = contract(r, sites[j + 1], {{1, axis::kLeft}});
    }
    Matrix center = matricize(sites[cut_bond], {axis::kLeft});
    return Eigen::JacobiSVD<Matrix>(center).singularValues();
}

double dense_trace_norm(DensityMatrix rho) {
    const Complex tr = rho.trace();
    if (std::abs(tr) < 1e-300) throw std::runtime_error("trace_norm: zero trace");
    rho /= tr;
    return Eigen::JacobiSVD<Matrix>(rho).singularValues().sum();
}

}  // namespace

std::size_t Lpdo::max_bond_dim() const {
    std::size_t d = 0;
    for (const auto& s : sites) d = std::max(d, s.extent(axis::kRight));
    return d;
}

std::size_t Lpdo::max_kraus_dim() const {
    std::size_t d = 0;
    for (const auto& s : sites) d = std::max(d, s.extent(axis::kKraus));
    return d;
}

std::size_t Mpo::max_bond_dim() const {
    std::size_t d = 0;
    for (const auto& s : sites) d = std::max(d, s.extent(axis::kRight));
    return d;
}

void validate(const Lpdo& l) { check_chain(l.sites, "lpdo"); }
void validate(const Mpo& m) { check_chain(m.sites, "mpo"); }

Lpdo product_lpdo(std::span<const std::array<Complex, 2>> amplitudes) {
    if (amplitudes.empty()) throw std::invalid_argument("product_lpdo: no sites");
    Lpdo l;
    for (const auto& amp : amplitudes) {
        const double nrm = std::norm(amp[0]) + std::norm(amp[1]);
        if (std::abs(nrm - 1.0) > 1e-12)
            throw std::invalid_argument("product_lpdo: unnormalized amplitudes");
        Tensor site({1, 2, 1, 1});
        site.at({0, 0, 0, 0}) = amp[0];
        site.at({0, 1, 0, 0}) = amp[1];
        l.sites.push_back(std::move(site));
    }
    return l;
}

Lpdo product_lpdo(std::size_t n_sites, const std::array<Complex, 2>& amplitude) {
    std::vector<std::array<Complex, 2>> amps(n_sites, amplitude);
    return product_lpdo(amps);
}

Tensor lpdo_mpo_site(const Lpdo& l, std::size_t site) {
    const Tensor& a = l.sites.at(site);
    // [mu, x, mu', nu, y, nu'] -> [mu nu, x, y, mu' nu']
    Tensor b = contract(a, a.conjugated(), {{axis::kKraus, axis::kKraus}});
    b = b.permuted({0, 3, 1, 4, 2, 5});
    const auto& s = b.shape();
    return b.reshaped({s[0] * s[1], s[2], s[3], s[4] * s[5]});
}

Mpo lpdo_to_mpo(const Lpdo& l) {
    validate(l);
    Mpo m;
    m.sites.reserve(l.n_sites());
    for (std::size_t j = 0; j < l.n_sites(); ++j) m.sites.push_back(lpdo_mpo_site(l, j));
    return m;
}

DensityMatrix to_dense(const Mpo& m, std::size_t cap) {
    validate(m);
    if (m.n_sites() > cap) throw std::length_error("to_dense: size cap exceeded");
    const std::size_t d = m.phys_dim();
    Tensor acc({1, 1, 1});
    acc[0] = 1.0;
    for (const auto& b : m.sites) {
        Tensor t = contract(acc, b, {{2, axis::kLeft}});  // [ket, bra, tau, omega, right]
        t = t.permuted({0, 2, 1, 3, 4});
        const auto& s = t.shape();
        acc = t.reshaped({s[0] * s[1], s[2] * s[3], s[4]});
    }
    const std::size_t dim = acc.extent(0);
    DensityMatrix rho(dim, dim);
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j) rho(i, j) = acc.at({i, j, 0});
    (void)d;
    return rho;
}

DensityMatrix to_dense(const Lpdo& l, std::size_t cap) {
    validate(l);
    if (l.n_sites() > cap) throw std::length_error("to_dense: size cap exceeded");
    return to_dense(lpdo_to_mpo(l), cap);
}

Complex trace(const Lpdo& l) {
    validate(l);
    Tensor env({1, 1});
    env[0] = 1.0;
    for (const auto& a : l.sites) {
        Tensor t = contract(env, a, {{0, axis::kLeft}});  // [nu, x, kappa, mu']
        env = contract(t, a.conjugated(), {{0, axis::kLeft}, {1, axis::kPhys}, {2, axis::kKraus}});
    }
    return env[0];
}

Complex trace(const Mpo& m) {
    validate(m);
    Tensor env({1});
    env[0] = 1.0;
    for (const auto& b : m.sites) env = contract(env, site_phys_trace(b), {{0, 0}});
    return env[0];
}

double purity(const Lpdo& l) {
    return std::real(overlap_trace(l, l));
}

double purity(const Mpo& m) {
    validate(m);
    Tensor env({1, 1});
    env[0] = 1.0;
    for (const auto& b : m.sites) {
        Tensor t = contract(env, b.conjugated(), {{0, axis::kLeft}});  // [s2, tau, omega, s1']
        env = contract(t, b, {{0, axis::kLeft}, {1, axis::kKet}, {2, axis::kBra}});
    }
    return std::real(env[0]);
}

Lpdo normalize(Lpdo l, NormMode mode) {
    const double nrm = (mode == NormMode::ByTrace) ? std::real(trace(l)) : std::sqrt(purity(l));
    if (!(nrm > 1e-300)) throw std::runtime_error("normalize: zero norm");
    l.sites.back() *= 1.0 / std::sqrt(nrm);
    return l;
}

Mpo normalize(Mpo m, NormMode mode) {
    Complex nrm;
    if (mode == NormMode::ByTrace) {
        nrm = trace(m);
    } else {
        nrm = std::sqrt(purity(m));
    }
    if (std::abs(nrm) < 1e-300) throw std::runtime_error("normalize: zero norm");
    m.sites.back() *= 1.0 / nrm;
    return m;
}

Complex overlap_trace(const Mpo& a, const Mpo& b) {
    if (a.n_sites() != b.n_sites()) throw std::invalid_argument("overlap_trace: size mismatch");
    Tensor env({1, 1});
    env[0] = 1.0;
    for (std::size_t j = 0; j < a.n_sites(); ++j) {
        Tensor t = contract(env, a.sites[j], {{0, axis::kLeft}});  // [sb, tau, omega, sa']
        env = contract(t, b.sites[j], {{0, axis::kLeft}, {1, axis::kBra}, {2, axis::kKet}});
    }
    return env[0];
}

Complex overlap_trace(const Lpdo& a, const Lpdo& b) {
    if (a.n_sites() != b.n_sites()) throw std::invalid_argument("overlap_trace: size mismatch");
    Tensor env({1, 1, 1, 1});
    env[0] = 1.0;
    // env axes: (mu_a, nu_a, mu_b, nu_b)
    for (std::size_t j = 0; j < a.n_sites(); ++j) {
        const Tensor& aa = a.sites[j];
        const Tensor& ab = b.sites[j];
        Tensor t = contract(env, aa, {{0, axis::kLeft}});
        // t: [nu_a, mu_b, nu_b, x, ka, mu_a']
        t = contract(t, aa.conjugated(), {{0, axis::kLeft}, {4, axis::kKraus}});
        // t: [mu_b, nu_b, x, mu_a', y, nu_a']
        t = contract(t, ab, {{0, axis::kLeft}, {4, axis::kPhys}});
        // t: [nu_b, x, mu_a', nu_a', kb, mu_b']
        t = contract(t, ab.conjugated(), {{0, axis::kLeft}, {1, axis::kPhys}, {4, axis::kKraus}});
        // t: [mu_a', nu_a', mu_b', nu_b']
        env = std::move(t);
    }
    return env[0];
}

Complex overlap_trace(const Mpo& a, const Lpdo& b) {
    if (a.n_sites() != b.n_sites()) throw std::invalid_argument("overlap_trace: size mismatch");
    Tensor env({1, 1, 1});
    env[0] = 1.0;
    // env axes: (sigma, mu, nu)
    for (std::size_t j = 0; j < a.n_sites(); ++j) {
        const Tensor& bb = a.sites[j];
        const Tensor& ab = b.sites[j];
        Tensor t = contract(env, bb, {{0, axis::kLeft}});
        // t: [mu, nu, tau, omega, sigma']
        t = contract(t, ab, {{0, axis::kLeft}, {3, axis::kPhys}});
        // t: [nu, tau, sigma', kappa, mu']
        t = contract(t, ab.conjugated(), {{0, axis::kLeft}, {1, axis::kPhys}, {3, axis::kKraus}});
        // t: [sigma', mu', nu']
        env = std::move(t);
    }
    return env[0];
}

namespace {

// Vectorizes a dense operator into per-site fused (tau_j, omega_j) indices,
// entry v[x1..xN] = rho[omega_global, tau_global], so that sweeping against
// the MPO view of the other operator yields Tr(rho_tn * rho_dense).
Tensor dense_as_site_vector(const DensityMatrix& rho, std::size_t n) {
    const std::size_t dim = 1ull << n;
    if (static_cast<std::size_t>(rho.rows()) != dim || static_cast<std::size_t>(rho.cols()) != dim)
        throw std::invalid_argument("overlap_trace: dense dimension mismatch");
    std::vector<std::size_t> shape(n, 4);
    Tensor v(shape);
    const std::size_t total = v.size();
    for (std::size_t k = 0; k < total; ++k) {
        std::size_t tau = 0, omega = 0, rem = k;
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t x = (rem / (1ull << (2 * (n - 1 - j)))) & 3ull;
            rem %= (1ull << (2 * (n - 1 - j)));
            tau = (tau << 1) | (x >> 1);
            omega = (omega << 1) | (x & 1);
        }
        v[k] = rho(omega, tau);
    }
    return v;
}

Complex overlap_trace_sites(const std::vector<Tensor>& mpo_sites, const DensityMatrix& rho) {
    const std::size_t n = mpo_sites.size();
    Tensor c = dense_as_site_vector(rho, n);
    std::vector<std::size_t> cur = c.shape();
    cur.push_back(1);
    c = c.reshaped(cur);  // [x1, ..., xN, bond]
    for (std::size_t j = 0; j < n; ++j) {
        const Tensor& b = mpo_sites[j];
        const auto& s = b.shape();
        Tensor site = b.reshaped({s[0], s[1] * s[2], s[3]});  // [bond, x, bond']
        std::size_t rest = c.size() / (4 * c.shape().back());
        Tensor cm = c.reshaped({4, rest, c.shape().back()});
        c = contract(cm, site, {{0, 1}, {2, 0}});  // [rest, bond']
        std::vector<std::size_t> next_shape(n - 1 - j, 4);
        next_shape.push_back(c.shape().back());
        c = c.reshaped(next_shape);
    }
    return c[0];
}

}  // namespace

Complex overlap_trace(const Mpo& a, const DensityMatrix& b) {
    return overlap_trace_sites(a.sites, b);
}

Complex overlap_trace(const Lpdo& a, const DensityMatrix& b) {
    std::vector<Tensor> view;
    view.reserve(a.n_sites());
    for (std::size_t j = 0; j < a.n_sites(); ++j) view.push_back(lpdo_mpo_site(a, j));
    return overlap_trace_sites(view, b);
}

double supervector_fidelity(const Mpo& a, const DensityMatrix& b) {
    const double pa = purity(a);
    const double pb = b.squaredNorm();
    if (pa <= 0.0 || pb <= 0.0) throw std::runtime_error("supervector_fidelity: zero norm");
    const double f = std::real(overlap_trace(a, b)) / std::sqrt(pa * pb);
    return std::clamp(f, -1.0, 1.0);
}

double supervector_fidelity(const Lpdo& a, const DensityMatrix& b) {
    const double pa = purity(a);
    const double pb = b.squaredNorm();
    if (pa <= 0.0 || pb <= 0.0) throw std::runtime_error("supervector_fidelity: zero norm");
    const double f = std::real(overlap_trace(a, b)) / std::sqrt(pa * pb);
    return std::clamp(f, -1.0, 1.0);
}

double entanglement_entropy(const Mpo& m, std::size_t cut_bond) {
    validate(m);
    if (cut_bond < 1 || cut_bond >= m.n_sites())
        throw std::invalid_argument("entanglement_entropy: cut out of range");
    return entropy_from_schmidt(schmidt_values(m.sites, cut_bond));
}

double entanglement_entropy(const Lpdo& l, std::size_t cut_bond) {
    validate(l);
    if (cut_bond < 1 || cut_bond >= l.n_sites())
        throw std::invalid_argument("entanglement_entropy: cut out of range");
    std::vector<Tensor> view;
    view.reserve(l.n_sites());
    for (std::size_t j = 0; j < l.n_sites(); ++j) view.push_back(lpdo_mpo_site(l, j));
    return entropy_from_schmidt(schmidt_values(std::move(view), cut_bond));
}

double trace_norm(const Mpo& m, std::size_t cap) {
    return dense_trace_norm(to_dense(m, cap));
}

double trace_norm(const Lpdo& l, std::size_t cap) {
    return dense_trace_norm(to_dense(l, cap));
}

}  // namespace qtn
