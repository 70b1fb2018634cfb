#include "qtn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/QR>
#include <Eigen/SVD>

namespace qtn {

namespace {

std::size_t shape_size(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t e : shape) {
        if (e == 0) throw std::invalid_argument("tensor: zero axis extent");
        n *= e;
    }
    return n;
}

std::vector<std::size_t> row_major_strides(const std::vector<std::size_t>& shape) {
    std::vector<std::size_t> strides(shape.size(), 1);
    for (std::size_t i = shape.size(); i-- > 1;) strides[i - 1] = strides[i] * shape[i];
    return strides;
}

using RowMajorMap =
    Eigen::Map<const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

// Splits the axes of `t` into (row_axes | remaining), permutes and returns the
// corresponding matrix together with the row/col extents.
struct Bipartition {
    Matrix matrix;
    std::vector<std::size_t> row_shape;
    std::vector<std::size_t> col_shape;
};

Bipartition bipartition(const Tensor& t, std::span<const std::size_t> row_axes) {
    if (row_axes.empty() || row_axes.size() >= t.rank())
        throw std::invalid_argument("split: row axes must be a non-empty proper subset");
    std::vector<bool> used(t.rank(), false);
    std::vector<std::size_t> perm(row_axes.begin(), row_axes.end());
    for (std::size_t a : row_axes) {
        if (a >= t.rank() || used[a]) throw std::invalid_argument("split: bad row axis");
        used[a] = true;
    }
    for (std::size_t a = 0; a < t.rank(); ++a)
        if (!used[a]) perm.push_back(a);

    Tensor p = t.permuted(perm);
    Bipartition b;
    b.row_shape.assign(p.shape().begin(), p.shape().begin() + row_axes.size());
    b.col_shape.assign(p.shape().begin() + row_axes.size(), p.shape().end());
    std::size_t rows = shape_size(b.row_shape);
    std::size_t cols = shape_size(b.col_shape);
    b.matrix = RowMajorMap(p.data(), rows, cols);
    return b;
}

// Rescales QR factors so that diag(r) is real and non-negative.
void fix_qr_phases(Matrix& q, Matrix& r) {
    for (Eigen::Index i = 0; i < r.rows(); ++i) {
        Complex d = r(i, i);
        double mag = std::abs(d);
        if (mag == 0.0) continue;
        Complex phase = d / mag;
        q.col(i) *= phase;
        r.row(i) *= std::conj(phase);
    }
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(shape_size(shape_)) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<Complex> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != shape_size(shape_))
        throw std::invalid_argument("tensor: entry count does not match shape");
}

Tensor Tensor::scalar(Complex value) {
    Tensor t;
    t.shape_ = {};
    t.data_ = {value};
    return t;
}

std::size_t Tensor::flat_index(std::span<const std::size_t> idx) const {
    if (idx.size() != shape_.size()) throw std::invalid_argument("tensor: index rank mismatch");
    std::size_t flat = 0;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] >= shape_[i]) throw std::out_of_range("tensor: index out of range");
        flat = flat * shape_[i] + idx[i];
    }
    return flat;
}

Tensor Tensor::permuted(std::span<const std::size_t> perm) const {
    if (perm.size() != shape_.size()) throw std::invalid_argument("permute: rank mismatch");
    std::vector<bool> seen(shape_.size(), false);
    std::vector<std::size_t> new_shape(shape_.size());
    for (std::size_t i = 0; i < perm.size(); ++i) {
        if (perm[i] >= shape_.size() || seen[perm[i]])
            throw std::invalid_argument("permute: invalid permutation");
        seen[perm[i]] = true;
        new_shape[i] = shape_[perm[i]];
    }
    bool identity = true;
    for (std::size_t i = 0; i < perm.size(); ++i)
        if (perm[i] != i) { identity = false; break; }
    if (identity) return *this;

    Tensor out(new_shape);
    const auto old_strides = row_major_strides(shape_);
    std::vector<std::size_t> perm_strides(perm.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm_strides[i] = old_strides[perm[i]];

    const std::size_t n = data_.size();
    const std::size_t r = new_shape.size();
    std::vector<std::size_t> idx(r, 0);
    std::size_t src = 0;
    for (std::size_t dst = 0; dst < n; ++dst) {
        out.data_[dst] = data_[src];
        for (std::size_t ax = r; ax-- > 0;) {
            if (++idx[ax] < new_shape[ax]) {
                src += perm_strides[ax];
                break;
            }
            idx[ax] = 0;
            src -= perm_strides[ax] * (new_shape[ax] - 1);
        }
    }
    return out;
}

Tensor Tensor::reshaped(std::vector<std::size_t> shape) const {
    if (shape_size(shape) != data_.size())
        throw std::invalid_argument("reshape: size mismatch");
    Tensor t;
    t.shape_ = std::move(shape);
    t.data_ = data_;
    return t;
}

Tensor Tensor::conjugated() const {
    Tensor t = *this;
    for (auto& v : t.data_) v = std::conj(v);
    return t;
}

Tensor& Tensor::operator*=(Complex s) {
    for (auto& v : data_) v *= s;
    return *this;
}

Tensor& Tensor::operator+=(const Tensor& other) {
    if (shape_ != other.shape_) throw std::invalid_argument("add: shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

Tensor& Tensor::operator-=(const Tensor& other) {
    if (shape_ != other.shape_) throw std::invalid_argument("subtract: shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
}

double Tensor::norm() const {
    double s = 0.0;
    for (const auto& v : data_) s += std::norm(v);
    return std::sqrt(s);
}

bool Tensor::all_finite() const {
    for (const auto& v : data_)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
}

Tensor contract(const Tensor& a, const Tensor& b,
                std::span<const std::pair<std::size_t, std::size_t>> pairs) {
    std::vector<bool> a_used(a.rank(), false), b_used(b.rank(), false);
    for (const auto& [ai, bi] : pairs) {
        if (ai >= a.rank() || bi >= b.rank()) throw std::invalid_argument("contract: axis out of range");
        if (a_used[ai] || b_used[bi]) throw std::invalid_argument("contract: repeated axis");
        if (a.extent(ai) != b.extent(bi)) throw std::invalid_argument("contract: extent mismatch");
        a_used[ai] = true;
        b_used[bi] = true;
    }

    // a -> [free_a, contracted]; b -> [contracted, free_b]; then one GEMM.
    std::vector<std::size_t> a_perm, b_perm;
    std::vector<std::size_t> out_shape;
    for (std::size_t i = 0; i < a.rank(); ++i)
        if (!a_used[i]) { a_perm.push_back(i); out_shape.push_back(a.extent(i)); }
    std::size_t k = 1;
    for (const auto& [ai, bi] : pairs) {
        a_perm.push_back(ai);
        k *= a.extent(ai);
    }
    for (const auto& [ai, bi] : pairs) b_perm.push_back(bi);
    for (std::size_t i = 0; i < b.rank(); ++i)
        if (!b_used[i]) { b_perm.push_back(i); out_shape.push_back(b.extent(i)); }

    Tensor ap = a.permuted(a_perm);
    Tensor bp = b.permuted(b_perm);
    const std::size_t m = a.size() / k;
    const std::size_t n = b.size() / k;

    Tensor out(out_shape.empty() ? std::vector<std::size_t>{} : out_shape);
    if (out.rank() == 0) out = Tensor::scalar(0.0);

    using RM = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<const RM> ma(ap.data(), m, k);
    Eigen::Map<const RM> mb(bp.data(), k, n);
    Eigen::Map<RM> mo(out.data(), m, n);
    mo.noalias() = ma * mb;
    return out;
}

Tensor contract(const Tensor& a, const Tensor& b,
                std::initializer_list<std::pair<std::size_t, std::size_t>> pairs) {
    return contract(a, b, std::span<const std::pair<std::size_t, std::size_t>>(pairs.begin(), pairs.size()));
}

Tensor matrix_apply(const Matrix& m, const Tensor& t, std::size_t axis) {
    if (axis >= t.rank()) throw std::invalid_argument("matrix_apply: axis out of range");
    if (static_cast<std::size_t>(m.cols()) != t.extent(axis))
        throw std::invalid_argument("matrix_apply: extent mismatch");

    // Work on the matricization [axis | rest] without materializing permutes
    // twice: outer block size and inner stride determine the slice layout.
    std::size_t outer = 1, inner = 1;
    for (std::size_t i = 0; i < axis; ++i) outer *= t.extent(i);
    for (std::size_t i = axis + 1; i < t.rank(); ++i) inner *= t.extent(i);
    const std::size_t s = t.extent(axis);
    const std::size_t r = static_cast<std::size_t>(m.rows());

    std::vector<std::size_t> out_shape = t.shape();
    out_shape[axis] = r;
    Tensor out(out_shape);

    using RM = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    for (std::size_t o = 0; o < outer; ++o) {
        Eigen::Map<const RM> src(t.data() + o * s * inner, s, inner);
        Eigen::Map<RM> dst(out.data() + o * r * inner, r, inner);
        dst.noalias() = m * src;
    }
    return out;
}

Matrix matricize(const Tensor& t, std::span<const std::size_t> row_axes) {
    return bipartition(t, row_axes).matrix;
}

Matrix matricize(const Tensor& t, std::initializer_list<std::size_t> row_axes) {
    return matricize(t, std::span<const std::size_t>(row_axes.begin(), row_axes.size()));
}

Tensor from_matrix(const Matrix& m, std::vector<std::size_t> row_shape,
                   std::vector<std::size_t> col_shape) {
    if (shape_size(row_shape) != static_cast<std::size_t>(m.rows()) ||
        shape_size(col_shape) != static_cast<std::size_t>(m.cols()))
        throw std::invalid_argument("from_matrix: shape mismatch");
    std::vector<std::size_t> shape = row_shape;
    shape.insert(shape.end(), col_shape.begin(), col_shape.end());
    Tensor t(shape);
    using RM = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<RM>(t.data(), m.rows(), m.cols()) = m;
    return t;
}

Factorization svd_split(const Tensor& t, std::span<const std::size_t> row_axes, SplitSpec spec) {
    if (!t.all_finite()) throw std::runtime_error("svd_split: non-finite entries");
    Bipartition b = bipartition(t, row_axes);

    Eigen::JacobiSVD<Matrix> svd(b.matrix, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();

    double total = 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) total += s(i) * s(i);
    if (total == 0.0) throw std::runtime_error("svd_split: degenerate input (all singular values zero)");

    // Kept ranks resolve by sorted position; ties keep the earlier column.
    const double threshold = spec.cutoff * s(0);
    std::size_t rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (rank >= spec.max_rank) break;
        if (s(i) < threshold || s(i) == 0.0) break;
        ++rank;
    }
    if (rank == 0) throw std::runtime_error("svd_split: all singular values dropped");

    double kept = 0.0;
    for (std::size_t i = 0; i < rank; ++i) kept += s(i) * s(i);

    Factorization f;
    f.singular_values.assign(s.data(), s.data() + rank);
    f.discarded_weight = std::max(0.0, 1.0 - kept / total);
    f.left = from_matrix(svd.matrixU().leftCols(rank), b.row_shape, {rank});
    f.right = from_matrix(svd.matrixV().leftCols(rank).adjoint(), {rank}, b.col_shape);
    return f;
}

Factorization svd_split(const Tensor& t, std::initializer_list<std::size_t> row_axes, SplitSpec spec) {
    return svd_split(t, std::span<const std::size_t>(row_axes.begin(), row_axes.size()), spec);
}

std::pair<Tensor, Tensor> qr_split(const Tensor& t, std::span<const std::size_t> row_axes) {
    if (!t.all_finite()) throw std::runtime_error("qr_split: non-finite entries");
    Bipartition b = bipartition(t, row_axes);
    const Eigen::Index k = std::min(b.matrix.rows(), b.matrix.cols());

    Eigen::HouseholderQR<Matrix> qr(b.matrix);
    Matrix q = qr.householderQ() * Matrix::Identity(b.matrix.rows(), k);
    Matrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    fix_qr_phases(q, r);

    return {from_matrix(q, b.row_shape, {static_cast<std::size_t>(k)}),
            from_matrix(r, {static_cast<std::size_t>(k)}, b.col_shape)};
}

std::pair<Tensor, Tensor> qr_split(const Tensor& t, std::initializer_list<std::size_t> row_axes) {
    return qr_split(t, std::span<const std::size_t>(row_axes.begin(), row_axes.size()));
}

std::pair<Tensor, Tensor> lq_split(const Tensor& t, std::span<const std::size_t> row_axes) {
    if (!t.all_finite()) throw std::runtime_error("lq_split: non-finite entries");
    Bipartition b = bipartition(t, row_axes);
    const Eigen::Index k = std::min(b.matrix.rows(), b.matrix.cols());

    // LQ of M from QR of M^H: M = (Q~ R~)^H = R~^H Q~^H.
    Matrix mh = b.matrix.adjoint();
    Eigen::HouseholderQR<Matrix> qr(mh);
    Matrix qt = qr.householderQ() * Matrix::Identity(mh.rows(), k);
    Matrix rt = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    fix_qr_phases(qt, rt);

    Matrix l = rt.adjoint();
    Matrix q = qt.adjoint();
    return {from_matrix(l, b.row_shape, {static_cast<std::size_t>(k)}),
            from_matrix(q, {static_cast<std::size_t>(k)}, b.col_shape)};
}

std::pair<Tensor, Tensor> lq_split(const Tensor& t, std::initializer_list<std::size_t> row_axes) {
    return lq_split(t, std::span<const std::size_t>(row_axes.begin(), row_axes.size()));
}

}  // namespace qtn
