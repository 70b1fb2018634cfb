#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace qtn {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

/// Dense complex tensor with row-major entry layout. Axis 0 is the slowest
/// index. All transforms return new values; tensors are immutable once built
/// and safe to share across threads.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> shape);
    Tensor(std::vector<std::size_t> shape, std::vector<Complex> data);

    static Tensor scalar(Complex value);

    std::size_t rank() const { return shape_.size(); }
    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t extent(std::size_t axis) const { return shape_.at(axis); }
    std::size_t size() const { return data_.size(); }

    Complex* data() { return data_.data(); }
    const Complex* data() const { return data_.data(); }

    Complex& operator[](std::size_t flat) { return data_[flat]; }
    const Complex& operator[](std::size_t flat) const { return data_[flat]; }

    Complex& at(std::initializer_list<std::size_t> idx) { return data_[flat_index(idx)]; }
    const Complex& at(std::initializer_list<std::size_t> idx) const { return data_[flat_index(idx)]; }
    std::size_t flat_index(std::span<const std::size_t> idx) const;
    std::size_t flat_index(std::initializer_list<std::size_t> idx) const {
        return flat_index(std::span<const std::size_t>(idx.begin(), idx.size()));
    }

    Tensor permuted(std::span<const std::size_t> perm) const;
    Tensor permuted(std::initializer_list<std::size_t> perm) const {
        return permuted(std::span<const std::size_t>(perm.begin(), perm.size()));
    }
    Tensor reshaped(std::vector<std::size_t> shape) const;
    Tensor conjugated() const;

    Tensor& operator*=(Complex s);
    Tensor& operator+=(const Tensor& other);
    Tensor& operator-=(const Tensor& other);
    friend Tensor operator*(Complex s, Tensor t) { t *= s; return t; }

    /// Frobenius norm sqrt(sum |x|^2).
    double norm() const;
    bool all_finite() const;

private:
    std::vector<std::size_t> shape_;
    std::vector<Complex> data_;
};

/// Pairwise tensor contraction. Result axes are the uncontracted axes of `a`
/// (in order) followed by the uncontracted axes of `b`.
Tensor contract(const Tensor& a, const Tensor& b,
                std::span<const std::pair<std::size_t, std::size_t>> pairs);
Tensor contract(const Tensor& a, const Tensor& b,
                std::initializer_list<std::pair<std::size_t, std::size_t>> pairs);

/// Order-preserving matrix action on one axis:
/// out[..., r, ...] = sum_s m(r, s) * t[..., s, ...].
Tensor matrix_apply(const Matrix& m, const Tensor& t, std::size_t axis);

/// Matrix view of a tensor: `row_axes` (in the given order) become the row
/// index, the remaining axes (in original order) the column index.
Matrix matricize(const Tensor& t, std::span<const std::size_t> row_axes);
Matrix matricize(const Tensor& t, std::initializer_list<std::size_t> row_axes);

/// Inverse of matricize for the un-permuted case: row index unfolds to
/// `row_shape`, column index to `col_shape`.
Tensor from_matrix(const Matrix& m, std::vector<std::size_t> row_shape,
                   std::vector<std::size_t> col_shape);

struct SplitSpec {
    std::size_t max_rank = std::numeric_limits<std::size_t>::max();
    double cutoff = 0.0;  // relative to the largest singular value
};

struct Factorization {
    Tensor left;
    std::vector<double> singular_values;  // non-increasing
    Tensor right;
    double discarded_weight = 0.0;  // sum of dropped s^2 over sum of all s^2
};

/// SVD split across the bipartition (row_axes | remaining axes). `left` has
/// orthonormal columns, `right` orthonormal rows; singular values are not
/// absorbed into either factor.
Factorization svd_split(const Tensor& t, std::span<const std::size_t> row_axes,
                        SplitSpec spec = {});
Factorization svd_split(const Tensor& t, std::initializer_list<std::size_t> row_axes,
                        SplitSpec spec = {});

/// QR split: q has orthonormal columns, r is upper triangular with real
/// non-negative diagonal (deterministic gauge).
std::pair<Tensor, Tensor> qr_split(const Tensor& t, std::span<const std::size_t> row_axes);
std::pair<Tensor, Tensor> qr_split(const Tensor& t, std::initializer_list<std::size_t> row_axes);

/// LQ split: l is lower triangular with real non-negative diagonal, q has
/// orthonormal rows.
std::pair<Tensor, Tensor> lq_split(const Tensor& t, std::span<const std::size_t> row_axes);
std::pair<Tensor, Tensor> lq_split(const Tensor& t, std::initializer_list<std::size_t> row_axes);

}  // namespace qtn
