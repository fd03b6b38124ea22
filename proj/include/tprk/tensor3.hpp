#pragma once

// Dense third-order tensors and the t-product algebra.
//
// A Tensor3 of shape m x l x n is stored as an m x (l*n) column-major matrix
// whose k-th block of l columns is the frontal slice M_k. Frontal slices are
// therefore contiguous, and every slice is available as an Eigen block view.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Core>
#include <unsupported/Eigen/FFT>

#include "tprk/errors.hpp"

namespace tprk {

using Index = Eigen::Index;

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar_>
class Tensor3 {
    static_assert(Eigen::NumTraits<Scalar_>::IsComplex,
                  "Tensor3 is defined over a complex scalar field");

public:
    using Scalar = Scalar_;
    using RealScalar = typename Eigen::NumTraits<Scalar>::Real;
    using Matrix = DenseMatrix<Scalar>;

    /// Zero tensor of shape rows x cols x depth.
    Tensor3(Index rows, Index cols, Index depth) : cols_(cols), depth_(depth) {
        check_dims(rows, cols, depth);
        data_ = Matrix::Zero(rows, cols * depth);
    }

    /// Adopts `slices`, an m x (l*n) matrix holding the frontal slices side by side.
    Tensor3(Matrix slices, Index depth) : depth_(depth) {
        if (depth < 1 || slices.cols() % depth != 0)
            throw DimensionMismatch("slice matrix width " + std::to_string(slices.cols()) +
                                    " is not a multiple of depth " + std::to_string(depth));
        cols_ = slices.cols() / depth;
        check_dims(slices.rows(), cols_, depth);
        if (!slices.allFinite()) throw std::domain_error("tensor entries must be finite");
        data_ = std::move(slices);
    }

    static Tensor3 Zero(Index rows, Index cols, Index depth) { return {rows, cols, depth}; }

    /// Builds a tensor entrywise from f(i, j, k).
    template <typename F>
    static Tensor3 generate(Index rows, Index cols, Index depth, F&& f) {
        check_dims(rows, cols, depth);
        Matrix m(rows, cols * depth);
        for (Index k = 0; k < depth; ++k)
            for (Index j = 0; j < cols; ++j)
                for (Index i = 0; i < rows; ++i) m(i, k * cols + j) = Scalar(f(i, j, k));
        return Tensor3(std::move(m), depth);
    }

    Index rows() const noexcept { return data_.rows(); }
    Index cols() const noexcept { return cols_; }
    Index depth() const noexcept { return depth_; }
    Index size() const noexcept { return data_.size(); }

    const Scalar& operator()(Index i, Index j, Index k) const { return data_(i, k * cols_ + j); }

    /// Frontal slice k as a read-only view.
    auto slice(Index k) const { return data_.middleCols(k * cols_, cols_); }

    /// The m x (l*n) side-by-side slice matrix.
    const Matrix& storage() const noexcept { return data_; }

    Tensor3 operator+(const Tensor3& other) const { return combine(other, data_ + other.data_); }
    Tensor3 operator-(const Tensor3& other) const { return combine(other, data_ - other.data_); }
    Tensor3 operator-() const { return Tensor3(Matrix(-data_), depth_); }
    friend Tensor3 operator*(const Scalar& s, const Tensor3& t) {
        return Tensor3(Matrix(s * t.data_), t.depth_);
    }

    bool same_shape(const Tensor3& other) const noexcept {
        return rows() == other.rows() && cols_ == other.cols_ && depth_ == other.depth_;
    }

private:
    static void check_dims(Index rows, Index cols, Index depth) {
        if (rows < 1 || cols < 1 || depth < 1)
            throw DimensionMismatch("tensor dimensions must be >= 1, got " +
                                    std::to_string(rows) + "x" + std::to_string(cols) + "x" +
                                    std::to_string(depth));
    }

    template <typename Expr>
    Tensor3 combine(const Tensor3& other, const Expr& expr) const {
        if (!same_shape(other)) throw DimensionMismatch("elementwise op on different shapes");
        return Tensor3(Matrix(expr), depth_);
    }

    Matrix data_;
    Index cols_ = 1;
    Index depth_ = 1;
};

using Tensor3cd = Tensor3<std::complex<double>>;
using MatrixXcd = DenseMatrix<std::complex<double>>;

/// A 1 x 1 x n tensor: the scalar-like element of the t-product algebra.
template <typename Scalar_>
class TubeFiber {
public:
    using Scalar = Scalar_;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    explicit TubeFiber(Vector coefficients) : coeffs_(std::move(coefficients)) {
        if (coeffs_.size() < 1) throw DimensionMismatch("tube fiber needs length >= 1");
    }

    explicit TubeFiber(const Tensor3<Scalar>& t) : coeffs_(t.depth()) {
        if (t.rows() != 1 || t.cols() != 1)
            throw DimensionMismatch("tube fiber must be 1x1xn");
        coeffs_ = t.storage().row(0).transpose();
    }

    Index size() const noexcept { return coeffs_.size(); }
    const Vector& coefficients() const noexcept { return coeffs_; }
    const Scalar& operator[](Index k) const { return coeffs_[k]; }

    Tensor3<Scalar> as_tensor() const {
        return Tensor3<Scalar>(DenseMatrix<Scalar>(coeffs_.transpose()), coeffs_.size());
    }

private:
    Vector coeffs_;
};

namespace detail {

template <typename Vec>
Vec dft(const Vec& v, bool inverse) {
    using Complex = typename Vec::Scalar;
    using Real = typename Complex::value_type;
    // kissfft does not handle length 1; the transform is the identity there.
    if (v.size() == 1) return v;
    std::vector<Complex> src(v.data(), v.data() + v.size());
    std::vector<Complex> dst;
    Eigen::FFT<Real> fft;
    if (inverse)
        fft.inv(dst, src);
    else
        fft.fwd(dst, src);
    Vec out(v.size());
    std::copy(dst.begin(), dst.end(), out.data());
    return out;
}

}  // namespace detail

/// Stacks frontal slices M_0..M_{n-1} vertically into an (m*n) x l matrix.
template <typename Scalar>
DenseMatrix<Scalar> unfold(const Tensor3<Scalar>& t) {
    const Index m = t.rows();
    DenseMatrix<Scalar> out(m * t.depth(), t.cols());
    for (Index k = 0; k < t.depth(); ++k) out.middleRows(k * m, m) = t.slice(k);
    return out;
}

/// Inverse of unfold: splits the rows of `mat` into `depth` frontal slices.
template <typename Derived>
Tensor3<typename Derived::Scalar> fold(const Eigen::MatrixBase<Derived>& mat, Index depth) {
    using Scalar = typename Derived::Scalar;
    if (depth < 1 || mat.rows() % depth != 0)
        throw DimensionMismatch("cannot fold " + std::to_string(mat.rows()) +
                                " rows into depth " + std::to_string(depth));
    const Index m = mat.rows() / depth;
    const Index l = mat.cols();
    DenseMatrix<Scalar> slices(m, l * depth);
    for (Index k = 0; k < depth; ++k) slices.middleCols(k * l, l) = mat.middleRows(k * m, m);
    return Tensor3<Scalar>(std::move(slices), depth);
}

/// Block-circulant embedding: block (r, c) is frontal slice (r - c) mod n.
template <typename Scalar>
DenseMatrix<Scalar> bcirc(const Tensor3<Scalar>& t) {
    const Index m = t.rows(), l = t.cols(), n = t.depth();
    DenseMatrix<Scalar> out(m * n, l * n);
    for (Index r = 0; r < n; ++r)
        for (Index c = 0; c < n; ++c) out.block(r * m, c * l, m, l) = t.slice((r - c + n) % n);
    return out;
}

/// t-product A*B = fold(bcirc(A) unfold(B)), evaluated as the slice-wise
/// circular convolution C_r = sum_c A_{(r-c) mod n} B_c without forming bcirc(A).
template <typename Scalar>
Tensor3<Scalar> tprod(const Tensor3<Scalar>& a, const Tensor3<Scalar>& b) {
    if (a.cols() != b.rows() || a.depth() != b.depth())
        throw DimensionMismatch("tprod: cannot multiply " + std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()) + "x" + std::to_string(a.depth()) +
                                " by " + std::to_string(b.rows()) + "x" +
                                std::to_string(b.cols()) + "x" + std::to_string(b.depth()));
    const Index n = a.depth(), p = b.cols();
    DenseMatrix<Scalar> out = DenseMatrix<Scalar>::Zero(a.rows(), p * n);
    for (Index r = 0; r < n; ++r)
        for (Index c = 0; c < n; ++c)
            out.middleCols(r * p, p).noalias() += a.slice((r - c + n) % n) * b.slice(c);
    return Tensor3<Scalar>(std::move(out), n);
}

/// Conjugate transpose: adjoint of every slice, slice order 1..n-1 reversed.
template <typename Scalar>
Tensor3<Scalar> transpose(const Tensor3<Scalar>& t) {
    const Index n = t.depth(), m = t.rows();
    DenseMatrix<Scalar> out(t.cols(), m * n);
    for (Index k = 0; k < n; ++k) out.middleCols(k * m, m) = t.slice((n - k) % n).adjoint();
    return Tensor3<Scalar>(std::move(out), n);
}

template <typename Scalar = std::complex<double>>
Tensor3<Scalar> identity(Index size, Index depth) {
    Tensor3<Scalar> zero(size, size, depth);
    DenseMatrix<Scalar> slices = zero.storage();
    slices.leftCols(size).setIdentity();
    return Tensor3<Scalar>(std::move(slices), depth);
}

/// Inverse tube W with t*W = W*t = e_0, from the reciprocals of the DFT
/// coefficients of t. A coefficient counts as zero when its modulus is at or
/// below rel_tol times the largest coefficient modulus.
template <typename Scalar>
TubeFiber<Scalar> tube_inverse(const TubeFiber<Scalar>& t, double rel_tol = 1e-12) {
    using Vector = typename TubeFiber<Scalar>::Vector;
    Vector hat = detail::dft(t.coefficients(), false);
    Index worst = 0;
    const double largest = hat.cwiseAbs().maxCoeff();
    const double smallest = hat.cwiseAbs().minCoeff(&worst);
    if (!(smallest > rel_tol * largest)) throw NotInvertible(-1, worst, smallest);
    return TubeFiber<Scalar>(detail::dft(Vector(hat.cwiseInverse()), true));
}

template <typename Scalar>
typename Tensor3<Scalar>::RealScalar frobenius_norm(const Tensor3<Scalar>& t) {
    return t.storage().norm();
}

/// Row slice i as a 1 x l x n copy.
template <typename Scalar>
Tensor3<Scalar> row_slice(const Tensor3<Scalar>& t, Index i) {
    if (i < 0 || i >= t.rows())
        throw IndexOutOfRange("row slice " + std::to_string(i) + " out of range [0, " +
                              std::to_string(t.rows()) + ")");
    return Tensor3<Scalar>(DenseMatrix<Scalar>(t.storage().row(i)), t.depth());
}

/// Frontal slice k as an m x l copy.
template <typename Scalar>
DenseMatrix<Scalar> frontal_slice(const Tensor3<Scalar>& t, Index k) {
    if (k < 0 || k >= t.depth())
        throw IndexOutOfRange("frontal slice " + std::to_string(k) + " out of range [0, " +
                              std::to_string(t.depth()) + ")");
    return t.slice(k);
}

/// ||a - b||_F <= max(rel * max(||a||_F, ||b||_F), abs_floor).
template <typename Scalar>
bool approx_equal(const Tensor3<Scalar>& a, const Tensor3<Scalar>& b, double rel = 1e-10,
                  double abs_floor = 1e-14) {
    if (!a.same_shape(b)) return false;
    const double diff = (a.storage() - b.storage()).norm();
    const double scale = std::max(frobenius_norm(a), frobenius_norm(b));
    return diff <= std::max(rel * scale, abs_floor);
}

}  // namespace tprk
