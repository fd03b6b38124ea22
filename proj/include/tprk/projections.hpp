#pragma once

// Orthogonal projections onto the row space of a single row slice A_i (1 x l x n):
//     P_i = A_i^* (A_i A_i^*)^{-1} A_i .
// In the Fourier domain slice k of P_i is the rank-one projector
//     a_k^* a_k / (a_k a_k^*),   a_k = k-th frontal slice of hat(A_i),
// which is how projections are stored and applied here.

#include <string>
#include <vector>

#include "tprk/fourier.hpp"
#include "tprk/tensor3.hpp"

namespace tprk {

/// Fourier coefficients of the normal tube A_i A_i^*, i.e. ||row i of A_hat_k||^2 for each k.
template <typename Scalar>
Eigen::Matrix<typename Tensor3<Scalar>::RealScalar, Eigen::Dynamic, 1> normal_spectrum(
    const Tensor3<Scalar>& a_hat, Index i) {
    Eigen::Matrix<typename Tensor3<Scalar>::RealScalar, Eigen::Dynamic, 1> s(a_hat.depth());
    for (Index k = 0; k < a_hat.depth(); ++k) s[k] = a_hat.slice(k).row(i).squaredNorm();
    return s;
}

struct RowInvertibility {
    Index row = 0;
    double min_coefficient = 0;  ///< min_k |(A_hat_i A_hat_i^*)_k|
    double max_coefficient = 0;
    bool passes = false;
};

namespace detail {

inline RowInvertibility screen_spectrum(Index row, const Eigen::VectorXd& spectrum, double tol,
                                        Index* worst = nullptr) {
    RowInvertibility r;
    r.row = row;
    Index argmin = 0;
    r.min_coefficient = spectrum.minCoeff(&argmin);
    r.max_coefficient = spectrum.maxCoeff();
    r.passes = r.min_coefficient > tol * r.max_coefficient;
    if (worst) *worst = argmin;
    return r;
}

}  // namespace detail

/// Screens every row slice: a row passes when its smallest normal-tube Fourier
/// coefficient exceeds tol times its largest one.
template <typename Scalar>
std::vector<RowInvertibility> check_row_invertibility(const Tensor3<Scalar>& a,
                                                      double tol = 1e-12) {
    const Tensor3<Scalar> hat = mode3_dft(a);
    std::vector<RowInvertibility> report;
    report.reserve(a.rows());
    for (Index i = 0; i < a.rows(); ++i)
        report.push_back(detail::screen_spectrum(i, normal_spectrum(hat, i).template cast<double>(), tol));
    return report;
}

template <typename Scalar_>
class RowProjection {
public:
    using Scalar = Scalar_;
    using Real = typename Tensor3<Scalar>::RealScalar;
    using Matrix = DenseMatrix<Scalar>;

    RowProjection(const Tensor3<Scalar>& a, Index i, double tol = 1e-12)
        : row_(i), source_(row_slice(a, i)), hat_row_(mode3_dft(source_)), inverse_norms_(a.depth()) {
        const Eigen::VectorXd spectrum = normal_spectrum(hat_row_, 0).template cast<double>();
        Index worst = 0;
        const RowInvertibility screen = detail::screen_spectrum(i, spectrum, tol, &worst);
        if (!screen.passes) throw NotInvertible(i, worst, screen.min_coefficient);
        inverse_norms_ = spectrum.cwiseInverse().template cast<Real>();
    }

    Index row() const noexcept { return row_; }
    Index cols() const noexcept { return source_.cols(); }
    Index depth() const noexcept { return source_.depth(); }
    const Tensor3<Scalar>& source() const noexcept { return source_; }

    /// (A_i A_i^*)^{-1} as a spatial tube.
    TubeFiber<Scalar> inverse_normal() const {
        typename TubeFiber<Scalar>::Vector hat = inverse_norms_.template cast<Scalar>();
        return TubeFiber<Scalar>(detail::dft(hat, true));
    }

    /// Spatial l x l x n projector P_i.
    Tensor3<Scalar> projector() const {
        const Index l = cols(), n = depth();
        Matrix slices(l, l * n);
        for (Index k = 0; k < n; ++k) {
            const auto a = hat_row_.slice(k);  // 1 x l
            slices.middleCols(k * l, l).noalias() = a.adjoint() * a * Scalar(inverse_norms_[k]);
        }
        return mode3_idft(Tensor3<Scalar>(std::move(slices), n));
    }

    /// P_i * M for an l x p x n tensor M.
    Tensor3<Scalar> apply(const Tensor3<Scalar>& m) const {
        if (m.rows() != cols() || m.depth() != depth())
            throw DimensionMismatch("projection applied to nonconforming tensor");
        const Tensor3<Scalar> m_hat = mode3_dft(m);
        const Index p = m.cols(), n = depth();
        Matrix out(m.rows(), p * n);
        for (Index k = 0; k < n; ++k) {
            const auto a = hat_row_.slice(k);
            const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> coeff =
                (a * m_hat.slice(k)) * Scalar(inverse_norms_[k]);
            out.middleCols(k * p, p).noalias() = a.adjoint() * coeff;
        }
        return mode3_idft(Tensor3<Scalar>(std::move(out), n));
    }

private:
    Index row_;
    Tensor3<Scalar> source_;
    Tensor3<Scalar> hat_row_;
    Eigen::Matrix<Real, Eigen::Dynamic, 1> inverse_norms_;
};

template <typename Scalar>
RowProjection<Scalar> row_projection(const Tensor3<Scalar>& a, Index i, double tol = 1e-12) {
    return RowProjection<Scalar>(a, i, tol);
}

struct PythagoreanSplit {
    double orthogonal = 0;  ///< ||(I - P) M||_F
    double parallel = 0;    ///< ||P M||_F
};

template <typename Scalar>
PythagoreanSplit pythagorean_split(const RowProjection<Scalar>& p, const Tensor3<Scalar>& m) {
    const Tensor3<Scalar> pm = p.apply(m);
    return {double(frobenius_norm(m - pm)), double(frobenius_norm(pm))};
}

}  // namespace tprk
