#pragma once

// Contraction coefficients rho (E||E^{t+1}||^2 <= rho ||E^t||^2) for the solvers.
//
//   contraction_exact  1 - lambda_min( sum_i p_i bcirc(P_i) )
//   contraction_trk    1 - min_k sigma_min^2(A_hat_k) / (m ||A_hat_k||_{inf,2}^2)
//   contraction_brk    1 - min_k sigma_min^2(A_hat_k) / (m n max_k ||A_hat_k||_{inf,2}^2)
//   contraction_mrk    1 - sigma_min^2(A) / ||A||_F^2
//
// sigma_min always means the smallest of the min(rows, cols) singular values.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "tprk/fourier.hpp"
#include "tprk/projections.hpp"
#include "tprk/solvers.hpp"
#include "tprk/tensor3.hpp"

namespace tprk {

/// Largest l*n for which the dense expected-projection matrix is formed.
inline constexpr Index kDenseAnalysisCap = 2000;

struct RateReport {
    std::string method;
    double rho = 1;
    std::vector<double> sigma_min;  ///< sigma_min(A_hat_k) per slice
    std::vector<double> inf2_sq;    ///< ||A_hat_k||_{inf,2}^2 per slice
};

namespace detail {

inline double clamp_rate(double rho) { return std::clamp(rho, 0.0, 1.0); }

template <typename Derived>
double smallest_singular_value(const Eigen::MatrixBase<Derived>& m) {
    using Matrix = DenseMatrix<typename Derived::Scalar>;
    Eigen::BDCSVD<Matrix> svd(m.derived());
    const auto& s = svd.singularValues();
    return s.size() ? double(s.minCoeff()) : 0.0;
}

template <typename Scalar>
double inf2_sq_of_hat(const Tensor3<Scalar>& a_hat, Index k) {
    return double(a_hat.slice(k).rowwise().squaredNorm().maxCoeff());
}

template <typename Scalar>
RateReport fourier_spectrum(const Tensor3<Scalar>& a, double tol) {
    const Tensor3<Scalar> hat = mode3_dft(a);
    require_invertible_rows(hat, tol);
    RateReport r;
    for (Index k = 0; k < a.depth(); ++k) {
        r.sigma_min.push_back(smallest_singular_value(hat.slice(k)));
        r.inf2_sq.push_back(inf2_sq_of_hat(hat, k));
    }
    return r;
}

}  // namespace detail

/// max_i ||row i of A_hat_k||^2, the squared infinity-2 norm of Fourier slice k.
template <typename Scalar>
double inf2_norm(const Tensor3<Scalar>& a, Index k) {
    if (k < 0 || k >= a.depth()) throw IndexOutOfRange("inf2_norm: slice index out of range");
    return detail::inf2_sq_of_hat(mode3_dft(a), k);
}

/// E[bcirc(P_i)] = sum_i p_i bcirc(P_i), with each P_i = A_i^* W_i A_i built
/// from spatial t-products. Returned symmetrized, (M + M^*)/2.
template <typename Scalar>
DenseMatrix<Scalar> expected_projection(const Tensor3<Scalar>& a, const std::vector<double>& probabilities,
                                        double tol = 1e-12, Index cap = kDenseAnalysisCap) {
    const Index m = a.rows(), ln = a.cols() * a.depth();
    if (ln > cap)
        throw SizeLimit("dense expected projection needs l*n <= " + std::to_string(cap) + ", got " +
                        std::to_string(ln));
    if (Index(probabilities.size()) != m)
        throw DimensionMismatch("need one probability per row slice");
    double total = 0;
    for (double p : probabilities) {
        if (!(p >= 0)) throw std::invalid_argument("probabilities must be nonnegative");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("probabilities must sum to 1");

    DenseMatrix<Scalar> e = DenseMatrix<Scalar>::Zero(ln, ln);
    for (Index i = 0; i < m; ++i) {
        const Tensor3<Scalar> ai = row_slice(a, i);
        const Tensor3<Scalar> adj = transpose(ai);
        Tensor3<Scalar> w(1, 1, a.depth());
        try {
            w = tube_inverse(TubeFiber<Scalar>(tprod(ai, adj)), tol).as_tensor();
        } catch (const NotInvertible& err) {
            throw NotInvertible(i, err.coefficient(), err.magnitude());
        }
        if (probabilities[i] == 0) continue;
        e += Scalar(probabilities[i]) * bcirc(tprod(adj, tprod(w, ai)));
    }
    return (e + e.adjoint()) * Scalar(0.5);
}

/// 1 - lambda_min(E[bcirc(P_i)]) for explicit row probabilities.
template <typename Scalar>
double contraction_exact(const Tensor3<Scalar>& a, const std::vector<double>& probabilities,
                         double tol = 1e-12, Index cap = kDenseAnalysisCap) {
    const DenseMatrix<Scalar> e = expected_projection(a, probabilities, tol, cap);
    Eigen::SelfAdjointEigenSolver<DenseMatrix<Scalar>> eig(e, Eigen::EigenvaluesOnly);
    return detail::clamp_rate(1.0 - double(eig.eigenvalues().minCoeff()));
}

template <typename Scalar>
double contraction_exact(const Tensor3<Scalar>& a) {
    return contraction_exact(a, std::vector<double>(a.rows(), 1.0 / double(a.rows())));
}

/// Fourier-domain rate for uniform row sampling.
template <typename Scalar>
RateReport contraction_trk(const Tensor3<Scalar>& a, double tol = 1e-12) {
    RateReport r = detail::fourier_spectrum(a, tol);
    r.method = "trk";
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < r.sigma_min.size(); ++k)
        worst = std::min(worst, r.sigma_min[k] * r.sigma_min[k] / (double(a.rows()) * r.inf2_sq[k]));
    r.rho = detail::clamp_rate(1.0 - worst);
    return r;
}

/// Standard block RK rate on the Fourier block-diagonal system with blocks tau_i.
template <typename Scalar>
RateReport contraction_brk(const Tensor3<Scalar>& a, double tol = 1e-12) {
    RateReport r = detail::fourier_spectrum(a, tol);
    r.method = "brk";
    const double smin = *std::min_element(r.sigma_min.begin(), r.sigma_min.end());
    const double inf2 = *std::max_element(r.inf2_sq.begin(), r.inf2_sq.end());
    r.rho = detail::clamp_rate(1.0 - smin * smin / (double(a.rows()) * double(a.depth()) * inf2));
    return r;
}

/// Matrix RK rate under squared-row-norm sampling (uniform when rows are normalized).
template <typename Derived>
double contraction_mrk(const Eigen::MatrixBase<Derived>& a) {
    using Matrix = DenseMatrix<typename Derived::Scalar>;
    const double fro2 = double(a.squaredNorm());
    if (!(fro2 > 0)) return 1.0;
    // sigma_min^2 is the smallest eigenvalue of the smaller Gram matrix.
    const Matrix gram = a.rows() >= a.cols() ? Matrix(a.adjoint() * a) : Matrix(a * a.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
    const double smin2 = std::max(0.0, double(eig.eigenvalues().minCoeff()));
    return detail::clamp_rate(1.0 - smin2 / fro2);
}

/// Error bound initial * rho^(t/2) for t = 0..iterations-1.
inline std::vector<double> bound_curve(double rho, double initial_error, Index iterations) {
    if (!(rho >= 0 && rho <= 1)) throw std::invalid_argument("bound_curve: rho must lie in [0, 1]");
    std::vector<double> curve(std::max<Index>(iterations, 0));
    for (Index t = 0; t < iterations; ++t) curve[t] = initial_error * std::pow(rho, 0.5 * double(t));
    return curve;
}

}  // namespace tprk
