#pragma once

// Test-only reference constructions. These are built from definitions with
// dense matrices and never call the library's FFT or slice-convolution paths.

#include <cmath>
#include <complex>
#include <numbers>

#include <Eigen/Dense>

#include "tprk/random.hpp"
#include "tprk/tensor3.hpp"

namespace tprk::oracle {

using cd = std::complex<double>;

/// Complex Gaussian test tensor (real and imaginary parts i.i.d. N(0,1)).
inline Tensor3cd random_tensor(Rng& rng, Index m, Index l, Index n) {
    return Tensor3cd::generate(m, l, n, [&](Index, Index, Index) { return cd(rng.normal(), rng.normal()); });
}

inline Tensor3cd real_random_tensor(Rng& rng, Index m, Index l, Index n) {
    return Tensor3cd::generate(m, l, n, [&](Index, Index, Index) { return cd(rng.normal(), 0.0); });
}

inline Index random_dim(Rng& rng, Index max) { return 1 + Index(rng.uniform_index(std::uint64_t(max))); }

/// circ(v): entry (r, c) is v[(r - c) mod n].
inline MatrixXcd circ(const Eigen::VectorXcd& v) {
    const Index n = v.size();
    MatrixXcd c(n, n);
    for (Index r = 0; r < n; ++r)
        for (Index col = 0; col < n; ++col) c(r, col) = v[(r - col + n) % n];
    return c;
}

inline MatrixXcd kron(const MatrixXcd& a, const MatrixXcd& b) {
    MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

/// bcirc(M) = sum_i circ(e_i) (x) M_i.
inline MatrixXcd bcirc_kron_oracle(const Tensor3cd& t) {
    const Index n = t.depth();
    MatrixXcd out = MatrixXcd::Zero(t.rows() * n, t.cols() * n);
    for (Index i = 0; i < n; ++i) {
        Eigen::VectorXcd e = Eigen::VectorXcd::Zero(n);
        e[i] = 1.0;
        out += kron(circ(e), MatrixXcd(t.slice(i)));
    }
    return out;
}

/// Unitary DFT matrix, F(j,k) = exp(-2 pi i j k / n) / sqrt(n).
inline MatrixXcd unitary_dft(Index n) {
    MatrixXcd f(n, n);
    for (Index j = 0; j < n; ++j)
        for (Index k = 0; k < n; ++k)
            f(j, k) = std::polar(1.0 / std::sqrt(double(n)), -2.0 * std::numbers::pi * double(j * k) / double(n));
    return f;
}

/// Diagonal blocks of (F_n (x) I_m) bcirc(t) (F_n^* (x) I_l), plus the full transformed matrix.
inline MatrixXcd similarity_transform(const Tensor3cd& t) {
    const MatrixXcd f = unitary_dft(t.depth());
    const MatrixXcd left = kron(f, MatrixXcd::Identity(t.rows(), t.rows()));
    const MatrixXcd right = kron(MatrixXcd(f.adjoint()), MatrixXcd::Identity(t.cols(), t.cols()));
    return left * oracle::bcirc_kron_oracle(t) * right;
}

/// O(n^2) unnormalized DFT of a vector.
inline Eigen::VectorXcd naive_dft(const Eigen::VectorXcd& v) {
    const MatrixXcd f = unitary_dft(v.size()) * std::sqrt(double(v.size()));
    return f * v;
}

/// Orthogonal projector onto the row space of m: pinv(m) * m.
inline MatrixXcd row_space_projector(const MatrixXcd& m) {
    return m.completeOrthogonalDecomposition().pseudoInverse() * m;
}

inline double rel_diff(const MatrixXcd& a, const MatrixXcd& b) {
    const double scale = std::max({a.norm(), b.norm(), 1e-300});
    return (a - b).norm() / scale;
}

inline double rel_diff(const Tensor3cd& a, const Tensor3cd& b) { return rel_diff(a.storage(), b.storage()); }

}  // namespace tprk::oracle
