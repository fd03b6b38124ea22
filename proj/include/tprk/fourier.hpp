#pragma once

// Mode-3 DFT ("hat" operator) and the Fourier-domain t-product.
//
// Convention: the hat is the unnormalized forward DFT of every tube fiber,
// X_hat(i,j,k) = sum_q X(i,j,q) exp(-2 pi i q k / n). With the unitary DFT
// matrix F_n this gives
//     (F_n (x) I_m) bcirc(M) (F_n^* (x) I_l) = blockdiag(M_hat_0, ..., M_hat_{n-1}).

#include <vector>

#include "tprk/tensor3.hpp"

namespace tprk {

namespace detail {

template <typename Scalar>
Tensor3<Scalar> mode3_transform(const Tensor3<Scalar>& t, bool inverse) {
    using Matrix = DenseMatrix<Scalar>;
    using Real = typename Tensor3<Scalar>::RealScalar;
    const Index tubes = t.rows() * t.cols();
    const Index n = t.depth();
    if (n == 1) return t;  // kissfft rejects length 1
    // The slice storage, read as a (m*l) x n matrix, has one tube per row.
    Eigen::Map<const Matrix> flat(t.storage().data(), tubes, n);
    Matrix src = flat.transpose();
    Matrix dst(n, tubes);
    Eigen::FFT<Real> fft;
    for (Index c = 0; c < tubes; ++c) {
        if (inverse)
            fft.inv(dst.col(c).data(), src.col(c).data(), n);
        else
            fft.fwd(dst.col(c).data(), src.col(c).data(), n);
    }
    Matrix back = dst.transpose();
    return Tensor3<Scalar>(Matrix(Eigen::Map<Matrix>(back.data(), t.rows(), t.cols() * n)), n);
}

}  // namespace detail

/// Unnormalized forward DFT along every tube fiber.
template <typename Scalar>
Tensor3<Scalar> mode3_dft(const Tensor3<Scalar>& t) {
    return detail::mode3_transform(t, false);
}

/// Inverse of mode3_dft (carries the 1/n factor).
template <typename Scalar>
Tensor3<Scalar> mode3_idft(const Tensor3<Scalar>& t) {
    return detail::mode3_transform(t, true);
}

/// The n frontal slices of a hat tensor, i.e. the diagonal blocks of bdiag(M_hat).
template <typename Scalar>
struct FourierBlocks {
    using Matrix = DenseMatrix<Scalar>;

    Index rows = 0;
    Index cols = 0;
    std::vector<Matrix> blocks;

    Index depth() const noexcept { return static_cast<Index>(blocks.size()); }

    /// Dense (m*n) x (l*n) block-diagonal matrix.
    Matrix block_diagonal() const {
        Matrix out = Matrix::Zero(rows * depth(), cols * depth());
        for (Index k = 0; k < depth(); ++k) out.block(k * rows, k * cols, rows, cols) = blocks[k];
        return out;
    }
};

template <typename Scalar>
FourierBlocks<Scalar> bdiag(const Tensor3<Scalar>& t) {
    const Tensor3<Scalar> hat = mode3_dft(t);
    FourierBlocks<Scalar> fb{t.rows(), t.cols(), {}};
    fb.blocks.reserve(t.depth());
    for (Index k = 0; k < t.depth(); ++k) fb.blocks.emplace_back(hat.slice(k));
    return fb;
}

/// Slice-by-slice matrix product of two hat tensors.
template <typename Scalar>
Tensor3<Scalar> slicewise_product(const Tensor3<Scalar>& a_hat, const Tensor3<Scalar>& b_hat) {
    if (a_hat.cols() != b_hat.rows() || a_hat.depth() != b_hat.depth())
        throw DimensionMismatch("slicewise_product: nonconforming hat tensors");
    const Index n = a_hat.depth(), p = b_hat.cols();
    DenseMatrix<Scalar> out(a_hat.rows(), p * n);
    for (Index k = 0; k < n; ++k) out.middleCols(k * p, p).noalias() = a_hat.slice(k) * b_hat.slice(k);
    return Tensor3<Scalar>(std::move(out), n);
}

/// t-product through the Fourier domain: idft(A_hat_k * B_hat_k).
template <typename Scalar>
Tensor3<Scalar> tprod_fft(const Tensor3<Scalar>& a, const Tensor3<Scalar>& b) {
    if (a.cols() != b.rows() || a.depth() != b.depth())
        throw DimensionMismatch("tprod_fft: nonconforming operands");
    return mode3_idft(slicewise_product(mode3_dft(a), mode3_dft(b)));
}

}  // namespace tprk
