#pragma once

// Randomized Kaczmarz solvers for A X = B.
//
//   mrk_solve                 matrix RK, all right-hand-side columns at once
//   trk_solve                 tensor RK with spatial t-products
//   trk_fourier_solve         tensor RK run slice-by-slice on hat tensors
//   block_mrk_fourier_solve   block RK on the block-diagonal Fourier system,
//                             block tau_i = { k*m + i : k = 0..n-1 }
//
// All tensor solvers share the row-index stream for a given (seed, m, sampling),
// so the three tensor paths produce the same iterates up to rounding.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/QR>

#include "tprk/fourier.hpp"
#include "tprk/projections.hpp"
#include "tprk/random.hpp"
#include "tprk/tensor3.hpp"

namespace tprk {

struct SolverConfig {
    Index iterations = 1000;
    std::uint64_t seed = 0;
    Sampling sampling = Sampling::Uniform;
    /// Stop early once ||A X - B||_F <= residual_tol * ||B||_F (checked at log points).
    std::optional<double> residual_tol;
    Index log_stride = 1;
    /// Relative tolerance for the normal-tube / row-norm invertibility screen.
    double invertibility_tol = 1e-12;

    void validate() const {
        if (iterations < 1) throw std::invalid_argument("SolverConfig: iterations must be >= 1");
        if (log_stride < 1) throw std::invalid_argument("SolverConfig: log_stride must be >= 1");
    }
};

struct IterateRecord {
    Index iteration = 0;
    double rel_error = std::numeric_limits<double>::quiet_NaN();  ///< ||X^t - X*|| / ||X^0 - X*||
    double residual = 0;                                          ///< ||A X^t - B||_F
    std::int64_t elapsed_ns = 0;  ///< cumulative time inside update steps
};

struct IterateLog {
    std::vector<IterateRecord> records;

    const IterateRecord& back() const { return records.back(); }
    std::size_t size() const noexcept { return records.size(); }
};

template <typename Solution>
struct SolveResult {
    Solution solution;
    IterateLog log;
};

/// Rows tau_i of the block-diagonal Fourier system that belong to row slice i.
struct BlockIndexSet {
    Index row = 0;
    std::vector<Index> members;

    static BlockIndexSet of(Index row, Index rows, Index depth) {
        BlockIndexSet s{row, {}};
        s.members.reserve(depth);
        for (Index k = 0; k < depth; ++k) s.members.push_back(k * rows + row);
        return s;
    }
};

namespace detail {

/// Schedules logging and early stopping; times the update callable.
class IterationDriver {
public:
    explicit IterationDriver(const SolverConfig& cfg) : cfg_(cfg) { cfg.validate(); }

    template <typename Sample, typename Step, typename Measure>
    IterateLog run(Sample&& sample, Step&& step, Measure&& measure) {
        using clock = std::chrono::steady_clock;
        IterateLog log;
        std::int64_t elapsed = 0;
        auto record = [&](Index t) {
            IterateRecord r = measure();
            r.iteration = t;
            r.elapsed_ns = elapsed;
            log.records.push_back(r);
            return r;
        };
        record(0);
        for (Index t = 1; t <= cfg_.iterations; ++t) {
            const Index i = sample();
            const auto start = clock::now();
            step(i);
            elapsed += std::chrono::duration_cast<std::chrono::nanoseconds>(clock::now() - start).count();
            if (t % cfg_.log_stride == 0 || t == cfg_.iterations) {
                const IterateRecord r = record(t);
                if (cfg_.residual_tol && stop_scale_ >= 0 && r.residual <= *cfg_.residual_tol * stop_scale_)
                    break;
            }
        }
        return log;
    }

    /// ||B||_F, the scale for the residual stopping rule.
    void set_stop_scale(double s) { stop_scale_ = s; }

private:
    const SolverConfig& cfg_;
    double stop_scale_ = -1;
};

inline RowSampler make_sampler(Sampling sampling, const std::vector<double>& sq_norms) {
    return sampling == Sampling::Uniform ? RowSampler::uniform(sq_norms.size())
                                         : RowSampler::weighted(sq_norms);
}

template <typename Scalar>
std::vector<double> row_slice_sq_norms(const Tensor3<Scalar>& a) {
    std::vector<double> w(a.rows());
    for (Index i = 0; i < a.rows(); ++i) w[i] = double(a.storage().row(i).squaredNorm());
    return w;
}

template <typename Scalar>
void check_system(const Tensor3<Scalar>& a, const Tensor3<Scalar>& b, const Tensor3<Scalar>& x0,
                  const Tensor3<Scalar>* truth) {
    if (a.depth() != b.depth() || a.depth() != x0.depth())
        throw DimensionMismatch("system tensors must share tube length");
    if (a.rows() != b.rows()) throw DimensionMismatch("A and B must have the same row count");
    if (x0.rows() != a.cols() || x0.cols() != b.cols())
        throw DimensionMismatch("initial iterate has the wrong shape");
    if (truth && !truth->same_shape(x0)) throw DimensionMismatch("truth has the wrong shape");
}

/// Throws NotInvertible for the first row whose normal tube fails the screen.
template <typename Scalar>
void require_invertible_rows(const Tensor3<Scalar>& a_hat, double tol) {
    for (Index i = 0; i < a_hat.rows(); ++i) {
        Index worst = 0;
        const RowInvertibility r =
            screen_spectrum(i, normal_spectrum(a_hat, i).template cast<double>(), tol, &worst);
        if (!r.passes) throw NotInvertible(i, worst, r.min_coefficient);
    }
}

/// ||X - X*||_F and ||A X - B||_F for side-by-side hat storage (Parseval, 1/sqrt(n)).
template <typename Matrix>
IterateRecord measure_hat(const Matrix& a_hat, const Matrix& x_hat, const Matrix& b_hat,
                          const Matrix* truth_hat, double e0, Index l, Index p, Index n) {
    IterateRecord r;
    const double scale = 1.0 / std::sqrt(double(n));
    if (truth_hat) r.rel_error = (x_hat - *truth_hat).norm() * scale / e0;
    double res2 = 0;
    for (Index k = 0; k < n; ++k)
        res2 += (a_hat.middleCols(k * l, l) * x_hat.middleCols(k * p, p) - b_hat.middleCols(k * p, p))
                    .squaredNorm();
    r.residual = std::sqrt(res2) * scale;
    return r;
}

inline double safe_denominator(double e0) { return e0 > 0 ? e0 : 1.0; }

}  // namespace detail

/// ||A*X - B||_F, evaluated with the FFT t-product.
template <typename Scalar>
double residual(const Tensor3<Scalar>& a, const Tensor3<Scalar>& x, const Tensor3<Scalar>& b) {
    const Tensor3<Scalar> ax = tprod_fft(a, x);
    if (!ax.same_shape(b)) throw DimensionMismatch("residual: B has the wrong shape");
    return double(frobenius_norm(ax - b));
}

/// Matrix randomized Kaczmarz,
///     X <- X - A_i^* (A_i X - B_i) / ||A_i||^2,
/// applied to all columns of B simultaneously.
template <typename Scalar>
SolveResult<DenseMatrix<Scalar>> mrk_solve(const DenseMatrix<Scalar>& a, const DenseMatrix<Scalar>& b,
                                           const DenseMatrix<Scalar>& x0, const SolverConfig& cfg,
                                           const DenseMatrix<Scalar>* truth = nullptr) {
    using Matrix = DenseMatrix<Scalar>;
    if (a.rows() != b.rows() || x0.rows() != a.cols() || x0.cols() != b.cols())
        throw DimensionMismatch("mrk_solve: nonconforming system");
    if (truth && (truth->rows() != x0.rows() || truth->cols() != x0.cols()))
        throw DimensionMismatch("mrk_solve: truth has the wrong shape");

    const Matrix a_adj = a.adjoint();  // column i is A_i^*, contiguous
    std::vector<double> sq(a.rows());
    for (Index i = 0; i < a.rows(); ++i) sq[i] = double(a_adj.col(i).squaredNorm());
    const double max_sq = *std::max_element(sq.begin(), sq.end());
    const double zero_cut = cfg.invertibility_tol * cfg.invertibility_tol * max_sq;

    Matrix x = x0;
    const double e0 = truth ? detail::safe_denominator((x0 - *truth).norm()) : 1.0;
    Rng rng(cfg.seed);
    const RowSampler sampler = detail::make_sampler(cfg.sampling, sq);

    detail::IterationDriver driver(cfg);
    driver.set_stop_scale(b.norm());
    IterateLog log = driver.run(
        [&] { return Index(sampler.sample(rng)); },
        [&](Index i) {
            if (!(sq[i] > zero_cut)) throw ZeroRow(i);
            const auto ai = a_adj.col(i);
            const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> r =
                (ai.adjoint() * x - b.row(i)) / Scalar(sq[i]);
            x.noalias() -= ai * r;
        },
        [&] {
            IterateRecord r;
            if (truth) r.rel_error = (x - *truth).norm() / e0;
            r.residual = (a * x - b).norm();
            return r;
        });
    return {std::move(x), std::move(log)};
}

/// One tensor RK projection onto { X : A_i X = B_i }:
///     X - A_i^* (A_i A_i^*)^{-1} (A_i X - B_i),   all products spatial t-products.
template <typename Scalar>
Tensor3<Scalar> trk_step(const Tensor3<Scalar>& a, const Tensor3<Scalar>& b, const Tensor3<Scalar>& x,
                         Index i, double tol = 1e-12) {
    const Tensor3<Scalar> ai = row_slice(a, i);
    const Tensor3<Scalar> ai_adj = transpose(ai);
    TubeFiber<Scalar> w(Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(1));
    try {
        w = tube_inverse(TubeFiber<Scalar>(tprod(ai, ai_adj)), tol);
    } catch (const NotInvertible& e) {
        throw NotInvertible(i, e.coefficient(), e.magnitude());
    }
    const Tensor3<Scalar> r = tprod(ai, x) - row_slice(b, i);
    return x - tprod(ai_adj, tprod(w.as_tensor(), r));
}

/// Tensor RK with spatial t-products. Every row's normal tube is inverted up
/// front, so a non-invertible row fails before any iteration runs.
template <typename Scalar>
SolveResult<Tensor3<Scalar>> trk_solve(const Tensor3<Scalar>& a, const Tensor3<Scalar>& b,
                                       const Tensor3<Scalar>& x0, const SolverConfig& cfg,
                                       const Tensor3<Scalar>* truth = nullptr) {
    detail::check_system(a, b, x0, truth);
    const Index m = a.rows();

    struct RowData {
        Tensor3<Scalar> row, adjoint, inverse_normal, rhs;
    };
    std::vector<RowData> rows;
    rows.reserve(m);
    for (Index i = 0; i < m; ++i) {
        Tensor3<Scalar> ai = row_slice(a, i);
        Tensor3<Scalar> adj = transpose(ai);
        Tensor3<Scalar> w(1, 1, a.depth());
        try {
            w = tube_inverse(TubeFiber<Scalar>(tprod(ai, adj)), cfg.invertibility_tol).as_tensor();
        } catch (const NotInvertible& e) {
            throw NotInvertible(i, e.coefficient(), e.magnitude());
        }
        rows.push_back({std::move(ai), std::move(adj), std::move(w), row_slice(b, i)});
    }

    Tensor3<Scalar> x = x0;
    const double e0 = truth ? detail::safe_denominator(double(frobenius_norm(x0 - *truth))) : 1.0;
    Rng rng(cfg.seed);
    const RowSampler sampler = detail::make_sampler(cfg.sampling, detail::row_slice_sq_norms(a));

    detail::IterationDriver driver(cfg);
    driver.set_stop_scale(double(frobenius_norm(b)));
    IterateLog log = driver.run(
        [&] { return Index(sampler.sample(rng)); },
        [&](Index i) {
            const RowData& d = rows[i];
            const Tensor3<Scalar> r = tprod(d.row, x) - d.rhs;
            x = x - tprod(d.adjoint, tprod(d.inverse_normal, r));
        },
        [&] {
            IterateRecord r;
            if (truth) r.rel_error = double(frobenius_norm(x - *truth)) / e0;
            r.residual = residual(a, x, b);
            return r;
        });
    return {std::move(x), std::move(log)};
}

/// Tensor RK in the Fourier domain: per iteration every slice k takes the
/// rank-one pseudoinverse step
///     X_hat_k <- X_hat_k - a^* (a X_hat_k - b) / (a a^*),  a = row i of A_hat_k.
template <typename Scalar>
SolveResult<Tensor3<Scalar>> trk_fourier_solve(const Tensor3<Scalar>& a, const Tensor3<Scalar>& b,
                                               const Tensor3<Scalar>& x0, const SolverConfig& cfg,
                                               const Tensor3<Scalar>* truth = nullptr) {
    using Matrix = DenseMatrix<Scalar>;
    using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;
    detail::check_system(a, b, x0, truth);
    const Index m = a.rows(), l = a.cols(), p = b.cols(), n = a.depth();

    const Matrix a_hat = mode3_dft(a).storage();
    const Matrix b_hat = mode3_dft(b).storage();
    Matrix x_hat = mode3_dft(x0).storage();
    std::optional<Matrix> truth_hat;
    if (truth) truth_hat = mode3_dft(*truth).storage();
    detail::require_invertible_rows(Tensor3<Scalar>(a_hat, n), cfg.invertibility_tol);

    // Conjugated Fourier rows (column k*m + i) and reciprocal normal coefficients.
    const bool cache = double(m) * double(n) * double(l) < 1e7;
    Matrix rows_adj;
    Eigen::MatrixXd inv_norm(m, n);
    if (cache) rows_adj.resize(l, m * n);
    for (Index k = 0; k < n; ++k)
        for (Index i = 0; i < m; ++i) {
            const auto row = a_hat.block(i, k * l, 1, l);
            inv_norm(i, k) = 1.0 / double(row.squaredNorm());
            if (cache) rows_adj.col(k * m + i) = row.adjoint();
        }

    // Measured in the same domain as the iterates so that t = 0 gives exactly 1.
    const double e0 =
        truth ? detail::safe_denominator((x_hat - *truth_hat).norm() * (1.0 / std::sqrt(double(n)))) : 1.0;
    Rng rng(cfg.seed);
    const RowSampler sampler = detail::make_sampler(cfg.sampling, detail::row_slice_sq_norms(a));

    detail::IterationDriver driver(cfg);
    driver.set_stop_scale(double(frobenius_norm(b)));
    IterateLog log = driver.run(
        [&] { return Index(sampler.sample(rng)); },
        [&](Index i) {
            for (Index k = 0; k < n; ++k) {
                auto xk = x_hat.middleCols(k * p, p);
                const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> a_adj =
                    cache ? Eigen::Matrix<Scalar, Eigen::Dynamic, 1>(rows_adj.col(k * m + i))
                          : Eigen::Matrix<Scalar, Eigen::Dynamic, 1>(a_hat.block(i, k * l, 1, l).adjoint());
                const RowVector r =
                    (a_adj.adjoint() * xk - b_hat.block(i, k * p, 1, p)) * Scalar(inv_norm(i, k));
                xk.noalias() -= a_adj * r;
            }
        },
        [&] {
            return detail::measure_hat(a_hat, x_hat, b_hat, truth_hat ? &*truth_hat : nullptr, e0, l, p, n);
        });
    return {mode3_idft(Tensor3<Scalar>(std::move(x_hat), n)), std::move(log)};
}

/// Block RK on bdiag(A_hat) unfold(X_hat) = unfold(B_hat). Each iteration forms
/// the n x (l*n) row block tau_i and applies its Moore-Penrose pseudoinverse
/// through a complete orthogonal decomposition; no block structure is exploited
/// beyond knowing which entries of the block are nonzero.
template <typename Scalar>
SolveResult<Tensor3<Scalar>> block_mrk_fourier_solve(const Tensor3<Scalar>& a, const Tensor3<Scalar>& b,
                                                     const Tensor3<Scalar>& x0, const SolverConfig& cfg,
                                                     const Tensor3<Scalar>* truth = nullptr) {
    using Matrix = DenseMatrix<Scalar>;
    detail::check_system(a, b, x0, truth);
    const Index m = a.rows(), l = a.cols(), p = b.cols(), n = a.depth();

    const FourierBlocks<Scalar> blocks = bdiag(a);
    const Matrix b_unf = unfold(mode3_dft(b));
    Matrix x_unf = unfold(mode3_dft(x0));
    std::optional<Matrix> truth_unf;
    if (truth) truth_unf = unfold(mode3_dft(*truth));
    detail::require_invertible_rows(mode3_dft(a), cfg.invertibility_tol);

    const double scale = 1.0 / std::sqrt(double(n));
    const double e0 = truth ? detail::safe_denominator((x_unf - *truth_unf).norm() * scale) : 1.0;
    Rng rng(cfg.seed);
    const RowSampler sampler = detail::make_sampler(cfg.sampling, detail::row_slice_sq_norms(a));

    Matrix block(n, l * n);
    Matrix rhs(n, p);
    detail::IterationDriver driver(cfg);
    driver.set_stop_scale(double(frobenius_norm(b)));
    IterateLog log = driver.run(
        [&] { return Index(sampler.sample(rng)); },
        [&](Index i) {
            const BlockIndexSet tau = BlockIndexSet::of(i, m, n);
            block.setZero();
            for (Index r = 0; r < n; ++r) {
                // Row tau[r] = r*m + i of bdiag(A_hat) is nonzero only in block column r.
                block.block(r, r * l, 1, l) = blocks.blocks[r].row(i);
                rhs.row(r) = b_unf.row(tau.members[r]);
            }
            const Matrix resid = block * x_unf - rhs;
            x_unf -= block.completeOrthogonalDecomposition().solve(resid);
        },
        [&] {
            IterateRecord r;
            if (truth_unf) r.rel_error = (x_unf - *truth_unf).norm() * scale / e0;
            double res2 = 0;
            for (Index k = 0; k < n; ++k)
                res2 += (blocks.blocks[k] * x_unf.middleRows(k * l, l) - b_unf.middleRows(k * m, m))
                            .squaredNorm();
            r.residual = std::sqrt(res2) * scale;
            return r;
        });
    return {mode3_idft(fold(x_unf, n)), std::move(log)};
}

}  // namespace tprk
