#include <algorithm>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tprk/harness.hpp"
#include "tprk/solvers.hpp"

using namespace tprk;
using cd = std::complex<double>;

namespace {

struct System {
    Tensor3cd a, x, b;
};

System gaussian_system(Index m, Index l, Index n, Index p, std::uint64_t seed) {
    System s{gen_gaussian_tensor(m, l, n, derive_seed(seed, 1)), gen_gaussian_tensor(l, p, n, derive_seed(seed, 2)),
             Tensor3cd(1, 1, 1)};
    s.b = tprod(s.a, s.x);
    return s;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

SolverConfig config(Index iterations, std::uint64_t seed, Index stride = 1) {
    SolverConfig c;
    c.iterations = iterations;
    c.seed = seed;
    c.log_stride = stride;
    return c;
}

}  // namespace

TEST(Mrk, IdentitySolvedOnceEveryRowIsDrawn) {
    const MatrixXcd a = MatrixXcd::Identity(2, 2);
    MatrixXcd b(2, 1);
    b << 4.0, -1.0;
    const auto r = mrk_solve<cd>(a, b, MatrixXcd::Zero(2, 1), config(50, 1));
    EXPECT_LT((r.solution - b).norm(), 1e-15);
}

TEST(Mrk, ScalarSystemOneStep) {
    MatrixXcd a(1, 1), b(1, 1), truth(1, 1);
    a << 2.0;
    b << 6.0;
    truth << 3.0;
    const auto r = mrk_solve<cd>(a, b, MatrixXcd::Zero(1, 1), config(1, 0), &truth);
    EXPECT_NEAR(std::abs(r.solution(0, 0) - cd(3.0)), 0.0, 1e-15);
    EXPECT_EQ(r.log.back().rel_error, 0.0);
}

TEST(Mrk, GaussianConvergesInMedian) {
    std::vector<double> errs;
    for (std::uint64_t s = 0; s < 20; ++s) {
        const MatrixXcd a = gen_gaussian_matrix(200, 20, derive_seed(s, 1));
        const MatrixXcd x = gen_gaussian_matrix(20, 1, derive_seed(s, 2));
        const MatrixXcd b = a * x;
        const auto r = mrk_solve<cd>(a, b, MatrixXcd::Zero(20, 1), config(10000, s, 10000), &x);
        errs.push_back(r.log.back().rel_error);
    }
    EXPECT_LT(median(errs), 1e-6);
}

TEST(Mrk, ZeroRowThrowsWhenSampled) {
    MatrixXcd a = MatrixXcd::Identity(3, 3);
    a(2, 2) = 0.0;
    try {
        mrk_solve<cd>(a, MatrixXcd::Zero(3, 1), MatrixXcd::Zero(3, 1), config(100, 1));
        FAIL() << "expected ZeroRow";
    } catch (const ZeroRow& e) {
        EXPECT_EQ(e.row(), 2);
    }
}

TEST(Mrk, RejectsNonconformingSystem) {
    EXPECT_THROW(mrk_solve<cd>(MatrixXcd::Identity(2, 2), MatrixXcd::Zero(3, 1), MatrixXcd::Zero(2, 1), config(1, 0)),
                 DimensionMismatch);
}

TEST(TrkStep, FixedPointWhenRowIsSatisfied) {
    const System s = gaussian_system(4, 3, 5, 2, 1);
    EXPECT_LT(oracle::rel_diff(trk_step(s.a, s.b, s.x, 2), s.x), 1e-12);
}

TEST(TrkStep, IdentityReplacesRowSlice) {
    Rng rng(2);
    const Tensor3cd a = identity(2, 3);
    const Tensor3cd b = oracle::random_tensor(rng, 2, 2, 3);
    const Tensor3cd x = oracle::random_tensor(rng, 2, 2, 3);
    const Tensor3cd next = trk_step(a, b, x, 0);
    EXPECT_LT(oracle::rel_diff(row_slice(next, 0), row_slice(b, 0)), 1e-14);
    EXPECT_LT(oracle::rel_diff(row_slice(next, 1), row_slice(x, 1)), 1e-14);
}

TEST(TrkStep, MatchesDenseProjectionAndSatisfiesRow) {
    Rng rng(3);
    for (int trial = 0; trial < 30; ++trial) {
        const Index m = oracle::random_dim(rng, 5), l = oracle::random_dim(rng, 6), n = oracle::random_dim(rng, 6),
                    p = oracle::random_dim(rng, 3);
        const Tensor3cd a = oracle::random_tensor(rng, m, l, n);
        const Tensor3cd b = tprod(a, oracle::random_tensor(rng, l, p, n));
        const Tensor3cd x = oracle::random_tensor(rng, l, p, n);
        const Index i = Index(rng.uniform_index(std::uint64_t(m)));
        const Tensor3cd next = trk_step(a, b, x, i);

        const Tensor3cd bi = row_slice(b, i);
        const double res = frobenius_norm(tprod(row_slice(a, i), next) - bi);
        EXPECT_LE(res, 1e-8 * frobenius_norm(bi));

        // x - pinv(M) (M x - b) with M = bcirc(A_i), on the unfolded iterate
        const MatrixXcd big = oracle::bcirc_kron_oracle(row_slice(a, i));
        const MatrixXcd ux = unfold(x);
        const MatrixXcd expected =
            ux - big.completeOrthogonalDecomposition().pseudoInverse() * (big * ux - unfold(bi));
        EXPECT_LT(oracle::rel_diff(unfold(next), expected), 1e-10);
    }
}

TEST(TrkStep, NotInvertibleRowIsReported) {
    const Tensor3cd a = Tensor3cd::generate(2, 1, 2, [](Index i, Index, Index) { return cd(i == 1 ? 1.0 : 0.5, 0); });
    Tensor3cd ok = Tensor3cd::generate(2, 1, 2, [](Index i, Index, Index k) { return cd(i == 0 && k == 0 ? 1.0 : 0.0, 0); });
    try {
        trk_step(a, a, Tensor3cd(1, 2, 2), 1);
        FAIL() << "expected NotInvertible";
    } catch (const NotInvertible& e) {
        EXPECT_EQ(e.row(), 1);
    }
    EXPECT_NO_THROW(trk_step(ok, ok, Tensor3cd(1, 1, 2), 0));
}

TEST(TrkSolve, IdentitySolvedOnceEveryRowIsDrawn) {
    Rng rng(4);
    const Tensor3cd a = identity(3, 2);
    const Tensor3cd b = oracle::random_tensor(rng, 3, 2, 2);
    const auto r = trk_solve(a, b, Tensor3cd(3, 2, 2), config(100, 5), &b);
    EXPECT_LT(r.log.back().rel_error, 1e-14);
    EXPECT_LT(oracle::rel_diff(r.solution, b), 1e-14);
}

TEST(TrkSolve, GaussianMedianReachesTolerance) {
    std::vector<double> errs;
    for (std::uint64_t s = 0; s < 20; ++s) {
        const System sys = gaussian_system(100, 15, 10, 30, s);
        const auto r = trk_fourier_solve(sys.a, sys.b, Tensor3cd(15, 30, 10), config(5000, s, 5000), &sys.x);
        errs.push_back(r.log.back().rel_error);
    }
    EXPECT_LT(median(errs), 1e-4);

    // One seed end to end through the spatial path as well.
    const System sys = gaussian_system(100, 15, 10, 30, 0);
    const auto r = trk_solve(sys.a, sys.b, Tensor3cd(15, 30, 10), config(5000, 0, 5000), &sys.x);
    EXPECT_LT(r.log.back().rel_error, 1e-4);
}

TEST(TrkSolve, UpfrontInvertibilityCheck) {
    Tensor3cd a = Tensor3cd::generate(3, 1, 2, [](Index, Index, Index) { return cd(1.0); });
    try {
        trk_solve(a, a, Tensor3cd(1, 1, 2), config(1, 0));
        FAIL() << "expected NotInvertible";
    } catch (const NotInvertible& e) {
        EXPECT_EQ(e.row(), 0);
    }
    EXPECT_THROW(trk_fourier_solve(a, a, Tensor3cd(1, 1, 2), config(1, 0)), NotInvertible);
    EXPECT_THROW(block_mrk_fourier_solve(a, a, Tensor3cd(1, 1, 2), config(1, 0)), NotInvertible);
}

TEST(TrkSolve, RejectsNonconformingSystem) {
    const Tensor3cd a = identity(3, 2);
    EXPECT_THROW(trk_solve(a, Tensor3cd(2, 1, 2), Tensor3cd(3, 1, 2), config(1, 0)), DimensionMismatch);
    EXPECT_THROW(trk_fourier_solve(a, Tensor3cd(3, 1, 2), Tensor3cd(3, 2, 2), config(1, 0)), DimensionMismatch);
    EXPECT_THROW(block_mrk_fourier_solve(a, Tensor3cd(3, 1, 3), Tensor3cd(3, 1, 3), config(1, 0)),
                 DimensionMismatch);
    SolverConfig bad = config(0, 0);
    EXPECT_THROW(trk_solve(a, Tensor3cd(3, 1, 2), Tensor3cd(3, 1, 2), bad), std::invalid_argument);
}

TEST(Paths, TrajectoriesAgree) {
    for (std::uint64_t s = 0; s < 3; ++s) {
        const System sys = gaussian_system(20, 6, 4, 3, s);
        const Tensor3cd x0(6, 3, 4);
        const auto spatial = trk_solve(sys.a, sys.b, x0, config(300, s), &sys.x);
        const auto fourier = trk_fourier_solve(sys.a, sys.b, x0, config(300, s), &sys.x);
        const auto block = block_mrk_fourier_solve(sys.a, sys.b, x0, config(300, s), &sys.x);
        ASSERT_EQ(spatial.log.size(), fourier.log.size());
        ASSERT_EQ(spatial.log.size(), block.log.size());
        for (std::size_t t = 0; t < spatial.log.size(); ++t) {
            const double e = spatial.log.records[t].rel_error;
            EXPECT_LE(std::abs(fourier.log.records[t].rel_error - e), 1e-9 * e) << "t=" << t;
            EXPECT_LE(std::abs(block.log.records[t].rel_error - e), 1e-9 * e) << "t=" << t;
            const double r = spatial.log.records[t].residual;
            EXPECT_NEAR(fourier.log.records[t].residual, r, 1e-9 * r + 1e-13 * frobenius_norm(sys.b));
        }
        EXPECT_LT(oracle::rel_diff(spatial.solution, fourier.solution), 1e-10);
        EXPECT_LT(oracle::rel_diff(spatial.solution, block.solution), 1e-10);
    }
}

TEST(Paths, DepthOneIsMatrixKaczmarz) {
    const System sys = gaussian_system(30, 5, 1, 2, 7);
    const auto t = trk_fourier_solve(sys.a, sys.b, Tensor3cd(5, 2, 1), config(200, 3), &sys.x);
    const auto blk = block_mrk_fourier_solve(sys.a, sys.b, Tensor3cd(5, 2, 1), config(200, 3), &sys.x);
    const MatrixXcd truth = sys.x.storage();
    const auto m = mrk_solve<cd>(sys.a.storage(), sys.b.storage(), MatrixXcd::Zero(5, 2), config(200, 3), &truth);
    ASSERT_EQ(t.log.size(), m.log.size());
    for (std::size_t k = 0; k < t.log.size(); ++k) {
        EXPECT_NEAR(t.log.records[k].rel_error, m.log.records[k].rel_error, 1e-12);
        EXPECT_NEAR(blk.log.records[k].rel_error, m.log.records[k].rel_error, 1e-12);
    }
    EXPECT_LT(oracle::rel_diff(t.solution.storage(), m.solution), 1e-12);
}

TEST(Paths, FourierSliceConstraintAfterOneStep) {
    const System sys = gaussian_system(10, 4, 5, 2, 8);
    const Tensor3cd x0(4, 2, 5);
    const auto r = trk_fourier_solve(sys.a, sys.b, x0, config(1, 11));
    // Rebuild which row was sampled from the same stream.
    Rng rng(11);
    const Index i = Index(RowSampler::uniform(10).sample(rng));
    const Tensor3cd a_hat = mode3_dft(sys.a), b_hat = mode3_dft(sys.b), x_hat = mode3_dft(r.solution);
    for (Index k = 0; k < 5; ++k) {
        const MatrixXcd lhs = a_hat.slice(k).row(i) * x_hat.slice(k);
        const MatrixXcd rhs = b_hat.slice(k).row(i);
        EXPECT_LT((lhs - rhs).norm(), 1e-8 * rhs.norm());
    }
}

TEST(Paths, BlockPseudoInverseIsSliceWiseTensorPseudoInverse) {
    Rng rng(12);
    const Index m = 3, l = 4, n = 5;
    const Tensor3cd a = oracle::random_tensor(rng, m, l, n);
    const Index i = 1;
    const FourierBlocks<cd> fb = bdiag(a);
    MatrixXcd block = MatrixXcd::Zero(n, l * n);
    for (Index k = 0; k < n; ++k) block.block(k, k * l, 1, l) = fb.blocks[k].row(i);
    const MatrixXcd pinv = block.completeOrthogonalDecomposition().pseudoInverse();
    // hat of A_i^* (A_i A_i^*)^{-1}, slice by slice
    const Tensor3cd ai = row_slice(a, i);
    const Tensor3cd w = tube_inverse(TubeFiber<cd>(tprod(ai, transpose(ai)))).as_tensor();
    const MatrixXcd expected = bdiag(tprod(transpose(ai), w)).block_diagonal();
    EXPECT_LT(oracle::rel_diff(pinv, expected), 1e-10);
    const BlockIndexSet tau = BlockIndexSet::of(i, m, n);
    ASSERT_EQ(tau.members.size(), std::size_t(n));
    for (Index k = 0; k < n; ++k) EXPECT_EQ(tau.members[k], k * m + i);
}

TEST(Monotonicity, ErrorNeverIncreases) {
    for (std::uint64_t s = 0; s < 5; ++s) {
        const System sys = gaussian_system(40, 8, 4, 3, 100 + s);
        SolverConfig c = config(400, s);
        for (Sampling sampling : {Sampling::Uniform, Sampling::SquaredNorm}) {
            c.sampling = sampling;
            const auto r = trk_fourier_solve(sys.a, sys.b, Tensor3cd(8, 3, 4), c, &sys.x);
            for (std::size_t t = 1; t < r.log.size(); ++t)
                EXPECT_LE(r.log.records[t].rel_error, r.log.records[t - 1].rel_error + 1e-12);
        }
    }
}

TEST(Determinism, SameSeedSameLog) {
    const System sys = gaussian_system(30, 6, 4, 2, 9);
    const auto a = trk_fourier_solve(sys.a, sys.b, Tensor3cd(6, 2, 4), config(200, 4, 7), &sys.x);
    const auto b = trk_fourier_solve(sys.a, sys.b, Tensor3cd(6, 2, 4), config(200, 4, 7), &sys.x);
    ASSERT_EQ(a.log.size(), b.log.size());
    for (std::size_t t = 0; t < a.log.size(); ++t) {
        EXPECT_EQ(a.log.records[t].iteration, b.log.records[t].iteration);
        EXPECT_EQ(a.log.records[t].rel_error, b.log.records[t].rel_error);
        EXPECT_EQ(a.log.records[t].residual, b.log.records[t].residual);
    }
    EXPECT_EQ(a.solution.storage(), b.solution.storage());
}

TEST(IterateLog, StrideAndFinalIterationAreLogged) {
    const System sys = gaussian_system(10, 3, 2, 1, 10);
    const auto r = trk_fourier_solve(sys.a, sys.b, Tensor3cd(3, 1, 2), config(25, 1, 10), &sys.x);
    std::vector<Index> its;
    for (const auto& rec : r.log.records) its.push_back(rec.iteration);
    EXPECT_EQ(its, (std::vector<Index>{0, 10, 20, 25}));
    EXPECT_NEAR(r.log.records[0].rel_error, 1.0, 1e-14);
    for (std::size_t k = 1; k < r.log.size(); ++k)
        EXPECT_GE(r.log.records[k].elapsed_ns, r.log.records[k - 1].elapsed_ns);
}

TEST(IterateLog, NoTruthGivesNaN) {
    const System sys = gaussian_system(10, 3, 2, 1, 10);
    const auto r = trk_solve(sys.a, sys.b, Tensor3cd(3, 1, 2), config(5, 1));
    EXPECT_TRUE(std::isnan(r.log.back().rel_error));
}

TEST(IterateLog, ResidualToleranceStopsEarly) {
    const System sys = gaussian_system(30, 5, 3, 2, 11);
    SolverConfig c = config(100000, 2, 10);
    c.residual_tol = 1e-8;
    const auto r = trk_fourier_solve(sys.a, sys.b, Tensor3cd(5, 2, 3), c);
    EXPECT_LT(r.log.back().iteration, 100000);
    EXPECT_LE(r.log.back().residual, 1e-8 * frobenius_norm(sys.b));
}

TEST(Residual, Examples) {
    const System sys = gaussian_system(6, 4, 3, 2, 12);
    EXPECT_LE(residual(sys.a, sys.x, sys.b), 1e-10 * frobenius_norm(sys.b));
    EXPECT_NEAR(residual(sys.a, Tensor3cd(4, 2, 3), sys.b), frobenius_norm(sys.b), 1e-12);
    Rng rng(13);
    const Tensor3cd x = oracle::random_tensor(rng, 4, 2, 3);
    const double dense = (oracle::bcirc_kron_oracle(sys.a) * unfold(x) - unfold(sys.b)).norm();
    EXPECT_NEAR(residual(sys.a, x, sys.b), dense, 1e-10 * dense);
    EXPECT_THROW(residual(sys.a, x, Tensor3cd(5, 2, 3)), DimensionMismatch);
}
