#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <functional>
#include <numeric>
#include <thread>

#include "tprk/analysis.hpp"
#include "tprk/harness.hpp"
#include "tprk/solvers.hpp"

namespace tprk {
namespace {

// Substream ids under a trial seed.
constexpr std::uint64_t kStreamA = 1;
constexpr std::uint64_t kStreamX = 2;
constexpr std::uint64_t kStreamMatrixA = 3;
constexpr std::uint64_t kStreamMatrixX = 4;
constexpr std::uint64_t kStreamSolver = 5;
// fig4 keeps one system for all trials; it is drawn from this stream of the master seed.
constexpr std::uint64_t kFixedSystem = 0xF1F4;

using Rows = std::vector<std::vector<std::string>>;

/// Runs body(trial) for every trial on a worker pool and concatenates the row
/// blocks in trial order, so the output never depends on scheduling.
Rows for_each_trial(Index trials, unsigned threads, const std::function<Rows(Index)>& body) {
    std::vector<Rows> out(trials);
    std::vector<std::exception_ptr> errors(trials);
    std::atomic<Index> next{0};
    auto worker = [&] {
        for (Index t; (t = next.fetch_add(1)) < trials;) {
            try {
                out[t] = body(t);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        }
    };
    unsigned n = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
    n = unsigned(std::min<Index>(n, trials));
    if (n <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < n; ++w) pool.emplace_back(worker);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    Rows all;
    for (auto& block : out) std::move(block.begin(), block.end(), std::back_inserter(all));
    return all;
}

const std::vector<std::string> kTrajectoryHeader{"experiment", "trial",    "method",     "iteration",
                                                 "rel_error",  "residual", "cum_time_ns"};

void append_log(Rows& rows, const std::string& experiment, Index trial, const std::string& method,
                const IterateLog& log) {
    for (const IterateRecord& r : log.records)
        rows.push_back({experiment, std::to_string(trial), method, std::to_string(r.iteration),
                        format_real(r.rel_error), format_real(r.residual), std::to_string(r.elapsed_ns)});
}

void append_bound(Rows& rows, const std::string& experiment, Index trial, const std::string& method,
                  const IterateLog& like, double rho) {
    for (const IterateRecord& r : like.records)
        rows.push_back({experiment, std::to_string(trial), method, std::to_string(r.iteration),
                        format_real(std::pow(rho, 0.5 * double(r.iteration))), "nan", "0"});
}

SolverConfig solver_config(const ExperimentSpec& spec, std::uint64_t seed) {
    SolverConfig cfg;
    cfg.iterations = spec.iterations;
    cfg.seed = seed;
    cfg.sampling = spec.sampling;
    cfg.log_stride = spec.log_stride;
    return cfg;
}

Metadata base_metadata(const ExperimentSpec& spec) {
    std::string ms;
    for (Index m : spec.m_values) ms += (ms.empty() ? "" : ",") + std::to_string(m);
    return {{"experiment", spec.experiment},
            {"m", ms},
            {"ell", std::to_string(spec.ell)},
            {"n", std::to_string(spec.n)},
            {"p", std::to_string(spec.p)},
            {"mu", std::to_string(spec.matrix_rows())},
            {"trials", std::to_string(spec.trials)},
            {"iterations", std::to_string(spec.iterations)},
            {"seed", std::to_string(spec.seed)},
            {"sampling", to_string(spec.sampling)},
            {"normalization", to_string(spec.normalization)},
            {"log_stride", std::to_string(spec.log_stride)},
            {"library_version", library_version()},
            {"output", spec.out}};
}

/// Random consistent tensor system A X* = B with X^0 = 0.
struct TensorSystem {
    Tensor3cd a, x_true, b;
};

TensorSystem make_tensor_system(Index m, Index l, Index n, Index p, std::uint64_t seed,
                                Normalization normalization) {
    Tensor3cd a = gen_gaussian_tensor(m, l, n, derive_seed(seed, kStreamA), normalization);
    Tensor3cd x = gen_gaussian_tensor(l, p, n, derive_seed(seed, kStreamX));
    Tensor3cd b = tprod(a, x);
    return {std::move(a), std::move(x), std::move(b)};
}

IterateLog run_tensor_method(const std::string& method, const TensorSystem& sys, const SolverConfig& cfg) {
    const Tensor3cd x0(sys.x_true.rows(), sys.x_true.cols(), sys.x_true.depth());
    if (method == "trk") return trk_solve(sys.a, sys.b, x0, cfg, &sys.x_true).log;
    if (method == "trk-fourier") return trk_fourier_solve(sys.a, sys.b, x0, cfg, &sys.x_true).log;
    if (method == "brk") return block_mrk_fourier_solve(sys.a, sys.b, x0, cfg, &sys.x_true).log;
    if (method == "mrk") {
        const MatrixXcd a = bcirc(sys.a);
        const MatrixXcd b = unfold(sys.b);
        const MatrixXcd truth = unfold(sys.x_true);
        const MatrixXcd z = MatrixXcd::Zero(truth.rows(), truth.cols());
        return mrk_solve(a, b, z, cfg, &truth).log;
    }
    throw std::invalid_argument("unknown method '" + method + "'");
}

template <typename F>
double timed_ms(F&& f) {
    const auto start = std::chrono::steady_clock::now();
    f();
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

ExperimentOutput run_fig1(const ExperimentSpec& spec) {
    spec.validate();
    ExperimentOutput out;
    out.csv.header = {"experiment", "m", "rho_trk", "rho_mrk"};
    const Index cols = spec.ell * spec.n;
    double ms = timed_ms([&] {
        for (std::size_t s = 0; s < spec.m_values.size(); ++s) {
            const Index m = spec.m_values[s];
            const std::uint64_t sweep_seed = derive_seed(spec.seed, s);
            Rows per_trial = for_each_trial(spec.trials, spec.threads, [&](Index t) {
                const std::uint64_t ts = derive_seed(sweep_seed, std::uint64_t(t));
                const Tensor3cd a = gen_gaussian_tensor(m, spec.ell, spec.n, derive_seed(ts, kStreamA),
                                                        Normalization::RowSlice);
                const MatrixXcd am = gen_gaussian_matrix(m, cols, derive_seed(ts, kStreamMatrixA), true);
                return Rows{{format_real(contraction_trk(a).rho), format_real(contraction_mrk(am))}};
            });
            double trk = 0, mrk = 0;
            for (const auto& r : per_trial) {
                trk += std::stod(r[0]);
                mrk += std::stod(r[1]);
            }
            out.csv.rows.push_back({spec.experiment, std::to_string(m), format_real(trk / double(spec.trials)),
                                    format_real(mrk / double(spec.trials))});
        }
    });
    out.meta = base_metadata(spec);
    out.meta.emplace_back("elapsed_ms", format_real(ms));
    return out;
}

ExperimentOutput run_fig2(const ExperimentSpec& spec) {
    spec.validate();
    ExperimentOutput out;
    out.csv.header = kTrajectoryHeader;
    const Index m = spec.m(), mu = spec.matrix_rows(), cols = spec.ell * spec.n;
    double ms = timed_ms([&] {
        out.csv.rows = for_each_trial(spec.trials, spec.threads, [&](Index t) {
            const std::uint64_t ts = derive_seed(spec.seed, std::uint64_t(t));
            Rows rows;
            const TensorSystem sys = make_tensor_system(m, spec.ell, spec.n, spec.p, ts, spec.normalization);
            append_log(rows, spec.experiment, t, "trk-fourier",
                       run_tensor_method("trk-fourier", sys, solver_config(spec, derive_seed(ts, kStreamSolver))));

            // Matrix baseline with the same storage budget: mu x (l n) measurements of an (l n) x p signal.
            const MatrixXcd a = gen_gaussian_matrix(mu, cols, derive_seed(ts, kStreamMatrixA),
                                                    spec.normalization != Normalization::None);
            const MatrixXcd x = gen_gaussian_matrix(cols, spec.p, derive_seed(ts, kStreamMatrixX));
            const MatrixXcd b = a * x;
            const MatrixXcd z = MatrixXcd::Zero(cols, spec.p);
            append_log(rows, spec.experiment, t, "mrk",
                       mrk_solve(a, b, z, solver_config(spec, derive_seed(ts, kStreamSolver)), &x).log);
            return rows;
        });
    });
    out.meta = base_metadata(spec);
    out.meta.emplace_back("methods", "trk-fourier,mrk");
    out.meta.emplace_back("elapsed_ms", format_real(ms));
    return out;
}

ExperimentOutput run_fig3(const ExperimentSpec& spec) {
    spec.validate();
    ExperimentOutput out;
    out.csv.header = kTrajectoryHeader;
    double ms = timed_ms([&] {
        out.csv.rows = for_each_trial(spec.trials, spec.threads, [&](Index t) {
            const std::uint64_t ts = derive_seed(spec.seed, std::uint64_t(t));
            const TensorSystem sys =
                make_tensor_system(spec.m(), spec.ell, spec.n, spec.p, ts, spec.normalization);
            const SolverConfig cfg = solver_config(spec, derive_seed(ts, kStreamSolver));
            Rows rows;
            append_log(rows, spec.experiment, t, "trk-fourier", run_tensor_method("trk-fourier", sys, cfg));
            // MRK on bcirc(A) unfold(X) = unfold(B).
            append_log(rows, spec.experiment, t, "mrk", run_tensor_method("mrk", sys, cfg));
            return rows;
        });
    });
    out.meta = base_metadata(spec);
    out.meta.emplace_back("methods", "trk-fourier,mrk");
    out.meta.emplace_back("mrk_matrix", std::to_string(spec.m() * spec.n) + "x" +
                                            std::to_string(spec.ell * spec.n));
    out.meta.emplace_back("elapsed_ms", format_real(ms));
    return out;
}

ExperimentOutput run_fig4(const ExperimentSpec& spec) {
    spec.validate();
    ExperimentOutput out;
    out.csv.header = kTrajectoryHeader;
    const TensorSystem sys = make_tensor_system(spec.m(), spec.ell, spec.n, spec.p,
                                                derive_seed(spec.seed, kFixedSystem), spec.normalization);
    const double rho_trk = contraction_trk(sys.a).rho;
    const double rho_brk = contraction_brk(sys.a).rho;
    double ms = timed_ms([&] {
        out.csv.rows = for_each_trial(spec.trials, spec.threads, [&](Index t) {
            const SolverConfig cfg = solver_config(spec, derive_seed(spec.seed, std::uint64_t(t)));
            Rows rows;
            const IterateLog trk = run_tensor_method("trk", sys, cfg);
            append_log(rows, spec.experiment, t, "trk", trk);
            append_log(rows, spec.experiment, t, "brk", run_tensor_method("brk", sys, cfg));
            append_bound(rows, spec.experiment, t, "trk_ub", trk, rho_trk);
            append_bound(rows, spec.experiment, t, "brk_ub", trk, rho_brk);
            return rows;
        });
    });
    out.meta = base_metadata(spec);
    out.meta.emplace_back("methods", "trk,brk,trk_ub,brk_ub");
    out.meta.emplace_back("rho_trk", format_real(rho_trk));
    out.meta.emplace_back("rho_brk", format_real(rho_brk));
    out.meta.emplace_back("elapsed_ms", format_real(ms));
    return out;
}

ExperimentOutput run_custom(const ExperimentSpec& spec) {
    spec.validate();
    ExperimentOutput out;
    out.csv.header = kTrajectoryHeader;
    double ms = timed_ms([&] {
        out.csv.rows = for_each_trial(spec.trials, spec.threads, [&](Index t) {
            const std::uint64_t ts = derive_seed(spec.seed, std::uint64_t(t));
            const TensorSystem sys =
                make_tensor_system(spec.m(), spec.ell, spec.n, spec.p, ts, spec.normalization);
            Rows rows;
            append_log(rows, spec.experiment, t, spec.method,
                       run_tensor_method(spec.method, sys, solver_config(spec, derive_seed(ts, kStreamSolver))));
            return rows;
        });
    });
    out.meta = base_metadata(spec);
    out.meta.emplace_back("methods", spec.method);
    out.meta.emplace_back("elapsed_ms", format_real(ms));
    return out;
}

ExperimentOutput run_experiment(const ExperimentSpec& spec) {
    if (spec.experiment == "fig1") return run_fig1(spec);
    if (spec.experiment == "fig2") return run_fig2(spec);
    if (spec.experiment == "fig3") return run_fig3(spec);
    if (spec.experiment == "fig4") return run_fig4(spec);
    if (spec.experiment == "custom") return run_custom(spec);
    throw std::invalid_argument("unknown experiment '" + spec.experiment + "'");
}

}  // namespace tprk
