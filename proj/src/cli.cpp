#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "tprk/analysis.hpp"
#include "tprk/harness.hpp"
#include "tprk/solvers.hpp"
#include "tprk/tensor_io.hpp"

namespace tprk {
namespace {

const std::vector<std::string> kMethods{"mrk", "trk", "trk-fourier", "brk"};

struct RunArgs {
    std::string experiment;
    std::vector<Index> m;
    Index ell = 0, n = 0, p = 0, mu = 0, trials = 0, iters = 0, log_stride = 0;
    std::uint64_t seed = 0;
    std::string sampling, method, normalization, out;
    unsigned threads = 0;
};

struct GenArgs {
    Index m = 20, ell = 5, n = 4, p = 3;
    std::uint64_t seed = 0;
    std::string normalization = "none";
    std::string a, b, x, out;
};

struct SolveArgs {
    std::string a, b, x_true, method = "trk-fourier", sampling = "uniform", out, log;
    Index iters = 1000, log_stride = 10;
    std::uint64_t seed = 0;
};

struct RatesArgs {
    std::string a;
    bool exact = false;
};

int do_run(const RunArgs& r, CLI::App& cmd, std::ostream& out) {
    ExperimentSpec spec = ExperimentSpec::defaults(r.experiment);
    auto given = [&cmd](const char* name) { return cmd.get_option(name)->count() > 0; };
    if (given("--m")) spec.m_values = r.m;
    if (given("--ell")) spec.ell = r.ell;
    if (given("--n")) spec.n = r.n;
    if (given("--p")) spec.p = r.p;
    if (given("--mu")) spec.mu = r.mu;
    if (given("--trials")) spec.trials = r.trials;
    if (given("--iters")) spec.iterations = r.iters;
    if (given("--log-stride")) spec.log_stride = r.log_stride;
    if (given("--seed")) spec.seed = r.seed;
    if (given("--sampling")) spec.sampling = parse_sampling(r.sampling);
    if (given("--method")) spec.method = r.method;
    if (given("--normalization")) spec.normalization = parse_normalization(r.normalization);
    if (given("--threads")) spec.threads = r.threads;
    spec.out = r.out;
    const ExperimentOutput result = run_experiment(spec);
    write_outputs(spec, result);
    out << "wrote " << spec.out << " (" << result.csv.rows.size() << " rows) and "
        << metadata_path(spec.out) << '\n';
    return 0;
}

int do_gen(const GenArgs& g, std::ostream& out) {
    const std::string a_path = !g.a.empty() ? g.a : g.out + "_a.tns";
    const std::string b_path = !g.b.empty() ? g.b : g.out + "_b.tns";
    const std::string x_path = !g.x.empty() ? g.x : g.out + "_x.tns";
    if ((g.a.empty() || g.b.empty()) && g.out.empty())
        throw CLI::ValidationError("gen", "give --a and --b, or an --out prefix");
    const Tensor3cd a = gen_gaussian_tensor(g.m, g.ell, g.n, derive_seed(g.seed, 1),
                                            parse_normalization(g.normalization));
    const Tensor3cd x = gen_gaussian_tensor(g.ell, g.p, g.n, derive_seed(g.seed, 2));
    save_tensor(a_path, a);
    save_tensor(b_path, tprod(a, x));
    if (!g.x.empty() || !g.out.empty()) save_tensor(x_path, x);
    out << "wrote " << a_path << ", " << b_path;
    if (!g.x.empty() || !g.out.empty()) out << ", " << x_path;
    out << '\n';
    return 0;
}

int do_solve(const SolveArgs& s, std::ostream& out) {
    const Tensor3cd a = load_tensor(s.a);
    const Tensor3cd b = load_tensor(s.b);
    std::optional<Tensor3cd> truth;
    if (!s.x_true.empty()) truth = load_tensor(s.x_true);
    const Tensor3cd x0(a.cols(), b.cols(), a.depth());
    SolverConfig cfg;
    cfg.iterations = s.iters;
    cfg.seed = s.seed;
    cfg.sampling = parse_sampling(s.sampling);
    cfg.log_stride = s.log_stride;
    const Tensor3cd* tp = truth ? &*truth : nullptr;

    SolveResult<Tensor3cd> result{x0, {}};
    if (s.method == "trk") {
        result = trk_solve(a, b, x0, cfg, tp);
    } else if (s.method == "trk-fourier") {
        result = trk_fourier_solve(a, b, x0, cfg, tp);
    } else if (s.method == "brk") {
        result = block_mrk_fourier_solve(a, b, x0, cfg, tp);
    } else {
        // mrk on the unfolded system bcirc(A) unfold(X) = unfold(B).
        const MatrixXcd am = bcirc(a);
        const MatrixXcd bm = unfold(b);
        std::optional<MatrixXcd> tm;
        if (truth) tm = unfold(*truth);
        auto r = mrk_solve(am, bm, MatrixXcd(MatrixXcd::Zero(am.cols(), bm.cols())), cfg,
                           tm ? &*tm : nullptr);
        result = {fold(r.solution, a.depth()), std::move(r.log)};
    }
    save_tensor(s.out, result.solution);
    if (!s.log.empty()) {
        CsvTable csv;
        csv.header = {"experiment", "trial", "method", "iteration", "rel_error", "residual", "cum_time_ns"};
        for (const auto& r : result.log.records)
            csv.rows.push_back({"solve", "0", s.method, std::to_string(r.iteration), format_real(r.rel_error),
                                format_real(r.residual), std::to_string(r.elapsed_ns)});
        std::ofstream os(s.log);
        if (!os) throw std::runtime_error("cannot open " + s.log);
        csv.write(os);
    }
    const double res = residual(a, result.solution, b);
    const double bn = double(frobenius_norm(b));
    out << "method=" << s.method << '\n'
        << "iterations=" << result.log.back().iteration << '\n'
        << "residual=" << format_real(res) << '\n'
        << "relative_residual=" << format_real(bn > 0 ? res / bn : res) << '\n';
    if (truth) out << "rel_error=" << format_real(result.log.back().rel_error) << '\n';
    return 0;
}

std::string join(const std::vector<double>& v) {
    std::string s;
    for (double x : v) s += (s.empty() ? "" : ",") + format_real(x);
    return s;
}

int do_rates(const RatesArgs& r, std::ostream& out) {
    const Tensor3cd a = load_tensor(r.a);
    const RateReport trk = contraction_trk(a);
    const RateReport brk = contraction_brk(a);
    out << "m=" << a.rows() << '\n' << "ell=" << a.cols() << '\n' << "n=" << a.depth() << '\n';
    out << "rho_trk=" << format_real(trk.rho) << '\n' << "rho_brk=" << format_real(brk.rho) << '\n';
    if (r.exact) out << "rho_exact=" << format_real(contraction_exact(a)) << '\n';
    out << "rho_mrk_unfolded=" << format_real(contraction_mrk(bcirc(a))) << '\n';
    out << "sigma_min=" << join(trk.sigma_min) << '\n' << "inf2_sq=" << join(trk.inf2_sq) << '\n';
    return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Randomized Kaczmarz solvers for t-product tensor systems", "tprk"};
    app.require_subcommand(1);
    app.set_version_flag("--version", library_version());

    RunArgs run;
    CLI::App* run_cmd = app.add_subcommand("run", "Run an experiment and write CSV plus metadata");
    run_cmd->add_option("--experiment", run.experiment, "fig1 | fig2 | fig3 | fig4 | custom")
        ->required()
        ->check(CLI::IsMember({"fig1", "fig2", "fig3", "fig4", "custom"}));
    run_cmd->add_option("--m", run.m, "Row count (comma-separated sweep for fig1)")->delimiter(',');
    run_cmd->add_option("--ell", run.ell, "Column count l")->check(CLI::PositiveNumber);
    run_cmd->add_option("--n", run.n, "Tube length")->check(CLI::PositiveNumber);
    run_cmd->add_option("--p", run.p, "Right-hand-side columns")->check(CLI::PositiveNumber);
    run_cmd->add_option("--mu", run.mu, "Matrix-baseline row count")->check(CLI::PositiveNumber);
    run_cmd->add_option("--trials", run.trials)->check(CLI::PositiveNumber);
    run_cmd->add_option("--iters", run.iters, "Iteration budget")->check(CLI::PositiveNumber);
    run_cmd->add_option("--seed", run.seed);
    run_cmd->add_option("--sampling", run.sampling)->check(CLI::IsMember({"uniform", "sqnorm"}));
    run_cmd->add_option("--method", run.method, "Method for custom runs")->check(CLI::IsMember(kMethods));
    run_cmd->add_option("--normalization", run.normalization)
        ->check(CLI::IsMember({"none", "row-slice", "matrix-row"}));
    run_cmd->add_option("--log-stride", run.log_stride)->check(CLI::PositiveNumber);
    run_cmd->add_option("--threads", run.threads, "Worker threads (0: all cores)");
    run_cmd->add_option("--out", run.out, "CSV output path")->required();

    GenArgs gen;
    CLI::App* gen_cmd = app.add_subcommand("gen", "Generate a random consistent system A*X = B");
    gen_cmd->add_option("--m", gen.m)->check(CLI::PositiveNumber);
    gen_cmd->add_option("--ell", gen.ell)->check(CLI::PositiveNumber);
    gen_cmd->add_option("--n", gen.n)->check(CLI::PositiveNumber);
    gen_cmd->add_option("--p", gen.p)->check(CLI::PositiveNumber);
    gen_cmd->add_option("--seed", gen.seed);
    gen_cmd->add_option("--normalization", gen.normalization)
        ->check(CLI::IsMember({"none", "row-slice", "matrix-row"}));
    gen_cmd->add_option("--a", gen.a, "Output path for A");
    gen_cmd->add_option("--b", gen.b, "Output path for B");
    gen_cmd->add_option("--x", gen.x, "Output path for the true X");
    gen_cmd->add_option("--out", gen.out, "Prefix: writes <out>_a.tns, <out>_b.tns, <out>_x.tns");

    SolveArgs solve;
    CLI::App* solve_cmd = app.add_subcommand("solve", "Solve A*X = B from tensor files");
    solve_cmd->add_option("--a", solve.a)->required()->check(CLI::ExistingFile);
    solve_cmd->add_option("--b", solve.b)->required()->check(CLI::ExistingFile);
    solve_cmd->add_option("--x-true", solve.x_true, "Known solution for error logging")->check(CLI::ExistingFile);
    solve_cmd->add_option("--method", solve.method)->check(CLI::IsMember(kMethods));
    solve_cmd->add_option("--iters", solve.iters)->check(CLI::PositiveNumber);
    solve_cmd->add_option("--seed", solve.seed);
    solve_cmd->add_option("--sampling", solve.sampling)->check(CLI::IsMember({"uniform", "sqnorm"}));
    solve_cmd->add_option("--log-stride", solve.log_stride)->check(CLI::PositiveNumber);
    solve_cmd->add_option("--log", solve.log, "Write the iterate log as CSV");
    solve_cmd->add_option("--out", solve.out, "Solution tensor path")->required();

    RatesArgs rates;
    CLI::App* rates_cmd = app.add_subcommand("rates", "Print contraction coefficients of a tensor");
    rates_cmd->add_option("--a", rates.a)->required()->check(CLI::ExistingFile);
    rates_cmd->add_flag("--exact", rates.exact, "Also compute the dense expected-projection rate");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << library_version() << '\n';
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n";
        const CLI::App* sub = nullptr;
        for (const CLI::App* s : app.get_subcommands()) sub = s;
        err << (sub ? sub->help() : app.help());
        return 2;
    }

    try {
        if (*run_cmd) return do_run(run, *run_cmd, out);
        if (*gen_cmd) return do_gen(gen, out);
        if (*solve_cmd) return do_solve(solve, out);
        if (*rates_cmd) return do_rates(rates, out);
    } catch (const CLI::ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

}  // namespace tprk
