#pragma once

// Experiment harness: random consistent systems, the figure experiments, and
// their CSV / metadata outputs.
//
// CSV schemas
//   fig1:        experiment,m,rho_trk,rho_mrk
//   fig2-4, custom: experiment,trial,method,iteration,rel_error,residual,cum_time_ns
// Bound curves in fig4 appear as methods "trk_ub" and "brk_ub".

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "tprk/random.hpp"
#include "tprk/tensor3.hpp"

namespace tprk {

enum class Normalization { None, RowSlice, MatrixRow };

std::string to_string(Normalization n);
Normalization parse_normalization(const std::string& s);

struct ExperimentSpec {
    std::string experiment = "custom";  ///< fig1 | fig2 | fig3 | fig4 | custom
    std::vector<Index> m_values{100};   ///< fig1 sweeps all; others use the first
    Index ell = 20;
    Index n = 10;
    Index p = 10;
    Index mu = 0;                       ///< matrix-baseline row count; 0 means "same as m"
    Index trials = 20;
    Index iterations = 1000;
    std::uint64_t seed = 0;
    Sampling sampling = Sampling::Uniform;
    Normalization normalization = Normalization::None;
    std::string method = "trk-fourier";  ///< custom experiments only
    Index log_stride = 10;
    unsigned threads = 0;                ///< 0: hardware concurrency
    std::string out;

    /// Full-scale defaults for an experiment id.
    static ExperimentSpec defaults(const std::string& experiment);
    void validate() const;
    Index m() const { return m_values.front(); }
    Index matrix_rows() const { return mu > 0 ? mu : m(); }
};

/// i.i.d. standard normal real entries (stored complex), optionally with every
/// row slice scaled to unit Frobenius norm. MatrixRow is treated as RowSlice.
Tensor3cd gen_gaussian_tensor(Index m, Index l, Index n, std::uint64_t seed,
                              Normalization normalization = Normalization::None);

/// i.i.d. standard normal real matrix, optionally with unit-norm rows.
MatrixXcd gen_gaussian_matrix(Index rows, Index cols, std::uint64_t seed, bool normalize_rows = false);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void write(std::ostream& os) const;
    std::string str() const;
    /// Index of a header column, or -1.
    int column(const std::string& name) const;
};

using Metadata = std::vector<std::pair<std::string, std::string>>;

struct ExperimentOutput {
    CsvTable csv;
    Metadata meta;
};

ExperimentOutput run_fig1(const ExperimentSpec& spec);
ExperimentOutput run_fig2(const ExperimentSpec& spec);
ExperimentOutput run_fig3(const ExperimentSpec& spec);
ExperimentOutput run_fig4(const ExperimentSpec& spec);
ExperimentOutput run_custom(const ExperimentSpec& spec);
ExperimentOutput run_experiment(const ExperimentSpec& spec);

/// Sidecar path: `out` with its extension replaced by ".meta".
std::string metadata_path(const std::string& out);
void write_metadata(std::ostream& os, const Metadata& meta);
/// Writes spec.out and its sidecar.
void write_outputs(const ExperimentSpec& spec, const ExperimentOutput& output);

/// Shortest round-trip decimal form ("%.17g"); "nan" for NaN.
std::string format_real(double v);

const char* library_version();

/// Entry point of the `tprk` command line tool.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tprk
