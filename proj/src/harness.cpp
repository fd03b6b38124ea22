#include "tprk/harness.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace tprk {

std::string to_string(Normalization n) {
    switch (n) {
        case Normalization::None: return "none";
        case Normalization::RowSlice: return "row-slice";
        case Normalization::MatrixRow: return "matrix-row";
    }
    return "none";
}

Normalization parse_normalization(const std::string& s) {
    if (s == "none") return Normalization::None;
    if (s == "row-slice") return Normalization::RowSlice;
    if (s == "matrix-row") return Normalization::MatrixRow;
    throw std::invalid_argument("unknown normalization '" + s + "'");
}

ExperimentSpec ExperimentSpec::defaults(const std::string& experiment) {
    ExperimentSpec s;
    s.experiment = experiment;
    if (experiment == "fig1") {
        s.m_values = {50, 100, 200, 300, 400, 500};
        s.ell = 20;
        s.n = 10;
        s.p = 1;
        s.trials = 50;
        s.normalization = Normalization::RowSlice;
    } else if (experiment == "fig2") {
        s.m_values = {500};
        s.ell = 20;
        s.n = 10;
        s.p = 10;
        s.trials = 20;
        s.iterations = 2000;
        s.log_stride = 20;
        s.normalization = Normalization::RowSlice;
    } else if (experiment == "fig3") {
        s.m_values = {100};
        s.ell = 15;
        s.n = 10;
        s.p = 30;
        s.trials = 20;
        s.iterations = 2000;
        s.log_stride = 20;
    } else if (experiment == "fig4") {
        s.m_values = {100};
        s.ell = 30;
        s.n = 5;
        s.p = 15;
        s.trials = 20;
        s.iterations = 1000;
        s.log_stride = 10;
    } else if (experiment != "custom") {
        throw std::invalid_argument("unknown experiment '" + experiment + "'");
    }
    return s;
}

void ExperimentSpec::validate() const {
    if (m_values.empty()) throw std::invalid_argument("experiment needs at least one m");
    for (Index m : m_values)
        if (m < 1) throw std::invalid_argument("m must be >= 1");
    if (ell < 1 || n < 1 || p < 1 || mu < 0)
        throw std::invalid_argument("dimensions must be >= 1");
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    if (iterations < 1) throw std::invalid_argument("iterations must be >= 1");
    if (log_stride < 1) throw std::invalid_argument("log stride must be >= 1");
    if (experiment != "fig1" && m_values.size() != 1)
        throw std::invalid_argument("only fig1 accepts a list of m values");
}

Tensor3cd gen_gaussian_tensor(Index m, Index l, Index n, std::uint64_t seed,
                              Normalization normalization) {
    Rng rng(seed);
    // Draw order is k-major, then i, then j, matching the text format.
    MatrixXcd slices(m, l * n);
    for (Index k = 0; k < n; ++k)
        for (Index i = 0; i < m; ++i)
            for (Index j = 0; j < l; ++j) slices(i, k * l + j) = rng.normal();
    if (normalization != Normalization::None)
        for (Index i = 0; i < m; ++i) slices.row(i).normalize();
    return Tensor3cd(std::move(slices), n);
}

MatrixXcd gen_gaussian_matrix(Index rows, Index cols, std::uint64_t seed, bool normalize_rows) {
    Rng rng(seed);
    MatrixXcd a(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) a(i, j) = rng.normal();
    if (normalize_rows) a.rowwise().normalize();
    return a;
}

void CsvTable::write(std::ostream& os) const {
    auto line = [&os](const std::vector<std::string>& cells) {
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (c) os << ',';
            os << cells[c];
        }
        os << '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
}

std::string CsvTable::str() const {
    std::ostringstream os;
    write(os);
    return os.str();
}

int CsvTable::column(const std::string& name) const {
    for (std::size_t c = 0; c < header.size(); ++c)
        if (header[c] == name) return int(c);
    return -1;
}

std::string format_real(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string metadata_path(const std::string& out) {
    return std::filesystem::path(out).replace_extension(".meta").string();
}

void write_metadata(std::ostream& os, const Metadata& meta) {
    for (const auto& [k, v] : meta) os << k << '=' << v << '\n';
}

void write_outputs(const ExperimentSpec& spec, const ExperimentOutput& output) {
    if (spec.out.empty()) throw std::invalid_argument("no output path given");
    {
        std::ofstream os(spec.out);
        if (!os) throw std::runtime_error("cannot open " + spec.out + " for writing");
        output.csv.write(os);
    }
    const std::string meta = metadata_path(spec.out);
    std::ofstream os(meta);
    if (!os) throw std::runtime_error("cannot open " + meta + " for writing");
    write_metadata(os, output.meta);
}

const char* library_version() {
#ifdef TPRK_VERSION
    return TPRK_VERSION;
#else
    return "unknown";
#endif
}

}  // namespace tprk
