#pragma once

// Plain-text tensor format (".tns"):
//   line 1:  "m l n"
//   then m*l*n lines "re im", ordered by frontal slice k, then row i, then column j.

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "tprk/tensor3.hpp"

namespace tprk {

template <typename Scalar>
void write_tensor(std::ostream& os, const Tensor3<Scalar>& t) {
    os << t.rows() << ' ' << t.cols() << ' ' << t.depth() << '\n';
    char buf[64];
    for (Index k = 0; k < t.depth(); ++k)
        for (Index i = 0; i < t.rows(); ++i)
            for (Index j = 0; j < t.cols(); ++j) {
                const auto& z = t(i, j, k);
                std::snprintf(buf, sizeof buf, "%.17g %.17g\n", double(z.real()),
                              double(z.imag()));
                os << buf;
            }
}

template <typename Scalar = std::complex<double>>
Tensor3<Scalar> read_tensor(std::istream& is) {
    Index m = 0, l = 0, n = 0;
    if (!(is >> m >> l >> n)) throw FormatError("tensor header must be 'm l n'");
    if (m < 1 || l < 1 || n < 1) throw FormatError("tensor dimensions must be >= 1");
    DenseMatrix<Scalar> slices(m, l * n);
    for (Index k = 0; k < n; ++k)
        for (Index i = 0; i < m; ++i)
            for (Index j = 0; j < l; ++j) {
                double re = 0, im = 0;
                if (!(is >> re >> im))
                    throw FormatError("tensor body truncated at entry (" + std::to_string(i) +
                                      "," + std::to_string(j) + "," + std::to_string(k) + ")");
                slices(i, k * l + j) = Scalar(re, im);
            }
    std::string rest;
    if (is >> rest) throw FormatError("trailing data after tensor body");
    if (!slices.allFinite()) throw FormatError("tensor entries must be finite");
    return Tensor3<Scalar>(std::move(slices), n);
}

template <typename Scalar>
void save_tensor(const std::string& path, const Tensor3<Scalar>& t) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    write_tensor(os, t);
    if (!os) throw std::runtime_error("failed writing " + path);
}

template <typename Scalar = std::complex<double>>
Tensor3<Scalar> load_tensor(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    return read_tensor<Scalar>(is);
}

}  // namespace tprk
