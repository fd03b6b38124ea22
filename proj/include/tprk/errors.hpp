#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tprk {

/// Operand shapes do not conform (t-product inner dims, tube lengths, fold factor).
class DimensionMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class IndexOutOfRange : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// A tube fiber (or the normal tube of a row slice) has a Fourier coefficient
/// at or below the invertibility tolerance.
class NotInvertible : public std::runtime_error {
public:
    NotInvertible(std::ptrdiff_t row, std::ptrdiff_t coefficient, double magnitude)
        : std::runtime_error(format(row, coefficient, magnitude)),
          row_(row), coefficient_(coefficient), magnitude_(magnitude) {}

    /// Row slice the tube came from, or -1 for a free-standing tube.
    std::ptrdiff_t row() const noexcept { return row_; }
    /// Index k of the smallest offending DFT coefficient.
    std::ptrdiff_t coefficient() const noexcept { return coefficient_; }
    double magnitude() const noexcept { return magnitude_; }

private:
    static std::string format(std::ptrdiff_t row, std::ptrdiff_t k, double mag) {
        std::string msg = "tube is not invertible: DFT coefficient " + std::to_string(k) +
                          " has modulus " + std::to_string(mag);
        if (row >= 0) msg += " (row slice " + std::to_string(row) + ")";
        return msg;
    }

    std::ptrdiff_t row_;
    std::ptrdiff_t coefficient_;
    double magnitude_;
};

/// Matrix Kaczmarz sampled a row whose norm is numerically zero.
class ZeroRow : public std::runtime_error {
public:
    explicit ZeroRow(std::ptrdiff_t row)
        : std::runtime_error("row " + std::to_string(row) + " has zero norm"), row_(row) {}
    std::ptrdiff_t row() const noexcept { return row_; }

private:
    std::ptrdiff_t row_;
};

/// Dense analysis requested beyond the configured size cap.
class SizeLimit : public std::length_error {
public:
    using std::length_error::length_error;
};

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace tprk
