#pragma once

// Portable random streams. Everything derives from std::mt19937_64, whose
// output sequence is fixed by the standard; integer ranges, unit doubles and
// normals are produced here rather than through the implementation-defined
// std:: distributions so that streams match across platforms.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace tprk {

/// SplitMix64 finalizer, used to derive independent sub-seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Seed of the `stream`-th substream of `seed`.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632BE59BD9B4E019ull));
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1) from the top 53 bits.
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, bound) by rejection (no modulo bias).
    std::uint64_t uniform_index(std::uint64_t bound) {
        if (bound == 0) throw std::invalid_argument("uniform_index: empty range");
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
        std::uint64_t x;
        do x = next_u64();
        while (x >= limit);
        return x % bound;
    }

    /// Standard normal via the Marsaglia polar method (pairs are cached).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0;
    bool has_spare_ = false;
};

enum class Sampling { Uniform, SquaredNorm };

inline std::string to_string(Sampling s) { return s == Sampling::Uniform ? "uniform" : "sqnorm"; }

inline Sampling parse_sampling(const std::string& s) {
    if (s == "uniform") return Sampling::Uniform;
    if (s == "sqnorm") return Sampling::SquaredNorm;
    throw std::invalid_argument("unknown sampling strategy '" + s + "'");
}

/// Row distribution over m rows: uniform, or proportional to supplied weights
/// (squared row norms). Draws are independent and with replacement.
class RowSampler {
public:
    static RowSampler uniform(std::size_t rows) {
        if (rows == 0) throw std::invalid_argument("RowSampler: no rows");
        RowSampler s;
        s.rows_ = rows;
        return s;
    }

    static RowSampler weighted(std::vector<double> weights) {
        if (weights.empty()) throw std::invalid_argument("RowSampler: no rows");
        for (double w : weights)
            if (!(w >= 0) || !std::isfinite(w))
                throw std::invalid_argument("RowSampler: weights must be finite and nonnegative");
        RowSampler s;
        s.rows_ = weights.size();
        s.cumulative_.resize(weights.size());
        std::partial_sum(weights.begin(), weights.end(), s.cumulative_.begin());
        if (!(s.cumulative_.back() > 0))
            throw std::invalid_argument("RowSampler: at least one weight must be positive");
        return s;
    }

    std::size_t rows() const noexcept { return rows_; }
    bool is_uniform() const noexcept { return cumulative_.empty(); }

    /// Probability of drawing each row.
    std::vector<double> probabilities() const {
        std::vector<double> p(rows_, 1.0 / double(rows_));
        if (!is_uniform()) {
            const double total = cumulative_.back();
            double prev = 0;
            for (std::size_t i = 0; i < rows_; ++i) {
                p[i] = (cumulative_[i] - prev) / total;
                prev = cumulative_[i];
            }
        }
        return p;
    }

    std::size_t sample(Rng& rng) const {
        if (is_uniform()) return rng.uniform_index(rows_);
        const double target = rng.uniform() * cumulative_.back();
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
        // Zero-weight rows share a cumulative value with their predecessor and are never hit.
        return std::min<std::size_t>(std::size_t(it - cumulative_.begin()), rows_ - 1);
    }

private:
    RowSampler() = default;
    std::size_t rows_ = 0;
    std::vector<double> cumulative_;
};

}  // namespace tprk
