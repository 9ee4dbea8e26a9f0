#pragma once

/**
 * @file metrics.hpp
 *
 * l_p functionals and distances for every p in (0, inf], plus the streamed
 * summary of all pairwise distances of a dataset.
 */

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <compare>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lpconc/dataset.hpp"
#include "lpconc/detail/parallel.hpp"
#include "lpconc/error.hpp"

namespace lpconc {

/// The exponent p of an l_p functional; either a positive real or infinity.
class LpExponent {
public:
    LpExponent(double p) : p_(p) { // NOLINT(google-explicit-constructor)
        detail::require(p > 0.0 && !std::isnan(p), "l_p exponent must be positive");
    }

    static LpExponent infinity() { return LpExponent(std::numeric_limits<double>::infinity()); }

    double value() const { return p_; }
    bool is_infinite() const { return std::isinf(p_); }

    /// Shortest text that parses back to the same exponent ("0.01", "2", "inf").
    std::string to_string() const {
        if (is_infinite()) {
            return "inf";
        }
        char buf[32];
        const auto res = std::to_chars(buf, buf + sizeof buf, p_);
        return std::string(buf, res.ptr);
    }

    static LpExponent parse(std::string_view text) {
        if (text == "inf" || text == "Inf" || text == "infinity" || text == "INF") {
            return infinity();
        }
        double v = 0.0;
        detail::require(detail::parse_real(text, v), "cannot parse l_p exponent '" + std::string(text) + "'");
        return LpExponent(v);
    }

    friend bool operator==(LpExponent a, LpExponent b) { return a.p_ == b.p_; }
    friend auto operator<=>(LpExponent a, LpExponent b) { return a.p_ <=> b.p_; }

private:
    double p_;
};

/// {0.01, 0.1, 0.5, 1, 2, 4, 10, inf}, in increasing order.
inline std::vector<LpExponent> canonical_exponents() {
    return {0.01, 0.1, 0.5, 1.0, 2.0, 4.0, 10.0, LpExponent::infinity()};
}

namespace detail {

// Each kernel maps coordinate differences to an accumulator (a sum of
// |v|^p, or a running max for p = inf) and the accumulator back to a length.

struct ManhattanKernel {
    double combine(double acc, double v) const { return acc + std::fabs(v); }
    double merge(double a, double b) const { return a + b; }
    double root(double s) const { return s; }
    double mean_root(double s, std::size_t n) const { return s / static_cast<double>(n); }
};

struct EuclideanKernel {
    double combine(double acc, double v) const { return acc + v * v; }
    double merge(double a, double b) const { return a + b; }
    double root(double s) const { return std::sqrt(s); }
    double mean_root(double s, std::size_t n) const { return std::sqrt(s / static_cast<double>(n)); }
};

struct HalfKernel {
    double combine(double acc, double v) const { return acc + std::sqrt(std::fabs(v)); }
    double merge(double a, double b) const { return a + b; }
    double root(double s) const { return s * s; }
    double mean_root(double s, std::size_t n) const { return root(s / static_cast<double>(n)); }
};

struct IntegerKernel {
    int exponent;
    double power(double v) const {
        double base = std::fabs(v);
        double result = 1.0;
        for (int e = exponent; e > 0; e >>= 1) {
            if (e & 1) {
                result *= base;
            }
            base *= base;
        }
        return result;
    }
    double combine(double acc, double v) const { return acc + power(v); }
    double merge(double a, double b) const { return a + b; }
    double root(double s) const { return s == 0.0 ? 0.0 : std::exp(std::log(s) / exponent); }
    double mean_root(double s, std::size_t n) const { return root(s / static_cast<double>(n)); }
};

// |v|^p = exp(p ln|v|) with 0^p = 0.
struct GeneralKernel {
    double p;
    double combine(double acc, double v) const {
        const double a = std::fabs(v);
        return a == 0.0 ? acc : acc + std::exp(p * std::log(a));
    }
    double merge(double a, double b) const { return a + b; }
    double root(double s) const { return s == 0.0 ? 0.0 : std::exp(std::log(s) / p); }
    double mean_root(double s, std::size_t n) const { return root(s / static_cast<double>(n)); }
};

struct MaxKernel {
    double combine(double acc, double v) const { return std::max(acc, std::fabs(v)); }
    double merge(double a, double b) const { return std::max(a, b); }
    double root(double s) const { return s; }
    double mean_root(double s, std::size_t) const { return s; }
};

/// Calls `f` with the kernel that evaluates l_p for this exponent.
template <typename F>
decltype(auto) with_kernel(LpExponent exponent, F&& f) {
    const double p = exponent.value();
    if (exponent.is_infinite()) {
        return f(MaxKernel{});
    }
    if (p == 1.0) {
        return f(ManhattanKernel{});
    }
    if (p == 2.0) {
        return f(EuclideanKernel{});
    }
    if (p == 0.5) {
        return f(HalfKernel{});
    }
    if (p == std::floor(p) && p >= 3.0 && p <= 64.0) {
        return f(IntegerKernel{static_cast<int>(p)});
    }
    return f(GeneralKernel{p});
}

/// Accumulates over x - y with four interleaved partial sums (fixed order).
template <typename K>
double accumulate_diff(const K& k, const double* x, const double* y, std::size_t n) {
    double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        a0 = k.combine(a0, x[i] - y[i]);
        a1 = k.combine(a1, x[i + 1] - y[i + 1]);
        a2 = k.combine(a2, x[i + 2] - y[i + 2]);
        a3 = k.combine(a3, x[i + 3] - y[i + 3]);
    }
    for (; i < n; ++i) {
        a0 = k.combine(a0, x[i] - y[i]);
    }
    return k.merge(k.merge(a0, a1), k.merge(a2, a3));
}

template <typename K>
double accumulate_abs(const K& k, const double* x, std::size_t n) {
    double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        a0 = k.combine(a0, x[i]);
        a1 = k.combine(a1, x[i + 1]);
        a2 = k.combine(a2, x[i + 2]);
        a3 = k.combine(a3, x[i + 3]);
    }
    for (; i < n; ++i) {
        a0 = k.combine(a0, x[i]);
    }
    return k.merge(k.merge(a0, a1), k.merge(a2, a3));
}

} // namespace detail

/// (sum |x_i|^p)^(1/p), or max |x_i| for p = inf.
inline double lp_functional(std::span<const double> x, LpExponent p) {
    detail::require(!x.empty(), "lp_functional: empty vector");
    return detail::with_kernel(p, [&](const auto& k) { return k.root(detail::accumulate_abs(k, x.data(), x.size())); });
}

/// lp_functional(x - y, p).
inline double lp_distance(std::span<const double> x, std::span<const double> y, LpExponent p) {
    detail::require(x.size() == y.size(), "lp_distance: length mismatch (" + std::to_string(x.size()) + " vs " +
                                              std::to_string(y.size()) + ")");
    return detail::with_kernel(
        p, [&](const auto& k) { return k.root(detail::accumulate_diff(k, x.data(), y.data(), x.size())); });
}

/**
 * Order-preserving surrogate of lp_distance: sum |x_i - y_i|^p (max for
 * p = inf) without the final root. Neighbour ranking uses it because the root
 * can overflow for very small p in high dimension while the ordering cannot.
 */
inline double lp_rank_key(std::span<const double> x, std::span<const double> y, LpExponent p) {
    detail::require(x.size() == y.size(), "lp_rank_key: length mismatch");
    return detail::with_kernel(p, [&](const auto& k) { return detail::accumulate_diff(k, x.data(), y.data(), x.size()); });
}

/**
 * @brief min / max / mean / population variance / count of a multiset of
 * distances.
 */
struct DistanceSummary {
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double variance = 0.0;
    std::size_t count = 0;
};

/// Welford accumulator whose `merge` is the pairwise (Chan) update.
class DistanceAccumulator {
public:
    void add(double v) {
        ++count_;
        if (count_ == 1) {
            min_ = max_ = v;
        } else {
            min_ = std::min(min_, v);
            max_ = std::max(max_, v);
        }
        const double delta = v - mean_;
        mean_ += delta / static_cast<double>(count_);
        m2_ += delta * (v - mean_);
    }

    void merge(const DistanceAccumulator& other) {
        if (other.count_ == 0) {
            return;
        }
        if (count_ == 0) {
            *this = other;
            return;
        }
        const double na = static_cast<double>(count_);
        const double nb = static_cast<double>(other.count_);
        const double n = na + nb;
        const double delta = other.mean_ - mean_;
        mean_ += delta * nb / n;
        m2_ += other.m2_ + delta * delta * na * nb / n;
        count_ += other.count_;
        min_ = std::min(min_, other.min_);
        max_ = std::max(max_, other.max_);
    }

    std::size_t count() const { return count_; }

    DistanceSummary summary() const {
        DistanceSummary s;
        s.count = count_;
        if (count_ == 0) {
            return s;
        }
        s.min = min_;
        s.max = max_;
        // clamp rounding drift so min <= mean <= max and variance = 0 iff min = max
        s.mean = std::clamp(mean_, min_, max_);
        s.variance = (min_ == max_) ? 0.0 : std::max(0.0, m2_ / static_cast<double>(count_));
        return s;
    }

private:
    std::size_t count_ = 0;
    double min_ = 0.0;
    double max_ = 0.0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

/**
 * Streams all n(n-1)/2 unordered pair distances of the rows of `x`.
 *
 * Each row i owns the pairs (i, j > i). Rows are processed in parallel into
 * per-row accumulators which are then merged in row order, so the result does
 * not depend on the number of threads.
 */
inline DistanceSummary pairwise_summary(const DataMatrix& x, LpExponent p) {
    const std::size_t n = x.rows();
    detail::require(n >= 2, "pairwise_summary: need at least two rows");
    const std::size_t d = x.cols();
    const double* data = x.values().data();

    std::vector<DistanceAccumulator> per_row(n - 1);
    detail::with_kernel(p, [&](const auto& k) {
        detail::parallel_for(n - 1, [&](std::size_t i) {
            DistanceAccumulator acc;
            const double* xi = data + i * d;
            for (std::size_t j = i + 1; j < n; ++j) {
                acc.add(k.root(detail::accumulate_diff(k, xi, data + j * d, d)));
            }
            per_row[i] = acc;
        });
        return 0;
    });

    DistanceAccumulator total;
    for (const auto& acc : per_row) {
        total.merge(acc);
    }
    return total.summary();
}

} // namespace lpconc
