#pragma once

/**
 * @file concentration.hpp
 *
 * Distance-concentration indicators: relative contrast (RC) and coefficient of
 * variation (CV), and the two uniform-cube experiments built on them.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "lpconc/dataset.hpp"
#include "lpconc/detail/parallel.hpp"
#include "lpconc/error.hpp"
#include "lpconc/metrics.hpp"

namespace lpconc {

/// RC and CV of all pairwise distances of one prefix dimension under one exponent.
struct ConcentrationRecord {
    std::size_t dimension = 0;
    LpExponent p = 1.0;
    double rc = 0.0;
    double cv = 0.0;
};

/// (max - min) / min.
inline double rc_from_summary(const DistanceSummary& s) {
    detail::require(s.min > 0.0, "relative contrast undefined: minimum distance is zero (duplicate points)");
    return (s.max - s.min) / s.min;
}

/// sqrt(variance) / mean.
inline double cv_from_summary(const DistanceSummary& s) {
    detail::require(s.mean > 0.0, "coefficient of variation undefined: mean distance is zero");
    return std::sqrt(s.variance) / s.mean;
}

/// RC of the distances from `y` to every row of `x`.
inline double point_rc(const DataMatrix& x, std::span<const double> y, LpExponent p) {
    detail::require(x.rows() >= 2, "point_rc: need at least two rows");
    detail::require(y.size() == x.cols(), "point_rc: query length does not match column count");
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const double dist = lp_distance(x.row(i), y, p);
        lo = std::min(lo, dist);
        hi = std::max(hi, dist);
    }
    detail::require(lo > 0.0, "point_rc: query coincides with a row (zero minimum distance)");
    return (hi - lo) / lo;
}

/// Mean over rows of the RC of each row against all remaining rows.
inline double mean_point_rc(const DataMatrix& x, LpExponent p) {
    const std::size_t n = x.rows();
    detail::require(n >= 3, "mean_point_rc: need at least three rows");
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) {
                continue;
            }
            const double dist = lp_distance(x.row(j), x.row(i), p);
            lo = std::min(lo, dist);
            hi = std::max(hi, dist);
        }
        detail::require(lo > 0.0, "mean_point_rc: duplicate rows (zero minimum distance)");
        total += (hi - lo) / lo;
    }
    return total / static_cast<double>(n);
}

struct RcComparisonRow {
    std::size_t dimension = 0;
    std::size_t points = 0;
    std::size_t repetitions = 0;
    double fraction = 0.0;
};

/**
 * Fraction of repetitions in which the mean leave-one-out RC under l_1 is
 * strictly greater than under l_2.
 *
 * Repetition r draws `points` uniform points in max(100, max dim) coordinates
 * with seed `seed + r`; every requested dimension uses the leading columns of
 * that same sample. Output rows follow the order of `dims`.
 */
inline std::vector<RcComparisonRow> rc_comparison_experiment(std::size_t points, const std::vector<std::size_t>& dims,
                                                             std::size_t reps, std::uint64_t seed) {
    detail::require(points >= 3, "rc_comparison_experiment: need at least three points");
    detail::require(reps >= 1, "rc_comparison_experiment: need at least one repetition");
    detail::require(!dims.empty(), "rc_comparison_experiment: no dimensions requested");
    std::size_t width = 100;
    for (auto d : dims) {
        detail::require(d >= 1, "rc_comparison_experiment: dimensions must be positive");
        width = std::max(width, d);
    }

    // wins[r * dims.size() + k]
    std::vector<unsigned char> wins(reps * dims.size(), 0);
    detail::parallel_for(reps, [&](std::size_t r) {
        const DataMatrix sample = gen_uniform_cube(points, width, seed + r);
        for (std::size_t k = 0; k < dims.size(); ++k) {
            const DataMatrix xd = prefix_dims(sample, dims[k]);
            const double rc1 = mean_point_rc(xd, 1.0);
            const double rc2 = mean_point_rc(xd, 2.0);
            wins[r * dims.size() + k] = rc1 > rc2 ? 1 : 0;
        }
    });

    std::vector<RcComparisonRow> rows;
    for (std::size_t k = 0; k < dims.size(); ++k) {
        std::size_t count = 0;
        for (std::size_t r = 0; r < reps; ++r) {
            count += wins[r * dims.size() + k];
        }
        rows.push_back({dims[k], points, reps, static_cast<double>(count) / static_cast<double>(reps)});
    }
    return rows;
}

/**
 * RC and CV of all pairwise distances for every (prefix dimension, exponent).
 *
 * One pass per exponent over all pairs computes the running power sum along
 * the columns and reads it off at each requested prefix. Distances are taken
 * as power means, (sum / d)^(1/p), which rescales every distance of a prefix
 * by the same constant; RC and CV are scale-free so they are unaffected, and
 * the power mean cannot overflow for tiny p.
 *
 * Records are ordered by `dims` (outer) then `ps` (inner).
 */
inline std::vector<ConcentrationRecord> concentration_sweep(const DataMatrix& x, const std::vector<std::size_t>& dims,
                                                            const std::vector<LpExponent>& ps) {
    const std::size_t n = x.rows();
    detail::require(n >= 2, "concentration_sweep: need at least two rows");
    detail::require(!dims.empty() && !ps.empty(), "concentration_sweep: empty dimension or exponent list");
    for (auto d : dims) {
        detail::require(d >= 1 && d <= x.cols(), "concentration_sweep: dimension " + std::to_string(d) +
                                                     " outside [1, " + std::to_string(x.cols()) + "]");
    }
    std::vector<std::size_t> checkpoints(dims);
    std::sort(checkpoints.begin(), checkpoints.end());
    checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());
    const std::size_t m = checkpoints.size();
    const std::size_t width = x.cols();
    const double* data = x.values().data();

    std::vector<ConcentrationRecord> records(dims.size() * ps.size());
    for (std::size_t pi = 0; pi < ps.size(); ++pi) {
        // per_row[i * m + c]: pairs (i, j > i) at checkpoint c
        std::vector<DistanceAccumulator> per_row((n - 1) * m);
        detail::with_kernel(ps[pi], [&](const auto& k) {
            detail::parallel_for(n - 1, [&](std::size_t i) {
                const double* xi = data + i * width;
                DistanceAccumulator* acc = per_row.data() + i * m;
                for (std::size_t j = i + 1; j < n; ++j) {
                    const double* xj = data + j * width;
                    double running = 0.0;
                    std::size_t start = 0;
                    for (std::size_t c = 0; c < m; ++c) {
                        const std::size_t stop = checkpoints[c];
                        running = k.merge(running, detail::accumulate_diff(k, xi + start, xj + start, stop - start));
                        start = stop;
                        acc[c].add(k.mean_root(running, stop));
                    }
                }
            });
            return 0;
        });

        for (std::size_t c = 0; c < m; ++c) {
            DistanceAccumulator total;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                total.merge(per_row[i * m + c]);
            }
            const DistanceSummary s = total.summary();
            for (std::size_t di = 0; di < dims.size(); ++di) {
                if (dims[di] == checkpoints[c]) {
                    records[di * ps.size() + pi] = {dims[di], ps[pi], rc_from_summary(s), cv_from_summary(s)};
                }
            }
        }
    }
    return records;
}

/// Seeded form: one n x max(dims) uniform sample, nested prefixes.
inline std::vector<ConcentrationRecord> concentration_sweep(std::size_t n, const std::vector<std::size_t>& dims,
                                                            const std::vector<LpExponent>& ps, std::uint64_t seed) {
    detail::require(!dims.empty(), "concentration_sweep: no dimensions requested");
    const std::size_t width = *std::max_element(dims.begin(), dims.end());
    detail::require(width >= 1, "concentration_sweep: dimensions must be positive");
    return concentration_sweep(gen_uniform_cube(n, width, seed), dims, ps);
}

} // namespace lpconc
