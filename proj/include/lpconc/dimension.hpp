#pragma once

/**
 * @file dimension.hpp
 *
 * Intrinsic-dimension estimators: attribute count, three PCA stopping rules
 * (Kaiser, broken stick, condition number), Fisher-separability dimension and
 * box-counting fractal dimension, plus the correlation / through-origin
 * regression helpers used to compare them across datasets.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "lpconc/dataset.hpp"
#include "lpconc/detail/parallel.hpp"
#include "lpconc/error.hpp"
#include "lpconc/spectral.hpp"

namespace lpconc {

struct DimensionConfig {
    /// C in lambda_{k+1} / lambda_1 < 1 / C.
    double condition_number = 10.0;
    /// alpha in (x, y) <= alpha (x, x).
    double alpha = 0.8;
    /// Box sizes for the fractal dimension, strictly decreasing in (0, 1].
    /// Empty selects r = 2^-j automatically (see default_box_scales).
    std::vector<double> box_scales;

    void validate() const {
        detail::require(condition_number > 1.0, "DimensionConfig: condition number must exceed 1");
        detail::require(alpha > 0.0 && alpha < 1.0, "DimensionConfig: alpha must lie in (0, 1)");
        for (std::size_t i = 0; i < box_scales.size(); ++i) {
            detail::require(box_scales[i] > 0.0 && box_scales[i] <= 1.0, "DimensionConfig: box scales must lie in (0, 1]");
            if (i > 0) {
                detail::require(box_scales[i] < box_scales[i - 1], "DimensionConfig: box scales must be strictly decreasing");
            }
        }
    }
};

struct BrokenStickThresholds {
    std::vector<double> thresholds;
};

struct BoxCountCurve {
    std::vector<double> scales;
    std::vector<std::size_t> counts;
};

struct DimensionReport {
    std::size_t n_attr = 0;
    std::size_t cases = 0;
    std::size_t pca_k = 0;
    std::size_t pca_bs = 0;
    std::size_t pca_cn = 0;
    double sep_d = 0.0;
    double frac_d = 0.0;
};

namespace detail {
// FVE comparisons allow for the last-bit error of lambda_i / sum(lambda).
inline constexpr double fve_slack = 1e-12;
} // namespace detail

/// Number of components with f_i >= 1/d.
inline std::size_t pca_kaiser(const std::vector<double>& fve) {
    detail::require(!fve.empty(), "pca_kaiser: empty FVE vector");
    const double threshold = (1.0 / static_cast<double>(fve.size())) * (1.0 - detail::fve_slack);
    return static_cast<std::size_t>(std::count_if(fve.begin(), fve.end(), [&](double f) { return f >= threshold; }));
}

/// b_i = (1/d) sum_{j=i}^{d} 1/j, the expected ordered fragment lengths of a unit stick broken into d pieces.
inline BrokenStickThresholds broken_stick_thresholds(std::size_t d) {
    detail::require(d >= 1, "broken_stick_thresholds: d must be positive");
    BrokenStickThresholds out;
    out.thresholds.resize(d);
    long double tail = 0.0L;
    for (std::size_t i = d; i >= 1; --i) {
        tail += 1.0L / static_cast<long double>(i);
        out.thresholds[i - 1] = static_cast<double>(tail / static_cast<long double>(d));
    }
    return out;
}

/// Largest k with f_i >= b_i for every i <= k (0 when f_1 < b_1).
inline std::size_t pca_broken_stick(const std::vector<double>& fve) {
    detail::require(!fve.empty(), "pca_broken_stick: empty FVE vector");
    const auto b = broken_stick_thresholds(fve.size()).thresholds;
    std::size_t k = 0;
    while (k < fve.size() && fve[k] >= b[k] * (1.0 - detail::fve_slack)) {
        ++k;
    }
    return k;
}

/// Smallest k >= 1 with lambda_{k+1} / lambda_1 < 1/C, where lambda_{d+1} = 0.
inline std::size_t pca_condition_number(const std::vector<double>& eigenvalues, double condition_number) {
    detail::require(!eigenvalues.empty(), "pca_condition_number: empty spectrum");
    detail::require(condition_number > 1.0, "pca_condition_number: C must exceed 1");
    const double top = eigenvalues.front();
    detail::require(top > 0.0, "pca_condition_number: zero spectrum");
    std::size_t k = 1;
    while (k < eigenvalues.size() && eigenvalues[k] / top >= 1.0 / condition_number) {
        ++k;
    }
    return k;
}

/// (x, y) <= alpha (x, x).
inline bool is_fisher_separable(std::span<const double> x, std::span<const double> y, double alpha) {
    detail::require(x.size() == y.size(), "is_fisher_separable: length mismatch");
    double xy = 0.0;
    double xx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        xy += x[i] * y[i];
        xx += x[i] * x[i];
    }
    return xy <= alpha * xx;
}

struct SeparabilityFraction {
    /// Mean over points of the fraction of other points y with (x, y) > alpha (x, x).
    double mean_inseparability = 0.0;
    std::size_t used_points = 0;
    std::size_t excluded_points = 0;
};

/**
 * Mean inseparability fraction of already-prepared data. Rows with zero norm
 * cannot be tested; they are dropped and counted in `excluded_points`.
 */
inline SeparabilityFraction separability_fraction(const DataMatrix& x, double alpha) {
    detail::require(alpha > 0.0 && alpha < 1.0, "separability_fraction: alpha must lie in (0, 1)");
    const std::size_t d = x.cols();
    std::vector<std::size_t> rows;
    std::vector<double> self;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        double xx = 0.0;
        for (double v : x.row(i)) {
            xx += v * v;
        }
        if (xx > 0.0) {
            rows.push_back(i);
            self.push_back(xx);
        }
    }
    SeparabilityFraction out;
    out.used_points = rows.size();
    out.excluded_points = x.rows() - rows.size();
    detail::require(rows.size() >= 2, "separability_fraction: fewer than two non-zero points");

    std::vector<double> per_point(rows.size(), 0.0);
    detail::parallel_for(rows.size(), [&](std::size_t a) {
        const auto xa = x.row(rows[a]);
        std::size_t violations = 0;
        for (std::size_t b = 0; b < rows.size(); ++b) {
            if (b == a) {
                continue;
            }
            const auto xb = x.row(rows[b]);
            double xy = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                xy += xa[j] * xb[j];
            }
            if (xy > alpha * self[a]) {
                ++violations;
            }
        }
        per_point[a] = static_cast<double>(violations) / static_cast<double>(rows.size() - 1);
    });
    double total = 0.0;
    for (double f : per_point) {
        total += f;
    }
    out.mean_inseparability = total / static_cast<double>(rows.size());
    return out;
}

namespace detail {

inline double log_inseparability(double n, double alpha) {
    return 0.5 * (n - 1.0) * std::log1p(-alpha * alpha) - std::log(alpha) - 0.5 * std::log(2.0 * std::numbers::pi * n);
}

} // namespace detail

/**
 * Probability that a random point of the uniform distribution on the unit
 * sphere in R^n is not alpha-separable from another:
 * (1 - alpha^2)^((n-1)/2) / (alpha sqrt(2 pi n)). Decreasing in n.
 */
inline double inseparability_probability(double n, double alpha) {
    return std::exp(detail::log_inseparability(n, alpha));
}

struct SeparabilityEstimate {
    double dimension = 0.0;
    double mean_inseparability = 0.0;
    /// True when the inseparability fell outside the model's range on [0.1, 10000].
    bool saturated = false;
    std::size_t retained_components = 0;
    std::size_t excluded_points = 0;
};

inline constexpr double separability_min_dimension = 0.1;
inline constexpr double separability_max_dimension = 10000.0;

/// Solves inseparability_probability(n, alpha) = p for n in [0.1, 10000] by bisection to 1e-6.
inline double invert_inseparability(double p, double alpha, bool* saturated = nullptr) {
    auto log_model = [&](double n) { return detail::log_inseparability(n, alpha); };
    double lo = separability_min_dimension;
    double hi = separability_max_dimension;
    if (saturated) {
        *saturated = false;
    }
    if (p <= 0.0 || std::log(p) <= log_model(hi)) {
        if (saturated) {
            *saturated = true;
        }
        return hi;
    }
    const double target = std::log(p);
    if (target >= log_model(lo)) {
        if (saturated) {
            *saturated = true;
        }
        return lo;
    }
    while (hi - lo > 1e-6) {
        const double mid = 0.5 * (lo + hi);
        if (log_model(mid) > target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

/**
 * Data preparation for the separability test: centre, project onto the
 * principal components kept by the condition-number rule, scale each to unit
 * variance, then normalise every point to unit length. Points that collapse to
 * (numerically) zero are left as zero rows. Returns the retained component
 * count through `retained`.
 */
inline DataMatrix separability_preprocess(const DataMatrix& x, double condition_number,
                                          std::size_t* retained = nullptr) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    const auto eig = eigen_system(covariance(x));
    const std::size_t k = pca_condition_number(eig.values, condition_number);
    if (retained) {
        *retained = k;
    }

    std::vector<double> mean(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            mean[j] += x(i, j);
        }
    }
    for (auto& m : mean) {
        m /= static_cast<double>(n);
    }

    std::vector<double> z(n * k, 0.0);
    std::vector<double> norms(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double norm2 = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            double proj = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                proj += (x(i, j) - mean[j]) * eig.vectors[c][j];
            }
            proj /= std::sqrt(eig.values[c]);
            z[i * k + c] = proj;
            norm2 += proj * proj;
        }
        norms[i] = std::sqrt(norm2);
    }
    const double largest = *std::max_element(norms.begin(), norms.end());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < k; ++c) {
            double& v = z[i * k + c];
            v = (norms[i] <= 1e-12 * largest) ? 0.0 : v / norms[i];
        }
    }
    return DataMatrix(n, k, std::move(z));
}

/// Fisher-separability dimension of raw data.
inline SeparabilityEstimate separability_dimension(const DataMatrix& x, const DimensionConfig& cfg) {
    cfg.validate();
    detail::require(x.rows() >= 2, "separability_dimension: need at least two rows");
    SeparabilityEstimate out;
    const DataMatrix prepared = separability_preprocess(x, cfg.condition_number, &out.retained_components);
    const auto frac = separability_fraction(prepared, cfg.alpha);
    out.mean_inseparability = frac.mean_inseparability;
    out.excluded_points = frac.excluded_points;
    out.dimension = invert_inseparability(frac.mean_inseparability, cfg.alpha, &out.saturated);
    return out;
}

namespace detail {

// `unit` must already lie in [0, 1]^d.
inline std::vector<std::size_t> occupied_cells(const DataMatrix& unit, const std::vector<double>& scales) {
    const std::size_t n = unit.rows();
    const std::size_t d = unit.cols();
    for (double r : scales) {
        require(r > 0.0 && r <= 1.0, "box_count: scales must lie in (0, 1]");
    }
    std::vector<std::size_t> counts(scales.size());
    parallel_for(scales.size(), [&](std::size_t s) {
        const double r = scales[s];
        const auto last = static_cast<std::int64_t>(std::ceil(1.0 / r)) - 1;
        std::vector<std::int64_t> cells(n * d);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < d; ++j) {
                const auto idx = static_cast<std::int64_t>(std::floor(unit(i, j) / r));
                cells[i * d + j] = std::min(idx, last);
            }
        }
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) {
            order[i] = i;
        }
        auto less = [&](std::size_t a, std::size_t b) {
            return std::lexicographical_compare(cells.begin() + a * d, cells.begin() + (a + 1) * d,
                                                cells.begin() + b * d, cells.begin() + (b + 1) * d);
        };
        std::sort(order.begin(), order.end(), less);
        std::size_t distinct = 1;
        for (std::size_t i = 1; i < n; ++i) {
            if (less(order[i - 1], order[i])) {
                ++distinct;
            }
        }
        counts[s] = distinct;
    });
    return counts;
}

} // namespace detail

/**
 * Occupied cells of the grid with side r anchored at the origin, for each r,
 * after min-max normalising `x` to [0, 1]^d. Coordinate 1.0 falls in the last
 * cell.
 */
inline BoxCountCurve box_count(const DataMatrix& x, const std::vector<double>& scales) {
    detail::require(!scales.empty(), "box_count: empty scale list");
    BoxCountCurve curve;
    curve.scales = scales;
    curve.counts = detail::occupied_cells(preprocess(x, PreprocessMode::minmax), scales);
    return curve;
}

/**
 * Automatic scales r = 2^-j, j = 0, 1, ...: stop before the first r whose
 * occupancy exceeds n/2, but keep going until at least three scales with
 * r < 1 are available. Never goes below 2^-24.
 */
inline std::vector<double> default_box_scales(const DataMatrix& x) {
    const DataMatrix unit = preprocess(x, PreprocessMode::minmax);
    const double half = 0.5 * static_cast<double>(x.rows());
    std::vector<double> scales{1.0};
    for (int j = 1; j <= 24; ++j) {
        const double r = std::ldexp(1.0, -j);
        const bool saturated = static_cast<double>(detail::occupied_cells(unit, {r}).front()) > half;
        if (saturated && scales.size() - 1 >= 3) {
            break;
        }
        scales.push_back(r);
    }
    return scales;
}

/// sum x_i y_i / sum x_i^2.
inline double slope_through_origin(const std::vector<double>& xs, const std::vector<double>& ys) {
    detail::require(!xs.empty() && xs.size() == ys.size(), "slope_through_origin: need equal non-empty vectors");
    double xy = 0.0;
    double xx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        xy += xs[i] * ys[i];
        xx += xs[i] * xs[i];
    }
    detail::require(xx > 0.0, "slope_through_origin: all x values are zero");
    return xy / xx;
}

/// Slope of log N(r) on log(1/r) without intercept; r = 1 is skipped.
inline double fractal_dimension(const DataMatrix& x, const DimensionConfig& cfg) {
    cfg.validate();
    detail::require(x.rows() >= 2, "fractal_dimension: need at least two rows");
    const auto scales = cfg.box_scales.empty() ? default_box_scales(x) : cfg.box_scales;
    const auto curve = box_count(x, scales);
    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t i = 0; i < curve.scales.size(); ++i) {
        if (curve.scales[i] >= 1.0) {
            continue;
        }
        xs.push_back(std::log(1.0 / curve.scales[i]));
        ys.push_back(std::log(static_cast<double>(curve.counts[i])));
    }
    detail::require(xs.size() >= 2, "fractal_dimension: fewer than two usable box scales");
    return slope_through_origin(xs, ys);
}

/// All six estimates for one feature matrix.
inline DimensionReport estimate_all(const DataMatrix& x, const DimensionConfig& cfg) {
    cfg.validate();
    DimensionReport r;
    r.n_attr = x.cols();
    r.cases = x.rows();
    const auto spectrum = sym_eigen(covariance(x));
    r.pca_k = pca_kaiser(spectrum.fve);
    r.pca_bs = pca_broken_stick(spectrum.fve);
    r.pca_cn = pca_condition_number(spectrum.eigenvalues, cfg.condition_number);
    r.sep_d = separability_dimension(x, cfg).dimension;
    r.frac_d = fractal_dimension(x, cfg);
    return r;
}

inline DimensionReport estimate_all(const LabeledDataset& ds, const DimensionConfig& cfg) {
    return estimate_all(ds.data, cfg);
}

/// Pearson correlation of two equal-length vectors with non-zero variance.
inline double pearson_correlation(const std::vector<double>& a, const std::vector<double>& b) {
    detail::require(a.size() == b.size() && a.size() >= 2, "pearson_correlation: need equal vectors of length >= 2");
    const double n = static_cast<double>(a.size());
    double ma = 0.0;
    double mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0;
    double saa = 0.0;
    double sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    detail::require(saa > 0.0 && sbb > 0.0, "pearson_correlation: zero-variance column");
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

inline SquareMatrix pearson_correlation_matrix(const std::vector<std::vector<double>>& columns) {
    detail::require(!columns.empty(), "pearson_correlation_matrix: no columns");
    const std::size_t m = columns.size();
    SquareMatrix r(m);
    for (std::size_t i = 0; i < m; ++i) {
        r(i, i) = 1.0;
        for (std::size_t j = i + 1; j < m; ++j) {
            r(i, j) = r(j, i) = pearson_correlation(columns[i], columns[j]);
        }
    }
    if (m == 1) {
        // still validate the single column
        detail::require(columns[0].size() >= 2, "pearson_correlation_matrix: columns need length >= 2");
        pearson_correlation(columns[0], columns[0]);
    }
    return r;
}

} // namespace lpconc
