#pragma once

/**
 * @file stats.hpp
 *
 * Statistical comparison of classifiers: proportion z-test with a
 * sample-size-adaptive significance level, tied ranking, Friedman test,
 * Nemenyi critical distance, Wilcoxon signed-rank test and the
 * best/worst frequency tallies.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "lpconc/error.hpp"
#include "lpconc/knn.hpp"
#include "lpconc/metrics.hpp"

namespace lpconc {

struct TestOutcome {
    double statistic = 0.0;
    double p_value = 1.0;
    double alpha = 0.05;
    bool significant = false;
};

namespace detail {
inline TestOutcome make_outcome(double statistic, double p_value, double alpha) {
    p_value = std::clamp(p_value, 0.0, 1.0);
    return {statistic, p_value, alpha, p_value < alpha};
}
} // namespace detail

/// Standard normal CDF.
inline double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

/// P(X >= x) for X ~ chi^2(df).
inline double chi2_sf(double x, std::size_t df) {
    detail::require(df >= 1, "chi2_sf: df must be positive");
    detail::require(x >= 0.0, "chi2_sf: x must be non-negative");
    if (x == 0.0) {
        return 1.0;
    }
    if (std::isinf(x)) {
        return 0.0;
    }
    return boost::math::gamma_q(0.5 * static_cast<double>(df), 0.5 * x);
}

/**
 * Two proportions measured on the same sample size n:
 * z = |p1 - p2| / sqrt(((p1 + p2) / n) (1 - (p1 + p2) / 2)), one-sided
 * p-value Phi(-z).
 */
inline TestOutcome proportion_z_test(double p1, double p2, std::size_t n, double alpha) {
    detail::require(p1 >= 0.0 && p1 <= 1.0 && p2 >= 0.0 && p2 <= 1.0, "proportion_z_test: proportions must lie in [0, 1]");
    detail::require(n >= 1, "proportion_z_test: n must be positive");
    const double pooled = 0.5 * (p1 + p2);
    detail::require(pooled > 0.0 && pooled < 1.0, "proportion_z_test: pooled proportion is 0 or 1");
    const double z = std::fabs(p1 - p2) / std::sqrt(((p1 + p2) / static_cast<double>(n)) * (1.0 - pooled));
    return detail::make_outcome(z, normal_cdf(-z), alpha);
}

struct AdaptiveAlphaOptions {
    /// Expected effect size as a fraction of n.
    double effect = 0.01;
    /// Bonferroni divisor; 28 = C(8, 2) exponent pairs.
    std::size_t comparisons = 28;
    double floor = 1e-5;
};

/**
 * Significance level scaled to the dataset:
 * max{ Phi(-(d/s) sqrt(n/8)) / comparisons, floor } with d = effect * n and
 * s^2 = n_pos (n - n_pos) / n.
 *
 * The effect is converted to the count scale so d/s is dimensionless, and the
 * normal argument is negated; with a positive argument Phi >= 0.5 and the
 * floor could never be reached.
 */
inline double adaptive_alpha(std::size_t n, std::size_t n_pos, const AdaptiveAlphaOptions& opt = {}) {
    detail::require(n_pos > 0 && n_pos < n, "adaptive_alpha: both classes must be non-empty");
    detail::require(opt.effect > 0.0, "adaptive_alpha: effect must be positive");
    detail::require(opt.comparisons >= 1, "adaptive_alpha: need at least one comparison");
    const double nn = static_cast<double>(n);
    const double d = opt.effect * nn;
    const double s = std::sqrt(static_cast<double>(n_pos) * static_cast<double>(n - n_pos) / nn);
    const double arg = (d / s) * std::sqrt(nn / 8.0);
    return std::max(normal_cdf(-arg) / static_cast<double>(opt.comparisons), opt.floor);
}

/// Ranks 1..m, ascending (largest value gets rank m); ties share their mean rank.
inline std::vector<double> tied_ranks(const std::vector<double>& values) {
    detail::require(!values.empty(), "tied_ranks: empty input");
    const std::size_t m = values.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(m);
    std::size_t i = 0;
    while (i < m) {
        std::size_t j = i;
        while (j + 1 < m && values[order[j + 1]] == values[order[i]]) {
            ++j;
        }
        const double mean_rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t t = i; t <= j; ++t) {
            ranks[order[t]] = mean_rank;
        }
        i = j + 1;
    }
    return ranks;
}

struct RankMatrix {
    /// ranks[j][i]: rank of classifier i on database j.
    std::vector<std::vector<double>> ranks;
    /// Column means.
    std::vector<double> mean_ranks;
};

struct FriedmanResult {
    TestOutcome outcome;
    RankMatrix ranks;
};

/**
 * Friedman test over an N x m quality matrix (rows = databases, columns =
 * classifiers):
 *
 *   chi2_F = 4 N^2 (m-1) (sum R_i^2 - m (m+1)^2 / 4)
 *            / (4 sum_ij r_ji^2 - N m (m+1)^2)
 *
 * which stays exact under ties; p = P(chi^2(m-1) >= chi2_F). Fully tied input
 * (zero denominator) gives statistic 0 and p = 1.
 */
inline FriedmanResult friedman_test(const std::vector<std::vector<double>>& quality, double alpha = 0.05) {
    const std::size_t big_n = quality.size();
    detail::require(big_n >= 2, "friedman_test: need at least two databases");
    const std::size_t m = quality.front().size();
    detail::require(m >= 2, "friedman_test: need at least two classifiers");

    FriedmanResult out;
    out.ranks.mean_ranks.assign(m, 0.0);
    double sum_sq = 0.0;
    for (const auto& row : quality) {
        detail::require(row.size() == m, "friedman_test: ragged quality matrix");
        auto r = tied_ranks(row);
        for (std::size_t i = 0; i < m; ++i) {
            out.ranks.mean_ranks[i] += r[i];
            sum_sq += r[i] * r[i];
        }
        out.ranks.ranks.push_back(std::move(r));
    }
    const double nn = static_cast<double>(big_n);
    const double mm = static_cast<double>(m);
    double sum_mean_sq = 0.0;
    for (auto& rbar : out.ranks.mean_ranks) {
        rbar /= nn;
        sum_mean_sq += rbar * rbar;
    }
    const double denominator = 4.0 * sum_sq - nn * mm * (mm + 1.0) * (mm + 1.0);
    if (denominator <= 0.0) {
        out.outcome = detail::make_outcome(0.0, 1.0, alpha);
        return out;
    }
    const double numerator = 4.0 * nn * nn * (mm - 1.0) * (sum_mean_sq - mm * (mm + 1.0) * (mm + 1.0) / 4.0);
    const double statistic = std::max(0.0, numerator / denominator);
    out.outcome = detail::make_outcome(statistic, chi2_sf(statistic, m - 1), alpha);
    return out;
}

namespace detail {

// Studentized range quantiles q(1 - alpha; m, inf) / sqrt(2), m = 2..20.
inline constexpr std::array<double, 19> nemenyi_q_005 = {
    1.959964, 2.343701, 2.569032, 2.727774, 2.849705, 2.948320, 3.030878, 3.101730, 3.163684, 3.218654,
    3.268004, 3.312739, 3.353618, 3.391230, 3.426041, 3.458425, 3.488685, 3.517073, 3.543799};
inline constexpr std::array<double, 19> nemenyi_q_010 = {
    1.644854, 2.052293, 2.291341, 2.459516, 2.588521, 2.692732, 2.779884, 2.854606, 2.919889, 2.977768,
    3.029694, 3.076733, 3.119693, 3.159199, 3.195743, 3.229723, 3.261461, 3.291224, 3.319233};

} // namespace detail

/// Critical value q_{alpha, m} for the Nemenyi test; alpha in {0.05, 0.10}, m in [2, 20].
inline double nemenyi_q(std::size_t m, double alpha) {
    detail::require(m >= 2 && m <= 20, "nemenyi_q: m must lie in [2, 20]");
    if (std::fabs(alpha - 0.05) < 1e-12) {
        return detail::nemenyi_q_005[m - 2];
    }
    if (std::fabs(alpha - 0.10) < 1e-12) {
        return detail::nemenyi_q_010[m - 2];
    }
    throw Error("nemenyi_q: no table for alpha = " + std::to_string(alpha));
}

/// CD = q_{alpha, m} sqrt(m (m + 1) / (6 N)).
inline double nemenyi_cd(std::size_t m, std::size_t big_n, double alpha = 0.05) {
    detail::require(big_n >= 1, "nemenyi_cd: N must be positive");
    const double mm = static_cast<double>(m);
    return nemenyi_q(m, alpha) * std::sqrt(mm * (mm + 1.0) / (6.0 * static_cast<double>(big_n)));
}

/**
 * Two-sided Wilcoxon signed-rank test of paired samples. Zero differences are
 * dropped; |differences| get tied ranks. The statistic is W+, the rank sum of
 * positive differences. Up to 25 non-zero differences the p-value comes from
 * the exact permutation distribution of the (possibly tied) ranks; beyond that
 * from the normal approximation with tie and continuity corrections.
 */
inline TestOutcome wilcoxon_signed_rank(const std::vector<double>& a, const std::vector<double>& b,
                                        double alpha = 0.05) {
    detail::require(!a.empty() && a.size() == b.size(), "wilcoxon_signed_rank: need equal non-empty samples");
    std::vector<double> diffs;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        if (diff != 0.0) {
            diffs.push_back(diff);
        }
    }
    if (diffs.empty()) {
        return detail::make_outcome(0.0, 1.0, alpha);
    }
    const std::size_t n = diffs.size();
    std::vector<double> magnitudes(n);
    for (std::size_t i = 0; i < n; ++i) {
        magnitudes[i] = std::fabs(diffs[i]);
    }
    const auto ranks = tied_ranks(magnitudes);
    double w_plus = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (diffs[i] > 0.0) {
            w_plus += ranks[i];
        }
    }

    if (n <= 25) {
        // tied ranks are multiples of 1/2: count sign assignments over doubled ranks
        std::vector<std::size_t> doubled(n);
        std::size_t total = 0;
        for (std::size_t i = 0; i < n; ++i) {
            doubled[i] = static_cast<std::size_t>(std::lround(2.0 * ranks[i]));
            total += doubled[i];
        }
        std::vector<double> ways(total + 1, 0.0);
        ways[0] = 1.0;
        std::size_t reach = 0;
        for (std::size_t r : doubled) {
            for (std::size_t s = reach + 1; s-- > 0;) {
                if (ways[s] != 0.0) {
                    ways[s + r] += ways[s];
                }
            }
            reach += r;
        }
        const auto observed = static_cast<std::size_t>(std::lround(2.0 * w_plus));
        double lower = 0.0;
        double upper = 0.0;
        for (std::size_t s = 0; s <= total; ++s) {
            if (s <= observed) {
                lower += ways[s];
            }
            if (s >= observed) {
                upper += ways[s];
            }
        }
        const double all = std::ldexp(1.0, static_cast<int>(n));
        const double p = std::min(1.0, 2.0 * std::min(lower, upper) / all);
        return detail::make_outcome(w_plus, p, alpha);
    }

    const double nn = static_cast<double>(n);
    const double mean = nn * (nn + 1.0) / 4.0;
    double tie_term = 0.0;
    {
        std::vector<double> sorted(ranks);
        std::sort(sorted.begin(), sorted.end());
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j + 1 < n && sorted[j + 1] == sorted[i]) {
                ++j;
            }
            const double t = static_cast<double>(j - i + 1);
            tie_term += t * t * t - t;
            i = j + 1;
        }
    }
    const double variance = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
    if (variance <= 0.0) {
        return detail::make_outcome(w_plus, 1.0, alpha);
    }
    const double centred = w_plus - mean;
    const double correction = centred > 0.0 ? 0.5 : (centred < 0.0 ? -0.5 : 0.0);
    const double z = (centred - correction) / std::sqrt(variance);
    return detail::make_outcome(w_plus, 2.0 * normal_cdf(-std::fabs(z)), alpha);
}

enum class QualityMeasure { tnnsc, accuracy, sensitivity_plus_specificity };

inline std::string to_string(QualityMeasure m) {
    switch (m) {
    case QualityMeasure::tnnsc:
        return "TNNSC";
    case QualityMeasure::accuracy:
        return "Accuracy";
    case QualityMeasure::sensitivity_plus_specificity:
        return "Se+Sp";
    }
    return "?";
}

/// The value ranked and compared for a measure. TNNSC is reported as the proportion tnnsc / (k n).
inline double measure_value(const QualityRecord& r, QualityMeasure m, std::size_t k = 11) {
    switch (m) {
    case QualityMeasure::tnnsc:
        return static_cast<double>(r.tnnsc) / static_cast<double>(k * r.n);
    case QualityMeasure::accuracy:
        return r.accuracy;
    case QualityMeasure::sensitivity_plus_specificity:
        return r.sensitivity + r.specificity;
    }
    return 0.0;
}

/// Per-exponent tallies over databases.
struct FrequencyReport {
    QualityMeasure measure = QualityMeasure::accuracy;
    std::vector<LpExponent> exponents;
    std::vector<std::size_t> best;
    std::vector<std::size_t> worst;
    std::vector<std::size_t> insignificant_from_best;
    std::vector<std::size_t> insignificant_from_worst;
    /// False for Se+Sp, which is not a proportion; only best/worst are tallied.
    bool has_significance = true;
};

/**
 * Best / worst / insignificantly-different tallies. `by_database[j]` holds one
 * record per exponent, in the same exponent order for every database. Each
 * database uses its own adaptive significance level; the z-test sample size is
 * k n for TNNSC and n for accuracy.
 */
inline FrequencyReport frequency_report(const std::vector<std::vector<QualityRecord>>& by_database,
                                        QualityMeasure measure, std::size_t k = 11,
                                        const AdaptiveAlphaOptions& opt = {}) {
    detail::require(!by_database.empty(), "frequency_report: no databases");
    FrequencyReport out;
    out.measure = measure;
    out.has_significance = measure != QualityMeasure::sensitivity_plus_specificity;
    for (const auto& r : by_database.front()) {
        out.exponents.push_back(r.p);
    }
    const std::size_t m = out.exponents.size();
    detail::require(m >= 1, "frequency_report: no exponents");
    out.best.assign(m, 0);
    out.worst.assign(m, 0);
    out.insignificant_from_best.assign(m, 0);
    out.insignificant_from_worst.assign(m, 0);

    for (const auto& db : by_database) {
        detail::require(db.size() == m, "frequency_report: database '" + (db.empty() ? std::string("?") : db.front().dataset) +
                                            "' is missing exponent cells");
        std::vector<double> values(m);
        for (std::size_t i = 0; i < m; ++i) {
            detail::require(db[i].p == out.exponents[i], "frequency_report: exponent order differs between databases");
            values[i] = measure_value(db[i], measure, k);
        }
        const double hi = *std::max_element(values.begin(), values.end());
        const double lo = *std::min_element(values.begin(), values.end());
        for (std::size_t i = 0; i < m; ++i) {
            out.best[i] += values[i] == hi ? 1 : 0;
            out.worst[i] += values[i] == lo ? 1 : 0;
        }
        if (!out.has_significance) {
            continue;
        }
        const auto& ref = db.front();
        const double alpha = adaptive_alpha(ref.n, ref.n_pos, opt);
        const std::size_t sample = measure == QualityMeasure::tnnsc ? k * ref.n : ref.n;
        auto same_as = [&](double v, double target) {
            return v == target || !proportion_z_test(v, target, sample, alpha).significant;
        };
        for (std::size_t i = 0; i < m; ++i) {
            out.insignificant_from_best[i] += same_as(values[i], hi) ? 1 : 0;
            out.insignificant_from_worst[i] += same_as(values[i], lo) ? 1 : 0;
        }
    }
    return out;
}

} // namespace lpconc
