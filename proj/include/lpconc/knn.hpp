#pragma once

/**
 * @file knn.hpp
 *
 * Leave-one-out k-nearest-neighbour evaluation under an arbitrary l_p
 * dissimilarity, with the quality measures TNNSC, accuracy, sensitivity and
 * specificity.
 */

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "lpconc/dataset.hpp"
#include "lpconc/detail/parallel.hpp"
#include "lpconc/error.hpp"
#include "lpconc/metrics.hpp"

namespace lpconc {

struct KnnConfig {
    std::size_t k = 11;
    LpExponent p = 2.0;
};

/// Quality of one (dataset, preprocessing, exponent) cell.
struct QualityRecord {
    std::string dataset;
    PreprocessMode preprocessing = PreprocessMode::empty;
    LpExponent p = 2.0;
    /// Same-class members among the k neighbours, summed over all points.
    std::size_t tnnsc = 0;
    double accuracy = 0.0;
    double sensitivity = 0.0;
    double specificity = 0.0;
    std::size_t n = 0;
    std::size_t n_pos = 0;

    bool operator==(const QualityRecord&) const = default;
};

/**
 * The k rows nearest to `query` (excluding the query row itself), nearest
 * first. Equal distances are ordered by row index; exact duplicates of the
 * query sit at distance zero and rank first.
 */
inline std::vector<std::size_t> knn_indices(const DataMatrix& x, std::size_t query, std::size_t k, LpExponent p) {
    const std::size_t n = x.rows();
    detail::require(query < n, "knn_indices: query row out of range");
    detail::require(k >= 1 && k <= n - 1, "knn_indices: k must lie in [1, n-1]");

    std::vector<std::pair<double, std::size_t>> keyed;
    keyed.reserve(n - 1);
    const auto q = x.row(query);
    for (std::size_t j = 0; j < n; ++j) {
        if (j != query) {
            keyed.emplace_back(lp_rank_key(x.row(j), q, p), j);
        }
    }
    auto nth = keyed.begin() + static_cast<std::ptrdiff_t>(k);
    std::nth_element(keyed.begin(), nth - 1, keyed.end());
    std::sort(keyed.begin(), nth);

    std::vector<std::size_t> out;
    out.reserve(k);
    for (auto it = keyed.begin(); it != nth; ++it) {
        out.push_back(it->second);
    }
    return out;
}

/**
 * Classifies every point by majority vote of its k nearest other points.
 * An even k can tie; the nearest neighbour's label decides then.
 */
inline QualityRecord loo_evaluate(const LabeledDataset& ds, const KnnConfig& cfg) {
    const std::size_t n = ds.data.rows();
    detail::require(ds.has_both_classes(), "loo_evaluate: dataset '" + ds.name + "' has a single class");
    detail::require(cfg.k >= 1 && n > cfg.k, "loo_evaluate: need n > k >= 1");

    struct PointOutcome {
        std::size_t same = 0;
        bool correct = false;
    };
    std::vector<PointOutcome> outcomes(n);
    detail::parallel_for(n, [&](std::size_t i) {
        const auto neighbours = knn_indices(ds.data, i, cfg.k, cfg.p);
        std::size_t positives = 0;
        std::size_t same = 0;
        for (std::size_t j : neighbours) {
            positives += ds.labels[j] == Label::positive ? 1 : 0;
            same += ds.labels[j] == ds.labels[i] ? 1 : 0;
        }
        Label predicted;
        if (2 * positives > cfg.k) {
            predicted = Label::positive;
        } else if (2 * positives < cfg.k) {
            predicted = Label::negative;
        } else {
            predicted = ds.labels[neighbours.front()];
        }
        outcomes[i] = {same, predicted == ds.labels[i]};
    });

    QualityRecord r;
    r.dataset = ds.name;
    r.p = cfg.p;
    r.n = n;
    r.n_pos = ds.positives();
    std::size_t correct = 0;
    std::size_t correct_pos = 0;
    std::size_t correct_neg = 0;
    for (std::size_t i = 0; i < n; ++i) {
        r.tnnsc += outcomes[i].same;
        if (outcomes[i].correct) {
            ++correct;
            (ds.labels[i] == Label::positive ? correct_pos : correct_neg) += 1;
        }
    }
    r.accuracy = static_cast<double>(correct) / static_cast<double>(n);
    r.sensitivity = static_cast<double>(correct_pos) / static_cast<double>(r.n_pos);
    r.specificity = static_cast<double>(correct_neg) / static_cast<double>(n - r.n_pos);
    return r;
}

/// One record per (mode, p), modes outermost; preprocessing precedes distances.
inline std::vector<QualityRecord> evaluate_grid(const LabeledDataset& ds, const std::vector<LpExponent>& ps,
                                                const std::vector<PreprocessMode>& modes, std::size_t k) {
    std::vector<QualityRecord> out;
    out.reserve(ps.size() * modes.size());
    for (auto mode : modes) {
        const LabeledDataset prepared = preprocess(ds, mode);
        for (auto p : ps) {
            auto record = loo_evaluate(prepared, {k, p});
            record.preprocessing = mode;
            out.push_back(std::move(record));
        }
    }
    return out;
}

// JSON: field names are fixed; p is a number, or the string "inf".

inline void to_json(nlohmann::json& j, const QualityRecord& r) {
    j = nlohmann::json{{"dataset", r.dataset},
                       {"preprocessing", to_string(r.preprocessing)},
                       {"p", r.p.is_infinite() ? nlohmann::json("inf") : nlohmann::json(r.p.value())},
                       {"tnnsc", r.tnnsc},
                       {"accuracy", r.accuracy},
                       {"sensitivity", r.sensitivity},
                       {"specificity", r.specificity},
                       {"n", r.n},
                       {"n_pos", r.n_pos}};
}

inline void from_json(const nlohmann::json& j, QualityRecord& r) {
    r.dataset = j.at("dataset").get<std::string>();
    r.preprocessing = parse_preprocess_mode(j.at("preprocessing").get<std::string>());
    const auto& p = j.at("p");
    r.p = p.is_string() ? LpExponent::parse(p.get<std::string>()) : LpExponent(p.get<double>());
    r.tnnsc = j.at("tnnsc").get<std::size_t>();
    r.accuracy = j.at("accuracy").get<double>();
    r.sensitivity = j.at("sensitivity").get<double>();
    r.specificity = j.at("specificity").get<double>();
    r.n = j.at("n").get<std::size_t>();
    r.n_pos = j.at("n_pos").get<std::size_t>();
}

} // namespace lpconc
