#pragma once

/**
 * @file commands.hpp
 *
 * The command-line pipeline: synthetic experiments (gen, table1,
 * concentration), dimension reports (dims), kNN quality grids (knn-eval) and
 * statistical comparison reports (compare). Each command reads a `RunConfig`,
 * writes its primary output to a stream or file, and returns the process exit
 * code: 0 on success, 2 when some datasets failed but the rest completed,
 * 1 on invalid arguments or fatal errors.
 */

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"

#include "lpconc/lpconc.hpp"

namespace lpconc::cli {

enum class Scale { desk, paper };

struct RunConfig {
    std::string command;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> n;
    std::vector<std::size_t> dims;
    std::vector<LpExponent> ps;
    std::size_t k = 11;
    Scale scale = Scale::desk;
    std::string manifest;
    std::string in;
    std::string out;
    std::vector<PreprocessMode> modes;
    /// table1 only: point counts per sample.
    std::vector<std::size_t> points;
    /// table1 only.
    std::size_t reps = 1000;
};

inline constexpr int exit_ok = 0;
inline constexpr int exit_error = 1;
inline constexpr int exit_partial = 2;

/// d = 1, 2, 3, 4, 5, 10, 15, ..., 195, 200.
inline std::vector<std::size_t> paper_concentration_dims() {
    std::vector<std::size_t> dims{1, 2, 3, 4, 5};
    for (std::size_t d = 10; d <= 200; d += 5) {
        dims.push_back(d);
    }
    return dims;
}

inline std::vector<std::size_t> table1_dims() { return {1, 2, 3, 4, 10, 15, 20, 100}; }

/// Shortest decimal text that reads back to the same double.
inline std::string format_real(double v) {
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string format_fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

namespace detail {

inline std::uint64_t require_seed(const RunConfig& cfg) {
    lpconc::detail::require(cfg.seed.has_value(), "--seed is required");
    return *cfg.seed;
}

inline std::vector<LpExponent> exponents_or_default(const RunConfig& cfg) {
    return cfg.ps.empty() ? canonical_exponents() : cfg.ps;
}

// Writes to a temporary file next to `path` and renames it into place.
inline void write_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        lpconc::detail::require(static_cast<bool>(out), "cannot write '" + tmp + "'");
        out << content;
        lpconc::detail::require(static_cast<bool>(out), "failed writing '" + tmp + "'");
    }
    std::filesystem::rename(tmp, path);
}

inline void emit(const RunConfig& cfg, std::ostream& stdout_stream, const std::string& content) {
    if (cfg.out.empty()) {
        stdout_stream << content;
    } else {
        write_file(cfg.out, content);
    }
}

inline nlohmann::json real_or_null(double v) {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

} // namespace detail

/// Uniform-cube sample as CSV with header x1..xd.
inline int cmd_gen(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        const auto seed = detail::require_seed(cfg);
        const std::size_t n = cfg.n.value_or(1000);
        lpconc::detail::require(cfg.dims.size() <= 1, "--dims takes a single dimension");
        const std::size_t d = cfg.dims.empty() ? 10 : cfg.dims.front();
        const DataMatrix x = gen_uniform_cube(n, d, seed);
        std::ostringstream csv;
        for (std::size_t j = 0; j < d; ++j) {
            csv << (j ? "," : "") << 'x' << (j + 1);
        }
        csv << '\n';
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < d; ++j) {
                csv << (j ? "," : "") << format_real(x(i, j));
            }
            csv << '\n';
        }
        detail::emit(cfg, out, csv.str());
        return exit_ok;
    } catch (const std::exception& e) {
        err << "gen: " << e.what() << '\n';
        return exit_error;
    }
}

/// Fraction of repetitions with RC_1 > RC_2, as CSV dim,k_points,reps,fraction.
inline int cmd_table1(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        const auto seed = detail::require_seed(cfg);
        const auto dims = cfg.dims.empty() ? table1_dims() : cfg.dims;
        const auto points = cfg.points.empty() ? std::vector<std::size_t>{10, 20, 100} : cfg.points;
        lpconc::detail::require(cfg.reps >= 1, "--reps must be positive");

        std::vector<std::vector<RcComparisonRow>> by_points;
        for (auto k : points) {
            by_points.push_back(rc_comparison_experiment(k, dims, cfg.reps, seed));
        }
        std::ostringstream csv;
        csv << "dim,k_points,reps,fraction\n";
        for (std::size_t di = 0; di < dims.size(); ++di) {
            for (const auto& rows : by_points) {
                const auto& row = rows[di];
                csv << row.dimension << ',' << row.points << ',' << row.repetitions << ','
                    << format_fixed(row.fraction, 6) << '\n';
            }
        }
        detail::emit(cfg, out, csv.str());
        return exit_ok;
    } catch (const std::exception& e) {
        err << "table1: " << e.what() << '\n';
        return exit_error;
    }
}

/// RC and CV of all pairwise distances per (dim, p), as CSV dim,p,rc,cv.
inline int cmd_concentration(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        const auto seed = detail::require_seed(cfg);
        const std::size_t n = cfg.n.value_or(cfg.scale == Scale::paper ? 10000 : 1000);
        const auto dims = cfg.dims.empty() ? paper_concentration_dims() : cfg.dims;
        const auto ps = detail::exponents_or_default(cfg);
        const auto records = concentration_sweep(n, dims, ps, seed);
        std::ostringstream csv;
        csv << "dim,p,rc,cv\n";
        for (const auto& r : records) {
            csv << r.dimension << ',' << r.p.to_string() << ',' << format_real(r.rc) << ',' << format_real(r.cv) << '\n';
        }
        detail::emit(cfg, out, csv.str());
        return exit_ok;
    } catch (const std::exception& e) {
        err << "concentration: " << e.what() << '\n';
        return exit_error;
    }
}

/**
 * One CSV row of dimension estimates per manifest dataset, plus
 * `<out>.analysis.json` with the correlation matrix of the six estimates and
 * the through-origin regression slopes.
 */
inline int cmd_dims(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    std::vector<DatasetManifest> manifests;
    PreprocessMode mode = PreprocessMode::empty;
    try {
        lpconc::detail::require(!cfg.manifest.empty(), "--manifest is required");
        lpconc::detail::require(!cfg.out.empty(), "--out is required");
        lpconc::detail::require(cfg.modes.size() <= 1, "--preprocess takes a single mode");
        if (!cfg.modes.empty()) {
            mode = cfg.modes.front();
        }
        manifests = load_manifest_file(cfg.manifest);
    } catch (const std::exception& e) {
        err << "dims: " << e.what() << '\n';
        return exit_error;
    }
    (void)out;

    const DimensionConfig dim_cfg;
    std::vector<std::pair<std::string, DimensionReport>> reports;
    bool failures = false;
    for (const auto& m : manifests) {
        try {
            const auto ds = preprocess(load_csv(m), mode);
            reports.emplace_back(m.name, estimate_all(ds, dim_cfg));
        } catch (const std::exception& e) {
            err << "dims: dataset '" << m.name << "': " << e.what() << '\n';
            failures = true;
        }
    }

    std::ostringstream csv;
    csv << "name,n_attr,cases,pca_k,pca_bs,pca_cn,sep_d,frac_d\n";
    for (const auto& [name, r] : reports) {
        csv << name << ',' << r.n_attr << ',' << r.cases << ',' << r.pca_k << ',' << r.pca_bs << ',' << r.pca_cn << ','
            << format_fixed(r.sep_d, 4) << ',' << format_fixed(r.frac_d, 4) << '\n';
    }

    const std::vector<std::string> names{"n_attr", "pca_k", "pca_bs", "pca_cn", "sep_d", "frac_d"};
    std::vector<std::vector<double>> columns(names.size());
    for (const auto& [name, r] : reports) {
        const double row[] = {static_cast<double>(r.n_attr), static_cast<double>(r.pca_k), static_cast<double>(r.pca_bs),
                              static_cast<double>(r.pca_cn), r.sep_d, r.frac_d};
        for (std::size_t c = 0; c < names.size(); ++c) {
            columns[c].push_back(row[c]);
        }
    }
    nlohmann::json analysis;
    analysis["datasets"] = reports.size();
    analysis["preprocessing"] = to_string(mode);
    analysis["covariance"] = "column-centred, divided by n";
    analysis["separability_pipeline"] = "centre, whiten onto condition-number components, unit-normalise";
    analysis["condition_number"] = dim_cfg.condition_number;
    analysis["alpha"] = dim_cfg.alpha;
    analysis["columns"] = names;
    nlohmann::json matrix = nlohmann::json::array();
    for (std::size_t a = 0; a < names.size(); ++a) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t b = 0; b < names.size(); ++b) {
            double value = std::numeric_limits<double>::quiet_NaN();
            try {
                value = a == b ? 1.0 : pearson_correlation(columns[a], columns[b]);
                if (a == b) {
                    pearson_correlation(columns[a], columns[a]);
                }
            } catch (const Error&) {
                value = std::numeric_limits<double>::quiet_NaN();
            }
            row.push_back(detail::real_or_null(value));
        }
        matrix.push_back(std::move(row));
    }
    analysis["correlation"] = std::move(matrix);

    const std::tuple<const char*, std::size_t, std::size_t> fits[] = {
        {"pca_k_on_n_attr", 1, 0}, {"pca_bs_on_n_attr", 2, 0}, {"sep_d_on_pca_cn", 4, 3}, {"frac_d_on_pca_cn", 5, 3}};
    nlohmann::json slopes = nlohmann::json::object();
    for (const auto& [label, y, x] : fits) {
        double slope = std::numeric_limits<double>::quiet_NaN();
        try {
            slope = slope_through_origin(columns[x], columns[y]);
        } catch (const Error&) {
        }
        slopes[label] = detail::real_or_null(slope);
    }
    analysis["slopes_through_origin"] = std::move(slopes);

    try {
        detail::write_file(cfg.out, csv.str());
        detail::write_file(cfg.out + ".analysis.json", analysis.dump(2) + "\n");
    } catch (const std::exception& e) {
        err << "dims: " << e.what() << '\n';
        return exit_error;
    }
    return failures ? exit_partial : exit_ok;
}

namespace detail {

inline std::string cell_key(const std::string& dataset, PreprocessMode mode, LpExponent p) {
    return dataset + '\x1f' + to_string(mode) + '\x1f' + p.to_string();
}

inline std::vector<QualityRecord> read_records(const std::filesystem::path& path) {
    std::ifstream in(path);
    lpconc::detail::require(static_cast<bool>(in), "cannot open results '" + path.string() + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error("results '" + path.string() + "' is not valid JSON: " + e.what());
    }
    lpconc::detail::require(j.is_array(), "results '" + path.string() + "' must be a JSON array");
    return j.get<std::vector<QualityRecord>>();
}

inline int mode_order(PreprocessMode m) { return static_cast<int>(m); }

} // namespace detail

/**
 * LOO kNN quality records for every (dataset, mode, p) cell, as a JSON array.
 * Cells already present in `--out` are kept and not recomputed; the file is
 * rewritten after each dataset so an interrupted run resumes where it stopped.
 */
inline int cmd_knn_eval(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    std::vector<DatasetManifest> manifests;
    std::vector<QualityRecord> existing;
    try {
        lpconc::detail::require(!cfg.manifest.empty(), "--manifest is required");
        lpconc::detail::require(!cfg.out.empty(), "--out is required");
        lpconc::detail::require(cfg.k >= 1, "--k must be positive");
        manifests = load_manifest_file(cfg.manifest);
        if (std::filesystem::exists(cfg.out)) {
            existing = detail::read_records(cfg.out);
        }
    } catch (const std::exception& e) {
        err << "knn-eval: " << e.what() << '\n';
        return exit_error;
    }
    (void)out;

    const auto ps = detail::exponents_or_default(cfg);
    const auto modes = cfg.modes.empty()
                           ? std::vector<PreprocessMode>(std::begin(all_preprocess_modes), std::end(all_preprocess_modes))
                           : cfg.modes;

    std::map<std::string, QualityRecord> cells;
    for (auto& r : existing) {
        cells.emplace(detail::cell_key(r.dataset, r.preprocessing, r.p), r);
    }

    auto render = [&]() {
        // manifest order, then mode, then p; cells of other datasets follow in name order
        std::map<std::string, std::size_t> position;
        for (std::size_t i = 0; i < manifests.size(); ++i) {
            position.emplace(manifests[i].name, i);
        }
        std::vector<QualityRecord> all;
        for (const auto& [key, r] : cells) {
            all.push_back(r);
        }
        std::sort(all.begin(), all.end(), [&](const QualityRecord& a, const QualityRecord& b) {
            auto rank = [&](const QualityRecord& r) {
                auto it = position.find(r.dataset);
                return it == position.end() ? manifests.size() : it->second;
            };
            return std::make_tuple(rank(a), a.dataset, detail::mode_order(a.preprocessing), a.p) <
                   std::make_tuple(rank(b), b.dataset, detail::mode_order(b.preprocessing), b.p);
        });
        return nlohmann::json(all).dump(2) + "\n";
    };

    bool failures = false;
    for (const auto& m : manifests) {
        std::vector<std::pair<PreprocessMode, LpExponent>> missing;
        for (auto mode : modes) {
            for (auto p : ps) {
                if (!cells.count(detail::cell_key(m.name, mode, p))) {
                    missing.emplace_back(mode, p);
                }
            }
        }
        if (missing.empty()) {
            continue;
        }
        try {
            const auto ds = load_csv(m);
            std::optional<PreprocessMode> prepared_mode;
            std::optional<LabeledDataset> prepared;
            for (const auto& [mode, p] : missing) {
                if (prepared_mode != mode) {
                    prepared = preprocess(ds, mode);
                    prepared_mode = mode;
                }
                auto record = loo_evaluate(*prepared, {cfg.k, p});
                record.preprocessing = mode;
                cells[detail::cell_key(m.name, mode, p)] = record;
            }
            detail::write_file(cfg.out, render());
        } catch (const std::exception& e) {
            err << "knn-eval: dataset '" << m.name << "': " << e.what() << '\n';
            failures = true;
        }
    }
    try {
        detail::write_file(cfg.out, render());
    } catch (const std::exception& e) {
        err << "knn-eval: " << e.what() << '\n';
        return exit_error;
    }
    return failures ? exit_partial : exit_ok;
}

/// Everything the compare command derives from a complete results grid.
struct ComparisonReport {
    std::vector<std::string> datasets;
    std::vector<PreprocessMode> modes;
    std::vector<LpExponent> exponents;
    nlohmann::json json;
    std::string markdown;
};

namespace detail {

inline std::string format_p_value(double p) {
    return p < 1e-4 ? std::string("<0.0001") : format_fixed(p, 4);
}

inline std::string mode_title(PreprocessMode m) {
    switch (m) {
    case PreprocessMode::empty:
        return "Empty preprocessing";
    case PreprocessMode::standardise:
        return "Standardisation";
    case PreprocessMode::minmax:
        return "Min-max normalization";
    }
    return "?";
}

inline std::string mode_letter(PreprocessMode m) {
    switch (m) {
    case PreprocessMode::empty:
        return "E";
    case PreprocessMode::standardise:
        return "S";
    case PreprocessMode::minmax:
        return "M";
    }
    return "?";
}

inline nlohmann::json exponent_json(LpExponent p) {
    return p.is_infinite() ? nlohmann::json("inf") : nlohmann::json(p.value());
}

} // namespace detail

/**
 * Builds the comparison report: frequency tables per (measure, mode), Friedman
 * test with Nemenyi critical distance per (mode, measure), and Wilcoxon
 * p-values for exponent pairs (0.5, 1), (0.5, 2), (1, 2) and preprocessing
 * pairs (E, S), (E, M), (S, M). Requires every (dataset, mode, p) cell.
 */
inline ComparisonReport build_comparison(const std::vector<QualityRecord>& records, std::size_t k = 11) {
    lpconc::detail::require(!records.empty(), "no records");
    ComparisonReport rep;
    std::set<LpExponent> exps;
    std::set<int> mode_ids;
    for (const auto& r : records) {
        if (std::find(rep.datasets.begin(), rep.datasets.end(), r.dataset) == rep.datasets.end()) {
            rep.datasets.push_back(r.dataset);
        }
        exps.insert(r.p);
        mode_ids.insert(detail::mode_order(r.preprocessing));
    }
    std::sort(rep.datasets.begin(), rep.datasets.end());
    rep.exponents.assign(exps.begin(), exps.end());
    for (int id : mode_ids) {
        rep.modes.push_back(static_cast<PreprocessMode>(id));
    }
    lpconc::detail::require(rep.datasets.size() >= 2, "need at least two datasets");
    lpconc::detail::require(rep.exponents.size() >= 2, "need at least two exponents");

    std::map<std::string, const QualityRecord*> cells;
    for (const auto& r : records) {
        const auto key = detail::cell_key(r.dataset, r.preprocessing, r.p);
        lpconc::detail::require(cells.emplace(key, &r).second, "duplicate cell " + r.dataset + "/" +
                                                                    to_string(r.preprocessing) + "/" + r.p.to_string());
    }
    // grid[mode][dataset][exponent]
    std::map<int, std::vector<std::vector<QualityRecord>>> grid;
    std::vector<std::string> missing;
    for (auto mode : rep.modes) {
        auto& by_db = grid[detail::mode_order(mode)];
        for (const auto& name : rep.datasets) {
            std::vector<QualityRecord> row;
            for (auto p : rep.exponents) {
                auto it = cells.find(detail::cell_key(name, mode, p));
                if (it == cells.end()) {
                    missing.push_back(name + "/" + to_string(mode) + "/" + p.to_string());
                } else {
                    row.push_back(*it->second);
                }
            }
            by_db.push_back(std::move(row));
        }
    }
    if (!missing.empty()) {
        std::string list;
        for (std::size_t i = 0; i < missing.size() && i < 10; ++i) {
            list += (i ? ", " : "") + missing[i];
        }
        throw Error("incomplete grid, " + std::to_string(missing.size()) + " missing cells (" + list + ")");
    }

    const QualityMeasure measures[] = {QualityMeasure::tnnsc, QualityMeasure::accuracy,
                                       QualityMeasure::sensitivity_plus_specificity};
    const std::size_t m = rep.exponents.size();
    const std::size_t big_n = rep.datasets.size();

    nlohmann::json& j = rep.json;
    j["datasets"] = rep.datasets;
    j["exponents"] = nlohmann::json::array();
    for (auto p : rep.exponents) {
        j["exponents"].push_back(detail::exponent_json(p));
    }
    j["k"] = k;

    std::ostringstream md;
    md << "# l_p kNN comparison\n\n";
    md << "Databases: " << big_n << ". Exponents: " << m << ". Neighbours: " << k << ".\n\n";

    auto header_row = [&](const std::string& first) {
        std::string h = "| " + first + " |";
        std::string sep = "|---|";
        for (auto p : rep.exponents) {
            h += " " + p.to_string() + " |";
            sep += "---:|";
        }
        return h + "\n" + sep + "\n";
    };

    // Frequency comparison.
    md << "## Frequency comparison\n\n";
    j["frequency"] = nlohmann::json::array();
    for (auto measure : measures) {
        for (auto mode : rep.modes) {
            const auto fr = frequency_report(grid[detail::mode_order(mode)], measure, k);
            md << "### " << to_string(measure) << ", " << detail::mode_title(mode) << "\n\n";
            md << header_row("Indicator");
            auto line = [&](const std::string& label, const std::vector<std::size_t>& v) {
                md << "| " << label << " |";
                for (auto c : v) {
                    md << ' ' << c << " |";
                }
                md << '\n';
            };
            line("The best", fr.best);
            line("The worst", fr.worst);
            nlohmann::json entry{{"measure", to_string(measure)},
                                 {"preprocessing", to_string(mode)},
                                 {"best", fr.best},
                                 {"worst", fr.worst}};
            if (fr.has_significance) {
                line("Insignificantly different from the best", fr.insignificant_from_best);
                line("Insignificantly different from the worst", fr.insignificant_from_worst);
                entry["insignificant_from_best"] = fr.insignificant_from_best;
                entry["insignificant_from_worst"] = fr.insignificant_from_worst;
            }
            md << '\n';
            j["frequency"].push_back(std::move(entry));
        }
    }
    nlohmann::json alphas = nlohmann::json::object();
    for (const auto& row : grid.begin()->second) {
        alphas[row.front().dataset] = adaptive_alpha(row.front().n, row.front().n_pos);
    }
    j["adaptive_alpha"] = std::move(alphas);

    // Friedman + Nemenyi.
    const double cd = (m >= 2 && m <= 20) ? nemenyi_cd(m, big_n, 0.05) : std::numeric_limits<double>::quiet_NaN();
    j["nemenyi_cd"] = detail::real_or_null(cd);
    md << "## Friedman test and post hoc Nemenyi test\n\n";
    md << "Critical distance (alpha = 0.05): " << (std::isfinite(cd) ? format_fixed(cd, 4) : "n/a") << "\n\n";
    md << "| Preprocessing | Quality measure | Friedman's p-value | Best p | R_i |";
    for (auto p : rep.exponents) {
        md << ' ' << p.to_string() << " |";
    }
    md << "\n|---|---|---:|---:|---:|";
    for (std::size_t i = 0; i < m; ++i) {
        md << ":---:|";
    }
    md << '\n';
    j["friedman"] = nlohmann::json::array();
    for (auto mode : rep.modes) {
        for (auto measure : measures) {
            std::vector<std::vector<double>> quality;
            for (const auto& row : grid[detail::mode_order(mode)]) {
                std::vector<double> values;
                for (const auto& r : row) {
                    values.push_back(measure_value(r, measure, k));
                }
                quality.push_back(std::move(values));
            }
            const auto fr = friedman_test(quality, 0.05);
            const auto& rbar = fr.ranks.mean_ranks;
            const std::size_t best = static_cast<std::size_t>(std::max_element(rbar.begin(), rbar.end()) - rbar.begin());
            std::vector<bool> similar(m);
            nlohmann::json set = nlohmann::json::array();
            for (std::size_t i = 0; i < m; ++i) {
                similar[i] = std::isfinite(cd) && std::fabs(rbar[best] - rbar[i]) <= cd;
                if (similar[i]) {
                    set.push_back(detail::exponent_json(rep.exponents[i]));
                }
            }
            md << "| " << detail::mode_title(mode) << " | " << to_string(measure) << " | "
               << detail::format_p_value(fr.outcome.p_value) << " | " << rep.exponents[best].to_string() << " | "
               << format_fixed(rbar[best], 4) << " |";
            for (std::size_t i = 0; i < m; ++i) {
                md << (similar[i] ? " X |" : "  |");
            }
            md << '\n';
            j["friedman"].push_back({{"preprocessing", to_string(mode)},
                                     {"measure", to_string(measure)},
                                     {"statistic", fr.outcome.statistic},
                                     {"p_value", fr.outcome.p_value},
                                     {"alpha", fr.outcome.alpha},
                                     {"significant", fr.outcome.significant},
                                     {"mean_ranks", rbar},
                                     {"best", detail::exponent_json(rep.exponents[best])},
                                     {"insignificantly_different", std::move(set)}});
        }
    }
    md << '\n';

    // Wilcoxon between exponents.
    auto index_of = [&](double p) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < m; ++i) {
            if (rep.exponents[i] == LpExponent(p)) {
                return i;
            }
        }
        return std::nullopt;
    };
    const std::pair<double, double> exp_pairs[] = {{0.5, 1.0}, {0.5, 2.0}, {1.0, 2.0}};
    md << "## Wilcoxon signed rank test\n\n### Between l_p functionals\n\n";
    md << "| Preprocessing | Quality measure | 0.5 & 1 | 0.5 & 2 | 1 & 2 |\n|---|---|---:|---:|---:|\n";
    j["wilcoxon_exponents"] = nlohmann::json::array();
    for (auto mode : rep.modes) {
        const auto& by_db = grid[detail::mode_order(mode)];
        for (auto measure : measures) {
            md << "| " << detail::mode_title(mode) << " | " << to_string(measure) << " |";
            nlohmann::json row{{"preprocessing", to_string(mode)}, {"measure", to_string(measure)}};
            nlohmann::json pvals = nlohmann::json::array();
            for (const auto& [pa, pb] : exp_pairs) {
                const auto ia = index_of(pa);
                const auto ib = index_of(pb);
                if (!ia || !ib) {
                    md << " n/a |";
                    pvals.push_back(nullptr);
                    continue;
                }
                std::vector<double> a;
                std::vector<double> b;
                for (const auto& db : by_db) {
                    a.push_back(measure_value(db[*ia], measure, k));
                    b.push_back(measure_value(db[*ib], measure, k));
                }
                const auto t = wilcoxon_signed_rank(a, b);
                md << ' ' << format_fixed(t.p_value, 4) << " |";
                pvals.push_back(t.p_value);
            }
            md << '\n';
            row["pairs"] = {"0.5&1", "0.5&2", "1&2"};
            row["p_values"] = std::move(pvals);
            j["wilcoxon_exponents"].push_back(std::move(row));
        }
    }
    md << '\n';

    // Wilcoxon between preprocessing modes.
    const std::pair<PreprocessMode, PreprocessMode> mode_pairs[] = {
        {PreprocessMode::empty, PreprocessMode::standardise},
        {PreprocessMode::empty, PreprocessMode::minmax},
        {PreprocessMode::standardise, PreprocessMode::minmax}};
    md << "### Between preprocessing modes\n\n";
    md << "| Quality measure | p of l_p | E & S | E & M | S & M |\n|---|---:|---:|---:|---:|\n";
    j["wilcoxon_preprocessing"] = nlohmann::json::array();
    for (auto measure : measures) {
        for (double p : {0.5, 1.0, 2.0}) {
            const auto ip = index_of(p);
            md << "| " << to_string(measure) << " | " << LpExponent(p).to_string() << " |";
            nlohmann::json row{{"measure", to_string(measure)}, {"p", p}};
            nlohmann::json pvals = nlohmann::json::array();
            for (const auto& [ma, mb] : mode_pairs) {
                if (!ip || !grid.count(detail::mode_order(ma)) || !grid.count(detail::mode_order(mb))) {
                    md << " n/a |";
                    pvals.push_back(nullptr);
                    continue;
                }
                std::vector<double> a;
                std::vector<double> b;
                const auto& ga = grid[detail::mode_order(ma)];
                const auto& gb = grid[detail::mode_order(mb)];
                for (std::size_t d = 0; d < big_n; ++d) {
                    a.push_back(measure_value(ga[d][*ip], measure, k));
                    b.push_back(measure_value(gb[d][*ip], measure, k));
                }
                const auto t = wilcoxon_signed_rank(a, b);
                md << ' ' << format_fixed(t.p_value, 4) << " |";
                pvals.push_back(t.p_value);
            }
            md << '\n';
            row["pairs"] = {"E&S", "E&M", "S&M"};
            row["p_values"] = std::move(pvals);
            j["wilcoxon_preprocessing"].push_back(std::move(row));
        }
    }
    rep.markdown = md.str();
    return rep;
}

/// Markdown report to `--out`, JSON with every statistic to `<out>.json`.
inline int cmd_compare(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        lpconc::detail::require(!cfg.in.empty(), "--in <results.json> is required");
        const auto records = detail::read_records(cfg.in);
        const auto rep = build_comparison(records, cfg.k);
        if (cfg.out.empty()) {
            out << rep.markdown;
        } else {
            detail::write_file(cfg.out, rep.markdown);
            detail::write_file(cfg.out + ".json", rep.json.dump(2) + "\n");
        }
        return exit_ok;
    } catch (const std::exception& e) {
        err << "compare: " << e.what() << '\n';
        return exit_error;
    }
}

inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    if (cfg.command == "gen") {
        return cmd_gen(cfg, out, err);
    }
    if (cfg.command == "table1") {
        return cmd_table1(cfg, out, err);
    }
    if (cfg.command == "concentration") {
        return cmd_concentration(cfg, out, err);
    }
    if (cfg.command == "dims") {
        return cmd_dims(cfg, out, err);
    }
    if (cfg.command == "knn-eval") {
        return cmd_knn_eval(cfg, out, err);
    }
    if (cfg.command == "compare") {
        return cmd_compare(cfg, out, err);
    }
    err << "unknown command '" << cfg.command << "'\n";
    return exit_error;
}

} // namespace lpconc::cli
