#pragma once

/**
 * @file dataset.hpp
 *
 * Dense data matrices, binary-labelled datasets, CSV/manifest loading,
 * column preprocessing and the uniform-cube generator used by the synthetic
 * experiments.
 */

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

#include "lpconc/error.hpp"

namespace lpconc {

/**
 * @brief Row-major n x d matrix of finite reals.
 *
 * Construction validates the shape and that every cell is finite, so any
 * `DataMatrix` in hand satisfies both invariants.
 */
class DataMatrix {
public:
    DataMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
        : rows_(rows), cols_(cols), values_(std::move(values)) {
        detail::require(rows_ >= 1 && cols_ >= 1, "DataMatrix: shape must be at least 1x1");
        detail::require(values_.size() == rows_ * cols_, "DataMatrix: value count does not match shape");
        for (std::size_t k = 0; k < values_.size(); ++k) {
            if (!std::isfinite(values_[k])) {
                throw Error("DataMatrix: non-finite value at row " + std::to_string(k / cols_) +
                            ", column " + std::to_string(k % cols_));
            }
        }
    }

    /// Builds a matrix from nested rows; all rows must have the same length.
    static DataMatrix from_rows(const std::vector<std::vector<double>>& rows) {
        detail::require(!rows.empty(), "DataMatrix: no rows");
        const std::size_t cols = rows.front().size();
        std::vector<double> values;
        values.reserve(rows.size() * cols);
        for (const auto& r : rows) {
            detail::require(r.size() == cols, "DataMatrix: ragged rows");
            values.insert(values.end(), r.begin(), r.end());
        }
        return DataMatrix(rows.size(), cols, std::move(values));
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    std::span<const double> row(std::size_t i) const {
        return {values_.data() + i * cols_, cols_};
    }

    double operator()(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }

    std::span<const double> values() const { return values_; }

    std::vector<double> column(std::size_t j) const {
        std::vector<double> out(rows_);
        for (std::size_t i = 0; i < rows_; ++i) {
            out[i] = values_[i * cols_ + j];
        }
        return out;
    }

    bool operator==(const DataMatrix&) const = default;

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> values_;
};

enum class Label : std::uint8_t { negative = 0, positive = 1 };

/// Feature matrix with one binary label per row.
struct LabeledDataset {
    LabeledDataset(DataMatrix data_, std::vector<Label> labels_, std::string name_)
        : data(std::move(data_)), labels(std::move(labels_)), name(std::move(name_)) {
        detail::require(labels.size() == data.rows(), "LabeledDataset: label count does not match row count");
    }

    std::size_t positives() const {
        return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), Label::positive));
    }

    bool has_both_classes() const {
        const std::size_t pos = positives();
        return pos > 0 && pos < labels.size();
    }

    DataMatrix data;
    std::vector<Label> labels;
    std::string name;
};

enum class PreprocessMode { empty, standardise, minmax };

inline constexpr PreprocessMode all_preprocess_modes[] = {
    PreprocessMode::empty, PreprocessMode::standardise, PreprocessMode::minmax};

inline std::string to_string(PreprocessMode mode) {
    switch (mode) {
    case PreprocessMode::empty:
        return "empty";
    case PreprocessMode::standardise:
        return "std";
    case PreprocessMode::minmax:
        return "minmax";
    }
    return "?";
}

inline PreprocessMode parse_preprocess_mode(std::string_view text) {
    if (text == "empty" || text == "E") {
        return PreprocessMode::empty;
    }
    if (text == "std" || text == "standardise" || text == "S") {
        return PreprocessMode::standardise;
    }
    if (text == "minmax" || text == "M") {
        return PreprocessMode::minmax;
    }
    throw Error("unknown preprocessing mode '" + std::string(text) + "'");
}

/**
 * @brief Where a dataset lives on disk and how to turn its label column into
 * a binary target.
 *
 * `label_column` is either a header name or a zero-based column index.
 * Rows whose label is in `positive_labels` are positive. When
 * `negative_labels` is non-empty, every other label must belong to it;
 * otherwise every non-positive label is negative.
 */
struct DatasetManifest {
    std::string name;
    std::string csv_path;
    std::variant<std::string, std::size_t> label_column;
    std::set<std::string> positive_labels;
    std::set<std::string> drop_columns;
    std::set<std::string> negative_labels;
};

inline DatasetManifest manifest_from_json(const nlohmann::json& j) {
    detail::require(j.is_object(), "manifest entry must be a JSON object");
    for (const char* key : {"name", "csv_path", "label_column", "positive_labels"}) {
        detail::require(j.contains(key), std::string("manifest entry is missing key '") + key + "'");
    }
    DatasetManifest m;
    m.name = j.at("name").get<std::string>();
    m.csv_path = j.at("csv_path").get<std::string>();
    const auto& label = j.at("label_column");
    if (label.is_number_integer()) {
        detail::require(label.get<long long>() >= 0, "label_column index must be non-negative");
        m.label_column = label.get<std::size_t>();
    } else {
        m.label_column = label.get<std::string>();
    }
    auto read_set = [&](const char* key) {
        std::set<std::string> out;
        if (!j.contains(key)) {
            return out;
        }
        for (const auto& v : j.at(key)) {
            out.insert(v.is_string() ? v.get<std::string>() : v.dump());
        }
        return out;
    };
    m.positive_labels = read_set("positive_labels");
    m.drop_columns = read_set("drop_columns");
    m.negative_labels = read_set("negative_labels");
    detail::require(!m.positive_labels.empty(), "manifest '" + m.name + "': positive_labels is empty");
    return m;
}

inline nlohmann::json manifest_to_json(const DatasetManifest& m) {
    nlohmann::json j;
    j["name"] = m.name;
    j["csv_path"] = m.csv_path;
    if (std::holds_alternative<std::size_t>(m.label_column)) {
        j["label_column"] = std::get<std::size_t>(m.label_column);
    } else {
        j["label_column"] = std::get<std::string>(m.label_column);
    }
    j["positive_labels"] = m.positive_labels;
    j["drop_columns"] = m.drop_columns;
    if (!m.negative_labels.empty()) {
        j["negative_labels"] = m.negative_labels;
    }
    return j;
}

/**
 * Reads a manifest file: a JSON array of dataset objects, a single object, or
 * one object per line. Relative `csv_path`s are resolved against the
 * manifest's directory.
 */
inline std::vector<DatasetManifest> load_manifest_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    detail::require(static_cast<bool>(in), "cannot open manifest '" + path.string() + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();

    std::vector<nlohmann::json> entries;
    try {
        auto j = nlohmann::json::parse(text);
        if (j.is_array()) {
            entries.assign(j.begin(), j.end());
        } else {
            entries.push_back(std::move(j));
        }
    } catch (const nlohmann::json::parse_error&) {
        std::istringstream lines(text);
        std::string line;
        while (std::getline(lines, line)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) {
                continue;
            }
            try {
                entries.push_back(nlohmann::json::parse(line));
            } catch (const nlohmann::json::parse_error& e) {
                throw Error("manifest '" + path.string() + "' is not valid JSON: " + e.what());
            }
        }
    }

    std::vector<DatasetManifest> out;
    const auto base = path.parent_path();
    for (const auto& e : entries) {
        auto m = manifest_from_json(e);
        std::filesystem::path csv(m.csv_path);
        if (csv.is_relative() && !base.empty()) {
            m.csv_path = (base / csv).lexically_normal().string();
        }
        out.push_back(std::move(m));
    }
    return out;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n')) {
        s.remove_suffix(1);
    }
    return s;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            cells.push_back(trim(line.substr(start)));
            return cells;
        }
        cells.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
}

inline bool parse_real(std::string_view text, double& out) {
    if (!text.empty() && text.front() == '+') {
        text.remove_prefix(1);
    }
    if (text.empty()) {
        return false;
    }
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, out);
    return ec == std::errc() && ptr == end && std::isfinite(out);
}

} // namespace detail

/**
 * Loads a comma-separated file with a header row. The label column and any
 * `drop_columns` are removed from the features; row order is preserved.
 */
inline LabeledDataset load_csv(const DatasetManifest& manifest) {
    std::ifstream in(manifest.csv_path);
    detail::require(static_cast<bool>(in), "cannot open CSV '" + manifest.csv_path + "'");

    std::string line;
    detail::require(static_cast<bool>(std::getline(in, line)), "CSV '" + manifest.csv_path + "' has no header row");
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
        line.erase(0, 3);
    }
    std::vector<std::string> header;
    for (auto cell : detail::split_csv_line(line)) {
        header.emplace_back(cell);
    }

    std::size_t label_index = 0;
    if (std::holds_alternative<std::size_t>(manifest.label_column)) {
        label_index = std::get<std::size_t>(manifest.label_column);
        detail::require(label_index < header.size(),
                        "label column index " + std::to_string(label_index) + " is outside the CSV header");
    } else {
        const auto& name = std::get<std::string>(manifest.label_column);
        auto it = std::find(header.begin(), header.end(), name);
        detail::require(it != header.end(), "label column '" + name + "' not found in CSV header");
        label_index = static_cast<std::size_t>(it - header.begin());
    }
    for (const auto& drop : manifest.drop_columns) {
        detail::require(std::find(header.begin(), header.end(), drop) != header.end(),
                        "drop column '" + drop + "' not found in CSV header");
    }

    std::vector<std::size_t> feature_columns;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c != label_index && !manifest.drop_columns.count(header[c])) {
            feature_columns.push_back(c);
        }
    }
    detail::require(!feature_columns.empty(), "CSV '" + manifest.csv_path + "' has no feature columns");

    std::vector<double> values;
    std::vector<Label> labels;
    std::set<std::string> observed;
    std::size_t line_number = 1;
    while (std::getline(in, line)) {
        ++line_number;
        if (detail::trim(line).empty()) {
            continue;
        }
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != header.size()) {
            throw Error("CSV '" + manifest.csv_path + "' line " + std::to_string(line_number) + ": expected " +
                        std::to_string(header.size()) + " cells, found " + std::to_string(cells.size()));
        }
        for (std::size_t c : feature_columns) {
            double v = 0.0;
            if (!detail::parse_real(cells[c], v)) {
                throw Error("CSV '" + manifest.csv_path + "' line " + std::to_string(line_number) + ", column '" +
                            header[c] + "': " +
                            (cells[c].empty() ? std::string("empty cell") : "cannot parse '" + std::string(cells[c]) + "'"));
            }
            values.push_back(v);
        }
        const std::string raw(cells[label_index]);
        observed.insert(raw);
        if (manifest.positive_labels.count(raw)) {
            labels.push_back(Label::positive);
        } else if (manifest.negative_labels.empty() || manifest.negative_labels.count(raw)) {
            labels.push_back(Label::negative);
        } else {
            throw Error("CSV '" + manifest.csv_path + "' line " + std::to_string(line_number) + ": label '" + raw +
                        "' is in neither positive_labels nor negative_labels");
        }
    }
    detail::require(!labels.empty(), "CSV '" + manifest.csv_path + "' has no data rows");
    for (const auto& pos : manifest.positive_labels) {
        detail::require(observed.count(pos) > 0, "positive label '" + pos + "' never occurs in '" + manifest.csv_path + "'");
    }

    const std::size_t rows = labels.size();
    LabeledDataset ds(DataMatrix(rows, feature_columns.size(), std::move(values)), std::move(labels), manifest.name);
    detail::require(ds.has_both_classes(), "dataset '" + manifest.name + "' has an empty class");
    return ds;
}

namespace detail {

struct ColumnStats {
    double mean = 0.0;
    double sd = 0.0;
    double min = 0.0;
    double max = 0.0;
};

inline std::vector<ColumnStats> column_stats(const DataMatrix& x) {
    std::vector<ColumnStats> stats(x.cols());
    const double n = static_cast<double>(x.rows());
    for (std::size_t j = 0; j < x.cols(); ++j) {
        double sum = 0.0;
        double lo = x(0, j);
        double hi = x(0, j);
        for (std::size_t i = 0; i < x.rows(); ++i) {
            const double v = x(i, j);
            sum += v;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        const double mean = sum / n;
        double ss = 0.0;
        for (std::size_t i = 0; i < x.rows(); ++i) {
            const double dv = x(i, j) - mean;
            ss += dv * dv;
        }
        stats[j] = {mean, std::sqrt(ss / n), lo, hi};
    }
    return stats;
}

} // namespace detail

/// Applies one column transform to the features; labels and name are kept.
inline DataMatrix preprocess(const DataMatrix& x, PreprocessMode mode) {
    if (mode == PreprocessMode::empty) {
        return x;
    }
    const auto stats = detail::column_stats(x);
    std::vector<double> out(x.values().begin(), x.values().end());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t j = 0; j < x.cols(); ++j) {
            const auto& s = stats[j];
            double& v = out[i * x.cols() + j];
            // constant columns collapse to zero in both modes
            if (s.max == s.min) {
                v = 0.0;
            } else if (mode == PreprocessMode::standardise) {
                v = (v - s.mean) / s.sd;
            } else {
                v = (v - s.min) / (s.max - s.min);
            }
        }
    }
    return DataMatrix(x.rows(), x.cols(), std::move(out));
}

inline LabeledDataset preprocess(const LabeledDataset& ds, PreprocessMode mode) {
    return LabeledDataset(preprocess(ds.data, mode), ds.labels, ds.name);
}

/**
 * @brief n x d sample of i.i.d. U[0,1) coordinates.
 *
 * Uses `std::mt19937_64` seeded with `seed`; each coordinate takes the top 53
 * bits of one draw. Points are generated one at a time, coordinate by
 * coordinate, so the first d' columns of a wider sample form the d'-dimensional
 * sample of the same points.
 */
inline DataMatrix gen_uniform_cube(std::size_t n, std::size_t d, std::uint64_t seed) {
    detail::require(n >= 1 && d >= 1, "gen_uniform_cube: n and d must be positive");
    std::mt19937_64 engine(seed);
    std::vector<double> values(n * d);
    for (auto& v : values) {
        v = static_cast<double>(engine() >> 11) * 0x1.0p-53;
    }
    return DataMatrix(n, d, std::move(values));
}

/// First `d` columns of `x`.
inline DataMatrix prefix_dims(const DataMatrix& x, std::size_t d) {
    detail::require(d >= 1 && d <= x.cols(), "prefix_dims: requested " + std::to_string(d) +
                                                 " columns from a matrix with " + std::to_string(x.cols()));
    if (d == x.cols()) {
        return x;
    }
    std::vector<double> out;
    out.reserve(x.rows() * d);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const auto r = x.row(i);
        out.insert(out.end(), r.begin(), r.begin() + static_cast<std::ptrdiff_t>(d));
    }
    return DataMatrix(x.rows(), d, std::move(out));
}

/// Concatenates `copies` copies of the column block: n x (copies * d).
inline DataMatrix duplicate_attributes(const DataMatrix& x, std::size_t copies) {
    detail::require(copies >= 1, "duplicate_attributes: copies must be at least 1");
    std::vector<double> out;
    out.reserve(x.rows() * x.cols() * copies);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const auto r = x.row(i);
        for (std::size_t t = 0; t < copies; ++t) {
            out.insert(out.end(), r.begin(), r.end());
        }
    }
    return DataMatrix(x.rows(), x.cols() * copies, std::move(out));
}

} // namespace lpconc
