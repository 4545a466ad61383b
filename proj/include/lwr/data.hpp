#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lwr/csv.hpp"
#include "lwr/lwr.hpp"

namespace lwr {

/// Raised for dataset content problems (schema, missing columns, ragged rows).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct DatasetSpec {
    std::string name;
    std::string csv_path;
    std::string effort_column;
    std::vector<std::string> excluded_columns;
    std::vector<std::string> categorical_columns;
    std::vector<std::string> missing_markers{"", "?", "NA"};
};

struct Cell {
    enum class Kind { Missing, Numeric, Categorical };
    Kind kind = Kind::Missing;
    double number = 0.0;
    std::string text;

    static Cell missing() { return {}; }
    static Cell numeric(double v) { return {Kind::Numeric, v, csv::format_number(v)}; }
    static Cell categorical(std::string s) { return {Kind::Categorical, 0.0, std::move(s)}; }
    bool is_missing() const { return kind == Kind::Missing; }
};

struct RawDataset {
    std::string name;
    std::string effort_column;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    std::size_t dropped_rows = 0;

    std::size_t column_index(std::string_view column) const {
        const auto it = std::find(columns.begin(), columns.end(), column);
        if (it == columns.end()) throw DataError(name + ": no column named '" + std::string(column) + "'");
        return static_cast<std::size_t>(it - columns.begin());
    }
    bool has_column(std::string_view column) const {
        return std::find(columns.begin(), columns.end(), column) != columns.end();
    }
};

enum class DimensionalityClass { Low, Medium, Large };

inline std::string_view to_string(DimensionalityClass c) {
    switch (c) {
        case DimensionalityClass::Low: return "Low";
        case DimensionalityClass::Medium: return "Medium";
        case DimensionalityClass::Large: return "Large";
    }
    return "?";
}

struct CleanDataset {
    std::string name;
    RowMatrix features;        // n x p, every entry in [0, 1]
    Eigen::VectorXd efforts;   // raw effort units
    std::vector<std::string> feature_names;
    DimensionalityClass dimensionality = DimensionalityClass::Low;
    RowMatrix unscaled;        // same columns as features, before min-max scaling
    std::vector<std::string> warnings;

    Eigen::Index size() const { return features.rows(); }
};

/// Min-max parameters of the retained feature columns.
struct MinMaxScaler {
    std::vector<std::string> feature_names;
    std::vector<double> minimum;
    std::vector<double> range;
};

inline std::string lowercase(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

// ---------------------------------------------------------------------------
// Loading

inline RawDataset load_csv(std::istream& in, const DatasetSpec& spec) {
    const auto where = spec.csv_path.empty() ? spec.name : spec.csv_path;
    const csv::Table table = csv::read_table(in, where);

    RawDataset raw;
    raw.name = spec.name;
    raw.effort_column = spec.effort_column;
    raw.columns = table.header;
    if (!raw.has_column(spec.effort_column)) {
        throw DataError(where + ": effort column '" + spec.effort_column + "' not found in header");
    }
    for (std::size_t i = 0; i < raw.columns.size(); ++i) {
        for (std::size_t j = i + 1; j < raw.columns.size(); ++j) {
            if (raw.columns[i] == raw.columns[j]) {
                throw DataError(where + ": duplicate column '" + raw.columns[i] + "'");
            }
        }
    }
    raw.rows.reserve(table.rows.size());
    for (const auto& fields : table.rows) {
        std::vector<Cell> row;
        row.reserve(fields.size());
        for (const auto& field : fields) {
            const auto token = std::string(csv::trim(field));
            if (std::find(spec.missing_markers.begin(), spec.missing_markers.end(), token) !=
                spec.missing_markers.end()) {
                row.push_back(Cell::missing());
            } else if (auto v = csv::parse_number(token)) {
                row.push_back({Cell::Kind::Numeric, *v, token});
            } else {
                row.push_back(Cell::categorical(token));
            }
        }
        raw.rows.push_back(std::move(row));
    }
    return raw;
}

inline RawDataset load_csv(const DatasetSpec& spec) {
    std::ifstream in(spec.csv_path, std::ios::binary);
    if (!in) throw DataError(spec.csv_path + ": cannot open dataset file for '" + spec.name + "'");
    return load_csv(in, spec);
}

// ---------------------------------------------------------------------------
// Preprocessing steps

/// Removes after-the-event columns.
inline RawDataset remove_columns(RawDataset raw, const std::vector<std::string>& excluded) {
    for (const auto& column : excluded) {
        if (column == raw.effort_column) throw DataError(raw.name + ": cannot exclude the effort column");
        const auto idx = raw.column_index(column);
        raw.columns.erase(raw.columns.begin() + static_cast<std::ptrdiff_t>(idx));
        for (auto& row : raw.rows) row.erase(row.begin() + static_cast<std::ptrdiff_t>(idx));
    }
    return raw;
}

/// Row deletion: drops every row holding a missing cell. `dropped_rows` accumulates the count.
inline RawDataset drop_missing_rows(RawDataset raw) {
    const auto before = raw.rows.size();
    std::erase_if(raw.rows, [](const std::vector<Cell>& row) {
        return std::any_of(row.begin(), row.end(), [](const Cell& c) { return c.is_missing(); });
    });
    raw.dropped_rows += before - raw.rows.size();
    if (raw.rows.empty()) throw DataError(raw.name + ": every row has a missing value");
    return raw;
}

/// Replaces each listed column by one 0/1 column per observed category
/// (first-appearance order), named "<column>=<category>".
inline RawDataset one_hot_encode(RawDataset raw, const std::vector<std::string>& categorical) {
    for (const auto& column : categorical) {
        const auto idx = raw.column_index(column);
        std::vector<std::string> categories;
        for (const auto& row : raw.rows) {
            const Cell& c = row[idx];
            if (c.is_missing()) continue;
            if (std::find(categories.begin(), categories.end(), c.text) == categories.end()) {
                categories.push_back(c.text);
            }
        }
        std::vector<std::string> new_columns;
        for (const auto& cat : categories) new_columns.push_back(column + "=" + cat);

        const auto pos = static_cast<std::ptrdiff_t>(idx);
        raw.columns.erase(raw.columns.begin() + pos);
        raw.columns.insert(raw.columns.begin() + pos, new_columns.begin(), new_columns.end());
        for (auto& row : raw.rows) {
            const Cell original = row[idx];
            std::vector<Cell> block;
            for (const auto& cat : categories) {
                block.push_back(original.is_missing() ? Cell::missing()
                                                      : Cell::numeric(original.text == cat ? 1.0 : 0.0));
            }
            row.erase(row.begin() + pos);
            row.insert(row.begin() + pos, block.begin(), block.end());
        }
    }
    return raw;
}

/// Scales every non-effort column to [0, 1] with (x - min) / (max - min).
/// Constant columns are dropped with a warning; effort stays in raw units.
inline CleanDataset min_max_scale(const RawDataset& raw, MinMaxScaler* scaler_out = nullptr) {
    const auto effort_idx = raw.column_index(raw.effort_column);
    const auto n = raw.rows.size();
    CleanDataset clean;
    clean.name = raw.name;

    auto numeric_at = [&](std::size_t r, std::size_t c) {
        const Cell& cell = raw.rows[r][c];
        if (cell.kind != Cell::Kind::Numeric) {
            throw DataError(raw.name + ": column '" + raw.columns[c] + "' row " + std::to_string(r + 1) +
                            " is not numeric ('" + cell.text + "')");
        }
        return cell.number;
    };

    MinMaxScaler scaler;
    std::vector<std::size_t> kept;
    for (std::size_t c = 0; c < raw.columns.size(); ++c) {
        if (c == effort_idx) continue;
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (std::size_t r = 0; r < n; ++r) {
            const double v = numeric_at(r, c);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (!(hi > lo)) {
            clean.warnings.push_back("dropped constant column '" + raw.columns[c] + "'");
            continue;
        }
        kept.push_back(c);
        scaler.feature_names.push_back(raw.columns[c]);
        scaler.minimum.push_back(lo);
        scaler.range.push_back(hi - lo);
    }
    if (kept.empty()) throw DataError(raw.name + ": no non-constant feature columns remain");

    const auto p = static_cast<Eigen::Index>(kept.size());
    clean.features.resize(static_cast<Eigen::Index>(n), p);
    clean.unscaled.resize(static_cast<Eigen::Index>(n), p);
    clean.efforts.resize(static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < n; ++r) {
        const auto ri = static_cast<Eigen::Index>(r);
        clean.efforts(ri) = numeric_at(r, effort_idx);
        for (Eigen::Index j = 0; j < p; ++j) {
            const auto ju = static_cast<std::size_t>(j);
            const double v = numeric_at(r, kept[ju]);
            clean.unscaled(ri, j) = v;
            clean.features(ri, j) = std::clamp((v - scaler.minimum[ju]) / scaler.range[ju], 0.0, 1.0);
        }
    }
    clean.feature_names = scaler.feature_names;
    if (scaler_out) *scaler_out = std::move(scaler);
    return clean;
}

// ---------------------------------------------------------------------------
// Descriptive statistics

struct DatasetStats {
    std::size_t n = 0;
    std::size_t p = 0;
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double median = 0.0;
    double skew = 0.0;  // adjusted Fisher-Pearson
};

inline DatasetStats effort_stats(std::span<const double> values, std::size_t p = 0) {
    DatasetStats s;
    s.n = values.size();
    s.p = p;
    if (values.empty()) return s;
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    s.min = sorted.front();
    s.max = sorted.back();
    const auto n = static_cast<double>(s.n);
    for (double v : sorted) s.mean += v;
    s.mean /= n;
    const auto mid = s.n / 2;
    s.median = s.n % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
    if (s.n >= 3) {
        double m2 = 0.0, m3 = 0.0;
        for (double v : sorted) {
            const double d = v - s.mean;
            m2 += d * d;
            m3 += d * d * d;
        }
        m2 /= n;
        m3 /= n;
        if (m2 > 0.0) s.skew = std::sqrt(n * (n - 1.0)) / (n - 2.0) * m3 / std::pow(m2, 1.5);
    }
    return s;
}

inline DatasetStats dataset_stats(const CleanDataset& clean) {
    return effort_stats(std::span<const double>(clean.efforts.data(), static_cast<std::size_t>(clean.efforts.size())),
                        static_cast<std::size_t>(clean.features.cols()));
}

/// Published statistics of the seven PROMISE effort datasets (feature count
/// as published, project count, effort min/max/mean/median/skew).
struct ReferenceStats {
    std::string_view name;
    std::size_t features;
    std::size_t n;
    double min, max, mean, median, skew;
};

inline constexpr std::array<ReferenceStats, 7> kPromiseReference{{
    {"albrecht", 7, 24, 1000, 105000, 22000, 12000, 2.2},
    {"kemerer", 7, 15, 23.2, 1107.3, 219.2, 130.3, 2.76},
    {"nasa", 3, 18, 5, 138.3, 49.47, 26.5, 0.57},
    {"desharnais", 12, 77, 546, 23940, 5046, 3647, 2.0},
    {"china", 18, 499, 26, 54620, 3921, 1829, 3.92},
    {"maxwell", 27, 62, 583, 63694, 8223.2, 5189.5, 3.26},
    {"telecom", 3, 18, 23.54, 1115.5, 284.33, 222.53, 1.78},
}};

inline std::optional<ReferenceStats> reference_stats(std::string_view dataset_name) {
    const auto key = lowercase(dataset_name);
    for (const auto& ref : kPromiseReference) {
        if (ref.name == key) return ref;
    }
    return std::nullopt;
}

inline DimensionalityClass dimensionality_class(std::string_view name, Eigen::Index n) {
    const auto key = lowercase(name);
    if (key == "albrecht" || key == "kemerer" || key == "nasa" || key == "telecom") return DimensionalityClass::Low;
    if (key == "desharnais" || key == "maxwell") return DimensionalityClass::Medium;
    if (key == "china") return DimensionalityClass::Large;
    if (n < 30) return DimensionalityClass::Low;
    if (n < 200) return DimensionalityClass::Medium;
    return DimensionalityClass::Large;
}

inline DimensionalityClass dimensionality_class(const CleanDataset& clean) {
    return dimensionality_class(clean.name, clean.size());
}

// ---------------------------------------------------------------------------
// Full pipeline

/// Everything needed to map a raw query row onto the scaled feature space.
struct Preprocessor {
    std::vector<std::string> input_columns;  // raw feature columns, after exclusions
    std::map<std::string, std::vector<std::string>> categories;
    MinMaxScaler scaler;

    /// Encodes and scales a raw query given as column -> token. Unseen
    /// categories encode as an all-zero block and add a warning.
    std::vector<double> transform(const std::map<std::string, std::string>& query,
                                  std::vector<std::string>* warnings = nullptr) const {
        for (const auto& [column, value] : query) {
            if (std::find(input_columns.begin(), input_columns.end(), column) == input_columns.end()) {
                throw DataError("query field '" + column + "' is not a feature of this dataset");
            }
        }
        std::unordered_map<std::string, double> encoded;
        for (const auto& column : input_columns) {
            const auto it = query.find(column);
            if (it == query.end()) throw DataError("query is missing field '" + column + "'");
            const auto token = std::string(csv::trim(it->second));
            if (auto cat = categories.find(column); cat != categories.end()) {
                const auto& values = cat->second;
                if (std::find(values.begin(), values.end(), token) == values.end() && warnings) {
                    warnings->push_back("unseen category '" + token + "' for field '" + column +
                                        "', encoded as all zeros");
                }
                for (const auto& v : values) encoded[column + "=" + v] = (v == token) ? 1.0 : 0.0;
            } else {
                const auto v = csv::parse_number(token);
                if (!v) throw DataError("query field '" + column + "' is not numeric ('" + token + "')");
                encoded[column] = *v;
            }
        }
        std::vector<double> out;
        out.reserve(scaler.feature_names.size());
        for (std::size_t j = 0; j < scaler.feature_names.size(); ++j) {
            out.push_back((encoded.at(scaler.feature_names[j]) - scaler.minimum[j]) / scaler.range[j]);
        }
        return out;
    }
};

struct PreparedDataset {
    CleanDataset clean;
    Preprocessor preprocessor;
    std::size_t raw_rows = 0;
    std::size_t dropped_rows = 0;
};

inline constexpr Eigen::Index kMinimumProjects = 10;

/// Exclusion, row deletion, one-hot encoding, and min-max scaling.
inline PreparedDataset preprocess(const RawDataset& loaded, const DatasetSpec& spec) {
    for (const auto& column : spec.excluded_columns) {
        if (column == spec.effort_column) {
            throw DataError(spec.name + ": effort column '" + column + "' is listed as excluded");
        }
    }
    PreparedDataset out;
    out.raw_rows = loaded.rows.size();

    RawDataset raw = remove_columns(loaded, spec.excluded_columns);
    for (const auto& column : spec.categorical_columns) raw.column_index(column);
    raw = drop_missing_rows(std::move(raw));
    out.dropped_rows = raw.dropped_rows;

    for (const auto& column : raw.columns) {
        if (column != raw.effort_column) out.preprocessor.input_columns.push_back(column);
    }
    for (const auto& column : spec.categorical_columns) {
        auto& cats = out.preprocessor.categories[column];
        const auto idx = raw.column_index(column);
        for (const auto& row : raw.rows) {
            if (std::find(cats.begin(), cats.end(), row[idx].text) == cats.end()) cats.push_back(row[idx].text);
        }
    }
    raw = one_hot_encode(std::move(raw), spec.categorical_columns);
    out.clean = min_max_scale(raw, &out.preprocessor.scaler);
    out.clean.dimensionality = dimensionality_class(out.clean);

    if (out.clean.size() < kMinimumProjects) {
        throw DataError(spec.name + ": " + std::to_string(out.clean.size()) +
                        " complete projects, at least 10 are needed");
    }
    for (Eigen::Index i = 0; i < out.clean.efforts.size(); ++i) {
        if (!(out.clean.efforts(i) > 0.0)) {
            throw DataError(spec.name + ": effort must be positive (project " + std::to_string(i + 1) + ")");
        }
    }
    return out;
}

inline PreparedDataset load_dataset(const DatasetSpec& spec) { return preprocess(load_csv(spec), spec); }

/// Wraps a clean dataset back into raw form (numeric cells only).
inline RawDataset to_raw(const CleanDataset& clean) {
    RawDataset raw;
    raw.name = clean.name;
    raw.effort_column = "effort";
    raw.columns = clean.feature_names;
    raw.columns.push_back(raw.effort_column);
    for (Eigen::Index i = 0; i < clean.size(); ++i) {
        std::vector<Cell> row;
        for (Eigen::Index j = 0; j < clean.features.cols(); ++j) row.push_back(Cell::numeric(clean.features(i, j)));
        row.push_back(Cell::numeric(clean.efforts(i)));
        raw.rows.push_back(std::move(row));
    }
    return raw;
}

}  // namespace lwr
