#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <boost/version.hpp>
#include <nlohmann/json.hpp>

#include "lwr/csv.hpp"
#include "lwr/data.hpp"
#include "lwr/evaluation.hpp"
#include "lwr/kernels.hpp"
#include "lwr/stats.hpp"

namespace lwr::harness {

inline constexpr const char* kToolName = "lwr-bench";
inline constexpr const char* kToolVersion = "1.0.0";

/// Raised for unusable configuration or unreadable/unwritable files (exit code 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct HarnessConfig {
    std::vector<DatasetSpec> datasets;
    std::vector<KernelKind> kernels{kAllKernels.begin(), kAllKernels.end()};
    std::vector<double> bandwidths{0.2, 0.3, 0.4, 0.5};
    std::vector<int> degrees{1, 2, 3};
    std::size_t folds = 10;
    std::size_t repeats = 10;
    std::uint64_t seed = 1;
    double alpha = 0.05;
    std::string output_dir = "lwr-out";
    bool strict_scaling = false;

    void validate() const {
        if (datasets.empty()) throw ConfigError("config: no datasets");
        if (kernels.empty() || bandwidths.empty() || degrees.empty()) throw ConfigError("config: empty variant axis");
        for (double b : bandwidths) {
            if (!(b > 0.0 && b <= 1.0)) throw ConfigError("config: bandwidth " + csv::format_number(b) + " outside (0, 1]");
        }
        for (int d : degrees) {
            if (d < 1 || d > 3) throw ConfigError("config: degree " + std::to_string(d) + " outside {1, 2, 3}");
        }
        if (folds < 2) throw ConfigError("config: folds must be >= 2");
        if (repeats < 1) throw ConfigError("config: repeats must be >= 1");
        if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("config: alpha must lie in (0, 1)");
        for (std::size_t i = 0; i < datasets.size(); ++i) {
            const auto& d = datasets[i];
            if (d.name.empty()) throw ConfigError("config: dataset without a name");
            if (d.effort_column.empty()) throw ConfigError("config: dataset '" + d.name + "' has no effort_column");
            if (std::find(d.excluded_columns.begin(), d.excluded_columns.end(), d.effort_column) !=
                d.excluded_columns.end()) {
                throw ConfigError("config: dataset '" + d.name + "' excludes its effort column");
            }
            for (std::size_t j = i + 1; j < datasets.size(); ++j) {
                if (datasets[j].name == d.name) throw ConfigError("config: duplicate dataset name '" + d.name + "'");
            }
        }
    }

    const DatasetSpec& dataset(const std::string& name) const {
        for (const auto& d : datasets) {
            if (d.name == name) return d;
        }
        throw ConfigError("config: no dataset named '" + name + "'");
    }
};

// ---------------------------------------------------------------------------
// JSON form

inline nlohmann::ordered_json to_json(const HarnessConfig& c) {
    nlohmann::ordered_json j;
    auto& ds = j["datasets"] = nlohmann::ordered_json::array();
    for (const auto& d : c.datasets) {
        ds.push_back({{"name", d.name},
                      {"csv_path", d.csv_path},
                      {"effort_column", d.effort_column},
                      {"excluded_columns", d.excluded_columns},
                      {"categorical_columns", d.categorical_columns},
                      {"missing_markers", d.missing_markers}});
    }
    auto& ks = j["kernels"] = nlohmann::ordered_json::array();
    for (auto k : c.kernels) ks.push_back(std::string(kernel_name(k)));
    j["bandwidths"] = c.bandwidths;
    j["degrees"] = c.degrees;
    j["folds"] = c.folds;
    j["repeats"] = c.repeats;
    j["seed"] = c.seed;
    j["alpha"] = c.alpha;
    j["output_dir"] = c.output_dir;
    j["strict_scaling"] = c.strict_scaling;
    return j;
}

/// Parses a config object. Dataset paths and output_dir are resolved against `base_dir`.
/// A run manifest is accepted too: its "config" member is used.
inline HarnessConfig config_from_json(const nlohmann::json& root, const std::filesystem::path& base_dir = {}) {
    const nlohmann::json& j = root.contains("config") && root.contains("tool") ? root.at("config") : root;
    HarnessConfig c;
    try {
        for (const auto& d : j.at("datasets")) {
            DatasetSpec spec;
            spec.name = d.at("name").get<std::string>();
            std::filesystem::path path = d.at("csv_path").get<std::string>();
            if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
            spec.csv_path = path.lexically_normal().string();
            spec.effort_column = d.at("effort_column").get<std::string>();
            spec.excluded_columns = d.value("excluded_columns", std::vector<std::string>{});
            spec.categorical_columns = d.value("categorical_columns", std::vector<std::string>{});
            if (d.contains("missing_markers")) spec.missing_markers = d.at("missing_markers").get<std::vector<std::string>>();
            c.datasets.push_back(std::move(spec));
        }
        if (j.contains("kernels")) {
            c.kernels.clear();
            for (const auto& k : j.at("kernels")) {
                const auto name = k.get<std::string>();
                const auto kind = parse_kernel(name);
                if (!kind) throw ConfigError("config: unknown kernel '" + name + "'");
                c.kernels.push_back(*kind);
            }
        }
        if (j.contains("bandwidths")) c.bandwidths = j.at("bandwidths").get<std::vector<double>>();
        if (j.contains("degrees")) c.degrees = j.at("degrees").get<std::vector<int>>();
        c.folds = j.value("folds", c.folds);
        c.repeats = j.value("repeats", c.repeats);
        c.seed = j.value("seed", c.seed);
        c.alpha = j.value("alpha", c.alpha);
        if (j.contains("output_dir")) {
            std::filesystem::path out = j.at("output_dir").get<std::string>();
            if (out.is_relative() && !base_dir.empty()) out = base_dir / out;
            c.output_dir = out.lexically_normal().string();
        }
        c.strict_scaling = j.value("strict_scaling", c.strict_scaling);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    c.validate();
    return c;
}

inline HarnessConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return config_from_json(j, std::filesystem::absolute(path).parent_path());
}

// ---------------------------------------------------------------------------
// list-kernels

inline void cmd_list_kernels(std::ostream& out) {
    for (const auto& info : kKernelTable) {
        out << info.name << '\t' << (info.uniform ? "uniform" : "non-uniform") << '\t'
            << (info.compact ? "support [0,1]" : "support [0,inf)") << '\t' << info.formula << '\n';
    }
}

// ---------------------------------------------------------------------------
// validate

struct StatCheck {
    std::string field;
    double actual = 0.0;
    double expected = 0.0;
    bool ok = true;
};

struct DatasetReport {
    std::string name;
    std::size_t raw_rows = 0;
    std::size_t dropped_rows = 0;
    DatasetStats stats;
    DimensionalityClass dimensionality = DimensionalityClass::Low;
    std::vector<std::string> warnings;
    std::vector<StatCheck> checks;  // empty when no published reference exists

    bool matches_reference() const {
        return std::all_of(checks.begin(), checks.end(), [](const StatCheck& c) { return c.ok; });
    }
};

inline bool same_value(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)}); }

/// n, min and max must match exactly, mean and median within 0.5%, skew within 0.15.
inline std::vector<StatCheck> compare_with_reference(const DatasetStats& s, const ReferenceStats& ref) {
    auto rel = [](double a, double b) { return std::abs(a - b) <= 0.005 * std::abs(b); };
    return {
        {"n", static_cast<double>(s.n), static_cast<double>(ref.n), s.n == ref.n},
        {"min", s.min, ref.min, same_value(s.min, ref.min)},
        {"max", s.max, ref.max, same_value(s.max, ref.max)},
        {"mean", s.mean, ref.mean, rel(s.mean, ref.mean)},
        {"median", s.median, ref.median, rel(s.median, ref.median)},
        {"skew", s.skew, ref.skew, std::abs(s.skew - ref.skew) <= 0.15},
    };
}

inline DatasetReport describe(const PreparedDataset& prepared) {
    DatasetReport r;
    r.name = prepared.clean.name;
    r.raw_rows = prepared.raw_rows;
    r.dropped_rows = prepared.dropped_rows;
    r.stats = dataset_stats(prepared.clean);
    r.dimensionality = prepared.clean.dimensionality;
    r.warnings = prepared.clean.warnings;
    if (const auto ref = reference_stats(r.name)) r.checks = compare_with_reference(r.stats, *ref);
    return r;
}

inline void print_report(const DatasetReport& r, std::ostream& out) {
    out << r.name << ": rows " << r.raw_rows << " -> " << r.stats.n << " (" << r.dropped_rows
        << " dropped for missing values), features " << r.stats.p << ", class " << to_string(r.dimensionality) << '\n';
    out << "  effort min " << csv::format_number(r.stats.min) << "  max " << csv::format_number(r.stats.max)
        << "  mean " << csv::format_number(r.stats.mean) << "  median " << csv::format_number(r.stats.median)
        << "  skew " << csv::format_number(r.stats.skew) << '\n';
    for (const auto& w : r.warnings) out << "  warning: " << w << '\n';
    if (r.checks.empty()) {
        out << "  no published reference for this dataset\n";
        return;
    }
    for (const auto& c : r.checks) {
        out << "  " << (c.ok ? "ok      " : "MISMATCH") << ' ' << c.field << ": " << csv::format_number(c.actual)
            << " (published " << csv::format_number(c.expected) << ")\n";
    }
}

/// Loads and preprocesses every dataset; schema and IO errors propagate.
inline std::vector<DatasetReport> cmd_validate(const HarnessConfig& config, std::ostream& out) {
    std::vector<DatasetReport> reports;
    for (const auto& spec : config.datasets) {
        reports.push_back(describe(load_dataset(spec)));
        print_report(reports.back(), out);
    }
    return reports;
}

// ---------------------------------------------------------------------------
// run

struct Finding {
    std::string id;
    std::string description;
    std::string status;  // PASS, FAIL or N/A
    std::string detail;
};

/// Rank-level checks on a finished grid: the uniform kernel is never best on
/// any dataset, the infinite-support kernels share the worst overall group,
/// and Triweight or Biweight sits in the best overall group.
inline std::vector<Finding> qualitative_findings(const std::vector<AggregateRow>& by_dataset_kernel,
                                                 const std::vector<stats::ScopedGrouping>& overall) {
    std::vector<Finding> out;

    Finding a{"uniform-never-best", "rectangular is not the lowest mean-MAE kernel on any dataset", "N/A", ""};
    std::map<std::string, std::pair<double, KernelKind>> best;
    bool has_rect = false, has_other = false;
    for (const auto& row : by_dataset_kernel) {
        has_rect = has_rect || row.kernel == KernelKind::Rectangular;
        has_other = has_other || row.kernel != KernelKind::Rectangular;
        auto [it, inserted] = best.try_emplace(row.dataset, row.mean_mae, *row.kernel);
        if (!inserted && row.mean_mae < it->second.first) it->second = {row.mean_mae, *row.kernel};
    }
    if (has_rect && has_other) {
        a.status = "PASS";
        for (const auto& [name, b] : best) {
            a.detail += (a.detail.empty() ? "" : "; ") + name + ": " + std::string(kernel_name(b.second));
            if (b.second == KernelKind::Rectangular) a.status = "FAIL";
        }
    }
    out.push_back(a);

    const stats::ScopedGrouping* sg = nullptr;
    for (const auto& g : overall) {
        if (g.scope == "overall") sg = &g;
    }
    auto describe_groups = [&] {
        std::string s;
        for (std::size_t i = 0; i < sg->grouping.groups.size(); ++i) {
            s += (i ? " > " : "") + std::string("{");
            for (std::size_t k = 0; k < sg->grouping.groups[i].labels.size(); ++k) {
                s += (k ? "," : "") + sg->grouping.groups[i].labels[k];
            }
            s += "}";
        }
        return s;
    };
    auto present = [&](const std::vector<std::string>& labels) {
        return std::all_of(labels.begin(), labels.end(), [&](const std::string& l) { return sg->treatment_mean.count(l) > 0; });
    };

    Finding b{"infinite-support-worst", "gaussian, logistic and sigmoid are all in the worst overall group", "N/A", ""};
    const std::vector<std::string> worst_expected{"gaussian", "logistic", "sigmoid"};
    if (sg && present(worst_expected)) {
        const auto last = sg->grouping.groups.size() - 1;
        const bool ok = sg->grouping.groups.size() > 1 &&
                        std::all_of(worst_expected.begin(), worst_expected.end(),
                                    [&](const std::string& l) { return sg->grouping.group_of(l) == last; });
        b.status = ok ? "PASS" : "FAIL";
        b.detail = describe_groups();
    }
    out.push_back(b);

    Finding c{"triweight-or-biweight-best", "triweight or biweight is in the best overall group", "N/A", ""};
    if (sg && (sg->treatment_mean.count("triweight") || sg->treatment_mean.count("biweight"))) {
        bool ok = false;
        for (const auto& l : {"triweight", "biweight"}) {
            if (sg->treatment_mean.count(l) && sg->grouping.group_of(l) == 0) ok = true;
        }
        c.status = ok ? "PASS" : "FAIL";
        c.detail = describe_groups();
    }
    out.push_back(c);
    return out;
}

struct RunSummary {
    std::size_t variant_count = 0;
    std::size_t record_count = 0;
    std::vector<VariantFailure> failures;
    std::vector<Finding> findings;
    std::vector<std::string> files;

    int exit_code() const {
        if (failures.empty()) return 0;
        return failures.size() < variant_count ? 1 : 2;
    }
};

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << content;
    if (!out) throw ConfigError("failed writing " + path.string());
}

/// Kernel rows, one column per dataset (and per extra key when given).
inline std::string pivot_table(const std::vector<AggregateRow>& rows, const std::vector<std::string>& datasets,
                               const std::string& extra) {
    std::vector<std::string> header{"kernel"};
    if (!extra.empty()) header.push_back(extra);
    header.insert(header.end(), datasets.begin(), datasets.end());
    csv::Writer out(header);

    using RowKey = std::pair<std::string, double>;
    std::map<RowKey, std::map<std::string, double>> cells;
    for (const auto& r : rows) {
        const double key2 = extra == "degree" ? *r.degree : extra == "bandwidth" ? *r.bandwidth : 0.0;
        cells[{std::string(kernel_name(*r.kernel)), key2}][r.dataset] = r.mean_mae;
    }
    for (const auto& [key, by_dataset] : cells) {
        std::vector<std::string> line{key.first};
        if (extra == "degree") line.push_back(std::to_string(static_cast<int>(key.second)));
        if (extra == "bandwidth") line.push_back(csv::format_number(key.second));
        for (const auto& d : datasets) {
            const auto it = by_dataset.find(d);
            line.push_back(it == by_dataset.end() ? "" : csv::format_number(it->second));
        }
        out.row(line);
    }
    return out.str();
}

inline std::string intervals_csv(const GridResult& grid) {
    csv::Writer out({"view", "dataset", "kernel", "bandwidth", "degree", "n", "mean", "ci_low", "ci_high"});
    struct View {
        const char* name;
        bool bandwidth;
        bool degree;
    };
    for (const View view : {View{"variant", true, true}, View{"kernel", false, false},
                            View{"kernel_degree", false, true}, View{"kernel_bandwidth", true, false}}) {
        using Key = std::tuple<std::string, std::string, double, int>;
        std::map<Key, std::vector<double>> samples;
        for (const auto& r : grid.records) {
            samples[{r.dataset, std::string(kernel_name(r.config.kernel)), view.bandwidth ? r.config.bandwidth : 0.0,
                     view.degree ? r.config.degree : 0}]
                .push_back(r.mae);
        }
        for (const auto& [key, values] : samples) {
            const auto& [dataset, kernel, b, d] = key;
            const std::string bw = view.bandwidth ? csv::format_number(b) : "all";
            const std::string dg = view.degree ? std::to_string(d) : "all";
            if (values.size() < 2) {
                out.row({view.name, dataset, kernel, bw, dg, std::to_string(values.size()), csv::format_number(values[0]),
                         "", ""});
                continue;
            }
            const auto ci = mean_ci95(values);
            out.row({view.name, dataset, kernel, bw, dg, std::to_string(values.size()), csv::format_number(ci.mean),
                     csv::format_number(ci.lower), csv::format_number(ci.upper)});
        }
    }
    return out.str();
}

inline std::vector<stats::ScopedGrouping> try_rank(const GridResult& grid, stats::RankScope scope, double alpha,
                                                   std::vector<std::string>& notes) {
    try {
        return stats::rank_variants(grid, scope, alpha);
    } catch (const std::invalid_argument& e) {
        notes.push_back(e.what());
        return {};
    }
}

}  // namespace detail

struct RunOptions {
    unsigned workers = 1;
    std::ostream* log = nullptr;
};

/// Loads every dataset, runs the variant grid, and writes all result files
/// into config.output_dir. Output bytes depend only on the config.
inline RunSummary cmd_run(const HarnessConfig& config, const RunOptions& options = {}) {
    config.validate();
    namespace fs = std::filesystem;
    const fs::path dir = config.output_dir;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());

    std::vector<PreparedDataset> prepared;
    std::vector<CleanDataset> clean;
    std::vector<std::string> names;
    for (const auto& spec : config.datasets) {
        try {
            prepared.push_back(load_dataset(spec));
        } catch (const csv::ParseError& e) {
            throw ConfigError(e.what());
        } catch (const DataError& e) {
            throw ConfigError(e.what());
        }
        clean.push_back(prepared.back().clean);
        names.push_back(spec.name);
        if (options.log) {
            *options.log << "loaded " << spec.name << ": " << clean.back().size() << " projects, "
                         << clean.back().features.cols() << " features\n";
        }
    }

    GridOptions grid_options{config.folds, config.repeats, config.seed, options.workers, config.strict_scaling};
    const GridResult grid = run_grid(clean, config.kernels, config.bandwidths, config.degrees, grid_options);

    RunSummary summary;
    summary.variant_count = grid.variant_count;
    summary.record_count = grid.records.size();
    summary.failures = grid.failures;

    auto emit = [&](const std::string& file, const std::string& content) {
        detail::write_file(dir / file, content);
        summary.files.push_back(file);
    };
    emit("grid_results.csv", export_grid_csv(grid));

    std::vector<std::string> notes;
    std::vector<AggregateRow> by_dataset_kernel;
    if (!grid.records.empty()) {
        by_dataset_kernel = aggregate_mae(grid, {.dataset = true, .kernel = true});
        emit("table4.csv", detail::pivot_table(by_dataset_kernel, names, ""));
        emit("tableA1.csv", detail::pivot_table(aggregate_mae(grid, {.dataset = true, .kernel = true, .degree = true}),
                                                names, "degree"));
        emit("tableA2.csv",
             detail::pivot_table(aggregate_mae(grid, {.dataset = true, .kernel = true, .bandwidth = true}), names,
                                 "bandwidth"));
    } else {
        notes.push_back("no successful variants; aggregate tables are empty");
        emit("table4.csv", csv::Writer({"kernel"}).str());
        emit("tableA1.csv", csv::Writer({"kernel", "degree"}).str());
        emit("tableA2.csv", csv::Writer({"kernel", "bandwidth"}).str());
    }

    std::vector<stats::ScopedGrouping> overall, by_degree, by_bandwidth;
    if (!grid.records.empty()) {
        overall = detail::try_rank(grid, stats::RankScope::Overall, config.alpha, notes);
        by_degree = detail::try_rank(grid, stats::RankScope::ByDegree, config.alpha, notes);
        by_bandwidth = detail::try_rank(grid, stats::RankScope::ByBandwidth, config.alpha, notes);
    }
    emit("scott_knott_overall.csv", stats::export_groupings_csv(overall));
    emit("scott_knott_by_degree.csv", stats::export_groupings_csv(by_degree));
    emit("scott_knott_by_bandwidth.csv", stats::export_groupings_csv(by_bandwidth));
    emit("intervals.csv", detail::intervals_csv(grid));

    summary.findings = qualitative_findings(by_dataset_kernel, overall);
    std::ostringstream findings;
    for (const auto& f : summary.findings) {
        findings << f.status << ' ' << f.id << ": " << f.description;
        if (!f.detail.empty()) findings << " [" << f.detail << "]";
        findings << '\n';
    }
    for (const auto& sg : overall) {
        if (sg.scope != "overall") continue;
        findings << "mean per-dataset rank:";
        for (const auto& [label, rank] : sg.mean_rank) findings << ' ' << label << '=' << csv::format_number(rank);
        findings << '\n';
    }
    emit("findings.txt", findings.str());

    std::map<std::string, double> lambdas;
    if (!grid.records.empty()) stats::box_cox_by_dataset(grid, &lambdas);

    nlohmann::ordered_json manifest;
    manifest["tool"] = kToolName;
    manifest["version"] = kToolVersion;
    manifest["libraries"] = {
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION)},
        {"boost", std::to_string(BOOST_VERSION / 100000) + "." + std::to_string(BOOST_VERSION / 100 % 1000)},
        {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
    manifest["seed"] = config.seed;
    manifest["config"] = to_json(config);
    auto& ds = manifest["datasets"] = nlohmann::ordered_json::array();
    for (const auto& p : prepared) {
        nlohmann::ordered_json d{{"name", p.clean.name},
                                 {"raw_rows", p.raw_rows},
                                 {"dropped_rows", p.dropped_rows},
                                 {"projects", p.clean.size()},
                                 {"features", p.clean.features.cols()},
                                 {"class", std::string(to_string(p.clean.dimensionality))}};
        if (lambdas.count(p.clean.name)) d["box_cox_lambda"] = lambdas[p.clean.name];
        ds.push_back(std::move(d));
    }
    manifest["variant_count"] = grid.variant_count;
    manifest["record_count"] = grid.records.size();
    auto& variants = manifest["variants"] = nlohmann::ordered_json::array();
    for (const auto& name : names) {
        for (auto k : config.kernels) {
            for (double b : config.bandwidths) {
                for (int d : config.degrees) {
                    variants.push_back({{"dataset", name}, {"kernel", std::string(kernel_name(k))}, {"bandwidth", b}, {"degree", d}});
                }
            }
        }
    }
    auto& failures = manifest["failures"] = nlohmann::ordered_json::array();
    for (const auto& f : grid.failures) {
        failures.push_back({{"dataset", f.dataset},
                            {"kernel", std::string(kernel_name(f.config.kernel))},
                            {"bandwidth", f.config.bandwidth},
                            {"degree", f.config.degree},
                            {"error", f.message}});
    }
    manifest["notes"] = notes;
    emit("run_manifest.json", manifest.dump(2) + "\n");
    return summary;
}

// ---------------------------------------------------------------------------
// predict

/// Parses "field=value,field=value".
inline std::map<std::string, std::string> parse_query(const std::string& text) {
    std::map<std::string, std::string> out;
    const auto fields = csv::split_record(text);
    if (!fields) throw DataError("query: unterminated quote");
    for (const auto& f : *fields) {
        const auto eq = f.find('=');
        if (eq == std::string::npos) throw DataError("query: field '" + f + "' is not of the form name=value");
        auto key = std::string(csv::trim(std::string_view(f).substr(0, eq)));
        if (key.empty()) throw DataError("query: field '" + f + "' has an empty name");
        if (!out.emplace(key, f.substr(eq + 1)).second) throw DataError("query: field '" + key + "' given twice");
    }
    return out;
}

struct PredictOutcome {
    double effort = 0.0;
    std::vector<std::string> warnings;
};

inline PredictOutcome cmd_predict(const HarnessConfig& config, const std::string& dataset, const VariantConfig& variant,
                                  const std::map<std::string, std::string>& query) {
    variant.validate();
    const auto prepared = load_dataset(config.dataset(dataset));
    PredictOutcome out;
    const auto x = prepared.preprocessor.transform(query, &out.warnings);
    const TrainingSet train(prepared.clean.features, prepared.clean.efforts);
    out.effort = predict(train, variant, x);
    return out;
}

}  // namespace lwr::harness
