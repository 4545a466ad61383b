#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "lwr/csv.hpp"
#include "lwr/data.hpp"
#include "lwr/kernels.hpp"
#include "lwr/lwr.hpp"

namespace lwr {

// ---------------------------------------------------------------------------
// Fold plans

/// Uniform integer in [0, bound) from a 64-bit generator, by rejection.
/// Independent of the standard library's distribution implementations.
inline std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;  // 2^64 mod bound
    for (;;) {
        const std::uint64_t r = rng();
        if (r >= threshold) return r % bound;
    }
}

/// Repeated k-fold partition. assignment[repeat][fold] holds ascending test indices.
struct FoldPlan {
    std::size_t n = 0;
    std::size_t folds = 10;
    std::size_t repeats = 10;
    std::uint64_t seed = 0;
    std::vector<std::vector<std::vector<std::size_t>>> assignment;

    const std::vector<std::size_t>& test_indices(std::size_t repeat, std::size_t fold) const {
        return assignment.at(repeat).at(fold);
    }

    std::vector<std::size_t> train_indices(std::size_t repeat, std::size_t fold) const {
        std::vector<bool> is_test(n, false);
        for (auto i : test_indices(repeat, fold)) is_test[i] = true;
        std::vector<std::size_t> train;
        train.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (!is_test[i]) train.push_back(i);
        }
        return train;
    }
};

/// Each repeat shuffles 0..n-1 with Fisher-Yates driven by mt19937_64 seeded
/// with (seed + repeat), then deals the shuffled indices round-robin into folds.
inline FoldPlan make_fold_plan(std::size_t n, std::size_t folds = 10, std::size_t repeats = 10,
                               std::uint64_t seed = 0) {
    if (folds < 2) throw std::invalid_argument("fold plan: need at least 2 folds");
    if (repeats < 1) throw std::invalid_argument("fold plan: need at least 1 repeat");
    if (n < folds) {
        throw std::invalid_argument("fold plan: " + std::to_string(n) + " instances cannot fill " +
                                    std::to_string(folds) + " folds");
    }
    FoldPlan plan{n, folds, repeats, seed, {}};
    plan.assignment.resize(repeats);
    std::vector<std::size_t> perm(n);
    for (std::size_t r = 0; r < repeats; ++r) {
        std::mt19937_64 rng(seed + r);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        for (std::size_t i = n - 1; i > 0; --i) {
            const auto j = static_cast<std::size_t>(bounded_draw(rng, i + 1));
            std::swap(perm[i], perm[j]);
        }
        auto& sets = plan.assignment[r];
        sets.assign(folds, {});
        for (std::size_t pos = 0; pos < n; ++pos) sets[pos % folds].push_back(perm[pos]);
        for (auto& s : sets) std::sort(s.begin(), s.end());
    }
    return plan;
}

// ---------------------------------------------------------------------------
// Error measure

/// Mean absolute error.
inline double mae(std::span<const double> actual, std::span<const double> predicted) {
    if (actual.size() != predicted.size()) throw std::invalid_argument("mae: length mismatch");
    if (actual.empty()) throw std::invalid_argument("mae: empty input");
    double sum = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        if (!std::isfinite(actual[i]) || !std::isfinite(predicted[i])) {
            throw std::invalid_argument("mae: non-finite value");
        }
        sum += std::abs(actual[i] - predicted[i]);
    }
    return sum / static_cast<double>(actual.size());
}

// ---------------------------------------------------------------------------
// Records

struct MaeRecord {
    std::string dataset;
    VariantConfig config;
    std::size_t repeat = 0;
    std::size_t fold = 0;
    double mae = 0.0;
};

/// Export ordering: dataset, kernel name, bandwidth, degree, repeat, fold.
inline auto record_key(const MaeRecord& r) {
    return std::make_tuple(std::string_view(r.dataset), kernel_name(r.config.kernel), r.config.bandwidth,
                           r.config.degree, r.repeat, r.fold);
}

struct VariantFailure {
    std::string dataset;
    VariantConfig config;
    std::string message;
};

struct GridResult {
    std::vector<MaeRecord> records;
    std::vector<VariantFailure> failures;
    std::size_t variant_count = 0;  // attempted (dataset, kernel, bandwidth, degree) cells
};

/// Fits on the training rows of every (repeat, fold) and scores the test rows.
///
/// With `strict_scaling`, min-max parameters are re-fitted on each training
/// split from the unscaled features; columns constant on that split are dropped.
inline std::vector<MaeRecord> run_variant(const CleanDataset& clean, const VariantConfig& config,
                                          const FoldPlan& plan, bool strict_scaling = false) {
    config.validate();
    if (plan.n != static_cast<std::size_t>(clean.size())) {
        throw std::invalid_argument("run_variant: fold plan covers " + std::to_string(plan.n) +
                                    " rows, dataset '" + clean.name + "' has " + std::to_string(clean.size()));
    }
    const Eigen::Index p = clean.features.cols();
    std::vector<MaeRecord> records;
    records.reserve(plan.repeats * plan.folds);

    for (std::size_t r = 0; r < plan.repeats; ++r) {
        for (std::size_t f = 0; f < plan.folds; ++f) {
            try {
                const auto train_idx = plan.train_indices(r, f);
                const auto& test_idx = plan.test_indices(r, f);
                const RowMatrix& source = strict_scaling ? clean.unscaled : clean.features;

                std::vector<Eigen::Index> columns;
                std::vector<double> lo, range;
                for (Eigen::Index j = 0; j < p; ++j) {
                    if (!strict_scaling) {
                        columns.push_back(j);
                        lo.push_back(0.0);
                        range.push_back(1.0);
                        continue;
                    }
                    double mn = std::numeric_limits<double>::infinity(), mx = -mn;
                    for (auto i : train_idx) {
                        mn = std::min(mn, source(static_cast<Eigen::Index>(i), j));
                        mx = std::max(mx, source(static_cast<Eigen::Index>(i), j));
                    }
                    if (mx > mn) {
                        columns.push_back(j);
                        lo.push_back(mn);
                        range.push_back(mx - mn);
                    }
                }
                if (columns.empty()) throw std::runtime_error("no non-constant feature on this training split");

                const auto q = static_cast<Eigen::Index>(columns.size());
                auto scaled_row = [&](std::size_t i, double* out) {
                    for (Eigen::Index c = 0; c < q; ++c) {
                        const auto cu = static_cast<std::size_t>(c);
                        out[c] = (source(static_cast<Eigen::Index>(i), columns[cu]) - lo[cu]) / range[cu];
                    }
                };
                RowMatrix train_x(static_cast<Eigen::Index>(train_idx.size()), q);
                Eigen::VectorXd train_y(static_cast<Eigen::Index>(train_idx.size()));
                for (std::size_t t = 0; t < train_idx.size(); ++t) {
                    scaled_row(train_idx[t], train_x.row(static_cast<Eigen::Index>(t)).data());
                    train_y(static_cast<Eigen::Index>(t)) = clean.efforts(static_cast<Eigen::Index>(train_idx[t]));
                }
                const TrainingSet train(std::move(train_x), std::move(train_y));

                std::vector<double> actual, predicted, query(static_cast<std::size_t>(q));
                for (auto i : test_idx) {
                    scaled_row(i, query.data());
                    actual.push_back(clean.efforts(static_cast<Eigen::Index>(i)));
                    const double y = predict(train, config, query);
                    if (!std::isfinite(y)) throw std::runtime_error("non-finite prediction");
                    predicted.push_back(y);
                }
                records.push_back({clean.name, config, r, f, mae(actual, predicted)});
            } catch (const std::exception& e) {
                throw std::runtime_error(clean.name + " " + std::string(kernel_name(config.kernel)) +
                                         " b=" + csv::format_number(config.bandwidth) +
                                         " d=" + std::to_string(config.degree) + " repeat " + std::to_string(r) +
                                         " fold " + std::to_string(f) + ": " + e.what());
            }
        }
    }
    return records;
}

struct GridOptions {
    std::size_t folds = 10;
    std::size_t repeats = 10;
    std::uint64_t seed = 0;
    unsigned workers = 1;
    bool strict_scaling = false;
};

/// Runs every dataset x kernel x bandwidth x degree cell. All variants of a
/// dataset share one fold plan. Failures are collected, never fatal; output
/// is sorted by record key so worker count cannot change it.
inline GridResult run_grid(std::span<const CleanDataset> datasets, std::span<const KernelKind> kernels,
                           std::span<const double> bandwidths, std::span<const int> degrees,
                           const GridOptions& options = {}) {
    if (datasets.empty() || kernels.empty() || bandwidths.empty() || degrees.empty()) {
        throw std::invalid_argument("run_grid: every axis needs at least one value");
    }
    for (std::size_t i = 0; i < datasets.size(); ++i) {
        for (std::size_t j = i + 1; j < datasets.size(); ++j) {
            if (datasets[i].name == datasets[j].name) {
                throw std::invalid_argument("run_grid: duplicate dataset name '" + datasets[i].name + "'");
            }
        }
    }
    std::vector<FoldPlan> plans;
    for (const auto& d : datasets) {
        plans.push_back(make_fold_plan(static_cast<std::size_t>(d.size()), options.folds, options.repeats, options.seed));
    }

    struct Task {
        std::size_t dataset;
        VariantConfig config;
    };
    std::vector<Task> tasks;
    for (std::size_t d = 0; d < datasets.size(); ++d) {
        for (auto k : kernels) {
            for (double b : bandwidths) {
                for (int deg : degrees) tasks.push_back({d, VariantConfig{k, b, deg}});
            }
        }
    }

    struct Outcome {
        std::vector<MaeRecord> records;
        std::string error;
    };
    std::vector<Outcome> outcomes(tasks.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t t = next++; t < tasks.size(); t = next++) {
            const auto& task = tasks[t];
            try {
                outcomes[t].records = run_variant(datasets[task.dataset], task.config, plans[task.dataset],
                                                  options.strict_scaling);
            } catch (const std::exception& e) {
                outcomes[t].error = e.what();
            }
        }
    };
    const unsigned workers = std::max(1u, std::min<unsigned>(options.workers, static_cast<unsigned>(tasks.size())));
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    }

    GridResult result;
    result.variant_count = tasks.size();
    for (std::size_t t = 0; t < tasks.size(); ++t) {
        if (!outcomes[t].error.empty()) {
            result.failures.push_back({datasets[tasks[t].dataset].name, tasks[t].config, outcomes[t].error});
            continue;
        }
        for (auto& rec : outcomes[t].records) result.records.push_back(std::move(rec));
    }
    std::sort(result.records.begin(), result.records.end(),
              [](const MaeRecord& a, const MaeRecord& b) { return record_key(a) < record_key(b); });
    std::sort(result.failures.begin(), result.failures.end(), [](const VariantFailure& a, const VariantFailure& b) {
        return std::make_tuple(std::string_view(a.dataset), kernel_name(a.config.kernel), a.config.bandwidth,
                               a.config.degree) < std::make_tuple(std::string_view(b.dataset),
                                                                  kernel_name(b.config.kernel), b.config.bandwidth,
                                                                  b.config.degree);
    });
    return result;
}

// ---------------------------------------------------------------------------
// Export

inline const std::vector<std::string> kGridHeader{"dataset", "kernel", "bandwidth", "degree", "repeat", "fold", "mae"};

inline std::string export_grid_csv(const GridResult& result) {
    csv::Writer out(kGridHeader);
    for (const auto& r : result.records) {
        out.line(r.dataset, kernel_name(r.config.kernel), r.config.bandwidth, r.config.degree, r.repeat, r.fold,
                 r.mae);
    }
    return out.str();
}

/// Parses a grid export back into records.
inline GridResult import_grid_csv(std::istream& in, const std::string& where = "grid_results.csv") {
    const auto table = csv::read_table(in, where);
    if (table.header != kGridHeader) throw csv::ParseError(where, 1, "unexpected grid header");
    GridResult result;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        const auto line = table.line_numbers[i];
        auto number = [&](std::size_t col) {
            const auto v = csv::parse_number(row[col]);
            if (!v) throw csv::ParseError(where, line, "column '" + kGridHeader[col] + "' is not a number");
            return *v;
        };
        const auto kernel = parse_kernel(row[1]);
        if (!kernel) throw csv::ParseError(where, line, "unknown kernel '" + row[1] + "'");
        result.records.push_back({row[0], VariantConfig{*kernel, number(2), static_cast<int>(number(3))},
                                  static_cast<std::size_t>(number(4)), static_cast<std::size_t>(number(5)), number(6)});
    }
    return result;
}

// ---------------------------------------------------------------------------
// Aggregation

struct GroupBy {
    bool dataset = false;
    bool kernel = false;
    bool bandwidth = false;
    bool degree = false;

    bool empty() const { return !(dataset || kernel || bandwidth || degree); }
};

struct AggregateRow {
    std::string dataset;  // empty when not grouped
    std::optional<KernelKind> kernel;
    std::optional<double> bandwidth;
    std::optional<int> degree;
    double mean_mae = 0.0;
    std::size_t count = 0;
};

/// Arithmetic mean of mae over records sharing the group key. Rows come back
/// sorted by key (dataset, kernel name, bandwidth, degree).
inline std::vector<AggregateRow> aggregate_mae(const GridResult& result, const GroupBy& group_by) {
    if (group_by.empty()) throw std::invalid_argument("aggregate_mae: no grouping key");
    if (result.records.empty()) throw std::invalid_argument("aggregate_mae: no records");
    using Key = std::tuple<std::string, std::string, double, int>;
    std::map<Key, AggregateRow> groups;
    for (const auto& r : result.records) {
        Key key{group_by.dataset ? r.dataset : "", group_by.kernel ? std::string(kernel_name(r.config.kernel)) : "",
                group_by.bandwidth ? r.config.bandwidth : 0.0, group_by.degree ? r.config.degree : 0};
        auto& row = groups[key];
        if (row.count == 0) {
            if (group_by.dataset) row.dataset = r.dataset;
            if (group_by.kernel) row.kernel = r.config.kernel;
            if (group_by.bandwidth) row.bandwidth = r.config.bandwidth;
            if (group_by.degree) row.degree = r.config.degree;
        }
        row.mean_mae += r.mae;
        ++row.count;
    }
    std::vector<AggregateRow> rows;
    rows.reserve(groups.size());
    for (auto& [key, row] : groups) {
        row.mean_mae /= static_cast<double>(row.count);
        rows.push_back(std::move(row));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Confidence intervals

struct Interval {
    double mean = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

inline double t_quantile_975(std::size_t dof) {
    return boost::math::quantile(boost::math::students_t(static_cast<double>(dof)), 0.975);
}

/// Student-t 95% interval of the mean.
inline Interval mean_ci95(std::span<const double> values) {
    if (values.size() < 2) throw std::invalid_argument("mean_ci95: need at least 2 values");
    const auto n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double half = t_quantile_975(values.size() - 1) * std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    return {mean, mean - half, mean + half};
}

}  // namespace lwr
