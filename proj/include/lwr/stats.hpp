#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "lwr/evaluation.hpp"

namespace lwr::stats {

struct Treatment {
    std::string label;
    std::vector<double> values;
};

using TreatmentSet = std::vector<Treatment>;

struct AnovaResult {
    double f_statistic = 0.0;  // +infinity when within-group variance is zero but means differ
    int df_between = 0;
    int df_within = 0;
    double p_value = 1.0;
    double ss_between = 0.0;
    double ss_within = 0.0;
};

/// P(F <= x) for the F distribution with (d1, d2) degrees of freedom.
inline double f_cdf(double x, double d1, double d2) {
    if (!(d1 > 0.0) || !(d2 > 0.0)) throw std::invalid_argument("f_cdf: degrees of freedom must be positive");
    if (!(x > 0.0)) return 0.0;
    if (std::isinf(x)) return 1.0;
    return boost::math::ibeta(d1 / 2.0, d2 / 2.0, d1 * x / (d1 * x + d2));
}

/// Upper tail P(F > x), computed directly to keep small p-values accurate.
inline double f_sf(double x, double d1, double d2) {
    if (!(d1 > 0.0) || !(d2 > 0.0)) throw std::invalid_argument("f_sf: degrees of freedom must be positive");
    if (!(x > 0.0)) return 1.0;
    if (std::isinf(x)) return 0.0;
    return boost::math::ibetac(d1 / 2.0, d2 / 2.0, d1 * x / (d1 * x + d2));
}

/// One-way ANOVA over groups of observations.
///
/// Requires every group to be nonempty and more observations than groups.
/// Zero within-group variance yields F = +inf, p = 0 when the means differ,
/// and F = 0, p = 1 when they do not.
inline AnovaResult one_way_anova(std::span<const std::span<const double>> groups) {
    if (groups.size() < 2) throw std::invalid_argument("anova: need at least 2 groups");
    std::size_t total = 0;
    double grand_sum = 0.0;
    for (const auto& g : groups) {
        if (g.empty()) throw std::invalid_argument("anova: empty group");
        for (double v : g) {
            if (!std::isfinite(v)) throw std::invalid_argument("anova: non-finite value");
            grand_sum += v;
        }
        total += g.size();
    }
    if (total <= groups.size()) throw std::invalid_argument("anova: need more observations than groups");

    const double grand_mean = grand_sum / static_cast<double>(total);
    AnovaResult res;
    for (const auto& g : groups) {
        const double mean = std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(g.size());
        res.ss_between += static_cast<double>(g.size()) * (mean - grand_mean) * (mean - grand_mean);
        for (double v : g) res.ss_within += (v - mean) * (v - mean);
    }
    res.df_between = static_cast<int>(groups.size()) - 1;
    res.df_within = static_cast<int>(total - groups.size());

    // Sums of squares below rounding noise of the data count as zero.
    double scale = 0.0;
    for (const auto& g : groups) {
        for (double v : g) scale = std::max(scale, std::abs(v - grand_mean));
    }
    const double noise = 1e-24 * scale * scale * static_cast<double>(total);
    const bool no_between = res.ss_between <= noise;
    const bool no_within = res.ss_within <= noise;

    if (no_within) {
        res.f_statistic = no_between ? 0.0 : std::numeric_limits<double>::infinity();
        res.p_value = no_between ? 1.0 : 0.0;
        return res;
    }
    const double msb = res.ss_between / res.df_between;
    const double msw = res.ss_within / res.df_within;
    res.f_statistic = msb / msw;
    res.p_value = f_sf(res.f_statistic, res.df_between, res.df_within);
    return res;
}

inline AnovaResult one_way_anova(const TreatmentSet& treatments) {
    std::vector<std::span<const double>> groups;
    for (const auto& t : treatments) groups.emplace_back(t.values);
    return one_way_anova(std::span<const std::span<const double>>(groups));
}

// ---------------------------------------------------------------------------
// Box-Cox

inline double box_cox(double x, double lambda) {
    if (!(x > 0.0)) throw std::invalid_argument("box_cox: values must be positive");
    return lambda == 0.0 ? std::log(x) : std::expm1(lambda * std::log(x)) / lambda;
}

inline std::vector<double> box_cox(std::span<const double> values, double lambda) {
    std::vector<double> out;
    out.reserve(values.size());
    for (double v : values) out.push_back(box_cox(v, lambda));
    return out;
}

/// Profile log-likelihood of the Box-Cox normal model, up to a constant.
inline double box_cox_log_likelihood(std::span<const double> values, double lambda) {
    const auto n = static_cast<double>(values.size());
    double log_sum = 0.0, mean = 0.0;
    std::vector<double> y;
    y.reserve(values.size());
    for (double v : values) {
        y.push_back(box_cox(v, lambda));
        log_sum += std::log(v);
        mean += y.back();
    }
    mean /= n;
    double var = 0.0;
    for (double t : y) var += (t - mean) * (t - mean);
    var /= n;
    if (!(var > 0.0) || !std::isfinite(var)) return -std::numeric_limits<double>::infinity();
    return -0.5 * n * std::log(var) + (lambda - 1.0) * log_sum;
}

/// Maximum-likelihood lambda by golden-section search on [-5, 5].
inline double box_cox_mle(std::span<const double> values, double tolerance = 1e-4) {
    if (values.size() < 3) throw std::invalid_argument("box_cox_mle: need at least 3 values");
    for (double v : values) {
        if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("box_cox_mle: values must be positive");
    }
    if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values[0]; })) {
        throw std::invalid_argument("box_cox_mle: all values are equal");
    }
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = -5.0, b = 5.0;
    double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
    double fc = box_cox_log_likelihood(values, c), fd = box_cox_log_likelihood(values, d);
    while (b - a > tolerance) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = box_cox_log_likelihood(values, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = box_cox_log_likelihood(values, d);
        }
    }
    return 0.5 * (a + b);
}

/// Box-Cox with an MLE lambda. Constant samples come back unchanged;
/// nonpositive samples are shifted to be positive first.
inline std::vector<double> box_cox_normalize(std::span<const double> values, double* lambda_out = nullptr) {
    std::vector<double> x(values.begin(), values.end());
    if (lambda_out) *lambda_out = 1.0;
    if (x.size() < 3 || std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; })) return x;
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    if (*lo <= 0.0) {
        const double shift = -*lo + 1e-9 * std::max(1.0, *hi - *lo);
        for (double& v : x) v += shift;
    }
    const double lambda = box_cox_mle(x);
    if (lambda_out) *lambda_out = lambda;
    return box_cox(x, lambda);
}

// ---------------------------------------------------------------------------
// Scott-Knott

struct SkGroup {
    std::vector<std::string> labels;  // ascending treatment mean
    double mean = 0.0;                // mean of the pooled observations
};

struct ScottKnottGrouping {
    std::vector<SkGroup> groups;  // ascending mean; index 0 has the smallest values

    /// 0-based group index of a treatment.
    std::size_t group_of(const std::string& label) const {
        for (std::size_t g = 0; g < groups.size(); ++g) {
            if (std::find(groups[g].labels.begin(), groups[g].labels.end(), label) != groups[g].labels.end()) return g;
        }
        throw std::out_of_range("scott_knott: unknown treatment '" + label + "'");
    }
};

inline double sample_mean(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

namespace detail {

inline void scott_knott_split(const TreatmentSet& sorted, const std::vector<double>& means, std::size_t lo,
                              std::size_t hi, double alpha, std::vector<std::pair<std::size_t, std::size_t>>& out) {
    const std::size_t g = hi - lo;
    if (g < 2) {
        out.emplace_back(lo, hi);
        return;
    }
    const double overall = std::accumulate(means.begin() + static_cast<std::ptrdiff_t>(lo),
                                           means.begin() + static_cast<std::ptrdiff_t>(hi), 0.0) /
                           static_cast<double>(g);
    // Between-group sum of squares of treatment means for each contiguous cut.
    std::size_t best_cut = lo + 1;
    double best = -1.0;
    double left_sum = 0.0;
    for (std::size_t cut = lo + 1; cut < hi; ++cut) {
        left_sum += means[cut - 1];
        const auto k1 = static_cast<double>(cut - lo);
        const auto k2 = static_cast<double>(hi - cut);
        const double m1 = left_sum / k1;
        const double m2 = (overall * static_cast<double>(g) - left_sum) / k2;
        const double b = k1 * (m1 - overall) * (m1 - overall) + k2 * (m2 - overall) * (m2 - overall);
        if (b > best) {
            best = b;
            best_cut = cut;
        }
    }
    std::vector<double> left, right;
    for (std::size_t i = lo; i < hi; ++i) {
        auto& side = i < best_cut ? left : right;
        side.insert(side.end(), sorted[i].values.begin(), sorted[i].values.end());
    }
    bool significant = false;
    if (left.size() + right.size() > 2) {
        const std::span<const double> sides[] = {left, right};
        significant = one_way_anova(std::span<const std::span<const double>>(sides)).p_value < alpha;
    }
    if (!significant) {
        out.emplace_back(lo, hi);
        return;
    }
    scott_knott_split(sorted, means, lo, best_cut, alpha, out);
    scott_knott_split(sorted, means, best_cut, hi, alpha, out);
}

}  // namespace detail

/// Scott-Knott clustering: order treatments by mean, cut where the
/// between-group sum of squares of means peaks, keep the cut when a one-way
/// ANOVA on the two pooled sides is significant at `alpha`, and recurse.
inline ScottKnottGrouping scott_knott(const TreatmentSet& treatments, double alpha = 0.05) {
    if (treatments.size() < 2) throw std::invalid_argument("scott_knott: need at least 2 treatments");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("scott_knott: alpha must lie in (0, 1)");
    for (const auto& t : treatments) {
        if (t.values.empty()) throw std::invalid_argument("scott_knott: treatment '" + t.label + "' has no values");
        for (double v : t.values) {
            if (!std::isfinite(v)) throw std::invalid_argument("scott_knott: non-finite value in '" + t.label + "'");
        }
    }
    TreatmentSet sorted = treatments;
    std::vector<double> means;
    std::vector<std::size_t> order(sorted.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> raw_means;
    for (const auto& t : sorted) raw_means.push_back(sample_mean(t.values));
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return raw_means[a] < raw_means[b] || (raw_means[a] == raw_means[b] && sorted[a].label < sorted[b].label);
    });
    TreatmentSet ordered;
    for (auto i : order) {
        ordered.push_back(std::move(sorted[i]));
        means.push_back(raw_means[i]);
    }

    std::vector<std::pair<std::size_t, std::size_t>> ranges;
    detail::scott_knott_split(ordered, means, 0, ordered.size(), alpha, ranges);

    ScottKnottGrouping result;
    for (const auto& [lo, hi] : ranges) {
        SkGroup group;
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t i = lo; i < hi; ++i) {
            group.labels.push_back(ordered[i].label);
            sum += std::accumulate(ordered[i].values.begin(), ordered[i].values.end(), 0.0);
            count += ordered[i].values.size();
        }
        group.mean = sum / static_cast<double>(count);
        result.groups.push_back(std::move(group));
    }
    return result;
}

// ---------------------------------------------------------------------------
// Ranking over grid results

enum class RankScope { Overall, ByDegree, ByBandwidth };

struct ScopedGrouping {
    std::string scope;  // "overall", "dataset=<name>", "kernel=<name>", ...
    ScottKnottGrouping grouping;
    std::map<std::string, double> treatment_mean;  // Box-Cox scale
    std::map<std::string, double> mean_rank;       // mean 1-based group index across datasets
};

/// Box-Cox-scaled copy of the grid: lambda is fitted per dataset on all of its records.
inline GridResult box_cox_by_dataset(const GridResult& result, std::map<std::string, double>* lambdas = nullptr) {
    std::map<std::string, std::vector<std::size_t>> by_dataset;
    for (std::size_t i = 0; i < result.records.size(); ++i) by_dataset[result.records[i].dataset].push_back(i);
    GridResult scaled = result;
    for (const auto& [name, idx] : by_dataset) {
        std::vector<double> values;
        values.reserve(idx.size());
        for (auto i : idx) values.push_back(result.records[i].mae);
        double lambda = 1.0;
        const auto transformed = box_cox_normalize(values, &lambda);
        for (std::size_t k = 0; k < idx.size(); ++k) scaled.records[idx[k]].mae = transformed[k];
        if (lambdas) (*lambdas)[name] = lambda;
    }
    return scaled;
}

namespace detail {

inline std::string treatment_label(const MaeRecord& r, RankScope scope) {
    switch (scope) {
        case RankScope::Overall: return std::string(kernel_name(r.config.kernel));
        case RankScope::ByDegree: return std::to_string(r.config.degree);
        case RankScope::ByBandwidth: return csv::format_number(r.config.bandwidth);
    }
    return {};
}

inline TreatmentSet collect(const GridResult& scaled, RankScope scope, const std::optional<KernelKind>& kernel,
                            const std::optional<std::string>& dataset) {
    std::map<std::string, std::vector<double>> samples;
    for (const auto& r : scaled.records) {
        if (kernel && r.config.kernel != *kernel) continue;
        if (dataset && r.dataset != *dataset) continue;
        samples[treatment_label(r, scope)].push_back(r.mae);
    }
    TreatmentSet set;
    for (auto& [label, values] : samples) set.push_back({label, std::move(values)});
    return set;
}

inline ScopedGrouping rank_one(const GridResult& scaled, RankScope scope, const std::optional<KernelKind>& kernel,
                               const std::vector<std::string>& datasets, std::string label, double alpha) {
    const auto set = collect(scaled, scope, kernel, std::nullopt);
    if (set.size() < 2) throw std::invalid_argument("rank_variants: scope '" + label + "' has fewer than 2 treatments");
    ScopedGrouping out;
    out.scope = std::move(label);
    out.grouping = scott_knott(set, alpha);
    for (const auto& t : set) out.treatment_mean[t.label] = sample_mean(t.values);

    std::map<std::string, double> rank_sum;
    std::size_t ranked = 0;
    for (const auto& d : datasets) {
        const auto per = collect(scaled, scope, kernel, d);
        if (per.size() != set.size()) continue;
        const auto g = scott_knott(per, alpha);
        for (const auto& t : per) rank_sum[t.label] += static_cast<double>(g.group_of(t.label) + 1);
        ++ranked;
    }
    for (const auto& t : set) {
        out.mean_rank[t.label] = ranked ? rank_sum[t.label] / static_cast<double>(ranked)
                                        : static_cast<double>(out.grouping.group_of(t.label) + 1);
    }
    return out;
}

}  // namespace detail

/// Scott-Knott rankings over a grid: Box-Cox per dataset, pool across
/// datasets, cluster. Overall clusters kernels; ByDegree and ByBandwidth
/// cluster the degree or bandwidth values separately for every kernel.
/// Overall additionally emits one "dataset=<name>" grouping per dataset.
inline std::vector<ScopedGrouping> rank_variants(const GridResult& result, RankScope scope, double alpha = 0.05) {
    if (result.records.empty()) throw std::invalid_argument("rank_variants: no records");
    const GridResult scaled = box_cox_by_dataset(result);
    std::vector<std::string> datasets;
    for (const auto& r : scaled.records) {
        if (std::find(datasets.begin(), datasets.end(), r.dataset) == datasets.end()) datasets.push_back(r.dataset);
    }
    std::vector<ScopedGrouping> out;
    if (scope == RankScope::Overall) {
        out.push_back(detail::rank_one(scaled, scope, std::nullopt, datasets, "overall", alpha));
        for (const auto& d : datasets) {
            const auto set = detail::collect(scaled, scope, std::nullopt, d);
            ScopedGrouping per;
            per.scope = "dataset=" + d;
            per.grouping = scott_knott(set, alpha);
            for (const auto& t : set) {
                per.treatment_mean[t.label] = sample_mean(t.values);
                per.mean_rank[t.label] = static_cast<double>(per.grouping.group_of(t.label) + 1);
            }
            out.push_back(std::move(per));
        }
        return out;
    }
    std::vector<KernelKind> kernels;
    for (const auto& r : scaled.records) {
        if (std::find(kernels.begin(), kernels.end(), r.config.kernel) == kernels.end()) kernels.push_back(r.config.kernel);
    }
    std::sort(kernels.begin(), kernels.end(), [](KernelKind a, KernelKind b) { return kernel_name(a) < kernel_name(b); });
    for (auto k : kernels) {
        out.push_back(detail::rank_one(scaled, scope, k, datasets, "kernel=" + std::string(kernel_name(k)), alpha));
    }
    return out;
}

inline const std::vector<std::string> kGroupingHeader{"scope", "treatment", "group_index", "group_mean",
                                                      "treatment_mean"};

/// One row per treatment; group_index is 1-based, 1 = smallest mean.
inline std::string export_groupings_csv(const std::vector<ScopedGrouping>& groupings) {
    csv::Writer out(kGroupingHeader);
    for (const auto& sg : groupings) {
        for (std::size_t g = 0; g < sg.grouping.groups.size(); ++g) {
            for (const auto& label : sg.grouping.groups[g].labels) {
                out.line(sg.scope, label, g + 1, sg.grouping.groups[g].mean, sg.treatment_mean.at(label));
            }
        }
    }
    return out.str();
}

}  // namespace lwr::stats
