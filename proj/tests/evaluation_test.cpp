#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "lwr/evaluation.hpp"

using lwr::KernelKind;
using lwr::VariantConfig;

namespace {

lwr::CleanDataset linear_dataset(std::string name, std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0, 1);
    lwr::CleanDataset d;
    d.name = std::move(name);
    d.features.resize(static_cast<Eigen::Index>(n), 2);
    d.efforts.resize(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < d.features.rows(); ++i) {
        d.features(i, 0) = u(rng);
        d.features(i, 1) = u(rng);
        d.efforts(i) = 100 + 40 * d.features(i, 0) + 7 * d.features(i, 1);
    }
    d.unscaled = d.features;
    d.feature_names = {"a", "b"};
    return d;
}

lwr::CleanDataset noisy_dataset(std::string name, std::size_t n, std::uint64_t seed) {
    auto d = linear_dataset(std::move(name), n, seed);
    std::mt19937_64 rng(seed + 1);
    std::lognormal_distribution<double> noise(0, 0.5);
    for (Eigen::Index i = 0; i < d.efforts.size(); ++i) {
        d.efforts(i) *= noise(rng);
        d.unscaled(i, 0) = 10 + 90 * d.features(i, 0);
        d.unscaled(i, 1) = -3 + 2 * d.features(i, 1);
    }
    return d;
}

lwr::MaeRecord rec(std::string ds, KernelKind k, double b, int d, std::size_t r, std::size_t f, double m) {
    return {std::move(ds), VariantConfig{k, b, d}, r, f, m};
}

}  // namespace

TEST(FoldPlan, Examples) {
    const auto plan = lwr::make_fold_plan(20, 10, 1, 7);
    std::set<std::size_t> all;
    for (std::size_t f = 0; f < 10; ++f) {
        EXPECT_EQ(plan.test_indices(0, f).size(), 2u);
        all.insert(plan.test_indices(0, f).begin(), plan.test_indices(0, f).end());
    }
    EXPECT_EQ(all.size(), 20u);
    EXPECT_EQ(*all.rbegin(), 19u);

    const auto uneven = lwr::make_fold_plan(15, 10, 1, 0);
    std::vector<std::size_t> sizes;
    for (std::size_t f = 0; f < 10; ++f) sizes.push_back(uneven.test_indices(0, f).size());
    EXPECT_EQ(std::count(sizes.begin(), sizes.end(), 2u), 5);
    EXPECT_EQ(std::count(sizes.begin(), sizes.end(), 1u), 5);

    EXPECT_EQ(lwr::make_fold_plan(50, 10, 3, 42).assignment, lwr::make_fold_plan(50, 10, 3, 42).assignment);
    EXPECT_NE(lwr::make_fold_plan(50, 10, 1, 42).assignment, lwr::make_fold_plan(50, 10, 1, 43).assignment);
}

TEST(FoldPlan, Errors) {
    EXPECT_THROW(lwr::make_fold_plan(9, 10, 1, 0), std::invalid_argument);
    EXPECT_THROW(lwr::make_fold_plan(10, 1, 1, 0), std::invalid_argument);
    EXPECT_THROW(lwr::make_fold_plan(10, 2, 0, 0), std::invalid_argument);
}

TEST(FoldPlan, PartitionProperty) {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t folds = 2 + rng() % 9;
        const std::size_t n = folds + rng() % 200;
        const std::size_t repeats = 1 + rng() % 4;
        const auto plan = lwr::make_fold_plan(n, folds, repeats, rng());
        for (std::size_t r = 0; r < repeats; ++r) {
            std::vector<int> seen(n, 0);
            std::size_t lo = n, hi = 0;
            for (std::size_t f = 0; f < folds; ++f) {
                const auto& t = plan.test_indices(r, f);
                lo = std::min(lo, t.size());
                hi = std::max(hi, t.size());
                for (auto i : t) ++seen[i];
                const auto train = plan.train_indices(r, f);
                ASSERT_EQ(train.size() + t.size(), n);
            }
            ASSERT_TRUE(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
            ASSERT_LE(hi - lo, 1u);
        }
    }
}

TEST(FoldPlan, RepeatsReshuffle) {
    const auto plan = lwr::make_fold_plan(40, 10, 2, 5);
    EXPECT_NE(plan.assignment[0], plan.assignment[1]);
    // repeat r of seed s equals repeat 0 of seed s + r
    EXPECT_EQ(plan.assignment[1], lwr::make_fold_plan(40, 10, 1, 6).assignment[0]);
}

TEST(Mae, Examples) {
    EXPECT_EQ(lwr::mae(std::vector{10.0, 20.0}, std::vector{12.0, 18.0}), 2.0);
    const std::vector v{1.5, -2.0, 7.0};
    EXPECT_EQ(lwr::mae(v, v), 0.0);
    EXPECT_EQ(lwr::mae(std::vector{0.0, 0.0, 0.0}, std::vector{3.0, -3.0, 0.0}), 2.0);
    EXPECT_THROW(lwr::mae(std::vector{1.0}, std::vector{1.0, 2.0}), std::invalid_argument);
    EXPECT_THROW(lwr::mae(std::vector<double>{}, std::vector<double>{}), std::invalid_argument);
    EXPECT_THROW(lwr::mae(std::vector{std::nan("")}, std::vector{1.0}), std::invalid_argument);
}

TEST(RunVariant, ExactLinearRecoveryEndToEnd) {
    const auto d = linear_dataset("lin", 40, 3);
    const auto plan = lwr::make_fold_plan(40, 10, 10, 0);
    for (auto k : lwr::kAllKernels) {
        const auto records = lwr::run_variant(d, {k, 0.3, 1}, plan);
        ASSERT_EQ(records.size(), 100u);
        for (const auto& r : records) EXPECT_LE(r.mae, 1e-6) << lwr::kernel_name(k);
    }
}

TEST(RunVariant, SharedPlanDiffersOnlyInKernelAndMae) {
    const auto d = noisy_dataset("n", 30, 8);
    const auto plan = lwr::make_fold_plan(30, 10, 10, 1);
    const auto a = lwr::run_variant(d, {KernelKind::Gaussian, 0.4, 2}, plan);
    const auto b = lwr::run_variant(d, {KernelKind::Epanechnikov, 0.4, 2}, plan);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].dataset, b[i].dataset);
        EXPECT_EQ(a[i].repeat, b[i].repeat);
        EXPECT_EQ(a[i].fold, b[i].fold);
        EXPECT_EQ(a[i].config.bandwidth, b[i].config.bandwidth);
        EXPECT_EQ(a[i].config.degree, b[i].config.degree);
        EXPECT_GE(a[i].mae, 0.0);
        EXPECT_TRUE(std::isfinite(a[i].mae));
    }
}

TEST(RunVariant, MatchesManualFold) {
    const auto d = noisy_dataset("n", 25, 2);
    const auto plan = lwr::make_fold_plan(25, 10, 1, 9);
    const VariantConfig cfg{KernelKind::Tricube, 0.5, 1};
    const auto records = lwr::run_variant(d, cfg, plan);
    for (std::size_t f = 0; f < 10; ++f) {
        const auto train = plan.train_indices(0, f);
        lwr::RowMatrix x(static_cast<Eigen::Index>(train.size()), 2);
        Eigen::VectorXd y(static_cast<Eigen::Index>(train.size()));
        for (std::size_t t = 0; t < train.size(); ++t) {
            x.row(static_cast<Eigen::Index>(t)) = d.features.row(static_cast<Eigen::Index>(train[t]));
            y(static_cast<Eigen::Index>(t)) = d.efforts(static_cast<Eigen::Index>(train[t]));
        }
        const lwr::TrainingSet set(x, y);
        double sum = 0;
        for (auto i : plan.test_indices(0, f)) {
            const std::vector<double> q{d.features(static_cast<Eigen::Index>(i), 0), d.features(static_cast<Eigen::Index>(i), 1)};
            sum += std::abs(d.efforts(static_cast<Eigen::Index>(i)) - lwr::predict(set, cfg, q));
        }
        EXPECT_DOUBLE_EQ(records[f].mae, sum / static_cast<double>(plan.test_indices(0, f).size()));
    }
}

TEST(RunVariant, StrictScalingRefitsPerSplit) {
    const auto d = noisy_dataset("n", 30, 4);
    const auto plan = lwr::make_fold_plan(30, 10, 2, 3);
    const auto loose = lwr::run_variant(d, {KernelKind::Triweight, 0.3, 1}, plan, false);
    const auto strict = lwr::run_variant(d, {KernelKind::Triweight, 0.3, 1}, plan, true);
    ASSERT_EQ(loose.size(), strict.size());
    bool any_diff = false;
    for (std::size_t i = 0; i < loose.size(); ++i) {
        EXPECT_TRUE(std::isfinite(strict[i].mae));
        any_diff = any_diff || loose[i].mae != strict[i].mae;
    }
    EXPECT_TRUE(any_diff);
}

TEST(RunVariant, Errors) {
    const auto d = linear_dataset("lin", 20, 1);
    EXPECT_THROW(lwr::run_variant(d, {KernelKind::Gaussian, 0.2, 1}, lwr::make_fold_plan(21, 10, 1, 0)),
                 std::invalid_argument);
    EXPECT_THROW(lwr::run_variant(d, {KernelKind::Gaussian, 0.0, 1}, lwr::make_fold_plan(20, 10, 1, 0)),
                 std::invalid_argument);
}

TEST(RunGrid, CountsAndOrdering) {
    const std::vector<lwr::CleanDataset> data{noisy_dataset("b", 20, 1), noisy_dataset("a", 15, 2)};
    const std::vector<double> bw{0.2, 0.5};
    const std::vector<int> deg{1, 2};
    const std::vector<KernelKind> kernels{KernelKind::Gaussian, KernelKind::Biweight, KernelKind::Rectangular};
    const auto result = lwr::run_grid(data, kernels, bw, deg, {.folds = 10, .repeats = 2, .seed = 5});
    EXPECT_EQ(result.variant_count, 2u * 3 * 2 * 2);
    EXPECT_TRUE(result.failures.empty());
    EXPECT_EQ(result.records.size(), 2u * 3 * 2 * 2 * 2 * 10);
    EXPECT_TRUE(std::is_sorted(result.records.begin(), result.records.end(),
                               [](const auto& x, const auto& y) { return lwr::record_key(x) < lwr::record_key(y); }));
    std::set<std::tuple<std::string, std::string, double, int, std::size_t, std::size_t>> keys;
    for (const auto& r : result.records) {
        keys.emplace(r.dataset, lwr::kernel_name(r.config.kernel), r.config.bandwidth, r.config.degree, r.repeat, r.fold);
    }
    EXPECT_EQ(keys.size(), result.records.size());
    EXPECT_EQ(result.records.front().dataset, "a");
    EXPECT_EQ(lwr::kernel_name(result.records.front().config.kernel), "biweight");
}

TEST(RunGrid, SingleCellHundredRecords) {
    const std::vector<lwr::CleanDataset> data{noisy_dataset("x", 30, 6)};
    const std::vector<KernelKind> k{KernelKind::Triweight};
    const std::vector<double> b{0.3};
    const std::vector<int> d{1};
    const auto result = lwr::run_grid(data, k, b, d);
    EXPECT_EQ(result.variant_count, 1u);
    EXPECT_EQ(result.records.size(), 100u);
}

TEST(RunGrid, DeterministicAcrossRunsAndWorkers) {
    const std::vector<lwr::CleanDataset> data{noisy_dataset("p", 30, 1), noisy_dataset("q", 22, 2)};
    const std::vector<double> bw{0.2, 0.3, 0.4, 0.5};
    const std::vector<int> deg{1, 2, 3};
    const auto one = lwr::export_grid_csv(
        lwr::run_grid(data, lwr::kAllKernels, bw, deg, {.repeats = 2, .seed = 11, .workers = 1}));
    const auto again = lwr::export_grid_csv(
        lwr::run_grid(data, lwr::kAllKernels, bw, deg, {.repeats = 2, .seed = 11, .workers = 1}));
    const auto many = lwr::export_grid_csv(
        lwr::run_grid(data, lwr::kAllKernels, bw, deg, {.repeats = 2, .seed = 11, .workers = 7}));
    EXPECT_EQ(one, again);
    EXPECT_EQ(one, many);
    const auto other = lwr::export_grid_csv(
        lwr::run_grid(data, lwr::kAllKernels, bw, deg, {.repeats = 2, .seed = 12, .workers = 1}));
    EXPECT_NE(one, other);
}

TEST(RunGrid, FailuresAreCollected) {
    // a single-feature dataset whose only feature is constant on some training splits
    lwr::CleanDataset d;
    d.name = "flat";
    d.features = lwr::RowMatrix::Zero(12, 1);
    d.features(0, 0) = 1;
    d.unscaled = d.features;
    d.efforts = Eigen::VectorXd::Constant(12, 5);
    d.feature_names = {"a"};
    const std::vector<lwr::CleanDataset> data{d, noisy_dataset("ok", 20, 3)};
    const std::vector<KernelKind> k{KernelKind::Gaussian};
    const std::vector<double> b{0.5};
    const std::vector<int> deg{1};
    const auto result = lwr::run_grid(data, k, b, deg, {.repeats = 1, .strict_scaling = true});
    ASSERT_EQ(result.failures.size(), 1u);
    EXPECT_EQ(result.failures[0].dataset, "flat");
    EXPECT_NE(result.failures[0].message.find("fold"), std::string::npos);
    EXPECT_EQ(result.records.size(), 10u);
}

TEST(RunGrid, Errors) {
    const std::vector<lwr::CleanDataset> data{noisy_dataset("x", 20, 1), noisy_dataset("x", 20, 2)};
    const std::vector<KernelKind> k{KernelKind::Gaussian};
    const std::vector<double> b{0.5};
    const std::vector<int> deg{1};
    EXPECT_THROW(lwr::run_grid(data, k, b, deg), std::invalid_argument);
    EXPECT_THROW(lwr::run_grid(std::span(data).first(1), std::vector<KernelKind>{}, b, deg), std::invalid_argument);
}

TEST(GridCsv, HeaderAndRoundTrip) {
    lwr::GridResult g;
    g.records = {rec("a", KernelKind::Gaussian, 0.2, 1, 0, 0, 1.25), rec("a", KernelKind::Gaussian, 0.2, 1, 0, 1, 0.1)};
    const auto text = lwr::export_grid_csv(g);
    EXPECT_EQ(text, "dataset,kernel,bandwidth,degree,repeat,fold,mae\na,gaussian,0.2,1,0,0,1.25\na,gaussian,0.2,1,0,1,0.1\n");
    std::istringstream in(text);
    const auto back = lwr::import_grid_csv(in);
    ASSERT_EQ(back.records.size(), 2u);
    EXPECT_EQ(back.records[0].mae, 1.25);
    EXPECT_EQ(back.records[1].config, (VariantConfig{KernelKind::Gaussian, 0.2, 1}));

    std::istringstream bad("dataset,kernel\n");
    EXPECT_THROW(lwr::import_grid_csv(bad), lwr::csv::ParseError);
    std::istringstream bad_kernel("dataset,kernel,bandwidth,degree,repeat,fold,mae\na,box,0.2,1,0,0,1\n");
    EXPECT_THROW(lwr::import_grid_csv(bad_kernel), lwr::csv::ParseError);
}

TEST(GridCsv, FullPrecisionRoundTrip) {
    const std::vector<lwr::CleanDataset> data{noisy_dataset("p", 20, 1)};
    const std::vector<double> bw{0.3};
    const std::vector<int> deg{2};
    const auto result = lwr::run_grid(data, lwr::kAllKernels, bw, deg, {.repeats = 1});
    std::istringstream in(lwr::export_grid_csv(result));
    const auto back = lwr::import_grid_csv(in);
    ASSERT_EQ(back.records.size(), result.records.size());
    for (std::size_t i = 0; i < back.records.size(); ++i) EXPECT_EQ(back.records[i].mae, result.records[i].mae);
}

TEST(Aggregate, Examples) {
    lwr::GridResult g;
    g.records = {rec("a", KernelKind::Gaussian, 0.2, 1, 0, 0, 1), rec("a", KernelKind::Gaussian, 0.2, 1, 0, 1, 2),
                 rec("a", KernelKind::Gaussian, 0.2, 1, 0, 2, 3)};
    const auto rows = lwr::aggregate_mae(g, {.dataset = true, .kernel = true});
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].mean_mae, 2.0);
    EXPECT_EQ(rows[0].count, 3u);
    EXPECT_FALSE(rows[0].bandwidth);
    EXPECT_THROW(lwr::aggregate_mae(g, {}), std::invalid_argument);
    EXPECT_THROW(lwr::aggregate_mae(lwr::GridResult{}, {.dataset = true}), std::invalid_argument);
}

TEST(Aggregate, MeanOfMeansConsistency) {
    const std::vector<lwr::CleanDataset> data{noisy_dataset("p", 20, 1), noisy_dataset("q", 25, 2)};
    const std::vector<double> bw{0.2, 0.3, 0.4, 0.5};
    const std::vector<int> deg{1, 2, 3};
    const std::vector<KernelKind> k{KernelKind::Gaussian, KernelKind::Triweight};
    const auto result = lwr::run_grid(data, k, bw, deg, {.repeats = 2});

    const auto overall = lwr::aggregate_mae(result, {.dataset = true, .kernel = true});
    const auto by_degree = lwr::aggregate_mae(result, {.dataset = true, .kernel = true, .degree = true});
    const auto by_bw = lwr::aggregate_mae(result, {.dataset = true, .kernel = true, .bandwidth = true});
    const auto by_all = lwr::aggregate_mae(result, {.dataset = true, .kernel = true, .bandwidth = true, .degree = true});
    EXPECT_EQ(by_all.size(), 2u * 2 * 4 * 3);
    for (const auto& row : by_all) EXPECT_EQ(row.count, 20u);
    for (const auto& cell : overall) {
        double sd = 0, sb = 0;
        int nd = 0, nb = 0;
        for (const auto& r : by_degree) {
            if (r.dataset == cell.dataset && r.kernel == cell.kernel) sd += r.mean_mae, ++nd;
        }
        for (const auto& r : by_bw) {
            if (r.dataset == cell.dataset && r.kernel == cell.kernel) sb += r.mean_mae, ++nb;
        }
        EXPECT_EQ(nd, 3);
        EXPECT_EQ(nb, 4);
        EXPECT_NEAR(sd / nd, cell.mean_mae, 1e-12 * cell.mean_mae);
        EXPECT_NEAR(sb / nb, cell.mean_mae, 1e-12 * cell.mean_mae);
    }
}

TEST(MeanCi95, Examples) {
    const auto flat = lwr::mean_ci95(std::vector{5.0, 5.0, 5.0, 5.0});
    EXPECT_EQ(flat.mean, 5);
    EXPECT_EQ(flat.lower, 5);
    EXPECT_EQ(flat.upper, 5);

    // [0, 2]: sample sd sqrt(2), so s / sqrt(n) = 1 and the half-width is t(0.975, 1) itself
    const auto two = lwr::mean_ci95(std::vector{0.0, 2.0});
    EXPECT_EQ(two.mean, 1);
    EXPECT_NEAR(two.lower, 1 - 12.7062, 1e-4);
    EXPECT_NEAR(two.upper, 1 + 12.7062, 1e-4);
    EXPECT_THROW(lwr::mean_ci95(std::vector{1.0}), std::invalid_argument);
}

TEST(MeanCi95, TQuantileTable) {
    // two-sided 95% critical values of Student's t from printed tables
    const std::pair<std::size_t, double> table[] = {{1, 12.7062}, {2, 4.3027}, {4, 2.7764},  {9, 2.2622},
                                                    {19, 2.0930}, {30, 2.0423}, {99, 1.9842}};
    for (auto [dof, t] : table) EXPECT_NEAR(lwr::t_quantile_975(dof), t, 1e-4) << dof;
}

TEST(MeanCi95, DuplicatedSampleIsNarrower) {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> z(10, 3);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> v(2 + rng() % 10);
        for (auto& x : v) x = z(rng);
        std::vector<double> four;
        for (int c = 0; c < 4; ++c) four.insert(four.end(), v.begin(), v.end());
        const auto a = lwr::mean_ci95(v);
        const auto b = lwr::mean_ci95(four);
        EXPECT_NEAR(a.mean, b.mean, 1e-12 * std::abs(a.mean));
        EXPECT_LT(b.upper - b.lower, a.upper - a.lower);
        EXPECT_LE(a.lower, b.lower);
        EXPECT_GE(a.upper, b.upper);
    }
}
