#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lwr/kernels.hpp"

namespace lwr {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr double kRadiusFloor = 1e-12;
inline constexpr double kPivotThreshold = 1e-10;
inline constexpr double kRidgeLambda = 1e-8;

/// One LWR configuration.
struct VariantConfig {
    KernelKind kernel = KernelKind::Triweight;
    double bandwidth = 0.2;
    int degree = 1;

    void validate() const {
        if (!(bandwidth > 0.0 && bandwidth <= 1.0)) {
            throw std::invalid_argument("bandwidth must lie in (0, 1], got " + std::to_string(bandwidth));
        }
        if (degree < 1 || degree > 3) {
            throw std::invalid_argument("degree must be 1, 2 or 3, got " + std::to_string(degree));
        }
    }

    friend bool operator==(const VariantConfig&, const VariantConfig&) = default;
};

/// Immutable training data: n x p features and n efforts.
class TrainingSet {
public:
    TrainingSet(RowMatrix features, Eigen::VectorXd efforts)
        : features_(std::move(features)), efforts_(std::move(efforts)) {
        if (features_.rows() != efforts_.size()) {
            throw std::invalid_argument("training set: feature rows and effort count differ");
        }
        if (features_.rows() < 2) throw std::invalid_argument("training set: need at least 2 rows");
        if (features_.cols() < 1) throw std::invalid_argument("training set: need at least 1 feature");
        if (!features_.allFinite() || !efforts_.allFinite()) {
            throw std::invalid_argument("training set: non-finite entry");
        }
    }

    const RowMatrix& features() const { return features_; }
    const Eigen::VectorXd& efforts() const { return efforts_; }
    Eigen::Index rows() const { return features_.rows(); }
    Eigen::Index cols() const { return features_.cols(); }

private:
    RowMatrix features_;
    Eigen::VectorXd efforts_;
};

struct Neighborhood {
    std::vector<Eigen::Index> indices;  // ascending by (distance, row index)
    std::vector<double> distances;
    double radius = 0.0;
};

struct LocalFit {
    Eigen::VectorXd coefficients;
    bool ridge_used = false;
};

/// Number of neighbors used for a fit: max(min_size, ceil(n * bandwidth)) capped at n.
inline Eigen::Index neighborhood_size(Eigen::Index n, double bandwidth, Eigen::Index min_size = 2) {
    // n * b is often a hair above an integer (10 * 0.3 == 3.0000000000000004)
    const auto k = static_cast<Eigen::Index>(std::ceil(static_cast<double>(n) * bandwidth - 1e-9));
    return std::min(n, std::max({k, min_size, Eigen::Index{1}}));
}

/// The k nearest training rows to `query` by Euclidean distance, ties broken
/// by ascending row index.
inline Neighborhood find_neighborhood(const TrainingSet& train, std::span<const double> query,
                                      double bandwidth, Eigen::Index min_size = 2) {
    if (static_cast<Eigen::Index>(query.size()) != train.cols()) {
        throw std::invalid_argument("query has " + std::to_string(query.size()) +
                                    " features, training set has " + std::to_string(train.cols()));
    }
    if (!(bandwidth > 0.0 && bandwidth <= 1.0)) {
        throw std::invalid_argument("bandwidth must lie in (0, 1]");
    }
    const Eigen::Index n = train.rows();
    const Eigen::Index k = neighborhood_size(n, bandwidth, min_size);
    const Eigen::Map<const Eigen::RowVectorXd> q(query.data(), train.cols());

    std::vector<double> dist(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        dist[static_cast<std::size_t>(i)] = (train.features().row(i) - q).norm();
    }
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](Eigen::Index a, Eigen::Index b) {
        const double da = dist[static_cast<std::size_t>(a)];
        const double db = dist[static_cast<std::size_t>(b)];
        return da < db || (da == db && a < b);
    });

    Neighborhood hood;
    hood.indices.assign(order.begin(), order.begin() + k);
    hood.distances.reserve(static_cast<std::size_t>(k));
    for (auto i : hood.indices) hood.distances.push_back(dist[static_cast<std::size_t>(i)]);
    hood.radius = hood.distances.back() > 0.0 ? hood.distances.back() : kRadiusFloor;
    return hood;
}

/// Intercept column followed by x_j^1..x_j^d for each feature j. No cross terms.
template <typename Derived>
Eigen::MatrixXd polynomial_design(const Eigen::MatrixBase<Derived>& rows, int degree) {
    if (degree < 1 || degree > 3) {
        throw std::invalid_argument("polynomial degree must be 1, 2 or 3, got " + std::to_string(degree));
    }
    const Eigen::Index m = rows.rows();
    const Eigen::Index p = rows.cols();
    Eigen::MatrixXd design(m, 1 + p * degree);
    design.col(0).setOnes();
    for (Eigen::Index j = 0; j < p; ++j) {
        const Eigen::Index base = 1 + j * degree;
        design.col(base) = rows.col(j);
        for (int t = 1; t < degree; ++t) {
            design.col(base + t) = design.col(base + t - 1).cwiseProduct(rows.col(j));
        }
    }
    return design;
}

/// Minimizes sum_i w_i (y_i - x_i . beta)^2 through the weighted normal equations.
///
/// Weights are rescaled so the largest is 1 before solving; the solution is
/// invariant to that. When the LDLT factorization fails or a pivot drops
/// below kPivotThreshold relative to the largest diagonal entry, the system is
/// re-solved with kRidgeLambda added to the diagonal.
inline LocalFit weighted_least_squares(const Eigen::MatrixXd& design, const Eigen::VectorXd& targets,
                                       std::span<const double> weights) {
    const Eigen::Index m = design.rows();
    if (m < 1) throw std::invalid_argument("weighted_least_squares: empty design");
    if (targets.size() != m || static_cast<Eigen::Index>(weights.size()) != m) {
        throw std::invalid_argument("weighted_least_squares: size mismatch");
    }
    if (!design.allFinite() || !targets.allFinite()) {
        throw std::invalid_argument("weighted_least_squares: non-finite input");
    }
    double w_max = 0.0;
    for (double w : weights) {
        if (!std::isfinite(w) || w < 0.0) {
            throw std::invalid_argument("weighted_least_squares: weights must be finite and >= 0");
        }
        w_max = std::max(w_max, w);
    }
    if (w_max == 0.0) throw std::invalid_argument("weighted_least_squares: all weights are zero");

    const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(weights.data(), m) / w_max;
    const Eigen::MatrixXd weighted = design.array().colwise() * w.array();
    Eigen::MatrixXd normal = design.transpose() * weighted;
    const Eigen::VectorXd rhs = weighted.transpose() * targets;

    LocalFit fit;
    const double scale = std::max(normal.diagonal().maxCoeff(), 1.0);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
    if (ldlt.info() == Eigen::Success && ldlt.vectorD().minCoeff() > kPivotThreshold * scale) {
        fit.coefficients = ldlt.solve(rhs);
        if (fit.coefficients.allFinite()) return fit;
    }
    normal.diagonal().array() += kRidgeLambda;
    ldlt.compute(normal);
    fit.coefficients = ldlt.solve(rhs);
    fit.ridge_used = true;
    if (!fit.coefficients.allFinite()) {
        throw std::runtime_error("weighted_least_squares: ridge solve produced non-finite coefficients");
    }
    return fit;
}

/// Evaluates the fitted local polynomial at `query`.
inline double evaluate_fit(const LocalFit& fit, std::span<const double> query, int degree) {
    const Eigen::Map<const Eigen::RowVectorXd> q(query.data(), static_cast<Eigen::Index>(query.size()));
    return (polynomial_design(q, degree) * fit.coefficients)(0);
}

/// Predicts the effort at `query` with a local polynomial fitted to the
/// kernel-weighted neighborhood.
///
/// The local design is built on (x - query) / radius. Per-feature polynomial
/// spaces are closed under shifting and scaling, so the fitted value is the
/// same as in the raw basis, but cubic fits on tight neighborhoods stay well
/// conditioned. The query maps to the origin.
inline double predict(const TrainingSet& train, const VariantConfig& config, std::span<const double> query) {
    config.validate();
    const Neighborhood hood = find_neighborhood(train, query, config.bandwidth, config.degree + 1);
    const auto weights = neighborhood_weights(config.kernel, hood.distances, hood.radius);

    const auto k = static_cast<Eigen::Index>(hood.indices.size());
    const Eigen::Map<const Eigen::RowVectorXd> origin(query.data(), train.cols());
    Eigen::MatrixXd rows(k, train.cols());
    Eigen::VectorXd targets(k);
    for (Eigen::Index r = 0; r < k; ++r) {
        const auto i = hood.indices[static_cast<std::size_t>(r)];
        rows.row(r) = (train.features().row(i) - origin) / hood.radius;
        targets(r) = train.efforts()(i);
    }
    const LocalFit fit = weighted_least_squares(polynomial_design(rows, config.degree), targets, weights);
    const std::vector<double> centered(static_cast<std::size_t>(train.cols()), 0.0);
    return evaluate_fit(fit, centered, config.degree);
}

}  // namespace lwr
