#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lwr {

/// The ten kernel smoothers. Declaration order is the canonical listing order.
enum class KernelKind {
    Rectangular,
    Epanechnikov,
    Tricube,
    Gaussian,
    Triangle,
    Triweight,
    Biweight,
    Cosine,
    Logistic,
    Sigmoid,
};

inline constexpr std::array<KernelKind, 10> kAllKernels{
    KernelKind::Rectangular, KernelKind::Epanechnikov, KernelKind::Tricube,
    KernelKind::Gaussian,    KernelKind::Triangle,     KernelKind::Triweight,
    KernelKind::Biweight,    KernelKind::Cosine,       KernelKind::Logistic,
    KernelKind::Sigmoid,
};

struct KernelInfo {
    KernelKind kind;
    std::string_view name;     // lowercase identifier used by the CLI and configs
    std::string_view formula;  // human-readable K(h)
    bool uniform;
    bool compact;              // zero outside h in [0, 1]
};

inline constexpr std::array<KernelInfo, 10> kKernelTable{{
    {KernelKind::Rectangular, "rectangular", "K(h) = 0.5", true, true},
    {KernelKind::Epanechnikov, "epanechnikov", "K(h) = 3/4 (1 - h^2)", false, true},
    {KernelKind::Tricube, "tricube", "K(h) = 70/81 (1 - h^3)^3", false, true},
    {KernelKind::Gaussian, "gaussian", "K(h) = 1/sqrt(2 pi) exp(-h^2 / 2)", false, false},
    {KernelKind::Triangle, "triangle", "K(h) = 1 - h", false, true},
    {KernelKind::Triweight, "triweight", "K(h) = 35/32 (1 - h^2)^3", false, true},
    {KernelKind::Biweight, "biweight", "K(h) = 15/16 (1 - h^2)^2", false, true},
    {KernelKind::Cosine, "cosine", "K(h) = pi/4 cos(pi/2 h)", false, true},
    {KernelKind::Logistic, "logistic", "K(h) = 1 / (e^h + 2 + e^-h)", false, false},
    {KernelKind::Sigmoid, "sigmoid", "K(h) = 2/pi 1 / (e^h + e^-h)", false, false},
}};

constexpr const KernelInfo& kernel_info(KernelKind kind) {
    return kKernelTable[static_cast<std::size_t>(kind)];
}

constexpr std::string_view kernel_name(KernelKind kind) { return kernel_info(kind).name; }

constexpr bool is_uniform(KernelKind kind) { return kernel_info(kind).uniform; }

constexpr bool has_compact_support(KernelKind kind) { return kernel_info(kind).compact; }

inline std::optional<KernelKind> parse_kernel(std::string_view name) {
    for (const auto& info : kKernelTable) {
        if (info.name == name) return info.kind;
    }
    // "triangular" is how the kernel is spelled in result tables.
    if (name == "triangular") return KernelKind::Triangle;
    return std::nullopt;
}

inline KernelKind kernel_from_name(std::string_view name) {
    if (auto k = parse_kernel(name)) return *k;
    throw std::invalid_argument("unknown kernel '" + std::string(name) + "'");
}

/// Evaluates K(h) for a normalized distance h >= 0.
///
/// The polynomial kernels go negative past h = 1, so the seven compactly
/// supported kernels are truncated to zero there. Gaussian, Logistic and
/// Sigmoid are evaluated on the whole half line.
inline double evaluate_kernel(KernelKind kind, double h) {
    if (!std::isfinite(h) || h < 0.0) {
        throw std::invalid_argument("kernel argument must be finite and >= 0, got " +
                                    std::to_string(h));
    }
    if (has_compact_support(kind) && h > 1.0) return 0.0;

    using std::numbers::pi;
    const double h2 = h * h;
    switch (kind) {
        case KernelKind::Rectangular:
            return 0.5;
        case KernelKind::Epanechnikov:
            return 0.75 * (1.0 - h2);
        case KernelKind::Tricube: {
            const double t = 1.0 - h2 * h;
            return 70.0 / 81.0 * t * t * t;
        }
        case KernelKind::Gaussian:
            return std::exp(-0.5 * h2) / std::sqrt(2.0 * pi);
        case KernelKind::Triangle:
            return 1.0 - h;
        case KernelKind::Triweight: {
            const double t = 1.0 - h2;
            return 35.0 / 32.0 * t * t * t;
        }
        case KernelKind::Biweight: {
            const double t = 1.0 - h2;
            return 15.0 / 16.0 * t * t;
        }
        case KernelKind::Cosine:
            // cos(pi/2) is ~6e-17, not zero
            return h >= 1.0 ? 0.0 : pi / 4.0 * std::cos(pi / 2.0 * h);
        case KernelKind::Logistic: {
            // 1 / (e^h + 2 + e^-h) == e^-h / (1 + e^-h)^2, stable for large h
            const double e = std::exp(-h);
            return e / ((1.0 + e) * (1.0 + e));
        }
        case KernelKind::Sigmoid: {
            const double e = std::exp(-h);
            return 2.0 / pi * e / (1.0 + e * e);
        }
    }
    return 0.0;
}

/// Converts neighbor distances into kernel weights, h_i = distance_i / radius.
///
/// Weights are not normalized. If every weight underflows to zero the result
/// falls back to uniform 1/k weights so a local fit always exists.
inline std::vector<double> neighborhood_weights(KernelKind kind, std::span<const double> distances,
                                                double radius) {
    if (distances.empty()) throw std::invalid_argument("neighborhood_weights: empty distance list");
    if (!(radius > 0.0) || !std::isfinite(radius)) {
        throw std::invalid_argument("neighborhood_weights: radius must be positive and finite");
    }
    std::vector<double> weights;
    weights.reserve(distances.size());
    bool any_positive = false;
    for (double d : distances) {
        if (!std::isfinite(d) || d < 0.0) {
            throw std::invalid_argument("neighborhood_weights: distances must be finite and >= 0");
        }
        if (d > radius) {
            throw std::invalid_argument("neighborhood_weights: radius is smaller than a distance");
        }
        const double w = evaluate_kernel(kind, d / radius);
        any_positive = any_positive || w > 0.0;
        weights.push_back(w);
    }
    if (!any_positive) {
        weights.assign(distances.size(), 1.0 / static_cast<double>(distances.size()));
    }
    return weights;
}

}  // namespace lwr
