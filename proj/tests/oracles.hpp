#pragma once

// Brute-force reference implementations used only by tests. They depend on
// nothing from the library so they stay an independent check of it.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

namespace oracle {

struct Hit {
    std::int64_t id;
    double d2;
};

inline double dist2(const std::array<double, 2>& a, const std::array<double, 2>& b) {
    const double dx = a[0] - b[0];
    const double dy = a[1] - b[1];
    return dx * dx + dy * dy;
}

/// Linear scan: the k smallest (squared distance, id) pairs, ascending.
inline std::vector<Hit> brute_knn(std::span<const std::array<double, 2>> pts,
                                  const std::array<double, 2>& q, std::size_t k) {
    std::vector<Hit> all(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i)
        all[i] = Hit{static_cast<std::int64_t>(i), dist2({q[0], q[1]}, pts[i])};
    std::sort(all.begin(), all.end(), [](const Hit& a, const Hit& b) {
        return a.d2 != b.d2 ? a.d2 < b.d2 : a.id < b.id;
    });
    all.resize(k);
    return all;
}

inline double brute_rk(std::span<const std::array<double, 2>> pts,
                       const std::array<double, 2>& q, std::size_t k) {
    return std::sqrt(brute_knn(pts, q, k)[k - 1].d2);
}

inline double gauss(double u) {
    return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
}

/// Full-sum Nadaraya-Watson with the literal normalized kernel
/// K_h(u) = (1/h) K(u/h), summed over every training point.
inline double full_sum_kr(std::span<const std::array<double, 2>> pts,
                          std::span<const double> ys, const std::array<double, 2>& q, double h) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double d = std::sqrt(dist2(q, pts[i]));
        const double w = gauss(d / h) / h;
        num += w * ys[i];
        den += w;
    }
    return num / den;
}

inline double full_sum_kr_fixed(std::span<const std::array<double, 2>> pts,
                                std::span<const double> ys, const std::array<double, 2>& q,
                                double c) {
    return full_sum_kr(pts, ys, q, c);
}

inline double full_sum_kr_selftuning(std::span<const std::array<double, 2>> pts,
                                     std::span<const double> ys, const std::array<double, 2>& q,
                                     double c, std::size_t k) {
    const double rk = brute_rk(pts, q, k);
    return full_sum_kr(pts, ys, q, c * rk * rk);
}

} // namespace oracle
