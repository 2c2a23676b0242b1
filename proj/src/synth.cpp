#include "netq/synth.hpp"

#include "netq/errors.hpp"
#include "netq/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace netq {

double synth_field(double x, double y) {
    const double r2 = x * x + y * y;
    const double hill = 500.0 * std::exp(-r2 / (2.0 * 12.0 * 12.0));
    const double bump = 300.0 * std::exp(-((x - 22.0) * (x - 22.0) + (y - 15.0) * (y - 15.0)) /
                                         (2.0 * 5.0 * 5.0));
    const double wave = 180.0 * std::sin(0.3 * x + 0.7) * std::cos(0.27 * y - 0.4);
    return std::max(0.0, 150.0 + hill + bump + wave);
}

Dataset generate_synthetic(const SynthParams& params) {
    if (params.n_dense + params.n_sparse < 2)
        throw DataError("synthetic dataset needs at least 2 points");
    if (!(params.cluster_std > 0.0) || !(params.ring_r0 > 0.0) ||
        !(params.ring_r1 > params.ring_r0))
        throw DataError("synthetic geometry parameters out of range");
    if (params.noise_sd < 0.0)
        throw DataError("noise standard deviation must be >= 0");

    Rng rng(params.seed);
    Dataset ds;
    ds.points.reserve(params.n_dense + params.n_sparse);

    const auto push_point = [&](double x, double y) {
        const double target = std::max(0.0, synth_field(x, y) + rng.normal(0.0, params.noise_sd));
        SamplePoint p;
        p.id = static_cast<std::int64_t>(ds.points.size());
        p.lon = x;
        p.lat = y;
        // split the score-like field into speeds so the default equal-weight
        // rule recovers it: score = (d + u) / 1000
        p.download_kbps = 800.0 * target;
        p.upload_kbps = 200.0 * target;
        p.tests = 1 + static_cast<std::int64_t>(rng.below(5));
        p.devices = 1 + static_cast<std::int64_t>(rng.below(3));
        p.score = target;
        ds.points.push_back(p);
    };

    for (std::size_t i = 0; i < params.n_dense; ++i)
        push_point(rng.normal(0.0, params.cluster_std), rng.normal(0.0, params.cluster_std));
    // radius uniform in [r0, r1]: outer shells are thinner, so sample density
    // keeps falling with distance inside the "sparse" class
    for (std::size_t i = 0; i < params.n_sparse; ++i) {
        const double r = rng.uniform(params.ring_r0, params.ring_r1);
        const double a = rng.uniform(0.0, 2.0 * std::numbers::pi);
        push_point(r * std::cos(a), r * std::sin(a));
    }
    return ds;
}

} // namespace netq
