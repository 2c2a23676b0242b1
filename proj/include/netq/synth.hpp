#pragma once

#include "netq/data_model.hpp"

#include <cstdint>

namespace netq {

/// Spatially imbalanced benchmark data: a dense Gaussian cluster around the
/// origin plus a sparse ring whose density falls off with radius. Targets are
/// a fixed smooth field plus seeded Gaussian noise, emitted as download and
/// upload speeds so the default score rule reproduces the field.
struct SynthParams {
    std::size_t n_dense = 4500;
    std::size_t n_sparse = 500;
    double cluster_std = 6.0;
    double ring_r0 = 20.0;
    double ring_r1 = 40.0;
    double noise_sd = 60.0;
    std::uint64_t seed = 1;
};

/// The noise-free target field, exposed so tests can measure recovery error.
double synth_field(double x, double y);

Dataset generate_synthetic(const SynthParams& params);

} // namespace netq
