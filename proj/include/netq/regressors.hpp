#pragma once

#include "netq/data_model.hpp"
#include "netq/exec.hpp"
#include "netq/preprocess.hpp"
#include "netq/spatial_index.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace netq {

/// Standard normal density kernel, K(u) = exp(-u^2/2) / sqrt(2*pi).
double gaussian_kernel(double u);

enum class KernelKind { Fixed, SelfTuning };

inline const char* kernel_kind_name(KernelKind k) {
    return k == KernelKind::Fixed ? "fbkr" : "stbkr";
}

/// Bandwidth parameters. One k serves both neighbor truncation and the
/// k-th-neighbor distance that drives the self-tuning bandwidth.
struct KernelConfig {
    KernelKind kind = KernelKind::Fixed;
    double c = 0.05;    // bandwidth magnitude, > 0
    std::size_t k = 5;  // neighbor count, >= 1
};

void validate(const KernelConfig& cfg);

struct RegionParams {
    KernelConfig dense;
    KernelConfig sparse;
};

/// Bandwidth at a query point: h = c for Fixed, h = c * R_k(x)^2 for
/// SelfTuning, with R_k measured against the training index (a self-match at
/// distance 0 counts as a neighbor). h = 0 signals a degenerate bandwidth
/// that predict() resolves via its zero-distance fallback.
double bandwidth(const KernelConfig& cfg, const PointIndex& train_index, double lon, double lat);

enum class PredictFallback : int {
    None = 0,
    DegenerateBandwidth = 1, // h == 0: averaged the zero-distance neighbors
    WeightUnderflow = 2,     // every stabilized weight overflowed: plain kNN mean
};

struct Prediction {
    double value = 0.0;
    RegionClass region = RegionClass::Sparse;
    PredictFallback fallback = PredictFallback::None;
};

/// Nadaraya-Watson estimate truncated to the k nearest training points:
///   y(x) = sum_i K(d_i/h) y_i / sum_i K(d_i/h)
/// The 1/h and 1/sqrt(2*pi) prefactors cancel in the ratio and are omitted;
/// exponents are shifted by their minimum before exponentiation so the
/// nearest neighbor always carries weight 1. The estimate is clamped to the
/// [min, max] of the neighbor targets.
class FittedKernelModel {
public:
    FittedKernelModel(PointIndex train_index, std::vector<double> train_targets,
                      RegionParams params, const GridSegmentation* segmentation);

    const PointIndex& index() const { return index_; }
    const RegionParams& params() const { return params_; }
    std::span<const double> targets() const { return targets_; }

    /// Region-resolved prediction (the config comes from the query's cell).
    Prediction predict(double lon, double lat) const;

    /// Prediction under an explicit config, independent of region; used by
    /// cross-validation candidates.
    Prediction predict_with(const KernelConfig& cfg, double lon, double lat) const;

    std::vector<Prediction> predict_batch(std::span<const std::array<double, 2>> lonlat,
                                          ExecMode mode = ExecMode::Parallel) const;

private:
    PointIndex index_;
    std::vector<double> targets_;
    RegionParams params_;
    const GridSegmentation* seg_;
};

/// Per-(region, candidate) mean validation MSE, for diagnostics.
struct CvEntry {
    RegionClass region = RegionClass::Dense;
    double c = 0.0;
    std::size_t k = 0;
    double mean_mse = 0.0;
    std::size_t folds_used = 0;
};

struct CvResult {
    RegionParams selected;
    std::vector<CvEntry> table;
};

/// k-fold cross-validation of (c, k) over the training ids, selecting the
/// dense and sparse configurations independently by mean validation MSE.
/// Candidates are scanned in ascending (k, c) order so ties resolve to the
/// smaller k, then the smaller c. Folds with no validation points of a region
/// are skipped for that region; a region absent from every fold is an error.
CvResult cross_validate(const Dataset& smoothed, const std::vector<std::int64_t>& train_ids,
                        KernelKind kind, const std::vector<double>& candidate_cs,
                        const std::vector<std::size_t>& candidate_ks, std::size_t folds,
                        std::uint64_t seed, const GridSegmentation& seg,
                        Metric metric = Metric::PlanarDegrees,
                        ExecMode mode = ExecMode::Parallel);

} // namespace netq
