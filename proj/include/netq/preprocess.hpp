#pragma once

#include "netq/data_model.hpp"
#include "netq/exec.hpp"
#include "netq/spatial_index.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace netq {

enum class RegionClass { Dense, Sparse };

inline const char* region_name(RegionClass r) {
    return r == RegionClass::Dense ? "dense" : "sparse";
}

/// Uniform rows x cols grid over the tight bounding box of a point set, with
/// per-cell counts and a dense flag for cells counting above the mean.
/// Right/top edges belong to the last column/row; points outside the box are
/// clamped to the nearest cell.
struct GridSegmentation {
    double lon_min = 0.0, lat_min = 0.0, lon_max = 0.0, lat_max = 0.0;
    std::size_t rows = 0, cols = 0;
    std::vector<std::int64_t> counts; // row-major
    std::vector<std::uint8_t> dense;  // row-major, 1 = dense

    std::pair<std::size_t, std::size_t> cell_of(double lon, double lat) const;
    bool cell_dense(std::size_t row, std::size_t col) const {
        return dense[row * cols + col] != 0;
    }
    RegionClass classify(double lon, double lat) const {
        const auto [r, c] = cell_of(lon, lat);
        return cell_dense(r, c) ? RegionClass::Dense : RegionClass::Sparse;
    }
};

GridSegmentation segment_grid(const Dataset& ds, std::size_t rows = 15, std::size_t cols = 15);

void write_segmentation_csv(const GridSegmentation& seg, std::ostream& out);
GridSegmentation read_segmentation_csv(std::istream& in);

/// Replaces each point's score, download and upload speed by the unweighted
/// mean over its k nearest neighbors (the point itself is its own first
/// neighbor). All means are taken over the original values; neighbor values
/// are accumulated in ascending id order so the result does not depend on
/// distance-tie ordering.
Dataset knn_average(const Dataset& ds, const PointIndex& index, std::size_t k,
                    ExecMode mode = ExecMode::Parallel);

/// Seeded random train/test partition; |train| = round(ratio * n).
struct Split {
    std::vector<std::int64_t> train_ids; // ascending
    std::vector<std::int64_t> test_ids;  // ascending
    std::uint64_t seed = 0;
    double ratio = 0.8;
};

Split split_dataset(std::size_t n, double ratio, std::uint64_t seed);

void write_split_csv(const Split& split, std::ostream& out);
Split read_split_csv(std::istream& in);

/// Per-cell uniform subsample: from every non-empty cell, ceil(fraction *
/// cell_count) ids chosen without replacement. Returns ascending ids.
std::vector<std::int64_t> stratified_downsample(const std::vector<std::int64_t>& train_ids,
                                                const GridSegmentation& seg, const Dataset& ds,
                                                double fraction, std::uint64_t seed);

} // namespace netq
