#pragma once

#include "netq/data_model.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace netq {

struct Neighbor {
    std::int64_t id = 0;
    double dist = 0.0;
};

enum class Metric {
    PlanarDegrees,   // Euclidean distance over raw (lon, lat) degrees
    Equirectangular, // lon axis scaled by cos(mean lat) before measuring
};

/// Immutable kd-tree over sample locations. Queries are exact: results match
/// a brute-force linear scan under the same metric, distances sorted
/// ascending with ties broken by ascending id. Read-only after build, so
/// concurrent queries need no synchronization.
class PointIndex {
public:
    static PointIndex build(const Dataset& ds, Metric metric = Metric::PlanarDegrees);
    static PointIndex build(std::span<const std::array<double, 2>> lonlat,
                            Metric metric = Metric::PlanarDegrees);

    std::size_t size() const { return xs_.size(); }
    Metric metric() const { return metric_; }

    /// The k nearest indexed points to (lon, lat), 1 <= k <= size().
    /// A coincident indexed point appears with dist 0.
    std::vector<Neighbor> knn(double lon, double lat, std::size_t k) const;

    /// Distance to the k-th nearest neighbor, equal to knn(...)[k-1].dist.
    double kth_distance(double lon, double lat, std::size_t k) const;

private:
    PointIndex() = default;
    void build_tree(std::size_t lo, std::size_t hi);

    Metric metric_ = Metric::PlanarDegrees;
    double lon_scale_ = 1.0;
    std::vector<double> xs_, ys_;   // metric coordinates, indexed by id
    std::vector<std::uint32_t> order_; // kd-tree as a permutation; node = midpoint of range
};

} // namespace netq
