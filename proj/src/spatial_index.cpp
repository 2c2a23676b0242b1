#include "netq/spatial_index.hpp"

#include "netq/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace netq {

namespace {

constexpr std::size_t kLeafSize = 8;

struct Cand {
    double d2;
    std::uint32_t id;
};

// Worst candidate = largest (d2, id); keeps the heap top evictable and makes
// equal-distance results prefer the smaller id.
inline bool cand_less(const Cand& a, const Cand& b) {
    return a.d2 < b.d2 || (a.d2 == b.d2 && a.id < b.id);
}

class KnnSearch {
public:
    KnnSearch(const std::vector<double>& xs, const std::vector<double>& ys,
              const std::vector<std::uint32_t>& order, double qx, double qy, std::size_t k)
        : xs_(xs), ys_(ys), order_(order), qx_(qx), qy_(qy), k_(k) {
        heap_.reserve(k);
    }

    void run() { search(0, order_.size(), 0); }

    std::vector<Neighbor> results() {
        std::sort(heap_.begin(), heap_.end(), cand_less);
        std::vector<Neighbor> out;
        out.reserve(heap_.size());
        for (const Cand& c : heap_)
            out.push_back(Neighbor{static_cast<std::int64_t>(c.id), std::sqrt(c.d2)});
        return out;
    }

private:
    void offer(std::uint32_t id) {
        const double dx = qx_ - xs_[id];
        const double dy = qy_ - ys_[id];
        const Cand c{dx * dx + dy * dy, id};
        if (heap_.size() < k_) {
            heap_.push_back(c);
            std::push_heap(heap_.begin(), heap_.end(), cand_less);
        } else if (cand_less(c, heap_.front())) {
            std::pop_heap(heap_.begin(), heap_.end(), cand_less);
            heap_.back() = c;
            std::push_heap(heap_.begin(), heap_.end(), cand_less);
        }
    }

    void search(std::size_t lo, std::size_t hi, unsigned depth) {
        if (hi - lo <= kLeafSize) {
            for (std::size_t i = lo; i < hi; ++i)
                offer(order_[i]);
            return;
        }
        const std::size_t mid = lo + (hi - lo) / 2;
        const std::uint32_t pid = order_[mid];
        const bool axis_y = (depth & 1u) != 0;
        const double qc = axis_y ? qy_ : qx_;
        const double pc = axis_y ? ys_[pid] : xs_[pid];

        offer(pid);
        const bool left_first = qc < pc;
        const double delta = qc - pc;
        const double delta2 = delta * delta;
        if (left_first) {
            search(lo, mid, depth + 1);
            // the far half-plane can still hold an equal-distance smaller id,
            // so <= rather than <
            if (heap_.size() < k_ || delta2 <= heap_.front().d2)
                search(mid + 1, hi, depth + 1);
        } else {
            search(mid + 1, hi, depth + 1);
            if (heap_.size() < k_ || delta2 <= heap_.front().d2)
                search(lo, mid, depth + 1);
        }
    }

    const std::vector<double>& xs_;
    const std::vector<double>& ys_;
    const std::vector<std::uint32_t>& order_;
    double qx_, qy_;
    std::size_t k_;
    std::vector<Cand> heap_;
};

} // namespace

PointIndex PointIndex::build(const Dataset& ds, Metric metric) {
    std::vector<std::array<double, 2>> pts;
    pts.reserve(ds.points.size());
    for (const SamplePoint& p : ds.points)
        pts.push_back({p.lon, p.lat});
    return build(pts, metric);
}

PointIndex PointIndex::build(std::span<const std::array<double, 2>> lonlat, Metric metric) {
    if (lonlat.empty())
        throw DataError("cannot build a spatial index over an empty point set");

    PointIndex idx;
    idx.metric_ = metric;
    if (metric == Metric::Equirectangular) {
        double lat_sum = 0.0;
        for (const auto& p : lonlat)
            lat_sum += p[1];
        const double mean_lat = lat_sum / static_cast<double>(lonlat.size());
        idx.lon_scale_ = std::cos(mean_lat * std::numbers::pi / 180.0);
    }

    const std::size_t n = lonlat.size();
    idx.xs_.resize(n);
    idx.ys_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        idx.xs_[i] = lonlat[i][0] * idx.lon_scale_;
        idx.ys_[i] = lonlat[i][1];
    }

    std::vector<std::uint32_t> sorted(n);
    std::iota(sorted.begin(), sorted.end(), 0u);
    std::sort(sorted.begin(), sorted.end(), [&](std::uint32_t a, std::uint32_t b) {
        return idx.xs_[a] != idx.xs_[b] ? idx.xs_[a] < idx.xs_[b] : idx.ys_[a] < idx.ys_[b];
    });
    for (std::size_t i = 1; i < n; ++i) {
        const std::uint32_t a = sorted[i - 1], b = sorted[i];
        if (idx.xs_[a] == idx.xs_[b] && idx.ys_[a] == idx.ys_[b])
            throw DataError("duplicate coordinates at ids " + std::to_string(a) + " and " +
                            std::to_string(b) + "; ingest de-duplication was bypassed");
    }

    idx.order_.resize(n);
    std::iota(idx.order_.begin(), idx.order_.end(), 0u);
    idx.build_tree(0, n);
    return idx;
}

void PointIndex::build_tree(std::size_t lo, std::size_t hi) {
    struct Frame {
        std::size_t lo, hi;
        unsigned depth;
    };
    std::vector<Frame> stack{{lo, hi, 0}};
    while (!stack.empty()) {
        const Frame f = stack.back();
        stack.pop_back();
        if (f.hi - f.lo <= kLeafSize)
            continue;
        const std::size_t mid = f.lo + (f.hi - f.lo) / 2;
        const bool axis_y = (f.depth & 1u) != 0;
        const std::vector<double>& c = axis_y ? ys_ : xs_;
        const std::vector<double>& tie = axis_y ? xs_ : ys_;
        // (coord, tie coord, id) is a total order, so the partition is
        // deterministic regardless of nth_element internals
        std::nth_element(order_.begin() + f.lo, order_.begin() + mid, order_.begin() + f.hi,
                         [&](std::uint32_t a, std::uint32_t b) {
                             if (c[a] != c[b])
                                 return c[a] < c[b];
                             if (tie[a] != tie[b])
                                 return tie[a] < tie[b];
                             return a < b;
                         });
        stack.push_back({f.lo, mid, f.depth + 1});
        stack.push_back({mid + 1, f.hi, f.depth + 1});
    }
}

std::vector<Neighbor> PointIndex::knn(double lon, double lat, std::size_t k) const {
    if (k < 1)
        throw DataError("knn requires k >= 1");
    if (k > size())
        throw DataError("knn requires k <= indexed point count (" + std::to_string(size()) +
                        "), got k = " + std::to_string(k));
    KnnSearch s(xs_, ys_, order_, lon * lon_scale_, lat, k);
    s.run();
    return s.results();
}

double PointIndex::kth_distance(double lon, double lat, std::size_t k) const {
    return knn(lon, lat, k).back().dist;
}

} // namespace netq
