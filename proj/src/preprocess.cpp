#include "netq/preprocess.hpp"

#include "netq/errors.hpp"
#include "netq/rng.hpp"
#include "netq/text_io.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

namespace netq {

std::pair<std::size_t, std::size_t> GridSegmentation::cell_of(double lon, double lat) const {
    const auto axis_cell = [](double v, double lo, double hi, std::size_t cells) -> std::size_t {
        const double width = (hi - lo) / static_cast<double>(cells);
        if (!(width > 0.0))
            return 0; // degenerate extent: everything lives in the first cell
        if (v <= lo)
            return 0;
        const std::size_t c = static_cast<std::size_t>((v - lo) / width);
        return std::min(c, cells - 1);
    };
    return {axis_cell(lat, lat_min, lat_max, rows), axis_cell(lon, lon_min, lon_max, cols)};
}

GridSegmentation segment_grid(const Dataset& ds, std::size_t rows, std::size_t cols) {
    if (ds.points.empty())
        throw DataError("cannot segment an empty dataset");
    if (rows < 1 || cols < 1)
        throw DataError("grid must have at least one row and one column");

    GridSegmentation seg;
    seg.rows = rows;
    seg.cols = cols;
    seg.lon_min = seg.lon_max = ds.points.front().lon;
    seg.lat_min = seg.lat_max = ds.points.front().lat;
    for (const SamplePoint& p : ds.points) {
        seg.lon_min = std::min(seg.lon_min, p.lon);
        seg.lon_max = std::max(seg.lon_max, p.lon);
        seg.lat_min = std::min(seg.lat_min, p.lat);
        seg.lat_max = std::max(seg.lat_max, p.lat);
    }

    seg.counts.assign(rows * cols, 0);
    for (const SamplePoint& p : ds.points) {
        const auto [r, c] = seg.cell_of(p.lon, p.lat);
        ++seg.counts[r * cols + c];
    }

    const double mean = static_cast<double>(ds.points.size()) / static_cast<double>(rows * cols);
    seg.dense.assign(rows * cols, 0);
    for (std::size_t i = 0; i < seg.counts.size(); ++i)
        seg.dense[i] = static_cast<double>(seg.counts[i]) > mean ? 1 : 0;
    return seg;
}

void write_segmentation_csv(const GridSegmentation& seg, std::ostream& out) {
    out << "rows,cols,lon_min,lat_min,lon_max,lat_max\n"
        << seg.rows << ',' << seg.cols << ',' << format_double(seg.lon_min) << ','
        << format_double(seg.lat_min) << ',' << format_double(seg.lon_max) << ','
        << format_double(seg.lat_max) << '\n'
        << "row,col,count,dense\n";
    for (std::size_t r = 0; r < seg.rows; ++r)
        for (std::size_t c = 0; c < seg.cols; ++c)
            out << r << ',' << c << ',' << seg.counts[r * seg.cols + c] << ','
                << int(seg.dense[r * seg.cols + c]) << '\n';
}

GridSegmentation read_segmentation_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || trim(line) != "rows,cols,lon_min,lat_min,lon_max,lat_max")
        throw DataError("segmentation sidecar: bad header");
    if (!std::getline(in, line))
        throw DataError("segmentation sidecar: missing geometry row");

    GridSegmentation seg;
    const auto geo = split_csv_line(line);
    std::int64_t rows = 0, cols = 0;
    if (geo.size() != 6 || !parse_int64(geo[0], rows) || !parse_int64(geo[1], cols) ||
        rows < 1 || cols < 1 || !parse_double(geo[2], seg.lon_min) ||
        !parse_double(geo[3], seg.lat_min) || !parse_double(geo[4], seg.lon_max) ||
        !parse_double(geo[5], seg.lat_max))
        throw DataError("segmentation sidecar: bad geometry row");
    seg.rows = static_cast<std::size_t>(rows);
    seg.cols = static_cast<std::size_t>(cols);

    if (!std::getline(in, line) || trim(line) != "row,col,count,dense")
        throw DataError("segmentation sidecar: bad cell header");
    seg.counts.assign(seg.rows * seg.cols, 0);
    seg.dense.assign(seg.rows * seg.cols, 0);
    std::size_t seen = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty())
            continue;
        const auto f = split_csv_line(line);
        std::int64_t r = 0, c = 0, count = 0, dense = 0;
        if (f.size() != 4 || !parse_int64(f[0], r) || !parse_int64(f[1], c) ||
            !parse_int64(f[2], count) || !parse_int64(f[3], dense) || r < 0 ||
            static_cast<std::size_t>(r) >= seg.rows || c < 0 ||
            static_cast<std::size_t>(c) >= seg.cols)
            throw DataError("segmentation sidecar: bad cell row");
        seg.counts[static_cast<std::size_t>(r) * seg.cols + static_cast<std::size_t>(c)] = count;
        seg.dense[static_cast<std::size_t>(r) * seg.cols + static_cast<std::size_t>(c)] =
            dense != 0 ? 1 : 0;
        ++seen;
    }
    if (seen != seg.rows * seg.cols)
        throw DataError("segmentation sidecar: expected " + std::to_string(seg.rows * seg.cols) +
                        " cell rows, got " + std::to_string(seen));
    return seg;
}

Dataset knn_average(const Dataset& ds, const PointIndex& index, std::size_t k, ExecMode mode) {
    const std::size_t n = ds.points.size();
    if (k < 1 || k > n)
        throw DataError("knn_average requires 1 <= k <= n");
    if (index.size() != n)
        throw DataError("knn_average: index size does not match dataset");

    Dataset out = ds;
    const auto smooth_one = [&](std::size_t i) {
        const SamplePoint& p = ds.points[i];
        auto nbrs = index.knn(p.lon, p.lat, k);
        std::vector<std::int64_t> ids(nbrs.size());
        for (std::size_t j = 0; j < nbrs.size(); ++j)
            ids[j] = nbrs[j].id;
        std::sort(ids.begin(), ids.end());
        double score = 0.0, down = 0.0, up = 0.0;
        for (const std::int64_t id : ids) {
            const SamplePoint& q = ds.points[static_cast<std::size_t>(id)];
            score += q.score;
            down += q.download_kbps;
            up += q.upload_kbps;
        }
        const double inv = 1.0 / static_cast<double>(k);
        out.points[i].score = score * inv;
        out.points[i].download_kbps = down * inv;
        out.points[i].upload_kbps = up * inv;
    };

    if (mode == ExecMode::Parallel) {
#pragma omp parallel for schedule(dynamic, 64)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i)
            smooth_one(static_cast<std::size_t>(i));
    } else {
        for (std::size_t i = 0; i < n; ++i)
            smooth_one(i);
    }
    return out;
}

Split split_dataset(std::size_t n, double ratio, std::uint64_t seed) {
    if (n < 2)
        throw DataError("split requires at least 2 points");
    if (!(ratio > 0.0) || !(ratio < 1.0))
        throw DataError("split ratio must lie strictly between 0 and 1");
    const std::size_t n_train =
        static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
    if (n_train == 0 || n_train == n)
        throw DataError("split ratio leaves one side empty");

    std::vector<std::int64_t> ids(n);
    std::iota(ids.begin(), ids.end(), 0);
    Rng rng(seed);
    rng.shuffle(ids);

    Split s;
    s.seed = seed;
    s.ratio = ratio;
    s.train_ids.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.test_ids.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_train), ids.end());
    std::sort(s.train_ids.begin(), s.train_ids.end());
    std::sort(s.test_ids.begin(), s.test_ids.end());
    return s;
}

void write_split_csv(const Split& split, std::ostream& out) {
    out << "id,role\n";
    std::size_t ti = 0, si = 0;
    // interleave so the file is sorted by id
    while (ti < split.train_ids.size() || si < split.test_ids.size()) {
        if (si >= split.test_ids.size() ||
            (ti < split.train_ids.size() && split.train_ids[ti] < split.test_ids[si])) {
            out << split.train_ids[ti++] << ",train\n";
        } else {
            out << split.test_ids[si++] << ",test\n";
        }
    }
}

Split read_split_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || trim(line) != "id,role")
        throw DataError("split sidecar: bad header");
    Split s;
    while (std::getline(in, line)) {
        if (trim(line).empty())
            continue;
        const auto f = split_csv_line(line);
        std::int64_t id = 0;
        if (f.size() != 2 || !parse_int64(f[0], id))
            throw DataError("split sidecar: bad row");
        if (f[1] == "train")
            s.train_ids.push_back(id);
        else if (f[1] == "test")
            s.test_ids.push_back(id);
        else
            throw DataError("split sidecar: unknown role");
    }
    if (s.train_ids.empty() || s.test_ids.empty())
        throw DataError("split sidecar: one side is empty");
    std::sort(s.train_ids.begin(), s.train_ids.end());
    std::sort(s.test_ids.begin(), s.test_ids.end());
    return s;
}

std::vector<std::int64_t> stratified_downsample(const std::vector<std::int64_t>& train_ids,
                                                const GridSegmentation& seg, const Dataset& ds,
                                                double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0) || fraction > 1.0)
        throw DataError("downsample fraction must lie in (0, 1]");

    // bucket ids per cell, in ascending id order
    std::vector<std::vector<std::int64_t>> cells(seg.rows * seg.cols);
    std::vector<std::int64_t> sorted = train_ids;
    std::sort(sorted.begin(), sorted.end());
    for (const std::int64_t id : sorted) {
        const SamplePoint& p = ds.points.at(static_cast<std::size_t>(id));
        const auto [r, c] = seg.cell_of(p.lon, p.lat);
        cells[r * seg.cols + c].push_back(id);
    }

    Rng rng(seed);
    std::vector<std::int64_t> picked;
    for (auto& cell : cells) {
        if (cell.empty())
            continue;
        const std::size_t want = static_cast<std::size_t>(
            std::ceil(fraction * static_cast<double>(cell.size())));
        for (std::size_t j = 0; j < want; ++j) {
            const std::size_t pick = j + static_cast<std::size_t>(rng.below(cell.size() - j));
            std::swap(cell[j], cell[pick]);
            picked.push_back(cell[j]);
        }
    }
    std::sort(picked.begin(), picked.end());
    return picked;
}

} // namespace netq
