#include "netq/heatmap.hpp"

#include "netq/errors.hpp"
#include "netq/text_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>

namespace netq {

Raster evaluate_raster(const std::function<double(double, double)>& predict,
                       const RasterBounds& bounds, std::size_t rows, std::size_t cols,
                       ExecMode mode) {
    if (rows < 1 || cols < 1)
        throw DataError("raster needs at least one row and one column");
    if (!(bounds.lon_max > bounds.lon_min) || !(bounds.lat_max > bounds.lat_min))
        throw DataError("degenerate raster bounds");

    Raster r;
    r.rows = rows;
    r.cols = cols;
    r.bounds = bounds;
    r.values.resize(rows * cols);

    const double dlon = (bounds.lon_max - bounds.lon_min) / static_cast<double>(cols);
    const double dlat = (bounds.lat_max - bounds.lat_min) / static_cast<double>(rows);
    const auto cell_value = [&](std::size_t i) {
        const std::size_t row = i / cols, col = i % cols;
        const double lon = bounds.lon_min + (static_cast<double>(col) + 0.5) * dlon;
        const double lat = bounds.lat_max - (static_cast<double>(row) + 0.5) * dlat;
        r.values[i] = predict(lon, lat);
    };

    if (mode == ExecMode::Parallel) {
#pragma omp parallel for schedule(dynamic, 32)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(r.values.size()); ++i)
            cell_value(static_cast<std::size_t>(i));
    } else {
        for (std::size_t i = 0; i < r.values.size(); ++i)
            cell_value(i);
    }

    r.vmin = *std::min_element(r.values.begin(), r.values.end());
    r.vmax = *std::max_element(r.values.begin(), r.values.end());
    return r;
}

void write_raster_csv(const Raster& raster, std::ostream& out) {
    for (std::size_t row = 0; row < raster.rows; ++row) {
        for (std::size_t col = 0; col < raster.cols; ++col) {
            if (col)
                out << ',';
            out << format_double(raster.values[row * raster.cols + col]);
        }
        out << '\n';
    }
}

namespace {

inline double normalized(const Raster& r, std::size_t i) {
    const double span = r.vmax - r.vmin;
    return span > 0.0 ? (r.values[i] - r.vmin) / span : 0.0;
}

} // namespace

void write_raster_pgm(const Raster& raster, std::ostream& out) {
    out << "P5\n" << raster.cols << ' ' << raster.rows << "\n255\n";
    for (std::size_t i = 0; i < raster.values.size(); ++i) {
        const auto byte = static_cast<unsigned char>(std::lround(normalized(raster, i) * 255.0));
        out.put(static_cast<char>(byte));
    }
}

void write_raster_svg(const Raster& raster, std::ostream& out) {
    // cold-to-warm ramp
    constexpr int lo[3] = {13, 25, 66};
    constexpr int hi[3] = {255, 214, 64};
    constexpr int cell_px = 8;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << raster.cols * cell_px
        << "\" height=\"" << raster.rows * cell_px << "\">\n";
    for (std::size_t row = 0; row < raster.rows; ++row) {
        for (std::size_t col = 0; col < raster.cols; ++col) {
            const double t = normalized(raster, row * raster.cols + col);
            int rgb[3];
            for (int ch = 0; ch < 3; ++ch)
                rgb[ch] = static_cast<int>(std::lround(lo[ch] + t * (hi[ch] - lo[ch])));
            out << "<rect x=\"" << col * cell_px << "\" y=\"" << row * cell_px << "\" width=\""
                << cell_px << "\" height=\"" << cell_px << "\" fill=\"rgb(" << rgb[0] << ','
                << rgb[1] << ',' << rgb[2] << ")\"/>\n";
        }
    }
    out << "</svg>\n";
}

void write_raster_range(const Raster& raster, std::ostream& out) {
    out << format_double(raster.vmin) << ',' << format_double(raster.vmax) << '\n';
}

} // namespace netq
