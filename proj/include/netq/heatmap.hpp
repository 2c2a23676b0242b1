#pragma once

#include "netq/exec.hpp"

#include <array>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace netq {

struct RasterBounds {
    double lon_min = 0.0, lat_min = 0.0, lon_max = 0.0, lat_max = 0.0;
};

/// Row-major raster of predictions over cell centers; row 0 is the
/// northernmost (maximum latitude) row so images come out map-oriented.
struct Raster {
    std::size_t rows = 0, cols = 0;
    RasterBounds bounds;
    std::vector<double> values; // row-major
    double vmin = 0.0, vmax = 0.0;
};

/// Evaluates `predict(lon, lat)` at every cell center of a rows x cols grid.
Raster evaluate_raster(const std::function<double(double, double)>& predict,
                       const RasterBounds& bounds, std::size_t rows, std::size_t cols,
                       ExecMode mode = ExecMode::Parallel);

/// One CSV line per raster row, values in shortest round-trip form.
void write_raster_csv(const Raster& raster, std::ostream& out);

/// Binary 8-bit PGM (P5), min-max normalized; a constant raster maps to 0.
void write_raster_pgm(const Raster& raster, std::ostream& out);

/// SVG of filled cells on a linear two-color ramp.
void write_raster_svg(const Raster& raster, std::ostream& out);

/// Sidecar recording the normalization range, `vmin,vmax` on one line.
void write_raster_range(const Raster& raster, std::ostream& out);

} // namespace netq
