#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace netq {

/// Weights combining download and upload speed into one score.
/// Speeds are stored in kbit/s; the divisor converts to Mbit/s.
struct ScoreRule {
    double w_down = 1.0;
    double w_up = 1.0;
    static constexpr double unit_divisor = 1000.0;
};

/// score = (w_down * download + w_up * upload) / 1000, monotone in each speed.
double compute_score(double download_kbps, double upload_kbps, const ScoreRule& rule);

/// One measurement tile.
struct SamplePoint {
    std::int64_t id = 0;
    double lon = 0.0; // degrees east, [-180, 180]
    double lat = 0.0; // degrees north, [-90, 90]
    double download_kbps = 0.0;
    double upload_kbps = 0.0;
    std::int64_t tests = 1;
    std::int64_t devices = 1;
    double score = 0.0;
};

struct Dataset {
    std::vector<SamplePoint> points;
    std::string crs_note = "geographic degrees (EPSG:4326)";

    std::size_t size() const { return points.size(); }
};

/// Parses CSV with header `lon,lat,avg_d_kbps,avg_u_kbps,tests,devices` or
/// `quadkey,avg_d_kbps,avg_u_kbps,tests,devices`; extra columns are ignored.
/// Rows at an identical location are merged: speeds are averaged weighted by
/// test count, tests and devices are summed, the score is recomputed.
/// Throws IngestError with the offending line number on malformed rows and
/// DataError when no data rows follow the header.
Dataset parse_records(std::istream& source, const ScoreRule& rule);

/// Canonical `lon,lat,avg_d_kbps,avg_u_kbps,tests,devices` form; doubles are
/// written in shortest round-trip notation so re-parsing is exact.
void write_canonical_csv(const Dataset& ds, std::ostream& out);

/// Center of the Web-Mercator tile addressed by a Bing-style quadkey
/// (zoom = key length). Returns (lon, lat) in degrees.
std::pair<double, double> tile_centroid(std::string_view quadkey);

struct TileBounds {
    double lon_min, lat_min, lon_max, lat_max;
};

/// Geographic bounds of the tile addressed by a quadkey.
TileBounds tile_bounds(std::string_view quadkey);

struct Summary {
    std::size_t n = 0;
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
    double stddev = 0.0; // population standard deviation
};

/// Score summary over a non-empty dataset.
Summary summarize(const Dataset& ds);

} // namespace netq
