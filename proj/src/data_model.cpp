#include "netq/data_model.hpp"

#include "netq/errors.hpp"
#include "netq/text_io.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>

namespace netq {

double compute_score(double download_kbps, double upload_kbps, const ScoreRule& rule) {
    if (rule.w_down < 0.0 || rule.w_up < 0.0 || rule.w_down + rule.w_up <= 0.0)
        throw DataError("score rule weights must be non-negative with a positive sum");
    return (rule.w_down * download_kbps + rule.w_up * upload_kbps) / ScoreRule::unit_divisor;
}

namespace {

struct ColumnMap {
    std::size_t lon = SIZE_MAX, lat = SIZE_MAX, quadkey = SIZE_MAX;
    std::size_t down = SIZE_MAX, up = SIZE_MAX, tests = SIZE_MAX, devices = SIZE_MAX;
    bool quadkey_form = false;
};

ColumnMap read_header(std::string_view line) {
    ColumnMap cm;
    const auto names = split_csv_line(line);
    for (std::size_t i = 0; i < names.size(); ++i) {
        const std::string_view n = names[i];
        if (n == "lon")
            cm.lon = i;
        else if (n == "lat")
            cm.lat = i;
        else if (n == "quadkey")
            cm.quadkey = i;
        else if (n == "avg_d_kbps")
            cm.down = i;
        else if (n == "avg_u_kbps")
            cm.up = i;
        else if (n == "tests")
            cm.tests = i;
        else if (n == "devices")
            cm.devices = i;
    }
    if (cm.down == SIZE_MAX || cm.up == SIZE_MAX || cm.tests == SIZE_MAX || cm.devices == SIZE_MAX)
        throw IngestError(1, "header must name avg_d_kbps, avg_u_kbps, tests, devices");
    if (cm.lon != SIZE_MAX && cm.lat != SIZE_MAX)
        cm.quadkey_form = false;
    else if (cm.quadkey != SIZE_MAX)
        cm.quadkey_form = true;
    else
        throw IngestError(1, "header must name either lon,lat or quadkey");
    return cm;
}

struct Accum {
    double down_weighted = 0.0;
    double up_weighted = 0.0;
    std::int64_t tests = 0;
    std::int64_t devices = 0;
};

} // namespace

Dataset parse_records(std::istream& source, const ScoreRule& rule) {
    std::string line;
    if (!std::getline(source, line))
        throw DataError("empty input: missing header row");
    const ColumnMap cm = read_header(line);

    // first-appearance order of unique locations
    std::map<std::pair<double, double>, std::size_t> slot_of;
    std::vector<std::pair<double, double>> locations;
    std::vector<Accum> accums;

    std::size_t lineno = 1;
    while (std::getline(source, line)) {
        ++lineno;
        if (trim(line).empty())
            continue;
        const auto fields = split_csv_line(line);
        const auto need = [&](std::size_t col) -> std::string_view {
            if (col >= fields.size())
                throw IngestError(lineno, "missing field (row has " +
                                              std::to_string(fields.size()) + " columns)");
            return fields[col];
        };

        double lon = 0.0, lat = 0.0;
        if (cm.quadkey_form) {
            try {
                std::tie(lon, lat) = tile_centroid(need(cm.quadkey));
            } catch (const DataError& e) {
                throw IngestError(lineno, e.what());
            }
        } else {
            if (!parse_double(need(cm.lon), lon))
                throw IngestError(lineno, "non-numeric lon");
            if (!parse_double(need(cm.lat), lat))
                throw IngestError(lineno, "non-numeric lat");
            if (lon < -180.0 || lon > 180.0)
                throw IngestError(lineno, "lon out of range [-180, 180]");
            if (lat < -90.0 || lat > 90.0)
                throw IngestError(lineno, "lat out of range [-90, 90]");
        }

        double down = 0.0, up = 0.0;
        if (!parse_double(need(cm.down), down) || down < 0.0)
            throw IngestError(lineno, "avg_d_kbps must be a non-negative number");
        if (!parse_double(need(cm.up), up) || up < 0.0)
            throw IngestError(lineno, "avg_u_kbps must be a non-negative number");

        std::int64_t tests = 0, devices = 0;
        if (!parse_int64(need(cm.tests), tests) || tests < 1)
            throw IngestError(lineno, "tests must be an integer >= 1");
        if (!parse_int64(need(cm.devices), devices) || devices < 1)
            throw IngestError(lineno, "devices must be an integer >= 1");

        const auto key = std::make_pair(lon, lat);
        auto it = slot_of.find(key);
        if (it == slot_of.end()) {
            it = slot_of.emplace(key, locations.size()).first;
            locations.push_back(key);
            accums.emplace_back();
        }
        Accum& a = accums[it->second];
        a.down_weighted += static_cast<double>(tests) * down;
        a.up_weighted += static_cast<double>(tests) * up;
        a.tests += tests;
        a.devices += devices;
    }

    if (locations.empty())
        throw DataError("empty dataset: no data rows after header");

    Dataset ds;
    ds.points.resize(locations.size());
    for (std::size_t i = 0; i < locations.size(); ++i) {
        SamplePoint& p = ds.points[i];
        const Accum& a = accums[i];
        p.id = static_cast<std::int64_t>(i);
        p.lon = locations[i].first;
        p.lat = locations[i].second;
        p.download_kbps = a.down_weighted / static_cast<double>(a.tests);
        p.upload_kbps = a.up_weighted / static_cast<double>(a.tests);
        p.tests = a.tests;
        p.devices = a.devices;
        p.score = compute_score(p.download_kbps, p.upload_kbps, rule);
    }
    return ds;
}

void write_canonical_csv(const Dataset& ds, std::ostream& out) {
    out << "lon,lat,avg_d_kbps,avg_u_kbps,tests,devices\n";
    for (const SamplePoint& p : ds.points) {
        out << format_double(p.lon) << ',' << format_double(p.lat) << ','
            << format_double(p.download_kbps) << ',' << format_double(p.upload_kbps) << ','
            << p.tests << ',' << p.devices << '\n';
    }
}

namespace {

struct TileXY {
    std::uint64_t x = 0, y = 0;
    int zoom = 0;
};

TileXY decode_quadkey(std::string_view quadkey) {
    if (quadkey.empty())
        throw DataError("empty quadkey");
    if (quadkey.size() > 52)
        throw DataError("quadkey longer than 52 digits exceeds coordinate precision");
    TileXY t;
    for (char ch : quadkey) {
        if (ch < '0' || ch > '3')
            throw DataError(std::string("invalid quadkey digit '") + ch + "'");
        const unsigned d = static_cast<unsigned>(ch - '0');
        t.x = (t.x << 1) | (d & 1u);
        t.y = (t.y << 1) | (d >> 1);
    }
    t.zoom = static_cast<int>(quadkey.size());
    return t;
}

double merc_lat(double y_frac) {
    return std::atan(std::sinh(std::numbers::pi * (1.0 - 2.0 * y_frac))) * (180.0 / std::numbers::pi);
}

} // namespace

std::pair<double, double> tile_centroid(std::string_view quadkey) {
    const TileXY t = decode_quadkey(quadkey);
    const double scale = std::ldexp(1.0, -t.zoom);
    const double xf = (static_cast<double>(t.x) + 0.5) * scale;
    const double yf = (static_cast<double>(t.y) + 0.5) * scale;
    return {360.0 * xf - 180.0, merc_lat(yf)};
}

TileBounds tile_bounds(std::string_view quadkey) {
    const TileXY t = decode_quadkey(quadkey);
    const double scale = std::ldexp(1.0, -t.zoom);
    const double x0 = static_cast<double>(t.x) * scale;
    const double x1 = (static_cast<double>(t.x) + 1.0) * scale;
    const double y0 = static_cast<double>(t.y) * scale;
    const double y1 = (static_cast<double>(t.y) + 1.0) * scale;
    // y grows southward in tile space
    return TileBounds{360.0 * x0 - 180.0, merc_lat(y1), 360.0 * x1 - 180.0, merc_lat(y0)};
}

Summary summarize(const Dataset& ds) {
    if (ds.points.empty())
        throw DataError("cannot summarize an empty dataset");
    Summary s;
    s.n = ds.points.size();
    s.min = ds.points.front().score;
    s.max = s.min;
    double sum = 0.0;
    for (const SamplePoint& p : ds.points) {
        sum += p.score;
        s.min = std::min(s.min, p.score);
        s.max = std::max(s.max, p.score);
    }
    s.mean = sum / static_cast<double>(s.n);
    double ss = 0.0;
    for (const SamplePoint& p : ds.points) {
        const double d = p.score - s.mean;
        ss += d * d;
    }
    s.stddev = std::sqrt(ss / static_cast<double>(s.n));
    return s;
}

} // namespace netq
