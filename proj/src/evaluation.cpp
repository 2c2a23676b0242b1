#include "netq/evaluation.hpp"

#include "netq/errors.hpp"
#include "netq/text_io.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace netq {

Metrics compute_metrics(std::span<const double> y_true, std::span<const double> y_pred) {
    if (y_true.empty())
        throw DataError("metrics over empty vectors");
    if (y_true.size() != y_pred.size())
        throw DataError("metrics: length mismatch");
    Metrics m;
    double abs_sum = 0.0, sq_sum = 0.0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const double e = y_pred[i] - y_true[i];
        abs_sum += std::abs(e);
        sq_sum += e * e;
        m.mne = std::max(m.mne, std::abs(e));
    }
    m.mae = abs_sum / static_cast<double>(y_true.size());
    m.mse = sq_sum / static_cast<double>(y_true.size());
    return m;
}

const char* tier_name(ServiceTier t) {
    switch (t) {
    case ServiceTier::Served:
        return "served";
    case ServiceTier::Underserved:
        return "underserved";
    default:
        return "unserved";
    }
}

ServiceTier classify_service(double download_mbps, double upload_mbps) {
    if (download_mbps < 0.0 || upload_mbps < 0.0 || !std::isfinite(download_mbps) ||
        !std::isfinite(upload_mbps))
        throw DataError("service classification needs finite non-negative speeds");
    if (download_mbps >= 100.0 && upload_mbps >= 20.0)
        return ServiceTier::Served;
    if (download_mbps >= 25.0 && upload_mbps >= 3.0)
        return ServiceTier::Underserved;
    return ServiceTier::Unserved;
}

AccuracyReport classification_accuracy(std::span<const ServiceTier> true_tiers,
                                       std::span<const ServiceTier> pred_tiers,
                                       std::span<const RegionClass> region_labels) {
    if (true_tiers.size() != pred_tiers.size() || true_tiers.size() != region_labels.size())
        throw DataError("classification_accuracy: length mismatch");
    AccuracyReport rep;
    std::size_t dense_hit = 0, sparse_hit = 0;
    for (std::size_t i = 0; i < true_tiers.size(); ++i) {
        const bool hit = true_tiers[i] == pred_tiers[i];
        if (region_labels[i] == RegionClass::Dense) {
            ++rep.dense_n;
            dense_hit += hit ? 1 : 0;
        } else {
            ++rep.sparse_n;
            sparse_hit += hit ? 1 : 0;
        }
    }
    rep.dense = rep.dense_n > 0 ? static_cast<double>(dense_hit) / static_cast<double>(rep.dense_n) : 0.0;
    rep.sparse =
        rep.sparse_n > 0 ? static_cast<double>(sparse_hit) / static_cast<double>(rep.sparse_n) : 0.0;
    const std::size_t total = rep.dense_n + rep.sparse_n;
    rep.overall =
        total > 0 ? static_cast<double>(dense_hit + sparse_hit) / static_cast<double>(total) : 0.0;
    return rep;
}

void write_predictions_csv(std::span<const PredictionRow> rows, bool with_var, std::ostream& out) {
    out << "id,lon,lat,y_true,y_pred,region,fallback_flag";
    if (with_var)
        out << ",var";
    out << '\n';
    for (const PredictionRow& r : rows) {
        out << r.id << ',' << format_double(r.lon) << ',' << format_double(r.lat) << ','
            << format_double(r.y_true) << ',' << format_double(r.y_pred) << ','
            << region_name(r.region) << ',' << r.fallback_flag;
        if (with_var)
            out << ',' << format_double(r.var.value_or(0.0));
        out << '\n';
    }
}

std::vector<PredictionRow> read_predictions_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line))
        throw DataError("predictions CSV: missing header");
    const std::string_view header = trim(line);
    bool with_var = false;
    if (header == "id,lon,lat,y_true,y_pred,region,fallback_flag,var")
        with_var = true;
    else if (header != "id,lon,lat,y_true,y_pred,region,fallback_flag")
        throw DataError("predictions CSV: unexpected header '" + std::string(header) + "'");

    std::vector<PredictionRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty())
            continue;
        const auto f = split_csv_line(line);
        const std::size_t want = with_var ? 8 : 7;
        if (f.size() != want)
            throw IngestError(lineno, "predictions CSV: wrong column count");
        PredictionRow r;
        std::int64_t flag = 0;
        if (!parse_int64(f[0], r.id) || !parse_double(f[1], r.lon) || !parse_double(f[2], r.lat) ||
            !parse_double(f[3], r.y_true) || !parse_double(f[4], r.y_pred) ||
            !parse_int64(f[6], flag))
            throw IngestError(lineno, "predictions CSV: malformed field");
        if (f[5] == "dense")
            r.region = RegionClass::Dense;
        else if (f[5] == "sparse")
            r.region = RegionClass::Sparse;
        else
            throw IngestError(lineno, "predictions CSV: unknown region label");
        r.fallback_flag = static_cast<int>(flag);
        if (with_var) {
            double v = 0.0;
            if (!parse_double(f[7], v))
                throw IngestError(lineno, "predictions CSV: malformed var");
            r.var = v;
        }
        rows.push_back(r);
    }
    return rows;
}

namespace {

Metrics metrics_of(const std::vector<const PredictionRow*>& rows) {
    std::vector<double> t, p;
    t.reserve(rows.size());
    p.reserve(rows.size());
    for (const PredictionRow* r : rows) {
        t.push_back(r->y_true);
        p.push_back(r->y_pred);
    }
    return compute_metrics(t, p);
}

} // namespace

std::vector<MetricsReport> evaluate_run(std::span<const PredictionRow> score_rows,
                                        const GridSegmentation& seg,
                                        std::span<const PredictionRow> down_rows,
                                        std::span<const PredictionRow> up_rows) {
    if (score_rows.empty())
        throw DataError("evaluate_run: no prediction rows");
    const bool with_tiers = !down_rows.empty() || !up_rows.empty();
    if (with_tiers && (down_rows.size() != score_rows.size() || up_rows.size() != score_rows.size()))
        throw DataError("evaluate_run: speed prediction rows must align with score rows");

    std::vector<const PredictionRow*> by_region[2];
    std::vector<RegionClass> regions(score_rows.size());
    for (std::size_t i = 0; i < score_rows.size(); ++i) {
        regions[i] = seg.classify(score_rows[i].lon, score_rows[i].lat);
        by_region[regions[i] == RegionClass::Dense ? 0 : 1].push_back(&score_rows[i]);
    }

    std::optional<AccuracyReport> acc;
    if (with_tiers) {
        std::vector<ServiceTier> truth(score_rows.size()), pred(score_rows.size());
        for (std::size_t i = 0; i < score_rows.size(); ++i) {
            if (down_rows[i].id != score_rows[i].id || up_rows[i].id != score_rows[i].id)
                throw DataError("evaluate_run: speed rows out of order with score rows");
            truth[i] = classify_service(std::max(down_rows[i].y_true, 0.0) / 1000.0,
                                        std::max(up_rows[i].y_true, 0.0) / 1000.0);
            pred[i] = classify_service(std::max(down_rows[i].y_pred, 0.0) / 1000.0,
                                       std::max(up_rows[i].y_pred, 0.0) / 1000.0);
        }
        acc = classification_accuracy(truth, pred, regions);
    }

    std::vector<MetricsReport> out;
    const char* names[2] = {"dense", "sparse"};
    for (int r = 0; r < 2; ++r) {
        if (by_region[r].empty())
            continue;
        MetricsReport rep;
        rep.region = names[r];
        rep.n = by_region[r].size();
        rep.metrics = metrics_of(by_region[r]);
        if (acc)
            rep.accuracy = r == 0 ? acc->dense : acc->sparse;
        out.push_back(std::move(rep));
    }
    {
        std::vector<const PredictionRow*> all;
        for (const PredictionRow& r : score_rows)
            all.push_back(&r);
        MetricsReport rep;
        rep.region = "all";
        rep.n = all.size();
        rep.metrics = metrics_of(all);
        if (acc)
            rep.accuracy = acc->overall;
        out.push_back(std::move(rep));
    }
    return out;
}

void write_report_text(std::span<const MetricsReport> reports, const std::string& title,
                       std::ostream& out) {
    out << title << '\n';
    std::ostringstream os;
    os << std::left << std::setw(8) << "region" << std::right << std::setw(8) << "n"
       << std::setw(14) << "mae" << std::setw(16) << "mse" << std::setw(14) << "mne";
    bool any_acc = std::any_of(reports.begin(), reports.end(),
                               [](const MetricsReport& r) { return r.accuracy.has_value(); });
    if (any_acc)
        os << std::setw(12) << "accuracy";
    out << os.str() << '\n';
    for (const MetricsReport& r : reports) {
        std::ostringstream row;
        row << std::left << std::setw(8) << r.region << std::right << std::setw(8) << r.n
            << std::fixed << std::setprecision(4) << std::setw(14) << r.metrics.mae
            << std::setw(16) << r.metrics.mse << std::setw(14) << r.metrics.mne;
        if (any_acc) {
            if (r.accuracy)
                row << std::setw(12) << std::setprecision(4) << *r.accuracy;
            else
                row << std::setw(12) << "-";
        }
        out << row.str() << '\n';
    }
}

void write_report_csv(std::span<const MetricsReport> reports, std::ostream& out) {
    bool any_acc = std::any_of(reports.begin(), reports.end(),
                               [](const MetricsReport& r) { return r.accuracy.has_value(); });
    out << "region,n,mae,mse,mne";
    if (any_acc)
        out << ",accuracy";
    out << '\n';
    for (const MetricsReport& r : reports) {
        out << r.region << ',' << r.n << ',' << format_double(r.metrics.mae) << ','
            << format_double(r.metrics.mse) << ',' << format_double(r.metrics.mne);
        if (any_acc)
            out << ',' << (r.accuracy ? format_double(*r.accuracy) : "");
        out << '\n';
    }
}

} // namespace netq
