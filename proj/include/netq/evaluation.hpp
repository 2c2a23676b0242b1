#pragma once

#include "netq/preprocess.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace netq {

struct Metrics {
    double mae = 0.0;
    double mse = 0.0;
    double mne = 0.0; // max-norm (l-infinity) error
};

/// mae = mean |e|, mse = mean e^2, mne = max |e| over paired vectors.
Metrics compute_metrics(std::span<const double> y_true, std::span<const double> y_pred);

/// FCC-style service tiers from download/upload speed in Mbit/s; all
/// threshold boundaries are inclusive.
enum class ServiceTier : int { Unserved = 0, Underserved = 1, Served = 2 };

const char* tier_name(ServiceTier t);

/// Served: down >= 100 and up >= 20. Underserved: down >= 25 and up >= 3 and
/// not served. Unserved otherwise.
ServiceTier classify_service(double download_mbps, double upload_mbps);

struct AccuracyReport {
    double dense = 0.0, sparse = 0.0, overall = 0.0;
    std::size_t dense_n = 0, sparse_n = 0;
};

/// Fraction of exact tier matches, per region and overall.
AccuracyReport classification_accuracy(std::span<const ServiceTier> true_tiers,
                                       std::span<const ServiceTier> pred_tiers,
                                       std::span<const RegionClass> region_labels);

/// One evaluated prediction row; matches the prediction CSV schema
/// `id,lon,lat,y_true,y_pred,region,fallback_flag[,var]`.
struct PredictionRow {
    std::int64_t id = 0;
    double lon = 0.0, lat = 0.0;
    double y_true = 0.0, y_pred = 0.0;
    RegionClass region = RegionClass::Sparse;
    int fallback_flag = 0;
    std::optional<double> var;
};

void write_predictions_csv(std::span<const PredictionRow> rows, bool with_var, std::ostream& out);
std::vector<PredictionRow> read_predictions_csv(std::istream& in);

struct MetricsReport {
    std::string region; // "dense" | "sparse" | "all"
    std::size_t n = 0;
    Metrics metrics;
    std::optional<double> accuracy;
};

/// Per-region and overall metrics for a prediction set, regions resolved
/// through the segmentation. When download/upload prediction rows are given,
/// tier accuracy is added (speed rows are in kbit/s; tiers use Mbit/s).
/// Regions with no evaluated rows are omitted.
std::vector<MetricsReport> evaluate_run(std::span<const PredictionRow> score_rows,
                                        const GridSegmentation& seg,
                                        std::span<const PredictionRow> down_rows = {},
                                        std::span<const PredictionRow> up_rows = {});

/// Aligned plain-text table, one row per MetricsReport.
void write_report_text(std::span<const MetricsReport> reports, const std::string& title,
                       std::ostream& out);

/// Machine form: `region,n,mae,mse,mne[,accuracy]`.
void write_report_csv(std::span<const MetricsReport> reports, std::ostream& out);

} // namespace netq
