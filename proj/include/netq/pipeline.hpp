#pragma once

#include "netq/config.hpp"
#include "netq/data_model.hpp"
#include "netq/evaluation.hpp"
#include "netq/heatmap.hpp"
#include "netq/regressors.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace netq {

/// Fixed artifact layout inside a run's output directory; everything a later
/// `heatmap` or `report` invocation needs to resume exactly.
struct RunPaths {
    std::filesystem::path dir;

    std::filesystem::path smoothed() const { return dir / "smoothed.csv"; }
    std::filesystem::path split() const { return dir / "split.csv"; }
    std::filesystem::path segmentation() const { return dir / "segmentation.csv"; }
    std::filesystem::path params() const { return dir / "selected_params.cfg"; }
    std::filesystem::path config_used() const { return dir / "config_used.cfg"; }
    std::filesystem::path report_txt() const { return dir / "report.txt"; }
    std::filesystem::path report_csv(const std::string& method) const {
        return dir / ("report_" + method + ".csv");
    }
    std::filesystem::path predictions(const std::string& method,
                                      const std::string& target = "") const {
        return dir / ("pred_" + method + (target.empty() ? "" : "_" + target) + ".csv");
    }
    std::filesystem::path cv_table(const std::string& method) const {
        return dir / ("cv_" + method + ".csv");
    }
    std::filesystem::path gp_subset() const { return dir / "gp_subset.csv"; }
};

struct MethodOutcome {
    std::string method;
    std::vector<MetricsReport> reports;
};

struct RunOutcome {
    RunPaths paths;
    std::vector<MethodOutcome> methods;
    std::optional<RegionParams> fbkr_params;
    std::optional<RegionParams> stbkr_params;
};

/// Full pipeline: ingest, smooth, segment, split, per-method tune/fit,
/// test-set prediction for score and both speeds, evaluation, artifacts.
/// Deterministic given the config; re-runs produce byte-identical files.
RunOutcome run_experiment(const ExperimentConfig& cfg);

/// Parses `input`, writes the canonical CSV to `output`, returns the summary.
Summary ingest_file(const std::string& input, const std::string& output, const ScoreRule& rule);

struct HeatmapRequest {
    std::string dir; // run artifact directory
    std::string method = "stbkr";
    std::size_t rows = 50;
    std::size_t cols = 50;
    std::optional<RasterBounds> bounds; // default: segmentation bbox
    bool serial = false;
};

/// Rebuilds the requested model from run artifacts and writes
/// heatmap_<method>.{csv,pgm,svg} plus the normalization-range sidecar.
/// Returns the raster for inspection.
Raster render_heatmap(const HeatmapRequest& req);

struct ReportRequest {
    std::string pred;
    std::string seg;
    std::string down; // optional; enables tier accuracy together with `up`
    std::string up;
    std::string out_csv; // optional machine-readable copy
};

void report_run(const ReportRequest& req, std::ostream& out);

/// Canonical columns plus a score column, so smoothed targets reload exactly.
void write_smoothed_artifact(const Dataset& ds, std::ostream& out);
Dataset read_smoothed_artifact(std::istream& in);

} // namespace netq
