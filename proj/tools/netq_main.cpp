#include "netq/config.hpp"
#include "netq/data_model.hpp"
#include "netq/errors.hpp"
#include "netq/pipeline.hpp"
#include "netq/synth.hpp"
#include "netq/text_io.hpp"

#include <CLI11.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <fstream>
#include <iostream>

namespace {

int dispatch(const CLI::App& app, netq::ExperimentConfig& run_cfg, netq::SynthParams& synth_params,
             const std::string& synth_out, const std::string& ingest_in,
             const std::string& ingest_out, const netq::ScoreRule& ingest_rule,
             netq::HeatmapRequest& heat_req, const std::vector<double>& heat_bounds,
             netq::ReportRequest& report_req) {
    if (app.got_subcommand("ingest")) {
        const netq::Summary s = netq::ingest_file(ingest_in, ingest_out, ingest_rule);
        std::cout << "points=" << s.n << '\n'
                  << "score_mean=" << netq::format_double(s.mean) << '\n'
                  << "score_min=" << netq::format_double(s.min) << '\n'
                  << "score_max=" << netq::format_double(s.max) << '\n'
                  << "score_stddev=" << netq::format_double(s.stddev) << '\n';
        return 0;
    }
    if (app.got_subcommand("synth")) {
        const netq::Dataset ds = netq::generate_synthetic(synth_params);
        std::ofstream out(synth_out, std::ios::binary);
        if (!out)
            throw netq::DataError("cannot write " + synth_out);
        netq::write_canonical_csv(ds, out);
        std::cout << "points=" << ds.size() << '\n';
        return 0;
    }
    if (app.got_subcommand("run")) {
        const netq::RunOutcome outcome = netq::run_experiment(run_cfg);
        std::ifstream report(outcome.paths.report_txt());
        std::cout << report.rdbuf();
        return 0;
    }
    if (app.got_subcommand("heatmap")) {
        if (!heat_bounds.empty()) {
            if (heat_bounds.size() != 4)
                throw netq::DataError("--bounds needs lon_min,lat_min,lon_max,lat_max");
            heat_req.bounds =
                netq::RasterBounds{heat_bounds[0], heat_bounds[1], heat_bounds[2], heat_bounds[3]};
        }
        const netq::Raster raster = netq::render_heatmap(heat_req);
        std::cout << "raster=" << raster.rows << 'x' << raster.cols << '\n'
                  << "range=" << netq::format_double(raster.vmin) << ','
                  << netq::format_double(raster.vmax) << '\n';
        return 0;
    }
    if (app.got_subcommand("report")) {
        netq::report_run(report_req, std::cout);
        return 0;
    }
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"netq - mobile internet quality estimation from speed-test tiles"};
    app.require_subcommand(1);

    int threads = 0;
    app.add_option("--threads", threads, "cap OpenMP threads (0 = runtime default)");

    std::string ingest_in, ingest_out;
    netq::ScoreRule ingest_rule;
    auto* ingest = app.add_subcommand("ingest", "validate a tile CSV, write the canonical form");
    ingest->add_option("--input", ingest_in, "source CSV (lon/lat or quadkey form)")->required();
    ingest->add_option("--out", ingest_out, "canonical CSV destination")->required();
    ingest->add_option("--w-down", ingest_rule.w_down, "score weight for download speed");
    ingest->add_option("--w-up", ingest_rule.w_up, "score weight for upload speed");

    netq::SynthParams synth_params;
    std::string synth_out;
    auto* synth = app.add_subcommand("synth", "generate an imbalanced synthetic benchmark CSV");
    synth->add_option("--out", synth_out, "destination CSV")->required();
    synth->add_option("--n-dense", synth_params.n_dense, "points in the dense cluster");
    synth->add_option("--n-sparse", synth_params.n_sparse, "points in the sparse ring");
    synth->add_option("--cluster-std", synth_params.cluster_std, "cluster standard deviation");
    synth->add_option("--ring-r0", synth_params.ring_r0, "ring inner radius");
    synth->add_option("--ring-r1", synth_params.ring_r1, "ring outer radius");
    synth->add_option("--noise", synth_params.noise_sd, "target noise standard deviation");
    synth->add_option("--seed", synth_params.seed, "generator seed");

    netq::ExperimentConfig run_cfg;
    auto* run = app.add_subcommand("run", "full pipeline: smooth, split, tune, fit, evaluate");
    run->set_config("--config", "", "flat key=value experiment config; flags win");
    run->add_option("--input", run_cfg.input, "tile CSV")->required();
    run->add_option("--out-dir", run_cfg.out_dir, "artifact directory")->required();
    run->add_option("--w-down", run_cfg.w_down, "score weight for download speed");
    run->add_option("--w-up", run_cfg.w_up, "score weight for upload speed");
    run->add_option("--smooth-k", run_cfg.smooth_k, "neighbors for kNN target averaging");
    run->add_option("--split-ratio", run_cfg.split_ratio, "train fraction");
    run->add_option("--split-seed", run_cfg.split_seed, "train/test split seed");
    run->add_option("--grid-rows", run_cfg.grid_rows, "segmentation grid rows");
    run->add_option("--grid-cols", run_cfg.grid_cols, "segmentation grid columns");
    run->add_option("--cv-folds", run_cfg.cv_folds, "cross-validation folds");
    run->add_option("--cv-seed", run_cfg.cv_seed, "fold assignment seed");
    run->add_option("--cv-cs", run_cfg.cv_cs, "candidate bandwidth magnitudes")->delimiter(',');
    run->add_option("--cv-ks", run_cfg.cv_ks, "candidate neighbor counts")->delimiter(',');
    run->add_option("--gp-fraction", run_cfg.gp_fraction, "stratified GP training fraction");
    run->add_option("--gp-restarts", run_cfg.gp_restarts, "GP fit random restarts");
    run->add_option("--gp-seed", run_cfg.gp_seed, "GP downsample/fit seed");
    run->add_flag("--gp-full", run_cfg.gp_full, "train the GP on the full training split");
    run->add_option("--methods", run_cfg.methods, "subset of fbkr,stbkr,gp")->delimiter(',');
    run->add_option("--metric", run_cfg.metric, "distance metric: planar or equirect");
    run->add_flag("--serial", run_cfg.serial, "force the serial reference path");

    netq::HeatmapRequest heat_req;
    std::vector<double> heat_bounds;
    auto* heat = app.add_subcommand("heatmap", "render a prediction raster from run artifacts");
    heat->add_option("--dir", heat_req.dir, "run artifact directory")->required();
    heat->add_option("--method", heat_req.method, "fbkr, stbkr or gp");
    heat->add_option("--rows", heat_req.rows, "raster rows");
    heat->add_option("--cols", heat_req.cols, "raster columns");
    heat->add_option("--bounds", heat_bounds, "lon_min,lat_min,lon_max,lat_max")->delimiter(',');
    heat->add_flag("--serial", heat_req.serial, "force the serial reference path");

    netq::ReportRequest report_req;
    auto* report = app.add_subcommand("report", "re-evaluate a predictions CSV by region");
    report->add_option("--pred", report_req.pred, "score predictions CSV")->required();
    report->add_option("--seg", report_req.seg, "segmentation sidecar")->required();
    report->add_option("--down", report_req.down, "download predictions CSV (enables accuracy)");
    report->add_option("--up", report_req.up, "upload predictions CSV (enables accuracy)");
    report->add_option("--out", report_req.out_csv, "also write the report as CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

#ifdef _OPENMP
    if (threads > 0)
        omp_set_num_threads(threads);
#endif

    try {
        return dispatch(app, run_cfg, synth_params, synth_out, ingest_in, ingest_out, ingest_rule,
                        heat_req, heat_bounds, report_req);
    } catch (const netq::NumericError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 3;
    } catch (const netq::DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
