#include "netq/pipeline.hpp"

#include "netq/errors.hpp"
#include "netq/gp.hpp"
#include "netq/preprocess.hpp"
#include "netq/text_io.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace netq {

namespace {

std::ifstream open_in(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in)
        throw DataError("cannot open " + p.string());
    return in;
}

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream out(p, std::ios::binary); // '\n' only, bit-stable across runs
    if (!out)
        throw DataError("cannot write " + p.string());
    return out;
}

struct TestView {
    std::vector<std::int64_t> ids;
    std::vector<std::array<double, 2>> locs;
    std::vector<double> score, down, up;
};

struct TrainView {
    std::vector<std::array<double, 2>> locs;
    std::vector<double> score, down, up;
};

TrainView make_train_view(const Dataset& ds, const std::vector<std::int64_t>& ids) {
    TrainView v;
    v.locs.reserve(ids.size());
    for (const std::int64_t id : ids) {
        const SamplePoint& p = ds.points.at(static_cast<std::size_t>(id));
        v.locs.push_back({p.lon, p.lat});
        v.score.push_back(p.score);
        v.down.push_back(p.download_kbps);
        v.up.push_back(p.upload_kbps);
    }
    return v;
}

TestView make_test_view(const Dataset& ds, const std::vector<std::int64_t>& ids) {
    TestView v;
    v.ids = ids;
    for (const std::int64_t id : ids) {
        const SamplePoint& p = ds.points.at(static_cast<std::size_t>(id));
        v.locs.push_back({p.lon, p.lat});
        v.score.push_back(p.score);
        v.down.push_back(p.download_kbps);
        v.up.push_back(p.upload_kbps);
    }
    return v;
}

std::vector<PredictionRow> rows_from_kernel(const TestView& test, std::span<const double> truth,
                                            const std::vector<Prediction>& preds) {
    std::vector<PredictionRow> rows(test.ids.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i].id = test.ids[i];
        rows[i].lon = test.locs[i][0];
        rows[i].lat = test.locs[i][1];
        rows[i].y_true = truth[i];
        rows[i].y_pred = preds[i].value;
        rows[i].region = preds[i].region;
        rows[i].fallback_flag = static_cast<int>(preds[i].fallback);
    }
    return rows;
}

std::vector<PredictionRow> rows_from_gp(const TestView& test, std::span<const double> truth,
                                        const GPPrediction& preds, const GridSegmentation& seg) {
    std::vector<PredictionRow> rows(test.ids.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i].id = test.ids[i];
        rows[i].lon = test.locs[i][0];
        rows[i].lat = test.locs[i][1];
        rows[i].y_true = truth[i];
        rows[i].y_pred = preds.mean[i];
        rows[i].region = seg.classify(test.locs[i][0], test.locs[i][1]);
        rows[i].fallback_flag = preds.var_clamped[i];
        rows[i].var = preds.var[i];
    }
    return rows;
}

void write_cv_table(const CvResult& cv, std::ostream& out) {
    out << "region,c,k,mean_mse,folds_used\n";
    for (const CvEntry& e : cv.table)
        out << region_name(e.region) << ',' << format_double(e.c) << ',' << e.k << ','
            << format_double(e.mean_mse) << ',' << e.folds_used << '\n';
}

Eigen::MatrixXd to_matrix(const std::vector<std::array<double, 2>>& locs) {
    Eigen::MatrixXd X(static_cast<Eigen::Index>(locs.size()), 2);
    for (std::size_t i = 0; i < locs.size(); ++i) {
        X(static_cast<Eigen::Index>(i), 0) = locs[i][0];
        X(static_cast<Eigen::Index>(i), 1) = locs[i][1];
    }
    return X;
}

void append_kernel_params(std::vector<std::pair<std::string, std::string>>& kv,
                          const std::string& method, const RegionParams& params) {
    const auto one = [&](const char* region, const KernelConfig& c) {
        kv.emplace_back(method + "." + region + ".c", format_double(c.c));
        kv.emplace_back(method + "." + region + ".k", std::to_string(c.k));
    };
    one("dense", params.dense);
    one("sparse", params.sparse);
}

void append_gp_params(std::vector<std::pair<std::string, std::string>>& kv,
                      const std::string& prefix, const GPModel& model) {
    kv.emplace_back(prefix + ".sigma2", format_double(model.hyper.sigma2));
    kv.emplace_back(prefix + ".theta1", format_double(model.hyper.theta1));
    kv.emplace_back(prefix + ".theta2", format_double(model.hyper.theta2));
    kv.emplace_back(prefix + ".noise2", format_double(model.hyper.noise2));
    kv.emplace_back(prefix + ".lml", format_double(model.lml));
}

} // namespace

void write_smoothed_artifact(const Dataset& ds, std::ostream& out) {
    out << "lon,lat,avg_d_kbps,avg_u_kbps,tests,devices,score\n";
    for (const SamplePoint& p : ds.points)
        out << format_double(p.lon) << ',' << format_double(p.lat) << ','
            << format_double(p.download_kbps) << ',' << format_double(p.upload_kbps) << ','
            << p.tests << ',' << p.devices << ',' << format_double(p.score) << '\n';
}

Dataset read_smoothed_artifact(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) ||
        trim(line) != "lon,lat,avg_d_kbps,avg_u_kbps,tests,devices,score")
        throw DataError("smoothed artifact: bad header");
    Dataset ds;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty())
            continue;
        const auto f = split_csv_line(line);
        if (f.size() != 7)
            throw IngestError(lineno, "smoothed artifact: wrong column count");
        SamplePoint p;
        p.id = static_cast<std::int64_t>(ds.points.size());
        if (!parse_double(f[0], p.lon) || !parse_double(f[1], p.lat) ||
            !parse_double(f[2], p.download_kbps) || !parse_double(f[3], p.upload_kbps) ||
            !parse_int64(f[4], p.tests) || !parse_int64(f[5], p.devices) ||
            !parse_double(f[6], p.score))
            throw IngestError(lineno, "smoothed artifact: malformed field");
        ds.points.push_back(p);
    }
    if (ds.points.empty())
        throw DataError("smoothed artifact: no rows");
    return ds;
}

Summary ingest_file(const std::string& input, const std::string& output, const ScoreRule& rule) {
    std::ifstream in(input);
    if (!in)
        throw DataError("cannot open input: " + input);
    const Dataset ds = parse_records(in, rule);
    auto out = open_out(output);
    write_canonical_csv(ds, out);
    return summarize(ds);
}

RunOutcome run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.out_dir.empty())
        throw DataError("run: out-dir is required");
    const ScoreRule rule{cfg.w_down, cfg.w_up};
    const Metric metric = cfg.metric_kind();
    const ExecMode mode = cfg.exec_mode();

    std::ifstream in(cfg.input);
    if (!in)
        throw DataError("cannot open input: " + cfg.input);
    const Dataset raw = parse_records(in, rule);
    if (cfg.smooth_k > raw.size())
        throw DataError("smooth_k exceeds dataset size");

    const PointIndex full_index = PointIndex::build(raw, metric);
    const Dataset smoothed = knn_average(raw, full_index, cfg.smooth_k, mode);
    const GridSegmentation seg = segment_grid(smoothed, cfg.grid_rows, cfg.grid_cols);
    const Split split = split_dataset(smoothed.size(), cfg.split_ratio, cfg.split_seed);

    RunOutcome outcome;
    outcome.paths.dir = cfg.out_dir;
    std::filesystem::create_directories(outcome.paths.dir);
    {
        auto out = open_out(outcome.paths.smoothed());
        write_smoothed_artifact(smoothed, out);
    }
    {
        auto out = open_out(outcome.paths.split());
        write_split_csv(split, out);
    }
    {
        auto out = open_out(outcome.paths.segmentation());
        write_segmentation_csv(seg, out);
    }
    {
        auto out = open_out(outcome.paths.config_used());
        save_config(cfg, out);
    }

    const TrainView train = make_train_view(smoothed, split.train_ids);
    const TestView test = make_test_view(smoothed, split.test_ids);
    const auto selected = [&](const char* m) {
        return std::find(cfg.methods.begin(), cfg.methods.end(), m) != cfg.methods.end();
    };

    std::vector<std::pair<std::string, std::string>> params_kv;
    std::ostringstream report_text;

    const auto run_kernel_method = [&](const std::string& name, KernelKind kind) {
        const CvResult cv = cross_validate(smoothed, split.train_ids, kind, cfg.cv_cs, cfg.cv_ks,
                                           cfg.cv_folds, cfg.cv_seed, seg, metric, mode);
        {
            auto out = open_out(outcome.paths.cv_table(name));
            write_cv_table(cv, out);
        }
        append_kernel_params(params_kv, name, cv.selected);
        if (kind == KernelKind::Fixed)
            outcome.fbkr_params = cv.selected;
        else
            outcome.stbkr_params = cv.selected;

        const PointIndex train_index = PointIndex::build(train.locs, metric);
        const FittedKernelModel model_score(train_index, train.score, cv.selected, &seg);
        const FittedKernelModel model_down(train_index, train.down, cv.selected, &seg);
        const FittedKernelModel model_up(train_index, train.up, cv.selected, &seg);

        const auto score_rows =
            rows_from_kernel(test, test.score, model_score.predict_batch(test.locs, mode));
        const auto down_rows =
            rows_from_kernel(test, test.down, model_down.predict_batch(test.locs, mode));
        const auto up_rows =
            rows_from_kernel(test, test.up, model_up.predict_batch(test.locs, mode));
        {
            auto out = open_out(outcome.paths.predictions(name));
            write_predictions_csv(score_rows, false, out);
        }
        {
            auto out = open_out(outcome.paths.predictions(name, "down"));
            write_predictions_csv(down_rows, false, out);
        }
        {
            auto out = open_out(outcome.paths.predictions(name, "up"));
            write_predictions_csv(up_rows, false, out);
        }

        MethodOutcome mo;
        mo.method = name;
        mo.reports = evaluate_run(score_rows, seg, down_rows, up_rows);
        {
            auto out = open_out(outcome.paths.report_csv(name));
            write_report_csv(mo.reports, out);
        }
        write_report_text(mo.reports, name + " test-set errors (score) and tier accuracy",
                          report_text);
        report_text << '\n';
        outcome.methods.push_back(std::move(mo));
    };

    if (selected("fbkr"))
        run_kernel_method("fbkr", KernelKind::Fixed);
    if (selected("stbkr"))
        run_kernel_method("stbkr", KernelKind::SelfTuning);

    if (selected("gp")) {
        const std::vector<std::int64_t> subset =
            cfg.gp_full ? split.train_ids
                        : stratified_downsample(split.train_ids, seg, smoothed, cfg.gp_fraction,
                                                cfg.gp_seed);
        {
            auto out = open_out(outcome.paths.gp_subset());
            out << "id\n";
            for (const std::int64_t id : subset)
                out << id << '\n';
        }
        const TrainView gp_train = make_train_view(smoothed, subset);
        const Eigen::MatrixXd X = to_matrix(gp_train.locs);
        const Eigen::MatrixXd Xstar = to_matrix(test.locs);
        const auto fit_target = [&](const std::vector<double>& targets, std::uint64_t seed) {
            const Eigen::VectorXd y =
                Eigen::Map<const Eigen::VectorXd>(targets.data(),
                                                  static_cast<Eigen::Index>(targets.size()));
            return gp_fit(X, y, gp_default_init_grid(X, y), cfg.gp_restarts, seed, mode);
        };
        // distinct sub-seeds per target keep the three fits independent
        const GPModel gp_score = fit_target(gp_train.score, cfg.gp_seed + 1);
        const GPModel gp_down = fit_target(gp_train.down, cfg.gp_seed + 2);
        const GPModel gp_up = fit_target(gp_train.up, cfg.gp_seed + 3);
        append_gp_params(params_kv, "gp.score", gp_score);
        append_gp_params(params_kv, "gp.down", gp_down);
        append_gp_params(params_kv, "gp.up", gp_up);
        params_kv.emplace_back("gp.subset_size", std::to_string(subset.size()));

        const auto score_rows =
            rows_from_gp(test, test.score, gp_predict(gp_score, Xstar, mode), seg);
        const auto down_rows = rows_from_gp(test, test.down, gp_predict(gp_down, Xstar, mode), seg);
        const auto up_rows = rows_from_gp(test, test.up, gp_predict(gp_up, Xstar, mode), seg);
        {
            auto out = open_out(outcome.paths.predictions("gp"));
            write_predictions_csv(score_rows, true, out);
        }
        {
            auto out = open_out(outcome.paths.predictions("gp", "down"));
            write_predictions_csv(down_rows, true, out);
        }
        {
            auto out = open_out(outcome.paths.predictions("gp", "up"));
            write_predictions_csv(up_rows, true, out);
        }

        MethodOutcome mo;
        mo.method = "gp";
        mo.reports = evaluate_run(score_rows, seg, down_rows, up_rows);
        {
            auto out = open_out(outcome.paths.report_csv("gp"));
            write_report_csv(mo.reports, out);
        }
        write_report_text(mo.reports, "gp test-set errors (score) and tier accuracy", report_text);
        report_text << '\n';
        outcome.methods.push_back(std::move(mo));
    }

    {
        auto out = open_out(outcome.paths.params());
        for (const auto& [k, v] : params_kv)
            out << k << '=' << v << '\n';
    }
    {
        auto out = open_out(outcome.paths.report_txt());
        out << report_text.str();
    }
    return outcome;
}

Raster render_heatmap(const HeatmapRequest& req) {
    RunPaths paths;
    paths.dir = req.dir;
    const ExecMode mode = req.serial ? ExecMode::Serial : ExecMode::Parallel;

    auto seg_in = open_in(paths.segmentation());
    const GridSegmentation seg = read_segmentation_csv(seg_in);
    auto smooth_in = open_in(paths.smoothed());
    const Dataset smoothed = read_smoothed_artifact(smooth_in);
    auto split_in = open_in(paths.split());
    const Split split = read_split_csv(split_in);
    auto params_in = open_in(paths.params());
    const auto params_kv = read_kv_file(params_in);
    auto cfg_in = open_in(paths.config_used());
    const ExperimentConfig cfg = config_from_kv(read_kv_file(cfg_in));

    const RasterBounds bounds = req.bounds.value_or(
        RasterBounds{seg.lon_min, seg.lat_min, seg.lon_max, seg.lat_max});

    const auto need = [&](const std::string& key) -> const std::string& {
        const auto it = params_kv.find(key);
        if (it == params_kv.end())
            throw DataError("selected_params.cfg is missing '" + key +
                            "'; was the method part of the run?");
        return it->second;
    };
    const auto need_double = [&](const std::string& key) {
        double v = 0.0;
        if (!parse_double(need(key), v))
            throw DataError("selected_params.cfg: bad number for " + key);
        return v;
    };
    const auto need_size = [&](const std::string& key) {
        std::int64_t v = 0;
        if (!parse_int64(need(key), v) || v < 1)
            throw DataError("selected_params.cfg: bad integer for " + key);
        return static_cast<std::size_t>(v);
    };

    Raster raster;
    if (req.method == "fbkr" || req.method == "stbkr") {
        const KernelKind kind =
            req.method == "fbkr" ? KernelKind::Fixed : KernelKind::SelfTuning;
        const RegionParams params{
            KernelConfig{kind, need_double(req.method + ".dense.c"),
                         need_size(req.method + ".dense.k")},
            KernelConfig{kind, need_double(req.method + ".sparse.c"),
                         need_size(req.method + ".sparse.k")}};
        const TrainView train = make_train_view(smoothed, split.train_ids);
        const PointIndex index = PointIndex::build(train.locs, cfg.metric_kind());
        const FittedKernelModel model(index, train.score, params, &seg);
        raster = evaluate_raster(
            [&](double lon, double lat) { return model.predict(lon, lat).value; }, bounds,
            req.rows, req.cols, mode);
    } else if (req.method == "gp") {
        auto subset_in = open_in(paths.gp_subset());
        std::string line;
        if (!std::getline(subset_in, line) || trim(line) != "id")
            throw DataError("gp_subset.csv: bad header");
        std::vector<std::int64_t> subset;
        while (std::getline(subset_in, line)) {
            if (trim(line).empty())
                continue;
            std::int64_t id = 0;
            if (!parse_int64(trim(line), id))
                throw DataError("gp_subset.csv: bad id row");
            subset.push_back(id);
        }
        const TrainView train = make_train_view(smoothed, subset);
        const Eigen::MatrixXd X = to_matrix(train.locs);
        const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(
            train.score.data(), static_cast<Eigen::Index>(train.score.size()));
        const GPHyperparams hyper{need_double("gp.score.sigma2"), need_double("gp.score.theta1"),
                                  need_double("gp.score.theta2"), need_double("gp.score.noise2")};
        const GPModel model = gp_build(X, y, hyper);
        raster = evaluate_raster(
            [&](double lon, double lat) {
                Eigen::MatrixXd q(1, 2);
                q(0, 0) = lon;
                q(0, 1) = lat;
                return gp_predict(model, q, ExecMode::Serial).mean[0];
            },
            bounds, req.rows, req.cols, mode);
    } else {
        throw DataError("unknown heatmap method '" + req.method + "'");
    }

    const std::string stem = "heatmap_" + req.method;
    {
        auto out = open_out(paths.dir / (stem + ".csv"));
        write_raster_csv(raster, out);
    }
    {
        auto out = open_out(paths.dir / (stem + ".pgm"));
        write_raster_pgm(raster, out);
    }
    {
        auto out = open_out(paths.dir / (stem + ".svg"));
        write_raster_svg(raster, out);
    }
    {
        auto out = open_out(paths.dir / (stem + "_range.txt"));
        write_raster_range(raster, out);
    }
    return raster;
}

void report_run(const ReportRequest& req, std::ostream& out) {
    auto pred_in = open_in(req.pred);
    const std::vector<PredictionRow> scores = read_predictions_csv(pred_in);
    auto seg_in = open_in(req.seg);
    const GridSegmentation seg = read_segmentation_csv(seg_in);

    std::vector<PredictionRow> down, up;
    if (!req.down.empty() != !req.up.empty())
        throw DataError("report: --down and --up must be given together");
    if (!req.down.empty()) {
        auto d_in = open_in(req.down);
        down = read_predictions_csv(d_in);
        auto u_in = open_in(req.up);
        up = read_predictions_csv(u_in);
    }

    const auto reports = evaluate_run(scores, seg, down, up);
    write_report_text(reports, "prediction errors by region", out);
    if (!req.out_csv.empty()) {
        auto csv_out = open_out(req.out_csv);
        write_report_csv(reports, csv_out);
    }
}

} // namespace netq
