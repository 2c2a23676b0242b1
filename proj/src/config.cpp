#include "netq/config.hpp"

#include "netq/errors.hpp"
#include "netq/text_io.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

namespace netq {

Metric ExperimentConfig::metric_kind() const {
    if (metric == "planar")
        return Metric::PlanarDegrees;
    if (metric == "equirect")
        return Metric::Equirectangular;
    throw DataError("unknown metric '" + metric + "' (expected planar or equirect)");
}

void ExperimentConfig::validate() const {
    metric_kind();
    if (smooth_k < 1)
        throw DataError("smooth_k must be >= 1");
    if (!(split_ratio > 0.0) || !(split_ratio < 1.0))
        throw DataError("split_ratio must lie strictly between 0 and 1");
    if (grid_rows < 1 || grid_cols < 1)
        throw DataError("grid must be at least 1x1");
    if (cv_folds < 2)
        throw DataError("cv_folds must be >= 2");
    if (cv_cs.empty() || cv_ks.empty())
        throw DataError("candidate grids must be non-empty");
    if (!(gp_fraction > 0.0) || gp_fraction > 1.0)
        throw DataError("gp_fraction must lie in (0, 1]");
    if (gp_restarts < 1)
        throw DataError("gp_restarts must be >= 1");
    if (methods.empty())
        throw DataError("at least one method must be selected");
    for (const std::string& m : methods)
        if (m != "gp" && m != "fbkr" && m != "stbkr")
            throw DataError("unknown method '" + m + "' (expected gp, fbkr or stbkr)");
}

namespace {

template <typename T>
std::string join(const std::vector<T>& v) {
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i)
            os << ',';
        if constexpr (std::is_same_v<T, double>)
            os << format_double(v[i]);
        else
            os << v[i];
    }
    return os.str();
}

} // namespace

void save_config(const ExperimentConfig& cfg, std::ostream& out) {
    out << "input=" << cfg.input << '\n';
    out << "out-dir=" << cfg.out_dir << '\n';
    out << "w-down=" << format_double(cfg.w_down) << '\n';
    out << "w-up=" << format_double(cfg.w_up) << '\n';
    out << "smooth-k=" << cfg.smooth_k << '\n';
    out << "split-ratio=" << format_double(cfg.split_ratio) << '\n';
    out << "split-seed=" << cfg.split_seed << '\n';
    out << "grid-rows=" << cfg.grid_rows << '\n';
    out << "grid-cols=" << cfg.grid_cols << '\n';
    out << "cv-folds=" << cfg.cv_folds << '\n';
    out << "cv-seed=" << cfg.cv_seed << '\n';
    out << "cv-cs=" << join(cfg.cv_cs) << '\n';
    out << "cv-ks=" << join(cfg.cv_ks) << '\n';
    out << "gp-fraction=" << format_double(cfg.gp_fraction) << '\n';
    out << "gp-restarts=" << cfg.gp_restarts << '\n';
    out << "gp-seed=" << cfg.gp_seed << '\n';
    out << "gp-full=" << (cfg.gp_full ? "true" : "false") << '\n';
    out << "methods=" << join(cfg.methods) << '\n';
    out << "metric=" << cfg.metric << '\n';
    out << "serial=" << (cfg.serial ? "true" : "false") << '\n';
}

std::map<std::string, std::string> read_kv_file(std::istream& in) {
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string_view t = trim(line);
        if (t.empty() || t.front() == '#' || t.front() == ';' || t.front() == '[')
            continue;
        const std::size_t eq = t.find('=');
        if (eq == std::string_view::npos)
            throw IngestError(lineno, "expected key=value");
        kv[std::string(trim(t.substr(0, eq)))] = std::string(trim(t.substr(eq + 1)));
    }
    return kv;
}

namespace {

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    for (std::string_view part : split_csv_line(s))
        if (!part.empty())
            out.emplace_back(part);
    return out;
}

} // namespace

ExperimentConfig config_from_kv(const std::map<std::string, std::string>& kv) {
    ExperimentConfig cfg;
    const auto get = [&](const char* key) -> const std::string* {
        const auto it = kv.find(key);
        return it == kv.end() ? nullptr : &it->second;
    };
    const auto want_double = [&](const char* key, double& out) {
        if (const std::string* v = get(key))
            if (!parse_double(*v, out))
                throw DataError(std::string("config: bad number for ") + key);
    };
    const auto want_u64 = [&](const char* key, auto& out) {
        if (const std::string* v = get(key)) {
            std::int64_t x = 0;
            if (!parse_int64(*v, x) || x < 0)
                throw DataError(std::string("config: bad integer for ") + key);
            out = static_cast<std::remove_reference_t<decltype(out)>>(x);
        }
    };
    const auto want_bool = [&](const char* key, bool& out) {
        if (const std::string* v = get(key))
            out = (*v == "true" || *v == "1");
    };

    if (const std::string* v = get("input"))
        cfg.input = *v;
    if (const std::string* v = get("out-dir"))
        cfg.out_dir = *v;
    want_double("w-down", cfg.w_down);
    want_double("w-up", cfg.w_up);
    want_u64("smooth-k", cfg.smooth_k);
    want_double("split-ratio", cfg.split_ratio);
    want_u64("split-seed", cfg.split_seed);
    want_u64("grid-rows", cfg.grid_rows);
    want_u64("grid-cols", cfg.grid_cols);
    want_u64("cv-folds", cfg.cv_folds);
    want_u64("cv-seed", cfg.cv_seed);
    if (const std::string* v = get("cv-cs")) {
        cfg.cv_cs.clear();
        for (const std::string& part : split_list(*v)) {
            double x = 0.0;
            if (!parse_double(part, x))
                throw DataError("config: bad cv-cs entry '" + part + "'");
            cfg.cv_cs.push_back(x);
        }
    }
    if (const std::string* v = get("cv-ks")) {
        cfg.cv_ks.clear();
        for (const std::string& part : split_list(*v)) {
            std::int64_t x = 0;
            if (!parse_int64(part, x) || x < 1)
                throw DataError("config: bad cv-ks entry '" + part + "'");
            cfg.cv_ks.push_back(static_cast<std::size_t>(x));
        }
    }
    want_double("gp-fraction", cfg.gp_fraction);
    want_u64("gp-restarts", cfg.gp_restarts);
    want_u64("gp-seed", cfg.gp_seed);
    want_bool("gp-full", cfg.gp_full);
    if (const std::string* v = get("methods"))
        cfg.methods = split_list(*v);
    if (const std::string* v = get("metric"))
        cfg.metric = *v;
    want_bool("serial", cfg.serial);
    return cfg;
}

} // namespace netq
