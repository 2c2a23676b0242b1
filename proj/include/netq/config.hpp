#pragma once

#include "netq/exec.hpp"
#include "netq/spatial_index.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace netq {

/// Everything a `run` needs; every field mirrors a CLI flag and a config-file
/// key, and all randomness flows from the named seeds.
struct ExperimentConfig {
    std::string input;
    std::string out_dir;

    double w_down = 1.0;
    double w_up = 1.0;

    std::size_t smooth_k = 5;

    double split_ratio = 0.8;
    std::uint64_t split_seed = 1;

    std::size_t grid_rows = 15;
    std::size_t grid_cols = 15;

    std::size_t cv_folds = 5;
    std::uint64_t cv_seed = 2;
    std::vector<double> cv_cs = {0.005, 0.01, 0.02, 0.05, 0.075};
    std::vector<std::size_t> cv_ks = {5, 10};

    double gp_fraction = 0.1;
    std::size_t gp_restarts = 4;
    std::uint64_t gp_seed = 3;
    bool gp_full = false;

    std::vector<std::string> methods = {"fbkr", "stbkr", "gp"};
    std::string metric = "planar"; // planar | equirect
    bool serial = false;

    ExecMode exec_mode() const { return serial ? ExecMode::Serial : ExecMode::Parallel; }
    Metric metric_kind() const;
    void validate() const;
};

void save_config(const ExperimentConfig& cfg, std::ostream& out);

/// Flat `key=value` reader shared by the config and params records.
std::map<std::string, std::string> read_kv_file(std::istream& in);

ExperimentConfig config_from_kv(const std::map<std::string, std::string>& kv);

} // namespace netq
