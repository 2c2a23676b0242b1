#pragma once

#include <functional>
#include <vector>

namespace netq {

struct NelderMeadOptions {
    int max_iters = 400;
    double f_tol = 1e-9;    // relative spread of simplex values
    double x_tol = 1e-10;   // max vertex distance from the best vertex
    double init_step = 0.5; // initial simplex edge length per coordinate
};

struct NelderMeadResult {
    std::vector<double> x;
    double f = 0.0;
    int evals = 0;
};

/// Derivative-free simplex minimizer (reflection 1, expansion 2, contraction
/// 0.5, shrink 0.5). The objective may return +inf for infeasible points.
/// Deterministic given the start point.
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& objective,
                             std::vector<double> start, const NelderMeadOptions& opts = {});

} // namespace netq
