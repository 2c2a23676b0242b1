#include "netq/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace netq {

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& objective,
                             std::vector<double> start, const NelderMeadOptions& opts) {
    const std::size_t dim = start.size();
    int evals = 0;
    const auto eval = [&](const std::vector<double>& x) {
        ++evals;
        return objective(x);
    };

    std::vector<std::vector<double>> verts(dim + 1, start);
    std::vector<double> fvals(dim + 1);
    for (std::size_t i = 0; i < dim; ++i)
        verts[i + 1][i] += opts.init_step;
    for (std::size_t i = 0; i <= dim; ++i)
        fvals[i] = eval(verts[i]);

    std::vector<std::size_t> rank(dim + 1);
    const auto sort_rank = [&] {
        std::iota(rank.begin(), rank.end(), 0u);
        std::stable_sort(rank.begin(), rank.end(),
                         [&](std::size_t a, std::size_t b) { return fvals[a] < fvals[b]; });
    };

    std::vector<double> centroid(dim), xr(dim), xe(dim), xc(dim);
    for (int iter = 0; iter < opts.max_iters; ++iter) {
        sort_rank();
        const std::size_t best = rank.front(), worst = rank.back();
        const std::size_t second_worst = rank[dim > 0 ? dim - 1 : 0];

        // convergence: simplex collapsed in f or in x
        const double f_spread = std::abs(fvals[worst] - fvals[best]);
        double x_spread = 0.0;
        for (std::size_t i = 0; i <= dim; ++i)
            for (std::size_t j = 0; j < dim; ++j)
                x_spread = std::max(x_spread, std::abs(verts[i][j] - verts[best][j]));
        if (std::isfinite(fvals[best]) &&
            (f_spread <= opts.f_tol * (1.0 + std::abs(fvals[best])) || x_spread <= opts.x_tol))
            break;

        for (std::size_t j = 0; j < dim; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i <= dim; ++i)
                if (i != worst)
                    s += verts[i][j];
            centroid[j] = s / static_cast<double>(dim);
        }

        for (std::size_t j = 0; j < dim; ++j)
            xr[j] = centroid[j] + (centroid[j] - verts[worst][j]);
        const double fr = eval(xr);

        if (fr < fvals[rank.front()]) {
            for (std::size_t j = 0; j < dim; ++j)
                xe[j] = centroid[j] + 2.0 * (centroid[j] - verts[worst][j]);
            const double fe = eval(xe);
            if (fe < fr) {
                verts[worst] = xe;
                fvals[worst] = fe;
            } else {
                verts[worst] = xr;
                fvals[worst] = fr;
            }
        } else if (fr < fvals[second_worst]) {
            verts[worst] = xr;
            fvals[worst] = fr;
        } else {
            const bool outside = fr < fvals[worst];
            if (outside) {
                for (std::size_t j = 0; j < dim; ++j)
                    xc[j] = centroid[j] + 0.5 * (xr[j] - centroid[j]);
            } else {
                for (std::size_t j = 0; j < dim; ++j)
                    xc[j] = centroid[j] + 0.5 * (verts[worst][j] - centroid[j]);
            }
            const double fc = eval(xc);
            if (fc < std::min(fr, fvals[worst])) {
                verts[worst] = xc;
                fvals[worst] = fc;
            } else {
                // shrink toward the best vertex
                for (std::size_t i = 0; i <= dim; ++i) {
                    if (i == best)
                        continue;
                    for (std::size_t j = 0; j < dim; ++j)
                        verts[i][j] = verts[best][j] + 0.5 * (verts[i][j] - verts[best][j]);
                    fvals[i] = eval(verts[i]);
                }
            }
        }
    }

    sort_rank();
    return NelderMeadResult{verts[rank.front()], fvals[rank.front()], evals};
}

} // namespace netq
