#include "netq/gp.hpp"

#include "netq/errors.hpp"
#include "netq/nelder_mead.hpp"
#include "netq/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace netq {

void GPHyperparams::validate_and_floor() {
    if (!(sigma2 > 0.0) || !(theta1 > 0.0) || !(theta2 > 0.0) || !(noise2 > 0.0) ||
        !std::isfinite(sigma2) || !std::isfinite(theta1) || !std::isfinite(theta2) ||
        !std::isfinite(noise2))
        throw DataError("GP hyperparameters must be finite and positive");
    noise2 = std::max(noise2, jitter_floor_ratio * sigma2);
}

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& X, const Eigen::MatrixXd& X2,
                              const GPHyperparams& hyper) {
    const Eigen::Index m = X.rows(), p = X2.rows();
    Eigen::MatrixXd K(m, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        const double x2lon = X2(j, 0), x2lat = X2(j, 1);
        for (Eigen::Index i = 0; i < m; ++i) {
            const double dlon = X(i, 0) - x2lon;
            const double dlat = X(i, 1) - x2lat;
            K(i, j) = hyper.sigma2 *
                      std::exp(-hyper.theta1 * dlon * dlon - hyper.theta2 * dlat * dlat);
        }
    }
    return K;
}

namespace {

struct Factorization {
    Eigen::LLT<Eigen::MatrixXd> llt;
    double effective_noise2 = 0.0;
};

// Cholesky of K + noise2*I with tenfold jitter escalation up to 1e-2*sigma2.
Factorization chol_with_jitter(const Eigen::MatrixXd& K, double sigma2, double noise2) {
    const double ceiling = 1e-2 * sigma2;
    double jitter = noise2;
    Eigen::MatrixXd M;
    for (;;) {
        M = K;
        M.diagonal().array() += jitter;
        Eigen::LLT<Eigen::MatrixXd> llt(M);
        if (llt.info() == Eigen::Success)
            return Factorization{std::move(llt), jitter};
        if (jitter >= ceiling)
            throw NumericError("GP covariance not positive definite even at maximum jitter");
        jitter = std::min(jitter * 10.0, ceiling);
    }
}

double lml_from_factor(const Eigen::LLT<Eigen::MatrixXd>& llt, const Eigen::VectorXd& centered) {
    const Eigen::VectorXd alpha = llt.solve(centered);
    const double quad = centered.dot(alpha);
    const double logdet_half =
        Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
    const double m = static_cast<double>(centered.size());
    return -0.5 * quad - logdet_half - 0.5 * m * std::log(2.0 * std::numbers::pi);
}

} // namespace

double log_marginal_likelihood(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                               const GPHyperparams& hyper, std::optional<double> mu) {
    if (X.rows() < 1 || X.rows() != y.size())
        throw DataError("log_marginal_likelihood: need m >= 1 locations matching y");
    GPHyperparams h = hyper;
    h.validate_and_floor();
    const Eigen::MatrixXd K = kernel_matrix(X, X, h);
    const Factorization fac = chol_with_jitter(K, h.sigma2, h.noise2);
    const double mean = mu.value_or(y.mean());
    return lml_from_factor(fac.llt, y.array() - mean);
}

GPModel gp_build(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, GPHyperparams hyper) {
    if (X.rows() < 1 || X.rows() != y.size())
        throw DataError("gp_build: need m >= 1 locations matching y");
    hyper.validate_and_floor();

    GPModel model;
    model.mean_const = y.mean();
    const Eigen::MatrixXd K = kernel_matrix(X, X, hyper);
    Factorization fac = chol_with_jitter(K, hyper.sigma2, hyper.noise2);
    hyper.noise2 = fac.effective_noise2;

    const Eigen::VectorXd centered = y.array() - model.mean_const;
    model.hyper = hyper;
    model.X = X;
    model.alpha = fac.llt.solve(centered);
    model.chol_lower = fac.llt.matrixL();
    model.lml = lml_from_factor(fac.llt, centered);
    return model;
}

GPPrediction gp_predict(const GPModel& model, const Eigen::MatrixXd& Xstar, ExecMode mode) {
    const Eigen::Index p = Xstar.rows();
    const Eigen::Index m = model.X.rows();
    GPPrediction out;
    out.mean.resize(static_cast<std::size_t>(p));
    out.var.resize(static_cast<std::size_t>(p));
    out.var_clamped.assign(static_cast<std::size_t>(p), 0);

    const auto predict_one = [&](Eigen::Index j) {
        Eigen::VectorXd kstar(m);
        const double qlon = Xstar(j, 0), qlat = Xstar(j, 1);
        for (Eigen::Index i = 0; i < m; ++i) {
            const double dlon = model.X(i, 0) - qlon;
            const double dlat = model.X(i, 1) - qlat;
            kstar(i) = model.hyper.sigma2 *
                       std::exp(-model.hyper.theta1 * dlon * dlon -
                                model.hyper.theta2 * dlat * dlat);
        }
        out.mean[static_cast<std::size_t>(j)] = model.mean_const + kstar.dot(model.alpha);
        model.chol_lower.triangularView<Eigen::Lower>().solveInPlace(kstar);
        double v = model.hyper.sigma2 - kstar.squaredNorm();
        if (v < 0.0) {
            v = 0.0;
            out.var_clamped[static_cast<std::size_t>(j)] = 1;
        }
        out.var[static_cast<std::size_t>(j)] = v;
    };

    if (mode == ExecMode::Parallel) {
#pragma omp parallel for schedule(dynamic, 16)
        for (Eigen::Index j = 0; j < p; ++j)
            predict_one(j);
    } else {
        for (Eigen::Index j = 0; j < p; ++j)
            predict_one(j);
    }
    return out;
}

std::vector<GPHyperparams> gp_default_init_grid(const Eigen::MatrixXd& X,
                                                const Eigen::VectorXd& y) {
    double var_y = (y.array() - y.mean()).square().mean();
    if (!(var_y > 0.0))
        var_y = 1e-8; // constant targets: start tiny, the fit drives it further down
    const auto axis_theta = [&](int col) {
        const double span = X.col(col).maxCoeff() - X.col(col).minCoeff();
        return span > 0.0 ? 1.0 / (span * span) : 1.0;
    };
    const double t1 = axis_theta(0), t2 = axis_theta(1);
    return {
        GPHyperparams{var_y, t1, t2, 0.1 * var_y},
        GPHyperparams{var_y, 25.0 * t1, 25.0 * t2, 0.1 * var_y},
        GPHyperparams{var_y, t1 / 25.0, t2 / 25.0, 0.1 * var_y},
    };
}

GPModel gp_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
               const std::vector<GPHyperparams>& init_grid, std::size_t restarts,
               std::uint64_t seed, ExecMode mode) {
    if (X.rows() < 2 || X.rows() != y.size())
        throw DataError("gp_fit: need m >= 2 locations matching y");
    if (restarts < 1)
        throw DataError("gp_fit: restarts must be >= 1");

    std::vector<GPHyperparams> grid = init_grid;
    if (grid.empty())
        grid = gp_default_init_grid(X, y);

    const auto to_log = [](const GPHyperparams& h) {
        return std::vector<double>{std::log(h.sigma2), std::log(h.theta1), std::log(h.theta2),
                                   std::log(h.noise2)};
    };
    const auto from_log = [](const std::vector<double>& v) {
        GPHyperparams h{std::exp(v[0]), std::exp(v[1]), std::exp(v[2]), std::exp(v[3])};
        h.validate_and_floor();
        return h;
    };

    std::vector<std::vector<double>> starts;
    for (const GPHyperparams& h : grid) {
        GPHyperparams checked = h;
        checked.validate_and_floor();
        starts.push_back(to_log(checked));
    }
    {
        Rng rng(seed);
        const std::vector<double> base = starts.front();
        for (std::size_t r = 0; r < restarts; ++r) {
            std::vector<double> s = base;
            for (double& v : s)
                v += rng.normal(0.0, 1.0);
            starts.push_back(std::move(s));
        }
    }

    const double mu = y.mean();
    const auto objective = [&](const std::vector<double>& logp) -> double {
        try {
            const GPHyperparams h = from_log(logp);
            return -log_marginal_likelihood(X, y, h, mu);
        } catch (const NumericError&) {
            return std::numeric_limits<double>::infinity();
        }
    };

    struct StartResult {
        double best_f = std::numeric_limits<double>::infinity();
        std::vector<double> best_x;
    };
    std::vector<StartResult> results(starts.size());

    const auto run_start = [&](std::size_t s) {
        StartResult res;
        // track the best point over every evaluation, not just the final
        // simplex, so the returned LML dominates every start by construction
        const auto tracked = [&](const std::vector<double>& p) {
            const double f = objective(p);
            if (f < res.best_f) {
                res.best_f = f;
                res.best_x = p;
            }
            return f;
        };
        nelder_mead(tracked, starts[s], NelderMeadOptions{});
        results[s] = std::move(res);
    };

    if (mode == ExecMode::Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
        for (std::int64_t s = 0; s < static_cast<std::int64_t>(starts.size()); ++s)
            run_start(static_cast<std::size_t>(s));
    } else {
        for (std::size_t s = 0; s < starts.size(); ++s)
            run_start(s);
    }

    std::size_t winner = starts.size();
    double best_f = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < results.size(); ++s) {
        if (results[s].best_f < best_f) {
            best_f = results[s].best_f;
            winner = s;
        }
    }
    if (winner == starts.size())
        throw NumericError("gp_fit: every start failed to factorize");

    return gp_build(X, y, from_log(results[winner].best_x));
}

} // namespace netq
