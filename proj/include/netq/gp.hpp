#pragma once

#include "netq/exec.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

namespace netq {

/// Anisotropic squared-exponential kernel hyperparameters:
///   k(x, x') = sigma2 * exp(-theta1 * dlon^2 - theta2 * dlat^2)
/// plus an observation noise variance on the diagonal.
struct GPHyperparams {
    double sigma2 = 1.0;
    double theta1 = 1.0;
    double theta2 = 1.0;
    double noise2 = 1e-2;

    static constexpr double jitter_floor_ratio = 1e-8; // noise2 >= ratio * sigma2
    void validate_and_floor();
};

/// Entry (i, j) = k(X.row(i), X2.row(j)). X is m x 2, X2 is p x 2.
Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& X, const Eigen::MatrixXd& X2,
                              const GPHyperparams& hyper);

/// Gaussian log marginal likelihood of y under the kernel with constant mean
/// mu (default: mean of y), computed through the Cholesky factor only. If the
/// factorization fails the noise term is escalated tenfold up to 1e-2*sigma2
/// before giving up with a NumericError.
double log_marginal_likelihood(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                               const GPHyperparams& hyper,
                               std::optional<double> mu = std::nullopt);

struct GPModel {
    GPHyperparams hyper; // noise2 reflects any jitter escalation applied
    Eigen::MatrixXd X;   // m x 2 training locations
    Eigen::VectorXd alpha;
    Eigen::MatrixXd chol_lower;
    double mean_const = 0.0;
    double lml = 0.0; // log marginal likelihood at the fitted hyperparameters
};

struct GPPrediction {
    std::vector<double> mean;
    std::vector<double> var;
    std::vector<std::uint8_t> var_clamped; // 1 where round-off drove var below 0
};

/// Posterior predictive mean and variance at each row of Xstar, via
/// triangular solves against the cached factor. Variances land in [0, sigma2];
/// tiny negatives from round-off are clamped and flagged.
GPPrediction gp_predict(const GPModel& model, const Eigen::MatrixXd& Xstar,
                        ExecMode mode = ExecMode::Parallel);

/// Builds the cached factorization and alpha at fixed hyperparameters.
GPModel gp_build(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, GPHyperparams hyper);

/// Maximum-likelihood fit over log(sigma2, theta1, theta2, noise2) with a
/// Nelder-Mead simplex started from every point of init_grid plus `restarts`
/// seeded random perturbations of the first start. Returns the model with the
/// highest log marginal likelihood seen across every objective evaluation, so
/// the result is never worse than any evaluated start.
GPModel gp_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
               const std::vector<GPHyperparams>& init_grid, std::size_t restarts,
               std::uint64_t seed, ExecMode mode = ExecMode::Parallel);

/// Data-scale-derived default starts for gp_fit.
std::vector<GPHyperparams> gp_default_init_grid(const Eigen::MatrixXd& X,
                                                const Eigen::VectorXd& y);

} // namespace netq
