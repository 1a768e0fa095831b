#pragma once

#include "tsproj/posterior.hpp"
#include "tsproj/projection.hpp"

#include <Eigen/Dense>

#include <span>

namespace tsproj {

struct PsisConfig {
    double tail_fraction = 0.2;    // tail length min(tail_fraction * S, tail_sqrt_factor * sqrt(S))
    double tail_sqrt_factor = 3.0;
    double k_threshold = 0.7;
};

struct ElpdEstimate {
    double elpd = 0.0;
    double se = 0.0;
    Eigen::VectorXd pointwise;
    Eigen::VectorXd pareto_k;
    bool reliability_warning = false;  // some pareto_k above the threshold

    Eigen::Index count_k_above(double threshold) const;
    double max_k() const;
};

/// elpd = sum(pointwise), se = sqrt(n * var(pointwise)).
ElpdEstimate make_elpd(Eigen::VectorXd pointwise);

struct GpdFit {
    double k = 0.0;
    double sigma = 0.0;
};

/// Generalized Pareto fit to ascending exceedances by the profile-likelihood
/// grid estimator, with the shape shrunk as (M k + 5) / (M + 10).
GpdFit fit_gpd_tail(std::span<const double> sorted_exceedances);

struct SmoothedLogWeights {
    Eigen::VectorXd log_weights;  // normalized: logsumexp = 0
    double pareto_k = 0.0;
};

/// Pareto-smoothed, truncated and normalized importance log weights.
SmoothedLogWeights psis_smooth(const Eigen::VectorXd& log_ratios, const PsisConfig& config = {});

/// PSIS-LOO from an S x T pointwise log-likelihood matrix.
ElpdEstimate psis_loo(const Eigen::MatrixXd& pointwise_loglik, const PsisConfig& config = {});

struct ElpdDiff {
    double diff = 0.0;
    double se = 0.0;
};

/// Paired difference a - b.
ElpdDiff elpd_diff(const ElpdEstimate& a, const ElpdEstimate& b);

/// Normal-approximation probability that elpd_reference - elpd_submodel <= 0,
/// given diff = elpd_submodel - elpd_reference.
double selection_probability(double diff, double se);

/// S x n matrix of Normal(response_t; x_t beta_s, sigma_s^2) log densities.
Eigen::MatrixXd linear_pointwise_loglik(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                                        const Eigen::MatrixXd& coefficients, const Eigen::VectorXd& sigma);

Eigen::MatrixXd pointwise_loglik(const LinearModelFit& fit);
Eigen::MatrixXd pointwise_loglik(const ProjectedSubmodel& submodel, const Eigen::VectorXd& response);

/// Brute-force LOO: refits the linear model once per left-out row.
ElpdEstimate exact_loo_brute(const Eigen::MatrixXd& design, const Eigen::VectorXd& response, const PriorSpec& prior,
                             const SamplerConfig& config);

}  // namespace tsproj
