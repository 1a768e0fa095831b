#pragma once

#include "tsproj/diagnostics.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace tsproj {

/// Student-t(location, scale, dof). An infinite dof means a Gaussian.
struct StudentT {
    double location = 0.0;
    double scale = 1.0;
    double dof = 3.0;
};

/**
 * Concrete prior for y = X beta + eps, eps ~ N(0, sigma^2):
 *   intercept ~ Student-t, slopes_j ~ N(0, coef_scales_j^2), sigma ~ half-Student-t(0, scale, dof).
 */
struct PriorSpec {
    std::vector<double> coef_scales;  // one per non-intercept column
    StudentT intercept;
    StudentT sigma;

    void validate(std::size_t columns) const;
};

/// Data-relative prior recipe resolved into a PriorSpec once the response is known.
struct PriorSettings {
    double coef_scale = 0.5;
    double intercept_scale_factor = 2.5;  // times sd(response)
    double intercept_dof = 3.0;
    double sigma_scale_factor = 1.0;      // times sd(response)
    double sigma_dof = 3.0;

    PriorSpec resolve(std::size_t columns, std::span<const double> response) const;
};

struct SamplerConfig {
    int chains = 4;
    int warmup = 1000;
    int samples = 1000;  // per chain, post-warmup
    std::uint64_t seed = 1;
    double rhat_threshold = 1.05;

    void validate() const;
};

struct PosteriorDraws {
    Eigen::MatrixXd coefficients;  // S x k, intercept first
    Eigen::VectorXd sigma;         // S
    std::vector<std::string> names;
    std::vector<ParameterDiagnostics> diagnostics;  // coefficients then sigma
    int chains = 0;
    int warmup = 0;
    int samples_per_chain = 0;
    std::uint64_t seed = 0;
    bool convergence_warning = false;
    int nonstationary_draws = -1;  // set by AR fits; -1 when not applicable

    Eigen::Index size() const noexcept { return sigma.size(); }
    Eigen::VectorXd coefficient_mean() const { return coefficients.colwise().mean().transpose(); }
    double max_rhat() const;
};

struct LinearModelFit {
    Eigen::MatrixXd design;
    Eigen::VectorXd response;
    PosteriorDraws draws;
    PriorSpec prior;
    std::vector<int> lags;  // lag of each non-intercept column, when the design is a lag design

    Eigen::MatrixXd fitted_means() const { return design * draws.coefficients.transpose(); }  // n x S
};

/**
 * Posterior draws of (beta, sigma) by Gibbs sampling: beta | sigma, lambda is
 * Gaussian (the Student-t intercept enters as a normal scale mixture with
 * auxiliary lambda), lambda | beta is inverse-gamma and log sigma is updated
 * by a stepping-out slice sampler. Chain c is seeded from (seed, c).
 *
 * Throws RankDeficiencyError when the design is rank deficient.
 */
LinearModelFit fit_bayes_linear(const Eigen::MatrixXd& design, const Eigen::VectorXd& response, const PriorSpec& prior,
                                const SamplerConfig& config, std::vector<std::string> names = {});

/// As fit_bayes_linear but without the rank check and allowing zero rows (prior sampling).
LinearModelFit sample_bayes_linear_unchecked(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                                             const PriorSpec& prior, const SamplerConfig& config,
                                             std::vector<std::string> names = {});

/// Columns that lie (numerically) in the span of the columns to their left.
std::vector<int> collinear_columns(const Eigen::MatrixXd& design, double tolerance = 1e-9);

/// Bayesian AR(p) on lag_design(series, p); columns [intercept, lag 1, ..., lag p].
LinearModelFit fit_ar(std::span<const double> series, int p, const PriorSettings& prior, const SamplerConfig& config);

/// Bayesian regression of `series` on its own values at `lags`.
LinearModelFit fit_lagged(std::span<const double> series, std::span<const int> lags, const PriorSettings& prior,
                          const SamplerConfig& config, std::size_t first_row = 0);

/// response - design * mean(coefficient draws).
Eigen::VectorXd posterior_mean_residuals(const LinearModelFit& fit);

/// One row per draw; header is the parameter names followed by "sigma".
void write_draws_csv(std::ostream& out, const PosteriorDraws& draws);

/// Number of fit_bayes_linear / sample_bayes_linear_unchecked calls made on this thread.
std::uint64_t mcmc_fit_count() noexcept;

}  // namespace tsproj
