#pragma once

#include "tsproj/posterior.hpp"
#include "tsproj/timeseries.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace tsproj::testing {

// Partial autocorrelations in (-bound, bound) mapped through Durbin-Levinson
// always give a stationary AR polynomial.
inline std::vector<double> random_stationary(std::mt19937_64& rng, int order, double bound = 0.9) {
    std::uniform_real_distribution<double> u(-bound, bound);
    std::vector<double> phi;
    for (int k = 0; k < order; ++k) {
        const double r = u(rng);
        std::vector<double> next(phi.size() + 1);
        for (std::size_t j = 0; j < phi.size(); ++j) next[j] = phi[j] - r * phi[phi.size() - 1 - j];
        next.back() = r;
        phi = std::move(next);
    }
    return phi;
}

inline ArmaParams random_arma(std::mt19937_64& rng, int p, int q) {
    std::uniform_real_distribution<double> c(-1.0, 1.0);
    std::uniform_real_distribution<double> s(0.5, 2.0);
    ArmaParams params;
    params.c = c(rng);
    params.phi = random_stationary(rng, p);
    for (double& t : random_stationary(rng, q)) params.theta.push_back(-t);
    params.sigma = s(rng);
    return params;
}

}  // namespace tsproj::testing

namespace tsproj::testing {

// A LinearModelFit with synthetic draws, for exercising downstream code without MCMC.
inline LinearModelFit synthetic_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& response, int draws,
                                    std::uint64_t seed, double coef_sd = 0.1) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    const Eigen::VectorXd ls = design.colPivHouseholderQr().solve(response);
    const double resid_sd = std::sqrt((response - design * ls).squaredNorm() / static_cast<double>(design.rows()));
    LinearModelFit fit;
    fit.design = design;
    fit.response = response;
    fit.draws.coefficients.resize(draws, design.cols());
    fit.draws.sigma.resize(draws);
    for (int s = 0; s < draws; ++s) {
        for (Eigen::Index j = 0; j < design.cols(); ++j) fit.draws.coefficients(s, j) = ls(j) + coef_sd * n(rng);
        fit.draws.sigma(s) = resid_sd * std::exp(0.05 * n(rng));
    }
    fit.draws.chains = 1;
    fit.draws.samples_per_chain = draws;
    for (Eigen::Index j = 1; j < design.cols(); ++j) fit.lags.push_back(static_cast<int>(j));
    return fit;
}

}  // namespace tsproj::testing
