#pragma once

#include "tsproj/timeseries.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace tsproj {

/**
 * Lower-triangular T x T matrix with `bandwidth` sub-diagonals, stored as
 * (bandwidth + 1) dense diagonals. Entry (row, row - k) lives in band(k)[row].
 */
class BandedLowerTriangular {
public:
    BandedLowerTriangular(std::size_t dimension, std::size_t bandwidth);

    std::size_t dimension() const noexcept { return dimension_; }
    std::size_t bandwidth() const noexcept { return bands_.size() - 1; }

    double operator()(std::size_t row, std::size_t col) const;
    void set(std::size_t row, std::size_t col, double value);

    std::vector<double> multiply(std::span<const double> x) const;
    /// Forward substitution, O(T * bandwidth). Requires a non-zero diagonal.
    std::vector<double> solve(std::span<const double> rhs) const;
    Eigen::MatrixXd dense() const;

private:
    std::size_t dimension_;
    std::vector<std::vector<double>> bands_;
};

enum class LagPolynomial {
    autoregressive,  // 1 - phi_1 L - ... : -phi_i on sub-diagonal i
    moving_average,  // 1 + theta_1 L + ...: +theta_j on sub-diagonal j
};

BandedLowerTriangular build_difference_matrix(std::span<const double> coefficients, LagPolynomial kind,
                                              std::size_t dimension);

struct LogLikResult {
    double total = 0.0;             // nats
    std::vector<double> pointwise;  // log p(y_t | y_{1:t-1}, params)
};

/// Conditional (zero initial state) Gaussian ARMA log-likelihood evaluated
/// through the stacked H_phi y = c + H_theta eps representation.
LogLikResult arma_loglik_matrix(std::span<const double> series, const ArmaParams& params);

/// Same likelihood computed by the residual recursion of the ARMA equation.
LogLikResult arma_loglik_recursive(std::span<const double> series, const ArmaParams& params);

/// Residuals eps_t of the zero-initial-condition recursion.
std::vector<double> arma_residuals(std::span<const double> series, const ArmaParams& params);

/// Row s holds arma_loglik_recursive(series, draws[s]).pointwise.
Eigen::MatrixXd pointwise_loglik_matrix(std::span<const double> series, std::span<const ArmaParams> draws);

double normal_logpdf(double x, double mean, double sd);

}  // namespace tsproj
