#include "tsproj/likelihood.hpp"

#include "tsproj/error.hpp"

#include <cmath>
#include <numbers>

namespace tsproj {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5 * log(2 pi)

void check_params(std::span<const double> series, const ArmaParams& params) {
    if (series.empty()) throw ArgumentError("log-likelihood: series must be non-empty");
    if (!(params.sigma > 0.0) || !std::isfinite(params.sigma)) {
        throw ArgumentError("log-likelihood: sigma must be positive");
    }
}

LogLikResult from_residuals(std::span<const double> eps, double sigma) {
    LogLikResult out;
    out.pointwise.resize(eps.size());
    const double log_sigma = std::log(sigma);
    for (std::size_t t = 0; t < eps.size(); ++t) {
        const double z = eps[t] / sigma;
        out.pointwise[t] = -kHalfLog2Pi - log_sigma - 0.5 * z * z;
        out.total += out.pointwise[t];
    }
    return out;
}

}  // namespace

double normal_logpdf(double x, double mean, double sd) {
    const double z = (x - mean) / sd;
    return -kHalfLog2Pi - std::log(sd) - 0.5 * z * z;
}

// ---------------------------------------------------------------------------

BandedLowerTriangular::BandedLowerTriangular(std::size_t dimension, std::size_t bandwidth)
    : dimension_(dimension), bands_(bandwidth + 1, std::vector<double>(dimension, 0.0)) {
    if (dimension == 0) throw ArgumentError("banded matrix: dimension must be positive");
    if (bandwidth >= dimension) throw ArgumentError("banded matrix: bandwidth must be smaller than dimension");
}

double BandedLowerTriangular::operator()(std::size_t row, std::size_t col) const {
    if (col > row || row - col > bandwidth()) return 0.0;
    return bands_[row - col][row];
}

void BandedLowerTriangular::set(std::size_t row, std::size_t col, double value) {
    if (col > row || row - col > bandwidth() || row >= dimension_) {
        throw ArgumentError("banded matrix: entry outside the band");
    }
    bands_[row - col][row] = value;
}

std::vector<double> BandedLowerTriangular::multiply(std::span<const double> x) const {
    if (x.size() != dimension_) throw ArgumentError("banded multiply: dimension mismatch");
    std::vector<double> out(dimension_, 0.0);
    const std::size_t k = bandwidth();
    for (std::size_t r = 0; r < dimension_; ++r) {
        double acc = 0.0;
        for (std::size_t d = 0; d <= k && d <= r; ++d) acc += bands_[d][r] * x[r - d];
        out[r] = acc;
    }
    return out;
}

std::vector<double> BandedLowerTriangular::solve(std::span<const double> rhs) const {
    if (rhs.size() != dimension_) throw ArgumentError("banded solve: dimension mismatch");
    std::vector<double> x(dimension_, 0.0);
    const std::size_t k = bandwidth();
    for (std::size_t r = 0; r < dimension_; ++r) {
        const double diag = bands_[0][r];
        if (diag == 0.0) throw ArgumentError("banded solve: zero on the diagonal");
        double acc = rhs[r];
        for (std::size_t d = 1; d <= k && d <= r; ++d) acc -= bands_[d][r] * x[r - d];
        x[r] = acc / diag;
    }
    return x;
}

Eigen::MatrixXd BandedLowerTriangular::dense() const {
    const auto n = static_cast<Eigen::Index>(dimension_);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t r = 0; r < dimension_; ++r) {
        for (std::size_t d = 0; d <= bandwidth() && d <= r; ++d) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(r - d)) = bands_[d][r];
        }
    }
    return m;
}

BandedLowerTriangular build_difference_matrix(std::span<const double> coefficients, LagPolynomial kind,
                                              std::size_t dimension) {
    if (coefficients.size() >= dimension) {
        throw ArgumentError("difference matrix: number of coefficients must be smaller than T");
    }
    BandedLowerTriangular h(dimension, coefficients.size());
    const double sign = kind == LagPolynomial::autoregressive ? -1.0 : 1.0;
    for (std::size_t r = 0; r < dimension; ++r) {
        h.set(r, r, 1.0);
        for (std::size_t i = 1; i <= coefficients.size() && i <= r; ++i) h.set(r, r - i, sign * coefficients[i - 1]);
    }
    return h;
}

// ---------------------------------------------------------------------------

LogLikResult arma_loglik_matrix(std::span<const double> series, const ArmaParams& params) {
    check_params(series, params);
    const std::size_t T = series.size();
    if (params.phi.size() >= T || params.theta.size() >= T) {
        // Higher lags never touch the observed window under zero initial conditions.
        ArmaParams truncated = params;
        if (truncated.phi.size() >= T) truncated.phi.resize(T - 1);
        if (truncated.theta.size() >= T) truncated.theta.resize(T - 1);
        return arma_loglik_matrix(series, truncated);
    }

    const auto h_phi = build_difference_matrix(params.phi, LagPolynomial::autoregressive, T);
    const auto h_theta = build_difference_matrix(params.theta, LagPolynomial::moving_average, T);

    // With L = sigma * H_phi^{-1} H_theta the covariance is Omega_y = L L^T, so
    // the whitened residual is eps / sigma with eps = H_theta^{-1} (H_phi y - c).
    std::vector<double> rhs = h_phi.multiply(series);
    for (double& v : rhs) v -= params.c;
    const std::vector<double> eps = h_theta.solve(rhs);

    // log|Omega_y| = T log sigma^2 because both H matrices have unit diagonals.
    return from_residuals(eps, params.sigma);
}

std::vector<double> arma_residuals(std::span<const double> series, const ArmaParams& params) {
    const std::size_t T = series.size();
    const std::size_t p = params.phi.size();
    const std::size_t q = params.theta.size();
    std::vector<double> eps(T, 0.0);
    for (std::size_t t = 0; t < T; ++t) {
        double e = series[t] - params.c;
        for (std::size_t i = 1; i <= p && i <= t; ++i) e -= params.phi[i - 1] * series[t - i];
        for (std::size_t j = 1; j <= q && j <= t; ++j) e -= params.theta[j - 1] * eps[t - j];
        eps[t] = e;
    }
    return eps;
}

LogLikResult arma_loglik_recursive(std::span<const double> series, const ArmaParams& params) {
    check_params(series, params);
    return from_residuals(arma_residuals(series, params), params.sigma);
}

Eigen::MatrixXd pointwise_loglik_matrix(std::span<const double> series, std::span<const ArmaParams> draws) {
    if (draws.empty()) throw ArgumentError("pointwise_loglik_matrix: at least one draw required");
    Eigen::MatrixXd out(static_cast<Eigen::Index>(draws.size()), static_cast<Eigen::Index>(series.size()));
    for (std::size_t s = 0; s < draws.size(); ++s) {
        const auto ll = arma_loglik_recursive(series, draws[s]);
        for (std::size_t t = 0; t < series.size(); ++t) {
            out(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t)) = ll.pointwise[t];
        }
    }
    return out;
}

}  // namespace tsproj
