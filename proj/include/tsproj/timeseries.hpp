#pragma once

#include <Eigen/Dense>

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tsproj {

/**
 * Ordered, finite, real-valued observations with an optional seasonal period.
 *
 * The constructor enforces the container invariants: at least one value, no
 * NaN/Inf, and `2 <= period < size()` when a period is given.
 */
class TimeSeries {
public:
    explicit TimeSeries(std::vector<double> values, std::optional<int> period = std::nullopt,
                        std::string name = {});

    std::span<const double> values() const noexcept { return values_; }
    const std::vector<double>& data() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }

    std::optional<int> period() const noexcept { return period_; }
    const std::string& name() const noexcept { return name_; }

    TimeSeries with_period(std::optional<int> period) const;
    TimeSeries scaled(double factor) const;

private:
    std::vector<double> values_;
    std::optional<int> period_;
    std::string name_;
};

struct ArmaOrder {
    int p = 0;
    int q = 0;

    auto operator<=>(const ArmaOrder&) const = default;
};

struct SarmaOrder {
    ArmaOrder nonseasonal;
    ArmaOrder seasonal;  // (P, Q)
    int s = 0;

    auto operator<=>(const SarmaOrder&) const = default;
};

// y_t = c + sum_i phi_i y_{t-i} + eps_t + sum_j theta_j eps_{t-j},  eps_t ~ N(0, sigma^2)
struct ArmaParams {
    double c = 0.0;
    std::vector<double> phi;
    std::vector<double> theta;
    double sigma = 1.0;

    ArmaOrder order() const { return {static_cast<int>(phi.size()), static_cast<int>(theta.size())}; }
};

// ---- lag polynomials -------------------------------------------------------

/// Coefficients of a(L) * b(L^stride), lowest power first.
std::vector<double> polynomial_product(std::span<const double> a, std::span<const double> b, int stride_b);

/// True iff every root of 1 - c_1 z - ... - c_k z^k has modulus > 1 + tolerance.
bool check_stationarity(std::span<const double> coefficients, double tolerance = 1e-8);

/// True iff every root of 1 + t_1 z + ... + t_q z^q has modulus > 1 + tolerance.
bool check_invertibility(std::span<const double> theta, double tolerance = 1e-8);

/// Moduli of the roots of 1 - c_1 z - ... - c_k z^k (companion-matrix eigenvalues).
std::vector<double> ar_root_moduli(std::span<const double> coefficients);

/// Expands phi(L)Phi(L^s) and theta(L)Theta(L^s) into a plain ARMA of
/// orders (p + sP, q + sQ). The intercept and sigma come from `nonseasonal`.
ArmaParams expand_sarma(const ArmaParams& nonseasonal, const ArmaParams& seasonal, int s);

// ---- simulation ------------------------------------------------------------

std::size_t default_burn_in(const ArmaParams& params);

TimeSeries simulate_arma(const ArmaParams& params, std::size_t length,
                         std::optional<std::size_t> burn_in, std::uint64_t seed);

TimeSeries simulate_sarma(const ArmaParams& nonseasonal, const ArmaParams& seasonal, int s,
                          std::size_t length, std::optional<std::size_t> burn_in, std::uint64_t seed);

// ---- differencing ----------------------------------------------------------

/// Applies (1 - L)^d (1 - L^s)^D. Output length is size - d - D*s.
TimeSeries difference(const TimeSeries& series, int d, int D, int s);

/// Differenced series plus the leading values dropped by each step, enough to
/// undo the differencing exactly.
struct DifferencedSeries {
    std::vector<double> values;
    std::vector<int> step_lags;                   // lag of each applied step, in order
    std::vector<std::vector<double>> step_heads;  // first `lag` values entering each step
};

DifferencedSeries difference_with_state(std::span<const double> values, int d, int D, int s);
std::vector<double> integrate(const DifferencedSeries& differenced);

// ---- correlation -----------------------------------------------------------

/// Biased (1/T) sample autocorrelation at lags 0..max_lag.
std::vector<double> sample_acf(std::span<const double> series, int max_lag);

/// Partial autocorrelation at lags 1..max_lag via Durbin-Levinson; element 0 is 1.
std::vector<double> sample_pacf(std::span<const double> series, int max_lag);

double sample_mean(std::span<const double> x);
double sample_sd(std::span<const double> x);  // n - 1 denominator

// ---- regression designs ----------------------------------------------------

struct LagDesign {
    Eigen::MatrixXd design;    // first column is the intercept
    Eigen::VectorXd response;
    std::vector<int> lags;     // lag of each non-intercept column
    std::size_t first_row = 0; // index into the series of the first response
};

/// Rows t = p..T-1 with columns [1, y_{t-1}, ..., y_{t-p}].
LagDesign lag_design(std::span<const double> series, int p);

/// General lag set; rows start at max(lags) unless `first_row` is larger.
LagDesign lag_design(std::span<const double> series, std::span<const int> lags, std::size_t first_row = 0);

/// Lags stride, 2*stride, ..., count*stride.
std::vector<int> strided_lags(int count, int stride);

}  // namespace tsproj
