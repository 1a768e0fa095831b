#include "tsproj/timeseries.hpp"

#include "tsproj/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace tsproj {

TimeSeries::TimeSeries(std::vector<double> values, std::optional<int> period, std::string name)
    : values_(std::move(values)), period_(period), name_(std::move(name)) {
    if (values_.empty()) {
        throw ArgumentError("time series must contain at least one observation");
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            std::ostringstream os;
            os << "time series value at index " << i << " is not finite";
            throw ArgumentError(os.str());
        }
    }
    if (period_ && (*period_ < 2 || static_cast<std::size_t>(*period_) >= values_.size())) {
        std::ostringstream os;
        os << "seasonal period " << *period_ << " must satisfy 2 <= s < " << values_.size();
        throw ArgumentError(os.str());
    }
}

TimeSeries TimeSeries::with_period(std::optional<int> period) const {
    return TimeSeries(values_, period, name_);
}

TimeSeries TimeSeries::scaled(double factor) const {
    std::vector<double> out(values_);
    for (double& v : out) v *= factor;
    return TimeSeries(std::move(out), period_, name_);
}

// ---------------------------------------------------------------------------

std::vector<double> polynomial_product(std::span<const double> a, std::span<const double> b, int stride_b) {
    if (stride_b < 1) throw ArgumentError("polynomial_product: stride must be positive");
    if (a.empty() || b.empty()) throw ArgumentError("polynomial_product: empty polynomial");
    for (double v : a)
        if (!std::isfinite(v)) throw ArgumentError("polynomial_product: non-finite coefficient");
    for (double v : b)
        if (!std::isfinite(v)) throw ArgumentError("polynomial_product: non-finite coefficient");

    const std::size_t deg_a = a.size() - 1;
    const std::size_t deg_b = b.size() - 1;
    std::vector<double> out(deg_a + static_cast<std::size_t>(stride_b) * deg_b + 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            out[i + j * static_cast<std::size_t>(stride_b)] += a[i] * b[j];
        }
    }
    return out;
}

std::vector<double> ar_root_moduli(std::span<const double> coefficients) {
    std::size_t k = coefficients.size();
    while (k > 0 && coefficients[k - 1] == 0.0) --k;
    if (k == 0) return {};

    // Eigenvalues of the companion matrix are the reciprocals of the roots.
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    for (std::size_t j = 0; j < k; ++j) companion(0, static_cast<Eigen::Index>(j)) = coefficients[j];
    for (std::size_t i = 1; i < k; ++i) companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;

    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, /*computeEigenvectors=*/false);
    std::vector<double> moduli;
    moduli.reserve(k);
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
        const double lambda = std::abs(solver.eigenvalues()(i));
        moduli.push_back(lambda > 0.0 ? 1.0 / lambda : std::numeric_limits<double>::infinity());
    }
    std::sort(moduli.begin(), moduli.end());
    return moduli;
}

bool check_stationarity(std::span<const double> coefficients, double tolerance) {
    for (double v : coefficients)
        if (!std::isfinite(v)) throw ArgumentError("check_stationarity: non-finite coefficient");
    const auto moduli = ar_root_moduli(coefficients);
    return std::all_of(moduli.begin(), moduli.end(), [&](double m) { return m > 1.0 + tolerance; });
}

bool check_invertibility(std::span<const double> theta, double tolerance) {
    std::vector<double> negated(theta.begin(), theta.end());
    for (double& v : negated) v = -v;
    return check_stationarity(negated, tolerance);
}

ArmaParams expand_sarma(const ArmaParams& nonseasonal, const ArmaParams& seasonal, int s) {
    if (s < 2) throw ArgumentError("seasonal period must be at least 2");

    auto ar_poly = [](const std::vector<double>& c) {
        std::vector<double> poly{1.0};
        for (double v : c) poly.push_back(-v);
        return poly;
    };
    auto ma_poly = [](const std::vector<double>& c) {
        std::vector<double> poly{1.0};
        poly.insert(poly.end(), c.begin(), c.end());
        return poly;
    };

    const auto ar = polynomial_product(ar_poly(nonseasonal.phi), ar_poly(seasonal.phi), s);
    const auto ma = polynomial_product(ma_poly(nonseasonal.theta), ma_poly(seasonal.theta), s);

    ArmaParams out;
    out.c = nonseasonal.c;
    out.sigma = nonseasonal.sigma;
    out.phi.reserve(ar.size() - 1);
    for (std::size_t i = 1; i < ar.size(); ++i) out.phi.push_back(-ar[i]);
    out.theta.assign(ma.begin() + 1, ma.end());
    return out;
}

// ---------------------------------------------------------------------------

std::size_t default_burn_in(const ArmaParams& params) {
    return 10 * (params.phi.size() + params.theta.size() + 1) + 50;
}

TimeSeries simulate_arma(const ArmaParams& params, std::size_t length, std::optional<std::size_t> burn_in,
                         std::uint64_t seed) {
    if (length == 0) throw ArgumentError("simulate_arma: length must be at least 1");
    if (!(params.sigma > 0.0) || !std::isfinite(params.sigma)) {
        throw ArgumentError("simulate_arma: sigma must be positive");
    }
    if (!check_stationarity(params.phi)) {
        throw StationarityError("simulate_arma: AR polynomial has a root on or inside the unit circle");
    }

    const std::size_t burn = burn_in.value_or(default_burn_in(params));
    const std::size_t total = burn + length;
    const std::size_t p = params.phi.size();
    const std::size_t q = params.theta.size();

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, params.sigma);

    std::vector<double> y(total, 0.0);
    std::vector<double> eps(total, 0.0);
    for (std::size_t t = 0; t < total; ++t) {
        eps[t] = noise(rng);
        double value = params.c + eps[t];
        for (std::size_t i = 1; i <= p && i <= t; ++i) value += params.phi[i - 1] * y[t - i];
        for (std::size_t j = 1; j <= q && j <= t; ++j) value += params.theta[j - 1] * eps[t - j];
        y[t] = value;
    }
    return TimeSeries(std::vector<double>(y.begin() + static_cast<std::ptrdiff_t>(burn), y.end()));
}

TimeSeries simulate_sarma(const ArmaParams& nonseasonal, const ArmaParams& seasonal, int s, std::size_t length,
                          std::optional<std::size_t> burn_in, std::uint64_t seed) {
    if (s < 2) throw ArgumentError("simulate_sarma: seasonal period must be at least 2");
    if (!check_stationarity(seasonal.phi)) {
        throw StationarityError("simulate_sarma: seasonal AR polynomial is not stationary");
    }
    ArmaParams expanded = expand_sarma(nonseasonal, seasonal, s);
    // Zero seasonal terms must not change the default burn-in.
    auto trim = [](std::vector<double>& c, std::size_t keep) {
        while (c.size() > keep && c.back() == 0.0) c.pop_back();
    };
    trim(expanded.phi, nonseasonal.phi.size());
    trim(expanded.theta, nonseasonal.theta.size());
    TimeSeries out = simulate_arma(expanded, length, burn_in, seed);
    if (static_cast<std::size_t>(s) < out.size()) return out.with_period(s);
    return out;
}

// ---------------------------------------------------------------------------

DifferencedSeries difference_with_state(std::span<const double> values, int d, int D, int s) {
    if (d < 0 || D < 0) throw ArgumentError("difference: orders must be non-negative");
    if (D > 0 && s < 2) throw ArgumentError("difference: seasonal period must be at least 2");
    const long need = static_cast<long>(d) + static_cast<long>(D) * (D > 0 ? s : 0);
    if (static_cast<long>(values.size()) <= need) {
        std::ostringstream os;
        os << "difference: series of length " << values.size() << " too short for d=" << d << ", D=" << D
           << ", s=" << s;
        throw ArgumentError(os.str());
    }

    DifferencedSeries out;
    out.values.assign(values.begin(), values.end());
    auto apply = [&](int lag) {
        const auto L = static_cast<std::size_t>(lag);
        out.step_lags.push_back(lag);
        out.step_heads.emplace_back(out.values.begin(), out.values.begin() + lag);
        std::vector<double> next(out.values.size() - L);
        for (std::size_t i = 0; i < next.size(); ++i) next[i] = out.values[i + L] - out.values[i];
        out.values = std::move(next);
    };
    for (int i = 0; i < D; ++i) apply(s);
    for (int i = 0; i < d; ++i) apply(1);
    return out;
}

std::vector<double> integrate(const DifferencedSeries& differenced) {
    std::vector<double> x = differenced.values;
    for (std::size_t step = differenced.step_lags.size(); step-- > 0;) {
        const auto L = static_cast<std::size_t>(differenced.step_lags[step]);
        const auto& head = differenced.step_heads[step];
        std::vector<double> prev(x.size() + L);
        std::copy(head.begin(), head.end(), prev.begin());
        for (std::size_t i = 0; i < x.size(); ++i) prev[i + L] = x[i] + prev[i];
        x = std::move(prev);
    }
    return x;
}

TimeSeries difference(const TimeSeries& series, int d, int D, int s) {
    if (d == 0 && D == 0) return series;
    auto diffed = difference_with_state(series.values(), d, D, s);
    std::optional<int> period = series.period();
    if (period && static_cast<std::size_t>(*period) >= diffed.values.size()) period.reset();
    return TimeSeries(std::move(diffed.values), period, series.name());
}

// ---------------------------------------------------------------------------

double sample_mean(std::span<const double> x) {
    if (x.empty()) return 0.0;
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sample_sd(std::span<const double> x) {
    if (x.size() < 2) return 0.0;
    const double m = sample_mean(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

std::vector<double> sample_acf(std::span<const double> series, int max_lag) {
    if (max_lag < 0 || static_cast<std::size_t>(max_lag) >= series.size()) {
        throw ArgumentError("sample_acf: max_lag must be in [0, length)");
    }
    const std::size_t n = series.size();
    const double m = sample_mean(series);
    double c0 = 0.0;
    for (double v : series) c0 += (v - m) * (v - m);

    std::vector<double> acf(static_cast<std::size_t>(max_lag) + 1, 0.0);
    acf[0] = 1.0;
    if (c0 == 0.0) return acf;
    for (int k = 1; k <= max_lag; ++k) {
        double ck = 0.0;
        for (std::size_t t = static_cast<std::size_t>(k); t < n; ++t) {
            ck += (series[t] - m) * (series[t - static_cast<std::size_t>(k)] - m);
        }
        acf[static_cast<std::size_t>(k)] = ck / c0;
    }
    return acf;
}

std::vector<double> sample_pacf(std::span<const double> series, int max_lag) {
    const auto r = sample_acf(series, max_lag);
    std::vector<double> pacf(r.size(), 0.0);
    pacf[0] = 1.0;
    std::vector<double> phi_prev;
    for (int k = 1; k <= max_lag; ++k) {
        const auto K = static_cast<std::size_t>(k);
        double num = r[K];
        double den = 1.0;
        for (std::size_t j = 1; j < K; ++j) {
            num -= phi_prev[j - 1] * r[K - j];
            den -= phi_prev[j - 1] * r[j];
        }
        const double kk = den != 0.0 ? num / den : 0.0;
        std::vector<double> phi(K);
        for (std::size_t j = 1; j < K; ++j) phi[j - 1] = phi_prev[j - 1] - kk * phi_prev[K - j - 1];
        phi[K - 1] = kk;
        pacf[K] = std::clamp(kk, -1.0, 1.0);
        phi_prev = std::move(phi);
    }
    return pacf;
}

// ---------------------------------------------------------------------------

std::vector<int> strided_lags(int count, int stride) {
    std::vector<int> lags;
    lags.reserve(static_cast<std::size_t>(std::max(count, 0)));
    for (int i = 1; i <= count; ++i) lags.push_back(i * stride);
    return lags;
}

LagDesign lag_design(std::span<const double> series, std::span<const int> lags, std::size_t first_row) {
    std::size_t max_lag = 0;
    for (int lag : lags) {
        if (lag < 1) throw ArgumentError("lag_design: lags must be positive");
        max_lag = std::max(max_lag, static_cast<std::size_t>(lag));
    }
    const std::size_t start = std::max(max_lag, first_row);
    if (start >= series.size()) {
        std::ostringstream os;
        os << "lag_design: no rows remain (series length " << series.size() << ", first row " << start << ")";
        throw ArgumentError(os.str());
    }

    const auto rows = static_cast<Eigen::Index>(series.size() - start);
    const auto cols = static_cast<Eigen::Index>(lags.size() + 1);
    LagDesign out;
    out.design.resize(rows, cols);
    out.response.resize(rows);
    out.lags.assign(lags.begin(), lags.end());
    out.first_row = start;
    for (Eigen::Index r = 0; r < rows; ++r) {
        const std::size_t t = start + static_cast<std::size_t>(r);
        out.response(r) = series[t];
        out.design(r, 0) = 1.0;
        for (std::size_t j = 0; j < lags.size(); ++j) {
            out.design(r, static_cast<Eigen::Index>(j + 1)) = series[t - static_cast<std::size_t>(lags[j])];
        }
    }
    return out;
}

LagDesign lag_design(std::span<const double> series, int p) {
    if (p < 0) throw ArgumentError("lag_design: order must be non-negative");
    const std::vector<int> lags = strided_lags(p, 1);
    return lag_design(series, lags);
}

}  // namespace tsproj
