#include <catch_amalgamated.hpp>

#include "tsproj/error.hpp"
#include "tsproj/posterior.hpp"
#include "tsproj/timeseries.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

using namespace tsproj;
using Catch::Approx;

namespace {

SamplerConfig sampler(std::uint64_t seed, int samples = 1000) {
    SamplerConfig c;
    c.seed = seed;
    c.warmup = 500;
    c.samples = samples;
    return c;
}

double log_half_t(double x, const StudentT& t) {
    const double z = (x - t.location) / t.scale;
    return -0.5 * (t.dof + 1.0) * std::log1p(z * z / t.dof);
}

// Posterior mean of beta with Gaussian coefficient priors (intercept included)
// and a half-t sigma prior, by quadrature over log sigma. Given sigma the model
// is conjugate: y ~ N(0, sigma^2 I + X D X'), beta | sigma, y has a closed form.
Eigen::VectorXd quadrature_posterior_mean(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const PriorSpec& prior) {
    const auto n = X.rows();
    const auto k = X.cols();
    Eigen::VectorXd d(k);
    d(0) = prior.intercept.scale * prior.intercept.scale;
    for (Eigen::Index j = 1; j < k; ++j) d(j) = prior.coef_scales[static_cast<std::size_t>(j - 1)] * prior.coef_scales[static_cast<std::size_t>(j - 1)];
    const Eigen::MatrixXd XDX = X * d.asDiagonal() * X.transpose();

    const int grid = 3000;
    const double lo = std::log(prior.sigma.scale) - 8.0;
    const double hi = std::log(prior.sigma.scale) + 4.0;
    std::vector<double> logw(grid);
    std::vector<Eigen::VectorXd> cond(grid);
    for (int g = 0; g < grid; ++g) {
        const double ls = lo + (hi - lo) * (g + 0.5) / grid;
        const double s2 = std::exp(2.0 * ls);
        Eigen::MatrixXd cov = XDX;
        cov.diagonal().array() += s2;
        Eigen::LLT<Eigen::MatrixXd> llt(cov);
        const Eigen::VectorXd alpha = llt.solve(y);
        const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
        logw[static_cast<std::size_t>(g)] = -0.5 * (logdet + y.dot(alpha)) + log_half_t(std::exp(ls), prior.sigma) + ls;
        Eigen::MatrixXd prec = X.transpose() * X / s2;
        prec.diagonal() += d.cwiseInverse();
        cond[static_cast<std::size_t>(g)] = prec.ldlt().solve(X.transpose() * y / s2);
        (void)n;
    }
    const double m = *std::max_element(logw.begin(), logw.end());
    double total = 0.0;
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(k);
    for (int g = 0; g < grid; ++g) {
        const double w = std::exp(logw[static_cast<std::size_t>(g)] - m);
        total += w;
        mean += w * cond[static_cast<std::size_t>(g)];
    }
    return mean / total;
}

}  // namespace

TEST_CASE("posterior means match a quadrature oracle", "[posterior][oracle]") {
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> nrm(0.0, 1.0);
    std::uniform_int_distribution<int> rows(15, 40);
    std::uniform_int_distribution<int> cols(1, 3);
    int checked = 0;
    for (int problem = 0; problem < 20; ++problem) {
        const int n = rows(rng);
        const int k = cols(rng) + 1;
        Eigen::MatrixXd X(n, k);
        for (int i = 0; i < n; ++i) {
            X(i, 0) = 1.0;
            for (int j = 1; j < k; ++j) X(i, j) = nrm(rng);
        }
        Eigen::VectorXd beta(k);
        for (int j = 0; j < k; ++j) beta(j) = 0.7 * nrm(rng);
        Eigen::VectorXd y = X * beta;
        const double noise = 0.5 + std::abs(nrm(rng));
        for (int i = 0; i < n; ++i) y(i) += noise * nrm(rng);

        PriorSpec prior;
        prior.coef_scales.assign(static_cast<std::size_t>(k - 1), 0.5 + 0.5 * problem / 20.0);
        prior.intercept = {0.0, 2.0, std::numeric_limits<double>::infinity()};
        prior.sigma = {0.0, 1.5, 3.0};

        const auto fit = fit_bayes_linear(X, y, prior, sampler(100 + static_cast<std::uint64_t>(problem)));
        const auto oracle = quadrature_posterior_mean(X, y, prior);
        const auto mean = fit.draws.coefficient_mean();
        for (int j = 0; j < k; ++j) {
            const auto col = fit.draws.coefficients.col(j);
            const double sd = std::sqrt((col.array() - col.mean()).square().sum() / static_cast<double>(col.size() - 1));
            const double ess = fit.draws.diagnostics[static_cast<std::size_t>(j)].ess;
            const double mcse = sd / std::sqrt(ess);
            INFO("problem " << problem << " coefficient " << j << " sampler " << mean(j) << " oracle " << oracle(j)
                            << " mcse " << mcse);
            REQUIRE(std::abs(mean(j) - oracle(j)) <= 3.0 * mcse);
            ++checked;
        }
    }
    REQUIRE(checked >= 40);
}

TEST_CASE("intercept-only signal", "[posterior]") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nrm(0.0, 1.0);
    Eigen::MatrixXd X(500, 2);
    Eigen::VectorXd y(500);
    for (int i = 0; i < 500; ++i) {
        X(i, 0) = 1.0;
        X(i, 1) = nrm(rng);
        y(i) = 2.0 + nrm(rng);
    }
    PriorSpec prior{{10.0}, {0.0, 25.0, 3.0}, {0.0, 5.0, 3.0}};
    const auto fit = fit_bayes_linear(X, y, prior, sampler(1));
    const auto c = fit.draws.coefficients.col(0);
    const double sd = std::sqrt((c.array() - c.mean()).square().mean());
    REQUIRE(std::abs(c.mean() - 2.0) <= 3.0 * sd);
    REQUIRE(std::abs(fit.draws.coefficients.col(1).mean()) < 0.15);
    REQUIRE((fit.draws.sigma.array() > 0.0).all());
    REQUIRE(fit.draws.size() == 4000);
    REQUIRE_FALSE(fit.draws.convergence_warning);
}

TEST_CASE("a vanishing prior scale pins the slope at zero", "[posterior]") {
    std::mt19937_64 rng(6);
    std::normal_distribution<double> nrm(0.0, 1.0);
    Eigen::MatrixXd X(100, 2);
    Eigen::VectorXd y(100);
    for (int i = 0; i < 100; ++i) {
        X(i, 0) = 1.0;
        X(i, 1) = nrm(rng);
        y(i) = 1.0 + 3.0 * X(i, 1) + nrm(rng);
    }
    PriorSpec prior{{1e-8}, {0.0, 10.0, 3.0}, {0.0, 5.0, 3.0}};
    const auto fit = fit_bayes_linear(X, y, prior, sampler(2, 300));
    REQUIRE(fit.draws.coefficients.col(1).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("fits are deterministic in the seed", "[posterior]") {
    const auto y = simulate_arma({0.0, {0.5}, {}, 1.0}, 120, std::nullopt, 4);
    const auto a = fit_ar(y.values(), 2, {}, sampler(9, 200));
    const auto b = fit_ar(y.values(), 2, {}, sampler(9, 200));
    const auto c = fit_ar(y.values(), 2, {}, sampler(10, 200));
    REQUIRE(a.draws.coefficients == b.draws.coefficients);
    REQUIRE(a.draws.sigma == b.draws.sigma);
    REQUIRE(a.draws.coefficients != c.draws.coefficients);
}

TEST_CASE("rank deficiency names the collinear columns", "[posterior]") {
    Eigen::MatrixXd X(20, 4);
    for (int i = 0; i < 20; ++i) {
        X(i, 0) = 1.0;
        X(i, 1) = i;
        X(i, 2) = 2.0 * i + 1.0;
        X(i, 3) = std::sin(i);
    }
    const Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(20, 0.0, 1.0);
    PriorSpec prior{{1.0, 1.0, 1.0}, {0.0, 1.0, 3.0}, {0.0, 1.0, 3.0}};
    try {
        fit_bayes_linear(X, y, prior, sampler(1, 100));
        FAIL("expected RankDeficiencyError");
    } catch (const RankDeficiencyError& e) {
        REQUIRE(e.columns() == std::vector<int>{2});
    }
    REQUIRE_THROWS_AS(fit_bayes_linear(X.topRows(3), y.head(3), prior, sampler(1, 100)), ArgumentError);
}

TEST_CASE("prior settings resolve against the response scale", "[posterior]") {
    const std::vector<double> y{1, 2, 3, 4, 5};
    const auto spec = PriorSettings{}.resolve(3, y);
    REQUIRE(spec.coef_scales == std::vector<double>{0.5, 0.5});
    REQUIRE(spec.intercept.scale == Approx(2.5 * sample_sd(y)));
    REQUIRE(spec.intercept.dof == 3.0);
    REQUIRE(spec.sigma.scale == Approx(sample_sd(y)));
}

TEST_CASE("AR fits", "[posterior][ar]") {
    const auto y = simulate_arma({0.0, {0.8}, {}, 1.0}, 500, std::nullopt, 77);
    const auto fit = fit_ar(y.values(), 1, {}, sampler(3));
    REQUIRE(fit.draws.names == std::vector<std::string>{"intercept", "lag1"});
    const auto phi = fit.draws.coefficients.col(1);
    const double sd = std::sqrt((phi.array() - phi.mean()).square().mean());
    REQUIRE(std::abs(phi.mean() - 0.8) <= 3.0 * sd);
    REQUIRE(fit.draws.nonstationary_draws >= 0);

    const auto mean_only = fit_ar(y.values(), 0, {}, sampler(3, 200));
    REQUIRE(mean_only.design.cols() == 1);
    REQUIRE(mean_only.design.rows() == 500);

    REQUIRE_THROWS_AS(fit_ar(y.values(), 500, {}, sampler(3, 100)), ArgumentError);
    REQUIRE_THROWS_AS(fit_ar(y.values(), 495, {}, sampler(3, 100)), ArgumentError);
}

TEST_CASE("posterior mean residuals", "[posterior][residuals]") {
    const auto y = simulate_arma({2.0, {}, {}, 1.0}, 200, std::nullopt, 15);
    const auto fit = fit_ar(y.values(), 0, {}, sampler(4, 300));
    const auto r = posterior_mean_residuals(fit);
    const double c = fit.draws.coefficient_mean()(0);
    REQUIRE(r.size() == 200);
    for (Eigen::Index i = 0; i < r.size(); ++i) REQUIRE(r(i) == Approx(y[static_cast<std::size_t>(i)] - c).margin(1e-12));

    // remaining MA structure shows up in the residual autocorrelation
    const auto arma = simulate_arma({0.0, {0.5}, {0.7}, 1.0}, 400, std::nullopt, 16);
    const auto ar1 = fit_ar(arma.values(), 1, {}, sampler(5, 300));
    const Eigen::VectorXd res = posterior_mean_residuals(ar1);
    const auto acf = sample_acf(std::span<const double>(res.data(), static_cast<std::size_t>(res.size())), 1);
    REQUIRE(std::abs(acf[1]) > 3.0 / std::sqrt(static_cast<double>(res.size())));

    // response almost in the column span
    std::mt19937_64 rng(17);
    std::normal_distribution<double> nrm(0.0, 1e-5);
    Eigen::MatrixXd X(30, 2);
    Eigen::VectorXd lin(30);
    for (int i = 0; i < 30; ++i) {
        X(i, 0) = 1.0;
        X(i, 1) = i / 10.0;
        lin(i) = 0.5 + 0.3 * X(i, 1) + nrm(rng);
    }
    PriorSpec wide{{5.0}, {0.0, 5.0, 3.0}, {0.0, 1.0, 3.0}};
    const auto exact = fit_bayes_linear(X, lin, wide, sampler(6, 300));
    REQUIRE(posterior_mean_residuals(exact).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("draws csv", "[posterior]") {
    const auto y = simulate_arma({0.0, {0.5}, {}, 1.0}, 60, std::nullopt, 4);
    const auto fit = fit_ar(y.values(), 1, {}, sampler(9, 20));
    std::ostringstream os;
    write_draws_csv(os, fit.draws);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    REQUIRE(line == "intercept,lag1,sigma");
    int rows = 0;
    while (std::getline(is, line)) ++rows;
    REQUIRE(rows == 80);
}

TEST_CASE("fit counter", "[posterior]") {
    const auto before = mcmc_fit_count();
    const auto y = simulate_arma({0.0, {0.5}, {}, 1.0}, 60, std::nullopt, 4);
    fit_ar(y.values(), 1, {}, sampler(9, 20));
    fit_ar(y.values(), 2, {}, sampler(9, 20));
    REQUIRE(mcmc_fit_count() - before == 2);
}
