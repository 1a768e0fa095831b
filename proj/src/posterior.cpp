#include "tsproj/posterior.hpp"

#include "tsproj/error.hpp"
#include "tsproj/timeseries.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

namespace tsproj {

namespace {

thread_local std::uint64_t g_fit_count = 0;

std::vector<std::string> default_names(Eigen::Index columns) {
    std::vector<std::string> names{"intercept"};
    for (Eigen::Index j = 1; j < columns; ++j) names.push_back("b" + std::to_string(j));
    return names;
}

std::vector<std::string> lag_names(std::span<const int> lags) {
    std::vector<std::string> names{"intercept"};
    for (int lag : lags) names.push_back("lag" + std::to_string(lag));
    return names;
}

// log density of half-Student-t(0, scale, dof) at x > 0, up to a constant.
double log_half_t(double x, const StudentT& prior) {
    const double z = x / prior.scale;
    if (std::isinf(prior.dof)) return -0.5 * z * z;
    return -0.5 * (prior.dof + 1.0) * std::log1p(z * z / prior.dof);
}

struct SufficientStats {
    Eigen::MatrixXd xtx;
    Eigen::VectorXd xty;
    double yty = 0.0;
    double n = 0.0;

    double rss(const Eigen::VectorXd& beta) const {
        const double value = yty - 2.0 * beta.dot(xty) + beta.dot(xtx * beta);
        return std::max(value, 0.0);
    }
};

class GibbsChain {
public:
    GibbsChain(const SufficientStats& stats, const PriorSpec& prior, std::uint64_t seed, std::uint64_t chain,
               double response_scale)
        : stats_(stats), prior_(prior), k_(stats.xtx.rows()) {
        std::seed_seq seq{seed, chain, std::uint64_t{0x9e3779b97f4a7c15ULL}};
        rng_.seed(seq);

        prior_prec_ = Eigen::VectorXd(k_);
        prior_mean_ = Eigen::VectorXd::Zero(k_);
        prior_mean_(0) = prior.intercept.location;
        for (Eigen::Index j = 1; j < k_; ++j) {
            const double s = prior.coef_scales[static_cast<std::size_t>(j - 1)];
            prior_prec_(j) = 1.0 / (s * s);
        }

        // Over-dispersed start around a ridge solution.
        Eigen::MatrixXd ridge = stats.xtx;
        ridge.diagonal().array() += 1e-6 + 1e-3 * stats.n;
        beta_ = ridge.ldlt().solve(stats.xty);
        std::normal_distribution<double> jitter(0.0, 1.0);
        for (Eigen::Index j = 0; j < k_; ++j) {
            const double scale = j == 0 ? std::max(response_scale, 1e-8) : prior.coef_scales[static_cast<std::size_t>(j - 1)];
            beta_(j) += 0.2 * scale * jitter(rng_);
        }
        std::uniform_real_distribution<double> u(-0.5, 0.5);
        log_sigma_ = std::log(std::max(response_scale, 1e-8)) + u(rng_);
        lambda_ = 1.0;
    }

    void step() {
        draw_beta();
        draw_lambda();
        draw_log_sigma();
    }

    const Eigen::VectorXd& beta() const { return beta_; }
    double sigma() const { return std::exp(log_sigma_); }

private:
    void draw_beta() {
        const double inv_var = std::exp(-2.0 * log_sigma_);
        const double intercept_scale = prior_.intercept.scale;
        prior_prec_(0) = 1.0 / (lambda_ * intercept_scale * intercept_scale);

        Eigen::MatrixXd precision = stats_.xtx * inv_var;
        precision.diagonal() += prior_prec_;
        const Eigen::VectorXd rhs = stats_.xty * inv_var + prior_prec_.cwiseProduct(prior_mean_);
        const Eigen::LLT<Eigen::MatrixXd> llt(precision);
        const Eigen::VectorXd mean = llt.solve(rhs);
        Eigen::VectorXd z(k_);
        for (Eigen::Index j = 0; j < k_; ++j) z(j) = normal_(rng_);
        // precision = L L^T, so L^{-T} z has covariance precision^{-1}.
        beta_ = mean + llt.matrixU().solve(z);
    }

    void draw_lambda() {
        const double dof = prior_.intercept.dof;
        if (std::isinf(dof)) return;
        const double z = (beta_(0) - prior_.intercept.location) / prior_.intercept.scale;
        const double shape = 0.5 * (dof + 1.0);
        const double rate = 0.5 * (dof + z * z);
        std::gamma_distribution<double> gamma(shape, 1.0 / rate);
        lambda_ = 1.0 / std::max(gamma(rng_), std::numeric_limits<double>::min());
    }

    double log_target(double u, double rss) const {
        // p(log sigma | beta) including the Jacobian of sigma = exp(u).
        const double sigma = std::exp(u);
        return -stats_.n * u - 0.5 * rss * std::exp(-2.0 * u) + log_half_t(sigma, prior_.sigma) + u;
    }

    void draw_log_sigma() {
        const double rss = stats_.rss(beta_);
        constexpr double width = 1.0;
        constexpr int max_steps = 64;
        std::uniform_real_distribution<double> unif(0.0, 1.0);

        const double x0 = log_sigma_;
        const double threshold = log_target(x0, rss) + std::log(unif(rng_));
        double left = x0 - width * unif(rng_);
        double right = left + width;
        for (int i = 0; i < max_steps && log_target(left, rss) > threshold; ++i) left -= width;
        for (int i = 0; i < max_steps && log_target(right, rss) > threshold; ++i) right += width;

        for (;;) {
            const double x1 = left + (right - left) * unif(rng_);
            if (log_target(x1, rss) > threshold) {
                log_sigma_ = x1;
                return;
            }
            if (x1 < x0) left = x1;
            else right = x1;
            if (right - left < 1e-14) {
                log_sigma_ = x0;
                return;
            }
        }
    }

    const SufficientStats& stats_;
    const PriorSpec& prior_;
    Eigen::Index k_;
    std::mt19937_64 rng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    Eigen::VectorXd prior_prec_;
    Eigen::VectorXd prior_mean_;
    Eigen::VectorXd beta_;
    double log_sigma_ = 0.0;
    double lambda_ = 1.0;
};

int count_nonstationary(const PosteriorDraws& draws, std::span<const int> lags) {
    if (lags.empty()) return 0;
    const int max_lag = *std::max_element(lags.begin(), lags.end());
    std::vector<double> poly(static_cast<std::size_t>(max_lag), 0.0);
    int count = 0;
    for (Eigen::Index s = 0; s < draws.size(); ++s) {
        std::fill(poly.begin(), poly.end(), 0.0);
        for (std::size_t j = 0; j < lags.size(); ++j) {
            poly[static_cast<std::size_t>(lags[j] - 1)] += draws.coefficients(s, static_cast<Eigen::Index>(j + 1));
        }
        if (!check_stationarity(poly)) ++count;
    }
    return count;
}

}  // namespace

// ---------------------------------------------------------------------------

void PriorSpec::validate(std::size_t columns) const {
    if (columns == 0) throw ArgumentError("prior: design needs an intercept column");
    if (coef_scales.size() != columns - 1) {
        std::ostringstream os;
        os << "prior: expected " << columns - 1 << " coefficient scales, got " << coef_scales.size();
        throw ArgumentError(os.str());
    }
    for (double s : coef_scales)
        if (!(s > 0.0) || !std::isfinite(s)) throw ArgumentError("prior: coefficient scales must be positive");
    if (!(intercept.scale > 0.0) || !(intercept.dof > 0.0)) throw ArgumentError("prior: invalid intercept prior");
    if (!(sigma.scale > 0.0) || !(sigma.dof > 0.0)) throw ArgumentError("prior: invalid sigma prior");
}

PriorSpec PriorSettings::resolve(std::size_t columns, std::span<const double> response) const {
    double sd = sample_sd(response);
    if (!(sd > 0.0)) sd = 1.0;
    PriorSpec spec;
    spec.coef_scales.assign(columns > 0 ? columns - 1 : 0, coef_scale);
    spec.intercept = {0.0, intercept_scale_factor * sd, intercept_dof};
    spec.sigma = {0.0, sigma_scale_factor * sd, sigma_dof};
    return spec;
}

void SamplerConfig::validate() const {
    if (chains < 1) throw ArgumentError("sampler: chains must be at least 1");
    if (warmup < 0) throw ArgumentError("sampler: warmup must be non-negative");
    if (samples < 4) throw ArgumentError("sampler: at least 4 samples per chain required");
}

double PosteriorDraws::max_rhat() const {
    double m = 1.0;
    for (const auto& d : diagnostics) m = std::max(m, d.rhat);
    return m;
}

std::uint64_t mcmc_fit_count() noexcept { return g_fit_count; }

std::vector<int> collinear_columns(const Eigen::MatrixXd& design, double tolerance) {
    std::vector<int> bad;
    std::vector<Eigen::VectorXd> basis;
    for (Eigen::Index j = 0; j < design.cols(); ++j) {
        Eigen::VectorXd v = design.col(j);
        const double norm0 = v.norm();
        if (norm0 == 0.0) {
            bad.push_back(static_cast<int>(j));
            continue;
        }
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& b : basis) v -= b.dot(v) * b;
        const double norm = v.norm();
        if (norm <= tolerance * norm0) {
            bad.push_back(static_cast<int>(j));
        } else {
            basis.push_back(v / norm);
        }
    }
    return bad;
}

LinearModelFit sample_bayes_linear_unchecked(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                                             const PriorSpec& prior, const SamplerConfig& config,
                                             std::vector<std::string> names) {
    config.validate();
    prior.validate(static_cast<std::size_t>(design.cols()));
    if (design.rows() != response.size()) throw ArgumentError("fit: design rows must match response length");
    if (names.empty()) names = default_names(design.cols());
    if (names.size() != static_cast<std::size_t>(design.cols())) throw ArgumentError("fit: wrong number of names");
    ++g_fit_count;

    SufficientStats stats;
    stats.xtx = design.transpose() * design;
    stats.xty = design.transpose() * response;
    stats.yty = response.squaredNorm();
    stats.n = static_cast<double>(response.size());

    const Eigen::Index k = design.cols();
    const auto per_chain = static_cast<Eigen::Index>(config.samples);
    const Eigen::Index total = per_chain * config.chains;
    const double response_scale = response.size() > 1
        ? std::sqrt((response.array() - response.mean()).square().sum() / static_cast<double>(response.size() - 1))
        : prior.sigma.scale;

    LinearModelFit fit;
    fit.design = design;
    fit.response = response;
    fit.prior = prior;
    auto& draws = fit.draws;
    draws.coefficients.resize(total, k);
    draws.sigma.resize(total);
    draws.names = std::move(names);
    draws.chains = config.chains;
    draws.warmup = config.warmup;
    draws.samples_per_chain = config.samples;
    draws.seed = config.seed;

    for (int c = 0; c < config.chains; ++c) {
        GibbsChain chain(stats, prior, config.seed, static_cast<std::uint64_t>(c),
                         response_scale > 0.0 ? response_scale : prior.sigma.scale);
        for (int i = 0; i < config.warmup; ++i) chain.step();
        for (Eigen::Index i = 0; i < per_chain; ++i) {
            chain.step();
            const Eigen::Index row = c * per_chain + i;
            draws.coefficients.row(row) = chain.beta().transpose();
            draws.sigma(row) = chain.sigma();
        }
    }

    auto chains_of = [&](auto&& column) {
        std::vector<std::vector<double>> out(static_cast<std::size_t>(config.chains));
        for (int c = 0; c < config.chains; ++c) {
            out[static_cast<std::size_t>(c)].resize(static_cast<std::size_t>(per_chain));
            for (Eigen::Index i = 0; i < per_chain; ++i) {
                out[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)] = column(c * per_chain + i);
            }
        }
        return out;
    };
    for (Eigen::Index j = 0; j < k; ++j) {
        const auto chains = chains_of([&](Eigen::Index r) { return draws.coefficients(r, j); });
        draws.diagnostics.push_back(diagnose(draws.names[static_cast<std::size_t>(j)], chains));
    }
    {
        const auto chains = chains_of([&](Eigen::Index r) { return draws.sigma(r); });
        draws.diagnostics.push_back(diagnose("sigma", chains));
    }
    draws.convergence_warning = draws.max_rhat() > config.rhat_threshold;
    return fit;
}

LinearModelFit fit_bayes_linear(const Eigen::MatrixXd& design, const Eigen::VectorXd& response, const PriorSpec& prior,
                                const SamplerConfig& config, std::vector<std::string> names) {
    if (design.rows() < design.cols()) {
        std::ostringstream os;
        os << "fit_bayes_linear: " << design.rows() << " rows is fewer than " << design.cols() << " columns";
        throw ArgumentError(os.str());
    }
    const auto bad = collinear_columns(design);
    if (!bad.empty()) {
        if (names.empty()) names = default_names(design.cols());
        std::ostringstream os;
        os << "fit_bayes_linear: design is rank deficient; collinear columns:";
        for (int j : bad) os << ' ' << names[static_cast<std::size_t>(j)];
        throw RankDeficiencyError(os.str(), bad);
    }
    return sample_bayes_linear_unchecked(design, response, prior, config, std::move(names));
}

LinearModelFit fit_lagged(std::span<const double> series, std::span<const int> lags, const PriorSettings& prior,
                          const SamplerConfig& config, std::size_t first_row) {
    LagDesign ld = lag_design(series, lags, first_row);
    const PriorSpec spec = prior.resolve(static_cast<std::size_t>(ld.design.cols()),
                                         std::span<const double>(ld.response.data(), static_cast<std::size_t>(ld.response.size())));
    LinearModelFit fit = fit_bayes_linear(ld.design, ld.response, spec, config, lag_names(lags));
    fit.lags = ld.lags;
    fit.draws.nonstationary_draws = count_nonstationary(fit.draws, fit.lags);
    return fit;
}

LinearModelFit fit_ar(std::span<const double> series, int p, const PriorSettings& prior, const SamplerConfig& config) {
    if (p < 0) throw ArgumentError("fit_ar: order must be non-negative");
    if (static_cast<long>(p) >= static_cast<long>(series.size()) - 10) {
        std::ostringstream os;
        os << "fit_ar: order " << p << " too large for series of length " << series.size();
        throw ArgumentError(os.str());
    }
    const auto lags = strided_lags(p, 1);
    return fit_lagged(series, lags, prior, config);
}

Eigen::VectorXd posterior_mean_residuals(const LinearModelFit& fit) {
    return fit.response - fit.design * fit.draws.coefficient_mean();
}

void write_draws_csv(std::ostream& out, const PosteriorDraws& draws) {
    const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
    for (const auto& name : draws.names) out << name << ',';
    out << "sigma\n";
    for (Eigen::Index s = 0; s < draws.size(); ++s) {
        for (Eigen::Index j = 0; j < draws.coefficients.cols(); ++j) out << draws.coefficients(s, j) << ',';
        out << draws.sigma(s) << '\n';
    }
    out.precision(old_precision);
}

}  // namespace tsproj
