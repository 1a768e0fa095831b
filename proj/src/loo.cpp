#include "tsproj/loo.hpp"

#include "tsproj/diagnostics.hpp"
#include "tsproj/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace tsproj {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;

double log_sum_exp(const Eigen::VectorXd& x) {
    const double m = x.maxCoeff();
    if (!std::isfinite(m)) return m;
    return m + std::log((x.array() - m).exp().sum());
}

double sample_variance(const Eigen::VectorXd& x) {
    if (x.size() < 2) return 0.0;
    const double mean = x.mean();
    return (x.array() - mean).square().sum() / static_cast<double>(x.size() - 1);
}

}  // namespace

Eigen::Index ElpdEstimate::count_k_above(double threshold) const {
    return (pareto_k.array() > threshold).count();
}

double ElpdEstimate::max_k() const {
    return pareto_k.size() ? pareto_k.maxCoeff() : 0.0;
}

ElpdEstimate make_elpd(Eigen::VectorXd pointwise) {
    ElpdEstimate out;
    out.elpd = pointwise.sum();
    out.se = std::sqrt(static_cast<double>(pointwise.size()) * sample_variance(pointwise));
    out.pointwise = std::move(pointwise);
    out.pareto_k = Eigen::VectorXd::Zero(out.pointwise.size());
    return out;
}

// ---------------------------------------------------------------------------

GpdFit fit_gpd_tail(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n < 5) throw ArgumentError("fit_gpd_tail: at least 5 exceedances required");
    for (std::size_t i = 1; i < n; ++i) {
        if (x[i] < x[i - 1]) throw ArgumentError("fit_gpd_tail: exceedances must be sorted ascending");
    }
    const double N = static_cast<double>(n);
    constexpr double prior = 3.0;
    const std::size_t grid = 30 + static_cast<std::size_t>(std::floor(std::sqrt(N)));
    const std::size_t quartile = static_cast<std::size_t>(std::floor(N / 4.0 + 0.5));
    const double xstar = x[std::max<std::size_t>(quartile, 1) - 1];
    if (!(xstar > 0.0) || !(x[n - 1] > 0.0)) return {std::numeric_limits<double>::infinity(), 0.0};

    Eigen::VectorXd theta(static_cast<Eigen::Index>(grid));
    Eigen::VectorXd profile(static_cast<Eigen::Index>(grid));
    for (std::size_t j = 0; j < grid; ++j) {
        const double jj = static_cast<double>(j + 1);
        const double t = 1.0 / x[n - 1] + (1.0 - std::sqrt(static_cast<double>(grid) / (jj - 0.5))) / prior / xstar;
        theta(static_cast<Eigen::Index>(j)) = t;
        // Profile log-likelihood of the shape at b = theta.
        const double a = -t;
        double k = 0.0;
        for (double xi : x) k += std::log1p(a * xi);
        k /= N;
        profile(static_cast<Eigen::Index>(j)) = N * (std::log(a / k) - k - 1.0);
    }
    // Grid points that give an invalid likelihood carry no weight.
    for (Eigen::Index j = 0; j < profile.size(); ++j) {
        if (!std::isfinite(profile(j))) profile(j) = -std::numeric_limits<double>::infinity();
    }
    const double lse = log_sum_exp(profile);
    if (!std::isfinite(lse)) return {std::numeric_limits<double>::infinity(), 0.0};
    const Eigen::VectorXd w = (profile.array() - lse).exp();
    const double theta_hat = w.dot(theta);

    double k = 0.0;
    for (double xi : x) k += std::log1p(-theta_hat * xi);
    k /= N;
    const double sigma = -k / theta_hat;
    k = (k * N + 0.5 * 10.0) / (N + 10.0);
    if (!std::isfinite(k) || !std::isfinite(sigma)) return {std::numeric_limits<double>::infinity(), 0.0};
    return {k, sigma};
}

SmoothedLogWeights psis_smooth(const Eigen::VectorXd& log_ratios, const PsisConfig& config) {
    const Eigen::Index S = log_ratios.size();
    if (S < 1) throw ArgumentError("psis: no draws");
    SmoothedLogWeights out;
    out.log_weights = log_ratios.array() - log_ratios.maxCoeff();

    const double s = static_cast<double>(S);
    const auto tail_len =
        static_cast<Eigen::Index>(std::ceil(std::min(config.tail_fraction * s, config.tail_sqrt_factor * std::sqrt(s))));
    if (tail_len >= 5 && tail_len < S) {
        std::vector<Eigen::Index> order(static_cast<std::size_t>(S));
        std::iota(order.begin(), order.end(), Eigen::Index{0});
        auto by_value = [&](Eigen::Index a, Eigen::Index b) { return out.log_weights(a) < out.log_weights(b); };
        // Elements [cut, S) are the tail; element cut - 1 is the cutoff.
        const auto cut = static_cast<std::ptrdiff_t>(S - tail_len);
        std::nth_element(order.begin(), order.begin() + cut - 1, order.end(), by_value);
        std::sort(order.begin() + cut, order.end(), by_value);
        const double cutoff = out.log_weights(order[static_cast<std::size_t>(cut - 1)]);
        const double tail_min = out.log_weights(order[static_cast<std::size_t>(cut)]);
        const double tail_max = out.log_weights(order.back());

        if (std::abs(tail_max - tail_min) >= std::numeric_limits<double>::epsilon() / 100.0) {
            const double exp_cutoff = std::exp(cutoff);
            std::vector<double> exceed(static_cast<std::size_t>(tail_len));
            for (Eigen::Index i = 0; i < tail_len; ++i) {
                exceed[static_cast<std::size_t>(i)] =
                    std::exp(out.log_weights(order[static_cast<std::size_t>(cut + i)])) - exp_cutoff;
            }
            const GpdFit fit = fit_gpd_tail(exceed);
            out.pareto_k = fit.k;
            if (std::isfinite(fit.k)) {
                // Replace the tail by expected order statistics of the fitted GPD.
                const double m = static_cast<double>(tail_len);
                for (Eigen::Index i = 0; i < tail_len; ++i) {
                    const double p = (static_cast<double>(i) + 0.5) / m;
                    const double q = fit.k != 0.0 ? fit.sigma * std::expm1(-fit.k * std::log1p(-p)) / fit.k
                                                  : -fit.sigma * std::log1p(-p);
                    out.log_weights(order[static_cast<std::size_t>(cut + i)]) = std::log(q + exp_cutoff);
                }
            }
        }
    }
    // Truncate at the largest raw weight (0 after the shift), then normalize.
    out.log_weights = out.log_weights.cwiseMin(0.0);
    out.log_weights.array() -= log_sum_exp(out.log_weights);
    return out;
}

ElpdEstimate psis_loo(const Eigen::MatrixXd& ll, const PsisConfig& config) {
    if (ll.rows() < 1 || ll.cols() < 1) throw ArgumentError("psis_loo: empty log-likelihood matrix");
    if (!ll.allFinite()) throw ArgumentError("psis_loo: log-likelihood matrix contains non-finite entries");

    const Eigen::Index T = ll.cols();
    Eigen::VectorXd pointwise(T);
    Eigen::VectorXd pareto_k(T);
    for (Eigen::Index t = 0; t < T; ++t) {
        const Eigen::VectorXd col = ll.col(t);
        if (col.maxCoeff() == col.minCoeff()) {
            pointwise(t) = col(0);
            pareto_k(t) = 0.0;
            continue;
        }
        const SmoothedLogWeights w = psis_smooth(-col, config);
        pointwise(t) = log_sum_exp(w.log_weights + col);
        pareto_k(t) = w.pareto_k;
    }
    ElpdEstimate out = make_elpd(std::move(pointwise));
    out.pareto_k = std::move(pareto_k);
    out.reliability_warning = out.count_k_above(config.k_threshold) > 0;
    return out;
}

ElpdDiff elpd_diff(const ElpdEstimate& a, const ElpdEstimate& b) {
    if (a.pointwise.size() != b.pointwise.size()) throw ArgumentError("elpd_diff: estimates cover different observations");
    const Eigen::VectorXd d = a.pointwise - b.pointwise;
    return {a.elpd - b.elpd, std::sqrt(static_cast<double>(d.size()) * sample_variance(d))};
}

double selection_probability(double diff, double se) {
    if (!(se > 0.0)) return diff >= 0.0 ? 1.0 : 0.0;
    return normal_cdf(diff / se);
}

// ---------------------------------------------------------------------------

Eigen::MatrixXd linear_pointwise_loglik(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                                        const Eigen::MatrixXd& coefficients, const Eigen::VectorXd& sigma) {
    if (coefficients.cols() != design.cols()) throw ArgumentError("pointwise loglik: coefficient dimension mismatch");
    if (coefficients.rows() != sigma.size()) throw ArgumentError("pointwise loglik: draw count mismatch");
    Eigen::MatrixXd out = coefficients * design.transpose();  // S x n means
    out.rowwise() -= response.transpose();
    const Eigen::ArrayXd log_sigma = sigma.array().log();
    const Eigen::ArrayXd inv_sigma = sigma.array().inverse();
    for (Eigen::Index s = 0; s < out.rows(); ++s) {
        out.row(s) = -kHalfLog2Pi - log_sigma(s) - 0.5 * (out.row(s).array() * inv_sigma(s)).square();
    }
    return out;
}

Eigen::MatrixXd pointwise_loglik(const LinearModelFit& fit) {
    return linear_pointwise_loglik(fit.design, fit.response, fit.draws.coefficients, fit.draws.sigma);
}

Eigen::MatrixXd pointwise_loglik(const ProjectedSubmodel& submodel, const Eigen::VectorXd& response) {
    return linear_pointwise_loglik(submodel.design, response, submodel.coefficients, submodel.sigma);
}

ElpdEstimate exact_loo_brute(const Eigen::MatrixXd& design, const Eigen::VectorXd& response, const PriorSpec& prior,
                             const SamplerConfig& config) {
    const Eigen::Index n = design.rows();
    if (n < 1 || response.size() != n) throw ArgumentError("exact_loo_brute: design/response mismatch");
    Eigen::VectorXd pointwise(n);
    for (Eigen::Index t = 0; t < n; ++t) {
        Eigen::MatrixXd x(n - 1, design.cols());
        Eigen::VectorXd y(n - 1);
        for (Eigen::Index r = 0, w = 0; r < n; ++r) {
            if (r == t) continue;
            x.row(w) = design.row(r);
            y(w) = response(r);
            ++w;
        }
        SamplerConfig cfg = config;
        cfg.seed = config.seed * 1000003ULL + static_cast<std::uint64_t>(t);
        const LinearModelFit fit = sample_bayes_linear_unchecked(x, y, prior, cfg);
        const Eigen::MatrixXd ll = linear_pointwise_loglik(design.row(t), response.segment(t, 1),
                                                           fit.draws.coefficients, fit.draws.sigma);
        pointwise(t) = log_sum_exp(ll.col(0)) - std::log(static_cast<double>(ll.rows()));
    }
    return make_elpd(std::move(pointwise));
}

}  // namespace tsproj
