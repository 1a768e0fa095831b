#include "tsproj/diagnostics.hpp"

#include "tsproj/error.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace tsproj {

double normal_quantile(double p) {
    static const boost::math::normal_distribution<double> standard;
    return boost::math::quantile(standard, p);
}

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

namespace {

using Chains = std::vector<std::vector<double>>;

void check_chains(std::span<const std::vector<double>> chains) {
    if (chains.empty()) throw ArgumentError("diagnostics: no chains");
    const std::size_t n = chains.front().size();
    if (n < 2) throw ArgumentError("diagnostics: chains need at least two draws");
    for (const auto& c : chains) {
        if (c.size() != n) throw ArgumentError("diagnostics: chains must have equal length");
    }
}

bool all_constant(std::span<const std::vector<double>> chains) {
    const double first = chains.front().front();
    for (const auto& c : chains)
        for (double v : c)
            if (v != first) return false;
    return true;
}

Chains split(std::span<const std::vector<double>> chains) {
    Chains out;
    const std::size_t half = chains.front().size() / 2;
    const std::size_t n = chains.front().size();
    for (const auto& c : chains) {
        out.emplace_back(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(half));
        out.emplace_back(c.begin() + static_cast<std::ptrdiff_t>(n - half), c.end());
    }
    return out;
}

// Average ranks over all pooled draws mapped through the normal quantile.
Chains rank_normalize(const Chains& chains) {
    std::vector<std::pair<double, std::size_t>> pooled;
    const std::size_t n = chains.front().size();
    for (std::size_t c = 0; c < chains.size(); ++c)
        for (std::size_t i = 0; i < n; ++i) pooled.emplace_back(chains[c][i], c * n + i);
    std::sort(pooled.begin(), pooled.end());

    const double total = static_cast<double>(pooled.size());
    std::vector<double> z(pooled.size());
    for (std::size_t i = 0; i < pooled.size();) {
        std::size_t j = i;
        while (j + 1 < pooled.size() && pooled[j + 1].first == pooled[i].first) ++j;
        const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
        const double value = normal_quantile((rank - 0.375) / (total + 0.25));
        for (std::size_t k = i; k <= j; ++k) z[pooled[k].second] = value;
        i = j + 1;
    }
    Chains out(chains.size(), std::vector<double>(n));
    for (std::size_t c = 0; c < chains.size(); ++c)
        for (std::size_t i = 0; i < n; ++i) out[c][i] = z[c * n + i];
    return out;
}

double basic_rhat(const Chains& chains) {
    const double n = static_cast<double>(chains.front().size());
    const double m = static_cast<double>(chains.size());
    std::vector<double> means;
    double within = 0.0;
    for (const auto& c : chains) {
        const double mean = std::accumulate(c.begin(), c.end(), 0.0) / n;
        double ss = 0.0;
        for (double v : c) ss += (v - mean) * (v - mean);
        within += ss / (n - 1.0);
        means.push_back(mean);
    }
    within /= m;
    const double grand = std::accumulate(means.begin(), means.end(), 0.0) / m;
    double between = 0.0;
    for (double mu : means) between += (mu - grand) * (mu - grand);
    between = m > 1.0 ? n * between / (m - 1.0) : 0.0;
    if (within <= 0.0) return between > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
    const double var_plus = (n - 1.0) / n * within + between / n;
    return std::sqrt(var_plus / within);
}

}  // namespace

RhatResult split_rhat(std::span<const std::vector<double>> chains) {
    check_chains(chains);
    if (all_constant(chains)) return {1.0, true};
    const Chains halves = split(chains);
    const double bulk = basic_rhat(rank_normalize(halves));

    double median = 0.0;
    {
        std::vector<double> pooled;
        for (const auto& c : halves) pooled.insert(pooled.end(), c.begin(), c.end());
        auto mid = pooled.begin() + static_cast<std::ptrdiff_t>(pooled.size() / 2);
        std::nth_element(pooled.begin(), mid, pooled.end());
        median = *mid;
    }
    Chains folded = halves;
    for (auto& c : folded)
        for (double& v : c) v = std::abs(v - median);
    const double tail = basic_rhat(rank_normalize(folded));
    return {std::max(bulk, tail), false};
}

double effective_sample_size(std::span<const std::vector<double>> chains) {
    check_chains(chains);
    const std::size_t n = chains.front().size();
    const std::size_t m = chains.size();
    const double total = static_cast<double>(n * m);
    if (all_constant(chains)) return total;

    std::vector<double> means(m);
    double mean_var = 0.0;
    for (std::size_t c = 0; c < m; ++c) {
        means[c] = std::accumulate(chains[c].begin(), chains[c].end(), 0.0) / static_cast<double>(n);
        double ss = 0.0;
        for (double v : chains[c]) ss += (v - means[c]) * (v - means[c]);
        mean_var += ss / static_cast<double>(n - 1);
    }
    mean_var /= static_cast<double>(m);
    double var_plus = mean_var * static_cast<double>(n - 1) / static_cast<double>(n);
    if (m > 1) {
        const double grand = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(m);
        double b = 0.0;
        for (double mu : means) b += (mu - grand) * (mu - grand);
        var_plus += b / static_cast<double>(m - 1);
    }
    if (var_plus <= 0.0) return total;

    // Autocovariance at one lag, averaged over chains (biased 1/n estimator).
    auto mean_acov = [&](std::size_t lag) {
        double acc = 0.0;
        for (std::size_t c = 0; c < m; ++c) {
            double s = 0.0;
            for (std::size_t i = lag; i < n; ++i) s += (chains[c][i] - means[c]) * (chains[c][i - lag] - means[c]);
            acc += s / static_cast<double>(n);
        }
        return acc / static_cast<double>(m);
    };
    const double w_biased = mean_var * static_cast<double>(n - 1) / static_cast<double>(n);
    auto rho = [&](std::size_t lag) { return 1.0 - (w_biased - mean_acov(lag)) / var_plus; };

    // Geyer's initial monotone sequence over pairs (rho_{2k}, rho_{2k+1}).
    double tau_sum = 0.0;
    double prev_pair = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; 2 * k + 4 < n; ++k) {
        double pair = (k == 0 ? 1.0 : rho(2 * k)) + rho(2 * k + 1);
        if (pair <= 0.0) break;
        pair = std::min(pair, prev_pair);
        tau_sum += pair;
        prev_pair = pair;
    }
    const double tau = std::max(-1.0 + 2.0 * tau_sum, 1.0 / std::log10(total));
    return total / tau;
}

double bulk_ess(std::span<const std::vector<double>> chains) {
    check_chains(chains);
    if (all_constant(chains)) return static_cast<double>(chains.size() * chains.front().size());
    const Chains normalized = rank_normalize(split(chains));
    return effective_sample_size(normalized);
}

ParameterDiagnostics diagnose(std::string name, std::span<const std::vector<double>> chains) {
    ParameterDiagnostics d;
    d.name = std::move(name);
    const auto rhat = split_rhat(chains);
    d.rhat = rhat.value;
    d.zero_variance = rhat.zero_variance;
    d.ess = effective_sample_size(chains);
    return d;
}

}  // namespace tsproj
