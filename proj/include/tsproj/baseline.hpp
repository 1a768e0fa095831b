#pragma once

#include "tsproj/loo.hpp"
#include "tsproj/posterior.hpp"
#include "tsproj/search.hpp"
#include "tsproj/timeseries.hpp"

#include <iosfwd>
#include <span>
#include <vector>

namespace tsproj {

struct MlFit {
    ArmaParams params;
    bool intercept = true;
    double loglik = 0.0;
    double aic = 0.0;  // 2 (p + q + intercept + 1) - 2 loglik
    bool converged = false;
    int iterations = 0;
    double min_root_modulus = 0.0;  // smallest AR or MA root modulus; infinity for (0, 0)
};

struct CssOptions {
    int max_iterations = 4000;
    double tolerance = 1e-9;  // simplex size
};

/// Conditional-sum-of-squares maximum likelihood with sigma profiled out,
/// by Nelder-Mead started from a two-stage regression estimate and from zero.
MlFit fit_arma_css(std::span<const double> series, ArmaOrder order, bool intercept = true,
                   const CssOptions& options = {});

struct StepwiseConfig {
    int max_p = 5;
    int max_q = 5;
    bool intercept = true;       // intercept of the initial models
    bool toggle_intercept = true;
    int max_moves = 100;
    double min_root_modulus = 1.01;  // fits with a root closer to the unit circle are not eligible
    CssOptions css;
};

struct TraceEntry {
    int p = 0;
    int q = 0;
    bool intercept = true;
    double aic = 0.0;
    double loglik = 0.0;
    bool converged = false;
    bool near_unit_root = false;
    int move = 0;  // 0 for the initial models
};

struct StepwiseResult {
    ArmaOrder order;
    bool intercept = true;
    MlFit fit;
    std::vector<TraceEntry> trace;
    int moves = 0;

    int css_fits() const { return static_cast<int>(trace.size()); }
};

/// Hill-climb on AIC from {(0,0), (1,0), (0,1), (2,2)} over the neighbourhood
/// p +- 1, q +- 1, (p +- 1, q +- 1) and the intercept toggle.
StepwiseResult stepwise_search(std::span<const double> series, const StepwiseConfig& config = {});

void write_trace_csv(std::ostream& out, const std::vector<TraceEntry>& trace);

struct BaselineReport {
    StepwiseResult stepwise;
    JointFit refit;
    int mcmc_fits = 0;
    std::uint64_t seed = 0;
};

/// Stepwise AIC orders, then the joint Bayesian refit used by projpred_arma's reporting step.
BaselineReport mcmc_autoarima(std::span<const double> series, const ProjpredConfig& config,
                              const StepwiseConfig& stepwise = {});

}  // namespace tsproj
