#pragma once

#include "tsproj/loo.hpp"
#include "tsproj/posterior.hpp"
#include "tsproj/projection.hpp"
#include "tsproj/timeseries.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tsproj {

struct SearchEntry {
    int order = 0;
    ProjectedSubmodel submodel;
    ElpdEstimate elpd;
    ElpdDiff diff;  // submodel - reference, paired
    double mean_kl = 0.0;
    double selection_probability = 0.0;
};

/// Nested submodel path: entry k keeps the intercept and the first k lag columns.
struct SearchPath {
    std::vector<SearchEntry> entries;
    ElpdEstimate reference_elpd;
    std::vector<int> lags;  // lag added at each step
};

struct OrderSelection {
    int order = 0;
    bool warning = false;  // no submodel met the rule; the full order was returned
};

SearchPath forward_search(const LinearModelFit& reference, int max_order, const PsisConfig& psis = {});

/// Path over arbitrary submodel designs (one per order, same rows as the reference).
SearchPath forward_search_designs(const LinearModelFit& reference, std::vector<Eigen::MatrixXd> designs,
                                  std::vector<int> lags, const PsisConfig& psis = {});

/// Smallest order with elpd_sub + se(elpd_ref - elpd_sub) >= elpd_ref.
OrderSelection select_order(const SearchPath& path);

// ---- joint (two-stage regression) ARMA designs -----------------------------

/// Row alignment shared by every joint ARMA fit that is compared on one series.
struct JointLayout {
    int noise_ar_order = 10;   // long AR whose residuals proxy the latent noise
    std::size_t first_row = 15;
};

JointLayout default_joint_layout(int max_p, int max_q, int s = 0, int max_P = 0, int max_Q = 0);

/// Least-squares residuals of a long AR; entries before `order` are zero.
std::vector<double> long_ar_residuals(std::span<const double> series, int order);

/// Lags {i + j s : 0 <= i <= p, 0 <= j <= P} without 0, ascending.
std::vector<int> multiplicative_lags(int p, int P, int s);

/// Seed offset of the final joint refit, shared by every procedure so equal orders give equal refits.
inline constexpr std::uint64_t kRefitSeedOffset = 7;

struct JointFit {
    LinearModelFit fit;
    ElpdEstimate elpd;
    std::vector<int> ar_lags;
    std::vector<int> ma_lags;
    JointLayout layout;
};

LagDesign joint_design(std::span<const double> series, std::span<const double> noise, std::span<const int> ar_lags,
                       std::span<const int> ma_lags, std::size_t first_row);

/// Bayesian regression of y_t on lagged y and lagged noise proxy, with PSIS-LOO elpd.
JointFit fit_joint_arma(std::span<const double> series, std::span<const int> ar_lags, std::span<const int> ma_lags,
                        const JointLayout& layout, const PriorSettings& prior, const SamplerConfig& sampler,
                        const PsisConfig& psis = {});

JointFit fit_joint_arma(std::span<const double> series, const SarmaOrder& order, const JointLayout& layout,
                        const PriorSettings& prior, const SamplerConfig& sampler, const PsisConfig& psis = {});

// ---- procedures ------------------------------------------------------------

struct ProjpredConfig {
    int p_star = 5;
    int q_star = 5;
    int P_star = 3;
    int Q_star = 3;
    PriorSettings prior;
    SamplerConfig sampler;
    PsisConfig psis;
    bool reporting_refit = true;
    std::optional<JointLayout> layout;  // defaults to default_joint_layout(p_star, q_star, ...)
};

struct StageResult {
    std::string name;  // "ar", "ma", "seasonal_ar", "seasonal_ma"
    SearchPath path;
    OrderSelection selection;
    std::uint64_t seed = 0;
    double max_rhat = 1.0;
    bool convergence_warning = false;
    int nonstationary_draws = -1;
    Eigen::VectorXd residuals;  // of the selected projected submodel
};

struct OrderReport {
    std::string procedure;
    SarmaOrder selected;
    SarmaOrder reference;
    std::vector<StageResult> stages;
    std::optional<JointFit> refit;
    std::vector<std::string> warnings;
    int search_fits = 0;     // MCMC fits used for identification
    int reporting_fits = 0;  // MCMC fits used for the final refit
    std::uint64_t seed = 0;

    const StageResult* stage(std::string_view name) const;
    ArmaOrder arma() const { return selected.nonseasonal; }
};

OrderReport projpred_arma(std::span<const double> series, const ProjpredConfig& config);

OrderReport projpred_sarma(std::span<const double> series, int s, const ProjpredConfig& config);

struct ArToArResult {
    SearchPath path;
    OrderSelection selection;
    JointFit reference;
};

enum class ArToArReference {
    ar_surrogate,  // AR(max_ar) fit standing in for the AR(infinity) form of the ARMA
    joint_arma,    // joint ARMA(p_star, q_star) regression on the noise proxy
};

/// Projects a reference onto AR(0..max_ar) and selects the smallest adequate AR order.
ArToArResult arma_to_ar_projection(std::span<const double> series, int p_star, int q_star, int max_ar,
                                   const ProjpredConfig& config,
                                   ArToArReference reference = ArToArReference::ar_surrogate);

/// Projects a joint ARMA(p_star, q_star) reference directly onto its AR
/// columns, then continues with the residual MA stage.
OrderReport joint_projection_variant(std::span<const double> series, const ProjpredConfig& config);

}  // namespace tsproj
