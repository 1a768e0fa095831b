#include "tsproj/search.hpp"

#include "tsproj/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tsproj {

namespace {

// Seed offsets of the individual fits inside one procedure call.
constexpr std::uint64_t kSeedAr = 0;
constexpr std::uint64_t kSeedMa = 1;
constexpr std::uint64_t kSeedSeasonalAr = 2;
constexpr std::uint64_t kSeedSeasonalMa = 3;
constexpr std::uint64_t kSeedRefit = kRefitSeedOffset;

std::span<const double> as_span(const Eigen::VectorXd& v) {
    return {v.data(), static_cast<std::size_t>(v.size())};
}

SamplerConfig with_seed(const SamplerConfig& base, std::uint64_t offset) {
    SamplerConfig out = base;
    out.seed = base.seed + offset;
    return out;
}

SearchEntry make_entry(const LinearModelFit& reference, const ElpdEstimate& reference_elpd, ProjectedSubmodel sub,
                       const PsisConfig& psis) {
    SearchEntry e;
    e.order = sub.order;
    e.elpd = psis_loo(pointwise_loglik(sub, reference.response), psis);
    e.diff = elpd_diff(e.elpd, reference_elpd);
    e.mean_kl = sub.mean_kl();
    e.selection_probability = selection_probability(e.diff.diff, e.diff.se);
    e.submodel = std::move(sub);
    return e;
}

Eigen::VectorXd projected_residuals(const LinearModelFit& reference, const ProjectedSubmodel& sub) {
    return reference.response - sub.design * sub.coefficient_mean();
}

StageResult finish_stage(std::string name, const LinearModelFit& fit, std::uint64_t seed, int max_order,
                         const PsisConfig& psis) {
    StageResult st;
    st.name = std::move(name);
    st.seed = seed;
    st.max_rhat = fit.draws.max_rhat();
    st.convergence_warning = fit.draws.convergence_warning;
    st.nonstationary_draws = fit.draws.nonstationary_draws;
    st.path = forward_search(fit, max_order, psis);
    st.selection = select_order(st.path);
    const auto& chosen = st.path.entries[static_cast<std::size_t>(st.selection.order)];
    st.residuals = projected_residuals(fit, chosen.submodel);
    return st;
}

void note_stage(OrderReport& report, const StageResult& st) {
    if (st.selection.warning) {
        report.warnings.push_back(st.name + ": no submodel matched the reference; returning the reference order");
    }
    if (st.convergence_warning) {
        std::ostringstream os;
        os << st.name << ": reference fit max R-hat " << st.max_rhat;
        report.warnings.push_back(os.str());
    }
    const auto& ref = st.path.reference_elpd;
    if (ref.reliability_warning) {
        std::ostringstream os;
        os << st.name << ": " << ref.count_k_above(0.7) << " observations with pareto k > 0.7";
        report.warnings.push_back(os.str());
    }
}

void check_reference_convergence(const LinearModelFit& fit, const char* stage) {
    if (!fit.draws.convergence_warning) return;
    std::ostringstream os;
    os << stage << " reference fit did not converge:";
    for (const auto& d : fit.draws.diagnostics) os << ' ' << d.name << " rhat=" << d.rhat;
    throw ConvergenceError(os.str());
}

void check_orders(const ProjpredConfig& config) {
    if (config.p_star < 0 || config.q_star < 0 || config.P_star < 0 || config.Q_star < 0) {
        throw ArgumentError("reference orders must be non-negative");
    }
}

void check_length(std::size_t length, int p_star, int q_star) {
    if (4 * static_cast<long>(p_star + q_star) >= static_cast<long>(length)) {
        std::ostringstream os;
        os << "reference orders p*=" << p_star << ", q*=" << q_star << " too large for series of length " << length;
        throw ArgumentError(os.str());
    }
}

// Non-seasonal AR then MA stages shared by the ARMA and SARMA procedures.
void nonseasonal_stages(std::span<const double> series, const ProjpredConfig& config, OrderReport& report) {
    const SamplerConfig ar_cfg = with_seed(config.sampler, kSeedAr);
    const LinearModelFit ar_fit = fit_ar(series, config.p_star, config.prior, ar_cfg);
    ++report.search_fits;
    check_reference_convergence(ar_fit, "AR");
    StageResult ar = finish_stage("ar", ar_fit, ar_cfg.seed, config.p_star, config.psis);

    const SamplerConfig ma_cfg = with_seed(config.sampler, kSeedMa);
    const auto ma_lags = strided_lags(config.q_star, 1);
    const LinearModelFit ma_fit = fit_lagged(as_span(ar.residuals), ma_lags, config.prior, ma_cfg);
    ++report.search_fits;
    StageResult ma = finish_stage("ma", ma_fit, ma_cfg.seed, config.q_star, config.psis);

    report.selected.nonseasonal = {ar.selection.order, ma.selection.order};
    note_stage(report, ar);
    note_stage(report, ma);
    report.stages.push_back(std::move(ar));
    report.stages.push_back(std::move(ma));
}

void reporting_refit(std::span<const double> series, const ProjpredConfig& config, const JointLayout& layout,
                     OrderReport& report) {
    if (!config.reporting_refit) return;
    report.refit = fit_joint_arma(series, report.selected, layout, config.prior, with_seed(config.sampler, kSeedRefit),
                                  config.psis);
    ++report.reporting_fits;
    if (report.refit->fit.draws.convergence_warning) {
        std::ostringstream os;
        os << "refit: max R-hat " << report.refit->fit.draws.max_rhat();
        report.warnings.push_back(os.str());
    }
}

}  // namespace

// ---------------------------------------------------------------------------

SearchPath forward_search(const LinearModelFit& reference, int max_order, const PsisConfig& psis) {
    const int ref_order = static_cast<int>(reference.design.cols()) - 1;
    if (max_order < 0 || max_order > ref_order) {
        std::ostringstream os;
        os << "forward_search: max order " << max_order << " outside 0.." << ref_order;
        throw ArgumentError(os.str());
    }
    SearchPath path;
    path.reference_elpd = psis_loo(pointwise_loglik(reference), psis);
    for (int k = 0; k <= max_order; ++k) {
        path.entries.push_back(make_entry(reference, path.reference_elpd, project_submodel(reference, k), psis));
        if (k > 0) {
            const auto j = static_cast<std::size_t>(k - 1);
            path.lags.push_back(j < reference.lags.size() ? reference.lags[j] : k);
        }
    }
    return path;
}

SearchPath forward_search_designs(const LinearModelFit& reference, std::vector<Eigen::MatrixXd> designs,
                                  std::vector<int> lags, const PsisConfig& psis) {
    if (designs.empty()) throw ArgumentError("forward_search: no submodel designs");
    SearchPath path;
    path.reference_elpd = psis_loo(pointwise_loglik(reference), psis);
    for (std::size_t k = 0; k < designs.size(); ++k) {
        if (designs[k].cols() != static_cast<Eigen::Index>(k + 1)) {
            throw ArgumentError("forward_search: design of order k must have k + 1 columns");
        }
        if (k > 0 && designs[k].leftCols(static_cast<Eigen::Index>(k)) != designs[k - 1]) {
            throw ArgumentError("forward_search: submodel designs must be nested");
        }
    }
    for (std::size_t k = 0; k < designs.size(); ++k) {
        path.entries.push_back(make_entry(
            reference, path.reference_elpd,
            project_onto_design(reference, std::move(designs[k]), static_cast<int>(k)), psis));
    }
    path.lags = std::move(lags);
    return path;
}

OrderSelection select_order(const SearchPath& path) {
    if (path.entries.empty()) throw ArgumentError("select_order: empty search path");
    // Rounding slack so that an exact projection always matches its reference.
    const double slack = 1e-9 * std::max(1.0, std::abs(path.reference_elpd.elpd));
    for (const auto& e : path.entries) {
        if (e.diff.diff + e.diff.se >= -slack) return {e.order, false};
    }
    return {path.entries.back().order, true};
}

// ---------------------------------------------------------------------------

JointLayout default_joint_layout(int max_p, int max_q, int s, int max_P, int max_Q) {
    if (max_p < 0 || max_q < 0 || max_P < 0 || max_Q < 0) throw ArgumentError("joint layout: orders must be non-negative");
    const int period = s >= 2 ? s : 0;
    JointLayout out;
    out.noise_ar_order = std::max(10, 2 * std::max(max_p, max_q)) + period * std::max(max_P, max_Q);
    const int span = std::max(max_p + period * max_P, max_q + period * max_Q);
    out.first_row = static_cast<std::size_t>(out.noise_ar_order + span);
    return out;
}

std::vector<double> long_ar_residuals(std::span<const double> series, int order) {
    if (order < 0) throw ArgumentError("long_ar_residuals: negative order");
    if (static_cast<std::size_t>(order) + static_cast<std::size_t>(order) + 2 > series.size()) {
        throw ArgumentError("long_ar_residuals: series too short for the noise AR order");
    }
    const LagDesign ld = lag_design(series, order);
    const Eigen::VectorXd beta = ld.design.colPivHouseholderQr().solve(ld.response);
    const Eigen::VectorXd r = ld.response - ld.design * beta;
    std::vector<double> out(series.size(), 0.0);
    for (Eigen::Index i = 0; i < r.size(); ++i) out[static_cast<std::size_t>(order) + static_cast<std::size_t>(i)] = r(i);
    return out;
}

std::vector<int> multiplicative_lags(int p, int P, int s) {
    if (p < 0 || P < 0) throw ArgumentError("multiplicative_lags: orders must be non-negative");
    if (P > 0 && s < 2) throw ArgumentError("multiplicative_lags: seasonal period must be at least 2");
    std::vector<int> out;
    for (int j = 0; j <= P; ++j) {
        for (int i = 0; i <= p; ++i) {
            const int lag = i + j * s;
            if (lag > 0) out.push_back(lag);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

LagDesign joint_design(std::span<const double> series, std::span<const double> noise, std::span<const int> ar_lags,
                       std::span<const int> ma_lags, std::size_t first_row) {
    if (noise.size() != series.size()) throw ArgumentError("joint_design: noise proxy length mismatch");
    for (int lag : ar_lags) {
        if (lag < 1 || static_cast<std::size_t>(lag) > first_row) throw ArgumentError("joint_design: AR lag out of range");
    }
    for (int lag : ma_lags) {
        if (lag < 1 || static_cast<std::size_t>(lag) > first_row) throw ArgumentError("joint_design: MA lag out of range");
    }
    if (first_row >= series.size()) throw ArgumentError("joint_design: no rows remain");

    const auto rows = static_cast<Eigen::Index>(series.size() - first_row);
    const auto cols = static_cast<Eigen::Index>(1 + ar_lags.size() + ma_lags.size());
    LagDesign out;
    out.design.resize(rows, cols);
    out.response.resize(rows);
    out.first_row = first_row;
    out.lags.assign(ar_lags.begin(), ar_lags.end());
    for (Eigen::Index r = 0; r < rows; ++r) {
        const std::size_t t = first_row + static_cast<std::size_t>(r);
        out.response(r) = series[t];
        out.design(r, 0) = 1.0;
        Eigen::Index c = 1;
        for (int lag : ar_lags) out.design(r, c++) = series[t - static_cast<std::size_t>(lag)];
        for (int lag : ma_lags) out.design(r, c++) = noise[t - static_cast<std::size_t>(lag)];
    }
    return out;
}

JointFit fit_joint_arma(std::span<const double> series, std::span<const int> ar_lags, std::span<const int> ma_lags,
                        const JointLayout& layout, const PriorSettings& prior, const SamplerConfig& sampler,
                        const PsisConfig& psis) {
    const std::vector<double> noise = long_ar_residuals(series, layout.noise_ar_order);
    const LagDesign ld = joint_design(series, noise, ar_lags, ma_lags, layout.first_row);
    std::vector<std::string> names{"intercept"};
    for (int lag : ar_lags) names.push_back("ar" + std::to_string(lag));
    for (int lag : ma_lags) names.push_back("ma" + std::to_string(lag));
    const PriorSpec spec = prior.resolve(static_cast<std::size_t>(ld.design.cols()), as_span(ld.response));

    JointFit out;
    out.fit = fit_bayes_linear(ld.design, ld.response, spec, sampler, std::move(names));
    out.fit.lags = ld.lags;
    out.elpd = psis_loo(pointwise_loglik(out.fit), psis);
    out.ar_lags.assign(ar_lags.begin(), ar_lags.end());
    out.ma_lags.assign(ma_lags.begin(), ma_lags.end());
    out.layout = layout;
    return out;
}

JointFit fit_joint_arma(std::span<const double> series, const SarmaOrder& order, const JointLayout& layout,
                        const PriorSettings& prior, const SamplerConfig& sampler, const PsisConfig& psis) {
    const auto ar = multiplicative_lags(order.nonseasonal.p, order.seasonal.p, order.s);
    const auto ma = multiplicative_lags(order.nonseasonal.q, order.seasonal.q, order.s);
    return fit_joint_arma(series, ar, ma, layout, prior, sampler, psis);
}

// ---------------------------------------------------------------------------

const StageResult* OrderReport::stage(std::string_view name) const {
    for (const auto& st : stages) {
        if (st.name == name) return &st;
    }
    return nullptr;
}

OrderReport projpred_arma(std::span<const double> series, const ProjpredConfig& config) {
    check_orders(config);
    check_length(series.size(), config.p_star, config.q_star);
    config.sampler.validate();

    OrderReport report;
    report.procedure = "projpred";
    report.reference = {{config.p_star, config.q_star}, {0, 0}, 0};
    report.seed = config.sampler.seed;
    nonseasonal_stages(series, config, report);
    const JointLayout layout = config.layout.value_or(default_joint_layout(config.p_star, config.q_star));
    reporting_refit(series, config, layout, report);
    return report;
}

OrderReport projpred_sarma(std::span<const double> series, int s, const ProjpredConfig& config) {
    if (s < 2) throw ArgumentError("projpred_sarma: seasonal period must be at least 2");
    check_orders(config);
    check_length(series.size(), config.p_star + s * config.P_star, config.q_star + s * config.Q_star);
    config.sampler.validate();

    OrderReport report;
    report.procedure = "projpred";
    report.reference = {{config.p_star, config.q_star}, {config.P_star, config.Q_star}, s};
    report.seed = config.sampler.seed;
    nonseasonal_stages(series, config, report);

    const Eigen::VectorXd ns_resid = report.stages.back().residuals;
    const SamplerConfig sar_cfg = with_seed(config.sampler, kSeedSeasonalAr);
    const LinearModelFit sar_fit = fit_lagged(as_span(ns_resid), strided_lags(config.P_star, s), config.prior, sar_cfg);
    ++report.search_fits;
    StageResult sar = finish_stage("seasonal_ar", sar_fit, sar_cfg.seed, config.P_star, config.psis);

    const SamplerConfig sma_cfg = with_seed(config.sampler, kSeedSeasonalMa);
    const LinearModelFit sma_fit =
        fit_lagged(as_span(sar.residuals), strided_lags(config.Q_star, s), config.prior, sma_cfg);
    ++report.search_fits;
    StageResult sma = finish_stage("seasonal_ma", sma_fit, sma_cfg.seed, config.Q_star, config.psis);

    report.selected.seasonal = {sar.selection.order, sma.selection.order};
    report.selected.s = s;
    note_stage(report, sar);
    note_stage(report, sma);
    report.stages.push_back(std::move(sar));
    report.stages.push_back(std::move(sma));

    const JointLayout layout = config.layout.value_or(
        default_joint_layout(config.p_star, config.q_star, s, config.P_star, config.Q_star));
    reporting_refit(series, config, layout, report);
    return report;
}

ArToArResult arma_to_ar_projection(std::span<const double> series, int p_star, int q_star, int max_ar,
                                   const ProjpredConfig& config, ArToArReference reference) {
    if (p_star < 0 || q_star < 0) throw ArgumentError("arma_to_ar_projection: orders must be non-negative");
    if (max_ar < p_star) throw ArgumentError("arma_to_ar_projection: max_ar must be at least p_star");
    const SamplerConfig cfg = with_seed(config.sampler, kSeedAr);

    ArToArResult out;
    if (reference == ArToArReference::ar_surrogate) {
        out.reference.fit = fit_ar(series, max_ar, config.prior, cfg);
        out.reference.elpd = psis_loo(pointwise_loglik(out.reference.fit), config.psis);
        out.reference.ar_lags = strided_lags(max_ar, 1);
        out.reference.layout = {0, static_cast<std::size_t>(max_ar)};
        out.path = forward_search(out.reference.fit, max_ar, config.psis);
    } else {
        JointLayout layout = config.layout.value_or(default_joint_layout(p_star, q_star));
        layout.first_row = std::max(layout.first_row, static_cast<std::size_t>(max_ar));
        out.reference = fit_joint_arma(series, strided_lags(p_star, 1), strided_lags(q_star, 1), layout, config.prior,
                                       cfg, config.psis);
        const auto all = strided_lags(max_ar, 1);
        const LagDesign full = lag_design(series, all, layout.first_row);
        std::vector<Eigen::MatrixXd> designs;
        for (int k = 0; k <= max_ar; ++k) designs.push_back(full.design.leftCols(k + 1));
        out.path = forward_search_designs(out.reference.fit, std::move(designs), all, config.psis);
    }
    out.selection = select_order(out.path);
    return out;
}

OrderReport joint_projection_variant(std::span<const double> series, const ProjpredConfig& config) {
    check_orders(config);
    check_length(series.size(), config.p_star, config.q_star);
    config.sampler.validate();

    OrderReport report;
    report.procedure = "joint_projection";
    report.reference = {{config.p_star, config.q_star}, {0, 0}, 0};
    report.seed = config.sampler.seed;
    const JointLayout layout = config.layout.value_or(default_joint_layout(config.p_star, config.q_star));

    const SamplerConfig ref_cfg = with_seed(config.sampler, kSeedAr);
    const JointFit joint = fit_joint_arma(series, strided_lags(config.p_star, 1), strided_lags(config.q_star, 1), layout,
                                          config.prior, ref_cfg, config.psis);
    ++report.search_fits;
    check_reference_convergence(joint.fit, "joint ARMA");
    // Columns 1..p* are the AR lags, so the order-k prefix is an AR(k) design.
    StageResult ar = finish_stage("ar", joint.fit, ref_cfg.seed, config.p_star, config.psis);

    const SamplerConfig ma_cfg = with_seed(config.sampler, kSeedMa);
    const LinearModelFit ma_fit = fit_lagged(as_span(ar.residuals), strided_lags(config.q_star, 1), config.prior, ma_cfg);
    ++report.search_fits;
    StageResult ma = finish_stage("ma", ma_fit, ma_cfg.seed, config.q_star, config.psis);

    report.selected.nonseasonal = {ar.selection.order, ma.selection.order};
    note_stage(report, ar);
    note_stage(report, ma);
    report.stages.push_back(std::move(ar));
    report.stages.push_back(std::move(ma));
    reporting_refit(series, config, layout, report);
    return report;
}

}  // namespace tsproj
