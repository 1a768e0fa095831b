#include "tsproj/report.hpp"

#include "tsproj/error.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace tsproj {

json elpd_to_json(const ElpdEstimate& e, double k_threshold) {
    return {{"elpd", e.elpd},
            {"se", e.se},
            {"pareto_k_summary", {{"max", e.max_k()}, {"count_gt_0_7", e.count_k_above(k_threshold)}}}};
}

json order_to_json(const SarmaOrder& order) {
    return {{"p", order.nonseasonal.p},
            {"q", order.nonseasonal.q},
            {"P", order.seasonal.p},
            {"Q", order.seasonal.q},
            {"s", order.s}};
}

json path_to_json(const SearchPath& path) {
    json entries = json::array();
    for (std::size_t i = 0; i < path.entries.size(); ++i) {
        const auto& e = path.entries[i];
        json row{{"order", e.order},
                 {"lag", i == 0 ? json(nullptr) : json(path.lags.at(i - 1))},
                 {"elpd", elpd_to_json(e.elpd)},
                 {"diff", e.diff.diff},
                 {"diff_se", e.diff.se},
                 {"mean_kl", e.mean_kl},
                 {"selection_probability", e.selection_probability}};
        entries.push_back(std::move(row));
    }
    return {{"reference_elpd", elpd_to_json(path.reference_elpd)}, {"entries", std::move(entries)}};
}

json joint_fit_to_json(const JointFit& fit) {
    json coefs = json::object();
    const Eigen::VectorXd mean = fit.fit.draws.coefficient_mean();
    for (std::size_t j = 0; j < fit.fit.draws.names.size(); ++j) {
        coefs[fit.fit.draws.names[j]] = mean(static_cast<Eigen::Index>(j));
    }
    return {{"ar_lags", fit.ar_lags},
            {"ma_lags", fit.ma_lags},
            {"layout", {{"noise_ar_order", fit.layout.noise_ar_order}, {"first_row", fit.layout.first_row}}},
            {"coefficient_means", std::move(coefs)},
            {"sigma_mean", fit.fit.draws.sigma.mean()},
            {"max_rhat", fit.fit.draws.max_rhat()},
            {"elpd", elpd_to_json(fit.elpd)}};
}

json report_to_json(const OrderReport& report) {
    json out;
    out["procedure"] = report.procedure;
    out["selected"] = order_to_json(report.selected);
    out["reference"] = order_to_json(report.reference);
    out["seed"] = report.seed;
    out["mcmc_fits"] = {{"search", report.search_fits}, {"reporting", report.reporting_fits}};
    json stages = json::array();
    json projected = json::object();
    for (const auto& st : report.stages) {
        out["path_" + st.name] = path_to_json(st.path);
        const auto& chosen = st.path.entries.at(static_cast<std::size_t>(st.selection.order));
        projected[st.name] = elpd_to_json(chosen.elpd);
        stages.push_back({{"name", st.name},
                          {"selected_order", st.selection.order},
                          {"selection_warning", st.selection.warning},
                          {"seed", st.seed},
                          {"max_rhat", st.max_rhat},
                          {"convergence_warning", st.convergence_warning},
                          {"nonstationary_draws", st.nonstationary_draws}});
    }
    out["stages"] = std::move(stages);
    out["projected_elpd"] = std::move(projected);
    out["refit"] = report.refit ? joint_fit_to_json(*report.refit) : json(nullptr);
    out["warnings"] = report.warnings;
    return out;
}

json baseline_to_json(const BaselineReport& report) {
    const auto& sw = report.stepwise;
    json trace = json::array();
    for (const auto& t : sw.trace) {
        trace.push_back({{"p", t.p},
                         {"q", t.q},
                         {"intercept", t.intercept},
                         {"aic", std::isfinite(t.aic) ? json(t.aic) : json(nullptr)},
                         {"loglik", std::isfinite(t.loglik) ? json(t.loglik) : json(nullptr)},
                         {"converged", t.converged},
                         {"near_unit_root", t.near_unit_root},
                         {"move", t.move}});
    }
    json params{{"c", sw.fit.params.c}, {"phi", sw.fit.params.phi}, {"theta", sw.fit.params.theta},
                {"sigma", sw.fit.params.sigma}};
    return {{"procedure", "auto_arima"},
            {"selected", order_to_json({sw.order, {0, 0}, 0})},
            {"intercept", sw.intercept},
            {"seed", report.seed},
            {"ml_fit", {{"params", std::move(params)}, {"loglik", sw.fit.loglik}, {"aic", sw.fit.aic},
                        {"converged", sw.fit.converged}, {"iterations", sw.fit.iterations},
                        {"min_root_modulus", std::isfinite(sw.fit.min_root_modulus) ? json(sw.fit.min_root_modulus) : json(nullptr)}}},
            {"css_fits", sw.css_fits()},
            {"moves", sw.moves},
            {"mcmc_fits", report.mcmc_fits},
            {"trace", std::move(trace)},
            {"refit", joint_fit_to_json(report.refit)}};
}

bool outside_interval(const ElpdDiff& diff, double z) {
    return std::abs(diff.diff) > z * diff.se;
}

Comparison compare_reports(const OrderReport& projpred, const BaselineReport& baseline) {
    if (!projpred.refit) throw ArgumentError("compare: projpred report has no refit");
    Comparison c;
    c.projpred = projpred.selected;
    c.baseline = {baseline.stepwise.order, {0, 0}, 0};
    c.projpred_elpd = projpred.refit->elpd;
    c.baseline_elpd = baseline.refit.elpd;
    c.diff = elpd_diff(c.projpred_elpd, c.baseline_elpd);
    c.emboldened = outside_interval(c.diff);
    return c;
}

json comparison_to_json(const Comparison& c) {
    return {{"rows",
             json::array({{{"procedure", "projpred"}, {"selected", order_to_json(c.projpred)},
                           {"elpd", elpd_to_json(c.projpred_elpd)}},
                          {{"procedure", "auto_arima"}, {"selected", order_to_json(c.baseline)},
                           {"elpd", elpd_to_json(c.baseline_elpd)}}})},
            {"diff", {{"value", c.diff.diff}, {"se", c.diff.se}, {"z", 1.64}, {"emboldened", c.emboldened}}}};
}

json metadata_block(const std::string& command) {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return {{"command", command}, {"generated_at", buf}, {"tool", "tsproj"}};
}

namespace {

std::string format_order(const SarmaOrder& o) {
    std::ostringstream os;
    os << "(" << o.nonseasonal.p << "," << o.nonseasonal.q << ")";
    if (o.s >= 2) os << "x(" << o.seasonal.p << "," << o.seasonal.q << ")_" << o.s;
    return os.str();
}

void print_path(std::ostream& out, const std::string& name, const SearchPath& path, int selected) {
    out << name << " path (reference elpd " << std::fixed << std::setprecision(2) << path.reference_elpd.elpd << " +- "
        << path.reference_elpd.se << ")\n";
    out << "  order        elpd     diff   diff_se    mean_kl\n";
    for (const auto& e : path.entries) {
        out << (e.order == selected ? " *" : "  ") << std::setw(5) << e.order << std::setw(12) << e.elpd.elpd
            << std::setw(9) << e.diff.diff << std::setw(10) << e.diff.se << std::setw(11) << e.mean_kl << '\n';
    }
}

}  // namespace

void print_summary(std::ostream& out, const OrderReport& report) {
    out << "selected " << format_order(report.selected) << "  reference " << format_order(report.reference) << '\n';
    for (const auto& st : report.stages) print_path(out, st.name, st.path, st.selection.order);
    if (report.refit) {
        out << "refit elpd " << std::fixed << std::setprecision(2) << report.refit->elpd.elpd << " +- "
            << report.refit->elpd.se << '\n';
    }
    for (const auto& w : report.warnings) out << "warning: " << w << '\n';
}

void print_summary(std::ostream& out, const BaselineReport& report) {
    out << "selected " << format_order({report.stepwise.order, {0, 0}, 0})
        << (report.stepwise.intercept ? "" : " without intercept") << "  after " << report.stepwise.css_fits()
        << " CSS fits\n";
    out << "     p    q  c          aic\n";
    for (const auto& t : report.stepwise.trace) {
        out << std::setw(6) << t.p << std::setw(5) << t.q << std::setw(3) << (t.intercept ? 1 : 0) << std::setw(13)
            << std::fixed << std::setprecision(3) << t.aic << '\n';
    }
    out << "refit elpd " << std::setprecision(2) << report.refit.elpd.elpd << " +- " << report.refit.elpd.se << '\n';
}

void print_summary(std::ostream& out, const Comparison& c) {
    out << std::fixed << std::setprecision(2);
    out << "procedure   order            elpd      se\n";
    out << "projpred    " << std::setw(12) << std::left << format_order(c.projpred) << std::right << std::setw(10)
        << c.projpred_elpd.elpd << std::setw(8) << c.projpred_elpd.se << '\n';
    out << "auto_arima  " << std::setw(12) << std::left << format_order(c.baseline) << std::right << std::setw(10)
        << c.baseline_elpd.elpd << std::setw(8) << c.baseline_elpd.se << '\n';
    out << "diff " << c.diff.diff << " +- " << c.diff.se << (c.emboldened ? "  (outside 90% interval)" : "") << '\n';
}

}  // namespace tsproj
