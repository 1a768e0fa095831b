#include "tsproj/baseline.hpp"

#include "tsproj/error.hpp"
#include "tsproj/likelihood.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>
#include <gsl/gsl_vector.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <ostream>
#include <sstream>
#include <tuple>

namespace tsproj {

namespace {

constexpr double kPenalty = 1e100;

struct CssProblem {
    std::span<const double> series;
    ArmaOrder order;
    bool intercept;

    std::size_t dim() const { return static_cast<std::size_t>(order.p + order.q + (intercept ? 1 : 0)); }

    ArmaParams unpack(const double* x) const {
        ArmaParams a;
        std::size_t k = 0;
        if (intercept) a.c = x[k++];
        a.phi.assign(x + k, x + k + order.p);
        k += static_cast<std::size_t>(order.p);
        a.theta.assign(x + k, x + k + order.q);
        return a;
    }

    void pack(const ArmaParams& a, double* x) const {
        std::size_t k = 0;
        if (intercept) x[k++] = a.c;
        for (double v : a.phi) x[k++] = v;
        for (double v : a.theta) x[k++] = v;
    }

    // Half the length times the log mean square: the negative profiled loglik up to a constant.
    double objective(const ArmaParams& a) const {
        if (!check_stationarity(a.phi) || !check_invertibility(a.theta)) return kPenalty;
        const auto e = arma_residuals(series, a);
        double ss = 0.0;
        for (double v : e) ss += v * v;
        const double n = static_cast<double>(series.size());
        if (!(ss > 0.0) || !std::isfinite(ss)) return kPenalty;
        return 0.5 * n * std::log(ss / n);
    }
};

double gsl_objective(const gsl_vector* x, void* data) {
    const auto* prob = static_cast<const CssProblem*>(data);
    return prob->objective(prob->unpack(x->data));
}

struct MinimizerDeleter {
    void operator()(gsl_multimin_fminimizer* m) const { gsl_multimin_fminimizer_free(m); }
};
struct VectorDeleter {
    void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};

struct SimplexResult {
    std::vector<double> x;
    double value = kPenalty;
    bool converged = false;
    int iterations = 0;
};

SimplexResult run_simplex(const CssProblem& prob, const std::vector<double>& start, const std::vector<double>& steps,
                          const CssOptions& options) {
    const std::size_t n = prob.dim();
    gsl_multimin_function f{&gsl_objective, n, const_cast<CssProblem*>(&prob)};
    std::unique_ptr<gsl_vector, VectorDeleter> x(gsl_vector_alloc(n));
    std::unique_ptr<gsl_vector, VectorDeleter> ss(gsl_vector_alloc(n));
    for (std::size_t i = 0; i < n; ++i) {
        gsl_vector_set(x.get(), i, start[i]);
        gsl_vector_set(ss.get(), i, steps[i]);
    }
    std::unique_ptr<gsl_multimin_fminimizer, MinimizerDeleter> m(
        gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n));
    gsl_multimin_fminimizer_set(m.get(), &f, x.get(), ss.get());

    SimplexResult out;
    for (; out.iterations < options.max_iterations; ++out.iterations) {
        if (gsl_multimin_fminimizer_iterate(m.get()) != GSL_SUCCESS) break;
        if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(m.get()), options.tolerance) == GSL_SUCCESS) {
            out.converged = true;
            ++out.iterations;
            break;
        }
    }
    out.x.assign(m->x->data, m->x->data + n);
    out.value = m->fval;
    return out;
}

// Long-AR residuals as noise proxy, then least squares on lagged y and lagged proxy.
ArmaParams two_stage_start(std::span<const double> series, ArmaOrder order, bool intercept) {
    ArmaParams a;
    a.phi.assign(static_cast<std::size_t>(order.p), 0.0);
    a.theta.assign(static_cast<std::size_t>(order.q), 0.0);
    if (intercept) a.c = sample_mean(series);
    const int span = std::max(order.p, order.q);
    if (span == 0) return a;
    const int ell = std::min<int>(std::max(10, 2 * span), static_cast<int>(series.size()) / 4);
    const std::size_t first = static_cast<std::size_t>(ell + span);
    const auto cols = static_cast<Eigen::Index>(order.p + order.q + (intercept ? 1 : 0));
    if (ell < 1 || series.size() < first + static_cast<std::size_t>(cols) + 5) return a;

    const std::vector<double> noise = long_ar_residuals(series, ell);
    std::vector<int> ar_lags = strided_lags(order.p, 1);
    std::vector<int> ma_lags = strided_lags(order.q, 1);
    LagDesign ld = joint_design(series, noise, ar_lags, ma_lags, first);
    Eigen::MatrixXd x = intercept ? ld.design : Eigen::MatrixXd(ld.design.rightCols(ld.design.cols() - 1));
    const Eigen::VectorXd beta = x.colPivHouseholderQr().solve(ld.response);
    if (!beta.allFinite()) return a;
    Eigen::Index k = 0;
    if (intercept) a.c = beta(k++);
    for (auto& v : a.phi) v = beta(k++);
    for (auto& v : a.theta) v = beta(k++);
    // Pull an inadmissible estimate back toward zero.
    for (int tries = 0; tries < 50 && (!check_stationarity(a.phi) || !check_invertibility(a.theta)); ++tries) {
        for (auto& v : a.phi) v *= 0.9;
        for (auto& v : a.theta) v *= 0.9;
    }
    return a;
}

}  // namespace

MlFit fit_arma_css(std::span<const double> series, ArmaOrder order, bool intercept, const CssOptions& options) {
    if (order.p < 0 || order.q < 0) throw ArgumentError("fit_arma_css: orders must be non-negative");
    const double T = static_cast<double>(series.size());
    if (static_cast<double>(order.p + order.q + 2) >= T / 4.0) {
        std::ostringstream os;
        os << "fit_arma_css: order (" << order.p << ',' << order.q << ") too large for series of length " << series.size();
        throw ArgumentError(os.str());
    }
    const CssProblem prob{series, order, intercept};
    const std::size_t n = prob.dim();

    MlFit out;
    out.intercept = intercept;
    ArmaParams best;
    best.phi.assign(static_cast<std::size_t>(order.p), 0.0);
    best.theta.assign(static_cast<std::size_t>(order.q), 0.0);
    double best_value = prob.objective(best);

    if (n > 0) {
        const double sd = std::max(sample_sd(series), 1e-8);
        std::vector<double> steps(n, 0.1);
        if (intercept) steps[0] = 0.1 * sd;

        ArmaParams zero = best;
        if (intercept) zero.c = sample_mean(series);
        std::vector<std::vector<double>> starts;
        for (const ArmaParams& s : {two_stage_start(series, order, intercept), zero}) {
            std::vector<double> x(n);
            prob.pack(s, x.data());
            starts.push_back(std::move(x));
        }
        bool converged = false;
        for (const auto& start : starts) {
            SimplexResult r = run_simplex(prob, start, steps, options);
            // Restart once from the optimum to escape a collapsed simplex.
            SimplexResult polish = run_simplex(prob, r.x, steps, options);
            polish.iterations += r.iterations;
            if (polish.value > r.value) {
                polish.x = r.x;
                polish.value = r.value;
            }
            out.iterations += polish.iterations;
            if (polish.value < best_value) {
                best_value = polish.value;
                best = prob.unpack(polish.x.data());
                converged = polish.converged && polish.value < kPenalty;
            }
        }
        out.converged = converged;
    } else {
        out.converged = true;
    }

    const auto e = arma_residuals(series, best);
    double ss = 0.0;
    for (double v : e) ss += v * v;
    best.sigma = std::sqrt(ss / T);
    out.params = best;
    if (best_value >= kPenalty || !(best.sigma > 0.0)) {
        out.converged = false;
        out.loglik = -std::numeric_limits<double>::infinity();
    } else {
        out.loglik = -0.5 * T * (std::log(2.0 * std::numbers::pi * best.sigma * best.sigma) + 1.0);
    }
    const int k = order.p + order.q + (intercept ? 1 : 0) + 1;
    out.aic = 2.0 * k - 2.0 * out.loglik;

    out.min_root_modulus = std::numeric_limits<double>::infinity();
    std::vector<double> ma(best.theta.size());
    std::transform(best.theta.begin(), best.theta.end(), ma.begin(), [](double t) { return -t; });
    for (const auto& coefs : {best.phi, ma}) {
        for (double m : ar_root_moduli(coefs)) out.min_root_modulus = std::min(out.min_root_modulus, m);
    }
    return out;
}

// ---------------------------------------------------------------------------

StepwiseResult stepwise_search(std::span<const double> series, const StepwiseConfig& config) {
    if (config.max_p < 0 || config.max_q < 0) throw ArgumentError("stepwise_search: bounds must be non-negative");
    using Key = std::tuple<int, int, bool>;
    std::map<Key, MlFit> fits;
    StepwiseResult out;
    const double T = static_cast<double>(series.size());

    auto admissible = [&](int p, int q) {
        return p >= 0 && q >= 0 && p <= config.max_p && q <= config.max_q && static_cast<double>(p + q + 2) < T / 4.0;
    };
    // Near-cancelling AR and MA roots inflate the CSS likelihood without
    // describing the data; such fits take no part in the search.
    auto near_unit_root = [&](const MlFit& f) { return f.min_root_modulus < config.min_root_modulus; };
    auto evaluate = [&](int p, int q, bool c, int move) -> const MlFit* {
        if (!admissible(p, q)) return nullptr;
        const Key key{p, q, c};
        auto it = fits.find(key);
        if (it == fits.end()) {
            it = fits.emplace(key, fit_arma_css(series, {p, q}, c, config.css)).first;
            const MlFit& f = it->second;
            out.trace.push_back({p, q, c, f.aic, f.loglik, f.converged, near_unit_root(f), move});
        }
        const MlFit& f = it->second;
        return std::isfinite(f.aic) && !near_unit_root(f) ? &f : nullptr;
    };

    Key best{0, 0, config.intercept};
    double best_aic = std::numeric_limits<double>::infinity();
    const std::pair<int, int> initial[] = {{0, 0}, {1, 0}, {0, 1}, {2, 2}};
    for (auto [p, q] : initial) {
        p = std::min(p, config.max_p);
        q = std::min(q, config.max_q);
        if (const MlFit* f = evaluate(p, q, config.intercept, 0); f && f->aic < best_aic) {
            best_aic = f->aic;
            best = {p, q, config.intercept};
        }
    }
    if (!std::isfinite(best_aic)) throw ConvergenceError("stepwise_search: no candidate model could be fit");

    for (int move = 1; move <= config.max_moves; ++move) {
        const auto [p, q, c] = best;
        std::vector<Key> neighbours = {{p - 1, q, c},     {p + 1, q, c},     {p, q - 1, c},
                                       {p, q + 1, c},     {p - 1, q - 1, c}, {p + 1, q + 1, c},
                                       {p - 1, q + 1, c}, {p + 1, q - 1, c}};
        if (config.toggle_intercept) neighbours.push_back({p, q, !c});
        bool moved = false;
        for (const auto& [np, nq, nc] : neighbours) {
            const MlFit* f = evaluate(np, nq, nc, move);
            if (f && f->aic < best_aic) {
                best_aic = f->aic;
                best = {np, nq, nc};
                moved = true;
                break;
            }
        }
        if (!moved) break;
        out.moves = move;
    }

    const auto [p, q, c] = best;
    out.order = {p, q};
    out.intercept = c;
    out.fit = fits.at(best);
    return out;
}

void write_trace_csv(std::ostream& out, const std::vector<TraceEntry>& trace) {
    out << "p,q,intercept,aic,loglik,converged,near_unit_root,move\n";
    out.precision(17);
    for (const auto& e : trace) {
        out << e.p << ',' << e.q << ',' << (e.intercept ? 1 : 0) << ',' << e.aic << ',' << e.loglik << ','
            << (e.converged ? 1 : 0) << ',' << (e.near_unit_root ? 1 : 0) << ',' << e.move << '\n';
    }
}

BaselineReport mcmc_autoarima(std::span<const double> series, const ProjpredConfig& config,
                              const StepwiseConfig& stepwise) {
    config.sampler.validate();
    BaselineReport out;
    out.stepwise = stepwise_search(series, stepwise);
    out.seed = config.sampler.seed;
    const JointLayout layout = config.layout.value_or(default_joint_layout(
        std::max(config.p_star, stepwise.max_p), std::max(config.q_star, stepwise.max_q)));
    SamplerConfig sampler = config.sampler;
    sampler.seed += kRefitSeedOffset;
    out.refit = fit_joint_arma(series, SarmaOrder{out.stepwise.order, {0, 0}, 0}, layout, config.prior, sampler,
                               config.psis);
    out.mcmc_fits = 1;
    return out;
}

}  // namespace tsproj
