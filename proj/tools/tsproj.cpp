#include "tsproj/baseline.hpp"
#include "tsproj/csv.hpp"
#include "tsproj/error.hpp"
#include "tsproj/experiments.hpp"
#include "tsproj/report.hpp"
#include "tsproj/search.hpp"
#include "tsproj/timeseries.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

using namespace tsproj;

namespace {

struct SampleFlags {
    std::uint64_t seed = 1;
    int chains = 4;
    int warmup = 1000;
    int samples = 1000;
};

struct InputFlags {
    std::string input;
    std::string output;
    int s = 0;
    int d = 0;
    int D = 0;
};

struct OrderFlags {
    int p_star = 5;
    int q_star = 5;
    int P_star = 3;
    int Q_star = 3;
};

void add_sampler(CLI::App* app, SampleFlags& f) {
    app->add_option("--seed", f.seed, "Base random seed");
    app->add_option("--chains", f.chains, "MCMC chains")->check(CLI::PositiveNumber);
    app->add_option("--warmup", f.warmup, "Warmup iterations per chain")->check(CLI::NonNegativeNumber);
    app->add_option("--samples", f.samples, "Retained draws per chain")->check(CLI::PositiveNumber);
}

void add_input(CLI::App* app, InputFlags& f) {
    app->add_option("--input,-i", f.input, "Series CSV")->required();
    app->add_option("--output,-o", f.output, "JSON report path (stdout when omitted)");
    app->add_option("--s", f.s, "Seasonal period");
    app->add_option("--d", f.d, "Non-seasonal differences")->check(CLI::NonNegativeNumber);
    app->add_option("--D", f.D, "Seasonal differences")->check(CLI::NonNegativeNumber);
}

void add_orders(CLI::App* app, OrderFlags& f) {
    app->add_option("--p-star", f.p_star, "Reference AR order")->check(CLI::NonNegativeNumber);
    app->add_option("--q-star", f.q_star, "Reference MA order")->check(CLI::NonNegativeNumber);
    app->add_option("--P-star", f.P_star, "Reference seasonal AR order")->check(CLI::NonNegativeNumber);
    app->add_option("--Q-star", f.Q_star, "Reference seasonal MA order")->check(CLI::NonNegativeNumber);
}

ProjpredConfig make_config(const SampleFlags& s, const OrderFlags& o) {
    ProjpredConfig c;
    c.p_star = o.p_star;
    c.q_star = o.q_star;
    c.P_star = o.P_star;
    c.Q_star = o.Q_star;
    c.sampler.seed = s.seed;
    c.sampler.chains = s.chains;
    c.sampler.warmup = s.warmup;
    c.sampler.samples = s.samples;
    return c;
}

TimeSeries load_input(const InputFlags& f) {
    if (f.D > 0 && f.s < 2) throw ArgumentError("--D requires --s of at least 2");
    const TimeSeries raw = load_series_csv(f.input);
    if (f.d == 0 && f.D == 0) return raw;
    return difference(raw, f.d, f.D, f.s);
}

void emit(const json& payload, const std::string& key, const std::string& command, const std::string& path) {
    json doc;
    doc["metadata"] = metadata_block(command);
    doc[key] = payload;
    if (path.empty()) {
        std::cout << doc.dump(2) << '\n';
        return;
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << doc.dump(2) << '\n';
}

// Summary goes to stderr when the JSON document itself is on stdout.
std::ostream& summary_stream(const InputFlags& f) {
    return f.output.empty() ? std::cerr : std::cout;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Projection predictive ARMA/SARMA order identification"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "Simulate an ARMA or SARMA series to CSV");
    std::vector<double> phi, theta, sphi, stheta;
    double sigma = 1.0, intercept = 0.0;
    std::size_t length = 300;
    std::optional<std::size_t> burn_in;
    int sim_s = 0;
    std::uint64_t sim_seed = 1;
    std::string sim_out;
    sim->add_option("--phi", phi, "AR coefficients")->delimiter(',');
    sim->add_option("--theta", theta, "MA coefficients")->delimiter(',');
    sim->add_option("--seasonal-phi", sphi, "Seasonal AR coefficients")->delimiter(',');
    sim->add_option("--seasonal-theta", stheta, "Seasonal MA coefficients")->delimiter(',');
    sim->add_option("--s", sim_s, "Seasonal period");
    sim->add_option("--sigma", sigma, "Noise standard deviation")->check(CLI::PositiveNumber);
    sim->add_option("--c", intercept, "Intercept");
    sim->add_option("--length", length, "Number of observations")->check(CLI::PositiveNumber);
    sim->add_option("--burn-in", burn_in, "Discarded initial draws");
    sim->add_option("--seed", sim_seed, "Random seed");
    sim->add_option("--output,-o", sim_out, "Output CSV")->required();

    // identify
    auto* ident = app.add_subcommand("identify", "Projection predictive order identification");
    InputFlags id_in;
    SampleFlags id_s;
    OrderFlags id_o;
    std::string procedure = "projpred";
    add_input(ident, id_in);
    add_sampler(ident, id_s);
    add_orders(ident, id_o);
    ident->add_option("--procedure", procedure, "projpred or joint")->check(CLI::IsMember({"projpred", "joint"}));

    // baseline
    auto* base = app.add_subcommand("baseline", "Stepwise AIC order search with Bayesian refit");
    InputFlags bl_in;
    SampleFlags bl_s;
    OrderFlags bl_o;
    StepwiseConfig bl_cfg;
    std::string trace_path;
    add_input(base, bl_in);
    add_sampler(base, bl_s);
    base->add_option("--max-p", bl_cfg.max_p, "Largest AR order")->check(CLI::NonNegativeNumber);
    base->add_option("--max-q", bl_cfg.max_q, "Largest MA order")->check(CLI::NonNegativeNumber);
    base->add_option("--trace", trace_path, "Trace CSV (default: <output>.trace.csv)");

    // compare
    auto* cmp = app.add_subcommand("compare", "Run both procedures and compare their elpd");
    InputFlags cmp_in;
    SampleFlags cmp_s;
    OrderFlags cmp_o;
    StepwiseConfig cmp_cfg;
    add_input(cmp, cmp_in);
    add_sampler(cmp, cmp_s);
    add_orders(cmp, cmp_o);
    cmp->add_option("--max-p", cmp_cfg.max_p, "Largest baseline AR order")->check(CLI::NonNegativeNumber);
    cmp->add_option("--max-q", cmp_cfg.max_q, "Largest baseline MA order")->check(CLI::NonNegativeNumber);

    // bench
    auto* bench = app.add_subcommand("bench", "Replicated simulation experiments");
    std::string scenario, config_path, bench_out;
    std::optional<int> reps, threads, chains, samples, warmup;
    std::optional<std::size_t> bench_len;
    std::optional<std::uint64_t> bench_seed;
    bool full_scale = false, quiet = false;
    bench->add_option("scenario", scenario, "stability, sarma-stability, noise, distant-lags, arma-to-ar, bad-projection")
        ->required();
    bench->add_option("--config", config_path, "key = value config file");
    bench->add_option("--replications", reps, "Replications per truth")->check(CLI::PositiveNumber);
    bench->add_option("--length", bench_len, "Series length")->check(CLI::PositiveNumber);
    bench->add_option("--seed", bench_seed, "Base seed");
    bench->add_option("--threads", threads, "Worker threads (capped by TSPROJ_THREADS)")->check(CLI::PositiveNumber);
    bench->add_option("--chains", chains, "MCMC chains")->check(CLI::PositiveNumber);
    bench->add_option("--samples", samples, "Retained draws per chain")->check(CLI::PositiveNumber);
    bench->add_option("--warmup", warmup, "Warmup iterations per chain")->check(CLI::NonNegativeNumber);
    bench->add_option("--output,-o", bench_out, "Output directory")->required();
    bench->add_flag("--full-scale", full_scale, "100 replications of length 500");
    bench->add_flag("--quiet,-q", quiet, "No progress output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*sim) {
            if ((!sphi.empty() || !stheta.empty()) && sim_s < 2) {
                throw ArgumentError("--seasonal-phi/--seasonal-theta require --s of at least 2");
            }
            if (sim_s != 0 && sphi.empty() && stheta.empty()) throw ArgumentError("--s given without seasonal coefficients");
            ArmaParams ns{intercept, phi, theta, sigma};
            const TimeSeries series = sim_s >= 2 ? simulate_sarma(ns, ArmaParams{0.0, sphi, stheta, 1.0}, sim_s, length,
                                                                  burn_in, sim_seed)
                                                 : simulate_arma(ns, length, burn_in, sim_seed);
            write_series_csv(sim_out, series.values());
        } else if (*ident) {
            const TimeSeries series = load_input(id_in);
            const ProjpredConfig cfg = make_config(id_s, id_o);
            OrderReport report;
            if (procedure == "joint") {
                report = joint_projection_variant(series.values(), cfg);
            } else if (id_in.s >= 2) {
                report = projpred_sarma(series.values(), id_in.s, cfg);
            } else {
                report = projpred_arma(series.values(), cfg);
            }
            emit(report_to_json(report), "report", "identify", id_in.output);
            print_summary(summary_stream(id_in), report);
        } else if (*base) {
            const TimeSeries series = load_input(bl_in);
            ProjpredConfig cfg = make_config(bl_s, bl_o);
            const BaselineReport report = mcmc_autoarima(series.values(), cfg, bl_cfg);
            emit(baseline_to_json(report), "report", "baseline", bl_in.output);
            if (trace_path.empty() && !bl_in.output.empty()) trace_path = bl_in.output + ".trace.csv";
            if (!trace_path.empty()) {
                std::ofstream out(trace_path);
                if (!out) throw IoError("cannot write " + trace_path);
                write_trace_csv(out, report.stepwise.trace);
            }
            print_summary(summary_stream(bl_in), report);
        } else if (*cmp) {
            const TimeSeries series = load_input(cmp_in);
            ProjpredConfig cfg = make_config(cmp_s, cmp_o);
            const int s = cmp_in.s >= 2 ? cmp_in.s : 0;
            cfg.layout = default_joint_layout(std::max(cfg.p_star, cmp_cfg.max_p), std::max(cfg.q_star, cmp_cfg.max_q), s,
                                              s ? cfg.P_star : 0, s ? cfg.Q_star : 0);
            const OrderReport pp =
                s ? projpred_sarma(series.values(), s, cfg) : projpred_arma(series.values(), cfg);
            const BaselineReport bl = mcmc_autoarima(series.values(), cfg, cmp_cfg);
            const Comparison c = compare_reports(pp, bl);
            json payload = comparison_to_json(c);
            payload["projpred"] = report_to_json(pp);
            payload["auto_arima"] = baseline_to_json(bl);
            emit(payload, "comparison", "compare", cmp_in.output);
            print_summary(summary_stream(cmp_in), c);
        } else if (*bench) {
            const Scenario sc = parse_scenario(scenario);
            ExperimentConfig cfg = default_experiment(sc);
            if (full_scale) {
                cfg.replications = 100;
                cfg.length = 500;
            }
            if (!config_path.empty()) apply_config_file(config_path, cfg);
            if (cfg.scenario != sc) throw ArgumentError("config file scenario differs from the command line");
            if (reps) cfg.replications = *reps;
            if (bench_len) cfg.length = *bench_len;
            if (bench_seed) cfg.seed = *bench_seed;
            if (threads) cfg.threads = *threads;
            if (chains) cfg.projpred.sampler.chains = *chains;
            if (samples) cfg.projpred.sampler.samples = *samples;
            if (warmup) cfg.projpred.sampler.warmup = *warmup;
            cfg.output_dir = bench_out;
            const BenchResult result = run_bench(cfg, [&](const std::string& msg) {
                if (!quiet) std::cerr << "done " << msg << '\n';
            });
            write_bench_outputs(result, cfg.output_dir);
        }
    } catch (const ArgumentError& e) {
        std::cerr << "tsproj: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "tsproj: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
