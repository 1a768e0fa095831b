#include "tsproj/experiments.hpp"

#include "tsproj/error.hpp"
#include "tsproj/posterior.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace tsproj {

namespace {

ArmaParams arma(std::vector<double> phi, std::vector<double> theta, double sigma = 1.0) {
    ArmaParams a;
    a.phi = std::move(phi);
    a.theta = std::move(theta);
    a.sigma = sigma;
    return a;
}

ScenarioTruth plain(std::string label, ArmaParams params) {
    ScenarioTruth t;
    t.label = std::move(label);
    t.params = std::move(params);
    return t;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<double> parse_list(const std::string& value) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        std::size_t used = 0;
        const double v = std::stod(item, &used);
        if (used != item.size()) throw ArgumentError("config: bad number '" + item + "'");
        out.push_back(v);
    }
    return out;
}

long parse_int(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    long v = 0;
    try {
        v = std::stol(value, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != value.size()) throw ArgumentError("config: " + key + " expects an integer, got '" + value + "'");
    return v;
}

struct Task {
    std::size_t truth = 0;
    std::size_t noise = 0;
    int replication = 0;
};

std::vector<std::string> procedures(Scenario s) {
    switch (s) {
        case Scenario::arma_to_ar:
            return {"arma_to_ar", "auto_arima"};
        case Scenario::bad_projection:
            return {"projpred", "joint_projection"};
        default:
            return {"projpred", "auto_arima"};
    }
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

ReplicationRecord from_report(const OrderReport& r) {
    ReplicationRecord rec;
    rec.selected = r.selected;
    if (r.refit) {
        rec.elpd = r.refit->elpd.elpd;
        rec.elpd_se = r.refit->elpd.se;
    }
    rec.mcmc_fits = r.search_fits + r.reporting_fits;
    rec.warnings = r.warnings;
    return rec;
}

struct TaskOutput {
    std::vector<ReplicationRecord> records;
    std::vector<PathPoint> paths;
};

TaskOutput run_task(const ExperimentConfig& config, const Task& task) {
    const ScenarioTruth& truth = config.truths[task.truth];
    const double noise = config.scenario == Scenario::noise ? config.noise_grid[task.noise] : 1.0;
    // Noise levels share a seed so replications are matched across the grid.
    const std::uint64_t seed = replication_seed(config.seed, task.truth, task.replication);

    ArmaParams params = truth.params;
    params.sigma *= noise;
    const TimeSeries series = truth.seasonal
                                  ? simulate_sarma(params, *truth.seasonal, truth.s, config.length, std::nullopt, seed)
                                  : simulate_arma(params, config.length, std::nullopt, seed);

    ProjpredConfig pc = config.projpred;
    pc.sampler.seed = seed * 31 + 17;
    if (!pc.layout) {
        const int s = truth.seasonal ? truth.s : 0;
        pc.layout = default_joint_layout(std::max(pc.p_star, config.stepwise.max_p),
                                         std::max(pc.q_star, config.stepwise.max_q), s, s ? pc.P_star : 0,
                                         s ? pc.Q_star : 0);
    }

    TaskOutput out;
    for (const auto& proc : procedures(config.scenario)) {
        const auto start = std::chrono::steady_clock::now();
        ReplicationRecord rec;
        try {
            if (proc == "projpred") {
                rec = from_report(truth.seasonal ? projpred_sarma(series.values(), truth.s, pc)
                                                 : projpred_arma(series.values(), pc));
            } else if (proc == "joint_projection") {
                rec = from_report(joint_projection_variant(series.values(), pc));
            } else if (proc == "arma_to_ar") {
                const ArToArResult r = arma_to_ar_projection(series.values(), pc.p_star, pc.q_star, config.max_ar, pc);
                rec.selected.nonseasonal = {r.selection.order, 0};
                const auto& chosen = r.path.entries[static_cast<std::size_t>(r.selection.order)];
                rec.elpd = chosen.elpd.elpd;
                rec.elpd_se = chosen.elpd.se;
                rec.mcmc_fits = 1;
                if (r.selection.warning) rec.warnings.push_back("no AR order matched the reference");
                for (const auto& e : r.path.entries) {
                    out.paths.push_back({truth.label, task.replication, e.order, e.elpd.elpd, e.elpd.se, e.diff.diff,
                                         e.diff.se});
                }
            } else {
                const BaselineReport b = mcmc_autoarima(series.values(), pc, config.stepwise);
                rec.selected = {b.stepwise.order, {0, 0}, truth.seasonal ? truth.s : 0};
                rec.elpd = b.refit.elpd.elpd;
                rec.elpd_se = b.refit.elpd.se;
                rec.mcmc_fits = b.mcmc_fits;
                rec.css_fits = b.stepwise.css_fits();
            }
        } catch (const std::exception& e) {
            rec = {};
            rec.failed = true;
            rec.selected = {{-1, -1}, {-1, -1}, 0};
            rec.warnings.push_back(e.what());
        }
        rec.truth = truth.label;
        rec.noise = noise;
        rec.replication = task.replication;
        rec.seed = seed;
        rec.procedure = proc;
        rec.seconds = seconds_since(start);
        out.records.push_back(std::move(rec));
    }
    return out;
}

}  // namespace

Scenario parse_scenario(const std::string& name) {
    static const std::map<std::string, Scenario> names{{"stability", Scenario::stability},
                                                       {"sarma-stability", Scenario::sarma_stability},
                                                       {"noise", Scenario::noise},
                                                       {"distant-lags", Scenario::distant_lags},
                                                       {"arma-to-ar", Scenario::arma_to_ar},
                                                       {"bad-projection", Scenario::bad_projection}};
    const auto it = names.find(name);
    if (it == names.end()) throw ArgumentError("unknown scenario '" + name + "'");
    return it->second;
}

std::string scenario_name(Scenario s) {
    switch (s) {
        case Scenario::stability:
            return "stability";
        case Scenario::sarma_stability:
            return "sarma-stability";
        case Scenario::noise:
            return "noise";
        case Scenario::distant_lags:
            return "distant-lags";
        case Scenario::arma_to_ar:
            return "arma-to-ar";
        case Scenario::bad_projection:
            return "bad-projection";
    }
    return "unknown";
}

void ExperimentConfig::validate() const {
    if (replications < 1) throw ArgumentError("experiment: replications must be at least 1");
    if (length < 20) throw ArgumentError("experiment: series length must be at least 20");
    if (truths.empty()) throw ArgumentError("experiment: no data-generating processes");
    if (scenario == Scenario::noise && noise_grid.empty()) throw ArgumentError("experiment: empty noise grid");
    for (double s : noise_grid) {
        if (!(s > 0.0)) throw ArgumentError("experiment: noise levels must be positive");
    }
    if (max_ar < projpred.p_star) throw ArgumentError("experiment: max_ar below p_star");
    projpred.sampler.validate();
}

ExperimentConfig default_experiment(Scenario scenario) {
    ExperimentConfig c;
    c.scenario = scenario;
    switch (scenario) {
        case Scenario::stability:
            c.truths = {plain("arma(1,0)", arma({0.7}, {})),
                        plain("arma(0,2)", arma({}, {0.6, 0.5})),
                        plain("arma(2,1)", arma({0.6, -0.3}, {0.5})),
                        plain("arma(1,2)", arma({0.6}, {0.5, 0.4}))};
            break;
        case Scenario::sarma_stability:
            c.length = 500;
            c.replications = 10;
            c.truths = {{"sarma(1,2)x(1,0)_12", arma({0.6}, {0.5, 0.4}), arma({0.6}, {}), 12}};
            break;
        case Scenario::noise:
            c.replications = 10;
            c.truths = {plain("ar(3)", arma({0.5, -0.3, 0.3}, {}))};
            break;
        case Scenario::distant_lags:
            c.length = 200;
            c.replications = 10;
            c.projpred.p_star = 6;
            c.projpred.q_star = 0;
            c.stepwise.max_p = 6;
            c.stepwise.max_q = 0;
            c.max_ar = 6;
            c.truths = {plain("ar(6)", arma({0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625}, {}))};
            break;
        case Scenario::arma_to_ar:
            c.replications = 10;
            c.truths = {plain("arma(2,3)", arma({0.5, -0.3}, {0.6, 0.4, 0.3}))};
            break;
        case Scenario::bad_projection:
            c.truths = {plain("arma(2,4)", arma({0.5, -0.3}, {0.6, 0.5, 0.4, 0.3}))};
            break;
    }
    return c;
}

void apply_config_value(const std::string& key, const std::string& value, ExperimentConfig& c) {
    auto as_int = [&] { return static_cast<int>(parse_int(key, value)); };
    if (key == "scenario") {
        c.scenario = parse_scenario(value);
    } else if (key == "replications") {
        c.replications = as_int();
    } else if (key == "length") {
        c.length = static_cast<std::size_t>(std::max(0L, parse_int(key, value)));
    } else if (key == "seed") {
        c.seed = static_cast<std::uint64_t>(parse_int(key, value));
    } else if (key == "noise_grid") {
        c.noise_grid = parse_list(value);
    } else if (key == "max_ar") {
        c.max_ar = as_int();
    } else if (key == "p_star") {
        c.projpred.p_star = as_int();
    } else if (key == "q_star") {
        c.projpred.q_star = as_int();
    } else if (key == "P_star") {
        c.projpred.P_star = as_int();
    } else if (key == "Q_star") {
        c.projpred.Q_star = as_int();
    } else if (key == "max_p") {
        c.stepwise.max_p = as_int();
    } else if (key == "max_q") {
        c.stepwise.max_q = as_int();
    } else if (key == "chains") {
        c.projpred.sampler.chains = as_int();
    } else if (key == "warmup") {
        c.projpred.sampler.warmup = as_int();
    } else if (key == "samples") {
        c.projpred.sampler.samples = as_int();
    } else if (key == "threads") {
        c.threads = as_int();
    } else if (key == "output") {
        c.output_dir = value;
    } else {
        throw ArgumentError("config: unknown key '" + key + "'");
    }
}

void apply_config_file(const std::filesystem::path& path, ExperimentConfig& config) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path.string());
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ArgumentError(path.string() + ":" + std::to_string(number) + ": expected key = value");
        }
        try {
            apply_config_value(trim(line.substr(0, eq)), trim(line.substr(eq + 1)), config);
        } catch (const ArgumentError& e) {
            throw ArgumentError(path.string() + ":" + std::to_string(number) + ": " + e.what());
        }
    }
}

std::uint64_t replication_seed(std::uint64_t base, std::size_t truth_index, int replication) {
    return base * 1000003ULL + static_cast<std::uint64_t>(truth_index) * 7919ULL +
           static_cast<std::uint64_t>(replication) * 104729ULL;
}

std::vector<const ReplicationRecord*> BenchResult::select(const std::string& procedure, const std::string& truth) const {
    std::vector<const ReplicationRecord*> out;
    for (const auto& r : records) {
        if (r.procedure == procedure && (truth.empty() || r.truth == truth)) out.push_back(&r);
    }
    return out;
}

int worker_count(int requested) {
    int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
    if (const char* env = std::getenv("TSPROJ_THREADS")) {
        const int cap = std::atoi(env);
        if (cap > 0) n = std::min(n, cap);
    }
    return std::max(n, 1);
}

BenchResult run_bench(const ExperimentConfig& config, const std::function<void(const std::string&)>& progress) {
    config.validate();
    std::vector<Task> tasks;
    const std::size_t levels = config.scenario == Scenario::noise ? config.noise_grid.size() : 1;
    for (std::size_t t = 0; t < config.truths.size(); ++t) {
        for (std::size_t n = 0; n < levels; ++n) {
            for (int r = 0; r < config.replications; ++r) tasks.push_back({t, n, r});
        }
    }

    std::vector<TaskOutput> outputs(tasks.size());
    std::atomic<std::size_t> next{0};
    std::mutex progress_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) {
            outputs[i] = run_task(config, tasks[i]);
            if (progress) {
                std::lock_guard lock(progress_mutex);
                const auto& rec = outputs[i].records.front();
                std::ostringstream os;
                os << rec.truth << " noise=" << rec.noise << " rep=" << rec.replication;
                progress(os.str());
            }
        }
    };
    const int n_workers = std::min<int>(worker_count(config.threads), static_cast<int>(tasks.size()));
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    BenchResult result;
    result.scenario = config.scenario;
    for (auto& o : outputs) {
        for (auto& r : o.records) result.records.push_back(std::move(r));
        for (auto& p : o.paths) result.paths.push_back(std::move(p));
    }
    return result;
}

std::vector<HistogramRow> histogram(const BenchResult& result) {
    using Key = std::tuple<std::string, double, std::string>;
    std::map<Key, std::vector<const ReplicationRecord*>> groups;
    std::vector<Key> order;
    for (const auto& r : result.records) {
        const Key key{r.truth, r.noise, r.procedure};
        if (!groups.count(key)) order.push_back(key);
        groups[key].push_back(&r);
    }
    std::vector<HistogramRow> out;
    for (const auto& key : order) {
        const auto& recs = groups[key];
        const char* names[] = {"p", "q", "P", "Q"};
        for (int c = 0; c < 4; ++c) {
            std::map<int, int> counts;
            int total = 0;
            for (const auto* r : recs) {
                if (r->failed) continue;
                const int v = c == 0 ? r->selected.nonseasonal.p
                            : c == 1 ? r->selected.nonseasonal.q
                            : c == 2 ? r->selected.seasonal.p
                                     : r->selected.seasonal.q;
                ++counts[v];
                ++total;
            }
            for (const auto& [v, n] : counts) {
                out.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), names[c], v, n,
                               total ? static_cast<double>(n) / total : 0.0});
            }
        }
    }
    return out;
}

double selection_entropy(const std::vector<const ReplicationRecord*>& records) {
    std::map<SarmaOrder, int> counts;
    int total = 0;
    for (const auto* r : records) {
        if (r->failed) continue;
        ++counts[r->selected];
        ++total;
    }
    double h = 0.0;
    for (const auto& [order, n] : counts) {
        const double p = static_cast<double>(n) / total;
        h -= p * std::log(p);
    }
    return h;
}

SarmaOrder modal_order(const std::vector<const ReplicationRecord*>& records) {
    std::map<SarmaOrder, int> counts;
    for (const auto* r : records) {
        if (!r->failed) ++counts[r->selected];
    }
    SarmaOrder best{{-1, -1}, {-1, -1}, 0};
    int best_n = 0;
    for (const auto& [order, n] : counts) {
        if (n > best_n) {
            best = order;
            best_n = n;
        }
    }
    return best;
}

namespace {

std::string quoted(const std::string& s) {
    return '"' + s + '"';
}

}  // namespace

void write_bench_outputs(const BenchResult& result, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto open = [&](const char* name) {
        std::ofstream out(dir / name);
        if (!out) throw IoError("cannot write " + (dir / name).string());
        out.precision(17);
        return out;
    };

    {
        auto out = open("records.csv");
        out << "scenario,truth,noise,replication,seed,procedure,p,q,P,Q,s,elpd,elpd_se,mcmc_fits,css_fits,failed,"
               "warnings\n";
        for (const auto& r : result.records) {
            std::string w;
            for (const auto& s : r.warnings) w += (w.empty() ? "" : "; ") + s;
            std::replace(w.begin(), w.end(), '"', '\'');
            out << scenario_name(result.scenario) << ',' << quoted(r.truth) << ',' << r.noise << ',' << r.replication << ','
                << r.seed << ',' << r.procedure << ',' << r.selected.nonseasonal.p << ',' << r.selected.nonseasonal.q
                << ',' << r.selected.seasonal.p << ',' << r.selected.seasonal.q << ',' << r.selected.s << ',' << r.elpd
                << ',' << r.elpd_se << ',' << r.mcmc_fits << ',' << r.css_fits << ',' << (r.failed ? 1 : 0) << ",\""
                << w << "\"\n";
        }
    }
    {
        auto out = open("histogram.csv");
        out << "truth,noise,procedure,component,order,count,frequency\n";
        for (const auto& h : histogram(result)) {
            out << quoted(h.truth) << ',' << h.noise << ',' << h.procedure << ',' << h.component << ',' << h.order << ','
                << h.count << ',' << h.frequency << '\n';
        }
    }
    {
        // Wall-clock times vary between runs and live apart from the deterministic tables.
        auto out = open("timings.csv");
        out << "truth,noise,replication,procedure,seconds\n";
        for (const auto& r : result.records) {
            out << quoted(r.truth) << ',' << r.noise << ',' << r.replication << ',' << r.procedure << ',' << r.seconds << '\n';
        }
    }
    if (!result.paths.empty()) {
        auto out = open("path.csv");
        out << "truth,replication,order,elpd,elpd_se,diff,diff_se\n";
        for (const auto& p : result.paths) {
            out << quoted(p.truth) << ',' << p.replication << ',' << p.order << ',' << p.elpd << ',' << p.elpd_se << ','
                << p.diff << ',' << p.diff_se << '\n';
        }
    }
}

}  // namespace tsproj
