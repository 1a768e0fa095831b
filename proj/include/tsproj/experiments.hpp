#pragma once

#include "tsproj/baseline.hpp"
#include "tsproj/search.hpp"
#include "tsproj/timeseries.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace tsproj {

struct ScenarioTruth {
    std::string label;
    ArmaParams params;
    std::optional<ArmaParams> seasonal;
    int s = 0;
};

enum class Scenario { stability, sarma_stability, noise, distant_lags, arma_to_ar, bad_projection };

Scenario parse_scenario(const std::string& name);  // ArgumentError on unknown names
std::string scenario_name(Scenario s);

struct ExperimentConfig {
    Scenario scenario = Scenario::stability;
    int replications = 20;
    std::size_t length = 300;
    std::uint64_t seed = 1;
    std::vector<double> noise_grid{0.25, 0.5, 1.0, 2.0, 4.0};
    std::vector<ScenarioTruth> truths;  // empty: scenario defaults
    int max_ar = 20;                    // arma-to-ar projection range
    ProjpredConfig projpred;
    StepwiseConfig stepwise;
    int threads = 0;  // 0: hardware concurrency; TSPROJ_THREADS caps either way
    std::filesystem::path output_dir;

    void validate() const;
};

/// Scenario defaults: truths, series length and reference orders.
ExperimentConfig default_experiment(Scenario scenario);

/// Flat `key = value` file; '#' starts a comment. Unknown keys are errors.
void apply_config_file(const std::filesystem::path& path, ExperimentConfig& config);
void apply_config_value(const std::string& key, const std::string& value, ExperimentConfig& config);

std::uint64_t replication_seed(std::uint64_t base, std::size_t truth_index, int replication);

struct ReplicationRecord {
    std::string truth;
    double noise = 1.0;
    int replication = 0;
    std::uint64_t seed = 0;
    std::string procedure;
    SarmaOrder selected;
    double elpd = 0.0;
    double elpd_se = 0.0;
    int mcmc_fits = 0;
    int css_fits = 0;
    double seconds = 0.0;
    bool failed = false;
    std::vector<std::string> warnings;
};

struct PathPoint {
    std::string truth;
    int replication = 0;
    int order = 0;
    double elpd = 0.0;
    double elpd_se = 0.0;
    double diff = 0.0;
    double diff_se = 0.0;
};

struct BenchResult {
    Scenario scenario = Scenario::stability;
    std::vector<ReplicationRecord> records;  // ordered by (truth, noise, replication, procedure)
    std::vector<PathPoint> paths;            // arma-to-ar search paths

    std::vector<const ReplicationRecord*> select(const std::string& procedure, const std::string& truth = {}) const;
};

/// Number of workers: min(requested or hardware, TSPROJ_THREADS), at least 1.
int worker_count(int requested);

BenchResult run_bench(const ExperimentConfig& config, const std::function<void(const std::string&)>& progress = {});

/// records.csv, histogram.csv, timings.csv and (arma-to-ar) path.csv in `dir`.
void write_bench_outputs(const BenchResult& result, const std::filesystem::path& dir);

struct HistogramRow {
    std::string truth;
    double noise = 1.0;
    std::string procedure;
    std::string component;  // p, q, P, Q
    int order = 0;
    int count = 0;
    double frequency = 0.0;
};

std::vector<HistogramRow> histogram(const BenchResult& result);

/// Shannon entropy (nats) of the joint order distribution of a set of records.
double selection_entropy(const std::vector<const ReplicationRecord*>& records);

/// Most frequent selected order; ties go to the smallest order.
SarmaOrder modal_order(const std::vector<const ReplicationRecord*>& records);

}  // namespace tsproj
