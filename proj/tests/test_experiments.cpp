#include <catch_amalgamated.hpp>

#include "tsproj/error.hpp"
#include "tsproj/experiments.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <unistd.h>

using namespace tsproj;
namespace fs = std::filesystem;

namespace {

ExperimentConfig tiny(int threads) {
    auto cfg = default_experiment(Scenario::stability);
    cfg.truths = {{"arma(1,0)", {0.0, {0.7}, {}, 1.0}, std::nullopt, 0}};
    cfg.replications = 3;
    cfg.length = 150;
    cfg.projpred.sampler.chains = 2;
    cfg.projpred.sampler.warmup = 200;
    cfg.projpred.sampler.samples = 200;
    cfg.threads = threads;
    return cfg;
}

}  // namespace

TEST_CASE("scenario names", "[experiments]") {
    for (const auto* name : {"stability", "sarma-stability", "noise", "distant-lags", "arma-to-ar", "bad-projection"}) {
        REQUIRE(scenario_name(parse_scenario(name)) == name);
    }
    REQUIRE_THROWS_AS(parse_scenario("fig3"), ArgumentError);
}

TEST_CASE("scenario defaults", "[experiments]") {
    const auto st = default_experiment(Scenario::stability);
    REQUIRE(st.replications == 20);
    REQUIRE(st.length == 300);
    REQUIRE_NOTHROW(st.validate());
    const auto sarma = default_experiment(Scenario::sarma_stability);
    REQUIRE(sarma.length == 500);
    const auto noise = default_experiment(Scenario::noise);
    REQUIRE(noise.noise_grid == std::vector<double>{0.25, 0.5, 1.0, 2.0, 4.0});
    auto bad = st;
    bad.replications = 0;
    REQUIRE_THROWS_AS(bad.validate(), ArgumentError);
}

TEST_CASE("seeds derive from the base seed", "[experiments]") {
    REQUIRE(replication_seed(1, 0, 0) == 1000003u);
    REQUIRE(replication_seed(1, 2, 3) == 1000003u + 2u * 7919u + 3u * 104729u);
    REQUIRE(replication_seed(1, 0, 1) != replication_seed(1, 1, 0));
}

TEST_CASE("config files", "[experiments]") {
    const auto path = fs::temp_directory_path() / ("tsproj_cfg_" + std::to_string(::getpid()) + ".cfg");
    {
        std::ofstream out(path);
        out << "# bench settings\nreplications = 7\nlength=250\nnoise_grid = 0.5, 1\nsamples = 300  # per chain\n";
    }
    auto cfg = default_experiment(Scenario::noise);
    apply_config_file(path, cfg);
    REQUIRE(cfg.replications == 7);
    REQUIRE(cfg.length == 250);
    REQUIRE(cfg.noise_grid == std::vector<double>{0.5, 1.0});
    REQUIRE(cfg.projpred.sampler.samples == 300);
    REQUIRE_THROWS_AS(apply_config_value("colour", "blue", cfg), ArgumentError);
    REQUIRE_THROWS_AS(apply_config_value("replications", "many", cfg), ArgumentError);
    fs::remove(path);
}

TEST_CASE("worker count honours the environment cap", "[experiments]") {
    ::setenv("TSPROJ_THREADS", "2", 1);
    REQUIRE(worker_count(8) == 2);
    REQUIRE(worker_count(1) == 1);
    ::unsetenv("TSPROJ_THREADS");
    REQUIRE(worker_count(3) == 3);
    REQUIRE(worker_count(0) >= 1);
}

TEST_CASE("bench results do not depend on parallelism", "[experiments][bench]") {
    const auto serial = run_bench(tiny(1));
    const auto parallel = run_bench(tiny(3));
    REQUIRE(serial.records.size() == 6);
    REQUIRE(parallel.records.size() == serial.records.size());
    for (std::size_t i = 0; i < serial.records.size(); ++i) {
        const auto& a = serial.records[i];
        const auto& b = parallel.records[i];
        REQUIRE(a.procedure == b.procedure);
        REQUIRE(a.replication == b.replication);
        REQUIRE(a.seed == b.seed);
        REQUIRE(a.selected == b.selected);
        REQUIRE(a.elpd == b.elpd);
        REQUIRE(a.css_fits == b.css_fits);
    }
    REQUIRE(serial.select("projpred").size() == 3);
    REQUIRE(serial.select("auto_arima", "arma(1,0)").size() == 3);

    const auto hist = histogram(serial);
    int total = 0;
    for (const auto& h : hist) {
        if (h.procedure == "projpred" && h.component == "p") total += h.count;
    }
    REQUIRE(total == 3);

    const auto dir = fs::temp_directory_path() / ("tsproj_bench_" + std::to_string(::getpid()));
    write_bench_outputs(serial, dir);
    for (const char* f : {"records.csv", "histogram.csv", "timings.csv"}) REQUIRE(fs::exists(dir / f));
    fs::remove_all(dir);
}

TEST_CASE("entropy and modal order", "[experiments]") {
    std::vector<ReplicationRecord> recs(4);
    recs[0].selected = {{1, 0}, {0, 0}, 0};
    recs[1].selected = {{1, 0}, {0, 0}, 0};
    recs[2].selected = {{2, 0}, {0, 0}, 0};
    recs[3].selected = {{2, 0}, {0, 0}, 0};
    std::vector<const ReplicationRecord*> ptrs;
    for (const auto& r : recs) ptrs.push_back(&r);
    REQUIRE(selection_entropy(ptrs) == Catch::Approx(std::log(2.0)));
    REQUIRE(modal_order(ptrs).nonseasonal == ArmaOrder{1, 0});
    ptrs.resize(2);
    REQUIRE(selection_entropy(ptrs) == 0.0);
}
