#include <catch_amalgamated.hpp>

#include "support.hpp"
#include "tsproj/error.hpp"
#include "tsproj/search.hpp"

#include <map>

using namespace tsproj;
using Catch::Approx;

namespace {

ProjpredConfig quick(std::uint64_t seed) {
    ProjpredConfig c;
    c.sampler.chains = 2;
    c.sampler.warmup = 300;
    c.sampler.samples = 500;
    c.sampler.seed = seed;
    return c;
}

ElpdEstimate flat(double elpd, double se) {
    ElpdEstimate e;
    e.elpd = elpd;
    e.se = se;
    return e;
}

SearchPath synthetic_path(const std::vector<std::pair<double, double>>& diffs) {
    SearchPath path;
    path.reference_elpd = flat(-100.0, 5.0);
    for (std::size_t k = 0; k < diffs.size(); ++k) {
        SearchEntry e;
        e.order = static_cast<int>(k);
        e.diff = {diffs[k].first, diffs[k].second};
        e.elpd = flat(-100.0 + diffs[k].first, 5.0);
        path.entries.push_back(std::move(e));
        if (k > 0) path.lags.push_back(static_cast<int>(k));
    }
    return path;
}

}  // namespace

TEST_CASE("select_order on synthetic paths", "[search][select]") {
    REQUIRE(select_order(synthetic_path({{-0.5, 1.0}, {0.0, 0.5}})).order == 0);
    const auto last = select_order(synthetic_path({{-20.0, 3.0}, {-10.0, 2.0}, {0.0, 0.0}}));
    REQUIRE(last.order == 2);
    REQUIRE_FALSE(last.warning);
    const auto none = select_order(synthetic_path({{-20.0, 3.0}, {-10.0, 2.0}, {-1.0, 0.1}}));
    REQUIRE(none.order == 2);
    REQUIRE(none.warning);
    // the boundary diff + se = 0 is accepted
    REQUIRE(select_order(synthetic_path({{-2.0, 2.0}, {0.0, 0.0}})).order == 0);
    REQUIRE_THROWS_AS(select_order(SearchPath{}), ArgumentError);
}

TEST_CASE("forward search paths", "[search][forward]") {
    const auto y = simulate_arma({0.0, {0.6, -0.3}, {}, 1.0}, 250, std::nullopt, 3);
    const auto cfg = quick(4);
    const auto ref = fit_ar(y.values(), 4, cfg.prior, cfg.sampler);
    const auto path = forward_search(ref, 4);
    REQUIRE(path.entries.size() == 5);
    REQUIRE(path.lags == std::vector<int>{1, 2, 3, 4});
    for (std::size_t k = 1; k < path.entries.size(); ++k) {
        REQUIRE(path.entries[k].mean_kl <= path.entries[k - 1].mean_kl + 1e-12);
        const auto& prev = path.entries[k - 1].submodel.design;
        const auto& cur = path.entries[k].submodel.design;
        REQUIRE(cur.cols() == prev.cols() + 1);
        REQUIRE(cur.leftCols(prev.cols()) == prev);
    }
    REQUIRE(path.entries.back().elpd.elpd == Approx(path.reference_elpd.elpd).margin(1e-6));
    const auto sel = select_order(path);
    REQUIRE(sel.order >= 1);
    REQUIRE(sel.order <= 3);

    const auto zero = forward_search(ref, 0);
    REQUIRE(zero.entries.size() == 1);
    REQUIRE(zero.entries[0].submodel.design.cols() == 1);
    REQUIRE_THROWS_AS(forward_search(ref, 5), ArgumentError);
}

TEST_CASE("lag helpers", "[search][design]") {
    REQUIRE(multiplicative_lags(1, 1, 12) == std::vector<int>{1, 12, 13});
    REQUIRE(multiplicative_lags(2, 0, 12) == std::vector<int>{1, 2});
    REQUIRE(multiplicative_lags(0, 2, 4) == std::vector<int>{4, 8});
    REQUIRE_THROWS_AS(multiplicative_lags(1, 1, 1), ArgumentError);

    const auto layout = default_joint_layout(5, 5);
    REQUIRE(layout.noise_ar_order == 10);
    REQUIRE(layout.first_row == 15);
    const auto seasonal = default_joint_layout(2, 3, 12, 1, 1);
    REQUIRE(seasonal.noise_ar_order == 10 + 12);
    REQUIRE(seasonal.first_row == 22 + 15);

    const auto y = simulate_arma({0.0, {0.5}, {0.4}, 1.0}, 100, std::nullopt, 1);
    const auto noise = long_ar_residuals(y.values(), 10);
    REQUIRE(noise.size() == 100);
    for (int t = 0; t < 10; ++t) REQUIRE(noise[static_cast<std::size_t>(t)] == 0.0);
    const std::vector<int> ar{1, 2};
    const std::vector<int> ma{1};
    const auto d = joint_design(y.values(), noise, ar, ma, 15);
    REQUIRE(d.design.rows() == 85);
    REQUIRE(d.design.cols() == 4);
    REQUIRE(d.design(0, 1) == y[14]);
    REQUIRE(d.design(0, 2) == y[13]);
    REQUIRE(d.design(0, 3) == noise[14]);
    REQUIRE(d.response(0) == y[15]);
}

TEST_CASE("projpred_arma on AR(1) data", "[search][projpred]") {
    const auto y = simulate_arma({0.0, {0.7}, {}, 1.0}, 300, std::nullopt, 5);
    const auto before = mcmc_fit_count();
    const auto report = projpred_arma(y.values(), quick(6));
    REQUIRE(mcmc_fit_count() - before == 3);
    REQUIRE(report.search_fits == 2);
    REQUIRE(report.reporting_fits == 1);
    REQUIRE(report.arma() == ArmaOrder{1, 0});
    REQUIRE(report.reference.nonseasonal == ArmaOrder{5, 5});
    REQUIRE(report.stages.size() == 2);
    REQUIRE(report.stage("ar") != nullptr);
    REQUIRE(report.stage("ma") != nullptr);
    REQUIRE(report.stage("seasonal_ar") == nullptr);
    REQUIRE(report.refit.has_value());
    REQUIRE(report.refit->ar_lags == std::vector<int>{1});
    REQUIRE(report.refit->ma_lags.empty());

    const auto again = projpred_arma(y.values(), quick(6));
    REQUIRE(again.selected == report.selected);
    REQUIRE(again.refit->elpd.elpd == report.refit->elpd.elpd);

    auto no_refit = quick(6);
    no_refit.reporting_refit = false;
    const auto bare = projpred_arma(y.values(), no_refit);
    REQUIRE_FALSE(bare.refit.has_value());
    REQUIRE(bare.reporting_fits == 0);
    REQUIRE(bare.selected == report.selected);
}

TEST_CASE("selection is invariant to rescaling", "[search][projpred]") {
    const auto y = simulate_arma({0.0, {0.5, -0.3}, {0.4}, 1.0}, 300, std::nullopt, 7);
    auto cfg = quick(8);
    cfg.reporting_refit = false;
    const auto a = projpred_arma(y.values(), cfg);
    const auto scaled = y.scaled(10.0);
    const auto b = projpred_arma(scaled.values(), cfg);
    REQUIRE(a.selected == b.selected);
}

TEST_CASE("white noise selects the empty model", "[search][projpred]") {
    int empty = 0;
    for (int rep = 0; rep < 20; ++rep) {
        const auto y = simulate_arma({0.0, {}, {}, 1.0}, 200, std::nullopt, 1000 + static_cast<std::uint64_t>(rep));
        auto cfg = quick(static_cast<std::uint64_t>(rep) + 1);
        cfg.reporting_refit = false;
        const auto r = projpred_arma(y.values(), cfg);
        REQUIRE(r.arma().p <= 5);
        REQUIRE(r.arma().q <= 5);
        if (r.arma() == ArmaOrder{0, 0}) ++empty;
    }
    INFO("empty model chosen " << empty << " of 20");
    REQUIRE(empty >= 14);
}

TEST_CASE("projpred argument checks", "[search][projpred]") {
    const auto y = simulate_arma({0.0, {0.5}, {}, 1.0}, 30, std::nullopt, 9);
    REQUIRE_THROWS_AS(projpred_arma(y.values(), quick(1)), ArgumentError);
    const auto z = simulate_arma({0.0, {0.5}, {}, 1.0}, 300, std::nullopt, 9);
    REQUIRE_THROWS_AS(projpred_sarma(z.values(), 1, quick(1)), ArgumentError);
    auto neg = quick(1);
    neg.p_star = -1;
    REQUIRE_THROWS_AS(projpred_arma(z.values(), neg), ArgumentError);
}

TEST_CASE("seasonal stages find no seasonality in plain ARMA data", "[search][sarma]") {
    std::map<std::pair<int, int>, int> counts;
    for (int rep = 0; rep < 5; ++rep) {
        const auto y = simulate_arma({0.0, {0.6}, {}, 1.0}, 500, std::nullopt, 200 + static_cast<std::uint64_t>(rep));
        auto cfg = quick(static_cast<std::uint64_t>(rep) + 3);
        cfg.reporting_refit = false;
        const auto r = projpred_sarma(y.values(), 12, cfg);
        REQUIRE(r.stages.size() == 4);
        REQUIRE(r.selected.s == 12);
        REQUIRE(r.search_fits == 4);
        ++counts[{r.selected.seasonal.p, r.selected.seasonal.q}];
    }
    REQUIRE(counts[{0, 0}] >= 3);
}

TEST_CASE("AR projections of ARMA references", "[search][arma_to_ar]") {
    const auto ar = simulate_arma({0.0, {0.6, -0.3}, {}, 1.0}, 300, std::nullopt, 10);
    auto cfg = quick(11);
    const auto r = arma_to_ar_projection(ar.values(), 2, 0, 8, cfg);
    REQUIRE(r.path.entries.size() == 9);
    REQUIRE(r.selection.order <= 3);

    const auto mean_only = arma_to_ar_projection(ar.values(), 0, 0, 0, cfg);
    REQUIRE(mean_only.path.entries.size() == 1);
    REQUIRE(mean_only.selection.order == 0);
    REQUIRE_THROWS_AS(arma_to_ar_projection(ar.values(), 3, 0, 2, cfg), ArgumentError);

    const auto arma = simulate_arma({0.0, {0.5, -0.3}, {0.6, 0.4, 0.3}, 1.0}, 300, std::nullopt, 12);
    const auto joint = arma_to_ar_projection(arma.values(), 5, 5, 10, cfg, ArToArReference::joint_arma);
    REQUIRE(joint.path.entries.size() == 11);
    REQUIRE(joint.selection.order >= 1);
    REQUIRE(joint.reference.ma_lags.size() == 5);
}

TEST_CASE("joint projection variant", "[search][joint]") {
    const auto y = simulate_arma({0.0, {0.7}, {}, 1.0}, 300, std::nullopt, 13);
    const auto cfg = quick(14);
    const auto joint = joint_projection_variant(y.values(), cfg);
    const auto two_stage = projpred_arma(y.values(), cfg);
    REQUIRE(joint.procedure != two_stage.procedure);
    REQUIRE(joint.arma() == two_stage.arma());
    const auto again = joint_projection_variant(y.values(), cfg);
    REQUIRE(again.selected == joint.selected);
    REQUIRE(again.refit->elpd.elpd == joint.refit->elpd.elpd);
}
