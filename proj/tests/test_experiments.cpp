#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ammhedge/experiments.hpp"

using namespace ammhedge;
using namespace ammhedge::exp;

namespace {

Scenario small(std::int64_t n = 2000) {
    auto s = baseline_scenario();
    s.sim.n_paths = n;
    return s;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(Table, CsvHasProvenanceAndBothPrecisions) {
    Table t;
    t.name = "demo";
    t.provenance = {7, 100, "mc_gbm", "abc"};
    t.add_column("h (%)", 0);
    t.add_column("SR, raw", 2);
    t.add_column("Note", 0);
    t.rows.push_back({60.0, 0.93456789, std::string("say \"hi\"")});
    const auto printed = to_csv(t, false);
    EXPECT_EQ(printed, "# seed=7,n_paths=100,engine=mc_gbm,config_hash=abc\nh (%),\"SR, raw\",Note\n60,0.93,\"say \"\"hi\"\"\"\n");
    const auto full = to_csv(t, true);
    EXPECT_NE(full.find(",0.93456788999999996,"), std::string::npos);  // %.17g round-trips
    EXPECT_EQ(t.number(0, "SR, raw"), 0.93456789);
    EXPECT_EQ(t.text(0, "Note"), "say \"hi\"");
    EXPECT_THROW((void)t.column("missing"), std::out_of_range);
    EXPECT_EQ(t.row_where(60.0), 0U);
    EXPECT_NE(to_text(t).find("0.93"), std::string::npos);
}

TEST(Table, NonFiniteCells) {
    Table t;
    t.name = "nf";
    t.add_column("x", 2);
    t.rows.push_back({std::nan("")});
    t.rows.push_back({INFINITY});
    EXPECT_NE(to_csv(t, false).find("nan\ninf\n"), std::string::npos);
}

TEST(Table, WriteIsByteIdenticalAcrossRuns) {
    const auto dir = std::filesystem::temp_directory_path() / "ammhedge_exp_test";
    std::filesystem::remove_all(dir);
    const auto s = small(1000);
    const auto t1 = run_hedge_grid(s, std::vector<double>{0.0, 0.6});
    const auto files = write_table(t1, dir / "a");
    ASSERT_EQ(files.size(), 2U);
    EXPECT_EQ(files[0].filename(), "table4.csv");
    EXPECT_EQ(files[1].filename(), "table4_full.csv");
    const auto t2 = run_hedge_grid(s, std::vector<double>{0.0, 0.6});
    write_table(t2, dir / "b");
    EXPECT_EQ(slurp(dir / "a" / "table4.csv"), slurp(dir / "b" / "table4.csv"));
    EXPECT_EQ(slurp(dir / "a" / "table4_full.csv"), slurp(dir / "b" / "table4_full.csv"));
    std::filesystem::remove_all(dir);
}

TEST(Grid, FineGridAndFeasibility) {
    const auto g = fine_grid();
    ASSERT_EQ(g.size(), 21U);
    EXPECT_EQ(g[13], 0.65);
    EXPECT_EQ(g.back(), 1.0);
    PositionParams pos;
    pos.c_over_v0 = 1.2;
    const auto f = feasible_grid(g, pos);
    EXPECT_EQ(f.back(), 0.95);
    EXPECT_THROW(fine_grid(0.0), ConfigError);
}

TEST(Grid, ArgmaxTiesGoLow) {
    const std::vector<double> v{0.1, 0.9, std::nan(""), 0.9, 0.2};
    EXPECT_EQ(argmax_index(v), 1U);
    const std::vector<double> nan{std::nan(""), std::nan("")};
    EXPECT_THROW(argmax_index(nan), NumericalError);
}

TEST(Sweep, ValidatesAxisAndValues) {
    SweepSpec spec;
    spec.axis = "market.bogus";
    spec.values = {1.0};
    EXPECT_THROW(validate(spec), ConfigError);
    spec.axis = "market.rho";
    spec.values.clear();
    EXPECT_THROW(validate(spec), ConfigError);
    spec.values = {0.5};
    EXPECT_NO_THROW(validate(spec));
    spec.axis = "market.vol_scale";
    EXPECT_NO_THROW(validate(spec));
    spec.h_grid = {1.5};
    EXPECT_THROW(validate(spec), ConfigError);
}

TEST(Sweep, VolScaleMultipliesBothVolatilities) {
    auto s = baseline_scenario();
    set_axis(s, "market.vol_scale", 1.2);
    EXPECT_NEAR(s.market.sigma_a, 0.922 * 1.2, 1e-15);
    EXPECT_NEAR(s.market.sigma_b, 1.084 * 1.2, 1e-15);
    set_axis(s, "rates.r_b", 0.3);
    EXPECT_EQ(s.rates.r_b, 0.3);
    EXPECT_THROW(set_axis(s, "market.vol_scale", 0.0), ConfigError);
}

TEST(Sweep, ClosedFormEnginesOnly) {
    SweepSpec spec;
    spec.base = baseline_scenario();
    spec.axis = "position.c_over_v0";
    spec.values = {1.5, 2.0, 5.0};
    spec.engines = {Engine::Analytic, Engine::Fpt};
    const auto t = run_sensitivity(spec);
    ASSERT_EQ(t.rows.size(), 3U);
    EXPECT_EQ(t.provenance.n_paths, 0);
    EXPECT_EQ(t.provenance.engine, "analytic+fpt");
    EXPECT_NEAR(t.number(1, "h* (analytic)"), 0.977, 1e-3);
    EXPECT_NEAR(t.number(1, "h_bar (fpt)"), 0.7048, 1e-3);
    EXPECT_LT(t.number(0, "h** (fpt)"), t.number(1, "h** (fpt)"));
    EXPECT_NEAR(t.number(2, "h** (fpt)"), t.number(2, "h* (analytic)"), 1e-12);
}

TEST(Sweep, ResultsDoNotDependOnValueOrder) {
    SweepSpec spec;
    spec.base = small(1500);
    spec.axis = "sim.liq_penalty_frac";
    spec.values = {0.1, 0.3};
    spec.h_grid = {0.5, 0.6, 0.7, 0.8};
    const auto fwd = run_sensitivity(spec);
    std::reverse(spec.values.begin(), spec.values.end());
    const auto rev = run_sensitivity(spec);
    for (std::size_t j = 0; j < fwd.columns.size(); ++j) {
        EXPECT_EQ(std::get<double>(fwd.rows[0][j]), std::get<double>(rev.rows[1][j])) << fwd.columns[j];
    }
}

TEST(HedgeGrid, SinglePointZero) {
    const auto t = run_hedge_grid(small(500), std::vector<double>{0.0});
    ASSERT_EQ(t.rows.size(), 1U);
    EXPECT_EQ(t.number(0, "P(liq)"), 0.0);
    EXPECT_EQ(t.number(0, "SR (raw)"), t.number(0, "SR (+tx)"));
    EXPECT_THROW(run_hedge_grid(small(500), std::vector<double>{}), ConfigError);
}

TEST(AnalyticVsMc, ZeroHedgeRowIsZero) {
    const auto t = run_analytic_vs_mc(small(500), std::vector<double>{0.0, 0.6}, 500);
    EXPECT_EQ(t.number(0, "Analytical"), 0.0);
    EXPECT_EQ(t.number(0, "MC (no claims)"), 0.0);
    EXPECT_EQ(t.number(0, "MC (claims)"), 0.0);
    EXPECT_EQ(t.number(0, "LTV0"), 0.0);
    EXPECT_NEAR(t.number(1, "b"), 0.981, 5e-4);
    EXPECT_EQ(t.provenance.n_paths, 500);
}

TEST(Figures, ColumnsAndErrors) {
    const auto f1 = emit_figure_data("fig1", small(500), table4_grid());
    EXPECT_EQ(f1.columns[1], "SR (+tx)");
    EXPECT_EQ(f1.columns[2], "P(liq)");
    EXPECT_EQ(f1.rows.size(), table4_grid().size());
    const auto f2 = emit_figure_data("fig2", small(500), std::vector<double>{0.5});
    EXPECT_EQ(f2.columns[1], "E[ROE]");
    EXPECT_EQ(f2.columns[2], "Std");
    EXPECT_THROW(emit_figure_data("fig1", small(500), std::vector<double>{}), ConfigError);
    EXPECT_THROW(emit_figure_data("fig9", small(500), std::vector<double>{0.5}), ConfigError);
}

TEST(Rebalancing, PeriodicThirtyFiresThreeTimesOnSurvivors) {
    const auto t = run_rebalancing_comparison(small(2000), 0.6);
    ASSERT_EQ(t.rows.size(), 6U);
    EXPECT_EQ(t.number(0, "Avg rebal."), 0.0);
    EXPECT_EQ(t.number(5, "Avg rebal. (survivors)"), 3.0);
    EXPECT_EQ(t.number(4, "Avg rebal. (survivors)"), 6.0);
}

TEST(Jumps, StressTableShape) {
    const auto t = run_jump_stress(small(1000));
    ASSERT_EQ(t.rows.size(), 5U);
    EXPECT_EQ(t.text(0, "rho_J"), "GBM (baseline)");
    EXPECT_EQ(t.text(3, "Variance"), "unmatched");
    // Adding jump variance on top of the diffusion lowers the Sharpe ratio.
    EXPECT_LT(t.number(3, "SR"), t.number(1, "SR"));
}

TEST(Liquidation, ClaimsReduceLiquidation) {
    const auto t = run_liquidation_stats(small(3000));
    EXPECT_EQ(t.columns[2], "Claim/14d");
    EXPECT_LT(t.number(0, "Claim/14d"), t.number(0, "No claims"));
    EXPECT_LT(t.number(1, "Claim/14d"), t.number(1, "No claims"));
    EXPECT_LE(t.number(2, "No claims"), t.number(3, "No claims"));
}

TEST(Presets, NamesAndErrors) {
    const auto& names = preset_names();
    EXPECT_NE(std::find(names.begin(), names.end(), "table4"), names.end());
    EXPECT_THROW(run_preset("table99", baseline_scenario()), ConfigError);
    const auto tables = run_preset("analytic", baseline_scenario());
    ASSERT_EQ(tables.size(), 2U);
    EXPECT_EQ(tables[1].rows.size(), 8U);
}

TEST(Engines, ParseRoundTrip) {
    for (const auto e : {Engine::Analytic, Engine::Fpt, Engine::McGbm, Engine::McJump}) {
        EXPECT_EQ(parse_engine(engine_name(e)), e);
    }
    EXPECT_THROW(parse_engine("quantum"), ConfigError);
}
