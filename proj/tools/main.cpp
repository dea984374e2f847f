// ammhedge: command-line front end for the hedge-ratio library.
//
// Exit codes: 0 success, 1 configuration error, 2 runtime or numerical error.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ammhedge/analytics.hpp"
#include "ammhedge/config.hpp"
#include "ammhedge/experiments.hpp"
#include "ammhedge/liquidation.hpp"
#include "ammhedge/montecarlo.hpp"

namespace {

using namespace ammhedge;

struct CommonOptions {
    std::string scenario_path;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> paths;
    std::optional<double> alpha;
    std::string out_dir;
    int tx = -1;  // -1 unset, 0 --no-tx, 1 --tx
    unsigned threads = 0;
};

std::uint64_t parse_seed(const std::string& text, const char* what) {
    try {
        std::size_t used = 0;
        const auto v = std::stoull(text, &used, 0);
        if (used == text.size()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError(std::string(what) + " is not an unsigned 64-bit integer: '" + text + "'");
}

Scenario build_scenario(const CommonOptions& o) {
    Scenario s = o.scenario_path.empty() ? baseline_scenario() : load_scenario(o.scenario_path);
    apply_overrides(s, o.overrides);
    if (o.seed) {
        s.sim.seed = *o.seed;
    } else if (const char* env = std::getenv("AMMHEDGE_SEED"); env && *env) {
        s.sim.seed = parse_seed(env, "AMMHEDGE_SEED");
    }
    if (o.paths) {
        if (*o.paths < 1) throw ConfigError("--paths must be at least 1");
        s.sim.n_paths = *o.paths;
    }
    if (o.tx >= 0) s.sim.include_tx_costs = o.tx == 1;
    if (o.threads > 0) s.sim.threads = o.threads;
    return s;
}

/// The simulator is well defined for zero volatility even though the closed forms are not,
/// so `simulate` accepts sigma = 0 and checks everything else.
void ensure_simulatable(const Scenario& s) {
    Scenario probe = s;
    if (probe.market.sigma_a == 0.0 && !probe.jump) probe.market.sigma_a = 1.0;
    if (probe.market.sigma_b == 0.0 && !probe.jump) probe.market.sigma_b = 1.0;
    ensure_valid(probe);
}

void emit(const std::vector<exp::Table>& tables, const CommonOptions& o) {
    for (std::size_t i = 0; i < tables.size(); ++i) {
        if (i) std::cout << '\n';
        std::cout << exp::to_text(tables[i]);
        if (!o.out_dir.empty()) {
            for (const auto& p : exp::write_table(tables[i], o.out_dir)) std::cerr << "wrote " << p.string() << '\n';
        }
    }
}

exp::Table summary_table(const Scenario& s, const mc::SummaryStats& st) {
    exp::Table t;
    t.name = "simulate";
    t.provenance = {s.sim.seed, s.sim.n_paths, s.jump ? "mc_jump" : "mc_gbm", scenario_hash(s)};
    const std::vector<std::pair<const char*, int>> cols{
        {"h (%)", 1},          {"E[ROE]", 3},          {"Std", 3},          {"SR (raw)", 3},     {"SR (+tx)", 3},
        {"P(loss)", 2},        {"P(liq)", 2},          {"5% VaR", 2},       {"Mean max LTV", 2}, {"p95 max LTV", 2},
        {"p99 max LTV", 2},    {"Avg rebal.", 2},      {"SE E[ROE]", 3},    {"SE SR", 3},        {"SE P(liq)", 3}};
    for (const auto& [name, d] : cols) t.add_column(name, d);
    t.rows.push_back({100.0 * s.position.h, st.e_roe_pp, st.std_pp, st.sr_raw, st.sr_tx, 100.0 * st.p_loss,
                      100.0 * st.p_liq, st.var5_pp, 100.0 * st.mean_max_ltv, 100.0 * st.p95_max_ltv,
                      100.0 * st.p99_max_ltv, st.avg_rebalances, st.e_roe_se_pp, st.sr_se, 100.0 * st.p_liq_se});
    return t;
}

void write_path_dump(const std::string& file, const std::vector<mc::PathResult>& results) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + file);
    out << "path_id,roe,liquidated,liq_day,max_ltv,n_rebalances\n";
    char buf[160];
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        char day[32] = "";
        if (r.liq_time_days) std::snprintf(day, sizeof day, "%g", *r.liq_time_days);
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%d,%s,%.17g,%d\n", i, r.roe, r.liquidated ? 1 : 0, day, r.max_ltv,
                      r.n_rebalances);
        out << buf;
    }
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const auto item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError("not a number list: '" + text + "'");
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hedge ratios for AMM liquidity positions hedged by collateralized borrowing"};
    // "--h" is the hedge ratio, so help is long-form only.
    app.set_help_flag("--help", "Print this help message and exit");
    app.require_subcommand(1);
    app.fallthrough();

    CommonOptions o;
    app.add_option("--scenario", o.scenario_path, "Scenario file (key = value lines)");
    app.add_option("--override", o.overrides, "key=value override, repeatable")->allow_extra_args(false);
    app.add_option("--seed", o.seed, "RNG seed (falls back to AMMHEDGE_SEED, then the scenario)");
    app.add_option("--paths", o.paths, "Monte Carlo path count");
    app.add_option("--alpha", o.alpha, "Liquidation probability tolerance");
    app.add_option("--out", o.out_dir, "Directory for CSV output");
    app.add_flag("--tx{1},--no-tx{0}", o.tx, "Report E[ROE], Std and VaR net of transaction costs");
    app.add_option("--threads", o.threads, "Worker threads (0 = all cores)");

    auto* analytic = app.add_subcommand("analytic", "Closed-form moments, optimal hedge and Sharpe table");
    std::vector<double> analytic_h;
    analytic->add_option("--h", analytic_h, "Hedge ratios for the Sharpe table");

    auto* fpt_cmd = app.add_subcommand("fpt", "First-passage liquidation probability and constrained hedge");
    std::vector<double> fpt_h;
    fpt_cmd->add_option("--h", fpt_h, "Hedge ratios to evaluate");

    auto* simulate = app.add_subcommand("simulate", "Run one Monte Carlo scenario");
    std::optional<double> sim_h;
    std::string dump_paths;
    simulate->add_option("--h", sim_h, "Hedge ratio (default: position.h)");
    simulate->add_option("--dump-paths", dump_paths, "Write per-path results to this CSV");

    auto* sweep = app.add_subcommand("sweep", "Optimal hedge across values of one parameter");
    std::string axis = "position.h";
    std::string values_text;
    std::vector<std::string> engines{"mc_gbm"};
    double grid_step = 0.05;
    std::string sweep_name = "sweep";
    sweep->add_option("--axis", axis, "Scenario key or market.vol_scale; position.h gives the hedge-grid table");
    sweep->add_option("--values", values_text, "Comma-separated axis values")->required();
    sweep->add_option("--engines", engines, "analytic, fpt, mc_gbm, mc_jump");
    sweep->add_option("--grid-step", grid_step, "Hedge grid step for the optimum search");
    sweep->add_option("--name", sweep_name, "Table name (output file stem)");

    auto* rebalance = app.add_subcommand("rebalance", "Compare rebalancing strategies");
    double rebalance_h = 0.60;
    rebalance->add_option("--h", rebalance_h, "Target hedge ratio");

    auto* jumps = app.add_subcommand("jumps", "GBM vs jump-diffusion comparison and stress tests");

    auto* calibrate = app.add_subcommand("calibrate", "Estimate volatilities and correlation from price CSVs");
    std::string csv_a, csv_b;
    calibrate->add_option("prices_a", csv_a, "CSV with date,price for token A")->required();
    calibrate->add_option("prices_b", csv_b, "CSV with date,price for token B")->required();

    auto* reproduce = app.add_subcommand("reproduce", "Run a named table or figure preset");
    std::string preset;
    std::string preset_help = "One of:";
    for (const auto& n : exp::preset_names()) preset_help += " " + n;
    reproduce->add_option("preset", preset, preset_help)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (calibrate->parsed()) {
            const auto m = estimate_market_params(read_price_csv(csv_a), read_price_csv(csv_b));
            std::printf("market.sigma_a = %.6f\nmarket.sigma_b = %.6f\nmarket.rho = %.6f\n", m.sigma_a, m.sigma_b,
                        m.rho);
            const auto errors = validate(m, RateParams{}, PositionParams{});
            for (const auto& e : errors) std::fprintf(stderr, "warning: %s\n", e.c_str());
            return errors.empty() ? 0 : 1;
        }

        Scenario s = build_scenario(o);

        if (simulate->parsed()) {
            if (sim_h) s.position.h = *sim_h;
            ensure_simulatable(s);
            const double h = s.position.h;
            const auto results = mc::simulate_grid(s, std::span<const double>(&h, 1)).front();
            const auto stats = mc::aggregate(results, s.sim, s.position.horizon_days, s.rates.r_f);
            emit({summary_table(s, stats)}, o);
            if (!dump_paths.empty()) write_path_dump(dump_paths, results);
            return 0;
        }

        ensure_valid(s);
        if (analytic->parsed()) {
            auto tables = exp::run_preset("analytic", s);
            if (!analytic_h.empty()) tables.back() = exp::analytic_sharpe_table(s, analytic_h);
            emit(tables, o);
        } else if (fpt_cmd->parsed()) {
            if (!o.alpha) throw ConfigError("fpt needs --alpha");
            if (fpt_h.empty()) fpt_h = {0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 1.0};
            emit({exp::fpt_table(s, fpt_h, *o.alpha)}, o);
        } else if (sweep->parsed()) {
            const auto values = parse_list(values_text);
            if (axis == "position.h") {
                auto t = exp::run_hedge_grid(s, values);
                t.name = sweep_name;
                emit({t}, o);
            } else {
                exp::SweepSpec spec;
                spec.name = sweep_name;
                spec.base = s;
                spec.axis = axis;
                spec.values = values;
                spec.engines.clear();
                for (const auto& e : engines) spec.engines.push_back(exp::parse_engine(e));
                spec.h_grid = exp::fine_grid(grid_step);
                if (o.alpha) spec.alpha = *o.alpha;
                emit({exp::run_sensitivity(spec)}, o);
            }
        } else if (rebalance->parsed()) {
            emit({exp::run_rebalancing_comparison(s, rebalance_h)}, o);
        } else if (jumps->parsed()) {
            emit(exp::run_preset("jump_comparison", s), o);
            std::cout << '\n';
            emit(exp::run_preset("jump_stress", s), o);
        } else if (reproduce->parsed()) {
            exp::PresetOptions po;
            po.n_paths = o.paths;
            if (o.tx >= 0) po.include_tx_costs = o.tx == 1;
            emit(exp::run_preset(preset, s, po), o);
        }
        return 0;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
