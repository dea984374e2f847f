#include "ammhedge/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "ammhedge/analytics.hpp"
#include "ammhedge/liquidation.hpp"

namespace ammhedge::exp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::string_view kVolScale = "market.vol_scale";

std::string format_number(double v, bool full, int decimals) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    if (full) std::snprintf(buf, sizeof buf, "%.17g", v);
    else std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

std::string format_cell(const Cell& cell, bool full, int decimals) {
    if (const auto* s = std::get_if<std::string>(&cell)) return *s;
    return format_number(std::get<double>(cell), full, decimals);
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (const char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + '"';
}

std::string fixed(double v, int decimals) { return format_number(v, false, decimals); }

double pct(double fraction) { return 100.0 * fraction; }

/// Hedge ratio in percent, free of representation noise from grid arithmetic.
double h_pct(double h) { return std::round(h * 1e6) / 1e4; }

Provenance provenance(const Scenario& s, std::string engine, std::int64_t n_paths) {
    return Provenance{s.sim.seed, n_paths, std::move(engine), scenario_hash(s)};
}

Provenance mc_provenance(const Scenario& s) {
    return provenance(s, s.jump ? "mc_jump" : "mc_gbm", s.sim.n_paths);
}

std::vector<double> require_grid(std::span<const double> grid, const PositionParams& pos) {
    if (grid.empty()) throw ConfigError("hedge grid is empty");
    auto feasible = feasible_grid(grid, pos);
    if (feasible.empty()) throw ConfigError("no hedge ratio in the grid is feasible (LTV_0 >= l_max everywhere)");
    return feasible;
}

Scenario without_tx(Scenario s) {
    s.sim.include_tx_costs = false;
    return s;
}

}  // namespace

void Table::add_column(std::string title, int decimals) {
    columns.push_back(std::move(title));
    precision.push_back(decimals);
}

std::size_t Table::column(std::string_view title) const {
    const auto it = std::find(columns.begin(), columns.end(), title);
    if (it == columns.end()) throw std::out_of_range("no column '" + std::string(title) + "' in " + name);
    return static_cast<std::size_t>(it - columns.begin());
}

double Table::number(std::size_t row, std::string_view title) const {
    return std::get<double>(rows.at(row).at(column(title)));
}

const std::string& Table::text(std::size_t row, std::string_view title) const {
    return std::get<std::string>(rows.at(row).at(column(title)));
}

std::size_t Table::row_where(double value) const {
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto* v = std::get_if<double>(&rows[i].front());
        if (v && std::abs(*v - value) < 1e-9) return i;
    }
    throw std::out_of_range("no row with key " + format_number(value, true, 0) + " in " + name);
}

std::string to_csv(const Table& table, bool full_precision) {
    std::ostringstream out;
    const auto& p = table.provenance;
    out << "# seed=" << p.seed << ",n_paths=" << p.n_paths << ",engine=" << p.engine
        << ",config_hash=" << p.config_hash << '\n';
    for (std::size_t j = 0; j < table.columns.size(); ++j) {
        out << (j ? "," : "") << csv_field(table.columns[j]);
    }
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            out << (j ? "," : "") << csv_field(format_cell(row[j], full_precision, table.precision[j]));
        }
        out << '\n';
    }
    return out.str();
}

std::string to_text(const Table& table) {
    const auto n = table.columns.size();
    std::vector<std::vector<std::string>> cells;
    std::vector<std::size_t> width(n);
    for (std::size_t j = 0; j < n; ++j) width[j] = table.columns[j].size();
    for (const auto& row : table.rows) {
        auto& out = cells.emplace_back();
        for (std::size_t j = 0; j < n; ++j) {
            out.push_back(format_cell(row[j], false, table.precision[j]));
            width[j] = std::max(width[j], out.back().size());
        }
    }
    std::string text = table.name + "  (seed " + std::to_string(table.provenance.seed) + ", n_paths " +
                       std::to_string(table.provenance.n_paths) + ", " + table.provenance.engine + ", config " +
                       table.provenance.config_hash + ")\n";
    auto emit = [&](const std::vector<std::string>& line) {
        for (std::size_t j = 0; j < n; ++j) {
            text += std::string(width[j] - line[j].size() + (j ? 2 : 0), ' ');
            text += line[j];
        }
        text += '\n';
    };
    emit(table.columns);
    for (const auto& line : cells) emit(line);
    return text;
}

std::vector<std::filesystem::path> write_table(const Table& table, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    for (const bool full : {false, true}) {
        const auto path = dir / (table.name + (full ? "_full.csv" : ".csv"));
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + path.string());
        out << to_csv(table, full);
        if (!out) throw std::runtime_error("write failed for " + path.string());
        written.push_back(path);
    }
    return written;
}

Engine parse_engine(std::string_view name) {
    if (name == "analytic") return Engine::Analytic;
    if (name == "fpt") return Engine::Fpt;
    if (name == "mc_gbm") return Engine::McGbm;
    if (name == "mc_jump") return Engine::McJump;
    throw ConfigError("unknown engine '" + std::string(name) + "' (analytic|fpt|mc_gbm|mc_jump)");
}

std::string_view engine_name(Engine engine) {
    switch (engine) {
        case Engine::Analytic: return "analytic";
        case Engine::Fpt: return "fpt";
        case Engine::McGbm: return "mc_gbm";
        case Engine::McJump: return "mc_jump";
    }
    return "?";
}

void validate(const SweepSpec& spec) {
    const auto& keys = scenario_keys();
    if (spec.axis != kVolScale && std::find(keys.begin(), keys.end(), spec.axis) == keys.end()) {
        throw ConfigError("sweep axis '" + spec.axis + "' is not a scenario parameter");
    }
    if (spec.values.empty()) throw ConfigError("sweep has no axis values");
    if (spec.engines.empty()) throw ConfigError("sweep has no engines");
    for (const double h : spec.h_grid) {
        if (!(h >= 0.0 && h <= 1.0)) throw ConfigError("sweep hedge grid value outside [0,1]");
    }
    if (!(spec.alpha > 0.0 && spec.alpha < 1.0)) throw ConfigError("alpha must lie strictly inside (0,1)");
}

void set_axis(Scenario& scenario, std::string_view axis, double value) {
    if (axis == kVolScale) {
        if (!(value > 0.0)) throw ConfigError("vol_scale must be positive");
        scenario.market.sigma_a *= value;
        scenario.market.sigma_b *= value;
        return;
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    set_key(scenario, axis, buf);
}

std::vector<double> table4_grid() { return {0.0, 0.2, 0.4, 0.5, 0.6, 0.65, 0.7, 0.8, 1.0}; }

std::vector<double> fine_grid(double step) {
    if (!(step > 0.0 && step <= 1.0)) throw ConfigError("grid step must lie in (0,1]");
    std::vector<double> grid;
    const auto n = static_cast<int>(std::floor(1.0 / step + 1e-9));
    for (int i = 0; i <= n; ++i) grid.push_back(std::round(i * step * 1e9) / 1e9);
    return grid;
}

std::vector<double> feasible_grid(std::span<const double> grid, const PositionParams& pos) {
    std::vector<double> out;
    for (const double h : grid) {
        if (h >= 0.0 && h <= 1.0 && h / pos.c_over_v0 < pos.l_max) out.push_back(h);
    }
    return out;
}

std::size_t argmax_index(std::span<const double> values) {
    std::size_t best = values.size();
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (std::isnan(values[i])) continue;
        if (best == values.size() || values[i] > values[best]) best = i;
    }
    if (best == values.size()) throw NumericalError("no finite value to maximize");
    return best;
}

GridOptimum optimize_on_grid(const Scenario& scenario, std::span<const double> grid) {
    const auto hs = require_grid(grid, scenario.position);
    const auto stats = mc::run_grid(scenario, hs);
    std::vector<double> sr(stats.size());
    std::transform(stats.begin(), stats.end(), sr.begin(), [](const auto& s) { return s.sr_raw; });
    const auto best = argmax_index(sr);
    return {hs[best], stats[best]};
}

Table analytic_summary(const Scenario& s) {
    const auto mom = analytics::variance_components(s.market, s.position.horizon_years);
    const auto pnl = analytics::pnl_decomposition(s.market, s.rates, s.position);
    const double v0 = s.position.v0;
    Table t;
    t.name = "analytic_summary";
    t.provenance = provenance(s, "analytic", 0);
    t.add_column("Quantity", 0);
    t.add_column("Value", 4);
    auto row = [&](const char* label, double v) { t.rows.push_back({std::string(label), v}); };
    row("phi", mom.phi);
    row("v_GG", mom.v_gg);
    row("v_AA", mom.v_aa);
    row("v_GA", mom.v_ga);
    row("mu0/V0", pnl.mu0 / v0);
    row("c/V0", pnl.c / v0);
    row("h_mv", analytics::h_min_variance(s.market, s.position));
    try {
        const double hs = analytics::h_star(pnl, mom);
        row("h*", hs);
        row("SOC holds at h*", analytics::verify_soc(hs, pnl, mom, v0) ? 1.0 : 0.0);
    } catch (const analytics::InfeasibleError&) {
        row("h*", kNaN);
    }
    return t;
}

Table analytic_sharpe_table(const Scenario& s, std::span<const double> hs) {
    if (hs.empty()) throw ConfigError("hedge grid is empty");
    const auto mom = analytics::variance_components(s.market, s.position.horizon_years);
    const auto pnl = analytics::pnl_decomposition(s.market, s.rates, s.position);
    const double v0 = s.position.v0;
    Table t;
    t.name = "analytic_sharpe";
    t.provenance = provenance(s, "analytic", 0);
    t.add_column("h", 3);
    t.add_column("mu(h)/V0", 4);
    t.add_column("sigma(h)/V0", 4);
    t.add_column("SR", 2);
    for (const double h : hs) {
        const double var = mom.hedged_variance(h);
        const double sr = var > 0.0 ? analytics::sharpe(h, pnl, mom, v0) : kNaN;
        t.rows.push_back({h, pnl.expected(h) / v0, std::sqrt(std::max(var, 0.0)), sr});
    }
    return t;
}

Table fpt_table(const Scenario& s, std::span<const double> hs, double alpha) {
    if (hs.empty()) throw ConfigError("hedge grid is empty");
    const double hbar = fpt::h_bar(alpha, s.market, s.position);
    double hdd = kNaN;
    try {
        hdd = fpt::h_double_star(alpha, s.market, s.rates, s.position);
    } catch (const analytics::InfeasibleError&) {
    }
    Table t;
    t.name = "fpt";
    t.provenance = provenance(s, "fpt", 0);
    t.add_column("h (%)", 1);
    t.add_column("LTV0", 1);
    t.add_column("b", 3);
    t.add_column("sigma_tilde", 4);
    t.add_column("P(liq)", 2);
    t.add_column("alpha", 3);
    t.add_column("h_bar", 4);
    t.add_column("h**", 4);
    for (const double h : hs) {
        const auto in = fpt::fpt_inputs(h, s.market, s.position);
        t.rows.push_back({h_pct(h), pct(in.ltv0), in.barrier_log, in.sigma_tilde,
                          pct(fpt::liquidation_probability(h, s.market, s.position)), alpha, hbar, hdd});
    }
    return t;
}

Table run_hedge_grid(const Scenario& s, std::span<const double> grid) {
    const auto hs = require_grid(grid, s.position);
    const auto stats = mc::run_grid(s, hs);
    Table t;
    t.name = "table4";
    t.provenance = mc_provenance(s);
    t.add_column("h (%)", 0);
    t.add_column("E[ROE]", 2);
    t.add_column("Std", 1);
    t.add_column("SR (raw)", 3);
    t.add_column("SR (+tx)", 3);
    t.add_column("P(loss)", 1);
    t.add_column("P(liq)", 1);
    t.add_column("5% VaR", 1);
    t.add_column("SE E[ROE]", 2);
    t.add_column("SE SR", 3);
    t.add_column("SE P(liq)", 2);
    for (std::size_t j = 0; j < hs.size(); ++j) {
        const auto& st = stats[j];
        t.rows.push_back({h_pct(hs[j]), st.e_roe_pp, st.std_pp, st.sr_raw, st.sr_tx, pct(st.p_loss), pct(st.p_liq),
                          st.var5_pp, st.e_roe_se_pp, st.sr_se, pct(st.p_liq_se)});
    }
    return t;
}

Table run_analytic_vs_mc(const Scenario& s, std::span<const double> hs_in, std::int64_t n_paths) {
    const auto hs = require_grid(hs_in, s.position);
    Scenario base = s;
    base.sim.n_paths = n_paths;
    Scenario no_claims = base;
    no_claims.sim.claim_interval_days = 0.0;
    Scenario claims = base;
    if (claims.sim.claim_interval_days <= 0.0) claims.sim.claim_interval_days = 14.0;
    const auto mc_no = mc::run_grid(no_claims, hs);
    const auto mc_cl = mc::run_grid(claims, hs);

    Table t;
    t.name = "table5";
    t.provenance = provenance(base, base.jump ? "fpt+mc_jump" : "fpt+mc_gbm", n_paths);
    t.add_column("h (%)", 0);
    t.add_column("LTV0", 1);
    t.add_column("b", 3);
    t.add_column("Analytical", 2);
    t.add_column("MC (no claims)", 2);
    t.add_column("SE (no claims)", 2);
    t.add_column("MC (claims)", 2);
    t.add_column("SE (claims)", 2);
    for (std::size_t j = 0; j < hs.size(); ++j) {
        const auto in = fpt::fpt_inputs(hs[j], s.market, s.position);
        t.rows.push_back({h_pct(hs[j]), pct(in.ltv0), in.barrier_log,
                          pct(fpt::liquidation_probability(hs[j], s.market, s.position)), pct(mc_no[j].p_liq),
                          pct(mc_no[j].p_liq_se), pct(mc_cl[j].p_liq), pct(mc_cl[j].p_liq_se)});
    }
    return t;
}

Table run_liquidation_stats(const Scenario& s, double h) {
    const std::vector<double> hs{h};
    (void)require_grid(hs, s.position);
    Scenario no_claims = s;
    no_claims.sim.claim_interval_days = 0.0;
    Scenario claims = s;
    if (claims.sim.claim_interval_days <= 0.0) claims.sim.claim_interval_days = 14.0;

    struct Column {
        mc::SummaryStats stats;
        double max_ltv_se = 0.0;
    };
    auto run = [&](const Scenario& sc) {
        const auto results = mc::simulate_grid(sc, hs).front();
        Column c{mc::aggregate(results, sc.sim, sc.position.horizon_days, sc.rates.r_f), 0.0};
        double ss = 0.0;
        for (const auto& r : results) ss += (r.max_ltv - c.stats.mean_max_ltv) * (r.max_ltv - c.stats.mean_max_ltv);
        const double n = static_cast<double>(results.size());
        c.max_ltv_se = n > 1 ? std::sqrt(ss / (n - 1.0) / n) : kNaN;
        return c;
    };
    const auto no = run(no_claims);
    const auto cl = run(claims);

    char claim_label[32];
    std::snprintf(claim_label, sizeof claim_label, "Claim/%gd", claims.sim.claim_interval_days);
    Table t;
    t.name = "liquidation_stats";
    t.provenance = mc_provenance(s);
    t.add_column("Metric", 0);
    t.add_column("No claims", 1);
    t.add_column(claim_label, 1);
    t.add_column("SE no claims", 2);
    t.add_column("SE claims", 2);
    // Order-statistic standard errors are not estimated.
    t.rows.push_back({std::string("Liquidation probability"), pct(no.stats.p_liq), pct(cl.stats.p_liq),
                      pct(no.stats.p_liq_se), pct(cl.stats.p_liq_se)});
    t.rows.push_back({std::string("Mean max LTV"), pct(no.stats.mean_max_ltv), pct(cl.stats.mean_max_ltv),
                      pct(no.max_ltv_se), pct(cl.max_ltv_se)});
    t.rows.push_back({std::string("95th pctl max LTV"), pct(no.stats.p95_max_ltv), pct(cl.stats.p95_max_ltv), kNaN,
                      kNaN});
    t.rows.push_back({std::string("99th pctl max LTV"), pct(no.stats.p99_max_ltv), pct(cl.stats.p99_max_ltv), kNaN,
                      kNaN});
    return t;
}

Table run_sensitivity(const SweepSpec& spec) {
    validate(spec);
    const auto grid = spec.h_grid.empty() ? fine_grid() : spec.h_grid;
    auto uses = [&](Engine e) { return std::find(spec.engines.begin(), spec.engines.end(), e) != spec.engines.end(); };
    std::vector<Engine> mc_engines;
    for (const auto e : {Engine::McGbm, Engine::McJump}) {
        if (uses(e)) mc_engines.push_back(e);
    }
    const bool both_mc = mc_engines.size() == 2;
    auto suffix = [&](Engine e) { return both_mc && e == Engine::McJump ? std::string(" (jump)") : std::string(); };

    Table t;
    t.name = spec.name;
    std::string engines;
    for (const auto e : spec.engines) engines += (engines.empty() ? "" : "+") + std::string(engine_name(e));
    t.provenance = provenance(spec.base, engines, mc_engines.empty() ? 0 : spec.base.sim.n_paths);

    const bool vol = spec.axis == kVolScale;
    t.add_column(spec.axis, 3);
    if (vol) {
        t.add_column("sigma_A", 1);
        t.add_column("sigma_B", 1);
    }
    for (const auto e : mc_engines) {
        const auto sfx = suffix(e);
        t.add_column("h**" + sfx, 0);
        t.add_column("SR" + sfx, 2);
        t.add_column("P(liq)" + sfx, 1);
        t.add_column("E[ROE]" + sfx, 2);
        t.add_column("SE SR" + sfx, 3);
    }
    t.add_column("Init LTV", 1);
    if (uses(Engine::Analytic)) t.add_column("h* (analytic)", 3);
    if (uses(Engine::Fpt)) {
        t.add_column("h_bar (fpt)", 3);
        t.add_column("h** (fpt)", 3);
    }

    for (const double value : spec.values) {
        Scenario s = spec.base;
        set_axis(s, spec.axis, value);
        s.position.h = 0.0;
        ensure_valid(s);
        std::vector<Cell> row{value};
        if (vol) {
            row.emplace_back(pct(s.market.sigma_a));
            row.emplace_back(pct(s.market.sigma_b));
        }
        double first_h = kNaN;
        for (const auto e : mc_engines) {
            Scenario sc = s;
            if (e == Engine::McGbm) sc.jump.reset();
            else if (!sc.jump) sc.jump = JumpParams{};
            const auto opt = optimize_on_grid(sc, grid);
            if (std::isnan(first_h)) first_h = opt.h;
            row.emplace_back(h_pct(opt.h));
            row.emplace_back(opt.stats.sr_raw);
            row.emplace_back(pct(opt.stats.p_liq));
            row.emplace_back(opt.stats.e_roe_pp);
            row.emplace_back(opt.stats.sr_se);
        }
        double h_an = kNaN;
        if (uses(Engine::Analytic) || uses(Engine::Fpt)) {
            try {
                h_an = analytics::h_star(s.market, s.rates, s.position);
            } catch (const analytics::InfeasibleError&) {
            }
        }
        double h_dd = kNaN;
        double h_b = kNaN;
        if (uses(Engine::Fpt)) {
            h_b = fpt::h_bar(spec.alpha, s.market, s.position);
            if (!std::isnan(h_an)) h_dd = std::min(std::clamp(h_an, 0.0, 1.0), h_b);
        }
        if (std::isnan(first_h)) first_h = !std::isnan(h_dd) ? h_dd : h_an;
        row.emplace_back(pct(first_h / s.position.c_over_v0));
        if (uses(Engine::Analytic)) row.emplace_back(h_an);
        if (uses(Engine::Fpt)) {
            row.emplace_back(h_b);
            row.emplace_back(h_dd);
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

Table jump_comparison(const Scenario& s_in, std::span<const double> grid) {
    const Scenario s = without_tx(s_in);
    const auto hs = require_grid(grid, s.position);
    Scenario gbm = s;
    gbm.jump.reset();
    Scenario jd = s;
    if (!jd.jump) jd.jump = JumpParams{};
    jd.jump->variance_matched = true;
    const auto a = mc::run_grid(gbm, hs);
    const auto b = mc::run_grid(jd, hs);

    Table t;
    t.name = "jump_comparison";
    t.provenance = provenance(jd, "mc_gbm+mc_jump", s.sim.n_paths);
    t.add_column("h (%)", 0);
    t.add_column("SR GBM", 2);
    t.add_column("P(liq) GBM", 1);
    t.add_column("5% VaR GBM", 1);
    t.add_column("SR jump", 2);
    t.add_column("P(liq) jump", 1);
    t.add_column("5% VaR jump", 1);
    t.add_column("SE SR GBM", 3);
    t.add_column("SE SR jump", 3);
    for (std::size_t j = 0; j < hs.size(); ++j) {
        t.rows.push_back({h_pct(hs[j]), a[j].sr_raw, pct(a[j].p_liq), a[j].var5_pp, b[j].sr_raw, pct(b[j].p_liq),
                          b[j].var5_pp, a[j].sr_se, b[j].sr_se});
    }
    return t;
}

Table run_jump_stress(const Scenario& s_in, double h_eval) {
    const Scenario s = without_tx(s_in);
    auto grid = feasible_grid(fine_grid(), s.position);
    if (std::none_of(grid.begin(), grid.end(), [&](double h) { return std::abs(h - h_eval) < 1e-9; })) {
        const std::vector<double> probe{h_eval};
        if (feasible_grid(probe, s.position).empty()) throw ConfigError("evaluation hedge ratio is infeasible");
        grid.push_back(h_eval);
        std::sort(grid.begin(), grid.end());
    }
    const auto eval_index = static_cast<std::size_t>(
        std::find_if(grid.begin(), grid.end(), [&](double h) { return std::abs(h - h_eval) < 1e-9; }) - grid.begin());

    Table t;
    t.name = "jump_stress";
    const JumpParams base_jump = s.jump.value_or(JumpParams{});
    Scenario tagged = s;
    tagged.jump = base_jump;
    t.provenance = provenance(tagged, "mc_gbm+mc_jump", s.sim.n_paths);
    t.add_column("rho_J", 0);
    t.add_column("Variance", 0);
    t.add_column("SR", 2);
    t.add_column("P(liq)", 1);
    t.add_column("5% VaR", 1);
    t.add_column("h**", 0);
    t.add_column("SE SR", 3);

    auto add = [&](const Scenario& sc, std::string rho_label, std::string variance) {
        const auto stats = mc::run_grid(sc, grid);
        std::vector<double> sr(stats.size());
        std::transform(stats.begin(), stats.end(), sr.begin(), [](const auto& st) { return st.sr_raw; });
        const auto best = argmax_index(sr);
        const auto& at = stats[eval_index];
        t.rows.push_back({std::move(rho_label), std::move(variance), at.sr_raw, pct(at.p_liq), at.var5_pp,
                          h_pct(grid[best]), at.sr_se});
    };

    Scenario gbm = s;
    gbm.jump.reset();
    add(gbm, "GBM (baseline)", "-");
    for (const bool matched : {true, false}) {
        for (const double rho_j : {0.8, 0.3}) {
            Scenario sc = s;
            sc.jump = base_jump;
            sc.jump->rho_j = rho_j;
            sc.jump->variance_matched = matched;
            add(sc, fixed(rho_j, 2), matched ? "matched" : "unmatched");
        }
    }
    return t;
}

Table run_rebalancing_comparison(const Scenario& s_in, double h) {
    Scenario s = without_tx(s_in);
    s.position.h = h;
    const std::vector<double> hs{h};
    (void)require_grid(hs, s.position);
    const std::vector<std::pair<std::string, RebalanceRule>> strategies{
        {"No rebalance", RebalanceRule::none()},
        {"Threshold 20pp", RebalanceRule::threshold(20)},
        {"Threshold 15pp", RebalanceRule::threshold(15)},
        {"Threshold 10pp", RebalanceRule::threshold(10)},
        {"Every 14 days", RebalanceRule::periodic(14)},
        {"Every 30 days", RebalanceRule::periodic(30)},
    };

    Table t;
    t.name = "rebalancing";
    t.provenance = mc_provenance(s);
    t.add_column("Strategy", 0);
    t.add_column("E[ROE]", 2);
    t.add_column("Std", 2);
    t.add_column("SR", 3);
    t.add_column("P(liq)", 1);
    t.add_column("Avg rebal.", 1);
    t.add_column("Avg rebal. (survivors)", 2);
    t.add_column("Cost", 3);
    t.add_column("SE SR", 3);
    for (const auto& [label, rule] : strategies) {
        Scenario sc = s;
        sc.sim.rebalance = rule;
        const auto results = mc::simulate_grid(sc, hs).front();
        const auto st = mc::aggregate(results, sc.sim, sc.position.horizon_days, sc.rates.r_f);
        double cost = 0.0;
        for (const auto& r : results) cost += r.n_rebalances * sc.sim.gas_cost / r.equity0;
        cost /= static_cast<double>(results.size());
        t.rows.push_back({label, st.e_roe_pp, st.std_pp, st.sr_raw, pct(st.p_liq), st.avg_rebalances,
                          st.avg_rebalances_survivors, pct(cost), st.sr_se});
    }
    return t;
}

Table run_robustness_pairs(const Scenario& s_in) {
    const Scenario s = without_tx(s_in);
    struct Pair {
        const char* name;
        const char* chain;
        MarketParams market;
        RateParams rates;
        const char* source;
    };
    // Lending and reward rates for the extra pairs are representative values, not measurements.
    const std::vector<Pair> pairs{
        {"SUI/NS", "Sui", s.market, s.rates, "scenario"},
        {"SOL/RAY", "Solana", {0.80, 1.10, 0.83, 0.0, 0.0}, {0.05, 0.08, 0.40, s.rates.r_f}, "representative"},
        {"SOL/JUP", "Solana", {0.80, 1.00, 0.86, 0.0, 0.0}, {0.05, 0.06, 0.35, s.rates.r_f}, "representative"},
        {"ETH/ARB", "Arbitrum", {0.74, 1.03, 0.82, 0.0, 0.0}, {0.03, 0.05, 0.30, s.rates.r_f}, "representative"},
    };
    Table t;
    t.name = "robustness_pairs";
    t.provenance = mc_provenance(s);
    t.add_column("Pair", 0);
    t.add_column("Chain", 0);
    t.add_column("sigma_A", 0);
    t.add_column("sigma_B", 0);
    t.add_column("rho", 2);
    t.add_column("r_A", 0);
    t.add_column("r_B", 0);
    t.add_column("LP APR", 0);
    t.add_column("h**", 0);
    t.add_column("SR", 2);
    t.add_column("SE SR", 3);
    t.add_column("Rates", 0);
    for (const auto& p : pairs) {
        Scenario sc = s;
        sc.market = p.market;
        sc.rates = p.rates;
        const auto opt = optimize_on_grid(sc, fine_grid());
        t.rows.push_back({std::string(p.name), std::string(p.chain), pct(p.market.sigma_a), pct(p.market.sigma_b),
                          p.market.rho, pct(p.rates.r_a), pct(p.rates.r_b), pct(p.rates.reward_rate), h_pct(opt.h),
                          opt.stats.sr_raw, opt.stats.sr_se, std::string(p.source)});
    }
    return t;
}

Table emit_figure_data(std::string_view which, const Scenario& s, std::span<const double> grid_in) {
    const auto hs = require_grid(grid_in, s.position);
    Table t;
    t.name = std::string(which);
    t.provenance = mc_provenance(s);
    t.add_column("h (%)", 0);
    if (which == "fig1" || which == "fig2") {
        const auto stats = mc::run_grid(s, hs);
        if (which == "fig1") {
            t.add_column("SR (+tx)", 3);
            t.add_column("P(liq)", 2);
            t.add_column("SE SR (+tx)", 3);
            t.add_column("SE P(liq)", 2);
        } else {
            t.add_column("E[ROE]", 2);
            t.add_column("Std", 2);
            t.add_column("SE E[ROE]", 2);
        }
        for (std::size_t j = 0; j < hs.size(); ++j) {
            const auto& st = stats[j];
            if (which == "fig1") {
                // The raw-Sharpe SE is a close proxy; costs shift the mean, not the spread.
                t.rows.push_back({h_pct(hs[j]), st.sr_tx, pct(st.p_liq), st.sr_se, pct(st.p_liq_se)});
            } else {
                t.rows.push_back({h_pct(hs[j]), st.e_roe_pp, st.std_pp, st.e_roe_se_pp});
            }
        }
        return t;
    }

    std::vector<double> values;
    std::string label;
    if (which == "fig3") {
        values = {0.0, 0.3, 0.5, 0.72, 0.9};
        label = "rho";
    } else if (which == "fig4") {
        values = {0.05, 0.15, 0.30};
        label = "r_B";
    } else {
        throw ConfigError("unknown figure '" + std::string(which) + "' (fig1|fig2|fig3|fig4)");
    }
    std::vector<std::vector<mc::SummaryStats>> curves;
    for (const double v : values) {
        Scenario sc = s;
        if (which == "fig3") sc.market.rho = v;
        else sc.rates.r_b = v;
        curves.push_back(mc::run_grid(sc, hs));
        t.add_column("SR " + label + "=" + fixed(v, 2), 3);
    }
    for (const double v : values) t.add_column("SE SR " + label + "=" + fixed(v, 2), 3);
    for (std::size_t j = 0; j < hs.size(); ++j) {
        std::vector<Cell> row{h_pct(hs[j])};
        for (const auto& c : curves) row.emplace_back(c[j].sr_raw);
        for (const auto& c : curves) row.emplace_back(c[j].sr_se);
        t.rows.push_back(std::move(row));
    }
    return t;
}

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{
        "analytic",        "table4",          "table5",         "liquidation_stats", "table6",
        "robustness_pairs", "table8",         "rebalancing",    "sensitivity_apr",   "sensitivity_vol",
        "sensitivity_penalty", "cv_sensitivity", "jump_comparison", "jump_stress",   "fig1",
        "fig2",            "fig3",            "fig4",           "all"};
    return names;
}

namespace {

SweepSpec preset_sweep(const Scenario& base, std::string name, std::string axis, std::vector<double> values) {
    SweepSpec spec;
    spec.name = std::move(name);
    spec.base = base;
    spec.axis = std::move(axis);
    spec.values = std::move(values);
    spec.engines = {Engine::McGbm};
    spec.h_grid = fine_grid();
    return spec;
}

}  // namespace

std::vector<Table> run_preset(std::string_view name, const Scenario& base_in, const PresetOptions& options) {
    Scenario base = base_in;
    if (options.n_paths) base.sim.n_paths = *options.n_paths;
    auto with_tx = [&](bool preset_default) {
        Scenario s = base;
        s.sim.include_tx_costs = options.include_tx_costs.value_or(preset_default);
        return s;
    };

    if (name == "all") {
        std::vector<Table> all;
        for (const auto& n : preset_names()) {
            if (n == "all" || n == "table6" || n == "table8") continue;  // aliases
            auto tables = run_preset(n, base_in, options);
            std::move(tables.begin(), tables.end(), std::back_inserter(all));
        }
        return all;
    }
    if (name == "analytic") {
        std::vector<double> hs{0.0, 0.3, 0.5, 0.6, 0.7, 0.8};
        try {
            hs.push_back(analytics::h_star(base.market, base.rates, base.position));
        } catch (const analytics::InfeasibleError&) {
        }
        hs.push_back(1.0);
        return {analytic_summary(base), analytic_sharpe_table(base, hs)};
    }
    if (name == "table4") return {run_hedge_grid(with_tx(true), table4_grid())};
    if (name == "table5") {
        const std::vector<double> hs{0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 1.0};
        return {run_analytic_vs_mc(with_tx(false), hs, options.n_paths.value_or(50000))};
    }
    if (name == "liquidation_stats") return {run_liquidation_stats(with_tx(false), 1.0)};
    if (name == "table6" || name == "robustness_pairs") return {run_robustness_pairs(base)};
    if (name == "table8" || name == "rebalancing") return {run_rebalancing_comparison(base, 0.60)};
    if (name == "sensitivity_apr") {
        return {run_sensitivity(
            preset_sweep(with_tx(false), "sensitivity_apr", "rates.reward_rate", {0.10, 0.20, 0.30, 0.40, 0.54, 0.70, 1.00}))};
    }
    if (name == "sensitivity_vol") {
        return {run_sensitivity(preset_sweep(with_tx(false), "sensitivity_vol", std::string(kVolScale), {0.8, 1.0, 1.2}))};
    }
    if (name == "sensitivity_penalty") {
        return {run_sensitivity(
            preset_sweep(with_tx(false), "sensitivity_penalty", "sim.liq_penalty_frac", {0.10, 0.20, 0.30}))};
    }
    if (name == "cv_sensitivity") {
        return {run_sensitivity(preset_sweep(with_tx(false), "cv_sensitivity", "position.c_over_v0",
                                             {1.2, 1.5, 1.8, 2.0, 2.5, 3.0, 4.0, 5.0}))};
    }
    if (name == "jump_comparison") {
        const std::vector<double> hs{0.0, 0.4, 0.6, 0.65, 0.7, 1.0};
        return {jump_comparison(base, hs)};
    }
    if (name == "jump_stress") return {run_jump_stress(base, 0.65)};
    if (name == "fig1" || name == "fig2") return {emit_figure_data(name, with_tx(true), table4_grid())};
    if (name == "fig3" || name == "fig4") return {emit_figure_data(name, with_tx(false), fine_grid())};
    throw ConfigError("unknown preset '" + std::string(name) + "'");
}

}  // namespace ammhedge::exp
