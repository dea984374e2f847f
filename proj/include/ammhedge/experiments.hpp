#pragma once

// Table and figure reproduction. Every MC run inside one table shares the scenario seed,
// so rows differ only through the parameter being varied (common random numbers).

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ammhedge/config.hpp"
#include "ammhedge/montecarlo.hpp"

namespace ammhedge::exp {

using Cell = std::variant<double, std::string>;

struct Provenance {
    std::uint64_t seed = 0;
    std::int64_t n_paths = 0;
    std::string engine;
    std::string config_hash;
};

struct Table {
    std::string name;
    std::vector<std::string> columns;
    /// Decimals used in the printed-precision CSV, one per column.
    std::vector<int> precision;
    std::vector<std::vector<Cell>> rows;
    Provenance provenance;

    void add_column(std::string title, int decimals);
    /// Index of a column; throws std::out_of_range for unknown titles.
    [[nodiscard]] std::size_t column(std::string_view title) const;
    [[nodiscard]] double number(std::size_t row, std::string_view title) const;
    [[nodiscard]] const std::string& text(std::size_t row, std::string_view title) const;
    /// Row whose first cell equals `value` (numeric first column).
    [[nodiscard]] std::size_t row_where(double value) const;
};

/// CSV with a leading `# seed=..,n_paths=..,engine=..,config_hash=..` line.
std::string to_csv(const Table& table, bool full_precision);
/// Aligned plain-text rendering at printed precision.
std::string to_text(const Table& table);
/// Writes <dir>/<name>.csv and <dir>/<name>_full.csv; returns both paths.
std::vector<std::filesystem::path> write_table(const Table& table, const std::filesystem::path& dir);

enum class Engine { Analytic, Fpt, McGbm, McJump };

Engine parse_engine(std::string_view name);
std::string_view engine_name(Engine engine);

struct SweepSpec {
    std::string name = "sweep";
    Scenario base = baseline_scenario();
    /// A scenario key (see scenario_keys()) or "market.vol_scale".
    std::string axis;
    std::vector<double> values;
    std::vector<Engine> engines{Engine::McGbm};
    /// Hedge grid searched for the optimum; empty selects fine_grid().
    std::vector<double> h_grid;
    double alpha = 0.05;
    std::filesystem::path output;
};

/// Throws ConfigError when the axis is unknown or there are no values.
void validate(const SweepSpec& spec);

/// Sets one axis value. "market.vol_scale" multiplies both volatilities of `scenario`.
void set_axis(Scenario& scenario, std::string_view axis, double value);

/// Hedge ratios of the main hedge-grid table.
std::vector<double> table4_grid();
/// 0, 0.05, ..., 1.0.
std::vector<double> fine_grid(double step = 0.05);
/// Grid points with LTV_0 < l_max; the others cannot be opened.
std::vector<double> feasible_grid(std::span<const double> grid, const PositionParams& pos);

/// First index of the maximum, so ties go to the lower hedge ratio. NaNs are skipped.
std::size_t argmax_index(std::span<const double> values);

struct GridOptimum {
    double h = 0.0;
    mc::SummaryStats stats{};
};
/// Raw-Sharpe maximizer over the feasible part of `grid`.
GridOptimum optimize_on_grid(const Scenario& scenario, std::span<const double> grid);

Table analytic_summary(const Scenario& scenario);
Table analytic_sharpe_table(const Scenario& scenario, std::span<const double> hs);
Table fpt_table(const Scenario& scenario, std::span<const double> hs, double alpha);

Table run_hedge_grid(const Scenario& scenario, std::span<const double> grid);
/// Claims off vs every claim_interval_days (14 when the scenario disables claims).
Table run_analytic_vs_mc(const Scenario& scenario, std::span<const double> hs, std::int64_t n_paths);
Table run_liquidation_stats(const Scenario& scenario, double h = 1.0);
Table run_sensitivity(const SweepSpec& spec);
/// GBM and matched jump-diffusion side by side on `grid`.
Table jump_comparison(const Scenario& scenario, std::span<const double> grid);
/// GBM plus rho_J in {0.8, 0.3} x {matched, unmatched}, evaluated at h_eval with argmax on fine_grid().
Table run_jump_stress(const Scenario& scenario, double h_eval = 0.65);
Table run_rebalancing_comparison(const Scenario& scenario, double h = 0.60);
/// SUI/NS baseline plus three representative pairs.
Table run_robustness_pairs(const Scenario& scenario);
/// fig1: h, SR (+tx), P(liq). fig2: h, E[ROE], Std. fig3: SR by rho. fig4: SR by r_B.
Table emit_figure_data(std::string_view which, const Scenario& scenario, std::span<const double> grid);

struct PresetOptions {
    std::optional<std::int64_t> n_paths;
    std::optional<bool> include_tx_costs;
};

const std::vector<std::string>& preset_names();
/// Runs a named preset ("table4", "fig2", "jump_stress", ...). Unknown names throw ConfigError.
std::vector<Table> run_preset(std::string_view name, const Scenario& base, const PresetOptions& options = {});

}  // namespace ammhedge::exp
