#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ammhedge/config.hpp"

namespace ammhedge::mc {

/// Price relatives on the simulation grid; element 0 is exactly 1.
struct PricePath {
    std::vector<double> rel_a;
    std::vector<double> rel_b;

    [[nodiscard]] std::size_t steps() const { return rel_a.empty() ? 0 : rel_a.size() - 1; }
};

/// Counter-based path source: path i depends only on (seed, i), so any worker
/// can produce any path in any order.
class PathGenerator {
public:
    PathGenerator(const MarketParams& market, std::optional<JumpParams> jump, double horizon_days,
                  double dt_days, std::uint64_t seed);

    [[nodiscard]] std::size_t steps() const { return steps_; }
    [[nodiscard]] double dt_days() const { return dt_days_; }

    [[nodiscard]] PricePath path(std::uint64_t index) const;
    /// Same as path() but reuses the buffers in `out`.
    void fill(std::uint64_t index, PricePath& out) const;

private:
    MarketParams market_;
    std::optional<JumpParams> jump_;
    std::size_t steps_;
    double dt_days_;
    std::uint64_t seed_;
    double diff_sigma_a_;
    double diff_sigma_b_;
    double compensator_;
};

std::vector<PricePath> generate_paths(const MarketParams& market, const std::optional<JumpParams>& jump,
                                      double horizon_days, double dt_days, std::int64_t n_paths,
                                      std::uint64_t seed);

/// Number of grid steps; throws ConfigError unless horizon_days is a multiple of dt_days.
std::size_t step_count(double horizon_days, double dt_days);

/// Mutable accounting for one path. Token debts are in units normalized to S_0 = 1,
/// so debt value in numeraire is debt_i * p_i.
struct PositionState {
    double lp_value = 0.0;
    double debt_a = 0.0;
    double debt_b = 0.0;
    double collateral = 0.0;      ///< principal plus accrued supply yield
    double cash = 0.0;            ///< realized cash: rebalance proceeds, excess claims
    double accrued_borrow = 0.0;  ///< unpaid borrow interest, numeraire
    double pending_rewards = 0.0; ///< accrued, not yet claimed
    double debt_credit = 0.0;     ///< claimed rewards netted against debt (offset claim mode)
    double tx_cost_paid = 0.0;

    [[nodiscard]] double debt_value(double p_a, double p_b) const { return debt_a * p_a + debt_b * p_b; }
};

struct PathResult {
    double roe = 0.0;           ///< basis set by SimConfig::include_tx_costs
    double roe_ex_costs = 0.0;
    bool liquidated = false;
    std::optional<double> liq_time_days{};
    double max_ltv = 0.0;
    int n_rebalances = 0;
    double tx_cost_paid = 0.0;
    double equity0 = 0.0;

    [[nodiscard]] double roe_with_costs() const { return roe_ex_costs - tx_cost_paid / equity0; }
};

struct SummaryStats {
    std::int64_t n = 0;
    double e_roe_pp = 0.0;
    double std_pp = 0.0;
    double sr_raw = 0.0;
    double sr_tx = 0.0;
    double p_loss = 0.0;
    double p_liq = 0.0;
    double var5_pp = 0.0;
    double mean_max_ltv = 0.0;
    double p95_max_ltv = 0.0;
    double p99_max_ltv = 0.0;
    double avg_rebalances = 0.0;
    double avg_rebalances_survivors = 0.0;
    // Monte Carlo standard errors.
    double e_roe_se_pp = 0.0;
    double sr_se = 0.0;
    double p_liq_se = 0.0;
    /// Set when the ROE sample has zero spread; Sharpe fields are then NaN.
    bool degenerate = false;

    bool operator==(const SummaryStats&) const = default;
};

/// Resets token debts to h_target * lp / (2 p_i) when the rule fires. Debt changes are
/// settled through cash, so the reset is self-financing. Returns 1 if it fired.
int apply_rebalance_rule(PositionState& state, double p_a, double p_b, double t_days,
                         const RebalanceRule& rule, double h_target);

/// Runs the daily accounting loop over one path. Requires LTV_0 < l_max.
PathResult simulate_position(const PricePath& path, const MarketParams& market, const RateParams& rates,
                             const PositionParams& pos, const SimConfig& sim);

/// Linear interpolation between order statistics (sorted input, q in [0,1]).
double percentile_sorted(std::span<const double> sorted, double q);

/// Sharpe = (mean - r_f T/365) / std * sqrt(365/T), T = horizon_days.
SummaryStats aggregate(std::span<const PathResult> results, const SimConfig& sim, double horizon_days,
                       double r_f);

/// Simulates every hedge ratio on the same set of paths. results[j][i] is path i at hs[j].
std::vector<std::vector<PathResult>> simulate_grid(const Scenario& scenario, std::span<const double> hs);
std::vector<SummaryStats> run_grid(const Scenario& scenario, std::span<const double> hs);
/// One scenario at scenario.position.h.
SummaryStats run(const Scenario& scenario);

}  // namespace ammhedge::mc
