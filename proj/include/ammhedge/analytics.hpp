#pragma once

// Closed-form layer under zero drift. Price relatives p_i = S_T^i / S_0^i,
// G = sqrt(p_A p_B) (LP value factor) and A = (p_A + p_B) / 2 (debt factor).
// Drifts in MarketParams are ignored here.

#include "ammhedge/config.hpp"

namespace ammhedge::analytics {

/// Thrown when the optimal hedge is undefined (unprofitable at h = 0 or degenerate FOC).
class InfeasibleError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

struct MomentSet {
    double phi = 0.0;   ///< LP value decay rate per year.
    double v_gg = 0.0;  ///< Var(G)
    double v_aa = 0.0;  ///< Var(A)
    double v_ga = 0.0;  ///< Cov(G, A)

    /// Var(G - h A) = v_gg + h^2 v_aa - 2 h v_ga.
    [[nodiscard]] double hedged_variance(double h) const { return v_gg + h * h * v_aa - 2.0 * h * v_ga; }
};

/// Expected P&L mu(h) = mu0 - c h, in numeraire units.
struct PnlDecomposition {
    double mu0 = 0.0;
    double c = 0.0;

    [[nodiscard]] double expected(double h) const { return mu0 - c * h; }
};

/// log E[p_A^a p_B^b] = [a(a-1) sA^2 + b(b-1) sB^2 + 2ab rho sA sB] t / 2.
double joint_mgf_exponent(double a, double b, const MarketParams& market, double t_years);

/// phi = (sA^2 + sB^2 - 2 rho sA sB) / 8; E[G] = exp(-phi T).
double compute_phi(const MarketParams& market);

MomentSet variance_components(const MarketParams& market, double t_years);

/// Uses pos.horizon_years.
PnlDecomposition pnl_decomposition(const MarketParams& market, const RateParams& rates,
                                   const PositionParams& pos);

/// Dollar-P&L Sharpe ratio over the horizon (not annualized).
/// Throws NumericalError when the hedged variance is not positive.
double sharpe(double h, const MarketParams& market, const RateParams& rates, const PositionParams& pos);
double sharpe(double h, const PnlDecomposition& pnl, const MomentSet& moments, double v0);

/// Unconstrained Sharpe maximizer, unclamped. Callers clamp to [0,1] if they need a feasible h.
/// Throws InfeasibleError when mu0 <= 0 or the FOC denominator is not positive.
double h_star(const MarketParams& market, const RateParams& rates, const PositionParams& pos);
double h_star(const PnlDecomposition& pnl, const MomentSet& moments);

/// v_ga / v_aa. Throws NumericalError when v_aa is not positive.
double h_min_variance(const MarketParams& market, const PositionParams& pos);

/// Sign test on the numerator of (SR^2)'' at a critical point:
/// true iff 2 c^2 sigma^2(h) - mu(h)^2 * 2 V0^2 v_aa < 0.
bool verify_soc(double h, const MarketParams& market, const RateParams& rates, const PositionParams& pos);
bool verify_soc(double h, const PnlDecomposition& pnl, const MomentSet& moments, double v0);

}  // namespace ammhedge::analytics
