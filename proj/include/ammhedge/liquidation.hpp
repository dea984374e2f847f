#pragma once

// First-passage liquidation bound. The debt factor p_A + p_B is approximated by a
// single zero-drift GBM with matched first two moments; LTV_t / LTV_0 follows it.
// The horizon is horizon_days / 365, the same grid the simulator runs on.

#include "ammhedge/config.hpp"

namespace ammhedge::fpt {

/// Thrown when LTV_0 already exceeds l_max (liquidation is certain).
class InfeasibleStartError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

struct FptInputs {
    double ltv0 = 0.0;
    double barrier_log = 0.0;  ///< b = ln(l_max / LTV_0)
    double sigma_tilde = 0.0;
    double nu = 0.0;           ///< -sigma_tilde^2 / 2
    double t_years = 0.0;
};

/// Standard normal CDF via erfc.
double normal_cdf(double x);

/// Horizon used by the first-passage layer.
double fpt_horizon_years(const PositionParams& pos);

/// sigma_tilde^2 = ln[(e^{sA^2 t} + e^{sB^2 t} + 2 e^{rho sA sB t}) / 4] / t.
/// At t = 0 returns the small-t limit sqrt((sA^2 + sB^2 + 2 rho sA sB) / 4).
double sigma_tilde(const MarketParams& market, double t_years);

FptInputs fpt_inputs(double h, const MarketParams& market, const PositionParams& pos);

/// P(tau <= T) = Phi((-b - s^2 T/2) / (s sqrt T)) + (LTV_0 / l_max) Phi((-b + s^2 T/2) / (s sqrt T)).
/// Zero at h = 0. Throws InfeasibleStartError when LTV_0 > l_max.
double liquidation_probability(double h, const MarketParams& market, const PositionParams& pos);

/// Largest h in (0, min(1, l_max C/V0)] whose liquidation probability is <= alpha,
/// by bisection to 1e-6. Returns the bracket top when the constraint does not bind.
double h_bar(double alpha, const MarketParams& market, const PositionParams& pos);

/// min(clamp(h*, 0, 1), h_bar(alpha)). Propagates analytics::InfeasibleError.
double h_double_star(double alpha, const MarketParams& market, const RateParams& rates,
                     const PositionParams& pos);

}  // namespace ammhedge::fpt
