#include "ammhedge/analytics.hpp"

#include <cmath>

namespace ammhedge::analytics {

double joint_mgf_exponent(double a, double b, const MarketParams& m, double t_years) {
    const double sa2 = m.sigma_a * m.sigma_a;
    const double sb2 = m.sigma_b * m.sigma_b;
    const double cross = m.rho * m.sigma_a * m.sigma_b;
    return (a * (a - 1.0) * sa2 + b * (b - 1.0) * sb2 + 2.0 * a * b * cross) * t_years / 2.0;
}

double compute_phi(const MarketParams& m) {
    const double phi =
        (m.sigma_a * m.sigma_a + m.sigma_b * m.sigma_b - 2.0 * m.rho * m.sigma_a * m.sigma_b) / 8.0;
    // (sA - sB)^2 + 2(1 - rho) sA sB >= 0; clip rounding noise at the rho = 1 corner.
    return phi < 0.0 ? 0.0 : phi;
}

MomentSet variance_components(const MarketParams& m, double t) {
    MomentSet out;
    out.phi = compute_phi(m);
    if (t <= 0.0) return out;
    const double sa2 = m.sigma_a * m.sigma_a;
    const double sb2 = m.sigma_b * m.sigma_b;
    const double cross = m.rho * m.sigma_a * m.sigma_b;
    // expm1 keeps the small-T limit accurate.
    out.v_gg = std::expm1(cross * t) - std::expm1(-2.0 * out.phi * t);
    out.v_aa = 0.25 * (std::expm1(sa2 * t) + std::expm1(sb2 * t) + 2.0 * std::expm1(cross * t));
    out.v_ga = 0.5 * (std::expm1((3.0 * sa2 - sb2 + 6.0 * cross) * t / 8.0) +
                      std::expm1((-sa2 + 3.0 * sb2 + 6.0 * cross) * t / 8.0) -
                      2.0 * std::expm1(-out.phi * t));
    return out;
}

PnlDecomposition pnl_decomposition(const MarketParams& m, const RateParams& r, const PositionParams& pos) {
    const double t = pos.horizon_years;
    const double v0 = pos.v0;
    const double reward = r.reward_rate * v0;
    PnlDecomposition out;
    out.mu0 = v0 * std::expm1(-compute_phi(m) * t) + reward * t + pos.collateral() * r.r_f * t;
    out.c = 0.5 * v0 * (r.r_a + r.r_b) * t;
    return out;
}

double sharpe(double h, const PnlDecomposition& pnl, const MomentSet& moments, double v0) {
    const double var = moments.hedged_variance(h);
    if (!(var > 0.0)) throw NumericalError("hedged variance is not positive; Sharpe ratio undefined");
    return pnl.expected(h) / (v0 * std::sqrt(var));
}

double sharpe(double h, const MarketParams& m, const RateParams& r, const PositionParams& pos) {
    return sharpe(h, pnl_decomposition(m, r, pos), variance_components(m, pos.horizon_years), pos.v0);
}

double h_star(const PnlDecomposition& pnl, const MomentSet& mom) {
    if (!(pnl.mu0 > 0.0)) {
        throw InfeasibleError("mu0 <= 0: strategy is unprofitable at h = 0, optimal hedge undefined");
    }
    const double denom = pnl.mu0 * mom.v_aa - pnl.c * mom.v_ga;
    if (!(denom > 0.0)) throw InfeasibleError("first-order condition denominator is not positive");
    if (pnl.c == 0.0) return mom.v_ga / mom.v_aa;
    return (pnl.mu0 * mom.v_ga - pnl.c * mom.v_gg) / denom;
}

double h_star(const MarketParams& m, const RateParams& r, const PositionParams& pos) {
    return h_star(pnl_decomposition(m, r, pos), variance_components(m, pos.horizon_years));
}

double h_min_variance(const MarketParams& m, const PositionParams& pos) {
    const auto mom = variance_components(m, pos.horizon_years);
    if (!(mom.v_aa > 0.0)) throw NumericalError("Var(A) is zero; minimum-variance hedge undefined");
    return mom.v_ga / mom.v_aa;
}

bool verify_soc(double h, const PnlDecomposition& pnl, const MomentSet& mom, double v0) {
    const double v02 = v0 * v0;
    const double sigma2 = v02 * mom.hedged_variance(h);
    const double mu = pnl.expected(h);
    return 2.0 * pnl.c * pnl.c * sigma2 - mu * mu * 2.0 * v02 * mom.v_aa < 0.0;
}

bool verify_soc(double h, const MarketParams& m, const RateParams& r, const PositionParams& pos) {
    return verify_soc(h, pnl_decomposition(m, r, pos), variance_components(m, pos.horizon_years), pos.v0);
}

}  // namespace ammhedge::analytics
