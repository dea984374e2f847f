#include "ammhedge/liquidation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ammhedge/analytics.hpp"

namespace ammhedge::fpt {

namespace {

constexpr double kBisectionTol = 1e-6;

double upper_bracket(const PositionParams& pos) {
    return std::min(1.0, pos.l_max * pos.c_over_v0 * (1.0 - 1e-9));
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double fpt_horizon_years(const PositionParams& pos) { return pos.horizon_days / kDaysPerYear; }

double sigma_tilde(const MarketParams& m, double t) {
    const double sa2 = m.sigma_a * m.sigma_a;
    const double sb2 = m.sigma_b * m.sigma_b;
    const double cross = m.rho * m.sigma_a * m.sigma_b;
    if (t <= 0.0) return std::sqrt((sa2 + sb2 + 2.0 * cross) / 4.0);
    // log1p of the mean excess keeps precision for small t.
    const double excess = (std::expm1(sa2 * t) + std::expm1(sb2 * t) + 2.0 * std::expm1(cross * t)) / 4.0;
    return std::sqrt(std::log1p(excess) / t);
}

FptInputs fpt_inputs(double h, const MarketParams& m, const PositionParams& pos) {
    FptInputs in;
    in.t_years = fpt_horizon_years(pos);
    in.ltv0 = h / pos.c_over_v0;
    in.barrier_log = in.ltv0 > 0.0 ? std::log(pos.l_max / in.ltv0) : INFINITY;
    in.sigma_tilde = sigma_tilde(m, in.t_years);
    in.nu = -0.5 * in.sigma_tilde * in.sigma_tilde;
    return in;
}

double liquidation_probability(double h, const MarketParams& m, const PositionParams& pos) {
    if (h <= 0.0) return 0.0;
    const auto in = fpt_inputs(h, m, pos);
    if (in.ltv0 > pos.l_max) {
        throw InfeasibleStartError("initial LTV exceeds l_max; liquidation is immediate");
    }
    const double s = in.sigma_tilde;
    const double sd = s * std::sqrt(in.t_years);
    const double half_var = 0.5 * s * s * in.t_years;
    const double b = in.barrier_log;
    return normal_cdf((-b - half_var) / sd) + (in.ltv0 / pos.l_max) * normal_cdf((-b + half_var) / sd);
}

double h_bar(double alpha, const MarketParams& m, const PositionParams& pos) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie strictly inside (0,1)");
    const double top = upper_bracket(pos);
    if (liquidation_probability(top, m, pos) <= alpha) return top;
    double lo = 0.0;  // P(0) = 0 <= alpha
    double hi = top;
    while (hi - lo > kBisectionTol) {
        const double mid = 0.5 * (lo + hi);
        if (liquidation_probability(mid, m, pos) <= alpha) lo = mid;
        else hi = mid;
    }
    return lo;
}

double h_double_star(double alpha, const MarketParams& m, const RateParams& r, const PositionParams& pos) {
    const double unconstrained = std::clamp(analytics::h_star(m, r, pos), 0.0, 1.0);
    return std::min(unconstrained, h_bar(alpha, m, pos));
}

}  // namespace ammhedge::fpt
