#include "ammhedge/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

namespace ammhedge::mc {

namespace {

constexpr std::uint64_t kDiffusionStream = 0;
constexpr std::uint64_t kJumpStream = 1;
constexpr std::size_t kChunk = 128;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::mt19937_64 stream_engine(std::uint64_t seed, std::uint64_t index, std::uint64_t stream) {
    return std::mt19937_64(splitmix64(seed ^ splitmix64(index * 2 + stream)));
}

bool on_schedule(double t_days, double interval_days) {
    if (interval_days <= 0.0) return false;
    const double k = t_days / interval_days;
    return std::abs(k - std::round(k)) < 1e-9;
}

template <typename Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
    workers = std::max(1U, std::min<unsigned>(workers, static_cast<unsigned>((n + kChunk - 1) / kChunk)));
    if (workers <= 1) {
        fn(std::size_t{0}, n);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t begin = next.fetch_add(kChunk);
                if (begin >= n) break;
                fn(begin, std::min(n, begin + kChunk));
            }
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace

std::size_t step_count(double horizon_days, double dt_days) {
    if (!(dt_days > 0.0) || !(horizon_days > 0.0)) throw ConfigError("horizon and dt must be positive");
    const double ratio = horizon_days / dt_days;
    const double rounded = std::round(ratio);
    if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9) {
        throw ConfigError("horizon_days must be a whole multiple of dt_days");
    }
    return static_cast<std::size_t>(rounded);
}

PathGenerator::PathGenerator(const MarketParams& market, std::optional<JumpParams> jump,
                             double horizon_days, double dt_days, std::uint64_t seed)
    : market_(market),
      jump_(std::move(jump)),
      steps_(step_count(horizon_days, dt_days)),
      dt_days_(dt_days),
      seed_(seed),
      diff_sigma_a_(market.sigma_a),
      diff_sigma_b_(market.sigma_b),
      compensator_(0.0) {
    if (!(market.sigma_a >= 0.0) || !(market.sigma_b >= 0.0) || !(market.rho >= -1.0 && market.rho <= 1.0)) {
        throw ConfigError("invalid market parameters for path generation");
    }
    if (jump_) {
        if (const auto errors = validate(market, *jump_); !errors.empty()) throw ConfigError(errors.front());
        diff_sigma_a_ = jump_->diffusion_sigma(market.sigma_a);
        diff_sigma_b_ = jump_->diffusion_sigma(market.sigma_b);
        compensator_ = jump_->lambda * jump_->kappa();
    }
}

void PathGenerator::fill(std::uint64_t index, PricePath& out) const {
    out.rel_a.resize(steps_ + 1);
    out.rel_b.resize(steps_ + 1);
    out.rel_a[0] = 1.0;
    out.rel_b[0] = 1.0;

    const double dt = dt_days_ / kDaysPerYear;
    const double sqdt = std::sqrt(dt);
    const double rho = market_.rho;
    const double rho_perp = std::sqrt(std::max(0.0, 1.0 - rho * rho));
    const double drift_a = (market_.mu_a - 0.5 * diff_sigma_a_ * diff_sigma_a_ - compensator_) * dt;
    const double drift_b = (market_.mu_b - 0.5 * diff_sigma_b_ * diff_sigma_b_ - compensator_) * dt;

    auto diffusion = stream_engine(seed_, index, kDiffusionStream);
    std::normal_distribution<double> normal(0.0, 1.0);

    // Jumps draw from their own stream so the diffusion is unchanged when lambda = 0.
    std::mt19937_64 jump_engine;
    std::normal_distribution<double> jump_size;
    std::poisson_distribution<int> common_count, idio_count_a, idio_count_b;
    double common_mean = 0.0, idio_mean = 0.0;
    if (jump_) {
        jump_engine = stream_engine(seed_, index, kJumpStream);
        jump_size = std::normal_distribution<double>(jump_->mu_j, jump_->sigma_j);
        common_mean = jump_->lambda * jump_->rho_j * dt;
        idio_mean = jump_->lambda * (1.0 - jump_->rho_j) * dt;
        if (common_mean > 0.0) common_count = std::poisson_distribution<int>(common_mean);
        if (idio_mean > 0.0) {
            idio_count_a = std::poisson_distribution<int>(idio_mean);
            idio_count_b = std::poisson_distribution<int>(idio_mean);
        }
    }

    double log_a = 0.0, log_b = 0.0;
    for (std::size_t k = 1; k <= steps_; ++k) {
        const double z1 = normal(diffusion);
        const double z2 = rho * z1 + rho_perp * normal(diffusion);
        log_a += drift_a + diff_sigma_a_ * sqdt * z1;
        log_b += drift_b + diff_sigma_b_ * sqdt * z2;
        if (jump_) {
            const int nc = common_mean > 0.0 ? common_count(jump_engine) : 0;
            for (int j = 0; j < nc; ++j) {
                log_a += jump_size(jump_engine);
                log_b += jump_size(jump_engine);
            }
            if (idio_mean > 0.0) {
                const int na = idio_count_a(jump_engine);
                for (int j = 0; j < na; ++j) log_a += jump_size(jump_engine);
                const int nb = idio_count_b(jump_engine);
                for (int j = 0; j < nb; ++j) log_b += jump_size(jump_engine);
            }
        }
        out.rel_a[k] = std::exp(log_a);
        out.rel_b[k] = std::exp(log_b);
    }
}

PricePath PathGenerator::path(std::uint64_t index) const {
    PricePath p;
    fill(index, p);
    return p;
}

std::vector<PricePath> generate_paths(const MarketParams& market, const std::optional<JumpParams>& jump,
                                      double horizon_days, double dt_days, std::int64_t n_paths,
                                      std::uint64_t seed) {
    if (n_paths < 1) throw ConfigError("n_paths must be at least 1");
    const PathGenerator gen(market, jump, horizon_days, dt_days, seed);
    std::vector<PricePath> out(static_cast<std::size_t>(n_paths));
    for (std::size_t i = 0; i < out.size(); ++i) gen.fill(i, out[i]);
    return out;
}

int apply_rebalance_rule(PositionState& s, double p_a, double p_b, double t_days, const RebalanceRule& rule,
                         double h_target) {
    if (rule.kind == RebalanceKind::None || h_target <= 0.0 || s.lp_value <= 0.0) return 0;
    const double half_lp = 0.5 * s.lp_value;
    bool fire = false;
    if (rule.kind == RebalanceKind::Threshold) {
        const double h_a = s.debt_a * p_a / half_lp;
        const double h_b = s.debt_b * p_b / half_lp;
        const double band = rule.parameter / 100.0;
        fire = std::abs(h_a - h_target) > band || std::abs(h_b - h_target) > band;
    } else {
        fire = on_schedule(t_days, rule.parameter);
    }
    if (!fire) return 0;
    const double old_value = s.debt_value(p_a, p_b);
    s.debt_a = h_target * half_lp / p_a;
    s.debt_b = h_target * half_lp / p_b;
    // Extra borrow is sold into cash; a smaller target is repaid from cash.
    s.cash += s.debt_value(p_a, p_b) - old_value;
    return 1;
}

PathResult simulate_position(const PricePath& path, const MarketParams& market, const RateParams& rates,
                             const PositionParams& pos, const SimConfig& sim) {
    (void)market;  // prices already embody the market; kept for a uniform signature
    const double v0 = pos.v0;
    const double c = pos.collateral();
    const double h = pos.h;
    if (pos.initial_ltv() >= pos.l_max) throw ConfigError("initial LTV must be below l_max");
    if (path.rel_a.size() != path.rel_b.size() || path.rel_a.size() < 2) {
        throw ConfigError("price path must have at least one step");
    }

    const double dt_days = sim.dt_days;
    const double dt = dt_days / kDaysPerYear;
    const bool compound = sim.accrual == AccrualMode::Compound;

    PathResult result;
    result.equity0 = pos.initial_equity();
    result.max_ltv = pos.initial_ltv();

    PositionState s;
    s.lp_value = v0;
    s.debt_a = h * v0 / 2.0;
    s.debt_b = h * v0 / 2.0;
    s.collateral = c;
    s.tx_cost_paid = sim.borrow_fee_frac * h * v0;

    double liq_pnl_ex_costs = 0.0;
    double liq_costs = 0.0;
    const std::size_t steps = path.steps();

    for (std::size_t k = 1; k <= steps; ++k) {
        const double p_a = path.rel_a[k];
        const double p_b = path.rel_b[k];
        const double t_days = static_cast<double>(k) * dt_days;

        s.lp_value = v0 * std::sqrt(p_a * p_b);

        const double value_a = s.debt_a * p_a;
        const double value_b = s.debt_b * p_b;
        double interest = (rates.r_a * value_a + rates.r_b * value_b) * dt;
        if (compound && value_a + value_b > 0.0) {
            const double blended = (rates.r_a * value_a + rates.r_b * value_b) / (value_a + value_b);
            interest += blended * s.accrued_borrow * dt;
        }
        s.accrued_borrow += interest;
        s.collateral += (compound ? s.collateral : c) * rates.r_f * dt;
        s.pending_rewards += rates.reward_rate * v0 * dt;

        if (on_schedule(t_days, sim.claim_interval_days) && s.pending_rewards > 0.0) {
            if (sim.claim_mode == ClaimMode::NumeraireOffset) {
                s.debt_credit += s.pending_rewards;
            } else {
                const double debt = s.debt_value(p_a, p_b);
                const double pay = std::min(s.pending_rewards, debt);
                if (debt > 0.0) {
                    const double keep = 1.0 - pay / debt;
                    s.debt_a *= keep;
                    s.debt_b *= keep;
                }
                s.cash += s.pending_rewards - pay;
            }
            s.pending_rewards = 0.0;
            if (!result.liquidated) s.tx_cost_paid += sim.gas_cost;
        }

        // Collateral in the denominator is the deposited principal; supply yield is equity, not margin.
        const double ltv = std::max(0.0, s.debt_value(p_a, p_b) + s.accrued_borrow - s.debt_credit) / c;
        result.max_ltv = std::max(result.max_ltv, ltv);

        if (!result.liquidated && ltv >= pos.l_max) {
            result.liquidated = true;
            result.liq_time_days = t_days;
            liq_costs = s.tx_cost_paid;
            if (sim.liquidation_mode == LiquidationMode::PenaltyOnly) {
                liq_pnl_ex_costs = -sim.liq_penalty_frac * c;
            } else {
                const double equity = s.lp_value + s.pending_rewards + s.cash + s.debt_credit + s.collateral -
                                      s.debt_value(p_a, p_b) - s.accrued_borrow;
                liq_pnl_ex_costs = equity - sim.liq_penalty_frac * c - result.equity0;
            }
        }

        // After a liquidation the position keeps evolving only to track max LTV.
        if (!result.liquidated) {
            const int fired = apply_rebalance_rule(s, p_a, p_b, t_days, sim.rebalance, h);
            result.n_rebalances += fired;
            s.tx_cost_paid += fired * sim.gas_cost;
        }
    }

    double pnl_ex_costs = 0.0;
    if (result.liquidated) {
        pnl_ex_costs = liq_pnl_ex_costs;
        result.tx_cost_paid = liq_costs;
    } else {
        const double p_a = path.rel_a[steps];
        const double p_b = path.rel_b[steps];
        const double equity = s.lp_value + s.pending_rewards + s.cash + s.debt_credit + s.collateral -
                              s.debt_value(p_a, p_b) - s.accrued_borrow;
        pnl_ex_costs = equity - result.equity0;
        result.tx_cost_paid = s.tx_cost_paid;
    }
    result.roe_ex_costs = pnl_ex_costs / result.equity0;
    result.roe = sim.include_tx_costs ? result.roe_with_costs() : result.roe_ex_costs;
    return result;
}

double percentile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

namespace {

struct Moments {
    double mean = 0.0;
    double sd = 0.0;
};

Moments sample_moments(const std::vector<double>& x) {
    Moments m;
    for (const double v : x) m.mean += v;
    m.mean /= static_cast<double>(x.size());
    double ss = 0.0;
    for (const double v : x) ss += (v - m.mean) * (v - m.mean);
    m.sd = x.size() > 1 ? std::sqrt(ss / static_cast<double>(x.size() - 1)) : 0.0;
    return m;
}

}  // namespace

SummaryStats aggregate(std::span<const PathResult> results, const SimConfig& sim, double horizon_days,
                       double r_f) {
    if (results.empty()) throw ConfigError("aggregate needs at least one path result");
    const auto n = results.size();
    const double nd = static_cast<double>(n);
    const double rf_period = r_f * horizon_days / kDaysPerYear;
    const double annualize = std::sqrt(kDaysPerYear / horizon_days);
    constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

    std::vector<double> basis(n), raw(n), with_costs(n), max_ltv(n);
    std::size_t losses = 0, liquidations = 0;
    double rebalances = 0.0, survivor_rebalances = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = results[i];
        basis[i] = r.roe;
        raw[i] = r.roe_ex_costs;
        with_costs[i] = r.roe_with_costs();
        max_ltv[i] = r.max_ltv;
        if (r.roe < 0.0) ++losses;
        if (r.liquidated) ++liquidations;
        else survivor_rebalances += r.n_rebalances;
        rebalances += r.n_rebalances;
    }

    SummaryStats s;
    s.n = static_cast<std::int64_t>(n);
    const auto mb = sample_moments(basis);
    const auto mr = sample_moments(raw);
    const auto mt = sample_moments(with_costs);
    s.e_roe_pp = 100.0 * mb.mean;
    s.std_pp = 100.0 * mb.sd;
    s.e_roe_se_pp = s.std_pp / std::sqrt(nd);
    s.degenerate = !(mb.sd > 0.0) || !(mr.sd > 0.0) || !(mt.sd > 0.0);
    if (s.degenerate) {
        s.sr_raw = s.sr_tx = s.sr_se = kNaN;
    } else {
        const double per_raw = (mr.mean - rf_period) / mr.sd;
        s.sr_raw = per_raw * annualize;
        s.sr_tx = (mt.mean - rf_period) / mt.sd * annualize;
        // Lo (2002) iid approximation.
        s.sr_se = std::sqrt((1.0 + 0.5 * per_raw * per_raw) / nd) * annualize;
    }
    s.p_loss = static_cast<double>(losses) / nd;
    s.p_liq = static_cast<double>(liquidations) / nd;
    s.p_liq_se = std::sqrt(s.p_liq * (1.0 - s.p_liq) / nd);

    std::sort(basis.begin(), basis.end());
    s.var5_pp = 100.0 * percentile_sorted(basis, 0.05);
    std::sort(max_ltv.begin(), max_ltv.end());
    double ltv_sum = 0.0;
    for (const double v : max_ltv) ltv_sum += v;
    s.mean_max_ltv = ltv_sum / nd;
    s.p95_max_ltv = percentile_sorted(max_ltv, 0.95);
    s.p99_max_ltv = percentile_sorted(max_ltv, 0.99);
    s.avg_rebalances = rebalances / nd;
    const auto survivors = n - liquidations;
    s.avg_rebalances_survivors = survivors > 0 ? survivor_rebalances / static_cast<double>(survivors) : 0.0;
    (void)sim;
    return s;
}

std::vector<std::vector<PathResult>> simulate_grid(const Scenario& scenario, std::span<const double> hs) {
    if (const auto errors = validate(scenario.sim); !errors.empty()) throw ConfigError(errors.front());
    const auto& pos0 = scenario.position;
    for (const double h : hs) {
        if (h < 0.0 || h > 1.0) throw ConfigError("hedge ratio outside [0,1]");
        if (h / pos0.c_over_v0 >= pos0.l_max) throw ConfigError("hedge ratio starts at or above l_max");
    }
    const PathGenerator gen(scenario.market, scenario.jump, pos0.horizon_days, scenario.sim.dt_days,
                            scenario.sim.seed);
    const auto n = static_cast<std::size_t>(scenario.sim.n_paths);
    std::vector<std::vector<PathResult>> out(hs.size(), std::vector<PathResult>(n));

    parallel_for(n, scenario.sim.worker_count(), [&](std::size_t begin, std::size_t end) {
        PricePath path;
        PositionParams pos = pos0;
        for (std::size_t i = begin; i < end; ++i) {
            gen.fill(i, path);
            for (std::size_t j = 0; j < hs.size(); ++j) {
                pos.h = hs[j];
                out[j][i] = simulate_position(path, scenario.market, scenario.rates, pos, scenario.sim);
            }
        }
    });
    return out;
}

std::vector<SummaryStats> run_grid(const Scenario& scenario, std::span<const double> hs) {
    const auto results = simulate_grid(scenario, hs);
    std::vector<SummaryStats> stats;
    stats.reserve(hs.size());
    for (const auto& r : results) {
        stats.push_back(aggregate(r, scenario.sim, scenario.position.horizon_days, scenario.rates.r_f));
    }
    return stats;
}

SummaryStats run(const Scenario& scenario) {
    const double h = scenario.position.h;
    return run_grid(scenario, std::span<const double>(&h, 1)).front();
}

}  // namespace ammhedge::mc
