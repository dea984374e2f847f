// Acceptance harness: one PASS/FAIL line per criterion at the default seed.
// Exit status is 0 once every criterion has been evaluated; --strict also fails on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "ammhedge/analytics.hpp"
#include "ammhedge/experiments.hpp"
#include "ammhedge/liquidation.hpp"
#include "ammhedge/montecarlo.hpp"

using namespace ammhedge;
using exp::Table;

namespace {

struct Check {
    bool ok = true;
    std::vector<std::string> notes;

    void expect(bool cond, const char* fmt, ...) __attribute__((format(printf, 3, 4))) {
        char buf[256];
        va_list args;
        va_start(args, fmt);
        std::vsnprintf(buf, sizeof buf, fmt, args);
        va_end(args);
        if (!cond) {
            ok = false;
            notes.emplace_back(std::string("MISS ") + buf);
        } else {
            notes.emplace_back(buf);
        }
    }
};

bool near(double x, double target, double tol) { return std::abs(x - target) <= tol; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Check c1_constants() {
    Check c;
    const auto s = baseline_scenario();
    const auto t0 = std::chrono::steady_clock::now();
    const auto mom = analytics::variance_components(s.market, s.position.horizon_years);
    const auto pnl = analytics::pnl_decomposition(s.market, s.rates, s.position);
    const double hmv = analytics::h_min_variance(s.market, s.position);
    const double hs = analytics::h_star(s.market, s.rates, s.position);
    const double ms = 1e3 * seconds_since(t0);
    const std::vector<std::tuple<const char*, double, double>> items{
        {"phi", mom.phi, 0.0732}, {"v_gg", mom.v_gg, 0.2331}, {"v_aa", mom.v_aa, 0.2431},
        {"v_ga", mom.v_ga, 0.2376}, {"mu0", pnl.mu0, 0.1369},  {"c", pnl.c, 0.0225},
        {"h_mv", hmv, 0.977},       {"h*", hs, 0.977}};
    for (const auto& [name, got, want] : items) c.expect(near(got, want, 5e-4), "%s=%.4f (%.4f)", name, got, want);
    c.expect(ms < 1.0, "runtime %.3f ms", ms);
    return c;
}

Check c2_sharpe_table() {
    Check c;
    const auto s = baseline_scenario();
    const double hs = analytics::h_star(s.market, s.rates, s.position);
    const std::vector<std::pair<double, double>> rows{{0.0, 0.28}, {0.3, 0.39}, {0.5, 0.53}, {0.6, 0.65},
                                                      {0.7, 0.87}, {0.8, 1.29}, {hs, 3.88},  {1.0, 3.62}};
    for (const auto& [h, want] : rows) {
        const double got = analytics::sharpe(h, s.market, s.rates, s.position);
        c.expect(near(got, want, 0.01), "SR(%.3f)=%.3f (%.2f)", h, got, want);
    }
    return c;
}

Check c3_fpt() {
    Check c;
    const auto s = baseline_scenario();
    const std::vector<std::pair<double, double>> rows{{0.3, 0.01}, {0.4, 0.13}, {0.5, 0.66}, {0.6, 2.05},
                                                      {0.7, 4.82}, {0.8, 9.34}, {1.0, 24.18}};
    for (const auto& [h, want] : rows) {
        const double got = 100.0 * fpt::liquidation_probability(h, s.market, s.position);
        c.expect(near(got, want, h == 1.0 ? 0.25 : 0.10), "P(%.1f)=%.2f%% (%.2f)", h, got, want);
    }
    return c;
}

Check c4_mc_vs_fpt() {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    const auto t = exp::run_preset("table5", baseline_scenario()).front();
    const double secs = seconds_since(t0);
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const double h = t.number(r, "h (%)") / 100.0;
        const double an = t.number(r, "Analytical");
        const double no = t.number(r, "MC (no claims)");
        const double cl = t.number(r, "MC (claims)");
        if (h <= 0.70 + 1e-9) c.expect(std::abs(no - an) < 0.3, "h=%.2f |MC-an|=%.2fpp", h, std::abs(no - an));
        if (h >= 0.5 - 1e-9) {
            const double se = std::hypot(t.number(r, "SE (no claims)"), t.number(r, "SE (claims)"));
            c.expect(no - cl > 2.0 * se, "h=%.2f claims lower by %.2fpp (2SE=%.2f)", h, no - cl, 2.0 * se);
        }
    }
    c.expect(secs < 60.0, "runtime %.1f s", secs);
    return c;
}

Check c5_hedge_grid() {
    Check c;
    const auto t = exp::run_preset("table4", baseline_scenario()).front();
    auto at = [&](double h, const char* col) { return t.number(t.row_where(100.0 * h), col); };
    c.expect(near(at(0.60, "SR (raw)"), 0.931, 0.05), "SR(0.60)=%.3f", at(0.60, "SR (raw)"));
    c.expect(near(at(0.65, "SR (raw)"), 0.951, 0.05), "SR(0.65)=%.3f", at(0.65, "SR (raw)"));
    c.expect(near(at(1.00, "SR (raw)"), -0.03, 0.06), "SR(1.0)=%.3f", at(1.00, "SR (raw)"));
    c.expect(near(at(0.60, "P(liq)"), 1.4, 0.4), "P(liq)(0.60)=%.2f%%", at(0.60, "P(liq)"));
    c.expect(near(at(1.00, "P(liq)"), 19.2, 0.8), "P(liq)(1.0)=%.2f%%", at(1.00, "P(liq)"));
    std::vector<double> sr;
    for (std::size_t r = 0; r < t.rows.size(); ++r) sr.push_back(t.number(r, "SR (raw)"));
    const double best = t.number(exp::argmax_index(sr), "h (%)");
    c.expect(best == 60.0 || best == 65.0, "argmax h=%.0f%%", best);
    c.expect(at(0.80, "5% VaR") <= at(0.70, "5% VaR") - 10.0, "VaR(0.70)=%.1f VaR(0.80)=%.1f", at(0.70, "5% VaR"),
             at(0.80, "5% VaR"));
    return c;
}

Check c6_liquidation_stats() {
    Check c;
    const auto t = exp::run_preset("liquidation_stats", baseline_scenario()).front();
    const double no = t.number(0, "No claims"), cl = t.number(0, t.columns[2]);
    const double ltv = t.number(1, "No claims");
    c.expect(near(no, 23.0, 1.0), "P(liq) no claims=%.2f%%", no);
    c.expect(near(cl, 19.2, 1.0), "P(liq) claims=%.2f%%", cl);
    c.expect(near(ltv, 70.2, 1.5), "mean max LTV=%.2f%%", ltv);
    c.expect(no - cl >= 2.0 && no - cl <= 6.0, "claims reduce P(liq) by %.2fpp", no - cl);
    return c;
}

Check c7_jumps() {
    Check c;
    const auto t = exp::run_preset("jump_stress", baseline_scenario()).front();
    for (std::size_t r = 1; r < t.rows.size(); ++r) {
        const auto& rho = t.text(r, "rho_J");
        const auto& var = t.text(r, "Variance");
        const double h = t.number(r, "h**");
        const double sr = t.number(r, "SR");
        c.expect(h == 65.0, "rho_J=%s %s argmax=%.0f%%", rho.c_str(), var.c_str(), h);
        if (var == "matched") c.expect(near(sr, 0.94, 0.05), "rho_J=%s matched SR=%.3f", rho.c_str(), sr);
        else c.expect(sr >= 0.75 && sr <= 0.89, "rho_J=%s unmatched SR=%.3f", rho.c_str(), sr);
    }
    return c;
}

Check c8_rebalancing() {
    Check c;
    const auto t = exp::run_preset("rebalancing", baseline_scenario()).front();
    for (std::size_t r = 1; r <= 3; ++r) {
        const double step = t.number(r, "SR") - t.number(r - 1, "SR");
        const double se = std::max(t.number(r, "SE SR"), t.number(r - 1, "SE SR"));
        c.expect(step >= -se, "%s - %s = %+.3f (SE %.3f)", t.text(r, "Strategy").c_str(),
                 t.text(r - 1, "Strategy").c_str(), step, se);
    }
    c.expect(near(t.number(2, "SR"), 1.148, 0.07), "threshold-15pp SR=%.3f", t.number(2, "SR"));
    c.expect(t.number(5, "Avg rebal. (survivors)") == 3.0, "periodic-30 survivors avg=%.4f",
             t.number(5, "Avg rebal. (survivors)"));
    return c;
}

Check c9_properties() {
    Check c;
    const auto s = baseline_scenario();
    const auto& m = s.market;
    const double t = s.position.horizon_years;

    std::mt19937_64 rng(1);
    std::normal_distribution<double> z;
    constexpr int n = 400'000;
    double sum = 0, sum2 = 0;
    for (int i = 0; i < n; ++i) {
        const double z1 = z(rng);
        const double z2 = m.rho * z1 + std::sqrt(1 - m.rho * m.rho) * z(rng);
        const double v = std::exp(0.5 * (-0.5 * m.sigma_a * m.sigma_a * t + m.sigma_a * std::sqrt(t) * z1) +
                                  0.5 * (-0.5 * m.sigma_b * m.sigma_b * t + m.sigma_b * std::sqrt(t) * z2));
        sum += v;
        sum2 += v * v;
    }
    const double mean = sum / n, se = std::sqrt((sum2 / n - mean * mean) / n);
    const double exact = std::exp(analytics::joint_mgf_exponent(0.5, 0.5, m, t));
    c.expect(std::abs(mean - exact) < 3 * se, "MGF oracle |diff|/SE=%.2f", std::abs(mean - exact) / se);

    const auto mom = analytics::variance_components(m, t);
    bool convex = true, monotone = true, bracket = true;
    for (double h = 0.0; h <= 1.0; h += 0.05) {
        convex &= mom.hedged_variance(h + 0.05) - 2 * mom.hedged_variance(h) + mom.hedged_variance(h - 0.05) >= 0;
        if (h > 0) monotone &= fpt::liquidation_probability(h, m, s.position) >=
                               fpt::liquidation_probability(h - 0.05, m, s.position);
    }
    for (const double a : {0.01, 0.05, 0.2}) {
        const double hb = fpt::h_bar(a, m, s.position);
        bracket &= fpt::liquidation_probability(hb, m, s.position) <= a &&
                   (hb >= 1.0 || fpt::liquidation_probability(hb + 2e-6, m, s.position) > a);
    }
    c.expect(convex, "variance convex in h");
    c.expect(monotone, "P(liq) nondecreasing in h");
    c.expect(bracket, "h_bar brackets alpha");

    auto sc = s;
    sc.sim.n_paths = 2000;
    const std::vector<double> hs{0.6, 1.0};
    sc.sim.threads = 1;
    const auto one = mc::run_grid(sc, hs);
    sc.sim.threads = 4;
    c.expect(one == mc::run_grid(sc, hs), "identical stats with 1 and 4 workers");

    for (const bool jumps : {false, true}) {
        std::optional<JumpParams> jp;
        if (jumps) jp = JumpParams{};
        const mc::PathGenerator gen(m, jp, 90.0, 1.0, 99);
        double s1 = 0, s2 = 0;
        mc::PricePath p;
        constexpr int np = 40000;
        for (int i = 0; i < np; ++i) {
            gen.fill(static_cast<std::uint64_t>(i), p);
            s1 += p.rel_a.back();
            s2 += p.rel_a.back() * p.rel_a.back();
        }
        const double mu = s1 / np, sd = std::sqrt((s2 / np - mu * mu) / np);
        c.expect(std::abs(mu - 1.0) < 3 * sd, "E[S_T/S_0] %s = %.4f (SE %.4f)", jumps ? "jump" : "gbm", mu, sd);
    }
    return c;
}

Check c10_sensitivity() {
    Check c;
    const std::vector<std::pair<const char*, std::vector<double>>> expected{
        {"sensitivity_apr", {0, 40, 50, 60, 60, 70, 70}},
        {"sensitivity_vol", {70, 65, 50}},
        {"sensitivity_penalty", {80, 65, 60}},
        {"cv_sensitivity", {30, 50, 60, 65, 80, 80, 90, 100}},
    };
    const auto base = baseline_scenario();
    for (const auto& [name, want] : expected) {
        const auto t = exp::run_preset(name, base).front();
        if (t.rows.size() != want.size()) {
            c.expect(false, "%s has %zu rows", name, t.rows.size());
            continue;
        }
        std::string got;
        bool all = true;
        for (std::size_t r = 0; r < want.size(); ++r) {
            const double h = t.number(r, "h**");
            all &= std::abs(h - want[r]) <= 5.0 + 1e-9;
            got += (r ? "," : "") + std::to_string(static_cast<int>(std::lround(h)));
        }
        c.expect(all, "%s h**=%s", name, got.c_str());
        if (std::string_view(name) == "sensitivity_apr") {
            const double sr = t.number(0, "SR");
            c.expect(sr <= 0.05, "R/V0=0.10 SR=%.3f", sr);
        }
    }
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    bool strict = false;
    std::string report_path;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--strict") == 0) strict = true;
        else if (std::strcmp(argv[i], "--report") == 0 && i + 1 < argc) report_path = argv[++i];
        else {
            std::fprintf(stderr, "usage: %s [--strict] [--report FILE]\n", argv[0]);
            return 2;
        }
    }

    const std::vector<std::pair<const char*, std::function<Check()>>> criteria{
        {"analytical constants", c1_constants},
        {"analytical Sharpe table", c2_sharpe_table},
        {"first-passage table", c3_fpt},
        {"MC vs first-passage", c4_mc_vs_fpt},
        {"hedge grid", c5_hedge_grid},
        {"liquidation statistics", c6_liquidation_stats},
        {"jump robustness", c7_jumps},
        {"rebalancing", c8_rebalancing},
        {"property suite", c9_properties},
        {"sensitivity presets", c10_sensitivity},
    };

    std::string report;
    int failures = 0;
    int errors = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Check c;
        try {
            c = criteria[i].second();
        } catch (const std::exception& e) {
            c.ok = false;
            c.notes.emplace_back(std::string("ERROR ") + e.what());
            ++errors;
        }
        if (!c.ok) ++failures;
        std::string detail;
        for (const auto& n : c.notes) detail += (detail.empty() ? "" : "; ") + n;
        char head[128];
        std::snprintf(head, sizeof head, "criterion %2zu %s: %s (%.1fs)", i + 1, c.ok ? "PASS" : "FAIL", criteria[i].first,
                      seconds_since(t0));
        std::printf("%s\n    %s\n", head, detail.c_str());
        std::fflush(stdout);
        report += std::string(head) + "\n    " + detail + "\n";
    }
    char tail[96];
    std::snprintf(tail, sizeof tail, "%zu criteria, %d passed, %d failed\n", criteria.size(),
                  static_cast<int>(criteria.size()) - failures, failures);
    std::fputs(tail, stdout);
    report += tail;
    if (!report_path.empty()) std::ofstream(report_path) << report;
    if (errors > 0) return 2;
    return strict && failures > 0 ? 1 : 0;
}
