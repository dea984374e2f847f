#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ammhedge/analytics.hpp"
#include "ammhedge/liquidation.hpp"
#include "ammhedge/montecarlo.hpp"

using namespace ammhedge;

namespace {

// Random but fixed parameter draws; the suite must not depend on the scenario seed.
std::vector<MarketParams> random_markets(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> vol(0.2, 1.5), corr(-0.9, 0.95);
    std::vector<MarketParams> out;
    for (int i = 0; i < n; ++i) {
        MarketParams m;
        m.sigma_a = vol(rng);
        m.sigma_b = vol(rng);
        m.rho = corr(rng);
        out.push_back(m);
    }
    return out;
}

}  // namespace

TEST(Property, MgfMatchesSampleWithinThreeStandardErrors) {
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> z;
    const double t = 0.25;
    for (const auto& m : random_markets(12, 5)) {
        constexpr int n = 200'000;
        double s = 0, s2 = 0;
        const double rp = std::sqrt(1 - m.rho * m.rho);
        for (int i = 0; i < n; ++i) {
            const double z1 = z(rng);
            const double z2 = m.rho * z1 + rp * z(rng);
            const double la = -0.5 * m.sigma_a * m.sigma_a * t + m.sigma_a * std::sqrt(t) * z1;
            const double lb = -0.5 * m.sigma_b * m.sigma_b * t + m.sigma_b * std::sqrt(t) * z2;
            const double v = std::exp(0.5 * la + 0.5 * lb);
            s += v;
            s2 += v * v;
        }
        const double mean = s / n;
        const double se = std::sqrt((s2 / n - mean * mean) / n);
        const double exact = std::exp(analytics::joint_mgf_exponent(0.5, 0.5, m, t));
        EXPECT_LT(std::abs(mean - exact), 3.0 * se) << m.sigma_a << " " << m.sigma_b << " " << m.rho;
    }
}

TEST(Property, HedgedVarianceIsConvexInH) {
    for (const auto& m : random_markets(25, 11)) {
        const auto mom = analytics::variance_components(m, 0.25);
        for (double h = 0.0; h <= 1.0; h += 0.1) {
            const double d2 = mom.hedged_variance(h + 0.05) - 2 * mom.hedged_variance(h) + mom.hedged_variance(h - 0.05);
            EXPECT_GE(d2, -1e-14) << m.sigma_a << " " << m.sigma_b << " " << m.rho;
        }
    }
}

TEST(Property, LiquidationProbabilityIncreasesWithHedge) {
    for (const auto& m : random_markets(25, 17)) {
        PositionParams pos;
        double prev = 0.0;
        for (double h = 0.05; h <= 1.0 + 1e-12; h += 0.05) {
            const double p = fpt::liquidation_probability(h, m, pos);
            EXPECT_GE(p, prev) << h;
            EXPECT_LE(p, 1.0);
            prev = p;
        }
    }
}

TEST(Property, HBarBisectionBracketsAlpha) {
    for (const auto& m : random_markets(25, 23)) {
        PositionParams pos;
        for (const double alpha : {0.01, 0.05, 0.2}) {
            const double hb = fpt::h_bar(alpha, m, pos);
            EXPECT_LE(fpt::liquidation_probability(hb, m, pos), alpha);
            if (hb < 1.0) EXPECT_GT(fpt::liquidation_probability(hb + 2e-6, m, pos), alpha);
        }
    }
}

TEST(Property, ResultsIndependentOfWorkerCount) {
    auto s = baseline_scenario();
    s.sim.n_paths = 3000;
    const std::vector<double> hs{0.0, 0.6, 1.0};
    s.sim.threads = 1;
    const auto one = mc::run_grid(s, hs);
    s.sim.threads = 3;
    const auto three = mc::run_grid(s, hs);
    s.sim.threads = 8;
    const auto eight = mc::run_grid(s, hs);
    EXPECT_EQ(one, three);
    EXPECT_EQ(one, eight);

    s.jump = JumpParams{};
    s.sim.threads = 1;
    const auto j1 = mc::run_grid(s, hs);
    s.sim.threads = 5;
    EXPECT_EQ(j1, mc::run_grid(s, hs));
}

TEST(Property, PriceRelativesAreMartingales) {
    const MarketParams m;
    for (const bool jumps : {false, true}) {
        std::optional<JumpParams> jp;
        if (jumps) jp = JumpParams{};
        const mc::PathGenerator gen(m, jp, 90.0, 1.0, 31337);
        constexpr int n = 40000;
        double sa = 0, sa2 = 0, sb = 0, sb2 = 0;
        mc::PricePath p;
        for (int i = 0; i < n; ++i) {
            gen.fill(static_cast<std::uint64_t>(i), p);
            sa += p.rel_a.back();
            sa2 += p.rel_a.back() * p.rel_a.back();
            sb += p.rel_b.back();
            sb2 += p.rel_b.back() * p.rel_b.back();
        }
        const double ma = sa / n, mb = sb / n;
        const double sea = std::sqrt((sa2 / n - ma * ma) / n), seb = std::sqrt((sb2 / n - mb * mb) / n);
        EXPECT_LT(std::abs(ma - 1.0), 3.0 * sea) << "jumps=" << jumps;
        EXPECT_LT(std::abs(mb - 1.0), 3.0 * seb) << "jumps=" << jumps;
    }
}
