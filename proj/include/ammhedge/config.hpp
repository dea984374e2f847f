#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ammhedge {

inline constexpr double kDaysPerYear = 365.0;
inline constexpr std::uint64_t kDefaultSeed = 20240917ULL;

/// Raised for malformed or out-of-range inputs (CLI exit code 1).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a computation cannot proceed for numerical reasons (CLI exit code 2).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Correlated GBM parameters for the two pool tokens. Volatilities are annualized.
struct MarketParams {
    double sigma_a = 0.922;
    double sigma_b = 1.084;
    double rho = 0.72;
    double mu_a = 0.0;
    double mu_b = 0.0;
};

/// Annual rates. reward_rate is R/V0.
struct RateParams {
    double r_a = 0.03;
    double r_b = 0.15;
    double reward_rate = 0.54;
    double r_f = 0.04;
};

struct PositionParams {
    double v0 = 1.0;
    double c_over_v0 = 2.0;
    double h = 0.6;
    double l_max = 0.80;
    double horizon_years = 0.25;
    double horizon_days = 90.0;

    [[nodiscard]] double collateral() const { return c_over_v0 * v0; }
    [[nodiscard]] double initial_ltv() const { return h / c_over_v0; }
    /// Pi_0 = C + (1 - h) V0.
    [[nodiscard]] double initial_equity() const { return collateral() + (1.0 - h) * v0; }
};

struct JumpParams {
    double lambda = 4.0;
    double mu_j = -0.05;
    double sigma_j = 0.15;
    double rho_j = 0.80;
    bool variance_matched = true;

    /// E[e^Z] - 1 for Z ~ N(mu_j, sigma_j^2).
    [[nodiscard]] double kappa() const;
    /// Per-token diffusion volatility after optional variance matching.
    [[nodiscard]] double diffusion_sigma(double total_sigma) const;
};

enum class RebalanceKind { None, Threshold, Periodic };

struct RebalanceRule {
    RebalanceKind kind = RebalanceKind::None;
    /// Threshold in percentage points, or period in days.
    double parameter = 0.0;

    static RebalanceRule none() { return {}; }
    static RebalanceRule threshold(double pp) { return {RebalanceKind::Threshold, pp}; }
    static RebalanceRule periodic(double days) { return {RebalanceKind::Periodic, days}; }

    /// Parses "none", "threshold:15" or "periodic:30".
    static RebalanceRule parse(std::string_view text);
    [[nodiscard]] std::string to_string() const;
    bool operator==(const RebalanceRule&) const = default;
};

/// How claimed rewards are applied against the borrow.
enum class ClaimMode {
    /// Claimed rewards are held in the numeraire and netted against debt value.
    NumeraireOffset,
    /// Claimed rewards buy back borrowed tokens, split by current debt value.
    TokenRepay,
};

enum class LiquidationMode {
    /// P&L of a liquidated path is -liq_penalty_frac * C (less costs already paid).
    PenaltyOnly,
    /// Equity marked at the breach, minus liq_penalty_frac * C.
    MarkToMarket,
};

enum class AccrualMode { Simple, Compound };

struct SimConfig {
    std::int64_t n_paths = 30000;
    double dt_days = 1.0;
    double claim_interval_days = 14.0;
    double liq_penalty_frac = 0.20;
    double borrow_fee_frac = 0.003;
    double gas_cost = 0.0;
    RebalanceRule rebalance{};
    std::uint64_t seed = kDefaultSeed;
    bool include_tx_costs = false;
    ClaimMode claim_mode = ClaimMode::NumeraireOffset;
    LiquidationMode liquidation_mode = LiquidationMode::PenaltyOnly;
    AccrualMode accrual = AccrualMode::Simple;
    /// 0 selects std::thread::hardware_concurrency().
    unsigned threads = 0;

    [[nodiscard]] unsigned worker_count() const;
};

/// Everything needed to run one experiment.
struct Scenario {
    MarketParams market{};
    RateParams rates{};
    PositionParams position{};
    std::optional<JumpParams> jump{};
    SimConfig sim{};
};

/// Baseline SUI/NS calibration.
Scenario baseline_scenario();

/// Returns one message per violated invariant; empty means valid.
std::vector<std::string> validate(const MarketParams& market, const RateParams& rates,
                                  const PositionParams& pos);
std::vector<std::string> validate(const MarketParams& market, const JumpParams& jump);
std::vector<std::string> validate(const SimConfig& sim);
std::vector<std::string> validate(const Scenario& scenario);

/// Throws ConfigError listing every violation.
void ensure_valid(const Scenario& scenario);

// Scenario files: flat `key = value` lines, `#` comments, dotted keys.

/// Sets one dotted key. Unknown keys and malformed values throw ConfigError.
void set_key(Scenario& scenario, std::string_view key, std::string_view value);
/// Parses scenario text on top of `base`.
Scenario parse_scenario(std::string_view text, Scenario base = baseline_scenario());
Scenario load_scenario(const std::filesystem::path& path, Scenario base = baseline_scenario());
/// Applies "key=value" overrides in order.
void apply_overrides(Scenario& scenario, const std::vector<std::string>& overrides);
/// Canonical dump; round-trips through parse_scenario.
std::string dump_scenario(const Scenario& scenario);
/// FNV-1a of dump_scenario, hex encoded.
std::string scenario_hash(const Scenario& scenario);
/// Every key understood by set_key.
const std::vector<std::string_view>& scenario_keys();

// Calibration from historical prices.

struct PriceSeries {
    std::vector<std::string> dates;
    std::vector<double> prices;
};

/// Reads a `date,price` CSV with ISO-8601 dates.
PriceSeries read_price_csv(const std::filesystem::path& path);
PriceSeries parse_price_csv(std::string_view text);

/// Sample std (n-1) of daily log returns times sqrt(365); Pearson rho; zero drifts.
MarketParams estimate_market_params(const std::vector<double>& prices_a,
                                    const std::vector<double>& prices_b);
/// Checks date alignment before estimating.
MarketParams estimate_market_params(const PriceSeries& a, const PriceSeries& b);

}  // namespace ammhedge
