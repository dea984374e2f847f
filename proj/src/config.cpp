#include "ammhedge/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

namespace ammhedge {

namespace {

std::string format_fixed(double value, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, value);
    return buf;
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

double parse_double(std::string_view key, std::string_view text) {
    text = trim(text);
    double value = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end || text.empty()) {
        throw ConfigError("invalid number for " + std::string(key) + ": '" + std::string(text) + "'");
    }
    return value;
}

std::uint64_t parse_u64(std::string_view key, std::string_view text) {
    text = trim(text);
    std::uint64_t value = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end || text.empty()) {
        throw ConfigError("invalid integer for " + std::string(key) + ": '" + std::string(text) + "'");
    }
    return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
    text = trim(text);
    if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
    if (text == "false" || text == "0" || text == "no" || text == "off") return false;
    throw ConfigError("invalid boolean for " + std::string(key) + ": '" + std::string(text) + "'");
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

double JumpParams::kappa() const { return std::exp(mu_j + 0.5 * sigma_j * sigma_j) - 1.0; }

double JumpParams::diffusion_sigma(double total_sigma) const {
    if (!variance_matched) return total_sigma;
    const double var = total_sigma * total_sigma - lambda * (mu_j * mu_j + sigma_j * sigma_j);
    if (var <= 0.0) {
        throw ConfigError("variance matching leaves non-positive diffusion variance");
    }
    return std::sqrt(var);
}

RebalanceRule RebalanceRule::parse(std::string_view text) {
    text = trim(text);
    if (text == "none") return none();
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) {
        throw ConfigError("invalid rebalance rule '" + std::string(text) +
                          "' (expected none, threshold:<pp> or periodic:<days>)");
    }
    const auto kind = text.substr(0, colon);
    const double param = parse_double("sim.rebalance", text.substr(colon + 1));
    if (param <= 0.0) throw ConfigError("rebalance parameter must be positive");
    if (kind == "threshold") return threshold(param);
    if (kind == "periodic") return periodic(param);
    throw ConfigError("unknown rebalance kind '" + std::string(kind) + "'");
}

std::string RebalanceRule::to_string() const {
    switch (kind) {
        case RebalanceKind::None: return "none";
        case RebalanceKind::Threshold: return "threshold:" + format_double(parameter);
        case RebalanceKind::Periodic: return "periodic:" + format_double(parameter);
    }
    return "none";
}

unsigned SimConfig::worker_count() const {
    if (threads > 0) return threads;
    return std::max(1U, std::thread::hardware_concurrency());
}

Scenario baseline_scenario() { return Scenario{}; }

std::vector<std::string> validate(const MarketParams& market, const RateParams& rates,
                                  const PositionParams& pos) {
    std::vector<std::string> errors;
    if (!(market.sigma_a > 0.0)) errors.emplace_back("sigma_a must be positive");
    if (!(market.sigma_b > 0.0)) errors.emplace_back("sigma_b must be positive");
    if (!(market.rho > -1.0 && market.rho < 1.0)) {
        errors.emplace_back("rho must lie strictly inside (-1,1)");
    }
    if (!(rates.r_a >= 0.0)) errors.emplace_back("r_a must be non-negative");
    if (!(rates.r_b >= 0.0)) errors.emplace_back("r_b must be non-negative");
    if (!(rates.reward_rate >= 0.0)) errors.emplace_back("reward_rate must be non-negative");
    if (!(rates.r_f >= 0.0)) errors.emplace_back("r_f must be non-negative");

    const bool v0_ok = pos.v0 > 0.0;
    const bool cv_ok = pos.c_over_v0 > 0.0;
    const bool h_ok = pos.h >= 0.0 && pos.h <= 1.0;
    const bool lmax_ok = pos.l_max > 0.0 && pos.l_max < 1.0;
    if (!v0_ok) errors.emplace_back("v0 must be positive");
    if (!cv_ok) errors.emplace_back("c_over_v0 must be positive");
    if (!h_ok) errors.emplace_back("h must lie in [0,1]");
    if (!lmax_ok) errors.emplace_back("l_max must lie strictly inside (0,1)");
    if (cv_ok && h_ok && lmax_ok && pos.initial_ltv() >= pos.l_max) {
        errors.emplace_back("initial LTV " + format_fixed(pos.initial_ltv(), 2) + " ≥ l_max");
    }
    const bool years_ok = pos.horizon_years > 0.0;
    const bool days_ok = pos.horizon_days > 0.0;
    if (!years_ok) errors.emplace_back("horizon_years must be positive");
    if (!days_ok) errors.emplace_back("horizon_days must be positive");
    // 0.25 y vs 90 d is the reference calibration and differs by 1.25 days.
    if (years_ok && days_ok && std::abs(pos.horizon_years * kDaysPerYear - pos.horizon_days) > 1.5) {
        errors.emplace_back("horizon_years and horizon_days disagree by more than 1.5 days");
    }
    return errors;
}

std::vector<std::string> validate(const MarketParams& market, const JumpParams& jump) {
    std::vector<std::string> errors;
    if (!(jump.lambda >= 0.0)) errors.emplace_back("jump lambda must be non-negative");
    if (!(jump.sigma_j >= 0.0)) errors.emplace_back("jump sigma_j must be non-negative");
    if (!(jump.rho_j >= 0.0 && jump.rho_j <= 1.0)) errors.emplace_back("jump rho_j must lie in [0,1]");
    if (jump.variance_matched && jump.lambda >= 0.0) {
        const double jump_var = jump.lambda * (jump.mu_j * jump.mu_j + jump.sigma_j * jump.sigma_j);
        if (market.sigma_a * market.sigma_a - jump_var <= 0.0) {
            errors.emplace_back("variance matching leaves non-positive diffusion variance for token A");
        }
        if (market.sigma_b * market.sigma_b - jump_var <= 0.0) {
            errors.emplace_back("variance matching leaves non-positive diffusion variance for token B");
        }
    }
    return errors;
}

std::vector<std::string> validate(const SimConfig& sim) {
    std::vector<std::string> errors;
    if (sim.n_paths < 1) errors.emplace_back("n_paths must be at least 1");
    if (!(sim.dt_days > 0.0)) errors.emplace_back("dt_days must be positive");
    if (!(sim.claim_interval_days >= 0.0)) errors.emplace_back("claim_interval_days must be non-negative");
    if (!(sim.liq_penalty_frac >= 0.0 && sim.liq_penalty_frac <= 1.0)) {
        errors.emplace_back("liq_penalty_frac must lie in [0,1]");
    }
    if (!(sim.borrow_fee_frac >= 0.0)) errors.emplace_back("borrow_fee_frac must be non-negative");
    if (!(sim.gas_cost >= 0.0)) errors.emplace_back("gas_cost must be non-negative");
    return errors;
}

std::vector<std::string> validate(const Scenario& scenario) {
    auto errors = validate(scenario.market, scenario.rates, scenario.position);
    if (scenario.jump) {
        auto more = validate(scenario.market, *scenario.jump);
        errors.insert(errors.end(), more.begin(), more.end());
    }
    auto more = validate(scenario.sim);
    errors.insert(errors.end(), more.begin(), more.end());
    return errors;
}

void ensure_valid(const Scenario& scenario) {
    const auto errors = validate(scenario);
    if (errors.empty()) return;
    std::string msg = "invalid scenario:";
    for (const auto& e : errors) msg += "\n  - " + e;
    throw ConfigError(msg);
}

const std::vector<std::string_view>& scenario_keys() {
    static const std::vector<std::string_view> keys = {
        "market.sigma_a", "market.sigma_b", "market.rho", "market.mu_a", "market.mu_b",
        "rates.r_a", "rates.r_b", "rates.reward_rate", "rates.r_f",
        "position.v0", "position.c_over_v0", "position.h", "position.l_max",
        "position.horizon_years", "position.horizon_days",
        "jump.enabled", "jump.lambda", "jump.mu_j", "jump.sigma_j", "jump.rho_j",
        "jump.variance_matched",
        "sim.n_paths", "sim.dt_days", "sim.claim_interval_days", "sim.liq_penalty_frac",
        "sim.borrow_fee_frac", "sim.gas_cost", "sim.rebalance", "sim.seed",
        "sim.include_tx_costs", "sim.claim_mode", "sim.liquidation_mode", "sim.accrual",
        "sim.threads",
    };
    return keys;
}

void set_key(Scenario& s, std::string_view key, std::string_view value) {
    key = trim(key);
    auto num = [&] { return parse_double(key, value); };
    auto jump = [&]() -> JumpParams& {
        if (!s.jump) s.jump = JumpParams{};
        return *s.jump;
    };

    if (key == "market.sigma_a") s.market.sigma_a = num();
    else if (key == "market.sigma_b") s.market.sigma_b = num();
    else if (key == "market.rho") s.market.rho = num();
    else if (key == "market.mu_a") s.market.mu_a = num();
    else if (key == "market.mu_b") s.market.mu_b = num();
    else if (key == "rates.r_a") s.rates.r_a = num();
    else if (key == "rates.r_b") s.rates.r_b = num();
    else if (key == "rates.reward_rate") s.rates.reward_rate = num();
    else if (key == "rates.r_f") s.rates.r_f = num();
    else if (key == "position.v0") s.position.v0 = num();
    else if (key == "position.c_over_v0") s.position.c_over_v0 = num();
    else if (key == "position.h") s.position.h = num();
    else if (key == "position.l_max") s.position.l_max = num();
    else if (key == "position.horizon_years") s.position.horizon_years = num();
    else if (key == "position.horizon_days") s.position.horizon_days = num();
    else if (key == "jump.enabled") {
        if (parse_bool(key, value)) jump();
        else s.jump.reset();
    }
    else if (key == "jump.lambda") jump().lambda = num();
    else if (key == "jump.mu_j") jump().mu_j = num();
    else if (key == "jump.sigma_j") jump().sigma_j = num();
    else if (key == "jump.rho_j") jump().rho_j = num();
    else if (key == "jump.variance_matched") jump().variance_matched = parse_bool(key, value);
    else if (key == "sim.n_paths") s.sim.n_paths = static_cast<std::int64_t>(parse_u64(key, value));
    else if (key == "sim.dt_days") s.sim.dt_days = num();
    else if (key == "sim.claim_interval_days") s.sim.claim_interval_days = num();
    else if (key == "sim.liq_penalty_frac") s.sim.liq_penalty_frac = num();
    else if (key == "sim.borrow_fee_frac") s.sim.borrow_fee_frac = num();
    else if (key == "sim.gas_cost") s.sim.gas_cost = num();
    else if (key == "sim.rebalance") s.sim.rebalance = RebalanceRule::parse(value);
    else if (key == "sim.seed") s.sim.seed = parse_u64(key, value);
    else if (key == "sim.include_tx_costs") s.sim.include_tx_costs = parse_bool(key, value);
    else if (key == "sim.claim_mode") {
        const auto v = trim(value);
        if (v == "offset") s.sim.claim_mode = ClaimMode::NumeraireOffset;
        else if (v == "token") s.sim.claim_mode = ClaimMode::TokenRepay;
        else throw ConfigError("sim.claim_mode must be 'offset' or 'token'");
    }
    else if (key == "sim.liquidation_mode") {
        const auto v = trim(value);
        if (v == "penalty") s.sim.liquidation_mode = LiquidationMode::PenaltyOnly;
        else if (v == "mark_to_market") s.sim.liquidation_mode = LiquidationMode::MarkToMarket;
        else throw ConfigError("sim.liquidation_mode must be 'penalty' or 'mark_to_market'");
    }
    else if (key == "sim.accrual") {
        const auto v = trim(value);
        if (v == "simple") s.sim.accrual = AccrualMode::Simple;
        else if (v == "compound") s.sim.accrual = AccrualMode::Compound;
        else throw ConfigError("sim.accrual must be 'simple' or 'compound'");
    }
    else if (key == "sim.threads") s.sim.threads = static_cast<unsigned>(parse_u64(key, value));
    else throw ConfigError("unknown key '" + std::string(key) + "'");
}

Scenario parse_scenario(std::string_view text, Scenario base) {
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        auto line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        try {
            set_key(base, line.substr(0, eq), line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return base;
}

Scenario load_scenario(const std::filesystem::path& path, Scenario base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), std::move(base));
}

void apply_overrides(Scenario& scenario, const std::vector<std::string>& overrides) {
    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos) throw ConfigError("override '" + o + "' must be key=value");
        set_key(scenario, std::string_view(o).substr(0, eq), std::string_view(o).substr(eq + 1));
    }
}

std::string dump_scenario(const Scenario& s) {
    std::ostringstream out;
    auto kv = [&](std::string_view k, const std::string& v) { out << k << " = " << v << '\n'; };
    auto d = [&](std::string_view k, double v) { kv(k, format_double(v)); };
    auto b = [&](std::string_view k, bool v) { kv(k, v ? "true" : "false"); };
    d("market.sigma_a", s.market.sigma_a);
    d("market.sigma_b", s.market.sigma_b);
    d("market.rho", s.market.rho);
    d("market.mu_a", s.market.mu_a);
    d("market.mu_b", s.market.mu_b);
    d("rates.r_a", s.rates.r_a);
    d("rates.r_b", s.rates.r_b);
    d("rates.reward_rate", s.rates.reward_rate);
    d("rates.r_f", s.rates.r_f);
    d("position.v0", s.position.v0);
    d("position.c_over_v0", s.position.c_over_v0);
    d("position.h", s.position.h);
    d("position.l_max", s.position.l_max);
    d("position.horizon_years", s.position.horizon_years);
    d("position.horizon_days", s.position.horizon_days);
    b("jump.enabled", s.jump.has_value());
    if (s.jump) {
        d("jump.lambda", s.jump->lambda);
        d("jump.mu_j", s.jump->mu_j);
        d("jump.sigma_j", s.jump->sigma_j);
        d("jump.rho_j", s.jump->rho_j);
        b("jump.variance_matched", s.jump->variance_matched);
    }
    kv("sim.n_paths", std::to_string(s.sim.n_paths));
    d("sim.dt_days", s.sim.dt_days);
    d("sim.claim_interval_days", s.sim.claim_interval_days);
    d("sim.liq_penalty_frac", s.sim.liq_penalty_frac);
    d("sim.borrow_fee_frac", s.sim.borrow_fee_frac);
    d("sim.gas_cost", s.sim.gas_cost);
    kv("sim.rebalance", s.sim.rebalance.to_string());
    kv("sim.seed", std::to_string(s.sim.seed));
    b("sim.include_tx_costs", s.sim.include_tx_costs);
    kv("sim.claim_mode", s.sim.claim_mode == ClaimMode::NumeraireOffset ? "offset" : "token");
    kv("sim.liquidation_mode",
       s.sim.liquidation_mode == LiquidationMode::PenaltyOnly ? "penalty" : "mark_to_market");
    kv("sim.accrual", s.sim.accrual == AccrualMode::Simple ? "simple" : "compound");
    // threads is an execution detail and deliberately not part of the dump.
    return out.str();
}

std::string scenario_hash(const Scenario& scenario) {
    std::uint64_t h = 1469598103934665603ULL;
    for (const unsigned char c : dump_scenario(scenario)) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

PriceSeries parse_price_csv(std::string_view text) {
    PriceSeries series;
    bool header_seen = false;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        auto line = trim(text.substr(0, nl));
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (line.empty()) continue;
        if (!header_seen) {
            if (line != "date,price") throw ConfigError("price CSV must start with header 'date,price'");
            header_seen = true;
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string_view::npos) {
            throw ConfigError("price CSV line " + std::to_string(line_no) + ": expected date,price");
        }
        const auto date = trim(line.substr(0, comma));
        // YYYY-MM-DD
        const bool iso = date.size() == 10 && date[4] == '-' && date[7] == '-' &&
                         std::all_of(date.begin(), date.end(), [](char c) {
                             return (c >= '0' && c <= '9') || c == '-';
                         });
        if (!iso) {
            throw ConfigError("price CSV line " + std::to_string(line_no) + ": date is not ISO-8601");
        }
        series.dates.emplace_back(date);
        series.prices.push_back(parse_double("price", line.substr(comma + 1)));
    }
    if (!header_seen) throw ConfigError("price CSV is empty");
    return series;
}

PriceSeries read_price_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open price file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_price_csv(buf.str());
}

MarketParams estimate_market_params(const std::vector<double>& prices_a,
                                    const std::vector<double>& prices_b) {
    if (prices_a.size() != prices_b.size()) {
        throw ConfigError("price series have different lengths");
    }
    if (prices_a.size() < 30) throw ConfigError("price series need at least 30 observations");
    for (std::size_t i = 0; i < prices_a.size(); ++i) {
        if (!(prices_a[i] > 0.0) || !(prices_b[i] > 0.0)) {
            throw ConfigError("price series must be strictly positive");
        }
    }
    const std::size_t n = prices_a.size() - 1;
    std::vector<double> ra(n), rb(n);
    double mean_a = 0.0, mean_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ra[i] = std::log(prices_a[i + 1] / prices_a[i]);
        rb[i] = std::log(prices_b[i + 1] / prices_b[i]);
        mean_a += ra[i];
        mean_b += rb[i];
    }
    mean_a /= static_cast<double>(n);
    mean_b /= static_cast<double>(n);
    double saa = 0.0, sbb = 0.0, sab = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = ra[i] - mean_a;
        const double db = rb[i] - mean_b;
        saa += da * da;
        sbb += db * db;
        sab += da * db;
    }
    MarketParams m;
    const double denom = static_cast<double>(n - 1);
    m.sigma_a = std::sqrt(saa / denom * kDaysPerYear);
    m.sigma_b = std::sqrt(sbb / denom * kDaysPerYear);
    // Zero-variance series leave rho undefined; report 0 and let validate reject the sigmas.
    m.rho = (saa > 0.0 && sbb > 0.0) ? std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0) : 0.0;
    m.mu_a = 0.0;
    m.mu_b = 0.0;
    return m;
}

MarketParams estimate_market_params(const PriceSeries& a, const PriceSeries& b) {
    if (a.dates != b.dates) throw ConfigError("price series dates are not aligned");
    return estimate_market_params(a.prices, b.prices);
}

}  // namespace ammhedge
