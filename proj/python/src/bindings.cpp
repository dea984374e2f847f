#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "ammhedge/analytics.hpp"
#include "ammhedge/config.hpp"
#include "ammhedge/experiments.hpp"
#include "ammhedge/liquidation.hpp"
#include "ammhedge/montecarlo.hpp"

namespace py = pybind11;
using namespace ammhedge;

namespace {

py::dict stats_dict(const mc::SummaryStats& s) {
    py::dict d;
    d["n"] = s.n;
    d["e_roe_pp"] = s.e_roe_pp;
    d["std_pp"] = s.std_pp;
    d["sr_raw"] = s.sr_raw;
    d["sr_tx"] = s.sr_tx;
    d["p_loss"] = s.p_loss;
    d["p_liq"] = s.p_liq;
    d["var5_pp"] = s.var5_pp;
    d["mean_max_ltv"] = s.mean_max_ltv;
    d["p95_max_ltv"] = s.p95_max_ltv;
    d["p99_max_ltv"] = s.p99_max_ltv;
    d["avg_rebalances"] = s.avg_rebalances;
    d["avg_rebalances_survivors"] = s.avg_rebalances_survivors;
    d["e_roe_se_pp"] = s.e_roe_se_pp;
    d["sr_se"] = s.sr_se;
    d["p_liq_se"] = s.p_liq_se;
    d["degenerate"] = s.degenerate;
    return d;
}

py::list table_rows(const exp::Table& t) {
    py::list rows;
    for (const auto& row : t.rows) {
        py::list r;
        for (const auto& cell : row) {
            if (const auto* v = std::get_if<double>(&cell)) r.append(*v);
            else r.append(std::get<std::string>(cell));
        }
        rows.append(r);
    }
    return rows;
}

}  // namespace

PYBIND11_MODULE(_ammhedge, m) {
    m.doc() = "Hedged AMM liquidity provision: closed-form moments, first-passage liquidation, Monte Carlo";

    // Python-side exception hierarchy mirrors the CLI exit codes (1 config, 2 numerical).
    static py::exception<ConfigError> config_error(m, "ConfigError", PyExc_ValueError);
    static py::exception<NumericalError> numerical_error(m, "NumericalError", PyExc_ArithmeticError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ConfigError& e) {
            PyErr_SetString(config_error.ptr(), e.what());
        } catch (const NumericalError& e) {
            PyErr_SetString(numerical_error.ptr(), e.what());
        }
    });

    py::class_<MarketParams>(m, "MarketParams")
        .def(py::init<>())
        .def_readwrite("sigma_a", &MarketParams::sigma_a)
        .def_readwrite("sigma_b", &MarketParams::sigma_b)
        .def_readwrite("rho", &MarketParams::rho)
        .def_readwrite("mu_a", &MarketParams::mu_a)
        .def_readwrite("mu_b", &MarketParams::mu_b);

    py::class_<RateParams>(m, "RateParams")
        .def(py::init<>())
        .def_readwrite("r_a", &RateParams::r_a)
        .def_readwrite("r_b", &RateParams::r_b)
        .def_readwrite("reward_rate", &RateParams::reward_rate)
        .def_readwrite("r_f", &RateParams::r_f);

    py::class_<PositionParams>(m, "PositionParams")
        .def(py::init<>())
        .def_readwrite("v0", &PositionParams::v0)
        .def_readwrite("c_over_v0", &PositionParams::c_over_v0)
        .def_readwrite("h", &PositionParams::h)
        .def_readwrite("l_max", &PositionParams::l_max)
        .def_readwrite("horizon_years", &PositionParams::horizon_years)
        .def_readwrite("horizon_days", &PositionParams::horizon_days)
        .def("initial_ltv", &PositionParams::initial_ltv)
        .def("initial_equity", &PositionParams::initial_equity);

    py::class_<JumpParams>(m, "JumpParams")
        .def(py::init<>())
        .def_readwrite("lam", &JumpParams::lambda)
        .def_readwrite("mu_j", &JumpParams::mu_j)
        .def_readwrite("sigma_j", &JumpParams::sigma_j)
        .def_readwrite("rho_j", &JumpParams::rho_j)
        .def_readwrite("variance_matched", &JumpParams::variance_matched)
        .def("kappa", &JumpParams::kappa);

    py::class_<SimConfig>(m, "SimConfig")
        .def(py::init<>())
        .def_readwrite("n_paths", &SimConfig::n_paths)
        .def_readwrite("dt_days", &SimConfig::dt_days)
        .def_readwrite("claim_interval_days", &SimConfig::claim_interval_days)
        .def_readwrite("liq_penalty_frac", &SimConfig::liq_penalty_frac)
        .def_readwrite("borrow_fee_frac", &SimConfig::borrow_fee_frac)
        .def_readwrite("gas_cost", &SimConfig::gas_cost)
        .def_readwrite("seed", &SimConfig::seed)
        .def_readwrite("include_tx_costs", &SimConfig::include_tx_costs)
        .def_readwrite("threads", &SimConfig::threads)
        .def_property(
            "rebalance", [](const SimConfig& s) { return s.rebalance.to_string(); },
            [](SimConfig& s, const std::string& text) { s.rebalance = RebalanceRule::parse(text); });

    py::class_<Scenario>(m, "Scenario")
        .def(py::init(&baseline_scenario))
        .def_readwrite("market", &Scenario::market)
        .def_readwrite("rates", &Scenario::rates)
        .def_readwrite("position", &Scenario::position)
        .def_readwrite("jump", &Scenario::jump)
        .def_readwrite("sim", &Scenario::sim)
        .def("set", [](Scenario& s, std::string_view key, std::string_view value) { set_key(s, key, value); },
             py::arg("key"), py::arg("value"))
        .def("validate", [](const Scenario& s) { return validate(s); })
        .def("dump", &dump_scenario)
        .def("hash", &scenario_hash)
        .def("__repr__", [](const Scenario& s) { return "<Scenario " + scenario_hash(s) + ">"; });

    m.def("baseline_scenario", &baseline_scenario);
    m.def("parse_scenario", [](std::string_view text) { return parse_scenario(text); }, py::arg("text"));
    m.def("load_scenario", [](const std::filesystem::path& p) { return load_scenario(p); }, py::arg("path"));
    m.def(
        "apply_overrides",
        [](Scenario s, const std::vector<std::string>& overrides) {
            apply_overrides(s, overrides);
            return s;
        },
        py::arg("scenario"), py::arg("overrides"), "Returns a copy with key=value overrides applied.");

    m.def(
        "variance_components",
        [](const MarketParams& market, double t) {
            const auto mom = analytics::variance_components(market, t);
            py::dict d;
            d["phi"] = mom.phi;
            d["v_gg"] = mom.v_gg;
            d["v_aa"] = mom.v_aa;
            d["v_ga"] = mom.v_ga;
            return d;
        },
        py::arg("market"), py::arg("t_years"));
    m.def(
        "pnl_decomposition",
        [](const Scenario& s) {
            const auto p = analytics::pnl_decomposition(s.market, s.rates, s.position);
            py::dict d;
            d["mu0"] = p.mu0;
            d["c"] = p.c;
            return d;
        },
        py::arg("scenario"));
    m.def("h_star", [](const Scenario& s) { return analytics::h_star(s.market, s.rates, s.position); });
    m.def("h_min_variance", [](const Scenario& s) { return analytics::h_min_variance(s.market, s.position); });
    m.def(
        "sharpe", [](double h, const Scenario& s) { return analytics::sharpe(h, s.market, s.rates, s.position); },
        py::arg("h"), py::arg("scenario"));

    m.def("sigma_tilde", &fpt::sigma_tilde, py::arg("market"), py::arg("t_years"));
    m.def(
        "liquidation_probability",
        [](double h, const Scenario& s) { return fpt::liquidation_probability(h, s.market, s.position); },
        py::arg("h"), py::arg("scenario"));
    m.def(
        "h_bar", [](double alpha, const Scenario& s) { return fpt::h_bar(alpha, s.market, s.position); },
        py::arg("alpha"), py::arg("scenario"));
    m.def(
        "h_double_star",
        [](double alpha, const Scenario& s) { return fpt::h_double_star(alpha, s.market, s.rates, s.position); },
        py::arg("alpha"), py::arg("scenario"));

    m.def(
        "simulate",
        [](Scenario s, std::optional<double> h) {
            if (h) s.position.h = *h;
            mc::SummaryStats stats;
            {
                py::gil_scoped_release release;
                stats = mc::run(s);
            }
            return stats_dict(stats);
        },
        py::arg("scenario"), py::arg("h") = py::none(), "Monte Carlo summary statistics for one hedge ratio.");

    py::class_<exp::Table>(m, "Table")
        .def_readonly("name", &exp::Table::name)
        .def_readonly("columns", &exp::Table::columns)
        .def_property_readonly("rows", &table_rows)
        .def_property_readonly("seed", [](const exp::Table& t) { return t.provenance.seed; })
        .def_property_readonly("n_paths", [](const exp::Table& t) { return t.provenance.n_paths; })
        .def_property_readonly("engine", [](const exp::Table& t) { return t.provenance.engine; })
        .def("to_csv", &exp::to_csv, py::arg("full_precision") = false)
        .def("__str__", &exp::to_text);

    m.def("preset_names", &exp::preset_names);
    m.def(
        "run_preset",
        [](const std::string& name, const Scenario& base, std::optional<std::int64_t> n_paths,
           std::optional<bool> include_tx_costs) {
            exp::PresetOptions opts{n_paths, include_tx_costs};
            py::gil_scoped_release release;
            return exp::run_preset(name, base, opts);
        },
        py::arg("name"), py::arg("scenario") = baseline_scenario(), py::arg("n_paths") = py::none(),
        py::arg("include_tx_costs") = py::none());
}
