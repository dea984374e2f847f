"""Hedged AMM liquidity provision: closed-form moments, first-passage liquidation and Monte Carlo."""

from ._ammhedge import (
    ConfigError,
    JumpParams,
    MarketParams,
    NumericalError,
    PositionParams,
    RateParams,
    Scenario,
    SimConfig,
    Table,
    apply_overrides,
    baseline_scenario,
    h_bar,
    h_double_star,
    h_min_variance,
    h_star,
    liquidation_probability,
    load_scenario,
    parse_scenario,
    pnl_decomposition,
    preset_names,
    run_preset,
    sharpe,
    sigma_tilde,
    simulate,
    variance_components,
)

__all__ = [name for name in dir() if not name.startswith("_")]
