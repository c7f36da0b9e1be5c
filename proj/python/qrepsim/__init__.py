"""Monte Carlo simulation of Bell-pair distribution over linear quantum-repeater chains."""

from ._core import (
    CellStats,
    CheckResult,
    DegenerateProjection,
    FidelityResult,
    InvalidParameter,
    LinkState,
    NonTermination,
    NetworkParams,
    Protocol,
    ProtocolOutcome,
    SpecParseError,
    SweepSpec,
    channel_success_prob,
    closed_form_fidelity,
    count_runs_of_true,
    dephase_prob,
    alpha_beta,
    expected_clock_sequential,
    expected_rounds_parallel,
    ghz_swap_check,
    hashing_rate,
    hashing_threshold,
    hashing_yield,
    normalized_time_to_seconds,
    oracle_chain_fidelity,
    oracle_fidelity,
    parse_sweep_spec,
    run_parallel,
    run_sequential,
    run_sweep,
    run_validation,
    simulate_trial,
    sweep_to_csv,
    sweep_to_json,
)

__all__ = [name for name in dir() if not name.startswith("_")]
