"""Cross-spliced fiber photon-pair source toolkit."""

from ._core import (
    ConfigError,
    DomainError,
    NumericalError,
    calibrate_birefringence,
    car,
    heralding_efficiencies,
    idler_wavelength,
    metrics,
    optimize_compensators,
    phase_map,
    reconstruct_mle,
    run_cli,
    simulate_tomography,
    solve_signal_idler,
    state,
    state_fidelity,
    werner_state,
)

__all__ = [
    "ConfigError",
    "DomainError",
    "NumericalError",
    "calibrate_birefringence",
    "car",
    "heralding_efficiencies",
    "idler_wavelength",
    "metrics",
    "optimize_compensators",
    "phase_map",
    "reconstruct_mle",
    "run_cli",
    "simulate_tomography",
    "solve_signal_idler",
    "state",
    "state_fidelity",
    "werner_state",
]
