from ._empiproc import (
    cosine_covariances,
    empirical_cdf,
    estimate_gamma,
    fit_mixing_envelope,
    phi,
    schedule,
    simulate_iid,
    simulate_linear,
    simulate_lipschitz,
    simulate_markov,
    simulate_torus,
    spectral_gap_check,
    sup_gap,
    validate_torus,
    verify_sandwich,
)

__all__ = [
    "cosine_covariances",
    "empirical_cdf",
    "estimate_gamma",
    "fit_mixing_envelope",
    "phi",
    "schedule",
    "simulate_iid",
    "simulate_linear",
    "simulate_lipschitz",
    "simulate_markov",
    "simulate_torus",
    "spectral_gap_check",
    "sup_gap",
    "validate_torus",
    "verify_sandwich",
]
