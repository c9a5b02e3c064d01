"""Python bindings for the bornlab simulation library."""

import json as _json

from ._core import (
    BornlabError,
    NumericalGuardError,
    PreconditionError,
    __version__,
    channel_unitary,
    dispersion,
    evolve,
    imbalance_demo,
    lorentz_spread_integral,
    max_growth_rate,
    n_particle_imbalance,
    norm_growth_rate,
    opening_duration,
    philox4x32_10,
    solve_connection,
    weyl_mode_phase_error,
)
from ._core import run_experiment as _run_experiment


def run(experiment, seed=0, threads=0, **params):
    """Run a named experiment. Keyword names use underscores for dashes.

    Returns the parsed result envelope, or the CSV text for ``dispersion``.
    """
    config = {key.replace("_", "-"): value for key, value in params.items()}
    text = _run_experiment(experiment, _json.dumps(config), seed, threads)
    return text if experiment == "dispersion" else _json.loads(text)


def deutsch(m, n, shots=0, seed=0, **params):
    """Final state and exact probability of the cavity protocol for sqrt(m)|A> + sqrt(n)|B>."""
    return run("deutsch", seed=seed, m=m, n=n, shots=shots, **params)["payload"]


def verify(seed=0, threads=0):
    """All acceptance checks; returns the verify payload."""
    return run("verify", seed=seed, threads=threads)["payload"]


__all__ = [
    "BornlabError",
    "NumericalGuardError",
    "PreconditionError",
    "__version__",
    "channel_unitary",
    "deutsch",
    "dispersion",
    "evolve",
    "imbalance_demo",
    "lorentz_spread_integral",
    "max_growth_rate",
    "n_particle_imbalance",
    "norm_growth_rate",
    "opening_duration",
    "philox4x32_10",
    "run",
    "solve_connection",
    "verify",
    "weyl_mode_phase_error",
]
