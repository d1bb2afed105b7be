"""Random reversible lattice circuits: exact walk laboratory and Monte Carlo."""

from ._core import (
    CapacityError,
    DomainError,
    ExactWalk,
    apply_circuit,
    build_circuit,
    census,
    circuit_depth,
    mc_tv_estimate,
    predicted_depth,
    render_state,
    suggest_base_layers,
)

__all__ = [
    "CapacityError",
    "DomainError",
    "ExactWalk",
    "apply_circuit",
    "build_circuit",
    "census",
    "circuit_depth",
    "mc_tv_estimate",
    "predicted_depth",
    "render_state",
    "suggest_base_layers",
]

__version__ = "0.1.0"
