"""Collective wave-particle laser model of photons and ion-solvated water.

Derives the coupling constants of the model, integrates its single-mode
FEL-type equations of motion in scaled and SI form, and checks the
instability, saturation and scaling-law predictions.
"""

__version__ = "0.1.0"

from .params import (  # noqa: E402
    CODATA,
    DerivedParams,
    MediumParams,
    PhysicalConstants,
    derive,
    design_formulas,
)
from .dynamics import PhysState, SimConfig, SimState, init_state, integrate  # noqa: E402
from .diagnostics import TraceRecord, PowerLawFit  # noqa: E402

__all__ = [
    "CODATA",
    "DerivedParams",
    "MediumParams",
    "PhysicalConstants",
    "PhysState",
    "PowerLawFit",
    "SimConfig",
    "SimState",
    "TraceRecord",
    "derive",
    "design_formulas",
    "init_state",
    "integrate",
]
