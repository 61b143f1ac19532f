"""Lattice heat transport and its modified-equation hierarchy.

A three-point conservative random-walk lattice, the continuum PDEs obtained by
Taylor-expanding it (heat, telegraph, fourth-order and mixed forms), exact
periodic solvers for those PDEs and the analyses that compare them.
"""
from ._backend import BACKEND
from .lattice import (LatticeField, Line, MicroParams, NonDissipativeWarning, Ring, Stencil,
                      TopologyError, delta, evolve, step)
from .models import LinearPDE, ScaleSpec, nondimensionalize, predicted_speed
from .opcalc import ModifiedPDE, SeriesTerm, derive_hierarchy, reduce_to_mixed_form
from .solvers import (ContinuumField, IllPosedGrowth, InitialData, MissingInitialRate,
                      NumericalFailure, StabilityViolation, spectral_solve)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "LatticeField", "Line", "MicroParams", "NonDissipativeWarning", "Ring",
    "Stencil", "TopologyError", "delta", "evolve", "step", "LinearPDE", "ScaleSpec",
    "nondimensionalize", "predicted_speed", "ModifiedPDE", "SeriesTerm", "derive_hierarchy",
    "reduce_to_mixed_form", "ContinuumField", "IllPosedGrowth", "InitialData",
    "MissingInitialRate", "NumericalFailure", "StabilityViolation", "spectral_solve",
]
