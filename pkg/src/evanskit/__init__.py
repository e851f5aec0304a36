"""Dichotomy data, determinant curves and Z2 invariants for parameter
families of nonautonomous linear ODEs.

The workflow: describe a family (`model`), transport asymptotic frames
to t = 0 (`propagation`, `subspaces`), assemble determinants and parity
/ holonomy invariants (`index`), certify decay constants (`dichotomy`)
and locate or map zero sets over the parameter space (`bifurcation`).
"""

__version__ = "0.1.0"

from . import (  # noqa: F401
    bifurcation,
    dichotomy,
    index,
    linalg,
    model,
    propagation,
    subspaces,
    verification,
)
from ._stepper import USING_COMPILED
from .errors import (
    ConfigError,
    ContinuityError,
    ContractError,
    EvansKitError,
    HyperbolicityError,
    NumericalError,
    RankDeficientError,
    StiffnessError,
    TransversalityError,
)

__all__ = [
    "__version__",
    "USING_COMPILED",
    "bifurcation",
    "dichotomy",
    "index",
    "linalg",
    "model",
    "propagation",
    "subspaces",
    "verification",
    "EvansKitError",
    "ConfigError",
    "ContractError",
    "ContinuityError",
    "HyperbolicityError",
    "NumericalError",
    "RankDeficientError",
    "StiffnessError",
    "TransversalityError",
]
