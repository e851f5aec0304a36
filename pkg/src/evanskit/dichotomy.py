"""Hyperbolic splittings, dichotomy constant estimates and certification.

For autonomous coefficients the invariant splitting comes from the matrix
sign function.  For the structured piecewise-scalar families the (K,
alpha) constants follow the closed formulas K = exp(mu a_plus t0),
alpha = mu a_plus with mu the smallest absolute eigenvalue of the
relevant matrix; other kinds get spectral-gap/eigenbasis-conditioning
estimates.  verify_dichotomy measures the decay inequalities directly on
a sample grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg, propagation
from .errors import ContractError, HyperbolicityError

__all__ = [
    "HyperbolicSplitting",
    "matrix_sign_projector",
    "DichotomyEstimate",
    "dichotomy_constants",
    "roughness_bound",
    "DichotomyReport",
    "verify_dichotomy",
]


@dataclass(frozen=True, eq=False)
class HyperbolicSplitting:
    """Spectral splitting of a hyperbolic matrix.

    projector maps onto the positive-real-part invariant subspace;
    unstable_frame spans its range, stable_frame its kernel (the
    negative-real-part subspace); gap is min |Re eigenvalue|.
    """

    projector: np.ndarray
    unstable_frame: np.ndarray
    stable_frame: np.ndarray
    gap: float


def matrix_sign_projector(a, tol=1e-12):
    """Invariant splitting of a hyperbolic matrix via the sign function.

    Requires every eigenvalue to satisfy |Re| >= 10 * tol; closer spectra
    raise HyperbolicityError carrying the offending real part.
    """
    a = np.asarray(a, dtype=float)
    re_parts = np.real(np.linalg.eigvals(a))
    gap = float(np.min(np.abs(re_parts)))
    if gap < 10.0 * tol:
        worst = re_parts[int(np.argmin(np.abs(re_parts)))]
        raise HyperbolicityError(
            f"matrix is not safely hyperbolic: eigenvalue real part {worst:.3e}",
            witness=float(worst),
        )
    s = linalg.matrix_sign(a, tol=tol)
    d = a.shape[0]
    p = 0.5 * (np.eye(d) + s)
    residual = float(np.linalg.norm(p @ p - p))
    if residual > 1e-10:
        raise HyperbolicityError(
            f"sign projector is not idempotent (||P^2-P|| = {residual:.3e})",
            witness=residual,
        )
    unstable = linalg.range_frame(p)
    stable = linalg.range_frame(np.eye(d) - p)
    if unstable.shape[1] + stable.shape[1] != d:
        raise HyperbolicityError(
            "projector ranks do not sum to the dimension", witness=residual
        )
    return HyperbolicSplitting(
        projector=p, unstable_frame=unstable, stable_frame=stable, gap=gap
    )


@dataclass(frozen=True)
class DichotomyEstimate:
    """(K, alpha) bound for one half-line with its provenance.

    provenance 'closed_form' marks the exact constants of
    the piecewise-scalar construction; 'eigenbasis_conditioning' marks
    spectral estimates for general asymptotic limits.
    """

    K: float
    alpha: float
    provenance: str


def _piecewise_estimate(m, profile):
    dec = linalg.sym_eig(m)
    mu = float(np.min(np.abs(dec.eigenvalues)))
    if mu <= 0.0:
        raise HyperbolicityError("matrix is singular", witness=mu)
    alpha = mu * profile.a_plus
    return DichotomyEstimate(
        K=math.exp(alpha * profile.t0), alpha=alpha, provenance="closed_form"
    )


def _limit_estimate(a, t0=0.0):
    vals, vecs = np.linalg.eig(a)
    gap = float(np.min(np.abs(np.real(vals))))
    if gap <= 0.0:
        raise HyperbolicityError("asymptotic limit is not hyperbolic", witness=gap)
    v = vecs / np.linalg.norm(vecs, axis=0, keepdims=True)
    cond = float(np.linalg.cond(v))
    return DichotomyEstimate(
        K=cond * math.exp(gap * t0), alpha=gap, provenance="eigenbasis_conditioning"
    )


def dichotomy_constants(fam, lam):
    """(minus, plus) half-line dichotomy constant estimates for a family."""
    fam.check_domain(lam)
    if fam.kind == "piecewise_scalar":
        b, c = fam.matrix_pair(lam)
        return (
            _piecewise_estimate(b, fam.profile),
            _piecewise_estimate(c, fam.profile),
        )
    if fam.kind == "perturbed":
        return dichotomy_constants(fam.base, lam)
    a_minus, a_plus = fam.limits(lam)
    return _limit_estimate(a_minus), _limit_estimate(a_plus)


def roughness_bound(K, alpha):
    """Perturbation sup-norm below which a (K, alpha) dichotomy persists:
    alpha / (4 K^2)."""
    if K < 1.0:
        raise ContractError(f"dichotomy constant K must be >= 1, got {K}")
    if alpha <= 0.0:
        raise ContractError(f"dichotomy rate alpha must be positive, got {alpha}")
    return alpha / (4.0 * K * K)


@dataclass(frozen=True, eq=False)
class DichotomyReport:
    """Grid certification of a dichotomy candidate.

    max_violation is max over grid pairs s <= t of
    ||Phi(t,s) P|| e^{alpha (t-s)} / K - 1 and the mirror term for I - P;
    non-positive means the decay inequalities hold on the grid.
    invariance_residual is max ||Phi P - P Phi|| / ||Phi||.
    """

    max_violation: float
    worst_pair: tuple
    invariance_residual: float
    pairs_checked: int

    @property
    def verified(self):
        return self.max_violation <= 0.0


def verify_dichotomy(fam, lam, half_line, projector, K, alpha, sample_grid,
                     tol=1e-10):
    """Measure the dichotomy inequalities for a constant projector
    candidate on all ordered pairs of a sample time grid.

    half_line is 'plus' or 'minus'; the grid must lie in the matching
    half-line.  Decaying blocks are integrated directly from P and I - P
    so growing directions cannot poison them.
    """
    fam.check_domain(lam)
    grid = np.sort(np.asarray(sample_grid, dtype=float))
    if grid.ndim != 1 or grid.size < 2:
        raise ContractError("sample_grid must contain at least two times")
    if half_line == "plus":
        if np.any(grid < 0.0):
            raise ContractError("half_line 'plus' needs a grid in [0, inf)")
    elif half_line == "minus":
        if np.any(grid > 0.0):
            raise ContractError("half_line 'minus' needs a grid in (-inf, 0]")
    else:
        raise ContractError(f"half_line must be 'plus' or 'minus', got {half_line!r}")
    if K < 1.0 or alpha <= 0.0:
        raise ContractError("need K >= 1 and alpha > 0")
    p = np.asarray(projector, dtype=float)
    d = fam.dim
    if p.shape != (d, d):
        raise ContractError(f"projector must be ({d}, {d}), got {p.shape}")
    if float(np.linalg.norm(p @ p - p)) > 1e-8:
        raise ContractError("projector candidate is not idempotent")
    comp = np.eye(d) - p
    max_violation = -math.inf
    worst = (grid[0], grid[0])
    inv_residual = 0.0
    pairs = 0
    for i, s in enumerate(grid):
        for t in grid[i:]:
            pairs += 1
            span = t - s
            grow = math.exp(alpha * span) / K
            fwd = propagation.propagate_matrix(fam, lam, p, s, t, tol=tol)
            v1 = float(np.linalg.norm(fwd, 2)) * grow - 1.0
            bwd = propagation.propagate_matrix(fam, lam, comp, t, s, tol=tol)
            v2 = float(np.linalg.norm(bwd, 2)) * grow - 1.0
            v = max(v1, v2)
            if v > max_violation:
                max_violation = v
                worst = (float(s), float(t))
            phi = propagation.transition(fam, lam, t, s, tol=tol)
            comm = float(np.linalg.norm(phi @ p - p @ phi))
            inv_residual = max(inv_residual, comm / max(1.0, float(np.linalg.norm(phi))))
    return DichotomyReport(
        max_violation=max_violation,
        worst_pair=worst,
        invariance_residual=inv_residual,
        pairs_checked=pairs,
    )
