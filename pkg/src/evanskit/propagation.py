"""Transition matrices and frame transport.

All integration runs through an embedded Dormand-Prince 5(4) pair with
adaptive steps; a single tol parameter splits into absolute tol/10 and
relative tol.  Frames are re-orthonormalized every reortho_interval time
units so long transports neither overflow nor lose rank; the discarded
triangular factors accumulate into a log-growth diagnostic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from ._stepper import USING_COMPILED, integrate
from .errors import ContractError, RankDeficientError

__all__ = [
    "USING_COMPILED",
    "transition",
    "propagate_matrix",
    "transport_frame",
    "TransportResult",
]


def propagate_matrix(fam, lam, x0, s, t, tol=1e-10, max_steps=2_000_000):
    """Solution at time t of X' = A_lambda(r) X with X(s) = x0.

    Columns evolve independently; x0 may be a full matrix or a frame.
    """
    fam.check_domain(lam)
    if tol <= 0.0:
        raise ContractError("tol must be positive")
    x0 = np.asarray(x0, dtype=float)
    if x0.ndim != 2 or x0.shape[0] != fam.dim:
        raise ContractError(
            f"initial value must be ({fam.dim}, k), got shape {x0.shape}"
        )
    desc = fam.stepper_descriptor(lam)
    x, _na, _nr = integrate(desc, x0, float(s), float(t), tol, tol / 10.0,
                            max_steps=max_steps)
    return np.asarray(x)


def transition(fam, lam, t, s, tol=1e-10):
    """Transition matrix Phi(t, s) of x' = A_lambda(r) x."""
    return propagate_matrix(fam, lam, np.eye(fam.dim), s, t, tol=tol)


@dataclass(frozen=True, eq=False)
class TransportResult:
    """Transported orthonormal frame plus growth/step diagnostics.

    log_growth sums log det R over all re-orthonormalizations, i.e. the
    log volume growth of the transported frame.
    """

    frame: np.ndarray
    log_growth: float
    accepted_steps: int
    rejected_steps: int
    reortho_count: int


def transport_frame(fam, lam, frame, s, t, reortho_interval=1.0, tol=1e-10):
    """Transport an orthonormal frame from time s to time t.

    The frame is integrated in segments of at most reortho_interval and
    re-orthonormalized between segments.  A collapse of the triangular
    factor (dependent columns) raises RankDeficientError.
    """
    fam.check_domain(lam)
    f = np.asarray(frame, dtype=float)
    if f.ndim == 1:
        f = f[:, None]
    if f.shape[0] != fam.dim or f.shape[1] > fam.dim:
        raise ContractError(
            f"frame must be ({fam.dim}, k<= {fam.dim}), got shape {f.shape}"
        )
    gram = f.T @ f
    if float(np.max(np.abs(gram - np.eye(f.shape[1])))) > 1e-8:
        raise ContractError("transport_frame expects an orthonormal input frame")
    if reortho_interval <= 0.0:
        raise ContractError("reortho_interval must be positive")
    desc = fam.stepper_descriptor(lam)
    s = float(s)
    t = float(t)
    span = t - s
    # segment boundaries come from an index count, not accumulation, so
    # rounding cannot strand a subnormal-width segment at the far end
    n_seg = 0 if s == t else max(1, math.ceil(abs(span) / reortho_interval - 1e-12))
    cur = s
    x = f.copy()
    log_growth = 0.0
    naccept = 0
    nreject = 0
    nreortho = 0
    for k in range(1, n_seg + 1):
        nxt = t if k == n_seg else s + span * (k / n_seg)
        x, na, nr = integrate(desc, x, cur, nxt, tol, tol / 10.0)
        x = np.asarray(x)
        naccept += na
        nreject += nr
        try:
            q, r = linalg.orthonormalize(x)
        except RankDeficientError as exc:
            raise RankDeficientError(
                f"frame rank collapsed during transport near t = {nxt:.6g} "
                f"(smallest singular value {exc.smallest_singular_value:.3e})",
                smallest_singular_value=exc.smallest_singular_value,
            ) from exc
        log_growth += float(np.sum(np.log(np.diag(r))))
        nreortho += 1
        x = q
        cur = nxt
    return TransportResult(
        frame=x,
        log_growth=log_growth,
        accepted_steps=naccept,
        rejected_steps=nreject,
        reortho_count=nreortho,
    )
