"""Zero location along parameter paths and sign maps on 2-d grids.

Bifurcation evidence is a sign change of the determinant along an
aligned frame field.  An isolated near-zero without a sign change
carries no parity information and is reported separately as a
candidate, not as a crossing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import index as index_mod
from . import subspaces
from .errors import ContractError, NumericalError, TransversalityError

__all__ = [
    "ZeroCrossing",
    "BifurcationFinding",
    "locate_zeros_on_path",
    "sign_map_2d",
    "boundary_trace",
]

BRACKET_WIDTH = 1e-8
_MAX_BISECTIONS = 200


@dataclass(frozen=True)
class ZeroCrossing:
    """One sign change of the determinant, refined by bisection.

    position is the final bracket midpoint; left/right values are the
    determinants at the final bracket ends (opposite signs); margins are
    the smallest singular values of [U | S] at the same three points.
    """

    position: float
    bracket: tuple
    residual: float
    margin: float
    left_value: float
    right_value: float
    left_margin: float
    right_margin: float
    bisection_steps: int


@dataclass(frozen=True)
class BifurcationFinding:
    topology: str
    ld: np.ndarray
    signs: np.ndarray
    margins: np.ndarray
    zero_tol: float
    zeros: tuple = ()
    # near-zero nodes with equal definite signs on both sides: candidate
    # degeneracies without parity evidence
    candidates: tuple = ()
    zero_nodes: tuple = ()
    n_positive_components: Optional[int] = None
    n_negative_components: Optional[int] = None
    n_zero_components: Optional[int] = None
    disconnects: Optional[bool] = None


def _aligned_eval(fam, lam, ref_pair, T, tol, reortho_interval):
    # fresh frames carry an arbitrary orientation; aligning to a nearby
    # reference pair fixes the gauge so the determinant sign is usable
    pair = subspaces.subspace_pair(fam, lam, T=T, tol=tol,
                                   reortho_interval=reortho_interval)
    u = subspaces.procrustes_align(pair.unstable, ref_pair.unstable)
    s = subspaces.procrustes_align(pair.stable, ref_pair.stable)
    aligned = subspaces.SubspacePair(
        lam=lam, unstable=u, stable=s, truncation_time=pair.truncation_time,
        unstable_growth=pair.unstable_growth, stable_growth=pair.stable_growth,
    )
    m = np.hstack([u, s])
    value = float(np.linalg.det(m))
    margin = float(np.linalg.svd(m, compute_uv=False)[-1])
    return aligned, value, margin


def _refine_bracket(fam, lo, hi, pair_lo, val_lo, val_hi,
                    margin_lo, margin_hi, zero_tol, T, tol, reortho_interval):
    if not (math.copysign(1.0, val_lo) != math.copysign(1.0, val_hi)):
        raise ContractError("bracket ends must carry opposite signs")
    steps = 0
    while True:
        mid = 0.5 * (lo + hi)
        pair_mid, val, margin = _aligned_eval(fam, mid, pair_lo, T, tol,
                                              reortho_interval)
        steps += 1
        if (hi - lo) <= BRACKET_WIDTH and abs(val) <= zero_tol:
            return ZeroCrossing(
                position=float(mid),
                bracket=(float(lo), float(hi)),
                residual=float(abs(val)),
                margin=float(margin),
                left_value=float(val_lo),
                right_value=float(val_hi),
                left_margin=float(margin_lo),
                right_margin=float(margin_hi),
                bisection_steps=steps,
            )
        if steps >= _MAX_BISECTIONS:
            raise NumericalError(
                f"bisection stalled near parameter {mid!r}: bracket width "
                f"{hi - lo:.3e}, residual {abs(val):.3e} > {zero_tol:.1e}"
            )
        if math.copysign(1.0, val) == math.copysign(1.0, val_lo):
            lo, val_lo, pair_lo, margin_lo = mid, val, pair_mid, margin
        else:
            hi, val_hi, margin_hi = mid, val, margin


def locate_zeros_on_path(fam, space, T=12.0, zero_tol=1e-8, tol=1e-10,
                         reortho_interval=1.0, field=None):
    """Scan an interval path for determinant sign changes and refine each
    bracket by bisection until its width is at most 1e-8 parameter units
    and the midpoint residual drops below zero_tol.

    Both path endpoints must be transversal.  No sign change yields an
    empty finding.  Midpoint frames are evaluated fresh and aligned to
    the current left bracket end, so the chained gauge stays continuous
    all the way into the zero.
    """
    if space.topology != "interval":
        raise ContractError(
            f"path scan needs an interval space, got {space.topology!r}"
        )
    if field is None:
        field = subspaces.frame_field(fam, space, T=T, tol=tol,
                                      reortho_interval=reortho_interval)
    elif field.space is not space:
        raise ContractError("frame field was built over a different space")
    ld, margins = index_mod.determinant_data(field)
    signs = np.where(np.abs(ld) <= zero_tol, 0, np.sign(ld)).astype(int)
    for end in (0, space.size - 1):
        if margins[end] <= zero_tol:
            raise TransversalityError(
                f"path endpoint {space.nodes[end]!r} is not transversal "
                f"(margin {margins[end]:.3e})",
                margin=float(margins[end]),
            )
    definite = [i for i in range(space.size) if signs[i] != 0]
    zeros = []
    candidates = []
    for a, b in zip(definite, definite[1:]):
        if signs[a] == signs[b]:
            # near-zero run between equal signs: no parity evidence
            candidates.extend(range(a + 1, b))
            continue
        zeros.append(_refine_bracket(
            fam, float(space.nodes[a]), float(space.nodes[b]),
            field.pairs[a], float(ld[a]), float(ld[b]),
            float(margins[a]), float(margins[b]),
            zero_tol, T, tol, reortho_interval,
        ))
    return BifurcationFinding(
        topology="interval",
        ld=ld,
        signs=signs,
        margins=margins,
        zero_tol=float(zero_tol),
        zeros=tuple(zeros),
        candidates=tuple(candidates),
        zero_nodes=tuple(int(i) for i in np.flatnonzero(signs == 0)),
    )


def _components(n_nodes, members, edges):
    # connected components of the member subset; edges is an iterable of
    # index pairs already filtered to the wanted adjacency
    adj = [[] for _ in range(n_nodes)]
    for i, j in edges:
        if members[i] and members[j]:
            adj[i].append(j)
            adj[j].append(i)
    seen = np.zeros(n_nodes, dtype=bool)
    count = 0
    for start in range(n_nodes):
        if not members[start] or seen[start]:
            continue
        count += 1
        stack = [start]
        seen[start] = True
        while stack:
            node = stack.pop()
            for nb in adj[node]:
                if not seen[nb]:
                    seen[nb] = True
                    stack.append(nb)
    return count


def _diagonal_edges(space):
    # 8-connectivity completion of the grid: the stored edges are the
    # axis-aligned ones, this adds the diagonals
    gi = space.grid_index
    res = space.resolution
    out = []
    for iy in range(res - 1):
        for ix in range(res):
            i = gi[iy, ix]
            if i < 0:
                continue
            for dx in (-1, 1):
                jx = ix + dx
                if 0 <= jx < res and gi[iy + 1, jx] >= 0:
                    out.append((int(i), int(gi[iy + 1, jx])))
    return out


def sign_map_2d(fam, space, T=12.0, zero_tol=1e-8, tol=1e-7,
                reortho_interval=1.0, field=None):
    """Per-node determinant signs over a masked 2-d grid, with connected
    component counts of the strictly positive and strictly negative
    regions (4-adjacency, zero nodes excluded) and of the zero set
    (8-adjacency, so a diagonal chain of zeros counts once).

    The finding disconnects when the definite-sign nodes fall into two
    or more components, meaning no same-sign grid path joins them.
    """
    if space.topology != "grid2d":
        raise ContractError(
            f"sign map needs a grid2d space, got {space.topology!r}"
        )
    if field is None:
        field = subspaces.frame_field(fam, space, T=T, tol=tol,
                                      reortho_interval=reortho_interval)
    elif field.space is not space:
        raise ContractError("frame field was built over a different space")
    ld, margins = index_mod.determinant_data(field)
    signs = np.where(np.abs(ld) <= zero_tol, 0, np.sign(ld)).astype(int)
    n = space.size
    n_pos = _components(n, signs == 1, space.edges)
    n_neg = _components(n, signs == -1, space.edges)
    zero_members = signs == 0
    n_zero = _components(n, zero_members,
                         list(space.edges) + _diagonal_edges(space))
    return BifurcationFinding(
        topology="grid2d",
        ld=ld,
        signs=signs,
        margins=margins,
        zero_tol=float(zero_tol),
        zero_nodes=tuple(int(i) for i in np.flatnonzero(zero_members)),
        n_positive_components=n_pos,
        n_negative_components=n_neg,
        n_zero_components=n_zero,
        disconnects=bool(n_pos + n_neg >= 2),
    )


def boundary_trace(finding, space):
    """Adjacent boundary-node pairs bracketing a sign change of the grid
    map restricted to the boundary cycle.

    Zero nodes are skipped, so a pair may straddle one; the two entries
    always carry opposite definite signs.  Returns an empty list when
    the boundary restriction never changes sign.
    """
    if finding.topology != "grid2d" or space.topology != "grid2d":
        raise ContractError("boundary trace is defined for grid findings")
    if space.boundary is None:
        raise ContractError("space carries no boundary cycle")
    signs = finding.signs
    definite = [i for i in space.boundary if signs[i] != 0]
    if len(definite) < 2:
        return []
    pairs = []
    for k in range(len(definite)):
        a = definite[k]
        b = definite[(k + 1) % len(definite)]
        if a != b and signs[a] != signs[b]:
            pairs.append((int(a), int(b)))
    return pairs
