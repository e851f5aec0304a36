"""Stable/unstable frames at t = 0 and their alignment over parameter grids.

Frames are seeded from the asymptotic splitting at +-T (the numerically
stable directions of integration: stable data flows backward from +T,
unstable data forward from -T) and transported to the anchor time with
periodic re-orthonormalization.  Per-node frames carry an arbitrary
orthogonal gauge; continuity over a parameter grid is realized a
posteriori by Procrustes alignment along a breadth-first spanning tree
rooted at the first distinguished node.  On circles the identification
edge stays unaligned; the sign of its frame overlap is the holonomy of
the subbundle.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import linalg, model, propagation
from ._parallel import parallel_map
from .errors import ContinuityError, ContractError, TransversalityError

__all__ = [
    "stable_frame_at_zero",
    "unstable_frame_at_zero",
    "SubspacePair",
    "subspace_pair",
    "transversality",
    "procrustes_align",
    "FrameField",
    "frame_field",
    "align_frames_over",
    "require_transversal",
]


def _check_truncation(fam, T):
    if T <= 0.0:
        raise ContractError("truncation time T must be positive")
    if fam.kind == "piecewise_scalar" and T <= fam.profile.t0:
        raise ContractError(
            f"truncation_time T = {T} must exceed the profile switching "
            f"time t0 = {fam.profile.t0}"
        )
    if fam.kind == "perturbed":
        if T <= fam.bump.support:
            raise ContractError(
                f"truncation_time T = {T} must exceed the perturbation "
                f"support {fam.bump.support}"
            )
        _check_truncation(fam.base, T)


def stable_frame_at_zero(fam, lam, T=12.0, tol=1e-10, reortho_interval=1.0,
                         anchor=0.0):
    """Orthonormal frame spanning the stable subspace at the anchor time.

    Seeded from the asymptotic splitting at anchor + T and transported
    backward.
    """
    _check_truncation(fam, T)
    seeds = model.asymptotic_splitting_data(fam, lam)
    res = propagation.transport_frame(
        fam, lam, seeds.stable_seed, anchor + T, anchor,
        reortho_interval=reortho_interval, tol=tol,
    )
    return res.frame


def unstable_frame_at_zero(fam, lam, T=12.0, tol=1e-10, reortho_interval=1.0,
                           anchor=0.0):
    """Orthonormal frame spanning the unstable subspace at the anchor time.

    Seeded from the asymptotic splitting at anchor - T and transported
    forward.
    """
    _check_truncation(fam, T)
    seeds = model.asymptotic_splitting_data(fam, lam)
    res = propagation.transport_frame(
        fam, lam, seeds.unstable_seed, anchor - T, anchor,
        reortho_interval=reortho_interval, tol=tol,
    )
    return res.frame


@dataclass(frozen=True, eq=False)
class SubspacePair:
    """Unstable and stable frames of one parameter value at t = 0."""

    lam: object
    unstable: np.ndarray
    stable: np.ndarray
    truncation_time: float
    unstable_growth: float = 0.0
    stable_growth: float = 0.0


def subspace_pair(fam, lam, T=12.0, tol=1e-10, reortho_interval=1.0):
    """Compute both frames at t = 0 for one parameter value."""
    _check_truncation(fam, T)
    seeds = model.asymptotic_splitting_data(fam, lam)
    if seeds.unstable_seed.shape[1] + seeds.stable_seed.shape[1] != fam.dim:
        raise ContractError(
            "asymptotic subspace dimensions do not sum to the system dimension"
        )
    res_u = propagation.transport_frame(
        fam, lam, seeds.unstable_seed, -T, 0.0,
        reortho_interval=reortho_interval, tol=tol,
    )
    res_s = propagation.transport_frame(
        fam, lam, seeds.stable_seed, T, 0.0,
        reortho_interval=reortho_interval, tol=tol,
    )
    return SubspacePair(
        lam=lam,
        unstable=res_u.frame,
        stable=res_s.frame,
        truncation_time=T,
        unstable_growth=res_u.log_growth,
        stable_growth=res_s.log_growth,
    )


def transversality(pair, zero_tol=1e-8):
    """(flag, margin): margin is the smallest singular value of [U | S]."""
    m = np.hstack([pair.unstable, pair.stable])
    if m.shape[0] != m.shape[1]:
        raise ContractError(
            f"[U | S] must be square for a transversality check, got {m.shape}"
        )
    sv = np.linalg.svd(m, compute_uv=False)
    margin = float(sv[-1])
    return margin > zero_tol, margin


def procrustes_align(frame, reference):
    """Rotate a frame (within its span) to best match a reference frame."""
    return frame @ linalg.procrustes_factor(frame, reference)


def _adjacency(space, skip_edge):
    adj = {i: [] for i in range(space.size)}
    for (i, j) in space.edges:
        if skip_edge is not None and {i, j} == set(skip_edge):
            continue
        adj[i].append(j)
        adj[j].append(i)
    for i in adj:
        adj[i].sort()
    return adj


def align_frames_over(space, frames, root=None):
    """Align a per-node frame list along a BFS spanning tree.

    Returns (aligned frames, closing determinant or None, edge angles).
    Edge angles are gauge-free subspace angles keyed by edge; the closing
    determinant is the frame overlap det across the identification edge of
    a circle (its sign is the holonomy).
    """
    if len(frames) != space.size:
        raise ContractError("one frame per node required")
    if root is None:
        root = space.lambda0[0] if space.lambda0 else 0
    angles = {}
    for (i, j) in space.edges:
        angles[(i, j)] = linalg.max_principal_angle(frames[i], frames[j])
    aligned = [np.asarray(f, dtype=float) for f in frames]
    skip = space.closing_edge if space.topology == "circle" else None
    adj = _adjacency(space, skip)
    seen = {root}
    queue = [root]
    order = []
    while queue:
        cur = queue.pop(0)
        for nxt in adj[cur]:
            if nxt not in seen:
                seen.add(nxt)
                order.append((cur, nxt))
                queue.append(nxt)
    if len(seen) != space.size:
        raise ContractError("parameter space adjacency is not connected")
    for parent, child in order:
        aligned[child] = procrustes_align(aligned[child], aligned[parent])
    closing_det = None
    if skip is not None:
        i, j = skip
        closing_det = float(np.linalg.det(aligned[i].T @ aligned[j]))
    return aligned, closing_det, angles


@dataclass(frozen=True, eq=False)
class FrameField:
    """Aligned subspace frames over a parameter space.

    pairs[i] belongs to space.nodes[i]; closing_dets holds the circle
    identification-edge overlap determinants per subbundle.
    """

    space: model.ParameterSpace
    pairs: list
    truncation_time: float
    root: int
    max_edge_angle: float
    edge_angles: dict
    closing_dets: Optional[dict] = None


def frame_field(fam, space, T=12.0, tol=1e-10, reortho_interval=1.0,
                continuity_bound=0.2):
    """Aligned stable/unstable frames over all nodes of a parameter space.

    Node solves are independent (DICHOTOMY_THREADS parallelizes them); the
    alignment pass is sequential by design.  Adjacent-node subspace angles
    above continuity_bound abort with ContinuityError naming the edges
    that need refinement.
    """
    nodes = space.nodes

    def solve(i):
        lam = nodes[i] if nodes.ndim == 1 else nodes[i, :]
        return subspace_pair(fam, float(lam) if nodes.ndim == 1 else lam,
                             T=T, tol=tol, reortho_interval=reortho_interval)

    pairs = parallel_map(solve, range(space.size))
    root = space.lambda0[0] if space.lambda0 else 0
    us, closing_u, ang_u = align_frames_over(space, [p.unstable for p in pairs], root)
    ss, closing_s, ang_s = align_frames_over(space, [p.stable for p in pairs], root)
    angles = {e: max(ang_u[e], ang_s[e]) for e in ang_u}
    bad = sorted((int(i), int(j)) for (i, j), a in angles.items()
                 if a > continuity_bound)
    if bad:
        worst = max(angles[e] for e in bad)
        raise ContinuityError(
            f"{len(bad)} parameter edges exceed the continuity bound "
            f"{continuity_bound} rad (worst {worst:.3f}); refine the grid "
            f"near {bad[:5]}",
            edges=bad,
        )
    aligned_pairs = [
        SubspacePair(
            lam=p.lam, unstable=u, stable=s,
            truncation_time=p.truncation_time,
            unstable_growth=p.unstable_growth, stable_growth=p.stable_growth,
        )
        for p, u, s in zip(pairs, us, ss)
    ]
    closing = None
    if space.topology == "circle":
        closing = {"unstable": closing_u, "stable": closing_s}
    return FrameField(
        space=space,
        pairs=aligned_pairs,
        truncation_time=T,
        root=root,
        max_edge_angle=max(angles.values()) if angles else 0.0,
        edge_angles=angles,
        closing_dets=closing,
    )


def require_transversal(field, zero_tol=1e-8):
    """Check transversality at every distinguished node of a field."""
    for i in field.space.lambda0:
        ok, margin = transversality(field.pairs[i], zero_tol)
        if not ok:
            raise TransversalityError(
                f"distinguished node {i} (lambda = {field.space.nodes[i]!r}) "
                f"is not transversal (margin {margin:.3e})",
                margin=margin,
            )
