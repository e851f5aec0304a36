"""Evans-type determinants and Z2 index invariants.

The determinant of M = [U | S] (unstable block first) vanishes exactly
when the decaying subspaces intersect nontrivially.  With orthonormal
frames |det M| <= 1 and the value is gauge-dependent up to sign, so sign
data is only meaningful along one aligned frame field; all parity /
holonomy computations below insist on that.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field
from typing import Optional

import numpy as np

from . import dichotomy, subspaces
from .errors import ContractError, TransversalityError

__all__ = [
    "assemble_M",
    "evans_determinant",
    "determinant_data",
    "IndexReport",
    "build_report",
    "parity_pair",
    "iota_interval",
    "circle_holonomy",
    "PejsachowiczClass",
    "pejsachowicz_class",
]


def assemble_M(pair):
    """[U | S] with the unstable block in the leading columns."""
    m = np.hstack([pair.unstable, pair.stable])
    if m.shape[0] != m.shape[1]:
        raise ContractError(
            f"frames do not assemble to a square matrix, got {m.shape}"
        )
    return m


def evans_determinant(fam, lam, T=12.0, tol=1e-10, reortho_interval=1.0):
    """det [U | S] from freshly computed frames at one parameter value.

    The magnitude is gauge-free (and <= 1); the sign depends on the seed
    gauge, so compare signs only along an aligned frame field.
    """
    pair = subspaces.subspace_pair(fam, lam, T=T, tol=tol,
                                   reortho_interval=reortho_interval)
    return float(np.linalg.det(assemble_M(pair)))


@dataclass(frozen=True, eq=False)
class IndexReport:
    """Determinant samples and index invariants over one frame field."""

    topology: str
    nodes: np.ndarray
    lambda0: tuple
    ld: np.ndarray
    signs: np.ndarray
    margins: np.ndarray
    zero_tol: float
    truncation_time: float
    ld_reference: Optional[np.ndarray] = None
    psi: dict = dataclass_field(default_factory=dict)
    iota: Optional[int] = None
    holonomy: Optional[dict] = None
    pejsachowicz: Optional["PejsachowiczClass"] = None


def _parity(signs, margins, zero_tol, i, j):
    for idx in (i, j):
        if not (0 <= idx < len(signs)):
            raise ContractError(f"node index {idx} out of range")
        if margins[idx] <= zero_tol:
            raise TransversalityError(
                f"node {idx} is not transversal (margin {margins[idx]:.3e}); "
                "parity is undefined",
                margin=float(margins[idx]),
            )
    return 0 if signs[i] == signs[j] else 1


def parity_pair(report, i, j):
    """Z2 parity between two distinguished nodes: 1 iff the determinant
    signs at the (transversal) endpoints differ."""
    return _parity(report.signs, report.margins, report.zero_tol, i, j)


def iota_interval(m_a, m_b):
    """Interval index from the endpoint assemblies: 0 if
    det(M_a) det(M_b) > 0, 1 if negative; zero product is an error."""
    da = float(np.linalg.det(np.asarray(m_a, dtype=float)))
    db = float(np.linalg.det(np.asarray(m_b, dtype=float)))
    prod = da * db
    if prod == 0.0:
        raise TransversalityError(
            "endpoint determinant vanishes; the interval index is undefined",
            margin=0.0,
        )
    return 0 if prod > 0.0 else 1


def circle_holonomy(field, which="stable"):
    """(sign, w1) of a subbundle around a circle field.

    sign is the sign of the frame-overlap determinant across the
    identification edge after tree alignment; w1 = 1 marks a Mobius
    (orientation-reversing) bundle.
    """
    if field.space.topology != "circle" or not field.closing_dets:
        raise ContractError("circle_holonomy needs a field over a circle space")
    if which not in field.closing_dets:
        raise ContractError(f"unknown subbundle {which!r}")
    det = field.closing_dets[which]
    if det == 0.0:
        raise ContractError("degenerate closing overlap")
    sign = 1 if det > 0.0 else -1
    return sign, (0 if sign > 0 else 1)


@dataclass(frozen=True)
class PejsachowiczClass:
    """Z2 obstruction from the asymptotic stable bundles over a circle:
    value = w1(E^s at +inf) + w1(E^s at -inf) mod 2."""

    value: int
    w1_plus: int
    w1_minus: int


def pejsachowicz_class(fam, space):
    """Z2 class of a circle family from its asymptotic stable bundles.

    Needs only the hyperbolic limits, not the dynamics.  For the
    piecewise-scalar families the bundles reduce to the positive
    eigenbundles of C and B (the negative scalar factor swaps decay
    directions).
    """
    if space.topology != "circle":
        raise ContractError("pejsachowicz_class needs a circle space")
    minus_frames = []
    plus_frames = []
    for i in range(space.size):
        lam = float(space.nodes[i])
        fam.check_domain(lam)
        a_minus, a_plus = fam.limits(lam)
        minus_frames.append(dichotomy.matrix_sign_projector(a_minus).stable_frame)
        plus_frames.append(dichotomy.matrix_sign_projector(a_plus).stable_frame)
    root = space.lambda0[0] if space.lambda0 else 0
    _al_m, det_m, _ang_m = subspaces.align_frames_over(space, minus_frames, root)
    _al_p, det_p, _ang_p = subspaces.align_frames_over(space, plus_frames, root)
    w1_minus = 0 if det_m > 0.0 else 1
    w1_plus = 0 if det_p > 0.0 else 1
    return PejsachowiczClass(
        value=(w1_plus + w1_minus) % 2, w1_plus=w1_plus, w1_minus=w1_minus
    )


def determinant_data(field):
    """Per-node determinant and transversality margin of [U | S].

    Both frames are orthonormal, so the determinant lies in [-1, 1] and
    the margin is the smallest singular value of the assembled square
    matrix.  Batched so large grids pay one LAPACK call, not thousands.
    """
    stacked = np.stack([assemble_M(pair) for pair in field.pairs])
    ld = np.linalg.det(stacked)
    margins = np.linalg.svd(stacked, compute_uv=False)[:, -1]
    return ld, margins


def _reference_data(fam, nodes):
    # closed-form frame normalization per node: det of the reference
    # assembly and the product of the triangular volume factors
    from . import linalg

    ref_dets = np.empty(len(nodes))
    factors = np.empty(len(nodes))
    for i in range(len(nodes)):
        lam = nodes[i] if np.ndim(nodes[i]) else float(nodes[i])
        u_ref, s_ref = fam.closed_form_frames(lam)
        m_ref = np.hstack([u_ref, s_ref])
        ref_dets[i] = float(np.linalg.det(m_ref))
        _qu, ru = linalg.orthonormalize(u_ref)
        _qs, rs = linalg.orthonormalize(s_ref)
        factors[i] = float(np.prod(np.diag(ru)) * np.prod(np.diag(rs)))
    return ref_dets, factors


def build_report(fam, field, zero_tol=1e-8):
    """Determinants, margins, signs and invariants from one frame field.

    Distinguished nodes must be transversal; parity is computed for every
    distinguished pair, the interval index from the path endpoints, and
    holonomy plus the asymptotic-bundle class for circle fields.
    """
    space = field.space
    n = space.size
    ld, margins = determinant_data(field)
    signs = np.where(np.abs(ld) <= zero_tol, 0, np.sign(ld)).astype(int)
    subspaces.require_transversal(field, zero_tol)
    ld_reference = None
    if fam.closed_form_frames is not None and space.topology == "interval":
        ref_dets, factors = _reference_data(fam, space.nodes)
        root = field.root
        if signs[root] != 0 and ref_dets[root] != 0.0:
            gauge = float(np.sign(ref_dets[root]) * np.sign(ld[root]))
            ld_reference = gauge * ld * factors
    psi = {}
    lam0 = list(space.lambda0)
    for a in range(len(lam0)):
        for b in range(a + 1, len(lam0)):
            psi[(lam0[a], lam0[b])] = _parity(signs, margins, zero_tol,
                                              lam0[a], lam0[b])
    iota = None
    holonomy = None
    pej = None
    if space.topology == "interval":
        first, last = 0, n - 1
        if margins[first] > zero_tol and margins[last] > zero_tol:
            iota = iota_interval(assemble_M(field.pairs[first]),
                                 assemble_M(field.pairs[last]))
    elif space.topology == "circle":
        holonomy = {}
        for which in ("stable", "unstable"):
            sign, w1 = circle_holonomy(field, which)
            holonomy[which] = {
                "sign": sign,
                "w1": w1,
                "overlap_det": field.closing_dets[which],
            }
        pej = pejsachowicz_class(fam, space)
    return IndexReport(
        topology=space.topology,
        nodes=space.nodes,
        lambda0=space.lambda0,
        ld=ld,
        signs=signs,
        margins=margins,
        zero_tol=zero_tol,
        truncation_time=field.truncation_time,
        ld_reference=ld_reference,
        psi=psi,
        iota=iota,
        holonomy=holonomy,
        pejsachowicz=pej,
    )
