"""Dense linear-algebra kernels used throughout the package.

All matrices here are small (system dimension <= 32), so the
implementations favour reproducibility over asymptotic speed: the
symmetric eigensolver is a cyclic Jacobi iteration with a deterministic
ordering and sign convention, the matrix exponential is
scaling-and-squaring with a degree-13 Pade core, and the matrix sign
function is a Newton iteration with determinant scaling.  Plain numpy
routines (qr, svd, det, solve) supply the factorization plumbing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, HyperbolicityError, RankDeficientError

__all__ = [
    "SpectralDecomposition",
    "sym_eig",
    "expm",
    "orthonormalize",
    "det_sign",
    "matrix_sign",
    "range_frame",
    "principal_angles",
    "max_principal_angle",
    "procrustes_factor",
]


def _as_square(m, who):
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ContractError(f"{who} expects a square matrix, got shape {a.shape}")
    return a


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigendata of a symmetric matrix.

    eigenvalues are ascending; vectors[:, i] is the unit eigenvector for
    eigenvalues[i]; stable_count counts the negative eigenvalues.
    """

    eigenvalues: np.ndarray
    vectors: np.ndarray
    stable_count: int


def _canonical_sign(vecs):
    # first entry of magnitude above 1e-12 made positive, per column
    out = vecs.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        nz = np.nonzero(np.abs(col) > 1e-12)[0]
        lead = nz[0] if nz.size else 0
        if col[lead] < 0.0:
            out[:, j] = -col
    return out


def sym_eig(m, sym_tol=1e-10):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Requires ||M - M^T|| <= sym_tol * ||M||.  Deterministic output order:
    ascending eigenvalue; equal eigenvalues ordered by lexicographically
    largest eigenvector; every eigenvector has its leading nonzero entry
    positive.
    """
    a = _as_square(m, "sym_eig")
    scale = float(np.linalg.norm(a))
    asym = float(np.linalg.norm(a - a.T))
    if asym > sym_tol * scale:
        raise ContractError(
            f"sym_eig expects a symmetric matrix: asymmetry {asym:.3e} "
            f"exceeds {sym_tol:.1e} * ||M|| = {sym_tol * scale:.3e}"
        )
    d = a.shape[0]
    w = 0.5 * (a + a.T)
    v = np.eye(d)
    if d > 1 and scale > 0.0:
        off_mask = ~np.eye(d, dtype=bool)
        for _sweep in range(60):
            # summing the off-diagonal entries directly avoids the
            # catastrophic cancellation of ||W||^2 - ||diag W||^2
            off = math.sqrt(float(np.sum(w[off_mask] ** 2)))
            if off <= 1e-14 * scale:
                break
            for p in range(d - 1):
                for q in range(p + 1, d):
                    apq = w[p, q]
                    if abs(apq) <= 1e-18 * scale:
                        continue
                    tau = (w[q, q] - w[p, p]) / (2.0 * apq)
                    if tau >= 0.0:
                        t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                    else:
                        t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                    c = 1.0 / math.sqrt(1.0 + t * t)
                    s = t * c
                    rp, rq = w[p, :].copy(), w[q, :].copy()
                    w[p, :] = c * rp - s * rq
                    w[q, :] = s * rp + c * rq
                    cp, cq = w[:, p].copy(), w[:, q].copy()
                    w[:, p] = c * cp - s * cq
                    w[:, q] = s * cp + c * cq
                    vp, vq = v[:, p].copy(), v[:, q].copy()
                    v[:, p] = c * vp - s * vq
                    v[:, q] = s * vp + c * vq
        else:
            raise HyperbolicityError(
                "Jacobi sweep limit reached without convergence", witness=off
            )
    vals = np.diag(w).copy()
    order = np.argsort(vals, kind="stable")
    vals = vals[order]
    vecs = _canonical_sign(v[:, order])
    # deterministic tie handling: equal eigenvalues sorted by descending
    # lexicographic eigenvector
    tie_tol = 1e-12 * max(1.0, scale)
    i = 0
    while i < d:
        j = i + 1
        while j < d and vals[j] - vals[i] <= tie_tol:
            j += 1
        if j - i > 1:
            block = sorted(range(i, j), key=lambda k: tuple(vecs[:, k]), reverse=True)
            vecs[:, i:j] = vecs[:, block]
        i = j
    return SpectralDecomposition(
        eigenvalues=vals, vectors=vecs, stable_count=int(np.sum(vals < 0.0))
    )


# degree-13 Pade coefficients for expm (Higham's scaling-and-squaring)
_PADE13 = (
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
)
_THETA13 = 5.371920351148152


def expm(m):
    """Matrix exponential by scaling-and-squaring with a (13,13) Pade core."""
    a = _as_square(m, "expm")
    d = a.shape[0]
    eye = np.eye(d)
    nrm = float(np.linalg.norm(a, 1))
    s = 0
    if nrm > _THETA13:
        s = max(0, int(math.ceil(math.log2(nrm / _THETA13))))
    x = a / (2.0**s)
    b = _PADE13
    x2 = x @ x
    x4 = x2 @ x2
    x6 = x4 @ x2
    u = x @ (
        x6 @ (b[13] * x6 + b[11] * x4 + b[9] * x2)
        + b[7] * x6
        + b[5] * x4
        + b[3] * x2
        + b[1] * eye
    )
    v = (
        x6 @ (b[12] * x6 + b[10] * x4 + b[8] * x2)
        + b[6] * x6
        + b[4] * x4
        + b[2] * x2
        + b[0] * eye
    )
    r = np.linalg.solve(v - u, v + u)
    for _ in range(s):
        r = r @ r
    return r


def orthonormalize(f, rank_tol=1e-13):
    """QR factorization F = Q R with positive diagonal of R.

    Raises RankDeficientError when the smallest singular value of F is at
    or below rank_tol.
    """
    a = np.asarray(f, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    if a.shape[0] < a.shape[1]:
        raise ContractError(
            f"orthonormalize expects at most as many columns as rows, got {a.shape}"
        )
    if a.shape[1] == 1:
        # single column: the factorization is plain normalization
        norm = float(np.sqrt(a[:, 0] @ a[:, 0]))
        if norm <= rank_tol:
            raise RankDeficientError(
                f"column is numerically zero (norm {norm:.3e} <= "
                f"{rank_tol:.1e})",
                smallest_singular_value=norm,
            )
        return a / norm, np.array([[norm]])
    sv = np.linalg.svd(a, compute_uv=False)
    smallest = float(sv[-1]) if sv.size else 0.0
    if smallest <= rank_tol:
        raise RankDeficientError(
            f"columns are numerically dependent (smallest singular value "
            f"{smallest:.3e} <= {rank_tol:.1e})",
            smallest_singular_value=smallest,
        )
    q, r = np.linalg.qr(a)
    sgn = np.sign(np.diag(r))
    sgn[sgn == 0.0] = 1.0
    return q * sgn, sgn[:, None] * r


def det_sign(m, zero_tol=0.0):
    """Determinant sign in {-1, 0, +1} together with the raw value.

    Values with |det| <= zero_tol report sign 0.
    """
    a = _as_square(m, "det_sign")
    val = float(np.linalg.det(a))
    if abs(val) <= zero_tol:
        return 0, val
    return (1 if val > 0.0 else -1), val


def matrix_sign(m, tol=1e-12, max_iter=100):
    """Matrix sign function by Newton iteration with determinant scaling.

    Converges for matrices with no purely imaginary eigenvalues; failure to
    settle within max_iter (or a singular iterate) raises
    HyperbolicityError.
    """
    a = _as_square(m, "matrix_sign")
    d = a.shape[0]
    s = a.copy()
    for _ in range(max_iter):
        det = float(np.linalg.det(s))
        sc = s
        if np.isfinite(det) and det != 0.0:
            sc = abs(det) ** (-1.0 / d) * s
        try:
            inv = np.linalg.inv(sc)
        except np.linalg.LinAlgError as exc:
            raise HyperbolicityError(
                "sign iteration hit a singular iterate (spectrum touches the "
                "imaginary axis)",
                witness=0.0,
            ) from exc
        s_next = 0.5 * (sc + inv)
        if not np.all(np.isfinite(s_next)):
            raise HyperbolicityError(
                "sign iteration diverged", witness=float(np.linalg.norm(s - sc))
            )
        delta = float(np.linalg.norm(s_next - sc))
        s = s_next
        if delta <= tol * max(float(np.linalg.norm(sc)), 1e-300):
            return s
    raise HyperbolicityError(
        f"sign iteration did not converge in {max_iter} steps", witness=delta
    )


def range_frame(p, rank=None):
    """Orthonormal basis of the range of an (approximate) projector.

    For an idempotent P the singular values cluster at >= 1 and 0, so a 0.5
    threshold separates range from kernel; pass rank to override.
    """
    a = _as_square(p, "range_frame")
    u, sv, _vt = np.linalg.svd(a)
    if rank is None:
        rank = int(np.sum(sv > 0.5))
    return _canonical_sign(u[:, :rank])


def principal_angles(a, b):
    """Principal angles (ascending, radians) between the column spans."""
    qa, _ = orthonormalize(a)
    qb, _ = orthonormalize(b)
    if qa.shape[1] != qb.shape[1]:
        raise ContractError(
            f"principal_angles expects equal subspace dimensions, got "
            f"{qa.shape[1]} and {qb.shape[1]}"
        )
    if qa.shape[1] == 1:
        # lines: the angle comes straight from the inner product
        overlap = abs(float(qa[:, 0] @ qb[:, 0]))
        return np.array([math.acos(min(1.0, overlap))])
    sv = np.linalg.svd(qa.T @ qb, compute_uv=False)
    # singular values are descending, so arccos comes out ascending
    return np.arccos(np.clip(sv, -1.0, 1.0))


def max_principal_angle(a, b):
    """Largest principal angle between two subspaces of equal dimension."""
    return float(np.max(principal_angles(a, b)))


def procrustes_factor(frame, reference):
    """Orthogonal k x k factor R minimizing ||frame @ R - reference||_F.

    R is the polar factor of frame^T reference; det R = -1 happens exactly
    when the best orthogonal match reverses orientation.
    """
    f = np.asarray(frame, dtype=float)
    r = np.asarray(reference, dtype=float)
    if f.shape != r.shape:
        raise ContractError(
            f"procrustes_factor expects equal shapes, got {f.shape} and {r.shape}"
        )
    u, _sv, vt = np.linalg.svd(f.T @ r)
    return u @ vt
