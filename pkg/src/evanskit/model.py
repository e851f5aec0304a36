"""Problem families, parameter spaces and configuration.

A family supplies the coefficient matrix A_lambda(t), its hyperbolic
limits as t -> +-infinity, and seed frames for the decaying subspaces at
the truncation times.  Four kinds are supported:

* ``piecewise_scalar``: A(t) = a(t) * B for t <= 0 and a(t) * C for
  t >= 0, with a scalar profile a <= 0, a(0) = 0, and symmetric
  invertible matrix pairs B, C drawn from named constructions
  parameterized by an angle theta(lambda).
* ``second_order``: companion systems of u'' + p u' + q u = 0 with named
  closed-form coefficients (currently the 2 sech^2 potential).
* ``asymptotically_hyperbolic_tabulated``: arbitrary programmatic
  callables for A and its limits.
* ``perturbed``: any of the above plus a compactly supported bump.

Parameter spaces are finite node sets with adjacency: interval grids,
circle grids (first node = last node identification) and masked 2-d
grids over [-1, 1]^2.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import linalg
from .errors import ConfigError, ContractError, HyperbolicityError

__all__ = [
    "ScalarProfile",
    "AngleMap",
    "PiecewiseScalarFamily",
    "SecondOrderFamily",
    "TabulatedFamily",
    "Bump",
    "PerturbedFamily",
    "make_perturbation",
    "SplittingSeeds",
    "eval_coefficient",
    "asymptotic_splitting_data",
    "ParameterSpace",
    "interval_space",
    "circle_space",
    "grid_space",
    "Numerics",
    "ProblemSpec",
    "load_config",
    "dump_config",
    "builtin_names",
    "builtin_config",
    "load_builtin",
    "rotating_pair_family",
    "mobius_circle_family",
    "poschl_teller_family",
]


# ---------------------------------------------------------------------------
# scalar profile


@dataclass(frozen=True)
class ScalarProfile:
    """Scalar coefficient a(t) <= 0 with a(0) = 0, plateau -a_minus, and
    a(t) <= -a_plus for |t| >= t0.

    Shape: a(t) = -a_minus * tanh(rate * t)^2 with the rate chosen so the
    level -a_plus is reached exactly at |t| = t0.
    """

    a_plus: float = 1.0
    a_minus: float = 2.0
    t0: float = 1.0
    tag: str = "tanh_sq"

    def __post_init__(self):
        if self.tag != "tanh_sq":
            raise ConfigError(
                f"unknown profile tag {self.tag!r}", field="family.profile.tag"
            )
        if not (0.0 < self.a_plus < self.a_minus):
            raise ConfigError(
                "profile requires 0 < a_plus < a_minus "
                f"(got a_plus={self.a_plus}, a_minus={self.a_minus})",
                field="family.profile",
            )
        if self.t0 <= 0.0:
            raise ConfigError("profile requires t0 > 0", field="family.profile.t0")

    @property
    def rate(self):
        return math.atanh(math.sqrt(self.a_plus / self.a_minus)) / self.t0

    def value(self, t):
        u = math.tanh(self.rate * t)
        return -self.a_minus * u * u


# ---------------------------------------------------------------------------
# matrix pair constructions and angle maps


def _c_matrix(theta):
    ct, st = math.cos(theta), math.sin(theta)
    return np.array([[ct, st], [st, -ct]])


def _b_matrix_rotating(theta):
    ct, st = math.cos(theta), math.sin(theta)
    return np.array([[ct, -st], [-st, -ct]])


def _pair_rotating(theta):
    return _b_matrix_rotating(theta), _c_matrix(theta)


def _pair_mobius(theta):
    return np.array([[-1.0, 0.0], [0.0, 1.0]]), _c_matrix(theta)


_MATRIX_TAGS = {"rotating_pair": _pair_rotating, "mobius_pair": _pair_mobius}


@dataclass(frozen=True)
class AngleMap:
    """Named closed-form map from the parameter to the angle theta.

    linear        theta = scale * lambda                  (scalar lambda)
    radial        theta = scale * (1 - x^2 - y^2)         (lambda = (x, y))
    product_quad  theta = (x_scale*(x+1)/2) * (1 + y_curvature*y^2)
    """

    tag: str = "linear"
    scale: float = 1.0
    x_scale: float = math.pi
    y_curvature: float = 0.25

    def __post_init__(self):
        if self.tag not in ("linear", "radial", "product_quad"):
            raise ConfigError(
                f"unknown angle_map tag {self.tag!r}", field="family.angle_map.tag"
            )

    def theta(self, lam):
        if self.tag == "linear":
            return self.scale * float(lam)
        p = np.asarray(lam, dtype=float).reshape(-1)
        if p.size != 2:
            raise ContractError(
                f"angle map {self.tag!r} expects a two-component parameter, got {lam!r}"
            )
        x, y = float(p[0]), float(p[1])
        if self.tag == "radial":
            return self.scale * (1.0 - x * x - y * y)
        return (self.x_scale * (x + 1.0) / 2.0) * (1.0 + self.y_curvature * y * y)


# ---------------------------------------------------------------------------
# families


def _validate_symmetric_invertible(m, what):
    dec = linalg.sym_eig(m)
    scale = max(1.0, float(np.max(np.abs(dec.eigenvalues))))
    mu = float(np.min(np.abs(dec.eigenvalues)))
    if mu <= 1e-10 * scale:
        raise HyperbolicityError(
            f"{what} is numerically singular (|eigenvalue| = {mu:.3e})", witness=mu
        )
    return dec


@dataclass(frozen=True)
class PiecewiseScalarFamily:
    """A(t) = a(t) B(theta) on t <= 0 and a(t) C(theta) on t >= 0."""

    profile: ScalarProfile = field(default_factory=ScalarProfile)
    matrices: str = "rotating_pair"
    angle_map: AngleMap = field(default_factory=AngleMap)

    kind = "piecewise_scalar"
    dim = 2

    def __post_init__(self):
        if self.matrices not in _MATRIX_TAGS:
            raise ConfigError(
                f"unknown matrices tag {self.matrices!r}", field="family.matrices"
            )

    def check_domain(self, lam):
        return None

    def matrix_pair(self, lam):
        theta = self.angle_map.theta(lam)
        return _MATRIX_TAGS[self.matrices](theta)

    def matrix(self, lam, t):
        b, c = self.matrix_pair(lam)
        return self.profile.value(t) * (b if t < 0.0 else c)

    def limits(self, lam):
        b, c = self.matrix_pair(lam)
        return -self.profile.a_minus * b, -self.profile.a_minus * c

    def splitting(self, lam):
        """Seed frames: the unstable seed spans the negative eigenspace of
        B, the stable seed the positive eigenspace of C (the scalar factor
        a < 0 reverses decay directions)."""
        b, c = self.matrix_pair(lam)
        db = _validate_symmetric_invertible(b, "B(lambda)")
        dc = _validate_symmetric_invertible(c, "C(lambda)")
        if db.stable_count != dc.stable_count:
            raise ContractError(
                "B and C must have matching signature, got "
                f"{db.stable_count} and {dc.stable_count} negative eigenvalues"
            )
        unstable = db.vectors[:, : db.stable_count]
        stable = dc.vectors[:, dc.stable_count :]
        return SplittingSeeds(unstable_seed=unstable, stable_seed=stable)

    def stepper_descriptor(self, lam):
        b, c = self.matrix_pair(lam)
        params = np.array([self.profile.a_minus, self.profile.rate])
        return (1, params, np.ascontiguousarray(b), np.ascontiguousarray(c),
                0.0, 0.0, None, None)

    def closed_form_frames(self, lam):
        theta = self.angle_map.theta(lam)
        h = 0.5 * theta
        s_ref = np.array([[math.cos(h)], [math.sin(h)]])
        if self.matrices == "rotating_pair":
            u_ref = np.array([[math.sin(h)], [math.cos(h)]])
        else:
            u_ref = np.array([[1.0], [0.0]])
        return u_ref, s_ref


@dataclass(frozen=True)
class SecondOrderFamily:
    """Companion system of u'' + p(lam, t) u' + q(lam, t) u = 0.

    The built-in coefficient set is q = 2 sech^2 t - lam^2, p = 0, with
    hyperbolic limits for lam > 0 (the declared domain).
    """

    coefficients: str = "poschl_teller"

    kind = "second_order"
    dim = 2

    def __post_init__(self):
        if self.coefficients != "poschl_teller":
            raise ConfigError(
                f"unknown coefficients tag {self.coefficients!r}",
                field="family.coefficients",
            )

    def check_domain(self, lam):
        if float(lam) <= 0.0:
            raise ContractError(
                f"second_order family is declared for lambda > 0, got {lam}"
            )

    def q(self, lam, t):
        ch = math.cosh(t)
        return 2.0 / (ch * ch) - float(lam) ** 2

    def p(self, lam, t):
        return 0.0

    def matrix(self, lam, t):
        self.check_domain(lam)
        return np.array([[0.0, 1.0], [-self.q(lam, t), -self.p(lam, t)]])

    def limits(self, lam):
        self.check_domain(lam)
        a_inf = np.array([[0.0, 1.0], [float(lam) ** 2, 0.0]])
        return a_inf, a_inf.copy()

    def splitting(self, lam):
        return _generic_splitting(self, lam)

    def stepper_descriptor(self, lam):
        self.check_domain(lam)
        return (2, np.array([float(lam)]), None, None, 0.0, 0.0, None, None)

    def closed_form_frames(self, lam):
        lam = float(lam)
        u_ref = np.array([[lam], [lam * lam - 1.0]])
        s_ref = np.array([[lam], [1.0 - lam * lam]])
        return u_ref, s_ref


@dataclass(frozen=True, eq=False)
class TabulatedFamily:
    """Programmatic family: A(lam, t) and its limits as callables."""

    dim: int
    matrix_fn: Callable
    limit_fn: Callable

    kind = "asymptotically_hyperbolic_tabulated"

    def check_domain(self, lam):
        return None

    def matrix(self, lam, t):
        return np.asarray(self.matrix_fn(lam, t), dtype=float)

    def limits(self, lam):
        lo, hi = self.limit_fn(lam)
        return np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)

    def splitting(self, lam):
        return _generic_splitting(self, lam)

    def stepper_descriptor(self, lam):
        fn = self.matrix_fn

        def callback(t, _lam=lam, _fn=fn):
            return _fn(_lam, t)

        return (0, np.zeros(1), None, None, 0.0, 0.0, None, callback)

    closed_form_frames = None


@dataclass(frozen=True, eq=False)
class Bump:
    """Compactly supported perturbation amplitude * cos^2(pi t / 2 support)
    * matrix on |t| < support."""

    amplitude: float
    support: float
    matrix: np.ndarray

    def __post_init__(self):
        if self.support <= 0.0:
            raise ConfigError(
                "perturbation support must be positive",
                field="family.perturbation.support",
            )

    def value(self, t):
        if abs(t) >= self.support:
            return 0.0
        w = math.cos(math.pi * t / (2.0 * self.support))
        return self.amplitude * w * w

    def sup_norm(self):
        return abs(self.amplitude) * float(np.linalg.norm(self.matrix, 2))


@dataclass(frozen=True, eq=False)
class PerturbedFamily:
    """Base family plus a compactly supported bump.

    Outside the bump support the coefficients agree with the base family,
    so asymptotic data (limits, seed frames) are inherited unchanged.
    """

    base: object
    bump: Bump

    kind = "perturbed"

    @property
    def dim(self):
        return self.base.dim

    def __post_init__(self):
        g = np.asarray(self.bump.matrix, dtype=float)
        if g.shape != (self.base.dim, self.base.dim):
            raise ContractError(
                f"perturbation matrix shape {g.shape} does not match the "
                f"base dimension {self.base.dim}"
            )

    def check_domain(self, lam):
        return self.base.check_domain(lam)

    def matrix(self, lam, t):
        a = self.base.matrix(lam, t)
        q = self.bump.value(t)
        if q != 0.0:
            a = a + q * self.bump.matrix
        return a

    def limits(self, lam):
        return self.base.limits(lam)

    def splitting(self, lam):
        return self.base.splitting(lam)

    def stepper_descriptor(self, lam):
        code, params, mneg, mpos, bamp, bsup, bmat, cb = self.base.stepper_descriptor(lam)
        if code == 0:
            bump = self.bump

            def callback(t, _cb=cb, _bump=bump):
                a = np.asarray(_cb(t), dtype=float)
                q = _bump.value(t)
                if q != 0.0:
                    a = a + q * _bump.matrix
                return a

            return (0, params, None, None, 0.0, 0.0, None, callback)
        if bamp != 0.0:
            raise ContractError("stacked perturbations are not supported")
        g = np.ascontiguousarray(self.bump.matrix, dtype=float)
        return (code, params, mneg, mpos, float(self.bump.amplitude),
                float(self.bump.support), g, cb)

    closed_form_frames = None


def make_perturbation(base, amplitude, support, seed=None, matrix=None):
    """Attach a bump to a family.

    Either pass the direction ``matrix`` explicitly, or a ``seed`` from
    which a dense direction of unit spectral norm is drawn.
    """
    if (seed is None) == (matrix is None):
        raise ContractError("make_perturbation needs exactly one of seed or matrix")
    if matrix is None:
        rng = np.random.default_rng(seed)
        g = rng.standard_normal((base.dim, base.dim))
        g /= np.linalg.norm(g, 2)
    else:
        g = np.asarray(matrix, dtype=float)
    return PerturbedFamily(base=base, bump=Bump(float(amplitude), float(support), g))


# ---------------------------------------------------------------------------
# splitting seeds


@dataclass(frozen=True, eq=False)
class SplittingSeeds:
    """Orthonormal seed frames: unstable_seed spans the subspace whose
    backward decay seeds E^u at t = -T, stable_seed the forward-decaying
    seed for E^s at t = +T."""

    unstable_seed: np.ndarray
    stable_seed: np.ndarray


def _generic_splitting(fam, lam, gap_tol=1e-8):
    a_minus, a_plus = fam.limits(lam)
    for name, a in (("limit at -infinity", a_minus), ("limit at +infinity", a_plus)):
        re_parts = np.real(np.linalg.eigvals(a))
        gap = float(np.min(np.abs(re_parts)))
        if gap <= gap_tol:
            raise HyperbolicityError(
                f"{name} is not hyperbolic: eigenvalue real part {gap:.3e}",
                witness=gap,
            )
    s_minus = linalg.matrix_sign(a_minus)
    s_plus = linalg.matrix_sign(a_plus)
    d = fam.dim
    eye = np.eye(d)
    unstable = linalg.range_frame(0.5 * (eye + s_minus))
    stable = linalg.range_frame(0.5 * (eye - s_plus))
    if unstable.shape[1] + stable.shape[1] != d:
        raise HyperbolicityError(
            "asymptotic subspace dimensions do not sum to the system "
            f"dimension ({unstable.shape[1]} + {stable.shape[1]} != {d})",
            witness=None,
        )
    return SplittingSeeds(unstable_seed=unstable, stable_seed=stable)


def eval_coefficient(fam, lam, t):
    """Coefficient matrix A_lambda(t) with the family's domain check."""
    fam.check_domain(lam)
    return fam.matrix(lam, t)


def asymptotic_splitting_data(fam, lam):
    """Orthonormal seed frames (unstable at -T side, stable at +T side)."""
    fam.check_domain(lam)
    return fam.splitting(lam)


# ---------------------------------------------------------------------------
# parameter spaces


@dataclass(frozen=True, eq=False)
class ParameterSpace:
    """Finite sampling of the parameter space with adjacency.

    nodes: (N,) scalars or (N, 2) points; edges: undirected index pairs;
    lambda0: indices of the distinguished trivial-solution nodes;
    closing_edge: the identification edge of a circle; boundary: indices
    of boundary nodes of a 2-d grid in angular order; grid_index: inverse
    lookup array for 2-d grids (-1 off the mask).
    """

    topology: str
    nodes: np.ndarray
    edges: tuple
    lambda0: tuple
    lambda0_requested: tuple
    closing_edge: Optional[tuple] = None
    boundary: Optional[tuple] = None
    grid_index: Optional[np.ndarray] = None
    resolution: Optional[int] = None
    mask: Optional[str] = None
    range_: Optional[tuple] = None

    @property
    def size(self):
        return len(self.nodes)

    def node_values(self, indices):
        return [np.asarray(self.nodes[i]).tolist() for i in indices]


def _snap(nodes, values, what):
    idx = []
    arr = np.asarray(nodes, dtype=float)
    for v in values:
        p = np.atleast_1d(np.asarray(v, dtype=float))
        if arr.ndim == 1:
            if p.size != 1:
                raise ConfigError(
                    f"{what} entries must be scalars for this topology",
                    field=what,
                )
            dist = np.abs(arr - p[0])
        else:
            if p.size != arr.shape[1]:
                raise ConfigError(
                    f"{what} entries must have {arr.shape[1]} components",
                    field=what,
                )
            dist = np.linalg.norm(arr - p[None, :], axis=1)
        idx.append(int(np.argmin(dist)))
    # duplicates collapse to one node
    return tuple(dict.fromkeys(idx))


def interval_space(lo, hi, n, lambda0=()):
    """n nodes equally spaced on [lo, hi] with nearest-node lambda0."""
    if not (hi > lo):
        raise ConfigError("interval range must satisfy hi > lo", field="space.range")
    if n < 2:
        raise ConfigError("interval needs at least 2 nodes", field="space.n")
    nodes = np.linspace(float(lo), float(hi), int(n))
    edges = tuple((i, i + 1) for i in range(int(n) - 1))
    return ParameterSpace(
        topology="interval",
        nodes=nodes,
        edges=edges,
        lambda0=_snap(nodes, lambda0, "space.lambda0"),
        lambda0_requested=tuple(float(v) for v in lambda0),
        range_=(float(lo), float(hi)),
    )


def circle_space(n, lambda0=()):
    """n nodes at angles 2 pi i / n; the edge (n-1, 0) closes the circle."""
    if n < 3:
        raise ConfigError("circle needs at least 3 nodes", field="space.n")
    n = int(n)
    nodes = 2.0 * math.pi * np.arange(n) / n
    edges = tuple((i, i + 1) for i in range(n - 1)) + ((n - 1, 0),)
    return ParameterSpace(
        topology="circle",
        nodes=nodes,
        edges=edges,
        lambda0=_snap(nodes, lambda0, "space.lambda0"),
        lambda0_requested=tuple(float(v) for v in lambda0),
        closing_edge=(n - 1, 0),
    )


def grid_space(resolution, lambda0=(), mask="disc"):
    """resolution x resolution grid over [-1, 1]^2, optionally masked to
    the closed unit disc; 4-adjacency; boundary nodes in angular order."""
    if resolution < 3:
        raise ConfigError("grid needs resolution >= 3", field="space.resolution")
    if mask not in ("disc", "square"):
        raise ConfigError(f"unknown mask {mask!r}", field="space.mask")
    res = int(resolution)
    axis = np.linspace(-1.0, 1.0, res)
    grid_index = -np.ones((res, res), dtype=int)
    pts = []
    for iy in range(res):
        for ix in range(res):
            x, y = axis[ix], axis[iy]
            if mask == "disc" and x * x + y * y > 1.0 + 1e-12:
                continue
            grid_index[iy, ix] = len(pts)
            pts.append((x, y))
    nodes = np.array(pts)
    edges = []
    for iy in range(res):
        for ix in range(res):
            i = grid_index[iy, ix]
            if i < 0:
                continue
            if ix + 1 < res and grid_index[iy, ix + 1] >= 0:
                edges.append((int(i), int(grid_index[iy, ix + 1])))
            if iy + 1 < res and grid_index[iy + 1, ix] >= 0:
                edges.append((int(i), int(grid_index[iy + 1, ix])))
    neighbor_count = np.zeros(len(pts), dtype=int)
    for i, j in edges:
        neighbor_count[i] += 1
        neighbor_count[j] += 1
    boundary_idx = [i for i in range(len(pts)) if neighbor_count[i] < 4]
    angles = [math.atan2(nodes[i, 1], nodes[i, 0]) for i in boundary_idx]
    boundary = tuple(boundary_idx[j] for j in np.argsort(angles, kind="stable"))
    return ParameterSpace(
        topology="grid2d",
        nodes=nodes,
        edges=tuple(edges),
        lambda0=_snap(nodes, lambda0, "space.lambda0"),
        lambda0_requested=tuple(tuple(float(c) for c in np.atleast_1d(v)) for v in lambda0),
        boundary=boundary,
        grid_index=grid_index,
        resolution=res,
        mask=mask,
    )


# ---------------------------------------------------------------------------
# numerics and problem spec


@dataclass(frozen=True)
class Numerics:
    truncation_time: float = 12.0
    ode_tol: float = 1e-10
    reortho_interval: float = 1.0
    zero_tol: float = 1e-8

    def __post_init__(self):
        for name in ("truncation_time", "ode_tol", "reortho_interval", "zero_tol"):
            if getattr(self, name) <= 0.0:
                raise ConfigError(f"numerics: {name} must be positive", field=name)


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    family: object
    space: ParameterSpace
    numerics: Numerics

    def __post_init__(self):
        _validate_spec(self.family, self.space, self.numerics)


def _family_time_floor(fam):
    # smallest admissible truncation time for the family
    if fam.kind == "piecewise_scalar":
        return fam.profile.t0, "the profile switching time t0"
    if fam.kind == "perturbed":
        base_floor, base_why = _family_time_floor(fam.base)
        if fam.bump.support >= base_floor:
            return fam.bump.support, "the perturbation support"
        return base_floor, base_why
    return 0.0, None


def _validate_spec(family, space, numerics):
    floor, why = _family_time_floor(family)
    if numerics.truncation_time <= floor:
        raise ConfigError(
            f"truncation_time T = {numerics.truncation_time} must exceed "
            f"{why} = {floor}",
            field="numerics.T",
        )
    if family.kind == "second_order" and space.topology == "grid2d":
        raise ConfigError(
            "second_order families are one-parameter; grid2d spaces need a "
            "two-parameter angle map",
            field="space.topology",
        )


# ---------------------------------------------------------------------------
# configuration text


def _expect_table(obj, path):
    if not isinstance(obj, dict):
        raise ConfigError(f"{path} must be a table", field=path)
    return obj


def _check_keys(obj, allowed, path):
    for key in obj:
        if key not in allowed:
            raise ConfigError(f"unknown key {path}.{key}", field=f"{path}.{key}")


def _get(obj, key, path, required=True, default=None):
    if key not in obj:
        if required:
            raise ConfigError(f"missing key {path}.{key}", field=f"{path}.{key}")
        return default
    return obj[key]


def _number(obj, key, path, required=True, default=None):
    if key not in obj:
        if required:
            raise ConfigError(f"missing key {path}.{key}", field=f"{path}.{key}")
        return default
    val = obj[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{path}.{key} must be a number", field=f"{path}.{key}")
    return float(val)


def _family_from_table(tbl, path="family"):
    _expect_table(tbl, path)
    kind = _get(tbl, "kind", path)
    if kind == "piecewise_scalar":
        _check_keys(tbl, {"kind", "profile", "matrices", "angle_map"}, path)
        ptbl = _expect_table(_get(tbl, "profile", path, required=False, default={}),
                             f"{path}.profile")
        _check_keys(ptbl, {"tag", "a_plus", "a_minus", "t0"}, f"{path}.profile")
        profile = ScalarProfile(
            a_plus=_number(ptbl, "a_plus", f"{path}.profile", False, 1.0),
            a_minus=_number(ptbl, "a_minus", f"{path}.profile", False, 2.0),
            t0=_number(ptbl, "t0", f"{path}.profile", False, 1.0),
            tag=_get(ptbl, "tag", f"{path}.profile", False, "tanh_sq"),
        )
        atbl = _expect_table(_get(tbl, "angle_map", path, required=False, default={}),
                             f"{path}.angle_map")
        _check_keys(atbl, {"tag", "scale", "x_scale", "y_curvature"}, f"{path}.angle_map")
        amap = AngleMap(
            tag=_get(atbl, "tag", f"{path}.angle_map", False, "linear"),
            scale=_number(atbl, "scale", f"{path}.angle_map", False, 1.0),
            x_scale=_number(atbl, "x_scale", f"{path}.angle_map", False, math.pi),
            y_curvature=_number(atbl, "y_curvature", f"{path}.angle_map", False, 0.25),
        )
        return PiecewiseScalarFamily(
            profile=profile,
            matrices=_get(tbl, "matrices", path, False, "rotating_pair"),
            angle_map=amap,
        )
    if kind == "second_order":
        _check_keys(tbl, {"kind", "coefficients"}, path)
        ctbl = _expect_table(
            _get(tbl, "coefficients", path, required=False, default={}),
            f"{path}.coefficients",
        )
        _check_keys(ctbl, {"tag"}, f"{path}.coefficients")
        return SecondOrderFamily(
            coefficients=_get(ctbl, "tag", f"{path}.coefficients", False, "poschl_teller")
        )
    if kind == "perturbed":
        _check_keys(tbl, {"kind", "base", "perturbation"}, path)
        base = _family_from_table(_get(tbl, "base", path), f"{path}.base")
        qtbl = _expect_table(_get(tbl, "perturbation", path), f"{path}.perturbation")
        _check_keys(qtbl, {"amplitude", "support", "matrix", "seed"},
                    f"{path}.perturbation")
        amplitude = _number(qtbl, "amplitude", f"{path}.perturbation")
        support = _number(qtbl, "support", f"{path}.perturbation")
        matrix = _get(qtbl, "matrix", f"{path}.perturbation", required=False)
        seed = _get(qtbl, "seed", f"{path}.perturbation", required=False)
        try:
            return make_perturbation(base, amplitude, support, seed=seed,
                                     matrix=matrix)
        except ContractError as exc:
            raise ConfigError(str(exc), field=f"{path}.perturbation") from exc
    if kind == "asymptotically_hyperbolic_tabulated":
        raise ConfigError(
            "tabulated families are programmatic only; construct "
            "TabulatedFamily directly",
            field=f"{path}.kind",
        )
    raise ConfigError(f"unknown family kind {kind!r}", field=f"{path}.kind")


def _space_from_table(tbl, path="space"):
    _expect_table(tbl, path)
    topology = _get(tbl, "topology", path)
    lambda0 = _get(tbl, "lambda0", path, required=False, default=[])
    if not isinstance(lambda0, list):
        raise ConfigError(f"{path}.lambda0 must be a list", field=f"{path}.lambda0")
    if topology == "interval":
        _check_keys(tbl, {"topology", "range", "n", "lambda0"}, path)
        rng = _get(tbl, "range", path)
        if not (isinstance(rng, list) and len(rng) == 2):
            raise ConfigError(f"{path}.range must be [lo, hi]", field=f"{path}.range")
        return interval_space(float(rng[0]), float(rng[1]),
                              int(_number(tbl, "n", path)), lambda0)
    if topology == "circle":
        _check_keys(tbl, {"topology", "n", "lambda0"}, path)
        return circle_space(int(_number(tbl, "n", path)), lambda0)
    if topology == "grid2d":
        _check_keys(tbl, {"topology", "resolution", "mask", "lambda0"}, path)
        return grid_space(int(_number(tbl, "resolution", path)),
                          lambda0, _get(tbl, "mask", path, False, "disc"))
    raise ConfigError(f"unknown topology {topology!r}", field=f"{path}.topology")


def load_config(text):
    """Parse a JSON problem description into a ProblemSpec."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    _expect_table(raw, "config")
    _check_keys(raw, {"family", "space", "numerics"}, "config")
    family = _family_from_table(_get(raw, "family", "config"))
    space = _space_from_table(_get(raw, "space", "config"))
    ntbl = _expect_table(_get(raw, "numerics", "config"), "numerics")
    _check_keys(ntbl, {"T", "ode_tol", "reortho_interval", "zero_tol"}, "numerics")
    numerics = Numerics(
        truncation_time=_number(ntbl, "T", "numerics"),
        ode_tol=_number(ntbl, "ode_tol", "numerics"),
        reortho_interval=_number(ntbl, "reortho_interval", "numerics"),
        zero_tol=_number(ntbl, "zero_tol", "numerics"),
    )
    return ProblemSpec(family=family, space=space, numerics=numerics)


def _family_to_table(fam):
    if fam.kind == "piecewise_scalar":
        return {
            "kind": fam.kind,
            "profile": {
                "tag": fam.profile.tag,
                "a_plus": fam.profile.a_plus,
                "a_minus": fam.profile.a_minus,
                "t0": fam.profile.t0,
            },
            "matrices": fam.matrices,
            "angle_map": _angle_map_to_table(fam.angle_map),
        }
    if fam.kind == "second_order":
        return {"kind": fam.kind, "coefficients": {"tag": fam.coefficients}}
    if fam.kind == "perturbed":
        return {
            "kind": fam.kind,
            "base": _family_to_table(fam.base),
            "perturbation": {
                "amplitude": fam.bump.amplitude,
                "support": fam.bump.support,
                "matrix": np.asarray(fam.bump.matrix).tolist(),
            },
        }
    raise ConfigError(f"family kind {fam.kind!r} is not serializable")


def _angle_map_to_table(amap):
    out = {"tag": amap.tag}
    if amap.tag == "linear":
        out["scale"] = amap.scale
    elif amap.tag == "radial":
        out["scale"] = amap.scale
    else:
        out["x_scale"] = amap.x_scale
        out["y_curvature"] = amap.y_curvature
    return out


def _space_to_table(space):
    lam0 = space.node_values(space.lambda0)
    if space.topology == "interval":
        return {
            "topology": "interval",
            "range": [space.range_[0], space.range_[1]],
            "n": space.size,
            "lambda0": lam0,
        }
    if space.topology == "circle":
        return {"topology": "circle", "n": space.size, "lambda0": lam0}
    return {
        "topology": "grid2d",
        "resolution": space.resolution,
        "mask": space.mask,
        "lambda0": lam0,
    }


def dump_config(spec):
    """Canonical JSON text for a ProblemSpec; load(dump(s)) is idempotent."""
    table = {
        "family": _family_to_table(spec.family),
        "space": _space_to_table(spec.space),
        "numerics": {
            "T": spec.numerics.truncation_time,
            "ode_tol": spec.numerics.ode_tol,
            "reortho_interval": spec.numerics.reortho_interval,
            "zero_tol": spec.numerics.zero_tol,
        },
    }
    return json.dumps(table, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# built-ins


def rotating_pair_family(profile=None):
    """Rotating symmetric pair over theta in [0, pi] (both eigendirections
    turn with theta/2)."""
    return PiecewiseScalarFamily(
        profile=profile or ScalarProfile(), matrices="rotating_pair",
        angle_map=AngleMap(tag="linear"),
    )


def mobius_circle_family(profile=None):
    """Fixed B = diag(-1, 1) with a rotating C over the circle; the stable
    bundle closes up to a Mobius band."""
    return PiecewiseScalarFamily(
        profile=profile or ScalarProfile(), matrices="mobius_pair",
        angle_map=AngleMap(tag="linear"),
    )


def poschl_teller_family():
    return SecondOrderFamily()


def builtin_names():
    from importlib.resources import files

    pkg = files("evanskit") / "configs"
    return sorted(p.name[: -len(".cfg")] for p in pkg.iterdir() if p.name.endswith(".cfg"))


def builtin_config(name):
    """Text of a packaged configuration (name with or without .cfg)."""
    from importlib.resources import files

    fname = name if name.endswith(".cfg") else name + ".cfg"
    path = files("evanskit") / "configs" / fname
    try:
        return path.read_text()
    except (FileNotFoundError, OSError) as exc:
        raise ConfigError(
            f"unknown built-in config {name!r}; available: {', '.join(builtin_names())}"
        ) from exc


def load_builtin(name):
    return load_config(builtin_config(name))
