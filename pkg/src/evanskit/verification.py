"""Built-in verification battery.

Each check recomputes one headline result from scratch, measures the
relevant error against its stated tolerance and reports pass/fail with
the measured numbers.  Runtime budgets are enforced only when the
compiled stepper is active; the pure Python fallback is correct but
makes no speed promises.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from . import bifurcation, dichotomy, index, model, subspaces
from ._stepper import USING_COMPILED
from .linalg import max_principal_angle
from .propagation import transition

__all__ = ["CheckResult", "CHECKS", "BUDGETS", "run_checks", "check_names"]

# wall-clock budgets in seconds, enforced with the compiled stepper only
BUDGETS = {
    "interval-index": 10.0,
    "poschl-teller": 10.0,
    "circle-holonomy": 15.0,
    "grid-disconnection": 30.0,
}


@dataclass
class CheckResult:
    name: str
    passed: bool
    runtime: float
    budget: float | None
    details: dict
    failures: list = dataclass_field(default_factory=list)

    def summary(self):
        status = "PASS" if self.passed else "FAIL"
        parts = [f"{k}={_fmt(v)}" for k, v in self.details.items()]
        line = f"{status} {self.name} ({self.runtime:.2f} s): " + ", ".join(parts)
        if self.failures:
            line += " | " + "; ".join(self.failures)
        return line


def _fmt(v):
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return f"{v:.3e}"
    return str(v)


def _run_builtin(name):
    spec = model.load_builtin(name)
    fld = subspaces.frame_field(
        spec.family, spec.space,
        T=spec.numerics.truncation_time,
        tol=spec.numerics.ode_tol,
        reortho_interval=spec.numerics.reortho_interval,
    )
    report = index.build_report(spec.family, fld, zero_tol=spec.numerics.zero_tol)
    return spec, fld, report


def check_interval_index(seed=0):
    """Rotating-pair determinant curve, its normalization and parity."""
    spec, fld, report = _run_builtin("rotating-pair")
    theta = np.asarray(spec.space.nodes, dtype=float)
    want = -np.cos(theta)
    away = np.abs(theta - math.pi / 2) >= 0.01
    mismatches = int(np.sum(report.signs[away] != np.sign(want[away])))
    norm_err = float(np.max(np.abs(report.ld_reference - want)))
    i0, i1 = spec.space.lambda0
    psi = report.psi[(i0, i1)]
    details = {
        "nodes": spec.space.size,
        "sign_mismatches": mismatches,
        "max_norm_error": norm_err,
        "psi": psi,
        "iota": report.iota,
    }
    failures = []
    if mismatches:
        failures.append(f"{mismatches} sign mismatches away from the zero")
    if norm_err > 1e-6:
        failures.append(f"normalized curve error {norm_err:.3e} > 1e-6")
    if psi != 1:
        failures.append(f"parity {psi} != 1")
    if report.iota != psi:
        failures.append(f"interval index {report.iota} != parity {psi}")
    return details, failures


def check_second_order_zero(seed=0):
    """Poschl-Teller curve, parity and the located zero crossing."""
    spec, fld, report = _run_builtin("poschl-teller")
    lam = np.asarray(spec.space.nodes, dtype=float)
    want = 2.0 * lam * (1.0 - lam * lam)
    away = np.abs(lam - 1.0) >= 0.01
    rel = float(np.max(np.abs(report.ld_reference[away] - want[away])
                       / np.abs(want[away])))
    i0, i1 = spec.space.lambda0
    psi = report.psi[(i0, i1)]
    finding = bifurcation.locate_zeros_on_path(
        spec.family, spec.space,
        T=spec.numerics.truncation_time,
        zero_tol=spec.numerics.zero_tol,
        tol=spec.numerics.ode_tol,
        reortho_interval=spec.numerics.reortho_interval,
        field=fld,
    )
    details = {
        "nodes": spec.space.size,
        "max_rel_error": rel,
        "psi": psi,
        "iota": report.iota,
        "n_zeros": len(finding.zeros),
    }
    failures = []
    if rel > 1e-5:
        failures.append(f"relative curve error {rel:.3e} > 1e-5")
    if psi != 1:
        failures.append(f"parity {psi} != 1")
    if report.iota != psi:
        failures.append(f"interval index {report.iota} != parity {psi}")
    if len(finding.zeros) != 1:
        failures.append(f"expected one crossing, found {len(finding.zeros)}")
    else:
        z = finding.zeros[0]
        details["zero_position"] = z.position
        details["zero_error"] = abs(z.position - 1.0)
        details["zero_residual"] = z.residual
        if abs(z.position - 1.0) > 1e-6:
            failures.append(
                f"crossing at {z.position!r}, off by {abs(z.position - 1.0):.3e}"
            )
    return details, failures


def _circle_verdicts(fam, space, numerics):
    fld = subspaces.frame_field(
        fam, space, T=numerics.truncation_time, tol=numerics.ode_tol,
        reortho_interval=numerics.reortho_interval,
    )
    report = index.build_report(fam, fld, zero_tol=numerics.zero_tol)
    return (
        report.holonomy["stable"]["sign"],
        report.holonomy["stable"]["w1"],
        report.holonomy["unstable"]["w1"],
        report.pejsachowicz.value,
    )


def check_circle_holonomy(seed=0):
    """Mobius detection over the circle, stable at doubled resolution."""
    spec = model.load_builtin("mobius-circle")
    coarse = _circle_verdicts(spec.family, spec.space, spec.numerics)
    fine_space = model.circle_space(2 * spec.space.size,
                                    spec.space.lambda0_requested)
    fine = _circle_verdicts(spec.family, fine_space, spec.numerics)
    details = {
        "nodes": spec.space.size,
        "stable_sign": coarse[0],
        "stable_w1": coarse[1],
        "unstable_w1": coarse[2],
        "bundle_class": coarse[3],
        "refined_matches": coarse == fine,
    }
    failures = []
    if coarse[0] != -1:
        failures.append(f"stable holonomy sign {coarse[0]} != -1")
    if coarse[1] != 1:
        failures.append(f"stable w1 {coarse[1]} != 1")
    if coarse[2] != 0:
        failures.append(f"unstable w1 {coarse[2]} != 0")
    if coarse[3] != 1:
        failures.append(f"asymptotic bundle class {coarse[3]} != 1")
    if coarse != fine:
        failures.append(f"verdicts changed at {fine_space.size} nodes: {fine}")
    return details, failures


def check_degeneracy_margin(seed=0):
    """Kernel at the located crossing, transversality well away from it."""
    spec, fld, _report = _run_builtin("rotating-pair")
    finding = bifurcation.locate_zeros_on_path(
        spec.family, spec.space,
        T=spec.numerics.truncation_time,
        zero_tol=spec.numerics.zero_tol,
        tol=spec.numerics.ode_tol,
        reortho_interval=spec.numerics.reortho_interval,
        field=fld,
    )
    failures = []
    details = {"n_zeros": len(finding.zeros)}
    if len(finding.zeros) != 1:
        failures.append(f"expected one crossing, found {len(finding.zeros)}")
        return details, failures
    z = finding.zeros[0]
    details["zero_position"] = z.position
    details["zero_error"] = abs(z.position - math.pi / 2)
    details["margin_at_zero"] = z.margin
    if abs(z.position - math.pi / 2) > 1e-6:
        failures.append(f"crossing off by {abs(z.position - math.pi / 2):.3e}")
    if z.margin > 1e-6:
        failures.append(f"margin {z.margin:.3e} at the crossing exceeds 1e-6")
    for name, theta in (("margin_quarter", math.pi / 4),
                        ("margin_three_quarter", 3 * math.pi / 4)):
        pair = subspaces.subspace_pair(
            spec.family, theta, T=spec.numerics.truncation_time,
            tol=spec.numerics.ode_tol,
            reortho_interval=spec.numerics.reortho_interval,
        )
        _ok, margin = subspaces.transversality(pair)
        details[name] = margin
        if margin < 0.1:
            failures.append(f"{name} {margin:.3e} < 0.1")
    return details, failures


def check_dichotomy_grid(seed=0):
    """Half-line decay inequalities for the closed-form constants."""
    fam = model.rotating_pair_family()
    theta = 1.0
    est_minus, est_plus = dichotomy.dichotomy_constants(fam, theta)
    limits = fam.limits(theta)
    details = {"K": est_plus.K, "alpha": est_plus.alpha}
    failures = []
    for half, est, limit in (("minus", est_minus, limits[0]),
                             ("plus", est_plus, limits[1])):
        split = dichotomy.matrix_sign_projector(limit)
        stable_p = np.eye(fam.dim) - split.projector
        span = (np.linspace(-12.0, 0.0, 20) if half == "minus"
                else np.linspace(0.0, 12.0, 20))
        rep = dichotomy.verify_dichotomy(
            fam, theta, half, stable_p, est.K, est.alpha, span, tol=1e-10,
        )
        details[f"max_violation_{half}"] = rep.max_violation
        details[f"invariance_{half}"] = rep.invariance_residual
        if rep.max_violation > 1e-9:
            failures.append(
                f"{half} half-line violation {rep.max_violation:.3e} > 1e-9"
            )
    return details, failures


def check_roughness(seed=0):
    """Small compactly supported perturbations keep all sign data."""
    fam = model.rotating_pair_family()
    est_minus, _est_plus = dichotomy.dichotomy_constants(fam, 0.0)
    bound = dichotomy.roughness_bound(est_minus.K, est_minus.alpha)
    amp = 0.9 * bound
    space = model.interval_space(0.0, math.pi, 41, lambda0=(0.0, math.pi))
    fld = subspaces.frame_field(fam, space, T=12.0, tol=1e-10)
    i0, i1 = space.lambda0
    base_pairs = (fld.pairs[i0], fld.pairs[i1])
    base_signs = tuple(
        int(np.sign(np.linalg.det(index.assemble_M(p)))) for p in base_pairs
    )
    base_psi = 0 if base_signs[0] == base_signs[1] else 1
    max_shift = 0.0
    min_margin = math.inf
    failures = []
    for trial in range(20):
        pert = model.make_perturbation(fam, amplitude=amp, support=4.0,
                                       seed=seed + trial)
        trial_signs = []
        for node, base in zip((0.0, math.pi), base_pairs):
            pp = subspaces.subspace_pair(pert, node, T=12.0, tol=1e-10)
            u = subspaces.procrustes_align(pp.unstable, base.unstable)
            s = subspaces.procrustes_align(pp.stable, base.stable)
            m = np.hstack([u, s])
            val = float(np.linalg.det(m))
            base_val = float(np.linalg.det(index.assemble_M(base)))
            max_shift = max(max_shift, abs(val - base_val))
            min_margin = min(min_margin,
                             float(np.linalg.svd(m, compute_uv=False)[-1]))
            trial_signs.append(int(np.sign(val)))
        psi = 0 if trial_signs[0] == trial_signs[1] else 1
        if tuple(trial_signs) != base_signs:
            failures.append(f"trial {trial}: signs {trial_signs} flipped")
        if psi != base_psi:
            failures.append(f"trial {trial}: parity {psi} != {base_psi}")
    details = {
        "trials": 20,
        "amplitude": amp,
        "threshold": bound,
        "max_det_shift": max_shift,
        "min_margin": min_margin,
        "psi": base_psi,
    }
    return details, failures


def _grid_finding(name):
    spec = model.load_builtin(name)
    finding = bifurcation.sign_map_2d(
        spec.family, spec.space,
        T=spec.numerics.truncation_time,
        zero_tol=spec.numerics.zero_tol,
        tol=spec.numerics.ode_tol,
        reortho_interval=spec.numerics.reortho_interval,
    )
    return spec, finding


def _refined_grid_finding(spec):
    lam0 = [tuple(v) for v in spec.space.lambda0_requested]
    space = model.grid_space(2 * (spec.space.resolution - 1) + 1, lam0,
                             mask=spec.space.mask)
    finding = bifurcation.sign_map_2d(
        spec.family, space,
        T=spec.numerics.truncation_time,
        zero_tol=spec.numerics.zero_tol,
        tol=spec.numerics.ode_tol,
        reortho_interval=spec.numerics.reortho_interval,
    )
    return space, finding


def _semicircle_split(space, trace):
    upper = lower = 0
    for i, j in trace:
        y_mid = 0.5 * (space.nodes[i][1] + space.nodes[j][1])
        if y_mid > 0:
            upper += 1
        elif y_mid < 0:
            lower += 1
    return upper, lower


def check_grid_disconnection(seed=0):
    """Sign-region splitting on the disc and its boundary trace."""
    budget_start = time.perf_counter()
    spec_r, radial = _grid_finding("disc-radial")
    spec_p, product = _grid_finding("disc-product")
    budgeted = time.perf_counter() - budget_start
    trace_p = bifurcation.boundary_trace(product, spec_p.space)
    up, down = _semicircle_split(spec_p.space, trace_p)
    failures = []
    n_radial = radial.n_positive_components + radial.n_negative_components
    if n_radial != 2 or not radial.disconnects:
        failures.append(
            f"radial map: {n_radial} sign components, "
            f"disconnects={radial.disconnects}"
        )
    if bifurcation.boundary_trace(radial, spec_r.space):
        failures.append("radial boundary trace is not empty")
    if len(trace_p) < 2 or up < 1 or down < 1:
        failures.append(
            f"product boundary trace: {len(trace_p)} changes "
            f"({up} upper, {down} lower)"
        )
    _space_r2, radial2 = _refined_grid_finding(spec_r)
    space_p2, product2 = _refined_grid_finding(spec_p)
    n_radial2 = radial2.n_positive_components + radial2.n_negative_components
    if n_radial2 != 2 or not radial2.disconnects:
        failures.append(f"radial verdict changed under refinement: {n_radial2}")
    trace_p2 = bifurcation.boundary_trace(product2, space_p2)
    up2, down2 = _semicircle_split(space_p2, trace_p2)
    if len(trace_p2) < 2 or up2 < 1 or down2 < 1:
        failures.append(
            f"product boundary verdict changed under refinement: "
            f"{len(trace_p2)} changes ({up2} upper, {down2} lower)"
        )
    details = {
        "radial_components": n_radial,
        "radial_disconnects": radial.disconnects,
        "product_boundary_changes": len(trace_p),
        "upper_changes": up,
        "lower_changes": down,
        "refined_stable": not failures,
        "_budget_runtime": budgeted,
    }
    return details, failures


def _random_hyperbolic(rng, dim):
    # random similarity of a definite-sign diagonal, eigenvalues bounded
    # away from the imaginary axis
    vals = rng.uniform(0.3, 2.0, dim) * rng.choice([-1.0, 1.0], dim)
    while np.all(vals > 0) or np.all(vals < 0):
        vals = rng.uniform(0.3, 2.0, dim) * rng.choice([-1.0, 1.0], dim)
    v = rng.standard_normal((dim, dim))
    while abs(np.linalg.det(v)) < 0.1:
        v = rng.standard_normal((dim, dim))
    return v @ np.diag(vals) @ np.linalg.inv(v), int(np.sum(vals > 0))


def check_properties(seed=0):
    """Cross-cutting invariants: cocycle identity, projector algebra,
    truncation-time stability, parity additivity and the index match."""
    rng = np.random.default_rng(seed)
    failures = []
    details = {}

    rotating = model.rotating_pair_family()
    teller = model.poschl_teller_family()
    worst_cocycle = 0.0
    for k in range(100):
        fam, lam = ((rotating, 1.234) if k % 2 == 0 else (teller, 0.8))
        # ordered triples: forward growth is additive, so the normalized
        # defect measures integrator drift instead of cancellation
        t0, t1, t2 = np.sort(rng.uniform(-5.0, 5.0, 3))
        direct = transition(fam, lam, t2, t0, tol=1e-11)
        chained = transition(fam, lam, t2, t1, tol=1e-11) @ transition(
            fam, lam, t1, t0, tol=1e-11)
        residual = float(
            np.linalg.norm(direct - chained, 2)
            / max(1.0, np.linalg.norm(direct, 2))
        )
        worst_cocycle = max(worst_cocycle, residual)
    details["max_cocycle_residual"] = worst_cocycle
    if worst_cocycle > 1e-8:
        failures.append(f"cocycle residual {worst_cocycle:.3e} > 1e-8")

    worst_idem = worst_comm = 0.0
    for _ in range(50):
        m, n_unstable = _random_hyperbolic(rng, 4)
        split = dichotomy.matrix_sign_projector(m)
        p = split.projector
        worst_idem = max(worst_idem, float(np.linalg.norm(p @ p - p, 2)))
        worst_comm = max(worst_comm, float(
            np.linalg.norm(p @ m - m @ p, 2) / np.linalg.norm(m, 2)))
        if split.unstable_frame.shape[1] != n_unstable:
            failures.append("projector rank disagrees with the spectrum")
    details["max_idempotence"] = worst_idem
    details["max_commutation"] = worst_comm
    if worst_idem > 1e-10:
        failures.append(f"projector idempotence {worst_idem:.3e} > 1e-10")
    if worst_comm > 1e-9:
        failures.append(f"projector commutation {worst_comm:.3e} > 1e-9")

    worst_tstab = 0.0
    for name in model.builtin_names():
        spec = model.load_builtin(name)
        T = spec.numerics.truncation_time
        for node_idx in spec.space.lambda0:
            lam_arr = spec.space.nodes[node_idx]
            lam = float(lam_arr) if np.ndim(lam_arr) == 0 else np.asarray(lam_arr)
            base = subspaces.subspace_pair(spec.family, lam, T=T, tol=1e-10)
            bumped = subspaces.subspace_pair(spec.family, lam, T=T + 2.0,
                                             tol=1e-10)
            angle = max(
                float(max_principal_angle(base.unstable, bumped.unstable)),
                float(max_principal_angle(base.stable, bumped.stable)),
            )
            worst_tstab = max(worst_tstab, angle)
    details["max_T_shift_angle"] = worst_tstab
    if worst_tstab > 1e-7:
        failures.append(f"truncation-time drift {worst_tstab:.3e} > 1e-7")

    psi_eq_iota = True
    additivity_ok = True
    for fam, space in (
        (rotating, model.interval_space(0.0, math.pi, 61,
                                        lambda0=(0.0, math.pi))),
        (teller, model.interval_space(0.5, 1.5, 41, lambda0=(0.5, 1.5))),
    ):
        fld = subspaces.frame_field(fam, space, T=12.0, tol=1e-10)
        report = index.build_report(fam, fld)
        i0, i1 = space.lambda0
        psi = report.psi[(i0, i1)]
        if report.iota != psi:
            psi_eq_iota = False
            failures.append(f"psi {psi} != iota {report.iota} on {fam.kind}")
        interior = [i for i in range(1, space.size - 1)
                    if report.margins[i] > report.zero_tol]
        for b in rng.choice(interior, size=20):
            b = int(b)
            total = index.parity_pair(report, i0, i1)
            left = index.parity_pair(report, i0, b)
            right = index.parity_pair(report, b, i1)
            if (left + right) % 2 != total:
                additivity_ok = False
                failures.append(f"parity not additive at split {b}")
    details["psi_equals_iota"] = psi_eq_iota
    details["parity_additive"] = additivity_ok
    return details, failures


CHECKS = {
    "interval-index": check_interval_index,
    "poschl-teller": check_second_order_zero,
    "circle-holonomy": check_circle_holonomy,
    "degeneracy-margin": check_degeneracy_margin,
    "dichotomy-grid": check_dichotomy_grid,
    "roughness": check_roughness,
    "grid-disconnection": check_grid_disconnection,
    "properties": check_properties,
}


def check_names():
    return list(CHECKS)


def run_checks(names=None, seed=0):
    """Run the named checks (all by default) and collect results."""
    from .errors import ContractError

    selected = check_names() if names is None else list(names)
    for name in selected:
        if name not in CHECKS:
            raise ContractError(
                f"unknown check {name!r}; available: {', '.join(check_names())}"
            )
    results = []
    for name in selected:
        start = time.perf_counter()
        try:
            details, failures = CHECKS[name](seed=seed)
        except Exception as exc:  # report, do not abort the battery
            details = {"error": f"{type(exc).__name__}: {exc}"}
            failures = [f"raised {type(exc).__name__}"]
        runtime = time.perf_counter() - start
        budget = BUDGETS.get(name)
        budget_runtime = details.pop("_budget_runtime", runtime)
        if budget is not None:
            details["runtime_budget"] = budget
            if USING_COMPILED and budget_runtime > budget:
                failures.append(
                    f"runtime {budget_runtime:.1f} s exceeds {budget:.0f} s"
                )
        results.append(CheckResult(
            name=name,
            passed=not failures,
            runtime=runtime,
            budget=budget,
            details=details,
            failures=failures,
        ))
    return results
