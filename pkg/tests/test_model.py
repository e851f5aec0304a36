"""Families, parameter spaces, numerics and config round-trips."""

import json
import math

import numpy as np
import pytest

from evanskit import model
from evanskit.errors import ConfigError, ContractError, HyperbolicityError


# ---------------------------------------------------------------------------
# scalar profile


def test_profile_shape():
    p = model.ScalarProfile()
    assert p.value(0.0) == 0.0
    # the rate is calibrated so the plateau level -a_plus sits exactly at t0
    assert p.value(p.t0) == pytest.approx(-p.a_plus, rel=1e-14)
    assert p.value(-p.t0) == pytest.approx(-p.a_plus, rel=1e-14)
    assert p.value(50.0) == pytest.approx(-p.a_minus, abs=1e-12)
    ts = np.linspace(0.0, 6.0, 200)
    vals = [p.value(t) for t in ts]
    assert all(b <= a + 1e-15 for a, b in zip(vals, vals[1:]))  # decreasing
    assert all(p.value(t) == p.value(-t) for t in ts)  # even


def test_profile_custom_calibration():
    p = model.ScalarProfile(a_plus=0.5, a_minus=3.0, t0=2.0)
    assert p.value(2.0) == pytest.approx(-0.5, rel=1e-14)


def test_profile_validation():
    with pytest.raises(ConfigError):
        model.ScalarProfile(a_plus=2.0, a_minus=1.0)
    with pytest.raises(ConfigError):
        model.ScalarProfile(a_plus=-1.0, a_minus=2.0)
    with pytest.raises(ConfigError):
        model.ScalarProfile(t0=0.0)
    with pytest.raises(ConfigError) as info:
        model.ScalarProfile(tag="bogus")
    assert info.value.field == "family.profile.tag"


# ---------------------------------------------------------------------------
# angle maps


def test_angle_maps():
    lin = model.AngleMap(tag="linear", scale=2.0)
    assert lin.theta(0.7) == pytest.approx(1.4)
    rad = model.AngleMap(tag="radial", scale=math.pi)
    assert rad.theta((0.0, 0.0)) == pytest.approx(math.pi)
    assert rad.theta((0.6, 0.8)) == pytest.approx(0.0, abs=1e-15)
    pq = model.AngleMap(tag="product_quad", x_scale=math.pi, y_curvature=0.25)
    assert pq.theta((1.0, 0.0)) == pytest.approx(math.pi)
    assert pq.theta((-1.0, 0.3)) == 0.0
    assert pq.theta((0.0, 2.0)) == pytest.approx(0.5 * math.pi * 2.0)


def test_angle_map_validation():
    with pytest.raises(ConfigError):
        model.AngleMap(tag="spiral")
    with pytest.raises(ContractError):
        model.AngleMap(tag="radial").theta(0.5)  # needs two components


# ---------------------------------------------------------------------------
# piecewise scalar families


def test_rotating_matrices(rotating_fam):
    theta = 0.9
    b, c = rotating_fam.matrix_pair(theta)
    for m in (b, c):
        assert np.max(np.abs(m - m.T)) == 0.0
        assert np.linalg.det(m) == pytest.approx(-1.0, rel=1e-14)
        assert np.allclose(sorted(np.linalg.eigvalsh(m)), [-1.0, 1.0])
    # piecewise evaluation switches matrix at t = 0
    assert np.allclose(rotating_fam.matrix(theta, -2.0),
                       rotating_fam.profile.value(-2.0) * b)
    assert np.allclose(rotating_fam.matrix(theta, 2.0),
                       rotating_fam.profile.value(2.0) * c)
    lim_m, lim_p = rotating_fam.limits(theta)
    assert np.allclose(lim_m, -rotating_fam.profile.a_minus * b)
    assert np.allclose(lim_p, -rotating_fam.profile.a_minus * c)


def test_rotating_seeds_are_eigenvectors(rotating_fam):
    theta = 1.3
    b, c = rotating_fam.matrix_pair(theta)
    seeds = rotating_fam.splitting(theta)
    # unstable seed: negative eigenvector of B; stable: positive of C
    assert np.max(np.abs(b @ seeds.unstable_seed + seeds.unstable_seed)) <= 1e-12
    assert np.max(np.abs(c @ seeds.stable_seed - seeds.stable_seed)) <= 1e-12


def test_mobius_family(mobius_fam):
    b, _c = mobius_fam.matrix_pair(2.0)
    assert np.array_equal(b, np.diag([-1.0, 1.0]))


def test_closed_form_frames(rotating_fam, teller_fam):
    u, s = rotating_fam.closed_form_frames(1.0)
    assert np.allclose(u.ravel(), [math.sin(0.5), math.cos(0.5)])
    assert np.allclose(s.ravel(), [math.cos(0.5), math.sin(0.5)])
    u2, s2 = teller_fam.closed_form_frames(0.5)
    assert np.allclose(u2.ravel(), [0.5, -0.75])
    assert np.allclose(s2.ravel(), [0.5, 0.75])


def test_family_validation():
    with pytest.raises(ConfigError):
        model.PiecewiseScalarFamily(matrices="unknown_pair")
    with pytest.raises(ConfigError):
        model.SecondOrderFamily(coefficients="harmonic")


def test_second_order_domain(teller_fam):
    with pytest.raises(ContractError):
        teller_fam.check_domain(0.0)
    with pytest.raises(ContractError):
        teller_fam.matrix(-1.0, 0.0)
    assert teller_fam.q(1.0, 0.0) == pytest.approx(1.0)  # 2 sech^2(0) - 1
    assert teller_fam.p(1.0, 3.0) == 0.0
    a_m, a_p = teller_fam.limits(0.7)
    assert np.allclose(a_m, [[0.0, 1.0], [0.49, 0.0]])
    assert np.array_equal(a_m, a_p)


# ---------------------------------------------------------------------------
# tabulated families and generic splitting


def hyperbolic_tab(diag):
    m = np.diag(diag)
    return model.TabulatedFamily(
        dim=len(diag),
        matrix_fn=lambda lam, t: m,
        limit_fn=lambda lam: (m, m),
    )


def test_tabulated_splitting():
    fam = hyperbolic_tab([2.0, -1.0])
    seeds = fam.splitting(0.0)
    assert np.allclose(np.abs(seeds.unstable_seed.ravel()), [1.0, 0.0])
    assert np.allclose(np.abs(seeds.stable_seed.ravel()), [0.0, 1.0])
    assert fam.closed_form_frames is None


def test_tabulated_rejects_nonhyperbolic_limit():
    fam = hyperbolic_tab([0.0, 1.0])
    with pytest.raises(HyperbolicityError):
        fam.splitting(0.0)


# ---------------------------------------------------------------------------
# perturbations


def test_bump_shape():
    g = np.array([[0.0, 1.0], [1.0, 0.0]])
    bump = model.Bump(amplitude=0.02, support=3.0, matrix=g)
    assert bump.value(0.0) == pytest.approx(0.02)
    assert bump.value(3.0) == 0.0
    assert bump.value(-5.0) == 0.0
    assert bump.value(1.5) == pytest.approx(0.02 * math.cos(math.pi / 4) ** 2)
    assert bump.sup_norm() == pytest.approx(0.02)  # ||g||_2 = 1
    with pytest.raises(ConfigError):
        model.Bump(amplitude=0.1, support=0.0, matrix=g)


def test_make_perturbation(rotating_fam):
    pert = model.make_perturbation(rotating_fam, 0.01, 4.0, seed=7)
    # unit spectral norm direction, so sup norm equals the amplitude
    assert pert.bump.sup_norm() == pytest.approx(0.01)
    inside = pert.matrix(1.0, 0.5) - rotating_fam.matrix(1.0, 0.5)
    assert np.max(np.abs(inside)) > 0.0
    outside = pert.matrix(1.0, 6.0) - rotating_fam.matrix(1.0, 6.0)
    assert np.max(np.abs(outside)) == 0.0
    # asymptotic data inherited from the base family
    assert np.array_equal(pert.limits(1.0)[0], rotating_fam.limits(1.0)[0])
    seeds = pert.splitting(1.0)
    base = rotating_fam.splitting(1.0)
    assert np.array_equal(seeds.stable_seed, base.stable_seed)


def test_make_perturbation_guards(rotating_fam):
    with pytest.raises(ContractError):
        model.make_perturbation(rotating_fam, 0.01, 4.0)  # neither seed nor matrix
    with pytest.raises(ContractError):
        model.make_perturbation(rotating_fam, 0.01, 4.0, seed=1, matrix=np.eye(2))
    with pytest.raises(ContractError):
        model.make_perturbation(rotating_fam, 0.01, 4.0, matrix=np.eye(3))


def test_stacked_perturbations_rejected(rotating_fam):
    once = model.make_perturbation(rotating_fam, 0.01, 4.0, seed=1)
    twice = model.make_perturbation(once, 0.01, 4.0, seed=2)
    with pytest.raises(ContractError):
        twice.stepper_descriptor(1.0)


# ---------------------------------------------------------------------------
# parameter spaces


def test_interval_space():
    sp = model.interval_space(0.0, 1.0, 11, lambda0=(0.0, 0.52))
    assert sp.topology == "interval"
    assert sp.size == 11
    assert np.allclose(np.diff(sp.nodes), 0.1)
    assert sp.edges == tuple((i, i + 1) for i in range(10))
    # lambda0 snaps to the nearest node; requested values are kept
    assert sp.lambda0 == (0, 5)
    assert sp.lambda0_requested == (0.0, 0.52)
    assert sp.range_ == (0.0, 1.0)
    with pytest.raises(ConfigError):
        model.interval_space(1.0, 0.0, 5)
    with pytest.raises(ConfigError):
        model.interval_space(0.0, 1.0, 1)


def test_circle_space():
    sp = model.circle_space(8, lambda0=(0.0,))
    assert sp.topology == "circle"
    assert sp.size == 8
    assert sp.closing_edge == (7, 0)
    assert sp.closing_edge in sp.edges
    assert len(sp.edges) == 8
    assert np.allclose(sp.nodes, 2.0 * math.pi * np.arange(8) / 8)
    with pytest.raises(ConfigError):
        model.circle_space(2)


def test_grid_space_disc():
    sp = model.grid_space(11, lambda0=((0.0, 0.0),))
    assert sp.topology == "grid2d"
    assert sp.mask == "disc"
    # every node inside the closed unit disc
    assert np.all(np.sum(sp.nodes**2, axis=1) <= 1.0 + 1e-12)
    # grid_index is the inverse lookup of the node list
    for i in range(sp.size):
        x, y = sp.nodes[i]
        ix = round((x + 1.0) * 5)
        iy = round((y + 1.0) * 5)
        assert sp.grid_index[iy, ix] == i
    # edges connect 4-neighbours only
    for i, j in sp.edges:
        assert np.sum(np.abs(sp.nodes[i] - sp.nodes[j])) == pytest.approx(0.2)
    # boundary is in increasing angular order (up to the -pi wrap)
    ang = np.array([math.atan2(y, x) for x, y in sp.nodes[list(sp.boundary)]])
    assert np.all(np.diff(ang) > 0.0)


def test_grid_space_square_mask():
    sp = model.grid_space(5, mask="square")
    assert sp.size == 25
    corners = {(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)}
    assert corners <= {tuple(p) for p in sp.nodes}
    with pytest.raises(ConfigError):
        model.grid_space(5, mask="hex")
    with pytest.raises(ConfigError):
        model.grid_space(2)


def test_lambda0_snapping_guards():
    with pytest.raises(ConfigError):
        model.interval_space(0.0, 1.0, 5, lambda0=((0.0, 1.0),))  # not scalar
    with pytest.raises(ConfigError):
        model.grid_space(5, lambda0=(0.3,))  # not a 2-point
    # duplicate requests collapse to one distinguished node
    sp = model.interval_space(0.0, 1.0, 5, lambda0=(0.0, 0.01))
    assert sp.lambda0 == (0,)


# ---------------------------------------------------------------------------
# numerics and problem spec


def test_numerics_validation():
    with pytest.raises(ConfigError):
        model.Numerics(truncation_time=0.0)
    with pytest.raises(ConfigError):
        model.Numerics(ode_tol=-1e-10)
    with pytest.raises(ConfigError):
        model.Numerics(zero_tol=0.0)


def test_problem_spec_truncation_floor(rotating_fam):
    space = model.interval_space(0.0, 1.0, 5)
    with pytest.raises(ConfigError):
        model.ProblemSpec(family=rotating_fam, space=space,
                          numerics=model.Numerics(truncation_time=1.0))
    pert = model.make_perturbation(rotating_fam, 0.01, support=6.0, seed=0)
    with pytest.raises(ConfigError):
        model.ProblemSpec(family=pert, space=space,
                          numerics=model.Numerics(truncation_time=5.0))
    # fine above both floors
    model.ProblemSpec(family=pert, space=space,
                      numerics=model.Numerics(truncation_time=8.0))


def test_problem_spec_rejects_second_order_grid(teller_fam):
    with pytest.raises(ConfigError):
        model.ProblemSpec(family=teller_fam, space=model.grid_space(5),
                          numerics=model.Numerics())


# ---------------------------------------------------------------------------
# config text


def test_builtin_names():
    names = model.builtin_names()
    assert names == sorted(names)
    assert {"rotating-pair", "mobius-circle", "poschl-teller",
            "disc-radial", "disc-product"} == set(names)


@pytest.mark.parametrize("name", ["rotating-pair", "mobius-circle",
                                  "poschl-teller", "disc-radial", "disc-product"])
def test_config_round_trip(name):
    text = model.builtin_config(name)
    spec = model.load_config(text)
    dumped = model.dump_config(spec)
    spec2 = model.load_config(dumped)
    assert model.dump_config(spec2) == dumped  # canonical after one pass
    assert spec2.family.kind == spec.family.kind
    assert spec2.space.topology == spec.space.topology
    assert spec2.space.size == spec.space.size
    assert spec2.space.lambda0 == spec.space.lambda0
    assert spec2.numerics == spec.numerics


def test_unknown_builtin():
    with pytest.raises(ConfigError) as info:
        model.builtin_config("nonexistent")
    assert "available" in str(info.value)


def test_load_config_rejects_unknown_keys():
    raw = json.loads(model.builtin_config("rotating-pair"))
    raw["family"]["typo"] = 1
    with pytest.raises(ConfigError) as info:
        model.load_config(json.dumps(raw))
    assert info.value.field == "family.typo"


def test_load_config_reports_dotted_paths():
    raw = json.loads(model.builtin_config("rotating-pair"))
    del raw["numerics"]["T"]
    with pytest.raises(ConfigError) as info:
        model.load_config(json.dumps(raw))
    assert info.value.field == "numerics.T"
    raw2 = json.loads(model.builtin_config("rotating-pair"))
    raw2["numerics"]["T"] = "twelve"
    with pytest.raises(ConfigError) as info2:
        model.load_config(json.dumps(raw2))
    assert info2.value.field == "numerics.T"


def test_load_config_rejects_bad_json_and_kinds():
    with pytest.raises(ConfigError):
        model.load_config("{not json")
    with pytest.raises(ConfigError):
        model.load_config(json.dumps({"family": {"kind": "mystery"},
                                      "space": {"topology": "interval",
                                                "range": [0, 1], "n": 5},
                                      "numerics": {"T": 12, "ode_tol": 1e-10,
                                                   "reortho_interval": 1,
                                                   "zero_tol": 1e-8}}))


def test_tabulated_config_is_programmatic_only():
    with pytest.raises(ConfigError):
        model.load_config(json.dumps({
            "family": {"kind": "asymptotically_hyperbolic_tabulated"},
            "space": {"topology": "interval", "range": [0, 1], "n": 5},
            "numerics": {"T": 12, "ode_tol": 1e-10,
                         "reortho_interval": 1, "zero_tol": 1e-8},
        }))


def test_perturbed_config_round_trip(rotating_fam):
    pert = model.make_perturbation(rotating_fam, 0.008, 4.0, seed=3)
    spec = model.ProblemSpec(
        family=pert,
        space=model.interval_space(0.0, 1.0, 5, lambda0=(0.0,)),
        numerics=model.Numerics(),
    )
    spec2 = model.load_config(model.dump_config(spec))
    assert spec2.family.kind == "perturbed"
    assert np.allclose(spec2.family.bump.matrix, pert.bump.matrix)
    assert spec2.family.bump.amplitude == pert.bump.amplitude


def test_eval_coefficient_dispatch(rotating_fam, teller_fam):
    assert np.allclose(model.eval_coefficient(rotating_fam, 1.0, 2.0),
                       rotating_fam.matrix(1.0, 2.0))
    assert np.allclose(model.eval_coefficient(teller_fam, 1.0, 0.0),
                       [[0.0, 1.0], [-1.0, 0.0]])


def test_asymptotic_splitting_data_orthonormal(rotating_fam, teller_fam):
    for fam, lam in ((rotating_fam, 0.7), (teller_fam, 1.2)):
        seeds = model.asymptotic_splitting_data(fam, lam)
        for f in (seeds.unstable_seed, seeds.stable_seed):
            assert np.max(np.abs(f.T @ f - np.eye(f.shape[1]))) <= 1e-12
