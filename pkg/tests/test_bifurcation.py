"""Zero location along paths and sign maps on parameter grids."""

import math

import numpy as np
import pytest

from evanskit import bifurcation, model, subspaces
from evanskit.errors import ContractError, TransversalityError


def reflection(th):
    return np.array([[math.cos(th), math.sin(th)],
                     [math.sin(th), -math.cos(th)]])


def counter_reflection(th):
    return np.array([[math.cos(th), -math.sin(th)],
                     [-math.sin(th), -math.cos(th)]])


def rotating_tabulated(theta_of_lam):
    """Rotating-pair construction with a custom parameter-to-angle map."""
    prof = model.ScalarProfile()

    def mfn(lam, t):
        th = theta_of_lam(lam)
        m = counter_reflection(th) if t < 0.0 else reflection(th)
        return prof.value(t) * m

    def lfn(lam):
        th = theta_of_lam(lam)
        return (-prof.a_minus * counter_reflection(th),
                -prof.a_minus * reflection(th))

    return model.TabulatedFamily(dim=2, matrix_fn=mfn, limit_fn=lfn)


# ---------------------------------------------------------------------------
# path zero location


def test_second_order_zero(teller_fam):
    # spacing 0.0375 keeps the crossing at lambda = 1 off the grid
    space = model.interval_space(0.2, 1.7, 41, lambda0=(0.2,))
    finding = bifurcation.locate_zeros_on_path(teller_fam, space, T=12.0)
    assert finding.topology == "interval"
    assert len(finding.zeros) == 1
    z = finding.zeros[0]
    assert z.position == pytest.approx(1.0, abs=1e-6)
    assert z.bracket[0] <= z.position <= z.bracket[1]
    assert z.bracket[1] - z.bracket[0] <= bifurcation.BRACKET_WIDTH
    assert z.residual <= finding.zero_tol
    # opposite signs at the final bracket ends
    assert z.left_value * z.right_value < 0.0
    # the whole final bracket has collapsed onto the degeneracy
    assert max(z.margin, z.left_margin, z.right_margin) <= 1e-6
    # while the hosting grid nodes stay well transversal
    node_gap = float(space.nodes[1] - space.nodes[0])
    hosts = [i for i in range(space.size)
             if abs(float(space.nodes[i]) - z.position) <= 1.5 * node_gap]
    assert all(finding.margins[i] > 1e-3 for i in hosts)
    assert 20 <= z.bisection_steps <= 80
    assert finding.candidates == ()
    assert finding.zero_nodes == ()


def test_rotating_zero(rotating_fam):
    space = model.interval_space(1.0, 2.0, 41, lambda0=(1.0,))
    finding = bifurcation.locate_zeros_on_path(rotating_fam, space, T=12.0)
    assert len(finding.zeros) == 1
    assert finding.zeros[0].position == pytest.approx(math.pi / 2, abs=1e-6)
    assert len(finding.ld) == 41
    assert len(finding.signs) == 41
    assert len(finding.margins) == 41


def test_no_crossing_clean_interval(rotating_fam):
    space = model.interval_space(0.2, 1.2, 21, lambda0=(0.2,))
    finding = bifurcation.locate_zeros_on_path(rotating_fam, space, T=12.0)
    assert finding.zeros == ()
    assert finding.candidates == ()
    assert finding.zero_nodes == ()
    assert np.all(finding.signs == finding.signs[0])


def test_touching_zero_reports_candidate_not_crossing():
    # theta = pi/2 + (lam - 1)^2 makes the determinant graze zero at
    # lam = 1 without changing sign: candidate evidence only
    fam = rotating_tabulated(lambda lam: 0.5 * math.pi + (lam - 1.0) ** 2)
    space = model.interval_space(0.8, 1.2, 41, lambda0=(0.8,))
    finding = bifurcation.locate_zeros_on_path(fam, space, T=12.0)
    assert finding.zeros == ()
    assert 20 in finding.candidates
    assert finding.zero_nodes == (20,)
    # definite signs on both sides agree
    assert finding.signs[0] == finding.signs[-1] != 0


def test_exact_zero_node_still_brackets(rotating_fam):
    # a grid node exactly at the degeneracy: the crossing is found from
    # the surrounding definite-sign nodes
    space = model.interval_space(math.pi / 2 - 0.05, math.pi / 2 + 0.05, 11,
                                 lambda0=(math.pi / 2 - 0.05,))
    finding = bifurcation.locate_zeros_on_path(rotating_fam, space, T=12.0)
    assert finding.zero_nodes == (5,)
    assert len(finding.zeros) == 1
    assert finding.zeros[0].position == pytest.approx(math.pi / 2, abs=1e-8)


def test_locate_zeros_contracts(rotating_fam, teller_fam):
    with pytest.raises(ContractError):
        bifurcation.locate_zeros_on_path(rotating_fam,
                                         model.circle_space(10), T=12.0)
    # non-transversal endpoint has no usable parity
    space = model.interval_space(math.pi / 2, 2.5, 21, lambda0=(2.5,))
    with pytest.raises(TransversalityError):
        bifurcation.locate_zeros_on_path(rotating_fam, space, T=12.0)


def test_locate_zeros_field_reuse(teller_fam):
    space = model.interval_space(0.5, 1.5, 21, lambda0=(0.5,))
    field = subspaces.frame_field(teller_fam, space, T=12.0)
    a = bifurcation.locate_zeros_on_path(teller_fam, space, T=12.0,
                                         field=field)
    b = bifurcation.locate_zeros_on_path(teller_fam, space, T=12.0)
    assert np.array_equal(a.ld, b.ld)
    assert a.zeros[0].position == pytest.approx(b.zeros[0].position, abs=1e-9)
    other = model.interval_space(0.5, 1.5, 21, lambda0=(0.5,))
    with pytest.raises(ContractError):
        bifurcation.locate_zeros_on_path(teller_fam, other, T=12.0,
                                         field=field)  # field built elsewhere


def test_bisection_respects_gauge_chaining(rotating_fam):
    # left/right values of the final bracket and the node samples share
    # one gauge: the determinant rises through zero here (-cos theta)
    space = model.interval_space(1.0, 2.0, 41, lambda0=(1.0,))
    finding = bifurcation.locate_zeros_on_path(rotating_fam, space, T=12.0)
    gauge = float(np.sign(finding.ld[0] - (-math.cos(1.0))) or 1.0)
    z = finding.zeros[0]
    assert (z.left_value < 0.0 < z.right_value) or \
        (z.right_value < 0.0 < z.left_value)
    # consistency with the sampled signs around the crossing
    below = finding.signs[finding.signs != 0][0]
    assert math.copysign(1.0, z.left_value) == below


# ---------------------------------------------------------------------------
# 2-d sign maps


@pytest.fixture(scope="module")
def radial_finding():
    spec = model.load_builtin("disc-radial")
    space = model.grid_space(41, lambda0=((0.0, 0.0),))
    finding = bifurcation.sign_map_2d(spec.family, space, T=12.0, tol=1e-7,
                                      reortho_interval=6.0)
    return spec.family, space, finding


def test_radial_disconnection(radial_finding):
    _fam, space, finding = radial_finding
    assert finding.topology == "grid2d"
    assert finding.n_positive_components == 1
    assert finding.n_negative_components == 1
    assert finding.disconnects
    # the zero circle r^2 = 1/2 passes through exactly the lattice points
    # with (i-20)^2 + (j-20)^2 = 200: twelve of them at this resolution
    assert len(finding.zero_nodes) == 12
    for i in finding.zero_nodes:
        x, y = space.nodes[i]
        assert x * x + y * y == pytest.approx(0.5, abs=1e-12)
    assert finding.n_zero_components == 12  # isolated lattice hits


def test_radial_center_sign(radial_finding):
    _fam, space, finding = radial_finding
    center = int(space.grid_index[20, 20])
    assert finding.signs[center] == 1  # theta(0) = pi gives +1
    rim = int(space.grid_index[20, 40])  # (1, 0): theta = 0 gives -1
    assert finding.signs[rim] == -1


def test_radial_boundary_trace_empty(radial_finding):
    _fam, space, finding = radial_finding
    assert bifurcation.boundary_trace(finding, space) == []


def test_product_boundary_trace():
    spec = model.load_builtin("disc-product")
    space = model.grid_space(41, lambda0=((-1.0, 0.0),))
    finding = bifurcation.sign_map_2d(spec.family, space, T=12.0, tol=1e-7,
                                      reortho_interval=6.0)
    assert finding.disconnects
    changes = bifurcation.boundary_trace(finding, space)
    assert len(changes) == 2
    ys = sorted(0.5 * (space.nodes[i][1] + space.nodes[j][1])
                for i, j in changes)
    # one crossing per semicircle, near y = -0.95 and y = +0.95
    assert ys[0] == pytest.approx(-0.95, abs=0.05)
    assert ys[1] == pytest.approx(0.95, abs=0.05)
    for i, j in changes:
        assert finding.signs[i] * finding.signs[j] == -1


def test_constant_sign_grid():
    fam = model.PiecewiseScalarFamily(
        angle_map=model.AngleMap(tag="radial", scale=0.0)
    )
    space = model.grid_space(11, lambda0=((0.0, 0.0),))
    finding = bifurcation.sign_map_2d(fam, space, T=12.0, tol=1e-8)
    assert finding.n_positive_components == 0
    assert finding.n_negative_components == 1
    assert not finding.disconnects
    assert finding.zero_nodes == ()
    assert finding.n_zero_components == 0
    assert bifurcation.boundary_trace(finding, space) == []


def test_sign_map_contracts(rotating_fam):
    with pytest.raises(ContractError):
        bifurcation.sign_map_2d(rotating_fam,
                                model.interval_space(0.0, 1.0, 5), T=12.0)


def test_boundary_trace_needs_grid(rotating_fam):
    space = model.interval_space(0.2, 1.2, 5, lambda0=(0.2,))
    finding = bifurcation.locate_zeros_on_path(rotating_fam, space, T=12.0)
    with pytest.raises(ContractError):
        bifurcation.boundary_trace(finding, space)
