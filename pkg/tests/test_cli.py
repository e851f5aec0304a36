"""End-to-end command-line tests.

Everything runs in-process through cli.main(argv) except two subprocess
smoke tests for the module entry point and the console script.  The
analysis commands reuse downsized copies of the built-in configs so the
whole module stays fast.
"""

import json
import math
import shutil
import subprocess
import sys

import numpy as np
import pytest

import evanskit
from evanskit import cli, model, verification

ARTIFACTS_PATH = ("report.json", "samples.csv", "ld_curve.dat")


def read_report(outdir):
    with open(outdir / "report.json", "r", encoding="utf-8") as fh:
        return json.load(fh)


@pytest.fixture(scope="module")
def path_cfg(tmp_path_factory):
    # rotating pair on 41 nodes instead of the built-in 181; the zero
    # at pi/2 then falls exactly on node 20
    spec = model.load_config(model.builtin_config("rotating-pair"))
    small = model.ProblemSpec(
        family=spec.family,
        space=model.interval_space(0.0, math.pi, 41, (0.0, math.pi)),
        numerics=spec.numerics,
    )
    p = tmp_path_factory.mktemp("cfg") / "rotating-small.cfg"
    p.write_text(model.dump_config(small), encoding="utf-8")
    return str(p)


@pytest.fixture(scope="module")
def path_run(path_cfg, tmp_path_factory):
    out = tmp_path_factory.mktemp("path-out")
    rc = cli.main(["path", "--config", path_cfg, "--output", str(out)])
    assert rc == 0
    return out, read_report(out)


@pytest.fixture(scope="module")
def circle_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("circle-out")
    rc = cli.main(["circle", "--config", "mobius-circle",
                   "--output", str(out), "--grid", "60"])
    assert rc == 0
    return out, read_report(out)


@pytest.fixture(scope="module")
def grid_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("grid-out")
    rc = cli.main(["grid", "--config", "disc-radial",
                   "--output", str(out), "--grid", "41"])
    assert rc == 0
    return out, read_report(out)


class TestPathCommand:
    def test_writes_artifacts(self, path_run):
        out, _ = path_run
        for name in ARTIFACTS_PATH:
            assert (out / name).is_file()

    def test_report_fields(self, path_run):
        _, payload = path_run
        assert payload["schema"] == "evanskit-report/1"
        assert payload["version"] == evanskit.__version__
        assert payload["command"] == "path"
        assert payload["topology"] == "interval"
        assert payload["node_count"] == 41
        assert payload["truncation_time"] == 12.0
        assert payload["zero_tol"] == 1e-8
        assert payload["lambda0"]["indices"] == [0, 40]
        assert payload["lambda0"]["values"] == pytest.approx([0.0, math.pi])
        assert payload["iota"] == 1
        assert payload["psi"] == {"0-40": 1}
        assert payload["normalized_curve"] is True
        # node 20 sits exactly on the zero of the determinant
        assert payload["sign_counts"] == {"positive": 20, "negative": 20,
                                          "zero": 1}

    def test_report_zero_crossing(self, path_run):
        _, payload = path_run
        assert payload["candidates"] == []
        (zero,) = payload["zeros"]
        assert zero["position"] == pytest.approx(math.pi / 2, abs=1e-6)
        lo, hi = zero["bracket"]
        assert lo <= zero["position"] <= hi
        assert hi - lo <= 1e-8
        assert zero["residual"] <= payload["zero_tol"]
        assert zero["bisection_steps"] > 0

    def test_samples_csv(self, path_run):
        out, payload = path_run
        lines = (out / "samples.csv").read_text().splitlines()
        assert lines[0] == "lambda,LD,sign,margin"
        assert len(lines) == 1 + payload["node_count"]
        data = np.genfromtxt(out / "samples.csv", delimiter=",",
                             skip_header=1)
        lam = data[:, 0]
        assert lam == pytest.approx(np.linspace(0.0, math.pi, 41))
        # margin of the frame pair is sqrt(1 - sin theta) here
        assert data[:, 3] == pytest.approx(np.sqrt(1.0 - np.sin(lam)),
                                           abs=1e-6)
        # raw signs are gauge dependent but the endpoint pair is not
        assert data[0, 2] * data[-1, 2] == -1.0

    def test_curve_file_is_normalized(self, path_run):
        out, _ = path_run
        data = np.loadtxt(out / "ld_curve.dat")
        assert data.shape == (41, 2)
        assert data[:, 1] == pytest.approx(-np.cos(data[:, 0]), abs=1e-7)

    def test_rerun_is_byte_identical(self, path_cfg, path_run, tmp_path):
        out1, _ = path_run
        rc = cli.main(["path", "--config", path_cfg,
                       "--output", str(tmp_path)])
        assert rc == 0
        for name in ARTIFACTS_PATH:
            assert (tmp_path / name).read_bytes() == \
                (out1 / name).read_bytes()

    def test_json_flag_prints_report(self, path_cfg, path_run, tmp_path,
                                     capsys):
        rc = cli.main(["path", "--config", path_cfg,
                       "--output", str(tmp_path), "--json"])
        assert rc == 0
        assert json.loads(capsys.readouterr().out) == path_run[1]

    def test_grid_and_truncation_overrides(self, path_cfg, tmp_path):
        rc = cli.main(["path", "--config", path_cfg, "--output",
                       str(tmp_path), "--grid", "11",
                       "--truncation-time", "6.0"])
        assert rc == 0
        payload = read_report(tmp_path)
        assert payload["node_count"] == 11
        assert payload["truncation_time"] == 6.0


class TestCircleCommand:
    def test_writes_artifacts(self, circle_run):
        out, _ = circle_run
        for name in ARTIFACTS_PATH:
            assert (out / name).is_file()
        assert not (out / "sign_map.dat").exists()

    def test_report_fields(self, circle_run):
        _, payload = circle_run
        assert payload["command"] == "circle"
        assert payload["topology"] == "circle"
        assert payload["node_count"] == 60
        # single distinguished node, so no parity pairs and no index
        assert payload["psi"] == {}
        assert "iota" not in payload
        assert "zeros" not in payload
        # the node at angle 0 is the degenerate angle of this family
        assert payload["sign_counts"]["zero"] == 1

    def test_holonomy_and_bundle_class(self, circle_run):
        _, payload = circle_run
        stable = payload["holonomy"]["stable"]
        assert (stable["sign"], stable["w1"]) == (-1, 1)
        assert stable["overlap_det"] < 0.0
        assert abs(stable["overlap_det"]) >= 0.99
        unstable = payload["holonomy"]["unstable"]
        assert (unstable["sign"], unstable["w1"]) == (1, 0)
        assert unstable["overlap_det"] == pytest.approx(1.0, abs=1e-6)
        assert payload["bundle_class"] == {"value": 1, "w1_plus": 1,
                                           "w1_minus": 0}

    def test_curve_file(self, circle_run):
        out, _ = circle_run
        data = np.loadtxt(out / "ld_curve.dat")
        assert data.shape == (60, 2)
        assert np.all(np.isfinite(data))


class TestGridCommand:
    def test_writes_artifacts(self, grid_run):
        out, _ = grid_run
        for name in ("report.json", "samples.csv", "sign_map.dat"):
            assert (out / name).is_file()
        assert not (out / "ld_curve.dat").exists()

    def test_report_fields(self, grid_run):
        _, payload = grid_run
        assert payload["command"] == "grid"
        assert payload["topology"] == "grid2d"
        # disc mask inside a 41 x 41 lattice
        c = 20
        in_disc = sum((i - c) ** 2 + (j - c) ** 2 <= c ** 2
                      for i in range(41) for j in range(41))
        assert payload["node_count"] == in_disc
        assert payload["lambda0"]["values"][0] == pytest.approx([0.0, 0.0])
        assert payload["lambda0"]["values"][1] == pytest.approx([1.0, 0.0])
        assert list(payload["psi"].values()) == [1]

    def test_components_and_verdict(self, grid_run):
        _, payload = grid_run
        # zero circle r^2 = 1/2 hits the 12 lattice points with
        # (i-20)^2 + (j-20)^2 = 200, all isolated
        assert payload["components"] == {"positive": 1, "negative": 1,
                                         "zero": 12}
        assert payload["zero_node_count"] == 12
        assert payload["disconnects"] is True
        # boundary ring stays on one side of the zero circle
        assert payload["boundary_changes"] == []

    def test_samples_and_sign_map(self, grid_run):
        out, payload = grid_run
        lines = (out / "samples.csv").read_text().splitlines()
        assert lines[0] == "lambda_x,lambda_y,LD,sign,margin"
        assert len(lines) == 1 + payload["node_count"]
        data = np.loadtxt(out / "sign_map.dat")
        assert data.shape == (payload["node_count"], 3)
        assert set(np.unique(data[:, 2])) <= {-1.0, 0.0, 1.0}
        assert int(np.sum(data[:, 2] == 0.0)) == 12


class TestErrorPaths:
    def test_unknown_config_name(self, capsys):
        rc = cli.main(["path", "--config", "no-such-config"])
        assert rc == 2
        assert "config error" in capsys.readouterr().err

    def test_topology_mismatch(self, capsys):
        rc = cli.main(["circle", "--config", "rotating-pair"])
        assert rc == 2
        err = capsys.readouterr().err
        assert "interval" in err and "circle" in err

    def test_bad_truncation_override(self, path_cfg, tmp_path, capsys):
        rc = cli.main(["path", "--config", path_cfg, "--output",
                       str(tmp_path), "--truncation-time", "0"])
        assert rc == 2
        assert "truncation_time" in capsys.readouterr().err

    def test_unknown_check_name(self, capsys):
        rc = cli.main(["verify", "--only", "bogus"])
        assert rc == 2
        assert "bogus" in capsys.readouterr().err

    def test_too_coarse_grid_breaks_continuity(self, tmp_path, capsys):
        # at resolution 21 adjacent frames rotate by ~0.3 rad, past the
        # 0.2 rad field contract, and that is a numerical failure
        rc = cli.main(["grid", "--config", "disc-radial", "--output",
                       str(tmp_path), "--grid", "21"])
        assert rc == 3
        assert "continuity bound" in capsys.readouterr().err


class TestVerifyCommand:
    def test_list_names(self, capsys):
        rc = cli.main(["verify", "--list"])
        assert rc == 0
        assert capsys.readouterr().out.split() == verification.check_names()

    def test_only_single_check_json(self, capsys):
        rc = cli.main(["verify", "--only", "roughness", "--json"])
        assert rc == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["schema"] == "evanskit-verify/1"
        assert payload["passed"] is True
        (check,) = payload["checks"]
        assert check["name"] == "roughness"
        assert check["failures"] == []
        assert check["runtime_seconds"] >= 0.0


def test_module_entry_point_version():
    proc = subprocess.run([sys.executable, "-m", "evanskit.cli",
                           "--version"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.strip() == evanskit.__version__


def test_console_script_installed():
    exe = shutil.which("evanskit")
    assert exe is not None
    proc = subprocess.run([exe, "verify", "--list"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.split() == verification.check_names()
