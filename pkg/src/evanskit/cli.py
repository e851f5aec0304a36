"""Command-line drivers.

Four subcommands: `verify` runs the built-in check battery, while
`path`, `circle` and `grid` run one configured analysis each and write
report.json, samples.csv and a plot-data file into the output
directory.  Outputs carry no timestamps or timings, so a rerun with the
same config and version is byte-identical.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__, bifurcation, index, model, subspaces, verification
from .errors import ConfigError, ContractError, EvansKitError

REPORT_SCHEMA = "evanskit-report/1"


def build_parser():
    parser = argparse.ArgumentParser(
        prog="evanskit",
        description="Dichotomy subspace frames, determinant curves and "
                    "Z2 invariants for parameter families of linear ODEs.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_verify = sub.add_parser(
        "verify", help="run the built-in verification battery")
    p_verify.add_argument("--only", metavar="NAME",
                          help="comma-separated subset of checks, see --list")
    p_verify.add_argument("--list", action="store_true",
                          help="list check names and exit")
    p_verify.add_argument("--json", action="store_true",
                          help="machine-readable summary on stdout")
    p_verify.add_argument("--seed", type=int, default=0,
                          help="base seed for the perturbation suites")
    p_verify.set_defaults(func=cmd_verify)

    for name, help_text in (
        ("path", "determinant curve and parity over an interval"),
        ("circle", "holonomy and bundle class over a circle"),
        ("grid", "sign map and disconnection verdict over a 2-d grid"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, metavar="PATH|NAME",
                       help="config file path or built-in name "
                            f"({', '.join(model.builtin_names())})")
        p.add_argument("--output", default=".", metavar="DIR",
                       help="directory for report.json and data files")
        p.add_argument("--truncation-time", type=float, default=None,
                       metavar="T", help="override the truncation time")
        p.add_argument("--grid", type=int, default=None, metavar="N",
                       help="override the node count / grid resolution")
        p.add_argument("--json", action="store_true",
                       help="print report.json to stdout too")
        p.set_defaults(func={"path": cmd_path, "circle": cmd_circle,
                             "grid": cmd_grid}[name])
    return parser


def _load_spec(args, expect_topology):
    if os.path.exists(args.config):
        with open(args.config, "r", encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = model.builtin_config(args.config)
    spec = model.load_config(text)
    space = spec.space
    if space.topology != expect_topology:
        raise ContractError(
            f"config has topology {space.topology!r}, but this command "
            f"needs {expect_topology!r}"
        )
    if args.grid is not None:
        if space.topology == "interval":
            lo, hi = space.range_
            space = model.interval_space(lo, hi, args.grid,
                                         space.lambda0_requested)
        elif space.topology == "circle":
            space = model.circle_space(args.grid, space.lambda0_requested)
        else:
            space = model.grid_space(args.grid, space.lambda0_requested,
                                     mask=space.mask)
    numerics = spec.numerics
    if args.truncation_time is not None:
        numerics = model.Numerics(
            truncation_time=args.truncation_time,
            ode_tol=numerics.ode_tol,
            reortho_interval=numerics.reortho_interval,
            zero_tol=numerics.zero_tol,
        )
    return model.ProblemSpec(family=spec.family, space=space,
                             numerics=numerics)


def _frame_field(spec):
    return subspaces.frame_field(
        spec.family, spec.space,
        T=spec.numerics.truncation_time,
        tol=spec.numerics.ode_tol,
        reortho_interval=spec.numerics.reortho_interval,
    )


def _node_row(space, i):
    v = space.nodes[i]
    if np.ndim(v) == 0:
        return [float(v)]
    return [float(c) for c in v]


def _write_samples(path, space, ld, signs, margins):
    scalar = np.ndim(space.nodes[0]) == 0
    header = ("lambda,LD,sign,margin" if scalar
              else "lambda_x,lambda_y,LD,sign,margin")
    lines = [header]
    for i in range(space.size):
        cols = [repr(c) for c in _node_row(space, i)]
        cols += [repr(float(ld[i])), str(int(signs[i])),
                 repr(float(margins[i]))]
        lines.append(",".join(cols))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _write_columns(path, rows):
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(" ".join(repr(float(c)) if isinstance(c, float) else str(c)
                              for c in row) + "\n")


def _report_common(command, spec, report):
    space = spec.space
    signs = np.asarray(report.signs)
    payload = {
        "schema": REPORT_SCHEMA,
        "version": __version__,
        "command": command,
        "topology": space.topology,
        "node_count": space.size,
        "truncation_time": float(report.truncation_time),
        "zero_tol": float(report.zero_tol),
        "lambda0": {
            "indices": [int(i) for i in space.lambda0],
            "values": space.node_values(space.lambda0),
        },
        "sign_counts": {
            "positive": int(np.sum(signs == 1)),
            "negative": int(np.sum(signs == -1)),
            "zero": int(np.sum(signs == 0)),
        },
        "psi": {f"{i}-{j}": int(v) for (i, j), v in sorted(report.psi.items())},
    }
    return payload


def _emit(args, payload, artifacts):
    outdir = args.output
    os.makedirs(outdir, exist_ok=True)
    report_path = os.path.join(outdir, "report.json")
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    with open(report_path, "w", encoding="utf-8") as fh:
        fh.write(text)
    if args.json:
        sys.stdout.write(text)
    else:
        for line in artifacts:
            print(line)
        print(f"wrote {report_path}")
    return 0


def cmd_path(args):
    spec = _load_spec(args, "interval")
    fld = _frame_field(spec)
    report = index.build_report(spec.family, fld,
                                zero_tol=spec.numerics.zero_tol)
    finding = bifurcation.locate_zeros_on_path(
        spec.family, spec.space,
        T=spec.numerics.truncation_time,
        zero_tol=spec.numerics.zero_tol,
        tol=spec.numerics.ode_tol,
        reortho_interval=spec.numerics.reortho_interval,
        field=fld,
    )
    payload = _report_common("path", spec, report)
    payload["iota"] = None if report.iota is None else int(report.iota)
    payload["zeros"] = [
        {
            "position": z.position,
            "bracket": list(z.bracket),
            "residual": z.residual,
            "margin": z.margin,
            "bisection_steps": z.bisection_steps,
        }
        for z in finding.zeros
    ]
    payload["candidates"] = [int(i) for i in finding.candidates]
    if report.ld_reference is not None:
        payload["normalized_curve"] = True
    outdir = args.output
    os.makedirs(outdir, exist_ok=True)
    _write_samples(os.path.join(outdir, "samples.csv"), spec.space,
                   report.ld, report.signs, report.margins)
    curve = report.ld_reference if report.ld_reference is not None else report.ld
    _write_columns(os.path.join(outdir, "ld_curve.dat"),
                   [(float(spec.space.nodes[i]), float(curve[i]))
                    for i in range(spec.space.size)])
    summary = [
        f"{len(finding.zeros)} zero crossing(s)"
        + (": " + ", ".join(repr(z.position) for z in finding.zeros)
           if finding.zeros else ""),
        f"psi = {payload['psi']}",
    ]
    return _emit(args, payload, summary)


def cmd_circle(args):
    spec = _load_spec(args, "circle")
    fld = _frame_field(spec)
    report = index.build_report(spec.family, fld,
                                zero_tol=spec.numerics.zero_tol)
    payload = _report_common("circle", spec, report)
    payload["holonomy"] = {
        which: {
            "sign": int(data["sign"]),
            "w1": int(data["w1"]),
            "overlap_det": float(data["overlap_det"]),
        }
        for which, data in report.holonomy.items()
    }
    payload["bundle_class"] = {
        "value": int(report.pejsachowicz.value),
        "w1_plus": int(report.pejsachowicz.w1_plus),
        "w1_minus": int(report.pejsachowicz.w1_minus),
    }
    outdir = args.output
    os.makedirs(outdir, exist_ok=True)
    _write_samples(os.path.join(outdir, "samples.csv"), spec.space,
                   report.ld, report.signs, report.margins)
    _write_columns(os.path.join(outdir, "ld_curve.dat"),
                   [(float(spec.space.nodes[i]), float(report.ld[i]))
                    for i in range(spec.space.size)])
    summary = [
        f"stable holonomy sign {payload['holonomy']['stable']['sign']} "
        f"(w1 = {payload['holonomy']['stable']['w1']})",
        f"bundle class {payload['bundle_class']['value']}",
    ]
    return _emit(args, payload, summary)


def cmd_grid(args):
    spec = _load_spec(args, "grid2d")
    fld = _frame_field(spec)
    report = index.build_report(spec.family, fld,
                                zero_tol=spec.numerics.zero_tol)
    finding = bifurcation.sign_map_2d(
        spec.family, spec.space,
        T=spec.numerics.truncation_time,
        zero_tol=spec.numerics.zero_tol,
        tol=spec.numerics.ode_tol,
        reortho_interval=spec.numerics.reortho_interval,
        field=fld,
    )
    trace = bifurcation.boundary_trace(finding, spec.space)
    payload = _report_common("grid", spec, report)
    payload["components"] = {
        "positive": int(finding.n_positive_components),
        "negative": int(finding.n_negative_components),
        "zero": int(finding.n_zero_components),
    }
    payload["disconnects"] = bool(finding.disconnects)
    payload["zero_node_count"] = len(finding.zero_nodes)
    payload["boundary_changes"] = [
        {"nodes": [int(i), int(j)],
         "between": [_node_row(spec.space, i), _node_row(spec.space, j)]}
        for i, j in trace
    ]
    outdir = args.output
    os.makedirs(outdir, exist_ok=True)
    _write_samples(os.path.join(outdir, "samples.csv"), spec.space,
                   finding.ld, finding.signs, finding.margins)
    _write_columns(
        os.path.join(outdir, "sign_map.dat"),
        [(float(spec.space.nodes[i][0]), float(spec.space.nodes[i][1]),
          int(finding.signs[i])) for i in range(spec.space.size)],
    )
    summary = [
        f"sign components: {payload['components']['positive']} positive, "
        f"{payload['components']['negative']} negative",
        f"disconnects: {str(payload['disconnects']).lower()}",
        f"boundary sign changes: {len(trace)}",
    ]
    return _emit(args, payload, summary)


def cmd_verify(args):
    if args.list:
        for name in verification.check_names():
            print(name)
        return 0
    names = args.only.split(",") if args.only else None
    results = verification.run_checks(names, seed=args.seed)
    if args.json:
        payload = {
            "schema": "evanskit-verify/1",
            "version": __version__,
            "passed": all(r.passed for r in results),
            "checks": [
                {
                    "name": r.name,
                    "passed": r.passed,
                    "runtime_seconds": round(r.runtime, 3),
                    "details": {k: _json_value(v) for k, v in r.details.items()},
                    "failures": list(r.failures),
                }
                for r in results
            ],
        }
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        for r in results:
            print(r.summary())
        total = sum(r.runtime for r in results)
        n_bad = sum(1 for r in results if not r.passed)
        print(f"{len(results) - n_bad}/{len(results)} checks passed "
              f"in {total:.1f} s")
    return 0 if all(r.passed for r in results) else 3


def _json_value(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    return v


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ContractError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except EvansKitError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
