#!/usr/bin/env python3
"""Time the compiled stepper against the pure-python fallback.

One run per descriptor kind the integrator dispatches on: the scalar
plateau profile, the second-order companion form, and a python matrix
callback.  Each case transports the full 2x2 transition matrix
across one truncation half-line, which is the shape of the inner loop
in every frame computation.

Run from anywhere after an editable install:

    python3 benchmarks/bench_transport.py --repeats 7
"""

import argparse
import sys
import time

import numpy as np

from evanskit import model


def build_cases():
    rotating = model.rotating_pair_family()
    teller = model.poschl_teller_family()
    # same right-hand side as the first case, but presented to the
    # stepper as an opaque python callback instead of profile data
    tab = model.TabulatedFamily(
        dim=2,
        matrix_fn=lambda lam, t: rotating.matrix(lam, t),
        limit_fn=lambda lam: rotating.limits(lam),
    )
    return [
        ("scalar-profile", rotating.stepper_descriptor(1.1), -12.0, 0.0),
        ("companion", teller.stepper_descriptor(0.8), 12.0, 0.0),
        ("callback", tab.stepper_descriptor(1.1), -12.0, 0.0),
    ]


def best_of(fn, desc, x0, s, t, rtol, atol, repeats):
    best = float("inf")
    out = None
    for _ in range(repeats):
        tic = time.perf_counter()
        out = fn(desc, x0.copy(), s, t, rtol, atol)
        best = min(best, time.perf_counter() - tic)
    return best, out


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5,
                        help="take the best of this many runs (default 5)")
    parser.add_argument("--rtol", type=float, default=1e-10,
                        help="relative step tolerance (default 1e-10)")
    args = parser.parse_args(argv)

    from evanskit import _stepper_py
    try:
        from evanskit import _stepper_c
    except ImportError:
        print("compiled stepper is not built; reinstall the package "
              "(pip3 install -e . --no-build-isolation) and retry",
              file=sys.stderr)
        return 1

    atol = args.rtol / 10.0
    header = (f"{'case':<16}{'python [ms]':>12}{'compiled [ms]':>15}"
              f"{'speedup':>9}{'max dev':>10}  steps")
    print(header)
    print("-" * len(header))
    for name, desc, s, t in build_cases():
        x0 = np.eye(2)
        t_py, (xp, nap, nrp) = best_of(_stepper_py.integrate, desc, x0,
                                       s, t, args.rtol, atol, args.repeats)
        t_c, (xc, nac, nrc) = best_of(_stepper_c.integrate, desc, x0,
                                      s, t, args.rtol, atol, args.repeats)
        xp = np.asarray(xp)
        xc = np.asarray(xc)
        scale = max(1.0, float(np.max(np.abs(xc))))
        dev = float(np.max(np.abs(xc - xp))) / scale
        steps = f"{nac}+{nrc}"
        if (nac, nrc) != (nap, nrp):
            steps += f" (python {nap}+{nrp})"
        print(f"{name:<16}{1e3 * t_py:>12.3f}{1e3 * t_c:>15.3f}"
              f"{t_py / t_c:>9.1f}{dev:>10.1e}  {steps}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
