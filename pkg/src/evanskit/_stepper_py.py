"""Pure-numpy adaptive stepper for the matrix ODE X' = A(t) X.

Embedded Dormand-Prince 5(4) pair with the standard PI-free controller
(safety 0.9, growth clamped to [0.2, 5.0]).  The compiled stepper in
``_stepper_c`` implements the identical scheme; keep the two in lockstep.

Coefficient evaluation is driven by a descriptor tuple

    (code, params, mat_neg, mat_pos, bump_amp, bump_sup, bump_mat, callback)

with codes
    0  callback(t) -> (d, d) array,
    1  scalar profile pair: A(t) = -a_minus * tanh(rate * t)^2 * M,
       M = mat_neg for t < 0 and mat_pos for t >= 0, params = (a_minus, rate),
    2  second-order companion with q(t) = 2 sech^2 t - lam^2, p = 0,
       params = (lam,),
plus an optional additive bump  bump_amp * cos^2(pi t / (2 bump_sup)) * bump_mat
supported on |t| < bump_sup.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import StiffnessError

# Dormand-Prince 5(4) tableau; the last row of _A is the 5th-order weight
# vector (FSAL: stage 7 equals the first stage of the next step)
_C = (0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0)
_A = (
    (),
    (1.0 / 5.0,),
    (3.0 / 40.0, 9.0 / 40.0),
    (44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0),
    (19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0),
    (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0),
    (35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0),
)
_E = (
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
)

CODE_CALLBACK = 0
CODE_SCALAR_PAIR = 1
CODE_COMPANION_SECH2 = 2


def _make_eval(desc):
    code, params, mat_neg, mat_pos, bump_amp, bump_sup, bump_mat, callback = desc

    if code == CODE_SCALAR_PAIR:
        a_minus, rate = float(params[0]), float(params[1])

        def base(t):
            u = math.tanh(rate * t)
            return (-a_minus * u * u) * (mat_neg if t < 0.0 else mat_pos)

    elif code == CODE_COMPANION_SECH2:
        lam = float(params[0])

        def base(t):
            ch = math.cosh(t)
            q = 2.0 / (ch * ch) - lam * lam
            return np.array([[0.0, 1.0], [-q, 0.0]])

    elif code == CODE_CALLBACK:

        def base(t):
            return np.asarray(callback(t), dtype=float)

    else:
        raise ValueError(f"unknown coefficient code {code}")

    if bump_amp == 0.0:
        return base

    def bumped(t):
        a = base(t)
        if abs(t) < bump_sup:
            w = math.cos(math.pi * t / (2.0 * bump_sup))
            a = a + (bump_amp * w * w) * bump_mat
        return a

    return bumped


def integrate(desc, x0, t0, t1, rtol, atol, max_steps=2_000_000):
    """Integrate X' = A(t) X from (t0, x0) to t1.

    Returns (x1, accepted_steps, rejected_steps).  Raises StiffnessError on
    step underflow or an exhausted step budget.
    """
    x = np.array(x0, dtype=float)
    if t1 == t0:
        return x, 0, 0
    ev = _make_eval(desc)
    t = float(t0)
    span = float(t1) - t
    direction = 1.0 if span > 0 else -1.0
    h = direction * min(abs(span), 0.1)
    k = [None] * 7
    k[0] = ev(t) @ x
    naccept = 0
    nreject = 0
    steps = 0
    while direction * (t1 - t) > 0.0:
        steps += 1
        if steps > max_steps:
            raise StiffnessError(
                f"step budget {max_steps} exhausted at t = {t:.6g}", t=t
            )
        hmin = 1e-14 * max(1.0, abs(t))
        if abs(h) < hmin:
            raise StiffnessError(f"step size underflow at t = {t:.6g}", t=t)
        last = abs(h) >= abs(t1 - t)
        if last:
            h = t1 - t
        for i in range(1, 6):
            y = x + h * sum(_A[i][j] * k[j] for j in range(i))
            k[i] = ev(t + _C[i] * h) @ y
        x_new = x + h * sum(_A[6][j] * k[j] for j in range(6))
        k[6] = ev(t + h) @ x_new
        err_vec = h * sum(_E[j] * k[j] for j in range(7))
        sc = atol + rtol * np.maximum(np.abs(x), np.abs(x_new))
        err = math.sqrt(float(np.mean((err_vec / sc) ** 2)))
        if err <= 1.0:
            t = float(t1) if last else t + h
            x = x_new
            k[0] = k[6]
            naccept += 1
            fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
            h *= fac
        else:
            nreject += 1
            if math.isfinite(err):
                h *= min(0.9, max(0.2, 0.9 * err ** -0.2))
            else:
                h *= 0.2
    return x, naccept, nreject
