# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled adaptive stepper for the matrix ODE X' = A(t) X.

Mirror of ``_stepper_py`` (same Dormand-Prince 5(4) tableau, same
controller); keep the two in lockstep.  Built-in coefficient codes run
entirely without the GIL, so DICHOTOMY_THREADS > 1 parallelizes across
parameter nodes.  Callback descriptors (code 0) are delegated to the pure
stepper, since they are Python-bound either way.
"""

from libc.math cimport cos, cosh, fabs, pow, sqrt, tanh
from libc.math cimport isfinite
from libc.stdlib cimport free, malloc

import numpy as np

from .errors import StiffnessError
from . import _stepper_py

cdef double _PI = 3.141592653589793

# tableau (filled at import; last row of _AA is the 5th-order weight vector)
cdef double _CC[7]
cdef double _AA[7][6]
cdef double _EE[7]


def _init_tableau():
    from ._stepper_py import _A, _C, _E
    for i in range(7):
        _CC[i] = _C[i]
        _EE[i] = _E[i]
        for j in range(6):
            _AA[i][j] = _A[i][j] if j < len(_A[i]) else 0.0


_init_tableau()


cdef void _eval_a(int code, double t, double* par, double* mneg, double* mpos,
                  double bamp, double bsup, double* bmat, int d,
                  double* out) noexcept nogil:
    cdef int i, n = d * d
    cdef double a, u, ch, q, w
    if code == 1:
        u = tanh(par[1] * t)
        a = -par[0] * u * u
        if t < 0.0:
            for i in range(n):
                out[i] = a * mneg[i]
        else:
            for i in range(n):
                out[i] = a * mpos[i]
    else:  # code == 2, second-order companion with q = 2 sech^2 t - lam^2
        ch = cosh(t)
        q = 2.0 / (ch * ch) - par[0] * par[0]
        out[0] = 0.0
        out[1] = 1.0
        out[2] = -q
        out[3] = 0.0
    if bamp != 0.0 and fabs(t) < bsup:
        w = cos(_PI * t / (2.0 * bsup))
        a = bamp * w * w
        for i in range(n):
            out[i] += a * bmat[i]


cdef void _matmul(double* a, double* x, double* out, int d, int k) noexcept nogil:
    cdef int i, j, c
    cdef double acc
    for i in range(d):
        for c in range(k):
            acc = 0.0
            for j in range(d):
                acc += a[i * d + j] * x[j * k + c]
            out[i * k + c] = acc


cdef int _run(int code, double* par, double* mneg, double* mpos,
              double bamp, double bsup, double* bmat,
              int d, int k, double* x, double t0, double t1,
              double rtol, double atol, long max_steps,
              long* naccept, long* nreject, double* t_fail) noexcept nogil:
    cdef int dk = d * k
    cdef double* buf = <double*> malloc((7 * dk + 3 * dk + d * d) * sizeof(double))
    if buf == NULL:
        t_fail[0] = t0
        return 3
    cdef double* kst = buf            # 7 stage slabs of size dk
    cdef double* y = buf + 7 * dk
    cdef double* xn = y + dk
    cdef double* ev = xn + dk         # error vector
    cdef double* amat = ev + dk
    cdef double t = t0
    cdef double span = t1 - t0
    cdef double direction = 1.0 if span > 0.0 else -1.0
    cdef double h = fabs(span)
    if h > 0.1:
        h = 0.1
    h *= direction
    cdef long steps = 0, acc_n = 0, rej_n = 0
    cdef int i, j, idx, last
    cdef double accv, err, sc, fac, hmin, ax, axn
    cdef int status = 0

    _eval_a(code, t, par, mneg, mpos, bamp, bsup, bmat, d, amat)
    _matmul(amat, x, kst, d, k)

    while direction * (t1 - t) > 0.0:
        steps += 1
        if steps > max_steps:
            status = 1
            t_fail[0] = t
            break
        hmin = 1e-14 * (1.0 if fabs(t) < 1.0 else fabs(t))
        if fabs(h) < hmin:
            status = 2
            t_fail[0] = t
            break
        last = 1 if fabs(h) >= fabs(t1 - t) else 0
        if last:
            h = t1 - t
        for i in range(1, 6):
            for idx in range(dk):
                accv = 0.0
                for j in range(i):
                    accv += _AA[i][j] * kst[j * dk + idx]
                y[idx] = x[idx] + h * accv
            _eval_a(code, t + _CC[i] * h, par, mneg, mpos, bamp, bsup, bmat, d, amat)
            _matmul(amat, y, kst + i * dk, d, k)
        for idx in range(dk):
            accv = 0.0
            for j in range(6):
                accv += _AA[6][j] * kst[j * dk + idx]
            xn[idx] = x[idx] + h * accv
        _eval_a(code, t + h, par, mneg, mpos, bamp, bsup, bmat, d, amat)
        _matmul(amat, xn, kst + 6 * dk, d, k)
        err = 0.0
        for idx in range(dk):
            accv = 0.0
            for j in range(7):
                accv += _EE[j] * kst[j * dk + idx]
            ax = fabs(x[idx])
            axn = fabs(xn[idx])
            sc = atol + rtol * (ax if ax > axn else axn)
            accv = h * accv / sc
            err += accv * accv
        err = sqrt(err / dk)
        if err <= 1.0:
            t = t1 if last else t + h
            for idx in range(dk):
                x[idx] = xn[idx]
                kst[idx] = kst[6 * dk + idx]
            acc_n += 1
            if err == 0.0:
                fac = 5.0
            else:
                fac = 0.9 * pow(err, -0.2)
                if fac > 5.0:
                    fac = 5.0
                elif fac < 0.2:
                    fac = 0.2
            h *= fac
        else:
            rej_n += 1
            if isfinite(err):
                fac = 0.9 * pow(err, -0.2)
                if fac > 0.9:
                    fac = 0.9
                elif fac < 0.2:
                    fac = 0.2
                h *= fac
            else:
                h *= 0.2
    free(buf)
    naccept[0] = acc_n
    nreject[0] = rej_n
    return status


def integrate(desc, x0, double t0, double t1, double rtol, double atol,
              long max_steps=2_000_000):
    """Integrate X' = A(t) X from (t0, x0) to t1.

    Same contract as ``_stepper_py.integrate``.
    """
    code, params, mat_neg, mat_pos, bump_amp, bump_sup, bump_mat, callback = desc
    if code == 0:
        return _stepper_py.integrate(desc, x0, t0, t1, rtol, atol, max_steps)
    x = np.array(x0, dtype=np.float64, order="C")
    if x.ndim == 1:
        x = x[:, None]
    if t1 == t0:
        return x, 0, 0
    cdef double[:, ::1] xv = x
    cdef int d = xv.shape[0]
    cdef int k = xv.shape[1]
    par_arr = np.ascontiguousarray(params, dtype=np.float64)
    cdef double[::1] parv = par_arr
    cdef double[:, ::1] mnegv
    cdef double[:, ::1] mposv
    cdef double[:, ::1] bmatv
    cdef double* mneg_p = NULL
    cdef double* mpos_p = NULL
    cdef double* bmat_p = NULL
    if mat_neg is not None:
        mnegv = np.ascontiguousarray(mat_neg, dtype=np.float64)
        mneg_p = &mnegv[0, 0]
    if mat_pos is not None:
        mposv = np.ascontiguousarray(mat_pos, dtype=np.float64)
        mpos_p = &mposv[0, 0]
    cdef double bamp = float(bump_amp)
    cdef double bsup = float(bump_sup)
    if bamp != 0.0:
        bmatv = np.ascontiguousarray(bump_mat, dtype=np.float64)
        bmat_p = &bmatv[0, 0]
    cdef long naccept = 0, nreject = 0
    cdef double t_fail = 0.0
    cdef int icode = code
    cdef int status
    with nogil:
        status = _run(icode, &parv[0], mneg_p, mpos_p, bamp, bsup, bmat_p,
                      d, k, &xv[0, 0], t0, t1, rtol, atol, max_steps,
                      &naccept, &nreject, &t_fail)
    if status == 1:
        raise StiffnessError(
            f"step budget {max_steps} exhausted at t = {t_fail:.6g}", t=t_fail
        )
    if status == 2:
        raise StiffnessError(f"step size underflow at t = {t_fail:.6g}", t=t_fail)
    if status == 3:
        raise MemoryError("stepper buffer allocation failed")
    return x, int(naccept), int(nreject)
