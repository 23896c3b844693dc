"""Pure-Python propagation kernel.

Integrates i dpsi/dt = H(t) psi with H(t) = A + sum_k f_k(t) B_k using an
adaptive Dormand-Prince 5(4) pair.  The scalar controls f_k are evaluated
per schedule segment from the (kind, p0, p1, p2) envelope encoding; the
integrator restarts at segment boundaries so control discontinuities never
sit inside a step.

The compiled extension in _kernel.pyx implements the same algorithm with
identical coefficients and step control; this module is the fallback and
the reference for backend-consistency tests.
"""

import math

import numpy as np

BACKEND = "python"

# Dormand-Prince 5(4) tableau.
_C = (0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0)
_A = (
    (0.2,),
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

_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0
_SAFETY = 0.9


def _envelope(kind, p0, p1, p2, tau, duration):
    if kind == 0:
        return p0
    if kind == 1:
        s = math.sin(math.pi * tau / duration) ** 2
        return p0 + p1 * s**p2
    # kind == 2: linear
    return p0 + (p1 - p0) * tau / duration


def _rhs(tau, y, A, B, kinds, params, duration):
    dy = A @ y
    for k in range(4):
        f = _envelope(kinds[k], params[k, 0], params[k, 1], params[k, 2], tau, duration)
        if f != 0.0:
            dy += f * (B[k] @ y)
    return -1j * dy


def _error_norm(err, y, ynew, rtol, atol):
    scale = atol + rtol * np.maximum(np.abs(y), np.abs(ynew))
    return math.sqrt(float(np.mean(np.abs(err / scale) ** 2)))


def propagate_schedule(A, B, durations, env_kinds, env_params, psi0, t_eval, rtol, atol):
    """Propagate psi0 across all segments, sampling at the times in t_eval.

    Returns (out, status, t_reached) where out[i] is psi at t_eval[i],
    status is 0 on success or 1 on step-size underflow, and t_reached is
    the absolute time where integration stopped.
    """
    dim = psi0.shape[0]
    nt = t_eval.shape[0]
    out = np.zeros((nt, dim), dtype=np.complex128)
    y = psi0.astype(np.complex128, copy=True)

    total = float(np.sum(durations))
    tiny = 1e-12 * max(total, 1e-300)
    i_eval = 0
    t_global = 0.0
    while i_eval < nt and t_eval[i_eval] <= t_global + tiny:
        out[i_eval] = y
        i_eval += 1

    for seg in range(durations.shape[0]):
        T = float(durations[seg])
        kinds = env_kinds[seg]
        params = env_params[seg]
        seg_start = t_global

        tau = 0.0
        k1 = _rhs(tau, y, A, B, kinds, params, T)
        # initial step heuristic
        f_norm = float(np.max(np.abs(k1)))
        h = min(T, 0.1 / f_norm) if f_norm > 0 else T

        while tau < T - tiny:
            # emit any samples we have reached, so the next target is
            # always strictly ahead of tau
            while i_eval < nt and t_eval[i_eval] - seg_start <= tau + tiny:
                out[i_eval] = y
                i_eval += 1
            # next stopping point: segment end or next requested sample
            target = T
            if i_eval < nt:
                target = min(target, float(t_eval[i_eval]) - seg_start)
            h_step = min(h, max(target - tau, 0.0))
            clipped = h_step < h
            # underflow is only fatal when the controller itself collapsed;
            # a sliver left over from clipping to a sample time is harmless
            if h_step < 1e-14 * max(total, 1e-300) and not clipped:
                return out, 1, seg_start + tau

            k = [k1]
            for s in range(5):
                ys = y + h_step * sum(a * ks for a, ks in zip(_A[s], k))
                k.append(_rhs(tau + _C[s + 1] * h_step, ys, A, B, kinds, params, T))
            ynew = y + h_step * sum(a * ks for a, ks in zip(_A[5], k))
            k7 = _rhs(tau + h_step, ynew, A, B, kinds, params, T)
            k.append(k7)
            err = h_step * sum(e * ks for e, ks in zip(_E, k))

            norm = _error_norm(err, y, ynew, rtol, atol)
            if norm <= 1.0:
                tau += h_step
                y = ynew
                k1 = k7
                factor = _MAX_FACTOR if norm == 0 else min(_MAX_FACTOR, _SAFETY * norm**-0.2)
                h_new = h_step * max(_MIN_FACTOR, factor)
                # a step clipped to hit a sample time must not shrink the
                # controller's step memory
                h = max(h, h_new) if clipped else h_new
            else:
                h = h_step * max(_MIN_FACTOR, _SAFETY * norm**-0.2)

        t_global = seg_start + T
        while i_eval < nt and t_eval[i_eval] <= t_global + tiny:
            out[i_eval] = y
            i_eval += 1

    # trailing samples at (or numerically past) the final time
    while i_eval < nt:
        out[i_eval] = y
        i_eval += 1
    return out, 0, t_global
