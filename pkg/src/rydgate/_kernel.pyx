# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled propagation kernel.

Same Dormand-Prince 5(4) scheme, envelope encoding and step controller as
_kernel_py; only the inner loops are lowered to C.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, pow, sin, sqrt

BACKEND = "cython"

cdef double PI = 3.141592653589793

cdef double C2 = 0.2, C3 = 0.3, C4 = 0.8, C5 = 8.0 / 9.0

cdef double A21 = 0.2
cdef double A31 = 3.0 / 40.0, A32 = 9.0 / 40.0
cdef double A41 = 44.0 / 45.0, A42 = -56.0 / 15.0, A43 = 32.0 / 9.0
cdef double A51 = 19372.0 / 6561.0, A52 = -25360.0 / 2187.0
cdef double A53 = 64448.0 / 6561.0, A54 = -212.0 / 729.0
cdef double A61 = 9017.0 / 3168.0, A62 = -355.0 / 33.0, A63 = 46732.0 / 5247.0
cdef double A64 = 49.0 / 176.0, A65 = -5103.0 / 18656.0
cdef double B1 = 35.0 / 384.0, B3 = 500.0 / 1113.0, B4 = 125.0 / 192.0
cdef double B5 = -2187.0 / 6784.0, B6 = 11.0 / 84.0
cdef double E1 = 71.0 / 57600.0, E3 = -71.0 / 16695.0, E4 = 71.0 / 1920.0
cdef double E5 = -17253.0 / 339200.0, E6 = 22.0 / 525.0, E7 = -1.0 / 40.0

cdef double MIN_FACTOR = 0.2
cdef double MAX_FACTOR = 10.0
cdef double SAFETY = 0.9


cdef inline double envelope(int kind, double p0, double p1, double p2,
                            double tau, double duration) nogil:
    cdef double s
    if kind == 0:
        return p0
    if kind == 1:
        s = sin(PI * tau / duration)
        s = s * s
        if p2 == 1.0:
            return p0 + p1 * s
        return p0 + p1 * pow(s, p2)
    return p0 + (p1 - p0) * tau / duration


cdef void rhs(double tau, double complex[::1] y, double complex[::1] dy,
              double complex[:, ::1] A, double complex[:, :, ::1] B,
              int[::1] kinds, double[:, ::1] params, double duration) nogil:
    cdef Py_ssize_t dim = y.shape[0]
    cdef Py_ssize_t i, j, k
    cdef double f
    cdef double complex acc
    for i in range(dim):
        acc = 0
        for j in range(dim):
            acc = acc + A[i, j] * y[j]
        dy[i] = acc
    for k in range(4):
        f = envelope(kinds[k], params[k, 0], params[k, 1], params[k, 2], tau, duration)
        if f != 0.0:
            for i in range(dim):
                acc = 0
                for j in range(dim):
                    acc = acc + B[k, i, j] * y[j]
                dy[i] = dy[i] + f * acc
    for i in range(dim):
        dy[i] = dy[i] * (-1j)


def propagate_schedule(cnp.ndarray A_in, cnp.ndarray B_in, cnp.ndarray durations_in,
                       cnp.ndarray env_kinds_in, cnp.ndarray env_params_in,
                       cnp.ndarray psi0, cnp.ndarray t_eval_in,
                       double rtol, double atol):
    """See _kernel_py.propagate_schedule; identical contract."""
    cdef double complex[:, ::1] A = np.ascontiguousarray(A_in, dtype=np.complex128)
    cdef double complex[:, :, ::1] B = np.ascontiguousarray(B_in, dtype=np.complex128)
    cdef double[::1] durations = np.ascontiguousarray(durations_in, dtype=np.float64)
    kinds_arr = np.ascontiguousarray(env_kinds_in, dtype=np.int32)
    cdef int[:, ::1] kinds_all = kinds_arr
    cdef double[:, :, ::1] params_all = np.ascontiguousarray(env_params_in, dtype=np.float64)
    cdef double[::1] t_eval = np.ascontiguousarray(t_eval_in, dtype=np.float64)

    cdef Py_ssize_t dim = psi0.shape[0]
    cdef Py_ssize_t nt = t_eval.shape[0]
    cdef Py_ssize_t ns = durations.shape[0]

    out_arr = np.zeros((nt, dim), dtype=np.complex128)
    cdef double complex[:, ::1] out = out_arr
    y_arr = np.array(psi0, dtype=np.complex128)
    cdef double complex[::1] y = y_arr

    work_arr = np.zeros((9, dim), dtype=np.complex128)
    cdef double complex[:, ::1] w = work_arr  # k1..k7 rows 0-6, ys row 7, ynew row 8

    cdef double total = 0.0
    cdef Py_ssize_t seg, i, j
    for seg in range(ns):
        total += durations[seg]
    cdef double tiny = 1e-12 * max(total, 1e-300)
    cdef double underflow = 1e-14 * max(total, 1e-300)

    cdef Py_ssize_t i_eval = 0
    cdef double t_global = 0.0
    while i_eval < nt and t_eval[i_eval] <= t_global + tiny:
        for i in range(dim):
            out[i_eval, i] = y[i]
        i_eval += 1

    cdef double T, tau, h, h_step, h_new, target, f_norm, norm, scale, factor
    cdef bint clipped
    cdef int[::1] kinds
    cdef double[:, ::1] params
    cdef double seg_start
    cdef double complex err_i, cz

    for seg in range(ns):
        T = durations[seg]
        kinds = kinds_all[seg]
        params = params_all[seg]
        seg_start = t_global

        tau = 0.0
        rhs(tau, y, w[0], A, B, kinds, params, T)
        f_norm = 0.0
        for i in range(dim):
            cz = w[0, i]
            scale = sqrt(cz.real * cz.real + cz.imag * cz.imag)
            if scale > f_norm:
                f_norm = scale
        h = min(T, 0.1 / f_norm) if f_norm > 0 else T

        while tau < T - tiny:
            # emit any samples already reached so the next target is
            # always strictly ahead of tau
            while i_eval < nt and t_eval[i_eval] - seg_start <= tau + tiny:
                for i in range(dim):
                    out[i_eval, i] = y[i]
                i_eval += 1
            target = T
            if i_eval < nt and t_eval[i_eval] - seg_start < target:
                target = t_eval[i_eval] - seg_start
            h_step = target - tau
            if h < h_step:
                h_step = h
            if h_step < 0.0:
                h_step = 0.0
            clipped = h_step < h
            # underflow is only fatal when the controller itself collapsed;
            # a sliver left over from clipping to a sample time is harmless
            if h_step < underflow and not clipped:
                return out_arr, 1, seg_start + tau

            # stages 2..6
            for i in range(dim):
                w[7, i] = y[i] + h_step * (A21 * w[0, i])
            rhs(tau + C2 * h_step, w[7], w[1], A, B, kinds, params, T)
            for i in range(dim):
                w[7, i] = y[i] + h_step * (A31 * w[0, i] + A32 * w[1, i])
            rhs(tau + C3 * h_step, w[7], w[2], A, B, kinds, params, T)
            for i in range(dim):
                w[7, i] = y[i] + h_step * (A41 * w[0, i] + A42 * w[1, i] + A43 * w[2, i])
            rhs(tau + C4 * h_step, w[7], w[3], A, B, kinds, params, T)
            for i in range(dim):
                w[7, i] = y[i] + h_step * (A51 * w[0, i] + A52 * w[1, i]
                                           + A53 * w[2, i] + A54 * w[3, i])
            rhs(tau + C5 * h_step, w[7], w[4], A, B, kinds, params, T)
            for i in range(dim):
                w[7, i] = y[i] + h_step * (A61 * w[0, i] + A62 * w[1, i] + A63 * w[2, i]
                                           + A64 * w[3, i] + A65 * w[4, i])
            rhs(tau + h_step, w[7], w[5], A, B, kinds, params, T)
            # 5th-order solution
            for i in range(dim):
                w[8, i] = y[i] + h_step * (B1 * w[0, i] + B3 * w[2, i] + B4 * w[3, i]
                                           + B5 * w[4, i] + B6 * w[5, i])
            rhs(tau + h_step, w[8], w[6], A, B, kinds, params, T)

            # RMS error norm
            norm = 0.0
            for i in range(dim):
                err_i = h_step * (E1 * w[0, i] + E3 * w[2, i] + E4 * w[3, i]
                                  + E5 * w[4, i] + E6 * w[5, i] + E7 * w[6, i])
                scale = atol + rtol * max(
                    sqrt(y[i].real * y[i].real + y[i].imag * y[i].imag),
                    sqrt(w[8, i].real * w[8, i].real + w[8, i].imag * w[8, i].imag))
                norm += (err_i.real * err_i.real + err_i.imag * err_i.imag) / (scale * scale)
            norm = sqrt(norm / dim)

            if norm <= 1.0:
                tau += h_step
                for i in range(dim):
                    y[i] = w[8, i]
                    w[0, i] = w[6, i]  # FSAL
                if norm == 0.0:
                    factor = MAX_FACTOR
                else:
                    factor = SAFETY * pow(norm, -0.2)
                    if factor > MAX_FACTOR:
                        factor = MAX_FACTOR
                if factor < MIN_FACTOR:
                    factor = MIN_FACTOR
                h_new = h_step * factor
                h = max(h, h_new) if clipped else h_new
            else:
                factor = SAFETY * pow(norm, -0.2)
                if factor < MIN_FACTOR:
                    factor = MIN_FACTOR
                h = h_step * factor

        t_global = seg_start + T
        while i_eval < nt and t_eval[i_eval] <= t_global + tiny:
            for i in range(dim):
                out[i_eval, i] = y[i]
            i_eval += 1

    while i_eval < nt:
        for i in range(dim):
            out[i_eval, i] = y[i]
        i_eval += 1
    return out_arr, 0, t_global
