# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled replay loops; same contract as ``fifarank._kernels_py``."""

import numpy as np

from libc.math cimport exp, fabs, log, sinh, tanh

cdef double LN10 = log(10.0)
cdef double MAX_LOG_INTENSITY = 30.0


def fifa_replay(double[::1] theta, const long long[::1] home, const long long[::1] away,
                const double[::1] y_home, const double[::1] y_away,
                const double[::1] step, const unsigned char[::1] knockout, double scale):
    cdef Py_ssize_t T = home.shape[0]
    z_arr = np.empty(T)
    dh_arr = np.empty(T)
    da_arr = np.empty(T)
    cdef double[::1] z = z_arr
    cdef double[::1] dh = dh_arr
    cdef double[::1] da = da_arr
    cdef double k = 0.5 * LN10 / scale
    cdef double zt, f, delta_h, delta_a
    cdef Py_ssize_t t, i, j
    with nogil:
        for t in range(T):
            i = home[t]
            j = away[t]
            zt = theta[i] - theta[j]
            f = 0.5 * (1.0 + tanh(k * zt))
            delta_h = y_home[t] - f
            delta_a = y_away[t] - (1.0 - f)
            if knockout[t]:
                if delta_h < 0.0:
                    delta_h = 0.0
                if delta_a < 0.0:
                    delta_a = 0.0
            z[t] = zt
            dh[t] = step[t] * delta_h
            da[t] = step[t] * delta_a
            theta[i] += dh[t]
            theta[j] += da[t]
    return z_arr, dh_arr, da_arr


def davidson_replay(double[::1] theta, const long long[::1] home, const long long[::1] away,
                    const double[::1] venue_b, const double[::1] y_home,
                    const double[::1] weight, double K, double eta, double kappa,
                    double scale):
    cdef Py_ssize_t T = home.shape[0]
    z_arr = np.empty(T)
    delta_arr = np.empty(T)
    cdef double[::1] z = z_arr
    cdef double[::1] delta = delta_arr
    cdef double c = 0.5 * LN10
    cdef double zt, a, q, den, f
    cdef Py_ssize_t t, i, j
    with nogil:
        for t in range(T):
            i = home[t]
            j = away[t]
            zt = theta[i] - theta[j]
            a = c * (zt / scale + eta * venue_b[t])
            q = exp(-fabs(a))
            den = 1.0 + kappa * q + q * q
            if a >= 0.0:
                f = (1.0 + 0.5 * kappa * q) / den
            else:
                f = (q * q + 0.5 * kappa * q) / den
            z[t] = zt
            delta[t] = K * weight[t] * (y_home[t] - f)
            theta[i] += delta[t]
            theta[j] -= delta[t]
    return z_arr, delta_arr


def skellam_replay(double[::1] theta, const long long[::1] home, const long long[::1] away,
                   const double[::1] venue_b, const double[::1] goal_diff,
                   const double[::1] weight, double K, double c, double eta, double scale):
    cdef Py_ssize_t T = home.shape[0]
    z_arr = np.empty(T)
    delta_arr = np.empty(T)
    cdef double[::1] z = z_arr
    cdef double[::1] delta = delta_arr
    cdef double two_ec = 2.0 * exp(c)
    cdef double zt, x
    cdef Py_ssize_t t, i, j
    cdef Py_ssize_t bad = -1
    with nogil:
        for t in range(T):
            i = home[t]
            j = away[t]
            zt = theta[i] - theta[j]
            x = zt / scale + eta * venue_b[t]
            if fabs(x) > MAX_LOG_INTENSITY:
                bad = t
                break
            z[t] = zt
            delta[t] = K * weight[t] * (goal_diff[t] - two_ec * sinh(x))
            theta[i] += delta[t]
            theta[j] -= delta[t]
    if bad >= 0:
        return z_arr[:bad], delta_arr[:bad], bad
    return z_arr, delta_arr, -1
