# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled edge kernels; same contract and rounding as ``_pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, pow

cnp.import_array()

NAME = "cython"

VOLUME_FILLING = 0
FULL_UPWIND = 1


cdef inline double _ipow(double x, int k) nogil:
    # same multiplication sequence as _pykernels.ipow
    cdef double result = 1.0
    cdef double base = x
    cdef bint first = True
    while k:
        if k & 1:
            if first:
                result = base
                first = False
            else:
                result = result * base
        k >>= 1
        if k:
            base = base * base
    return result


cdef inline double _gpow(double g, double p, int k) nogil:
    if k >= 0:
        return _ipow(fabs(g), k)
    return pow(fabs(g), p - 2.0)


cdef inline double _pflux(double g, double p, int k) nogil:
    if p == 2.0:
        return g
    return _gpow(g, p, k) * g


cdef int _int_exponent(double p):
    cdef double k = p - 2.0
    if k == <int>k and 0 <= k <= 64:
        return <int>k
    return -1


def pflux(g, double p):
    cdef cnp.ndarray[double, ndim=1] src = np.ascontiguousarray(np.ravel(g), dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] out = np.empty_like(src)
    cdef Py_ssize_t i
    cdef int k = _int_exponent(p)
    for i in range(src.shape[0]):
        out[i] = _pflux(src[i], p, k)
    return out.reshape(np.shape(g))


def edge_fluxes(const double[::1] A, const double[::1] u, const double[::1] fu,
                const double[::1] v, const cnp.intp_t[::1] ek, const cnp.intp_t[::1] el,
                const double[::1] tau, double p, double chi, int mode):
    cdef Py_ssize_t ne = ek.shape[0], e, k, l
    cdef cnp.ndarray[double, ndim=1] D = np.empty(ne)
    cdef cnp.ndarray[double, ndim=1] C = np.empty(ne)
    cdef cnp.ndarray[double, ndim=1] G = np.empty(ne)
    cdef double[::1] Dv = D, Cv = C, Gv = G
    cdef double dv, pos, neg, fk, fl
    cdef bint split = mode == VOLUME_FILLING
    cdef int kexp = _int_exponent(p)
    with nogil:
        for e in range(ne):
            k = ek[e]
            l = el[e]
            Dv[e] = tau[e] * _pflux(A[l] - A[k], p, kexp)
            dv = v[l] - v[k]
            pos = dv if dv > 0.0 else 0.0
            neg = -dv if -dv > 0.0 else 0.0
            if split:
                fk = fu[l]
                fl = fu[k]
            else:
                fk = fu[k]
                fl = fu[l]
            Cv[e] = (chi * tau[e]) * (pos * u[k] * fk - neg * u[l] * fl)
            Gv[e] = tau[e] * dv
    return D, C, G


def assemble(const double[::1] A, const double[::1] u, const double[::1] fu,
             const double[::1] v, const cnp.intp_t[::1] ek, const cnp.intp_t[::1] el,
             const double[::1] tau, double p, double chi, int mode):
    cdef Py_ssize_t n = u.shape[0], ne = ek.shape[0], e, k, l
    cdef cnp.ndarray[double, ndim=1] Su = np.zeros(n)
    cdef cnp.ndarray[double, ndim=1] Sv = np.zeros(n)
    cdef double[::1] su = Su, sv = Sv
    cdef double dv, pos, neg, fk, fl, D, C, N, G
    cdef bint split = mode == VOLUME_FILLING
    cdef int kexp = _int_exponent(p)
    with nogil:
        for e in range(ne):
            k = ek[e]
            l = el[e]
            D = tau[e] * _pflux(A[l] - A[k], p, kexp)
            dv = v[l] - v[k]
            pos = dv if dv > 0.0 else 0.0
            neg = -dv if -dv > 0.0 else 0.0
            if split:
                fk = fu[l]
                fl = fu[k]
            else:
                fk = fu[k]
                fl = fu[l]
            C = (chi * tau[e]) * (pos * u[k] * fk - neg * u[l] * fl)
            N = D - C
            G = tau[e] * dv
            su[k] += N
            su[l] += -N
            sv[k] += G
            sv[l] += -G
    return Su, Sv


def cfl_sums(const double[::1] A, const double[::1] v, const cnp.intp_t[::1] ek,
             const cnp.intp_t[::1] el, const double[::1] tau, double p,
             double c_lin, double c_deriv):
    cdef Py_ssize_t n = v.shape[0], ne = ek.shape[0], e, k, l
    cdef cnp.ndarray[double, ndim=1] Sd = np.zeros(n)
    cdef cnp.ndarray[double, ndim=1] Sg = np.zeros(n)
    cdef cnp.ndarray[double, ndim=1] St = np.zeros(n)
    cdef double[::1] sd = Sd, sg = Sg, st = St
    cdef double gp, a, b, w, dvs
    cdef int kexp = _int_exponent(p)
    with nogil:
        for e in range(ne):
            k = ek[e]
            l = el[e]
            if p == 2.0:
                gp = 1.0
            else:
                gp = _gpow(A[l] - A[k], p, kexp)
            a = c_lin * (gp if gp > 1.0 else 1.0)
            b = c_deriv * gp
            w = tau[e] * (a if a > b else b)
            dvs = tau[e] * fabs(v[l] - v[k])
            sd[k] += w
            sd[l] += w
            sg[k] += dvs
            sg[l] += dvs
            st[k] += tau[e]
            st[l] += tau[e]
    return Sd, Sg, St
