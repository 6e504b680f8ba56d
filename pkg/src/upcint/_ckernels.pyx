# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport log, exp, sqrt, cos, expm1, INFINITY
from scipy.special.cython_special cimport j0 as _j0

from ._bessel_coeffs import K0_ASYMPTOTIC, K1_ASYMPTOTIC

cnp.import_array()

DEF HBARC = 197.3269804
DEF EULER_GAMMA = 0.57721566490153286061
DEF NSERIES = 22
DEF NCHEB = 64

cdef double _c0[NCHEB]
cdef double _c1[NCHEB]
cdef int _n0 = len(K0_ASYMPTOTIC)
cdef int _n1 = len(K1_ASYMPTOTIC)

for _i in range(_n0):
    _c0[_i] = K0_ASYMPTOTIC[_i]
for _i in range(_n1):
    _c1[_i] = K1_ASYMPTOTIC[_i]


cdef inline double _clenshaw(const double* c, int n, double s) nogil:
    cdef double b1 = 0.0, b2 = 0.0, tmp
    cdef int k
    for k in range(n - 1, 0, -1):
        tmp = b1
        b1 = 2.0 * s * b1 - b2 + c[k]
        b2 = tmp
    return s * b1 - b2 + c[0]


cdef inline double _k0(double x) nogil:
    cdef double h, term, i0, reg, harmonic
    cdef int k
    if x > 2.0:
        return _clenshaw(_c0, _n0, 4.0 / x - 1.0) * exp(-x) / sqrt(x)
    h = 0.25 * x * x
    term = 1.0
    i0 = 1.0
    reg = 0.0
    harmonic = 0.0
    for k in range(1, NSERIES):
        term = term * h / (k * k)
        harmonic += 1.0 / k
        i0 += term
        reg += term * harmonic
    return -(log(0.5 * x) + EULER_GAMMA) * i0 + reg


cdef inline double _k1(double x) nogil:
    cdef double h, term, i1, psi_sum, acc, harmonic
    cdef int k
    if x > 2.0:
        return _clenshaw(_c1, _n1, 4.0 / x - 1.0) * exp(-x) / sqrt(x)
    h = 0.25 * x * x
    term = 1.0
    i1 = 1.0
    psi_sum = 1.0 - 2.0 * EULER_GAMMA
    acc = psi_sum
    harmonic = 0.0
    for k in range(1, NSERIES):
        term = term * h / (k * (k + 1))
        harmonic += 1.0 / k
        psi_sum = 2.0 * harmonic + 1.0 / (k + 1) - 2.0 * EULER_GAMMA
        i1 += term
        acc += psi_sum * term
    i1 = 0.5 * x * i1
    return 1.0 / x + log(0.5 * x) * i1 - 0.25 * x * acc


cdef inline double _eta(int kind, double value, double b, double pt,
                        double mass, double cosh_y, double ctau) nogil:
    cdef double omega
    if kind == 0:
        return value
    if kind == 1:
        omega = sqrt(mass * mass + pt * pt) * cosh_y
        return -expm1(-mass * b / (omega * ctau))
    if pt > 0.0:
        return -expm1(-mass * b / pt / ctau)
    return 1.0


def bessel_k0(x):
    cdef cnp.ndarray[double, ndim=1] xa = np.ascontiguousarray(x, dtype=float).ravel()
    cdef cnp.ndarray[double, ndim=1] out = np.empty_like(xa)
    cdef Py_ssize_t i, n = xa.shape[0]
    with nogil:
        for i in range(n):
            out[i] = _k0(xa[i])
    return out.reshape(np.shape(x))


def bessel_k1(x):
    cdef cnp.ndarray[double, ndim=1] xa = np.ascontiguousarray(x, dtype=float).ravel()
    cdef cnp.ndarray[double, ndim=1] out = np.empty_like(xa)
    cdef Py_ssize_t i, n = xa.shape[0]
    with nogil:
        for i in range(n):
            out[i] = _k1(xa[i])
    return out.reshape(np.shape(x))


def flux_shape(k, b, double gamma):
    kb, bb = np.broadcast_arrays(np.asarray(k, dtype=float), np.asarray(b, dtype=float))
    shape = kb.shape
    cdef cnp.ndarray[double, ndim=1] ka = np.ascontiguousarray(kb).ravel()
    cdef cnp.ndarray[double, ndim=1] ba = np.ascontiguousarray(bb).ravel()
    cdef cnp.ndarray[double, ndim=1] out = np.empty_like(ka)
    cdef Py_ssize_t i, n = ka.shape[0]
    cdef double x, v0, v1, g2 = gamma * gamma
    with nogil:
        for i in range(n):
            x = ka[i] * ba[i] / (gamma * HBARC)
            v0 = _k0(x)
            v1 = _k1(x)
            out[i] = x * x / (ka[i] * ba[i] * ba[i]) * (v1 * v1 + v0 * v0 / g2)
    return out.reshape(shape)


def eta_values(int kind, double value, b, pt, double mass, double cosh_y, double ctau):
    bb, pp = np.broadcast_arrays(np.asarray(b, dtype=float), np.asarray(pt, dtype=float))
    shape = bb.shape
    cdef cnp.ndarray[double, ndim=1] ba = np.ascontiguousarray(bb).ravel()
    cdef cnp.ndarray[double, ndim=1] pa = np.ascontiguousarray(pp).ravel()
    cdef cnp.ndarray[double, ndim=1] out = np.empty_like(ba)
    cdef Py_ssize_t i, n = ba.shape[0]
    with nogil:
        for i in range(n):
            out[i] = _eta(kind, value, ba[i], pa[i], mass, cosh_y, ctau)
    return out.reshape(shape)


def point_rate(pt, b, phi, cmag, delta, eta, a1sq):
    arrs = np.broadcast_arrays(*[np.asarray(v, dtype=float) for v in (pt, b, phi, cmag, delta, eta, a1sq)])
    shape = arrs[0].shape
    cdef cnp.ndarray[double, ndim=1] p_ = np.ascontiguousarray(arrs[0]).ravel()
    cdef cnp.ndarray[double, ndim=1] b_ = np.ascontiguousarray(arrs[1]).ravel()
    cdef cnp.ndarray[double, ndim=1] f_ = np.ascontiguousarray(arrs[2]).ravel()
    cdef cnp.ndarray[double, ndim=1] c_ = np.ascontiguousarray(arrs[3]).ravel()
    cdef cnp.ndarray[double, ndim=1] d_ = np.ascontiguousarray(arrs[4]).ravel()
    cdef cnp.ndarray[double, ndim=1] e_ = np.ascontiguousarray(arrs[5]).ravel()
    cdef cnp.ndarray[double, ndim=1] a_ = np.ascontiguousarray(arrs[6]).ravel()
    cdef cnp.ndarray[double, ndim=1] out = np.empty_like(p_)
    cdef Py_ssize_t i, n = p_.shape[0]
    cdef double phase
    with nogil:
        for i in range(n):
            phase = p_[i] * b_[i] * cos(f_[i]) / HBARC + d_[i]
            out[i] = a_[i] * (1.0 + c_[i] * c_[i] - 2.0 * c_[i] * (1.0 - e_[i]) * cos(phase))
    return out.reshape(shape)


def coherent_b_sums(pt, bnodes, weights, int kind, double value,
                    double mass, double cosh_y, double ctau):
    cdef cnp.ndarray[double, ndim=1] pa = np.ascontiguousarray(pt, dtype=float)
    cdef cnp.ndarray[double, ndim=1] ba = np.ascontiguousarray(bnodes, dtype=float)
    cdef cnp.ndarray[double, ndim=1] wa = np.ascontiguousarray(weights, dtype=float)
    cdef cnp.ndarray[double, ndim=1] out = np.empty(pa.shape[0])
    cdef Py_ssize_t i, j, npt = pa.shape[0], nb = ba.shape[0]
    cdef double acc, p
    with nogil:
        for i in range(npt):
            p = pa[i]
            acc = 0.0
            # fixed sequential order: result independent of how pt is chunked
            for j in range(nb):
                acc += wa[j] * (1.0 - _eta(kind, value, ba[j], p, mass, cosh_y, ctau)) * _j0(p * ba[j] / HBARC)
            out[i] = acc
    return out
