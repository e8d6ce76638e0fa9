# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled numerical core; same contract as ``geoplace._pure`` (degrees in)."""
import numpy as np

from libc.math cimport asin, cos, exp, fabs, log, sin, sqrt
from libc.stdlib cimport free, malloc

NAME = "cython"

cdef double INV_SQRT_2PI = 0.3989422804014327
cdef double DEG = 3.141592653589793 / 180.0


cdef inline double kern(int code, double u) noexcept nogil:
    cdef double a = fabs(u)
    cdef double t
    if code == 0:
        return INV_SQRT_2PI * exp(-0.5 * u * u)
    if code == 6:
        return 0.5 * exp(-a)
    if a >= 1.0:
        return 0.0
    if code == 1:
        return 0.5
    if code == 2:
        return 1.0 - a
    t = 1.0 - u * u
    if code == 3:
        return 0.9375 * t * t
    if code == 4:
        return 1.09375 * t * t * t
    return 0.75 * t


cdef inline double hav(double lat1, double lon1, double clat1,
                       double lat2, double lon2, double clat2, double r) noexcept nogil:
    # clat1/clat2 are the latitude cosines; differences are taken in degrees
    cdef double a = sin((lat2 - lat1) * DEG / 2.0)
    cdef double b = sin((lon2 - lon1) * DEG / 2.0)
    cdef double s = a * a + clat1 * clat2 * b * b
    if s < 0.0:
        s = 0.0
    elif s > 1.0:
        s = 1.0
    return 2.0 * r * asin(sqrt(s))


cdef double select_kth(double* buf, Py_ssize_t n, Py_ssize_t k) noexcept nogil:
    # in-place quickselect for the k-th smallest (0-based)
    cdef Py_ssize_t lo = 0, hi = n - 1, i, j
    cdef double pivot, tmp
    while lo < hi:
        pivot = buf[(lo + hi) // 2]
        i = lo
        j = hi
        while i <= j:
            while buf[i] < pivot:
                i += 1
            while buf[j] > pivot:
                j -= 1
            if i <= j:
                tmp = buf[i]
                buf[i] = buf[j]
                buf[j] = tmp
                i += 1
                j -= 1
        if k <= j:
            hi = j
        elif k >= i:
            lo = i
        else:
            break
    return buf[k]


def kernel_values(int code, u):
    if code < 0 or code > 6:
        raise ValueError(f"unknown kernel code {code}")
    cdef double[::1] uu = np.ascontiguousarray(u, dtype=np.float64).ravel()
    out = np.empty(uu.shape[0], dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(uu.shape[0]):
            o[i] = kern(code, uu[i])
    return out.reshape(np.shape(u))


def distances_km(const double[::1] lat, const double[::1] lon, double plat, double plon, double r):
    cdef Py_ssize_t n = lat.shape[0], i
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef double cp = cos(plat * DEG)
    with nogil:
        for i in range(n):
            o[i] = hav(plat, plon, cp, lat[i], lon[i], cos(lat[i] * DEG), r)
    return out


def pairwise_km(const double[::1] lat, const double[::1] lon, double r):
    cdef Py_ssize_t n = lat.shape[0], i, j
    out = np.zeros((n, n), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef double d
    cdef double* c = <double*> malloc(n * sizeof(double))
    if c == NULL:
        raise MemoryError()
    try:
        with nogil:
            for i in range(n):
                c[i] = cos(lat[i] * DEG)
            for i in range(n):
                for j in range(i + 1, n):
                    d = hav(lat[i], lon[i], c[i], lat[j], lon[j], c[j], r)
                    o[i, j] = d
                    o[j, i] = d
    finally:
        free(c)
    return out


def kth_distance(const double[::1] lat, const double[::1] lon,
                 const double[::1] plats, const double[::1] plons, double r, Py_ssize_t k):
    cdef Py_ssize_t n = lat.shape[0], m = plats.shape[0], i, p
    cdef Py_ssize_t kk = (k if k < n else n) - 1
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] o = out
    cdef double* buf = <double*> malloc(n * sizeof(double))
    cdef double* c = <double*> malloc(n * sizeof(double))
    cdef double cp
    if buf == NULL or c == NULL:
        free(buf)
        free(c)
        raise MemoryError()
    try:
        with nogil:
            for i in range(n):
                c[i] = cos(lat[i] * DEG)
            for p in range(m):
                cp = cos(plats[p] * DEG)
                for i in range(n):
                    buf[i] = hav(plats[p], plons[p], cp, lat[i], lon[i], c[i], r)
                o[p] = select_kth(buf, n, kk)
    finally:
        free(buf)
        free(c)
    return out


cdef inline double kde_row(const double[::1] lat, const double[::1] lon, const double* c,
                           double plat, double plon, double cp, double r, int code, double h,
                           double lat_cut) noexcept nogil:
    # lat_cut > 0: compact kernel; samples whose latitude gap alone exceeds the
    # support cannot contribute (great-circle distance >= r * |dlat|)
    cdef Py_ssize_t i
    cdef double total = 0.0
    for i in range(lat.shape[0]):
        if lat_cut > 0.0 and fabs(lat[i] - plat) > lat_cut:
            continue
        total += kern(code, hav(plat, plon, cp, lat[i], lon[i], c[i], r) / h)
    return total


cdef inline double support_cut(int code, double h, double r) noexcept nogil:
    if code == 0 or code == 6:
        return 0.0
    # degrees of latitude spanning the support, padded against round-off
    return h / (r * DEG) * (1.0 + 1e-9) + 1e-12


def kde_sum(const double[::1] lat, const double[::1] lon,
            const double[::1] plats, const double[::1] plons, double r, int code, hs):
    cdef double[::1] h = np.ascontiguousarray(hs, dtype=np.float64)
    cdef Py_ssize_t n = lat.shape[0], m = plats.shape[0], i, p
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] o = out
    cdef double cp, hp
    cdef double* c = <double*> malloc(n * sizeof(double))
    if c == NULL:
        raise MemoryError()
    try:
        with nogil:
            for i in range(n):
                c[i] = cos(lat[i] * DEG)
            for p in range(m):
                cp = cos(plats[p] * DEG)
                hp = h[p]
                o[p] = kde_row(lat, lon, c, plats[p], plons[p], cp, r, code, hp,
                               support_cut(code, hp, r)) / (n * hp)
    finally:
        free(c)
    return out


def kde_balloon(const double[::1] lat, const double[::1] lon,
                const double[::1] plats, const double[::1] plons, double r, int code,
                Py_ssize_t k, double floor):
    cdef Py_ssize_t n = lat.shape[0], m = plats.shape[0], i, p
    cdef Py_ssize_t kk = (k if k < n else n) - 1
    out = np.empty(m, dtype=np.float64)
    hs_out = np.empty(m, dtype=np.float64)
    cdef double[::1] o = out
    cdef double[::1] ho = hs_out
    cdef double cp, hp, total
    cdef double* c = <double*> malloc(n * sizeof(double))
    cdef double* d = <double*> malloc(n * sizeof(double))
    cdef double* buf = <double*> malloc(n * sizeof(double))
    if c == NULL or d == NULL or buf == NULL:
        free(c)
        free(d)
        free(buf)
        raise MemoryError()
    try:
        with nogil:
            for i in range(n):
                c[i] = cos(lat[i] * DEG)
            for p in range(m):
                cp = cos(plats[p] * DEG)
                for i in range(n):
                    d[i] = hav(plats[p], plons[p], cp, lat[i], lon[i], c[i], r)
                    buf[i] = d[i]
                hp = select_kth(buf, n, kk)
                if hp < floor:
                    hp = floor
                total = 0.0
                for i in range(n):
                    total += kern(code, d[i] / hp)
                o[p] = total / (n * hp)
                ho[p] = hp
    finally:
        free(c)
        free(d)
        free(buf)
    return out, hs_out


def loo_loglik(const double[:, ::1] d, int code, double h, double norm, double penalty):
    cdef Py_ssize_t n = d.shape[0], i, j
    cdef double acc = 0.0, s, f
    with nogil:
        for i in range(n):
            s = 0.0
            for j in range(n):
                if j != i:
                    s += kern(code, d[i, j] / h)
            f = s / norm
            if f > 0.0:
                acc += log(f)
            else:
                acc += penalty
    return acc
