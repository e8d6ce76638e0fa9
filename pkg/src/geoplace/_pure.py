"""NumPy implementations of the numerical core.

Used when the compiled ``_core`` extension is unavailable, and as the
reference the compiled routines are benchmarked and tested against.
Coordinates are degrees and all arrays float64. Coordinate differences are
taken in degrees before conversion, which is exact for nearby points, so
short distances keep full relative precision.
"""
import numpy as np

NAME = "numpy"

_INV_SQRT_2PI = 0.3989422804014327


def kernel_values(code, u):
    u = np.asarray(u, dtype=np.float64)
    a = np.abs(u)
    inside = a < 1.0
    if code == 0:
        return _INV_SQRT_2PI * np.exp(-0.5 * u * u)
    if code == 1:
        return np.where(inside, 0.5, 0.0)
    if code == 2:
        return np.where(inside, 1.0 - a, 0.0)
    if code == 3:
        t = 1.0 - u * u
        return np.where(inside, 0.9375 * t * t, 0.0)
    if code == 4:
        t = 1.0 - u * u
        return np.where(inside, 1.09375 * t * t * t, 0.0)
    if code == 5:
        return np.where(inside, 0.75 * (1.0 - u * u), 0.0)
    if code == 6:
        return 0.5 * np.exp(-a)
    raise ValueError(f"unknown kernel code {code}")


_DEG = np.pi / 180.0


def _haversine(lat1, lon1, lat2, lon2, r):
    s = (np.sin((lat2 - lat1) * _DEG / 2.0) ** 2
         + np.cos(lat1 * _DEG) * np.cos(lat2 * _DEG) * np.sin((lon2 - lon1) * _DEG / 2.0) ** 2)
    return 2.0 * r * np.arcsin(np.sqrt(np.clip(s, 0.0, 1.0)))


def distances_km(lat, lon, plat, plon, r):
    return _haversine(plat, plon, lat, lon, r)


def pairwise_km(lat, lon, r):
    n = lat.shape[0]
    d = _haversine(lat[:, None], lon[:, None], lat[None, :], lon[None, :], r)
    # mirror the upper triangle so the matrix is exactly symmetric
    iu = np.triu_indices(n, 1)
    d[(iu[1], iu[0])] = d[iu]
    np.fill_diagonal(d, 0.0)
    return d


def _probe_distances(lat, lon, plats, plons, r):
    return _haversine(plats[:, None], plons[:, None], lat[None, :], lon[None, :], r)


def kth_distance(lat, lon, plats, plons, r, k):
    n = lat.shape[0]
    kk = min(int(k), n) - 1
    d = _probe_distances(lat, lon, plats, plons, r)
    return np.partition(d, kk, axis=1)[:, kk]


def kde_sum(lat, lon, plats, plons, r, code, hs):
    n = lat.shape[0]
    hs = np.asarray(hs, dtype=np.float64)
    d = _probe_distances(lat, lon, plats, plons, r)
    total = kernel_values(code, d / hs[:, None]).sum(axis=1)
    return total / (n * hs)


def kde_balloon(lat, lon, plats, plons, r, code, k, floor):
    """Balloon scores with one distance evaluation per pair; returns (scores, bandwidths)."""
    n = lat.shape[0]
    kk = min(int(k), n) - 1
    d = _probe_distances(lat, lon, plats, plons, r)
    hs = np.maximum(np.partition(d, kk, axis=1)[:, kk], floor)
    total = kernel_values(code, d / hs[:, None]).sum(axis=1)
    return total / (n * hs), hs


def loo_loglik(dmat, code, h, norm, penalty):
    n = dmat.shape[0]
    k = kernel_values(code, dmat / h)
    np.fill_diagonal(k, 0.0)
    f = k.sum(axis=1) / norm
    ok = f > 0.0
    with np.errstate(divide="ignore"):
        logs = np.log(np.where(ok, f, 1.0))
    return float(np.sum(np.where(ok, logs, penalty)))
