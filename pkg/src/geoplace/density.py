"""Kernel profiles, bandwidth rules and kernel density scores on the sphere.

Scores follow the univariate estimator literally: the kernel is applied to
the great-circle distance divided by the bandwidth and the sum is scaled by
``1 / (n * h)``. The result is comparable across classes but is not a
calibrated two-dimensional density.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from . import _backend
from .errors import EmptyInputError, InsufficientDataError, ValidationError
from .geo import EARTH_RADIUS_KM, GeoPoint, check_radius, distances_from, pairwise_distances_km, coord_arrays

#: Leave-one-out log-likelihood contribution of a sample with zero density.
ZERO_LIKELIHOOD_PENALTY = -1e12


class Kernel(enum.Enum):
    GAUSSIAN = 0
    UNIFORM = 1
    TRIANGULAR = 2
    BIWEIGHT = 3
    TRIWEIGHT = 4
    EPANECHNIKOV = 5
    EXPONENTIAL = 6

    @property
    def compact(self) -> bool:
        return self not in (Kernel.GAUSSIAN, Kernel.EXPONENTIAL)

    @classmethod
    def parse(cls, text: str) -> "Kernel":
        try:
            return cls[text.strip().upper()]
        except KeyError:
            raise ValidationError(f"unknown kernel {text!r}; choose from {[k.name.lower() for k in cls]}") from None


_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def kernel_eval(kernel: Kernel, u: float) -> float:
    """Value of the univariate kernel profile at ``u``.

    Compact kernels vanish for ``|u| >= 1``.
    """
    u = float(u)
    if not math.isfinite(u):
        raise ValidationError(f"kernel argument must be finite, got {u!r}")
    a = abs(u)
    if kernel is Kernel.GAUSSIAN:
        return _INV_SQRT_2PI * math.exp(-0.5 * u * u)
    if kernel is Kernel.EXPONENTIAL:
        return 0.5 * math.exp(-a)
    if a >= 1.0:
        return 0.0
    if kernel is Kernel.UNIFORM:
        return 0.5
    if kernel is Kernel.TRIANGULAR:
        return 1.0 - a
    t = 1.0 - u * u
    if kernel is Kernel.EPANECHNIKOV:
        return 0.75 * t
    if kernel is Kernel.BIWEIGHT:
        return 0.9375 * t * t
    if kernel is Kernel.TRIWEIGHT:
        return 1.09375 * t * t * t
    raise ValidationError(f"unknown kernel {kernel!r}")


@dataclass(frozen=True)
class FixedBandwidth:
    h: float

    def __post_init__(self):
        if not (math.isfinite(self.h) and self.h > 0):
            raise ValidationError(f"bandwidth must be positive, got {self.h!r}")


@dataclass(frozen=True)
class BalloonBandwidth:
    """Bandwidth at a probe = distance to its ``k``-th nearest sample, floored."""

    k: int = 15
    floor_km: float = 0.001

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValidationError(f"balloon k must be an integer >= 1, got {self.k!r}")
        if not (math.isfinite(self.floor_km) and self.floor_km > 0):
            raise ValidationError(f"floor_km must be positive, got {self.floor_km!r}")


BandwidthSpec = Union[FixedBandwidth, BalloonBandwidth]


def default_candidates() -> tuple[float, ...]:
    """16 log-spaced fixed bandwidths from 10 m to 10 km."""
    return tuple(float(h) for h in np.logspace(-2, 1, 16))


@dataclass(frozen=True, eq=False)
class DensityModel:
    samples: tuple[GeoPoint, ...]
    kernel: Kernel = Kernel.GAUSSIAN
    bandwidth: BandwidthSpec = field(default_factory=BalloonBandwidth)
    radius_km: float = EARTH_RADIUS_KM

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))
        if not self.samples:
            raise EmptyInputError("a density model needs at least one sample")
        if not isinstance(self.bandwidth, (FixedBandwidth, BalloonBandwidth)):
            raise ValidationError(f"unsupported bandwidth spec {self.bandwidth!r}")
        check_radius(self.radius_km)
        lat, lon = coord_arrays(self.samples)
        lat.flags.writeable = False
        lon.flags.writeable = False
        object.__setattr__(self, "_lat", lat)
        object.__setattr__(self, "_lon", lon)

    @property
    def n(self) -> int:
        return len(self.samples)

    def __eq__(self, other):
        if not isinstance(other, DensityModel):
            return NotImplemented
        return (self.samples, self.kernel, self.bandwidth, self.radius_km) == (
            other.samples, other.kernel, other.bandwidth, other.radius_km)

    def __hash__(self):
        return hash((self.samples, self.kernel, self.bandwidth, self.radius_km))

    def bandwidths(self, plats: np.ndarray, plons: np.ndarray) -> np.ndarray:
        """Per-probe bandwidths for probes given in degrees."""
        bw = self.bandwidth
        if isinstance(bw, FixedBandwidth):
            return np.full(plats.shape[0], bw.h)
        kth = _backend.impl.kth_distance(self._lat, self._lon, plats, plons, self.radius_km, bw.k)
        return np.maximum(kth, bw.floor_km)

    def scores(self, plats: np.ndarray, plons: np.ndarray, hs: Optional[np.ndarray] = None) -> np.ndarray:
        """Scores at many probes (degrees); ``hs`` overrides the bandwidth rule."""
        plats = np.ascontiguousarray(plats, dtype=np.float64)
        plons = np.ascontiguousarray(plons, dtype=np.float64)
        bw = self.bandwidth
        if hs is None and isinstance(bw, BalloonBandwidth):
            scores, _ = _backend.impl.kde_balloon(self._lat, self._lon, plats, plons, self.radius_km,
                                                  self.kernel.value, bw.k, bw.floor_km)
            return scores
        if hs is None:
            hs = self.bandwidths(plats, plons)
        return _backend.impl.kde_sum(self._lat, self._lon, plats, plons, self.radius_km, self.kernel.value, hs)


def knn_distance_km(samples: Sequence[GeoPoint], probe: GeoPoint, k: int, r: float = EARTH_RADIUS_KM) -> float:
    """k-th smallest distance from ``probe`` to the samples (the largest when ``k > n``)."""
    if int(k) != k or k < 1:
        raise ValidationError(f"k must be an integer >= 1, got {k!r}")
    if len(samples) == 0:
        raise EmptyInputError("knn_distance_km needs at least one sample")
    d = np.sort(distances_from(samples, probe, r))
    return float(d[min(int(k), d.size) - 1])


def kde_score(model: DensityModel, probe: GeoPoint) -> float:
    plat, plon = coord_arrays([probe])
    return float(model.scores(plat, plon)[0])


def loo_log_likelihood(distances: np.ndarray, kernel: Kernel, h: float, dim: int = 1) -> float:
    """Leave-one-out log pseudo-likelihood of a fixed bandwidth ``h``.

    Each held-out term is ``sum_j K(d_ij / h) / ((n - 1) * h**dim)``.
    """
    d = np.ascontiguousarray(distances, dtype=np.float64)
    n = d.shape[0]
    norm = (n - 1) * float(h) ** dim
    return float(_backend.impl.loo_loglik(d, kernel.value, float(h), norm, ZERO_LIKELIHOOD_PENALTY))


def select_bandwidth_cv(samples: Sequence[GeoPoint], candidates: Optional[Sequence[float]] = None,
                        kernel: Kernel = Kernel.GAUSSIAN, r: float = EARTH_RADIUS_KM, dim: int = 1) -> float:
    """Candidate bandwidth with the highest leave-one-out log-likelihood.

    Zero-density terms cost ``ZERO_LIKELIHOOD_PENALTY`` each; ties go to the
    smaller candidate. ``dim=1`` scores held-out points with the same
    ``1 / (n h)`` estimator used for classification; ``dim=2`` normalises by
    ``h**2`` as a planar density would, which stops the likelihood from
    drifting towards oversmoothed bandwidths on two-dimensional data.
    """
    if dim not in (1, 2):
        raise ValidationError(f"dim must be 1 or 2, got {dim!r}")
    if len(samples) < 2:
        raise InsufficientDataError("bandwidth cross-validation needs at least 2 samples")
    candidates = default_candidates() if candidates is None else tuple(float(h) for h in candidates)
    if not candidates:
        raise ValidationError("need at least one candidate bandwidth")
    if any(not (math.isfinite(h) and h > 0) for h in candidates):
        raise ValidationError("candidate bandwidths must be positive")
    d = pairwise_distances_km(samples, r)
    best_h, best_ll = None, -math.inf
    for h in sorted(candidates):
        ll = loo_log_likelihood(d, kernel, h, dim)
        if best_h is None or ll > best_ll:
            best_h, best_ll = h, ll
    return best_h
