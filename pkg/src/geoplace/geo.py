"""Coordinates and great-circle distances."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _backend
from .errors import EmptyInputError, ValidationError

#: Mean Earth radius used by the haversine formula, in kilometres.
EARTH_RADIUS_KM = 6372.8


@dataclass(frozen=True, slots=True)
class GeoPoint:
    """A latitude/longitude pair in decimal degrees."""

    lat: float
    lon: float

    def __post_init__(self):
        lat, lon = float(self.lat), float(self.lon)
        if not (math.isfinite(lat) and -90.0 <= lat <= 90.0):
            raise ValidationError(f"latitude {self.lat!r} outside [-90, 90]")
        if not (math.isfinite(lon) and -180.0 <= lon <= 180.0):
            raise ValidationError(f"longitude {self.lon!r} outside [-180, 180]")
        object.__setattr__(self, "lat", lat)
        object.__setattr__(self, "lon", lon)


def check_radius(r: float) -> float:
    r = float(r)
    if not (math.isfinite(r) and r > 0):
        raise ValidationError(f"sphere radius must be positive, got {r!r}")
    return r


def haversine_km(a: GeoPoint, b: GeoPoint, r: float = EARTH_RADIUS_KM) -> float:
    """Great-circle distance between two points, in units of ``r``.

    The arcsin argument is clamped to ``[0, 1]`` so that floating-point drift
    near antipodal points cannot leave the function's domain.
    """
    if not isinstance(a, GeoPoint) or not isinstance(b, GeoPoint):
        raise ValidationError("haversine_km expects GeoPoint arguments")
    r = check_radius(r)
    # differencing in degrees first is exact for nearby points; converting
    # each coordinate first would cost up to ~1e-11 relative at 100 m
    phi1, phi2 = math.radians(a.lat), math.radians(b.lat)
    dphi = math.radians(b.lat - a.lat)
    dlam = math.radians(b.lon - a.lon)
    s = math.sin(dphi / 2.0) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2.0) ** 2
    s = min(max(s, 0.0), 1.0)
    return 2.0 * r * math.asin(math.sqrt(s))


def coord_arrays(points: Sequence[GeoPoint]) -> tuple[np.ndarray, np.ndarray]:
    """Contiguous float64 latitude/longitude arrays in degrees."""
    lat = np.fromiter((p.lat for p in points), dtype=np.float64, count=len(points))
    lon = np.fromiter((p.lon for p in points), dtype=np.float64, count=len(points))
    return np.ascontiguousarray(lat), np.ascontiguousarray(lon)


def pairwise_distances_km(points: Sequence[GeoPoint], r: float = EARTH_RADIUS_KM) -> np.ndarray:
    """Symmetric matrix of great-circle distances with a zero diagonal."""
    if len(points) == 0:
        raise EmptyInputError("pairwise_distances_km needs at least one point")
    r = check_radius(r)
    lat, lon = coord_arrays(points)
    return _backend.impl.pairwise_km(lat, lon, r)


def distances_from(points: Sequence[GeoPoint], probe: GeoPoint, r: float = EARTH_RADIUS_KM) -> np.ndarray:
    """Distances from ``probe`` to every point, in input order."""
    if len(points) == 0:
        raise EmptyInputError("distances_from needs at least one point")
    r = check_radius(r)
    lat, lon = coord_arrays(points)
    plat, plon = coord_arrays([probe])
    return _backend.impl.distances_km(lat, lon, plat[0], plon[0], r)
