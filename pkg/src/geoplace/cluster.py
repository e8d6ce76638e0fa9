"""DBSCAN over great-circle distances and probe-to-region lookup."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import _backend
from .errors import EmptyInputError, ValidationError
from .geo import EARTH_RADIUS_KM, GeoPoint, pairwise_distances_km, coord_arrays

NOISE = -1


@dataclass(frozen=True)
class DbscanParams:
    """Neighbourhood radius ``eps_km`` and minimum neighbourhood size ``min_pts``.

    ``min_pts`` counts the query point itself.
    """

    eps_km: float = 0.5
    min_pts: int = 4

    def __post_init__(self):
        if not (math.isfinite(self.eps_km) and self.eps_km > 0):
            raise ValidationError(f"eps_km must be positive, got {self.eps_km!r}")
        if int(self.min_pts) != self.min_pts or self.min_pts < 1:
            raise ValidationError(f"min_pts must be an integer >= 1, got {self.min_pts!r}")


@dataclass(frozen=True, eq=False)
class ClusterAssignment:
    labels: np.ndarray
    core_flags: np.ndarray
    points: tuple[GeoPoint, ...]
    params: DbscanParams
    radius_km: float = EARTH_RADIUS_KM

    @property
    def n_clusters(self) -> int:
        return int(self.labels.max()) + 1 if len(self.labels) and self.labels.max() >= 0 else 0

    def members(self, cluster_id: int) -> np.ndarray:
        return np.flatnonzero(self.labels == cluster_id)


def dbscan(points: Sequence[GeoPoint], params: DbscanParams, r: float = EARTH_RADIUS_KM) -> ClusterAssignment:
    """Cluster ``points`` following the classic visit/expand procedure.

    Neighbourhoods are inclusive (``d <= eps_km``) and contain the query
    point. Points are visited in input order, so a border point reachable
    from two clusters joins whichever reaches it first.
    """
    points = tuple(points)
    if not points:
        raise EmptyInputError("dbscan needs at least one point")
    n = len(points)
    within = pairwise_distances_km(points, r) <= params.eps_km
    neighbours = [np.flatnonzero(row) for row in within]
    core = np.fromiter((len(nb) >= params.min_pts for nb in neighbours), dtype=bool, count=n)

    labels = np.full(n, NOISE, dtype=np.int64)
    member = np.zeros(n, dtype=bool)
    visited = np.zeros(n, dtype=bool)
    cluster = -1
    for v in range(n):
        if visited[v]:
            continue
        visited[v] = True
        if not core[v]:
            continue  # NOISE unless a later cluster claims it
        cluster += 1
        labels[v] = cluster
        member[v] = True
        seeds = list(neighbours[v])
        queued = np.zeros(n, dtype=bool)
        queued[seeds] = True
        i = 0
        while i < len(seeds):
            w = seeds[i]
            i += 1
            if not visited[w]:
                visited[w] = True
                if core[w]:
                    fresh = neighbours[w][~queued[neighbours[w]]]
                    queued[fresh] = True
                    seeds.extend(fresh.tolist())
            if not member[w]:
                labels[w] = cluster
                member[w] = True
    return ClusterAssignment(labels=labels, core_flags=core, points=points, params=params, radius_km=r)


def region_of(assignment: ClusterAssignment, probe: GeoPoint, params: Optional[DbscanParams] = None) -> Optional[int]:
    """Cluster id of the nearest core point within ``eps_km`` of ``probe``, else ``None``.

    Equidistant core points from different clusters resolve to the smaller id.
    """
    plat, plon = coord_arrays([probe])
    region = regions_of(assignment, plat, plon, params)[0]
    return None if region == NOISE else int(region)


def regions_of(assignment: ClusterAssignment, plats: np.ndarray, plons: np.ndarray,
               params: Optional[DbscanParams] = None) -> np.ndarray:
    """Vectorised :func:`region_of` for probes in degrees; ``NOISE`` marks no region."""
    params = params or assignment.params
    out = np.full(len(plats), NOISE, dtype=np.int64)
    core_idx = np.flatnonzero(assignment.core_flags)
    if core_idx.size == 0:
        return out
    lat, lon = coord_arrays([assignment.points[i] for i in core_idx])
    ids = assignment.labels[core_idx]
    for p in range(len(plats)):
        d = _backend.impl.distances_km(lat, lon, float(plats[p]), float(plons[p]), assignment.radius_km)
        ok = d <= params.eps_km
        if ok.any():
            dd = d[ok]
            out[p] = ids[ok][dd == dd.min()].min()
    return out
