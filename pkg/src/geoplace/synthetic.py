"""Seeded synthetic place datasets for benchmarks, tests and demos."""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .geo import EARTH_RADIUS_KM, GeoPoint
from .labels import LABELS, LabeledPlace, SemanticLabel

LAUSANNE = GeoPoint(46.5197, 6.6323)

#: Relative label frequencies of a small annotated place corpus, in label order.
LABEL_FREQUENCIES = (14, 19, 31, 124, 76, 34, 142, 24, 10, 14)


def offset_point(origin: GeoPoint, north_km: float, east_km: float, r: float = EARTH_RADIUS_KM) -> GeoPoint:
    """Local tangent-plane offset; accurate for displacements of tens of kilometres."""
    lat = origin.lat + math.degrees(north_km / r)
    lon = origin.lon + math.degrees(east_km / (r * math.cos(math.radians(origin.lat))))
    return GeoPoint(lat, lon)


def gaussian_clump(rng: np.random.Generator, center: GeoPoint, spread_km: float, n: int) -> list[GeoPoint]:
    xy = rng.normal(scale=spread_km, size=(n, 2))
    return [offset_point(center, float(y), float(x)) for x, y in xy]


def two_clumps(n_per_class: int = 200, separation_km: float = 20.0, spread_km: float = 1.0, seed: int = 0,
               center: GeoPoint = LAUSANNE,
               labels: Sequence[SemanticLabel] = (SemanticLabel.HOME, SemanticLabel.WORK)) -> list[LabeledPlace]:
    """Two isotropic Gaussian clumps ``separation_km`` apart along the east-west axis."""
    rng = np.random.default_rng(seed)
    places = []
    for j, label in enumerate(labels):
        c = offset_point(center, 0.0, (j - 0.5) * separation_km)
        for i, p in enumerate(gaussian_clump(rng, c, spread_km, n_per_class)):
            places.append(LabeledPlace(f"{label.name.lower()}-{i}", p, label))
    return places


def two_clump_bayes_accuracy(separation_km: float, spread_km: float) -> float:
    """Bayes-optimal accuracy for two equally likely isotropic Gaussian clumps of equal spread.

    The optimal boundary is the perpendicular bisector, so the accuracy is
    ``Phi(separation / (2 * spread))``.
    """
    z = separation_km / (2.0 * spread_km)
    return 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))


def synthetic_city(seed: int = 0, n_places: int = 488, grid: int = 3, spacing_km: float = 2.5,
                   spread_km: tuple[float, float] = (0.25, 0.5), concentration: float = 0.5,
                   district_weight: float = 0.7, rural_fraction: float = 0.15, rural_extent_km: float = 15.0,
                   center: GeoPoint = LAUSANNE) -> list[LabeledPlace]:
    """Dense districts on a ``grid x grid`` lattice plus a sparse rural scatter.

    Districts are Gaussian clumps a few hundred metres wide separated by
    empty gaps. Each has its own label mix, a Dirichlet draw blended with the
    global frequencies ``LABEL_FREQUENCIES`` (``district_weight`` sets the
    blend). Rural places are uniform over a square of half-width
    ``rural_extent_km`` and follow the global frequencies.
    """
    rng = np.random.default_rng(seed)
    freq = np.asarray(LABEL_FREQUENCIES, dtype=float)
    freq /= freq.sum()
    offsets = [((i - (grid - 1) / 2) * spacing_km, (j - (grid - 1) / 2) * spacing_km)
               for i in range(grid) for j in range(grid)]
    districts = [(offset_point(center, n, e), float(rng.uniform(*spread_km))) for n, e in offsets]
    mixes = rng.dirichlet(np.full(len(LABELS), concentration), size=len(districts)) * district_weight \
        + freq * (1.0 - district_weight)

    places = []
    for i in range(n_places):
        if rng.random() < rural_fraction:
            north, east = rng.uniform(-rural_extent_km, rural_extent_km, size=2)
            loc = offset_point(center, float(north), float(east))
            label = LABELS[rng.choice(len(LABELS), p=freq)]
        else:
            d = int(rng.integers(len(districts)))
            loc = gaussian_clump(rng, districts[d][0], districts[d][1], 1)[0]
            label = LABELS[rng.choice(len(LABELS), p=mixes[d])]
        places.append(LabeledPlace(f"p{i:04d}", loc, label))
    return places
