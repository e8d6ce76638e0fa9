"""Rasterise a fitted classifier over a lat/lon box and export GeoJSON."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .classify import ClassifierModel, ClassScores
from .errors import BudgetError, ValidationError
from .geo import GeoPoint, check_radius
from .labels import LABELS, SemanticLabel

MAX_CELLS = 10_000_000


@dataclass(frozen=True)
class BoundingBox:
    min_lat: float
    max_lat: float
    min_lon: float
    max_lon: float

    def __post_init__(self):
        GeoPoint(self.min_lat, self.min_lon)
        GeoPoint(self.max_lat, self.max_lon)
        if not (self.min_lat < self.max_lat and self.min_lon < self.max_lon):
            raise ValidationError("bounding box needs min_lat < max_lat and min_lon < max_lon")

    @classmethod
    def parse(cls, text: str) -> "BoundingBox":
        """``minLat,minLon,maxLat,maxLon``."""
        try:
            min_lat, min_lon, max_lat, max_lon = (float(x) for x in text.split(","))
        except ValueError:
            raise ValidationError(f"bbox must be 'minLat,minLon,maxLat,maxLon', got {text!r}") from None
        return cls(min_lat, max_lat, min_lon, max_lon)


@dataclass(frozen=True)
class Cell:
    row: int
    col: int
    south: float
    north: float
    west: float
    east: float
    predicted: SemanticLabel
    scores: ClassScores

    @property
    def center(self) -> GeoPoint:
        return GeoPoint((self.south + self.north) / 2.0, (self.west + self.east) / 2.0)


@dataclass(frozen=True, eq=False)
class AnnotatedGrid:
    """Row 0 is the southern edge, column 0 the western edge."""

    bbox: BoundingBox
    cell_m: float
    lat_edges: np.ndarray
    lon_edges: np.ndarray
    predicted: np.ndarray   # (rows, cols) label indices
    scores: np.ndarray      # (rows, cols, 10)
    regions: np.ndarray     # (rows, cols), -1 for global scoring
    present: tuple[bool, ...]

    @property
    def rows(self) -> int:
        return len(self.lat_edges) - 1

    @property
    def cols(self) -> int:
        return len(self.lon_edges) - 1

    def cell(self, row: int, col: int) -> Cell:
        region = int(self.regions[row, col])
        scores = ClassScores(tuple(float(s) for s in self.scores[row, col]), self.present,
                             None if region < 0 else region)
        return Cell(row, col, float(self.lat_edges[row]), float(self.lat_edges[row + 1]),
                    float(self.lon_edges[col]), float(self.lon_edges[col + 1]),
                    LABELS[int(self.predicted[row, col])], scores)

    def cells(self):
        for r in range(self.rows):
            for c in range(self.cols):
                yield self.cell(r, c)


def grid_shape(bbox: BoundingBox, cell_m: float, r_km: float) -> tuple[int, int]:
    """Rows and columns needed so no cell exceeds ``cell_m`` on a side.

    The east-west extent is measured at the box's mid-latitude.
    """
    if not (math.isfinite(cell_m) and cell_m > 0):
        raise ValidationError(f"cell size must be positive, got {cell_m!r}")
    r_m = check_radius(r_km) * 1000.0
    ns = math.radians(bbox.max_lat - bbox.min_lat) * r_m
    mid = math.radians((bbox.min_lat + bbox.max_lat) / 2.0)
    ew = math.radians(bbox.max_lon - bbox.min_lon) * r_m * math.cos(mid)
    # tolerate round-off so an exact 1000 m / 500 m gives 2, not 3
    rows = max(1, math.ceil(ns / cell_m - 1e-9))
    cols = max(1, math.ceil(ew / cell_m - 1e-9))
    return rows, cols


def _edges(lo: float, hi: float, n: int) -> np.ndarray:
    e = lo + (hi - lo) * np.arange(n + 1) / n
    e[0], e[-1] = lo, hi
    return e


def annotate_grid(model: ClassifierModel, bbox: BoundingBox, cell_m: float, chunk: int = 4096) -> AnnotatedGrid:
    """Predict a label at the centre of every cell of an even lat/lon grid over ``bbox``.

    The box is split into equal rows and columns; cells are at most ``cell_m``
    metres on a side.
    """
    rows, cols = grid_shape(bbox, cell_m, model.config.radius_km)
    if rows * cols > MAX_CELLS:
        raise BudgetError(f"grid of {rows}x{cols} cells exceeds the {MAX_CELLS} cell budget; use a larger cell size")
    lat_e = _edges(bbox.min_lat, bbox.max_lat, rows)
    lon_e = _edges(bbox.min_lon, bbox.max_lon, cols)
    lat_c = (lat_e[:-1] + lat_e[1:]) / 2.0
    lon_c = (lon_e[:-1] + lon_e[1:]) / 2.0
    plat = np.repeat(lat_c, cols)
    plon = np.tile(lon_c, rows)
    scores = np.empty((rows * cols, len(LABELS)))
    regions = np.empty(rows * cols, dtype=np.int64)
    for start in range(0, rows * cols, chunk):
        sl = slice(start, start + chunk)
        scores[sl], regions[sl] = model.score_matrix(plat[sl], plon[sl])
    present = np.asarray(model.present)
    predicted = np.argmax(np.where(present, scores, -np.inf), axis=1)
    return AnnotatedGrid(bbox, float(cell_m), lat_e, lon_e, predicted.reshape(rows, cols),
                         scores.reshape(rows, cols, len(LABELS)), regions.reshape(rows, cols), model.present)


def _coord(x: float) -> str:
    return f"{x:.6f}"


def _score(x: float) -> str:
    return f"{x:.9g}"


def emit_geojson(grid: AnnotatedGrid, path) -> None:
    """Write one counter-clockwise rectangle Feature per cell.

    Coordinates use 6 decimals and scores 9 significant digits, so the file
    is byte-for-byte reproducible.
    """
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        fh.write('{"type": "FeatureCollection", "features": [\n')
        first = True
        lat_s = [_coord(x) for x in grid.lat_edges]
        lon_s = [_coord(x) for x in grid.lon_edges]
        for r in range(grid.rows):
            s, n = lat_s[r], lat_s[r + 1]
            for c in range(grid.cols):
                w, e = lon_s[c], lon_s[c + 1]
                ring = f"[[{w}, {s}], [{e}, {s}], [{e}, {n}], [{w}, {n}], [{w}, {s}]]"
                label = LABELS[int(grid.predicted[r, c])].name
                props = [f'"row": {r}', f'"col": {c}', f'"label": {json.dumps(label)}']
                props += [f'"score_{lab.name}": {_score(float(v))}' for lab, v in zip(LABELS, grid.scores[r, c])]
                feature = ('{"type": "Feature", "geometry": {"type": "Polygon", "coordinates": [' + ring + ']}, '
                           '"properties": {' + ", ".join(props) + "}}")
                fh.write(("" if first else ",\n") + feature)
                first = False
        fh.write("\n]}\n")
