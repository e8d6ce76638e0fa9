"""Place-location inference from visit windows and CSV input/output.

File layouts (UTF-8, comma separated, header row):

* places: ``place_id,label,lat,lon``
* visits: ``place_id,visit_id,start_ts,end_ts``
* wifi:   ``ap_id,lat,lon,ts``
* gps:    ``lat,lon,ts``
* labels: ``place_id,label``
"""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .errors import InputError, InvalidRecordError, ParseError, ValidationError
from .geo import GeoPoint
from .labels import LabeledPlace, SemanticLabel

PLACES_HEADER = ("place_id", "label", "lat", "lon")
VISITS_HEADER = ("place_id", "visit_id", "start_ts", "end_ts")
WIFI_HEADER = ("ap_id", "lat", "lon", "ts")
GPS_HEADER = ("lat", "lon", "ts")
LABELS_HEADER = ("place_id", "label")


class LocationSource(enum.Enum):
    WIFI = "WIFI"
    GPS = "GPS"
    NONE = "NONE"


@dataclass(frozen=True)
class VisitRecord:
    place_id: str
    visit_id: str
    start_ts: int
    end_ts: int

    def __post_init__(self):
        if self.start_ts > self.end_ts:
            raise ValidationError(f"visit {self.visit_id!r} ends before it starts")


@dataclass(frozen=True)
class WifiObservation:
    ap_id: str
    location: GeoPoint
    ts: int


@dataclass(frozen=True)
class GpsSample:
    location: GeoPoint
    ts: int


@dataclass(frozen=True)
class LocationInferenceResult:
    place_id: str
    location: Optional[GeoPoint]
    source: LocationSource
    sample_count: int


def _in_windows(ts: np.ndarray, visits: Sequence[VisitRecord]) -> np.ndarray:
    hit = np.zeros(ts.shape, dtype=bool)
    for v in visits:
        hit |= (ts >= v.start_ts) & (ts <= v.end_ts)
    return hit


def _mean_point(points: Sequence[GeoPoint], spherical: bool) -> GeoPoint:
    if not spherical:
        # offset from the first point keeps identical inputs exact
        lat0, lon0 = points[0].lat, points[0].lon
        n = len(points)
        return GeoPoint(lat0 + math.fsum(p.lat - lat0 for p in points) / n,
                        lon0 + math.fsum(p.lon - lon0 for p in points) / n)
    lat = np.radians([p.lat for p in points])
    lon = np.radians([p.lon for p in points])
    x = np.mean(np.cos(lat) * np.cos(lon))
    y = np.mean(np.cos(lat) * np.sin(lon))
    z = np.mean(np.sin(lat))
    return GeoPoint(math.degrees(math.atan2(z, math.hypot(x, y))), math.degrees(math.atan2(y, x)))


def infer_place_location(place_id: str, visits: Sequence[VisitRecord], wifi: Sequence[WifiObservation],
                         gps: Sequence[GpsSample], *, spherical_mean: bool = False,
                         unique_aps: bool = False) -> LocationInferenceResult:
    """Average the positions observed during a place's visits.

    WiFi positions recorded inside any visit window (bounds inclusive) win;
    GPS samples are only consulted when there are none. Every sighting counts,
    including repeats of one access point, unless ``unique_aps`` is set (then
    the first in-window sighting per AP is used). ``spherical_mean`` swaps the
    plain degree average for a 3-D centroid, which behaves at the antimeridian.
    """
    if any(v.place_id != place_id for v in visits):
        raise InputError(f"visits for place {place_id!r} include other place ids")
    if wifi:
        ts = np.fromiter((w.ts for w in wifi), dtype=np.int64, count=len(wifi))
        hits = [w for w, ok in zip(wifi, _in_windows(ts, visits)) if ok]
        if unique_aps:
            seen: dict[str, WifiObservation] = {}
            for w in hits:
                seen.setdefault(w.ap_id, w)
            hits = list(seen.values())
        if hits:
            return LocationInferenceResult(place_id, _mean_point([w.location for w in hits], spherical_mean),
                                           LocationSource.WIFI, len(hits))
    if gps:
        ts = np.fromiter((g.ts for g in gps), dtype=np.int64, count=len(gps))
        hits = [g for g, ok in zip(gps, _in_windows(ts, visits)) if ok]
        if hits:
            return LocationInferenceResult(place_id, _mean_point([g.location for g in hits], spherical_mean),
                                           LocationSource.GPS, len(hits))
    return LocationInferenceResult(place_id, None, LocationSource.NONE, 0)


def infer_locations(visits: Sequence[VisitRecord], wifi: Sequence[WifiObservation], gps: Sequence[GpsSample],
                    **options) -> list[LocationInferenceResult]:
    """Run :func:`infer_place_location` for every place, in first-seen order."""
    by_place: dict[str, list[VisitRecord]] = {}
    for v in visits:
        by_place.setdefault(v.place_id, []).append(v)
    return [infer_place_location(pid, vs, wifi, gps, **options) for pid, vs in by_place.items()]


# --- CSV ---------------------------------------------------------------------

def _rows(path, header: tuple[str, ...]) -> Iterable[tuple[int, dict[str, str]]]:
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            found = next(reader)
        except StopIteration:
            raise ParseError("missing header row", path, 1) from None
        found = [h.strip() for h in found]
        missing = [h for h in header if h not in found]
        if missing:
            raise ParseError(f"header lacks column(s) {missing}", path, 1)
        pos = {h: found.index(h) for h in header}
        for line, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(found):
                raise ParseError(f"expected {len(found)} fields, got {len(row)}", path, line)
            yield line, {h: row[pos[h]].strip() for h in header}


def _convert(path, line: int, fn: Callable, *args):
    try:
        return fn(*args)
    except ValidationError as exc:
        raise InvalidRecordError(f"invalid value: {exc}", path, line) from None
    except ValueError as exc:
        raise ParseError(f"malformed value: {exc}", path, line) from None


def _point(lat: str, lon: str) -> GeoPoint:
    return GeoPoint(float(lat), float(lon))


def load_places(path) -> list[LabeledPlace]:
    places, seen = [], set()
    for line, row in _rows(path, PLACES_HEADER):
        if not row["place_id"]:
            raise ParseError("empty place_id", path, line)
        if row["place_id"] in seen:
            raise ParseError(f"duplicate place_id {row['place_id']!r}", path, line)
        seen.add(row["place_id"])
        label = _convert(path, line, SemanticLabel.parse, row["label"])
        loc = _convert(path, line, _point, row["lat"], row["lon"])
        places.append(LabeledPlace(row["place_id"], loc, label))
    return places


def write_places(path, places: Sequence[LabeledPlace]) -> None:
    """Write places with shortest round-trip float formatting."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PLACES_HEADER)
        for p in places:
            w.writerow([p.place_id, p.label.name, repr(p.location.lat), repr(p.location.lon)])


def load_visits(path) -> list[VisitRecord]:
    return [_convert(path, line, lambda r: VisitRecord(r["place_id"], r["visit_id"], int(r["start_ts"]),
                                                        int(r["end_ts"])), row)
            for line, row in _rows(path, VISITS_HEADER)]


def load_wifi(path) -> list[WifiObservation]:
    return [_convert(path, line, lambda r: WifiObservation(r["ap_id"], _point(r["lat"], r["lon"]), int(r["ts"])),
                     row)
            for line, row in _rows(path, WIFI_HEADER)]


def load_gps(path) -> list[GpsSample]:
    return [_convert(path, line, lambda r: GpsSample(_point(r["lat"], r["lon"]), int(r["ts"])), row)
            for line, row in _rows(path, GPS_HEADER)]


def load_labels(path) -> dict[str, SemanticLabel]:
    out: dict[str, SemanticLabel] = {}
    for line, row in _rows(path, LABELS_HEADER):
        if row["place_id"] in out:
            raise ParseError(f"duplicate place_id {row['place_id']!r}", path, line)
        out[row["place_id"]] = _convert(path, line, SemanticLabel.parse, row["label"])
    return out


def load_external_scores(path) -> dict[str, tuple[float, ...]]:
    """Per-place scores from an external classifier: ``place_id`` then one column per label."""
    from .labels import LABELS

    header = ("place_id",) + tuple(label.name for label in LABELS)
    out: dict[str, tuple[float, ...]] = {}
    for line, row in _rows(path, header):
        values = tuple(_convert(path, line, float, row[label.name]) for label in LABELS)
        if any(not math.isfinite(v) or v < 0 for v in values):
            raise ParseError("scores must be finite and non-negative", path, line)
        if row["place_id"] in out:
            raise ParseError(f"duplicate place_id {row['place_id']!r}", path, line)
        out[row["place_id"]] = values
    return out
