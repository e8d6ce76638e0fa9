"""Small on-disk datasets shared by the CLI and acceptance tests."""
import math

from geoplace import LABELS

# place -> (visit windows, expected source, expected mean or None)
#   wifi-*: resolvable from in-window WiFi (GPS present too, must be ignored)
#   gps-*:  no in-window WiFi, falls back to GPS
#   none-*: nothing in window, excluded
VISITS = [
    ("wifi-a", "v1", 1000, 2000),
    ("wifi-a", "v2", 5000, 5100),
    ("wifi-b", "v3", 3000, 3600),
    ("gps-a", "v4", 7000, 7200),
    ("gps-b", "v5", 9000, 9000),
    ("none-a", "v6", 11000, 11500),
]
WIFI = [
    ("ap1", 46.5191, 6.5668, 1000),   # start bound
    ("ap2", 46.5203, 6.5702, 1500),
    ("ap1", 46.5191, 6.5668, 5100),   # end bound, repeated AP
    ("ap3", 46.2044, 6.1432, 3300),
    ("ap3", 46.2050, 6.1440, 3600),
    ("ap9", 10.0000, 10.0000, 999),   # just outside wifi-a
    ("ap9", 10.0000, 10.0000, 7201),  # just outside gps-a
    ("ap9", 10.0000, 10.0000, 10999),
]
GPS = [
    (46.5200, 6.6300, 1500),          # shadowed by WiFi
    (46.5100, 6.6320, 7000),
    (46.5140, 6.6360, 7100),
    (46.5160, 6.6400, 7200),
    (46.9990, 6.9990, 9000),
    (0.0, 0.0, 10000),
]
LABEL_ROWS = [("wifi-a", "HOME"), ("wifi-b", "WORK"), ("gps-a", "SHOP"), ("gps-b", "TRANSPORT"),
              ("none-a", "HOME")]


def _mean(values):
    return math.fsum(values) / len(values)


EXPECTED = {
    "wifi-a": ("WIFI", 3, _mean([46.5191, 46.5203, 46.5191]), _mean([6.5668, 6.5702, 6.5668])),
    "wifi-b": ("WIFI", 2, _mean([46.2044, 46.2050]), _mean([6.1432, 6.1440])),
    "gps-a": ("GPS", 3, _mean([46.5100, 46.5140, 46.5160]), _mean([6.6320, 6.6360, 6.6400])),
    "gps-b": ("GPS", 1, 46.9990, 6.9990),
    "none-a": ("NONE", 0, None, None),
}


def _write(path, header, rows):
    path.write_text(header + "\n" + "".join(",".join(str(x) for x in r) + "\n" for r in rows))
    return path


def write_ingest_fixture(directory):
    return {
        "visits": _write(directory / "visits.csv", "place_id,visit_id,start_ts,end_ts", VISITS),
        "wifi": _write(directory / "wifi.csv", "ap_id,lat,lon,ts", WIFI),
        "gps": _write(directory / "gps.csv", "lat,lon,ts", GPS),
        "labels": _write(directory / "labels.csv", "place_id,label", LABEL_ROWS),
    }


def write_external_scores(path, places, favour=None):
    """One row per place; ``favour(place)`` names a label that gets most of the mass."""
    rows = []
    for p in places:
        target = favour(p) if favour else None
        rows.append([p.place_id] + [0.9 if lab is target else 0.1 / 9 if target else 0.1 for lab in LABELS])
    return _write(path, "place_id," + ",".join(lab.name for lab in LABELS), rows)
