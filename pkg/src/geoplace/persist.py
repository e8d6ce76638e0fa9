"""Model files: the fitting configuration plus the training places, as JSON.

Fitting is deterministic, so loading simply refits.
"""
from __future__ import annotations

import json
from pathlib import Path

from .classify import ClassifierConfig, ClassifierModel, CrossValidatedBandwidth, fit
from .cluster import DbscanParams
from .density import BalloonBandwidth, FixedBandwidth, Kernel
from .errors import ParseError
from .geo import GeoPoint
from .labels import LabeledPlace, SemanticLabel

FORMAT = "geoplace-model"
VERSION = 1


def config_to_dict(c: ClassifierConfig) -> dict:
    bw = c.bandwidth
    if isinstance(bw, BalloonBandwidth):
        bandwidth = {"type": "balloon", "k": bw.k, "floor_km": bw.floor_km}
    elif isinstance(bw, FixedBandwidth):
        bandwidth = {"type": "fixed", "h": bw.h}
    else:
        bandwidth = {"type": "cv", "candidates": list(bw.candidates)}
    return {
        "kernel": c.kernel.name.lower(),
        "bandwidth": bandwidth,
        "gate": c.gate,
        "eps_km": c.dbscan.eps_km,
        "min_pts": c.dbscan.min_pts,
        "use_priors": c.use_priors,
        "pooled_balloon": c.pooled_balloon,
        "region_priors": c.region_priors,
        "radius_km": c.radius_km,
    }


def config_from_dict(d: dict) -> ClassifierConfig:
    bw = d["bandwidth"]
    if bw["type"] == "balloon":
        bandwidth = BalloonBandwidth(int(bw["k"]), float(bw["floor_km"]))
    elif bw["type"] == "fixed":
        bandwidth = FixedBandwidth(float(bw["h"]))
    elif bw["type"] == "cv":
        bandwidth = CrossValidatedBandwidth(tuple(bw["candidates"]))
    else:
        raise ValueError(f"unknown bandwidth type {bw['type']!r}")
    return ClassifierConfig(kernel=Kernel.parse(d["kernel"]), bandwidth=bandwidth, gate=bool(d["gate"]),
                            dbscan=DbscanParams(float(d["eps_km"]), int(d["min_pts"])),
                            use_priors=bool(d["use_priors"]), pooled_balloon=bool(d["pooled_balloon"]),
                            region_priors=bool(d.get("region_priors", False)),
                            radius_km=float(d["radius_km"]))


def save_model(path, model: ClassifierModel) -> None:
    doc = {
        "format": FORMAT,
        "version": VERSION,
        "config": config_to_dict(model.config),
        "places": [[p.place_id, p.label.name, p.location.lat, p.location.lon] for p in model.training],
    }
    Path(path).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


def load_model(path) -> ClassifierModel:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        if doc.get("format") != FORMAT or doc.get("version") != VERSION:
            raise ValueError("not a geoplace model file")
        config = config_from_dict(doc["config"])
        places = [LabeledPlace(str(pid), GeoPoint(lat, lon), SemanticLabel.parse(label))
                  for pid, label, lat, lon in doc["places"]]
    except (ValueError, KeyError, TypeError) as exc:
        raise ParseError(f"cannot read model: {exc}", path) from None
    return fit(places, config)
