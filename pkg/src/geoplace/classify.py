"""Kernel discriminant classification of semantic place labels.

One density model per label; a probe goes to the label with the highest
score. Optionally the training points are first grouped with DBSCAN and a
probe inside a region is scored only against that region's members.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from .cluster import NOISE, ClusterAssignment, DbscanParams, dbscan, regions_of
from .density import (
    BalloonBandwidth,
    DensityModel,
    FixedBandwidth,
    Kernel,
    default_candidates,
    select_bandwidth_cv,
)
from .errors import EmptyInputError, InsufficientDataError, ValidationError
from .geo import EARTH_RADIUS_KM, GeoPoint, coord_arrays
from .labels import LABELS, LabeledPlace, SemanticLabel

log = logging.getLogger(__name__)

#: Per-label floor applied to normalised scores before log-linear fusion.
FUSION_FLOOR = 1e-9


@dataclass(frozen=True)
class CrossValidatedBandwidth:
    """Fixed bandwidth chosen per label by leave-one-out likelihood over ``candidates``."""

    candidates: tuple[float, ...] = field(default_factory=default_candidates)

    def __post_init__(self):
        object.__setattr__(self, "candidates", tuple(float(h) for h in self.candidates))
        if not self.candidates or any(not (math.isfinite(h) and h > 0) for h in self.candidates):
            raise ValidationError("candidate bandwidths must be a non-empty set of positive values")


@dataclass(frozen=True)
class ClassifierConfig:
    kernel: Kernel = Kernel.GAUSSIAN
    bandwidth: Union[FixedBandwidth, BalloonBandwidth, CrossValidatedBandwidth] = field(
        default_factory=BalloonBandwidth)
    gate: bool = False
    dbscan: DbscanParams = field(default_factory=DbscanParams)
    use_priors: bool = False
    # balloon bandwidth from all labels' samples instead of the label's own
    pooled_balloon: bool = False
    # inside a DBSCAN region, weight by the region's label frequencies
    region_priors: bool = False
    radius_km: float = EARTH_RADIUS_KM


@dataclass(frozen=True)
class ClassScores:
    """Per-label scores in label order.

    ``present`` marks labels seen in training; only those can be predicted.
    ``region`` is the DBSCAN region the scores came from, ``None`` for global.
    """

    scores: tuple[float, ...]
    present: tuple[bool, ...]
    region: Optional[int] = None

    def __post_init__(self):
        if len(self.scores) != len(LABELS) or len(self.present) != len(LABELS):
            raise ValidationError("class scores need one entry per label")
        if not any(self.present):
            raise ValidationError("class scores need at least one present label")
        if any(not (math.isfinite(s) and s >= 0) for s in self.scores):
            raise ValidationError("class scores must be finite and non-negative")

    def __getitem__(self, label: SemanticLabel) -> float:
        return self.scores[label.index]

    @property
    def provenance(self) -> str:
        return "GLOBAL" if self.region is None else f"REGION({self.region})"

    def as_dict(self) -> dict[SemanticLabel, float]:
        return dict(zip(LABELS, self.scores))

    def best(self) -> SemanticLabel:
        return LABELS[_argmax(np.asarray(self.scores), np.asarray(self.present))]


def _argmax(scores: np.ndarray, present: np.ndarray) -> int:
    # first maximum among present labels, so ties follow label order
    masked = np.where(present, scores, -np.inf)
    return int(np.argmax(masked))


@dataclass(frozen=True, eq=False)
class ClassifierModel:
    config: ClassifierConfig
    training: tuple[LabeledPlace, ...]
    models: Mapping[SemanticLabel, DensityModel]
    priors: Mapping[SemanticLabel, float]
    pooled: DensityModel
    assignment: Optional[ClusterAssignment] = None
    region_models: Mapping[int, Mapping[SemanticLabel, DensityModel]] = field(default_factory=dict)
    region_pooled: Mapping[int, DensityModel] = field(default_factory=dict)
    region_label_priors: Mapping[int, Mapping[SemanticLabel, float]] = field(default_factory=dict)

    @property
    def present(self) -> tuple[bool, ...]:
        return tuple(label in self.models for label in LABELS)

    def score_matrix(self, plats: np.ndarray, plons: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Scores for probes in degrees: an ``(m, 10)`` matrix and per-probe region (``-1`` = global)."""
        plats = np.ascontiguousarray(plats, dtype=np.float64)
        plons = np.ascontiguousarray(plons, dtype=np.float64)
        m = plats.shape[0]
        out = np.zeros((m, len(LABELS)))
        if self.assignment is not None:
            regions = regions_of(self.assignment, plats, plons, self.config.dbscan)
        else:
            regions = np.full(m, NOISE, dtype=np.int64)
        for region in np.unique(regions):
            rows = np.flatnonzero(regions == region)
            if region == NOISE:
                models, pooled = self.models, self.pooled
            else:
                models, pooled = self.region_models[int(region)], self.region_pooled[int(region)]
            la, lo = plats[rows], plons[rows]
            hs = None
            if self.config.pooled_balloon and isinstance(self.config.bandwidth, BalloonBandwidth):
                hs = pooled.bandwidths(la, lo)
            if self.config.use_priors:
                priors = self.priors
                if region != NOISE and self.config.region_priors:
                    priors = self.region_label_priors[int(region)]
            for label, dm in models.items():
                out[rows, label.index] = dm.scores(la, lo, hs)
                if self.config.use_priors:
                    out[rows, label.index] *= priors[label]
        return out, regions

    def class_scores(self, probe: GeoPoint) -> ClassScores:
        plat, plon = coord_arrays([probe])
        scores, regions = self.score_matrix(plat, plon)
        region = None if regions[0] == NOISE else int(regions[0])
        return ClassScores(tuple(float(s) for s in scores[0]), self.present, region)

    def predict(self, probe: GeoPoint) -> SemanticLabel:
        return self.predict_many([probe])[0]

    def predict_many(self, probes: Sequence[GeoPoint]) -> list[SemanticLabel]:
        if not probes:
            return []
        plats, plons = coord_arrays(probes)
        scores, _ = self.score_matrix(plats, plons)
        present = np.asarray(self.present)
        picks = [_argmax(row, present) for row in scores]
        if log.isEnabledFor(logging.DEBUG):
            n_zero = int(np.sum(~np.any(scores[:, present] > 0, axis=1)))
            if n_zero:
                log.debug("%d probe(s) scored zero for every label; resolved by label order", n_zero)
        return [LABELS[i] for i in picks]


def _density_spec(config: ClassifierConfig, samples, pooled_samples):
    bw = config.bandwidth
    if not isinstance(bw, CrossValidatedBandwidth):
        return bw
    if len(samples) >= 2:
        return FixedBandwidth(select_bandwidth_cv(samples, bw.candidates, config.kernel, config.radius_km))
    if len(pooled_samples) >= 2:
        return FixedBandwidth(select_bandwidth_cv(pooled_samples, bw.candidates, config.kernel, config.radius_km))
    return FixedBandwidth(sorted(bw.candidates)[len(bw.candidates) // 2])


def _group(places: Sequence[LabeledPlace]) -> dict[SemanticLabel, list[GeoPoint]]:
    groups: dict[SemanticLabel, list[GeoPoint]] = {}
    for p in places:
        groups.setdefault(p.label, []).append(p.location)
    return {label: groups[label] for label in LABELS if label in groups}


def fit(training: Sequence[LabeledPlace], config: Optional[ClassifierConfig] = None) -> ClassifierModel:
    """Fit one density model per label present in ``training``."""
    config = config or ClassifierConfig()
    training = tuple(training)
    if not training:
        raise InsufficientDataError("cannot fit a classifier on an empty training set")
    ids = [p.place_id for p in training]
    if len(set(ids)) != len(ids):
        raise ValidationError("place ids must be unique within a training set")

    all_points = [p.location for p in training]
    groups = _group(training)
    specs = {label: _density_spec(config, pts, all_points) for label, pts in groups.items()}
    models = {label: DensityModel(pts, config.kernel, specs[label], config.radius_km)
              for label, pts in groups.items()}
    total = len(training)
    priors = {label: len(pts) / total for label, pts in groups.items()}
    pooled_bw = config.bandwidth if isinstance(config.bandwidth, BalloonBandwidth) else FixedBandwidth(1.0)
    pooled = DensityModel(all_points, config.kernel, pooled_bw, config.radius_km)

    assignment = None
    region_models: dict[int, dict[SemanticLabel, DensityModel]] = {}
    region_pooled: dict[int, DensityModel] = {}
    region_label_priors: dict[int, dict[SemanticLabel, float]] = {}
    if config.gate:
        assignment = dbscan(all_points, config.dbscan, config.radius_km)
        for c in range(assignment.n_clusters):
            members = [training[i] for i in assignment.members(c)]
            region_groups = _group(members)
            region_models[c] = {label: DensityModel(pts, config.kernel, specs[label], config.radius_km)
                                for label, pts in region_groups.items()}
            region_label_priors[c] = {label: len(pts) / len(members) for label, pts in region_groups.items()}
            region_pooled[c] = DensityModel([p.location for p in members], config.kernel, pooled_bw,
                                            config.radius_km)
    return ClassifierModel(config=config, training=training, models=models, priors=priors, pooled=pooled,
                           assignment=assignment, region_models=region_models, region_pooled=region_pooled,
                           region_label_priors=region_label_priors)


def class_scores(model: ClassifierModel, probe: GeoPoint) -> ClassScores:
    return model.class_scores(probe)


def predict(model: ClassifierModel, probe: GeoPoint) -> SemanticLabel:
    return model.predict(probe)


def _normalise(v: np.ndarray) -> np.ndarray:
    total = v.sum()
    if total <= 0:
        return np.full(v.shape, 1.0 / v.size)
    return v / total


def fuse_scores(kde: ClassScores, external: Union[Mapping[SemanticLabel, float], Sequence[float]],
                lam: float = 0.5) -> ClassScores:
    """Log-linear blend ``external**(1 - lam) * kde**lam`` of sum-normalised scores.

    Each normalised score is floored at ``FUSION_FLOOR`` before the powers are
    taken and the result is renormalised.
    """
    lam = float(lam)
    if not (0.0 <= lam <= 1.0):
        raise ValidationError(f"fusion weight must lie in [0, 1], got {lam!r}")
    if isinstance(external, Mapping):
        ext = np.array([float(external.get(label, 0.0)) for label in LABELS])
    else:
        ext = np.asarray(external, dtype=np.float64)
        if ext.shape != (len(LABELS),):
            raise ValidationError("external scores need one value per label")
    if np.any(~np.isfinite(ext)) or np.any(ext < 0):
        raise ValidationError("external scores must be finite and non-negative")
    e = np.maximum(_normalise(ext), FUSION_FLOOR)
    k = np.maximum(_normalise(np.asarray(kde.scores, dtype=np.float64)), FUSION_FLOOR)
    fused = e ** (1.0 - lam) * k ** lam
    fused = fused / fused.sum()
    return ClassScores(tuple(float(x) for x in fused), kde.present, kde.region)


class RandomBaseline:
    """Predicts a label uniformly at random; reproducible for a given seed."""

    def __init__(self, labels: Sequence[SemanticLabel], seed: int = 0):
        labels = sorted(set(labels))
        if not labels:
            raise EmptyInputError("random baseline needs at least one label")
        self.labels = tuple(labels)
        self.seed = seed
        self._rng = np.random.default_rng(seed)

    def predict(self, probe: Optional[GeoPoint] = None) -> SemanticLabel:
        return self.labels[int(self._rng.integers(len(self.labels)))]

    def predict_many(self, probes: Sequence[GeoPoint]) -> list[SemanticLabel]:
        picks = self._rng.integers(len(self.labels), size=len(probes))
        return [self.labels[int(i)] for i in picks]


class DominantBaseline:
    """Always predicts the most frequent training label (ties by label order)."""

    def __init__(self, training_labels: Sequence[SemanticLabel]):
        if len(training_labels) == 0:
            raise EmptyInputError("dominant baseline needs training labels")
        counts = {label: 0 for label in LABELS}
        for label in training_labels:
            counts[label] += 1
        top = max(counts.values())
        self.label = next(label for label in LABELS if counts[label] == top)

    def predict(self, probe: Optional[GeoPoint] = None) -> SemanticLabel:
        return self.label

    def predict_many(self, probes: Sequence[GeoPoint]) -> list[SemanticLabel]:
        return [self.label] * len(probes)


def baseline_random(labels: Sequence[SemanticLabel], seed: int = 0) -> RandomBaseline:
    return RandomBaseline(labels, seed)


def baseline_dominant(training_labels: Sequence[SemanticLabel]) -> DominantBaseline:
    return DominantBaseline(training_labels)
