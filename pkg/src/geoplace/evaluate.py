"""Stratified cross-validation, accuracy reports and the Wilcoxon signed-rank test."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from .classify import (
    ClassifierConfig,
    CrossValidatedBandwidth,
    baseline_dominant,
    baseline_random,
    fit,
)
from .density import BalloonBandwidth, FixedBandwidth
from .errors import FoldError, InputError, ParseError, ValidationError
from .labels import LABELS, LabeledPlace, SemanticLabel

METHODS = ("random", "dominant", "kde-f", "kde-a", "kde-a-dbscan")
EXACT_MAX_N = 20


@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignments: tuple[int, ...]
    seed: int

    def split(self, places: Sequence[LabeledPlace], fold: int) -> tuple[list[LabeledPlace], list[LabeledPlace]]:
        """Training and held-out places for ``fold``."""
        if len(places) != len(self.assignments):
            raise InputError("fold plan does not cover the given places")
        train = [p for p, f in zip(places, self.assignments) if f != fold]
        test = [p for p, f in zip(places, self.assignments) if f == fold]
        return train, test


def stratified_kfold(places: Sequence[LabeledPlace], k: int = 10, seed: int = 42) -> FoldPlan:
    """Shuffle each label's places and deal them round-robin over ``k`` folds.

    The dealing position carries over from one label to the next, so folds
    stay balanced overall as well as per label.
    """
    if int(k) != k or k < 2:
        raise ValidationError(f"fold count must be an integer >= 2, got {k!r}")
    rng = np.random.default_rng(seed)
    assignments = [-1] * len(places)
    offset = 0
    for label in LABELS:
        idx = [i for i, p in enumerate(places) if p.label == label]
        for j, pos in enumerate(rng.permutation(len(idx))):
            assignments[idx[pos]] = (offset + j) % k
        offset = (offset + len(idx)) % k
    return FoldPlan(k=int(k), assignments=tuple(assignments), seed=seed)


@dataclass(frozen=True)
class Method:
    """A named way of turning a training split into a predictor."""

    name: str
    config: Optional[ClassifierConfig] = None

    def train(self, training: Sequence[LabeledPlace], seed=0):
        if self.name == "random":
            return baseline_random([p.label for p in training], seed)
        if self.name == "dominant":
            return baseline_dominant([p.label for p in training])
        return fit(training, self.config)

    def describe(self) -> dict[str, str]:
        out = {"method": self.name}
        c = self.config
        if c is None:
            return out
        out["kernel"] = c.kernel.name.lower()
        bw = c.bandwidth
        if isinstance(bw, BalloonBandwidth):
            out["bandwidth"] = f"balloon k={bw.k} floor_km={bw.floor_km!r}"
        elif isinstance(bw, FixedBandwidth):
            out["bandwidth"] = f"fixed h={bw.h!r}"
        else:
            out["bandwidth"] = f"cv candidates={len(bw.candidates)} [{bw.candidates[0]!r}..{bw.candidates[-1]!r}]"
        out["gate"] = "on" if c.gate else "off"
        if c.gate:
            out["eps_km"] = repr(c.dbscan.eps_km)
            out["min_pts"] = str(c.dbscan.min_pts)
        out["use_priors"] = "on" if c.use_priors else "off"
        out["pooled_balloon"] = "on" if c.pooled_balloon else "off"
        out["region_priors"] = "on" if c.region_priors else "off"
        return out


def method(name: str, **overrides) -> Method:
    """Standard method ladder: baselines, fixed (cross-validated), adaptive, adaptive + DBSCAN."""
    if name in ("random", "dominant"):
        return Method(name)
    base = {
        "kde-f": dict(bandwidth=CrossValidatedBandwidth()),
        "kde-a": dict(bandwidth=BalloonBandwidth()),
        "kde-a-dbscan": dict(bandwidth=BalloonBandwidth(), gate=True),
    }
    if name not in base:
        raise ValidationError(f"unknown method {name!r}; choose from {METHODS}")
    kwargs = {**base[name], **overrides}
    return Method(name, ClassifierConfig(**kwargs))


@dataclass
class EvalReport:
    method: str
    fold_accuracies: list[float]
    overall_accuracy: float
    confusion: np.ndarray
    config: dict[str, str] = field(default_factory=dict)
    k: int = 10
    seed: int = 42

    @property
    def mean_fold_accuracy(self) -> float:
        return float(np.mean(self.fold_accuracies))

    @property
    def n_places(self) -> int:
        return int(self.confusion.sum())


def _confusion(truth: Sequence[SemanticLabel], pred: Sequence[SemanticLabel]) -> np.ndarray:
    m = np.zeros((len(LABELS), len(LABELS)), dtype=np.int64)
    for t, p in zip(truth, pred):
        m[t.index, p.index] += 1
    return m


def cross_validate(places: Sequence[LabeledPlace], method_spec: Method, plan: FoldPlan,
                   workers: int = 1, predict: Optional[Callable] = None) -> EvalReport:
    """Fit on k-1 folds and predict the held-out fold, for every fold.

    ``predict(model, fold, test_places)`` may replace plain prediction (used
    for score fusion). Folds run in a thread pool when ``workers > 1``; the
    report is the same as a sequential run.
    """
    places = list(places)
    if len(plan.assignments) != len(places):
        raise InputError("fold plan does not cover the given places")

    def run(fold):
        train, test = plan.split(places, fold)
        if not train:
            raise FoldError(f"fold {fold} has no training places")
        if not test:
            raise FoldError(f"fold {fold} has no held-out places")
        model = method_spec.train(train, seed=(plan.seed, fold))
        if predict is not None:
            preds = predict(model, fold, test)
        else:
            preds = model.predict_many([p.location for p in test])
        return [p.label for p in test], preds

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, range(plan.k)))
    else:
        results = [run(f) for f in range(plan.k)]

    confusion = np.zeros((len(LABELS), len(LABELS)), dtype=np.int64)
    fold_acc = []
    for truth, preds in results:
        c = _confusion(truth, preds)
        confusion += c
        fold_acc.append(float(np.trace(c) / c.sum()))
    overall = float(np.trace(confusion) / confusion.sum())
    return EvalReport(method=method_spec.name, fold_accuracies=fold_acc, overall_accuracy=overall,
                      confusion=confusion, config=method_spec.describe(), k=plan.k, seed=plan.seed)


# --- report files --------------------------------------------------------------

def format_report(report: EvalReport) -> str:
    lines = [
        "# geoplace evaluation report",
        f"method: {report.method}",
        f"folds: {report.k}",
        f"seed: {report.seed}",
        f"n_places: {report.n_places}",
        f"overall_accuracy: {report.overall_accuracy:.9f}",
        f"mean_fold_accuracy: {report.mean_fold_accuracy:.9f}",
        "fold_accuracies: " + ",".join(f"{a:.9f}" for a in report.fold_accuracies),
    ]
    lines += [f"config.{k}: {v}" for k, v in sorted(report.config.items())]
    lines.append("labels: " + ",".join(label.name for label in LABELS))
    lines.append("confusion:")
    lines += [" ".join(str(int(x)) for x in row) for row in report.confusion]
    return "\n".join(lines) + "\n"


def write_report(path, report: EvalReport) -> None:
    Path(path).write_text(format_report(report), encoding="utf-8")


def read_report(path) -> EvalReport:
    path = Path(path)
    text = path.read_text(encoding="utf-8").splitlines()
    values: dict[str, str] = {}
    matrix: list[list[int]] = []
    in_matrix = False
    for line_no, line in enumerate(text, start=1):
        if in_matrix:
            if line.strip():
                try:
                    matrix.append([int(x) for x in line.split()])
                except ValueError:
                    raise ParseError("bad confusion row", path, line_no) from None
            continue
        if not line.strip() or line.startswith("#"):
            continue
        if line.strip() == "confusion:":
            in_matrix = True
            continue
        key, sep, value = line.partition(":")
        if not sep:
            raise ParseError("expected 'key: value'", path, line_no)
        values[key.strip()] = value.strip()
    try:
        folds = [float(x) for x in values["fold_accuracies"].split(",") if x]
        config = {k[len("config."):]: v for k, v in values.items() if k.startswith("config.")}
        report = EvalReport(method=values["method"], fold_accuracies=folds,
                            overall_accuracy=float(values["overall_accuracy"]),
                            confusion=np.array(matrix, dtype=np.int64).reshape(len(LABELS), len(LABELS)),
                            config=config, k=int(values["folds"]), seed=int(values["seed"]))
    except (KeyError, ValueError) as exc:
        raise ParseError(f"incomplete report ({exc})", path) from None
    return report


# --- Wilcoxon signed-rank ------------------------------------------------------

@dataclass(frozen=True)
class WilcoxonResult:
    w_statistic: float
    n_effective: int
    p_two_sided: float
    exact: bool

    @property
    def significant_at_0_05(self) -> bool:
        return self.p_two_sided < 0.05


def _midranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(len(values))
    sv = values[order]
    i = 0
    while i < len(sv):
        j = i
        while j + 1 < len(sv) and sv[j + 1] == sv[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def _exact_p(ranks: np.ndarray, w: float) -> float:
    # null distribution of the positive-rank sum by subset-sum counting on doubled (integer) ranks
    doubled = np.rint(2 * ranks).astype(np.int64)
    total = int(doubled.sum())
    counts = np.zeros(total + 1)
    counts[0] = 1.0
    for r in doubled:
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[:total + 1 - r]
        counts += shifted
    # two-sided: |T - S/2| >= |W - S/2|, in doubled units
    gap = abs(total - 2 * int(round(2 * w)))
    extreme = np.abs(2 * np.arange(total + 1) - total) >= gap
    return float(min(1.0, counts[extreme].sum() / 2.0 ** len(ranks)))


def _normal_p(ranks: np.ndarray, w: float) -> float:
    n = len(ranks)
    mean = n * (n + 1) / 4.0
    _, tie_counts = np.unique(ranks, return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24.0 - float(np.sum(tie_counts ** 3 - tie_counts)) / 48.0
    if var <= 0:
        return 1.0
    z = (abs(w - mean) - 0.5) / math.sqrt(var)
    if z <= 0:
        return 1.0
    return float(min(1.0, math.erfc(z / math.sqrt(2.0))))


def wilcoxon_signed_rank(a: Sequence[float], b: Sequence[float], exact_max_n: int = EXACT_MAX_N) -> WilcoxonResult:
    """Paired two-sided Wilcoxon signed-rank test.

    Zero differences are dropped and tied magnitudes get midranks. The
    p-value is exact up to ``exact_max_n`` non-zero pairs and uses the
    tie-corrected normal approximation with continuity correction beyond.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise InputError("paired samples must be 1-D and of equal length")
    if a.size == 0:
        raise InputError("need at least one pair")
    diff = a - b
    diff = diff[diff != 0]
    n = diff.size
    if n == 0:
        return WilcoxonResult(0.0, 0, 1.0, True)
    ranks = _midranks(np.abs(diff))
    w_plus = float(ranks[diff > 0].sum())
    w_minus = float(ranks[diff < 0].sum())
    w = min(w_plus, w_minus)
    if n <= exact_max_n:
        return WilcoxonResult(w, n, _exact_p(ranks, w), True)
    return WilcoxonResult(w, n, _normal_p(ranks, w), False)
