import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from geoplace import (
    LABELS,
    BalloonBandwidth,
    ClassifierConfig,
    ClassScores,
    CrossValidatedBandwidth,
    DbscanParams,
    EmptyInputError,
    FixedBandwidth,
    GeoPoint,
    InsufficientDataError,
    Kernel,
    LabeledPlace,
    SemanticLabel,
    ValidationError,
    baseline_dominant,
    baseline_random,
    class_scores,
    fit,
    fuse_scores,
    predict,
)
from geoplace.classify import FUSION_FLOOR
from geoplace.synthetic import gaussian_clump, offset_point
from oracles import brute_predict, direct_kde

L = SemanticLabel
ORIGIN = GeoPoint(46.52, 6.63)


def places(points, labels):
    return [LabeledPlace(f"p{i}", p, lab) for i, (p, lab) in enumerate(zip(points, labels))]


def toy(seed=0, n=20):
    rng = np.random.default_rng(seed)
    pts = [offset_point(ORIGIN, *rng.normal(0, 1.5, 2)) for _ in range(n)]
    labs = [L.HOME if i % 2 else L.WORK for i in range(n)]
    return places(pts, labs)


class TestFit:
    def test_single_label(self):
        model = fit(places([ORIGIN, offset_point(ORIGIN, 1, 1)], [L.SHOP, L.SHOP]))
        assert list(model.models) == [L.SHOP]
        assert model.priors == {L.SHOP: 1.0}

    def test_priors_from_frequencies(self):
        pts = [offset_point(ORIGIN, i, 0) for i in range(4)]
        model = fit(places(pts, [L.HOME, L.HOME, L.HOME, L.WORK]))
        assert model.priors == {L.HOME: 0.75, L.WORK: 0.25}
        assert sum(model.priors.values()) == pytest.approx(1.0)

    def test_gating_single_cluster_matches_global(self):
        rng = np.random.default_rng(1)
        pts = [offset_point(ORIGIN, *rng.normal(0, 0.05, 2)) for _ in range(30)]
        labs = [LABELS[i % 3] for i in range(30)]
        model = fit(places(pts, labs), ClassifierConfig(gate=True, dbscan=DbscanParams(1.0, 3)))
        assert model.assignment.n_clusters == 1
        assert all(model.assignment.labels == 0)
        for label, dm in model.models.items():
            assert model.region_models[0][label] == dm

    def test_noise_only_in_global(self):
        rng = np.random.default_rng(2)
        dense = [offset_point(ORIGIN, *rng.normal(0, 0.05, 2)) for _ in range(10)]
        far = [offset_point(ORIGIN, 30, 30)]
        model = fit(places(dense + far, [L.HOME] * 10 + [L.WORK]), ClassifierConfig(gate=True))
        assert model.assignment.labels[-1] == -1
        assert L.WORK in model.models
        assert L.WORK not in model.region_models[0]

    def test_empty_training(self):
        with pytest.raises(InsufficientDataError):
            fit([])

    def test_duplicate_ids(self):
        with pytest.raises(ValidationError):
            fit([LabeledPlace("a", ORIGIN, L.HOME), LabeledPlace("a", ORIGIN, L.WORK)])

    def test_cross_validated_bandwidth_per_label(self):
        model = fit(toy(3), ClassifierConfig(bandwidth=CrossValidatedBandwidth((0.1, 1.0, 5.0))))
        for dm in model.models.values():
            assert isinstance(dm.bandwidth, FixedBandwidth)
            assert dm.bandwidth.h in (0.1, 1.0, 5.0)

    def test_cross_validated_single_point_label_falls_back_to_pooled(self):
        rng = np.random.default_rng(0)
        pts = [offset_point(ORIGIN, *rng.normal(0, 1, 2)) for _ in range(8)]
        training = places(pts, [L.HOME] * 7 + [L.TRANSPORT])
        model = fit(training, ClassifierConfig(bandwidth=CrossValidatedBandwidth((0.1, 1.0, 5.0))))
        assert model.models[L.TRANSPORT].bandwidth.h in (0.1, 1.0, 5.0)

    def test_immutable(self):
        model = fit(toy())
        with pytest.raises(AttributeError):
            model.config = ClassifierConfig()


class TestClassScores:
    def test_one_label_positive(self):
        model = fit(places([ORIGIN, offset_point(ORIGIN, 0.2, 0)], [L.HOME, L.HOME]))
        s = class_scores(model, offset_point(ORIGIN, 0.1, 0.1))
        assert [lab for lab in LABELS if s[lab] > 0] == [L.HOME]
        assert s.present == tuple(lab is L.HOME for lab in LABELS)
        assert s.provenance == "GLOBAL"

    @pytest.mark.parametrize("bw", [FixedBandwidth(0.8), BalloonBandwidth(3)])
    def test_toy_matches_direct_summation(self, bw, backend):
        training = toy(5)
        model = fit(training, ClassifierConfig(bandwidth=bw))
        probe = offset_point(ORIGIN, 0.4, -0.3)
        s = class_scores(model, probe)
        for label in (L.HOME, L.WORK):
            coords = [(p.location.lat, p.location.lon) for p in training if p.label is label]
            kw = {"h": bw.h} if isinstance(bw, FixedBandwidth) else {"k": bw.k}
            assert s[label] == pytest.approx(direct_kde(coords, (probe.lat, probe.lon), "GAUSSIAN", **kw), rel=1e-12)
        assert s[L.SHOP] == 0.0

    def test_priors_multiply(self):
        training = toy(6)
        plain = class_scores(fit(training), ORIGIN)
        weighted = class_scores(fit(training, ClassifierConfig(use_priors=True)), ORIGIN)
        for label in (L.HOME, L.WORK):
            assert weighted[label] == pytest.approx(plain[label] * 0.5, rel=1e-15)

    def test_gated_probe_outside_regions_uses_global(self):
        rng = np.random.default_rng(7)
        pts = [offset_point(ORIGIN, *rng.normal(0, 0.1, 2)) for _ in range(20)]
        training = places(pts, [LABELS[i % 4] for i in range(20)])
        gated = fit(training, ClassifierConfig(gate=True))
        ungated = fit(training)
        probe = offset_point(ORIGIN, 20, 20)
        a, b = class_scores(gated, probe), class_scores(ungated, probe)
        assert a.provenance == "GLOBAL"
        assert a.scores == b.scores

    def test_gated_probe_inside_region_uses_members_only(self):
        rng = np.random.default_rng(8)
        a = [offset_point(ORIGIN, *rng.normal(0, 0.05, 2)) for _ in range(10)]
        b_centre = offset_point(ORIGIN, 0, 8)
        b = [offset_point(b_centre, *rng.normal(0, 0.05, 2)) for _ in range(10)]
        training = places(a + b, [L.HOME] * 5 + [L.WORK] * 5 + [L.SHOP] * 10)
        model = fit(training, ClassifierConfig(gate=True, bandwidth=FixedBandwidth(5.0)))
        s = class_scores(model, ORIGIN)
        assert s.provenance.startswith("REGION(")
        assert s[L.SHOP] == 0.0
        coords = [(p.location.lat, p.location.lon) for p in training[:5]]
        assert s[L.HOME] == pytest.approx(direct_kde(coords, (ORIGIN.lat, ORIGIN.lon), "GAUSSIAN", h=5.0), rel=1e-12)

    def test_value_type_validation(self):
        with pytest.raises(ValidationError):
            ClassScores((0.0,) * 10, (False,) * 10)
        with pytest.raises(ValidationError):
            ClassScores((1.0,) * 9, (True,) * 9)
        with pytest.raises(ValidationError):
            ClassScores((math.nan,) + (0.0,) * 9, (True,) * 10)


class TestPredict:
    def test_single_label_always(self):
        model = fit(places([ORIGIN], [L.OUTDOOR_SPORTS]))
        for probe in (ORIGIN, GeoPoint(-40, 170), GeoPoint(89, -179)):
            assert predict(model, probe) is L.OUTDOOR_SPORTS

    def test_dense_work_beats_distant_shop(self):
        work = [ORIGIN] * 50
        shop = [offset_point(ORIGIN, 0, 10.0)]
        model = fit(places(work + shop, [L.WORK] * 50 + [L.SHOP]), ClassifierConfig(bandwidth=FixedBandwidth(0.5)))
        s = class_scores(model, ORIGIN)
        assert s[L.WORK] == pytest.approx(0.3989422804014327 / 0.5, rel=1e-12)
        assert s[L.SHOP] < 1e-80
        assert predict(model, ORIGIN) is L.WORK

    def test_all_zero_tie_goes_to_first_label(self):
        training = places([ORIGIN, offset_point(ORIGIN, 1, 0)], [L.WORK, L.HOME])
        model = fit(training, ClassifierConfig(kernel=Kernel.EPANECHNIKOV, bandwidth=FixedBandwidth(0.1)))
        # BAR_RESTAURANT is first in label order but absent from training: never predicted
        assert predict(model, offset_point(ORIGIN, 50, 50)) is L.HOME
        training.append(LabeledPlace("x", offset_point(ORIGIN, 2, 0), L.BAR_RESTAURANT))
        model = fit(training, ClassifierConfig(kernel=Kernel.EPANECHNIKOV, bandwidth=FixedBandwidth(0.1)))
        assert predict(model, offset_point(ORIGIN, 50, 50)) is L.BAR_RESTAURANT

    def test_absent_labels_never_predicted(self):
        rng = np.random.default_rng(0)
        model = fit(toy(9), ClassifierConfig(kernel=Kernel.UNIFORM, bandwidth=FixedBandwidth(0.01)))
        for _ in range(50):
            assert predict(model, offset_point(ORIGIN, *rng.normal(0, 20, 2))) in (L.HOME, L.WORK)

    def test_predict_many_equals_predict(self):
        model = fit(toy(10), ClassifierConfig(gate=True))
        rng = np.random.default_rng(1)
        probes = [offset_point(ORIGIN, *rng.normal(0, 2, 2)) for _ in range(40)]
        assert model.predict_many(probes) == [predict(model, p) for p in probes]
        assert model.predict_many([]) == []

    def test_parallel_equals_sequential(self):
        model = fit(toy(11, 40), ClassifierConfig(gate=True, dbscan=DbscanParams(1.0, 3)))
        rng = np.random.default_rng(2)
        probes = [offset_point(ORIGIN, *rng.normal(0, 2, 2)) for _ in range(60)]
        with ThreadPoolExecutor(4) as pool:
            par = list(pool.map(model.predict, probes))
        assert par == [model.predict(p) for p in probes]


def random_instance(rng):
    n = int(rng.integers(1, 31))
    n_labels = int(rng.integers(1, 11))
    pts = [offset_point(ORIGIN, *rng.normal(0, 3, 2)) for _ in range(n)]
    if rng.random() < 0.3:  # duplicates make ties likely
        pts = [pts[int(i)] for i in rng.integers(0, max(1, n // 3), n)]
    labs = [LABELS[int(i)] for i in rng.integers(0, n_labels, n)]
    return places(pts, labs)


class TestInvariants:
    @pytest.mark.parametrize("seed", range(60))
    def test_brute_force_oracle(self, seed, backend):
        rng = np.random.default_rng(seed)
        training = random_instance(rng)
        kernel = list(Kernel)[seed % 7]
        if seed % 2:
            bw, kw = FixedBandwidth(float(rng.uniform(0.3, 4))), {}
            kw["h"] = bw.h
        else:
            bw = BalloonBandwidth(int(rng.integers(1, 20)))
            kw = {"k": bw.k}
        priors = bool(seed % 3 == 0)
        model = fit(training, ClassifierConfig(kernel=kernel, bandwidth=bw, use_priors=priors))
        rows = [(p.location.lat, p.location.lon, p.label) for p in training]
        for _ in range(5):
            probe = offset_point(ORIGIN, *rng.normal(0, 4, 2)) if rng.random() < 0.7 else training[0].location
            expected = brute_predict(rows, (probe.lat, probe.lon), kernel.name, LABELS, priors=priors, **kw)
            assert predict(model, probe) is expected

    def test_scale_invariance(self):
        model = fit(toy(12))
        s = class_scores(model, ORIGIN)
        scaled = ClassScores(tuple(x * 1e6 for x in s.scores), s.present)
        assert scaled.best() is s.best() is predict(model, ORIGIN)

    def test_prior_neutrality(self):
        training = toy(13, 30)  # 15 of each label
        rng = np.random.default_rng(0)
        probes = [offset_point(ORIGIN, *rng.normal(0, 2, 2)) for _ in range(50)]
        a = fit(training).predict_many(probes)
        b = fit(training, ClassifierConfig(use_priors=True)).predict_many(probes)
        assert a == b

    def test_gating_consistency_single_cluster(self):
        rng = np.random.default_rng(14)
        pts = [offset_point(ORIGIN, *rng.normal(0, 0.1, 2)) for _ in range(30)]
        training = places(pts, [LABELS[int(i)] for i in rng.integers(0, 4, 30)])
        cfg = dict(dbscan=DbscanParams(2.0, 2))
        gated = fit(training, ClassifierConfig(gate=True, **cfg))
        assert gated.assignment.n_clusters == 1 and all(gated.assignment.labels == 0)
        ungated = fit(training, ClassifierConfig(**cfg))
        probes = [offset_point(ORIGIN, *rng.normal(0, 0.1, 2)) for _ in range(40)]
        assert gated.predict_many(probes) == ungated.predict_many(probes)

    def test_determinism(self):
        training = toy(15)
        cfg = ClassifierConfig(gate=True, bandwidth=CrossValidatedBandwidth())
        a, b = fit(training, cfg), fit(training, cfg)
        assert a.models == b.models
        assert class_scores(a, ORIGIN) == class_scores(b, ORIGIN)


class TestFusion:
    def kde(self, values):
        return ClassScores(tuple(values), (True,) * 10)

    def test_lambda_zero_follows_external(self):
        kde = self.kde([0.9] + [0.01] * 9)
        ext = {L.HOME: 3.0, L.WORK: 1.0}
        assert fuse_scores(kde, ext, 0.0).best() is L.HOME

    def test_lambda_one_uniform_external_follows_kde(self):
        kde = self.kde([0.1] * 4 + [0.7] + [0.1] * 5)
        assert fuse_scores(kde, [1.0] * 10, 1.0).best() is LABELS[4]

    def test_geometric_symmetry(self):
        kde = {L.HOME: 0.2, L.WORK: 0.8}
        kde = self.kde([kde.get(lab, 0.0) for lab in LABELS])
        fused = fuse_scores(kde, {L.HOME: 0.8, L.WORK: 0.2}, 0.5)
        assert fused[L.HOME] == pytest.approx(fused[L.WORK], rel=1e-15)
        assert sum(fused.scores) == pytest.approx(1.0)

    def test_hand_computed(self):
        kde = self.kde([1.0, 3.0] + [0.0] * 8)
        ext = [2.0, 2.0] + [0.0] * 8
        fused = fuse_scores(kde, ext, 0.25)
        k = np.maximum(np.array([0.25, 0.75] + [0.0] * 8), FUSION_FLOOR)
        e = np.maximum(np.array([0.5, 0.5] + [0.0] * 8), FUSION_FLOOR)
        expected = e ** 0.75 * k ** 0.25
        np.testing.assert_allclose(fused.scores, expected / expected.sum(), rtol=1e-14)

    def test_zero_vectors_become_uniform(self):
        kde = self.kde([0.0] * 10)
        kde = ClassScores(kde.scores, (True,) * 10)
        fused = fuse_scores(kde, [0.0] * 10, 0.5)
        np.testing.assert_allclose(fused.scores, 0.1)

    @pytest.mark.parametrize("lam", [-0.1, 1.5, math.nan])
    def test_bad_lambda(self, lam):
        with pytest.raises(ValidationError):
            fuse_scores(self.kde([1.0] * 10), [1.0] * 10, lam)

    def test_bad_external(self):
        with pytest.raises(ValidationError):
            fuse_scores(self.kde([1.0] * 10), [1.0] * 9)
        with pytest.raises(ValidationError):
            fuse_scores(self.kde([1.0] * 10), [-1.0] + [1.0] * 9)


class TestBaselines:
    def test_random_accuracy(self):
        rng = np.random.default_rng(0)
        truth = [LABELS[int(i)] for i in rng.integers(0, 10, 10_000)]
        preds = baseline_random(LABELS, seed=3).predict_many([None] * 10_000)
        acc = np.mean([a is b for a, b in zip(preds, truth)])
        assert 0.09 <= acc <= 0.11

    def test_random_reproducible(self):
        a = baseline_random(LABELS, seed=9).predict_many([None] * 100)
        assert a == baseline_random(LABELS, seed=9).predict_many([None] * 100)
        assert baseline_random(LABELS, seed=9).predict() == a[0]
        assert set(a) <= set(LABELS)

    def test_dominant(self):
        labs = [L.WORK] * 5 + [L.HOME] * 3
        assert baseline_dominant(labs).predict() is L.WORK
        assert baseline_dominant([L.WORK, L.HOME]).predict() is L.HOME  # tie: label order
        assert baseline_dominant(labs).predict_many([None, None]) == [L.WORK, L.WORK]

    def test_empty(self):
        with pytest.raises(EmptyInputError):
            baseline_random([])
        with pytest.raises(EmptyInputError):
            baseline_dominant([])
