"""Semantic place classification from coordinates.

Per-label kernel density scores over great-circle distances, optional
DBSCAN region gating, and the evaluation and map-export tooling around them.
"""
__version__ = "0.1.0"

from ._backend import name as backend_name
from .classify import (
    ClassifierConfig,
    ClassifierModel,
    ClassScores,
    CrossValidatedBandwidth,
    baseline_dominant,
    baseline_random,
    class_scores,
    fit,
    fuse_scores,
    predict,
)
from .cluster import NOISE, ClusterAssignment, DbscanParams, dbscan, region_of
from .density import (
    BalloonBandwidth,
    DensityModel,
    FixedBandwidth,
    Kernel,
    kde_score,
    kernel_eval,
    knn_distance_km,
    select_bandwidth_cv,
)
from .errors import (
    BudgetError,
    EmptyInputError,
    FoldError,
    GeoplaceError,
    InputError,
    InsufficientDataError,
    ParseError,
    ValidationError,
)
from .evaluate import EvalReport, FoldPlan, WilcoxonResult, cross_validate, stratified_kfold, wilcoxon_signed_rank
from .geo import EARTH_RADIUS_KM, GeoPoint, haversine_km, pairwise_distances_km
from .labels import LABELS, LabeledPlace, SemanticLabel
from .mapgrid import AnnotatedGrid, BoundingBox, annotate_grid, emit_geojson
