"""Command-line entry point: ``geoplace <subcommand> ...``.

Exit status is 0 on success, 1 for invalid input and 2 for runtime failures.
"""
from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import __version__
from .classify import ClassifierConfig, CrossValidatedBandwidth, fit, fuse_scores
from .cluster import DbscanParams
from .density import BalloonBandwidth, FixedBandwidth, Kernel
from .errors import InputError, ValidationError
from .evaluate import (
    METHODS,
    Method,
    cross_validate,
    method,
    read_report,
    stratified_kfold,
    wilcoxon_signed_rank,
    write_report,
)
from .geo import GeoPoint
from .ingest import (
    LocationSource,
    infer_locations,
    load_external_scores,
    load_gps,
    load_labels,
    load_places,
    load_visits,
    load_wifi,
    write_places,
)
from .labels import LABELS, LabeledPlace
from .mapgrid import BoundingBox, annotate_grid, emit_geojson
from .persist import load_model, save_model

log = logging.getLogger("geoplace")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _on_off(text: str) -> bool:
    t = text.strip().lower()
    if t in ("on", "true", "yes", "1"):
        return True
    if t in ("off", "false", "no", "0"):
        return False
    raise argparse.ArgumentTypeError(f"expected on/off, got {text!r}")


def _add_model_options(p, bandwidth_default="balloon"):
    p.add_argument("--kernel", default="gaussian", choices=[k.name.lower() for k in Kernel])
    p.add_argument("--bandwidth", default=bandwidth_default, choices=["balloon", "fixed", "cv"])
    p.add_argument("--h", type=float, default=0.5, help="fixed bandwidth in km (--bandwidth fixed)")
    p.add_argument("--k", type=int, default=15, help="balloon neighbour count")
    p.add_argument("--floor-km", type=float, default=0.001)
    p.add_argument("--gate", type=_on_off, default=False, metavar="{on,off}")
    p.add_argument("--eps-km", type=float, default=0.5)
    p.add_argument("--min-pts", type=int, default=4)
    p.add_argument("--use-priors", type=_on_off, default=False, metavar="{on,off}")
    p.add_argument("--pooled-balloon", type=_on_off, default=False, metavar="{on,off}")
    p.add_argument("--region-priors", type=_on_off, default=False, metavar="{on,off}",
                   help="with --gate on and --use-priors on, weight by the region's label frequencies")


def _config(args) -> ClassifierConfig:
    if args.bandwidth == "balloon":
        bw = BalloonBandwidth(args.k, args.floor_km)
    elif args.bandwidth == "fixed":
        bw = FixedBandwidth(args.h)
    else:
        bw = CrossValidatedBandwidth()
    return ClassifierConfig(kernel=Kernel.parse(args.kernel), bandwidth=bw, gate=args.gate,
                            dbscan=DbscanParams(args.eps_km, args.min_pts), use_priors=args.use_priors,
                            pooled_balloon=args.pooled_balloon, region_priors=args.region_priors)


def _method(args) -> Method:
    if args.method in ("random", "dominant"):
        return method(args.method)
    overrides = dict(kernel=Kernel.parse(args.kernel), dbscan=DbscanParams(args.eps_km, args.min_pts),
                     use_priors=args.use_priors, pooled_balloon=args.pooled_balloon,
                     region_priors=args.region_priors)
    if args.method != "kde-f":
        overrides["bandwidth"] = BalloonBandwidth(args.k, args.floor_km)
    return method(args.method, **overrides)


def cmd_infer_locations(args):
    visits = load_visits(args.visits)
    wifi = load_wifi(args.wifi)
    gps = load_gps(args.gps)
    labels = load_labels(args.labels)
    results = infer_locations(visits, wifi, gps, spherical_mean=args.spherical_mean, unique_aps=args.unique_aps)
    places, counts = [], {s: 0 for s in LocationSource}
    for res in results:
        counts[res.source] += 1
        if res.source is LocationSource.NONE:
            log.info("place %s: no in-window WiFi or GPS positions; excluded", res.place_id)
            continue
        if res.place_id not in labels:
            log.warning("place %s has no label; skipped", res.place_id)
            continue
        places.append(LabeledPlace(res.place_id, res.location, labels[res.place_id]))
    write_places(args.out, places)
    print(f"wifi={counts[LocationSource.WIFI]} gps={counts[LocationSource.GPS]} "
          f"excluded={counts[LocationSource.NONE]} written={len(places)}")


def cmd_fit(args):
    model = fit(load_places(args.places), _config(args))
    save_model(args.model, model)
    n_regions = model.assignment.n_clusters if model.assignment is not None else 0
    print(f"fitted {len(model.training)} places, {len(model.models)} labels, {n_regions} regions -> {args.model}")


def cmd_predict(args):
    model = load_model(args.model)
    scores = model.class_scores(GeoPoint(args.lat, args.lon))
    print(f"label: {scores.best().name}")
    print(f"provenance: {scores.provenance}")
    for label, value, present in zip(LABELS, scores.scores, scores.present):
        print(f"score_{label.name}: {value:.9g}" + ("" if present else " (absent)"))


def cmd_evaluate(args):
    places = load_places(args.places)
    plan = stratified_kfold(places, args.folds, args.seed)
    report = cross_validate(places, _method(args), plan, workers=args.workers)
    write_report(args.report, report)
    print(f"{report.method}: accuracy {report.overall_accuracy:.4f} "
          f"(fold mean {report.mean_fold_accuracy:.4f}) -> {args.report}")


def cmd_compare(args):
    a, b = read_report(args.report_a), read_report(args.report_b)
    res = wilcoxon_signed_rank(a.fold_accuracies, b.fold_accuracies)
    print(f"a: {a.method} {a.overall_accuracy:.4f}")
    print(f"b: {b.method} {b.overall_accuracy:.4f}")
    print(f"w_statistic: {res.w_statistic:g}")
    print(f"n_effective: {res.n_effective}")
    print(f"p_two_sided: {res.p_two_sided:.6g} ({'exact' if res.exact else 'normal approximation'})")
    print(f"significant_at_0_05: {'yes' if res.significant_at_0_05 else 'no'}")


def cmd_fuse(args):
    places = load_places(args.places)
    external = load_external_scores(args.external)
    missing = [p.place_id for p in places if p.place_id not in external]
    if missing:
        raise InputError(f"{len(missing)} place(s) lack external scores, e.g. {missing[0]!r}")
    if not 0.0 <= args.lam <= 1.0:
        raise ValidationError(f"--lambda must lie in [0, 1], got {args.lam}")
    base = _method(args)
    if base.config is None:
        raise ValidationError("fusion needs a KDE method")

    def fused_predict(model, fold, test):
        out = []
        for p in test:
            out.append(fuse_scores(model.class_scores(p.location), external[p.place_id], args.lam).best())
        return out

    plan = stratified_kfold(places, args.folds, args.seed)
    spec = Method(f"fuse({base.name},lambda={args.lam:g})", base.config)
    report = cross_validate(places, spec, plan, workers=args.workers, predict=fused_predict)
    report.config["lambda"] = f"{args.lam:g}"
    write_report(args.report, report)
    print(f"{report.method}: accuracy {report.overall_accuracy:.4f} -> {args.report}")


def cmd_annotate(args):
    model = load_model(args.model)
    grid = annotate_grid(model, BoundingBox.parse(args.bbox), args.cell_m)
    emit_geojson(grid, args.out)
    print(f"{grid.rows}x{grid.cols} cells -> {args.out}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="geoplace", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("infer-locations", help="average in-visit WiFi/GPS positions per place")
    p.add_argument("--visits", required=True)
    p.add_argument("--wifi", required=True)
    p.add_argument("--gps", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--spherical-mean", action="store_true")
    p.add_argument("--unique-aps", action="store_true")
    p.set_defaults(func=cmd_infer_locations)

    p = sub.add_parser("fit", help="fit a classifier and save it")
    p.add_argument("--places", required=True)
    p.add_argument("--model", required=True)
    _add_model_options(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="classify one coordinate")
    p.add_argument("--model", required=True)
    p.add_argument("--lat", type=float, required=True)
    p.add_argument("--lon", type=float, required=True)
    p.set_defaults(func=cmd_predict)

    for name, func, help_ in (("evaluate", cmd_evaluate, "stratified k-fold accuracy of one method"),
                              ("fuse", cmd_fuse, "cross-validate KDE scores fused with external scores")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--places", required=True)
        p.add_argument("--folds", type=int, default=10)
        p.add_argument("--seed", type=int, default=42)
        p.add_argument("--report", required=True)
        p.add_argument("--workers", type=int, default=1)
        if name == "evaluate":
            p.add_argument("--method", required=True, choices=METHODS)
        else:
            p.add_argument("--external", required=True)
            p.add_argument("--lambda", dest="lam", type=float, default=0.5)
            p.add_argument("--method", default="kde-a-dbscan", choices=METHODS[2:])
        _add_model_options(p)
        p.set_defaults(func=func)

    p = sub.add_parser("compare", help="Wilcoxon signed-rank test on two reports' fold accuracies")
    p.add_argument("--report-a", required=True)
    p.add_argument("--report-b", required=True)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("annotate", help="label a grid over a bounding box and write GeoJSON")
    p.add_argument("--model", required=True)
    p.add_argument("--bbox", required=True, help="minLat,minLon,maxLat,maxLon")
    p.add_argument("--cell-m", type=float, default=100.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_annotate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors exit 1, --help/--version exit 0
        return exc.code if isinstance(exc.code, int) else 1
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
