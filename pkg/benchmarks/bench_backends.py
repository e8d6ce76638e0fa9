"""Time the compiled core against the NumPy fallback.

    python3 benchmarks/bench_backends.py [--n 2000] [--probes 2000] [--repeat 5]

Each kernel is run on identical inputs with both backends; the script checks
that the outputs agree before reporting the best-of-``repeat`` wall time.
The last rows time whole pipelines (fit + predict, and one 10-fold
cross-validation) through the public API with each backend selected.
"""
import argparse
import time

import numpy as np

from geoplace import _backend
from geoplace.evaluate import cross_validate, method, stratified_kfold
from geoplace.classify import ClassifierConfig, fit
from geoplace.synthetic import synthetic_city


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - start)
    return min(times), out


def kernels(n, m, seed):
    rng = np.random.default_rng(seed)
    lat, lon = rng.uniform(46.3, 46.7, n), rng.uniform(6.4, 6.9, n)
    plat, plon = rng.uniform(46.3, 46.7, m), rng.uniform(6.4, 6.9, m)
    hs = rng.uniform(0.2, 2.0, m)
    r = 6372.8
    small = min(n, 1500)
    cases = {
        f"pairwise_km n={small}": lambda impl: impl.pairwise_km(lat[:small], lon[:small], r),
        f"kth_distance {m}x{n} k=15": lambda impl: impl.kth_distance(lat, lon, plat, plon, r, 15),
        f"kde_sum gaussian {m}x{n}": lambda impl: impl.kde_sum(lat, lon, plat, plon, r, 0, hs),
        f"kde_sum epanechnikov {m}x{n}": lambda impl: impl.kde_sum(lat, lon, plat, plon, r, 5, hs),
        f"kde_balloon gaussian {m}x{n} k=15": lambda impl: impl.kde_balloon(lat, lon, plat, plon, r, 0, 15, 0.001)[0],
        f"kde_balloon gaussian 200x300 k=15":
            lambda impl: impl.kde_balloon(lat[:300], lon[:300], plat[:200], plon[:200], r, 0, 15, 0.001)[0],
    }
    dmat = _backend.AVAILABLE["numpy"].pairwise_km(lat[:small], lon[:small], r)
    cases[f"loo_loglik n={small}"] = lambda impl: impl.loo_loglik(dmat, 0, 0.5, (small - 1) * 0.5, -1e12)
    return cases


def pipelines(seed):
    places = synthetic_city(seed=seed, n_places=2000)
    probes = [p.location for p in synthetic_city(seed=seed + 1, n_places=2000)]
    plan = stratified_kfold(places, 10, seed)
    return {
        "fit + predict 2000 (kde-a-dbscan)":
            lambda: fit(places, ClassifierConfig(gate=True)).predict_many(probes),
        "10-fold CV 2000 places (kde-a)":
            lambda: cross_validate(places, method("kde-a"), plan).overall_accuracy,
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=2000, help="sample points")
    ap.add_argument("--probes", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    names = [b for b in ("numpy", "cython") if b in _backend.AVAILABLE]
    if len(names) < 2:
        print("compiled core not built; only the NumPy fallback is available")
    print(f"{'case':44s}" + "".join(f"{b:>12s}" for b in names) + ("     speedup" if len(names) == 2 else ""))

    def row(label, timings):
        line = f"{label:44s}" + "".join(f"{t * 1000:10.1f}ms" for t in timings)
        if len(timings) == 2:
            line += f"{timings[0] / timings[1]:11.1f}x"
        print(line)

    for label, fn in kernels(args.n, args.probes, args.seed).items():
        timings, outputs = [], []
        for b in names:
            t, out = best_of(lambda: fn(_backend.AVAILABLE[b]), args.repeat)
            timings.append(t)
            outputs.append(np.asarray(out))
        if len(outputs) == 2 and not np.allclose(outputs[0], outputs[1], rtol=1e-12, atol=0):
            raise SystemExit(f"{label}: backends disagree")
        row(label, timings)

    for label, fn in pipelines(args.seed).items():
        timings, outputs = [], []
        for b in names:
            previous = _backend.set_backend(b)
            try:
                t, out = best_of(fn, max(1, args.repeat // 2))
            finally:
                _backend.set_backend(previous)
            timings.append(t)
            outputs.append(out)
        if len(outputs) == 2 and outputs[0] != outputs[1]:
            raise SystemExit(f"{label}: backends disagree")
        row(label, timings)


if __name__ == "__main__":
    main()
