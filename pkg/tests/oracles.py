"""Independent reference implementations the package is checked against.

None of these import the code paths they verify: distances use mpmath,
DBSCAN is a line-by-line transcription with an O(n^2) neighbourhood scan,
and densities are summed term by term in plain Python.
"""
import itertools
import math

import mpmath

R = 6372.8


def vincenty_sphere_km(lat1, lon1, lat2, lon2, r=R, dps=40):
    """Great-circle distance with the atan2 (Vincenty special case) formula at high precision."""
    with mpmath.workdps(dps):
        p1, p2 = mpmath.radians(lat1), mpmath.radians(lat2)
        dl = mpmath.radians(mpmath.mpf(lon2) - mpmath.mpf(lon1))
        num = mpmath.sqrt((mpmath.cos(p2) * mpmath.sin(dl)) ** 2
                          + (mpmath.cos(p1) * mpmath.sin(p2) - mpmath.sin(p1) * mpmath.cos(p2) * mpmath.cos(dl)) ** 2)
        den = mpmath.sin(p1) * mpmath.sin(p2) + mpmath.cos(p1) * mpmath.cos(p2) * mpmath.cos(dl)
        return float(mpmath.mpf(r) * mpmath.atan2(num, den))


def law_of_cosines_km(lat1, lon1, lat2, lon2, r=R, dps=60):
    with mpmath.workdps(dps):
        p1, p2 = mpmath.radians(lat1), mpmath.radians(lat2)
        dl = mpmath.radians(mpmath.mpf(lon2) - mpmath.mpf(lon1))
        c = mpmath.sin(p1) * mpmath.sin(p2) + mpmath.cos(p1) * mpmath.cos(p2) * mpmath.cos(dl)
        c = max(min(c, 1), -1)
        return float(mpmath.mpf(r) * mpmath.acos(c))


def plain_haversine(lat1, lon1, lat2, lon2, r=R):
    p1, p2 = math.radians(lat1), math.radians(lat2)
    a = (math.sin(math.radians(lat2 - lat1) / 2) ** 2
         + math.cos(p1) * math.cos(p2) * math.sin(math.radians(lon2 - lon1) / 2) ** 2)
    return 2 * r * math.asin(math.sqrt(min(1.0, a)))


def naive_dbscan(coords, eps, min_pts, r=R):
    """DBSCAN transcribed statement by statement: visit, regionQuery, expandCluster."""
    n = len(coords)

    def region_query(i):
        return [j for j in range(n) if plain_haversine(*coords[i], *coords[j], r) <= eps]

    visited = [False] * n
    cluster_of = [None] * n
    noise = [False] * n
    c = -1
    for v in range(n):
        if visited[v]:
            continue
        visited[v] = True
        neighbours = region_query(v)
        if len(neighbours) < min_pts:
            noise[v] = True
        else:
            c += 1
            # expandCluster
            cluster_of[v] = c
            k = 0
            while k < len(neighbours):
                w = neighbours[k]
                if not visited[w]:
                    visited[w] = True
                    more = region_query(w)
                    if len(more) >= min_pts:
                        for m in more:
                            if m not in neighbours:
                                neighbours.append(m)
                if cluster_of[w] is None:
                    cluster_of[w] = c
                k += 1
    return [-1 if x is None else x for x in cluster_of]


def same_partition(a, b):
    """Equal up to a relabelling of cluster ids (noise must match exactly)."""
    if len(a) != len(b):
        return False
    fwd, back = {}, {}
    for x, y in zip(a, b):
        if (x == -1) != (y == -1):
            return False
        if x == -1:
            continue
        if fwd.setdefault(x, y) != y or back.setdefault(y, x) != x:
            return False
    return True


def kernel(name, u):
    a = abs(u)
    if name == "GAUSSIAN":
        return math.exp(-u * u / 2) / math.sqrt(2 * math.pi)
    if name == "EXPONENTIAL":
        return math.exp(-a) / 2
    if a >= 1:
        return 0.0
    return {
        "UNIFORM": 0.5,
        "TRIANGULAR": 1 - a,
        "EPANECHNIKOV": 3 / 4 * (1 - u * u),
        "BIWEIGHT": 15 / 16 * (1 - u * u) ** 2,
        "TRIWEIGHT": 35 / 32 * (1 - u * u) ** 3,
    }[name]


def direct_kde(samples, probe, kernel_name, h=None, k=None, floor=0.001, r=R):
    """Term-by-term kernel sum; balloon bandwidth when ``k`` is given."""
    d = [plain_haversine(probe[0], probe[1], s[0], s[1], r) for s in samples]
    if k is not None:
        ds = sorted(d)
        h = max(ds[min(k, len(ds)) - 1], floor)
    return math.fsum(kernel(kernel_name, x / h) for x in d) / (len(samples) * h)


def brute_predict(training, probe, kernel_name, label_order, h=None, k=None, floor=0.001, priors=False):
    """Argmax of per-label direct sums; first label in ``label_order`` wins ties."""
    groups = {}
    for lat, lon, label in training:
        groups.setdefault(label, []).append((lat, lon))
    best, best_score = None, -1.0
    for label in label_order:
        if label not in groups:
            continue
        s = direct_kde(groups[label], probe, kernel_name, h=h, k=k, floor=floor)
        if priors:
            s *= len(groups[label]) / len(training)
        if s > best_score:
            best, best_score = label, s
    return best


def wilcoxon_enumeration_p(diffs):
    """Two-sided exact p by listing all 2^n sign patterns of the ranked differences."""
    d = [x for x in diffs if x != 0]
    n = len(d)
    if n == 0:
        return 1.0
    mags = sorted(abs(x) for x in d)
    ranks = {}
    for m in set(mags):
        pos = [i + 1 for i, v in enumerate(mags) if v == m]
        ranks[m] = sum(pos) / len(pos)
    rk = [ranks[abs(x)] for x in d]
    total = sum(rk)
    w_plus = sum(r for r, x in zip(rk, d) if x > 0)
    w = min(w_plus, total - w_plus)
    centre = total / 2
    hits = 0
    for signs in itertools.product((0, 1), repeat=n):
        t = sum(r for r, s in zip(rk, signs) if s)
        if abs(t - centre) >= abs(w - centre) - 1e-9:
            hits += 1
    return hits / 2 ** n
