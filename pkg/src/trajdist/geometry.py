"""Point sequences, the Euclidean metric, and generators for three curve families.

A point sequence is an ``(n, d)`` float64 array.  Sequence positions are
reported 1-based everywhere in this package, matching grid coordinates of the
dynamic-programming table; array access uses ``i - 1``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, GenerationError, ParamError

__all__ = [
    "Family",
    "CurveFamilyParams",
    "FamilyReport",
    "as_sequence",
    "check_pair",
    "euclid_dist",
    "gen_curve",
    "gen_pair",
    "validate_family",
    "polyline_length_in_ball",
]


class Family(str, enum.Enum):
    KAPPA_PACKED = "kappa-packed"
    KAPPA_BOUNDED = "kappa-bounded"
    BACKBONE = "backbone"

    @classmethod
    def parse(cls, name) -> "Family":
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower().replace("_", "-")
        aliases = {"packed": cls.KAPPA_PACKED, "bounded": cls.KAPPA_BOUNDED,
                   "kappapacked": cls.KAPPA_PACKED, "kappabounded": cls.KAPPA_BOUNDED}
        for member in cls:
            if member.value == key:
                return member
        if key.replace("-", "") in aliases:
            return aliases[key.replace("-", "")]
        if key in aliases:
            return aliases[key]
        raise ParamError(f"unknown curve family {name!r}")


@dataclass(frozen=True)
class CurveFamilyParams:
    family: Family
    kappa: float = 20.0
    c1: float = 1.2
    c2: float = 1.8
    seed: int = 0
    dim: int = 2

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        if not self.kappa > 0:
            raise ParamError("kappa must be positive")
        if not (0 < self.c1 <= self.c2):
            raise ParamError("need 0 < c1 <= c2")
        if self.dim < 1:
            raise ParamError("dim must be >= 1")


@dataclass(frozen=True)
class FamilyReport:
    ok: bool
    worst_ratio: float


def as_sequence(points, name="sequence") -> np.ndarray:
    """Coerce ``points`` to a finite, nonempty ``(n, d)`` float64 array."""
    arr = np.asarray(points, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be a 2-d array of points, got shape {arr.shape}")
    if arr.shape[0] == 0:
        raise DimensionError(f"{name} is empty")
    if arr.shape[1] == 0:
        raise DimensionError(f"{name} has zero-dimensional points")
    if not np.all(np.isfinite(arr)):
        raise DimensionError(f"{name} has non-finite coordinates")
    return np.ascontiguousarray(arr)


def check_pair(P, Q):
    P = as_sequence(P, "P")
    Q = as_sequence(Q, "Q")
    if P.shape[1] != Q.shape[1]:
        raise DimensionError(f"dimension mismatch: {P.shape[1]} vs {Q.shape[1]}")
    return P, Q


def euclid_dist(p, q) -> float:
    p = np.asarray(p, dtype=np.float64).ravel()
    q = np.asarray(q, dtype=np.float64).ravel()
    if p.shape != q.shape:
        raise DimensionError(f"dimension mismatch: {p.size} vs {q.size}")
    diff = p - q
    return float(math.sqrt(float(np.dot(diff, diff))))


def _dist(a, b) -> float:
    # The one distance formula used by both the backbone generator and its validator.
    diff = a - b
    return math.sqrt(float(np.dot(diff, diff)))


# ----------------------------------------------------------------------------
# generators


def gen_curve(params: CurveFamilyParams, n: int) -> np.ndarray:
    """Generate ``n`` points of the requested family, deterministically in the seed."""
    if n < 2:
        raise ParamError("n must be at least 2")
    rng = np.random.default_rng(np.random.PCG64(params.seed & 0xFFFFFFFFFFFFFFFF))
    if params.family is Family.KAPPA_PACKED:
        pts = _spiral(params.kappa, n, rng)
    elif params.family is Family.KAPPA_BOUNDED:
        pts = _koch(n, rng)
    else:
        return _backbone(params, n, rng)
    return _embed(pts, params.dim)


def spiral_turns(kappa: float) -> float:
    """Number of spiral turns whose polyline stays ``kappa``-packed.

    A ball centred on an N-turn spiral of outer radius R catches about pi*N*r^2/R
    of curve, so pi*N bounds the packedness; 0.7 leaves room for the sampled
    validator and for chord effects at small n.
    """
    if kappa < 2.0:
        raise ParamError(f"kappa={kappa} below 2: no polyline of positive length is that packed")
    return 0.7 * kappa / math.pi


def _spiral(kappa, n, rng):
    turns = spiral_turns(kappa)
    radius = rng.uniform(50.0, 100.0)
    if turns < 0.5:
        # too few turns to curl: a straight segment is 2-packed
        t = np.linspace(0.0, radius, n)
        return _rigid(np.column_stack([t, np.zeros(n)]), rng, radius)
    theta_end = 2.0 * math.pi * turns
    a = radius / theta_end
    # arclength table of r = a * theta, inverted by interpolation
    grid = np.linspace(0.0, theta_end, 20001)
    arclen = 0.5 * a * (grid * np.sqrt(1.0 + grid * grid) + np.arcsinh(grid))
    s = np.linspace(0.0, arclen[-1], n)
    theta = np.interp(s, arclen, grid)
    r = a * theta
    chirality = 1.0 if rng.random() < 0.5 else -1.0
    pts = np.column_stack([r * np.cos(theta), chirality * r * np.sin(theta)])
    return _rigid(pts, rng, radius)


def _koch(n, rng):
    level = max(1, math.ceil(math.log(n - 1, 4)))
    pts = np.array([[0.0, 0.0], [1.0, 0.0]])
    rot = np.array([[0.5, -math.sqrt(3) / 2], [math.sqrt(3) / 2, 0.5]])
    for _ in range(level):
        a = pts[:-1]
        b = pts[1:]
        d = (b - a) / 3.0
        p1 = a + d
        p3 = a + 2 * d
        p2 = p1 + d @ rot.T
        out = np.empty((4 * len(a) + 1, 2))
        out[0:-1:4] = a
        out[1::4] = p1
        out[2::4] = p2
        out[3::4] = p3
        out[-1] = pts[-1]
        pts = out
    pts = pts[:n] * rng.uniform(100.0, 200.0)
    return _rigid(pts, rng, 50.0)


def _rigid(pts, rng, spread):
    phi = rng.uniform(0.0, 2.0 * math.pi)
    c, s = math.cos(phi), math.sin(phi)
    rot = np.array([[c, -s], [s, c]])
    shift = rng.uniform(-spread / 4.0, spread / 4.0, size=2)
    return pts @ rot.T + shift


def _embed(pts, dim):
    if dim == 2:
        return np.ascontiguousarray(pts)
    if dim < 2:
        raise ParamError("planar families need dim >= 2")
    out = np.zeros((len(pts), dim))
    out[:, :2] = pts
    return out


def _random_unit(rng, dim):
    while True:
        v = rng.normal(size=dim)
        norm = np.linalg.norm(v)
        if norm > 1e-12:
            return v / norm


def _snap_step(prev, cand, c1, c2):
    """Move ``cand`` by a few ulps so ``_dist(cand, prev)`` lands in [c1, c2] exactly.

    Far from the origin the float lattice is coarse, and a narrow (or
    degenerate c1 == c2) interval is rarely hit by ``prev + length * direction``.
    We walk one secondary coordinate over nearby lattice values, solve the main
    coordinate for the target length, and keep the first exact hit.
    """
    step = _dist(cand, prev)
    if c1 <= step <= c2:
        return cand
    diff = cand - prev
    if len(prev) == 1:
        c = cand.copy()
        for _ in range(64):
            c[0] = np.nextafter(c[0], np.inf if (step < c1) == (diff[0] > 0) else -np.inf)
            step = _dist(c, prev)
            if c1 <= step <= c2:
                return c
        return None
    order = np.argsort(-np.abs(diff))
    k, j = int(order[0]), int(order[1])
    target = 0.5 * (c1 + c2)
    rest = float(np.sum(np.delete(diff, [j, k]) ** 2))
    shifts = np.arange(-2048, 2049)
    shifts = shifts[np.argsort(np.abs(shifts), kind="stable")]
    cj = cand[j] + shifts * np.spacing(cand[j])
    rem = target * target - rest - (cj - prev[j]) ** 2
    keep = rem > 0
    cj = cj[keep]
    ck = prev[k] + np.copysign(np.sqrt(rem[keep]), diff[k])
    for nudge in (0, 1, -1, 2, -2):
        ck_n = ck + nudge * np.spacing(ck)
        dk = ck_n - prev[k]
        dj = cj - prev[j]
        approx = np.sqrt(dk * dk + dj * dj + rest)
        close = np.flatnonzero((approx >= c1 - 4e-15 * c1) & (approx <= c2 + 4e-15 * c2))
        for idx in close[:64]:
            c = cand.copy()
            c[j] = cj[idx]
            c[k] = ck_n[idx]
            if c1 <= _dist(c, prev) <= c2:
                return c
    return None


def _backbone(params, n, rng, max_retries=1000, max_backtracks=200):
    c1, c2, dim = params.c1, params.c2, params.dim
    if not c1 > 1.0:
        raise ParamError("backbone generation needs 1 < c1 <= c2")
    pts = np.zeros((n, dim))
    cells: dict[tuple, list[int]] = {(0,) * dim: [0]}
    offsets = np.array(np.meshgrid(*[[-1, 0, 1]] * dim, indexing="ij")).reshape(dim, -1).T
    heading = _random_unit(rng, dim)
    drift = heading.copy()
    headings = np.zeros((n, dim))
    headings[0] = heading

    def cell_of(x):
        return tuple(int(v) for v in np.floor(x))

    def far_enough(cand, last):
        base = np.floor(cand).astype(np.int64)
        for off in offsets:
            for k in cells.get(tuple(int(v) for v in base + off), ()):
                if k != last and not _dist(cand, pts[k]) > 1.0:
                    return False
        return True

    backtracks = 0
    depth = 2
    i = 1
    while i < n:
        prev = pts[i - 1]
        heading = headings[i - 1]
        for attempt in range(max_retries):
            # persistent walk; fall back to uniform directions when boxed in
            if attempt < max_retries // 2:
                direction = heading + rng.normal(scale=0.35, size=dim)
                norm = np.linalg.norm(direction)
                direction = direction / norm if norm > 1e-12 else _random_unit(rng, dim)
            else:
                direction = _random_unit(rng, dim)
            cand = _snap_step(prev, prev + rng.uniform(c1, c2) * direction, c1, c2)
            if cand is not None and far_enough(cand, i - 1):
                break
        else:
            # boxed in: undo a stretch of the walk and regrow it
            backtracks += 1
            if backtracks > max_backtracks or i == 1:
                raise GenerationError(f"backbone step {i} infeasible after {max_retries} retries")
            back = min(depth, i - 1)
            for t in range(i - back, i):
                cells[cell_of(pts[t])].remove(t)
            i -= back
            depth = min(2 * depth, 256)
            continue
        pts[i] = cand
        # a weak pull towards a fixed drift keeps the walk from curling into itself
        h = 0.85 * direction + 0.15 * drift
        headings[i] = h / np.linalg.norm(h)
        cells.setdefault(cell_of(cand), []).append(i)
        i += 1
    return pts


def gen_pair(family, n: int, seed: int, kappa: float = 20.0, dim: int = 2, kind: int | None = None):
    """A test pair (P, Q) of about n points each, deterministic in the seed.

    Q is, by ``kind`` (default ``seed % 4``): 0, an independent curve of the
    same family; 1, a noisy copy of P; 2, a time-warped noisy copy of P; 3, a
    resampled copy of P translated by 10 to 1000 sample spacings.  Both are
    rescaled so the mean step of P is a random spacing in [0.02, 1], which moves
    instances between the regimes where rectangles are single cells and where
    they span many cells.
    """
    rng = np.random.default_rng(np.random.PCG64([seed & 0xFFFFFFFF, 7]))
    family = Family.parse(family)
    P = gen_curve(CurveFamilyParams(family, kappa=kappa, seed=2 * seed, dim=dim), n)
    kind = seed % 4 if kind is None else kind
    n_q = max(2, n - int(rng.integers(0, 4)))
    steps = np.linalg.norm(np.diff(P, axis=0), axis=1)
    spacing = float(steps.mean()) if steps.size and steps.mean() > 0 else 1.0
    if kind == 0:
        Q = gen_curve(CurveFamilyParams(family, kappa=kappa, seed=2 * seed + 1, dim=dim), n_q)
    else:
        if kind == 2:
            # random monotone reparametrisation
            w = rng.gamma(0.7, size=n_q)
            idx = np.concatenate([[0.0], np.cumsum(w)[:-1]])
            idx = idx / idx[-1] * (n - 1)
        else:
            idx = np.linspace(0, n - 1, n_q)
        base = np.floor(idx).astype(int)
        frac = (idx - base)[:, None]
        nxt = np.minimum(base + 1, n - 1)
        Q = (1 - frac) * P[base] + frac * P[nxt]
        if kind == 3:
            direction = rng.normal(size=dim)
            direction /= np.linalg.norm(direction)
            Q = Q + direction * spacing * 10.0 ** rng.uniform(1.0, 3.0)
        else:
            noise = spacing * float(np.exp(rng.uniform(np.log(0.05), np.log(20.0))))
            Q = Q + rng.normal(scale=noise, size=Q.shape)
    target = float(np.exp(rng.uniform(np.log(0.02), 0.0)))
    scale = target / spacing
    return np.ascontiguousarray(P * scale), np.ascontiguousarray(Q * scale)


# ----------------------------------------------------------------------------
# validators


def polyline_length_in_ball(seq, center, radius) -> float:
    """Length of the polyline through ``seq`` inside the closed ball."""
    seq = as_sequence(seq)
    a = seq[:-1] - center
    d = seq[1:] - seq[:-1]
    return float(_clip_lengths(a, d, radius).sum())


def _clip_lengths(a, d, radius):
    # segment a + t d, t in [0, 1]; solve |a + t d|^2 <= r^2
    dd = np.einsum("ij,ij->i", d, d)
    ad = np.einsum("ij,ij->i", a, d)
    aa = np.einsum("ij,ij->i", a, a)
    out = np.zeros(len(a))
    moving = dd > 0
    disc = ad[moving] ** 2 - dd[moving] * (aa[moving] - radius * radius)
    ok = disc > 0
    root = np.sqrt(np.where(ok, disc, 0.0))
    t1 = (-ad[moving] - root) / dd[moving]
    t2 = (-ad[moving] + root) / dd[moving]
    lo = np.clip(t1, 0.0, 1.0)
    hi = np.clip(t2, 0.0, 1.0)
    out[moving] = np.where(ok, np.maximum(hi - lo, 0.0), 0.0) * np.sqrt(dd[moving])
    return out


def validate_family(seq, params: CurveFamilyParams, resolution: int = 8) -> FamilyReport:
    """Sampled membership check for the curve family named in ``params``.

    ``worst_ratio`` is at most 1 exactly when the check passes, except for the
    backbone family whose strict separation rule is reported separately in ``ok``.
    """
    if resolution < 1:
        raise ParamError("resolution must be >= 1")
    seq = as_sequence(seq)
    if params.family is Family.KAPPA_PACKED:
        return _check_packed(seq, params.kappa, resolution)
    if params.family is Family.KAPPA_BOUNDED:
        return _check_bounded(seq, params.kappa, resolution)
    return _check_backbone(seq, params.c1, params.c2)


# rounding slack for the geometric (packed/bounded) checks; backbone rules are exact
_RATIO_TOL = 1e-9


def _check_packed(seq, kappa, resolution, max_centers=600):
    n = len(seq)
    if n < 2:
        return FamilyReport(True, 0.0)
    seglen = np.linalg.norm(np.diff(seq, axis=0), axis=1)
    positive = seglen[seglen > 0]
    span = float(np.linalg.norm(seq.max(axis=0) - seq.min(axis=0)))
    if positive.size == 0 or span == 0:
        return FamilyReport(True, 0.0)
    r_min = float(positive.min()) / 2.0
    r_max = span
    radii = np.geomspace(r_min, r_max, resolution) if resolution > 1 else np.array([r_max])
    centers = np.unique(np.linspace(0, n - 1, min(n, max_centers)).round().astype(int))
    d = seq[1:] - seq[:-1]
    worst = 0.0
    for c in centers:
        a = seq[:-1] - seq[c]
        for r in radii:
            length = _clip_lengths(a, d, r).sum()
            worst = max(worst, length / (kappa * r))
    return FamilyReport(bool(worst <= 1.0 + _RATIO_TOL), float(worst))


def _check_bounded(seq, kappa, resolution, max_anchors=400):
    n = len(seq)
    if n < 3:
        return FamilyReport(True, 0.0)
    dist = np.linalg.norm(seq[:, None, :] - seq[None, :, :], axis=2)
    anchors = range(n) if n <= max_anchors else np.unique(
        np.linspace(0, n - 1, max(max_anchors, resolution)).round().astype(int))
    worst = 0.0
    for s in anchors:
        if s + 2 >= n:
            continue
        ts = np.arange(s + 2, n)
        ks = np.arange(s + 1, n - 1)
        # reach[t, k] = min distance of vertex k to the two anchors s and t
        reach = np.minimum(dist[s, ks][None, :], dist[np.ix_(ts, ks)])
        between = ks[None, :] < ts[:, None]
        far = np.where(between, reach, 0.0).max(axis=1)
        radius = 0.5 * kappa * dist[s, ts]
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(radius > 0, far / radius, np.where(far > 0, np.inf, 0.0))
        worst = max(worst, float(ratio.max()))
    return FamilyReport(bool(worst <= 1.0 + _RATIO_TOL), worst)


def _check_backbone(seq, c1, c2):
    n = len(seq)
    if n < 2:
        return FamilyReport(True, 0.0)
    steps = [_dist(seq[i], seq[i - 1]) for i in range(1, n)]
    ok = all(c1 <= s <= c2 for s in steps)
    worst = max(max(c1 / s if s > 0 else math.inf for s in steps), max(steps) / c2)
    from scipy.spatial import cKDTree

    tree = cKDTree(seq)
    closest = math.inf
    for i, j in tree.query_pairs(1.0 + 1e-9, output_type="ndarray"):
        if abs(int(i) - int(j)) > 1:
            dij = _dist(seq[i], seq[j])
            closest = min(closest, dij)
            if not dij > 1.0:
                ok = False
    if closest < math.inf:
        worst = max(worst, 1.0 / closest if closest > 0 else math.inf)
    return FamilyReport(bool(ok), float(worst))
