"""Empirical stability probes: orbit distortion in the vertex-star coned
metric, stability verdicts, Morse-gauge sampling, quasi-geodesic fits and
local-to-global experiments.

Cone distances come from ``cone_distance_restricted``; every verdict that
relies on them demands agreement across at least two restriction radii.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .cayley import cone_distance_restricted, standard_geodesic
from .errors import NoSamples, PreconditionFailed, WindowViolation
from .graph import has_isolated_vertices
from .words import NormalForm, QGParams, word_length

STABLE, UNSTABLE, INCONCLUSIVE = "Stable", "Unstable", "Inconclusive"


@dataclass
class Thresholds:
    cap: int = 2
    slope: Fraction = Fraction(1, 4)
    # standard distances must exceed factor * cap for an unstable verdict
    factor: int = 10


@dataclass
class DistortionCurve:
    element: str
    rows: list  # (n, standard, [cone at each radius])
    radii: list  # per row, the radii used

    @property
    def stabilized(self) -> bool:
        return all(len({c for c in cones if c is not None}) == 1 for _, _, cones in self.rows)

    def cone(self, n: int) -> Optional[int]:
        cones = next(c for m, _, c in self.rows if m == n)
        return next((v for v in cones if v is not None), None)

    def to_csv(self) -> str:
        k = max((len(c) for _, _, c in self.rows), default=0)
        lines = [",".join(["n", "standard"] + [f"cone_R{i + 1}" for i in range(k)])]
        for n, std, cones in self.rows:
            lines.append(",".join("" if v is None else str(v) for v in [n, std, *cones]))
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        return {"element": self.element,
                "rows": [{"n": n, "standard": s, "cone": c, "radii": r}
                         for (n, s, c), r in zip(self.rows, self.radii)]}


def distortion_curve(g: NormalForm, n_max: int, radii: Optional[Sequence[int]] = None,
                     slacks: Sequence[int] = (0, 4), method: str = "auto") -> DistortionCurve:
    """Rows for g^n, n = 1..n_max. With ``radii`` the same absolute radii are
    used on every row; otherwise row n uses R = |g^n| + slack per slack."""
    rows, used = [], []
    x = g.gp.identity()
    for n in range(1, n_max + 1):
        x = x * g
        std = word_length(x)
        rs = list(radii) if radii is not None else [std + s for s in slacks]
        # a radius below |g^n| does not reach g^n; such cells stay empty
        cones = [cone_distance_restricted(x, R, method) if R >= std else None for R in rs]
        rows.append((n, std, cones))
        used.append(rs)
    return DistortionCurve(str(g), rows, used)


@dataclass
class StabilityVerdict:
    verdict: str
    reason: str
    evidence: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"verdict": self.verdict, "reason": self.reason, "evidence": self.evidence}


def stability_verdict(g: NormalForm, n_max: int, slacks: Sequence[int] = (0, 4),
                      thresholds: Optional[Thresholds] = None, radii=None) -> StabilityVerdict:
    t = thresholds or Thresholds()
    gp = g.gp
    policy = {"cap": t.cap, "slope": str(t.slope), "factor": t.factor, "n_max": n_max,
              "slacks": list(slacks) if radii is None else None, "radii": radii}
    if has_isolated_vertices(gp.graph) or not gp.all_infinite:
        return StabilityVerdict(INCONCLUSIVE, "OutOfScope", {"policy": policy})
    if g.is_identity():
        return StabilityVerdict(INCONCLUSIVE, "identity element", {"policy": policy})
    curve = distortion_curve(g, n_max, radii, slacks)
    cones = [curve.cone(n) for n, _, _ in curve.rows]
    if None in cones:
        return StabilityVerdict(INCONCLUSIVE, "radii do not reach every power", {"policy": policy})
    stds = [s for _, s, _ in curve.rows]
    fitted = min(Fraction(c, n) for (n, _, _), c in zip(curve.rows, cones))
    evidence = {"policy": policy, "stabilized": curve.stabilized, "fitted_slope": str(fitted),
                "n_range": [1, n_max], "curve": curve.to_json()["rows"]}
    if not curve.stabilized:
        return StabilityVerdict(INCONCLUSIVE, "cone distances not stabilized", evidence)
    if max(cones) <= t.cap and max(stds) > t.factor * t.cap:
        return StabilityVerdict(UNSTABLE, "cone distances bounded", evidence)
    if fitted >= t.slope and max(cones) > t.cap:
        return StabilityVerdict(STABLE, "cone distances grow linearly", evidence)
    return StabilityVerdict(INCONCLUSIVE, "neither threshold met", evidence)


def subgroup_stability(gens: Sequence[NormalForm], n_max: int, radius: int = 3,
                       thresholds: Optional[Thresholds] = None, samples: int = 8,
                       seed: int = 0) -> StabilityVerdict:
    """Probe sampled nontrivial elements of the subgroup ball as cyclic directions."""
    gp = gens[0].gp
    sym = list(gens) + [x.inverse() for x in gens]
    seen = {gp.identity()}
    frontier = [gp.identity()]
    for _ in range(radius):
        nxt = []
        for x in frontier:
            for s in sym:
                y = x * s
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    pool = sorted((x for x in seen if not x.is_identity()), key=lambda x: x.sort_key())
    rng = random.Random(seed)
    picked = pool if len(pool) <= samples else rng.sample(pool, samples)
    verdicts = [(str(x), stability_verdict(x, n_max, thresholds=thresholds)) for x in picked]
    kinds = {v.verdict for _, v in verdicts}
    ev = {"seed": seed, "elements": {x: v.verdict for x, v in verdicts}}
    if UNSTABLE in kinds:
        return StabilityVerdict(UNSTABLE, "an unstable element was sampled", ev)
    if kinds == {STABLE}:
        return StabilityVerdict(STABLE, "every sampled element is stable", ev)
    return StabilityVerdict(INCONCLUSIVE, "mixed or inconclusive samples", ev)


# -- quasi-geodesic fits -----------------------------------------------------


@dataclass
class Fit:
    lam: Fraction
    eps: Fraction
    ok: bool

    def to_json(self) -> dict:
        return {"lambda": str(self.lam), "epsilon": str(self.eps), "ok": self.ok}


def fit_quasi_geodesic(dist: Callable[[int, int], int], m: int, params: QGParams) -> Fit:
    """Two-pass fit over all index pairs of an m-point path: the least
    lambda making epsilon = 0 feasible (capped at ``params.lam``), then the
    least epsilon at that lambda. ``ok`` when both are within ``params``."""
    params.check()
    cap = Fraction(params.lam).limit_denominator(1000)
    pairs = [(j - i, dist(i, j)) for i in range(m) for j in range(i + 1, m)]
    lam = Fraction(1)
    feasible = True
    for t, d in pairs:
        if d == 0:
            feasible = False
            break
        lam = max(lam, Fraction(t, d), Fraction(d, t))
    if not feasible or lam > cap:
        lam = cap
    eps = Fraction(0)
    for t, d in pairs:
        eps = max(eps, t / lam - d, d - lam * t)
    ok = lam <= cap and eps <= Fraction(params.eps).limit_denominator(1000)
    return Fit(lam, eps, ok)


def is_quasi_geodesic(path: Sequence[NormalForm], k: float, c: float) -> bool:
    kk = Fraction(k).limit_denominator(1000)
    cc = Fraction(c).limit_denominator(1000)
    inv = [p.inverse() for p in path]
    for i in range(len(path)):
        for j in range(i + 1, len(path)):
            d = word_length(inv[i] * path[j])
            t = j - i
            if t / kk - cc > d or d > kk * t + cc:
                return False
    return True


def standard_fit(path: Sequence[NormalForm], params: QGParams) -> Fit:
    inv = [p.inverse() for p in path]
    return fit_quasi_geodesic(lambda i, j: word_length(inv[i] * path[j]), len(path), params)


def cone_fit(path: Sequence[NormalForm], params: QGParams, R: Optional[int] = None) -> Fit:
    inv = [p.inverse() for p in path]

    def d(i, j):
        x = inv[i] * path[j]
        return cone_distance_restricted(x, word_length(x) if R is None else R)

    return fit_quasi_geodesic(d, len(path), params)


def detectability_probe(path: Sequence[NormalForm], qg_params: QGParams = QGParams(4, 1),
                        R: Optional[int] = None) -> dict:
    """Fit the path in the standard metric and, vertex for vertex, in the
    R-restricted vertex-star coned metric."""
    s = standard_fit(path, qg_params)
    c = cone_fit(path, qg_params, R)
    return {"points": len(path), "qg_params": [qg_params.lam, qg_params.eps],
            "standard_fit": s.to_json(), "cone_fit": c.to_json()}


# -- Morse gauge -----------------------------------------------------------------


def _hausdorff(a: Sequence[NormalForm], b: Sequence[NormalForm]) -> int:
    ainv = [x.inverse() for x in a]
    d = [[word_length(x * y) for y in b] for x in ainv]
    return max(max(min(row) for row in d), max(min(d[i][j] for i in range(len(a))) for j in range(len(b))))


def _linear_extension(x: NormalForm, rng: Optional[random.Random], prefer: str = "min") -> list[NormalForm]:
    """Generator spelling of ``x`` following some linear extension of its
    letter heap: random, lexicographically least, or greatest."""
    gp = x.gp
    letters = [(i, s) for i, e in x.syl for s in gp._g[i].spell(e)]
    nc = gp._noncomm
    preds = [[p for p in range(q) if letters[p][0] in nc[letters[q][0]]] for q in range(len(letters))]
    done = [False] * len(letters)
    out = []
    for _ in range(len(letters)):
        avail = [q for q in range(len(letters)) if not done[q] and all(done[p] for p in preds[q])]
        if rng is not None:
            q = rng.choice(avail)
        elif prefer == "min":
            q = min(avail, key=lambda q: letters[q][0])
        else:
            q = max(avail, key=lambda q: letters[q][0])
        done[q] = True
        out.append(NormalForm(gp, (letters[q],)))
    return out


def _walk(start: NormalForm, steps: Sequence[NormalForm]) -> list[NormalForm]:
    path = [start]
    for s in steps:
        path.append(path[-1] * s)
    return path


def candidate_paths(geodesic: Sequence[NormalForm], budget: int, seed: int) -> list[list[NormalForm]]:
    """Deterministic pool of paths sharing the geodesic's endpoints: the two
    extreme spellings, random spellings, and random spikes (a generator
    power followed at once by its inverse)."""
    x, y = geodesic[0], geodesic[-1]
    gp = x.gp
    delta = x.inverse() * y
    rng = random.Random(seed)
    gens = gp.generators()
    pool = [list(geodesic), _walk(x, _linear_extension(delta, None, "min")),
            _walk(x, _linear_extension(delta, None, "max"))]
    while len(pool) < budget:
        steps = _linear_extension(delta, rng)
        if rng.random() < 0.5:
            s = rng.choice(gens)
            r = rng.randint(1, 3)
            i = rng.randrange(len(steps) + 1)
            steps = steps[:i] + [s] * r + [s.inverse()] * r + steps[i:]
        path = _walk(x, steps)
        assert path[-1] == y
        pool.append(path)
    return pool


@dataclass
class MorseGaugeTable:
    entries: dict  # (k, c) -> max Hausdorff distance, or None
    samples: dict  # (k, c) -> number of accepted paths
    seed: int

    def to_csv(self) -> str:
        lines = ["k,c,hausdorff"]
        for (k, c), h in sorted(self.entries.items()):
            lines.append(f"{k},{c},{'' if h is None else h}")
        return "\n".join(lines) + "\n"


def morse_gauge_table(geodesic: Sequence[NormalForm], kc_grid: Sequence[tuple], budget: int = 64,
                      seed: int = 0) -> MorseGaugeTable:
    pool = candidate_paths(geodesic, budget, seed)
    hd = [_hausdorff(p, geodesic) for p in pool]
    entries, counts = {}, {}
    for k, c in kc_grid:
        ok = [h for p, h in zip(pool, hd) if is_quasi_geodesic(p, k, c)]
        counts[(k, c)] = len(ok)
        entries[(k, c)] = max(ok) if ok else None
    return MorseGaugeTable(entries, counts, seed)


def gauge_entry(table: MorseGaugeTable, k, c) -> int:
    h = table.entries[(k, c)]
    if h is None:
        raise NoSamples(f"no ({k},{c})-quasi-geodesic survived the filter")
    return h


# -- local to global ------------------------------------------------------------


def concatenate(pieces: Sequence[Sequence[NormalForm]]) -> list[NormalForm]:
    path = list(pieces[0])
    for p in pieces[1:]:
        if p[0] != path[-1]:
            raise PreconditionFailed("consecutive pieces must share an endpoint")
        path += list(p[1:])
    return path


def local_to_global_probe(pieces: Sequence[Sequence[NormalForm]], L: int,
                          qg_params: QGParams = QGParams(1, 0)) -> dict:
    """Check every window of L steps against ``qg_params``, then fit the whole
    concatenation globally in the standard and coned metrics."""
    path = concatenate(pieces)
    lam = Fraction(qg_params.lam).limit_denominator(1000)
    eps = Fraction(qg_params.eps).limit_denominator(1000)
    inv = [p.inverse() for p in path]
    for start in range(max(1, len(path) - L)):
        for i in range(start, min(start + L + 1, len(path))):
            for j in range(i + 1, min(start + L + 1, len(path))):
                d = word_length(inv[i] * path[j])
                t = j - i
                if t / lam - eps > d or d > lam * t + eps:
                    raise WindowViolation(f"window starting at {start} fails at ({i},{j})")
    wide = QGParams(max(qg_params.lam, 1), qg_params.eps)
    return {"points": len(path), "L": L,
            "global_fit": standard_fit(path, wide).to_json(),
            "cone_fit": cone_fit(path, wide).to_json()}


def square_loop(gp, a: str, b: str, side: int, windings: int) -> list[list[NormalForm]]:
    """Pieces tracing the square a^side b^side a^-side b^-side ``windings`` times."""
    A, B = gp.syllable(a, 1), gp.syllable(b, 1)
    pieces = []
    cur = gp.identity()
    for _ in range(windings):
        for s in (A, B, A.inverse(), B.inverse()):
            nxt = cur * s ** side
            pieces.append(standard_geodesic(cur, nxt))
            cur = nxt
    return pieces


def power_path(g: NormalForm, n: int) -> list[NormalForm]:
    out = [g.gp.identity()]
    for _ in range(n):
        out.append(out[-1] * g)
    return out
