"""Finite Cayley balls in standard and coned-off generators.

Coned metrics add an edge between any two ball points whose quotient lies
in a single star subgroup G_st(v) (vertex stars) or G_st(Lambda) (a coning
family). Edges are found by bucketing points by their coset x * G_S, so a
bucket of size m contributes one hub node instead of m^2 edges.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from .errors import InvalidFamily, NodeLimitExceeded, OutOfBall
from .graph import _as_subgraph, link, star
from .words import GraphProduct, NormalForm, split_left, split_right, support, word_length, spell

DEFAULT_NODE_LIMIT = 2_000_000

STANDARD = "standard"
VERTEX_STARS = "cone"
FAMILY = "family"


def ball_elements(gp: GraphProduct, radius: int, vertices=None,
                  node_limit: int = DEFAULT_NODE_LIMIT) -> list[NormalForm]:
    """Elements of word length <= ``radius`` (optionally in a parabolic
    subgroup), in BFS order with generators iterated in a fixed order."""
    gens = gp.generators()
    if vertices is not None:
        allowed = _as_subgraph(gp.graph, vertices).members
        gens = [s for s in gens if support(s).members <= allowed]
    one = gp.identity()
    seen = {one}
    out = [one]
    frontier = [one]
    for _ in range(radius):
        nxt = []
        for x in frontier:
            for s in gens:
                y = x * s
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
                    out.append(y)
                    if len(out) > node_limit:
                        raise NodeLimitExceeded(f"ball exceeds {node_limit} nodes")
        frontier = nxt
    return out


def vertex_star_sets(gp: GraphProduct) -> list[frozenset]:
    g = gp.graph
    return _dedupe([star(g.subgraph([v])).members for v in g.vertices])


def family_star_sets(gp: GraphProduct, family: Iterable, strict: bool = False) -> list[frozenset]:
    out = []
    for sub in family:
        sub = _as_subgraph(gp.graph, sub)
        if not link(sub).members:
            if strict:
                raise InvalidFamily(f"family member {sub!r} has empty link")
            continue
        out.append(star(sub).members)
    return _dedupe(out)


def _dedupe(sets) -> list[frozenset]:
    seen = []
    for s in sets:
        if s not in seen:
            seen.append(s)
    return seen


@dataclass
class MetricBall:
    gp: GraphProduct
    center: NormalForm
    radius: int
    kind: str
    points: list
    star_sets: list = field(default_factory=list)

    def __post_init__(self):
        self.index = {p: i for i, p in enumerate(self.points)}
        self._graph = None
        self._rows: dict[int, np.ndarray] = {}
        c_inv = self.center.inverse()
        self.standard_dist = [word_length(c_inv * p) for p in self.points]
        if self.kind == STANDARD:
            self.dist = list(self.standard_dist)
        else:
            self.dist = [int(d) for d in self.rows([0])[0]]

    def __len__(self):
        return len(self.points)

    # -- coned graph ------------------------------------------------------

    def _coned_graph(self):
        """Sparse graph on points + hub nodes; point-point weight 2, point-hub 1."""
        if self._graph is not None:
            return self._graph
        n = len(self.points)
        rows, cols, wts = [], [], []
        gens = self.gp.generators()
        for i, x in enumerate(self.points):
            for s in gens:
                j = self.index.get(x * s)
                if j is not None:
                    rows.append(i)
                    cols.append(j)
                    wts.append(2)
        hub = n
        for S in self.star_sets:
            buckets: dict = {}
            for i, x in enumerate(self.points):
                buckets.setdefault(split_right(x, S)[0], []).append(i)
            for members in buckets.values():
                if len(members) < 2:
                    continue
                for i in members:
                    rows += [i, hub]
                    cols += [hub, i]
                    wts += [1, 1]
                hub += 1
        self._graph = coo_matrix((wts, (rows, cols)), shape=(hub, hub)).tocsr()
        return self._graph

    def rows(self, indices: Sequence[int]) -> np.ndarray:
        """Distance rows (int64) from the given point indices to all points."""
        n = len(self.points)
        indices = [int(i) for i in indices]
        missing = [i for i in dict.fromkeys(indices) if i not in self._rows]
        if missing:
            if self.kind == STANDARD:
                for i in missing:
                    inv = self.points[i].inverse()
                    self._rows[i] = np.array([word_length(inv * p) for p in self.points], dtype=np.int64)
            else:
                graph = self._coned_graph()
                for start in range(0, len(missing), 256):
                    part = missing[start:start + 256]
                    d = dijkstra(graph, directed=False, indices=part)[:, :n]
                    if np.isinf(d).any():  # pragma: no cover - balls are connected
                        raise RuntimeError("coned ball is disconnected")
                    for i, row in zip(part, d):
                        self._rows[i] = row.astype(np.int64) // 2
        return np.stack([self._rows[i] for i in indices]) if indices else np.zeros((0, n), np.int64)

    def distance(self, x: NormalForm, y: NormalForm) -> int:
        i, j = self.index[x], self.index[y]
        return int(self.rows([i])[0][j])

    def to_csv(self) -> str:
        lines = ["point_id,word,dist"]
        for i, p in enumerate(self.points):
            lines.append(f"{i},{p},{self.dist[i]}")
        return "\n".join(lines) + "\n"


def build_ball(gp: GraphProduct, radius: int, metric: str = STANDARD,
               center: Optional[NormalForm] = None, family=None, strict: bool = False,
               node_limit: int = DEFAULT_NODE_LIMIT) -> MetricBall:
    center = center if center is not None else gp.identity()
    pts = [center * p for p in ball_elements(gp, radius, node_limit=node_limit)]
    if metric == STANDARD:
        stars: list = []
    elif metric == VERTEX_STARS:
        stars = vertex_star_sets(gp)
    elif metric == FAMILY:
        if family is None:
            raise InvalidFamily("family metric needs a list of subgraphs")
        stars = family_star_sets(gp, family, strict)
    else:
        raise ValueError(f"unknown metric {metric!r}")
    return MetricBall(gp, center, radius, metric, pts, stars)


@functools.lru_cache(maxsize=8)
def _cached_cone_ball(gp: GraphProduct, radius: int) -> MetricBall:
    return build_ball(gp, radius, VERTEX_STARS)


def cone_distance(g: NormalForm, star_sets: Sequence[frozenset]) -> int:
    """Least number of factors of ``g`` each lying in some G_S, S in ``star_sets``.

    Searches over geodesic prefixes of ``g`` only (ideals of its letter
    heap). A jump from prefix p to prefix q is allowed when every letter of
    p^-1 q sits at a vertex of one star set. Requires letter cancellation
    (free vertex groups) so that prefixes of syllables are prefixes of
    their reduced words.
    """
    gp = g.gp
    if not g.syl:
        return 0
    letters = [i for i, e in g.syl for _ in gp._g[i].spell(e)]
    nv = len(gp.graph.vertices)
    nc = gp._noncomm
    # need[i][k] = per-vertex counts required before adding the k-th letter at vertex i
    need: list[list[tuple]] = [[] for _ in range(nv)]
    counts = [0] * nv
    for i in letters:
        need[i].append(tuple(counts[u] if u in nc[i] else 0 for u in range(nv)))
        counts[i] += 1
    total = tuple(counts)
    sets = [frozenset(gp.graph.index[v] for v in S) for S in star_sets]

    def addable(c, i):
        k = c[i]
        return k < total[i] and all(c[u] >= r for u, r in enumerate(need[i][k]))

    def closure(c, S):
        seen = {c}
        stack = [c]
        while stack:
            cur = stack.pop()
            for i in S:
                if addable(cur, i):
                    nxt = cur[:i] + (cur[i] + 1,) + cur[i + 1:]
                    if nxt not in seen:
                        seen.add(nxt)
                        stack.append(nxt)
        return seen

    start = tuple([0] * nv)
    visited = {start}
    layer = [start]
    d = 0
    while layer:
        d += 1
        nxt_layer = []
        for c in layer:
            for S in sets:
                for q in closure(c, S):
                    if q == total:
                        return d
                    if q not in visited:
                        visited.add(q)
                        nxt_layer.append(q)
        layer = nxt_layer
    raise ValueError(f"{g} is not a product of the given star subgroups")


def cone_distance_restricted(g: NormalForm, R: int, method: str = "auto") -> int:
    """Vertex-star coned distance from the identity to ``g`` inside the ball of radius R.

    ``method="ball"`` runs BFS in the literal coned ball; ``"prefix"`` (the
    default when vertex groups are free) runs the prefix search, whose paths
    stay within radius word_length(g) <= R.
    """
    if word_length(g) > R:
        raise OutOfBall(f"|{g}| = {word_length(g)} > R = {R}")
    gp = g.gp
    if method == "auto":
        method = "prefix" if gp.letter_cancellation else "ball"
    if method == "prefix":
        return cone_distance(g, vertex_star_sets(gp))
    ball = _cached_cone_ball(gp, R)
    return int(ball.rows([0])[0][ball.index[g]])


def greedy_star_factorization(g: NormalForm) -> list[tuple[NormalForm, str]]:
    """Repeatedly strip the longest left divisor supported in a single vertex star.

    Ties go to the star with fewer vertices, then to the smaller vertex.
    """
    gp = g.gp
    graph = gp.graph
    stars = [(v, star(graph.subgraph([v])).members) for v in graph.vertices]
    order = sorted(stars, key=lambda vs: (len(vs[1]), graph.index[vs[0]]))
    out = []
    rest = g
    while rest.syl:
        best = None
        for v, S in order:
            head, tail = split_left(rest, S)
            if best is None or word_length(head) > word_length(best[0]):
                best = (head, tail, v)
        head, tail, v = best
        out.append((head, v))
        rest = tail
    return out


@dataclass
class DeltaReport:
    delta: Fraction
    sample_size: int
    method: str
    seed: Optional[int] = None

    def to_json(self) -> dict:
        return {"delta": str(self.delta), "delta_float": float(self.delta),
                "sample_size": self.sample_size, "method": self.method, "seed": self.seed}


def four_point_delta(ball: MetricBall, budget: int = 10**7, seed: int = 0,
                     chunk: int = 200_000) -> DeltaReport:
    """Four-point hyperbolicity constant of the ball's metric.

    Uses doubled Gromov products 2(x.y)_w = d(w,x) + d(w,y) - d(x,y), so all
    arithmetic is integral; the result is exact with denominator 2.
    Exhaustive when n^4 <= budget, else ``budget`` uniform quadruples.
    """
    return _delta(len(ball), ball.rows, budget, seed, chunk)


def delta_from_matrix(D, budget: int = 10**7, seed: int = 0) -> DeltaReport:
    D = np.asarray(D, dtype=np.int64)
    return _delta(len(D), lambda idx: D[list(idx)], budget, seed)


def _delta(n: int, rows, budget: int, seed: int, chunk: int = 200_000) -> DeltaReport:
    if n ** 4 <= budget:
        return delta_of_matrix(rows(list(range(n))))
    rng = np.random.default_rng(seed)
    best = 0
    done = 0
    while done < budget:
        k = min(chunk, budget - done)
        q = rng.integers(0, n, size=(k, 4))
        need = np.unique(q[:, :3])
        R = rows([int(i) for i in need])
        pos = np.full(n, -1)
        pos[need] = np.arange(len(need))
        w, x, y, z = q.T
        pw = pos[w]
        dwx, dwy, dwz = R[pw, x], R[pw, y], R[pw, z]
        dxy = R[pos[x], y]
        dxz = R[pos[x], z]
        dyz = R[pos[y], z]
        gxy = dwx + dwy - dxy
        gxz = dwx + dwz - dxz
        gyz = dwy + dwz - dyz
        best = max(best, int((np.minimum(gxz, gyz) - gxy).max()))
        done += k
    return DeltaReport(Fraction(best, 2), budget, "sampled", seed)


def delta_of_matrix(D: np.ndarray) -> DeltaReport:
    """Exhaustive four-point constant of a full integer distance matrix."""
    D = np.asarray(D, dtype=np.int64)
    n = len(D)
    best = 0
    for w in range(n):
        G = D[w][:, None] + D[w][None, :] - D
        # defect[x, y, z] = min(G[x,z], G[y,z]) - G[x,y]
        m = np.minimum(G[:, None, :], G[None, :, :])
        best = max(best, int((m.max(axis=2) - G).max()))
    return DeltaReport(Fraction(best, 2), n ** 4, "exhaustive")


def standard_geodesic(x: NormalForm, y: NormalForm) -> list[NormalForm]:
    path = [x]
    cur = x
    for s in spell(x.inverse() * y):
        cur = cur * s
        path.append(cur)
    return path
