"""Finite relative-HHS instances: axiom checks, product regions, gates,
distance-formula fits and the maximization procedure.

Set-to-set distances in a domain space CU are minimum distances between
members; d_U(x, y) means the distance between pi_U(x) and pi_U(y).
All constants are integers found by scanning upward from 0.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from .cayley import delta_from_matrix
from .errors import BudgetExceeded, ConfigError, EmptyRegion, PreconditionFailed

EQUAL, NESTED, CONTAINS, ORTHOGONAL, TRANSVERSE = "equal", "nested", "contains", "orthogonal", "transverse"

# axiom 10 searches witness families of at most this many domains
LARGE_LINKS_SEARCH = 6


def _graph_metric(nodes: list, adj: dict) -> np.ndarray:
    idx = {v: i for i, v in enumerate(nodes)}
    rows, cols = [], []
    for v, nbrs in adj.items():
        for u in nbrs:
            if u not in idx:
                raise ConfigError(f"edge to unknown node {u!r}")
            rows.append(idx[v])
            cols.append(idx[u])
    n = len(nodes)
    m = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n)).tocsr()
    d = shortest_path(m, directed=False, unweighted=True)
    if np.isinf(d).any():
        raise ConfigError("domain space is not connected")
    return d.astype(np.int64)


class HhsInstance:
    """Finite relative-HHS data loaded from the JSON instance format."""

    def __init__(self, data: dict):
        known = {"space", "domains", "relations", "cspaces", "projections", "rhos", "flags", "E", "M"}
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown instance fields: {sorted(extra)}")
        self.data = data
        space = data["space"]
        self.points = [str(p) for p in space["points"]]
        self.pindex = {p: i for i, p in enumerate(self.points)}
        self.D = np.asarray(space["distances"], dtype=np.int64)
        n = len(self.points)
        if self.D.shape != (n, n) or (self.D != self.D.T).any() or (np.diag(self.D) != 0).any():
            raise ConfigError("space distances must be a symmetric zero-diagonal table")
        self.domains = [str(d) for d in data["domains"]]
        self.dindex = {d: i for i, d in enumerate(self.domains)}
        self.E = int(data.get("E", 1))
        self.M = int(data.get("M", 1))
        self.flags = {d: bool(data.get("flags", {}).get(d, False)) for d in self.domains}

        self.rel: dict[tuple[str, str], str] = {}
        for d in self.domains:
            self.rel[(d, d)] = EQUAL
        for a, b, kind in data.get("relations", []):
            if a not in self.dindex or b not in self.dindex or a == b:
                raise ConfigError(f"bad relation pair {a!r}, {b!r}")
            if kind == NESTED:
                pair = {(a, b): NESTED, (b, a): CONTAINS}
            elif kind in (ORTHOGONAL, TRANSVERSE):
                pair = {(a, b): kind, (b, a): kind}
            else:
                raise ConfigError(f"unknown relation kind {kind!r}")
            for k, v in pair.items():
                if self.rel.get(k, v) != v:
                    raise ConfigError(f"conflicting relations for {k}")
                self.rel[k] = v
        for a in self.domains:
            for b in self.domains:
                self.rel.setdefault((a, b), TRANSVERSE)

        self.nodes: dict[str, list] = {}
        self.cdist: dict[str, np.ndarray] = {}
        self.proj: dict[str, list[list[int]]] = {}
        for d in self.domains:
            adj = {str(k): [str(u) for u in v] for k, v in data["cspaces"][d].items()}
            nodes = list(adj)
            self.nodes[d] = nodes
            self.cdist[d] = _graph_metric(nodes, adj)
            nidx = {v: i for i, v in enumerate(nodes)}
            table = data["projections"][d]
            proj = []
            for p in self.points:
                img = table.get(p)
                if not img:
                    raise ConfigError(f"pi_{d}({p}) is empty or missing")
                try:
                    proj.append(sorted(nidx[str(v)] for v in img))
                except KeyError as exc:
                    raise ConfigError(f"pi_{d}({p}) uses unknown node {exc}") from None
            self.proj[d] = proj

        self.rho: dict[tuple[str, str], list[int]] = {}
        for r in data.get("rhos", []):
            v, w = r["from"], r["to"]
            nidx = {u: i for i, u in enumerate(self.nodes[w])}
            if not r["set"]:
                raise ConfigError(f"rho from {v} to {w} is empty")
            self.rho[(v, w)] = sorted(nidx[str(u)] for u in r["set"])

        self._near: dict[str, np.ndarray] = {}
        self._pd: dict[str, np.ndarray] = {}

    # -- relations -----------------------------------------------------------

    def nested(self, a: str, b: str) -> bool:
        """a is nested in b (reflexive)."""
        return self.rel[(a, b)] in (EQUAL, NESTED)

    def strictly_nested(self, a: str, b: str) -> bool:
        return self.rel[(a, b)] == NESTED

    def orthogonal(self, a: str, b: str) -> bool:
        return self.rel[(a, b)] == ORTHOGONAL

    def transverse(self, a: str, b: str) -> bool:
        return self.rel[(a, b)] == TRANSVERSE

    def nested_in(self, w: str) -> list[str]:
        return [v for v in self.domains if self.nested(v, w)]

    def orth(self, u: str) -> list[str]:
        return [v for v in self.domains if self.orthogonal(v, u)]

    def is_minimal(self, u: str) -> bool:
        return all(not self.strictly_nested(v, u) for v in self.domains)

    def maximal(self) -> list[str]:
        return [u for u in self.domains if all(not self.strictly_nested(u, v) for v in self.domains)]

    def diam(self, u: str) -> int:
        return int(self.cdist[u].max())

    # -- projected distances ---------------------------------------------

    def near(self, u: str) -> np.ndarray:
        """Row x: distance from pi_U(x) to every node of CU."""
        if u not in self._near:
            cd = self.cdist[u]
            self._near[u] = np.stack([cd[img].min(axis=0) for img in self.proj[u]])
        return self._near[u]

    def pdist(self, u: str) -> np.ndarray:
        """|X| x |X| matrix of d_U(pi_U(x), pi_U(y))."""
        if u not in self._pd:
            a = self.near(u)
            self._pd[u] = np.stack([a[:, img].min(axis=1) for img in self.proj[u]], axis=1)
        return self._pd[u]

    def dist_to_set(self, u: str, nodes) -> np.ndarray:
        """Per point x: d_U(pi_U(x), nodes)."""
        return self.near(u)[:, list(nodes)].min(axis=1)

    def set_diam(self, u: str, nodes) -> int:
        nodes = list(nodes)
        return int(self.cdist[u][np.ix_(nodes, nodes)].max())


# -- axiom checks -------------------------------------------------------------


@dataclass
class AxiomResult:
    axiom: int
    name: str
    status: str  # "pass", "fail", "fail at budget"
    constant: Optional[int] = None
    witness: Optional[object] = None
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {"axiom": self.axiom, "name": self.name, "status": self.status,
               "constant": self.constant, "witness": self.witness}
        out.update(self.extra)
        return out


@dataclass
class AxiomReport:
    E: int
    results: list

    @property
    def passed(self) -> bool:
        return all(r.status == "pass" for r in self.results)

    @property
    def failing(self) -> set[int]:
        return {r.axiom for r in self.results if r.status != "pass"}

    @property
    def minimal_E(self) -> Optional[int]:
        """Least E at which every axiom holds, or None if one fails structurally."""
        if any(r.constant is None for r in self.results):
            return None
        return max(r.constant for r in self.results)

    def __getitem__(self, axiom: int) -> AxiomResult:
        return next(r for r in self.results if r.axiom == axiom)

    def to_json(self) -> dict:
        return {"E": self.E, "passed": self.passed, "minimal_E": self.minimal_E,
                "axioms": [r.to_json() for r in self.results]}


def _verdict(axiom, name, constant, E, witness=None, **extra) -> AxiomResult:
    status = "pass" if constant is not None and constant <= E else "fail"
    return AxiomResult(axiom, name, status, constant, witness if status == "fail" else None, extra)


def _structural(axiom, name, witness) -> AxiomResult:
    if witness is None:
        return AxiomResult(axiom, name, "pass", 0)
    return AxiomResult(axiom, name, "fail", None, witness)


def check_projections(inst: HhsInstance) -> AxiomResult:
    n = len(inst.points)
    worst = 0
    witness = None
    D = inst.D
    for u in inst.domains:
        cd = inst.cdist[u]
        for i, img in enumerate(inst.proj[u]):
            d = int(cd[np.ix_(img, img)].max())
            if d > worst:
                worst, witness = d, {"domain": u, "point": inst.points[i], "kind": "diameter"}
        pd = inst.pdist(u)
        # least K with d_U <= K d_X + K
        k = int(np.ceil(pd / (D + 1)).max()) if n else 0
        if k > worst:
            worst, witness = k, {"domain": u, "kind": "lipschitz"}
        s = int(inst.near(u).min(axis=0).max())
        if s > worst:
            worst, witness = s, {"domain": u, "kind": "coarse surjectivity"}
    return _verdict(1, "projections", worst, inst.E, witness)


def check_nesting(inst: HhsInstance) -> AxiomResult:
    doms = inst.domains
    for a, b, c in itertools.product(doms, repeat=3):
        if inst.nested(a, b) and inst.nested(b, c) and not inst.nested(a, c):
            return _structural(2, "nesting", {"not transitive": [a, b, c]})
    top = inst.maximal()
    if len(top) != 1 or not all(inst.nested(u, top[0]) for u in doms):
        return _structural(2, "nesting", {"maximal elements": top})
    worst = 0
    witness = None
    for v in doms:
        for w in doms:
            if inst.strictly_nested(v, w):
                if (v, w) not in inst.rho:
                    return _structural(2, "nesting", {"missing rho": [v, w]})
                d = inst.set_diam(w, inst.rho[(v, w)])
                if d > worst:
                    worst, witness = d, {"rho": [v, w]}
    return _verdict(2, "nesting", worst, inst.E, witness)


def check_orthogonality(inst: HhsInstance) -> AxiomResult:
    doms = inst.domains
    for v, w in itertools.product(doms, repeat=2):
        if inst.orthogonal(v, w) and (inst.nested(v, w) or inst.nested(w, v)):
            return _structural(3, "orthogonality", {"comparable": [v, w]})
    for v, w, u in itertools.product(doms, repeat=3):
        if inst.nested(v, w) and inst.orthogonal(w, u) and not inst.orthogonal(v, u):
            return _structural(3, "orthogonality", {"not inherited": [v, w, u]})
    return _structural(3, "orthogonality", None)


def check_transversality(inst: HhsInstance) -> AxiomResult:
    worst = 0
    witness = None
    for v, w in itertools.product(inst.domains, repeat=2):
        if v != w and inst.transverse(v, w):
            if (v, w) not in inst.rho:
                return _structural(4, "transversality", {"missing rho": [v, w]})
            d = inst.set_diam(w, inst.rho[(v, w)])
            if d > worst:
                worst, witness = d, {"rho": [v, w]}
    return _verdict(4, "transversality", worst, inst.E, witness)


def check_hyperbolicity(inst: HhsInstance, budget: int = 10**6, seed: int = 0) -> AxiomResult:
    worst = 0
    witness = None
    deltas = {}
    for w in inst.domains:
        if inst.is_minimal(w):
            continue
        rep = delta_from_matrix(inst.cdist[w], budget, seed)
        deltas[w] = str(rep.delta)
        c = math.ceil(rep.delta)
        if c > worst:
            worst, witness = c, {"domain": w, "delta": str(rep.delta)}
    return _verdict(5, "hyperbolicity", worst, inst.E, witness, deltas=deltas)


def check_finite_complexity(inst: HhsInstance) -> AxiomResult:
    # longest chain by memoised DP over the strict nesting order
    memo: dict[str, list[str]] = {}

    def chain(u):
        if u not in memo:
            best = [u]
            for v in inst.domains:
                if inst.strictly_nested(v, u):
                    c = chain(v) + [u]
                    if len(c) > len(best):
                        best = c
            memo[u] = best
        return memo[u]

    longest = max((chain(u) for u in inst.domains), key=len, default=[])
    return _verdict(6, "finite complexity", len(longest), inst.E, {"chain": longest})


def check_containers(inst: HhsInstance) -> AxiomResult:
    for w in inst.domains:
        below = inst.nested_in(w)
        for u in below:
            targets = [v for v in below if inst.orthogonal(v, u)]
            if not targets:
                continue
            ok = any(inst.strictly_nested(q, w) and all(inst.nested(v, q) for v in targets)
                     for q in inst.domains)
            if not ok:
                return _structural(7, "containers", {"W": w, "U": u, "orthogonal": targets})
    return _structural(7, "containers", None)


def uniqueness_table(inst: HhsInstance) -> dict[int, int]:
    """theta(r) = 1 + max d_X(x, y) over pairs whose projections all stay below r."""
    n = len(inst.points)
    if n == 0:
        return {}
    big = np.max(np.stack([inst.pdist(u) for u in inst.domains]), axis=0)
    table = {}
    top = int(big.max()) + 1
    for r in range(1, top + 1):
        mask = big < r
        table[r] = int(inst.D[mask].max()) + 1
    return table


def check_uniqueness(inst: HhsInstance) -> AxiomResult:
    big = np.max(np.stack([inst.pdist(u) for u in inst.domains]), axis=0)
    mask = big < 1
    worst = int(inst.D[mask].max()) if mask.any() else 0
    witness = None
    if worst:
        i, j = np.argwhere(mask & (inst.D == worst))[0]
        witness = {"pair": [inst.points[i], inst.points[j]], "distance": worst}
    table = uniqueness_table(inst)
    return _verdict(8, "uniqueness", worst, inst.E, witness,
                    theta={str(k): v for k, v in table.items()})


def _avoid_metric(inst: HhsInstance, w: str, blocked: np.ndarray) -> np.ndarray:
    adj = inst.data["cspaces"][w]
    nodes = inst.nodes[w]
    idx = {v: i for i, v in enumerate(nodes)}
    rows, cols = [], []
    for v, nbrs in adj.items():
        i = idx[str(v)]
        if blocked[i]:
            continue
        for u in nbrs:
            j = idx[str(u)]
            if not blocked[j]:
                rows.append(i)
                cols.append(j)
    n = len(nodes)
    m = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n)).tocsr()
    return shortest_path(m, directed=False, unweighted=True)


def _bgi_violation(inst: HhsInstance, c: int):
    for v in inst.domains:
        for w in inst.domains:
            if not inst.strictly_nested(v, w) or (v, w) not in inst.rho:
                continue
            pv = inst.pdist(v)
            pairs = np.argwhere(pv >= c)
            if not len(pairs):
                continue
            cd = inst.cdist[w]
            blocked = cd[:, inst.rho[(v, w)]].min(axis=1) <= c
            avoid = _avoid_metric(inst, w, blocked)
            pw = inst.pdist(w)
            seen = set()
            for x, y in pairs:
                key = (tuple(inst.proj[w][x]), tuple(inst.proj[w][y]))
                if key in seen:
                    continue
                seen.add(key)
                d = pw[x, y]
                for a in key[0]:
                    for b in key[1]:
                        # a geodesic a..b avoiding the neighbourhood exists
                        if cd[a, b] == d and not blocked[a] and not blocked[b] and avoid[a, b] == d:
                            return {"V": v, "W": w, "pair": [inst.points[x], inst.points[y]]}
    return None


def check_bgi(inst: HhsInstance) -> AxiomResult:
    bound = max((inst.diam(u) for u in inst.domains), default=0) + 1
    first = None
    for c in range(bound + 1):
        wit = _bgi_violation(inst, c)
        if wit is None:
            return _verdict(9, "bounded geodesic image", c, inst.E, first)
        if c == inst.E:
            first = wit
    return _verdict(9, "bounded geodesic image", None, inst.E, first)  # pragma: no cover


def _large_links_violation(inst: HhsInstance, c: int):
    """Witness (W, x, y) with no admissible cover at constant c, plus whether
    the search was cut off by LARGE_LINKS_SEARCH."""
    budget_hit = None
    for w in inst.domains:
        below = [u for u in inst.nested_in(w) if u != w]
        if not below:
            continue
        pw = inst.pdist(w)
        pds = {u: inst.pdist(u) for u in below}
        cache: dict = {}
        n = len(inst.points)
        for x in range(n):
            for y in range(n):
                relevant = frozenset(u for u in below if pds[u][x, y] > c)
                if not relevant:
                    continue
                m = c * int(pw[x, y]) + c
                key = (relevant, m)
                if key not in cache:
                    cache[key] = _cover(inst, below, relevant, m)
                res = cache[key]
                wit = {"W": w, "pair": [inst.points[x], inst.points[y]], "relevant": sorted(relevant)}
                if res is False:
                    return wit, False
                if res is None and budget_hit is None:
                    budget_hit = wit
    if budget_hit is not None:
        return budget_hit, True
    return None, False


def _cover(inst, candidates, relevant, m):
    """True if <= m candidates cover ``relevant`` by nesting; False if proven
    impossible; None if the search size limit was hit first."""
    for size in range(0, min(m, LARGE_LINKS_SEARCH) + 1):
        for fam in itertools.combinations(candidates, size):
            if all(any(inst.nested(u, v) for v in fam) for u in relevant):
                return True
    if m > LARGE_LINKS_SEARCH and len(candidates) > LARGE_LINKS_SEARCH:
        return None
    return False


def check_large_links(inst: HhsInstance) -> AxiomResult:
    bound = max((int(inst.pdist(u).max()) for u in inst.domains), default=0)
    at_E = None
    for c in range(bound + 1):
        wit, cut = _large_links_violation(inst, c)
        if c == inst.E and wit is not None:
            at_E = (wit, cut)
        if wit is None:
            res = _verdict(10, "large links", c, inst.E)
            if res.status == "fail" and at_E is not None:
                res.witness = at_E[0]
                if at_E[1]:
                    res.status = "fail at budget"
            return res
    return _verdict(10, "large links", bound, inst.E)  # pragma: no cover


def check_consistency(inst: HhsInstance) -> AxiomResult:
    worst = 0
    witness = None
    doms = inst.domains
    for v, w in itertools.product(doms, repeat=2):
        if v == w or not inst.transverse(v, w):
            continue
        if (v, w) not in inst.rho or (w, v) not in inst.rho:
            continue
        a = inst.dist_to_set(w, inst.rho[(v, w)])
        b = inst.dist_to_set(v, inst.rho[(w, v)])
        m = np.minimum(a, b)
        k = int(m.max())
        if k > worst:
            worst = k
            witness = {"V": v, "W": w, "point": inst.points[int(m.argmax())]}
    # second clause, read with W not orthogonal to U
    for u, v, w in itertools.product(doms, repeat=3):
        if u == v or not inst.nested(u, v):
            continue
        if not (inst.strictly_nested(v, w) or (inst.transverse(v, w) and not inst.orthogonal(w, u))):
            continue
        if (u, w) not in inst.rho or (v, w) not in inst.rho:
            continue
        cd = inst.cdist[w]
        k = int(cd[np.ix_(inst.rho[(u, w)], inst.rho[(v, w)])].min())
        if k > worst:
            worst, witness = k, {"U": u, "V": v, "W": w}
    return _verdict(11, "consistency", worst, inst.E, witness)


def check_partial_realization(inst: HhsInstance, budget: int = 10**7) -> AxiomResult:
    doms = inst.domains
    n = len(inst.points)
    collections = []
    for size in range(1, len(doms) + 1):
        for fam in itertools.combinations(doms, size):
            if all(inst.orthogonal(a, b) for a, b in itertools.combinations(fam, 2)):
                collections.append(fam)
    cost = sum(math.prod(len(inst.nodes[v]) for v in fam) for fam in collections) * n
    if cost > budget:
        raise BudgetExceeded(f"partial realization needs {cost} evaluations > {budget}")
    worst = 0
    witness = None
    for fam in collections:
        base = np.zeros(n, dtype=np.int64)
        for v in fam:
            for w in doms:
                if inst.strictly_nested(v, w) or (w != v and inst.transverse(w, v)):
                    if (v, w) in inst.rho:
                        base = np.maximum(base, inst.dist_to_set(w, inst.rho[(v, w)]))
        nears = [inst.near(v) for v in fam]
        for tup in itertools.product(*(range(len(inst.nodes[v])) for v in fam)):
            dev = base.copy()
            for a, p in zip(nears, tup):
                dev = np.maximum(dev, a[:, p])
            k = int(dev.min())
            if k > worst:
                worst = k
                witness = {"domains": list(fam), "nodes": [inst.nodes[v][p] for v, p in zip(fam, tup)]}
    return _verdict(12, "partial realization", worst, inst.E, witness)


def check_axioms(inst: HhsInstance, budget: int = 10**7, seed: int = 0) -> AxiomReport:
    if len(inst.points) > 10**4 or len(inst.domains) > 32 or any(len(v) > 1000 for v in inst.nodes.values()):
        raise BudgetExceeded("instance exceeds brute-force size limits")
    results = [
        check_projections(inst),
        check_nesting(inst),
        check_orthogonality(inst),
        check_transversality(inst),
        check_hyperbolicity(inst, seed=seed),
        check_finite_complexity(inst),
        check_containers(inst),
        check_uniqueness(inst),
        check_bgi(inst),
        check_large_links(inst),
        check_consistency(inst),
        check_partial_realization(inst, budget),
    ]
    return AxiomReport(inst.E, results)


# -- product regions, gates, distance formula --------------------------------


def product_region(inst: HhsInstance, u: str, C: Optional[int] = None) -> list[int]:
    """Indices of points x with d_V(pi_V(x), rho^U_V) <= C whenever
    V is transverse to U or U is strictly nested in V."""
    C = inst.E if C is None else C
    ok = np.ones(len(inst.points), dtype=bool)
    for v in inst.domains:
        if v != u and (inst.transverse(v, u) or inst.strictly_nested(u, v)):
            if (u, v) not in inst.rho:
                raise PreconditionFailed(f"missing rho from {u} to {v}")
            ok &= inst.dist_to_set(v, inst.rho[(u, v)]) <= C
    return [int(i) for i in np.flatnonzero(ok)]


def _classes(inst: HhsInstance, members: list[int], doms: list[str], tol: int) -> list[list[int]]:
    """Connected components of "all d_V within tol for V in doms" on ``members``."""
    if not members:
        return []
    idx = np.asarray(members)
    close = np.ones((len(idx), len(idx)), dtype=bool)
    for v in doms:
        close &= inst.pdist(v)[np.ix_(idx, idx)] <= tol
    _, labels = connected_components(close, directed=False)
    groups: dict[int, list[int]] = {}
    for i, lab in zip(members, labels):
        groups.setdefault(int(lab), []).append(i)
    return sorted(groups.values())


def f_slices(inst: HhsInstance, u: str, C: Optional[int] = None, tol: int = 0) -> list[list[int]]:
    """Slices F_U x {e}: points of the product region sharing orthogonal coordinates."""
    return _classes(inst, product_region(inst, u, C), inst.orth(u), tol)


def e_slices(inst: HhsInstance, u: str, C: Optional[int] = None, tol: int = 0) -> list[list[int]]:
    """Slices {f} x E_U: points of the product region sharing nested coordinates."""
    return _classes(inst, product_region(inst, u, C), inst.nested_in(u), tol)


def gate_deviation(inst: HhsInstance, u: str, x: int) -> np.ndarray:
    """Per candidate y: max over V of |pi_V(y) - target_V|, with target rho^U_V
    for V transverse to U or strictly above it and pi_V(x) otherwise."""
    dev = np.zeros(len(inst.points), dtype=np.int64)
    for v in inst.domains:
        if v != u and (inst.transverse(v, u) or inst.strictly_nested(u, v)):
            d = inst.dist_to_set(v, inst.rho[(u, v)])
        else:
            d = inst.pdist(v)[x]
        dev = np.maximum(dev, d)
    return dev


def gate(inst: HhsInstance, u: str, x: int, C: Optional[int] = None) -> int:
    region = product_region(inst, u, C)
    if not region:
        raise EmptyRegion(f"product region of {u} is empty")
    dev = gate_deviation(inst, u, x)
    return min(region, key=lambda y: (int(dev[y]), y))


def distance_formula_fit(inst: HhsInstance, s: int, k_max: int = 1000) -> tuple[int, int]:
    """Least integer K with C(K) <= K, where C(K) is the least integer making
    Sigma/K - C <= d_X <= K Sigma + C hold on every pair."""
    total = np.zeros_like(inst.D)
    for u in inst.domains:
        pd = inst.pdist(u)
        total = total + np.where(pd >= s, pd, 0)
    d = inst.D
    for K in range(1, k_max + 1):
        lower = np.ceil(total / K - d).max() if d.size else 0
        upper = (d - K * total).max() if d.size else 0
        C = int(max(0, lower, upper))
        if C <= K:
            return K, C
    raise BudgetExceeded(f"no fit with K <= {k_max}")


# -- maximization -------------------------------------------------------------


def compute_SM(inst: HhsInstance, M: int) -> tuple[list[str], Optional[dict]]:
    """Domains nested in some V that has an orthogonal W with both spaces of
    diameter > M; also returns a nesting-closure violation, if any."""
    big = [v for v in inst.domains if inst.diam(v) > M]
    tops = [v for v in big if any(inst.orthogonal(w, v) for w in big)]
    sm = [u for u in inst.domains if any(inst.nested(u, v) for v in tops)]
    violation = None
    for u in sm:
        for v in inst.domains:
            if inst.nested(v, u) and v not in sm:
                violation = {"in": u, "missing": v}
    return sm, violation


def f_unbounded(inst: HhsInstance, u: str) -> bool:
    return any(inst.flags[v] for v in inst.nested_in(u))


def e_unbounded(inst: HhsInstance, u: str) -> bool:
    return any(inst.flags[v] for v in inst.orth(u))


@dataclass
class MaximizedInstance:
    T: list
    classification: dict
    SM: list
    SMplus: list
    topspace: np.ndarray
    points: list

    @property
    def topspace_diameter(self) -> int:
        return int(self.topspace.max()) if self.topspace.size else 0

    def to_json(self) -> dict:
        return {"T": self.T, "classification": self.classification, "SM": self.SM,
                "SMplus": self.SMplus, "topspace_diameter": self.topspace_diameter,
                "points": self.points, "topspace": self.topspace.tolist()}


def clean_container_violation(inst: HhsInstance) -> Optional[dict]:
    for w in inst.domains:
        below = inst.nested_in(w)
        for u in below:
            targets = [v for v in below if inst.orthogonal(v, u)]
            if not targets:
                continue
            if not any(inst.strictly_nested(q, w) and inst.orthogonal(q, u)
                       and all(inst.nested(v, q) for v in targets) for q in inst.domains):
                return {"W": w, "U": u}
    return None


def coned_metric(D: np.ndarray, slices: list[list[int]]) -> np.ndarray:
    """Shortest paths in X with each slice joined pairwise by unit edges."""
    n = len(D)
    rows, cols, wts = [], [], []
    iu, ju = np.nonzero(np.triu(D > 0))
    rows += list(iu)
    cols += list(ju)
    wts += list(2 * D[iu, ju])
    hub = n
    for sl in slices:
        if len(sl) < 2:
            continue
        for i in sl:
            rows.append(i)
            cols.append(hub)
            wts.append(1)
        hub += 1
    m = coo_matrix((wts, (rows, cols)), shape=(hub, hub)).tocsr()
    d = shortest_path(m, directed=False)[:n, :n]
    return (d.astype(np.int64) // 2)


def maximize(inst: HhsInstance, M: Optional[int] = None, check: bool = True, tol: int = 0) -> MaximizedInstance:
    M = inst.M if M is None else M
    if check:
        report = check_axioms(inst)
        if not report.passed:
            raise PreconditionFailed(f"axioms fail: {sorted(report.failing)}")
        bad = clean_container_violation(inst)
        if bad is not None:
            raise PreconditionFailed(f"containers are not clean: {bad}")
    top = inst.maximal()
    if len(top) != 1:
        raise PreconditionFailed("no unique maximal domain")
    S = top[0]
    sm, violation = compute_SM(inst, M)
    if violation is not None:  # pragma: no cover - closure holds by construction
        raise PreconditionFailed(f"S^M not closed under nesting: {violation}")
    # the top domain indexes the coned space itself, so it is never coned away
    minimal_unbounded = [u for u in inst.domains
                         if u != S and inst.is_minimal(u) and f_unbounded(inst, u)]
    smplus = [u for u in inst.domains if u in sm or u in minimal_unbounded]
    unb = [u for u in inst.domains if f_unbounded(inst, u) and e_unbounded(inst, u)]
    mins = [u for u in inst.domains
            if inst.is_minimal(u) and not e_unbounded(inst, u) and f_unbounded(inst, u)]
    T = [u for u in inst.domains if u == S or u in unb or u in mins]
    classification = {}
    for u in inst.domains:
        tags = []
        if u == S:
            tags.append("top")
        if u in unb:
            tags.append("Unb")
        if u in mins:
            tags.append("Min")
        classification[u] = tags or ["dropped"]
    slices = []
    for u in smplus:
        slices += f_slices(inst, u, tol=tol)
    topspace = coned_metric(inst.D, slices)
    return MaximizedInstance(T, classification, sm, smplus, topspace, list(inst.points))


# -- fixtures -----------------------------------------------------------------


def grid_instance(n: int = 4, E: int = 2, M: int = 1, constant_h: bool = False,
                  drop_rho: Optional[tuple[str, str]] = None, transverse_hv: bool = False,
                  shrink_v: bool = False) -> dict:
    """The {-n..n}^2 grid with l1 metric, split into horizontal and vertical
    coordinate lines under a one-point top space.

    ``constant_h`` collapses CH to a point; ``shrink_v`` collapses CV, clears its
    unbounded flag and keeps only the horizontal line y = 0 as X; ``transverse_hv`` drops the orthogonality of
    H and V without supplying rho sets between them.
    """
    coords = list(range(-n, n + 1))
    pts = [(x, y) for x in coords for y in ([0] if shrink_v else coords)]
    names = [f"{x},{y}" for x, y in pts]
    dist = [[abs(a[0] - b[0]) + abs(a[1] - b[1]) for b in pts] for a in pts]
    line = {str(c): [str(d) for d in (c - 1, c + 1) if -n <= d <= n] for c in coords}
    point = {"*": []}
    cspaces = {"S": point, "H": point if constant_h else line, "V": point if shrink_v else line}
    projections = {
        "S": {p: ["*"] for p in names},
        "H": {p: ["*"] if constant_h else [str(x)] for p, (x, _) in zip(names, pts)},
        "V": {p: ["*"] if shrink_v else [str(y)] for p, (_, y) in zip(names, pts)},
    }
    relations = [["H", "S", NESTED], ["V", "S", NESTED]]
    if not transverse_hv:
        relations.append(["H", "V", ORTHOGONAL])
    rhos = [{"from": "H", "to": "S", "set": ["*"]}, {"from": "V", "to": "S", "set": ["*"]}]
    if drop_rho is not None:
        rhos = [r for r in rhos if (r["from"], r["to"]) != tuple(drop_rho)]
    return {
        "space": {"points": names, "distances": dist},
        "domains": ["S", "H", "V"],
        "relations": relations,
        "cspaces": cspaces,
        "projections": projections,
        "rhos": rhos,
        "flags": {"S": False, "H": True, "V": not shrink_v},
        "E": E,
        "M": M,
    }
