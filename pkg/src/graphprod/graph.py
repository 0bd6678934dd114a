"""Finite simplicial graphs, induced subgraphs, links and stars."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Iterable, Iterator, Optional

from .errors import LimitExceeded

DEFAULT_SUBGRAPH_LIMIT = 16


class SimplicialGraph:
    """Undirected graph without loops; vertices are strings in sorted order.

    The vertex order is fixed here once and used for every canonical
    tie-break downstream (normal forms, representatives, star choices).
    """

    def __init__(self, vertices: Iterable[str], edges: Iterable[tuple[str, str]] = ()):
        verts = [str(v) for v in vertices]
        if len(set(verts)) != len(verts):
            raise ValueError("duplicate vertex identifiers")
        self.vertices: tuple[str, ...] = tuple(sorted(verts))
        self.index = {v: i for i, v in enumerate(self.vertices)}
        adj: dict[str, set[str]] = {v: set() for v in self.vertices}
        for u, v in edges:
            u, v = str(u), str(v)
            if u == v:
                raise ValueError(f"self-loop at {u!r}")
            if u not in adj or v not in adj:
                raise ValueError(f"edge {u!r}-{v!r} uses an unknown vertex")
            adj[u].add(v)
            adj[v].add(u)
        self._adj = {v: frozenset(n) for v, n in adj.items()}
        self._key = (self.vertices, frozenset(frozenset(e) for e in self.edges()))

    @classmethod
    def path(cls, n: int, names: str = "abcdefghijklmnop") -> "SimplicialGraph":
        vs = list(names[:n])
        return cls(vs, zip(vs, vs[1:]))

    @classmethod
    def cycle(cls, n: int, names: str = "abcdefghijklmnop") -> "SimplicialGraph":
        vs = list(names[:n])
        return cls(vs, list(zip(vs, vs[1:])) + [(vs[-1], vs[0])])

    @classmethod
    def complete(cls, n: int, names: str = "abcdefghijklmnop") -> "SimplicialGraph":
        vs = list(names[:n])
        return cls(vs, combinations(vs, 2))

    @classmethod
    def discrete(cls, n: int, names: str = "abcdefghijklmnop") -> "SimplicialGraph":
        return cls(list(names[:n]))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, SimplicialGraph) and self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def __repr__(self) -> str:
        return f"SimplicialGraph({list(self.vertices)}, {sorted(tuple(sorted(e)) for e in self.edges())})"

    def __len__(self) -> int:
        return len(self.vertices)

    def edges(self) -> list[tuple[str, str]]:
        return [(u, v) for u in self.vertices for v in sorted(self._adj[u]) if u < v]

    def adjacent(self, u: str, v: str) -> bool:
        return v in self._adj[u]

    def neighbors(self, v: str) -> frozenset[str]:
        return self._adj[v]

    def sort(self, vs: Iterable[str]) -> list[str]:
        return sorted(vs, key=self.index.__getitem__)

    def subgraph(self, members: Iterable[str]) -> "Subgraph":
        return Subgraph(self, frozenset(members))

    @property
    def full(self) -> "Subgraph":
        return Subgraph(self, frozenset(self.vertices))

    def to_dict(self) -> dict:
        return {"vertices": list(self.vertices), "edges": [list(e) for e in self.edges()]}


@dataclass(frozen=True)
class Subgraph:
    """Induced subgraph, identified by its vertex set."""

    parent: SimplicialGraph
    members: frozenset

    def __post_init__(self) -> None:
        unknown = self.members - set(self.parent.vertices)
        if unknown:
            raise ValueError(f"vertices {sorted(unknown)} not in graph")

    def __iter__(self) -> Iterator[str]:
        return iter(self.parent.sort(self.members))

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, v: object) -> bool:
        return v in self.members

    def __le__(self, other: "Subgraph") -> bool:
        return self.members <= _members(other)

    def __lt__(self, other: "Subgraph") -> bool:
        return self.members < _members(other)

    def __repr__(self) -> str:
        return "{" + ",".join(self) + "}"

    def edges(self) -> list[tuple[str, str]]:
        return [(u, v) for u, v in self.parent.edges() if u in self.members and v in self.members]

    def sort_key(self) -> tuple:
        # ShortLex on the sorted vertex-index tuple
        idx = tuple(sorted(self.parent.index[v] for v in self.members))
        return (len(idx), idx)


def _members(sub) -> frozenset:
    return sub.members if isinstance(sub, Subgraph) else frozenset(sub)


def _as_subgraph(g: SimplicialGraph, sub) -> Subgraph:
    return sub if isinstance(sub, Subgraph) else Subgraph(g, frozenset(sub))


def link(sub: Subgraph) -> Subgraph:
    """Vertices outside ``sub`` adjacent to every vertex of ``sub``.

    The link of the empty subgraph is the whole graph.
    """
    g = sub.parent
    if not sub.members:
        return g.full
    out = None
    for v in sub.members:
        out = set(g.neighbors(v)) if out is None else out & g.neighbors(v)
    return Subgraph(g, frozenset(out - sub.members))


def star(sub: Subgraph) -> Subgraph:
    g = sub.parent
    if not sub.members:
        return g.full
    return Subgraph(g, sub.members | link(sub).members)


def is_join(sub_a: Subgraph, sub_b: Subgraph) -> bool:
    """Every vertex of ``sub_a`` adjacent to every vertex of ``sub_b``."""
    g = sub_a.parent
    return all(g.adjacent(u, v) for u in sub_a.members for v in _members(sub_b))


def enumerate_subgraphs(
    g: SimplicialGraph,
    predicate: Optional[Callable[[Subgraph], bool]] = None,
    limit: int = DEFAULT_SUBGRAPH_LIMIT,
) -> list[Subgraph]:
    """All nonempty induced subgraphs in ShortLex order, optionally filtered."""
    n = len(g)
    if n > limit:
        raise LimitExceeded(f"graph has {n} vertices, limit is {limit}")
    out = []
    for size in range(1, n + 1):
        for combo in combinations(g.vertices, size):
            sub = Subgraph(g, frozenset(combo))
            if predicate is None or predicate(sub):
                out.append(sub)
    return out


def has_isolated_vertices(g: SimplicialGraph) -> bool:
    return any(not g.neighbors(v) for v in g.vertices)
