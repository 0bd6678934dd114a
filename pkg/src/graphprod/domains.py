"""Parallelism classes [g.Lambda] and the relations between them.

A class is stored by the canonical representative of the coset
g * G_st(Lambda): the unique element of least word length, obtained by
peeling off every right divisor supported in st(Lambda).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

from .errors import MixedAmbient, NoOrthogonal
from .graph import SimplicialGraph, Subgraph, _as_subgraph, enumerate_subgraphs, link, star
from .words import GraphProduct, NormalForm, split_left, split_right, support


@dataclass(frozen=True)
class ParallelismClass:
    rep: NormalForm
    sub: Subgraph

    def __str__(self) -> str:
        rep = "" if self.rep.is_identity() else str(self.rep).replace(" ", "")
        return f"[{rep}{self.sub!r}]"

    @property
    def gp(self) -> GraphProduct:
        return self.rep.gp


class RelationKind(enum.Enum):
    EQUAL = "equal"
    NESTED = "nested"
    ORTHOGONAL = "orthogonal"
    TRANSVERSE = "transverse"


@dataclass(frozen=True)
class DomainRelation:
    kind: RelationKind
    # for NESTED: "sub" when the first class nests in the second, "super" otherwise
    direction: Optional[str] = None

    def __str__(self) -> str:
        if self.kind is RelationKind.NESTED:
            return "nested" if self.direction == "sub" else "contains"
        return self.kind.value


def parallel(g: NormalForm, h: NormalForm, sub) -> bool:
    sub = _as_subgraph(g.gp.graph, sub)
    return support(g.inverse() * h).members <= star(sub).members


def canonicalize(g: NormalForm, sub) -> ParallelismClass:
    sub = _as_subgraph(g.gp.graph, sub)
    rest, _ = split_right(g, star(sub))
    return ParallelismClass(rest, sub)


def double_coset_split(x: NormalForm, left, right) -> Optional[tuple[NormalForm, NormalForm]]:
    """Return ``(p, q)`` with ``x = p*q``, ``p`` in G_left, ``q`` in G_right,
    or None when ``x`` is not in G_left * G_right."""
    p, q = split_left(x, left)
    if support(q).members <= _as_subgraph(x.gp.graph, right).members:
        return p, q
    return None


def common_refinement(a: ParallelismClass, b: ParallelismClass) -> Optional[NormalForm]:
    """Some ``k`` with [a.rep A] = [k A] and [b.rep B] = [k B], if one exists."""
    x = a.rep.inverse() * b.rep
    split = double_coset_split(x, star(a.sub), star(b.sub))
    if split is None:
        return None
    return a.rep * split[0]


def relation(a: ParallelismClass, b: ParallelismClass) -> DomainRelation:
    if a.gp is not b.gp and a.gp != b.gp:
        raise MixedAmbient("classes live in different graph products")
    A, B = a.sub.members, b.sub.members
    if A == B and a.rep == b.rep:
        return DomainRelation(RelationKind.EQUAL)
    if A <= B or B <= A or A <= link(b.sub).members:
        k = common_refinement(a, b)
        if k is not None:
            if A == B:
                return DomainRelation(RelationKind.EQUAL)
            if A <= B:
                return DomainRelation(RelationKind.NESTED, "sub")
            if B <= A:
                return DomainRelation(RelationKind.NESTED, "super")
            return DomainRelation(RelationKind.ORTHOGONAL)
    return DomainRelation(RelationKind.TRANSVERSE)


def nests_in(a: ParallelismClass, b: ParallelismClass) -> bool:
    r = relation(a, b)
    return r.kind is RelationKind.EQUAL or (r.kind is RelationKind.NESTED and r.direction == "sub")


def container(w: ParallelismClass, u: ParallelismClass) -> ParallelismClass:
    """Clean container of ``u`` inside ``w``: [a (lk(Omega) & Lambda)]."""
    if not nests_in(u, w):
        raise ValueError(f"{u} is not nested in {w}")
    inner = link(u.sub).members & w.sub.members
    if not inner:
        raise NoOrthogonal(f"no domain nested in {w} is orthogonal to {u}")
    a = common_refinement(w, u)
    assert a is not None
    return canonicalize(a, Subgraph(w.sub.parent, frozenset(inner)))


def coning_family(g: SimplicialGraph) -> list[Subgraph]:
    """Nonempty induced subgraphs with nonempty link."""
    return enumerate_subgraphs(g, lambda s: bool(link(s).members))


@dataclass
class ContainerReport:
    entries: list = field(default_factory=list)
    checked_triples: int = 0

    @property
    def violations(self) -> list:
        return [e for e in self.entries if not e["clean"]]

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {"checked_triples": self.checked_triples, "violations": len(self.violations),
                "entries": self.entries}


def verify_clean_containers(g: SimplicialGraph, depth: int = 1,
                            gp: Optional[GraphProduct] = None) -> ContainerReport:
    """Exhaustive clean-container check over identity-rep pairs U in W.

    Orthogonal candidates V = [k Pi] range over every induced Pi and every
    ``k`` in the standard ball of radius ``depth``.
    """
    from .cayley import ball_elements

    gp = gp or GraphProduct.raag(g)
    subs = enumerate_subgraphs(g)
    reps = ball_elements(gp, depth)
    one = gp.identity()
    report = ContainerReport()
    for lam in subs:
        W = ParallelismClass(one, lam)
        for om in subs:
            if not om.members <= lam.members:
                continue
            U = ParallelismClass(one, om)
            witnesses = set()
            for pi in subs:
                for k in reps:
                    V = canonicalize(k, pi)
                    if V in witnesses:
                        continue
                    if nests_in(V, W) and relation(V, U).kind is RelationKind.ORTHOGONAL:
                        witnesses.add(V)
            if not witnesses:
                continue
            entry = {"W": str(W), "U": str(U), "Q": None,
                     "orthogonal_witnesses": sorted(str(v) for v in witnesses), "clean": False}
            report.checked_triples += len(witnesses)
            try:
                Q = container(W, U)
            except NoOrthogonal:
                report.entries.append(entry)
                continue
            entry["Q"] = str(Q)
            rq = relation(Q, W)
            proper = rq.kind is RelationKind.NESTED and rq.direction == "sub"
            entry["clean"] = (proper and relation(Q, U).kind is RelationKind.ORTHOGONAL
                              and all(nests_in(v, Q) for v in witnesses))
            report.entries.append(entry)
    return report
