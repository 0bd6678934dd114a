"""Graph-product arithmetic on syllable normal forms.

An element is stored as its reduced syllable sequence, linearised as the
lexicographically least ordering of the underlying trace: among syllables
whose left neighbours all commute with them, the one with the smallest
(vertex index, element key) goes first. Reduction happens by inserting
syllables one at a time and sliding each one left across commuting
syllables until it merges or is blocked.
"""
from __future__ import annotations

import re
from typing import Iterable, Mapping, NamedTuple, Optional, Sequence

from .errors import EmptyLink, InvalidSyllable, MixedAmbient, NotInStar, ParseError
from .graph import SimplicialGraph, Subgraph, link, star, _as_subgraph
from .groups import CyclicGroup, FreeGroup, IntegerGroup, TableGroup, VertexGroup


class Syllable(NamedTuple):
    vertex: str
    element: object


class QGParams(NamedTuple):
    """Quasi-geodesic constants: multiplicative ``lam`` >= 1, additive ``eps`` >= 0."""

    lam: float
    eps: float

    def check(self) -> "QGParams":
        if self.lam < 1 or self.eps < 0:
            raise ValueError(f"need lambda >= 1 and epsilon >= 0, got {tuple(self)}")
        return self


class GraphProduct:
    """The graph product of ``groups`` over ``graph``."""

    def __init__(self, graph: SimplicialGraph, groups: Mapping[str, VertexGroup] | None = None):
        self.graph = graph
        if groups is None:
            groups = {v: IntegerGroup() for v in graph.vertices}
        missing = set(graph.vertices) - set(groups)
        if missing:
            raise InvalidSyllable(f"no vertex group for {sorted(missing)}")
        self.groups = {v: groups[v] for v in graph.vertices}
        self._g = [self.groups[v] for v in graph.vertices]
        self._names = graph.vertices
        n = len(graph.vertices)
        self._comm = [frozenset(graph.index[u] for u in graph.neighbors(v)) for v in graph.vertices]
        self._noncomm = [frozenset(range(n)) - self._comm[i] for i in range(n)]
        self._identity = NormalForm(self, ())
        self._gens: Optional[list[NormalForm]] = None

    def __eq__(self, other):
        return isinstance(other, GraphProduct) and other.graph == self.graph and other.groups == self.groups

    def __hash__(self):
        return hash(self.graph)

    def __repr__(self):
        return f"GraphProduct({self.graph!r})"

    @classmethod
    def raag(cls, graph: SimplicialGraph) -> "GraphProduct":
        return cls(graph, {v: IntegerGroup() for v in graph.vertices})

    @property
    def all_infinite(self) -> bool:
        return all(g.is_infinite for g in self._g)

    @property
    def letter_cancellation(self) -> bool:
        """True when every vertex group is free (Z or F_n)."""
        return all(isinstance(g, (IntegerGroup, FreeGroup)) for g in self._g)

    # -- construction -----------------------------------------------------

    def identity(self) -> "NormalForm":
        return self._identity

    def syllable(self, vertex: str, element) -> "NormalForm":
        return self.normalize([(vertex, element)])

    def normalize(self, word: Iterable) -> "NormalForm":
        """Canonical normal form of a product of syllables ``(vertex, element)``."""
        out: list[tuple[int, object]] = []
        for item in word:
            v, e = item
            if v not in self.graph.index:
                raise InvalidSyllable(f"unknown vertex {v!r}")
            i = self.graph.index[v]
            grp = self._g[i]
            e = grp.validate(e)
            if grp.is_identity(e):
                raise InvalidSyllable(f"identity syllable at vertex {v!r}")
            self._push(out, i, e)
        return NormalForm(self, self._canonical(out))

    def _push(self, out: list, i: int, e) -> None:
        comm = self._comm[i]
        j = len(out) - 1
        while j >= 0:
            vj, ej = out[j]
            if vj == i:
                m = self._g[i].mul(ej, e)
                if self._g[i].is_identity(m):
                    del out[j]
                else:
                    out[j] = (i, m)
                return
            if vj not in comm:
                break
            j -= 1
        out.append((i, e))

    def _canonical(self, syls: Sequence) -> tuple:
        n = len(syls)
        if n < 2:
            return tuple(syls)
        preds = self._preds(syls)
        remaining = [len(p) for p in preds]
        succ: list[list[int]] = [[] for _ in range(n)]
        for q, ps in enumerate(preds):
            for p in ps:
                succ[p].append(q)
        avail = [p for p in range(n) if remaining[p] == 0]
        g = self._g
        out = []
        while avail:
            best = min(avail, key=lambda p: (syls[p][0], g[syls[p][0]].key(syls[p][1])))
            avail.remove(best)
            out.append(syls[best])
            for q in succ[best]:
                remaining[q] -= 1
                if remaining[q] == 0:
                    avail.append(q)
        return tuple(out)

    def _preds(self, syls: Sequence) -> list[list[int]]:
        """Immediate-order predecessors: earlier syllables that do not commute."""
        nc = self._noncomm
        return [[p for p in range(q) if syls[p][0] in nc[syls[q][0]]] for q in range(len(syls))]

    def _from_raw(self, syls: Sequence) -> "NormalForm":
        """Normal form of an already reduced syllable sequence."""
        return NormalForm(self, self._canonical(list(syls)))

    def _mul_raw(self, x: tuple, y: tuple) -> tuple:
        out = list(x)
        for i, e in y:
            self._push(out, i, e)
        return self._canonical(out)

    def generators(self) -> list["NormalForm"]:
        """Standard symmetric generating set: union of vertex-group generators."""
        if self._gens is None:
            gens = []
            for i, grp in enumerate(self._g):
                for s in grp.generators():
                    gens.append(NormalForm(self, ((i, s),)))
            self._gens = gens
        return self._gens

    # -- text ---------------------------------------------------------------

    _TOKEN = re.compile(r"^(?P<v>[A-Za-z0-9_]+)(?:\^(?P<exp>-?\d+)|\[(?P<free>[A-Za-z]*)\]|\{(?P<tab>\d+)\})?$")

    def parse(self, text: str) -> "NormalForm":
        """Parse ``a^-2 b c^3`` / ``v[abA]`` / ``t{2}`` word literals."""
        word = []
        for tok in text.split():
            m = self._TOKEN.match(tok)
            if not m or m.group("v") not in self.graph.index:
                raise ParseError(f"cannot parse token {tok!r}")
            v = m.group("v")
            grp = self.groups[v]
            if m.group("free") is not None:
                if not isinstance(grp, FreeGroup):
                    raise ParseError(f"free-word literal on non-free vertex {v!r}")
                letters = []
                for ch in m.group("free"):
                    k = ord(ch.lower()) - ord("a") + 1
                    letters.append(k if ch.islower() else -k)
                elem = grp.validate(letters)
                if grp.is_identity(elem):
                    continue
            elif m.group("tab") is not None:
                if not isinstance(grp, TableGroup):
                    raise ParseError(f"table literal on non-table vertex {v!r}")
                elem = int(m.group("tab"))
                if elem == grp.identity():
                    continue
            else:
                k = int(m.group("exp")) if m.group("exp") is not None else 1
                if isinstance(grp, IntegerGroup):
                    elem = k
                elif isinstance(grp, CyclicGroup):
                    elem = k % grp.n
                elif isinstance(grp, FreeGroup):
                    elem = (1,) * k if k >= 0 else (-1,) * (-k)
                elif isinstance(grp, TableGroup):
                    if k != 1 or len(grp.generators()) == 0:
                        raise ParseError(f"use {v}{{index}} for table-group vertex {v!r}")
                    elem = grp.generators()[0]
                else:  # pragma: no cover
                    raise ParseError(f"unsupported group at {v!r}")
                if grp.is_identity(elem):
                    continue
            word.append((v, elem))
        return self.normalize(word)

    def format_syllable(self, i: int, e) -> str:
        v = self._names[i]
        grp = self._g[i]
        if isinstance(grp, (IntegerGroup, CyclicGroup)):
            return v if e == 1 else f"{v}^{e}"
        if isinstance(grp, FreeGroup):
            return v + "[" + "".join(chr(ord("a") + abs(a) - 1) if a > 0 else chr(ord("A") + abs(a) - 1)
                                     for a in e) + "]"
        return f"{v}{{{e}}}"


class NormalForm:
    """Immutable canonical syllable sequence; compares and hashes by value."""

    __slots__ = ("gp", "syl", "_hash")

    def __init__(self, gp: GraphProduct, syl: tuple):
        self.gp = gp
        self.syl = syl
        self._hash = hash(syl)

    def __eq__(self, other):
        return isinstance(other, NormalForm) and self.syl == other.syl and (
            self.gp is other.gp or self.gp == other.gp)

    def __hash__(self):
        return self._hash

    def __len__(self):
        return len(self.syl)

    def __bool__(self):
        return bool(self.syl)

    def __str__(self):
        if not self.syl:
            return "1"
        return " ".join(self.gp.format_syllable(i, e) for i, e in self.syl)

    def __repr__(self):
        return f"<{self}>"

    @property
    def syllables(self) -> list[Syllable]:
        return [Syllable(self.gp._names[i], e) for i, e in self.syl]

    def __mul__(self, other: "NormalForm") -> "NormalForm":
        return multiply(self, other)

    def inverse(self) -> "NormalForm":
        return invert(self)

    def __pow__(self, n: int) -> "NormalForm":
        base = self if n >= 0 else self.inverse()
        out = self.gp.identity()
        for _ in range(abs(n)):
            out = out * base
        return out

    @property
    def support(self) -> Subgraph:
        return support(self)

    @property
    def length(self) -> int:
        return word_length(self)

    def sort_key(self) -> tuple:
        """ShortLex: word length first, then the syllable sequence."""
        g = self.gp._g
        return (word_length(self), tuple((i, g[i].key(e)) for i, e in self.syl))

    def is_identity(self) -> bool:
        return not self.syl


def normalize(gp: GraphProduct, word: Iterable) -> NormalForm:
    return gp.normalize(word)


def multiply(x: NormalForm, y: NormalForm) -> NormalForm:
    if x.gp is not y.gp and x.gp != y.gp:
        raise MixedAmbient("elements live in different graph products")
    if not y.syl:
        return x
    if not x.syl:
        return y
    return NormalForm(x.gp, x.gp._mul_raw(x.syl, y.syl))


def invert(x: NormalForm) -> NormalForm:
    g = x.gp._g
    raw = [(i, g[i].inv(e)) for i, e in reversed(x.syl)]
    return x.gp._from_raw(raw)


def support(x: NormalForm) -> Subgraph:
    names = x.gp._names
    return Subgraph(x.gp.graph, frozenset(names[i] for i, _ in x.syl))


def word_length(x: NormalForm) -> int:
    g = x.gp._g
    return sum(g[i].length(e) for i, e in x.syl)


def in_parabolic(x: NormalForm, sub) -> bool:
    sub = _as_subgraph(x.gp.graph, sub)
    return support(x).members <= sub.members


def split_right(x: NormalForm, vertices) -> tuple[NormalForm, NormalForm]:
    """Write ``x = rest * tail`` with ``tail`` the largest right divisor
    supported on ``vertices``; ``rest`` has no such right divisor."""
    gp = x.gp
    idx = {gp.graph.index[v] for v in _as_subgraph(gp.graph, vertices).members}
    nc = gp._noncomm
    kept: list[int] = []
    tail: list[int] = []
    syl = x.syl
    for p in range(len(syl) - 1, -1, -1):
        i = syl[p][0]
        if i in idx and all(syl[q][0] not in nc[i] for q in kept):
            tail.append(p)
        else:
            kept.append(p)
    rest = [syl[p] for p in reversed(kept)]
    tl = [syl[p] for p in reversed(tail)]
    return gp._from_raw(rest), gp._from_raw(tl)


def split_left(x: NormalForm, vertices) -> tuple[NormalForm, NormalForm]:
    """Write ``x = head * rest`` with ``head`` the largest left divisor
    supported on ``vertices``."""
    gp = x.gp
    idx = {gp.graph.index[v] for v in _as_subgraph(gp.graph, vertices).members}
    nc = gp._noncomm
    kept: list[int] = []
    head: list[int] = []
    syl = x.syl
    for p in range(len(syl)):
        i = syl[p][0]
        if i in idx and all(syl[q][0] not in nc[i] for q in kept):
            head.append(p)
        else:
            kept.append(p)
    return gp._from_raw([syl[p] for p in head]), gp._from_raw([syl[p] for p in kept])


def decompose_star_element(g: NormalForm, sub) -> tuple[NormalForm, str, NormalForm, str]:
    """Split ``g`` in G_st(sub) as ``h * k`` with ``h`` in G_sub and ``k`` in G_lk(sub).

    Returns ``(h, v, k, w)`` where ``v`` is the least vertex of the link (so
    ``sub`` lies in st(v)) and ``w`` the least vertex of ``sub`` (so the link
    lies in st(w)): the element has length at most 2 over vertex stars.
    """
    gp = g.gp
    sub = _as_subgraph(gp.graph, sub)
    if not sub.members:
        raise ValueError("subgraph must be nonempty")
    lk = link(sub)
    if not lk.members:
        raise EmptyLink(f"link of {sub!r} is empty")
    st = star(sub)
    if not support(g).members <= st.members:
        raise NotInStar(f"support {support(g)!r} not inside st({sub!r}) = {st!r}")
    names = gp._names
    h = gp._from_raw([s for s in g.syl if names[s[0]] in sub.members])
    k = gp._from_raw([s for s in g.syl if names[s[0]] in lk.members])
    v = next(iter(lk))
    w = next(iter(sub))
    return h, v, k, w


def spell(x: NormalForm) -> list[NormalForm]:
    """Standard generators, left to right, whose product is ``x`` (geodesic)."""
    gp = x.gp
    out = []
    for i, e in x.syl:
        for s in gp._g[i].spell(e):
            out.append(NormalForm(gp, ((i, s),)))
    return out
