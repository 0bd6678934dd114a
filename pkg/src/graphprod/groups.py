"""Concrete vertex groups with exact word lengths over fixed generators.

Every group encodes its elements as hashable, totally ordered values; the
identity is never stored inside a syllable.
"""
from __future__ import annotations

import random
from collections import deque
from typing import Any, Sequence

from .errors import InvalidGroupSpec, InvalidSyllable


class VertexGroup:
    kind: str = ""
    is_infinite: bool = False

    def identity(self) -> Any:
        raise NotImplementedError

    def is_identity(self, x) -> bool:
        return x == self.identity()

    def mul(self, x, y):
        raise NotImplementedError

    def inv(self, x):
        raise NotImplementedError

    def length(self, x) -> int:
        raise NotImplementedError

    def spell(self, x) -> list:
        """Geodesic word for ``x`` as a list of generator elements."""
        raise NotImplementedError

    def generators(self) -> list:
        """Symmetric generating set used for Cayley balls."""
        raise NotImplementedError

    def key(self, x) -> tuple:
        raise NotImplementedError

    def validate(self, x) -> Any:
        raise NotImplementedError

    def elements_up_to(self, length: int) -> list:
        """Nonidentity elements of word length at most ``length`` (BFS)."""
        seen = {self.identity()}
        frontier = [self.identity()]
        out = []
        for _ in range(length):
            nxt = []
            for x in frontier:
                for s in self.generators():
                    y = self.mul(x, s)
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
                        out.append(y)
            frontier = nxt
        return sorted(out, key=self.key)

    def to_spec(self) -> dict:
        raise NotImplementedError


class IntegerGroup(VertexGroup):
    kind = "Z"
    is_infinite = True

    def identity(self):
        return 0

    def mul(self, x, y):
        return x + y

    def inv(self, x):
        return -x

    def length(self, x):
        return abs(x)

    def spell(self, x):
        return [1 if x > 0 else -1] * abs(x)

    def generators(self):
        return [1, -1]

    def key(self, x):
        return (abs(x), x < 0)

    def validate(self, x):
        if isinstance(x, bool) or not isinstance(x, int):
            raise InvalidSyllable(f"integer exponent expected, got {x!r}")
        return x

    def to_spec(self):
        return {"kind": "Z"}

    def __eq__(self, other):
        return isinstance(other, IntegerGroup)

    def __hash__(self):
        return hash("Z")


class CyclicGroup(VertexGroup):
    kind = "cyclic"
    is_infinite = False

    def __init__(self, n: int):
        if not isinstance(n, int) or n < 2:
            raise InvalidGroupSpec(f"cyclic group order must be >= 2, got {n!r}")
        self.n = n

    def identity(self):
        return 0

    def mul(self, x, y):
        return (x + y) % self.n

    def inv(self, x):
        return (-x) % self.n

    def length(self, x):
        return min(x, self.n - x)

    def spell(self, x):
        if x <= self.n - x:
            return [1] * x
        return [self.n - 1] * (self.n - x)

    def generators(self):
        return [1] if self.n == 2 else [1, self.n - 1]

    def key(self, x):
        return (self.length(x), x)

    def validate(self, x):
        if isinstance(x, bool) or not isinstance(x, int):
            raise InvalidSyllable(f"residue expected, got {x!r}")
        return x % self.n

    def to_spec(self):
        return {"kind": "cyclic", "n": self.n}

    def __eq__(self, other):
        return isinstance(other, CyclicGroup) and other.n == self.n

    def __hash__(self):
        return hash(("cyclic", self.n))


class FreeGroup(VertexGroup):
    """Free group on ``rank`` letters; elements are freely reduced tuples of
    nonzero ints (``i`` is the i-th generator, ``-i`` its inverse)."""

    kind = "free"
    is_infinite = True

    def __init__(self, rank: int):
        if not isinstance(rank, int) or rank < 1:
            raise InvalidGroupSpec(f"free group rank must be >= 1, got {rank!r}")
        self.rank = rank

    def identity(self):
        return ()

    @staticmethod
    def _reduce(word):
        out: list[int] = []
        for x in word:
            if out and out[-1] == -x:
                out.pop()
            else:
                out.append(x)
        return tuple(out)

    def mul(self, x, y):
        return self._reduce(x + y)

    def inv(self, x):
        return tuple(-a for a in reversed(x))

    def length(self, x):
        return len(x)

    def spell(self, x):
        return [(a,) for a in x]

    def generators(self):
        out = []
        for i in range(1, self.rank + 1):
            out += [(i,), (-i,)]
        return out

    def key(self, x):
        return (len(x), tuple((abs(a), a < 0) for a in x))

    def validate(self, x):
        x = tuple(x)
        if any(not isinstance(a, int) or a == 0 or abs(a) > self.rank for a in x):
            raise InvalidSyllable(f"letters must be nonzero ints with |i| <= {self.rank}: {x!r}")
        return self._reduce(x)

    def to_spec(self):
        return {"kind": "free", "rank": self.rank}

    def __eq__(self, other):
        return isinstance(other, FreeGroup) and other.rank == self.rank

    def __hash__(self):
        return hash(("free", self.rank))


class TableGroup(VertexGroup):
    """Finite group given by a multiplication table on indices 0..n-1."""

    kind = "table"
    is_infinite = False

    def __init__(self, table: Sequence[Sequence[int]], generators: Sequence[int] | None = None,
                 seed: int = 0):
        t = [list(row) for row in table]
        n = len(t)
        if n < 1 or any(len(row) != n for row in t):
            raise InvalidGroupSpec("multiplication table must be square")
        if any(not isinstance(x, int) or not 0 <= x < n for row in t for x in row):
            raise InvalidGroupSpec("table entries must be indices in range")
        ident = [e for e in range(n) if t[e] == list(range(n)) and all(t[x][e] == x for x in range(n))]
        if not ident:
            raise InvalidGroupSpec("table has no identity")
        e = ident[0]
        for x in range(n):
            if sorted(t[x]) != list(range(n)) or sorted(t[y][x] for y in range(n)) != list(range(n)):
                raise InvalidGroupSpec("table is not a Latin square (missing inverses)")
        if n <= 32:
            triples = ((a, b, c) for a in range(n) for b in range(n) for c in range(n))
        else:
            rng = random.Random(seed)
            triples = ((rng.randrange(n), rng.randrange(n), rng.randrange(n)) for _ in range(20000))
        for a, b, c in triples:
            if t[t[a][b]][c] != t[a][t[b][c]]:
                raise InvalidGroupSpec(f"table not associative at {(a, b, c)}")
        self.table = t
        self.n = n
        self.e = e
        self._inv = [next(y for y in range(n) if t[x][y] == e) for x in range(n)]
        gens = sorted(set(range(n)) - {e}) if generators is None else sorted(set(generators))
        if any(not 0 <= g < n or g == e for g in gens):
            raise InvalidGroupSpec("generators must be nonidentity indices")
        self._declared = gens
        self._gens = sorted(set(gens) | {self._inv[g] for g in gens})
        # BFS word table over the symmetric generating set
        self._word = {e: []}
        queue = deque([e])
        while queue:
            x = queue.popleft()
            for s in self._gens:
                y = t[x][s]
                if y not in self._word:
                    self._word[y] = self._word[x] + [s]
                    queue.append(y)
        if len(self._word) != n:
            raise InvalidGroupSpec("declared generators do not generate the table group")

    def identity(self):
        return self.e

    def mul(self, x, y):
        return self.table[x][y]

    def inv(self, x):
        return self._inv[x]

    def length(self, x):
        return len(self._word[x])

    def spell(self, x):
        return list(self._word[x])

    def generators(self):
        return list(self._gens)

    def key(self, x):
        return (self.length(x), x)

    def validate(self, x):
        if isinstance(x, bool) or not isinstance(x, int) or not 0 <= x < self.n:
            raise InvalidSyllable(f"table index out of range: {x!r}")
        return x

    def to_spec(self):
        spec = {"kind": "table", "table": self.table}
        if self._declared != sorted(set(range(self.n)) - {self.e}):
            spec["generators"] = self._declared
        return spec

    def __eq__(self, other):
        return isinstance(other, TableGroup) and other.table == self.table and other._gens == self._gens

    def __hash__(self):
        return hash(("table", self.n, tuple(self._gens)))


def group_from_spec(spec: dict) -> VertexGroup:
    """Build a vertex group from its config dict (``{"kind": "Z"}`` etc.)."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise InvalidGroupSpec(f"vertex group spec needs a 'kind': {spec!r}")
    kind = str(spec["kind"])
    allowed = {"kind"}
    if kind in ("Z", "integer", "IntegerGroup"):
        grp: VertexGroup = IntegerGroup()
    elif kind in ("cyclic", "CyclicGroup"):
        allowed |= {"n"}
        grp = CyclicGroup(spec.get("n"))
    elif kind in ("free", "FreeGroup"):
        allowed |= {"rank"}
        grp = FreeGroup(spec.get("rank"))
    elif kind in ("table", "TableGroup"):
        allowed |= {"table", "generators"}
        grp = TableGroup(spec.get("table", []), spec.get("generators"))
    else:
        raise InvalidGroupSpec(f"unknown vertex group kind {kind!r}")
    extra = set(spec) - allowed
    if extra:
        raise InvalidGroupSpec(f"unknown fields in vertex group spec: {sorted(extra)}")
    return grp
