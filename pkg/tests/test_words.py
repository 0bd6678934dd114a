import random

import pytest
from hypothesis import given, settings, strategies as st

from conftest import f2, k3_mixed, p3, p4, z2
from graphprod import CyclicGroup, FreeGroup, GraphProduct, IntegerGroup, SimplicialGraph, TableGroup
from graphprod.errors import EmptyLink, InvalidGroupSpec, InvalidSyllable, NotInStar, ParseError
from graphprod.groups import group_from_spec
from graphprod.words import (QGParams, decompose_star_element, in_parabolic, split_left, split_right,
                             spell, word_length)
from oracles import (bfs_lengths, invert_letters, letter_length, random_letters, reduce_letters,
                     shuffle_letters)


def orders_of(gp):
    return {v: g.n for v, g in gp.groups.items() if isinstance(g, CyclicGroup)}


def to_nf(gp, letters):
    orders = orders_of(gp)
    word = []
    for v, e in letters:
        if v in orders:
            e %= orders[v]
        if e:
            word.append((v, e))
    return gp.normalize(word)


# -- fixed examples ------------------------------------------------------------

def test_normalize_examples(P3, P4):
    assert str(P3.parse("b a")) == "a b"
    assert str(P3.parse("a b a^-1")) == "b"
    assert str(P3.parse("a^2 a^-1 c")) == "a c"
    assert str(P3.parse("a c") * P3.parse("c^-1 a")) == "a^2"
    assert str(P4.parse("a b") * P4.parse("d")) == "a b d"


def test_invert_examples(P3):
    assert str(P3.parse("a c").inverse()) == "c^-1 a^-1"
    assert P3.identity().inverse().is_identity()
    assert str(P3.parse("a^2 b").inverse()) == "a^-2 b^-1"


def test_support_and_length(P3, P4):
    assert P4.parse("a b c d").support.members == {"a", "b", "c", "d"}
    assert P3.identity().support.members == frozenset()
    assert P3.parse("a b a^-1").support.members == {"b"}
    assert word_length(P3.parse("a^3 b^-2")) == 5
    assert word_length(P3.identity()) == 0
    assert word_length(P4.parse("a b c d") ** 2) == 8


def test_length_of_abcd_squared_matches_reduction(P4):
    letters = [(v, 1) for v in "abcdabcd"]
    assert letter_length(reduce_letters(P4.graph, letters)) == 8


def test_in_parabolic(P3):
    assert in_parabolic(P3.parse("b"), P3.graph.subgraph("ab"))
    assert not in_parabolic(P3.parse("c"), P3.graph.subgraph("ab"))
    assert in_parabolic(P3.identity(), P3.graph.subgraph("a"))


def test_decompose_star_element(P3, P4):
    h, v, k, w = decompose_star_element(P3.parse("a b a"), P3.graph.subgraph("a"))
    assert (str(h), v, str(k), w) == ("a^2", "b", "b", "a")
    h, v, k, w = decompose_star_element(P4.parse("a c b"), P4.graph.subgraph("ac"))
    assert (str(h), v, str(k), w) == ("a c", "b", "b", "a")
    assert h * k == P4.parse("a c b")
    h, _, k, _ = decompose_star_element(P3.identity(), P3.graph.subgraph("a"))
    assert h.is_identity() and k.is_identity()


def test_decompose_errors(P3, P4):
    with pytest.raises(NotInStar):
        decompose_star_element(P3.parse("c"), P3.graph.subgraph("a"))
    with pytest.raises(EmptyLink):
        decompose_star_element(P4.parse("b"), P4.graph.subgraph("bc"))


def test_parse_errors(P3):
    with pytest.raises(ParseError):
        P3.parse("q")
    with pytest.raises(ParseError):
        P3.parse("a^")
    with pytest.raises(InvalidSyllable):
        P3.normalize([("a", 0)])


def test_group_specs():
    assert isinstance(group_from_spec({"kind": "Z"}), IntegerGroup)
    assert group_from_spec({"kind": "cyclic", "n": 5}).n == 5
    with pytest.raises(InvalidGroupSpec):
        group_from_spec({"kind": "cyclic", "n": 1})
    with pytest.raises(InvalidGroupSpec):
        group_from_spec({"kind": "free", "rank": 0})
    with pytest.raises(InvalidGroupSpec):
        group_from_spec({"kind": "Z", "n": 3})
    with pytest.raises(InvalidGroupSpec):
        TableGroup([[0, 1], [1, 1]])


def test_table_and_free_vertices():
    # S3 as permutations of (0,1,2), indices in lexicographic order
    from itertools import permutations
    perms = list(permutations(range(3)))
    table = [[perms.index(tuple(p[q[i]] for i in range(3))) for q in perms] for p in perms]
    g = SimplicialGraph("st", [("s", "t")])
    gp = GraphProduct(g, {"s": TableGroup(table), "t": FreeGroup(2)})
    x = gp.parse("t[abB] s{1}")
    assert str(x) == "s{1} t[a]"
    assert (x * x.inverse()).is_identity()
    assert not gp.all_infinite
    tg = gp.groups["s"]
    assert max(tg.length(e) for e in range(6)) == 1


def test_qg_params():
    assert QGParams(1, 0).check() == (1, 0)
    with pytest.raises(ValueError):
        QGParams(0.5, 0).check()
    with pytest.raises(ValueError):
        QGParams(1, -1).check()


def test_spell_is_geodesic(P4):
    x = P4.parse("a^2 c^-1 b d a")
    letters = spell(x)
    assert len(letters) == word_length(x)
    prod = P4.identity()
    for s in letters:
        prod = prod * s
    assert prod == x


def test_splits(P4):
    x = P4.parse("a b c d a")
    rest, tail = split_right(x, P4.graph.subgraph("abc"))
    assert rest * tail == x and tail.support.members <= {"a", "b", "c"}
    head, rest = split_left(x, P4.graph.subgraph("abc"))
    assert head * rest == x and str(head) == "a b c"


def test_p3_centralizer_of_b(P3):
    rng = random.Random(3)
    b = P3.parse("b")
    g = SimplicialGraph("ac")
    for _ in range(200):
        letters = [(v, e) for v, e in random_letters(g, rng, rng.randrange(1, 8))]
        x = P3.normalize(letters)
        assert x * b == b * x


# -- oracle comparisons --------------------------------------------------------

RAAGS = {"P3": p3, "P4": p4, "Z2": z2, "F2": f2}


@pytest.mark.parametrize("name", sorted(RAAGS))
@settings(max_examples=150, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(0, 12))
def test_normal_form_agrees_with_reduction_oracle(name, seed, n):
    gp = RAAGS[name]()
    rng = random.Random(seed)
    w = random_letters(gp.graph, rng, n)
    x = to_nf(gp, w)
    red = reduce_letters(gp.graph, w)
    assert word_length(x) == letter_length(red)
    assert x == to_nf(gp, red)
    assert x.is_identity() == (red == [])


@pytest.mark.parametrize("make", [p3, p4, z2, f2, k3_mixed])
@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(0, 10))
def test_canonical_under_shuffles(make, seed, n):
    gp = make()
    rng = random.Random(seed)
    w = random_letters(gp.graph, rng, n)
    x = to_nf(gp, w)
    assert to_nf(gp, shuffle_letters(gp.graph, w, rng)) == x
    assert (x * to_nf(gp, invert_letters(w))).is_identity()
    assert (x * x.inverse()).is_identity()


@pytest.mark.parametrize("make", [p3, p4, k3_mixed])
@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_group_axioms(make, seed):
    gp = make()
    rng = random.Random(seed)
    x, y, z = (to_nf(gp, random_letters(gp.graph, rng, rng.randrange(0, 8))) for _ in range(3))
    assert (x * y) * z == x * (y * z)
    assert x * gp.identity() == x == gp.identity() * x
    assert (x * y).inverse() == y.inverse() * x.inverse()


def test_k3_mixed_is_abelian_exponent_vector():
    gp = k3_mixed()
    rng = random.Random(11)
    for _ in range(300):
        w = random_letters(gp.graph, rng, rng.randrange(0, 10))
        vec = {"a": 0, "b": 0, "c": 0}
        for v, e in w:
            vec[v] += e
        vec["b"] %= 3
        x = to_nf(gp, w)
        got = {"a": 0, "b": 0, "c": 0}
        for s in x.syllables:
            got[s.vertex] = s.element
        assert got == vec
        assert word_length(x) == abs(vec["a"]) + min(vec["b"], 3 - vec["b"]) + abs(vec["c"])


@pytest.mark.parametrize("make", [p3, p4])
def test_word_length_equals_bfs_radius_4(make):
    gp = make()
    for x, d in bfs_lengths(gp, 4).items():
        assert word_length(x) == d


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_support_invariant_under_shuffle(seed):
    gp = p4()
    rng = random.Random(seed)
    w = reduce_letters(gp.graph, random_letters(gp.graph, rng, 10))
    x1, x2 = to_nf(gp, w), to_nf(gp, shuffle_letters(gp.graph, w, rng))
    assert x1.support == x2.support
    assert sorted(s.vertex for s in x1.syllables) == sorted(s.vertex for s in x2.syllables)
