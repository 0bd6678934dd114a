import random
from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from conftest import p3, p4
from graphprod import GraphProduct, SimplicialGraph
from graphprod.domains import (ParallelismClass, RelationKind, canonicalize, container, coning_family,
                               double_coset_split, nests_in, parallel, relation, verify_clean_containers)
from graphprod.errors import MixedAmbient, NoOrthogonal
from graphprod.graph import enumerate_subgraphs, link, star
from graphprod.words import word_length
from oracles import brute_coset_min, brute_double_coset, random_letters


def cls(gp, word, verts):
    g = gp.identity() if not word else gp.parse(word)
    return canonicalize(g, gp.graph.subgraph(verts))


def rand_elem(gp, rng, n_max=6):
    return gp.normalize(random_letters(gp.graph, rng, rng.randrange(0, n_max + 1), max_exp=1))


def test_parallel_examples(P3):
    one, b, c = P3.identity(), P3.parse("b"), P3.parse("c")
    a = P3.graph.subgraph("a")
    assert parallel(one, b, a)
    assert not parallel(one, c, a)
    assert parallel(c, c, a)


def test_canonicalize_examples(P3):
    a = P3.graph.subgraph("a")
    assert canonicalize(P3.parse("b"), a).rep.is_identity()
    assert str(canonicalize(P3.parse("c a"), a).rep) == "c"
    assert canonicalize(P3.identity(), a).rep.is_identity()
    assert str(canonicalize(P3.parse("c a"), a)) == "[c{a}]"


def test_relation_examples(P4):
    A, B, C = cls(P4, "", "a"), cls(P4, "", "b"), cls(P4, "", "c")
    G = cls(P4, "", "abcd")
    assert relation(A, B).kind is RelationKind.ORTHOGONAL
    assert relation(A, C).kind is RelationKind.TRANSVERSE
    r = relation(A, G)
    assert r.kind is RelationKind.NESTED and r.direction == "sub"
    assert str(relation(G, A)) == "contains"
    assert relation(A, A).kind is RelationKind.EQUAL


def test_mixed_ambient(P3, P4):
    with pytest.raises(MixedAmbient):
        relation(cls(P3, "", "a"), cls(P4, "", "a"))


def test_container_examples(P3, P4):
    assert str(container(cls(P4, "", "abcd"), cls(P4, "", "a"))) == "[{b}]"
    assert str(container(cls(P3, "", "abc"), cls(P3, "", "b"))) == "[{a,c}]"
    assert str(container(cls(P4, "", "abc"), cls(P4, "", "b"))) == "[{a,c}]"
    with pytest.raises(NoOrthogonal):
        container(cls(P4, "", "abcd"), cls(P4, "", "bc"))
    with pytest.raises(ValueError):
        container(cls(P4, "", "a"), cls(P4, "", "abcd"))


def test_coning_family_examples():
    fam = coning_family(SimplicialGraph.path(4))
    assert [s.members for s in fam] == [{"a"}, {"b"}, {"c"}, {"d"}, {"a", "c"}, {"b", "d"}]
    assert [s.members for s in coning_family(SimplicialGraph.path(3))] == [{"a"}, {"b"}, {"c"}, {"a", "c"}]
    assert coning_family(SimplicialGraph.discrete(2)) == []


@pytest.mark.parametrize("g", [SimplicialGraph.path(4), SimplicialGraph.path(3), SimplicialGraph.complete(3)],
                         ids=["P4", "P3", "K3"])
def test_clean_containers_small_graphs(g):
    rep = verify_clean_containers(g, depth=1)
    assert rep.ok
    assert rep.entries
    assert all(e["clean"] for e in rep.entries)


def test_container_report_json(P4):
    out = verify_clean_containers(P4.graph).to_json()
    assert out["violations"] == 0
    assert {"W", "U", "Q", "orthogonal_witnesses", "clean"} <= set(out["entries"][0])


# -- oracle comparisons --------------------------------------------------------

@pytest.mark.parametrize("make", [p3, p4])
@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_canonical_rep_is_coset_minimum(make, seed):
    gp = make()
    rng = random.Random(seed)
    g = rand_elem(gp, rng, 4)
    sub = rng.choice(enumerate_subgraphs(gp.graph))
    c = canonicalize(g, sub)
    assert c.rep == brute_coset_min(g, star(sub).members, word_length(g) + 1)
    assert parallel(g, c.rep, sub)
    assert canonicalize(c.rep, sub) == c


@pytest.mark.parametrize("make", [p3, p4])
@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_double_coset_agrees_with_search(make, seed):
    gp = make()
    rng = random.Random(seed)
    x = rand_elem(gp, rng, 4)
    subs = enumerate_subgraphs(gp.graph)
    L, R = star(rng.choice(subs)).members, star(rng.choice(subs)).members
    split = double_coset_split(x, L, R)
    assert (split is not None) == brute_double_coset(x, L, R, word_length(x) + 2)
    if split is not None:
        p, q = split
        assert p * q == x
        assert p.support.members <= L and q.support.members <= R


def oracle_relation(a, b):
    """Relation straight from the definitions with the searched double coset."""
    A, B = a.sub.members, b.sub.members
    x = a.rep.inverse() * b.rep
    k = brute_double_coset(x, star(a.sub).members, star(b.sub).members, word_length(x) + 2)
    if A == B and k:
        return "equal"
    if k and A < B:
        return "nested"
    if k and B < A:
        return "contains"
    if k and A <= link(b.sub).members:
        return "orthogonal"
    return "transverse"


@pytest.mark.parametrize("make", [p3, p4])
@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_relation_matches_definition(make, seed):
    gp = make()
    rng = random.Random(seed)
    subs = enumerate_subgraphs(gp.graph)
    a = canonicalize(rand_elem(gp, rng, 4), rng.choice(subs))
    b = canonicalize(rand_elem(gp, rng, 4), rng.choice(subs))
    assert str(relation(a, b)) == oracle_relation(a, b)


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_relation_invariants(seed):
    gp = p4()
    rng = random.Random(seed)
    subs = enumerate_subgraphs(gp.graph)
    la, lb = rng.choice(subs), rng.choice(subs)
    g, h = rand_elem(gp, rng, 4), rand_elem(gp, rng, 4)
    a, b = canonicalize(g, la), canonicalize(h, lb)
    r = relation(a, b)
    # replacing reps by parallel reps changes nothing
    sa = gp.normalize(random_letters(SimplicialGraph(sorted(star(la).members)), rng, 3, max_exp=1))
    sb = gp.normalize(random_letters(SimplicialGraph(sorted(star(lb).members)), rng, 3, max_exp=1))
    assert relation(canonicalize(g * sa, la), canonicalize(h * sb, lb)) == r
    # left translation acts by automorphisms
    t = rand_elem(gp, rng, 3)
    assert relation(canonicalize(t * g, la), canonicalize(t * h, lb)) == r
    back = relation(b, a)
    if r.kind is RelationKind.ORTHOGONAL:
        assert back.kind is RelationKind.ORTHOGONAL
        assert not nests_in(a, b) and not nests_in(b, a)
    if r.kind is RelationKind.NESTED:
        assert back.kind is RelationKind.NESTED and back.direction != r.direction


def test_nesting_transitive_on_identity_reps():
    gp = p4()
    classes = [ParallelismClass(gp.identity(), s) for s in enumerate_subgraphs(gp.graph)]
    for a in classes:
        for b in classes:
            for c in classes:
                if nests_in(a, b) and nests_in(b, c):
                    assert nests_in(a, c)


def test_containers_are_orthogonal_to_u():
    for g in [SimplicialGraph.path(4), SimplicialGraph.cycle(5), SimplicialGraph.path(5)]:
        gp = GraphProduct.raag(g)
        one = gp.identity()
        subs = enumerate_subgraphs(g)
        for lam, om in combinations(subs, 2):
            if om.members < lam.members and link(om).members & lam.members:
                Q = container(ParallelismClass(one, lam), ParallelismClass(one, om))
                assert relation(Q, ParallelismClass(one, om)).kind is RelationKind.ORTHOGONAL
