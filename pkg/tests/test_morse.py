import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from conftest import p3, p4, z2
from graphprod.cayley import cone_distance_restricted, standard_geodesic
from graphprod.errors import NoSamples, PreconditionFailed, WindowViolation
from graphprod.morse import (INCONCLUSIVE, STABLE, UNSTABLE, Thresholds, cone_fit, detectability_probe,
                             distortion_curve, fit_quasi_geodesic, gauge_entry, local_to_global_probe,
                             morse_gauge_table, power_path, square_loop, stability_verdict, standard_fit,
                             subgroup_stability)
from graphprod.words import QGParams, word_length

GRID = [(1, 0), (2, 0), (2, 2), (3, 2)]


def test_distortion_examples(Z2, P4):
    curve = distortion_curve(Z2.parse("a b"), 4)
    assert [c for _, _, cs in curve.rows for c in cs] == [1] * 8
    curve = distortion_curve(P4.parse("a b c d"), 4)
    assert curve.rows[0][:2] == (1, 4) and curve.cone(1) == 2
    assert curve.stabilized


def test_distortion_fixed_radii(P4):
    g = P4.parse("a b c d")
    for n in range(1, 5):
        x = g ** n
        assert cone_distance_restricted(x, 4 * n) == cone_distance_restricted(x, 4 * n + 4)
    curve = distortion_curve(g, 2, radii=[4, 8])
    assert curve.rows[1][2] == [None, 4]
    assert curve.to_csv() == "n,standard,cone_R1,cone_R2\n1,4,2,2\n2,8,,4\n"


def test_verdict_examples(Z2, P3, P4):
    for w in ["a", "b", "a b"]:
        assert stability_verdict(Z2.parse(w), 24).verdict == UNSTABLE
    for w in ["a", "c", "a c"]:
        assert stability_verdict(P3.parse(w), 24).verdict == UNSTABLE
    v = stability_verdict(P4.parse("a b c d"), 4)
    assert v.verdict == STABLE
    assert v.evidence["stabilized"] and Fraction(v.evidence["fitted_slope"]) >= Fraction(1, 4)


def test_verdict_out_of_scope(F2):
    v = stability_verdict(F2.parse("a b"), 4)
    assert v.verdict == INCONCLUSIVE and v.reason == "OutOfScope"


def test_verdict_inconclusive_on_short_radii(P4):
    v = stability_verdict(P4.parse("a b c d"), 3, radii=[4])
    assert v.verdict == INCONCLUSIVE


def test_verdict_thresholds_recorded(P4):
    t = Thresholds(cap=3, slope=Fraction(1, 2), factor=5)
    v = stability_verdict(P4.parse("a b c d"), 4, thresholds=t)
    assert v.evidence["policy"]["cap"] == 3 and v.evidence["policy"]["slope"] == "1/2"


def test_subgroup_stability(Z2, P4):
    assert subgroup_stability([Z2.parse("a"), Z2.parse("b")], 24).verdict == UNSTABLE
    v = subgroup_stability([P4.parse("a b c d")], 4, radius=1)
    assert v.verdict == STABLE


@pytest.mark.parametrize("make,word", [(p4, "a b c d"), (p4, "a d"), (z2, "a b"), (p3, "a c")])
def test_verdict_inverse_and_conjugation_invariant(make, word):
    gp = make()
    g = gp.parse(word)
    n = 4 if make is p4 else 24
    base = stability_verdict(g, n).verdict
    assert stability_verdict(g.inverse(), n).verdict == base
    for h in ["a", "b", "c"]:
        if h in gp.graph.vertices:
            hh = gp.parse(h)
            assert stability_verdict(hh * g * hh.inverse(), n).verdict == base


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_cone_never_exceeds_standard(seed):
    gp = p4()
    rng = random.Random(seed)
    word = " ".join(rng.choice("abcd") for _ in range(rng.randrange(1, 5)))
    curve = distortion_curve(gp.parse(word), 3)
    for _, std, cones in curve.rows:
        assert all(c <= std for c in cones if c is not None)
    stds = [s for _, s, _ in curve.rows]
    assert stds == sorted(stds)


# -- fits ----------------------------------------------------------------------

def test_fit_two_pass():
    # d(i,j) = 2|i-j|: lambda 2, epsilon 0
    fit = fit_quasi_geodesic(lambda i, j: 2 * (j - i), 5, QGParams(4, 1))
    assert (fit.lam, fit.eps, fit.ok) == (2, 0, True)
    # collapsed path: lambda capped, epsilon absorbs the rest
    fit = fit_quasi_geodesic(lambda i, j: 0, 4, QGParams(2, 0))
    assert fit.lam == 2 and fit.eps == Fraction(3, 2) and not fit.ok


def test_detect_examples(P4, Z2):
    rep = detectability_probe(power_path(P4.parse("a b c d"), 4))
    assert rep["standard_fit"]["ok"] and rep["cone_fit"]["ok"]
    rep = detectability_probe(power_path(Z2.parse("a b"), 10))
    assert rep["standard_fit"]["ok"] and not rep["cone_fit"]["ok"]
    path = power_path(Z2.parse("a b"), 10)
    assert max(cone_distance_restricted(p, word_length(p)) for p in path) <= 1
    rep = detectability_probe([Z2.identity()])
    assert rep["standard_fit"]["ok"] and rep["cone_fit"]["ok"]


# -- gauge ---------------------------------------------------------------------

def test_gauge_f2_unique_geodesics(F2):
    for n in (4, 6):
        geo = standard_geodesic(F2.identity(), F2.parse(" ".join("ab"[i % 2] for i in range(n))))
        tab = morse_gauge_table(geo, GRID, budget=24)
        assert gauge_entry(tab, 1, 0) == 0
        assert gauge_entry(tab, 2, 0) == 0


def test_gauge_z2_grows(Z2):
    vals = []
    for n in (3, 5):
        geo = standard_geodesic(Z2.identity(), Z2.parse("a b") ** n)
        vals.append(gauge_entry(morse_gauge_table(geo, GRID, budget=24), 2, 0))
    assert vals[0] < vals[1]


def test_gauge_monotone_and_reproducible(Z2):
    geo = standard_geodesic(Z2.identity(), Z2.parse("a b") ** 3)
    a = morse_gauge_table(geo, GRID, budget=24, seed=3)
    b = morse_gauge_table(geo, GRID, budget=24, seed=3)
    assert a.to_csv() == b.to_csv()
    e = a.entries
    assert e[(1, 0)] <= e[(2, 0)] <= e[(2, 2)] <= e[(3, 2)]


def test_gauge_no_samples(Z2):
    geo = standard_geodesic(Z2.identity(), Z2.parse("a b") ** 2)
    tab = morse_gauge_table(geo, [(1, 0)], budget=4)
    tab.entries[(1, 0)] = None
    with pytest.raises(NoSamples):
        gauge_entry(tab, 1, 0)


def test_detectability_coherence(P4, Z2):
    stable = power_path(P4.parse("a b c d"), 4)
    assert cone_fit(stable, QGParams(4, 1)).ok
    g = [gauge_entry(morse_gauge_table(standard_geodesic(P4.identity(), P4.parse("a b c d") ** n),
                                       GRID, budget=24), 2, 0) for n in (2, 4)]
    assert g[1] <= g[0] + 2
    flat = power_path(Z2.parse("a b"), 10)
    assert not cone_fit(flat, QGParams(4, 1)).ok


# -- local to global -------------------------------------------------------------

def test_mltg_f2(F2):
    x = F2.identity()
    pieces, cur = [], x
    for w in ["a a", "b", "a", "b b"]:
        nxt = cur * F2.parse(w)
        pieces.append(standard_geodesic(cur, nxt))
        cur = nxt
    rep = local_to_global_probe(pieces, 2)
    assert rep["global_fit"] == {"lambda": "1", "epsilon": "0", "ok": True}


def test_mltg_single_piece(Z2):
    rep = local_to_global_probe([standard_geodesic(Z2.identity(), Z2.parse("a^3 b"))], 2)
    assert rep["global_fit"]["ok"] and rep["global_fit"]["lambda"] == "1"


def test_mltg_square_loop_degrades(Z2):
    eps = []
    for w in (1, 2, 3):
        rep = local_to_global_probe(square_loop(Z2, "a", "b", 3, w), 3)
        eps.append(Fraction(rep["global_fit"]["epsilon"]))
    assert eps[0] < eps[1] < eps[2]


def test_mltg_window_violation(Z2):
    with pytest.raises(WindowViolation):
        local_to_global_probe(square_loop(Z2, "a", "b", 1, 1), 3)
    a = Z2.parse("a")
    with pytest.raises(PreconditionFailed):
        local_to_global_probe([[Z2.identity(), a], [Z2.identity(), a]], 1)


def test_standard_fit_of_geodesic(P4):
    path = standard_geodesic(P4.identity(), P4.parse("a b c d") ** 2)
    fit = standard_fit(path, QGParams(1, 0))
    assert fit.ok and fit.lam == 1 and fit.eps == 0
