from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from tetrapurify.distill import REP_CODES, fold, oplus, shor4, star
from tetrapurify.noise import Basis, PauliOdds, infidelity, normalize

THIRD = PauliOdds(F(1), F(1, 6), F(1, 6), F(1, 6))
w = st.fractions(min_value=0, max_value=1, max_denominator=500)
odds = st.tuples(st.fractions(min_value=F(1, 500), max_value=1, max_denominator=500), w, w, w).map(
    lambda t: PauliOdds(*t)
)
bases = st.sampled_from(list(Basis))


def test_first_stage_discard_is_28_over_81():
    assert star(THIRD, THIRD, Basis.X) == F(28, 81)


def test_first_stage_output():
    out = normalize(oplus(THIRD, THIRD, Basis.X))
    assert tuple(out) == (1, F(12, 37), F(2, 37), F(2, 37))


def test_symmetric_discard_all_bases():
    for b in Basis:
        assert star(THIRD, THIRD, b) == F(28, 81)


def test_perfect_pairs_never_discard():
    perfect = PauliOdds(F(1), 0, 0, 0)
    for b in Basis:
        assert star(perfect, perfect, b) == 0
        assert tuple(oplus(perfect, perfect, b)) == (1, 0, 0, 0)


def test_detectable_error_always_discards():
    # An X error anticommutes with ZZ, a Z error with XX.
    x_only = PauliOdds(0, F(1), 0, 0)
    perfect = PauliOdds(F(1), 0, 0, 0)
    assert star(x_only, perfect, Basis.Z) == 1
    with pytest.raises(ValueError):
        oplus(x_only, perfect, Basis.Z)


def test_rep_code_conventions():
    assert REP_CODES[Basis.X].logical_z == "ZY"
    assert REP_CODES[Basis.Y].logical_x == "XZ"
    assert REP_CODES[Basis.Z].logical_x == "XY"


@given(odds, odds, bases)
def test_discard_plus_survival_is_one(u, v, b):
    kept = oplus(u, v, b).total() if star(u, v, b) < 1 else 0
    assert star(u, v, b) + kept / (u.total() * v.total()) == 1


@given(odds, odds, bases)
def test_symmetric_in_arguments(u, v, b):
    assert star(u, v, b) == star(v, u, b)
    if star(u, v, b) < 1:
        assert oplus(u, v, b) == oplus(v, u, b)


@given(odds, odds, bases, st.fractions(min_value=F(1, 10), max_value=10))
def test_scale_covariant(u, v, b, k):
    assert star(u.scale(k), v, b) == star(u, v, b)
    if star(u, v, b) < 1:
        assert normalize(oplus(u.scale(k), v, b)) == normalize(oplus(u, v, b))


@given(odds, odds, bases)
def test_discard_is_probability(u, v, b):
    assert 0 <= star(u, v, b) <= 1


def test_fold_chains_left():
    a = PauliOdds(F(1), F(1, 10), F(1, 20), F(1, 30))
    assert fold(a, [a, a], [Basis.X, Basis.Z]) == oplus(oplus(a, a, Basis.X), a, Basis.Z)


def test_shor4_matches_staged_chain():
    r = shor4(THIRD)
    v = normalize(oplus(THIRD, THIRD, Basis.X))
    assert r.out == normalize(oplus(v, v, Basis.Z))
    assert r.success_prob == F(1717, 6561)


def test_shor4_costs_more_than_staged():
    r = shor4(THIRD)
    d1 = star(THIRD, THIRD, Basis.X)
    v = normalize(oplus(THIRD, THIRD, Basis.X))
    d2 = star(v, v, Basis.Z)
    staged = 2 * (2 / (1 - d1)) / (1 - d2)
    assert r.expected_pairs > staged


def test_distillation_improves_small_noise():
    u = PauliOdds(F(1), F(1, 100), F(1, 100), F(1, 100))
    for b in Basis:
        assert infidelity(normalize(oplus(u, u, b))) < infidelity(u)
