import json
import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tetrapurify.distill import oplus, star
from tetrapurify.noise import Basis, PauliOdds, decays_to, from_depolarizing, normalize
from tetrapurify.numerics import ExtReal
from tetrapurify.pipeline import (
    MAX_EXACT_REPS,
    Boost,
    Distill,
    Mode,
    Schedule,
    bias_boost_bound,
    bias_bust_bound,
    boost_closed_form,
    boost_exact,
    eval_schedule,
    eval_stage,
    expected_cost,
    fig3_schedule,
    floor_cbrt_inverse,
    stage_from_json,
)

THIRD = from_depolarizing(F(1, 3))


def _bootstrap(backend="rational"):
    s = fig3_schedule(backend)
    return Schedule(s.input, s.stages[:6], backend)


class TestStages:
    def test_distill_stage(self):
        r = eval_stage(THIRD, Distill(Basis.X))
        assert r.discard_prob == F(28, 81)
        assert r.cost_factor == 2 / (1 - F(28, 81))

    def test_consumption(self):
        assert Distill("X").consumption == 2
        assert Boost(("X", "Z"), 15).consumption == 31

    def test_refuses_half_infidelity(self):
        with pytest.raises(ValueError):
            eval_stage(PauliOdds(F(1), F(1, 3), F(1, 3), F(1, 3)), Distill(Basis.X))

    def test_boost_rejects_empty_pattern(self):
        with pytest.raises(ValueError):
            Boost((), 3)

    def test_boost_exact_matches_fold(self):
        u = PauliOdds(F(1), F(1, 50), F(1, 40), F(1, 30))
        r = boost_exact(u, [Basis.X, Basis.Z], 2)
        cur = u
        for b in [Basis.X, Basis.Z, Basis.X, Basis.Z]:
            cur = normalize(oplus(cur, u, b))
        assert r.out == cur
        assert len(r.per_step_discards) == 4

    def test_exact_rep_limit(self):
        with pytest.raises(ValueError):
            boost_exact(THIRD, [Basis.Y], MAX_EXACT_REPS + 1)

    def test_rational_refuses_huge_reps(self):
        with pytest.raises(ValueError, match="extended"):
            eval_stage(THIRD, Boost((Basis.Y,), 10**27, Mode.BOUND))

    def test_stage_json_round_trip(self):
        for st_ in [Distill(Basis.Y), Boost((Basis.X, Basis.Z), 10**27, Mode.BOUND)]:
            assert stage_from_json(st_.to_json()) == st_

    def test_unknown_stage_type(self):
        with pytest.raises(ValueError):
            stage_from_json({"type": "teleport"})


class TestExpectedCost:
    def test_distill(self):
        assert expected_cost(1, Distill(Basis.X), [F(1, 2)]) == 4

    def test_boost_no_discards(self):
        assert expected_cost(1, Boost((Basis.Y,), 3), [0, 0, 0]) == 4

    def test_boost_renewal(self):
        # One step with discard d: each attempt consumes 2 pairs and succeeds with 1 - d.
        assert expected_cost(1, Boost((Basis.Y,), 1), [F(1, 4)]) == F(8, 3)

    def test_certain_discard(self):
        assert math.isinf(expected_cost(1, Distill(Basis.X), [1]))


class TestClosedForm:
    @pytest.mark.parametrize("pattern", [(Basis.Y,), (Basis.X, Basis.Z), (Basis.X, Basis.Y, Basis.Z)])
    @pytest.mark.parametrize("reps", [1, 10, 100])
    def test_matches_exact_rationally(self, pattern, reps):
        u = PauliOdds(F(1), F(1, 700), F(1, 900), F(1, 1100))
        a = boost_exact(u, pattern, reps)
        b = boost_closed_form(u, u, pattern, reps)
        assert a.out == b.out
        assert a.discard_prob == b.discard_prob
        assert a.cost_factor == b.cost_factor

    def test_huge_reps_extended(self):
        u = PauliOdds(*(ExtReal(c) for c in (1, 1e-4, 1e-4, 1e-4)))
        r = boost_closed_form(u, u, [Basis.Y], 10**20)
        assert r.out.x.exponent < -1000

    @settings(max_examples=30)
    @given(st.lists(st.floats(min_value=1e-6, max_value=1e-2), min_size=3, max_size=3),
           st.integers(min_value=1, max_value=200))
    def test_float_agreement(self, errs, reps):
        u = PauliOdds(1.0, *errs)
        a = boost_exact(u, [Basis.X, Basis.Z], reps)
        b = boost_closed_form(u, u, [Basis.X, Basis.Z], reps)
        for p, q in zip(a.out, b.out):
            assert float(q) == pytest.approx(float(p), rel=1e-9, abs=1e-300)


class TestBounds:
    def test_floor_cbrt_inverse(self):
        assert floor_cbrt_inverse(F(1, 10**4)) == 21
        assert floor_cbrt_inverse(F(1, 10**6)) == 100
        assert floor_cbrt_inverse(ExtReal("1e-81")) == 10**27

    def test_bias_boost_shape(self):
        a = F(1, 10**4)
        r = bias_boost_bound(a)
        k = r.reps + 1
        assert r.reps == 20
        assert r.out_bound.y == a * k
        assert r.out_bound.x == (2 * a) ** k / 2 == r.out_bound.z

    def test_bias_boost_precondition(self):
        with pytest.raises(ValueError):
            bias_boost_bound(F(1, 100))

    def test_bias_bust_default(self):
        r = bias_bust_bound(F(1, 10**30), F(1, 10**3))
        assert r.reps == 5
        assert tuple(r.out_bound)[1:] == (F(4, 10**30),) * 3

    def test_bias_bust_alpha_zero(self):
        with pytest.raises(ValueError, match="extended"):
            bias_bust_bound(0.0, 1e-3)

    @pytest.mark.parametrize("a", [F(1, 10**4), F(1, 10**5)])
    def test_bias_boost_bound_is_sound(self, a):
        u = PauliOdds(F(1), a, a, a)
        bound = bias_boost_bound(a)
        exact = boost_exact(u, [Basis.Y], bound.reps)
        assert decays_to(exact.out, bound.out_bound)
        assert exact.discard_prob <= bound.discard_bound


class TestSchedules:
    def test_fig3_rows(self):
        r = eval_schedule(fig3_schedule("extended"))
        got = [[float(c) for c in s.out][1:] for s in r.stage_reports[:8]]
        want = [
            (3.2e-1, 5.4e-2, 5.4e-2),
            (3.5e-2, 1.1e-1, 1.1e-1),
            (7.0e-2, 2.3e-2, 2.3e-2),
            (3.2e-3, 4.6e-2, 5.4e-3),
            (3.0e-4, 2.2e-3, 1.1e-2),
            (6.0e-4, 1.2e-4, 4.7e-5),
            (1.0e-80, 3.0e-3, 9.6e-81),
            (3.0e-83, 9.9e-79, 9.6e-81),
        ]
        for g, w in zip(got, want):
            for a, b in zip(g, w):
                assert a == pytest.approx(b, rel=0.05)

    def test_fig3_frozen_exact_values(self):
        r = eval_schedule(_bootstrap())
        assert r.stage_reports[0].out == PauliOdds(F(1), F(12, 37), F(2, 37), F(2, 37))
        assert r.stage_reports[0].discard_prob == F(28, 81)

    def test_extended_matches_rational(self):
        a = eval_schedule(_bootstrap("rational"))
        b = eval_schedule(_bootstrap("extended"))
        for ra, rb in zip(a.stage_reports, b.stage_reports):
            for p, q in zip(ra.out, rb.out):
                assert float(q) == pytest.approx(float(p), rel=1e-12)

    def test_storage(self):
        r = eval_schedule(fig3_schedule())
        assert r.storage_qubits_per_party == 11
        assert r.storage_breakdown == {"stage_slots": 10, "in_flight": 1}

    def test_zero_noise(self):
        s = Schedule(PauliOdds(F(1), 0, 0, 0), [Distill(b) for b in "XYZ"], "rational")
        r = eval_schedule(s)
        assert r.final_infidelity == 0
        assert r.total_expected_raw_pairs == 8

    def test_float_backend_tail_fails_cleanly(self):
        with pytest.raises(ValueError, match="extended"):
            eval_schedule(fig3_schedule("float"))

    def test_schedule_json_round_trip(self):
        s = fig3_schedule("extended")
        again = Schedule.from_json(json.loads(json.dumps(s.to_json())), "extended")
        assert again.stages == s.stages

    def test_odds_input(self):
        s = Schedule.from_json({"input": {"odds": [1, "1/6", "1/6", "1/6"]},
                                "stages": [{"type": "distill", "basis": "X"}]}, "rational")
        assert eval_schedule(s).stage_reports[0].discard_prob == F(28, 81)

    def test_table_output(self):
        text = eval_schedule(fig3_schedule()).to_table()
        assert "1e-7.8e28" in text
        assert "<=" in text
        assert "storage per party: 11" in text

    def test_report_json_fields(self):
        js = eval_schedule(fig3_schedule()).to_json()
        assert len(js["stages"]) == 10
        assert {"discard_prob", "expected_raw_pairs", "storage_index", "bound_mode"} <= set(js["stages"][0])

    def test_empty_schedule_rejected(self):
        with pytest.raises(ValueError):
            Schedule(THIRD, [], "rational")


@settings(max_examples=40)
@given(st.lists(st.sampled_from(list(Basis)), min_size=1, max_size=4))
def test_cost_is_product_of_stage_factors(seq):
    s = Schedule(PauliOdds(F(1), F(1, 50), F(1, 60), F(1, 70)), [Distill(b) for b in seq], "rational")
    r = eval_schedule(s)
    cost = F(1)
    state = normalize(s.input)
    for b in seq:
        d = star(state, state, b)
        cost *= 2 / (1 - d)
        state = normalize(oplus(state, state, b))
    assert r.total_expected_raw_pairs == cost
    assert r.final == state
