import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stopflow import (
    Observer,
    PathPower,
    StopRecord,
    Strategy,
    brute_force_win_probability,
    run_strategy,
)
from stopflow.strategies import default_threshold, draw_rejection_count

GOLDEN_PERM = (2, 9, 4, 7, 3, 1, 5, 8, 6)


def test_strategy_validation():
    with pytest.raises(ValueError):
        Strategy(kind="nope")
    with pytest.raises(ValueError):
        Strategy.tau_p_star(1.5)
    with pytest.raises(ValueError):
        Strategy(kind="tau_p_star")
    with pytest.raises(ValueError):
        Strategy.classical_threshold(-1)


def test_describe():
    assert Strategy.tau_n().describe() == "tau_n"
    assert Strategy.tau_p_star(0.25).describe() == "tau_p_star(p=0.25)"
    assert Strategy.classical_threshold(3).describe() == "classical_threshold(r=3)"


def test_tau_n_on_golden_permutation():
    rec = run_strategy(Strategy.tau_n(), PathPower(9, 2), GOLDEN_PERM)
    assert rec == StopRecord(stop_index=6, chosen_position=1, win=True)


def test_tau_n_three_vertex_path_never_fires():
    rec = run_strategy(Strategy.tau_n(), PathPower(3, 1), (1, 2, 3))
    assert rec == StopRecord(stop_index=3, chosen_position=3, win=False)


def test_tau_p_star_with_zero_bias_stops_immediately():
    g = PathPower(6, 2)
    for seed in range(5):
        rec = run_strategy(Strategy.tau_p_star(0.0, rng_seed=seed), g, (4, 2, 6, 1, 3, 5))
        assert rec.stop_index == 1 and rec.chosen_position == 4


def test_tau_p_star_with_full_bias_rejects_everything():
    g = PathPower(6, 2)
    rec = run_strategy(Strategy.tau_p_star(1.0), g, (4, 2, 6, 1, 3, 5))
    assert rec.stop_index == 6 and rec.chosen_position == 5


def test_first_max_stops_at_first_arrival():
    g = PathPower(5, 2)
    for perm in itertools.permutations(range(1, 6)):
        rec = run_strategy(Strategy.first_max(), g, perm)
        assert rec.stop_index == 1 and rec.chosen_position == perm[0]


def test_classical_threshold_skips_exactly_r():
    g = PathPower(5, 4)
    # descending arrivals: every arrival is maximal when it comes
    rec = run_strategy(Strategy.classical_threshold(2), g, (5, 4, 3, 2, 1))
    assert rec.stop_index == 3 and rec.chosen_position == 3


def test_rejects_non_permutation():
    g = PathPower(4, 2)
    with pytest.raises(ValueError):
        run_strategy(Strategy.tau_n(), g, (1, 2, 3))
    with pytest.raises(ValueError):
        run_strategy(Strategy.tau_n(), g, (1, 2, 2, 4))


def test_default_threshold_values():
    assert default_threshold(3) == 1
    assert default_threshold(10) == 3
    assert default_threshold(200) == 73


def test_rejection_count_is_binomial_sum():
    rng = random.Random(99)
    draws = [draw_rejection_count(20, 0.25, rng) for _ in range(2000)]
    assert all(0 <= m <= 20 for m in draws)
    mean = sum(draws) / len(draws)
    assert abs(mean - 5.0) < 0.25  # ~6 sigma for Binomial(20, .25)


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=0, max_value=2**64 - 1), st.data())
def test_randomized_strategy_purity(seed, data):
    n = data.draw(st.integers(min_value=2, max_value=10))
    k = data.draw(st.integers(min_value=1, max_value=n - 1))
    perm = tuple(data.draw(st.permutations(list(range(1, n + 1)))))
    g = PathPower(n, k)
    s = Strategy.tau_p_star(0.5, rng_seed=seed)
    assert run_strategy(s, g, perm) == run_strategy(s, g, perm)


def test_tau_n_stops_only_on_maximal_arrivals():
    for n in range(2, 6):
        for k in range(1, n):
            g = PathPower(n, k)
            for perm in itertools.permutations(range(1, n + 1)):
                rec = run_strategy(Strategy.tau_n(), g, perm)
                if rec.stop_index < n:
                    obs = Observer(g)
                    events = [obs.observe(pos) for pos in perm[: rec.stop_index]]
                    assert events[-1].is_max and events[-1].condition_met


def test_tau_n_wins_iff_top_precedes_sink_for_dense_powers():
    for n in range(3, 7):
        for k in (n - 2, n - 1):
            if k < 1:
                continue
            g = PathPower(n, k)
            for perm in itertools.permutations(range(1, n + 1)):
                rec = run_strategy(Strategy.tau_n(), g, perm)
                assert rec.win == (perm.index(n) < perm.index(1))


def test_dense_power_win_probability_is_half():
    for n in range(3, 7):
        for k in (n - 2, n - 1):
            if k < 1:
                continue
            assert brute_force_win_probability(n, k, Strategy.tau_n()) == Fraction(1, 2)


def test_no_generated_strategy_beats_the_slack_rule():
    # thresholds, first_max, and the rejection rule over a p-grid (with the
    # rejection count integrated out exactly) never exceed tau_n's value
    from stopflow.verify import check_strategy_dominance

    check = check_strategy_dominance(7)
    assert check.passed, check.detail


def test_win_implies_chose_the_sink():
    g = PathPower(6, 2)
    rng = random.Random(5)
    for s in (Strategy.tau_n(), Strategy.tau_p_star(0.4), Strategy.first_max(),
              Strategy.classical_threshold(2)):
        for _ in range(200):
            perm = list(range(1, 7))
            rng.shuffle(perm)
            rec = run_strategy(s, g, perm, random.Random(rng.random()))
            assert rec.win == (rec.chosen_position == 1)
