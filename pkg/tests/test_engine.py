"""Tests for the protocol engine: capital updates, safety, replay, files."""

import dataclasses
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gameprob.engine import (
    ForecastRound,
    GameTranscript,
    ProtocolError,
    capital_update,
    parse_transcript,
    play_forecasting_game,
    play_market_game,
    replay_verify,
    safe_interval,
    transcript_to_text,
)
from gameprob.strategies import (
    AllInSkeptic,
    BankruptingReality,
    ConstantForecaster,
    ConstantPosition,
    ConstantPrice,
    FractionalSkeptic,
    IidReality,
    LlnSkeptic,
    SequencePrice,
    SequenceReality,
    ZeroSkeptic,
)


class TestCapitalUpdate:
    def test_zero_stake_changes_nothing(self):
        assert capital_update(1, 0, 0.5, 1) == 1

    def test_winning_bet(self):
        assert capital_update(1, 2, 0.5, 1) == 2

    def test_losing_bet(self):
        assert capital_update(1, 2, 0.5, 0) == 0

    @pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
    def test_non_finite_inputs_rejected(self, bad):
        with pytest.raises(ValueError, match="non-finite"):
            capital_update(1.0, bad, 0.5, 1)
        with pytest.raises(ValueError, match="non-finite"):
            capital_update(bad, 1.0, 0.5, 1)


def _interval_by_bisection(capital, price):
    """Independent oracle: find the feasible stake set by scanning and
    bisecting the two counterfactual constraints."""

    def feasible(stake):
        return all(capital + stake * (y - price) >= -1e-15 for y in (0, 1))

    assert feasible(0.0)
    span = max(1.0, capital) * 1e6

    def edge(direction):
        lo, hi = 0.0, direction * span
        if feasible(hi):
            return hi
        for _ in range(200):
            mid = (lo + hi) / 2
            if feasible(mid):
                lo = mid
            else:
                hi = mid
        return lo

    return edge(-1.0), edge(+1.0)


class TestSafeInterval:
    def test_even_money(self):
        assert safe_interval(1, 0.5) == (-2, 2)

    def test_zero_capital_forces_zero_stake(self):
        assert safe_interval(0, 0.3) == (0, 0)

    def test_high_price(self):
        lo, hi = safe_interval(1, 0.9)
        assert lo == pytest.approx(-10)
        assert hi == pytest.approx(10 / 9)

    def test_free_tickets_unbounded_above(self):
        lo, hi = safe_interval(1.0, 0.0)
        assert lo == -1.0
        assert hi == math.inf

    def test_sure_tickets_unbounded_below(self):
        lo, hi = safe_interval(1.0, 1.0)
        assert lo == -math.inf
        assert hi == 1.0

    @pytest.mark.parametrize("price", [-0.1, 1.1])
    def test_price_domain(self, price):
        with pytest.raises(ValueError, match=r"\[0, 1\]"):
            safe_interval(1.0, price)

    def test_negative_capital_rejected(self):
        with pytest.raises(ValueError, match="nonnegative"):
            safe_interval(-0.5, 0.5)

    @given(
        capital=st.floats(min_value=0.001, max_value=1000),
        price=st.floats(min_value=0.01, max_value=0.99),
    )
    def test_matches_bisection_oracle(self, capital, price):
        lo, hi = safe_interval(capital, price)
        oracle_lo, oracle_hi = _interval_by_bisection(capital, price)
        assert lo == pytest.approx(oracle_lo, rel=1e-4, abs=1e-6)
        assert hi == pytest.approx(oracle_hi, rel=1e-4, abs=1e-6)


class TestForecastingGame:
    def test_zero_stake_constant_capital(self):
        t = play_forecasting_game(
            ConstantForecaster(0.5), ZeroSkeptic(), SequenceReality([1, 1, 1]), 3
        )
        assert t.capital_path() == [1.0, 1.0, 1.0, 1.0]

    def test_all_in_doubles_on_each_win(self):
        t = play_forecasting_game(
            ConstantForecaster(0.5), AllInSkeptic(1), SequenceReality([1] * 5), 5
        )
        assert t.final_capital == 32.0

    def test_all_in_bankrupted_in_one_round(self):
        t = play_forecasting_game(
            ConstantForecaster(0.5), AllInSkeptic(1), BankruptingReality(), 1
        )
        assert t.final_capital == 0.0

    def test_move_order_gives_players_history(self):
        seen = []

        def forecaster(history):
            seen.append(("forecaster", len(history)))
            return 0.5

        def skeptic(history, price, capital):
            seen.append(("skeptic", len(history)))
            return 0.0

        def reality(history, price, stake):
            seen.append(("reality", len(history)))
            return 1

        play_forecasting_game(forecaster, skeptic, reality, 2)
        assert seen == [
            ("forecaster", 0), ("skeptic", 0), ("reality", 0),
            ("forecaster", 1), ("skeptic", 1), ("reality", 1),
        ]

    def test_unsafe_stake_clamped_and_recorded(self):
        def greedy(history, price, capital):
            return 100.0  # far beyond capital / price

        t = play_forecasting_game(
            ConstantForecaster(0.5), greedy, SequenceReality([0, 0]), 2,
            enforce_safety=True,
        )
        assert t.rounds[0].clamped
        assert t.rounds[0].stake == 2.0
        assert t.rounds[0].capital_after == 0.0

    def test_enforcement_keeps_both_counterfactuals_nonnegative(self):
        import numpy as np

        rng = np.random.default_rng(5)

        def wild(history, price, capital):
            return float(rng.normal(scale=50))

        t = play_forecasting_game(
            ConstantForecaster(0.37), wild, IidReality(0.5, seed=6), 200,
            enforce_safety=True,
        )
        capital = t.initial_capital
        for rnd in t.rounds:
            for y in (0, 1):
                assert capital + rnd.stake * (y - rnd.price) >= -1e-12 * max(1.0, capital)
            capital = rnd.capital_after

    def test_forecaster_out_of_domain_is_protocol_error(self):
        with pytest.raises(ProtocolError, match="round 1: forecaster"):
            play_forecasting_game(
                lambda h: 1.5, ZeroSkeptic(), SequenceReality([1]), 1
            )

    def test_non_finite_stake_names_player_and_round(self):
        def bad(history, price, capital):
            return math.nan if len(history) == 2 else 0.0

        with pytest.raises(ProtocolError, match="round 3: skeptic"):
            play_forecasting_game(
                ConstantForecaster(0.5), bad, SequenceReality([1, 1, 1]), 3
            )

    def test_reality_must_play_binary(self):
        with pytest.raises(ProtocolError, match="round 1: reality"):
            play_forecasting_game(
                ConstantForecaster(0.5), ZeroSkeptic(), lambda h, p, s: 2, 1
            )

    def test_seeded_games_are_bit_identical(self):
        def fresh():
            return play_forecasting_game(
                ConstantForecaster(0.5), LlnSkeptic(0.25), IidReality(0.5), 300,
                enforce_safety=True, seed=99,
            )

        assert fresh() == fresh()

    def test_bad_round_count_rejected(self):
        with pytest.raises(ValueError, match="n_rounds"):
            play_forecasting_game(ConstantForecaster(0.5), ZeroSkeptic(),
                                  SequenceReality([1]), 0)


class TestMarketGame:
    def test_flat_market_keeps_capital(self):
        t = play_market_game(
            ConstantPrice(100), ConstantPosition(0), ConstantPrice(100), 4
        )
        assert t.capital_path() == [1.0] * 5

    def test_long_position_gains(self):
        t = play_market_game(
            ConstantPrice(100), ConstantPosition(0.01), ConstantPrice(110), 1
        )
        assert t.final_capital == pytest.approx(1.1)

    def test_short_position_loses(self):
        t = play_market_game(
            ConstantPrice(100), ConstantPosition(-0.01), ConstantPrice(110), 1
        )
        assert t.final_capital == pytest.approx(0.9)

    def test_negative_price_names_round(self):
        with pytest.raises(ProtocolError, match="round 2: market-close"):
            play_market_game(
                ConstantPrice(100), ConstantPosition(0.01),
                SequencePrice([100, -5]), 2,
            )

    def test_capital_may_go_negative_and_is_recorded(self):
        t = play_market_game(
            ConstantPrice(100), ConstantPosition(-1), ConstantPrice(110), 1
        )
        assert t.final_capital == pytest.approx(-9.0)
        assert t.capital_went_negative


def _sample_transcript(n=3):
    return play_forecasting_game(
        ConstantForecaster(0.5), FractionalSkeptic(0.5), SequenceReality([1, 0, 1][:n]), n
    )


class TestReplayVerify:
    def test_engine_output_is_consistent(self):
        report = replay_verify(_sample_transcript())
        assert report.consistent
        assert report.first_error is None
        assert not report.capital_went_negative

    def test_corrupted_capital_names_round(self):
        t = _sample_transcript()
        rounds = list(t.rounds)
        rounds[1] = dataclasses.replace(rounds[1], capital_after=rounds[1].capital_after + 0.5)
        corrupted = dataclasses.replace(t, rounds=tuple(rounds))
        report = replay_verify(corrupted)
        assert not report.consistent
        assert report.failing_round == 2
        assert "round 2" in report.first_error

    def test_unsafe_stake_flagged_when_safety_claimed(self):
        # Stake just past the interval endpoint, capital chain kept exact.
        k0 = 1.0
        price = 0.5
        stake = k0 / price + 1e-6
        after = capital_update(k0, stake, price, 1)
        t = GameTranscript(
            "forecasting", k0,
            (ForecastRound(price, stake, 1, after),),
            None, True,
        )
        report = replay_verify(t)
        assert not report.consistent
        assert report.first_error == "unsafe round 1"

    def test_unsafe_stake_listed_when_safety_not_claimed(self):
        k0 = 1.0
        stake = 3.0
        after = capital_update(k0, stake, 0.5, 1)
        t = GameTranscript(
            "forecasting", k0, (ForecastRound(0.5, stake, 1, after),), None, False
        )
        report = replay_verify(t)
        assert report.consistent
        assert report.unsafe_rounds == (1,)


class TestTranscriptFiles:
    @pytest.mark.parametrize("make", [
        lambda: play_forecasting_game(
            ConstantForecaster(0.37), LlnSkeptic(0.25), IidReality(0.4, seed=3), 50,
            enforce_safety=True, seed=11,
        ),
        lambda: play_market_game(
            SequencePrice([100.0, 101.5, 99.25]), ConstantPosition(0.125),
            SequencePrice([100.5, 99.75, 103.125]), 3, seed=12,
        ),
    ])
    def test_round_trip_is_bit_exact(self, make):
        t = make()
        text = transcript_to_text(t)
        parsed = parse_transcript(text)
        assert parsed == t
        assert transcript_to_text(parsed) == text
        assert replay_verify(parsed).consistent

    def test_truncated_file_rejected(self):
        text = transcript_to_text(_sample_transcript())
        broken = text.rstrip()[:-5]  # cut into the last record
        with pytest.raises(ValueError):
            parse_transcript(broken)

    def test_empty_file_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            parse_transcript("")

    def test_unknown_protocol_rejected(self):
        with pytest.raises(ValueError, match="protocol"):
            parse_transcript('{"protocol": "poker", "initial_capital": 1.0}')
