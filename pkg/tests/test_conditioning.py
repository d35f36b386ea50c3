"""Tests for the ticket algebra: pricing identities and the two-stage
strategy substitution."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gameprob.conditioning import (
    CELLS,
    ConditioningScenario,
    NullEventError,
    OutcomeCell,
    PricePair,
    Ticket,
    TicketKind,
    TwoStageStrategy,
    added_ticket_block,
    compound_probability,
    conditional_price,
    definetti_portfolio,
    evaluate_payoff,
    parse_scenario,
    payoff_table,
    scenario_to_text,
    transform_strategy,
)


class TestConditionalPrice:
    def test_plain_ratio(self):
        assert conditional_price(PricePair("0.4", "0.2")) == Fraction(1, 2)

    def test_conditioning_on_the_sure_event(self):
        assert conditional_price(PricePair(1, "0.3")) == Fraction(3, 10)

    def test_certain_given_a(self):
        assert conditional_price(PricePair("0.4", "0.4")) == 1

    def test_null_event_rejected(self):
        with pytest.raises(NullEventError, match="null event"):
            PricePair(0, 0)

    def test_price_ordering_enforced(self):
        with pytest.raises(ValueError, match="price of A"):
            PricePair("0.2", "0.4")


class TestCompoundProbability:
    def test_product(self):
        assert compound_probability("0.4", "0.5") == Fraction(1, 5)

    def test_sure_first_event_is_identity(self):
        assert compound_probability(1, "0.7") == Fraction(7, 10)

    def test_null_first_event(self):
        assert compound_probability(0, "0.7") == 0

    @given(
        pa=st.fractions(min_value=Fraction(1, 100), max_value=1),
        pab_scale=st.fractions(min_value=0, max_value=1),
    )
    def test_round_trip_with_conditional_price_is_exact(self, pa, pab_scale):
        pab = pa * pab_scale
        prices = PricePair(pa, pab)
        assert compound_probability(pa, conditional_price(prices)) == pab


class TestDefinettiPortfolio:
    def test_worked_example(self):
        prices = PricePair("0.4", "0.2")
        strategy = TwoStageStrategy(tuple(definetti_portfolio(prices)), 0)
        table = payoff_table(strategy, prices)
        assert table[OutcomeCell.A_AND_B] == Fraction(4, 5)
        assert table[OutcomeCell.NOT_A] == Fraction(-1, 5)
        assert table[OutcomeCell.A_NOT_B] == Fraction(-1, 5)

    def test_three_case_contract_for_generic_prices(self):
        prices = PricePair(Fraction(3, 7), Fraction(2, 7))
        cost = prices.price_a * conditional_price(prices)
        strategy = TwoStageStrategy(tuple(definetti_portfolio(prices)), 0)
        table = payoff_table(strategy, prices)
        assert table[OutcomeCell.A_AND_B] == 1 - cost
        assert table[OutcomeCell.NOT_A] == -cost
        assert table[OutcomeCell.A_NOT_B] == -cost

    def test_sure_a_degenerates_to_a_plain_b_ticket(self):
        prices = PricePair(1, "0.3")
        first, second = definetti_portfolio(prices)
        assert second.kind == TicketKind.CONDITIONAL_B_GIVEN_A
        assert second.unit_price == prices.price_ab  # conditional price == pAB
        # With A sure, the pair nets like one B-ticket bought at pAB.
        strategy = TwoStageStrategy((first, second), 0)
        assert evaluate_payoff(strategy, OutcomeCell.A_AND_B, prices) == 1 - prices.price_ab
        assert evaluate_payoff(strategy, OutcomeCell.A_NOT_B, prices) == -prices.price_ab

    def test_impossible_b_given_a_costs_nothing(self):
        # pAB = 0 prices the joint cell as impossible: the portfolio is free
        # and pays nothing on either cell that can happen.  (On the null
        # joint cell the conditional ticket would still honour its face
        # value, per the three-case contract.)
        prices = PricePair("0.5", 0)
        strategy = TwoStageStrategy(tuple(definetti_portfolio(prices)), 0)
        assert strategy.initial_cost() == 0
        table = payoff_table(strategy, prices)
        assert table[OutcomeCell.NOT_A] == 0
        assert table[OutcomeCell.A_NOT_B] == 0
        assert table[OutcomeCell.A_AND_B] == 1


class TestEvaluatePayoff:
    def test_empty_strategy_pays_nothing(self):
        prices = PricePair("0.4", "0.2")
        strategy = TwoStageStrategy((), 0)
        assert all(v == 0 for v in payoff_table(strategy, prices).values())

    def test_single_a_ticket(self):
        prices = PricePair("0.4", "0.2")
        strategy = TwoStageStrategy((Ticket(TicketKind.ON_A, 1, "0.4"),), 0)
        table = payoff_table(strategy, prices)
        assert table[OutcomeCell.NOT_A] == Fraction(-2, 5)
        assert table[OutcomeCell.A_NOT_B] == Fraction(3, 5)
        assert table[OutcomeCell.A_AND_B] == Fraction(3, 5)

    def test_later_purchase_equals_conditional_ticket(self):
        # The deferred B purchase and the refundable conditional ticket net
        # identically on every cell.
        prices = PricePair(Fraction(5, 8), Fraction(1, 4))
        deferred = TwoStageStrategy((), Fraction(3, 2))
        upfront = TwoStageStrategy(
            (Ticket(TicketKind.CONDITIONAL_B_GIVEN_A, Fraction(3, 2),
                    conditional_price(prices)),),
            0,
        )
        for cell in CELLS:
            assert evaluate_payoff(deferred, cell, prices) == evaluate_payoff(
                upfront, cell, prices
            )

    def test_sold_tickets_flip_sign(self):
        prices = PricePair("0.4", "0.2")
        bought = TwoStageStrategy((Ticket(TicketKind.ON_A_AND_B, 2, "0.2"),), 0)
        sold = TwoStageStrategy((Ticket(TicketKind.ON_A_AND_B, -2, "0.2"),), 0)
        for cell in CELLS:
            assert evaluate_payoff(sold, cell, prices) == -evaluate_payoff(bought, cell, prices)

    def test_later_tickets_cannot_sit_in_the_initial_stage(self):
        with pytest.raises(ValueError, match="later"):
            TwoStageStrategy((Ticket(TicketKind.LATER_B_AFTER_A, 1, "0.5"),), 0)


class TestTransformStrategy:
    def test_worked_block_payoffs(self):
        prices = PricePair("0.4", "0.2")
        strategy = TwoStageStrategy((), 1)
        transformed = transform_strategy(strategy, prices)
        table = payoff_table(transformed, prices)
        assert table[OutcomeCell.NOT_A] == 0
        assert table[OutcomeCell.A_NOT_B] == Fraction(-1, 2)
        assert table[OutcomeCell.A_AND_B] == Fraction(1, 2)
        assert transformed.initial_cost() == 0
        assert transformed.later_quantity == 0

    def test_zero_later_quantity_is_identity(self):
        prices = PricePair("0.4", "0.2")
        tickets = (Ticket(TicketKind.ON_A, 2, "0.4"),)
        strategy = TwoStageStrategy(tickets, 0)
        transformed = transform_strategy(strategy, prices)
        assert transformed.initial_tickets == tickets
        assert transformed.later_quantity == 0

    def test_sold_later_position(self):
        prices = PricePair("0.5", "0.25")
        transformed = transform_strategy(TwoStageStrategy((), -2), prices)
        table = payoff_table(transformed, prices)
        assert table[OutcomeCell.NOT_A] == 0
        assert table[OutcomeCell.A_NOT_B] == 1
        assert table[OutcomeCell.A_AND_B] == -1

    def test_added_block_is_always_free(self):
        prices = PricePair(Fraction(3, 11), Fraction(2, 11))
        block = added_ticket_block(Fraction(-7, 3), prices)
        assert sum(t.quantity * t.unit_price for t in block) == 0

    @given(
        pa=st.fractions(min_value=Fraction(1, 50), max_value=1),
        pab_scale=st.fractions(min_value=0, max_value=1),
        m=st.fractions(min_value=-20, max_value=20),
        qty=st.fractions(min_value=-10, max_value=10),
        kind=st.sampled_from(
            [TicketKind.ON_A, TicketKind.ON_A_AND_B, TicketKind.CONDITIONAL_B_GIVEN_A]
        ),
    )
    @settings(max_examples=300)
    def test_substitution_preserves_every_payoff_exactly(self, pa, pab_scale, m, qty, kind):
        prices = PricePair(pa, pa * pab_scale)
        ticket_price = conditional_price(prices) if kind == TicketKind.CONDITIONAL_B_GIVEN_A else (
            prices.price_a if kind == TicketKind.ON_A else prices.price_ab
        )
        strategy = TwoStageStrategy((Ticket(kind, qty, ticket_price),), m)
        transformed = transform_strategy(strategy, prices)
        for cell in CELLS:
            assert evaluate_payoff(strategy, cell, prices) == evaluate_payoff(
                transformed, cell, prices
            )
        assert transformed.initial_cost() == strategy.initial_cost()


class TestDeMoivrePricing:
    @given(
        pa=st.fractions(min_value=Fraction(1, 50), max_value=1),
        pba=st.fractions(min_value=0, max_value=1),
    )
    def test_two_stage_purchase_prices_the_joint_ticket(self, pa, pba):
        # Hold p(B|A) worth of A tickets; on A their payout funds one later
        # B ticket.  External outlay is pa * pba; gross payout is exactly 1
        # on the joint cell and 0 elsewhere.
        prices = PricePair(pa, pa * pba)
        strategy = TwoStageStrategy(
            (Ticket(TicketKind.ON_A, pba, pa),), 1 if pba else 0
        )
        if pba == 0:
            return  # nothing to buy later; degenerate
        cost = strategy.initial_cost()
        assert cost == pa * pba
        gross = {
            cell: evaluate_payoff(strategy, cell, prices) + cost for cell in CELLS
        }
        assert gross[OutcomeCell.A_AND_B] == 1
        assert gross[OutcomeCell.A_NOT_B] == 0
        assert gross[OutcomeCell.NOT_A] == 0


class TestScenarioFiles:
    def test_round_trip(self):
        scenario = ConditioningScenario(
            PricePair("0.4", "0.2"),
            TwoStageStrategy(
                (Ticket(TicketKind.ON_A, Fraction(1, 2), Fraction(2, 5)),),
                Fraction(3),
            ),
            learned_a_only=False,
        )
        text = scenario_to_text(scenario)
        parsed = parse_scenario(text)
        assert parsed.prices == scenario.prices
        assert parsed.strategy == scenario.strategy
        assert parsed.learned_a_only is False
        assert scenario_to_text(parsed) == text

    def test_decimal_fields_parse_exactly(self):
        parsed = parse_scenario("pA: 0.4\npAB: 0.2\nM: 1\n")
        assert parsed.prices.price_a == Fraction(2, 5)
        assert parsed.strategy.later_quantity == 1
        assert parsed.learned_a_only is True

    def test_null_event_scenario_rejected(self):
        with pytest.raises(NullEventError):
            parse_scenario("pA: 0\npAB: 0\n")

    def test_unknown_field_rejected(self):
        with pytest.raises(ValueError, match="unknown scenario field"):
            parse_scenario("pA: 0.4\npAB: 0.2\nfoo: 1\n")

    def test_malformed_ticket_rejected(self):
        with pytest.raises(ValueError, match="ticket"):
            parse_scenario("pA: 0.4\npAB: 0.2\nticket: on_A 1\n")
