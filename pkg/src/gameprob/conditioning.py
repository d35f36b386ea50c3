"""Ticket algebra over the three-cell outcome partition {not-A, A-and-not-B, A-and-B}.

This module makes the classical arguments for updating by conditioning
executable: the compound-probability pricing of a two-stage purchase, the
conditional-ticket construction (price refunded when A fails), and the
substitution that replaces a planned later purchase of B tickets with an
initial block of A-and-B and A tickets of equal payoff and zero net cost.

Arithmetic is exact-rational by default: pass prices and quantities as
``Fraction``, ``int``, or decimal strings and every payoff identity holds
exactly.  Floats are accepted and flow through unchanged for approximate
work.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union

Scalar = Union[int, float, Fraction]


class NullEventError(ValueError):
    """Conditioning on an event priced at zero."""


def as_price(value: Scalar) -> Scalar:
    """Normalize a user-supplied number: strings become exact rationals."""
    if isinstance(value, str):
        return Fraction(value)
    return value


class OutcomeCell(enum.Enum):
    """The partition every ticket's payoff is measurable against."""

    NOT_A = "not_A"
    A_NOT_B = "A_not_B"
    A_AND_B = "A_and_B"


CELLS = (OutcomeCell.NOT_A, OutcomeCell.A_NOT_B, OutcomeCell.A_AND_B)


class TicketKind(enum.Enum):
    ON_A = "on_A"
    ON_A_AND_B = "on_AandB"
    CONDITIONAL_B_GIVEN_A = "conditional_B_given_A"
    LATER_B_AFTER_A = "later_B_after_A"


@dataclass(frozen=True)
class PricePair:
    """Prices for A and for A-and-B; everything else is derived from them.

    Requires ``0 <= price_ab <= price_a <= 1`` with ``price_a`` positive:
    a zero price for A would make the conditional price a division by a
    null event.
    """

    price_a: Scalar
    price_ab: Scalar

    def __post_init__(self):
        object.__setattr__(self, "price_a", as_price(self.price_a))
        object.__setattr__(self, "price_ab", as_price(self.price_ab))
        if self.price_a == 0:
            raise NullEventError("conditioning on null event: price of A is 0")
        if not (0 < self.price_a <= 1):
            raise ValueError("price of A must lie in (0, 1]")
        if not (0 <= self.price_ab <= self.price_a):
            raise ValueError("price of A-and-B must lie in [0, price of A]")


def conditional_price(prices: PricePair) -> Scalar:
    """Price of B once A is known: the ratio of the two given prices."""
    return prices.price_ab / prices.price_a


def compound_probability(price_a: Scalar, price_b_given_a: Scalar) -> Scalar:
    """Price of A-and-B from the price of A and the post-A price of B."""
    price_a = as_price(price_a)
    price_b_given_a = as_price(price_b_given_a)
    for name, value in (("price of A", price_a), ("conditional price", price_b_given_a)):
        if not (0 <= value <= 1):
            raise ValueError(f"{name} must lie in [0, 1]")
    return price_a * price_b_given_a


@dataclass(frozen=True)
class Ticket:
    """A priced contingent claim; negative quantity means sold."""

    kind: TicketKind
    quantity: Scalar
    unit_price: Scalar

    def __post_init__(self):
        object.__setattr__(self, "quantity", as_price(self.quantity))
        object.__setattr__(self, "unit_price", as_price(self.unit_price))


def ticket_payout(kind: TicketKind, cell: OutcomeCell) -> int:
    """Gross payout of one ticket of ``kind`` on ``cell``."""
    if kind == TicketKind.ON_A:
        return 0 if cell == OutcomeCell.NOT_A else 1
    # The remaining kinds all pay on A-and-B only.
    return 1 if cell == OutcomeCell.A_AND_B else 0


def ticket_net_payoff(ticket: Ticket, cell: OutcomeCell) -> Scalar:
    """Payout minus effective cost for the full ticket position.

    Conditional tickets refund their price when A fails; later-stage
    tickets are never bought at all when A fails.  Either way the position
    nets to zero on the not-A cell.
    """
    payout = ticket_payout(ticket.kind, cell)
    refundable = ticket.kind in (
        TicketKind.CONDITIONAL_B_GIVEN_A,
        TicketKind.LATER_B_AFTER_A,
    )
    if refundable and cell == OutcomeCell.NOT_A:
        return ticket.quantity * 0
    return ticket.quantity * (payout - ticket.unit_price)


@dataclass(frozen=True)
class TwoStageStrategy:
    """Initial ticket purchases plus a planned later purchase of B tickets.

    ``later_quantity`` is the number of B tickets bought after A becomes
    known, at the conditional price; it may be negative (a planned sale) or
    zero.  Initial tickets must be initial-situation kinds.
    """

    initial_tickets: tuple = ()
    later_quantity: Scalar = 0

    def __post_init__(self):
        object.__setattr__(self, "initial_tickets", tuple(self.initial_tickets))
        object.__setattr__(self, "later_quantity", as_price(self.later_quantity))
        for ticket in self.initial_tickets:
            if ticket.kind == TicketKind.LATER_B_AFTER_A:
                raise ValueError("later-stage tickets cannot appear among initial tickets")

    def initial_cost(self) -> Scalar:
        """Capital committed in the initial situation."""
        return sum((t.quantity * t.unit_price for t in self.initial_tickets), 0)


def evaluate_payoff(strategy: TwoStageStrategy, cell: OutcomeCell, prices: PricePair) -> Scalar:
    """Net payoff of the whole strategy on one outcome cell.

    The later purchase trades at the conditional price derived from
    ``prices`` and only happens when A does: it contributes nothing on the
    not-A cell.
    """
    total = sum((ticket_net_payoff(t, cell) for t in strategy.initial_tickets), 0)
    m = strategy.later_quantity
    if m != 0:
        later = Ticket(TicketKind.LATER_B_AFTER_A, m, conditional_price(prices))
        total = total + ticket_net_payoff(later, cell)
    return total


def payoff_table(strategy: TwoStageStrategy, prices: PricePair) -> dict:
    return {cell: evaluate_payoff(strategy, cell, prices) for cell in CELLS}


def definetti_portfolio(prices: PricePair) -> list:
    """The two-ticket purchase that prices A-and-B at ``price_a * price(B|A)``.

    First a ticket paying the conditional price if A happens (a fractional
    A ticket), then a conditional B ticket whose price is refunded when A
    fails.  Its net payoff is ``1 - price_a * price(B|A)`` on A-and-B and
    ``-price_a * price(B|A)`` on the other two cells.
    """
    pba = conditional_price(prices)
    return [
        Ticket(TicketKind.ON_A, pba, prices.price_a),
        Ticket(TicketKind.CONDITIONAL_B_GIVEN_A, 1, pba),
    ]


def added_ticket_block(later_quantity: Scalar, prices: PricePair) -> list:
    """Initial tickets replicating a later purchase of B tickets.

    ``m`` tickets on A-and-B plus ``-m * price(B|A)`` tickets on A.  The
    block costs exactly zero up front and pays, cell by cell, what the
    later purchase would have paid.
    """
    m = as_price(later_quantity)
    pba = conditional_price(prices)
    return [
        Ticket(TicketKind.ON_A_AND_B, m, prices.price_ab),
        Ticket(TicketKind.ON_A, -m * pba, prices.price_a),
    ]


def transform_strategy(strategy: TwoStageStrategy, prices: PricePair) -> TwoStageStrategy:
    """Remove the later stage by substituting the equivalent initial block.

    The returned strategy buys only in the initial situation, commits the
    same capital there (the added block is free), and has identical net
    payoff on every outcome cell.
    """
    if strategy.later_quantity == 0:
        return TwoStageStrategy(strategy.initial_tickets, 0)
    block = added_ticket_block(strategy.later_quantity, prices)
    return TwoStageStrategy(tuple(strategy.initial_tickets) + tuple(block), 0)


# ---------------------------------------------------------------------------
# Scenario files.  Plain text, one field per line:
#
#     pA: 2/5
#     pAB: 1/5
#     M: 1
#     learned_A_only: true
#     ticket: on_A 1 2/5          # kind quantity unit_price
#
# Numbers parse exactly: decimals and slash fractions both become rationals.


@dataclass(frozen=True)
class ConditioningScenario:
    """A priced two-stage strategy plus the premise it rests on.

    ``learned_a_only`` records the judgement that A alone (and nothing that
    could help a bettor) becomes known before the later stage.  The payoff
    arithmetic verified here is unconditional; this flag documents the
    premise under which the substitution licenses the conditional price.
    """

    prices: PricePair
    strategy: TwoStageStrategy
    learned_a_only: bool = True


_KIND_BY_NAME = {kind.value: kind for kind in TicketKind}


def _parse_exact(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"malformed number {text!r}") from exc


def parse_scenario(text: str) -> ConditioningScenario:
    price_a = price_ab = None
    later = Fraction(0)
    learned = True
    tickets = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition(":")
        if not sep:
            raise ValueError(f"malformed scenario line {raw!r}")
        key = key.strip()
        value = value.strip()
        if key == "pA":
            price_a = _parse_exact(value)
        elif key == "pAB":
            price_ab = _parse_exact(value)
        elif key == "M":
            later = _parse_exact(value)
        elif key == "learned_A_only":
            learned = value.lower() in ("true", "yes", "1")
        elif key == "ticket":
            parts = value.split()
            if len(parts) != 3:
                raise ValueError(f"ticket line needs kind, quantity, price: {raw!r}")
            kind_name, quantity, unit_price = parts
            kind = _KIND_BY_NAME.get(kind_name)
            if kind is None:
                raise ValueError(f"unknown ticket kind {kind_name!r}")
            tickets.append(Ticket(kind, _parse_exact(quantity), _parse_exact(unit_price)))
        else:
            raise ValueError(f"unknown scenario field {key!r}")
    if price_a is None or price_ab is None:
        raise ValueError("scenario must set pA and pAB")
    prices = PricePair(price_a, price_ab)
    return ConditioningScenario(prices, TwoStageStrategy(tuple(tickets), later), learned)


def scenario_to_text(scenario: ConditioningScenario) -> str:
    lines = [
        f"pA: {scenario.prices.price_a}",
        f"pAB: {scenario.prices.price_ab}",
        f"M: {scenario.strategy.later_quantity}",
        f"learned_A_only: {'true' if scenario.learned_a_only else 'false'}",
    ]
    for ticket in scenario.strategy.initial_tickets:
        lines.append(f"ticket: {ticket.kind.value} {ticket.quantity} {ticket.unit_price}")
    return "\n".join(lines) + "\n"
