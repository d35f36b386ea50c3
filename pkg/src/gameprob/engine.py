"""Perfect-information betting protocols and their capital bookkeeping.

Two protocols are implemented.  In the forecasting game a Forecaster
announces a ticket price in [0, 1], a Skeptic buys or sells any number of
tickets at that price, and Reality decides whether the ticket pays 1 or 0.
In the market game the prices are nonnegative reals (opening and closing
quotes) and the Skeptic role is played by a Speculator taking long or short
positions.  Either way the bettor's capital moves by ``stake * (outcome -
price)`` each round.

All arithmetic in this module is polymorphic over the number type: floats
for simulation, ``fractions.Fraction`` for exact enumeration.  Transcript
files, however, always carry decimal floats.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

Number = Union[int, float]

#: Per-round tolerance for capital-chain consistency checks (scaled by the
#: magnitude of the capital involved).
CHAIN_TOLERANCE = 1e-12

FORECASTING = "forecasting"
MARKET = "market"


class ProtocolError(ValueError):
    """A player emitted an invalid move during a game."""

    def __init__(self, player: str, round_index: int, message: str):
        self.player = player
        self.round_index = round_index
        super().__init__(f"round {round_index}: {player}: {message}")


def _is_finite(value) -> bool:
    # int and Fraction are always finite; only floats can be nan/inf.
    if isinstance(value, float):
        return math.isfinite(value)
    return isinstance(value, (int,)) or hasattr(value, "denominator")


def _materially_negative(value, scale) -> bool:
    """Negative beyond arithmetic noise at the given capital scale.

    Endpoint stakes leave float capital a few ulps either side of zero;
    anything within the per-round chain tolerance counts as zero.
    """
    return value < -CHAIN_TOLERANCE * max(1.0, abs(float(scale)))


@dataclass(frozen=True)
class ForecastRound:
    """One round of the forecasting game.

    ``clamped`` records that the stake was pulled back to the boundary of
    the safe interval by the engine's safety enforcement.
    """

    price: float
    stake: float
    outcome: int
    capital_after: float
    clamped: bool = False


@dataclass(frozen=True)
class MarketRound:
    """One round of the market game: open quote, position taken, close quote."""

    open_price: float
    position: float
    close_price: float
    capital_after: float


@dataclass(frozen=True)
class GameTranscript:
    """Full record of one game: protocol, initial capital, and all rounds.

    The capital chain is redundant on purpose: every round stores the
    capital after it, and :func:`replay_verify` recomputes the chain from
    ``initial_capital`` to detect corruption.
    """

    protocol: str
    initial_capital: float
    rounds: tuple
    rng_seed: Optional[int] = None
    safety_enforced: bool = False

    @property
    def n_rounds(self) -> int:
        return len(self.rounds)

    @property
    def final_capital(self):
        if not self.rounds:
            return self.initial_capital
        return self.rounds[-1].capital_after

    def capital_path(self) -> list:
        """Capital values including the initial one, length ``n_rounds + 1``."""
        return [self.initial_capital] + [r.capital_after for r in self.rounds]

    @property
    def capital_went_negative(self) -> bool:
        scale = self.initial_capital
        for rnd in self.rounds:
            if _materially_negative(rnd.capital_after, scale):
                return True
            scale = rnd.capital_after
        return False


def capital_update(capital_before, stake, price, outcome):
    """Capital after betting ``stake`` tickets priced ``price`` that paid ``outcome``.

    Works for floats and exact rationals alike.  Non-finite inputs indicate
    a malformed round and raise ``ValueError``.
    """
    for name, value in (("capital", capital_before), ("stake", stake),
                        ("price", price), ("outcome", outcome)):
        if not _is_finite(value):
            raise ValueError(f"non-finite {name} in capital update: {value!r}")
    return capital_before + stake * (outcome - price)


def safe_interval(capital_before, price):
    """The exact set of stakes that keep capital nonnegative for both outcomes.

    Solving ``capital + stake * (outcome - price) >= 0`` for outcome 0 and 1
    gives ``[-capital / (1 - price), capital / price]`` for interior prices.
    Buying free tickets (price 0) has no downside, so the upper end is
    ``+inf`` there; selling sure tickets (price 1) likewise unbounds the
    lower end.
    """
    if price < 0 or price > 1:
        raise ValueError(f"price must lie in [0, 1], got {price!r}")
    if capital_before < 0:
        if _materially_negative(capital_before, capital_before):
            raise ValueError(f"capital must be nonnegative, got {capital_before!r}")
        capital_before = 0  # a few ulps below zero counts as bankrupt
    lo = -math.inf if price == 1 else -capital_before / (1 - price)
    hi = math.inf if price == 0 else capital_before / price
    return lo, hi


def _begin_game(strategies: Sequence, seed: Optional[int]) -> None:
    """Reset per-game strategy state and derive per-role random substreams."""
    for index, strategy in enumerate(strategies):
        if seed is not None and hasattr(strategy, "reseed"):
            strategy.reseed((seed, index))
        if hasattr(strategy, "begin_game"):
            strategy.begin_game()


def play_forecasting_game(
    forecaster: Callable,
    skeptic: Callable,
    reality: Callable,
    n_rounds: int,
    k0: float = 1.0,
    *,
    enforce_safety: bool = False,
    seed: Optional[int] = None,
) -> GameTranscript:
    """Run the forecasting protocol for ``n_rounds`` rounds.

    Move order is Forecaster -> Skeptic -> Reality; every player sees the
    full history of completed rounds.  Signatures::

        forecaster(history) -> price in [0, 1]
        skeptic(history, price, capital) -> stake
        reality(history, price, stake) -> outcome in {0, 1}

    With ``enforce_safety`` set, stakes outside :func:`safe_interval` are
    clamped to the nearest endpoint and the round is marked ``clamped``.
    When ``seed`` is given, strategies exposing ``reseed`` receive the
    substream ``(seed, role_index)`` with roles numbered forecaster=0,
    skeptic=1, reality=2.
    """
    if n_rounds < 1:
        raise ValueError("n_rounds must be at least 1")
    if not k0 > 0:
        raise ValueError("initial capital must be positive")
    _begin_game((forecaster, skeptic, reality), seed)
    history: list[ForecastRound] = []
    capital = k0
    for n in range(1, n_rounds + 1):
        price = forecaster(history)
        if not _is_finite(price):
            raise ProtocolError("forecaster", n, f"non-finite price {price!r}")
        if price < 0 or price > 1:
            raise ProtocolError("forecaster", n, f"price {price!r} outside [0, 1]")
        stake = skeptic(history, price, capital)
        if not _is_finite(stake):
            raise ProtocolError("skeptic", n, f"non-finite stake {stake!r}")
        clamped = False
        if enforce_safety:
            lo, hi = safe_interval(capital, price)
            if stake < lo:
                stake, clamped = lo, True
            elif stake > hi:
                stake, clamped = hi, True
        outcome = reality(history, price, stake)
        if outcome not in (0, 1):
            raise ProtocolError("reality", n, f"outcome {outcome!r} not in {{0, 1}}")
        capital = capital_update(capital, stake, price, outcome)
        history.append(ForecastRound(price, stake, int(outcome), capital, clamped))
    return GameTranscript(FORECASTING, k0, tuple(history), seed, enforce_safety)


def play_market_game(
    market_open: Callable,
    speculator: Callable,
    market_close: Callable,
    n_rounds: int,
    k0: float = 1.0,
    *,
    seed: Optional[int] = None,
) -> GameTranscript:
    """Run the market protocol: open quote, position, close quote each round.

    Signatures::

        market_open(history) -> price >= 0
        speculator(history, open_price, capital) -> position
        market_close(history, open_price, position) -> price >= 0

    Closing prices are unbounded above, so no two-sided safety interval
    exists; the transcript simply records whether capital ever went
    negative.
    """
    if n_rounds < 1:
        raise ValueError("n_rounds must be at least 1")
    if not k0 > 0:
        raise ValueError("initial capital must be positive")
    _begin_game((market_open, speculator, market_close), seed)
    history: list[MarketRound] = []
    capital = k0
    for n in range(1, n_rounds + 1):
        open_price = market_open(history)
        if not _is_finite(open_price) or open_price < 0:
            raise ProtocolError("market-open", n, f"invalid price {open_price!r}")
        position = speculator(history, open_price, capital)
        if not _is_finite(position):
            raise ProtocolError("speculator", n, f"non-finite position {position!r}")
        close_price = market_close(history, open_price, position)
        if not _is_finite(close_price) or close_price < 0:
            raise ProtocolError("market-close", n, f"invalid price {close_price!r}")
        capital = capital_update(capital, position, open_price, close_price)
        history.append(MarketRound(open_price, position, close_price, capital))
    return GameTranscript(MARKET, k0, tuple(history), seed, False)


@dataclass(frozen=True)
class ReplayReport:
    """Outcome of replaying a transcript's capital chain.

    ``consistent`` is False on the first chain mismatch, malformed round,
    or a safety violation in a transcript that claims safety enforcement.
    ``unsafe_rounds`` lists rounds whose stake lies outside the safe
    interval regardless of whether safety was claimed.
    """

    consistent: bool
    first_error: Optional[str] = None
    failing_round: Optional[int] = None
    capital_went_negative: bool = False
    unsafe_rounds: tuple = ()


def _chain_tolerance(*values) -> float:
    scale = max([1.0] + [abs(float(v)) for v in values])
    return CHAIN_TOLERANCE * scale


def replay_verify(transcript: GameTranscript) -> ReplayReport:
    """Recompute the capital chain and safety flags of a transcript.

    Inconsistency is a report outcome, not an exception: the report names
    the first failing round and the reason.
    """
    if transcript.protocol not in (FORECASTING, MARKET):
        return ReplayReport(False, f"unknown protocol {transcript.protocol!r}", None)
    capital = transcript.initial_capital
    went_negative = _materially_negative(capital, capital)
    unsafe: list[int] = []
    for n, rnd in enumerate(transcript.rounds, start=1):
        if transcript.protocol == FORECASTING:
            price, stake, payout = rnd.price, rnd.stake, rnd.outcome
            if price < 0 or price > 1:
                return ReplayReport(False, f"round {n}: price outside [0, 1]", n)
            if payout not in (0, 1):
                return ReplayReport(False, f"round {n}: outcome not binary", n)
            # Counterfactual capitals for both possible outcomes.
            tol = _chain_tolerance(capital, stake)
            worst = min(capital - stake * price, capital + stake * (1 - price))
            if worst < -tol:
                unsafe.append(n)
        else:
            price, stake, payout = rnd.open_price, rnd.position, rnd.close_price
            if price < 0 or payout < 0:
                return ReplayReport(False, f"round {n}: negative price", n)
        try:
            expected = capital_update(capital, stake, price, payout)
        except ValueError as exc:
            return ReplayReport(False, f"round {n}: {exc}", n)
        if abs(expected - rnd.capital_after) > _chain_tolerance(capital, expected):
            return ReplayReport(
                False,
                f"round {n}: capital_after {rnd.capital_after!r} does not match "
                f"replayed value {expected!r}",
                n,
                went_negative,
                tuple(unsafe),
            )
        if _materially_negative(rnd.capital_after, capital):
            went_negative = True
        capital = rnd.capital_after
    if transcript.safety_enforced and unsafe:
        return ReplayReport(
            False, f"unsafe round {unsafe[0]}", unsafe[0], went_negative, tuple(unsafe)
        )
    return ReplayReport(True, None, None, went_negative, tuple(unsafe))


# ---------------------------------------------------------------------------
# Transcript files: one JSON record per line, header first.  Floats are
# written with Python's shortest round-trip representation, so a file read
# back parses to bit-identical values.

def transcript_to_lines(transcript: GameTranscript) -> list[str]:
    header = {
        "protocol": transcript.protocol,
        "initial_capital": float(transcript.initial_capital),
        "rng_seed": transcript.rng_seed,
        "safety_enforced": transcript.safety_enforced,
    }
    lines = [json.dumps(header)]
    for rnd in transcript.rounds:
        if transcript.protocol == FORECASTING:
            record = {
                "price": float(rnd.price),
                "stake": float(rnd.stake),
                "outcome": rnd.outcome,
                "capital_after": float(rnd.capital_after),
                "clamped": rnd.clamped,
            }
        else:
            record = {
                "open": float(rnd.open_price),
                "position": float(rnd.position),
                "close": float(rnd.close_price),
                "capital_after": float(rnd.capital_after),
            }
        lines.append(json.dumps(record))
    return lines


def transcript_to_text(transcript: GameTranscript) -> str:
    return "\n".join(transcript_to_lines(transcript)) + "\n"


def parse_transcript(text: str) -> GameTranscript:
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise ValueError("empty transcript")
    try:
        header = json.loads(lines[0])
        records = [json.loads(line) for line in lines[1:]]
    except json.JSONDecodeError as exc:
        raise ValueError(f"malformed transcript: {exc}") from exc
    protocol = header.get("protocol")
    if protocol not in (FORECASTING, MARKET):
        raise ValueError(f"unknown protocol {protocol!r}")
    rounds: list = []
    for record in records:
        try:
            if protocol == FORECASTING:
                rounds.append(
                    ForecastRound(
                        record["price"],
                        record["stake"],
                        int(record["outcome"]),
                        record["capital_after"],
                        bool(record.get("clamped", False)),
                    )
                )
            else:
                rounds.append(
                    MarketRound(
                        record["open"],
                        record["position"],
                        record["close"],
                        record["capital_after"],
                    )
                )
        except KeyError as exc:
            raise ValueError(f"transcript record missing field {exc}") from exc
    return GameTranscript(
        protocol,
        header["initial_capital"],
        tuple(rounds),
        header.get("rng_seed"),
        bool(header.get("safety_enforced", False)),
    )


def write_transcript(path, transcript: GameTranscript) -> None:
    text = transcript_to_text(transcript)
    with open(path, "w", encoding="ascii") as handle:
        handle.write(text)


def read_transcript(path) -> GameTranscript:
    with open(path, "r", encoding="ascii") as handle:
        return parse_transcript(handle.read())
