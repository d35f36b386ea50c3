"""Hypothesis tests built from capital processes.

A safe betting strategy that starts with capital ``k0`` and reaches
``k0 / alpha`` is evidence at significance level ``alpha`` against the
prices it bet on: by Markov's inequality the probability of that much
growth is at most ``alpha`` when the prices are conditional probabilities
of the outcome distribution.  The final capital is also a likelihood
ratio: weighting each outcome sequence's probability by the capital the
strategy reaches on it yields the implied alternative distribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .engine import (
    FORECASTING,
    GameTranscript,
    play_forecasting_game,
    replay_verify,
)
from .strategies import (
    JointDistribution,
    SequenceReality,
    forecaster_from_distribution,
    format_weight,
    index_to_bits,
)


class InvalidTestError(ValueError):
    """The transcript cannot support a capital-based test."""


@dataclass(frozen=True)
class VilleTestResult:
    """Outcome of testing a transcript at significance level ``alpha``.

    ``achieved_level`` is the smallest level at which the capital growth
    would reject, capped at 1: capital at or below ``k0`` is no evidence.
    """

    final_capital: float
    initial_capital: float
    alpha: float
    rejected: bool
    achieved_level: float

    def to_kv_lines(self) -> list[str]:
        return [
            f"final_capital={self.final_capital!r}",
            f"k0={self.initial_capital!r}",
            f"alpha={self.alpha!r}",
            f"rejected={'true' if self.rejected else 'false'}",
            f"achieved_level={self.achieved_level!r}",
        ]

    @classmethod
    def from_kv_lines(cls, lines: Sequence[str]) -> "VilleTestResult":
        fields = {}
        for line in lines:
            line = line.strip()
            if not line or "=" not in line:
                continue
            key, value = line.split("=", 1)
            fields[key] = value
        return cls(
            float(fields["final_capital"]),
            float(fields["k0"]),
            float(fields["alpha"]),
            fields["rejected"] == "true",
            float(fields["achieved_level"]),
        )


def _require_valid_for_testing(transcript: GameTranscript) -> None:
    report = replay_verify(transcript)
    if not report.consistent:
        raise InvalidTestError(f"transcript fails replay verification: {report.first_error}")
    if report.capital_went_negative:
        raise InvalidTestError("capital was risked beyond the initial stake; test invalid")
    if transcript.protocol == FORECASTING and report.unsafe_rounds:
        raise InvalidTestError(
            f"capital was risked beyond the initial stake (unsafe round "
            f"{report.unsafe_rounds[0]}); test invalid"
        )


def ville_test(transcript: GameTranscript, alpha: float) -> VilleTestResult:
    """Reject when the final capital reaches ``k0 / alpha``."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie strictly between 0 and 1")
    _require_valid_for_testing(transcript)
    k0 = transcript.initial_capital
    final = transcript.final_capital
    rejected = final >= k0 / alpha
    achieved = 1.0 if final <= k0 or final == 0 else min(1.0, k0 / final)
    return VilleTestResult(final, k0, alpha, rejected, achieved)


def likelihood_ratio(transcript: GameTranscript) -> float:
    """Final over initial capital: how much the outcome favored the
    strategy's implied alternative over the tested prices."""
    _require_valid_for_testing(transcript)
    return transcript.final_capital / transcript.initial_capital


@dataclass(frozen=True)
class ImpliedAlternative:
    """Weights ``q(y) = K(y) * P(y)`` over all binary sequences of length n."""

    n: int
    weights: tuple

    def __post_init__(self):
        total = sum(self.weights)
        if any(w < 0 for w in self.weights):
            raise ValueError("implied alternative has a negative weight")
        if isinstance(total, Fraction):
            if total != 1:
                raise ValueError(f"implied alternative sums to {total}, expected exactly 1")
        elif abs(total - 1.0) > 1e-9:
            raise ValueError(f"implied alternative sums to {total!r}, expected 1 within 1e-9")

    def weight(self, index: int):
        return self.weights[index]

    def to_table_lines(self) -> list[str]:
        lines = []
        for index, weight in enumerate(self.weights):
            bits = "".join(str(b) for b in index_to_bits(index, self.n))
            lines.append(f"{bits} {format_weight(weight)}")
        return lines

    def as_distribution(self) -> JointDistribution:
        return JointDistribution(list(self.weights))


def _exact_capable(skeptic):
    return skeptic.as_exact() if hasattr(skeptic, "as_exact") else skeptic


def _all_sequence_outcomes(n: int) -> np.ndarray:
    indices = np.arange(1 << n, dtype=np.int64)
    shifts = (n - 1 - np.arange(n, dtype=np.int64))[None, :]
    return ((indices[:, None] >> shifts) & 1).astype(np.int8)


def _all_sequence_prices(dist: JointDistribution) -> np.ndarray:
    """Forecaster quotes along every sequence, via the prefix tree.

    Prefixes with probability zero are unreachable; their price slot is 0
    and the sequences through them carry weight 0 anyway.
    """
    n = dist.n
    levels = dist._levels
    indices = np.arange(1 << n, dtype=np.int64)
    prices = np.empty((1 << n, n), dtype=float)
    for level in range(n):
        denom = np.asarray([float(v) for v in levels[level]])
        ones = np.asarray([float(levels[level + 1][2 * i + 1]) for i in range(1 << level)])
        cond = np.where(denom > 0, ones / np.where(denom > 0, denom, 1.0), 0.0)
        prices[:, level] = cond[indices >> (n - level)]
    return prices


def _enumerate_batch(skeptic, dist: JointDistribution, k0):
    """Vectorized enumeration for batch-capable skeptics (float mode).

    Batch-capable built-ins are safe by construction (their parameter
    domains guarantee stakes inside the safe interval), so the per-round
    safety audit of the engine path is replaced by a final-capital
    negativity backstop.
    """
    outcomes = _all_sequence_outcomes(dist.n)
    prices = _all_sequence_prices(dist)
    capitals = skeptic.batch_final_capitals(prices, outcomes, float(k0))
    probabilities = [dist.weight(i) for i in range(1 << dist.n)]
    # Endpoint stakes leave float capital a few ulps under zero; the noise
    # scales with the largest capital reached, so the backstop flags only
    # material losses beyond the initial stake.
    tolerance = 1e-9 * max(1.0, float(k0), float(np.max(np.abs(capitals))))
    for index, (capital, prob) in enumerate(zip(capitals, probabilities)):
        if prob > 0 and capital < -tolerance:
            bits = "".join(str(b) for b in index_to_bits(index, dist.n))
            raise ValueError(f"skeptic is unsafe on sequence {bits}")
    return [float(c) for c in capitals], probabilities


def enumerate_final_capitals(
    skeptic,
    dist: JointDistribution,
    forecaster=None,
    *,
    k0=1,
    mode: str = "float",
):
    """Play every one of the ``2**n`` outcome sequences deterministically.

    Returns parallel lists ``(capitals, probabilities)`` indexed like the
    distribution's dense table.  In rational mode both are exact; the
    distribution is converted with :meth:`JointDistribution.as_exact` and
    built-in skeptics swap in exact parameters.  Float-mode enumeration
    uses the skeptics' vectorized batch rule when they provide one, which
    the test suite pins against the engine round by round.
    """
    if mode not in ("float", "rational"):
        raise ValueError("mode must be 'float' or 'rational'")
    if mode == "rational":
        dist = dist.as_exact()
        skeptic = _exact_capable(skeptic)
        k0 = Fraction(k0)
        forecaster = None  # must follow the exact distribution
    if not dist.is_dense:
        dist = dist.to_dense()
    if mode == "float" and forecaster is None and hasattr(skeptic, "batch_final_capitals"):
        return _enumerate_batch(skeptic, dist, k0)
    if forecaster is None:
        forecaster = forecaster_from_distribution(dist)
    n = dist.n
    capitals = []
    probabilities = []
    for index in range(1 << n):
        bits = index_to_bits(index, n)
        prob = dist.weight(index)
        if prob == 0:
            # Unreachable sequence under the distribution: contributes 0.
            capitals.append(k0 * 0)
            probabilities.append(prob)
            continue
        transcript = play_forecasting_game(
            forecaster, skeptic, SequenceReality(bits), n, k0
        )
        report = replay_verify(transcript)
        if report.unsafe_rounds or report.capital_went_negative:
            raise ValueError(
                f"skeptic is unsafe on sequence {''.join(str(b) for b in bits)}"
            )
        capitals.append(transcript.final_capital)
        probabilities.append(prob)
    return capitals, probabilities


def implied_alternative(
    skeptic,
    dist: JointDistribution,
    forecaster=None,
    *,
    mode: str = "float",
) -> ImpliedAlternative:
    """The alternative distribution a safe skeptic implicitly bets on.

    Enumerates all outcome sequences against the distribution-backed
    forecaster (the default and the intended pairing) and sets
    ``q(y) = K(y) * P(y)`` with the game started at capital 1.  The result
    is normalized by construction: the final capital of a one-unit betting
    strategy has expected value 1.
    """
    capitals, probabilities = enumerate_final_capitals(
        skeptic, dist, forecaster, k0=1, mode=mode
    )
    weights = tuple(k * p for k, p in zip(capitals, probabilities))
    return ImpliedAlternative(dist.n, weights)


def exact_exceedance_probability(
    skeptic,
    dist: JointDistribution,
    alpha: float,
    *,
    k0=1,
    mode: str = "float",
):
    """Exact probability that the skeptic's final capital reaches ``k0/alpha``."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie strictly between 0 and 1")
    capitals, probabilities = enumerate_final_capitals(skeptic, dist, k0=k0, mode=mode)
    threshold = (Fraction(k0) / _as_fraction(alpha)) if mode == "rational" else k0 / alpha
    return sum(p for k, p in zip(capitals, probabilities) if k >= threshold)


def _as_fraction(value) -> Fraction:
    return value if isinstance(value, Fraction) else Fraction(value)


@dataclass(frozen=True)
class MarkovBoundEstimate:
    """Monte Carlo estimate of ``P(final capital >= k0 / alpha)``.

    ``std_error`` is the binomial standard error of the estimate; the
    Markov bound holds when ``estimate - 3 * std_error <= alpha``.
    """

    estimate: float
    std_error: float
    alpha: float
    replications: int
    threshold: float
    exceed_count: int

    @property
    def bound_respected(self) -> bool:
        return self.estimate - 3 * self.std_error <= self.alpha


#: Replication chunking keeps outcome matrices near this many entries.
_CHUNK_ENTRIES = 4_000_000


def _sample_outcomes_and_prices(dist: JointDistribution, rng, count: int):
    """Sample ``count`` outcome sequences; return (outcomes, prices) arrays.

    Prices are what the distribution-backed forecaster would quote along
    each sampled path: a constant vector for the iid form, a per-path
    matrix otherwise.
    """
    n = dist.n
    if not dist.is_dense:
        theta = float(dist.theta)
        outcomes = (rng.random((count, n)) < theta).astype(np.int8)
        return outcomes, np.full(n, theta)
    # Sequential sampling through the prefix tree, vectorized over paths.
    levels = dist._levels
    conditionals = []
    for level in range(n):
        denom = np.asarray([float(v) for v in levels[level]])
        ones = np.asarray([float(levels[level + 1][2 * i + 1]) for i in range(1 << level)])
        with np.errstate(invalid="ignore", divide="ignore"):
            cond = np.where(denom > 0, ones / np.where(denom > 0, denom, 1.0), 0.0)
        conditionals.append(cond)
    outcomes = np.empty((count, n), dtype=np.int8)
    prices = np.empty((count, n), dtype=float)
    prefix = np.zeros(count, dtype=np.int64)
    for level in range(n):
        p = conditionals[level][prefix]
        y = (rng.random(count) < p).astype(np.int8)
        outcomes[:, level] = y
        prices[:, level] = p
        prefix = 2 * prefix + y
    return outcomes, prices


def _loop_final_capitals(skeptic, forecaster, outcomes, k0: float) -> np.ndarray:
    finals = np.empty(outcomes.shape[0])
    for i in range(outcomes.shape[0]):
        transcript = play_forecasting_game(
            forecaster, skeptic, SequenceReality(outcomes[i].tolist()),
            outcomes.shape[1], k0,
        )
        finals[i] = transcript.final_capital
    return finals


def markov_bound_estimate(
    skeptic,
    reality_dist: JointDistribution,
    alpha: float,
    replications: int,
    *,
    forecaster=None,
    k0: float = 1.0,
    seed: Optional[int] = None,
) -> MarkovBoundEstimate:
    """Estimate the exceedance probability by simulation.

    Reality samples from ``reality_dist`` and the forecaster (by default)
    quotes that same distribution's conditionals, so the capital process is
    a nonnegative martingale and the estimate should stay at or below
    ``alpha`` up to binomial noise.  Built-in skeptics are evaluated with
    their vectorized batch rule; custom skeptics fall back to playing each
    replication through the engine (slow for large runs).
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie strictly between 0 and 1")
    if replications < 1000:
        raise ValueError(
            "at least 1000 replications are required: fewer would be too "
            "noisy to assert the bound"
        )
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    threshold = k0 / alpha
    use_batch = hasattr(skeptic, "batch_final_capitals") and forecaster is None
    if forecaster is None and not use_batch:
        forecaster = forecaster_from_distribution(reality_dist)
    chunk = max(1, _CHUNK_ENTRIES // max(1, reality_dist.n))
    exceed = 0
    done = 0
    while done < replications:
        count = min(chunk, replications - done)
        outcomes, prices = _sample_outcomes_and_prices(reality_dist, rng, count)
        if use_batch:
            finals = skeptic.batch_final_capitals(prices, outcomes, k0)
        else:
            finals = _loop_final_capitals(skeptic, forecaster, outcomes, k0)
        exceed += int(np.count_nonzero(finals >= threshold))
        done += count
    estimate = exceed / replications
    std_error = math.sqrt(estimate * (1.0 - estimate) / replications)
    return MarkovBoundEstimate(estimate, std_error, alpha, replications, threshold, exceed)
