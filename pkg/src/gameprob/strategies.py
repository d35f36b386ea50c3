"""Player library for the betting protocols.

Forecasters, skeptics, reality strategies, and their market-game
counterparts.  Every strategy is a pure function of (parameters, seed,
observed history): instances carry no state between games, and the engine
calls ``begin_game()`` before round one so that stochastic streams and
incremental caches start fresh.

Random numbers come from numpy's PCG64 generator.  A strategy built with
seed ``s`` draws from ``SeedSequence(s)``; when a game is played with its
own seed, the engine reseeds each player with the substream
``(game_seed, role_index)``.  These choices are fixed so that reference
values pin down across platforms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

Weight = Union[float, Fraction]

MAX_DENSE_ROUNDS = 20


def _exact(value) -> Fraction:
    """Convert to an exact rational.

    Strings go through ``Fraction`` (so ``"0.3"`` means 3/10); floats map to
    their exact binary value.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return Fraction(value)
    return Fraction(value)


def bits_to_index(bits: Sequence[int]) -> int:
    """Sequence (y1, ..., yn) -> integer with y1 as the most significant bit."""
    index = 0
    for bit in bits:
        index = (index << 1) | int(bit)
    return index


def index_to_bits(index: int, n: int) -> tuple:
    return tuple((index >> (n - 1 - i)) & 1 for i in range(n))


class JointDistribution:
    """Probability distribution over binary outcome sequences of length n.

    Two storage forms:

    * dense -- a weight for each of the ``2**n`` sequences (n <= 20),
      indexed with the first outcome as the most significant bit;
    * iid   -- a single per-round success probability, for any n.  This
      form supports forecasting and sampling but not full enumeration
      unless first densified with :meth:`to_dense`.

    Weights may be floats or exact ``Fraction`` values; the normalization
    check is exact for rationals and within 1e-12 for floats.
    """

    def __init__(self, weights: Optional[Sequence[Weight]] = None, *,
                 theta: Optional[Weight] = None, n: Optional[int] = None):
        if (weights is None) == (theta is None):
            raise ValueError("provide either dense weights or an iid theta")
        if weights is not None:
            size = len(weights)
            n_bits = size.bit_length() - 1
            if size < 2 or size != 1 << n_bits:
                raise ValueError("dense weight table length must be a power of two >= 2")
            if n_bits > MAX_DENSE_ROUNDS:
                raise ValueError(f"dense storage capped at n = {MAX_DENSE_ROUNDS}")
            if n is not None and n != n_bits:
                raise ValueError("n inconsistent with weight table length")
            if any(w < 0 for w in weights):
                raise ValueError("weights must be nonnegative")
            total = sum(weights)
            if isinstance(total, Fraction):
                if total != 1:
                    raise ValueError(f"weights must sum to 1 exactly, got {total}")
            elif abs(total - 1.0) > 1e-12:
                raise ValueError(f"weights must sum to 1 within 1e-12, got {total!r}")
            self.n = n_bits
            self._table = list(weights)
            self._theta = None
            self._levels = self._build_levels()
        else:
            if n is None or n < 1:
                raise ValueError("iid form requires n >= 1")
            if theta < 0 or theta > 1:
                raise ValueError("theta must lie in [0, 1]")
            self.n = n
            self._table = None
            self._theta = theta
            self._levels = None

    # -- constructors -----------------------------------------------------

    @classmethod
    def from_weights(cls, weights: Sequence[Weight]) -> "JointDistribution":
        return cls(weights)

    @classmethod
    def iid(cls, theta: Weight, n: int) -> "JointDistribution":
        return cls(theta=theta, n=n)

    @classmethod
    def uniform(cls, n: int) -> "JointDistribution":
        return cls([Fraction(1, 1 << n)] * (1 << n))

    # -- basic properties --------------------------------------------------

    @property
    def is_dense(self) -> bool:
        return self._table is not None

    @property
    def theta(self):
        return self._theta

    def _build_levels(self) -> list:
        # levels[l][i] = probability of the length-l prefix with index i.
        levels = [None] * (self.n + 1)
        levels[self.n] = self._table
        for level in range(self.n - 1, -1, -1):
            below = levels[level + 1]
            levels[level] = [below[2 * i] + below[2 * i + 1] for i in range(1 << level)]
        return levels

    def to_dense(self) -> "JointDistribution":
        if self.is_dense:
            return self
        if self.n > MAX_DENSE_ROUNDS:
            raise ValueError(f"cannot densify: n = {self.n} exceeds {MAX_DENSE_ROUNDS}")
        theta = self._theta
        one = theta - theta + 1  # unit of the same number type
        weights = []
        for index in range(1 << self.n):
            ones = bin(index).count("1")
            weights.append(theta ** ones * (one - theta) ** (self.n - ones))
        return JointDistribution(weights)

    def as_exact(self) -> "JointDistribution":
        """Exact-rational copy: float weights become their exact binary
        rationals, renormalized so the total is exactly 1."""
        if self.is_dense:
            exact = [_exact(w) for w in self._table]
            total = sum(exact)
            if total == 0:
                raise ValueError("cannot normalize an all-zero table")
            return JointDistribution([w / total for w in exact])
        return JointDistribution(theta=_exact(self._theta), n=self.n)

    # -- queries ------------------------------------------------------------

    def prefix_probability(self, prefix: Sequence[int]):
        if len(prefix) > self.n:
            raise ValueError("prefix longer than the sequence length")
        if self.is_dense:
            return self._levels[len(prefix)][bits_to_index(prefix)]
        theta = self._theta
        one = theta - theta + 1
        prob = one
        for bit in prefix:
            prob = prob * (theta if bit else (one - theta))
        return prob

    def conditional(self, prefix: Sequence[int]):
        """P(next outcome = 1 | observed prefix)."""
        if len(prefix) >= self.n:
            raise ValueError("prefix already covers every round")
        if not self.is_dense:
            return self._theta
        level = len(prefix)
        index = bits_to_index(prefix)
        denom = self._levels[level][index]
        if denom == 0:
            raise ValueError("conditioning on null event: prefix has probability 0")
        return self._levels[level + 1][2 * index + 1] / denom

    def sequence_probability(self, bits: Sequence[int]):
        if len(bits) != self.n:
            raise ValueError(f"expected {self.n} outcomes, got {len(bits)}")
        return self.prefix_probability(bits)

    def weight(self, index: int):
        if self.is_dense:
            return self._table[index]
        return self.sequence_probability(index_to_bits(index, self.n))

    def sample(self, rng: np.random.Generator) -> tuple:
        """Draw one sequence, outcome by outcome via conditionals."""
        bits: list[int] = []
        for _ in range(self.n):
            p = self.conditional(bits)
            bits.append(int(rng.random() < float(p)))
        return tuple(bits)

    # -- table file format: "<bits> <weight>" per line ----------------------

    def to_table_lines(self) -> list[str]:
        if not self.is_dense:
            return self.to_dense().to_table_lines()
        lines = []
        for index, weight in enumerate(self._table):
            bits = "".join(str(b) for b in index_to_bits(index, self.n))
            lines.append(f"{bits} {format_weight(weight)}")
        return lines

    @classmethod
    def from_table_lines(cls, lines: Sequence[str], *, exact: bool = False) -> "JointDistribution":
        entries = {}
        n = None
        for raw in lines:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            bits_text, weight_text = line.split()
            if n is None:
                n = len(bits_text)
            elif len(bits_text) != n:
                raise ValueError("inconsistent sequence lengths in table")
            index = int(bits_text, 2)
            entries[index] = parse_weight(weight_text, exact=exact)
        if n is None:
            raise ValueError("empty table")
        zero = Fraction(0) if exact else 0.0
        weights = [entries.get(i, zero) for i in range(1 << n)]
        return cls(weights)


def format_weight(weight: Weight) -> str:
    if isinstance(weight, Fraction):
        return str(weight)
    return repr(float(weight))


def parse_weight(text: str, *, exact: bool = False) -> Weight:
    if "/" in text:
        return Fraction(text)
    if exact:
        return Fraction(text)
    return float(text)


# ---------------------------------------------------------------------------
# Forecasters


class ConstantForecaster:
    """Announce the same ticket price every round."""

    def __init__(self, price: Weight):
        if price < 0 or price > 1:
            raise ValueError("price must lie in [0, 1]")
        self.price = price

    def __call__(self, history):
        return self.price


class SequenceForecaster:
    """Announce a fixed list of prices, one per round.

    Values are not checked here: an out-of-domain entry surfaces as a
    protocol error naming the round when the game reaches it.
    """

    def __init__(self, prices: Sequence[Weight]):
        self.prices = tuple(prices)

    def __call__(self, history):
        return self.prices[len(history)]


class DistributionForecaster:
    """Price each round at the conditional probability of the next outcome
    under a joint distribution, given the outcomes observed so far."""

    def __init__(self, dist: JointDistribution):
        self.dist = dist

    def __call__(self, history):
        prefix = tuple(r.outcome for r in history)
        return self.dist.conditional(prefix)


def forecaster_from_distribution(dist: JointDistribution) -> DistributionForecaster:
    return DistributionForecaster(dist)


# ---------------------------------------------------------------------------
# Skeptics
#
# Built-in skeptics expose ``batch_final_capitals(prices, outcomes, k0)``
# alongside the per-round call: given an (R, N) outcome matrix and prices
# broadcastable to it, the method returns the R final capitals that playing
# each row would produce.  The scalar and batch paths apply the same
# per-round update, and the test suite pins their agreement.


def _broadcast_prices(prices, outcomes):
    prices = np.asarray(prices, dtype=float)
    if prices.ndim == 0:
        prices = np.full(outcomes.shape[1], float(prices))
    return prices


class ZeroSkeptic:
    """Never bets; capital stays put."""

    def __call__(self, history, price, capital):
        return 0

    def batch_final_capitals(self, prices, outcomes, k0: float = 1.0):
        outcomes = np.asarray(outcomes)
        return np.full(outcomes.shape[0], float(k0))


class FractionalSkeptic:
    """Stake a fixed fraction of current capital each round.

    Any fraction with absolute value at most 1 is safe at interior prices:
    ``fraction * capital`` always lies inside the safe interval.
    """

    def __init__(self, fraction: Weight):
        if abs(fraction) > 1:
            raise ValueError("fraction must satisfy |fraction| <= 1")
        self.fraction = fraction

    def __call__(self, history, price, capital):
        return self.fraction * capital

    def batch_final_capitals(self, prices, outcomes, k0: float = 1.0):
        outcomes = np.asarray(outcomes, dtype=float)
        prices = _broadcast_prices(prices, outcomes)
        lam = float(self.fraction)
        capital = np.full(outcomes.shape[0], float(k0))
        for j in range(outcomes.shape[1]):
            p = prices[j] if prices.ndim == 1 else prices[:, j]
            capital = capital + (lam * capital) * (outcomes[:, j] - p)
        return capital

    def as_exact(self) -> "FractionalSkeptic":
        return FractionalSkeptic(_exact(self.fraction))


class AllInSkeptic:
    """Stake the entire safe budget on one outcome every round.

    side=1 buys ``capital / price`` tickets (betting the outcome happens);
    side=0 sells ``capital / (1 - price)`` tickets.  At the degenerate
    price where the budget is unbounded (free tickets for side=1, sure
    tickets for side=0) the stake is fixed at ``±capital``.
    """

    def __init__(self, side: int = 1):
        if side not in (0, 1):
            raise ValueError("side must be 0 or 1")
        self.side = side

    def __call__(self, history, price, capital):
        if self.side == 1:
            return capital / price if price > 0 else capital
        return -capital / (1 - price) if price < 1 else -capital

    def batch_final_capitals(self, prices, outcomes, k0: float = 1.0):
        outcomes = np.asarray(outcomes, dtype=float)
        prices = _broadcast_prices(prices, outcomes)
        capital = np.full(outcomes.shape[0], float(k0))
        for j in range(outcomes.shape[1]):
            p = prices[j] if prices.ndim == 1 else prices[:, j]
            p = np.broadcast_to(p, capital.shape)
            if self.side == 1:
                stake = np.where(p > 0, capital / np.where(p > 0, p, 1.0), capital)
            else:
                q = 1.0 - p
                stake = np.where(q > 0, -capital / np.where(q > 0, q, 1.0), -capital)
            capital = capital + stake * (outcomes[:, j] - p)
        return capital

    def as_exact(self) -> "AllInSkeptic":
        return self


class LlnSkeptic:
    """Two-sided fractional mixture that profits from miscalibration.

    Half the initial capital runs a +epsilon fractional strategy, half runs
    -epsilon; the stake each round is the sum of the two accounts' stakes.
    Each account stays individually nonnegative, and since
    ``log(1 + x) >= x - x**2`` for ``|x| <= 1/2`` the total satisfies::

        K_N >= (k0 / 2) * exp(epsilon * |sum(y - p)| - epsilon**2 * N)

    so the capital explodes unless outcome frequencies track the announced
    prices.  Requires ``0 < epsilon <= 1/2``.
    """

    def __init__(self, epsilon: Weight):
        if not 0 < epsilon <= Fraction(1, 2):
            raise ValueError("epsilon must lie in (0, 1/2]")
        self.epsilon = epsilon
        self._synced_rounds: Optional[int] = None
        self._plus = None
        self._minus = None

    def begin_game(self):
        self._synced_rounds = None

    def _account_values(self, history, capital):
        """Both account values after ``history``; O(1) amortized per round.

        The cache only extends forward; any history that is not a
        continuation of the cached prefix is recomputed from scratch, so the
        result is a pure function of the inputs.
        """
        n = len(history)
        if self._synced_rounds is None or self._synced_rounds > n:
            if n == 0:
                start = capital
            else:
                first = history[0]
                start = first.capital_after - first.stake * (first.outcome - first.price)
            half = start / 2
            self._plus, self._minus, self._synced_rounds = half, half, 0
        eps = self.epsilon
        for rnd in history[self._synced_rounds:n]:
            move = rnd.outcome - rnd.price
            self._plus = self._plus + eps * self._plus * move
            self._minus = self._minus - eps * self._minus * move
        self._synced_rounds = n
        return self._plus, self._minus

    def __call__(self, history, price, capital):
        plus, minus = self._account_values(history, capital)
        return self.epsilon * (plus - minus)

    def batch_final_capitals(self, prices, outcomes, k0: float = 1.0):
        outcomes = np.asarray(outcomes, dtype=float)
        prices = _broadcast_prices(prices, outcomes)
        eps = float(self.epsilon)
        plus = np.full(outcomes.shape[0], float(k0) / 2)
        minus = plus.copy()
        for j in range(outcomes.shape[1]):
            p = prices[j] if prices.ndim == 1 else prices[:, j]
            move = outcomes[:, j] - p
            plus = plus + eps * plus * move
            minus = minus - eps * minus * move
        return plus + minus

    def guarantee_lower_bound(self, prices, outcomes, k0: float = 1.0) -> float:
        """The analytic capital floor for the given price/outcome sequences."""
        drift = sum(y - p for y, p in zip(outcomes, prices))
        eps = float(self.epsilon)
        return (float(k0) / 2) * math.exp(eps * abs(float(drift)) - eps * eps * len(prices))

    def as_exact(self) -> "LlnSkeptic":
        return LlnSkeptic(_exact(self.epsilon))


def skeptic_fractional(fraction: Weight) -> FractionalSkeptic:
    return FractionalSkeptic(fraction)


def skeptic_lln(epsilon: Weight) -> LlnSkeptic:
    return LlnSkeptic(epsilon)


class BuyOnlySkeptic:
    """Restrict another skeptic to buying: negative stakes become 0."""

    def __init__(self, inner):
        self.inner = inner

    def begin_game(self):
        if hasattr(self.inner, "begin_game"):
            self.inner.begin_game()

    def reseed(self, entropy):
        if hasattr(self.inner, "reseed"):
            self.inner.reseed(entropy)

    def __call__(self, history, price, capital):
        stake = self.inner(history, price, capital)
        return stake if stake > 0 else 0


# ---------------------------------------------------------------------------
# Realities


class IidReality:
    """Outcomes drawn i.i.d. Bernoulli(theta), ignoring history."""

    def __init__(self, theta: float, seed: Optional[int] = None):
        if theta < 0 or theta > 1:
            raise ValueError("theta must lie in [0, 1]")
        self.theta = theta
        self._entropy = seed
        self._rng = None

    def reseed(self, entropy):
        self._entropy = entropy
        self._rng = None

    def begin_game(self):
        # Restart the stream so identical games replay identically.
        self._rng = None

    def _generator(self) -> np.random.Generator:
        if self._rng is None:
            self._rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(self._entropy)))
        return self._rng

    def __call__(self, history, price, stake):
        return int(self._generator().random() < float(self.theta))


def reality_iid(theta: float, seed: Optional[int] = None) -> IidReality:
    return IidReality(theta, seed)


class SequenceReality:
    """Play back a fixed outcome sequence."""

    def __init__(self, outcomes: Sequence[int]):
        outcomes = tuple(int(y) for y in outcomes)
        if any(y not in (0, 1) for y in outcomes):
            raise ValueError("outcomes must be 0 or 1")
        self.outcomes = outcomes

    def __call__(self, history, price, stake):
        return self.outcomes[len(history)]


class BankruptingReality:
    """Always move against the skeptic's stake.

    Chooses 0 when the stake is positive and 1 when it is negative, so the
    skeptic's capital can never increase.  A zero stake is payoff-neutral;
    the tie-break is fixed at 1 to keep runs deterministic.
    """

    def __call__(self, history, price, stake):
        if stake > 0:
            return 0
        return 1


def reality_bankrupting() -> BankruptingReality:
    return BankruptingReality()


# ---------------------------------------------------------------------------
# Market-game players


class ConstantPrice:
    """Quote the same nonnegative price, usable for open or close."""

    def __init__(self, price: float):
        if price < 0:
            raise ValueError("price must be nonnegative")
        self.price = price

    def __call__(self, history, *context):
        return self.price


class SequencePrice:
    """Quote a fixed list of prices, one per round.

    Values are not checked here: a negative entry surfaces as a protocol
    error naming the round when the game reaches it.
    """

    def __init__(self, prices: Sequence[float]):
        self.prices = tuple(prices)

    def __call__(self, history, *context):
        return self.prices[len(history)]


class ConstantPosition:
    """Take the same long/short position every round."""

    def __init__(self, position: float):
        self.position = position

    def __call__(self, history, open_price, capital):
        return self.position


class ZeroPosition:
    def __call__(self, history, open_price, capital):
        return 0


# ---------------------------------------------------------------------------
# Descriptors and the strategy registry
#
# The registry names below are the stable contract used by the CLI and by
# descriptor files.  Text form: "name" or "name:key=value,key=value".

ROLES = ("forecaster", "skeptic", "reality", "market-open", "speculator", "market-close")


@dataclass(frozen=True)
class StrategyDescriptor:
    """Serializable recipe for a player: role, registry name, parameters."""

    role: str
    name: str
    params: tuple = ()
    seed: Optional[int] = None

    def param_dict(self) -> dict:
        return dict(self.params)

    def to_string(self) -> str:
        parts = [f"{key}={value}" for key, value in self.params]
        if self.seed is not None:
            parts.append(f"seed={self.seed}")
        if parts:
            return f"{self.name}:{','.join(parts)}"
        return self.name

    @classmethod
    def from_string(cls, role: str, text: str) -> "StrategyDescriptor":
        if role not in ROLES:
            raise ValueError(f"unknown role {role!r}; roles are {', '.join(ROLES)}")
        name, _, param_text = text.partition(":")
        name = name.strip()
        params = []
        seed = None
        if param_text:
            for item in param_text.split(","):
                key, sep, value = item.partition("=")
                if not sep:
                    raise ValueError(f"malformed parameter {item!r} (expected key=value)")
                key = key.strip()
                value = value.strip()
                if key == "seed":
                    seed = int(value)
                else:
                    params.append((key, value))
        return cls(role, name, tuple(params), seed)


def _num(value, exact: bool):
    if exact:
        return _exact(value)
    if isinstance(value, str):
        return float(Fraction(value)) if "/" in value else float(value)
    return float(value)


def _bits(value) -> tuple:
    if isinstance(value, str):
        return tuple(int(c) for c in value)
    return tuple(int(v) for v in value)


def _numlist(value, exact: bool) -> tuple:
    if isinstance(value, str):
        parts = value.split(";")
    else:
        parts = list(value)
    return tuple(_num(part, exact) for part in parts)


def _build_forecaster(name, params, seed, exact):
    if name == "constant":
        return ConstantForecaster(_num(params.get("p", "0.5"), exact))
    if name == "sequence":
        return SequenceForecaster(_numlist(params["values"], exact))
    raise KeyError(name)


def _build_skeptic(name, params, seed, exact):
    if name == "zero":
        return ZeroSkeptic()
    if name == "fractional":
        return FractionalSkeptic(_num(params["lam"], exact))
    if name == "lln":
        return LlnSkeptic(_num(params["eps"], exact))
    if name == "allin":
        return AllInSkeptic(int(params.get("side", 1)))
    raise KeyError(name)


def _build_reality(name, params, seed, exact):
    if name == "iid":
        return IidReality(_num(params["theta"], False), seed)
    if name == "bankrupting":
        return BankruptingReality()
    if name == "sequence":
        return SequenceReality(_bits(params["values"]))
    raise KeyError(name)


def _build_price(name, params, seed, exact):
    if name == "constant":
        return ConstantPrice(_num(params["price"], exact))
    if name == "sequence":
        return SequencePrice(_numlist(params["values"], exact))
    raise KeyError(name)


def _build_speculator(name, params, seed, exact):
    if name == "zero":
        return ZeroPosition()
    if name == "constant":
        return ConstantPosition(_num(params["position"], exact))
    raise KeyError(name)


_BUILDERS = {
    "forecaster": _build_forecaster,
    "skeptic": _build_skeptic,
    "reality": _build_reality,
    "market-open": _build_price,
    "speculator": _build_speculator,
    "market-close": _build_price,
}

#: Registry names per role, the stable CLI contract.
REGISTRY = {
    "forecaster": ("constant", "sequence"),
    "skeptic": ("zero", "fractional", "lln", "allin"),
    "reality": ("iid", "bankrupting", "sequence"),
    "market-open": ("constant", "sequence"),
    "speculator": ("zero", "constant"),
    "market-close": ("constant", "sequence"),
}


def build_strategy(descriptor: StrategyDescriptor, *, exact: bool = False):
    """Instantiate a registered strategy from its descriptor.

    With ``exact`` set, numeric parameters become ``Fraction`` values so the
    strategy's moves stay exact in rational-mode games.
    """
    builder = _BUILDERS.get(descriptor.role)
    if builder is None:
        raise ValueError(f"unknown role {descriptor.role!r}")
    try:
        return builder(descriptor.name, descriptor.param_dict(), descriptor.seed, exact)
    except KeyError:
        names = ", ".join(REGISTRY[descriptor.role])
        raise ValueError(
            f"unknown {descriptor.role} strategy {descriptor.name!r}; "
            f"registered names: {names}"
        ) from None


#: Representative safe-skeptic suite used by enumeration checks: every
#: member keeps its stake inside the safe interval on any history.
def built_in_safe_skeptics() -> list:
    return [
        ZeroSkeptic(),
        FractionalSkeptic(0.5),
        FractionalSkeptic(-0.5),
        FractionalSkeptic(1),
        FractionalSkeptic(-1),
        LlnSkeptic(0.25),
        LlnSkeptic(0.5),
        AllInSkeptic(1),
        AllInSkeptic(0),
    ]
