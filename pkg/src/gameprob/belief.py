"""Belief-function calculus over finite frames.

The semantic ground truth is a multivalued mapping: a finite probability
space whose outcomes each assert "the answer lies in this subset of the
frame".  Degrees of belief are probabilities pushed through the mapping,
``Bel(A) = P{x : image(x) is contained in A}``.  Mass functions -- weights
on subsets -- are the canonical interchange form, related to belief
functions by the subset-sum (zeta) transform and its Moebius inverse.

Combination operations condition a product source space: conditioning
discards outcomes with empty images, Dempster's rule intersects two bodies
of evidence and discards empty intersections, reporting the discarded
probability as the conflict.  Every combination result carries the list of
irrelevance judgements it presupposes; the calculus can record those
judgements but not verify them.

Subsets are bitmasks over the frame's label list (bit i = label i).  All
arithmetic is polymorphic: float weights for simulation, ``Fraction`` for
exact identities.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .engine import GameTranscript, play_forecasting_game
from .strategies import BuyOnlySkeptic, ConstantForecaster, format_weight, parse_weight

Weight = Union[float, Fraction]

MAX_FRAME_SIZE = 20
MAX_SOURCE_SIZE = 1 << 16

_FLOAT_MASS_TOLERANCE = 1e-9
_FLOAT_ZERO = 1e-12


class TotalConflictError(ValueError):
    """The bodies of evidence rule each other out entirely (conflict 1)."""

    def __init__(self, message: str, kappa=1):
        super().__init__(message)
        self.kappa = kappa


class NullBeliefEventError(ValueError):
    """Conditioning a source space on an event of probability zero."""


# -- irrelevance judgements -------------------------------------------------
#
# Machine-readable statements of what each operation assumes about the
# betting interpretation of its inputs.

TRANSFER_JUDGEMENTS = (
    "source probabilities cannot be beaten by a betting strategy",
    "learning how source outcomes constrain the frame does not help beat the source probabilities",
)

CONDITIONING_JUDGEMENTS = TRANSFER_JUDGEMENTS + (
    "beyond ruling out source outcomes with empty images, the observation does not help beat the source probabilities",
)

PRODUCT_JUDGEMENT = (
    "knowing either source's outcome would not help beat the other source's probabilities",
)

INDEPENDENT_COMBINATION_JUDGEMENTS = PRODUCT_JUDGEMENT + (
    "learning how both sources constrain their frames does not help beat either source's probabilities",
)

DEMPSTER_JUDGEMENTS = PRODUCT_JUDGEMENT + (
    "learning how both sources constrain the frame does not help beat the product probabilities, beyond revealing that the images intersect",
)


# -- frames and subsets ------------------------------------------------------


class Frame:
    """Ordered list of distinct outcome labels; subsets are bitmasks."""

    def __init__(self, labels: Sequence[str]):
        labels = tuple(str(label) for label in labels)
        if not labels:
            raise ValueError("frame needs at least one label")
        if len(labels) > MAX_FRAME_SIZE:
            raise ValueError(f"frame capacity is {MAX_FRAME_SIZE} labels, got {len(labels)}")
        if len(set(labels)) != len(labels):
            raise ValueError("frame labels must be distinct")
        for label in labels:
            if not label or any(c.isspace() for c in label) or "#" in label:
                raise ValueError(f"label {label!r} must be nonempty without whitespace or '#'")
        self.labels = labels
        self._index = {label: i for i, label in enumerate(labels)}

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def full_mask(self) -> int:
        return (1 << self.size) - 1

    def subset(self, members: Union[int, Iterable[str]]) -> int:
        """Bitmask for a subset given as a mask or an iterable of labels."""
        if isinstance(members, int):
            if not 0 <= members <= self.full_mask:
                raise ValueError(f"mask {members} out of range for this frame")
            return members
        mask = 0
        for label in members:
            try:
                mask |= 1 << self._index[label]
            except KeyError:
                raise ValueError(f"label {label!r} not in frame {self.labels}") from None
        return mask

    def members(self, mask: int) -> tuple:
        return tuple(label for i, label in enumerate(self.labels) if mask >> i & 1)

    def complement(self, mask: int) -> int:
        return self.full_mask & ~mask

    def describe(self, mask: int) -> str:
        return "{" + " ".join(self.members(mask)) + "}"

    def __eq__(self, other) -> bool:
        return isinstance(other, Frame) and self.labels == other.labels

    def __hash__(self) -> int:
        return hash(self.labels)

    def __repr__(self) -> str:
        return f"Frame({list(self.labels)!r})"

    def product(self, other: "Frame") -> "Frame":
        if self.size * other.size > MAX_FRAME_SIZE:
            raise ValueError(
                f"product frame would have {self.size * other.size} elements, "
                f"capacity is {MAX_FRAME_SIZE}"
            )
        labels = [f"{a}*{b}" for a in self.labels for b in other.labels]
        return Frame(labels)


def product_subset(mask1: int, mask2: int, size2: int) -> int:
    """Bitmask of the rectangle ``mask1 x mask2`` in the product frame.

    Product element (i, j) sits at bit ``i * size2 + j``, so each member i
    of the first subset contributes the second subset's pattern shifted
    into block i.
    """
    mask = 0
    i = 0
    remaining = mask1
    while remaining:
        if remaining & 1:
            mask |= mask2 << (i * size2)
        remaining >>= 1
        i += 1
    return mask


def zeta_transform(values: Sequence[Weight]) -> list:
    """Subset sums over the lattice: out[A] = sum of values[B] for B <= A."""
    out = list(values)
    n = len(out).bit_length() - 1
    for i in range(n):
        bit = 1 << i
        for mask in range(len(out)):
            if mask & bit:
                out[mask] = out[mask] + out[mask ^ bit]
    return out


def mobius_transform(values: Sequence[Weight]) -> list:
    """Inverse of :func:`zeta_transform`, exactly (no cancellation tricks)."""
    out = list(values)
    n = len(out).bit_length() - 1
    for i in range(n):
        bit = 1 << i
        for mask in range(len(out)):
            if mask & bit:
                out[mask] = out[mask] - out[mask ^ bit]
    return out


# -- sources and mappings ----------------------------------------------------


class SourceSpace:
    """Finite probability space carrying the evidence."""

    def __init__(self, outcomes: Sequence[str], weights: Sequence[Weight]):
        self.outcomes = tuple(str(o) for o in outcomes)
        self.weights = tuple(weights)
        if len(self.outcomes) != len(self.weights):
            raise ValueError("one weight per outcome required")
        if not self.outcomes:
            raise ValueError("source space needs at least one outcome")
        if len(self.outcomes) > MAX_SOURCE_SIZE:
            raise ValueError(f"source capacity is {MAX_SOURCE_SIZE} outcomes")
        if len(set(self.outcomes)) != len(self.outcomes):
            raise ValueError("source outcome names must be distinct")
        if any(w < 0 for w in self.weights):
            raise ValueError("source weights must be nonnegative")
        total = sum(self.weights)
        if isinstance(total, Fraction):
            if total != 1:
                raise ValueError(f"source weights must sum to 1 exactly, got {total}")
        elif abs(total - 1.0) > 1e-12:
            raise ValueError(f"source weights must sum to 1 within 1e-12, got {total!r}")

    @property
    def size(self) -> int:
        return len(self.outcomes)


class MultivaluedMapping:
    """A source space plus an image subset of the frame for every outcome.

    Empty images are allowed -- they represent source outcomes the observed
    evidence has ruled out -- but only :func:`condition_mapping` accepts
    them.
    """

    def __init__(self, source: SourceSpace, frame: Frame, images: Sequence[int]):
        self.source = source
        self.frame = frame
        self.images = tuple(frame.subset(img) if not isinstance(img, int) else img
                            for img in images)
        if len(self.images) != source.size:
            raise ValueError("one image subset per source outcome required")
        for image in self.images:
            if not 0 <= image <= frame.full_mask:
                raise ValueError(f"image mask {image} out of range for the frame")

    @classmethod
    def from_labels(cls, source: SourceSpace, frame: Frame,
                    images: Sequence[Iterable[str]]) -> "MultivaluedMapping":
        return cls(source, frame, [frame.subset(img) for img in images])

    @property
    def has_empty_images(self) -> bool:
        return any(image == 0 for image in self.images)

    def push_forward(self) -> "MassFunction":
        """Accumulate source weights on their image subsets.

        This is the canonical mass function of the mapping; it requires all
        images to be non-empty.
        """
        if self.has_empty_images:
            raise ValueError(
                "mapping has empty images; condition it instead of pushing forward"
            )
        masses: dict = {}
        for weight, image in zip(self.source.weights, self.images):
            if weight != 0:
                masses[image] = masses.get(image, weight * 0) + weight
        return MassFunction(self.frame, masses)


def canonical_mapping(mass: "MassFunction") -> MultivaluedMapping:
    """A mapping whose push-forward is exactly ``mass``: one source outcome
    per focal set, mapped to that focal set."""
    focal = sorted(mass.masses)
    source = SourceSpace(
        [f"s{i}" for i in range(len(focal))],
        [mass.masses[mask] for mask in focal],
    )
    return MultivaluedMapping(source, mass.frame, focal)


# -- mass and belief functions ------------------------------------------------


class MassFunction:
    """Nonnegative weights on non-empty subsets of a frame, summing to 1.

    ``conflict`` and ``judgements`` are provenance metadata attached by the
    combination operations; they default to absent.
    """

    def __init__(self, frame: Frame, masses: dict, *,
                 conflict: Optional[Weight] = None, judgements: tuple = ()):
        self.frame = frame
        cleaned: dict = {}
        for subset, weight in masses.items():
            mask = frame.subset(subset) if not isinstance(subset, int) else subset
            if not 0 <= mask <= frame.full_mask:
                raise ValueError(f"subset mask {mask} out of range for the frame")
            if weight < 0:
                raise ValueError(f"negative mass {weight!r} on {frame.describe(mask)}")
            if weight == 0:
                continue
            if mask == 0:
                raise ValueError("normalized mass functions assign nothing to the empty set")
            cleaned[mask] = cleaned.get(mask, weight * 0) + weight
        total = sum(cleaned.values())
        if isinstance(total, Fraction):
            if total != 1:
                raise ValueError(f"masses must sum to 1 exactly, got {total}")
        elif abs(total - 1.0) > _FLOAT_MASS_TOLERANCE:
            raise ValueError(f"masses must sum to 1 within 1e-9, got {total!r}")
        self.masses = cleaned
        self.conflict = conflict
        self.judgements = tuple(judgements)

    # -- constructors ------------------------------------------------------

    @classmethod
    def vacuous(cls, frame: Frame) -> "MassFunction":
        return cls(frame, {frame.full_mask: 1})

    @classmethod
    def bayesian(cls, frame: Frame, probabilities: Sequence[Weight]) -> "MassFunction":
        if len(probabilities) != frame.size:
            raise ValueError("one probability per frame label required")
        return cls(frame, {1 << i: p for i, p in enumerate(probabilities) if p != 0})

    @classmethod
    def categorical(cls, frame: Frame, subset) -> "MassFunction":
        mask = frame.subset(subset)
        if mask == 0:
            raise ValueError("categorical mass needs a non-empty subset")
        return cls(frame, {mask: 1})

    # -- queries -------------------------------------------------------------

    def focal_sets(self) -> tuple:
        return tuple(sorted(self.masses))

    def mass(self, subset) -> Weight:
        mask = self.frame.subset(subset)
        return self.masses.get(mask, 0)

    def is_bayesian(self) -> bool:
        return all(mask.bit_count() == 1 for mask in self.masses)

    def bel(self, subset) -> Weight:
        return bel_value(self, subset)

    def pl(self, subset) -> Weight:
        return plausibility(self, subset)

    def to_belief(self) -> "BeliefFunction":
        """Belief values for every subset, via the subset-sum transform."""
        dense = [0] * (1 << self.frame.size)
        for mask, weight in self.masses.items():
            dense[mask] = dense[mask] + weight
        return BeliefFunction(self.frame, zeta_transform(dense),
                              conflict=self.conflict, judgements=self.judgements)

    def __eq__(self, other) -> bool:
        return (isinstance(other, MassFunction) and self.frame == other.frame
                and self.masses == other.masses)

    def __repr__(self) -> str:
        parts = ", ".join(
            f"{self.frame.describe(mask)}: {self.masses[mask]}" for mask in sorted(self.masses)
        )
        return f"MassFunction({parts})"


class BeliefFunction:
    """Belief values for all ``2**n`` subsets of a frame.

    A valid table is the zeta transform of some mass function; use
    :func:`mass_from_belief` to recover it (and to detect invalid tables).
    """

    def __init__(self, frame: Frame, values: Sequence[Weight], *,
                 conflict: Optional[Weight] = None, judgements: tuple = ()):
        self.frame = frame
        self.values = list(values)
        if len(self.values) != 1 << frame.size:
            raise ValueError("belief table must cover every subset of the frame")
        self.conflict = conflict
        self.judgements = tuple(judgements)

    def value(self, subset) -> Weight:
        return self.values[self.frame.subset(subset)]

    def plausibility(self, subset) -> Weight:
        mask = self.frame.subset(subset)
        return 1 - self.values[self.frame.complement(mask)]

    def to_mass(self) -> MassFunction:
        return mass_from_belief(self)

    def __eq__(self, other) -> bool:
        return (isinstance(other, BeliefFunction) and self.frame == other.frame
                and self.values == other.values)

    def __repr__(self) -> str:
        return f"BeliefFunction(frame={self.frame!r}, {len(self.values)} subsets)"


def bel_value(mass: MassFunction, subset) -> Weight:
    """Total mass of non-empty focal sets contained in ``subset``."""
    mask = mass.frame.subset(subset)
    total = 0
    for focal, weight in mass.masses.items():
        if focal & ~mask == 0:
            total = total + weight
    return total


def plausibility(mass: MassFunction, subset) -> Weight:
    """One minus the belief in the complement: the upper counterpart."""
    mask = mass.frame.subset(subset)
    return 1 - bel_value(mass, mass.frame.complement(mask))


def mass_from_belief(belief: BeliefFunction) -> MassFunction:
    """Recover the unique mass function whose subset sums give ``belief``.

    Raises ``ValueError`` when the inversion produces a genuinely negative
    mass (the table was not a belief function); float noise within 1e-12
    is clamped to zero.
    """
    values = belief.values
    exact = any(isinstance(v, Fraction) for v in values)
    if values[0] != 0:
        if exact or abs(values[0]) > _FLOAT_ZERO:
            raise ValueError("input is not a belief function: belief in the empty set is nonzero")
    masses_dense = mobius_transform(values)
    masses: dict = {}
    for mask in range(1, len(masses_dense)):
        weight = masses_dense[mask]
        if weight == 0:
            continue
        if weight < 0:
            if exact or weight < -_FLOAT_ZERO:
                raise ValueError(
                    f"input is not a belief function: recovered mass "
                    f"{weight!r} on {belief.frame.describe(mask)} is negative"
                )
            continue
        if not exact and weight <= _FLOAT_ZERO:
            continue
        masses[mask] = weight
    return MassFunction(belief.frame, masses,
                        conflict=belief.conflict, judgements=belief.judgements)


# -- the four source-level operations -----------------------------------------


def belief_from_mapping(mapping: MultivaluedMapping) -> BeliefFunction:
    """Transfer source probabilities to the frame.

    ``Bel(A)`` is the probability of the source outcomes whose whole image
    lies inside A, computed directly from the defining formula.
    """
    if mapping.has_empty_images:
        raise ValueError(
            "mapping has empty images: the evidence rules source outcomes out; "
            "use condition_mapping instead"
        )
    size = 1 << mapping.frame.size
    values = [0] * size
    for mask in range(size):
        total = 0
        for weight, image in zip(mapping.source.weights, mapping.images):
            if image & ~mask == 0:
                total = total + weight
        values[mask] = total
    return BeliefFunction(mapping.frame, values, judgements=TRANSFER_JUDGEMENTS)


def condition_mapping(mapping: MultivaluedMapping) -> BeliefFunction:
    """Transfer after discarding source outcomes with empty images.

    The result divides by the probability that the image is non-empty; the
    discarded probability is attached as ``conflict``.
    """
    alive = sum(
        (w for w, img in zip(mapping.source.weights, mapping.images) if img != 0), 0
    )
    if alive == 0:
        raise NullBeliefEventError(
            "conditioning on null event: every source outcome has an empty image"
        )
    discarded = 1 - alive
    size = 1 << mapping.frame.size
    values = [0] * size
    for mask in range(size):
        total = 0
        for weight, image in zip(mapping.source.weights, mapping.images):
            if image != 0 and image & ~mask == 0:
                total = total + weight
        values[mask] = total / alive
    return BeliefFunction(mapping.frame, values, conflict=discarded,
                          judgements=CONDITIONING_JUDGEMENTS)


def _product_mapping(map1: MultivaluedMapping, map2: MultivaluedMapping,
                     frame: Frame, image_of_pair) -> MultivaluedMapping:
    outcomes = []
    weights = []
    images = []
    for name1, w1, img1 in zip(map1.source.outcomes, map1.source.weights, map1.images):
        for name2, w2, img2 in zip(map2.source.outcomes, map2.source.weights, map2.images):
            outcomes.append(f"{name1}|{name2}")
            weights.append(w1 * w2)
            images.append(image_of_pair(img1, img2))
    return MultivaluedMapping(SourceSpace(outcomes, weights), frame, images)


def independent_combination(map1: MultivaluedMapping,
                            map2: MultivaluedMapping) -> BeliefFunction:
    """Joint belief on the product frame from two independent sources.

    The product source measure pushes through the rectangle images
    ``image1 x image2``.  Capacity: the product frame keeps the usual
    subset-table limit.
    """
    if map1.has_empty_images or map2.has_empty_images:
        raise ValueError("independent combination requires non-empty images")
    frame = map1.frame.product(map2.frame)
    size2 = map2.frame.size
    product = _product_mapping(
        map1, map2, frame, lambda a, b: product_subset(a, b, size2)
    )
    belief = belief_from_mapping(product)
    return BeliefFunction(frame, belief.values,
                          judgements=INDEPENDENT_COMBINATION_JUDGEMENTS)


def dempster_combine_mappings(map1: MultivaluedMapping,
                              map2: MultivaluedMapping) -> BeliefFunction:
    """Combine two bodies of evidence about the same frame.

    Intersects the images over the product source and conditions on the
    intersection being non-empty.  The probability of an empty intersection
    is the conflict, reported on the result; conflict 1 is an error.
    """
    if map1.frame != map2.frame:
        raise ValueError("both mappings must target the same frame")
    if map1.has_empty_images or map2.has_empty_images:
        raise ValueError("combine requires non-empty images; condition each mapping first")
    product = _product_mapping(map1, map2, map1.frame, lambda a, b: a & b)
    kappa = sum(
        (w for w, img in zip(product.source.weights, product.images) if img == 0), 0
    )
    try:
        conditioned = condition_mapping(product)
    except NullBeliefEventError:
        raise TotalConflictError(
            "total conflict: the two bodies of evidence rule each other out (conflict 1)",
            kappa=kappa,
        ) from None
    return BeliefFunction(map1.frame, conditioned.values, conflict=kappa,
                          judgements=DEMPSTER_JUDGEMENTS)


def dempster_combine_masses(m1: MassFunction, m2: MassFunction) -> MassFunction:
    """Dempster's rule on the canonical mass representation.

    Convolves focal sets by intersection, discards the empty intersections,
    and renormalizes by one minus the conflict.  Agrees subset-by-subset
    with :func:`dempster_combine_mappings` on canonical mappings.
    """
    if m1.frame != m2.frame:
        raise ValueError("both mass functions must share a frame")
    combined: dict = {}
    kappa = 0
    for mask1, w1 in m1.masses.items():
        for mask2, w2 in m2.masses.items():
            product = w1 * w2
            inter = mask1 & mask2
            if inter == 0:
                kappa = kappa + product
            else:
                combined[inter] = combined.get(inter, product * 0) + product
    if not combined:
        raise TotalConflictError(
            "total conflict: the two bodies of evidence rule each other out (conflict 1)",
            kappa=kappa,
        )
    remaining = 1 - kappa
    if remaining <= 0:
        raise TotalConflictError(
            "total conflict: the two bodies of evidence rule each other out (conflict 1)",
            kappa=kappa,
        )
    normalized = {mask: weight / remaining for mask, weight in combined.items()}
    return MassFunction(m1.frame, normalized, conflict=kappa,
                        judgements=DEMPSTER_JUDGEMENTS)


# -- text format ---------------------------------------------------------------
#
# Mass file:                          Mapping file:
#
#     frame: a b c                        frame: a b
#     mass: 0.6 a                         source: 0.6 x1 -> a
#     mass: 0.4 a b c                     source: 0.4 x2 -> a b
#
# The weight comes first, then the member labels.  Optional lines:
# "unnormalized" permits (and renormalizes) totals off by more than 1e-9;
# "conflict:" and "judgement:" carry combination metadata and round-trip.


def mass_to_text(mass: MassFunction) -> str:
    lines = [f"frame: {' '.join(mass.frame.labels)}"]
    for mask in sorted(mass.masses):
        labels = " ".join(mass.frame.members(mask))
        lines.append(f"mass: {format_weight(mass.masses[mask])} {labels}".rstrip())
    if mass.conflict is not None:
        lines.append(f"conflict: {format_weight(mass.conflict)}")
    for judgement in mass.judgements:
        lines.append(f"judgement: {judgement}")
    return "\n".join(lines) + "\n"


def parse_mass_text(text: str, *, exact: bool = False) -> MassFunction:
    frame: Optional[Frame] = None
    entries: list = []
    conflict = None
    judgements: list[str] = []
    unnormalized = False
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line == "unnormalized":
            unnormalized = True
            continue
        key, sep, value = line.partition(":")
        if not sep:
            raise ValueError(f"malformed line {raw!r}")
        key = key.strip()
        value = value.strip()
        if key == "frame":
            frame = Frame(value.split())
        elif key == "mass":
            if frame is None:
                raise ValueError("frame must be declared before mass lines")
            parts = value.split()
            if not parts:
                raise ValueError(f"mass line needs a weight: {raw!r}")
            weight = parse_weight(parts[0], exact=exact)
            entries.append((frame.subset(parts[1:]), weight))
        elif key == "conflict":
            conflict = parse_weight(value, exact=exact)
        elif key == "judgement":
            judgements.append(value)
        else:
            raise ValueError(f"unknown directive {key!r}")
    if frame is None:
        raise ValueError("mass file must declare a frame")
    if not entries:
        raise ValueError("mass file has no mass lines")
    masses: dict = {}
    for mask, weight in entries:
        masses[mask] = masses.get(mask, weight * 0) + weight
    total = sum(masses.values())
    off = (total != 1) if isinstance(total, Fraction) else abs(total - 1.0) > _FLOAT_MASS_TOLERANCE
    if off:
        if not unnormalized:
            raise ValueError(
                f"masses sum to {total!r}, not 1; add an 'unnormalized' line to "
                f"accept and renormalize"
            )
        alive = total - masses.pop(0, 0)
        if alive == 0:
            raise ValueError("cannot normalize: all mass sits on the empty set")
        masses = {mask: w / alive for mask, w in masses.items() if mask != 0}
    elif 0 in masses:
        raise ValueError("normalized mass functions assign nothing to the empty set")
    return MassFunction(frame, masses, conflict=conflict, judgements=tuple(judgements))


def mapping_to_text(mapping: MultivaluedMapping) -> str:
    lines = [f"frame: {' '.join(mapping.frame.labels)}"]
    for name, weight, image in zip(
        mapping.source.outcomes, mapping.source.weights, mapping.images
    ):
        labels = " ".join(mapping.frame.members(image))
        lines.append(f"source: {format_weight(weight)} {name} -> {labels}".rstrip())
    return "\n".join(lines) + "\n"


def parse_mapping_text(text: str, *, exact: bool = False) -> MultivaluedMapping:
    frame: Optional[Frame] = None
    names: list[str] = []
    weights: list = []
    images: list[int] = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition(":")
        if not sep:
            raise ValueError(f"malformed line {raw!r}")
        key = key.strip()
        value = value.strip()
        if key == "frame":
            frame = Frame(value.split())
        elif key == "source":
            if frame is None:
                raise ValueError("frame must be declared before source lines")
            head, arrow, image_text = value.partition("->")
            if not arrow:
                raise ValueError(f"source line needs '->': {raw!r}")
            parts = head.split()
            if len(parts) != 2:
                raise ValueError(f"source line needs weight and name: {raw!r}")
            weights.append(parse_weight(parts[0], exact=exact))
            names.append(parts[1])
            images.append(frame.subset(image_text.split()))
        else:
            raise ValueError(f"unknown directive {key!r}")
    if frame is None:
        raise ValueError("mapping file must declare a frame")
    return MultivaluedMapping(SourceSpace(names, weights), frame, images)


# -- betting bridge -------------------------------------------------------------
#
# A belief function prices one-sided bets: buying a ticket on A costs
# Bel(A), and the ticket is honoured only when the evidence alone
# guarantees A.  Repeated independent draws from the source make this a
# forecasting game at the constant price Bel(A), which is why a buying-only
# strategy cannot expect to grow its capital.


class FocalSetReality:
    """Draw a focal set per round; the ticket pays 1 only when the drawn
    evidence entails the bet subset (the pessimistic resolution)."""

    def __init__(self, mass: MassFunction, subset, seed: Optional[int] = None):
        self.mask = mass.frame.subset(subset)
        focal = sorted(mass.masses)
        self._pays = np.array([float(f & ~self.mask == 0) for f in focal])
        self._cumulative = np.cumsum([float(mass.masses[f]) for f in focal])
        self._entropy = seed
        self._rng = None

    def reseed(self, entropy):
        self._entropy = entropy
        self._rng = None

    def begin_game(self):
        self._rng = None

    def _generator(self) -> np.random.Generator:
        if self._rng is None:
            self._rng = np.random.Generator(
                np.random.PCG64(np.random.SeedSequence(self._entropy))
            )
        return self._rng

    def __call__(self, history, price, stake):
        draw = self._generator().random() * self._cumulative[-1]
        index = int(np.searchsorted(self._cumulative, draw, side="right"))
        index = min(index, len(self._pays) - 1)
        return int(self._pays[index])


def one_sided_betting_game(
    mass: MassFunction,
    subset,
    skeptic,
    n_rounds: int,
    k0: float = 1.0,
    *,
    seed: Optional[int] = None,
) -> GameTranscript:
    """Bet repeatedly on ``subset`` at the price its belief sets.

    Only buying is offered: the skeptic's negative stakes are clamped to
    zero, and safety is enforced.  Against the pessimistic resolution the
    outcome is 1 with probability exactly ``Bel(subset)``, so the capital
    process is a nonnegative martingale.
    """
    price = float(bel_value(mass, subset))
    forecaster = ConstantForecaster(price)
    reality = FocalSetReality(mass, subset, seed)
    return play_forecasting_game(
        forecaster, BuyOnlySkeptic(skeptic), reality, n_rounds, k0,
        enforce_safety=True, seed=seed,
    )
