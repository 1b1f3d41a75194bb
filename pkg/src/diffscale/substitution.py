"""Symbolic substitution rules, their fixed points, and geometric realisations.

A rule maps letters to words; iterating the squared rule on a legal
two-letter seed around a marked origin produces two-sided fixed points,
which are realised geometrically by assigning each letter its natural tile
length (left Perron-Frobenius eigenvector).  The catalogue collects every
rule used elsewhere in the package.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .algebra import (
    AlgebraicNumber,
    QuadraticOrder,
    golden_order,
    is_primitive,
    metallic_order,
    spectral_data,
)

MAX_WORD_LETTERS = 10**7


class SeedError(ValueError):
    """Raised for seeds that cannot start a two-sided fixed point."""


@dataclass(frozen=True)
class SubstitutionRule:
    """A primitive substitution on a finite alphabet.

    images maps each letter to its image word (a string over the alphabet).
    lengths, when given, assigns each letter an exact tile length
    (int, Fraction or AlgebraicNumber); float_lengths mirrors them as floats.
    """

    name: str
    alphabet: tuple[str, ...]
    images: dict[str, str]
    lengths: dict[str, object] | None = None
    weights: dict[str, float] | None = None

    def __post_init__(self):
        for letter in self.alphabet:
            if letter not in self.images:
                raise ValueError(f"no image for letter {letter!r}")
        for letter, word in self.images.items():
            bad = set(word) - set(self.alphabet)
            if bad:
                raise ValueError(f"image of {letter!r} uses unknown letters {bad}")
        if not is_primitive(self.matrix()):
            raise ValueError(f"substitution {self.name!r} is not primitive")

    def matrix(self) -> tuple[tuple[int, ...], ...]:
        """Abelianisation: entry [i][j] counts letter i in the image of letter j."""
        return tuple(
            tuple(self.images[col].count(row) for col in self.alphabet)
            for row in self.alphabet
        )

    def apply(self, word: str) -> str:
        return "".join(self.images[c] for c in word)

    def inflation_factor(self) -> float:
        return spectral_data(self.matrix()).pf_value

    def natural_lengths(self) -> dict[str, float]:
        """Tile lengths from the left PF eigenvector, minimal entry 1."""
        if self.lengths is not None:
            return {c: float(v) for c, v in self.lengths.items()}
        left = spectral_data(self.matrix()).left
        return {c: float(left[i]) for i, c in enumerate(self.alphabet)}

    def exact_lengths(self):
        return dict(self.lengths) if self.lengths is not None else None

    def legal_pairs(self) -> set[str]:
        """Two-letter factors of the substitution language."""
        pairs: set[str] = set()
        word = self.alphabet[0]
        for _ in range(32):
            word = self.apply(word)
            if len(word) > 50_000:
                word = word[:50_000]
            new = {word[i : i + 2] for i in range(len(word) - 1)}
            if new <= pairs:
                break
            pairs |= new
        # close under the substitution action on pairs
        changed = True
        while changed:
            changed = False
            for p in list(pairs):
                img = self.apply(p)
                for i in range(len(img) - 1):
                    q = img[i : i + 2]
                    if q not in pairs:
                        pairs.add(q)
                        changed = True
        return pairs


def fixed_point_word(rule: SubstitutionRule, seed: str, n: int) -> "TwoSidedWord":
    """Two-sided word of the squared rule applied n times to a legal seed.

    seed is a two-letter string x|y: x ends the left half, y starts the right
    half.  Legality requires xy to be a factor of the language and the squared
    images of x and y to end in x and begin with y, so iteration converges to
    a genuine fixed point around the marked origin.
    """
    if len(seed) != 2:
        raise SeedError(f"seed must have exactly two letters, got {seed!r}")
    x, y = seed[0], seed[1]
    if seed not in rule.legal_pairs():
        raise SeedError(f"seed word {seed!r} is not a factor of the {rule.name!r} language")
    sq = {c: rule.apply(rule.images[c]) for c in rule.alphabet}
    if not sq[x].endswith(x):
        raise SeedError(f"squared image of {x!r} does not end in {x!r}; seed {seed!r} is not extendable")
    if not sq[y].startswith(y):
        raise SeedError(f"squared image of {y!r} does not start with {y!r}; seed {seed!r} is not extendable")
    left, right = x, y  # left half stored in natural order
    for _ in range(n):
        left = "".join(sq[c] for c in left)
        right = "".join(sq[c] for c in right)
        if len(left) + len(right) > MAX_WORD_LETTERS:
            raise MemoryError(
                f"fixed point word exceeds {MAX_WORD_LETTERS} letters; lower the iteration count"
            )
    return TwoSidedWord(left=left, right=right)


@dataclass(frozen=True)
class TwoSidedWord:
    """A finite two-sided word ... left | right ... with the origin between halves."""

    left: str
    right: str

    def __len__(self):
        return len(self.left) + len(self.right)

    def letters(self):
        """Letters with signed positions: index 0 is the first right letter."""
        for i, c in enumerate(reversed(self.left)):
            yield (-i - 1, c)
        for i, c in enumerate(self.right):
            yield (i, c)


@dataclass
class TypedPatch:
    """Left tile endpoints with their types on a segment around the origin.

    positions holds (coordinate, letter) sorted by coordinate; coordinates are
    exact (Fraction or AlgebraicNumber) when the realisation lengths are, and
    floats otherwise.  radius is the covered half-width: every tile endpoint
    in [-radius, radius] is present.
    """

    positions: list
    radius: float

    def __len__(self):
        return len(self.positions)

    def floats(self) -> np.ndarray:
        return np.array([float(p) for p, _ in self.positions])

    def types(self) -> list[str]:
        return [c for _, c in self.positions]

    def restrict(self, radius: float) -> "TypedPatch":
        if radius > self.radius:
            raise ValueError(f"patch only covers radius {self.radius}, asked for {radius}")
        kept = [(p, c) for p, c in self.positions if abs(float(p)) <= radius]
        return TypedPatch(kept, radius)

    def to_csv(self, path) -> None:
        """Write position,type with 17 significant digits, plus exact (a, b)
        coefficient columns when positions are algebraic numbers."""
        algebraic = self.positions and isinstance(self.positions[0][0], AlgebraicNumber)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            if algebraic:
                w.writerow(["position", "type", "a", "b"])
                for p, c in self.positions:
                    w.writerow([format(float(p), ".17g"), c, str(p.a), str(p.b)])
            else:
                w.writerow(["position", "type"])
                for p, c in self.positions:
                    w.writerow([format(float(p), ".17g"), c])


def geometric_patch(word: TwoSidedWord, lengths: dict) -> TypedPatch:
    """Realise a two-sided word as tiles, marking left endpoints.

    The tile of the first right letter starts at the origin.  Lengths may be
    exact (Fraction / AlgebraicNumber) or floats; positions inherit the type.
    """
    for letter, val in lengths.items():
        if float(val) <= 0:
            raise ValueError(f"tile length for {letter!r} must be positive")
    positions = []
    pos = None
    for c in word.right:
        pos = lengths[c] * 0 if pos is None else pos  # zero of the right type
        positions.append((pos, c))
        pos = pos + lengths[c]
    right_extent = float(pos) if pos is not None else 0.0
    pos = None
    for c in reversed(word.left):
        pos = lengths[c] * 0 if pos is None else pos
        pos = pos - lengths[c]
        positions.append((pos, c))
    left_extent = -float(pos) if pos is not None else 0.0
    positions.sort(key=lambda t: float(t[0]))
    radius = min(left_extent, right_extent)
    return TypedPatch(positions, radius)


def substitution_patch(rule: SubstitutionRule, seed: str, radius: float) -> TypedPatch:
    """Fixed-point patch covering [-radius, radius], iterated just far enough."""
    lengths = rule.exact_lengths() or rule.natural_lengths()
    shortest = min(float(v) for v in lengths.values())
    for n in range(1, 40):
        word = fixed_point_word(rule, seed, n)
        if min(len(word.left), len(word.right)) * shortest > radius + 1:
            patch = geometric_patch(word, lengths)
            if patch.radius >= radius:
                return patch.restrict(radius)
    raise MemoryError(f"cannot cover radius {radius} within the letter budget")


# ---------------------------------------------------------------------------
# catalogue


def _golden_lengths() -> dict[str, AlgebraicNumber]:
    tau = golden_order().generator
    return {"a": tau, "b": tau**0}


def fibonacci_rule() -> SubstitutionRule:
    return SubstitutionRule(
        "fibonacci", ("a", "b"), {"a": "ab", "b": "a"}, lengths=_golden_lengths()
    )


def noble_rule(p: int) -> SubstitutionRule:
    """Noble means family a -> a^p b, b -> a with inflation lambda_p."""
    if p < 1:
        raise ValueError("p must be >= 1")
    if p == 1:
        return fibonacci_rule()
    lam = metallic_order(p).generator
    return SubstitutionRule(
        f"noble({p})", ("a", "b"), {"a": "a" * p + "b", "b": "a"},
        lengths={"a": lam, "b": lam**0},
    )


def period_doubling_rule() -> SubstitutionRule:
    return SubstitutionRule(
        "period_doubling", ("a", "b"), {"a": "ab", "b": "aa"},
        lengths={"a": Fraction(1), "b": Fraction(1)},
    )


def limit_quasiperiodic_rule() -> SubstitutionRule:
    """a -> aab, b -> abab; inflation 2 + sqrt(2), determinant 2."""
    order = QuadraticOrder(4, -2)  # theta = 2 + sqrt(2)
    theta = order.generator
    return SubstitutionRule(
        "limit_quasiperiodic", ("a", "b"), {"a": "aab", "b": "abab"},
        lengths={"a": theta**0, "b": theta - 2},
    )


def kolakoski31_rule() -> SubstitutionRule:
    """Kolakoski(3,1) companion a -> abc, b -> ab, c -> b (cubic inflation)."""
    rule = SubstitutionRule("kolakoski31", ("a", "b", "c"), {"a": "abc", "b": "ab", "c": "b"})
    lam = spectral_data(rule.matrix()).pf_value
    lengths = {"a": lam * (lam - 1), "b": lam, "c": 1.0}
    return SubstitutionRule(rule.name, rule.alphabet, rule.images, lengths=lengths)


def plastic_rule() -> SubstitutionRule:
    """Smallest Pisot ternary rule a -> b, b -> c, c -> ab (x^3 = x + 1)."""
    rule = SubstitutionRule("plastic", ("a", "b", "c"), {"a": "b", "b": "c", "c": "ab"})
    lam = spectral_data(rule.matrix()).pf_value
    lengths = {"a": 1.0, "b": lam, "c": lam * lam}
    return SubstitutionRule(rule.name, rule.alphabet, rule.images, lengths=lengths)


def thue_morse_rule() -> SubstitutionRule:
    return SubstitutionRule(
        "thue_morse", ("a", "b"), {"a": "ab", "b": "ba"},
        lengths={"a": Fraction(1), "b": Fraction(1)},
        weights={"a": 1.0, "b": -1.0},
    )


def gtm_rule(p: int, q: int) -> SubstitutionRule:
    """Generalised Thue-Morse family a -> a^p b^q, b -> b^p a^q."""
    if p < 1 or q < 1:
        raise ValueError("p and q must be >= 1")
    return SubstitutionRule(
        f"gtm({p},{q})", ("a", "b"),
        {"a": "a" * p + "b" * q, "b": "b" * p + "a" * q},
        lengths={"a": Fraction(1), "b": Fraction(1)},
        weights={"a": 1.0, "b": -1.0},
    )


def rudin_shapiro_rule() -> SubstitutionRule:
    """Four-letter Rudin-Shapiro rule; a, b carry weight +1 and c, d weight -1."""
    return SubstitutionRule(
        "rudin_shapiro", ("a", "b", "c", "d"),
        {"a": "ab", "b": "ac", "c": "db", "d": "dc"},
        lengths={c: Fraction(1) for c in "abcd"},
        weights={"a": 1.0, "b": 1.0, "c": -1.0, "d": -1.0},
    )


CATALOGUE = {
    "fibonacci": fibonacci_rule,
    "period_doubling": period_doubling_rule,
    "limit_quasiperiodic": limit_quasiperiodic_rule,
    "kolakoski31": kolakoski31_rule,
    "plastic": plastic_rule,
    "thue_morse": thue_morse_rule,
    "rudin_shapiro": rudin_shapiro_rule,
}


def default_seed(rule: SubstitutionRule) -> str:
    """Lexicographically first legal seed that extends to a fixed point."""
    sq = {c: rule.apply(rule.images[c]) for c in rule.alphabet}
    for pair in sorted(rule.legal_pairs()):
        x, y = pair
        if sq[x].endswith(x) and sq[y].startswith(y):
            return pair
    raise SeedError(f"no extendable seed for {rule.name!r}")


def catalogue(name: str, **params) -> SubstitutionRule:
    """Look up a rule by name; noble and gtm take parameters p (and q)."""
    if name == "noble":
        return noble_rule(int(params.get("p", 2)))
    if name == "gtm":
        return gtm_rule(int(params.get("p", 2)), int(params.get("q", 1)))
    try:
        factory = CATALOGUE[name]
    except KeyError:
        raise KeyError(
            f"unknown rule {name!r}; available: {sorted(CATALOGUE)} plus noble(p), gtm(p,q)"
        ) from None
    return factory()


def rudin_shapiro_weights(n: int) -> np.ndarray:
    """First n Rudin-Shapiro weights (+-1), from the four-letter fixed point."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if n > MAX_WORD_LETTERS:
        raise MemoryError(f"n exceeds the {MAX_WORD_LETTERS} letter budget")
    rule = rudin_shapiro_rule()
    word = "a"
    while len(word) < n:
        word = rule.apply(word)
    return np.array([rule.weights[c] for c in word[:n]])


def bernoullise(weights: np.ndarray, p: float, rng: np.random.Generator) -> np.ndarray:
    """Flip the sign of each weight independently with probability p."""
    if not 0 <= p <= 1:
        raise ValueError("flip probability must lie in [0, 1]")
    flips = rng.random(len(weights)) < p
    out = np.array(weights, dtype=float, copy=True)
    out[flips] *= -1.0
    return out
