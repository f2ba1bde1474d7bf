"""Mamdani fuzzy inference for opinion strength.

Opinion-word magnitudes ``|polarity|`` are fuzzified into LOW / MODERATE /
HIGH triangles, rules fire with min-AND, consequents are clipped and merged
with max, and the merged set is defuzzified by its sampled centroid.
Orientation (sign) is carried separately from strength.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

VARIABLES = ("adv", "adj", "verb", "noun")
DEFAULT_RESOLUTION = 1000


class FuzzyError(Exception):
    pass


class DomainError(FuzzyError, ValueError):
    pass


class NoApplicableRule(FuzzyError):
    pass


class ZeroArea(FuzzyError):
    pass


class NoOpinionWords(FuzzyError):
    pass


class Level(str, enum.Enum):
    LOW = "LOW"
    MODERATE = "MODERATE"
    HIGH = "HIGH"

    def __str__(self):
        return self.value


class Granularity(str, enum.Enum):
    VERY_WEAK = "very weak"
    WEAK = "weak"
    MODERATE = "moderate"
    STRONG = "strong"
    VERY_STRONG = "very strong"

    def __str__(self):
        return self.value


GRANULARITY_BOUNDS = (
    (0.2, Granularity.VERY_WEAK),
    (0.4, Granularity.WEAK),
    (0.6, Granularity.MODERATE),
    (0.8, Granularity.STRONG),
)


@dataclass(frozen=True)
class TriangularMf:
    a: float
    b: float
    c: float

    def __post_init__(self):
        if not self.a <= self.b <= self.c:
            raise ValueError(f"triangle needs a <= b <= c, got {self.a}, {self.b}, {self.c}")

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        a, b, c = self.a, self.b, self.c
        with np.errstate(divide="ignore", invalid="ignore"):
            rise = (x - a) / (b - a) if b > a else np.ones_like(x)
            fall = (c - x) / (c - b) if c > b else np.ones_like(x)
        mu = np.clip(np.minimum(rise, fall), 0.0, 1.0)
        mu = np.where((x < a) | (x > c), 0.0, mu)
        return mu if mu.ndim else float(mu)

    def centroid(self) -> float:
        return (self.a + self.b + self.c) / 3.0


DEFAULT_SETS = {
    Level.LOW: TriangularMf(0.0, 0.0, 0.5),
    Level.MODERATE: TriangularMf(0.0, 0.5, 1.0),
    Level.HIGH: TriangularMf(0.5, 1.0, 1.0),
}


@dataclass(frozen=True)
class Rule:
    antecedent: tuple[tuple[str, Level], ...]
    consequent: Level

    def __post_init__(self):
        if not self.antecedent:
            raise ValueError("rule antecedent must not be empty")
        ante = tuple((v, Level(lv)) for v, lv in self.antecedent)
        for v, _ in ante:
            if v not in VARIABLES:
                raise ValueError(f"unknown input variable {v!r}")
        if len({v for v, _ in ante}) != len(ante):
            raise ValueError("variable repeated in rule antecedent")
        object.__setattr__(self, "antecedent", ante)
        object.__setattr__(self, "consequent", Level(self.consequent))

    @property
    def variables(self) -> frozenset[str]:
        return frozenset(v for v, _ in self.antecedent)

    def __str__(self):
        ante = " & ".join(f"{v}={lv}" for v, lv in self.antecedent)
        return f"{ante} -> {self.consequent}"


def default_rules() -> tuple[Rule, ...]:
    """adv x adj grid plus one single-variable rule per level and variable."""
    L, M, H = Level.LOW, Level.MODERATE, Level.HIGH
    grid = {
        (L, L): L, (L, M): L, (L, H): M,
        (M, L): L, (M, M): M, (M, H): H,
        (H, L): M, (H, M): H, (H, H): H,
    }
    rules = [Rule((("adv", adv), ("adj", adj)), out) for (adv, adj), out in grid.items()]
    for var, lv in itertools.product(VARIABLES, (L, M, H)):
        rules.append(Rule(((var, lv),), lv))
    return tuple(rules)


@dataclass(frozen=True)
class FuzzySystem:
    input_sets: Mapping[Level, TriangularMf] = field(default_factory=lambda: dict(DEFAULT_SETS))
    output_sets: Mapping[Level, TriangularMf] = field(default_factory=lambda: dict(DEFAULT_SETS))
    rules: tuple[Rule, ...] = field(default_factory=default_rules)
    resolution: int = DEFAULT_RESOLUTION

    def __post_init__(self):
        if self.resolution < 1:
            raise ValueError("resolution must be >= 1")
        for sets in (self.input_sets, self.output_sets):
            if set(sets) != set(Level):
                raise ValueError("membership sets must define LOW, MODERATE and HIGH")


@dataclass(frozen=True)
class Aggregate:
    """Pointwise max of output sets clipped at their firing strengths."""

    output_sets: Mapping[Level, TriangularMf]
    clipped: tuple[tuple[Level, float], ...]

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        mu = np.zeros_like(x)
        for level, strength in self.clipped:
            mu = np.maximum(mu, np.minimum(self.output_sets[level](x), strength))
        return mu if mu.ndim else float(mu)


def fuzzify(x: float, sets: Mapping[Level, TriangularMf] = DEFAULT_SETS) -> tuple[float, float, float]:
    """Membership degrees ``(low, moderate, high)`` of ``x`` in [0, 1]."""
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"input {x} outside [0, 1]")
    return tuple(float(sets[lv](x)) for lv in (Level.LOW, Level.MODERATE, Level.HIGH))


def applicable_rules(rules: Sequence[Rule], present) -> list[Rule]:
    """Rules whose variables are all present, minus subsumed fallbacks.

    A rule is dropped when another applicable rule uses a strict superset of
    its variables, so single-variable rules only speak for classes that no
    larger rule covers.
    """
    present = set(present)
    usable = [r for r in rules if r.variables <= present]
    var_sets = {r.variables for r in usable}
    return [r for r in usable if not any(r.variables < other for other in var_sets)]


def infer(system: FuzzySystem, inputs: Mapping[str, float]) -> Aggregate:
    if not inputs:
        raise NoApplicableRule("no inputs")
    degrees = {}
    for var, x in inputs.items():
        if var not in VARIABLES:
            raise ValueError(f"unknown input variable {var!r}")
        degrees[var] = dict(zip((Level.LOW, Level.MODERATE, Level.HIGH), fuzzify(x, system.input_sets)))
    clipped = []
    for rule in applicable_rules(system.rules, degrees):
        strength = min(degrees[v][lv] for v, lv in rule.antecedent)
        if strength > 0.0:
            clipped.append((rule.consequent, strength))
    if not clipped:
        raise NoApplicableRule(f"no rule fires for {dict(inputs)}")
    return Aggregate(system.output_sets, tuple(clipped))


def defuzzify_centroid(aggregate, resolution: int = DEFAULT_RESOLUTION) -> float:
    """Centroid over ``resolution + 1`` uniform samples of [0, 1]."""
    xs = np.linspace(0.0, 1.0, resolution + 1)
    mu = np.asarray(aggregate(xs), dtype=np.float64)
    area = mu.sum()
    if area <= 0.0:
        raise ZeroArea("aggregate membership is identically zero")
    return float(np.clip((xs * mu).sum() / area, 0.0, 1.0))


def classify_granularity(strength: float) -> Granularity:
    if not 0.0 <= strength <= 1.0:
        raise DomainError(f"strength {strength} outside [0, 1]")
    for upper, level in GRANULARITY_BOUNDS:
        if strength < upper:
            return level
    return Granularity.VERY_STRONG


def orientation_word(orientation: int) -> str:
    return {1: "positive", -1: "negative", 0: "neutral"}[orientation]


@dataclass(frozen=True)
class SentenceScore:
    strength: float
    orientation: int
    granularity: Granularity

    @property
    def signed_score(self) -> float:
        return self.orientation * self.strength

    @property
    def label(self) -> str:
        return f"{self.granularity} {orientation_word(self.orientation)}"


def _sign(x: float) -> int:
    return (x > 0) - (x < 0)


def score_sentence(system: FuzzySystem, opinion) -> SentenceScore:
    """Strength from the rule base, orientation from the polarity signs.

    Orientation is the sign of adj + verb + noun (adv alone when none of
    those is present), flipped when the tuple is negated.
    """
    pols = opinion.polarities()
    if not pols:
        raise NoOpinionWords("opinion tuple has no scored words")
    strength = defuzzify_centroid(infer(system, {k: abs(v) for k, v in pols.items()}), system.resolution)
    content = [pols[k] for k in ("adj", "verb", "noun") if k in pols]
    orientation = _sign(sum(content) if content else pols["adv"])
    if opinion.negated:
        orientation = -orientation
    return SentenceScore(strength, orientation, classify_granularity(strength))


# -- rule file --------------------------------------------------------------


def parse_rules(text: str, base: FuzzySystem | None = None) -> FuzzySystem:
    """Parse a rule-base file.

    Lines look like ``adv=HIGH & adj=HIGH -> HIGH``. ``LOW = 0, 0, 0.5``
    overrides a membership set for inputs and outputs alike; prefix with
    ``input.`` or ``output.`` to override one side only. ``resolution = N``
    sets the centroid sampling. Rules, when present, replace the base rules.
    """
    base = base or FuzzySystem()
    inputs = dict(base.input_sets)
    outputs = dict(base.output_sets)
    resolution = base.resolution
    rules = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            if "->" in line:
                lhs, rhs = line.split("->")
                ante = []
                for term in lhs.split("&"):
                    var, _, lv = term.partition("=")
                    ante.append((var.strip().lower(), Level(lv.strip().upper())))
                rules.append(Rule(tuple(ante), Level(rhs.strip().upper())))
                continue
            key, _, value = line.partition("=")
            key = key.strip()
            if key.lower() == "resolution":
                resolution = int(value)
                continue
            side, _, name = key.rpartition(".")
            mf = TriangularMf(*(float(v) for v in value.replace("tri(", "").rstrip(")").split(",")))
            level = Level(name.upper())
            if side in ("", "input"):
                inputs[level] = mf
            if side in ("", "output"):
                outputs[level] = mf
            if side not in ("", "input", "output"):
                raise ValueError(f"unknown set prefix {side!r}")
        except (ValueError, TypeError) as exc:
            raise ValueError(f"rule file line {lineno}: {exc}") from None
    return FuzzySystem(inputs, outputs, tuple(rules) if rules else base.rules, resolution)


def load_rules(path=None) -> FuzzySystem:
    if path is None:
        text = resources.files("fuzzyrank.data").joinpath("rules.txt").read_text("utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return parse_rules(text)
