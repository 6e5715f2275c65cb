"""Game specification, validation, presets, and the recurrence classifier.

A race game has m >= 2 players; player l needs ``goals[l]`` advancement
steps and is selected to advance with probability ``probs[l]`` each round.
Exact methods require integer goals; the quadrature and gamma-race methods
accept positive real goals.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

__all__ = [
    "BudgetError",
    "ConvergenceError",
    "GameSpec",
    "Kind",
    "Method",
    "RaceProbabilities",
    "RecurrenceVerdict",
    "RunawayWalkError",
    "Verdict",
    "classify_recurrence",
    "dice_preset",
    "game_from_goals",
    "game_from_goals_probs",
]

PROB_SUM_TOL = 1e-12
SILENT_RENORM_TOL = 1e-9


class BudgetError(RuntimeError):
    """A state or term count exceeds the configured budget."""


class ConvergenceError(RuntimeError):
    """An iterative numerical procedure failed to reach its tolerance."""

    def __init__(self, message: str, best=None):
        super().__init__(message)
        self.best = best


class RunawayWalkError(RuntimeError):
    """A simulated walk exceeded the hard round cap."""


class Kind(enum.Enum):
    WIN = "win"
    LAST = "last"


class Method(enum.Enum):
    DP = "dp"
    NEG_MULTI = "negmulti"
    SUM_BETA = "sumbeta"
    INCL_EXCL = "inclexcl"
    QUAD = "quad"
    MC = "mc"


class Verdict(enum.Enum):
    RECURRENT = "recurrent"
    TRANSIENT = "transient"


@dataclass(frozen=True)
class GameSpec:
    """An m-player race: per-player goals and advancing probabilities."""

    goals: tuple[float, ...]
    probs: tuple[float, ...]

    def __post_init__(self) -> None:
        goals = tuple(float(g) for g in self.goals)
        probs = tuple(float(p) for p in self.probs)
        object.__setattr__(self, "goals", goals)
        object.__setattr__(self, "probs", probs)
        if len(goals) < 2:
            raise ValueError("a game needs at least two players")
        if len(goals) != len(probs):
            raise ValueError(
                f"goals and probs length mismatch: {len(goals)} vs {len(probs)}"
            )
        for g in goals:
            if not math.isfinite(g) or g <= 0.0:
                raise ValueError(f"goals must be positive, got {g!r}")
        for p in probs:
            if not math.isfinite(p) or not (0.0 < p < 1.0):
                raise ValueError(f"probs must lie in (0, 1), got {p!r}")
        total = math.fsum(probs)
        if abs(total - 1.0) > PROB_SUM_TOL:
            raise ValueError(f"probs must sum to 1 within {PROB_SUM_TOL}, got {total!r}")

    @property
    def m(self) -> int:
        return len(self.goals)

    def integer_goals(self) -> tuple[int, ...]:
        """Goals as integers; raises for non-integer values."""
        out = []
        for g in self.goals:
            r = round(g)
            if g != r or r < 1:
                raise ValueError(
                    f"this operation requires integer goals >= 1, got {g!r}; "
                    "use the quad method for real-valued goals"
                )
            out.append(int(r))
        return tuple(out)

    def has_integer_goals(self) -> bool:
        return all(g == round(g) and g >= 1 for g in self.goals)

    def is_canonical(self, tol: float = 1e-12) -> bool:
        """True when probs equal goals / sum(goals) within tol."""
        total = math.fsum(self.goals)
        return all(abs(p - g / total) <= tol for g, p in zip(self.goals, self.probs))

    def permuted(self, order) -> "GameSpec":
        """Game with players reordered by the given index sequence."""
        order = list(order)
        if sorted(order) != list(range(self.m)):
            raise ValueError(f"not a permutation of 0..{self.m - 1}: {order!r}")
        return GameSpec(
            tuple(self.goals[i] for i in order),
            tuple(self.probs[i] for i in order),
        )

    def to_dict(self) -> dict:
        """JSON object: {"goals": [...], "probs": [...]}."""
        goals = [int(g) if g == round(g) else g for g in self.goals]
        return {"goals": goals, "probs": list(self.probs)}

    @classmethod
    def from_dict(cls, obj: dict) -> "GameSpec":
        """Parse {"goals": [...]} with optional "probs"; omitted probs
        means the canonical choice p = n / sum(n)."""
        if "goals" not in obj:
            raise ValueError('missing required key "goals"')
        goals = obj["goals"]
        probs = obj.get("probs")
        if probs is None:
            return game_from_goals(goals)
        return game_from_goals_probs(goals, probs)


def _canonical_probs(goals) -> tuple[float, ...]:
    total = math.fsum(goals)
    return tuple(g / total for g in goals)


def game_from_goals(goals) -> GameSpec:
    """Game with the canonical probabilities p_l = n_l / sum(n)."""
    goals = tuple(float(g) for g in goals)
    if len(goals) < 2:
        raise ValueError("a game needs at least two players")
    for g in goals:
        if not math.isfinite(g) or g < 1.0:
            raise ValueError(f"goals must be >= 1, got {g!r}")
    return GameSpec(goals, _canonical_probs(goals))


def game_from_goals_probs(goals, probs) -> GameSpec:
    """Game with explicit advancing probabilities, normalized to sum 1.

    A deviation of the input sum from 1 beyond 1e-9 triggers a warning;
    smaller deviations are renormalized silently.
    """
    goals = tuple(float(g) for g in goals)
    probs = tuple(float(p) for p in probs)
    if len(goals) != len(probs):
        raise ValueError(
            f"goals and probs length mismatch: {len(goals)} vs {len(probs)}"
        )
    if len(goals) < 2:
        raise ValueError("a game needs at least two players")
    for p in probs:
        if not math.isfinite(p) or p <= 0.0:
            raise ValueError(f"probs must be positive, got {p!r}")
    total = math.fsum(probs)
    if abs(total - 1.0) > SILENT_RENORM_TOL:
        warnings.warn(
            f"advancing probabilities summed to {total!r}; normalizing",
            stacklevel=2,
        )
    normalized = tuple(p / total for p in probs)
    return GameSpec(goals, normalized)


def dice_preset() -> GameSpec:
    """The 11-player two-dice game: goals (1,2,3,4,5,6,5,4,3,2,1)."""
    return game_from_goals((1, 2, 3, 4, 5, 6, 5, 4, 3, 2, 1))


@dataclass(frozen=True)
class RaceProbabilities:
    """Per-player probability vector of finishing first or last."""

    kind: Kind
    values: tuple[float, ...]
    method: Method
    error_bound: float = 0.0

    def __post_init__(self) -> None:
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", values)
        if self.error_bound < 0.0:
            raise ValueError(f"error_bound must be >= 0, got {self.error_bound!r}")
        slack = max(1e-10, self.error_bound * len(values))
        for v in values:
            if not (-slack <= v <= 1.0 + slack):
                raise ValueError(f"probability {v!r} outside [0, 1]")
        total = math.fsum(values)
        if abs(total - 1.0) > slack:
            raise ValueError(
                f"probabilities sum to {total!r}, more than {slack} away from 1"
            )

    def __getitem__(self, player: int) -> float:
        return self.values[player]


@dataclass(frozen=True)
class RecurrenceVerdict:
    """Classification of the centered walk, with the geometric-mean statistic."""

    eta: float
    verdict: Verdict


def classify_recurrence(probs) -> RecurrenceVerdict:
    """Classify the centered walk for an advancing-probability vector.

    eta = (prod m*p_j)^(1/m) <= 1 with equality iff all p_j = 1/m; the
    walk is recurrent exactly when eta = 1 (within 1e-12) and m <= 3.
    """
    probs = tuple(float(p) for p in probs)
    m = len(probs)
    if m < 2:
        raise ValueError("need at least two probabilities")
    for p in probs:
        if not math.isfinite(p) or p <= 0.0:
            raise ValueError(f"probs must be positive, got {p!r}")
    total = math.fsum(probs)
    if abs(total - 1.0) > PROB_SUM_TOL:
        raise ValueError(f"probs must sum to 1 within {PROB_SUM_TOL}, got {total!r}")
    eta = math.exp(math.fsum(math.log(m * p) for p in probs) / m)
    if eta > 1.0:
        eta = 1.0
    uniform = abs(eta - 1.0) <= 1e-12
    verdict = Verdict.RECURRENT if (uniform and m <= 3) else Verdict.TRANSIENT
    return RecurrenceVerdict(eta=eta, verdict=verdict)
