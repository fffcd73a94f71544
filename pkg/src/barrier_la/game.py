"""2x2 bimatrix games: payoff data, environment feedback, equilibrium analysis.

A game is given by two payoff matrices R (row player A) and C (column
player B) whose entries live in [0, 1].  Under the P model an entry is the
probability that the matching player is rewarded for the joint action;
under the S model it is the deterministic scalar feedback itself.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .errors import DegenerateGame, NotInSimplex, WrongModel


class Model(str, Enum):
    """Feedback model: Bernoulli reward/penalty (P) or scalar payoff (S)."""

    P = "P"
    S = "S"


@dataclass(frozen=True)
class PayoffMatrix:
    """2x2 payoff matrix with every entry in [0, 1].

    Entry (i, j) is indexed by the row player's action i and the column
    player's action j, both in {1, 2}.
    """

    r11: float
    r12: float
    r21: float
    r22: float

    def __post_init__(self) -> None:
        for name, v in self.entries().items():
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"payoff entry {name}={v} outside [0, 1]")

    def entries(self) -> dict[str, float]:
        return {"11": self.r11, "12": self.r12, "21": self.r21, "22": self.r22}

    def entry(self, a: int, b: int) -> float:
        """Payoff entry for row action a and column action b (1-based)."""
        return (self.r11, self.r12, self.r21, self.r22)[2 * (a - 1) + (b - 1)]

    def as_array(self) -> np.ndarray:
        return np.array([[self.r11, self.r12], [self.r21, self.r22]])

    @classmethod
    def from_rows(cls, rows) -> "PayoffMatrix":
        (r11, r12), (r21, r22) = rows
        return cls(float(r11), float(r12), float(r21), float(r22))


@dataclass(frozen=True)
class GameSpec:
    """A bimatrix game: feedback model plus the two payoff matrices."""

    model: Model
    R: PayoffMatrix
    C: PayoffMatrix

    def with_model(self, model: Model) -> "GameSpec":
        return replace(self, model=model)


@dataclass(frozen=True)
class ActionPair:
    """Joint pure action (a for player A, b for player B), both in {1, 2}."""

    a: int
    b: int

    def __post_init__(self) -> None:
        if self.a not in (1, 2) or self.b not in (1, 2):
            raise ValueError(f"actions must be 1 or 2, got ({self.a}, {self.b})")


@dataclass(frozen=True)
class RewardPenalty:
    """Binary environment feedback (P model)."""

    reward: bool


@dataclass(frozen=True)
class Scalar:
    """Continuous environment feedback in [0, 1] (S model)."""

    u: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.u <= 1.0:
            raise ValueError(f"scalar feedback {self.u} outside [0, 1]")


Feedback = Union[RewardPenalty, Scalar]


@dataclass(frozen=True)
class JointState:
    """Pair (p1, q1) of first-action probabilities for players A and B."""

    p1: float
    q1: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.p1 <= 1.0 and 0.0 <= self.q1 <= 1.0):
            raise ValueError(f"state ({self.p1}, {self.q1}) outside [0, 1]^2")

    def as_array(self) -> np.ndarray:
        return np.array([self.p1, self.q1])


class CaseKind(str, Enum):
    """Equilibrium structure of a non-degenerate 2x2 game."""

    MIXED_ONLY = "MixedOnly"
    SINGLE_PURE = "SinglePure"
    TWO_PURE_ONE_MIXED = "TwoPureOneMixed"


@dataclass(frozen=True)
class EquilibriumReport:
    """Full equilibrium analysis of a game.

    ``pure`` holds pure equilibria as corner joint states, e.g. (1, 1)
    means both players' first actions.  ``mixed`` is present exactly for
    the MixedOnly and TwoPureOneMixed cases.  L and L_prime are the payoff
    discriminants (r11+r22)-(r12+r21) and (c11+c22)-(c12+c21).
    """

    case_kind: CaseKind
    pure: tuple[JointState, ...]
    mixed: Optional[tuple[float, float]]
    L: float
    L_prime: float

    def __post_init__(self) -> None:
        n_pure, has_mixed = {
            CaseKind.MIXED_ONLY: (0, True),
            CaseKind.SINGLE_PURE: (1, False),
            CaseKind.TWO_PURE_ONE_MIXED: (2, True),
        }[self.case_kind]
        if len(self.pure) != n_pure or (self.mixed is not None) != has_mixed:
            raise ValueError(
                f"{self.case_kind.value} report with {len(self.pure)} pure "
                f"equilibria and mixed={'present' if self.mixed else 'absent'}"
            )


def discriminants(spec: GameSpec) -> tuple[float, float]:
    """Return (L, L_prime), the denominators of the mixed-equilibrium formulas."""
    r11, r12, r21, r22 = spec.R.r11, spec.R.r12, spec.R.r21, spec.R.r22
    c11, c12, c21, c22 = spec.C.r11, spec.C.r12, spec.C.r21, spec.C.r22
    L = (r11 + r22) - (r12 + r21)
    L_prime = (c11 + c22) - (c12 + c21)
    return L, L_prime


def classify(spec: GameSpec) -> CaseKind:
    """Classify the game by the sign conditions on its payoff differences.

    Raises DegenerateGame if any of the three discriminant products is
    exactly zero; the taxonomy uses strict inequalities only.
    """
    r11, r12, r21, r22 = spec.R.r11, spec.R.r12, spec.R.r21, spec.R.r22
    c11, c12, c21, c22 = spec.C.r11, spec.C.r12, spec.C.r21, spec.C.r22
    dr = (r11 - r21) * (r12 - r22)
    dc = (c11 - c12) * (c21 - c22)
    drc = (r11 - r21) * (c11 - c12)
    if dr == 0.0 or dc == 0.0 or drc == 0.0:
        raise DegenerateGame("payoff ties make the case classification undefined")
    if dr > 0.0 or dc > 0.0:
        return CaseKind.SINGLE_PURE
    if drc < 0.0:
        return CaseKind.MIXED_ONLY
    return CaseKind.TWO_PURE_ONE_MIXED


def mixed_equilibrium(spec: GameSpec) -> tuple[float, float]:
    """Interior mixed equilibrium (p_opt, q_opt) from the indifference conditions.

    p_opt = (c22 - c21) / L' makes player B indifferent between its two
    actions, and q_opt = (r22 - r12) / L does the same for player A.
    Raises DegenerateGame when a discriminant vanishes and NotInSimplex
    when a coordinate falls outside [0, 1] (no interior mixed equilibrium).
    """
    L, L_prime = discriminants(spec)
    if L == 0.0 or L_prime == 0.0:
        raise DegenerateGame("discriminant L or L' is zero")
    p_opt = (spec.C.r22 - spec.C.r21) / L_prime
    q_opt = (spec.R.r22 - spec.R.r12) / L
    if not (0.0 <= p_opt <= 1.0 and 0.0 <= q_opt <= 1.0):
        raise NotInSimplex(f"computed mixed strategy ({p_opt}, {q_opt}) not in [0, 1]^2")
    return p_opt, q_opt


def pure_equilibria(spec: GameSpec) -> list[JointState]:
    """Pure equilibria found by strict best-response checks at all 4 corners.

    Deliberately brute force, so it doubles as an independent oracle for
    classify().  A payoff tie at any corner raises DegenerateGame.
    """
    R, C = spec.R, spec.C
    out = []
    for a in (1, 2):
        for b in (1, 2):
            ra, ra_alt = R.entry(a, b), R.entry(3 - a, b)
            cb, cb_alt = C.entry(a, b), C.entry(a, 3 - b)
            if ra == ra_alt or cb == cb_alt:
                raise DegenerateGame(f"payoff tie at corner ({a}, {b})")
            if ra > ra_alt and cb > cb_alt:
                out.append(corner_state(ActionPair(a, b)))
    return out


def corner_state(actions: ActionPair) -> JointState:
    """Corner joint state for a pure action pair: action 1 maps to probability 1."""
    return JointState(1.0 if actions.a == 1 else 0.0, 1.0 if actions.b == 1 else 0.0)


def equilibrium_report(spec: GameSpec) -> EquilibriumReport:
    """Classification plus pure and mixed equilibria in one report."""
    kind = classify(spec)
    pure = tuple(pure_equilibria(spec))
    mixed = mixed_equilibrium(spec) if kind is not CaseKind.SINGLE_PURE else None
    L, L_prime = discriminants(spec)
    return EquilibriumReport(kind, pure, mixed, L, L_prime)


def sample_feedback(
    spec: GameSpec, actions: ActionPair, rng: np.random.Generator
) -> tuple[RewardPenalty, RewardPenalty]:
    """Sample Bernoulli feedback for a joint action under the P model.

    Consumes exactly two uniform draws from ``rng`` in a fixed order:
    player A first, then player B.  A is rewarded with probability
    R[a, b], B independently with probability C[a, b].
    """
    if spec.model is not Model.P:
        raise WrongModel("sample_feedback requires a P-model game")
    ra = spec.R.entry(actions.a, actions.b)
    cb = spec.C.entry(actions.a, actions.b)
    fa = RewardPenalty(rng.random() < ra)
    fb = RewardPenalty(rng.random() < cb)
    return fa, fb


def deterministic_feedback(
    spec: GameSpec, actions: ActionPair
) -> tuple[Scalar, Scalar]:
    """Deterministic scalar feedback under the S model: the payoff entries themselves."""
    if spec.model is not Model.S:
        raise WrongModel("deterministic_feedback requires an S-model game")
    return (
        Scalar(spec.R.entry(actions.a, actions.b)),
        Scalar(spec.C.entry(actions.a, actions.b)),
    )


# Preset games covering the three equilibrium cases.  case1 has a unique
# mixed equilibrium at (0.6667, 0.3333); case2 a single pure equilibrium at
# the corner (1, 0); case3 two pure equilibria (1, 1) / (0, 0) plus an
# unstable mixed point at (0.5, 0.6667).
PRESETS: dict[str, GameSpec] = {
    "case1": GameSpec(
        Model.P,
        PayoffMatrix(0.2, 0.6, 0.4, 0.5),
        PayoffMatrix(0.4, 0.25, 0.3, 0.6),
    ),
    "case2": GameSpec(
        Model.P,
        PayoffMatrix(0.7, 0.9, 0.6, 0.8),
        PayoffMatrix(0.6, 0.8, 0.8, 0.9),
    ),
    "case3": GameSpec(
        Model.P,
        PayoffMatrix(0.3, 0.1, 0.2, 0.3),
        PayoffMatrix(0.3, 0.2, 0.1, 0.2),
    ),
}


def preset(name: str) -> GameSpec:
    try:
        return PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


def to_dict(spec: GameSpec) -> dict:
    """JSON-ready form: {"model": "P"|"S", "R": [[..],[..]], "C": [[..],[..]]}."""
    return {
        "model": spec.model.value,
        "R": spec.R.as_array().tolist(),
        "C": spec.C.as_array().tolist(),
    }


def from_dict(data: dict) -> GameSpec:
    try:
        model = Model(data["model"])
        R = PayoffMatrix.from_rows(data["R"])
        C = PayoffMatrix.from_rows(data["C"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"invalid game spec: {exc}") from exc
    return GameSpec(model, R, C)


def load_game(path: str | Path) -> GameSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return from_dict(json.load(fh))


def dump_game(spec: GameSpec, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(to_dict(spec), fh, indent=2)
        fh.write("\n")
