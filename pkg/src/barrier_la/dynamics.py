"""Deterministic analysis of the learning dynamics.

The expected one-step increment of the joint state X = (p1, q1), divided
by the learning rate, defines a drift field W(X).  This module evaluates
W and its analytic Jacobian, integrates the mean ODE dX/dt = W(X) with a
fixed-step RK4 scheme, and locates/classifies the fixed points of W with
multistart Newton iterations.

The same drift serves both feedback models: with Bernoulli feedback the
payoff entries act as reward probabilities, with scalar feedback they act
as step-size weights, and the expected increment is identical.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DegenerateGame, NoConvergenceWarning, NotInSimplex, StepTooLarge, WrongModel
from .game import GameSpec, JointState, Model, RewardPenalty, mixed_equilibrium
from .learner import LearnerConfig, MixedStrategy, lri_update

DRIFT_STOP_TOL = 1e-10
NEWTON_DRIFT_TOL = 1e-12
NEWTON_MAX_ITER = 200
DEDUP_TOL = 1e-6
STAGE_BOX = (-0.1, 1.1)


@dataclass(frozen=True)
class BoundaryDrives:
    """Expected payoff of each action against the opponent's mixed strategy.

    d1a/d2a are player A's action payoffs as linear functions of q1;
    d1b/d2b are player B's as linear functions of p1.
    """

    d1a: float
    d2a: float
    d1b: float
    d2b: float


@dataclass(frozen=True)
class DriftValue:
    """The two components of the drift W(X)."""

    w1: float
    w2: float

    def as_array(self) -> np.ndarray:
        return np.array([self.w1, self.w2])

    def norm(self) -> float:
        return math.hypot(self.w1, self.w2)


class Stability(str, Enum):
    STABLE = "Stable"
    SADDLE = "Saddle"
    UNSTABLE = "Unstable"


@dataclass(frozen=True)
class FixedPoint:
    """A root of the drift field with its local linearization.

    Stability follows the determinant/trace test of the 2x2 Jacobian:
    Stable iff det > 0 and trace < 0, Saddle iff det < 0, else Unstable.
    """

    x: JointState
    drift_norm: float
    jacobian: np.ndarray
    det: float
    trace: float
    stability: Stability


class TrajectoryKind(str, Enum):
    ODE = "Ode"
    SIMULATED = "Simulated"
    ENSEMBLE_MEAN = "EnsembleMean"


@dataclass(frozen=True)
class Trajectory:
    """Ordered samples (t, x) of an integrated, simulated or averaged path."""

    kind: TrajectoryKind
    t: np.ndarray
    x: np.ndarray

    def __post_init__(self) -> None:
        if self.t.ndim != 1 or self.x.shape != (self.t.shape[0], 2):
            raise ValueError("trajectory arrays must have shapes (n,) and (n, 2)")
        if len(self.t) > 1 and not np.all(np.diff(self.t) > 0):
            raise ValueError("trajectory times must be strictly increasing")
        if len(self.x) and not (
            self.x.min() >= -1e-9 and self.x.max() <= 1.0 + 1e-9
        ):
            raise ValueError("trajectory states must lie in [0, 1]^2")

    def __len__(self) -> int:
        return len(self.t)

    def terminal(self) -> JointState:
        return JointState(float(self.x[-1, 0]), float(self.x[-1, 1]))


def drives(spec: GameSpec, x: JointState) -> BoundaryDrives:
    """The four action-payoff linear forms at the joint state x."""
    d1a, d2a, d1b, d2b = _drives(spec, x.p1, x.q1)
    return BoundaryDrives(d1a, d2a, d1b, d2b)


def _drives(spec: GameSpec, p1: float, q1: float) -> tuple[float, float, float, float]:
    R, C = spec.R, spec.C
    d1a = q1 * R.r11 + (1.0 - q1) * R.r12
    d2a = q1 * R.r21 + (1.0 - q1) * R.r22
    d1b = p1 * C.r11 + (1.0 - p1) * C.r21
    d2b = p1 * C.r12 + (1.0 - p1) * C.r22
    return d1a, d2a, d1b, d2b


def vector_field(spec: GameSpec, x: JointState, p_max: float) -> DriftValue:
    """Drift W(X): the expected per-step increment divided by the learning rate.

    w1 = p1 (p_max - p1) d1a + (1 - p1)(p_min - p1) d2a, and symmetrically
    for w2 with player B's drives.  For a P-model game this equals
    E[delta X | X] / theta exactly.
    """
    _check_p_max(p_max)
    w1, w2 = _field(spec, x.p1, x.q1, p_max)
    return DriftValue(w1, w2)


def _field(spec: GameSpec, p1: float, q1: float, p_max: float) -> tuple[float, float]:
    p_min = 1.0 - p_max
    d1a, d2a, d1b, d2b = _drives(spec, p1, q1)
    w1 = p1 * (p_max - p1) * d1a + (1.0 - p1) * (p_min - p1) * d2a
    w2 = q1 * (p_max - q1) * d1b + (1.0 - q1) * (p_min - q1) * d2b
    return w1, w2


def expected_increment_oracle(
    spec: GameSpec, x: JointState, cfg: LearnerConfig
) -> DriftValue:
    """Brute-force check of the drift for P-model games.

    Enumerates all 4 joint actions and both reward/penalty outcomes per
    player (16 branches), weights the increments produced by actual
    lri_update calls by their exact probabilities, and divides by theta.
    Must agree with vector_field to machine precision.
    """
    if spec.model is not Model.P:
        raise WrongModel("expected_increment_oracle requires a P-model game")
    p1, q1 = x.p1, x.q1
    ms_a = MixedStrategy.of_first(p1)
    ms_b = MixedStrategy.of_first(q1)
    prob_a = (p1, 1.0 - p1)
    prob_b = (q1, 1.0 - q1)
    e1 = 0.0
    e2 = 0.0
    for a in (1, 2):
        for b in (1, 2):
            p_joint = prob_a[a - 1] * prob_b[b - 1]
            ra = spec.R.entry(a, b)
            cb = spec.C.entry(a, b)
            for rew_a, pr_a in ((True, ra), (False, 1.0 - ra)):
                for rew_b, pr_b in ((True, cb), (False, 1.0 - cb)):
                    w = p_joint * pr_a * pr_b
                    if w == 0.0:
                        continue
                    da = lri_update(ms_a, a, RewardPenalty(rew_a), cfg).p1 - p1
                    db = lri_update(ms_b, b, RewardPenalty(rew_b), cfg).p1 - q1
                    e1 += w * da
                    e2 += w * db
    return DriftValue(e1 / cfg.theta, e2 / cfg.theta)


def jacobian(spec: GameSpec, x: JointState, p_max: float) -> np.ndarray:
    """Analytic 2x2 Jacobian of the drift field at x.

    Exact partial derivatives of vector_field as implemented, so central
    finite differences of the field agree to discretization error.
    """
    _check_p_max(p_max)
    return _jacobian(spec, x.p1, x.q1, p_max)


def _jacobian(spec: GameSpec, p1: float, q1: float, p_max: float) -> np.ndarray:
    p_min = 1.0 - p_max
    R, C = spec.R, spec.C
    d1a, d2a, d1b, d2b = _drives(spec, p1, q1)
    j11 = (p_max - 2.0 * p1) * d1a + (2.0 * p1 - 1.0 - p_min) * d2a
    j12 = p1 * (p_max - p1) * (R.r11 - R.r12) + (1.0 - p1) * (p_min - p1) * (R.r21 - R.r22)
    j21 = q1 * (p_max - q1) * (C.r11 - C.r21) + (1.0 - q1) * (p_min - q1) * (C.r12 - C.r22)
    j22 = (p_max - 2.0 * q1) * d1b + (2.0 * q1 - 1.0 - p_min) * d2b
    return np.array([[j11, j12], [j21, j22]])


def integrate(
    spec: GameSpec,
    x0: JointState,
    p_max: float,
    step: float = 0.01,
    t_max: float = 1e4,
) -> Trajectory:
    """Classical fixed-step RK4 path of dX/dt = W(X) starting at x0.

    Stops early once the drift norm falls below 1e-10.  Raises
    StepTooLarge if any RK stage leaves the sanity box [-0.1, 1.1]^2,
    which indicates the step size is too coarse for the field.
    """
    _check_p_max(p_max)
    if step <= 0.0:
        raise ValueError("step must be positive")
    lo, hi = STAGE_BOX
    x = np.array([x0.p1, x0.q1])
    ts = [0.0]
    xs = [x.copy()]
    n_steps = int(math.floor(t_max / step + 1e-9))

    def f(y: np.ndarray) -> np.ndarray:
        w1, w2 = _field(spec, y[0], y[1], p_max)
        return np.array([w1, w2])

    def check(y: np.ndarray) -> np.ndarray:
        if not (lo <= y[0] <= hi and lo <= y[1] <= hi):
            raise StepTooLarge(f"RK stage {y} left the box [{lo}, {hi}]^2")
        return y

    for i in range(1, n_steps + 1):
        w = f(x)
        if math.hypot(w[0], w[1]) < DRIFT_STOP_TOL:
            break
        k1 = w
        k2 = f(check(x + 0.5 * step * k1))
        k3 = f(check(x + 0.5 * step * k2))
        k4 = f(check(x + step * k3))
        x = check(x + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
        ts.append(i * step)
        xs.append(x.copy())
    return Trajectory(TrajectoryKind.ODE, np.array(ts), np.array(xs))


def fixed_points(
    spec: GameSpec,
    p_max: float,
    grid_n: int = 11,
    drift_tol: float = NEWTON_DRIFT_TOL,
    max_iter: int = NEWTON_MAX_ITER,
    dedup_tol: float = DEDUP_TOL,
) -> list[FixedPoint]:
    """All fixed points of the drift inside the barrier box, with stability.

    Newton iterations with the analytic Jacobian are started from a
    grid_n x grid_n lattice over [p_min, p_max]^2 plus the analytic mixed
    equilibrium when it exists.  Converged roots are kept when they lie in
    the barrier box, deduplicated at distance dedup_tol, labeled by the
    det/trace test and sorted by p1.  Seeds that fail to converge are
    skipped and surfaced as a NoConvergenceWarning with their count.
    """
    if not 0.5 < p_max < 1.0:
        raise ValueError("p_max must be in (0.5, 1) for fixed-point search")
    p_min = 1.0 - p_max
    seeds = [
        (a, b)
        for a in np.linspace(p_min, p_max, grid_n)
        for b in np.linspace(p_min, p_max, grid_n)
    ]
    try:
        seeds.append(mixed_equilibrium(spec))
    except (DegenerateGame, NotInSimplex):
        pass

    roots: list[tuple[float, float, float]] = []
    failures = 0
    for s in seeds:
        res = _newton(spec, s, p_max, drift_tol, max_iter)
        if res is None:
            failures += 1
            continue
        p1, q1, wnorm = res
        if not (p_min - 1e-9 <= p1 <= p_max + 1e-9 and p_min - 1e-9 <= q1 <= p_max + 1e-9):
            continue
        if any(math.hypot(p1 - r[0], q1 - r[1]) < dedup_tol for r in roots):
            continue
        roots.append((p1, q1, wnorm))
    if failures:
        warnings.warn(
            f"{failures} of {len(seeds)} Newton seeds failed to converge",
            NoConvergenceWarning,
            stacklevel=2,
        )

    out = []
    for p1, q1, wnorm in sorted(roots):
        jac = _jacobian(spec, p1, q1, p_max)
        det = float(jac[0, 0] * jac[1, 1] - jac[0, 1] * jac[1, 0])
        trace = float(jac[0, 0] + jac[1, 1])
        if det > 0.0 and trace < 0.0:
            stab = Stability.STABLE
        elif det < 0.0:
            stab = Stability.SADDLE
        else:
            stab = Stability.UNSTABLE
        x = JointState(float(min(max(p1, 0.0), 1.0)), float(min(max(q1, 0.0), 1.0)))
        out.append(FixedPoint(x, float(wnorm), jac, det, trace, stab))
    return out


def _newton(
    spec: GameSpec,
    seed: tuple[float, float],
    p_max: float,
    drift_tol: float,
    max_iter: int,
) -> tuple[float, float, float] | None:
    """Newton iteration on W = 0; returns (p1, q1, |W|) or None on failure."""
    p1, q1 = float(seed[0]), float(seed[1])
    for _ in range(max_iter):
        w1, w2 = _field(spec, p1, q1, p_max)
        wnorm = math.hypot(w1, w2)
        if wnorm <= drift_tol:
            return p1, q1, wnorm
        j = _jacobian(spec, p1, q1, p_max)
        det = j[0, 0] * j[1, 1] - j[0, 1] * j[1, 0]
        if det == 0.0 or not math.isfinite(det):
            return None
        p1 -= (w1 * j[1, 1] - w2 * j[0, 1]) / det
        q1 -= (w2 * j[0, 0] - w1 * j[1, 0]) / det
        if not (-1.0 <= p1 <= 2.0 and -1.0 <= q1 <= 2.0):
            return None
    return None


def _check_p_max(p_max: float) -> None:
    if not 0.5 < p_max <= 1.0:
        raise ValueError("p_max must be in (0.5, 1]")
