"""The online update loop: noisy gradients, per-slot step sizes, projected ascent.

One engine run (:func:`run_episode`) is strictly sequential, since each
waypoint depends on the previous one, but runs share no state and
independent episodes may execute concurrently.  All randomness is a pure
function of ``(seed, slot)``, which makes replays bit-identical.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Literal, Protocol

from .errors import EmptyStepInterval, InfeasibleStepSize, RootExistence
from .geom import Point, Vector, add, norm, norm_sq, scale, sub
from .sets import Region

SLACK_TOL = 1e-9

Mode = Literal["standard", "lookahead"]

_MASK64 = (1 << 64) - 1


def slot_seed(seed: int, t: int) -> int:
    """Stable 64-bit mix of a stream seed and a slot index (splitmix64)."""
    z = (seed * 0x9E3779B97F4A7C15 + t) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


@dataclass(frozen=True)
class NoiseModel:
    """Additive gradient noise with a per-slot decaying scale.

    ``kind="none"`` draws exactly zero.  ``kind="gaussian_decaying"`` draws
    i.i.d. per-coordinate normals with per-slot standard deviation
    ``eps_t / sqrt(2)`` where ``eps_t = eps0 * t**-decay_q``, so the expected
    squared norm of a draw equals the bound ``eps_t**2``.
    """

    kind: Literal["none", "gaussian_decaying"] = "none"
    eps0: float = 0.0
    decay_q: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("none", "gaussian_decaying"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.decay_q < 0.0:
            raise ValueError("decay exponent must be >= 0")

    def eps_sq_bound(self, t: int) -> float:
        if self.kind == "none":
            return 0.0
        eps_t = self.eps0 * t ** (-self.decay_q)
        return eps_t * eps_t

    def draw(self, t: int) -> Vector:
        if self.kind == "none":
            return (0.0, 0.0)
        eps_t = self.eps0 * t ** (-self.decay_q)
        sigma = eps_t / 2.0**0.5
        rng = random.Random(slot_seed(self.seed, t))
        return (rng.gauss(0.0, sigma), rng.gauss(0.0, sigma))


def noisy_gradient(true_grad: Vector, model: NoiseModel, t: int) -> tuple[Vector, float]:
    """Corrupt a gradient with the model's slot-``t`` draw.

    Returns the noisy gradient and the realized squared noise norm.
    """
    n = model.draw(t)
    return add(true_grad, n), norm_sq(n)


@dataclass(frozen=True)
class EngineState:
    """Where the agent is at slot ``t`` plus its running gradient-norm max."""

    t: int
    x_hat: Point
    x_prev: Point
    gbar_running: float = 0.0


@dataclass(frozen=True)
class StepRecord:
    t: int
    x_before: Point
    x_after: Point
    gamma: float
    grad_tilde: Vector
    eps_sq_realized: float
    eps_sq_bound: float
    constraint_slack: float


def ioga_step(state: EngineState, grad_tilde: Vector, gamma: float, region: Region) -> EngineState:
    """One projected ascent step ``x <- P(x + grad/gamma)``."""
    if gamma <= 0.0:
        raise ValueError("gamma must be positive")
    x_next = region.project(add(state.x_hat, scale(grad_tilde, 1.0 / gamma)))
    return EngineState(
        t=state.t + 1,
        x_hat=x_next,
        x_prev=state.x_hat,
        gbar_running=max(state.gbar_running, norm(grad_tilde)),
    )


def ioga_lookahead_step(
    state: EngineState, grad_tilde_next: Vector, gamma: float, region: Region
) -> EngineState:
    """Same map as :func:`ioga_step`; the caller supplies next slot's gradient."""
    return ioga_step(state, grad_tilde_next, gamma, region)


@dataclass
class SlotPlan:
    """Everything a driver knows about one slot before the step is taken.

    ``grad_true`` is the exact utility gradient, ``grad_observed`` the one
    the agent actually sees before additive model noise (they differ when
    e.g. the peer position or the current measurement is corrupted).
    ``gamma`` turns the final noisy gradient and running norm bound into a
    learning rate; ``slack`` evaluates the coupled constraint for the step.
    """

    grad_true: Vector
    grad_observed: Vector
    gamma: Callable[[Vector, float], float]
    slack: Callable[[Point, Point], float]
    extras: dict = field(default_factory=dict)


class EpisodeDriver(Protocol):
    start: Point
    horizon: int
    region: Region
    noise: NoiseModel

    def plan(self, t: int, x_hat: Point, x_prev: Point, mode: Mode) -> SlotPlan: ...


def run_episode(driver: EpisodeDriver, mode: Mode = "standard"):
    """Run ``horizon - 1`` steps from the driver's start.

    Returns the waypoint list (length ``horizon``) and one
    :class:`StepRecord` per executed step.  Raises
    :class:`InfeasibleStepSize` if the step-size policy fails at some slot
    or the executed step violates its coupled constraint.
    """
    if mode not in ("standard", "lookahead"):
        raise ValueError(f"unknown mode {mode!r}")
    state = EngineState(t=1, x_hat=driver.start, x_prev=driver.start)
    waypoints: list[Point] = [driver.start]
    records: list[StepRecord] = []
    for t in range(1, driver.horizon):
        plan = driver.plan(t, state.x_hat, state.x_prev, mode)
        grad_tilde, _ = noisy_gradient(plan.grad_observed, driver.noise, t)
        eps_sq_realized = norm_sq(sub(grad_tilde, plan.grad_true))
        gbar = max(state.gbar_running, norm(grad_tilde))
        try:
            gamma = plan.gamma(grad_tilde, gbar)
        except (EmptyStepInterval, RootExistence) as exc:
            raise InfeasibleStepSize(t, str(exc)) from exc
        new_state = ioga_step(state, grad_tilde, gamma, driver.region)
        slack = plan.slack(state.x_hat, new_state.x_hat)
        if slack > SLACK_TOL:
            raise InfeasibleStepSize(
                t, f"executed step violates its constraint by {slack:.3e}"
            )
        records.append(
            StepRecord(
                t=t,
                x_before=state.x_hat,
                x_after=new_state.x_hat,
                gamma=gamma,
                grad_tilde=grad_tilde,
                eps_sq_realized=eps_sq_realized,
                eps_sq_bound=driver.noise.eps_sq_bound(t),
                constraint_slack=slack,
            )
        )
        state = new_state
        waypoints.append(state.x_hat)
    return waypoints, records
