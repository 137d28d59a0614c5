"""Decentralized projected Riemannian gradient descent.

Two variants share the projected local step and differ in the consensus:
``"exact"`` uses weighted Fréchet means, ``"onestep"`` the closed-form step.
The module also evaluates the analytic regret and network-error bounds so a
run can be checked against them.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np

from .consensus import (
    FrechetSolverConfig,
    consensus_exact,
    consensus_onestep,
    frechet_mean,
    gamma_default,
)
from .manifolds.base import GeodesicBall, InvalidInput, Manifold, zeta
from .network import sigma2 as _sigma2

log = logging.getLogger(__name__)

VARIANTS = ("exact", "onestep")


class RunAborted(RuntimeError):
    """The online loop hit a state it cannot continue from."""


class LossOracle(Protocol):
    """Per-agent losses for one round, evaluated for all agents at once.

    ``gradient(x)`` takes the stacked states ``(n, *point_shape)`` and returns
    agent ``i``'s gradient at ``x[i]``. ``value(x)`` broadcasts ``x`` against
    the agent axis and returns one value per agent. ``global_value(x)`` is the
    network average ``f_t(x) = (1/n) sum_i f_i(x)``.
    """

    def value(self, x) -> np.ndarray: ...

    def gradient(self, x) -> np.ndarray: ...

    def global_value(self, x) -> np.ndarray: ...

    def lipschitz_bound(self) -> float: ...


@dataclass
class OptimizerConfig:
    variant: str = "exact"
    eta: float = 0.05
    #: ``None`` means the contraction-safe default for the ball's diameter
    gamma: float | None = None
    ball: GeodesicBall | None = None
    kappa: float = -1.0
    #: ``None`` means "take the largest bound reported by the loss oracles"
    lipschitz: float | None = None
    frechet: FrechetSolverConfig = field(default_factory=FrechetSolverConfig)
    record_runtime: bool = True

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise InvalidInput(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if not (math.isfinite(self.eta) and self.eta > 0):
            raise InvalidInput(f"eta must be positive, got {self.eta}")
        if self.gamma is not None and not self.gamma > 0:
            raise InvalidInput(f"gamma must be positive, got {self.gamma}")
        if not self.kappa < 0:
            raise InvalidInput(f"kappa must be negative, got {self.kappa}")

    def resolved_gamma(self) -> float:
        if self.gamma is not None:
            return self.gamma
        if self.ball is None:
            raise InvalidInput("gamma='auto' needs a ball to fix the diameter")
        return gamma_default(self.kappa, self.ball.diameter)


@dataclass
class RoundMetrics:
    t: int
    instant_regret: float
    cum_regret: float
    frechet_var: float
    network_err: float
    network_err_bound: float
    runtime_ns: int
    solver_worst_grad: float


@dataclass
class RegretTrace:
    config: dict
    rows: list[RoundMetrics]
    summary: dict
    states: np.ndarray | None = None
    comparators: np.ndarray | None = None

    @property
    def cum_regret(self) -> np.ndarray:
        return np.array([r.cum_regret for r in self.rows])

    @property
    def instant_regret(self) -> np.ndarray:
        return np.array([r.instant_regret for r in self.rows])

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])


# -- analytic constants ------------------------------------------------------


def balanced_stepsize(D: float, P_T: float, T: int, Cprime: float) -> float:
    """Regret-balancing stepsize ``sqrt(D^2 + 2 D P_T) / sqrt(T C')``, capped at 1."""
    if not (D > 0 and P_T >= 0 and T > 0 and Cprime > 0):
        raise InvalidInput("stepsize needs D, T, C' > 0 and P_T >= 0")
    return min(1.0, math.sqrt(D * D + 2.0 * D * P_T) / math.sqrt(T * Cprime))


def path_variation(M: Manifold, comparators) -> float:
    """Total geodesic length ``sum_t d(u_{t+1}, u_t)`` of a comparator sequence."""
    u = np.asarray(comparators, dtype=float)
    if u.shape[0] < 1:
        raise InvalidInput("path variation needs at least one comparator")
    if u.shape[0] == 1:
        return 0.0
    return float(np.sum(M.dist(u[1:], u[:-1])))


def _check_sigma2(sigma2: float):
    if not sigma2 < 1.0:
        raise InvalidInput("sigma2(W) = 1: the network does not mix and the bound is infinite")


def regret_constant(eta, D, L, kappa, sigma2, n) -> float:
    """Per-round constant of the exact-consensus regret bound."""
    _check_sigma2(sigma2)
    return L * L * zeta(kappa, D + eta * L) + 2.0 * sigma2 * math.sqrt(n) * L * L / (1.0 - sigma2)


def regret_constant_onestep(D, L, kappa, sigma2, n) -> float:
    _check_sigma2(sigma2)
    C3 = zeta(kappa, 2.0 * D)
    return 8.0 * C3 * math.sqrt(n) * L * L / (1.0 - sigma2) + zeta(kappa, 2.0 * D + L) * L * L / 2.0


def theoretical_bound(variant, *, T, P_T, eta, D, L, kappa, sigma2, n) -> float:
    """Upper bound on the dynamic regret after ``T`` rounds."""
    if variant == "exact":
        C = regret_constant(eta, D, L, kappa, sigma2, n)
        return eta * T * C + (D * D + 2.0 * D * P_T) / eta
    if variant == "onestep":
        if eta > 1:
            raise InvalidInput(f"the one-step bound requires eta <= 1, got {eta}")
        C4 = regret_constant_onestep(D, L, kappa, sigma2, n)
        return eta * C4 * T + (D * D + 4.0 * D * P_T) / (2.0 * eta)
    raise InvalidInput(f"unknown variant {variant!r}")


def network_error_bound(variant, eta, n, L, sigma2, C3=None) -> float:
    """Bound on ``max_i d(x_i, x̄)`` holding at every round."""
    _check_sigma2(sigma2)
    if variant == "exact":
        return eta * sigma2 * math.sqrt(n) * L / (1.0 - sigma2)
    if variant == "onestep":
        if C3 is None:
            raise InvalidInput("the one-step network bound needs C3")
        return 4.0 * C3 * eta * math.sqrt(n) * L / (1.0 - sigma2)
    raise InvalidInput(f"unknown variant {variant!r}")


# -- the algorithm ------------------------------------------------------------


def local_step(M: Manifold, x, grad, eta: float, ball: GeodesicBall):
    """Projected Riemannian gradient step ``P_X(exp(x, -eta * grad))``."""
    grad = np.asarray(grad, dtype=float)
    if not np.all(np.isfinite(grad)):
        raise RunAborted("non-finite gradient encountered in the local step")
    return M.project_ball(ball, M.exp(x, -eta * grad))


def run_round(M: Manifold, states, loss: LossOracle, W, cfg: OptimizerConfig):
    """One synchronous round. Returns ``(new_states, worst_solver_grad, converged)``."""
    ball = cfg.ball
    if ball is None:
        raise InvalidInput("the optimizer needs a feasible ball")
    y = local_step(M, states, loss.gradient(states), cfg.eta, ball)
    if cfg.variant == "exact":
        out = consensus_exact(M, y, W, cfg.frechet)
    else:
        out = consensus_onestep(M, y, W, cfg.resolved_gamma())
    return out.points, out.worst_grad, out.converged


def run(
    M: Manifold,
    losses: Sequence[LossOracle],
    W,
    cfg: OptimizerConfig,
    comparators,
    x1=None,
    keep_states: bool = False,
) -> RegretTrace:
    """Run ``len(losses)`` rounds and record the dynamic regret against ``comparators``.

    All agents start from ``x1`` (default: the ball centre).
    """
    W = np.asarray(W, dtype=float)
    n = W.shape[0]
    T = len(losses)
    comparators = np.asarray(comparators, dtype=float)
    if comparators.shape[0] != T:
        raise InvalidInput(f"need {T} comparators, got {comparators.shape[0]}")
    ball = cfg.ball
    if ball is None:
        raise InvalidInput("the optimizer needs a feasible ball")
    if x1 is None:
        x1 = ball.center
    x1 = np.asarray(x1, dtype=float)
    if x1.shape == M.point_shape:
        states = np.broadcast_to(x1, (n,) + M.point_shape).copy()
    else:
        # per-agent starting points
        states = x1.copy()

    s2 = _sigma2(W)
    L = cfg.lipschitz
    if L is None:
        L = max(loss.lipschitz_bound() for loss in losses)
    gamma = cfg.resolved_gamma() if cfg.variant == "onestep" else None
    C3 = zeta(cfg.kappa, 2.0 * ball.diameter)
    gamma_safe = gamma_default(cfg.kappa, ball.diameter)
    gamma_exceeds = gamma is not None and gamma > gamma_safe * (1 + 1e-12)
    if gamma_exceeds:
        log.warning("gamma=%g exceeds the contraction-safe value %g; the one-step bounds assume the latter", gamma, gamma_safe)
    net_bound = network_error_bound(cfg.variant, cfg.eta, n, L, s2, C3) if s2 < 1 else math.inf

    rows = []
    cum = 0.0
    total_ns = 0
    worst_solver = 0.0
    all_converged = True
    trajectory = np.empty((T, n) + M.point_shape) if keep_states else None
    for t in range(T):
        loss = losses[t]
        if keep_states:
            trajectory[t] = states
        u = comparators[t]
        inst = float(np.mean(loss.global_value(states)) - loss.global_value(u))
        cum += inst
        mean = frechet_mean(M, states, cfg.frechet).point
        d = M.dist(mean, states)

        t0 = time.perf_counter_ns()
        states, worst, converged = run_round(M, states, loss, W, cfg)
        elapsed = time.perf_counter_ns() - t0 if cfg.record_runtime else 0
        total_ns += elapsed
        worst_solver = max(worst_solver, worst)
        all_converged &= converged

        rows.append(
            RoundMetrics(
                t=t + 1,
                instant_regret=inst,
                cum_regret=cum,
                frechet_var=float(np.mean(d * d)),
                network_err=float(d.max()),
                network_err_bound=net_bound,
                runtime_ns=int(elapsed),
                solver_worst_grad=float(worst),
            )
        )

    P_T = path_variation(M, comparators)
    try:
        bound = theoretical_bound(
            cfg.variant, T=T, P_T=P_T, eta=cfg.eta, D=ball.diameter, L=L,
            kappa=cfg.kappa, sigma2=s2, n=n,
        )
    except InvalidInput as exc:
        log.warning("regret bound unavailable: %s", exc)
        bound = math.inf
    summary = {
        "variant": cfg.variant,
        "cum_regret": cum,
        "P_T": P_T,
        "bound_theorem": bound,
        "eta": cfg.eta,
        "gamma": gamma,
        "gamma_exceeds_safe": gamma_exceeds,
        "sigma2": s2,
        "lipschitz": L,
        "kappa": cfg.kappa,
        "diameter": ball.diameter,
        "runtime_total_ns": total_ns,
        "solver_worst_grad": worst_solver,
        "solver_converged": all_converged,
        "network_err_bound": net_bound,
    }
    return RegretTrace(config={}, rows=rows, summary=summary, states=trajectory, comparators=comparators)
