"""Fréchet means and the two consensus steps.

``consensus_exact`` replaces every agent by the weighted Fréchet mean of the
states it hears from; ``consensus_onestep`` takes one closed-form Riemannian
gradient step towards that mean.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .manifolds.base import InvalidInput, Manifold, zeta

_ROUNDOFF = 1e-12
_ARMIJO_C = 1e-4
_MAX_HALVINGS = 50


@dataclass(frozen=True)
class FrechetSolverConfig:
    max_iters: int = 200
    tol: float = 1e-10
    step: float = 1.0

    def __post_init__(self):
        if self.max_iters < 1:
            raise InvalidInput(f"max_iters must be >= 1, got {self.max_iters}")
        if not self.tol > 0:
            raise InvalidInput(f"tol must be positive, got {self.tol}")
        if not 0 < self.step <= 1:
            raise InvalidInput(f"step must lie in (0, 1], got {self.step}")


@dataclass
class FrechetResult:
    point: np.ndarray
    grad_norm: float
    converged: bool
    iterations: int


@dataclass
class ConsensusOutput:
    points: np.ndarray
    worst_grad: float = 0.0
    converged: bool = True


def _solve_rows(M: Manifold, points, weights, init, cfg: FrechetSolverConfig):
    """Minimise ``sum_j w_rj d^2(y, p_j)`` for every row ``r`` of ``weights`` at once.

    Riemannian gradient descent ``y <- exp(y, s * sum_j w_rj log(y, p_j))`` with
    per-row Armijo backtracking starting from ``cfg.step``. Only the nonzero
    weights take part. Returns ``(points, grad_norms, converged, iterations)``.
    """
    weights = np.asarray(weights, dtype=float)
    rows, cols = np.nonzero(weights)
    w = weights[rows, cols]
    targets = points[cols]
    r = weights.shape[0]

    def descent(y):
        logs = M.log(y[rows], targets)
        g = np.zeros_like(y)
        np.add.at(g, rows, M._bcast(w) * logs)
        return g

    def objective(y):
        d = M.dist(y[rows], targets)
        f = np.zeros(r)
        np.add.at(f, rows, w * d * d)
        return f

    y = np.array(init, dtype=float)
    g = descent(y)
    gn = M.norm(y, g)
    f = objective(y)
    best, best_gn = y.copy(), gn.copy()
    last_step = np.full(r, cfg.step)
    it = 0
    for it in range(1, cfg.max_iters + 1):
        active = gn > cfg.tol
        if not active.any():
            it -= 1
            break
        # once the expected decrease drowns in round-off, reuse the last good step
        noisy = active & (cfg.step * gn * gn < _ROUNDOFF * np.maximum(f, 1.0))
        step = np.where(noisy, last_step, cfg.step)
        pending = active.copy()
        cand = y.copy()
        f_new = f.copy()
        for _ in range(_MAX_HALVINGS):
            idx = np.flatnonzero(pending)
            cand[idx] = M.exp(y[idx], M._bcast(step[idx]) * g[idx])
            f_trial = objective(cand)
            ok = pending & (noisy | (f_trial <= f - _ARMIJO_C * 2.0 * step * gn * gn))
            f_new[ok] = f_trial[ok]
            last_step[ok & ~noisy] = step[ok & ~noisy]
            pending &= ~ok
            if not pending.any():
                break
            step[pending] *= 0.5
        # rows that never satisfied the test keep their old iterate
        cand[pending] = y[pending]
        y = cand
        f = f_new
        g = descent(y)
        gn = M.norm(y, g)
        better = gn < best_gn
        best[better] = y[better]
        best_gn[better] = gn[better]
    converged = best_gn <= cfg.tol
    return best, best_gn, converged, it


def _largest_weight_init(points, weights):
    # argmax returns the lowest index on ties
    return points[np.argmax(weights, axis=1)]


def weighted_frechet_mean(
    M: Manifold, points, weights, cfg: FrechetSolverConfig | None = None, init=None
) -> FrechetResult:
    """Weighted Fréchet mean of ``points`` (stacked on axis 0)."""
    cfg = cfg or FrechetSolverConfig()
    points = np.asarray(points, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (points.shape[0],):
        raise InvalidInput(f"need one weight per point, got {weights.shape} for {points.shape[0]}")
    if weights.min() < 0 or abs(weights.sum() - 1.0) > 1e-12:
        raise InvalidInput("weights must be nonnegative and sum to 1")
    start = _largest_weight_init(points, weights[None]) if init is None else np.asarray(init)[None]
    y, gn, conv, its = _solve_rows(M, points, weights[None], start, cfg)
    return FrechetResult(y[0], float(gn[0]), bool(conv[0]), its)


def frechet_mean(M: Manifold, points, cfg: FrechetSolverConfig | None = None) -> FrechetResult:
    """Uniform Fréchet mean, started from the manifold's cheap centroid estimate."""
    points = np.asarray(points, dtype=float)
    n = points.shape[0]
    return weighted_frechet_mean(
        M, points, np.full(n, 1.0 / n), cfg, init=M.centroid_guess(points)
    )


def frechet_variance(M: Manifold, points, cfg: FrechetSolverConfig | None = None) -> float:
    """``min_z (1/n) sum_i d^2(z, z_i)``."""
    points = np.asarray(points, dtype=float)
    if points.shape[0] == 1:
        return 0.0
    mean = frechet_mean(M, points, cfg).point
    return float(np.mean(M.dist(mean, points) ** 2))


def consensus_exact(
    M: Manifold, states, W, cfg: FrechetSolverConfig | None = None
) -> ConsensusOutput:
    """Every row of ``W`` yields the weighted Fréchet mean of the frozen input states."""
    cfg = cfg or FrechetSolverConfig()
    states = np.asarray(states, dtype=float)
    W = np.asarray(W, dtype=float)
    y, gn, conv, _ = _solve_rows(M, states, W, _largest_weight_init(states, W), cfg)
    return ConsensusOutput(y, float(gn.max()), bool(conv.all()))


def consensus_onestep(M: Manifold, states, W, gamma: float) -> ConsensusOutput:
    """``x_i = exp(y_i, gamma * sum_j w_ij log(y_i, y_j))`` for every agent."""
    if not gamma > 0:
        raise InvalidInput(f"gamma must be positive, got {gamma}")
    states = np.asarray(states, dtype=float)
    W = np.asarray(W, dtype=float)
    rows, cols = np.nonzero(W)
    logs = M.log(states[rows], states[cols])
    v = np.zeros_like(states)
    np.add.at(v, rows, M._bcast(W[rows, cols]) * logs)
    return ConsensusOutput(M.exp(states, gamma * v))


def gamma_default(kappa: float, D: float) -> float:
    """Consensus step ``1 / (2 zeta(kappa, 2D))`` that guarantees contraction."""
    if not D > 0:
        raise InvalidInput(f"diameter must be positive, got {D}")
    return 1.0 / (2.0 * zeta(kappa, 2.0 * D))
