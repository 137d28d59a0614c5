"""Fréchet-mean losses ``f_i(x) = (1/K) sum_k d^2(x, z_ik)``."""

from __future__ import annotations

import numpy as np

from ..consensus import FrechetResult, FrechetSolverConfig, frechet_mean
from ..manifolds.base import GeodesicBall, InvalidInput, Manifold


class FrechetLoss:
    """Fréchet losses of ``n`` agents, each holding a cloud of ``K`` points.

    ``points`` has shape ``(n, K, *point_shape)``; a single cloud
    ``(K, *point_shape)`` is treated as one agent and the agent axis is
    dropped from the results.
    """

    def __init__(self, M: Manifold, points, ball: GeodesicBall | None = None):
        points = np.asarray(points, dtype=float)
        self.single = points.ndim == M.point_ndim + 1
        if self.single:
            points = points[None]
        if points.ndim != M.point_ndim + 2 or points.shape[1] < 1:
            raise InvalidInput(f"expected (n, K, *point) data, got shape {points.shape}")
        self.M = M
        self.points = points
        self.pooled = points.reshape((-1,) + M.point_shape)
        self.ball = ball
        self._lipschitz = None

    @property
    def n_agents(self) -> int:
        return self.points.shape[0]

    @property
    def K(self) -> int:
        return self.points.shape[1]

    def _sq(self, x, cloud):
        d = self.M.dist(self.M.expand(x, -1), cloud)
        return d * d

    def value(self, x):
        """Loss of every agent at ``x`` (broadcast against the agent axis)."""
        out = self._sq(self.M.expand(x, -1), self.points).mean(axis=-1)
        return out[..., 0] if self.single else out

    def gradient(self, x):
        """Riemannian gradient ``-(2/K) sum_k log(x_i, z_ik)`` for each agent's state."""
        x = np.asarray(x, dtype=float)
        if self.single and x.shape == self.M.point_shape:
            return -2.0 * self.M.log(x, self.points[0]).mean(axis=0)
        logs = self.M.log(self.M.expand(x, -1), self.points)
        return -2.0 * logs.mean(axis=1)

    def global_value(self, x):
        """Network-average loss ``(1/n) sum_i f_i(x)``."""
        return self._sq(x, self.pooled).mean(axis=-1)

    def lipschitz_bound(self) -> float:
        """``2 max_k d(c, z_k) + 2 R``: bounds the gradient norm anywhere in the ball."""
        if self.ball is None:
            raise InvalidInput("a Lipschitz bound needs the feasible ball")
        if self._lipschitz is None:
            far = float(self.M.dist(self.ball.center, self.pooled).max())
            self._lipschitz = 2.0 * far + 2.0 * self.ball.radius
        return self._lipschitz


def frechet_loss(M: Manifold, points, ball: GeodesicBall | None = None) -> FrechetLoss:
    return FrechetLoss(M, points, ball)


def global_minimizer(
    M: Manifold, round_points, cfg: FrechetSolverConfig | None = None
) -> FrechetResult:
    """Minimiser of the network-average loss: the Fréchet mean of the pooled clouds."""
    cfg = cfg or FrechetSolverConfig(max_iters=1000, tol=1e-10)
    pooled = np.asarray(round_points, dtype=float).reshape((-1,) + M.point_shape)
    return frechet_mean(M, pooled, cfg)
