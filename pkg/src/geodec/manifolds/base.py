"""Shared contract for the Hadamard manifolds used by the optimizers.

Points and tangent vectors are plain numpy arrays in the ambient coordinates
of the concrete manifold. Every operation broadcasts over leading batch axes;
the trailing ``point_ndim`` axes hold the coordinates of a single point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class InvalidInput(ValueError):
    """Raised when an argument violates an operation's precondition."""


class NumericalError(ArithmeticError):
    """Raised when a matrix factorisation or similar kernel fails."""


ZERO_VELOCITY = 1e-14
_ZETA_SERIES_CUTOFF = 1e-4


def zeta(kappa: float, c: float) -> float:
    """Curvature distortion factor ``sqrt|kappa| c * coth(sqrt|kappa| c)``.

    Equals 1 at ``c = 0`` and grows linearly for large ``c``.
    """
    if not kappa < 0:
        raise InvalidInput(f"kappa must be negative, got {kappa}")
    if not c >= 0:
        raise InvalidInput(f"c must be nonnegative, got {c}")
    x = math.sqrt(-kappa) * c
    if x < _ZETA_SERIES_CUTOFF:
        return 1.0 + x * x / 3.0 - x**4 / 45.0
    return x / math.tanh(x)


@dataclass(frozen=True)
class GeodesicBall:
    """Closed geodesic ball used as the feasible set."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        if not (np.isfinite(self.radius) and self.radius > 0):
            raise InvalidInput(f"ball radius must be positive, got {self.radius}")

    @property
    def diameter(self) -> float:
        return 2.0 * self.radius


class Manifold:
    """Base class for Hadamard manifolds with closed-form exp and log."""

    name = "manifold"
    point_ndim = 1
    #: default lower bound on the sectional curvature
    kappa = -1.0

    @property
    def dim(self) -> int:
        raise NotImplementedError

    @property
    def point_shape(self) -> tuple[int, ...]:
        raise NotImplementedError

    # -- primitives supplied by subclasses ---------------------------------

    def exp(self, x, v):
        raise NotImplementedError

    def log(self, x, y):
        raise NotImplementedError

    def dist(self, x, y):
        raise NotImplementedError

    def inner(self, x, u, v):
        raise NotImplementedError

    def tangent_basis(self, x):
        """Orthonormal basis of the tangent space, stacked on axis ``-point_ndim-1``."""
        raise NotImplementedError

    def check_point(self, x, tol: float = 1e-9):
        raise NotImplementedError

    def check_tangent(self, x, v, tol: float = 1e-9):
        raise NotImplementedError

    def origin(self):
        raise NotImplementedError

    def centroid_guess(self, points, weights=None):
        """Cheap starting point for a Fréchet mean solve."""
        raise NotImplementedError

    # -- derived operations -------------------------------------------------

    def norm(self, x, v):
        return np.sqrt(np.maximum(self.inner(x, v, v), 0.0))

    def zero_tangent(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def expand(self, x, axis: int = -1):
        """Insert a batch axis into ``x`` counted among the batch axes only."""
        x = np.asarray(x, dtype=float)
        nbatch = x.ndim - self.point_ndim
        if axis < 0:
            axis += nbatch + 1
        return np.expand_dims(x, axis)

    def batch_shape(self, x) -> tuple[int, ...]:
        x = np.asarray(x)
        return x.shape[: x.ndim - self.point_ndim]

    def exp_in_basis(self, x, coeffs):
        """``exp(x, sum_i coeffs[i] e_i)`` for the orthonormal basis ``e_i`` at ``x``."""
        basis = self.tangent_basis(x)
        coeffs = np.asarray(coeffs, dtype=float)
        v = np.sum(self._bcast(coeffs) * basis, axis=-self.point_ndim - 1)
        return self.exp(x, v)

    def geodesic_point(self, x, y, t: float):
        if not 0.0 <= t <= 1.0:
            raise InvalidInput(f"t must lie in [0, 1], got {t}")
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if t == 0.0:
            return x.copy()
        if t == 1.0:
            return y.copy()
        return self.exp(x, t * self.log(x, y))

    def project_ball(self, ball: GeodesicBall, z):
        """Metric projection onto ``ball``; points already inside are returned as-is."""
        z = np.asarray(z, dtype=float)
        d = self.dist(ball.center, z)
        outside = d > ball.radius
        if not np.any(outside):
            return z.copy()
        v = self.log(ball.center, z)
        scale = np.where(outside, ball.radius / np.where(outside, d, 1.0), 1.0)
        pulled = self.exp(ball.center, v * self._bcast(scale))
        return np.where(self._bcast(outside), pulled, z)

    def in_ball(self, ball: GeodesicBall, z, tol: float = 1e-9):
        return self.dist(ball.center, z) <= ball.radius + tol

    def _bcast(self, a):
        """Append singleton axes so a batch-shaped array broadcasts over points."""
        a = np.asarray(a)
        return a.reshape(a.shape + (1,) * self.point_ndim)

    def _require_finite(self, *arrays):
        for a in arrays:
            if not np.all(np.isfinite(a)):
                raise InvalidInput(f"non-finite coordinates passed to {self.name}")

    def flatten(self, x):
        """Row-major coordinates of each point, shape ``batch + (prod(point_shape),)``."""
        x = np.asarray(x, dtype=float)
        return x.reshape(self.batch_shape(x) + (-1,))

    def unflatten(self, flat):
        flat = np.asarray(flat, dtype=float)
        return flat.reshape(flat.shape[:-1] + self.point_shape)

    def random_point(self, rng, scale: float = 1.0, base=None):
        """Wrapped Gaussian draw around ``base`` (default the origin)."""
        base = self.origin() if base is None else base
        return self.exp_in_basis(base, rng.normal(0.0, scale, size=self.dim))
