"""Symmetric positive definite matrices under the affine-invariant metric.

Matrix functions go through a symmetric eigendecomposition, and every output
of a product chain is symmetrised to keep round-off from accumulating.
"""

from __future__ import annotations

import numpy as np

from .base import InvalidInput, Manifold, NumericalError

_MIN_EIG = 1e-12


def sym(a):
    a = np.asarray(a, dtype=float)
    return 0.5 * (a + np.swapaxes(a, -1, -2))


def _eigh(a):
    try:
        return np.linalg.eigh(sym(a))
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"symmetric eigendecomposition failed: {exc}") from exc


def _apply(w, q, fw):
    return sym((q * fw[..., None, :]) @ np.swapaxes(q, -1, -2))


def _spd_eigh(x):
    w, q = _eigh(x)
    if np.any(w <= _MIN_EIG):
        raise InvalidInput(f"matrix is not positive definite (min eigenvalue {w.min():.3g})")
    return w, q


def sqrt_spd(x):
    w, q = _spd_eigh(x)
    return _apply(w, q, np.sqrt(w))


def inv_sqrt_spd(x):
    w, q = _spd_eigh(x)
    return _apply(w, q, 1.0 / np.sqrt(w))


def expm_sym(a):
    w, q = _eigh(a)
    return _apply(w, q, np.exp(w))


def logm_spd(x):
    w, q = _spd_eigh(x)
    return _apply(w, q, np.log(w))


def _sqrt_pair(x):
    w, q = _spd_eigh(x)
    s = np.sqrt(w)
    return _apply(w, q, s), _apply(w, q, 1.0 / s)


class SPD(Manifold):
    """``m x m`` SPD matrices with ``<U, V>_X = tr(X^-1 U X^-1 V)``.

    ``kappa`` is the curvature lower bound used by the analytic constants;
    sectional curvatures of this metric lie in ``[-1/2, 0]``.
    """

    name = "spd"
    point_ndim = 2

    def __init__(self, m: int = 3, kappa: float = -0.5):
        if m < 1:
            raise InvalidInput(f"matrix size must be >= 1, got {m}")
        if not kappa < 0:
            raise InvalidInput(f"kappa must be negative, got {kappa}")
        self.m = int(m)
        self.kappa = float(kappa)

    def __repr__(self):
        return f"SPD(m={self.m}, kappa={self.kappa})"

    @property
    def dim(self) -> int:
        return self.m * (self.m + 1) // 2

    @property
    def point_shape(self):
        return (self.m, self.m)

    def origin(self):
        return np.eye(self.m)

    def _whiten(self, x, v):
        _, xis = _sqrt_pair(x)
        return sym(xis @ v @ xis)

    def inner(self, x, u, v):
        _, xis = _sqrt_pair(x)
        uu = xis @ np.asarray(u, dtype=float) @ xis
        vv = xis @ np.asarray(v, dtype=float) @ xis
        return np.sum(uu * np.swapaxes(vv, -1, -2), axis=(-2, -1))

    def norm(self, x, v):
        return np.linalg.norm(self._whiten(x, v), axis=(-2, -1))

    def exp(self, x, v):
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        self._require_finite(x, v)
        xs, xis = _sqrt_pair(x)
        w = sym(xis @ sym(v) @ xis)
        out = sym(xs @ expm_sym(w) @ xs)
        still = np.linalg.norm(w, axis=(-2, -1)) < 1e-14
        return np.where(still[..., None, None], x, out)

    def log(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        self._require_finite(x, y)
        xs, xis = _sqrt_pair(x)
        return sym(xs @ logm_spd(sym(xis @ y @ xis)) @ xs)

    def dist(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        self._require_finite(x, y)
        _, xis = _sqrt_pair(x)
        w = np.linalg.eigvalsh(sym(xis @ y @ xis))
        if np.any(w <= 0):
            raise InvalidInput("matrix is not positive definite")
        return np.sqrt(np.sum(np.log(w) ** 2, axis=-1))

    def identity_basis(self):
        m = self.m
        out = np.zeros((self.dim, m, m))
        k = 0
        for i in range(m):
            out[k, i, i] = 1.0
            k += 1
        for i in range(m):
            for j in range(i + 1, m):
                out[k, i, j] = out[k, j, i] = 1.0 / np.sqrt(2.0)
                k += 1
        return out

    def tangent_basis(self, x):
        xs, _ = _sqrt_pair(x)
        xs = xs[..., None, :, :]
        return sym(xs @ self.identity_basis() @ xs)

    def check_point(self, x, tol: float = 1e-10):
        x = np.asarray(x, dtype=float)
        if x.shape[-2:] != self.point_shape:
            raise InvalidInput(f"expected {self.m}x{self.m} matrices, got shape {x.shape}")
        self._require_finite(x)
        scale = np.maximum(1.0, np.abs(x).max(axis=(-2, -1)))
        if np.any(np.abs(x - np.swapaxes(x, -1, -2)).max(axis=(-2, -1)) > tol * scale):
            raise InvalidInput("matrix is not symmetric")
        if np.any(np.linalg.eigvalsh(sym(x)) <= _MIN_EIG):
            raise InvalidInput("matrix is not positive definite")
        return x

    def check_tangent(self, x, v, tol: float = 1e-10):
        v = np.asarray(v, dtype=float)
        self._require_finite(v)
        scale = np.maximum(1.0, np.abs(v).max(axis=(-2, -1)))
        if np.any(np.abs(v - np.swapaxes(v, -1, -2)).max(axis=(-2, -1)) > tol * scale):
            raise InvalidInput("tangent vector must be a symmetric matrix")
        return v

    def centroid_guess(self, points, weights=None):
        # log-Euclidean mean: exact for commuting matrices, close otherwise
        logs = logm_spd(points)
        if weights is None:
            mean = logs.mean(axis=-3)
        else:
            mean = np.tensordot(np.asarray(weights, dtype=float), logs, axes=([-1], [-3]))
        return expm_sym(mean)
