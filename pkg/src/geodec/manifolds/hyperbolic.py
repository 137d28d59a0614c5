"""Hyperbolic space in the hyperboloid (Lorentz) model.

Index 0 is the timelike coordinate, so the apex is ``(1, 0, ..., 0)``.
"""

from __future__ import annotations

import numpy as np

from .base import ZERO_VELOCITY, InvalidInput, Manifold


def _signature(k: int):
    sig = np.ones(k)
    sig[0] = -1.0
    return sig


def minkowski_form(x, y):
    """Minkowski bilinear form ``sum_{i>=1} x_i y_i - x_0 y_0``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1] != y.shape[-1]:
        raise InvalidInput(f"dimension mismatch: {x.shape[-1]} vs {y.shape[-1]}")
    # a matvec against the signature is much faster than a short-axis sum
    return (x * y) @ _signature(x.shape[-1])


def acosh1p(u):
    """``acosh(1 + u)`` without cancellation for small ``u``."""
    u = np.maximum(u, 0.0)
    return np.log1p(u + np.sqrt(u * (u + 2.0)))


def cosh_dist_minus_one(x, y):
    """``cosh d(x, y) - 1`` from whichever of two equal forms rounds better.

    The chordal form ``<x-y, x-y>_M / 2`` is exact for nearby points but
    cancels badly when one point is far from the other; ``-<x, y>_M - 1``
    has the opposite behaviour. Each pair uses the form whose terms are
    smaller in magnitude.
    """
    sig = _signature(x.shape[-1])
    ones = np.abs(sig)
    diff = x - y
    sq = diff * diff
    xy = x * y
    chordal = 0.5 * (sq @ sig)
    direct = -(xy @ sig) - 1.0
    use_chord = sq @ ones <= 2.0 * (np.abs(xy) @ ones)
    return np.maximum(np.where(use_chord, chordal, direct), 0.0)


def lift(spatial):
    """Point of the hyperboloid with the given spatial coordinates."""
    spatial = np.asarray(spatial, dtype=float)
    x0 = np.sqrt(1.0 + np.sum(spatial * spatial, axis=-1, keepdims=True))
    return np.concatenate([x0, spatial], axis=-1)


def to_poincare_disk(x):
    """Stereographic projection through ``(-1, 0, ..., 0)`` onto the unit ball."""
    x = np.asarray(x, dtype=float)
    return x[..., 1:] / (1.0 + x[..., :1])


def from_poincare_disk(p):
    p = np.asarray(p, dtype=float)
    sq = np.sum(p * p, axis=-1, keepdims=True)
    if np.any(sq >= 1.0):
        raise InvalidInput("Poincaré coordinates must lie strictly inside the unit ball")
    return np.concatenate([1.0 + sq, 2.0 * p], axis=-1) / (1.0 - sq)


class Hyperboloid(Manifold):
    """``H^m = {x in R^{m+1} : <x, x>_M = -1, x_0 > 0}`` with curvature -1."""

    name = "hyperbolic"
    point_ndim = 1
    kappa = -1.0

    def __init__(self, m: int = 2):
        if m < 1:
            raise InvalidInput(f"hyperbolic dimension must be >= 1, got {m}")
        self.m = int(m)

    def __repr__(self):
        return f"Hyperboloid(m={self.m})"

    @property
    def dim(self) -> int:
        return self.m

    @property
    def point_shape(self):
        return (self.m + 1,)

    def origin(self):
        o = np.zeros(self.m + 1)
        o[0] = 1.0
        return o

    def renormalize(self, x):
        # Recomputing x0 from the spatial part is exact; dividing by
        # sqrt(-<x,x>) loses everything for points far from the apex.
        return lift(np.asarray(x, dtype=float)[..., 1:])

    def inner(self, x, u, v):
        return minkowski_form(u, v)

    def exp(self, x, v):
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        self._require_finite(x, v)
        nv = self.norm(x, v)
        small = nv < ZERO_VELOCITY
        safe = np.where(small, 1.0, nv)
        y = np.cosh(nv)[..., None] * x + (np.sinh(nv) / safe)[..., None] * v
        y = self.renormalize(y)
        return np.where(small[..., None], np.broadcast_to(x, y.shape), y)

    def dist(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return acosh1p(cosh_dist_minus_one(x, y))

    def log(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        self._require_finite(x, y)
        c = cosh_dist_minus_one(x, y)
        d = acosh1p(c)
        # y + <x,y>_M x  ==  (y - x) - (cosh d - 1) x
        u = (y - x) - c[..., None] * x
        u = u + minkowski_form(x, u)[..., None] * x
        nu = self.norm(x, u)
        small = (nu < ZERO_VELOCITY) | (d == 0.0)
        scale = np.where(small, 0.0, d / np.where(small, 1.0, nu))
        return scale[..., None] * u

    def boost(self, x, p):
        """Apply the Lorentz boost carrying the apex to ``x`` to the point ``p``."""
        x = np.asarray(x, dtype=float)
        p = np.asarray(p, dtype=float)
        x0, xs = x[..., :1], x[..., 1:]
        p0, ps = p[..., :1], p[..., 1:]
        dot = np.sum(xs * ps, axis=-1, keepdims=True)
        out_s = xs * p0 + ps + xs * dot / (1.0 + x0)
        out_0 = x0 * p0 + dot
        return np.concatenate([out_0, out_s], axis=-1)

    def tangent_basis(self, x):
        # parallel transport of the standard spatial frame from the apex
        x = np.asarray(x, dtype=float)
        eye = np.zeros((self.m, self.m + 1))
        eye[:, 1:] = np.eye(self.m)
        xs = x[..., None, 1:]
        o_plus_x = x[..., None, :] + self.origin()
        coef = xs / (1.0 + x[..., None, :1])
        return eye + np.swapaxes(coef, -1, -2) * o_plus_x

    def exp_in_basis(self, x, coeffs):
        coeffs = np.asarray(coeffs, dtype=float)
        r = np.linalg.norm(coeffs, axis=-1)
        safe = np.where(r < ZERO_VELOCITY, 1.0, r)
        at_apex = np.concatenate(
            [np.cosh(r)[..., None], (np.sinh(r) / safe)[..., None] * coeffs], axis=-1
        )
        return self.renormalize(self.boost(x, at_apex))

    def check_point(self, x, tol: float = 1e-9):
        x = np.asarray(x, dtype=float)
        if x.shape[-1:] != self.point_shape:
            raise InvalidInput(f"expected {self.m + 1} coordinates, got shape {x.shape}")
        self._require_finite(x)
        if np.any(x[..., 0] <= 0):
            raise InvalidInput("hyperboloid point must have x_0 > 0")
        # relative residual so that far-out points are judged fairly
        resid = np.abs(minkowski_form(x, x) + 1.0) / np.maximum(1.0, x[..., 0] ** 2)
        if np.any(resid > tol):
            raise InvalidInput(f"point is off the hyperboloid (residual {resid.max():.3g})")
        return x

    def check_tangent(self, x, v, tol: float = 1e-9):
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        self._require_finite(v)
        scale = np.maximum(1.0, np.abs(x).max(axis=-1) * np.abs(v).max(axis=-1))
        if np.any(np.abs(minkowski_form(x, v)) > tol * scale):
            raise InvalidInput("vector is not tangent to the hyperboloid at its base")
        return v

    def centroid_guess(self, points, weights=None):
        points = np.asarray(points, dtype=float)
        if weights is None:
            mean = points.mean(axis=-2)
        else:
            mean = np.tensordot(np.asarray(weights, dtype=float), points, axes=([-1], [-2]))
        # Lorentzian centroid: rescale the ambient mean back onto the sheet
        mean = mean / np.sqrt(np.maximum(-minkowski_form(mean, mean), 1e-300))[..., None]
        return self.renormalize(mean)
