"""Time-varying data clouds for the four benchmark environments.

Every round hands agent ``i`` a cloud of ``K`` points. Clouds come from a
two-level draw: an outer base point per agent around the environment's
anchor, then ``K`` inner points around that base point. Rounds are numbered
from 1 and blocks of length ``T0`` start at rounds ``s*T0 + 1``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from ..manifolds import SPD, Hyperboloid
from ..manifolds.base import InvalidInput, Manifold
from ..manifolds.spd import sym

KINDS = ("static", "abrupt", "general", "spd_mixed")

SAMPLER_NOTE = "wrapped Gaussian: tangent Gaussian at the anchor pushed through exp"


@dataclass
class Scenario:
    manifold: str = "hyperbolic"
    dim: int = 2
    kind: str = "static"
    n: int = 40
    K: int = 100
    T: int = 400
    T0: int = 40
    sigma_outer: float = 5.0
    sigma_inner: float = 1.0
    seed: int = 0
    #: spd_mixed: last round of the abrupt phase
    switch_time: int = 40
    #: spd_mixed: upper end of the uniform tangent entries
    entry_high: float = 0.1
    #: SPD curvature lower bound; hyperbolic space is fixed at -1
    kappa: float | None = None

    def __post_init__(self):
        if self.manifold not in ("hyperbolic", "spd"):
            raise InvalidInput(f"unknown manifold {self.manifold!r}")
        if self.kind not in KINDS:
            raise InvalidInput(f"unknown scenario kind {self.kind!r}; expected one of {KINDS}")
        if self.T < 1 or self.K < 1 or self.n < 1:
            raise InvalidInput("T, K and n must all be >= 1")
        if self.kind != "static" and self.T0 < 1:
            raise InvalidInput(f"T0 must be >= 1, got {self.T0}")
        if self.kind in ("abrupt", "general") and not (self.manifold == "hyperbolic" and self.dim >= 2):
            raise InvalidInput(f"{self.kind!r} needs hyperbolic space of dimension >= 2")
        if self.kind == "spd_mixed" and self.manifold != "spd":
            raise InvalidInput("'spd_mixed' runs on SPD matrices")
        if self.sigma_outer <= 0 or self.sigma_inner <= 0 or self.entry_high <= 0:
            raise InvalidInput("dispersion parameters must be positive")

    def to_dict(self) -> dict:
        return asdict(self)

    def make_manifold(self) -> Manifold:
        if self.manifold == "hyperbolic":
            return Hyperboloid(self.dim)
        return SPD(self.dim, kappa=-0.5 if self.kappa is None else self.kappa)


@dataclass
class ScenarioData:
    """Round ``t`` (1-based) uses ``rounds[t-1]`` of shape ``(n, K, *point_shape)``.

    Rounds inside an unchanged block share the same array object.
    """

    manifold: Manifold
    rounds: list
    center: np.ndarray
    anchors: list


def sample_wrapped_gaussian(M: Manifold, alpha, sigma: float, rng, size: int | None = None):
    """``exp(alpha, sum_i c_i e_i)`` with iid ``c_i ~ N(0, sigma^2)`` in an orthonormal frame."""
    if not sigma > 0:
        raise InvalidInput(f"sigma must be positive, got {sigma}")
    shape = (M.dim,) if size is None else (size, M.dim)
    coeffs = rng.normal(0.0, sigma, size=shape)
    return M.exp_in_basis(np.asarray(alpha, dtype=float), coeffs)


def uniform_symmetric(rng, m: int, high: float, size: int | None = None):
    """Symmetric matrices whose upper-triangle entries are iid ``U(0, high)``."""
    shape = (m, m) if size is None else (size, m, m)
    a = rng.uniform(0.0, high, size=shape)
    upper = np.triu(a)
    return upper + np.swapaxes(np.triu(a, 1), -1, -2)


def hyperbolic_anchor_pair(m: int):
    """Anchors of the abrupt environment: the apex and ``(3, 2, 2, 0, ...)``."""
    apex = np.zeros(m + 1)
    apex[0] = 1.0
    other = np.zeros(m + 1)
    other[:3] = (3.0, 2.0, 2.0)
    return apex, other


def drifting_anchor(m: int, r: int, T0: int):
    """``cosh(r/T0) (1,0,..) + sinh(r/T0) (0, 1/sqrt2, 1/sqrt2, 0, ..)``."""
    a = np.zeros(m + 1)
    a[0] = np.cosh(r / T0)
    a[1] = a[2] = np.sinh(r / T0) / np.sqrt(2.0)
    return a


def _two_level(M, anchor, scn: Scenario, rng):
    outer = sample_wrapped_gaussian(M, anchor, scn.sigma_outer, rng, size=scn.n)
    coeffs = rng.normal(0.0, scn.sigma_inner, size=(scn.n, scn.K, M.dim))
    return M.exp_in_basis(outer[:, None], coeffs)


def _spd_two_level(M: SPD, base, scn: Scenario, rng):
    outer = M.exp(base, uniform_symmetric(rng, M.m, scn.entry_high, size=scn.n))
    inner = uniform_symmetric(rng, M.m, scn.entry_high, size=scn.n * scn.K)
    inner = inner.reshape(scn.n, scn.K, M.m, M.m)
    return sym(M.exp(outer[:, None], inner))


def gen_scenario(scn: Scenario) -> ScenarioData:
    """Deterministic in ``scn.seed``; each block or round draws from its own stream."""
    M = scn.make_manifold()
    center = M.origin()
    rounds = []
    anchors = []
    cache: dict = {}

    def stream(*key):
        return np.random.default_rng([scn.seed, *key])

    for t in range(1, scn.T + 1):
        if scn.kind == "static":
            key = ("static",)
            if key not in cache:
                cache[key] = (_sample_anchor_cloud(M, scn, center, stream(0)), center)
        elif scn.kind == "abrupt":
            s = (t - 1) // scn.T0
            key = ("block", s)
            if key not in cache:
                apex, other = hyperbolic_anchor_pair(scn.dim)
                anchor = apex if s % 2 == 0 else other
                cache[key] = (_two_level(M, anchor, scn, stream(1, s)), anchor)
        elif scn.kind == "general":
            r = (t - 1) % scn.T0
            anchor = drifting_anchor(scn.dim, r, scn.T0)
            key = ("round", t)
            cache[key] = (_two_level(M, anchor, scn, stream(2, t)), anchor)
        else:
            if t <= scn.switch_time:
                s = (t - 1) // scn.T0
                key = ("block", s)
                if key not in cache:
                    anchor = np.eye(M.m) * (1.0 if s % 2 == 0 else 3.0)
                    cache[key] = (_spd_two_level(M, anchor, scn, stream(3, s)), anchor)
            else:
                r = (t - 1) % scn.T0
                anchor = (1.0 + 2.0 * r / scn.T0) * np.eye(M.m)
                key = ("round", t)
                cache[key] = (_spd_two_level(M, anchor, scn, stream(4, t)), anchor)
        cloud, anchor = cache[key]
        rounds.append(cloud)
        anchors.append(anchor)
    return ScenarioData(M, rounds, center, anchors)


def _sample_anchor_cloud(M, scn, center, rng):
    if isinstance(M, SPD):
        return _spd_two_level(M, center, scn, rng)
    return _two_level(M, center, scn, rng)


def max_data_distance(data: ScenarioData) -> float:
    M = data.manifold
    seen = set()
    far = 0.0
    for cloud in data.rounds:
        if id(cloud) in seen:
            continue
        seen.add(id(cloud))
        far = max(far, float(M.dist(data.center, cloud).max()))
    return far
