"""Randomised numerical checks of the geometric and consensus inequalities.

Each suite draws its own seeded cases and reports the worst margin, i.e.
``max(lhs - rhs)`` over the cases; a suite passes when that margin is at
most its slack.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from ..consensus import (
    FrechetSolverConfig,
    consensus_exact,
    consensus_onestep,
    frechet_variance,
    gamma_default,
    weighted_frechet_mean,
)
from ..manifolds import SPD, Hyperboloid
from ..manifolds.base import GeodesicBall, Manifold, zeta
from ..network import metropolis_weights, random_connected_graph, ring_knn_graph, sigma2
from .losses import FrechetLoss

TIGHT_SOLVER = FrechetSolverConfig(max_iters=500, tol=1e-12)


@dataclass
class CheckResult:
    name: str
    cases: int
    worst_margin: float
    slack: float
    seconds: float

    @property
    def passed(self) -> bool:
        return self.worst_margin <= self.slack

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{status}  {self.name:<34} cases={self.cases:<5d} "
            f"worst margin={self.worst_margin:+.3e} (slack {self.slack:.0e})  {self.seconds:.2f}s"
        )


def default_manifolds() -> list[Manifold]:
    return [Hyperboloid(2), SPD(3)]


# -- samplers -------------------------------------------------------------------


def random_tangent(M: Manifold, x, rng, max_norm: float):
    """Tangent vector at ``x`` with a uniform random direction and norm in ``[0, max_norm]``."""
    c = rng.normal(size=M.dim)
    c *= rng.uniform(0.0, max_norm) / np.linalg.norm(c)
    basis = M.tangent_basis(x)
    return np.tensordot(c, basis, axes=(0, 0))


def sample_in_ball(M: Manifold, ball: GeodesicBall, rng, size: int):
    """Points at uniformly random geodesic distance ``<= radius`` from the centre."""
    c = rng.normal(size=(size, M.dim))
    c /= np.linalg.norm(c, axis=1, keepdims=True)
    c *= rng.uniform(0.0, ball.radius, size=(size, 1))
    return M.exp_in_basis(ball.center, c)


def random_points(M: Manifold, rng, size: int, spread: float = 1.5):
    """Wrapped Gaussian cloud around a random base point."""
    base = M.random_point(rng, spread)
    return M.exp_in_basis(base, rng.normal(0.0, spread, size=(size, M.dim)))


def well_conditioned(M: Manifold, points, max_cond: float = 1e4) -> bool:
    """SPD rounding error grows with the condition number; keep probes where it is modest."""
    if not isinstance(M, SPD):
        return True
    eig = np.linalg.eigvalsh(np.asarray(points))
    return bool(np.all(eig[..., -1] <= max_cond * eig[..., 0]))


def _angle_cos(M, p, q, r):
    u, v = M.log(p, q), M.log(p, r)
    nu, nv = M.norm(p, u), M.norm(p, v)
    return float(np.clip(M.inner(p, u, v) / (nu * nv), -1.0, 1.0))


# -- suites ---------------------------------------------------------------------


def check_round_trip(M: Manifold, rng, cases: int = 1000, max_norm: float = 5.0) -> CheckResult:
    t0 = time.perf_counter()
    worst = -math.inf
    for _ in range(cases):
        x = M.random_point(rng, 1.0)
        v = random_tangent(M, x, rng, max_norm)
        back = M.log(x, M.exp(x, v))
        err = float(M.norm(x, back - v))
        worst = max(worst, err - 1e-7 * (1.0 + float(M.norm(x, v))))
    return CheckResult(f"exp/log round trip [{M.name}]", cases, worst, 0.0, time.perf_counter() - t0)


def check_projection(M: Manifold, rng, cases: int = 1000) -> CheckResult:
    """Projection onto a ball never moves a point away from the ball and is nonexpansive."""
    t0 = time.perf_counter()
    worst = -math.inf
    for _ in range(cases):
        ball = GeodesicBall(M.random_point(rng, 1.0), rng.uniform(0.2, 2.0))
        x = sample_in_ball(M, ball, rng, 1)[0]
        u, w = M.exp_in_basis(ball.center, rng.normal(0.0, 2.0, size=(2, M.dim)))
        pu, pw = M.project_ball(ball, u), M.project_ball(ball, w)
        worst = max(
            worst,
            float(M.dist(x, pu) - M.dist(x, u)),
            float(M.dist(pu, pw) - M.dist(u, w)),
            float(M.dist(ball.center, pu) - ball.radius),
        )
    return CheckResult(f"ball projection [{M.name}]", cases, worst, 1e-9, time.perf_counter() - t0)


def check_triangles(M: Manifold, rng, cases: int = 1000, kappa: float | None = None):
    """Upper (curvature-bounded) and lower (nonpositive curvature) law-of-cosines bounds."""
    kappa = M.kappa if kappa is None else kappa
    t0 = time.perf_counter()
    upper = lower = -math.inf
    for _ in range(cases):
        p, q, r = random_points(M, rng, 3, spread=rng.uniform(0.1, 2.5))
        a, b, c = float(M.dist(q, r)), float(M.dist(p, q)), float(M.dist(p, r))
        if b == 0.0 or c == 0.0:
            continue
        cross = 2.0 * b * c * _angle_cos(M, p, q, r)
        upper = max(upper, a * a - (zeta(kappa, c) * b * b + c * c - cross))
        lower = max(lower, b * b + c * c - cross - a * a)
    dt = time.perf_counter() - t0
    return [
        CheckResult(f"comparison upper bound [{M.name}]", cases, upper, 1e-8, dt),
        CheckResult(f"comparison lower bound [{M.name}]", cases, lower, 1e-8, dt),
    ]


def _random_consensus_case(M: Manifold, rng, n: int):
    g = random_connected_graph(n, rng, p=rng.uniform(0.1, 0.6))
    W = metropolis_weights(g)
    ball = GeodesicBall(M.random_point(rng, 1.0), rng.uniform(0.3, 3.0))
    return W, ball, sample_in_ball(M, ball, rng, n)


def check_exact_contraction(M: Manifold, rng, cases: int = 250) -> CheckResult:
    """Fréchet variance after exact consensus is at most sigma2^2 times the variance before."""
    t0 = time.perf_counter()
    worst = -math.inf
    for k in range(cases):
        n = (4, 8, 16)[k % 3]
        W, _, y = _random_consensus_case(M, rng, n)
        before = frechet_variance(M, y, TIGHT_SOLVER)
        after = frechet_variance(M, consensus_exact(M, y, W, TIGHT_SOLVER).points, TIGHT_SOLVER)
        worst = max(worst, after - sigma2(W) ** 2 * before)
    return CheckResult(f"exact consensus contraction [{M.name}]", cases, worst, 1e-7, time.perf_counter() - t0)


def check_onestep_contraction(M: Manifold, rng, cases: int = 250, kappa: float | None = None) -> CheckResult:
    """Variance contraction of the closed-form consensus step at the default gamma."""
    kappa = M.kappa if kappa is None else kappa
    t0 = time.perf_counter()
    worst = -math.inf
    for k in range(cases):
        n = (4, 8, 16)[k % 3]
        W, ball, y = _random_consensus_case(M, rng, n)
        gamma = gamma_default(kappa, ball.diameter)
        C3 = zeta(kappa, 2.0 * ball.diameter)
        before = frechet_variance(M, y, TIGHT_SOLVER)
        after = frechet_variance(M, consensus_onestep(M, y, W, gamma).points, TIGHT_SOLVER)
        worst = max(worst, after - (1.0 - (1.0 - sigma2(W)) / (2.0 * C3)) * before)
    return CheckResult(f"one-step consensus contraction [{M.name}]", cases, worst, 1e-9, time.perf_counter() - t0)


def check_jensen(M: Manifold, rng, cases: int = 250) -> CheckResult:
    """``g(weighted mean) <= sum_i w_i g(p_i)`` for the convex ``g = d^2(u, .)``."""
    t0 = time.perf_counter()
    worst = -math.inf
    for _ in range(cases):
        k = int(rng.integers(2, 10))
        pts = random_points(M, rng, k, spread=rng.uniform(0.2, 2.0))
        w = rng.dirichlet(np.ones(k))
        w /= w.sum()
        u = M.random_point(rng, 2.0)
        mean = weighted_frechet_mean(M, pts, w, TIGHT_SOLVER).point
        lhs = float(M.dist(u, mean)) ** 2
        rhs = float(np.dot(w, M.dist(u, pts) ** 2))
        worst = max(worst, lhs - rhs)
    return CheckResult(f"Jensen for weighted means [{M.name}]", cases, worst, 1e-7, time.perf_counter() - t0)


def gradient_fd_error(M: Manifold, loss: FrechetLoss, x, v, h: float = 1e-5) -> float:
    """Relative error of the gradient along unit direction ``v`` against central differences."""
    fp = float(loss.value(M.exp(x, h * v)))
    fm = float(loss.value(M.exp(x, -h * v)))
    fd = (fp - fm) / (2.0 * h)
    g = loss.gradient(x)
    analytic = float(M.inner(x, g, v))
    return abs(fd - analytic) / max(float(M.norm(x, g)), 1e-12)


def check_gradient(M: Manifold, rng, cases: int = 100) -> CheckResult:
    t0 = time.perf_counter()
    worst = -math.inf
    done = 0
    while done < cases:
        cloud = random_points(M, rng, int(rng.integers(1, 20)), spread=rng.uniform(0.2, 2.0))
        x = M.random_point(rng, 1.5)
        if not well_conditioned(M, np.concatenate([cloud, x[None]])):
            continue
        done += 1
        loss = FrechetLoss(M, cloud)
        v = random_tangent(M, x, rng, 1.0)
        v = v / M.norm(x, v)
        worst = max(worst, gradient_fd_error(M, loss, x, v) - 1e-5)
    return CheckResult(f"loss gradient vs differences [{M.name}]", cases, worst, 0.0, time.perf_counter() - t0)


def check_zeta_series(rng, cases: int = 1000) -> CheckResult:
    t0 = time.perf_counter()
    worst = -math.inf
    for _ in range(cases):
        kappa = -float(rng.uniform(0.01, 4.0))
        c = float(rng.uniform(0.0, 1e-4)) / math.sqrt(-kappa)
        worst = max(worst, abs(zeta(kappa, c) - (1.0 - kappa * c * c / 3.0)) - 1e-10)
    return CheckResult("curvature factor small-argument form", cases, worst, 0.0, time.perf_counter() - t0)


def check_network_bounds(seed: int = 0) -> list[CheckResult]:
    """Network error stays below its analytic bound on a small static run, both variants."""
    from .scenarios import Scenario
    from .simulate import build_problem, simulate

    problem = build_problem(Scenario(kind="static", n=8, K=20, T=40, seed=seed))
    W = metropolis_weights(ring_knn_graph(8, 4))
    out = []
    for variant in ("exact", "onestep"):
        t0 = time.perf_counter()
        trace = simulate(problem, W, variant, 0.05, record_runtime=False)
        margin = float(np.max(trace.column("network_err") - trace.column("network_err_bound")))
        out.append(CheckResult(f"network error bound [{variant}]", len(trace.rows), margin, 0.0, time.perf_counter() - t0))
    return out


def run_all(seed: int = 0, scale: float = 1.0) -> list[CheckResult]:
    """Every suite on both manifolds; ``scale`` shrinks the case counts for quick runs."""

    def n(base: int) -> int:
        return max(1, int(round(base * scale)))

    rng = np.random.default_rng(seed)
    results = [check_zeta_series(rng, n(1000))]
    for M in default_manifolds():
        results.append(check_round_trip(M, rng, n(1000)))
        results.append(check_projection(M, rng, n(1000)))
        results.extend(check_triangles(M, rng, n(1000)))
        results.append(check_exact_contraction(M, rng, n(250)))
        results.append(check_onestep_contraction(M, rng, n(250)))
        results.append(check_jensen(M, rng, n(250)))
        results.append(check_gradient(M, rng, n(100)))
    results.extend(check_network_bounds(seed))
    return results
