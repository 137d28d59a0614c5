"""From a run configuration to regret traces."""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

import numpy as np

from ..consensus import FrechetSolverConfig, frechet_mean
from ..manifolds.base import GeodesicBall, InvalidInput, Manifold
from ..network import Graph, graph_from_spec, metropolis_weights, sigma2
from ..optimizer import (
    VARIANTS,
    OptimizerConfig,
    RegretTrace,
    path_variation,
    regret_constant,
    run,
    balanced_stepsize,
)
from .losses import FrechetLoss, global_minimizer
from .scenarios import SAMPLER_NOTE, Scenario, ScenarioData, gen_scenario, max_data_distance

RADIUS_FACTOR = 1.2
COMPARATOR_SOLVER = FrechetSolverConfig(max_iters=1000, tol=1e-10)


@dataclass
class Problem:
    """Generated data plus everything derived from it once per scenario."""

    scenario: Scenario
    data: ScenarioData
    ball: GeodesicBall
    losses: list
    comparators: np.ndarray
    comparator_worst_grad: float
    P_T: float
    lipschitz: float

    @property
    def manifold(self) -> Manifold:
        return self.data.manifold

    @property
    def T(self) -> int:
        return len(self.losses)


def default_ball(data: ScenarioData, factor: float = RADIUS_FACTOR) -> GeodesicBall:
    return GeodesicBall(data.center, factor * max_data_distance(data))


def compute_comparators(M: Manifold, data: ScenarioData, cfg=COMPARATOR_SOLVER):
    """Global minimiser of every round, solved once per distinct cloud."""
    cache = {}
    out = np.empty((len(data.rounds),) + M.point_shape)
    worst = 0.0
    for t, cloud in enumerate(data.rounds):
        key = id(cloud)
        if key not in cache:
            res = global_minimizer(M, cloud, cfg)
            cache[key] = res.point
            worst = max(worst, res.grad_norm)
        out[t] = cache[key]
    return out, worst


def build_problem(
    scenario: Scenario,
    ball: GeodesicBall | None = None,
    comparators=None,
    T: int | None = None,
) -> Problem:
    """Generate the data and fix the feasible ball, losses and comparators.

    ``T`` truncates the horizon after generation, so a shorter run sees
    exactly the first ``T`` rounds of the longer one.
    """
    data = gen_scenario(scenario)
    if T is not None:
        if not 1 <= T <= scenario.T:
            raise InvalidInput(f"cannot truncate a {scenario.T}-round scenario to {T}")
        data = ScenarioData(data.manifold, data.rounds[:T], data.center, data.anchors[:T])
    M = data.manifold
    ball = ball or default_ball(data)
    losses_by_id = {}
    losses = []
    for cloud in data.rounds:
        if id(cloud) not in losses_by_id:
            losses_by_id[id(cloud)] = FrechetLoss(M, cloud, ball)
        losses.append(losses_by_id[id(cloud)])
    if comparators is None:
        comparators, worst = compute_comparators(M, data)
    else:
        comparators = np.asarray(comparators, dtype=float)
        M.check_point(comparators)
        if comparators.shape[0] != len(losses):
            raise InvalidInput(f"need {len(losses)} comparators, got {comparators.shape[0]}")
        worst = float("nan")
    L = max(loss.lipschitz_bound() for loss in losses_by_id.values())
    return Problem(
        scenario=scenario,
        data=data,
        ball=ball,
        losses=losses,
        comparators=comparators,
        comparator_worst_grad=worst,
        P_T=path_variation(M, comparators),
        lipschitz=L,
    )


@dataclass
class RunConfig:
    """Everything a ``simulate`` invocation needs; mirrors the config file."""

    scenario: Scenario = field(default_factory=Scenario)
    graph: dict = field(default_factory=lambda: {"type": "ring_knn", "n": 40, "k": 4})
    variant: str = "exact"
    eta: float | str = 0.05
    gamma: float | str = "auto"
    kappa: float | str = "auto"
    lipschitz: float | str = "auto"
    ball: dict | str = "auto"
    frechet: FrechetSolverConfig = field(default_factory=FrechetSolverConfig)
    init: str | list = "center"
    comparators: str | None = None
    record_runtime: bool = True

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        raw = copy.deepcopy(raw or {})
        known = {
            "scenario", "graph", "variant", "eta", "gamma", "kappa", "lipschitz",
            "ball", "frechet", "init", "comparators", "seed", "record_runtime",
        }
        unknown = set(raw) - known
        if unknown:
            raise InvalidInput(f"unknown config keys: {sorted(unknown)}")
        scn_raw = raw.pop("scenario", {}) or {}
        if "seed" in raw:
            scn_raw["seed"] = raw.pop("seed")
        try:
            scenario = Scenario(**scn_raw)
        except TypeError as exc:
            raise InvalidInput(f"bad scenario section: {exc}") from None
        frechet_raw = raw.pop("frechet", {}) or {}
        try:
            frechet = FrechetSolverConfig(**frechet_raw)
        except TypeError as exc:
            raise InvalidInput(f"bad frechet section: {exc}") from None
        graph = raw.pop("graph", None) or {"type": "ring_knn", "n": scenario.n, "k": 4}
        cfg = cls(scenario=scenario, graph=graph, frechet=frechet, **raw)
        cfg.validate()
        return cfg

    def validate(self):
        if self.variant not in VARIANTS + ("both",):
            raise InvalidInput(f"variant must be exact, onestep or both, got {self.variant!r}")
        keywords = {"eta": ("balanced",), "gamma": ("auto",), "kappa": ("auto",), "lipschitz": ("auto",)}
        for key, allowed in keywords.items():
            value = getattr(self, key)
            if isinstance(value, str) and value not in allowed:
                # YAML reads exponent-only literals such as 1e-3 as strings
                try:
                    value = float(value)
                except ValueError:
                    raise InvalidInput(f"{key} must be a number or {allowed[0]!r}, got {value!r}") from None
                setattr(self, key, value)
            elif not isinstance(value, str) and (isinstance(value, bool) or not isinstance(value, (int, float))):
                raise InvalidInput(f"{key} must be numeric, got {value!r}")
        if not isinstance(self.init, (str, list)) or (isinstance(self.init, str) and self.init not in ("center", "local_mean")):
            raise InvalidInput(f"init must be 'center', 'local_mean' or a point, got {self.init!r}")

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario.to_dict(),
            "graph": self.graph,
            "variant": self.variant,
            "eta": self.eta,
            "gamma": self.gamma,
            "kappa": self.kappa,
            "lipschitz": self.lipschitz,
            "ball": self.ball,
            "frechet": {
                "max_iters": self.frechet.max_iters,
                "tol": self.frechet.tol,
                "step": self.frechet.step,
            },
            "init": self.init,
            "comparators": self.comparators,
            "record_runtime": self.record_runtime,
        }

    def variants(self) -> tuple[str, ...]:
        return VARIANTS if self.variant == "both" else (self.variant,)

    def make_graph(self) -> Graph:
        g = graph_from_spec(self.graph)
        if g.n != self.scenario.n:
            raise InvalidInput(f"graph has {g.n} nodes but the scenario has {self.scenario.n} agents")
        return g

    def make_ball(self, M: Manifold) -> GeodesicBall | None:
        if self.ball == "auto":
            return None
        try:
            center = np.asarray(self.ball["center"], dtype=float).reshape(M.point_shape)
            radius = float(self.ball["radius"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInput(f"ball must be 'auto' or {{center, radius}}: {exc}") from None
        M.check_point(center)
        return GeodesicBall(center, radius)


def balanced_eta(problem: Problem, W, kappa: float) -> float:
    """Regret-balancing stepsize for the problem's horizon and path variation."""
    D = problem.ball.diameter
    Cprime = regret_constant(1.0, D, problem.lipschitz, kappa, sigma2(W), W.shape[0])
    return balanced_stepsize(D, problem.P_T, problem.T, Cprime)


def initial_states(problem: Problem, init, frechet_cfg):
    M = problem.manifold
    if init == "center":
        return problem.ball.center
    if init == "local_mean":
        # per-agent local Fréchet means of the first round
        first = problem.data.rounds[0]
        return np.stack([frechet_mean(M, cloud, frechet_cfg).point for cloud in first])
    point = np.asarray(init, dtype=float).reshape(M.point_shape)
    M.check_point(point)
    if not M.in_ball(problem.ball, point):
        raise InvalidInput("initial point lies outside the feasible ball")
    return point


def simulate(
    problem: Problem,
    W,
    variant: str,
    eta: float | str,
    gamma="auto",
    kappa="auto",
    lipschitz="auto",
    frechet: FrechetSolverConfig | None = None,
    init="center",
    record_runtime: bool = True,
    keep_states: bool = False,
) -> RegretTrace:
    M = problem.manifold
    W = np.asarray(W, dtype=float)
    kappa = M.kappa if kappa == "auto" else float(kappa)
    eta = balanced_eta(problem, W, kappa) if eta == "balanced" else float(eta)
    frechet = frechet or FrechetSolverConfig()
    cfg = OptimizerConfig(
        variant=variant,
        eta=eta,
        gamma=None if gamma == "auto" else float(gamma),
        ball=problem.ball,
        kappa=kappa,
        lipschitz=problem.lipschitz if lipschitz == "auto" else float(lipschitz),
        frechet=frechet,
        record_runtime=record_runtime,
    )
    trace = run(
        M,
        problem.losses,
        W,
        cfg,
        problem.comparators,
        x1=initial_states(problem, init, frechet),
        keep_states=keep_states,
    )
    trace.summary["comparator_worst_grad"] = problem.comparator_worst_grad
    trace.config = {
        "scenario": problem.scenario.to_dict(),
        "manifold": repr(M),
        "variant": variant,
        "eta": eta,
        "gamma": trace.summary["gamma"],
        "kappa": kappa,
        "lipschitz": cfg.lipschitz,
        "ball": {"center": M.flatten(problem.ball.center).tolist(), "radius": problem.ball.radius},
        "frechet": {"max_iters": frechet.max_iters, "tol": frechet.tol, "step": frechet.step},
        "init": init if isinstance(init, str) else "explicit",
        "sampler": SAMPLER_NOTE,
    }
    return trace


def simulate_config(cfg: RunConfig, comparators=None, keep_states: bool = False) -> dict:
    """Run every requested variant on one shared problem; returns ``{variant: trace}``."""
    M = cfg.scenario.make_manifold()
    W = metropolis_weights(cfg.make_graph())
    problem = build_problem(cfg.scenario, ball=cfg.make_ball(M), comparators=comparators)
    traces = {}
    for variant in cfg.variants():
        traces[variant] = simulate(
            problem,
            W,
            variant,
            cfg.eta,
            gamma=cfg.gamma,
            kappa=cfg.kappa,
            lipschitz=cfg.lipschitz,
            frechet=cfg.frechet,
            init=cfg.init,
            record_runtime=cfg.record_runtime,
            keep_states=keep_states,
        )
        traces[variant].config["graph"] = cfg.graph
    return traces


#: Raw configs for the four benchmark settings.
PRESETS = {
    "static": {
        "scenario": {"manifold": "hyperbolic", "dim": 2, "kind": "static", "n": 40, "K": 100, "T": 400},
        "graph": {"type": "ring_knn", "n": 40, "k": 4},
        "eta": 0.001,
        "gamma": 1.0,
        "init": "local_mean",
    },
    "abrupt": {
        "scenario": {"manifold": "hyperbolic", "dim": 2, "kind": "abrupt", "n": 40, "K": 100, "T": 400, "T0": 40},
        "graph": {"type": "ring_knn", "n": 40, "k": 4},
        "eta": 0.05,
        "gamma": 1.0,
    },
    "general": {
        "scenario": {"manifold": "hyperbolic", "dim": 2, "kind": "general", "n": 40, "K": 100, "T": 400, "T0": 40},
        "graph": {"type": "ring_knn", "n": 40, "k": 4},
        "eta": 0.05,
        "gamma": 1.0,
    },
    "spd": {
        "scenario": {"manifold": "spd", "dim": 3, "kind": "spd_mixed", "n": 10, "K": 20, "T": 80, "T0": 10},
        "graph": {"type": "ring_knn", "n": 10, "k": 4},
        "eta": 0.1,
        "gamma": 0.5,
    },
}


def preset_config(name: str, **overrides) -> dict:
    """A deep copy of a preset; ``scenario`` overrides merge into the scenario section."""
    if name not in PRESETS:
        raise InvalidInput(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    raw = copy.deepcopy(PRESETS[name])
    scn = overrides.pop("scenario", None)
    if scn:
        raw["scenario"].update(scn)
    raw.update(overrides)
    return raw
