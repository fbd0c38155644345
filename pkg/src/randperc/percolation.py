"""Monte Carlo spanning probabilities for random entanglement percolation.

A trial draws an SCP for every edge, optionally rewires the lattice with
q-swaps (RQEP), converts each edge to a singlet with probability equal to its
SCP and asks whether the open edges cross from the source side to the sink
side. Trial ``t`` uses the counter-based stream keyed by ``(seed, t)``, so an
estimate does not depend on how trials are spread over workers.

Disorder is annealed by default (fresh SCPs every trial). With
``disorder="quenched"`` the SCPs are drawn once per run and only the
conversion outcomes vary.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from randperc import rng as rngmod
from randperc.distributions import ScpDistribution
from randperc.lattice import (
    Lattice,
    QSwapPlan,
    build_lattice,
    default_plan,
    honeycomb_to_triangular_structure,
    swap_structure,
)
from randperc.pdl import PdlModel, scp_from_pdl
from randperc.unionfind import spans

ScpSource = Union[float, ScpDistribution, PdlModel]
MODES = ("rcep", "rqep")


class NonBracketingError(ValueError):
    pass


def describe_source(source: ScpSource) -> str:
    if isinstance(source, (int, float)):
        return f"fixed(p={float(source):g})"
    return source.describe()


def sample_scps(source: ScpSource, rng: np.random.Generator, n: int) -> np.ndarray:
    """Per-edge SCPs. A fixed ``p`` consumes no randomness."""
    if isinstance(source, (int, float)):
        if not 0.0 <= source <= 1.0:
            raise ValueError("fixed SCP must lie in [0, 1]")
        return np.full(n, float(source))
    if isinstance(source, PdlModel):
        return scp_from_pdl(source.sample(rng, n))
    return np.asarray(source.sample(rng, n), dtype=float)


@dataclass(frozen=True)
class EdgeEnsemble:
    scp: np.ndarray
    open: np.ndarray
    trial_seed: tuple


def draw_ensemble(n_edges: int, scp_source: ScpSource, rng: np.random.Generator, trial_seed=()) -> EdgeEnsemble:
    scp = sample_scps(scp_source, rng, n_edges)
    u = rng.random(n_edges)
    return EdgeEnsemble(scp, u < scp, tuple(trial_seed))


@dataclass(frozen=True)
class PercolationEstimate:
    spanning_probability: float
    stderr: float
    trials: int
    lattice: str
    distribution: str
    seed: int
    mode: str = "rcep"
    disorder: str = "annealed"

    def to_record(self, config_hash: Optional[str] = None) -> dict:
        rec = {"estimate": self.spanning_probability, "stderr": self.stderr, "trials": self.trials,
               "seed": self.seed, "config_hash": config_hash}
        rec.update({k: v for k, v in asdict(self).items() if k not in ("spanning_probability", "stderr", "trials", "seed")})
        return rec


def rqep_structure(lattice: Lattice, plan: Optional[QSwapPlan] = None):
    """Swapped lattice and source-edge map used by RQEP trials.

    Double-bond honeycombs use the honeycomb-to-triangular construction;
    other lattices use ``plan`` or the default one-sublattice plan.
    """
    if plan is None and lattice.kind == "honeycomb" and lattice.meta.get("double_bonds"):
        return honeycomb_to_triangular_structure(lattice)
    return swap_structure(lattice, plan if plan is not None else default_plan(lattice))


class _Runner:
    def __init__(self, lattice: Lattice, scp_source: ScpSource, mode: str, plan, seed: int, disorder: str):
        if mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if disorder not in ("annealed", "quenched"):
            raise ValueError("disorder must be 'annealed' or 'quenched'")
        self.source = scp_source
        self.seed = int(seed)
        self.n_in = lattice.n_edges
        self.src = None
        target = lattice
        if mode == "rqep":
            target, self.src = rqep_structure(lattice, plan)
        self.n_nodes = target.n_nodes
        self.a = np.ascontiguousarray(target.edges[:, 0])
        self.b = np.ascontiguousarray(target.edges[:, 1])
        self.source_nodes = np.ascontiguousarray(target.source)
        self.sink_nodes = np.ascontiguousarray(target.sink)
        self.n_out = target.n_edges
        self.quenched = None
        if disorder == "quenched":
            self.quenched = self._transform(sample_scps(scp_source, rngmod.stream(self.seed, rngmod.QUENCHED), self.n_in))

    def _transform(self, scp):
        if self.src is None:
            return scp
        return np.minimum(scp[self.src[:, 0]], scp[self.src[:, 1]])

    def edge_scps(self, rng):
        if self.quenched is not None:
            return self.quenched
        return self._transform(sample_scps(self.source, rng, self.n_in))

    def run(self, t: int) -> bool:
        rng = rngmod.trial_stream(self.seed, t)
        scp = self.edge_scps(rng)
        is_open = rng.random(self.n_out) < scp
        return bool(spans(self.n_nodes, self.a, self.b, is_open, self.source_nodes, self.sink_nodes))

    def count(self, start: int, stop: int) -> int:
        return sum(self.run(t) for t in range(start, stop))


def trial(lattice: Lattice, scp_source: ScpSource, rng: np.random.Generator, mode: str = "rcep",
          plan: Optional[QSwapPlan] = None) -> bool:
    """One conversion trial on ``lattice`` driven by an explicit stream."""
    runner = _Runner(lattice, scp_source, mode, plan, 0, "annealed")
    scp = runner.edge_scps(rng)
    is_open = rng.random(runner.n_out) < scp
    return bool(spans(runner.n_nodes, runner.a, runner.b, is_open, runner.source_nodes, runner.sink_nodes))


def spanning_probability(lattice: Lattice, scp_source: ScpSource, mode: str = "rcep", trials: int = 1000,
                         seed: int = 0, *, plan: Optional[QSwapPlan] = None, workers: int = 1,
                         disorder: str = "annealed") -> PercolationEstimate:
    """Fraction of spanning trials with its binomial standard error.

    Trials are split into contiguous blocks across ``workers`` threads; every
    trial owns its stream, so the result is identical for any worker count.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    runner = _Runner(lattice, scp_source, mode, plan, seed, disorder)
    if workers <= 1:
        hits = runner.count(0, trials)
    else:
        bounds = np.linspace(0, trials, workers + 1).astype(int)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            hits = sum(pool.map(runner.count, bounds[:-1], bounds[1:]))
    p = hits / trials
    return PercolationEstimate(p, math.sqrt(p * (1.0 - p) / trials), trials, lattice.descriptor(),
                               describe_source(scp_source), int(seed), mode, disorder)


@dataclass(frozen=True)
class ThresholdEstimate:
    mu_c: float
    ci: tuple
    points: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {"mu_c": self.mu_c, "ci": list(self.ci),
                "points": [{"x": x, "y": e.spanning_probability, "yerr": e.stderr} for x, e in self.points]}


def threshold_estimate(lattice_kind: str, L: int, scp_family: Optional[Callable[[float], ScpSource]] = None,
                       mode: str = "rcep", trials_per_point: int = 10_000, seed: int = 0, *,
                       lo: float = 0.0, hi: float = 1.0, tol: float = 0.004, double_bonds: bool = False,
                       workers: int = 1) -> ThresholdEstimate:
    """Bisect the family parameter for spanning probability 1/2 at fixed ``L``.

    ``scp_family`` maps a mean SCP to an SCP source and must be stochastically
    increasing; the default is the fixed-p family. Every point reuses ``seed``,
    so for fixed p the estimated curve is exactly monotone.
    """
    family = scp_family if scp_family is not None else (lambda mu: mu)
    lattice = build_lattice(lattice_kind, L, double_bonds=double_bonds)
    points = []

    def evaluate(x):
        est = spanning_probability(lattice, family(x), mode, trials_per_point, seed, workers=workers)
        points.append((x, est))
        return est

    e_lo, e_hi = evaluate(lo), evaluate(hi)
    if not e_lo.spanning_probability < 0.5 < e_hi.spanning_probability:
        raise NonBracketingError(f"spanning probability does not cross 1/2 on [{lo}, {hi}]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        e_mid = evaluate(mid)
        if e_mid.spanning_probability < 0.5:
            lo, e_lo = mid, e_mid
        else:
            hi, e_hi = mid, e_mid
    y_lo, y_hi = e_lo.spanning_probability, e_hi.spanning_probability
    mu_c = lo + (0.5 - y_lo) * (hi - lo) / (y_hi - y_lo)
    slope = (y_hi - y_lo) / (hi - lo)
    noise = 2.0 * max(e_lo.stderr, e_hi.stderr, 0.5 / math.sqrt(trials_per_point)) / slope
    return ThresholdEstimate(mu_c, (lo - noise, hi + noise), points)


@dataclass(frozen=True)
class RqepPenaltyReport:
    distribution: str
    lattice: str
    trials: int
    swapped_pairs: int
    mean_scp: float
    post_swap_mean: float
    post_swap_stderr: float
    expected_min: float
    penalty: float
    rcep: PercolationEstimate
    rqep: PercolationEstimate

    def as_dict(self) -> dict:
        d = asdict(self)
        d["rcep"] = asdict(self.rcep)
        d["rqep"] = asdict(self.rqep)
        return d


def post_swap_bond_mean(lattice: Lattice, source: ScpSource, trials: int, seed: int = 0,
                        plan: Optional[QSwapPlan] = None) -> tuple[float, float, int]:
    """Mean SCP of the bonds created by q-swaps, with its standard error.

    Returns ``(mean, stderr, pairs)``. Each trial's average is one
    independent unit, because bonds of one cycle share consumed edges.
    """
    if trials < 2:
        raise ValueError("need at least two trials")
    _, src = rqep_structure(lattice, plan)
    swapped = src[:, 0] != src[:, 1]
    s0, s1 = src[swapped, 0], src[swapped, 1]
    means = np.empty(trials)
    for t in range(trials):
        scp = sample_scps(source, rngmod.trial_stream(seed, t), lattice.n_edges)
        means[t] = np.minimum(scp[s0], scp[s1]).mean()
    return float(means.mean()), float(means.std(ddof=1) / math.sqrt(trials)), int(swapped.sum()) * trials


def rqep_penalty_experiment(lattice: Lattice, dist: ScpDistribution, trials: int, seed: int = 0,
                            spanning_trials: Optional[int] = None) -> RqepPenaltyReport:
    """Post-swap bond SCPs and RCEP vs RQEP spanning on a double-bond honeycomb."""
    if lattice.kind != "honeycomb" or not lattice.meta.get("double_bonds"):
        raise ValueError("the penalty experiment runs on a double-bond honeycomb")
    mean, se, pairs = post_swap_bond_mean(lattice, dist, trials, seed)
    n_span = spanning_trials if spanning_trials is not None else trials
    rcep = spanning_probability(lattice, dist, "rcep", n_span, seed)
    rqep = spanning_probability(lattice, dist, "rqep", n_span, seed)
    mu = dist.mean()
    return RqepPenaltyReport(dist.describe(), lattice.descriptor(), trials, pairs, mu, mean, se,
                             dist.expected_min(), mu - mean, rcep, rqep)


def make_family(spec: Optional[dict]) -> Callable[[float], ScpSource]:
    """Map a family spec to ``mu -> SCP source`` with mean ``mu``.

    Kinds: ``fixed``, ``bernoulli``, ``uniform`` (``half_width``, shrunk to fit
    in [0, 1]) and ``beta`` (``concentration`` = alpha + beta).
    """
    from randperc.distributions import Bernoulli, Beta, PointMass, Uniform

    spec = spec or {"kind": "fixed"}
    kind = spec.get("kind", "fixed")
    if kind == "fixed":
        return lambda mu: float(mu)
    if kind == "bernoulli":
        return lambda mu: Bernoulli(mu)
    if kind == "uniform":
        w = float(spec.get("half_width", 0.1))

        def uniform(mu):
            h = min(w, mu, 1.0 - mu)
            return Uniform(mu - h, mu + h) if h > 0 else PointMass(mu)

        return uniform
    if kind == "beta":
        k = float(spec.get("concentration", 10.0))
        return lambda mu: Beta(mu * k, (1.0 - mu) * k) if 0.0 < mu < 1.0 else PointMass(mu)
    raise ValueError(f"unknown family kind {kind!r}")
