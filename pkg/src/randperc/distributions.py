"""Edge singlet-conversion probability (SCP) distributions on [0, 1].

Each distribution exposes a CDF, a sampler and the statistics that control
random entanglement percolation: the mean, the standard deviation, the mean
absolute difference ``E|X1 - X2|`` and the expected minimum of two
independent copies,

    E[min(X1, X2)] = int_0^1 (1 - F(p))^2 dp = mean - mean_abs_diff / 2.

Continuous kinds compute these integrals by adaptive quadrature; discrete and
empirical kinds use exact finite sums.

Objects
-------
ScpDistribution
    Base class. Subclasses: Uniform, TruncatedGaussian, Discrete (with
    Bernoulli, SymmetricBimodal and PointMass), Beta (with Haar) and
    Empirical. The PDL-induced kind lives in :mod:`randperc.pdl`.
DistributionStats
    Frozen record returned by :func:`stats`.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from importlib import resources
from typing import Optional, Sequence

import numpy as np
from scipy import integrate, special

QUAD_EPSABS = 1e-11
QUAD_MAX_ERROR = 1e-9
IDENTITY_TOL = 1e-8
# Gaussian tail mass below which the untruncated closed form C = 1/sqrt(pi) applies.
GAUSSIAN_TAIL_LIMIT = 1e-6


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested accuracy."""

    def __init__(self, what: str, abserr: float):
        super().__init__(f"quadrature for {what} did not converge (achieved error {abserr:.3e})")
        self.abserr = abserr


class ConfigError(ValueError):
    pass


def _quad(func, points, what: str) -> float:
    pts = sorted({p for p in points if 0.0 < p < 1.0})
    edges = [0.0, *pts, 1.0]
    total = 0.0
    err = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi <= lo:
            continue
        val, abserr = integrate.quad(func, lo, hi, epsabs=QUAD_EPSABS, epsrel=1e-12, limit=500)
        total += val
        err += abserr
    if err > QUAD_MAX_ERROR:
        raise QuadratureError(what, err)
    return total


class ScpDistribution:
    """A distribution of singlet-conversion probabilities supported on [0, 1].

    Instances are immutable. Subclasses implement ``_cdf`` on the open unit
    interval and ``sample``; the base class supplies boundary handling and
    generic quadrature statistics.
    """

    kind: str = "abstract"
    continuous: bool = True
    shape_constant_defined: bool = True

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(x < 0.0, 0.0, np.where(x >= 1.0, 1.0, self._cdf(np.clip(x, 0.0, 1.0))))
        return float(out) if out.ndim == 0 else out

    def _cdf(self, x):
        raise NotImplementedError

    def pdf(self, x):
        raise NotImplementedError(f"{self.kind} has no density")

    def sample(self, rng: np.random.Generator, size=None):
        raise NotImplementedError

    def breakpoints(self) -> Sequence[float]:
        """Points in (0, 1) where the CDF bends sharply; used to split quadrature."""
        return ()

    def params(self) -> dict:
        raise NotImplementedError

    def to_config(self) -> dict:
        return {"kind": self.kind, "params": self.params()}

    def describe(self) -> str:
        inner = ", ".join(f"{k}={v:g}" for k, v in self.params().items() if isinstance(v, (int, float)))
        return f"{self.kind}({inner})"

    def __repr__(self) -> str:
        return self.describe()

    # statistics; subclasses override with closed or exact forms where available

    def mean(self) -> float:
        return _quad(lambda p: 1.0 - self._cdf(p), self.breakpoints(), "mean")

    def std(self) -> float:
        second = _quad(lambda p: 2.0 * p * (1.0 - self._cdf(p)), self.breakpoints(), "second moment")
        return math.sqrt(max(second - self.mean() ** 2, 0.0))

    def expected_min(self) -> float:
        return _quad(lambda p: (1.0 - self._cdf(p)) ** 2, self.breakpoints(), "expected_min")

    def mean_abs_diff(self) -> float:
        def integrand(p):
            f = self._cdf(p)
            return f * (1.0 - f)

        return 2.0 * _quad(integrand, self.breakpoints(), "mean_abs_diff")


class Uniform(ScpDistribution):
    kind = "uniform"

    def __init__(self, low: float = 0.0, high: float = 1.0):
        if not 0.0 <= low < high <= 1.0:
            raise ValueError(f"uniform needs 0 <= low < high <= 1, got ({low}, {high})")
        self.low = float(low)
        self.high = float(high)

    @classmethod
    def from_mean_std(cls, mean: float, std: float) -> "Uniform":
        half = math.sqrt(3.0) * std
        return cls(mean - half, mean + half)

    def _cdf(self, x):
        return np.clip((x - self.low) / (self.high - self.low), 0.0, 1.0)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where((x >= self.low) & (x <= self.high), 1.0 / (self.high - self.low), 0.0)

    def sample(self, rng, size=None):
        return rng.uniform(self.low, self.high, size)

    def breakpoints(self):
        return (self.low, self.high)

    def params(self):
        return {"low": self.low, "high": self.high}

    def mean(self):
        return 0.5 * (self.low + self.high)

    def std(self):
        return (self.high - self.low) / math.sqrt(12.0)


class TruncatedGaussian(ScpDistribution):
    """Gaussian with location ``mean`` and scale ``std`` truncated to [0, 1].

    ``mean`` and ``std`` are the parameters of the parent Gaussian. When
    :meth:`tail_mass` is negligible they coincide with the moments.
    """

    kind = "truncated-gaussian"

    def __init__(self, mean: float, std: float):
        if std <= 0.0:
            raise ValueError("std must be positive")
        self.loc = float(mean)
        self.scale = float(std)
        self._lo = special.ndtr(-self.loc / self.scale)
        self._z = special.ndtr((1.0 - self.loc) / self.scale) - self._lo
        if self._z <= 0.0:
            raise ValueError("truncated Gaussian has no mass on [0, 1]")

    def tail_mass(self) -> float:
        """Mass of the parent Gaussian lying outside [0, 1]."""
        return float(1.0 - self._z)

    def _cdf(self, x):
        return np.clip((special.ndtr((x - self.loc) / self.scale) - self._lo) / self._z, 0.0, 1.0)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        dens = np.exp(-0.5 * ((x - self.loc) / self.scale) ** 2) / (self.scale * math.sqrt(2 * math.pi) * self._z)
        return np.where((x >= 0.0) & (x <= 1.0), dens, 0.0)

    def sample(self, rng, size=None):
        # inverse CDF restricted to the [0, 1] window
        u = rng.random(size)
        x = self.loc + self.scale * special.ndtri(self._lo + u * self._z)
        return np.clip(x, 0.0, 1.0)

    def breakpoints(self):
        return tuple(self.loc + k * self.scale for k in (-12, -6, -3, -1, 0, 1, 3, 6, 12))

    def params(self):
        return {"mean": self.loc, "std": self.scale}

    def _edges(self):
        a = -self.loc / self.scale
        b = (1.0 - self.loc) / self.scale
        phi = lambda t: math.exp(-0.5 * t * t) / math.sqrt(2.0 * math.pi)  # noqa: E731
        return a, b, phi(a), phi(b)

    def mean(self):
        _, _, pa, pb = self._edges()
        return self.loc + self.scale * (pa - pb) / self._z

    def std(self):
        a, b, pa, pb = self._edges()
        shift = (pa - pb) / self._z
        var = 1.0 + (a * pa - b * pb) / self._z - shift * shift
        return self.scale * math.sqrt(max(var, 0.0))


class Discrete(ScpDistribution):
    """Finite table of (value, probability) pairs."""

    kind = "discrete"
    continuous = False

    def __init__(self, values: Sequence[float], probs: Sequence[float]):
        v = np.asarray(values, dtype=float)
        p = np.asarray(probs, dtype=float)
        if v.shape != p.shape or v.ndim != 1 or v.size == 0:
            raise ValueError("values and probs must be equal-length nonempty sequences")
        if np.any((v < 0.0) | (v > 1.0)):
            raise ValueError("values must lie in [0, 1]")
        if np.any(p < 0.0) or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("probs must be nonnegative and sum to 1")
        order = np.argsort(v, kind="stable")
        self.values = v[order]
        self.probs = p[order]

    def _cdf(self, x):
        cum = np.cumsum(self.probs)
        idx = np.searchsorted(self.values, x, side="right")
        return np.where(idx > 0, cum[np.maximum(idx - 1, 0)], 0.0)

    def sample(self, rng, size=None):
        return rng.choice(self.values, size=size, p=self.probs)

    def params(self):
        return {"values": self.values.tolist(), "probs": self.probs.tolist()}

    def mean(self):
        return float(self.values @ self.probs)

    def std(self):
        m = self.mean()
        return math.sqrt(max(float(((self.values - m) ** 2) @ self.probs), 0.0))

    def _pair_weights(self):
        return np.outer(self.probs, self.probs)

    def expected_min(self):
        return float(np.sum(self._pair_weights() * np.minimum.outer(self.values, self.values)))

    def mean_abs_diff(self):
        return float(np.sum(self._pair_weights() * np.abs(np.subtract.outer(self.values, self.values))))


class Bernoulli(Discrete):
    """SCP 1 with probability ``mean``, otherwise 0 (singlet or product state)."""

    kind = "bernoulli"
    shape_constant_defined = False

    def __init__(self, mean: float):
        if not 0.0 <= mean <= 1.0:
            raise ValueError("bernoulli mean must lie in [0, 1]")
        self.mu = float(mean)
        super().__init__([0.0, 1.0], [1.0 - self.mu, self.mu])

    def sample(self, rng, size=None):
        u = rng.random(size)
        return (u < self.mu).astype(float) if size is not None else float(u < self.mu)

    def params(self):
        return {"mean": self.mu}


class SymmetricBimodal(Discrete):
    """Equal mass at ``mean - std`` and ``mean + std``."""

    kind = "symmetric-bimodal"

    def __init__(self, mean: float, std: float):
        if std < 0.0:
            raise ValueError("std must be nonnegative")
        self.mu = float(mean)
        self.sigma = float(std)
        super().__init__([mean - std, mean + std], [0.5, 0.5])

    def params(self):
        return {"mean": self.mu, "std": self.sigma}


class PointMass(Discrete):
    kind = "point-mass"

    def __init__(self, value: float):
        self.value = float(value)
        super().__init__([value], [1.0])

    def sample(self, rng, size=None):
        return np.full(size, self.value) if size is not None else self.value

    def params(self):
        return {"value": self.value}


class Beta(ScpDistribution):
    kind = "beta"

    def __init__(self, alpha: float, beta: float):
        if alpha <= 0.0 or beta <= 0.0:
            raise ValueError("beta parameters must be positive")
        self.alpha = float(alpha)
        self.beta = float(beta)
        self._log_norm = special.betaln(self.alpha, self.beta)

    def _cdf(self, x):
        return special.betainc(self.alpha, self.beta, x)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x > 0.0) & (x < 1.0)
        xc = np.clip(x, 1e-300, 1.0 - 1e-16)
        logf = (self.alpha - 1) * np.log(xc) + (self.beta - 1) * np.log1p(-xc) - self._log_norm
        return np.where(inside, np.exp(logf), 0.0)

    def sample(self, rng, size=None):
        return rng.beta(self.alpha, self.beta, size)

    def params(self):
        return {"alpha": self.alpha, "beta": self.beta}

    def mean(self):
        return self.alpha / (self.alpha + self.beta)

    def std(self):
        s = self.alpha + self.beta
        return math.sqrt(self.alpha * self.beta / (s * s * (s + 1.0)))


class Haar(Beta):
    """SCP law of Haar-random two-qubit pure states, identical to Beta(1, 3)."""

    kind = "haar"

    def __init__(self):
        super().__init__(1.0, 3.0)

    def params(self):
        return {}

    def describe(self):
        return "haar"


class Empirical(ScpDistribution):
    """Right-continuous step CDF of a sample buffer.

    Statistics are those of the empirical law itself (draws with
    replacement), evaluated by exact sums over the sorted samples.
    """

    kind = "empirical"
    continuous = False

    def __init__(self, samples):
        s = np.sort(np.asarray(samples, dtype=float).ravel())
        if s.size == 0:
            raise ValueError("empirical distribution needs at least one sample")
        if s[0] < 0.0 or s[-1] > 1.0:
            raise ValueError("samples must lie in [0, 1]")
        self.samples = s
        self.samples.setflags(write=False)

    def _cdf(self, x):
        return np.searchsorted(self.samples, x, side="right") / self.samples.size

    def sample(self, rng, size=None):
        return rng.choice(self.samples, size=size)

    def params(self):
        return {"samples": self.samples.tolist()}

    def describe(self):
        return f"empirical(n={self.samples.size})"

    def _steps(self):
        # on [s_k, s_{k+1}) the CDF equals (k+1)/n; [0, s_0) has F = 0
        n = self.samples.size
        knots = np.concatenate(([0.0], self.samples, [1.0]))
        widths = np.diff(knots)
        levels = np.arange(n + 1) / n
        return widths, levels

    def mean(self):
        return float(self.samples.mean())

    def std(self):
        return float(self.samples.std())

    def expected_min(self):
        w, f = self._steps()
        return float(np.sum(w * (1.0 - f) ** 2))

    def mean_abs_diff(self):
        w, f = self._steps()
        return float(2.0 * np.sum(w * f * (1.0 - f)))


@dataclass(frozen=True)
class DistributionStats:
    mean: float
    std: float
    mean_abs_diff: float
    expected_min: float
    shape_constant: Optional[float]
    penalty: float

    def as_dict(self) -> dict:
        return asdict(self)


# functional surface


def sample(dist: ScpDistribution, rng: np.random.Generator) -> float:
    return float(dist.sample(rng))


def cdf(dist: ScpDistribution, x):
    return dist.cdf(x)


def expected_min(dist: ScpDistribution) -> float:
    return dist.expected_min()


def mean_abs_diff(dist: ScpDistribution) -> float:
    return dist.mean_abs_diff()


def shape_constant(dist: ScpDistribution) -> Optional[float]:
    """``(mean - expected_min) / std``, or None when undefined.

    Undefined for degenerate laws (std = 0) and for the Bernoulli kind, which
    is not a location-scale family.
    """
    if not dist.shape_constant_defined:
        return None
    sigma = dist.std()
    if sigma <= 1e-15:
        return None
    return (dist.mean() - dist.expected_min()) / sigma


def beta_expected_min(alpha: float, beta: float) -> float:
    """Closed form of E[min(X1, X2)] for X ~ Beta(alpha, beta).

    Uses ``mean - 2 B(2a, 2b) / ((a + b) B(a, b)^2)`` evaluated in log space so
    that large parameters do not overflow.
    """
    if alpha <= 0.0 or beta <= 0.0:
        raise ValueError("beta parameters must be positive")
    log_ratio = special.betaln(2 * alpha, 2 * beta) - 2.0 * special.betaln(alpha, beta)
    penalty = 2.0 * math.exp(log_ratio) / (alpha + beta)
    return alpha / (alpha + beta) - penalty


def stats(dist: ScpDistribution) -> DistributionStats:
    mu = dist.mean()
    sigma = dist.std()
    delta = dist.mean_abs_diff()
    emin = dist.expected_min()
    gap = abs(emin - (mu - 0.5 * delta))
    if gap > IDENTITY_TOL:
        raise AssertionError(f"E[min] identity violated for {dist!r}: gap {gap:.3e}")
    if sigma <= 1e-15:
        # degenerate law: both copies coincide
        return DistributionStats(mu, 0.0, 0.0, mu, None, 0.0)
    return DistributionStats(mu, sigma, delta, emin, shape_constant(dist), mu - emin)


# configuration

_BUILDERS = {
    "uniform": lambda p: Uniform(p["low"], p["high"]) if "low" in p else Uniform.from_mean_std(p["mean"], p["std"]),
    "truncated-gaussian": lambda p: TruncatedGaussian(p["mean"], p["std"]),
    "gaussian": lambda p: TruncatedGaussian(p["mean"], p["std"]),
    "bernoulli": lambda p: Bernoulli(p["mean"]),
    "symmetric-bimodal": lambda p: SymmetricBimodal(p["mean"], p["std"]),
    "point-mass": lambda p: PointMass(p["value"]),
    "discrete": lambda p: Discrete(p["values"], p["probs"]),
    "beta": lambda p: Beta(p["alpha"], p["beta"]),
    "haar": lambda p: Haar(),
    "empirical": lambda p: Empirical(p["samples"]),
}

KINDS = tuple(_BUILDERS) + ("pdl-induced",)


def load_schema(name: str) -> dict:
    text = resources.files("randperc").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


def validate(config: dict, schema_name: str) -> None:
    import jsonschema

    try:
        jsonschema.validate(config, load_schema(schema_name))
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"invalid {schema_name} config: {exc.message}") from None


def from_config(config: dict) -> ScpDistribution:
    """Build a distribution from ``{"kind": ..., "params": {...}}``."""
    validate(config, "distribution")
    kind = config["kind"]
    params = config.get("params", {})
    if kind == "pdl-induced":
        from randperc import pdl

        return pdl.induced_distribution(pdl.from_config(params["model"]),
                                        samples=params.get("samples", 200_000),
                                        seed=params.get("seed", 0))
    try:
        return _BUILDERS[kind](params)
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad parameters for {kind}: {exc}") from None
