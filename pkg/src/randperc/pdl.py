"""Polarization-dependent loss (PDL) and the SCP law it induces.

A Bell pair whose photon crosses a channel with mode intensities
``eta1 >= eta2`` ends up with singlet-conversion probability
``2 eta2 / (eta1 + eta2)``. With ``P = 10 log10(eta1 / eta2)`` in dB this is

    X(P) = 2 / (1 + 10**(P / 10)),

and a PDL density ``f_P`` pushes forward to

    f_X(x) = f_P(10 log10((2 - x) / x)) * (20 / ln 10) / (x (2 - x)).

Three PDL models are provided: a Maxwellian with given mean (closed-form
density), a concatenated link of fixed diattenuators with Haar-random mode
coupling between them (Jones-matrix sampler), and a chain of many equal weak
elements calibrated to a target mean PDL.
"""

from __future__ import annotations

import math
from typing import Optional, Sequence

import numpy as np
from numba import njit
from scipy import integrate, special

from randperc import rng as rngmod
from randperc.distributions import ConfigError, Empirical, ScpDistribution, validate

LN10 = math.log(10.0)
DB_PER_NEPER = 10.0 / LN10
WEAK_SLOPE = LN10 / 20.0

LIN_JIANG_ELEMENTS_DB = (0.8, 1.2, 1.4, 1.0, 0.7)
MATCHED_MEAN_DB = 2.35
# Mean SCPs quoted for the three standard models; used only for comparison.
REFERENCE_MEAN_SCP = {"maxwellian": 0.714, "weak-element-chain": 0.739, "concatenated-link": 0.755}


class SamplerOnlyModelError(TypeError):
    """The model has no closed-form density; use a sampled estimate instead."""


class CalibrationError(RuntimeError):
    pass


# the PDL <-> SCP map


def scp_from_pdl(P):
    """SCP of a Bell pair after a channel with PDL ``P`` dB (vectorized)."""
    P = np.asarray(P, dtype=float)
    if np.any(P < 0.0) or np.any(np.isnan(P)):
        raise ValueError("PDL must be nonnegative")
    # 2 / (1 + e^t) without overflow at large t
    out = 2.0 * np.exp(-np.logaddexp(0.0, P / DB_PER_NEPER))
    return float(out) if out.ndim == 0 else out


def pdl_from_scp(x):
    """Inverse of :func:`scp_from_pdl` on (0, 1]."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0.0) or np.any(x > 1.0) or np.any(np.isnan(x)):
        raise ValueError("SCP must lie in (0, 1]")
    out = DB_PER_NEPER * np.log1p(2.0 * (1.0 - x) / x)
    return float(out) if out.ndim == 0 else out


def weak_pdl_mean_approx(mean_P: float) -> float:
    """First-order mean SCP ``1 - (ln 10 / 20) E[P]``, clamped to [0, 1]."""
    if mean_P < 0.0:
        raise ValueError("mean PDL must be nonnegative")
    return min(max(1.0 - WEAK_SLOPE * mean_P, 0.0), 1.0)


# Jones matrices


def diattenuator(rho_db: float) -> np.ndarray:
    """Diagonal Jones matrix with amplitude transmissions 1 and 10**(-rho/20)."""
    if rho_db < 0.0:
        raise ValueError("element PDL must be nonnegative")
    return np.diag([1.0 + 0j, 10.0 ** (-rho_db / 20.0)])


def rotation(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _ginibre_normals(rng: np.random.Generator, n: int) -> np.ndarray:
    # columns: Re z00, Re z10, Re z01, Re z11, then the imaginary parts
    return rng.standard_normal((n, 8))


def _unitary_from_normals(z: np.ndarray) -> np.ndarray:
    g = (z[:, :4] + 1j * z[:, 4:]).reshape(-1, 2, 2).transpose(0, 2, 1)
    c0 = g[:, :, 0]
    c1 = g[:, :, 1]
    c0 = c0 / np.linalg.norm(c0, axis=1, keepdims=True)
    c1 = c1 - np.sum(np.conj(c0) * c1, axis=1, keepdims=True) * c0
    c1 = c1 / np.linalg.norm(c1, axis=1, keepdims=True)
    return np.stack([c0, c1], axis=2)


def haar_unitary(rng: np.random.Generator, size: Optional[int] = None) -> np.ndarray:
    """Haar-random 2x2 unitaries by Gram-Schmidt on complex Gaussian matrices."""
    u = _unitary_from_normals(_ginibre_normals(rng, 1 if size is None else size))
    return u[0] if size is None else u


@njit(cache=True)
def _apply_elements(T, u, t2):
    # T <- diag(1, t2) @ R(theta) @ diag(e^{i phi}, 1) @ T, with cos^2 theta = u0
    # and phi = 2 pi u1. A Haar unitary differs from this only by phases on the
    # left (they commute with the diattenuator and are absorbed by the next
    # Haar coupling, or leave singular values alone) and a global phase.
    for k in range(T.shape[0]):
        c = np.sqrt(u[k, 0])
        s = np.sqrt(1.0 - u[k, 0])
        ang = 2.0 * np.pi * u[k, 1]
        e = complex(np.cos(ang), np.sin(ang))
        t00 = e * T[k, 0, 0]
        t01 = e * T[k, 0, 1]
        t10, t11 = T[k, 1, 0], T[k, 1, 1]
        T[k, 0, 0] = c * t00 - s * t10
        T[k, 0, 1] = c * t01 - s * t11
        T[k, 1, 0] = t2 * (s * t00 + c * t10)
        T[k, 1, 1] = t2 * (s * t01 + c * t11)


def coupling_matrices(u: np.ndarray) -> np.ndarray:
    """Coupling unitaries ``R(theta) diag(e^{i phi}, 1)`` used by the chain kernel.

    ``u`` is an (n, 2) array of uniforms, mapped as in :func:`_apply_elements`.
    """
    u = np.asarray(u, dtype=float)
    c, s = np.sqrt(u[:, 0]), np.sqrt(1.0 - u[:, 0])
    e = np.exp(2j * np.pi * u[:, 1])
    out = np.empty((len(u), 2, 2), dtype=complex)
    out[:, 0, 0], out[:, 0, 1] = c * e, -s
    out[:, 1, 0], out[:, 1, 1] = s * e, c
    return out


def singular_values(T: np.ndarray) -> np.ndarray:
    """Singular values (s1 >= s2) of one or a stack of 2x2 matrices."""
    T = np.asarray(T)
    lam_hi, lam_lo = _gram_eigenvalues(T)
    return np.stack([np.sqrt(lam_hi), np.sqrt(lam_lo)], axis=-1)


def _gram_eigenvalues(T):
    a, b = T[..., 0, 0], T[..., 0, 1]
    c, d = T[..., 1, 0], T[..., 1, 1]
    m11 = np.abs(a) ** 2 + np.abs(c) ** 2
    m22 = np.abs(b) ** 2 + np.abs(d) ** 2
    m12 = np.conj(a) * b + np.conj(c) * d
    # eigenvalues of T^H T; discriminant written without cancellation
    half_gap = np.sqrt((0.5 * (m11 - m22)) ** 2 + np.abs(m12) ** 2)
    lam_hi = 0.5 * (m11 + m22) + half_gap
    det = np.abs(a * d - b * c) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        lam_lo = np.where(lam_hi > 0.0, det / lam_hi, 0.0)
    return lam_hi, lam_lo


def pdl_of(T: np.ndarray):
    """PDL in dB, ``20 log10(s1 / s2)``, of one or a stack of Jones matrices."""
    lam_hi, lam_lo = _gram_eigenvalues(np.asarray(T))
    with np.errstate(divide="ignore"):
        out = 10.0 * (np.log10(lam_hi) - np.log10(lam_lo))
    return float(out) if np.ndim(out) == 0 else out


def concatenate(elements_db: Sequence[float], couplings: Sequence[np.ndarray]) -> np.ndarray:
    """Deterministic link ``D_N U_N ... D_1 U_1`` for given coupling matrices."""
    if len(couplings) != len(elements_db):
        raise ValueError("need one coupling matrix per element")
    T = np.eye(2, dtype=complex)
    for rho, U in zip(elements_db, couplings):
        T = diattenuator(rho) @ np.asarray(U, dtype=complex) @ T
    return T


def jones_concatenation_sample(elements_db: Sequence[float], rng: np.random.Generator,
                               size: Optional[int] = None):
    """Total PDL (dB) of a link of diattenuators with Haar-random coupling.

    Returns a float when ``size`` is None, otherwise an array of ``size``
    independent realizations.
    """
    elements = [float(r) for r in elements_db]
    if any(r < 0.0 for r in elements):
        raise ValueError("element PDLs must be nonnegative")
    n = 1 if size is None else int(size)
    T = np.broadcast_to(np.eye(2, dtype=complex), (n, 2, 2)).copy()
    for rho in elements:
        _apply_elements(T, rng.random((n, 2)), 10.0 ** (-rho / 20.0))
    P = pdl_of(T)
    P = np.maximum(np.atleast_1d(P), 0.0)
    return float(P[0]) if size is None else P


# PDL models


class PdlModel:
    """Distribution of the PDL magnitude ``P`` (dB, nonnegative)."""

    kind = "abstract"
    has_density = False

    def sample(self, rng: np.random.Generator, size=None):
        raise NotImplementedError

    def pdf(self, P):
        raise SamplerOnlyModelError(f"{self.kind} model is sampler-only")

    def cdf(self, P):
        raise SamplerOnlyModelError(f"{self.kind} model is sampler-only")

    def sf(self, P):
        return 1.0 - self.cdf(P)

    def to_config(self) -> dict:
        raise NotImplementedError

    def describe(self) -> str:
        return self.kind


class MaxwellianPdl(PdlModel):
    """Maxwellian PDL in dB, parameterized by its mean.

    The scale is ``a = mean * sqrt(pi / 2) / 2`` so that ``E[P] = mean``.
    """

    kind = "maxwellian"
    has_density = True

    def __init__(self, mean_db: float):
        if mean_db <= 0.0:
            raise ValueError("mean PDL must be positive")
        self.mean_db = float(mean_db)
        self.a = maxwellian_scale_for_mean(self.mean_db)

    def pdf(self, P):
        return maxwellian_density(self.a, P)

    def cdf(self, P):
        P = np.maximum(np.asarray(P, dtype=float), 0.0)
        z = P / self.a
        out = special.erf(z / math.sqrt(2.0)) - math.sqrt(2.0 / math.pi) * z * np.exp(-0.5 * z * z)
        return float(out) if out.ndim == 0 else out

    def sf(self, P):
        P = np.maximum(np.asarray(P, dtype=float), 0.0)
        z = P / self.a
        out = special.erfc(z / math.sqrt(2.0)) + math.sqrt(2.0 / math.pi) * z * np.exp(-0.5 * z * z)
        return float(out) if out.ndim == 0 else out

    def sample(self, rng, size=None):
        n = 1 if size is None else size
        g = rng.standard_normal((n, 3)) if np.ndim(n) == 0 else rng.standard_normal((*n, 3))
        P = self.a * np.linalg.norm(g, axis=-1)
        return float(P[0]) if size is None else P

    def mode(self) -> float:
        return math.sqrt(2.0) * self.a

    def to_config(self):
        return {"kind": self.kind, "mean_db": self.mean_db}

    def describe(self):
        return f"maxwellian(mean={self.mean_db:g} dB, a={self.a:.6g} dB)"


def maxwellian_scale_for_mean(mean_db: float) -> float:
    return mean_db * math.sqrt(math.pi / 2.0) / 2.0


def maxwellian_density(a: float, P):
    """Maxwell density ``sqrt(2/pi) P^2 exp(-P^2 / 2a^2) / a^3`` on P >= 0."""
    if a <= 0.0:
        raise ValueError("Maxwellian scale must be positive")
    P = np.asarray(P, dtype=float)
    dens = math.sqrt(2.0 / math.pi) * P * P * np.exp(-0.5 * (P / a) ** 2) / a ** 3
    out = np.where(P >= 0.0, dens, 0.0)
    return float(out) if out.ndim == 0 else out


class ConcatenatedLink(PdlModel):
    """Fixed diattenuators joined by independent Haar-random couplings."""

    kind = "concatenated-link"

    def __init__(self, elements_db: Sequence[float]):
        self.elements_db = tuple(float(r) for r in elements_db)
        if any(r < 0.0 for r in self.elements_db):
            raise ValueError("element PDLs must be nonnegative")

    def sample(self, rng, size=None):
        return jones_concatenation_sample(self.elements_db, rng, size)

    def bounds(self) -> tuple[float, float]:
        """Range ``[max(0, max_i r_i - sum_{j!=i} r_j), sum_i r_i]`` of the total PDL."""
        if not self.elements_db:
            return 0.0, 0.0
        total = sum(self.elements_db)
        top = max(self.elements_db)
        return max(0.0, top - (total - top)), total

    def to_config(self):
        return {"kind": self.kind, "elements_db": list(self.elements_db)}

    def describe(self):
        return "concatenated-link(" + ", ".join(f"{r:g}" for r in self.elements_db) + " dB)"


class WeakElementChain(ConcatenatedLink):
    """``n`` equal elements of PDL ``element_db`` with random mode coupling."""

    kind = "weak-element-chain"

    def __init__(self, mean_db: float, n: int, element_db: float):
        super().__init__([element_db] * n)
        self.mean_db = float(mean_db)
        self.n = int(n)
        self.element_db = float(element_db)

    def to_config(self):
        return {"kind": self.kind, "mean_db": self.mean_db, "n": self.n, "element_db": self.element_db}

    def describe(self):
        return f"weak-element-chain(n={self.n}, element={self.element_db:.6g} dB, target mean={self.mean_db:g} dB)"


def _mc_mean_pdl(elements, samples, seed):
    return float(np.mean(jones_concatenation_sample(elements, rngmod.stream(seed, rngmod.CALIBRATION), samples)))


def weak_element_chain(target_mean: float, n: int, *, seed: int = 0, samples: int = 50_000,
                       rel_tol: float = 0.005, max_iter: int = 50) -> WeakElementChain:
    """Calibrate a chain of ``n`` equal elements to mean PDL ``target_mean`` dB.

    Fixed-point iteration ``r <- r * target / mean(r)`` on a Monte Carlo mean
    that reuses the same random stream each step, so the map is smooth.
    """
    if target_mean <= 0.0:
        raise ValueError("target mean must be positive")
    if n < 1:
        raise ValueError("chain needs at least one element")
    if n == 1:
        return WeakElementChain(target_mean, 1, target_mean)
    # random-walk estimate of the Maxwell mean in Stokes space
    rho = target_mean / (math.sqrt(8.0 / (3.0 * math.pi)) * math.sqrt(n))
    for _ in range(max_iter):
        m = _mc_mean_pdl([rho] * n, samples, seed)
        if abs(m - target_mean) <= rel_tol * target_mean * 0.1:
            return WeakElementChain(target_mean, n, rho)
        rho *= target_mean / m
    m = _mc_mean_pdl([rho] * n, samples, seed)
    if abs(m - target_mean) > rel_tol * target_mean:
        raise CalibrationError(f"chain calibration stalled at mean {m:.4f} dB (target {target_mean})")
    return WeakElementChain(target_mean, n, rho)


# pushforward to SCP


def induced_scp_density(model: PdlModel, x):
    """SCP density induced by a PDL model with a closed-form density."""
    if not model.has_density:
        raise SamplerOnlyModelError(f"{model.kind} model is sampler-only; use estimated_scp_density")
    x = np.asarray(x, dtype=float)
    inside = (x > 0.0) & (x < 1.0)
    xc = np.where(inside, x, 0.5)
    dens = model.pdf(pdl_from_scp(xc)) * (20.0 / LN10) / (xc * (2.0 - xc))
    out = np.where(inside, dens, 0.0)
    return float(out) if out.ndim == 0 else out


def histogram_density(values, edges):
    """Histogram density of ``values`` on bins ``edges``, normalized by the full sample size.

    Returns ``(centers, density)``; mass outside the bins is not renormalized.
    """
    values = np.asarray(values, dtype=float)
    counts, edges = np.histogram(values, bins=np.asarray(edges, dtype=float))
    return 0.5 * (edges[1:] + edges[:-1]), counts / (values.size * np.diff(edges))


def estimated_scp_density(model: PdlModel, edges, *, samples: int = 1_000_000, seed: int = 0):
    """Histogram estimate of the SCP density on bins ``edges``.

    Returns ``(centers, density)``. This is an estimate, not the exact
    pushforward.
    """
    return histogram_density(scp_from_pdl(sample_pdl(model, samples, seed)), edges)


def estimated_pdl_density(model: PdlModel, edges, *, samples: int = 1_000_000, seed: int = 0):
    """Histogram estimate of the PDL density on bins ``edges``."""
    return histogram_density(sample_pdl(model, samples, seed), edges)


CHUNK = 100_000


def sample_pdl(model: PdlModel, samples: int, seed: int) -> np.ndarray:
    """``samples`` PDL draws from fixed-size chunks keyed by ``(seed, chunk)``.

    The chunking makes the result independent of how chunks are scheduled.
    """
    out = np.empty(samples)
    for k, start in enumerate(range(0, samples, CHUNK)):
        stop = min(start + CHUNK, samples)
        out[start:stop] = model.sample(rngmod.chunk_stream(seed, k), stop - start)
    return out


class PdlInduced(ScpDistribution):
    """SCP law pushed forward from a PDL model with a closed-form density."""

    kind = "pdl-induced"

    def __init__(self, model: PdlModel):
        if not model.has_density:
            raise SamplerOnlyModelError(f"{model.kind} model is sampler-only")
        self.model = model

    def _cdf(self, x):
        # X <= x  <=>  P >= pdl_from_scp(x)
        x = np.asarray(x, dtype=float)
        xc = np.clip(x, 1e-300, 1.0)
        out = np.where(x <= 0.0, 0.0, self.model.sf(pdl_from_scp(xc)))
        return out

    def pdf(self, x):
        return induced_scp_density(self.model, x)

    def sample(self, rng, size=None):
        return scp_from_pdl(self.model.sample(rng, size))

    def params(self):
        return {"model": self.model.to_config()}

    def describe(self):
        return f"pdl-induced[{self.model.describe()}]"


def induced_distribution(model: PdlModel, *, samples: int = 200_000, seed: int = 0) -> ScpDistribution:
    """Exact pushforward for density models, empirical law for sampler-only ones."""
    if model.has_density:
        return PdlInduced(model)
    return Empirical(scp_from_pdl(sample_pdl(model, samples, seed)))


def mean_scp(model: PdlModel, *, samples: int = 1_000_000, seed: int = 0) -> tuple[float, float]:
    """Mean SCP and its error.

    Density models integrate ``X(P) f_P(P)`` by quadrature (error = quadrature
    bound); sampler models average ``samples`` draws (error = standard error).
    """
    if model.has_density:
        def integrand(P):
            return scp_from_pdl(P) * model.pdf(P)

        upper = 60.0 * getattr(model, "a", 1.0) + 60.0
        val, err = integrate.quad(integrand, 0.0, upper, epsabs=1e-12, epsrel=1e-12, limit=500)
        if err > 1e-8:
            raise RuntimeError(f"mean SCP quadrature did not converge (achieved error {err:.3e})")
        return float(val), float(err)
    x = scp_from_pdl(sample_pdl(model, samples, seed))
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0


def from_config(config: dict) -> PdlModel:
    validate(config, "pdl_model")
    kind = config["kind"]
    if kind == "maxwellian":
        return MaxwellianPdl(config["mean_db"])
    if kind == "concatenated-link":
        return ConcatenatedLink(config["elements_db"])
    if kind == "weak-element-chain":
        if "element_db" in config:
            return WeakElementChain(config["mean_db"], config["n"], config["element_db"])
        return weak_element_chain(config["mean_db"], config["n"], seed=config.get("seed", 0))
    raise ConfigError(f"unknown PDL model kind {kind!r}")
