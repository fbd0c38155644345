import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special

from randperc import distributions as D
from randperc import pdl
from randperc.rng import stream


def random_distribution(kind, draw):
    """Build a distribution of ``kind`` from hypothesis-drawn parameters."""
    u = lambda lo, hi: draw(st.floats(lo, hi, allow_nan=False))
    if kind == "uniform":
        a = u(0.0, 0.9)
        return D.Uniform(a, a + u(0.01, 1.0 - a))
    if kind == "truncated-gaussian":
        return D.TruncatedGaussian(u(0.05, 0.95), u(0.02, 0.4))
    if kind == "bernoulli":
        return D.Bernoulli(u(0.0, 1.0))
    if kind == "symmetric-bimodal":
        m = u(0.05, 0.95)
        return D.SymmetricBimodal(m, u(0.0, min(m, 1.0 - m)))
    if kind == "point-mass":
        return D.PointMass(u(0.0, 1.0))
    if kind == "discrete":
        n = draw(st.integers(1, 6))
        vals = draw(st.lists(st.floats(0.0, 1.0), min_size=n, max_size=n))
        w = np.asarray(draw(st.lists(st.floats(0.05, 1.0), min_size=n, max_size=n)))
        return D.Discrete(vals, w / w.sum())
    if kind == "beta":
        return D.Beta(u(0.3, 20.0), u(0.3, 20.0))
    if kind == "haar":
        return D.Haar()
    if kind == "empirical":
        n = draw(st.integers(1, 40))
        return D.Empirical(draw(st.lists(st.floats(0.0, 1.0), min_size=n, max_size=n)))
    if kind == "pdl-induced":
        return pdl.PdlInduced(pdl.MaxwellianPdl(u(0.05, 8.0)))
    raise AssertionError(kind)


ALL_KINDS = ["uniform", "truncated-gaussian", "bernoulli", "symmetric-bimodal", "point-mass",
             "discrete", "beta", "haar", "empirical", "pdl-induced"]


@st.composite
def any_distribution(draw):
    return random_distribution(draw(st.sampled_from(ALL_KINDS)), draw)


# closed-form constants

def test_uniform_shape_constant():
    assert D.shape_constant(D.Uniform(0.4, 0.6)) == pytest.approx(1 / math.sqrt(3), abs=1e-9)


def test_gaussian_shape_constant_when_tail_negligible():
    g = D.TruncatedGaussian(0.5, 0.05)
    assert g.tail_mass() < D.GAUSSIAN_TAIL_LIMIT
    assert D.shape_constant(g) == pytest.approx(1 / math.sqrt(math.pi), abs=1e-6)


def test_bimodal_shape_constant():
    assert D.shape_constant(D.SymmetricBimodal(0.5, 0.2)) == pytest.approx(0.5, abs=1e-12)
    assert D.mean_abs_diff(D.SymmetricBimodal(0.4, 0.3)) == pytest.approx(0.3, abs=1e-12)


def test_haar_row():
    h = D.Haar()
    s = D.stats(h)
    assert s.mean == pytest.approx(0.25, abs=1e-12)
    assert s.expected_min == pytest.approx(1 / 7, abs=1e-10)
    assert s.shape_constant == pytest.approx(math.sqrt(15) / 7, abs=1e-9)
    assert s.penalty == pytest.approx(3 / 28, abs=1e-10)


def test_haar_is_beta_1_3():
    x = np.linspace(-0.2, 1.2, 301)
    np.testing.assert_allclose(D.Haar().cdf(x), D.Beta(1, 3).cdf(x), atol=0)
    xi = x[(x >= 0) & (x <= 1)]
    np.testing.assert_allclose(D.Haar().cdf(xi), 1 - (1 - xi) ** 3, atol=1e-14)


@pytest.mark.parametrize("mu", [0.0, 0.3, 0.5, 0.9, 1.0])
def test_bernoulli_expected_min_is_mu_squared(mu):
    b = D.Bernoulli(mu)
    assert D.expected_min(b) == pytest.approx(mu * mu, abs=1e-15)
    assert D.shape_constant(b) is None
    assert D.stats(b).penalty == pytest.approx(mu * (1 - mu), abs=1e-15)


def test_uniform_unit_interval():
    u = D.Uniform(0, 1)
    assert D.expected_min(u) == pytest.approx(1 / 3, abs=1e-12)
    assert D.mean_abs_diff(u) == pytest.approx(1 / 3, abs=1e-12)
    assert D.cdf(u, 0.5) == 0.5


def test_point_mass_is_degenerate():
    s = D.stats(D.PointMass(0.7))
    assert s.penalty == 0.0 and s.mean_abs_diff == 0.0 and s.shape_constant is None
    assert not any(isinstance(v, float) and math.isnan(v) for v in s.as_dict().values())


def test_cdf_boundaries():
    for d in (D.Uniform(0.2, 0.5), D.Haar(), D.Bernoulli(0.3), D.Empirical([0.1, 0.8])):
        assert d.cdf(-1e-12) == 0.0
        assert d.cdf(1.0) == 1.0
        assert d.cdf(3.0) == 1.0


# beta closed form

@pytest.mark.parametrize("a,b,expected", [(1, 3, 1 / 7), (1, 1, 1 / 3)])
def test_beta_expected_min_known(a, b, expected):
    assert D.beta_expected_min(a, b) == pytest.approx(expected, abs=1e-14)


@pytest.mark.parametrize("a,b", [(2, 2), (0.5, 0.5), (2, 5), (7.5, 1.3)])
def test_beta_expected_min_matches_quadrature(a, b):
    # independent oracle: integrate (1 - I_x(a, b))^2 directly
    oracle, _ = integrate.quad(lambda x: (1 - special.betainc(a, b, x)) ** 2, 0, 1, epsabs=1e-13, limit=200)
    assert D.beta_expected_min(a, b) == pytest.approx(oracle, abs=1e-8)


def test_beta_expected_min_large_parameters():
    # B(a, b)^2 underflows here without log-space evaluation
    v = D.beta_expected_min(400.0, 600.0)
    assert math.isfinite(v)
    mu, sd = 0.4, math.sqrt(0.24 / 1001)
    assert v == pytest.approx(mu - sd / math.sqrt(math.pi), abs=1e-4)


@pytest.mark.parametrize("a,b", [(0, 1), (1, -2)])
def test_beta_expected_min_domain(a, b):
    with pytest.raises(ValueError):
        D.beta_expected_min(a, b)


# property suite

@settings(max_examples=60, deadline=None)
@given(any_distribution())
def test_expected_min_identity(dist):
    mu, delta, emin = dist.mean(), dist.mean_abs_diff(), dist.expected_min()
    assert abs(emin - (mu - delta / 2)) <= 1e-8
    assert -1e-12 <= emin <= mu + 1e-12


@settings(max_examples=40, deadline=None)
@given(any_distribution())
def test_stats_fields(dist):
    s = D.stats(dist)
    assert s.penalty == pytest.approx(s.mean_abs_diff / 2, abs=1e-9) or s.std == 0.0
    if s.std > 1e-6:
        assert s.expected_min < s.mean
    else:
        assert s.expected_min == pytest.approx(s.mean, abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(any_distribution(), st.lists(st.floats(-0.5, 1.5), min_size=2, max_size=30))
def test_cdf_monotone(dist, xs):
    xs = np.sort(xs)
    F = dist.cdf(xs)
    assert np.all(np.diff(F) >= -1e-15)
    assert np.all((F >= 0) & (F <= 1))


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_min_of_two_monte_carlo(kind):
    fixed = {
        "uniform": D.Uniform(0.3, 0.8),
        "truncated-gaussian": D.TruncatedGaussian(0.6, 0.2),
        "bernoulli": D.Bernoulli(0.35),
        "symmetric-bimodal": D.SymmetricBimodal(0.5, 0.3),
        "point-mass": D.PointMass(0.42),
        "discrete": D.Discrete([0.1, 0.5, 0.9], [0.2, 0.5, 0.3]),
        "beta": D.Beta(2.0, 5.0),
        "haar": D.Haar(),
        "empirical": D.Empirical(np.linspace(0.05, 0.95, 37) ** 2),
        "pdl-induced": pdl.PdlInduced(pdl.MaxwellianPdl(2.35)),
    }[kind]
    rng = stream(11, ALL_KINDS.index(kind))
    n = 1_000_000
    m = np.minimum(fixed.sample(rng, n), fixed.sample(rng, n))
    se = m.std(ddof=1) / math.sqrt(n)
    assert abs(m.mean() - fixed.expected_min()) <= 4 * se + 1e-12


def test_haar_sample_mean():
    x = D.Haar().sample(stream(5), 1_000_000)
    assert abs(x.mean() - 0.25) <= 4 * x.std() / 1000


def test_bernoulli_frequency():
    mu, n = 0.3, 200_000
    x = D.Bernoulli(mu).sample(stream(6), n)
    assert set(np.unique(x)) <= {0.0, 1.0}
    assert abs(x.mean() - mu) <= 4 * math.sqrt(mu * (1 - mu) / n)
    assert np.all(D.Bernoulli(1.0).sample(stream(6), 100) == 1.0)


def test_sampling_reproducible():
    a = D.Beta(2, 3).sample(stream(1, 2), 10)
    b = D.Beta(2, 3).sample(stream(1, 2), 10)
    assert np.array_equal(a, b)
    assert 0.0 <= D.sample(D.Uniform(), stream(0)) <= 1.0


@pytest.mark.parametrize("dist", [D.Uniform(0.2, 0.7), D.TruncatedGaussian(0.5, 0.1), D.Beta(2, 5), D.Haar(),
                                  pdl.PdlInduced(pdl.MaxwellianPdl(2.35))], ids=repr)
def test_cdf_derivative_matches_density(dist):
    h = 1e-6
    x = np.linspace(0.0, 1.0, 10_000)
    bp = np.array([0.0, 1.0, *dist.breakpoints()])
    x = x[np.min(np.abs(x[:, None] - bp[None, :]), axis=1) > 2 * h]
    deriv = (dist.cdf(x + h) - dist.cdf(x - h)) / (2 * h)
    assert np.max(np.abs(deriv - dist.pdf(x))) <= 1e-5


@pytest.mark.parametrize("make", [D.Uniform.from_mean_std, D.TruncatedGaussian, D.SymmetricBimodal])
def test_location_scale_invariance(make):
    if make is D.TruncatedGaussian:
        params = [(0.5, 0.05), (0.3, 0.04), (0.7, 0.06)]
    else:
        params = [(0.5, 0.1), (0.3, 0.05), (0.6, 0.2)]
    c = [D.shape_constant(make(m, s)) for m, s in params]
    assert max(c) - min(c) <= 1e-6


def test_empirical_exact_sums():
    s = np.array([0.2, 0.2, 0.5, 0.9])
    e = D.Empirical(s)
    pairs = np.minimum.outer(s, s)
    assert e.expected_min() == pytest.approx(pairs.mean(), abs=1e-15)
    assert e.mean_abs_diff() == pytest.approx(np.abs(np.subtract.outer(s, s)).mean(), abs=1e-15)
    assert e.cdf(0.2) == 0.5 and e.cdf(0.19999) == 0.0


def test_discrete_exact_sums():
    v, p = np.array([0.1, 0.4, 0.8]), np.array([0.5, 0.3, 0.2])
    d = D.Discrete(v, p)
    w = np.outer(p, p)
    assert d.expected_min() == pytest.approx(np.sum(w * np.minimum.outer(v, v)), abs=1e-15)


def test_quadrature_failure_reports_error(monkeypatch):
    monkeypatch.setattr(D, "QUAD_MAX_ERROR", -1.0)
    with pytest.raises(D.QuadratureError, match="achieved error"):
        D.Beta(2, 2).expected_min()


# configuration

@pytest.mark.parametrize("cfg,expected", [
    ({"kind": "uniform", "params": {"low": 0.1, "high": 0.3}}, D.Uniform),
    ({"kind": "uniform", "params": {"mean": 0.5, "std": 0.1}}, D.Uniform),
    ({"kind": "gaussian", "params": {"mean": 0.5, "std": 0.05}}, D.TruncatedGaussian),
    ({"kind": "bernoulli", "params": {"mean": 0.3}}, D.Bernoulli),
    ({"kind": "symmetric-bimodal", "params": {"mean": 0.5, "std": 0.2}}, D.SymmetricBimodal),
    ({"kind": "beta", "params": {"alpha": 2, "beta": 5}}, D.Beta),
    ({"kind": "haar"}, D.Haar),
    ({"kind": "empirical", "params": {"samples": [0.1, 0.2]}}, D.Empirical),
    ({"kind": "pdl-induced", "params": {"model": {"kind": "maxwellian", "mean_db": 2.35}}}, pdl.PdlInduced),
])
def test_from_config(cfg, expected):
    d = D.from_config(cfg)
    assert isinstance(d, expected)


def test_config_round_trip():
    for d in (D.Uniform(0.1, 0.4), D.Beta(2, 3), D.Haar(), D.Bernoulli(0.2), D.SymmetricBimodal(0.5, 0.1)):
        again = D.from_config(d.to_config())
        assert again.expected_min() == pytest.approx(d.expected_min(), abs=1e-15)


@pytest.mark.parametrize("cfg", [
    {"kind": "lognormal"},
    {"kind": "beta", "params": {"alpha": -1, "beta": 2}},
    {"kind": "bernoulli", "params": {"mean": 1.5}},
    {"kind": "uniform"},
    {"kind": "uniform", "params": {"low": 0.5, "high": 1.5}},
])
def test_bad_config(cfg):
    with pytest.raises(D.ConfigError):
        D.from_config(cfg)
