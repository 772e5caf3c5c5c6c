import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from foxfade import akmu, mc
from foxfade.akmu import REFERENCE, ChannelParams
from foxfade.errors import InvalidParameterError, NonIntegerClusterError


def test_fig1_component_params():
    c = mc.component_params(REFERENCE)
    assert (c.mu_x, c.mu_y) == (3, 1)
    assert c.sigma_x == pytest.approx(math.sqrt(1 / 12), rel=1e-15)
    # quadrature variance without p in the denominator (see README)
    assert c.sigma_y == pytest.approx(0.5, rel=1e-15)
    assert (c.lambda_x, c.lambda_y) == pytest.approx((0.5, 0.5), rel=1e-15)


def test_non_integer_clusters():
    with pytest.raises(NonIntegerClusterError, match="mu_x"):
        mc.component_params(REFERENCE.replace(p=2.0, mu=1.0))


def test_fully_symmetric_components():
    c = mc.component_params(ChannelParams(2.0, 1.0, 1.0, 2.0, 1.0, 1.0))
    assert c.sigma_x == pytest.approx(c.sigma_y) and c.lambda_x == pytest.approx(c.lambda_y)


@given(st.integers(0, 2**63 - 1), st.integers(1, 3000))
def test_same_seed_same_batch(seed, n):
    a = mc.sample_envelope(REFERENCE, n, seed)
    b = mc.sample_envelope(REFERENCE, n, seed)
    assert np.array_equal(a.samples, b.samples) and np.all(a.samples > 0)


def test_workers_do_not_change_output():
    n = 3 * mc.BLOCK + 17
    a = mc.sample_envelope(REFERENCE, n, 11)
    b = mc.sample_envelope(REFERENCE, n, 11, workers=3)
    assert np.array_equal(a.samples, b.samples)


def test_different_seeds_differ():
    assert not np.array_equal(mc.sample_envelope(REFERENCE, 100, 1).samples,
                              mc.sample_envelope(REFERENCE, 100, 2).samples)


def test_bad_n():
    with pytest.raises(InvalidParameterError):
        mc.sample_envelope(REFERENCE, 0, 1)


@pytest.mark.parametrize("P", [REFERENCE, ChannelParams(2.0, 0.5, 0.5, 1.0, 1.0, 2.0, 1.5),
                               ChannelParams(1.0, 2.0, 3.0, 1.5, 2.0, 0.5, 0.8)])
def test_mean_r_alpha(P):
    m, se = mc.sample_envelope(P, 200_000, 5).mean_r_alpha()
    assert abs(m - P.r_hat ** P.alpha) <= 3 * se


def test_ks_against_oracle():
    batch = mc.sample_envelope(REFERENCE, 100_000, 3)
    d = mc.ks_distance(batch, lambda r: akmu.cdf_conv_oracle(REFERENCE, r))
    assert d <= 1.63 / math.sqrt(100_000)


def test_ks_degenerate_batch():
    F = lambda x: 1 - np.exp(-np.asarray(x))  # noqa: E731
    d = mc.ks_distance(np.full(10, 0.7), F)
    assert d == pytest.approx(max(F(0.7), 1 - F(0.7)))


@given(st.lists(st.floats(0.0, 10.0), min_size=1, max_size=50))
def test_ks_in_unit_interval(xs):
    d = mc.ks_distance(np.array(xs), lambda x: 1 - np.exp(-np.asarray(x)))
    assert 0.0 <= d <= 1.0


def test_ks_scalar_cdf_accepted():
    d1 = mc.ks_distance(np.array([0.2, 0.9]), lambda x: min(1.0, max(0.0, float(x))))
    # ECDF is 0.5 just below 0.9 where F = 0.9
    assert d1 == pytest.approx(0.4)


def test_histogram_matches_density():
    batch = mc.sample_envelope(REFERENCE, 10_000_000, 21)
    dens, edges = batch.histogram(np.arange(0.0, 3.0001, 0.05))
    mid = 0.5 * (edges[1:] + edges[:-1])
    n = len(batch)
    width = 0.05
    # bin probabilities from the interpolated integral of pdf_exact
    Fe = akmu.CdfCurve(REFERENCE, tol_rel=1e-5, tol_im=1e-6)(edges)
    expected = np.diff(Fe) / width
    bound = 3 * np.sqrt(np.maximum(np.diff(Fe) * n, 1.0)) / (n * width)
    assert np.all(np.abs(dens - expected) <= bound + 1e-12), mid[np.abs(dens - expected) > bound]


def test_outage_fraction_and_csv(tmp_path):
    batch = mc.sample_envelope(REFERENCE, 1000, 4)
    assert mc.outage_fraction(batch, 1.0, 1e9) == 1.0
    assert mc.outage_fraction(batch, 1.0, 0.0) == 0.0
    path = tmp_path / "s.csv"
    batch.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "r" and len(lines) == 1001
    assert np.array_equal(np.array([float(x) for x in lines[1:]]), batch.samples)
