import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from foxfade import akmu
from foxfade.akmu import REFERENCE, ChannelParams
from foxfade.errors import InvalidParameterError, NearSingularError

import oracles

ETA_GT_P = ChannelParams(2.0, 3.0, 1.0, 2.0, 1.0, 1.0)
ETA_EQ_P = ChannelParams(2.0, 2.0, 1.0, 2.0, 2.0, 1.0)

positive = st.floats(0.2, 4.0)
channels = st.builds(ChannelParams, st.floats(0.5, 3.0), positive, st.floats(0.0, 3.0),
                     st.floats(0.5, 3.0), positive, st.floats(0.0, 3.0), st.floats(0.5, 2.0))


# parameters and constants -------------------------------------------------------------------
def test_fig1_constants():
    c = akmu.derive_constants(REFERENCE)
    got = (c.xi, c.delta, c.psi2, c.psi3, c.a1, c.a2, c.a3, c.a4, c.a5)
    assert got == pytest.approx((1, 4, 1, 6, 0.5, -0.5, -4, 6, 2), abs=1e-14)
    # the shorthand psi1 is 24 e^-2 for this set
    assert c.psi1 == pytest.approx(24 * math.exp(-2), rel=1e-14)


def test_eta_equals_p_zeroes_a3():
    assert akmu.derive_constants(ETA_EQ_P).a3 == 0.0


@pytest.mark.parametrize("field", ["alpha", "eta", "mu", "p", "r_hat"])
def test_nonpositive_rejected(field):
    with pytest.raises(InvalidParameterError, match=field):
        REFERENCE.replace(**{field: 0.0})


@pytest.mark.parametrize("field", ["kappa", "q"])
def test_negative_rejected(field):
    with pytest.raises(InvalidParameterError, match=field):
        REFERENCE.replace(**{field: -0.1})


def test_params_hashable_and_serializable():
    assert hash(REFERENCE) == hash(ChannelParams.from_dict(REFERENCE.to_dict()))
    assert {REFERENCE: 1}[ChannelParams(2, 1, 1, 2, 3, 1)] == 1


@given(channels)
def test_derived_constant_invariants(P):
    c = akmu.derive_constants(P)
    assert c.xi > 0 and c.delta > 0 and c.psi3 > 0
    assert c.a1 > -1 and c.a2 > -1
    assert np.sign(c.a3) == np.sign(P.eta - P.p)
    if P.kappa > 0 and P.q > 0:
        assert c.psi1 > 0 and c.a4 > 0 and c.a5 > 0
    assert math.isfinite(c.log_k)


# exact density ------------------------------------------------------------------------------
@pytest.mark.parametrize("r, ref", oracles.REF_PDF.items())
def test_pdf_exact_frozen(r, ref):
    assert akmu.pdf_exact(REFERENCE, r) == pytest.approx(ref, rel=1e-6)


@pytest.mark.parametrize("r, ref", oracles.REF_PDF.items())
def test_pdf_oracle_frozen(r, ref):
    assert akmu.pdf_conv_oracle(REFERENCE, r) == pytest.approx(ref, rel=1e-10)


@pytest.mark.parametrize("P", [ETA_GT_P, ETA_EQ_P, ChannelParams(3, 0.5, 2, 1.5, 0.7, 2, 1.3),
                               ChannelParams(1.5, 1, 0.5, 1, 3, 0.5), REFERENCE.replace(kappa=0.0),
                               REFERENCE.replace(q=0.0)])
def test_pdf_exact_vs_oracle_other_sets(P):
    for r in (0.4 * P.r_hat, 1.1 * P.r_hat):
        assert akmu.pdf_exact(P, r) == pytest.approx(akmu.pdf_conv_oracle(P, r), rel=1e-4)


def test_pdf_rejects_nonpositive_r():
    with pytest.raises(InvalidParameterError):
        akmu.pdf_exact(REFERENCE, 0.0)


def test_pdf_scaling_in_r_hat():
    for rh in (0.5, 2.0):
        a = akmu.pdf_exact(REFERENCE.replace(r_hat=rh), 0.8 * rh) * rh
        assert a == pytest.approx(akmu.pdf_exact(REFERENCE, 0.8), rel=1e-8)


def test_component_swap_symmetry():
    for P in (REFERENCE, ETA_GT_P):
        for r in (0.5, 1.5):
            assert akmu.pdf_exact(P.swapped(), r) == pytest.approx(akmu.pdf_exact(P, r), rel=1e-6)
            assert akmu.pdf_conv_oracle(P.swapped(), r) == pytest.approx(
                akmu.pdf_conv_oracle(P, r), rel=1e-10)


# distribution -------------------------------------------------------------------------------
def test_cdf_exact_frozen():
    for r in (0.3, 1.0):
        assert akmu.cdf_exact(REFERENCE, r) == pytest.approx(oracles.REF_CDF[r], abs=1e-6)


def test_cdf_limits():
    assert akmu.cdf_exact(REFERENCE, 0.0) == 0.0
    assert akmu.cdf_oracle(REFERENCE, 0.0) == 0.0
    assert abs(akmu.cdf_exact(REFERENCE, 10.0) - 1) <= 1e-4
    assert abs(akmu.cdf_oracle(REFERENCE, 6.0) - 1) <= 1e-6


def test_cdf_methods_agree_in_tail():
    # the tail form is what auto falls back to when the four-variate sum is ill-conditioned
    h4 = akmu.cdf_exact(REFERENCE, 1.5, method="h4")
    tail = akmu.cdf_exact(REFERENCE, 1.5, method="tail")
    assert h4 == pytest.approx(tail, abs=1e-6)
    assert tail == pytest.approx(oracles.REF_CDF[1.5], abs=1e-9)


def test_cdf_oracles_frozen_and_monotone():
    rs = np.linspace(0.0, 3.0, 31)
    F = akmu.cdf_oracle(REFERENCE, rs)
    assert np.all(np.diff(F) >= 0)
    G = akmu.cdf_conv_oracle(REFERENCE, rs)
    assert np.max(np.abs(F - G)) <= 1e-10
    for r, ref in oracles.REF_CDF.items():
        assert akmu.cdf_conv_oracle(REFERENCE, r) == pytest.approx(ref, abs=1e-12)


def test_cdf_curve():
    curve = akmu.CdfCurve(REFERENCE, n=48, tol_rel=1e-5, tol_im=1e-6)
    assert abs(curve.mass - 1) <= 1e-5
    rs = np.array(list(oracles.REF_CDF))
    assert np.max(np.abs(curve(rs) - np.array(list(oracles.REF_CDF.values())))) <= 1e-5
    assert curve(-1.0) == 0.0 and curve(100.0) == 1.0


def test_unknown_cdf_method():
    with pytest.raises(InvalidParameterError):
        akmu.cdf_exact(REFERENCE, 1.0, method="simpson")


# series, asymptote, leading coefficient -----------------------------------------------------
def test_leading_coefficient_fig1():
    assert akmu.leading_coefficient(REFERENCE) == pytest.approx(oracles.REF_C0, rel=1e-14)


@given(channels)
def test_leading_coefficient_r_hat_scaling(P):
    ratio = akmu.leading_coefficient(P.replace(r_hat=2 * P.r_hat)) / akmu.leading_coefficient(P)
    assert ratio == pytest.approx(2.0 ** (-P.alpha * P.mu), rel=1e-12)


def test_leading_coefficient_kappa_zero():
    P = REFERENCE.replace(kappa=0.0, q=0.0)
    c0 = akmu.leading_coefficient(P)
    no_exp = (P.alpha * (akmu.derive_constants(P).xi * P.mu) ** P.mu
              * (P.p / P.eta) ** (P.p * P.mu / (1 + P.p)) / math.gamma(P.mu))
    assert c0 == pytest.approx(no_exp, rel=1e-14)


def test_series_converges_to_exact():
    rs = np.array([0.1, 0.5, 1.0, 1.5])
    exact = np.array([akmu.pdf_exact(REFERENCE, r) for r in rs])
    gaps = [np.max(np.abs(akmu.pdf_series(REFERENCE, rs, n) / exact - 1)) for n in (2, 5, 10, 20)]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] <= 1e-3
    assert akmu.pdf_series(REFERENCE, 1.5, 2) < exact[-1]


def test_series_one_term_leading_behaviour():
    r = 1e-4
    val = akmu.pdf_series(REFERENCE, r, 1) / r ** (REFERENCE.alpha * REFERENCE.mu - 1)
    assert val == pytest.approx(akmu.leading_coefficient(REFERENCE), rel=1e-6)


def test_series_singular_at_eta_p():
    with pytest.raises(NearSingularError):
        akmu.pdf_series(ETA_EQ_P, 1.0, 5)


def test_asymptotic_ratio_constant():
    rs = [1e-3, 1e-2]
    ratios = [akmu.pdf_asymptotic(REFERENCE, r) / akmu.pdf_exact(REFERENCE, r) for r in rs]
    assert ratios[0] == pytest.approx(ratios[1], rel=1e-3)
    assert ratios[0] == pytest.approx(akmu.printed_asymptotic_ratio(REFERENCE), rel=1e-3)


def test_oracle_vanishes_at_origin():
    assert akmu.pdf_conv_oracle(REFERENCE, 1e-8) < 1e-20


@given(channels, st.floats(0.05, 2.5))
def test_oracle_positive(P, r):
    assume(P.q > 0 or P.kappa == 0)
    assert akmu.pdf_conv_oracle(P, r * P.r_hat) >= 0


@pytest.mark.parametrize("P", [REFERENCE, ChannelParams(3.0, 0.5, 2.0, 1.5, 0.7, 2.0, 1.3)])
def test_chernoff_tail_bound_is_an_upper_bound(P):
    for r in (0.5, 1.0, 1.5, 2.0, 2.5):
        tail = 1 - float(akmu.cdf_conv_oracle(P, r))
        assert math.exp(akmu.log_tail_bound(P, r)) >= tail * (1 - 1e-9)


def test_far_tail_is_exactly_one_and_cheap():
    import time
    t0 = time.perf_counter()
    assert akmu.cdf_exact(REFERENCE, 56.0) == 1.0
    assert akmu.pdf_exact(REFERENCE, 40.0) == 0.0
    assert time.perf_counter() - t0 < 30
