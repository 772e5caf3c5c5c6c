import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from foxfade import akmu, specfun
from foxfade.akmu import REFERENCE
from foxfade.errors import DomainError, InfeasibleContourError, NumericalFailure
from foxfade.foxh import (ContourConfig, FoxHSpec, GammaTerm, evaluate, find_contours, hfox,
                          self_test_identities)
from foxfade.foxh.identities import bessel_via_h

EXP = FoxHSpec(1, [GammaTerm(0.0, (-1.0,))])


# spec and config validation ----------------------------------------------------------------
def test_weights_length_checked():
    with pytest.raises(DomainError):
        FoxHSpec(2, [GammaTerm(0.0, (-1.0,))])


def test_constant_pole_rejected():
    with pytest.raises(DomainError):
        FoxHSpec(1, [GammaTerm(0.0, (-1.0,)), GammaTerm(-2.0, (0.0,))])


def test_variable_without_right_poles_rejected():
    with pytest.raises(DomainError):
        FoxHSpec(1, [GammaTerm(0.5, (1.0,))])


def test_contour_config_checks():
    with pytest.raises(DomainError):
        ContourConfig((-0.5,), 0.1, step=0.25)
    with pytest.raises(DomainError):
        ContourConfig((-0.5,), 10.0, step=0.25, bends=(-1.0,))
    with pytest.raises(DomainError):
        ContourConfig((-0.5,), 10.0, tol_rel=0.0)


terms = st.builds(
    lambda off, w: GammaTerm(off, w),
    st.floats(-5, 5, allow_nan=False).filter(lambda x: not (x <= 0 and x == round(x))),
    st.tuples(st.floats(-3, 3, allow_nan=False), st.floats(-3, 3, allow_nan=False)))


@given(st.lists(terms, max_size=4), st.lists(terms, max_size=4),
       st.floats(-1e6, 1e6, allow_nan=False), st.text(max_size=10))
def test_serialization_round_trip(num, den, pref, label):
    num = [GammaTerm(0.0, (-1.0, 0.0)), GammaTerm(0.25, (0.0, -2.0))] + num
    spec = FoxHSpec(2, num, den, pref, label)
    back = FoxHSpec.from_text(spec.to_text())
    assert back == spec and back.label == spec.label
    assert FoxHSpec.from_dict(spec.to_dict()) == spec


def test_from_dict_rejects_foreign():
    with pytest.raises(DomainError):
        FoxHSpec.from_dict({"num_vars": 1})


# contours ---------------------------------------------------------------------------------
def test_single_term_contour():
    c = find_contours(EXP, [1.0])
    assert c.abscissas == (-0.5,)


def test_pdf_spec_contours_feasible():
    spec = akmu.pdf_spec(REFERENCE)
    c = find_contours(spec, akmu.pdf_args(REFERENCE, 1.0))
    for t in spec.numerator:
        assert t.offset + sum(w * x for w, x in zip(t.weights, c.abscissas)) > 0
    c1, c2, c3 = c.abscissas
    assert c1 < 0 and c2 < 0 and c3 < 0 and c1 + c3 > -0.5


def test_infeasible_spec():
    spec = FoxHSpec(1, [GammaTerm(-1.0, (-1.0,)), GammaTerm(0.5, (1.0,))])
    with pytest.raises(InfeasibleContourError):
        find_contours(spec, [1.0])


def test_evaluate_rejects_infeasible_config():
    with pytest.raises(InfeasibleContourError):
        evaluate(EXP, [1.0], ContourConfig((0.5,), 20.0))


# evaluation -------------------------------------------------------------------------------
@pytest.mark.parametrize("x", [0.1, 1.0, 5.0])
def test_exponential(x):
    res = hfox(EXP, [x], tol_rel=1e-12)
    assert abs(res.value - math.exp(-x)) <= 1e-10
    assert res.im_residual <= res.value * 1e-8 + 1e-300
    assert res.nodes_used > 0


def test_contour_shift_invariance():
    a = evaluate(EXP, [2.0], ContourConfig((-0.2,), 30.0, step=0.2))
    b = evaluate(EXP, [2.0], ContourConfig((-0.8,), 30.0, step=0.2))
    assert abs(a.value - b.value) <= max(a.est_rel_err, b.est_rel_err, 1e-14) * abs(a.value)


def test_refinement_convergence():
    spec = akmu.pdf_spec(REFERENCE)
    args = akmu.pdf_args(REFERENCE, 0.7)
    conv = hfox(spec, args)
    base, v0 = conv.contours, conv.value
    v_h = evaluate(spec, args, replace(base, step=base.step / 2)).value
    v_t = evaluate(spec, args, replace(base, half_width=tuple(2 * t for t in base.half_width)))
    assert abs(v_h - v0) <= base.tol_rel * abs(v0)
    assert abs(v_t.value - v0) <= base.tol_rel * abs(v0)


def test_negative_argument_gives_real_value():
    args = akmu.pdf_args(REFERENCE, 1.0)
    assert args[0] < 0
    res = hfox(akmu.pdf_spec(REFERENCE), args)
    assert res.im_residual <= 1e-8 * max(1.0, abs(res.value))


def test_pdf_spec_matches_oracle_without_prefactor():
    from foxfade.akmu import _log_front
    c = akmu.derive_constants(REFERENCE)
    raw = hfox(akmu.pdf_spec(REFERENCE), akmu.pdf_args(REFERENCE, 1.0)).value
    # at r = 1 the power of r is 1 and the exponential is exp(-psi3)
    front = math.exp(_log_front(REFERENCE, c) - c.psi3)
    assert abs(raw * front / akmu.pdf_conv_oracle(REFERENCE, 1.0) - 1) <= 1e-4


def test_zero_arguments_reduce_to_residue():
    # as r -> 0 the pdf H-value tends to the s = 0 residue, i.e. C0 over the prefactor
    r = 1e-6
    v = akmu.pdf_exact(REFERENCE, r) / r ** 3
    assert v == pytest.approx(akmu.leading_coefficient(REFERENCE), rel=1e-6)


def test_numerical_failure_carries_spec():
    with pytest.raises(NumericalFailure) as info:
        hfox(akmu.pdf_spec(REFERENCE), akmu.pdf_args(REFERENCE, 0.5), tol_rel=1e-17)
    assert FoxHSpec.from_dict(info.value.diagnostics["spec"]) == akmu.pdf_spec(REFERENCE)


# identities -------------------------------------------------------------------------------
def test_identity_suite_passes():
    rep = self_test_identities()
    assert rep.passed, [c.name for c in rep.failures]
    assert len(rep.checks) >= 8


@pytest.mark.parametrize("nu, z", [(0.5, 1.0), (-0.5, 1.0), (0.5, 6.0), (1.5, 2.0)])
def test_bessel_g_representation(nu, z):
    assert abs(bessel_via_h(nu, z) / specfun.bessel_i(nu, z) - 1) <= 1e-8


def test_evaluation_is_deterministic():
    args = akmu.pdf_args(REFERENCE, 1.3)
    a = hfox(akmu.pdf_spec(REFERENCE), args)
    b = hfox(akmu.pdf_spec(REFERENCE), args)
    assert a.value == b.value and np.isfinite(a.value)


@given(st.floats(-40, 60), st.floats(-200, 200))
def test_kernel_log_gamma_matches_scipy(x, y):
    # the kernel may differ by a multiple of 2 pi i, which exp() ignores
    from scipy.special import loggamma

    from foxfade.foxh._kernel import lgamma_c
    if y == 0 and x <= 0 and x == math.floor(x):
        return
    a, b = lgamma_c(complex(x, y)), complex(loggamma(complex(x, y)))
    assert a.real == pytest.approx(b.real, rel=1e-12, abs=1e-11)
    d = (a.imag - b.imag) / (2 * math.pi)
    assert abs(d - round(d)) < 1e-9 * max(1.0, abs(b.imag))
