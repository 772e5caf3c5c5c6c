"""Closed-form identities used to self-check the evaluator."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..specfun import bessel_i
from .contours import find_contours
from .evaluate import hfox
from .spec import FoxHSpec, GammaTerm


@dataclass(frozen=True)
class IdentityCheck:
    name: str
    value: float
    reference: float
    error: float
    tolerance: float
    passed: bool
    message: str = ""


@dataclass(frozen=True)
class IdentityReport:
    checks: tuple[IdentityCheck, ...] = field(default_factory=tuple)

    @property
    def failures(self) -> list[IdentityCheck]:
        return [c for c in self.checks if not c.passed]

    @property
    def passed(self) -> bool:
        return not self.failures


def exponential_spec() -> FoxHSpec:
    """G^{1,0}_{0,1}(x | -; 0) = exp(-x)."""
    return FoxHSpec(1, (GammaTerm(0.0, (-1.0,)),), label="exp")


def bessel_spec(nu: float) -> FoxHSpec:
    """pi 2^{-nu} G^{1,0}_{1,3}(1/2 | 0, -nu, 1/2); times z^nu at argument z^2/4 gives I_nu(z)."""
    return FoxHSpec(
        1,
        (GammaTerm(0.0, (-1.0,)),),
        (GammaTerm(1.0 + nu, (1.0,)), GammaTerm(0.5, (1.0,)), GammaTerm(0.5, (-1.0,))),
        prefactor=math.pi * 2.0 ** (-nu),
        label=f"bessel_i(nu={nu:g})",
    )


def bessel_via_h(nu: float, z: float, **kw) -> float:
    return hfox(bessel_spec(nu), [z * z / 4], **kw).value * z ** nu


def _check(name, fn, reference, tol, relative):
    try:
        v = fn()
        err = abs(v - reference) / (abs(reference) if relative else 1.0)
        return IdentityCheck(name, v, reference, err, tol, err <= tol)
    except Exception as exc:  # report, never abort
        return IdentityCheck(name, math.nan, reference, math.inf, tol, False, repr(exc))


def self_test_identities(
    exp_points=(0.1, 1.0, 5.0),
    bessel_points=((0.5, 1.0), (-0.5, 1.0), (0.5, 6.0), (1.5, 2.0)),
) -> IdentityReport:
    """Check the exponential and Bessel Mellin-Barnes identities and contour-shift invariance."""
    checks = []
    for x in exp_points:
        checks.append(_check(f"exp x={x:g}",
                             lambda x=x: hfox(exponential_spec(), [x], tol_rel=1e-12).value,
                             math.exp(-x), 1e-10, relative=False))
    for nu, z in bessel_points:
        checks.append(_check(f"bessel nu={nu:g} z={z:g}",
                             lambda nu=nu, z=z: bessel_via_h(nu, z, tol_rel=1e-10),
                             float(bessel_i(nu, z)), 1e-8, relative=True))

    spec = bessel_spec(0.5)
    args = [1.0]
    base = find_contours(spec, args)

    # evaluate well below the 1e-6 invariance tolerance so both errors fit inside it
    def shifted(c):
        return hfox(spec, args, tol_rel=1e-8,
                    contours=base.with_updates(abscissas=(c,))).value

    ref = None
    try:
        ref = shifted(-0.2)
    except Exception as exc:
        checks.append(IdentityCheck("contour shift", math.nan, math.nan, math.inf, 1e-6, False,
                                    repr(exc)))
    if ref is not None:
        checks.append(_check("contour shift c=-0.2 -> -0.4", lambda: shifted(-0.4), ref, 1e-6,
                             relative=True))
    return IdentityReport(tuple(checks))
