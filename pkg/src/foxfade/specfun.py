"""Special functions used throughout foxfade.

Every function accepts scalars or numpy arrays and returns the same shape.
Scalars in give Python/numpy scalars out.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError, NumericalOverflowError, PoleError, SeriesTruncationError

__all__ = [
    "log_gamma_complex",
    "bessel_i",
    "bessel_i_scaled",
    "bessel_i_reduced_scaled",
    "laguerre_generalized",
    "hyp0f1_regularized",
]

_LN_2PI_HALF = 0.5 * math.log(2.0 * math.pi)
_LN_PI = math.log(math.pi)
_SERIES_REL = 1e-16
_SERIES_CAP = 10_000

# B_{2k} / (2k (2k-1)) for k = 1..10
_STIRLING = np.array([
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
    43867.0 / 244188.0,
    -174611.0 / 125400.0,
])
_STIRLING_R = 10.0
_MAX_ABS_Z = 1e300


def _scalar_out(x, template):
    return x[()] if np.ndim(template) == 0 else x


def _lg_right(w: np.ndarray) -> np.ndarray:
    """log Gamma for Re w >= 0.5 by shifted Stirling."""
    aw = np.abs(w)
    shift = np.where(aw >= _STIRLING_R, 0, np.ceil(_STIRLING_R - w.real)).astype(int)
    shift = np.clip(shift, 0, 10)
    acc = np.zeros_like(w)
    for k in range(int(shift.max(initial=0))):
        m = shift > k
        acc[m] += np.log(w[m] + k)
    v = w + shift
    inv = 1.0 / v
    inv2 = inv * inv
    ser = np.full_like(v, _STIRLING[-1])
    for c in _STIRLING[-2::-1]:
        ser = ser * inv2 + c
    return (v - 0.5) * np.log(v) - v + _LN_2PI_HALF + ser * inv - acc


def _log_sin_pi_upper(z: np.ndarray) -> np.ndarray:
    """Principal-branch-consistent log(sin(pi z)) for Im z >= 0."""
    e = np.exp(2j * np.pi * z)
    return -1j * np.pi * z + np.log1p(-e) + math.log(0.5) + 0.5j * np.pi


def log_gamma_complex(z, *, poles: str = "raise"):
    """Principal branch of log Gamma(z) for complex ``z``.

    Stirling's series with ten Bernoulli terms is used for ``|z| >= 10``,
    reached by upward recurrence when needed. The left half-plane goes
    through the reflection formula, written so that the imaginary part is
    continuous away from the negative real axis.

    ``poles="raise"`` (default) raises :class:`PoleError` at non-positive
    integers; ``poles="inf"`` returns ``+inf`` there instead, which callers
    use when a pole of a denominator gamma should contribute a zero factor.
    """
    zin = z
    z = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(z)):
        raise NumericalOverflowError("log_gamma_complex: non-finite argument")
    if np.any(np.abs(z) > _MAX_ABS_Z):
        raise NumericalOverflowError("log_gamma_complex: |z| beyond representable range")
    pole = (z.imag == 0) & (z.real <= 0) & (z.real == np.round(z.real))
    if np.any(pole) and poles == "raise":
        raise PoleError(f"log_gamma_complex: pole at {z[pole].ravel()[0].real:g}")
    out = np.empty_like(z)
    zs = np.where(pole, 0.5, z)
    refl = zs.real < 0.5
    right = ~refl
    if np.any(right):
        out[right] = _lg_right(zs[right])
    if np.any(refl):
        zr = zs[refl]
        lower = zr.imag < 0
        zu = np.where(lower, np.conj(zr), zr)
        val = _LN_PI - _log_sin_pi_upper(zu) - _lg_right(1.0 - zu)
        out[refl] = np.where(lower, np.conj(val), val)
    if np.any(pole):
        out[pole] = np.inf
    return _scalar_out(out, zin)


def _check_bessel_args(nu: float, x: np.ndarray):
    if not nu > -1.0:
        raise DomainError(f"bessel_i: order nu={nu} must exceed -1")
    if np.any(x < 0) or np.any(np.isnan(x)):
        raise DomainError("bessel_i: x must be >= 0")


def _bessel_series_reduced(nu: float, x: np.ndarray) -> np.ndarray:
    """sum_k (x/2)^{2k} / (2^nu k! Gamma(k+nu+1)) = x^{-nu} I_nu(x)."""
    q = 0.25 * x * x
    term = np.full_like(x, 2.0 ** (-nu) / math.gamma(nu + 1.0))
    total = term.copy()
    for k in range(1, _SERIES_CAP):
        term = term * q / (k * (k + nu))
        total += term
        if np.all(term <= _SERIES_REL * total):
            return total
    raise SeriesTruncationError("bessel_i: power series did not converge")


def _bessel_asym_scaled(nu: float, x: np.ndarray) -> np.ndarray:
    """Large-x expansion of exp(-x) I_nu(x), truncated at its smallest term."""
    mu4 = 4.0 * nu * nu
    term = np.ones_like(x)
    total = term.copy()
    prev = np.abs(term)
    active = np.ones(x.shape, dtype=bool)
    for k in range(1, 200):
        nxt = -term * (mu4 - (2 * k - 1) ** 2) / (8.0 * k * x)
        growing = np.abs(nxt) > prev
        active &= ~growing
        total = np.where(active, total + nxt, total)
        done = np.abs(nxt) <= _SERIES_REL * np.abs(total)
        active &= ~done
        if not active.any():
            break
        prev = np.abs(nxt)
        term = nxt
    return total / np.sqrt(2.0 * np.pi * x)


_SEAM = 30.0


def bessel_i_scaled(nu: float, x):
    """exp(-x) I_nu(x) for real order nu > -1 and x >= 0."""
    xin = x
    x = np.asarray(x, dtype=float)
    _check_bessel_args(nu, x)
    if np.any(x == 0) and -1 < nu < 0:
        raise DomainError("bessel_i: I_nu(0) is unbounded for -1 < nu < 0")
    out = np.empty_like(x)
    lo = x <= _SEAM
    if np.any(lo):
        xl = x[lo]
        red = _bessel_series_reduced(nu, xl)
        with np.errstate(divide="ignore"):
            out[lo] = red * np.where(xl > 0, xl ** nu, 1.0 if nu == 0 else 0.0) * np.exp(-xl)
    if np.any(~lo):
        out[~lo] = _bessel_asym_scaled(nu, x[~lo])
    return _scalar_out(out, xin)


def bessel_i(nu: float, x):
    """Modified Bessel function of the first kind I_nu(x).

    Power series for ``x <= 30`` and the Hankel asymptotic expansion above.
    Raises :class:`NumericalOverflowError` once I_nu(x) exceeds the double
    range (around x = 713).
    """
    xin = x
    x = np.asarray(x, dtype=float)
    sc = np.asarray(bessel_i_scaled(nu, x))
    with np.errstate(over="ignore"):
        out = sc * np.exp(x)
    if not np.all(np.isfinite(out)):
        raise NumericalOverflowError("bessel_i: result overflows for x beyond ~713")
    return _scalar_out(out, xin)


def bessel_i_reduced_scaled(nu: float, x):
    """x^{-nu} exp(-x) I_nu(x); finite at x = 0 where it equals 2^{-nu}/Gamma(nu+1)."""
    xin = x
    x = np.asarray(x, dtype=float)
    _check_bessel_args(nu, x)
    out = np.empty_like(x)
    lo = x <= _SEAM
    if np.any(lo):
        out[lo] = _bessel_series_reduced(nu, x[lo]) * np.exp(-x[lo])
    if np.any(~lo):
        xh = x[~lo]
        out[~lo] = _bessel_asym_scaled(nu, xh) * xh ** (-nu)
    return _scalar_out(out, xin)


def laguerre_generalized(n: int, a: float, x):
    """Generalized Laguerre polynomial L_n^a(x) by the three-term recurrence."""
    if int(n) != n or n < 0:
        raise DomainError("laguerre_generalized: n must be a non-negative integer")
    xin = x
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if n == 0:
        return _scalar_out(prev, xin)
    cur = 1.0 + a - x
    for k in range(1, int(n)):
        prev, cur = cur, ((2 * k + 1 + a - x) * cur - (k + a) * prev) / (k + 1)
    return _scalar_out(cur, xin)


def hyp0f1_regularized(b: float, z):
    """Regularized confluent limit function sum_k z^k / (k! Gamma(b+k)).

    Entire in ``b``: for non-positive integer ``b`` the leading terms vanish
    and the sum starts at ``k0 = 1 - b``.
    """
    zin = z
    z = np.asarray(z, dtype=float)
    k0 = 0
    if b <= 0 and b == round(b):
        k0 = int(1 - b)
    out = np.zeros_like(z)
    nz = z != 0
    if k0 == 0:
        out[~nz] = 1.0 / math.gamma(b)
    if not np.any(nz):
        return _scalar_out(out, zin)
    zz = z[nz]
    if k0 == 0:
        term = np.full_like(zz, 1.0 / math.gamma(b))
    else:
        with np.errstate(over="raise"):
            logt = k0 * np.log(np.abs(zz)) - math.lgamma(k0 + 1) - math.lgamma(b + k0)
            term = np.sign(zz) ** k0 * np.exp(logt)
    total = term.copy()
    with np.errstate(over="raise", invalid="raise"):
        try:
            for k in range(k0, k0 + _SERIES_CAP):
                term = term * zz / ((k + 1) * (b + k))
                total = total + term
                if k + 1 > abs(b) and np.all(np.abs(term) <= _SERIES_REL * np.abs(total)):
                    break
            else:
                raise SeriesTruncationError("hyp0f1_regularized: series did not converge")
        except FloatingPointError as exc:
            raise NumericalOverflowError("hyp0f1_regularized: overflow for extreme z") from exc
    if not np.all(np.isfinite(total)):
        raise NumericalOverflowError("hyp0f1_regularized: overflow for extreme z")
    out[nz] = total
    return _scalar_out(out, zin)
