"""The alpha-eta-kappa-mu fading model: constants, densities and oracles.

All envelope-domain quantities live here. Exact results go through the
generic Fox H evaluator in :mod:`foxfade.foxh`; the oracles use direct
quadrature of the convolution integral and never touch contour integrals.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.stats import ncx2 as _ncx2

from .errors import (InvalidParameterError, NearSingularError, NumericalFailure,
                     NumericalOverflowError, QuadratureError)
from .foxh import EvalResult, FoxHSpec, GammaTerm, hfox
from .quadrature import tanh_sinh
from .specfun import bessel_i_reduced_scaled, hyp0f1_regularized, laguerre_generalized

ETA_P_EPS = 1e-6
_LOG_TINY = math.log(5e-324)
_LOG_NEGLIGIBLE = math.log(1e-17)


@dataclass(frozen=True)
class ChannelParams:
    """The seven physical parameters of the model; validated on construction."""

    alpha: float
    eta: float
    kappa: float
    mu: float
    p: float
    q: float
    r_hat: float = 1.0

    def __post_init__(self):
        for name in ("alpha", "eta", "kappa", "mu", "p", "q", "r_hat"):
            v = getattr(self, name)
            try:
                v = float(v)
            except (TypeError, ValueError):
                raise InvalidParameterError(f"{name} must be a real number, got {v!r}") from None
            object.__setattr__(self, name, v)
            if not math.isfinite(v):
                raise InvalidParameterError(f"{name} must be finite, got {v}")
        for name in ("alpha", "eta", "mu", "p", "r_hat"):
            if not getattr(self, name) > 0:
                raise InvalidParameterError(f"{name} must be > 0, got {getattr(self, name)}")
        for name in ("kappa", "q"):
            if not getattr(self, name) >= 0:
                raise InvalidParameterError(f"{name} must be >= 0, got {getattr(self, name)}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ChannelParams":
        return cls(**{k: d[k] for k in ("alpha", "eta", "kappa", "mu", "p", "q", "r_hat")})

    def swapped(self) -> "ChannelParams":
        """Exchange in-phase and quadrature roles: (eta, p, q) -> (1/eta, 1/p, 1/q)."""
        if self.q == 0:
            raise InvalidParameterError("component swap needs q > 0")
        return ChannelParams(self.alpha, 1 / self.eta, self.kappa, self.mu, 1 / self.p,
                             1 / self.q, self.r_hat)

    def replace(self, **kw) -> "ChannelParams":
        d = self.to_dict()
        d.update(kw)
        return ChannelParams(**d)


REFERENCE = ChannelParams(alpha=2.0, eta=1.0, kappa=1.0, mu=2.0, p=3.0, q=1.0, r_hat=1.0)


@dataclass(frozen=True)
class DerivedConstants:
    xi: float
    delta: float
    psi1: float
    psi2: float
    psi3: float
    a1: float
    a2: float
    a3: float
    a4: float
    a5: float
    # log(psi1 * A4^A1 * A5^A2); finite even when kappa or q is zero
    log_k: float


def _safe_log(x: float) -> float:
    return math.log(x) if x > 0 else -math.inf


def derive_constants(params: ChannelParams) -> DerivedConstants:
    """The shorthand constants of the exact density, plus the combined log constant."""
    if not isinstance(params, ChannelParams):
        raise InvalidParameterError("derive_constants expects ChannelParams")
    al, eta, ka, mu, p, q, rh = (params.alpha, params.eta, params.kappa, params.mu, params.p,
                                 params.q, params.r_hat)
    rha = rh ** al
    xi = (1 + eta) * (1 + ka) / (1 + p)
    de = (1 + q * eta) * (1 + p) / (1 + eta)
    expo = (1 + p * q) * ka * mu / de
    a1 = p * mu / (1 + p) - 1
    a2 = mu / (1 + p) - 1
    a3 = (eta - p) * xi * mu / (eta * rha)
    # separate roots so a subnormal kappa or q does not underflow the product
    a4 = 2 * p * mu * math.sqrt(q) * math.sqrt(ka) * math.sqrt(xi / (eta * de * rha))
    a5 = 2 * mu * math.sqrt(ka) * math.sqrt(xi / (de * rha))
    psi3 = p * xi * mu / (eta * rha)
    base = (math.log(p * al * mu * mu) + (1 + mu / 2) * math.log(xi)
            + (mu / 2 - 1) * math.log(de) - (1 + p + p * mu) / (2 + 2 * p) * math.log(eta) - expo)
    with np.errstate(all="ignore"):
        lpsi1 = (base + (1 + p - p * mu) / (2 + 2 * p) * _safe_log(q)
                 - (mu / 2 - 1) * _safe_log(ka))
        psi1 = float(np.exp(lpsi1)) if not math.isnan(lpsi1) else math.nan
    # kappa and q enter psi1 * A4^A1 * A5^A2 with exponents that cancel exactly
    log_k = (base
             + a1 * (math.log(2 * p * mu) + 0.5 * (math.log(xi / (eta * de)) - al * math.log(rh)))
             + a2 * (math.log(2 * mu) + 0.5 * (math.log(xi / de) - al * math.log(rh))))
    return DerivedConstants(xi, de, psi1, al - 1, psi3, a1, a2, a3, a4, a5, log_k)


def _log_front(params: ChannelParams, c: DerivedConstants) -> float:
    """log of psi1 pi^2 2^{2-mu} A4^A1 A5^A2 / (r_hat^alpha)^{1+mu/2}."""
    return (c.log_k + 2 * math.log(math.pi) + (2 - params.mu) * math.log(2)
            - (1 + params.mu / 2) * params.alpha * math.log(params.r_hat))


# spec builders -----------------------------------------------------------------------
def _pdf_terms(c: DerivedConstants, nv: int):
    def w(*idx):
        return tuple(1.0 if j in idx else 0.0 for j in range(nv))

    def neg(j):
        return tuple(-1.0 if k == j else 0.0 for k in range(nv))

    num = [
        GammaTerm(0.0, neg(0)), GammaTerm(0.0, neg(1)), GammaTerm(0.0, neg(2)),
        GammaTerm(1 + c.a2, w(0, 2)),
        GammaTerm(1 + c.a1, w(1)),
    ]
    den = [
        GammaTerm(1 + c.a1, w(1)),
        GammaTerm(0.5, w(1)), GammaTerm(0.5, neg(1)),
        GammaTerm(1 + c.a2, w(2)),
        GammaTerm(0.5, w(2)), GammaTerm(0.5, neg(2)),
        GammaTerm(2 + c.a1 + c.a2, w(0, 1, 2)),
    ]
    return num, den


def pdf_spec(params: ChannelParams) -> FoxHSpec:
    """Trivariate integrand of the exact density (unit prefactor)."""
    c = derive_constants(params)
    num, den = _pdf_terms(c, 3)
    return FoxHSpec(3, tuple(num), tuple(den), 1.0, label="pdf")


def pdf_args(params: ChannelParams, r: float) -> list[float]:
    c = derive_constants(params)
    x = r ** params.alpha
    return [c.a3 * x, c.a4 ** 2 / 4 * x, c.a5 ** 2 / 4 * x]


def cdf_spec(params: ChannelParams, extra: GammaTerm | None = None) -> FoxHSpec:
    """Four-variate integrand of the exact distribution; ``extra`` adds one numerator term."""
    c = derive_constants(params)
    num, den = _pdf_terms(c, 4)
    am = params.alpha * params.mu
    a = params.alpha
    num.append(GammaTerm(0.0, (0.0, 0.0, 0.0, -1.0)))
    num.append(GammaTerm(am, (a, a, a, a)))
    den.append(GammaTerm(am + 1, (a, a, a, a)))
    if extra is not None:
        num.append(extra)
    return FoxHSpec(4, tuple(num), tuple(den), 1.0, label="cdf" if extra is None else "ber")


def cdf_args(params: ChannelParams, r: float) -> list[float]:
    c = derive_constants(params)
    return pdf_args(params, r) + [c.psi3 * r ** params.alpha]


# exact forms -------------------------------------------------------------------------
def _check_r(r, allow_zero=False):
    r = float(r)
    if not math.isfinite(r) or r < 0 or (r == 0 and not allow_zero):
        raise InvalidParameterError(f"r must be {'>=' if allow_zero else '>'} 0, got {r}")
    return r


def pdf_exact_result(params: ChannelParams, r: float,
                     **kw) -> tuple[float, EvalResult | None]:
    """Density and its H-function evaluation (None when the density underflows)."""
    r = _check_r(r)
    c = derive_constants(params)
    logp = (_log_front(params, c) + (params.alpha * params.mu - 1) * math.log(r)
            - c.psi3 * r ** params.alpha)
    try:
        res = hfox(pdf_spec(params), pdf_args(params, r), **kw)
    except NumericalOverflowError as exc:
        # far in the tail the H value overflows but exp(-psi3 r^alpha) wins by far more
        if exc.log_magnitude is not None and exc.log_magnitude + logp < _LOG_TINY:
            return 0.0, None
        raise
    return res.value * math.exp(logp), res


def pdf_exact(params: ChannelParams, r: float, **kw) -> float:
    """Envelope density from the trivariate H-function representation."""
    return pdf_exact_result(params, r, **kw)[0]


def cdf_exact_result(params: ChannelParams, r: float, method: str = "auto",
                     **kw) -> tuple[float, EvalResult | None]:
    """Envelope distribution and the H-function evaluation behind it.

    ``method="h4"`` sums the four-variate H-function. Far in the upper tail
    that sum cancels catastrophically (terms of size 1e12 for a value near 1),
    so ``"tail"`` computes 1 - int_r^inf pdf_exact instead, by Gauss-Legendre
    panels over the exact density. ``"auto"`` uses the tail form whenever
    r^alpha >= 2 r_hat^alpha, where Markov's inequality gives F >= 1/2 so the
    absolute accuracy of the tail form is also relative; below that it uses
    h4 and still switches if hfox reports the sum as ill-conditioned. The
    tail form returns no EvalResult.
    """
    if method not in ("auto", "h4", "tail"):
        raise InvalidParameterError(f"unknown cdf method {method!r}")
    r = _check_r(r, allow_zero=True)
    if r == 0:
        return 0.0, None
    upper = r ** params.alpha >= 2 * params.r_hat ** params.alpha
    if method == "tail" or (method == "auto" and upper):
        if log_tail_bound(params, r) < _LOG_NEGLIGIBLE:
            return 1.0, None
        return 1.0 - _upper_tail(params, r, **kw), None
    c = derive_constants(params)
    try:
        res = hfox(cdf_spec(params), cdf_args(params, r), **kw)
    except NumericalFailure as exc:
        if method == "h4" or not exc.diagnostics.get("ill_conditioned"):
            raise
        return 1.0 - _upper_tail(params, r, **kw), None
    logp = _log_front(params, c) + params.alpha * params.mu * math.log(r)
    return res.value * math.exp(logp), res


def cdf_exact(params: ChannelParams, r: float, method: str = "auto", **kw) -> float:
    """Envelope distribution from the four-variate H-function representation."""
    return cdf_exact_result(params, r, method, **kw)[0]


_TAIL_NODES, _TAIL_WEIGHTS = np.polynomial.legendre.leggauss(24)


def _upper_tail(params: ChannelParams, r: float, **kw) -> float:
    """int_r^inf pdf_exact, truncated where the density drops below 1e-17 of its peak."""
    rh = params.r_hat
    b = r
    fmax = pdf_exact(params, r, **kw)
    for _ in range(60):
        b += rh
        fb = pdf_exact(params, b, **kw)
        fmax = max(fmax, fb)
        if fb <= 1e-17 * fmax:
            break
    else:
        raise QuadratureError("upper tail of the density does not decay")
    # 24-node panels no wider than 3 r_hat resolve the bell-shaped tail to ~1e-13
    edges = np.linspace(r, b, int(math.ceil((b - r) / (3 * rh))) + 1)
    total = 0.0
    for a, c in zip(edges[:-1], edges[1:]):
        t = 0.5 * (c - a) * _TAIL_NODES + 0.5 * (a + c)
        f = np.array([pdf_exact(params, float(x), **kw) for x in t])
        total += 0.5 * (c - a) * float(np.dot(_TAIL_WEIGHTS, f))
    return total


class CdfCurve:
    """Vectorized distribution function for many points (e.g. a KS test).

    A Chebyshev interpolant of pdf_exact on [0, r_max] is integrated and
    pinned to one four-variate cdf_exact value at ``anchor``. ``anchor_gap``
    is the difference between the integrated density and that value at the
    anchor, a built-in consistency check between the two H representations;
    ``mass`` is the integral of the interpolated density over [0, r_max].
    Above r_max the curve returns 1; r_max is chosen where the density has
    dropped below 1e-17 of its peak.
    """

    def __init__(self, params: ChannelParams, n: int = 48, anchor: float | None = None,
                 r_max: float | None = None, **kw):
        from numpy.polynomial import Chebyshev

        rh = params.r_hat
        if r_max is None:
            r_max, fmax = rh, 0.0
            for _ in range(60):
                f = pdf_exact(params, r_max, **kw)
                fmax = max(fmax, f)
                if f <= 1e-17 * fmax:
                    break
                r_max += 0.5 * rh
        anchor = rh if anchor is None else anchor
        self.params = params
        self.r_max = float(r_max)
        self.anchor = float(anchor)

        def dens(x):
            return np.array([pdf_exact(params, float(t), **kw) if t > 0 else 0.0
                             for t in np.atleast_1d(x)])

        self._pdf = Chebyshev.interpolate(dens, n - 1, domain=[0.0, self.r_max])
        prim = self._pdf.integ(lbnd=0.0)
        self.mass = float(prim(self.r_max))    # integral of the interpolated density
        self.anchor_value = cdf_exact(params, anchor, method="h4", **kw)
        self.anchor_gap = float(prim(anchor) - self.anchor_value)
        self._cdf = prim - self.anchor_gap

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        out = np.clip(self._cdf(np.clip(r, 0.0, self.r_max)), 0.0, 1.0)
        out = np.where(r >= self.r_max, 1.0, np.where(r <= 0, 0.0, out))
        return float(out) if out.ndim == 0 else out


def pdf_series(params: ChannelParams, r, n_terms: int):
    """Partial sum (n = 0 .. n_terms-1) of the Laguerre / 0F1 series density."""
    if int(n_terms) != n_terms or n_terms < 1:
        raise InvalidParameterError("n_terms must be an integer >= 1")
    al, eta, ka, mu, p, q, rh = (params.alpha, params.eta, params.kappa, params.mu, params.p,
                                 params.q, params.r_hat)
    if abs(eta - p) <= ETA_P_EPS:
        raise NearSingularError(
            f"series density is singular for |eta - p| <= {ETA_P_EPS:g} (eta={eta}, p={p})")
    rin = r
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise InvalidParameterError("r must be >= 0")
    c = derive_constants(params)
    x = r ** al / rh ** al
    lead = leading_coefficient(params) * math.gamma(mu)
    front = lead * r ** (al * mu - 1) * np.exp(-x * p * c.xi * mu / eta)
    lag_x = eta * ka * mu / (c.delta * (eta - p))
    ratio = x * c.xi * mu * (p - eta) / eta
    hz = p * p * q * x * ka * c.xi * mu * mu / (c.delta * eta)
    total = np.zeros_like(r)
    for n in range(int(n_terms)):
        total = total + ratio ** n * laguerre_generalized(n, mu / (1 + p) - 1, lag_x) \
            * hyp0f1_regularized(mu + n, hz)
    out = front * total
    return out[()] if np.ndim(rin) == 0 else out


def pdf_asymptotic(params: ChannelParams, r):
    """Small-r density with the constant exactly as printed in the source derivation.

    The printed constant is pi^2/(4 Gamma(1+A2) sqrt(pi)) times the true
    leading coefficient; compare :func:`leading_coefficient`.
    """
    rin = r
    r = np.asarray(r, dtype=float)
    c = derive_constants(params)
    al, mu = params.alpha, params.mu
    logc = (_log_front(params, c) - math.log(4) - math.lgamma(mu) - math.lgamma(1 + c.a2)
            - 0.5 * math.log(math.pi))
    out = np.exp(logc) * r ** (al * mu - 1) * np.exp(-c.psi3 * r ** al)
    return out[()] if np.ndim(rin) == 0 else out


def leading_coefficient(params: ChannelParams) -> float:
    """C0 = lim_{r->0} f_R(r) / r^{alpha mu - 1}."""
    al, eta, ka, mu, p, q, rh = (params.alpha, params.eta, params.kappa, params.mu, params.p,
                                 params.q, params.r_hat)
    c = derive_constants(params)
    logc = (math.log(al) + mu * math.log(c.xi * mu) + p * mu / (1 + p) * math.log(p / eta)
            - (1 + p * q) * ka * mu / c.delta - al * mu * math.log(rh) - math.lgamma(mu))
    return math.exp(logc)


def printed_asymptotic_ratio(params: ChannelParams) -> float:
    """pdf_asymptotic / true small-r density, i.e. printed constant over C0."""
    c = derive_constants(params)
    return math.pi ** 2 / (4 * math.gamma(1 + c.a2) * math.sqrt(math.pi))


# oracles -----------------------------------------------------------------------------
_CDF_CHUNK = 4
_ORACLE_RTOL = 1e-11


def _conv_integral(params: ChannelParams, c: DerivedConstants, X: np.ndarray) -> np.ndarray:
    """int_0^X (X-v)^A1 v^A2 exp(-A3 v - psi3 X) gI_A1 gI_A2 dv, with I_nu(y) = y^nu e^y g(y)."""
    A1, A2, A3, A4, A5, psi3 = c.a1, c.a2, c.a3, c.a4, c.a5, c.psi3

    def f(v, dv_a, dv_b):
        u = dv_b          # X - v, accurate near the upper end
        v = dv_a          # v, accurate near the lower end
        ya = A4 * np.sqrt(u)
        yb = A5 * np.sqrt(v)
        expo = -A3 * v - psi3 * (u + v) + ya + yb
        with np.errstate(divide="ignore", invalid="ignore", over="ignore", under="ignore"):
            val = (np.exp(expo + A1 * np.log(u) + A2 * np.log(v))
                   * bessel_i_reduced_scaled(A1, ya) * bessel_i_reduced_scaled(A2, yb))
        return np.where((u > 0) & (v > 0), val, 0.0)

    val, err = tanh_sinh(f, np.zeros_like(X), X, rtol=_ORACLE_RTOL, max_level=10,
                         raise_on_fail=False)
    bad = ~(err <= 1e-8 * np.abs(val) + 1e-300)
    if np.any(bad):
        raise QuadratureError(
            f"pdf_conv_oracle: levels disagree by {np.max(err[bad] / np.abs(val[bad])):.2e}")
    return val


def log_tail_bound(params: ChannelParams, r: float) -> float:
    """Chernoff bound on log P(R > r) from the component moment generating functions.

    With R^alpha = U + V (see :func:`cdf_conv_oracle`), P(R^alpha >= X) <=
    exp(-t X) E[e^{tU}] E[e^{tV}] for 0 < t < 1/(2 max(s_x, s_y)).
    """
    c = derive_constants(params)
    X = r ** params.alpha
    comps = [(0.5 / c.psi3, 2 * (c.a1 + 1), c.a4 ** 2), (0.5 / (c.psi3 + c.a3), 2 * (c.a2 + 1),
                                                          c.a5 ** 2)]

    def log_bound(t):
        out = -t * X
        for s, k, a2 in comps:
            g = 1 - 2 * s * t
            out += a2 * s * s * t / g - 0.5 * k * math.log(g)
        return out

    tmax = 0.5 / max(s for s, _, _ in comps)
    best = minimize_scalar(log_bound, bounds=(0.0, tmax * (1 - 1e-9)), method="bounded")
    return min(0.0, float(best.fun))


def _log_conv_norm(params: ChannelParams, c: DerivedConstants) -> float:
    # Normalization from the two noncentral chi-square laws (scales s_x, s_y and
    # noncentralities), deliberately not from the combined H-function constant.
    sx = 0.5 / c.psi3
    sy = 0.5 / (c.psi3 + c.a3)
    lx, ly = c.a4 ** 2 * sx, c.a5 ** 2 * sy
    return (math.log(params.alpha) - math.log(4 * sx * sy) - 0.5 * (lx + ly)
            - c.a1 * math.log(sx) - c.a2 * math.log(sy))


def pdf_conv_oracle(params: ChannelParams, r):
    """Density by direct quadrature of the convolution of the two component laws.

    Tanh-sinh quadrature absorbs the endpoint power singularities; it is
    refined until successive levels agree to about 1e-11 relative.
    """
    rin = r
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r < 0):
        raise InvalidParameterError("r must be >= 0")
    c = derive_constants(params)
    al, mu = params.alpha, params.mu
    out = np.zeros_like(r)
    pos = r > 0
    if np.any(pos):
        rp = r[pos]
        X = rp ** al
        vals = np.empty_like(rp)
        # below this the nodes underflow; the density is C0 r^(alpha mu - 1) to O(r^alpha)
        tiny = X < 1e-100 * params.r_hat ** al
        vals[tiny] = leading_coefficient(params) * rp[tiny] ** (al * mu - 1)
        if np.any(~tiny):
            integ = _conv_integral(params, c, X[~tiny])
            vals[~tiny] = math.exp(_log_conv_norm(params, c)) * rp[~tiny] ** (al - 1) * integ
        out[pos] = vals
    return out[0] if np.ndim(rin) == 0 else out


def cdf_oracle(params: ChannelParams, r):
    """Distribution by tanh-sinh quadrature of :func:`pdf_conv_oracle` over (0, r).

    Vectorized over ``r``; the range is split at multiples of r_hat so that
    each piece sees a smooth, unimodal integrand. Points are processed a few
    at a time because every outer node runs its own inner quadrature.
    """
    rin = r
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r < 0) or not np.all(np.isfinite(r)):
        raise InvalidParameterError("r must be finite and >= 0")
    edges = [0.0] + [b * params.r_hat for b in (0.5, 1.0, 1.5, 2.0, 3.0, 5.0, 8.0)] + [np.inf]
    total = np.zeros_like(r)

    def f(x, da, db):
        return pdf_conv_oracle(params, x.ravel()).reshape(x.shape)

    for start in range(0, r.size, _CDF_CHUNK):
        rc = r[start:start + _CDF_CHUNK]
        for lo, hi in zip(edges[:-1], edges[1:]):
            a = np.minimum(rc, lo)
            b = np.minimum(rc, hi)
            live = b > a
            if not np.any(live):
                continue
            val, err = tanh_sinh(f, a[live], b[live], rtol=1e-11, atol=1e-15, max_level=8,
                                 raise_on_fail=False)
            if np.any(~(err <= np.maximum(1e-8 * np.abs(val), 1e-12))):
                raise QuadratureError(f"cdf_oracle: no convergence on a piece of [{lo:g}, {hi:g}]")
            idx = np.flatnonzero(live) + start
            total[idx] += val
    return total[0] if np.ndim(rin) == 0 else total


def cdf_conv_oracle(params: ChannelParams, r):
    """Distribution as a single convolution of the two component laws.

    R^alpha is the sum of two independent scaled noncentral chi-square
    variables, U = s_x chi2'(2(A1+1), A4^2 s_x) and V = s_y chi2'(2(A2+1),
    A5^2 s_y) with s_x = 1/(2 psi3) and s_y = 1/(2(psi3 + A3)). Then
    F(r) = int_0^{r^alpha} f_U(u) F_V(r^alpha - u) du, with both laws taken
    from scipy. It needs one quadrature per point instead of a nested pair,
    which makes it the workhorse for the BER quadrature oracle.
    """
    rin = r
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r < 0) or not np.all(np.isfinite(r)):
        raise InvalidParameterError("r must be finite and >= 0")
    c = derive_constants(params)
    sx = 0.5 / c.psi3
    sy = 0.5 / (c.psi3 + c.a3)
    kx, lx = 2 * (c.a1 + 1), c.a4 ** 2 * sx
    ky, ly = 2 * (c.a2 + 1), c.a5 ** 2 * sy

    def f(u, da, db):
        return _ncx2.pdf(da / sx, kx, lx) / sx * _ncx2.cdf(db / sy, ky, ly)

    X = r ** params.alpha
    total = np.zeros_like(r)
    pos = X > 0
    idx = np.flatnonzero(pos)
    for start in range(0, idx.size, 256):
        sel = idx[start:start + 256]
        val, err = tanh_sinh(f, np.zeros(sel.size), X[sel], rtol=1e-12, atol=1e-300,
                             max_level=10, raise_on_fail=False)
        if np.any(~(err <= np.maximum(1e-9 * np.abs(val), 1e-15))):
            raise QuadratureError("cdf_conv_oracle: quadrature did not converge")
        total[sel] = np.minimum(val, 1.0)
    return total[0] if np.ndim(rin) == 0 else total
