"""SNR-domain link metrics: outage probability, diversity order and average BER."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaincc, gammainccinv, roots_genlaguerre, rgamma

from . import akmu
from .akmu import ChannelParams
from .errors import InfeasibleContourError, InvalidParameterError, NumericalFailure, QuadratureError
from .foxh import GammaTerm, hfox

SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class ModulationScheme:
    pm: float
    qm: float
    name: str = ""

    def __post_init__(self):
        if not (self.pm > 0 and self.qm > 0):
            raise InvalidParameterError("modulation parameters pm and qm must be positive")


BPSK = ModulationScheme(0.5, 1.0, "BPSK")
DPSK = ModulationScheme(1.0, 1.0, "DPSK")
BFSK = ModulationScheme(0.5, 0.5, "BFSK")
PRESETS = {"bpsk": BPSK, "dpsk": DPSK, "bfsk": BFSK}


@dataclass(frozen=True)
class LinkParams:
    avg_snr: float
    threshold_snr: float

    def __post_init__(self):
        if not (self.avg_snr > 0 and self.threshold_snr > 0):
            raise InvalidParameterError("avg_snr and threshold_snr must be positive (linear)")


@dataclass(frozen=True)
class OutageAsymptote:
    """High-SNR outage P ~ coding_gain * avg_snr^(-diversity_order).

    ``coding_gain`` is the numerically correct constant; ``printed_coding_gain``
    is the one from the printed closed form, kept for comparison.
    """

    coding_gain: float
    diversity_order: float
    printed_coding_gain: float

    def value(self, avg_snr: float) -> float:
        return self.coding_gain * avg_snr ** (-self.diversity_order)


def snr_cdf(params: ChannelParams, gamma: float, avg_snr: float, **kw) -> float:
    if gamma < 0 or not avg_snr > 0:
        raise InvalidParameterError("need gamma >= 0 and avg_snr > 0")
    if gamma == 0:
        return 0.0
    return akmu.cdf_exact(params, math.sqrt(gamma / avg_snr), **kw)


def snr_pdf(params: ChannelParams, gamma: float, avg_snr: float, **kw) -> float:
    if gamma < 0 or not avg_snr > 0:
        raise InvalidParameterError("need gamma >= 0 and avg_snr > 0")
    am = params.alpha * params.mu
    if gamma == 0:
        if am > 2:
            return 0.0
        if am == 2:
            return akmu.leading_coefficient(params) / (2 * avg_snr)
        return math.inf
    r = math.sqrt(gamma / avg_snr)
    return akmu.pdf_exact(params, r, **kw) / (2 * math.sqrt(gamma * avg_snr))


def _ratio(link: LinkParams) -> float:
    # rounded to 13 digits so that (k*gth)/(k*gbar) gives bit-identical contour choices
    return float(f"{link.threshold_snr / link.avg_snr:.13e}")


def outage(params: ChannelParams, link: LinkParams, **kw) -> float:
    """P_out = F_R(sqrt(gamma_th / avg_snr)) through the four-variate H-function."""
    return akmu.cdf_exact(params, math.sqrt(_ratio(link)), **kw)


def outage_asymptotic(params: ChannelParams, link: LinkParams) -> tuple[float, OutageAsymptote]:
    """Printed high-SNR outage value, plus the asymptote with the correct constant."""
    c = akmu.derive_constants(params)
    al, mu = params.alpha, params.mu
    am = al * mu
    gd = am / 2
    log_front = c.log_k + (2 - mu) * math.log(2) - (1 + mu / 2) * al * math.log(params.r_hat)
    printed_gc = (math.exp(log_front - math.log(am) - math.lgamma(mu)) * float(rgamma(c.a2))
                  * link.threshold_snr ** gd)
    printed = printed_gc * link.avg_snr ** (-gd)
    gc = akmu.leading_coefficient(params) / am * link.threshold_snr ** gd
    return printed, OutageAsymptote(gc, gd, printed_gc)


def ber_spec(params: ChannelParams, mod: ModulationScheme):
    a = params.alpha
    extra = GammaTerm(mod.pm + a * params.mu / 2, (a / 2,) * 4)
    return akmu.cdf_spec(params, extra)


def ber_args(params: ChannelParams, mod: ModulationScheme, avg_snr: float) -> list[float]:
    scale = (avg_snr * mod.qm) ** (params.alpha / 2)
    return [z / scale for z in akmu.cdf_args(params, 1.0)]


def avg_ber_result(params: ChannelParams, mod: ModulationScheme, avg_snr: float,
                   method: str = "auto", **kw):
    """Average BER and the H-function evaluation behind it (None for ``"pdf"``).

    ``"h4"`` evaluates the four-variate H-function. For alpha > 2 its first
    argument is negative and no vertical-line or loop contour converges
    usefully, so ``"pdf"`` integrates the exact envelope density against the
    conditional error probability instead. ``"auto"`` tries h4 first.
    """
    if method not in ("auto", "h4", "pdf"):
        raise InvalidParameterError(f"unknown ber method {method!r}")
    if not avg_snr > 0:
        raise InvalidParameterError("avg_snr must be positive")
    if method == "pdf":
        return _ber_from_pdf(params, mod, avg_snr, **kw), None
    c = akmu.derive_constants(params)
    try:
        res = hfox(ber_spec(params, mod), ber_args(params, mod, avg_snr), **kw)
    except (InfeasibleContourError, NumericalFailure) as exc:
        if method == "h4" or not (isinstance(exc, InfeasibleContourError)
                                  or exc.diagnostics.get("ill_conditioned")):
            raise
        return _ber_from_pdf(params, mod, avg_snr, **kw), None
    al, mu = params.alpha, params.mu
    logp = (akmu._log_front(params, c) - math.log(2) - math.lgamma(mod.pm)
            - al * mu / 2 * math.log(avg_snr * mod.qm))
    return res.value * math.exp(logp), res


def avg_ber(params: ChannelParams, mod: ModulationScheme, avg_snr: float, method: str = "auto",
            **kw) -> float:
    """Average bit error rate from the four-variate H-function.

    All four arguments are divided by (avg_snr * qm)^(alpha/2), as the
    derivation through the gamma-integral requires.
    """
    return avg_ber_result(params, mod, avg_snr, method, **kw)[0]


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)
_BER_PANELS = 9


def _ber_from_pdf(params, mod, avg_snr, **kw) -> float:
    """int_0^b pdf_exact(r) Gamma(pm, qm g(r)) / (2 Gamma(pm)) dr, g = avg_snr (r/r_hat)^2.

    ``b`` is where the conditional error drops below 1e-17, or where the
    density has died out if that comes first. Panels halve towards the
    origin, where the integrand behaves like r^(alpha mu - 1).
    """
    rh = params.r_hat
    b = rh * math.sqrt(gammainccinv(mod.pm, 1e-17) / (mod.qm * avg_snr))
    if b > 2 * rh:
        x, fmax = rh, akmu.pdf_exact(params, rh, **kw)
        while x + rh < b:
            x += rh
            fx = akmu.pdf_exact(params, x, **kw)
            fmax = max(fmax, fx)
            if fx <= 1e-17 * fmax:
                b = x
                break
    edges = [0.0] + [b * 0.5 ** k for k in range(_BER_PANELS - 1, -1, -1)]
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        r = 0.5 * (hi - lo) * _GL_NODES + 0.5 * (hi + lo)
        f = np.array([akmu.pdf_exact(params, float(x), **kw) for x in r])
        pb = 0.5 * gammaincc(mod.pm, mod.qm * avg_snr * (r / rh) ** 2)
        total += 0.5 * (hi - lo) * float(np.dot(_GL_WEIGHTS, f * pb))
    return total


def _ber_quadrature(params, mod, avg_snr, n, shifted=True):
    am2 = params.alpha * params.mu / 2 if shifted else 0.0
    a = mod.pm - 1 + am2
    with np.errstate(over="ignore"):   # scipy's root polishing at large n
        x, w = roots_genlaguerre(n, a)
    gam = x / mod.qm
    r = np.sqrt(gam / avg_snr)
    F = akmu.cdf_conv_oracle(params, r)
    # F_gamma(g) / g^(alpha mu / 2) is smooth at the origin; the power moves into the weight
    g = F / gam ** am2
    integral = np.sum(w * g) / mod.qm ** (a + 1)
    return mod.qm ** mod.pm / (2 * math.gamma(mod.pm)) * integral


def ber_oracle(params: ChannelParams, mod: ModulationScheme, avg_snr: float,
               n_nodes: int = 64, rtol: float = 1e-6, max_nodes: int = 512) -> float:
    """Average BER by generalized Gauss-Laguerre quadrature of the SNR distribution.

    The weight is g^(pm - 1 + alpha mu / 2) exp(-qm g). Node count doubles
    until two successive rules agree to ``rtol``. If they never do (a CDF
    that does not vanish like g^(alpha mu / 2) at the origin), the plain
    weight g^(pm - 1) exp(-qm g) is tried. The distribution comes from
    :func:`akmu.cdf_conv_oracle`, so no H-function enters.
    """
    if not avg_snr > 0:
        raise InvalidParameterError("avg_snr must be positive")
    for shifted in (True, False):
        n = int(n_nodes)
        prev = _ber_quadrature(params, mod, avg_snr, n, shifted)
        while n < max_nodes:
            n *= 2
            cur = _ber_quadrature(params, mod, avg_snr, n, shifted)
            if abs(cur - prev) <= rtol * abs(cur):
                return float(cur)
            prev = cur
    raise QuadratureError(f"ber_oracle: no agreement to {rtol:g} with {max_nodes} nodes")


def free_space_path_loss_db(freq_hz: float, distance_m: float) -> float:
    if not (freq_hz > 0 and distance_m > 0):
        raise InvalidParameterError("frequency and distance must be positive")
    return 20 * math.log10(4 * math.pi * distance_m * freq_hz / SPEED_OF_LIGHT)


def link_budget(tx_power_dbm: float, freq_hz: float, distance_m: float,
                gains_dbi: tuple[float, float] = (0.0, 0.0), absorption_db_per_m: float = 0.0,
                noise_floor_dbm: float = 0.0) -> float:
    """Average SNR (linear) of a line-of-sight link with molecular absorption."""
    fspl = free_space_path_loss_db(freq_hz, distance_m)
    gt, gr = gains_dbi
    snr_db = (tx_power_dbm + gt + gr - fspl - absorption_db_per_m * distance_m
              - noise_floor_dbm)
    return 10 ** (snr_db / 10)


def db_to_linear(x_db: float) -> float:
    return 10 ** (x_db / 10)


def linear_to_db(x: float) -> float:
    return 10 * math.log10(x)
