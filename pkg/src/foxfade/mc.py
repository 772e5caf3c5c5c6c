"""Seeded Monte-Carlo sampling of the envelope from its Gaussian construction.

Samples are produced in fixed blocks of ``BLOCK`` envelopes. Block ``b`` of
seed ``s`` draws from its own Philox stream keyed by ``SeedSequence(s,
spawn_key=(b,))``, so any sharding of blocks across workers concatenates to
exactly the single-threaded output.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .akmu import ChannelParams
from .errors import InvalidParameterError, NonIntegerClusterError

BLOCK = 1 << 16
_INT_TOL = 1e-9


@dataclass(frozen=True)
class ComponentParams:
    sigma_x: float
    sigma_y: float
    lambda_x: float
    lambda_y: float
    mu_x: int
    mu_y: int


def _as_count(name: str, value: float) -> int:
    k = round(value)
    if abs(value - k) > _INT_TOL or k < 0:
        raise NonIntegerClusterError(f"{name} = {value!r} is not a non-negative integer")
    return int(k)


def component_params(params: ChannelParams) -> ComponentParams:
    """Gaussian component parameters reproducing the channel law.

    ``lambda_x`` and ``lambda_y`` are the total dominant amplitudes; each
    cluster carries ``lambda / sqrt(mu_cluster)``. The quadrature variance
    used here has no ``p`` in its denominator, because only that variance
    makes the sampled law match the analytic density and E[R^alpha] = r_hat^alpha.
    """
    al, eta, ka, mu, p, q, rh = (params.alpha, params.eta, params.kappa, params.mu, params.p,
                                 params.q, params.r_hat)
    mux = _as_count("mu_x", 2 * p * mu / (1 + p))
    muy = _as_count("mu_y", 2 * mu / (1 + p))
    rha = rh ** al
    sx2 = eta * (p + 1) * rha / (2 * (eta + 1) * (ka + 1) * mu * p)
    sy2 = (p + 1) * rha / (2 * (eta + 1) * (ka + 1) * mu)
    lx = math.sqrt(eta * ka * q * rha / ((q * eta + 1) * (ka + 1)))
    ly = math.sqrt(ka * rha / ((q * eta + 1) * (ka + 1)))
    return ComponentParams(math.sqrt(sx2), math.sqrt(sy2), lx, ly, mux, muy)


@dataclass(frozen=True)
class SampleBatch:
    samples: np.ndarray
    seed: int
    params: ChannelParams

    def __len__(self) -> int:
        return len(self.samples)

    def r_alpha(self) -> np.ndarray:
        return self.samples ** self.params.alpha

    def mean_r_alpha(self) -> tuple[float, float]:
        """Sample mean of R^alpha and its standard error."""
        x = self.r_alpha()
        return float(x.mean()), float(x.std(ddof=1) / math.sqrt(len(x)))

    def ecdf(self, x):
        s = np.sort(self.samples)
        return np.searchsorted(s, np.asarray(x, dtype=float), side="right") / len(s)

    def histogram(self, bins):
        """Density-normalized histogram (counts / (n * width)) and bin edges."""
        counts, edges = np.histogram(self.samples, bins=bins)
        return counts / (len(self.samples) * np.diff(edges)), edges

    def to_csv(self, path, header: bool = True) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            if header:
                w.writerow(["r"])
            for v in self.samples:
                w.writerow([repr(float(v))])


def _normals(rng: np.random.Generator, count: int) -> np.ndarray:
    """Box-Muller normals: a fixed number of uniforms per output, no rejection."""
    pairs = (count + 1) // 2
    u1 = rng.random(pairs)
    u2 = rng.random(pairs)
    rad = np.sqrt(-2.0 * np.log1p(-u1))  # 1 - u1 lies in (0, 1]
    ang = 2.0 * np.pi * u2
    return np.concatenate([rad * np.cos(ang), rad * np.sin(ang)])[:count]


def _block(comp: ComponentParams, alpha: float, seed: int, b: int, m: int) -> np.ndarray:
    ss = np.random.SeedSequence(seed, spawn_key=(b,))
    rng = np.random.Generator(np.random.Philox(ss))
    k = comp.mu_x + comp.mu_y
    z = _normals(rng, m * k).reshape(m, k)
    u = np.zeros(m)
    if comp.mu_x:
        u = u + np.sum((comp.sigma_x * z[:, :comp.mu_x] + comp.lambda_x / math.sqrt(comp.mu_x)) ** 2,
                       axis=1)
    if comp.mu_y:
        u = u + np.sum((comp.sigma_y * z[:, comp.mu_x:] + comp.lambda_y / math.sqrt(comp.mu_y)) ** 2,
                       axis=1)
    return u ** (1.0 / alpha)


def sample_envelope(params: ChannelParams, n: int, seed: int, workers: int = 1) -> SampleBatch:
    """Draw ``n`` envelope samples; identical for a given seed whatever ``workers`` is."""
    if int(n) != n or n < 1:
        raise InvalidParameterError("n must be a positive integer")
    n = int(n)
    seed = int(seed)
    comp = component_params(params)
    nb = (n + BLOCK - 1) // BLOCK
    sizes = [min(BLOCK, n - b * BLOCK) for b in range(nb)]
    if workers > 1 and nb > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(lambda b: _block(comp, params.alpha, seed, b, sizes[b]), range(nb)))
    else:
        parts = [_block(comp, params.alpha, seed, b, sizes[b]) for b in range(nb)]
    out = np.concatenate(parts)
    # a zero envelope has probability zero but Box-Muller can in principle produce one
    out[out <= 0] = np.nextafter(0.0, 1.0)
    return SampleBatch(out, seed, params)


def ks_distance(batch: SampleBatch, cdf) -> float:
    """Kolmogorov-Smirnov sup distance between the batch ECDF and ``cdf``.

    ``cdf`` is called once with the sorted sample array; scalar-only callables
    are mapped element by element.
    """
    x = np.sort(np.asarray(batch.samples if isinstance(batch, SampleBatch) else batch, dtype=float))
    n = len(x)
    if n == 0:
        raise InvalidParameterError("ks_distance: empty batch")
    try:
        F = np.asarray(cdf(x), dtype=float)
        if F.shape != x.shape:
            raise TypeError
    except TypeError:
        F = np.array([float(cdf(v)) for v in x])
    F = np.clip(F, 0.0, 1.0)
    # the ECDF jumps at the last copy of each value
    uniq_last = np.r_[x[1:] != x[:-1], True]
    uniq_first = np.r_[True, x[1:] != x[:-1]]
    i = np.arange(1, n + 1)
    d_plus = np.max((i / n - F)[uniq_last])
    first_idx = np.nonzero(uniq_first)[0]
    d_minus = np.max(F[first_idx] - first_idx / n)
    return float(min(1.0, max(d_plus, d_minus, 0.0)))


def outage_fraction(batch: SampleBatch, avg_snr: float, threshold_snr: float) -> float:
    """Fraction of samples with avg_snr * R^2 below threshold_snr."""
    return float(np.mean(avg_snr * batch.samples ** 2 < threshold_snr))
