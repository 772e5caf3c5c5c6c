"""Compiled integrand representation and the chunked log-space tensor sum."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import loggamma as _sp_loggamma

from ..errors import DomainError
from .spec import FoxHSpec, GammaTerm

# Rational shifts Gamma(a+x)/Gamma(a+n+x) up to this n are folded into polynomials.
_MAX_RATIONAL_SHIFT = 8
# Elements of the full tensor processed per chunk.
CHUNK_ELEMENTS = 1 << 21
GRADING_WIDTH = 1.5


def _loggamma(x: np.ndarray) -> np.ndarray:
    # scipy's kernel is about twice as fast as specfun.log_gamma_complex on large arrays;
    # only exp() of sums is used, so the branch choice on the negative axis is immaterial.
    with np.errstate(all="ignore"):
        out = _sp_loggamma(x)
    pole = (x.imag == 0) & (x.real <= 0) & (x.real == np.round(x.real))
    if np.any(pole):
        out = np.where(pole, np.inf, out)
    return out


@dataclass(frozen=True)
class Factor:
    """Compiled factor: Gamma(arg)^sign, or prod_{k<n} (arg + k)^sign for kind 'rat'."""

    kind: str
    offset: float
    weights: tuple[float, ...]
    sign: int
    n: int = 0

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(j for j, w in enumerate(self.weights) if w != 0.0)


@dataclass(frozen=True)
class Compiled:
    num_vars: int
    factors: tuple[Factor, ...]
    constraints: tuple[GammaTerm, ...]   # numerator terms whose poles the contours must avoid
    log_const: complex                   # log of prefactor times constant gamma factors


def _is_int(x: float, tol: float = 1e-12) -> bool:
    return abs(x - round(x)) <= tol


def compile_spec(spec: FoxHSpec) -> Compiled:
    """Cancel identical gamma pairs and fold integer-shift ratios into polynomials."""
    num = list(spec.numerator)
    den = list(spec.denominator)
    log_const = complex(math.log(abs(spec.prefactor))) if spec.prefactor != 0 else complex(-np.inf)
    if spec.prefactor < 0:
        log_const += 1j * math.pi
    constraints = tuple(t for t in num if not t.is_constant)
    for i in range(len(num) - 1, -1, -1):
        t = num[i]
        if t in den:
            den.remove(t)
            del num[i]
    factors: list[Factor] = []
    for src, sign in ((num, 1), (den, -1)):
        other = den if sign == 1 else num
        for t in list(src):
            if t not in src:
                continue
            match = None
            for o in other:
                if o.weights == t.weights and not t.is_constant:
                    n = o.offset - t.offset
                    if n > 0 and _is_int(n) and round(n) <= _MAX_RATIONAL_SHIFT:
                        match = (o, int(round(n)))
                        break
            if match is not None:
                o, n = match
                other.remove(o)
                src.remove(t)
                # Gamma(a+x)/Gamma(a+n+x) = 1/prod_k (a+k+x); the inverse when t is in the denominator
                factors.append(Factor("rat", t.offset, t.weights, -sign, n))
    for src, sign in ((num, 1), (den, -1)):
        for t in src:
            if t.is_constant:
                log_const += sign * complex(_loggamma(np.array([t.offset + 0j]))[0])
            else:
                factors.append(Factor("lg", t.offset, t.weights, sign))
    return Compiled(spec.num_vars, tuple(factors), constraints, log_const)


def reduce_zero_args(spec: FoxHSpec, args):
    """Remove variables whose argument is exactly zero.

    A zero argument kills every residue of the right-hand pole family except
    the one at s_j = 0, so s_j is fixed to zero. This requires Gamma(-s_j) to be
    the only numerator term with poles to the right in s_j.

    Returns ``(reduced_spec_or_None, reduced_args, keep_indices, const_value)``;
    when every argument is zero the spec is ``None`` and ``const_value`` is
    the full value.
    """
    args = [float(a) for a in args]
    zero = [j for j, a in enumerate(args) if a == 0.0]
    if not zero:
        return spec, args, list(range(spec.num_vars)), None
    d = spec.num_vars
    num = list(spec.numerator)
    for j in zero:
        pure = tuple(-1.0 if k == j else 0.0 for k in range(d))
        right = [t for t in num if t.weights[j] < 0]
        if len(right) != 1 or right[0].weights != pure or right[0].offset != 0.0:
            raise DomainError(
                f"zero argument for s{j + 1} needs Gamma(-s{j + 1}) as its only right-pole term")
        num.remove(right[0])
    keep = [j for j in range(d) if j not in zero]

    def sub(t: GammaTerm) -> GammaTerm:
        return GammaTerm(t.offset, tuple(t.weights[k] for k in keep))

    if not keep:
        lv = complex(math.log(abs(spec.prefactor)))
        sgn = math.copysign(1.0, spec.prefactor)
        for src, s in ((num, 1), (spec.denominator, -1)):
            for t in src:
                if t.offset <= 0 and _is_int(t.offset):
                    if s == -1:
                        return None, [], [], 0.0
                    raise DomainError("zero-argument reduction hits a numerator pole")
                lv += s * complex(_loggamma(np.array([t.offset + 0j]))[0])
        return None, [], [], sgn * float(cmath.exp(lv).real)
    red = FoxHSpec(
        num_vars=len(keep),
        numerator=tuple(sub(t) for t in num),
        denominator=tuple(sub(t) for t in spec.denominator),
        prefactor=spec.prefactor,
        label=spec.label,
    )
    return red, [args[k] for k in keep], keep, None


def log_args(args) -> np.ndarray:
    """Principal logarithms of real (possibly negative) arguments."""
    out = []
    for a in args:
        a = float(a)
        if a == 0.0:
            raise DomainError("log_args: zero argument must be reduced first")
        out.append(complex(math.log(abs(a)), math.pi if a < 0 else 0.0))
    return np.array(out)


def _levels(idx: np.ndarray) -> np.ndarray:
    return ((idx % 2 == 0).astype(np.int64) + (idx % 4 == 0).astype(np.int64))


@dataclass
class AxisNodes:
    s: np.ndarray        # complex contour points
    logw: np.ndarray     # log of quadrature weight / (2 pi i), without z^s
    level: np.ndarray    # 2: node on the 4h sub-lattice, 1: on the 2h sub-lattice, else 0
    t: np.ndarray

    @property
    def even(self) -> np.ndarray:
        return self.level >= 1


def axis_nodes(c: float, bend: float, half_width: float, step: float, grading: float) -> AxisNodes:
    a = (1.0 - grading) * GRADING_WIDTH
    umax = half_width + a * math.pi / 2
    n = int(math.ceil(umax / step))
    idx = np.arange(-n, n + 1)
    u = idx * step
    t = u - a * np.arctan(u / GRADING_WIDTH)
    dt = 1.0 - (1.0 - grading) / (1.0 + (u / GRADING_WIDTH) ** 2)
    s = c + bend * t * t + 1j * t
    w = step * dt * (2.0 * bend * t + 1j) / (2j * math.pi)
    return AxisNodes(s, np.log(w), _levels(idx), t)


def uniform_axis(c: float, bend: float, half_width: float, count: int) -> AxisNodes:
    t = np.linspace(-half_width, half_width, count)
    s = c + bend * t * t + 1j * t
    dt = t[1] - t[0]
    w = dt * (2.0 * bend * t + 1j) / (2j * math.pi)
    return AxisNodes(s, np.log(w), _levels(np.arange(count)), t)


@dataclass
class SumResult:
    log_scale: float
    total: complex          # sum * exp(-log_scale)
    sub_total: complex      # 2h sub-lattice sum * exp(-log_scale)
    sub2_total: complex     # 4h sub-lattice sum * exp(-log_scale)
    abs_total: float        # sum of magnitudes * exp(-log_scale)
    nodes: int
    peak: float             # max Re log-term
    profiles: list | None   # per axis: max Re log-term over the other axes


def _block_plan(compiled: Compiled):
    d = compiled.num_vars
    supports = {f.support for f in compiled.factors}
    supports |= {(j,) for j in range(d)}
    maximal = [s for s in supports if not any(set(s) < set(o) for o in supports)]
    maximal.sort(key=lambda s: (-len(s), s))

    def home(sup):
        cands = [m for m in maximal if set(sup) <= set(m)]
        return min(cands, key=len)

    blocks: dict[tuple, dict] = {m: {"factors": [], "axes": []} for m in maximal}
    for f in compiled.factors:
        blocks[home(f.support)]["factors"].append(f)
    for j in range(d):
        blocks[home((j,))]["axes"].append(j)
    return blocks


def _block_logs(block_sup, spec_block, axes_s, axes_l, sl0):
    """Log-values of one block on its support grid; axis 0 restricted to slice sl0."""
    shape = []
    grids = {}
    for pos, j in enumerate(block_sup):
        arr_s = axes_s[j][sl0] if j == 0 else axes_s[j]
        shp = [1] * len(block_sup)
        shp[pos] = arr_s.shape[0]
        shape.append(arr_s.shape[0])
        grids[j] = (arr_s.reshape(shp), pos, shp)
    out = np.zeros(shape, dtype=complex)
    for j in spec_block["axes"]:
        arr = axes_l[j][sl0] if j == 0 else axes_l[j]
        out += arr.reshape(grids[j][2])
    for f in spec_block["factors"]:
        arg = complex(f.offset)
        for j in f.support:
            arg = arg + f.weights[j] * grids[j][0]
        if f.kind == "lg":
            if f.sign > 0:
                out += _loggamma(arg)
            else:
                out -= _loggamma(arg)
        else:
            acc = 0j
            for k in range(f.n):
                acc = acc + np.log(arg + k)
            if f.sign > 0:
                out += acc
            else:
                out -= acc
    return out


def tensor_sum(compiled: Compiled, axes: list[AxisNodes], log_z: np.ndarray,
               *, want_profiles: bool = False) -> SumResult:
    """Sum exp(log-integrand) over the tensor grid of ``axes`` in log-scaled chunks."""
    d = compiled.num_vars
    axes_s = [a.s for a in axes]
    axes_l = [a.logw + a.s * log_z[j] for j, a in enumerate(axes)]
    sizes = [len(a.s) for a in axes]
    blocks = _block_plan(compiled)
    inner = int(np.prod(sizes[1:])) if d > 1 else 1
    chunk = max(1, CHUNK_ELEMENTS // max(inner, 1))
    static = {}
    for sup, blk in blocks.items():
        if 0 not in sup:
            static[sup] = _block_logs(sup, blk, axes_s, axes_l, slice(None))
    M = -np.inf
    S = 0j
    Ssub = 0j
    Ssub2 = 0j
    A = 0.0
    profiles = [np.full(n, -np.inf) for n in sizes] if want_profiles else None
    even_masks = [a.level >= 1 for a in axes]
    quad_masks = [a.level >= 2 for a in axes]
    for start in range(0, sizes[0], chunk):
        sl = slice(start, min(start + chunk, sizes[0]))
        L = np.zeros((sl.stop - sl.start,) + tuple(sizes[1:]), dtype=complex)
        for sup, blk in blocks.items():
            arr = static[sup] if sup in static else _block_logs(sup, blk, axes_s, axes_l, sl)
            shp = [1] * d
            for pos, j in enumerate(sup):
                shp[j] = arr.shape[pos]
            L += arr.reshape(shp)
        re = L.real
        m = float(np.max(re[np.isfinite(re)], initial=-np.inf))
        if want_profiles:
            for j in range(d):
                other = tuple(k for k in range(d) if k != j)
                pm = np.max(re, axis=other) if other else re
                if j == 0:
                    profiles[0][sl] = np.maximum(profiles[0][sl], pm)
                else:
                    profiles[j] = np.maximum(profiles[j], pm)
        if m == -np.inf:
            continue
        if m > M:
            scale = math.exp(M - m) if M > -np.inf else 0.0
            S *= scale
            Ssub *= scale
            Ssub2 *= scale
            A *= scale
            M = m
        with np.errstate(under="ignore"):
            E = np.exp(L - M)
        E[~np.isfinite(L.real)] = 0
        S += E.sum()
        A += float(np.abs(E).sum())
        for masks, which in ((even_masks, 1), (quad_masks, 2)):
            sub = E[masks[0][sl]]
            for j in range(1, d):
                sub = np.compress(masks[j], sub, axis=j)
            if which == 1:
                Ssub += sub.sum()
            else:
                Ssub2 += sub.sum()
    return SumResult(M, S, Ssub, Ssub2, A, int(np.prod(sizes)), M, profiles)


def _full_log_tensor(compiled: Compiled, axes: list[AxisNodes], log_z) -> np.ndarray:
    d = compiled.num_vars
    axes_s = [a.s for a in axes]
    axes_l = [a.logw + a.s * log_z[j] for j, a in enumerate(axes)]
    sizes = [len(a.s) for a in axes]
    L = np.zeros(tuple(sizes), dtype=complex)
    for sup, blk in _block_plan(compiled).items():
        arr = _block_logs(sup, blk, axes_s, axes_l, slice(None))
        shp = [1] * d
        for pos, j in enumerate(sup):
            shp[j] = arr.shape[pos]
        L += arr.reshape(shp)
    return L


def fast_sum(compiled: Compiled, axes: list[AxisNodes], log_z: np.ndarray) -> SumResult:
    """Tensor sum with the longest axis swept inside the compiled kernel."""
    from . import _kernel

    d = compiled.num_vars
    sizes = [len(a.s) for a in axes]
    if d == 1:
        return tensor_sum(compiled, axes, log_z)
    ji = int(np.argmax(sizes))
    outer = [j for j in range(d) if j != ji]
    inner_f = [f for f in compiled.factors if f.weights[ji] != 0 and f.support != (ji,)]
    own_f = [f for f in compiled.factors if f.support == (ji,)]
    outer_f = [Factor(f.kind, f.offset, tuple(f.weights[j] for j in outer), f.sign, f.n)
               for f in compiled.factors if f.weights[ji] == 0]
    oc = Compiled(d - 1, tuple(outer_f), (), 0j)
    B = _full_log_tensor(oc, [axes[j] for j in outer], log_z[outer]).ravel()

    ax = axes[ji]
    F = ax.logw + ax.s * log_z[ji]
    for f in own_f:
        arg = f.offset + f.weights[ji] * ax.s
        if f.kind == "lg":
            F = F + _loggamma(arg) if f.sign > 0 else F - _loggamma(arg)
        else:
            acc = sum(np.log(arg + k) for k in range(f.n))
            F = F + acc if f.sign > 0 else F - acc

    osizes = [sizes[j] for j in outer]
    nf = len(inner_f)
    X = np.empty((nf, int(np.prod(osizes))), dtype=complex)
    for fi, f in enumerate(inner_f):
        acc = np.full(osizes, complex(f.offset))
        for pos, j in enumerate(outer):
            if f.weights[j] != 0:
                shp = [1] * (d - 1)
                shp[pos] = sizes[j]
                acc = acc + f.weights[j] * axes[j].s.reshape(shp)
        X[fi] = acc.ravel()
    W = np.array([f.weights[ji] for f in inner_f], dtype=float)
    sign = np.array([f.sign for f in inner_f], dtype=np.int64)
    nrat = np.array([f.n for f in inner_f], dtype=np.int64)
    kind = np.array([0 if f.kind == "lg" else 1 for f in inner_f], dtype=np.int64)
    ev = np.full(osizes, 2, dtype=np.int64)
    for pos, j in enumerate(outer):
        shp = [1] * (d - 1)
        shp[pos] = sizes[j]
        ev = np.minimum(ev, axes[j].level.reshape(shp))
    ev = ev.ravel()
    n_total = int(np.prod(sizes))

    if all(f.kind == "rat" for f in inner_f):
        fin_b = np.isfinite(B.real)
        mB = float(np.max(B.real[fin_b], initial=-np.inf))
        fin_f = np.isfinite(F.real)
        mF = float(np.max(F.real[fin_f], initial=-np.inf))
        if mB == -np.inf or mF == -np.inf:
            return SumResult(-np.inf, 0j, 0j, 0j, 0.0, n_total, -np.inf, None)
        with np.errstate(under="ignore"):
            EB = np.where(fin_b, np.exp(np.where(fin_b, B, 0) - mB), 0)
            EF = np.where(fin_f, np.exp(np.where(fin_f, F, 0) - mF), 0)
        S, Ssub, Ssub2, A = _kernel.sweep_rational(EB, X, W, sign, nrat, ax.s, EF, ev, ax.level)
        M = mB + mF
    else:
        M, S, Ssub, Ssub2, A = _kernel.sweep_log(B, X, W, kind, sign, nrat, ax.s, F, ev,
                                                 ax.level)
    return SumResult(float(M), complex(S), complex(Ssub), complex(Ssub2), float(A), n_total,
                     float(M), None)
