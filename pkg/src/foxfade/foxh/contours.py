"""Automatic contour placement for compiled Mellin-Barnes integrands."""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.optimize import linprog

from ..errors import InfeasibleContourError, NumericalFailure
from .engine import Compiled, compile_spec, log_args, reduce_zero_args, tensor_sum, uniform_axis
from .spec import ContourConfig, FoxHSpec

BEND = 0.5
DEFAULT_STEP = 0.25
MARGIN_CAP = 0.5
MIN_VERTICAL_RATE = 0.05
# log of the relative magnitude below which the integrand is treated as zero
TAIL_LOG = math.log(1e-18)
SCAN_POINTS = 25
MAX_HALF_WIDTH = 400.0


def _vertical_rate(compiled: Compiled, vert: list[int], theta: np.ndarray) -> float:
    """Smallest exponential decay rate over lattice directions in the vertical variables."""
    if not vert:
        return math.inf
    best = math.inf
    for v in itertools.product((-1, 0, 1), repeat=len(vert)):
        if not any(v):
            continue
        r = 0.0
        for f in compiled.factors:
            if f.kind != "lg":
                continue
            r += 0.5 * math.pi * f.sign * abs(sum(f.weights[j] * vj for j, vj in zip(vert, v)))
        r += sum(theta[j] * vj for j, vj in zip(vert, v))
        best = min(best, r)
    return best


def loop_allowed(compiled: Compiled, j: int, log_abs_z: float) -> bool:
    """Whether a rightward loop around the poles of s_j gives a convergent integral.

    Leftward loops (series in 1/z) are not offered: they converge only once
    x log x beats x log(1/|z|) along the loop, far beyond any usable truncation
    for the small arguments met here.
    """
    dj = sum(f.sign * f.weights[j] for f in compiled.factors if f.kind == "lg")
    if dj < -1e-12:
        return True
    if dj > 1e-12:
        return False
    lj = log_abs_z + sum(f.sign * f.weights[j] * math.log(abs(f.weights[j]))
                         for f in compiled.factors if f.kind == "lg" and f.weights[j] != 0)
    return lj < -1e-9


def choose_shapes(compiled: Compiled, log_z: np.ndarray) -> tuple[bool, ...]:
    """Pick which variables use loops (True) rather than vertical lines.

    Vertical lines are preferred because they avoid the alternating-series
    cancellation that loops inherit from large arguments.
    """
    d = compiled.num_vars
    theta = log_z.imag
    for size in range(d + 1):
        best = None
        for loops in itertools.combinations(range(d), size):
            if not all(loop_allowed(compiled, j, log_z[j].real) for j in loops):
                continue
            vert = [j for j in range(d) if j not in loops]
            rate = _vertical_rate(compiled, vert, theta)
            if rate > MIN_VERTICAL_RATE and (best is None or rate > best[0]):
                best = (rate, loops)
        if best is not None:
            return tuple(j in best[1] for j in range(d))
    raise InfeasibleContourError(
        "no combination of vertical lines and loops gives a decaying integrand")


def solve_abscissas(compiled: Compiled, log_z: np.ndarray, step: float = DEFAULT_STEP):
    """Maximize pole clearance subject to offset + w.c > 0 for every numerator term.

    Clearances are weighted by how strongly z^s amplifies the integrand
    towards each pole family, so that trapezoid errors are balanced.
    """
    d = compiled.num_vars
    scale = 2 * math.pi / step
    rows, rhs = [], []
    nv = 2 * d + 1
    for t in compiled.constraints:
        for j, wj in enumerate(t.weights):
            if wj == 0:
                continue
            lz = log_z[j].real
            rho = 1 + lz / scale if wj > 0 else 1 - lz / scale
            rho = min(max(rho, 0.3), 3.0)
            row = np.zeros(nv)
            row[:d] = -np.array(t.weights)
            row[d + j] = abs(wj) / rho
            rows.append(row)
            rhs.append(t.offset)
    for j in range(d):
        row = np.zeros(nv)
        row[2 * d] = 1.0
        row[d + j] = -1.0
        rows.append(row)
        rhs.append(0.0)
    cost = np.zeros(nv)
    cost[2 * d] = -1.0
    cost[d:2 * d] = -0.01
    bounds = [(None, None)] * d + [(0.0, MARGIN_CAP)] * d + [(None, MARGIN_CAP)]
    res = linprog(cost, A_ub=np.array(rows), b_ub=np.array(rhs), bounds=bounds, method="highs")
    if res.status != 0 or res.x[2 * d] <= 1e-9:
        raise InfeasibleContourError(
            "contour constraints offset + sum w_j c_j > 0 have no strictly feasible solution")
    c = res.x[:d]
    margins = res.x[d:2 * d]
    return tuple(float(x) for x in c), tuple(float(x) for x in margins)


def check_feasible(compiled: Compiled, abscissas) -> None:
    for t in compiled.constraints:
        v = t.offset + sum(w * c for w, c in zip(t.weights, abscissas))
        if not v > 0:
            raise InfeasibleContourError(
                f"contour abscissas {tuple(abscissas)} violate Gamma({t.offset:g} + {t.weights}.s)")


def scan_half_widths(compiled: Compiled, log_z: np.ndarray, abscissas, bends, start: float = 8.0):
    """Grow then trim the truncation of each contour from coarse magnitude scans."""
    d = compiled.num_vars
    T = [start] * d
    for _ in range(24):
        axes = [uniform_axis(abscissas[j], bends[j], T[j], SCAN_POINTS) for j in range(d)]
        res = tensor_sum(compiled, axes, log_z, want_profiles=True)
        prof = res.profiles
        peak = res.peak
        if not math.isfinite(peak):
            raise NumericalFailure("integrand vanishes on the scan grid", {"half_width": T})
        grow = False
        for j in range(d):
            edge = max(prof[j][0], prof[j][-1])
            if edge > peak + TAIL_LOG:
                if T[j] >= MAX_HALF_WIDTH:
                    raise NumericalFailure(
                        f"integrand in s{j + 1} does not decay within |t| <= {MAX_HALF_WIDTH}",
                        {"half_width": T})
                T[j] = min(T[j] * 1.5, MAX_HALF_WIDTH)
                grow = True
        if not grow:
            break
    out = []
    for j in range(d):
        t = axes[j].t
        keep = prof[j] >= peak + TAIL_LOG
        spacing = t[1] - t[0]
        tj = float(np.max(np.abs(t[keep]))) + 2 * spacing if keep.any() else T[j]
        out.append(min(max(tj, 1.0), T[j]))
    return tuple(out)


def find_contours(spec: FoxHSpec, args, *, step: float = DEFAULT_STEP,
                  tol_im: float = 1e-8, tol_rel: float = 1e-6) -> ContourConfig:
    """Choose contour shapes, abscissas and truncation for ``spec`` at ``args``.

    Variables with a zero argument are reduced analytically by the evaluator;
    their entries are placeholders.
    """
    if len(args) != spec.num_vars:
        raise ValueError(f"expected {spec.num_vars} arguments, got {len(args)}")
    red, rargs, keep, _ = reduce_zero_args(spec, args)
    d = spec.num_vars
    c_full = [-0.5] * d
    t_full = [1.0] * d
    b_full = [0.0] * d
    g_full = [1.0] * d
    if red is not None:
        compiled = compile_spec(red)
        lz = log_args(rargs)
        loops = choose_shapes(compiled, lz)
        bends = tuple(BEND if lp else 0.0 for lp in loops)
        c, margins = solve_abscissas(compiled, lz, step)
        T = scan_half_widths(compiled, lz, c, bends)
        for pos, j in enumerate(keep):
            c_full[j] = c[pos]
            t_full[j] = max(T[pos], step)
            b_full[j] = bends[pos]
            g_full[j] = min(max(1.2 * margins[pos], 0.12), 1.0)
    return ContourConfig(tuple(c_full), tuple(t_full), step, tuple(b_full), tuple(g_full),
                         tol_im, tol_rel)
