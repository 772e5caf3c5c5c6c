"""Public evaluation entry points."""

from __future__ import annotations

import cmath
import math
from dataclasses import replace

from ..errors import NumericalFailure, NumericalOverflowError
from .contours import check_feasible, find_contours
from .engine import axis_nodes, compile_spec, fast_sum, log_args, reduce_zero_args
from .spec import ContourConfig, EvalResult, FoxHSpec

_ROUNDOFF = 1e-16


def evaluate(spec: FoxHSpec, args, contours: ContourConfig) -> EvalResult:
    """Truncated trapezoid sum of the Mellin-Barnes integral of ``spec`` at ``args``.

    ``est_rel_err`` compares the sum with the one on the doubled-step
    sub-lattice; since the rule converges geometrically the error of the fine
    sum is estimated as the square of that relative difference, floored by
    the cancellation-amplified rounding level.
    """
    if len(args) != spec.num_vars or contours.num_vars != spec.num_vars:
        raise ValueError("argument, spec and contour dimensions differ")
    red, rargs, keep, const = reduce_zero_args(spec, args)
    if red is None:
        return EvalResult(float(const), 0.0, 0.0, 0, contours)
    compiled = compile_spec(red)
    c = [contours.abscissas[j] for j in keep]
    check_feasible(compiled, c)
    lz = log_args(rargs)
    axes = [axis_nodes(contours.abscissas[j], contours.bends[j], contours.half_width[j],
                       contours.step, contours.grading[j]) for j in keep]
    res = fast_sum(compiled, axes, lz)
    diag = {"spec": spec.to_dict(), "args": list(map(float, args)),
            "abscissas": contours.abscissas, "half_width": contours.half_width,
            "step": contours.step, "bends": contours.bends, "nodes": res.nodes}
    if res.total == 0:
        return EvalResult(0.0, 0.0, 0.0, res.nodes, contours)
    log_mag = compiled.log_const.real + res.log_scale + math.log(abs(res.total))
    if log_mag > 709.0:
        raise NumericalOverflowError(f"H-function value overflows (log magnitude {log_mag:.1f})",
                                     log_mag)
    val = cmath.exp(compiled.log_const + res.log_scale) * res.total
    d = len(axes)
    coarse = res.sub_total * 2 ** d
    delta = abs(res.total - coarse) / abs(res.total)
    cond = res.abs_total / abs(res.total)
    est = max(min(delta, delta * delta), _ROUNDOFF * cond)
    im = abs(val.imag)
    diag.update(value=val.real, im=val.imag, est_rel_err=est, cond=cond)
    if im > contours.tol_im * max(1.0, abs(val.real)):
        raise NumericalFailure(
            f"imaginary residual {im:.3e} exceeds tolerance {contours.tol_im:.1e}", diag)
    return EvalResult(float(val.real), float(im), float(est), res.nodes, contours, float(cond))


def hfox(spec: FoxHSpec, args, *, tol_rel: float = 1e-6, tol_im: float = 1e-8,
         contours: ContourConfig | None = None, max_refine: int = 4,
         max_nodes: int = 2_000_000_000) -> EvalResult:
    """Evaluate with automatic contours, refining the step until ``tol_rel`` is met.

    After a refinement the error is also estimated from the change between
    the last two steps: with error ~ exp(-a/h) the finer sum's error is about
    that change raised to h_prev/h. The smaller of this and the sub-lattice
    estimate is reported, since the 2h sub-lattice is often pre-asymptotic.
    Refinement stops with NumericalFailure once the next sum would exceed
    ``max_nodes`` terms, or at once when cancellation in the sum alone
    (rounding times the condition number) is above ``tol_rel``; the latter
    sets ``diagnostics["ill_conditioned"]``.
    """
    if contours is None:
        contours = find_contours(spec, args, tol_im=tol_im, tol_rel=tol_rel)
    diag = {"spec": spec.to_dict(), "args": list(map(float, args))}
    last_exc = None
    prev = res = None
    for _ in range(max_refine + 1):
        try:
            res = evaluate(spec, args, contours)
            nodes = res.nodes_used
        except NumericalFailure as exc:
            last_exc, res = exc, None
            nodes = exc.diagnostics.get("nodes", 0)
        if res is not None and prev is not None and res.value != 0:
            change = abs(res.value - prev.value) / abs(res.value)
            pair = change ** (prev.contours.step / contours.step)
            est = max(min(res.est_rel_err, pair), _ROUNDOFF * res.cond)
            res = replace(res, est_rel_err=est)
        if res is not None and res.est_rel_err <= tol_rel:
            return res
        cond = res.cond if res is not None else last_exc.diagnostics.get("cond", 1.0)
        if _ROUNDOFF * cond > tol_rel:
            # cancellation, not the step, limits the accuracy; refining cannot help
            diag.update(cond=cond, ill_conditioned=True)
            raise NumericalFailure(
                f"sum is ill-conditioned (cancellation factor {cond:.1e}) for tolerance "
                f"{tol_rel:.1e}", diag)
        prev = res
        new_step = _next_step(contours.step, res, tol_rel)
        if nodes * (contours.step / new_step) ** spec.num_vars > max_nodes:
            if res is None:
                raise last_exc
            diag.update(est_rel_err=res.est_rel_err, step=contours.step, nodes=nodes)
            raise NumericalFailure(
                f"refinement would exceed {max_nodes} nodes (estimated relative error "
                f"{res.est_rel_err:.2e}, tolerance {tol_rel:.1e})", diag)
        contours = contours.with_updates(step=new_step)
    if res is None:
        raise last_exc
    diag.update(est_rel_err=res.est_rel_err)
    raise NumericalFailure(
        f"estimated relative error {res.est_rel_err:.2e} above tolerance {tol_rel:.1e}", diag)


def _next_step(step: float, res: EvalResult | None, tol_rel: float) -> float:
    # Discretisation error behaves like exp(-a / step): aim for half the tolerance.
    if res is None or not 0 < res.est_rel_err < 1:
        return step * 0.8
    ratio = math.log(res.est_rel_err) / math.log(0.5 * tol_rel)
    return step * min(0.9, max(0.6, ratio))
