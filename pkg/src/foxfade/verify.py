"""Acceptance criteria as runnable checks, shared by ``foxfade verify`` and the test suite.

Each criterion returns a :class:`CriterionResult`. A criterion passes only if
its numerical condition holds and it finished within its runtime budget.
Numerical failures are caught and reported, and any H-function spec attached
to the failure is kept so the CLI can dump it.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import akmu, mc, perf
from .akmu import REFERENCE, ChannelParams
from .errors import FoxFadeError
from .foxh import FoxHSpec, self_test_identities


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    elapsed: float
    budget: float
    failing_specs: list = field(default_factory=list)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"[{status}] {self.number:>2} {self.name}: {self.detail} "
                f"({self.elapsed:.1f}s / {self.budget:.0f}s)")

    def to_dict(self) -> dict:
        return {"number": self.number, "name": self.name, "passed": self.passed,
                "detail": self.detail, "elapsed_s": round(self.elapsed, 3),
                "budget_s": self.budget}


# parameter sets -----------------------------------------------------------------------
ORACLE_SETS = {
    "reference": REFERENCE,                                                  # eta < p
    "eta<p": ChannelParams(3.0, 0.5, 2.0, 1.5, 0.7, 2.0, 1.3),
    "eta>p": ChannelParams(2.0, 3.0, 1.0, 2.0, 1.0, 1.0),
    "eta=p": ChannelParams(2.0, 2.0, 1.0, 2.0, 2.0, 1.0),
}
# Sampler needs integer cluster counts 2p mu/(1+p) and 2 mu/(1+p).
SAMPLER_SETS = {
    "reference": REFERENCE,
    "mu1": ChannelParams(2.0, 0.5, 0.5, 1.0, 1.0, 2.0, 1.5),
    "alpha1": ChannelParams(1.0, 2.0, 3.0, 1.5, 2.0, 0.5, 0.8),
}


# criteria -----------------------------------------------------------------------------
def c1_identities():
    rep = self_test_identities()
    worst = max(c.error / c.tolerance for c in rep.checks)
    bad = ", ".join(c.name for c in rep.failures)
    return rep.passed, f"{len(rep.checks)} identities, worst error/tol {worst:.2g}" + (
        f"; failing: {bad}" if bad else "")


def c2_oracle(n_points: int = 50, sets: dict | None = None):
    sets = ORACLE_SETS if sets is None else sets
    rs = np.linspace(0.05, 3.0, n_points)
    parts, ok = [], True
    for name, P in sets.items():
        exact = np.array([akmu.pdf_exact(P, r) for r in rs])
        ref = akmu.pdf_conv_oracle(P, rs)
        err = float(np.max(np.abs(exact - ref) / ref))
        ok &= err <= 1e-4
        parts.append(f"{name} {err:.1e}")
    return ok, "max rel err " + ", ".join(parts)


def c3_normalization():
    curve = akmu.CdfCurve(REFERENCE, n=64)
    mass_ok = abs(curve.mass - 1) <= 1e-4
    gaps = []
    for r in (0.3, 0.7, 1.0, 1.5):
        gaps.append(abs(akmu.cdf_exact(REFERENCE, r, method="h4") - akmu.cdf_oracle(REFERENCE, r)))
    cdf_ok = max(gaps) <= 1e-4
    return mass_ok and cdf_ok, (f"int pdf = {curve.mass:.8f}, max |cdf_exact - cdf_oracle| "
                                f"= {max(gaps):.1e}")


def c4_series():
    rs = np.linspace(0.05, 1.5, 30)
    exact = np.array([akmu.pdf_exact(REFERENCE, r) for r in rs])
    gap = float(np.max(np.abs(akmu.pdf_series(REFERENCE, rs, 20) - exact) / exact))
    s2 = float(akmu.pdf_series(REFERENCE, 1.5, 2))
    e15 = akmu.pdf_exact(REFERENCE, 1.5)
    return gap <= 1e-3 and s2 < e15, (f"max gap n=20 {gap:.1e}; n=2 at r=1.5: {s2:.4g} < "
                                      f"{e15:.4g}")


def c5_leading():
    c0 = akmu.leading_coefficient(REFERENCE)
    ratio = akmu.pdf_exact(REFERENCE, 1e-2) / 1e-2 ** 3
    rel = abs(ratio / c0 - 1)
    return rel <= 0.02 and abs(c0 - 5.6258) < 1e-4, f"f(0.01)/r^3 = {ratio:.6f}, C0 = {c0:.6f}"


def c6_monte_carlo(n: int = 1_000_000, seed: int = 20240501):
    batch = mc.sample_envelope(REFERENCE, n, seed)
    curve = akmu.CdfCurve(REFERENCE, tol_rel=1e-5, tol_im=1e-6)
    ks = mc.ks_distance(batch, curve)
    mean, se = batch.mean_r_alpha()
    z = abs(mean - REFERENCE.r_hat ** REFERENCE.alpha) / se
    return ks <= 0.003 and z <= 3, f"KS {ks:.5f}, mean R^alpha {mean:.5f} ({z:.2f} s.e.)"


def outage_slope(P: ChannelParams, threshold_snr: float = 1.0, db=None) -> float:
    db = np.linspace(30.0, 40.0, 5) if db is None else np.asarray(db)
    g = 10 ** (db / 10)
    po = np.array([perf.outage(P, perf.LinkParams(x, threshold_snr)) for x in g])
    return float(np.polyfit(np.log10(g), np.log10(po), 1)[0])


def c7_diversity():
    cases = [REFERENCE.replace(alpha=2.0, mu=1.0), REFERENCE.replace(alpha=2.0, mu=2.0),
             REFERENCE.replace(alpha=1.0, mu=2.0)]
    parts, ok = [], True
    for P in cases:
        s = outage_slope(P)
        target = -P.alpha * P.mu / 2
        ok &= abs(s / target - 1) <= 0.05
        parts.append(f"(a={P.alpha:g},mu={P.mu:g}) {s:.4f}")
    ref = outage_slope(REFERENCE)
    for k in (0.2, 2.0):
        s = outage_slope(REFERENCE.replace(kappa=k))
        ok &= abs(s / ref - 1) <= 0.05 and abs(s / -2 - 1) <= 0.05
        parts.append(f"kappa={k:g} {s:.4f}")
    return ok, "slopes " + ", ".join(parts)


def c8_ber():
    worst, parts = 0.0, []
    for mod in (perf.BPSK, perf.DPSK, perf.BFSK):
        for db in (10, 20, 30):
            g = 10 ** (db / 10)
            a = perf.avg_ber(REFERENCE, mod, g)
            o = perf.ber_oracle(REFERENCE, mod, g)
            worst = max(worst, abs(a - o) / o)
        parts.append(mod.name)
    return worst <= 0.01, f"max rel gap {worst:.1e} over {'/'.join(parts)} at 10/20/30 dB"


def c9_symmetry(n: int = 1_000_000, seed: int = 7):
    worst_swap = worst_scale = 0.0
    for P in (REFERENCE, ORACLE_SETS["eta>p"]):
        for r in (0.3, 1.0, 2.0):
            a = akmu.pdf_exact(P, r)
            b = akmu.pdf_exact(P.swapped(), r)
            oa = akmu.pdf_conv_oracle(P, r)
            ob = akmu.pdf_conv_oracle(P.swapped(), r)
            worst_swap = max(worst_swap, abs(a - b) / a, abs(oa - ob) / oa)
            for rh in (0.5, 2.0):
                s = akmu.pdf_exact(P.replace(r_hat=rh), r * rh) * rh
                worst_scale = max(worst_scale, abs(s - a) / a)
    from scipy.stats import ks_2samp

    b1 = mc.sample_envelope(REFERENCE, n, seed)
    b2 = mc.sample_envelope(REFERENCE.swapped(), n, seed)
    ks2 = float(ks_2samp(b1.samples, b2.samples).statistic)
    zmax = 0.0
    for P in SAMPLER_SETS.values():
        m, se = mc.sample_envelope(P, 200_000, seed).mean_r_alpha()
        zmax = max(zmax, abs(m - P.r_hat ** P.alpha) / se)
    ok = worst_swap <= 1e-6 and worst_scale <= 1e-8 and ks2 <= 0.006 and zmax <= 3
    return ok, (f"swap {worst_swap:.1e}, r_hat scaling {worst_scale:.1e}, sampler swap KS "
                f"{ks2:.4f}, E[R^alpha] within {zmax:.2f} s.e.")


def c10_trends(db: float = 20.0):
    g = 10 ** (db / 10)
    vals, methods = {}, set()
    for key, P in (("a1", REFERENCE.replace(alpha=1.0)), ("a2.5", REFERENCE.replace(alpha=2.5)),
                   ("e0.1", REFERENCE.replace(eta=0.1)), ("e1", REFERENCE.replace(eta=1.0))):
        vals[key], res = perf.avg_ber_result(P, perf.BPSK, g)
        methods.add("h4" if res is not None else "pdf")
    ok = vals["a2.5"] < vals["a1"] and vals["e1"] < vals["e0.1"]
    return ok, (f"BER alpha 1 -> 2.5: {vals['a1']:.3e} -> {vals['a2.5']:.3e}; eta 0.1 -> 1: "
                f"{vals['e0.1']:.3e} -> {vals['e1']:.3e} via {'+'.join(sorted(methods))} "
                "(absolute published BER values are not reproducible)")


CRITERIA = {
    1: ("identity suite", 10, c1_identities),
    2: ("oracle equivalence", 180, c2_oracle),
    3: ("normalization and CDF consistency", 300, c3_normalization),
    4: ("series convergence", 30, c4_series),
    5: ("leading coefficient", 10, c5_leading),
    6: ("Monte-Carlo agreement", 60, c6_monte_carlo),
    7: ("diversity order", 300, c7_diversity),
    8: ("BER cross-validation", 600, c8_ber),
    9: ("symmetry and scaling", 60, c9_symmetry),
    10: ("qualitative trends", 600, c10_trends),
}
FAST = (1, 4, 5, 6, 9)


def run_criterion(number: int, **kw) -> CriterionResult:
    name, budget, fn = CRITERIA[number]
    t0 = time.perf_counter()
    specs = []
    try:
        ok, detail = fn(**kw)
    except FoxFadeError as exc:
        ok, detail = False, f"{type(exc).__name__}: {exc}"
        spec = getattr(exc, "diagnostics", {}).get("spec")
        if spec is not None:
            specs.append(FoxHSpec.from_dict(spec).to_text())
    elapsed = time.perf_counter() - t0
    if ok and elapsed > budget:
        ok, detail = False, detail + f"; over the {budget:.0f}s budget"
    return CriterionResult(number, name, bool(ok), detail, elapsed, budget, specs)


def run_all(numbers=None, progress=None) -> list[CriterionResult]:
    out = []
    for k in (sorted(CRITERIA) if numbers is None else numbers):
        res = run_criterion(k)
        if progress is not None:
            progress(res)
        out.append(res)
    return out


def summary_ok(results) -> bool:
    return all(r.passed for r in results)

