"""Data types for multivariate Mellin-Barnes integrals."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from ..errors import DomainError

FORMAT_VERSION = 1


@dataclass(frozen=True)
class GammaTerm:
    """One factor Gamma(offset + sum_j weights[j] * s_j)."""

    offset: float
    weights: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "offset", float(self.offset))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if not math.isfinite(self.offset) or not all(math.isfinite(w) for w in self.weights):
            raise DomainError("GammaTerm: offset and weights must be finite")

    @property
    def is_constant(self) -> bool:
        return all(w == 0.0 for w in self.weights)

    def to_dict(self) -> dict:
        return {"offset": self.offset, "weights": list(self.weights)}

    @classmethod
    def from_dict(cls, d: dict) -> "GammaTerm":
        return cls(float(d["offset"]), tuple(d["weights"]))


@dataclass(frozen=True)
class FoxHSpec:
    """Integrand description of a d-fold Mellin-Barnes integral.

    The represented value is

        prefactor * (2 pi i)^{-d} int ... int  prod Gamma(num) / prod Gamma(den)
                    * prod_j z_j^{s_j}  ds_1 ... ds_d

    for arguments ``z_j`` supplied at evaluation time.
    """

    num_vars: int
    numerator: tuple[GammaTerm, ...]
    denominator: tuple[GammaTerm, ...] = ()
    prefactor: float = 1.0
    label: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "numerator", tuple(self.numerator))
        object.__setattr__(self, "denominator", tuple(self.denominator))
        object.__setattr__(self, "prefactor", float(self.prefactor))
        d = self.num_vars
        if not isinstance(d, int) or not 1 <= d <= 4:
            raise DomainError(f"FoxHSpec: num_vars must be an integer in 1..4, got {d!r}")
        for t in self.numerator + self.denominator:
            if len(t.weights) != d:
                raise DomainError(
                    f"FoxHSpec: term {t} has {len(t.weights)} weights, expected {d}")
            if t.is_constant and t.offset <= 0 and t.offset == round(t.offset):
                raise DomainError(f"FoxHSpec: constant term at a gamma pole ({t.offset:g})")
        for j in range(d):
            if not any(t.weights[j] < 0 for t in self.numerator):
                raise DomainError(
                    f"FoxHSpec: variable s{j + 1} has no numerator term with right-hand poles")

    # structured text form ---------------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "format": "foxfade.FoxHSpec",
            "version": FORMAT_VERSION,
            "label": self.label,
            "num_vars": self.num_vars,
            "prefactor": self.prefactor,
            "numerator": [t.to_dict() for t in self.numerator],
            "denominator": [t.to_dict() for t in self.denominator],
        }

    def to_text(self) -> str:
        """JSON text; floats are written with round-trip precision."""
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "FoxHSpec":
        if d.get("format") != "foxfade.FoxHSpec":
            raise DomainError("not a serialized FoxHSpec")
        return cls(
            num_vars=int(d["num_vars"]),
            numerator=tuple(GammaTerm.from_dict(t) for t in d["numerator"]),
            denominator=tuple(GammaTerm.from_dict(t) for t in d.get("denominator", [])),
            prefactor=float(d.get("prefactor", 1.0)),
            label=str(d.get("label", "")),
        )

    @classmethod
    def from_text(cls, text: str) -> "FoxHSpec":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class ContourConfig:
    """Contour placement and quadrature resolution for each variable.

    Variable ``j`` is integrated along ``s = c_j + bend_j t^2 + i t`` with
    ``t`` in ``[-half_width_j, half_width_j]``. ``bend_j = 0`` is the classic
    vertical line. A positive bend gives a parabola opening to the right,
    which is used when the integrand grows along vertical lines (Bessel-type
    kernels, negative arguments). The ``t`` nodes come from a uniform grid of
    spacing ``step`` in an auxiliary variable ``u`` mapped by
    ``t = u - (1 - grading_j) * 1.5 * atan(u / 1.5)``; ``grading_j = 1`` is the
    plain trapezoid rule and smaller values cluster nodes near ``t = 0``.
    """

    abscissas: tuple[float, ...]
    half_width: tuple[float, ...]
    step: float = 0.25
    bends: tuple[float, ...] = ()
    grading: tuple[float, ...] = ()
    tol_im: float = 1e-8
    tol_rel: float = 1e-6

    def __post_init__(self):
        d = len(self.abscissas)
        hw = self.half_width
        if isinstance(hw, (int, float)):
            hw = (float(hw),) * d
        object.__setattr__(self, "abscissas", tuple(float(c) for c in self.abscissas))
        object.__setattr__(self, "half_width", tuple(float(t) for t in hw))
        object.__setattr__(self, "bends", tuple(float(b) for b in self.bends) or (0.0,) * d)
        object.__setattr__(self, "grading", tuple(float(g) for g in self.grading) or (1.0,) * d)
        if not (len(self.half_width) == len(self.bends) == len(self.grading) == d):
            raise DomainError("ContourConfig: per-variable fields differ in length")
        if not self.step > 0:
            raise DomainError("ContourConfig: step must be positive")
        for t in self.half_width:
            if not (t > 0 and self.step <= t):
                raise DomainError("ContourConfig: need 0 < step <= half_width")
        if any(b < 0 for b in self.bends) or any(not 0 < g <= 1 for g in self.grading):
            raise DomainError("ContourConfig: bends must be >= 0 and grading in (0, 1]")
        if not (self.tol_im > 0 and self.tol_rel > 0):
            raise DomainError("ContourConfig: tolerances must be positive")

    @property
    def num_vars(self) -> int:
        return len(self.abscissas)

    def with_updates(self, **kw) -> "ContourConfig":
        d = {f: getattr(self, f) for f in
             ("abscissas", "half_width", "step", "bends", "grading", "tol_im", "tol_rel")}
        d.update(kw)
        return ContourConfig(**d)


@dataclass(frozen=True)
class EvalResult:
    """Outcome of one contour evaluation."""

    value: float
    im_residual: float
    est_rel_err: float
    nodes_used: int
    contours: ContourConfig | None = field(default=None, compare=False, repr=False)
    cond: float = field(default=1.0, compare=False)  # sum of |terms| over |sum|
