"""A wrong constant in psi1 must be caught by the oracle-equivalence criterion."""

import math
from dataclasses import replace

from foxfade import akmu, verify


def test_wrong_psi1_fails_oracle_criterion(monkeypatch):
    real = akmu.derive_constants

    def mutated(params):
        c = real(params)
        return replace(c, psi1=c.psi1 * 1.01, log_k=c.log_k + math.log(1.01))

    monkeypatch.setattr(akmu, "derive_constants", mutated)
    ok, detail = verify.c2_oracle(n_points=3)
    assert not ok, detail


def test_unmutated_reduced_criterion_passes():
    ok, detail = verify.c2_oracle(n_points=3)
    assert ok, detail
