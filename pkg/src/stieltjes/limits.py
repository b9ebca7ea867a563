"""One-sided limit extrapolation (Neville scheme on shrinking steps)."""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

__all__ = ["extrapolate_to_zero", "LimitEstimate"]


class LimitEstimate:
    """Extrapolated limit plus its achieved Cauchy defect."""

    __slots__ = ("value", "defect", "converged", "samples")

    def __init__(self, value: float, defect: float, converged: bool, samples: int):
        self.value = value
        self.defect = defect
        self.converged = converged
        self.samples = samples

    def __repr__(self):  # pragma: no cover
        return (
            f"LimitEstimate(value={self.value!r}, defect={self.defect!r}, "
            f"converged={self.converged})"
        )


def extrapolate_to_zero(
    sample: Callable[[float], float],
    h0: float,
    tol: float = 1e-10,
    max_levels: int = 14,
    shrink: float = 2.0,
    max_order: int = 6,
) -> LimitEstimate:
    """Estimate lim_{h->0+} sample(h) by polynomial extrapolation.

    Steps h0/shrink^j; Neville table limited to ``max_order`` columns so
    float noise in deep levels cannot blow up. Convergence means two
    consecutive diagonal entries agree within tol (relative to scale).
    """
    if h0 <= 0 or not math.isfinite(h0):
        raise ValueError("h0 must be positive and finite")
    hs: list[float] = []
    table: list[list[float]] = []  # table[j] = Neville row for node j
    best = math.nan
    best_defect = math.inf
    prev_diag = None
    stagnant = 0
    for j in range(max_levels):
        h = h0 / shrink**j
        try:
            y = float(sample(h))
        except (ArithmeticError, ValueError):
            continue
        if not math.isfinite(y):
            continue
        hs.append(h)
        row = [y]
        m = len(hs) - 1
        for k in range(1, min(m, max_order) + 1):
            num = hs[m] * table[m - 1][k - 1] - hs[m - k] * row[k - 1]
            den = hs[m] - hs[m - k]
            row.append(num / den if den != 0 else row[k - 1])
        table.append(row)
        diag = row[-1]
        if prev_diag is not None:
            defect = abs(diag - prev_diag)
            scale = 1.0 + max(abs(diag), abs(prev_diag))
            if defect < best_defect:
                best, best_defect = diag, defect
            if defect <= tol * scale:
                return LimitEstimate(diag, defect, True, len(hs))
            stagnant = stagnant + 1 if defect >= best_defect * 0.5 else 0
            if stagnant >= 6 and best_defect > tol * scale:
                break
        prev_diag = diag
    if not hs:
        return LimitEstimate(math.nan, math.inf, False, 0)
    if math.isnan(best):
        best = table[-1][-1]
    return LimitEstimate(best, best_defect, False, len(hs))
