"""Continuous + jump decompositions and the multiplicative split.

A regulated f over a derivator splits additively as f = fC + fB where
fB accumulates the jumps of f at the atoms of g, and multiplicatively as
f = phi * psi where phi collects the jump ratios (1 + df/f) and psi is
continuous.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .calculus import GFunction, estimate_right_limit, integrate, lp_norm
from .derivator import Derivator
from .errors import (
    BranchViolation,
    LogSumDiverges,
    NoRightLimit,
    NotDecomposable,
    ZeroNearJump,
)
from .grids import right_cluster, sampling_grid

__all__ = [
    "JumpSeries",
    "AdditiveSplit",
    "MultiplicativeSplit",
    "jump_series",
    "additive_split",
    "dc_norm",
    "multiplicative_split",
]


@dataclass(frozen=True)
class JumpSeries:
    """Per-atom jumps df(d) = f(d+) - f(d) with their absolute sum."""

    points: np.ndarray
    deltas_f: np.ndarray
    total: float
    tail_bound: float | None
    decomposable: bool
    extrapolated: tuple[float, ...]  # atoms whose right limit was estimated

    def delta_at(self, d: float) -> float:
        i = int(np.searchsorted(self.points, d))
        if i < len(self.points) and self.points[i] == d:
            return float(self.deltas_f[i])
        return 0.0

    def to_dict(self) -> dict:
        return {
            "points": self.points.tolist(),
            "deltas_f": self.deltas_f.tolist(),
            "total": self.total,
            "tail_bound": self.tail_bound,
            "decomposable": self.decomposable,
            "extrapolated": list(self.extrapolated),
        }


def jump_series(f: GFunction, g: Derivator, tol: float = 1e-9) -> JumpSeries:
    """Jump table of f over the atoms of g.

    Right limits come from the declared table when present, otherwise by
    extrapolation; a failed extrapolation raises NoRightLimit.
    """
    pts = g.jump_points
    deltas = np.zeros(len(pts))
    extrapolated = []
    for i, d in enumerate(pts):
        d = float(d)
        declared = f.declared_right_limit(d)
        if declared is not None:
            deltas[i] = float(declared) - f.at(d)
            continue
        est = estimate_right_limit(f, g, d, tol=tol)
        if not est.converged:
            raise NoRightLimit(
                f"right limit of {f.label or 'f'} at {d} does not exist "
                f"(defect {est.defect:.3e})"
            )
        extrapolated.append(d)
        deltas[i] = est.value - f.at(d)
    total = float(np.abs(deltas).sum())
    return JumpSeries(
        points=pts.copy(),
        deltas_f=deltas,
        total=total,
        tail_bound=g.tail_bound,
        decomposable=True,
        extrapolated=tuple(extrapolated),
    )


@dataclass(frozen=True)
class AdditiveSplit:
    """f = fC + fB with fB the running jump sum (left continuous)."""

    f_jump: GFunction
    f_cont: GFunction
    series: JumpSeries
    jump_sum: float
    continuity_residuals: dict[float, float]
    integral_agreement: float

    def to_dict(self) -> dict:
        return {
            "jump_sum": self.jump_sum,
            "continuity_residuals": {
                str(k): v for k, v in sorted(self.continuity_residuals.items())
            },
            "integral_agreement": self.integral_agreement,
        }


def additive_split(f: GFunction, g: Derivator, tol: float = 1e-9) -> AdditiveSplit:
    """Split f into jump part fB and continuous remainder fC = f - fB.

    fB is built twice: as the running jump sum and as the mu_g integral of
    h = df/delta on the atoms (zero elsewhere); the two constructions must
    agree within quadrature tolerance.
    """
    try:
        series = jump_series(f, g, tol=tol)
    except NoRightLimit as exc:
        raise NotDecomposable(str(exc)) from exc
    pts = series.points
    prefix = np.concatenate([[0.0], np.cumsum(series.deltas_f)])
    a, b = g.window

    def fb_eval(t):
        arr = np.asarray(t, dtype=float)
        tt = np.atleast_1d(arr).astype(float)
        idx = np.searchsorted(pts, tt, side="left")
        out = prefix[idx]
        return float(out[0]) if arr.ndim == 0 else out

    fb_rl = {
        float(d): float(prefix[i + 1]) for i, d in enumerate(pts)
    }
    f_jump = GFunction(
        evaluator=fb_eval,
        right_limits=fb_rl,
        label=f"{f.label}^B" if f.label else "f^B",
        kinks=tuple(pts.tolist()),
    )

    def fc_eval(t):
        return f.at(t) - fb_eval(t)

    fc_rl = {}
    for d in pts:
        d = float(d)
        f_right = f.at(d) + series.delta_at(d)
        fc_rl[d] = float(f_right) - fb_rl[d]
    f_cont = GFunction(
        evaluator=fc_eval,
        right_limits=fc_rl,
        label=f"{f.label}^C" if f.label else "f^C",
        kinks=tuple(set(f.kinks) | set(pts.tolist())),
    )

    residuals = {
        float(d): abs(fc_rl[float(d)] - fc_eval(float(d))) for d in pts
    }

    # independent reconstruction: fB(t) = integral of h over [a, t)
    agreement = 0.0
    if pts.size:
        ratios = series.deltas_f / g.jump_deltas

        def h_eval(t):
            arr = np.asarray(t, dtype=float)
            tt = np.atleast_1d(arr).astype(float)
            idx = np.searchsorted(pts, tt, side="left")
            idx = np.minimum(idx, len(pts) - 1)
            out = np.where(pts[idx] == tt, ratios[idx], 0.0)
            return float(out[0]) if arr.ndim == 0 else out

        h = GFunction(evaluator=h_eval, kinks=tuple(pts.tolist()), label="h")
        probes = np.unique(
            np.concatenate([pts + 1e-9 * (b - a), [b]])
        )
        probes = probes[(probes > a) & (probes <= b)]
        for t in probes:
            via_integral = integrate(h, g, (a, float(t)), tol=min(tol, 1e-10))
            agreement = max(agreement, abs(via_integral - fb_eval(float(t))))

    return AdditiveSplit(
        f_jump=f_jump,
        f_cont=f_cont,
        series=series,
        jump_sum=series.total,
        continuity_residuals=residuals,
        integral_agreement=float(agreement),
    )


def dc_norm(f: GFunction, g: Derivator, tol: float = 1e-9, sample_n: int = 2001) -> float:
    """Sup norm plus total jump mass of f over the atoms of g."""
    try:
        series = jump_series(f, g, tol=tol)
    except NoRightLimit as exc:
        raise NotDecomposable(str(exc)) from exc
    sup = lp_norm(f, g, math.inf, g.window, sample_n=sample_n)
    # account for declared-or-extrapolated right limit values as well
    for i, d in enumerate(series.points):
        sup = max(sup, abs(f.at(float(d)) + series.deltas_f[i]))
    return float(sup + series.total)


@dataclass(frozen=True)
class MultiplicativeSplit:
    """f = phi * psi: phi a positive pure-jump product, psi continuous."""

    phi: GFunction
    psi: GFunction
    alpha: float
    d_gf: tuple[float, ...]
    log_sum: float
    phi_lower_bound: float
    expression_agreement: float
    psi_residuals: dict[float, float]

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "d_gf": list(self.d_gf),
            "log_sum": self.log_sum,
            "phi_lower_bound": self.phi_lower_bound,
            "expression_agreement": self.expression_agreement,
            "psi_residuals": {
                str(k): v for k, v in sorted(self.psi_residuals.items())
            },
        }


def multiplicative_split(
    f: GFunction,
    g: Derivator,
    alpha: float = 0.0,
    tol: float = 1e-9,
    zero_tol: float = 1e-12,
) -> MultiplicativeSplit:
    """Factor f = phi * psi across the atoms where f jumps.

    phi(t) multiplies the ratios (1 + df(d)/f(d)) over jumping atoms left
    of t; real mode requires every ratio positive (BranchViolation
    otherwise) and f non-vanishing at and just right of each such atom
    (ZeroNearJump). alpha is the declared log-branch anchor; only the real
    branch is evaluated.
    """
    try:
        series = jump_series(f, g, tol=tol)
    except NoRightLimit as exc:
        raise NotDecomposable(str(exc)) from exc
    jump_scale = 1.0 + float(np.abs(series.deltas_f).max()) if series.points.size else 1.0
    active_mask = np.abs(series.deltas_f) > max(zero_tol, 1e-13 * jump_scale)
    d_gf = series.points[active_mask]
    df = series.deltas_f[active_mask]

    ratios = np.ones(len(d_gf))
    for i, d in enumerate(d_gf):
        d = float(d)
        f_d = f.at(d)
        if abs(f_d) <= zero_tol:
            raise ZeroNearJump(f"f({d}) = {f_d} too close to zero")
        for t_probe in right_cluster(g, d, depth=12):
            if abs(f.at(float(t_probe))) <= zero_tol:
                raise ZeroNearJump(
                    f"f vanishes at {t_probe} just right of the jump at {d}"
                )
        ratio = 1.0 + df[i] / f_d
        if ratio <= 0.0:
            raise BranchViolation(
                f"1 + df/f = {ratio} at {d} leaves the real branch"
            )
        ratios[i] = ratio

    logs = np.log(ratios)
    log_sum = float(np.abs(logs).sum())
    if not math.isfinite(log_sum):
        raise LogSumDiverges("log jump sum is not finite")
    phi_prefix = np.concatenate([[1.0], np.cumprod(ratios)])
    # same product through exp-of-log-sums and the running-sum recursion
    exp_form = np.exp(np.concatenate([[0.0], np.cumsum(logs)]))
    running = np.ones(len(ratios) + 1)
    for i in range(len(ratios)):
        running[i + 1] = running[i] + (df[i] / f.at(float(d_gf[i]))) * running[i]
    expression_agreement = float(
        max(
            np.max(np.abs(exp_form - phi_prefix), initial=0.0),
            np.max(np.abs(running - phi_prefix), initial=0.0),
        )
    )

    def phi_eval(t):
        arr = np.asarray(t, dtype=float)
        tt = np.atleast_1d(arr).astype(float)
        idx = np.searchsorted(d_gf, tt, side="left")
        out = phi_prefix[idx]
        return float(out[0]) if arr.ndim == 0 else out

    phi_rl = {float(d): float(phi_prefix[i + 1]) for i, d in enumerate(d_gf)}
    phi = GFunction(
        evaluator=phi_eval,
        right_limits=phi_rl,
        label="phi",
        kinks=tuple(d_gf.tolist()),
    )

    def psi_eval(t):
        return f.at(t) / phi_eval(t)

    psi_rl = {}
    for d in g.jump_points:
        d = float(d)
        f_right = f.at(d) + series.delta_at(d)
        phi_right = phi_rl.get(d, phi_eval(d))
        psi_rl[d] = f_right / phi_right
    psi = GFunction(
        evaluator=psi_eval,
        right_limits=psi_rl,
        label="psi",
        kinks=tuple(set(f.kinks) | set(g.jump_points.tolist())),
    )
    psi_residuals = {
        float(d): abs(psi_rl[float(d)] - psi_eval(float(d)))
        for d in g.jump_points
    }
    return MultiplicativeSplit(
        phi=phi,
        psi=psi,
        alpha=float(alpha),
        d_gf=tuple(float(d) for d in d_gf),
        log_sum=log_sum,
        phi_lower_bound=float(math.exp(-log_sum)),
        expression_agreement=expression_agreement,
        psi_residuals=psi_residuals,
    )
