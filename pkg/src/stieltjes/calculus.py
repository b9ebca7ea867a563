"""Lebesgue-Stieltjes integration, g-derivatives, FTC builds and norms.

The integral against mu_g is computed through the change-of-variables
decomposition: a Lebesgue integral of f∘gamma over the image of the
continuous part plus the weighted sum over jump atoms. The independent
oracle is a refined left-tagged Riemann-Stieltjes sum.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .derivator import Derivator
from .errors import (
    DegenerateDenominator,
    InputError,
    NoLimit,
    OutOfWindow,
    QuadratureFailure,
)
from .grids import sampling_grid, special_points
from .limits import LimitEstimate, extrapolate_to_zero

__all__ = [
    "GFunction",
    "SobolevFunction",
    "as_gfunction",
    "integrate",
    "integrate_direct",
    "g_derivative",
    "ftc_build",
    "lp_norm",
    "sobolev_norm",
    "embedding_check",
    "estimate_right_limit",
    "right_limit_value",
]


# ---------------------------------------------------------------------------
# function wrappers


@dataclass
class GFunction:
    """Scalar function on the window: evaluator + declared jump data.

    ``right_limits`` maps jump points of the paired derivator to declared
    right-hand limits; ``gderiv`` is an optional exact g-derivative;
    ``kinks`` lists points where the evaluator may lose smoothness (used
    to seed quadrature subdivisions); ``increment``, when present, returns
    u(y)-u(x) directly (attached by ``ftc_build`` to avoid cancellation).
    """

    evaluator: Callable
    right_limits: Mapping[float, float] | None = None
    gderiv: Callable | None = None
    label: str = ""
    kinks: tuple[float, ...] = ()
    increment: Callable | None = field(default=None, repr=False, compare=False)
    _vec_mode: str | None = field(default=None, repr=False, compare=False)

    def at(self, t):
        arr = np.asarray(t, dtype=float)
        if arr.ndim == 0:
            return float(self.evaluator(float(arr)))
        return self._eval_array(arr)

    __call__ = at

    def _eval_array(self, arr: np.ndarray) -> np.ndarray:
        if self._vec_mode is None:
            self._probe(arr)
        if self._vec_mode == "array":
            out = np.asarray(self.evaluator(arr), dtype=float)
            if out.shape == ():
                return np.full(arr.shape, float(out))
            return out
        return np.array([self.evaluator(float(x)) for x in arr], dtype=float)

    def _probe(self, arr: np.ndarray) -> None:
        try:
            out = np.asarray(self.evaluator(arr), dtype=float)
        except Exception:
            self._vec_mode = "scalar"
            return
        if out.shape in ((), arr.shape):
            ref = np.array(
                [self.evaluator(float(x)) for x in arr[: min(3, arr.size)]]
            )
            got = np.broadcast_to(out, arr.shape)[: min(3, arr.size)]
            if np.allclose(ref, got, rtol=1e-12, atol=0, equal_nan=True):
                self._vec_mode = "array"
                return
        self._vec_mode = "scalar"

    def declared_right_limit(self, d: float) -> float | None:
        if self.right_limits is None:
            return None
        return self.right_limits.get(float(d))


@dataclass
class SobolevFunction:
    """Pair (u, du) with u(t) = base_value + integral of du over [a, t)."""

    base_value: float
    density: GFunction
    interval: tuple[float, float] | None = None

    def resolved_interval(self, g: Derivator) -> tuple[float, float]:
        return self.interval if self.interval is not None else g.window


def as_gfunction(g: Derivator, label: str = "g") -> GFunction:
    """Wrap a derivator as a GFunction of itself (g'_g = 1 everywhere)."""
    rl = {float(d): float(g.eval_right(d)) for d in g.jump_points}
    return GFunction(
        evaluator=g.eval,
        right_limits=rl,
        gderiv=lambda t: np.ones_like(np.asarray(t, dtype=float)) * 1.0,
        label=label,
        kinks=tuple(np.concatenate([g.breakpoints, g.jump_points]).tolist()),
    )


# ---------------------------------------------------------------------------
# quadrature core


def _simpson_doubling(
    fn: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    tol: float,
    max_levels: int = 16,
    min_cells: int = 4,
) -> float:
    """Composite Simpson on [a, b] with doubling until |S2-S|/15 <= tol."""
    if b <= a:
        return 0.0
    cells = min_cells
    prev = None
    for _ in range(max_levels + 1):
        xs = np.linspace(a, b, 2 * cells + 1)
        ys = np.asarray(fn(xs), dtype=float)
        h = (b - a) / (2 * cells)
        s = (h / 3.0) * (
            ys[0] + ys[-1] + 4.0 * ys[1::2].sum() + 2.0 * ys[2:-1:2].sum()
        )
        if prev is not None:
            err = abs(s - prev) / 15.0
            if err <= tol:
                return s + (s - prev) / 15.0
        prev = s
        cells *= 2
    raise QuadratureFailure(
        f"Simpson refinement exhausted on [{a}, {b}] (last change {err:.3e}, "
        f"target {tol:.3e})"
    )


def _continuous_pieces(
    g: Derivator, c: float, d: float, extra_ts=()
) -> list[tuple[float, float, float, float]]:
    """Affine pieces (xa, xb, ta, tb) covering the gC-image of [c, d).

    Cut points include every breakpoint, jump and caller kink inside
    (c, d), so gamma is affine and the integrand one-sided smooth on each
    piece. Flat stretches produce no piece (zero Lebesgue extent).
    """
    cuts = special_points(g, extra=extra_ts)
    inner = cuts[(cuts > c) & (cuts < d)]
    ts = np.unique(np.concatenate([[c, d], inner]))
    xs = g.eval_cont(ts)
    pieces = []
    for i in range(len(ts) - 1):
        if xs[i + 1] > xs[i]:
            pieces.append((float(xs[i]), float(xs[i + 1]), float(ts[i]), float(ts[i + 1])))
    return pieces


def _integral_continuous(
    f_of_t: Callable[[np.ndarray], np.ndarray],
    g: Derivator,
    c: float,
    d: float,
    tol: float,
    extra_ts=(),
) -> float:
    """Lebesgue part of the integral over [c, d): sum over affine pieces."""
    pieces = _continuous_pieces(g, c, d, extra_ts)
    if not pieces:
        return 0.0
    total_len = sum(xb - xa for xa, xb, _, _ in pieces)
    acc = 0.0
    for xa, xb, ta, tb in pieces:
        slope = (tb - ta) / (xb - xa)
        nudge = 1e-12 * (tb - ta)
        lo, hi = ta + nudge, tb - nudge

        def integrand(x, xa=xa, ta=ta, slope=slope, lo=lo, hi=hi):
            return f_of_t(np.clip(ta + (x - xa) * slope, lo, hi))

        piece_tol = tol * (xb - xa) / total_len
        acc += _simpson_doubling(integrand, xa, xb, piece_tol)
    return acc


def _atom_sum(f: GFunction, g: Derivator, c: float, d: float) -> float:
    mask = (g.jump_points >= c) & (g.jump_points < d)
    if not mask.any():
        return 0.0
    pts = g.jump_points[mask]
    return float(np.dot(f.at(pts), g.jump_deltas[mask]))


def _check_interval(g: Derivator, interval) -> tuple[float, float]:
    c, d = float(interval[0]), float(interval[1])
    a, b = g.window
    if c > d:
        raise InputError(f"interval [{c}, {d}) has negative orientation")
    if c < a or d > b:
        raise OutOfWindow(f"interval [{c}, {d}) outside window [{a}, {b}]")
    return c, d


def integrate(f: GFunction, g: Derivator, interval, tol: float = 1e-8) -> float:
    """Integral of f against mu_g over the half-open interval [c, d)."""
    c, d = _check_interval(g, interval)
    if d <= c:
        return 0.0
    cont = _integral_continuous(f.at, g, c, d, tol, extra_ts=f.kinks)
    return cont + _atom_sum(f, g, c, d)


def _rs_sum(f: GFunction, g: Derivator, c: float, d: float, m: int) -> float:
    cuts = special_points(g, extra=f.kinks)
    inner = cuts[(cuts > c) & (cuts < d)]
    ts = np.unique(np.concatenate([np.linspace(c, d, m + 1), inner]))
    gs = g.eval(ts)
    fs = f.at(ts[:-1])
    return float(np.dot(fs, np.diff(gs)))


def integrate_direct(
    f: GFunction, g: Derivator, interval, n: int = 100_000
) -> float:
    """Brute-force oracle: refined left-tagged Riemann-Stieltjes sums.

    Two sums on grids of n and 2n uniform cells (each grid also contains
    every breakpoint, jump point and declared kink) are combined by one
    Richardson step, which removes the O(1/n) left-tag bias while keeping
    the computation independent of the quadrature path.
    """
    c, d = _check_interval(g, interval)
    if d <= c:
        return 0.0
    s1 = _rs_sum(f, g, c, d, int(n))
    s2 = _rs_sum(f, g, c, d, 2 * int(n))
    return 2.0 * s2 - s1


# ---------------------------------------------------------------------------
# right limits and g-derivatives


def _safe_right_gap(g: Derivator, t: float, extra_ts=()) -> float:
    pts = special_points(g, extra=extra_ts)
    beyond = pts[pts > t]
    b = g.window[1]
    gap = float(beyond[0] - t) if beyond.size else (b - t)
    return min(gap, b - t)


def _safe_left_gap(g: Derivator, t: float, extra_ts=()) -> float:
    pts = special_points(g, extra=extra_ts)
    before = pts[pts < t]
    a = g.window[0]
    gap = float(t - before[-1]) if before.size else (t - a)
    return min(gap, t - a)


def estimate_right_limit(
    f: GFunction, g: Derivator, d: float, tol: float = 1e-9
) -> LimitEstimate:
    """Right-hand limit f(d+) by extrapolation (declared value wins)."""
    declared = f.declared_right_limit(d)
    if declared is not None:
        return LimitEstimate(float(declared), 0.0, True, 0)
    gap = _safe_right_gap(g, d, extra_ts=f.kinks)
    if gap <= 0:
        return LimitEstimate(math.nan, math.inf, False, 0)
    h0 = 0.25 * gap
    return extrapolate_to_zero(lambda h: f.at(d + h), h0, tol=tol)


def right_limit_value(
    f: GFunction, g: Derivator, d: float, tol: float = 1e-9
) -> float:
    """Right limit as a value; raises NoLimit when extrapolation fails."""
    est = estimate_right_limit(f, g, d, tol)
    if not est.converged:
        raise NoLimit(f"no right-hand limit at {d} (defect {est.defect:.3e})")
    return est.value


def _f_difference(f: GFunction, t: float, s: float) -> float:
    if f.increment is not None:
        return f.increment(t, s)
    return f.at(s) - f.at(t)


def _quotient_limit(
    f: GFunction, g: Derivator, t: float, side: int, tol: float
) -> LimitEstimate:
    gap = (
        _safe_right_gap(g, t, extra_ts=f.kinks)
        if side > 0
        else _safe_left_gap(g, t, extra_ts=f.kinks)
    )
    if gap <= 0:
        return LimitEstimate(math.nan, math.inf, False, 0)
    h0 = 0.25 * gap
    g_t = g.eval(t)
    span = 1.0 + g.total_variation

    def sample(h: float) -> float:
        s = t + side * h
        den = g.eval(s) - g_t
        if abs(den) < 1e-15 * span:
            raise ArithmeticError("flat denominator")
        return _f_difference(f, t, s) / den

    return extrapolate_to_zero(sample, h0, tol=tol)


def g_derivative(
    f: GFunction,
    g: Derivator,
    t: float,
    tol: float = 1e-8,
    use_declared: bool = True,
) -> float:
    """Stieltjes derivative of f with respect to g at t.

    Branches: jump points use (f(t+)-f(t))/delta; interior points of a
    constancy interval use the right quotient at the interval's upper
    endpoint; elsewhere the two-sided difference-quotient limit. Raises
    DegenerateDenominator at constancy endpoints that are not jumps
    (behavior there is not defined) and NoLimit when extrapolation fails.
    """
    t = float(t)
    a, b = g.window
    if t < a or t > b:
        raise OutOfWindow(f"point {t} outside window [{a}, {b}]")
    if use_declared and f.gderiv is not None:
        return float(np.asarray(f.gderiv(t), dtype=float))
    delta = g.delta(t)
    if delta > 0.0:
        fr = right_limit_value(f, g, t, tol=min(tol, 1e-9))
        return (fr - f.at(t)) / delta
    cls = g._classification
    for lo, hi in cls.constancy_intervals:
        if lo < t < hi:
            if hi >= b:
                raise DegenerateDenominator(
                    f"constancy interval ({lo}, {hi}) reaches the window edge; "
                    "no data to the right"
                )
            if g.delta(hi) > 0.0:
                fr = right_limit_value(f, g, hi, tol=min(tol, 1e-9))
                return (fr - f.at(hi)) / g.delta(hi)
            est = _quotient_limit(f, g, hi, +1, tol)
            if not est.converged:
                raise NoLimit(
                    f"right quotient at constancy endpoint {hi} did not "
                    f"converge (defect {est.defect:.3e})"
                )
            return est.value
    if t in set(cls.n_minus) | set(cls.n_plus):
        raise DegenerateDenominator(
            f"g is one-sidedly constant at {t}; the derivative is not "
            "defined there"
        )
    left = _quotient_limit(f, g, t, -1, tol) if t > a else None
    right = _quotient_limit(f, g, t, +1, tol) if t < b else None
    sides = [e for e in (left, right) if e is not None]
    if not any(e.converged for e in sides):
        worst = min(e.defect for e in sides)
        raise NoLimit(f"difference quotients at {t} fail the Cauchy test "
                      f"(defect {worst:.3e})")
    vals = [e.value for e in sides if e.converged]
    if len(vals) == 2:
        scale = 1.0 + max(abs(v) for v in vals)
        if abs(vals[0] - vals[1]) > 50.0 * tol * scale:
            raise NoLimit(
                f"one-sided quotients at {t} disagree: {vals[0]} vs {vals[1]}"
            )
        return 0.5 * (vals[0] + vals[1])
    return vals[0]


# ---------------------------------------------------------------------------
# FTC builds


def ftc_build(s: SobolevFunction, g: Derivator, tol: float = 1e-10) -> GFunction:
    """Indefinite integral u(t) = u(a) + integral of du over [a, t).

    The result carries declared right limits u(d+) = u(d) + du(d)*delta(d),
    the exact g-derivative, and an increment closure for cancellation-free
    differences.
    """
    du = s.density
    a_win, b_win = g.window
    a, b = s.resolved_interval(g)
    if a < a_win or b > b_win:
        raise OutOfWindow("Sobolev interval outside the derivator window")
    specials = special_points(g, extra=du.kinks)
    anchors = np.unique(np.concatenate([specials, [a_win, b_win, a, b]]))
    piece_tol = max(tol / max(len(anchors), 1), 1e-15)
    prefix = np.zeros(len(anchors))
    for i in range(len(anchors) - 1):
        lo, hi = float(anchors[i]), float(anchors[i + 1])
        cont = _integral_continuous(du.at, g, lo, hi, piece_tol, extra_ts=du.kinks)
        prefix[i + 1] = prefix[i] + cont + _atom_sum(du, g, lo, hi)
    base_ref = float(prefix[int(np.searchsorted(anchors, a))])  # a is an anchor

    def cumulative(t: float) -> float:
        i = int(np.searchsorted(anchors, t, side="right") - 1)
        i = min(max(i, 0), len(anchors) - 2)
        lo = float(anchors[i])
        if t <= lo:
            return float(prefix[i])
        cont = _integral_continuous(du.at, g, lo, t, piece_tol, extra_ts=du.kinks)
        return float(prefix[i] + cont + _atom_sum(du, g, lo, t))

    def increment(x: float, y: float) -> float:
        x, y = float(x), float(y)
        if x == y:
            return 0.0
        sign = 1.0
        if y < x:
            x, y, sign = y, x, -1.0
        i = int(np.searchsorted(anchors, x, side="right") - 1)
        j = int(np.searchsorted(anchors, y, side="right") - 1)
        if i == j:
            cont = _integral_continuous(du.at, g, x, y, piece_tol, extra_ts=du.kinks)
            return sign * (cont + _atom_sum(du, g, x, y))
        return sign * (cumulative(y) - cumulative(x))

    def evaluator(t):
        arr = np.asarray(t, dtype=float)
        if arr.ndim == 0:
            return s.base_value + cumulative(float(arr)) - base_ref
        return np.array(
            [s.base_value + cumulative(float(x)) - base_ref for x in arr]
        )

    mask = (g.jump_points >= a) & (g.jump_points < b)
    rl = {}
    for d_pt, d_sz in zip(g.jump_points[mask], g.jump_deltas[mask]):
        u_d = s.base_value + cumulative(float(d_pt)) - base_ref
        rl[float(d_pt)] = u_d + du.at(float(d_pt)) * float(d_sz)
    out = GFunction(
        evaluator=evaluator,
        right_limits=rl,
        gderiv=du.at,
        label=f"ftc({du.label})" if du.label else "ftc",
        kinks=tuple(anchors.tolist()),
        increment=increment,
    )
    return out


# ---------------------------------------------------------------------------
# norms


def lp_norm(
    f: GFunction,
    g: Derivator,
    p,
    interval=None,
    tol: float = 1e-9,
    sample_n: int = 2001,
) -> float:
    """L^p_g norm over [c, d); p may be math.inf (grid sup with declared
    right limits, a lower bound for adversarial evaluators)."""
    if interval is None:
        interval = g.window
    c, d = _check_interval(g, interval)
    if p == math.inf or (isinstance(p, str) and p == "inf"):
        grid = sampling_grid(g, n=sample_n, extra=f.kinks)
        grid = grid[(grid >= c) & (grid <= d)]
        vals = np.abs(f.at(grid)) if grid.size else np.zeros(1)
        best = float(vals.max())
        if f.right_limits:
            for d_pt, v in f.right_limits.items():
                if c <= d_pt < d:
                    best = max(best, abs(float(v)))
        return best
    p = float(p)
    if p < 1.0:
        raise InputError(f"p must be >= 1 or inf, got {p}")
    power = GFunction(
        evaluator=lambda t: np.abs(f.at(t)) ** p,
        kinks=f.kinks,
        label=f"|{f.label}|^{p}" if f.label else "",
    )
    val = integrate(power, g, (c, d), tol=tol)
    return float(max(val, 0.0) ** (1.0 / p))


def sobolev_norm(
    s: SobolevFunction, g: Derivator, p, tol: float = 1e-9
) -> float:
    """W^{1,p}_g norm: ||u||_p + ||du||_p over the function's interval."""
    iv = s.resolved_interval(g)
    u = ftc_build(s, g, tol=min(tol, 1e-10))
    return lp_norm(u, g, p, iv, tol=tol) + lp_norm(s.density, g, p, iv, tol=tol)


@dataclass(frozen=True)
class EmbeddingReport:
    """Measured sup-norm versus the certified embedding bound."""

    p: float
    mu: float
    sup_norm: float
    u_norm: float
    du_norm: float
    constant: float
    bound: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "p": self.p if self.p != math.inf else "inf",
            "mu": self.mu,
            "sup_norm": self.sup_norm,
            "u_norm": self.u_norm,
            "du_norm": self.du_norm,
            "constant": self.constant,
            "bound": self.bound,
            "passed": self.passed,
        }


def embedding_constant(p, mu: float) -> float:
    """Constant C(p, mu) with ||u||_0 <= 2 C (||u||_p + ||du||_p)."""
    if mu <= 0.0:
        return math.inf
    if p == math.inf:
        return max(1.0, mu)
    p = float(p)
    return max(mu ** ((p - 1.0) / p), mu ** (-1.0 / p))


def embedding_check(
    s: SobolevFunction, g: Derivator, p, tol: float = 1e-9
) -> EmbeddingReport:
    """Check the continuous-embedding bound for one Sobolev pair."""
    iv = s.resolved_interval(g)
    mu = g.measure([iv])
    u = ftc_build(s, g, tol=min(tol, 1e-10))
    sup = lp_norm(u, g, math.inf, iv)
    un = lp_norm(u, g, p, iv, tol=tol)
    dn = lp_norm(s.density, g, p, iv, tol=tol)
    c = embedding_constant(p, mu)
    bound = 2.0 * c * (un + dn)
    passed = sup <= bound * (1.0 + 1e-10) + 1e-12
    return EmbeddingReport(
        p=float(p) if p != math.inf else math.inf,
        mu=float(mu),
        sup_norm=float(sup),
        u_norm=float(un),
        du_norm=float(dn),
        constant=float(c),
        bound=float(bound),
        passed=bool(passed),
    )
