"""Derivators: non-decreasing, left-continuous drivers of the calculus.

A derivator g on a finite window [A, B] is stored as a continuous
piecewise-linear part (breakpoints + values) plus a finite sorted list of
jump atoms, with the left-continuous convention

    g(t) = gC(t) + sum of deltas over jump points strictly left of t.

All structural identities (splits, pseudoinverse laws, interval measures)
are exact on this class up to float rounding.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DuplicateJump,
    InputError,
    JumpOutOfWindow,
    NonMonotone,
    NonPositiveJump,
    OutOfRange,
    OutOfWindow,
    OverlappingIntervals,
)

__all__ = [
    "Derivator",
    "PointClassification",
    "Pseudoinverse",
    "build_derivator",
    "pseudoinverse",
]


def _as_float_array(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise InputError(f"{name} must be one-dimensional")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} must be finite")
    return arr


@dataclass(frozen=True)
class PointClassification:
    """Jump set, constancy intervals and their non-jump endpoints."""

    jump_points: tuple[float, ...]
    constancy_intervals: tuple[tuple[float, float], ...]
    n_minus: tuple[float, ...]
    n_plus: tuple[float, ...]

    def to_dict(self) -> dict:
        return {
            "jump_points": list(self.jump_points),
            "constancy_intervals": [list(iv) for iv in self.constancy_intervals],
            "n_minus": list(self.n_minus),
            "n_plus": list(self.n_plus),
        }


@dataclass(frozen=True)
class Pseudoinverse:
    """Min-preimage inverse of a jump-free derivator.

    Left-continuous and strictly increasing on its domain; on the image of
    a flat piece it returns the flat piece's left endpoint.
    """

    x_values: np.ndarray  # continuous-part values at breakpoints
    t_values: np.ndarray  # breakpoints

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.x_values[0]), float(self.x_values[-1])

    def __call__(self, x):
        return self.eval(x)

    def eval(self, x):
        xs, ts = self.x_values, self.t_values
        arr = np.asarray(x, dtype=float)
        scalar = arr.ndim == 0
        pts = np.atleast_1d(arr)
        lo, hi = self.domain
        slack = 1e-12 * (1.0 + hi - lo)
        if np.any(pts < lo - slack) or np.any(pts > hi + slack):
            raise OutOfRange(
                f"pseudoinverse argument outside range [{lo}, {hi}]"
            )
        pts = np.clip(pts, lo, hi)
        # first index with xs[j] >= x; on exact hits this is the first
        # breakpoint attaining the value, i.e. the min preimage
        j = np.searchsorted(xs, pts, side="left")
        j = np.minimum(j, len(xs) - 1)
        out = np.empty_like(pts)
        exact = xs[j] == pts
        out[exact] = ts[j[exact]]
        rest = ~exact
        if np.any(rest):
            jr = j[rest]
            # xs[jr-1] < x < xs[jr]: invert the rising segment
            x0, x1 = xs[jr - 1], xs[jr]
            t0, t1 = ts[jr - 1], ts[jr]
            out[rest] = t0 + (pts[rest] - x0) * (t1 - t0) / (x1 - x0)
        return float(out[0]) if scalar else out


def gamma_eval(gamma: Pseudoinverse, x):
    """Evaluate a pseudoinverse (free-function form of ``gamma.eval``)."""
    return gamma.eval(x)


@dataclass(frozen=True)
class Derivator:
    """Monotone left-continuous function on a finite window.

    ``breakpoints``/``cont_values`` define the continuous part by linear
    interpolation; ``jump_points``/``jump_deltas`` are the atoms.
    ``tail_bound`` is declared mass of any jumps that were truncated away
    when the derivator was produced from richer data (0 means exact,
    None means unknown).
    """

    breakpoints: np.ndarray
    cont_values: np.ndarray
    jump_points: np.ndarray
    jump_deltas: np.ndarray
    tail_bound: float | None = 0.0

    def __post_init__(self):
        bp = _as_float_array(self.breakpoints, "breakpoints")
        cv = _as_float_array(self.cont_values, "cont_values")
        jp = _as_float_array(self.jump_points, "jump_points")
        jd = _as_float_array(self.jump_deltas, "jump_deltas")
        if bp.size < 2:
            raise InputError("need at least two breakpoints")
        if bp.size != cv.size:
            raise InputError("breakpoints and cont_values must match in length")
        if np.any(np.diff(bp) <= 0):
            raise InputError("breakpoints must be strictly increasing")
        if np.any(np.diff(cv) < 0):
            i = int(np.argmax(np.diff(cv) < 0))
            raise NonMonotone(
                f"cont_values decrease between breakpoints {bp[i]} and {bp[i + 1]}"
            )
        if jp.size != jd.size:
            raise InputError("jump positions and deltas must match in length")
        order = np.argsort(jp, kind="stable")
        jp, jd = jp[order], jd[order]
        if np.any(jd <= 0):
            d = jp[int(np.argmax(jd <= 0))]
            raise NonPositiveJump(f"jump at {d} has non-positive size")
        if jp.size and (jp[0] < bp[0] or jp[-1] >= bp[-1]):
            bad = jp[(jp < bp[0]) | (jp >= bp[-1])][0]
            raise JumpOutOfWindow(
                f"jump at {bad} outside half-open window [{bp[0]}, {bp[-1]})"
            )
        if jp.size > 1 and np.any(np.diff(jp) == 0):
            d = jp[int(np.argmax(np.diff(jp) == 0))]
            raise DuplicateJump(f"duplicate jump position {d}")
        bp.setflags(write=False)
        cv.setflags(write=False)
        jp.setflags(write=False)
        jd.setflags(write=False)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "cont_values", cv)
        object.__setattr__(self, "jump_points", jp)
        object.__setattr__(self, "jump_deltas", jd)

    # -- basic geometry ----------------------------------------------------

    @property
    def window(self) -> tuple[float, float]:
        return float(self.breakpoints[0]), float(self.breakpoints[-1])

    @property
    def jumps(self) -> tuple[tuple[float, float], ...]:
        return tuple(zip(self.jump_points.tolist(), self.jump_deltas.tolist()))

    @cached_property
    def _cum_deltas(self) -> np.ndarray:
        # prefix[i] = total jump mass of the first i atoms
        return np.concatenate(([0.0], np.cumsum(self.jump_deltas)))

    @cached_property
    def total_variation(self) -> float:
        return float(
            self.cont_values[-1] - self.cont_values[0] + self._cum_deltas[-1]
        )

    def _check_window(self, t: np.ndarray) -> np.ndarray:
        a, b = self.window
        slack = 1e-12 * (1.0 + b - a)
        if np.any(t < a - slack) or np.any(t > b + slack):
            bad = t[(t < a - slack) | (t > b + slack)].flat[0]
            raise OutOfWindow(f"point {bad} outside window [{a}, {b}]")
        return np.clip(t, a, b)

    # -- evaluation ---------------------------------------------------------

    def eval_cont(self, t):
        """Continuous part gC(t) (not anchored; equals stored values)."""
        arr = np.asarray(t, dtype=float)
        pts = self._check_window(np.atleast_1d(arr))
        out = np.interp(pts, self.breakpoints, self.cont_values)
        return float(out[0]) if arr.ndim == 0 else out

    def eval(self, t):
        """Left-continuous value g(t) = gC(t) + sum of deltas left of t."""
        arr = np.asarray(t, dtype=float)
        pts = self._check_window(np.atleast_1d(arr))
        cont = np.interp(pts, self.breakpoints, self.cont_values)
        idx = np.searchsorted(self.jump_points, pts, side="left")
        out = cont + self._cum_deltas[idx]
        return float(out[0]) if arr.ndim == 0 else out

    __call__ = eval

    def delta(self, t):
        """Jump size at t (0 off the jump set)."""
        arr = np.asarray(t, dtype=float)
        pts = self._check_window(np.atleast_1d(arr))
        idx = np.searchsorted(self.jump_points, pts, side="left")
        idx = np.minimum(idx, max(len(self.jump_points) - 1, 0))
        out = np.zeros_like(pts)
        if self.jump_points.size:
            hit = self.jump_points[idx] == pts
            out[hit] = self.jump_deltas[idx[hit]]
        return float(out[0]) if arr.ndim == 0 else out

    def eval_right(self, t):
        """Right limit g(t+) = g(t) + delta(t); needs t < B."""
        arr = np.asarray(t, dtype=float)
        b = self.window[1]
        if np.any(np.atleast_1d(arr) >= b):
            raise OutOfWindow(f"right limit requires t < {b}")
        out = self.eval(arr) + self.delta(arr)
        return out

    # -- structure ----------------------------------------------------------

    def split(self) -> tuple["Derivator", "Derivator"]:
        """Continuous and jump parts, both vanishing at the left endpoint."""
        g_c = Derivator(
            self.breakpoints,
            self.cont_values - self.cont_values[0],
            np.empty(0),
            np.empty(0),
            tail_bound=0.0,
        )
        a, b = self.window
        g_b = Derivator(
            np.array([a, b]),
            np.array([0.0, 0.0]),
            self.jump_points,
            self.jump_deltas,
            tail_bound=self.tail_bound,
        )
        return g_c, g_b

    @cached_property
    def _split(self) -> tuple["Derivator", "Derivator"]:
        return self.split()

    def classify(self) -> PointClassification:
        """Jump set, maximal constancy intervals and their N- / N+ sets.

        Constancy intervals are flat runs of the continuous part with
        interior jump atoms removed; window endpoints are never reported
        in N- / N+ (conservative boundary convention).
        """
        bp, cv, jp = self.breakpoints, self.cont_values, self.jump_points
        a, b = self.window
        intervals: list[tuple[float, float]] = []
        flat = np.diff(cv) == 0
        i = 0
        while i < len(flat):
            if flat[i]:
                j = i
                while j + 1 < len(flat) and flat[j + 1]:
                    j += 1
                lo, hi = float(bp[i]), float(bp[j + 1])
                interior = jp[(jp > lo) & (jp < hi)]
                cuts = [lo, *interior.tolist(), hi]
                for k in range(len(cuts) - 1):
                    if cuts[k] < cuts[k + 1]:
                        intervals.append((cuts[k], cuts[k + 1]))
                i = j + 1
            else:
                i += 1
        jumps = set(jp.tolist())
        n_minus = sorted(
            {lo for lo, _ in intervals} - jumps - {a, b}
        )
        n_plus = sorted(
            {hi for _, hi in intervals} - jumps - {a, b}
        )
        return PointClassification(
            jump_points=tuple(jp.tolist()),
            constancy_intervals=tuple(intervals),
            n_minus=tuple(n_minus),
            n_plus=tuple(n_plus),
        )

    @cached_property
    def _classification(self) -> PointClassification:
        return self.classify()

    def measure(self, intervals: Iterable[tuple[float, float]]) -> float:
        """mu_g of a finite union of pairwise-disjoint half-open [c, d)."""
        ivs = sorted((float(c), float(d)) for c, d in intervals)
        total = 0.0
        prev_end = None
        for c, d in ivs:
            if d < c:
                raise InputError(f"interval [{c}, {d}) has negative length")
            a, b = self.window
            if c < a or d > b:
                raise OutOfWindow(f"interval [{c}, {d}) outside window [{a}, {b}]")
            if prev_end is not None and c < prev_end:
                raise OverlappingIntervals(
                    f"interval starting at {c} overlaps previous one"
                )
            prev_end = d
            total += self.eval(d) - self.eval(c)
        return float(total)

    def pseudoinverse(self) -> Pseudoinverse:
        """Pseudoinverse of this derivator; requires a jump-free derivator."""
        if self.jump_points.size:
            raise InputError(
                "pseudoinverse is defined for the jump-free continuous part; "
                "split() first"
            )
        return Pseudoinverse(self.cont_values.copy(), self.breakpoints.copy())

    @cached_property
    def _gamma(self) -> Pseudoinverse:
        # pseudoinverse of the continuous part (valid for any derivator)
        return Pseudoinverse(self.cont_values.copy(), self.breakpoints.copy())

    # -- serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        a, b = self.window
        return {
            "window": [a, b],
            "breakpoints": self.breakpoints.tolist(),
            "cont_values": self.cont_values.tolist(),
            "jumps": [[d, s] for d, s in self.jumps],
            "tail_bound": self.tail_bound,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Derivator":
        unknown = set(data) - {
            "window",
            "breakpoints",
            "cont_values",
            "jumps",
            "tail_bound",
        }
        if unknown:
            raise InputError(f"unknown derivator keys: {sorted(unknown)}")
        try:
            bp = data["breakpoints"]
            cv = data["cont_values"]
        except KeyError as exc:
            raise InputError(f"derivator spec missing key {exc}") from exc
        jumps = data.get("jumps", [])
        jp = [j[0] for j in jumps]
        jd = [j[1] for j in jumps]
        g = cls(
            np.asarray(bp, float),
            np.asarray(cv, float),
            np.asarray(jp, float),
            np.asarray(jd, float),
            tail_bound=data.get("tail_bound", 0.0),
        )
        win = data.get("window")
        if win is not None and (win[0] != g.window[0] or win[1] != g.window[1]):
            raise InputError(
                f"declared window {win} does not match breakpoints {list(g.window)}"
            )
        return g


def build_derivator(
    breakpoints: Sequence[float],
    cont_values: Sequence[float],
    jumps: Iterable[tuple[float, float]] = (),
    tail_bound: float | None = 0.0,
) -> Derivator:
    """Validate and build a derivator from its piecewise-linear spec."""
    jumps = list(jumps)
    jp = np.asarray([d for d, _ in jumps], dtype=float)
    jd = np.asarray([s for _, s in jumps], dtype=float)
    return Derivator(
        np.asarray(breakpoints, dtype=float),
        np.asarray(cont_values, dtype=float),
        jp,
        jd,
        tail_bound=tail_bound,
    )


def pseudoinverse(g_c: Derivator) -> Pseudoinverse:
    """Pseudoinverse of a jump-free derivator (module-level form)."""
    return g_c.pseudoinverse()
