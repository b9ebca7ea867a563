"""Shared fixtures and random generators for the test suite."""
from __future__ import annotations

import numpy as np

from stieltjes.calculus import GFunction, SobolevFunction
from stieltjes.derivator import Derivator, build_derivator


def g1() -> Derivator:
    """Reference fixture: window [-1, 2], flat on [0.5, 1], unit jump at 0."""
    return build_derivator(
        breakpoints=[-1.0, 0.5, 1.0, 2.0],
        cont_values=[-1.0, 0.5, 0.5, 1.5],
        jumps=[(0.0, 1.0)],
    )


def unit_jump_line(window=(-1.0, 1.0)) -> Derivator:
    """g(t) = t plus a unit jump at 0 (the sin(1/t) counterexample driver)."""
    a, b = window
    return build_derivator([a, b], [a, b], jumps=[(0.0, 1.0)])


def sin_recip() -> GFunction:
    """f(t) = t for t <= 0, sin(1/t) for t > 0: no right limit at 0."""

    def ev(t):
        t = np.asarray(t, dtype=float)
        out = np.where(t > 0, np.sin(1.0 / np.where(t > 0, t, 1.0)), t)
        return out if out.ndim else float(out)

    return GFunction(evaluator=ev, label="sin(1/t)", kinks=(0.0,))


def random_derivator(
    rng: np.random.Generator,
    max_segments: int = 5,
    max_jumps: int = 4,
    allow_flats: bool = True,
) -> Derivator:
    """Random piecewise-linear derivator with a few atoms; mu_g > 0."""
    a = float(rng.uniform(-2.0, 0.0))
    width = float(rng.uniform(0.8, 3.0))
    b = a + width
    n_seg = int(rng.integers(1, max_segments + 1))
    bp = np.sort(rng.uniform(a, b, size=max(n_seg - 1, 0)))
    bp = np.unique(np.concatenate([[a], bp, [b]]))
    while np.any(np.diff(bp) < 1e-3):
        keep = np.concatenate([[True], np.diff(bp) >= 1e-3])
        bp = bp[keep]
    slopes = rng.uniform(0.0, 2.0, size=len(bp) - 1)
    if allow_flats:
        flat_mask = rng.random(len(slopes)) < 0.3
        slopes[flat_mask] = 0.0
    if np.all(slopes == 0.0):
        slopes[int(rng.integers(0, len(slopes)))] = float(rng.uniform(0.5, 2.0))
    cv = np.concatenate([[0.0], np.cumsum(slopes * np.diff(bp))])
    n_jump = int(rng.integers(0, max_jumps + 1))
    positions: list[float] = []
    lo = a + 0.05 * width
    hi = b - 0.05 * width
    for _ in range(n_jump):
        d = float(rng.uniform(lo, hi))
        if all(abs(d - q) > 1e-3 for q in positions):
            positions.append(d)
    jumps = [(d, float(rng.uniform(0.1, 1.5))) for d in sorted(positions)]
    return build_derivator(bp, cv, jumps)


def random_piecewise_poly(
    rng: np.random.Generator,
    g: Derivator,
    max_pieces: int = 3,
    max_degree: int = 3,
    continuous: bool = True,
) -> GFunction:
    """Random piecewise polynomial on the window; kinks declared."""
    a, b = g.window
    n_cuts = int(rng.integers(0, max_pieces))
    cuts = np.sort(rng.uniform(a, b, size=n_cuts))
    edges = np.unique(np.concatenate([[a], cuts, [b]]))
    coeffs = []
    for _ in range(len(edges) - 1):
        deg = int(rng.integers(0, max_degree + 1))
        coeffs.append(rng.uniform(-2.0, 2.0, size=deg + 1))
    offsets = np.zeros(len(coeffs))
    if continuous:
        # shift each piece so the values match at the cut points
        for i in range(1, len(coeffs)):
            x = edges[i]
            left = np.polynomial.polynomial.polyval(x, coeffs[i - 1]) + offsets[i - 1]
            right = np.polynomial.polynomial.polyval(x, coeffs[i])
            offsets[i] = left - right

    edges_arr = edges.copy()
    coeff_list = [np.asarray(c) for c in coeffs]
    off_arr = offsets.copy()

    def ev(t):
        t = np.asarray(t, dtype=float)
        idx = np.clip(
            np.searchsorted(edges_arr, t, side="right") - 1, 0, len(coeff_list) - 1
        )
        out = np.empty(t.shape if t.ndim else (1,))
        flat_t = np.atleast_1d(t)
        flat_i = np.atleast_1d(idx)
        for k in range(len(coeff_list)):
            m = flat_i == k
            if m.any():
                out[m] = (
                    np.polynomial.polynomial.polyval(flat_t[m], coeff_list[k])
                    + off_arr[k]
                )
        return out if t.ndim else float(out[0])

    inner = tuple(float(x) for x in edges_arr[1:-1])
    return GFunction(evaluator=ev, label="pw-poly", kinks=inner)


def random_sobolev(
    rng: np.random.Generator, g: Derivator, interval=None
) -> SobolevFunction:
    density = random_piecewise_poly(rng, g, continuous=True)
    return SobolevFunction(
        base_value=float(rng.uniform(-1.0, 1.0)),
        density=density,
        interval=interval,
    )
