"""Sampling grids shared by moduli, norms and certificates.

Grids always contain the structural points of the derivator (breakpoints,
jump atoms, constancy endpoints) plus caller extras; optionally they are
refined geometrically just right of each jump so that right-limit behavior
is visible to pairwise g-distance checks.
"""
from __future__ import annotations

import numpy as np

from .derivator import Derivator


def special_points(g: Derivator, extra=()) -> np.ndarray:
    """Breakpoints, jump points, constancy endpoints and extras, sorted."""
    cls = g._classification
    pts = [g.breakpoints, g.jump_points, np.asarray(extra, dtype=float)]
    for lo, hi in cls.constancy_intervals:
        pts.append(np.array([lo, hi]))
    a, b = g.window
    merged = np.unique(np.concatenate([p.ravel() for p in pts if p.size]))
    return merged[(merged >= a) & (merged <= b)]


def right_cluster(g: Derivator, d: float, depth: int = 40) -> np.ndarray:
    """Points d + eta*2^-j approaching d from the right, inside the window."""
    a, b = g.window
    specials = special_points(g)
    beyond = specials[specials > d]
    gap = (beyond[0] - d) if beyond.size else (b - d)
    if gap <= 0:
        return np.empty(0)
    eta = 0.5 * gap
    pts = d + eta * np.power(0.5, np.arange(depth, dtype=float))
    return pts[(pts > d) & (pts <= b)]


def sampling_grid(
    g: Derivator,
    n: int = 257,
    extra=(),
    right_clusters: bool = True,
    cluster_depth: int = 40,
) -> np.ndarray:
    """Evaluation grid: uniform n points + structural points (+ clusters)."""
    a, b = g.window
    parts = [np.linspace(a, b, max(int(n), 2)), special_points(g, extra)]
    if right_clusters:
        for d in g.jump_points:
            parts.append(right_cluster(g, float(d), depth=cluster_depth))
    return np.unique(np.concatenate(parts))
