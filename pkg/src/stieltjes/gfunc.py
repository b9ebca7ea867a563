"""Function-space analytics through the pseudometric |g(t) - g(s)|.

Moduli of g-continuity, regulatedness via right limits at the jump set,
the constructive factorization f = tilde_f ∘ g, and polynomial
approximation in the g variable.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .calculus import GFunction, estimate_right_limit
from .derivator import Derivator
from .errors import (
    IllConditioned,
    InputError,
    NotRegulated,
    NotUniform,
    ReconstructionError,
)
from .grids import sampling_grid

__all__ = [
    "ModulusReport",
    "FactorizationResult",
    "WeierstrassFit",
    "g_modulus",
    "right_limit_table",
    "is_regulated",
    "factorize",
    "weierstrass_fit",
]


@dataclass(frozen=True)
class ModulusReport:
    """Sampled moduli of (uniform) g-continuity for a family.

    omega[k] = sup over sampled pairs with g-distance < deltas[k] of the
    worst member oscillation; pointwise[i, k] restricts the sup to pairs
    anchored at grid[i].
    """

    deltas: np.ndarray
    omega: np.ndarray
    grid: np.ndarray
    pointwise: np.ndarray  # shape (len(grid), len(deltas))
    labels: tuple[str, ...]

    def uniform_delta_for(self, eps: float) -> float | None:
        """Largest grid delta whose modulus is below eps (None if none)."""
        ok = np.nonzero(self.omega < eps)[0]
        return float(self.deltas[ok[-1]]) if ok.size else None

    def to_dict(self) -> dict:
        return {
            "deltas": self.deltas.tolist(),
            "omega": self.omega.tolist(),
            "grid_size": int(len(self.grid)),
            "labels": list(self.labels),
        }


def _family(fs) -> list[GFunction]:
    if isinstance(fs, GFunction):
        return [fs]
    fam = list(fs)
    if not fam:
        raise InputError("empty function family")
    return fam


def g_modulus(
    fs,
    g: Derivator,
    delta_grid: Sequence[float],
    sample_n: int = 201,
    extra=(),
) -> ModulusReport:
    """Measure omega(delta) over all sampled pairs (family sup)."""
    fam = _family(fs)
    deltas = np.asarray(sorted(float(d) for d in delta_grid))
    if deltas.size == 0 or np.any(deltas <= 0):
        raise InputError("delta_grid must contain positive values")
    kinks: list[float] = list(extra)
    for f in fam:
        kinks.extend(f.kinks)
    grid = sampling_grid(g, n=sample_n, extra=kinks)
    gv = g.eval(grid)
    gdist = np.abs(gv[:, None] - gv[None, :])
    fdiff = np.zeros_like(gdist)
    for f in fam:
        vals = f.at(grid)
        np.maximum(fdiff, np.abs(vals[:, None] - vals[None, :]), out=fdiff)
    omega = np.empty(len(deltas))
    pointwise = np.empty((len(grid), len(deltas)))
    for k, dl in enumerate(deltas):
        mask = gdist < dl
        masked = np.where(mask, fdiff, 0.0)
        pointwise[:, k] = masked.max(axis=1)
        omega[k] = pointwise[:, k].max()
    return ModulusReport(
        deltas=deltas,
        omega=omega,
        grid=grid,
        pointwise=pointwise,
        labels=tuple(f.label for f in fam),
    )


def right_limit_table(
    f: GFunction, g: Derivator, tol: float = 1e-8
) -> dict[float, float | None]:
    """Right limits at every jump point; None marks a failed limit."""
    table: dict[float, float | None] = {}
    for d in g.jump_points:
        est = estimate_right_limit(f, g, float(d), tol=tol)
        table[float(d)] = est.value if est.converged else None
    return table


def is_regulated(
    f: GFunction, g: Derivator, tol: float = 1e-8
) -> tuple[bool, list[float]]:
    """True when every jump point admits a right limit (witnesses else)."""
    table = right_limit_table(f, g, tol=tol)
    witnesses = [d for d, v in table.items() if v is None]
    return (not witnesses), witnesses


@dataclass(frozen=True)
class FactorizationResult:
    """Piecewise-linear tilde_f with tilde_f ∘ g = f on the window."""

    tilde_x: np.ndarray
    tilde_y: np.ndarray
    sigma_table: np.ndarray  # columns (x, sigma(x))
    gap_list: tuple[tuple[float, float], ...]
    recon_error: float
    domain: tuple[float, float]

    def tilde_f(self, x):
        return np.interp(x, self.tilde_x, self.tilde_y)

    def __call__(self, x):
        return self.tilde_f(x)


def factorize(
    f: GFunction,
    g: Derivator,
    recon_tol: float = 1e-9,
    sample_n: int = 20001,
    unif_tol: float | None = None,
) -> FactorizationResult:
    """Factor f through g: build tilde_f with tilde_f(g(t)) = f(t).

    Requires f regulated (right limits at every jump) and uniformly
    g-continuous at finite scale: samples at g-distance ~0 must carry
    f-oscillation below unif_tol. Gaps in the g-range (jump gaps and
    beyond-range) are filled by straight lines, keeping tilde_f continuous.
    """
    if unif_tol is None:
        unif_tol = max(1e-7, 10.0 * recon_tol)
    rl = right_limit_table(f, g, tol=min(1e-9, recon_tol))
    bad = [d for d, v in rl.items() if v is None]
    if bad:
        raise NotRegulated(f"no right limit at jump point(s) {bad}")

    ts = sampling_grid(g, n=sample_n, extra=f.kinks)
    xs = g.eval(ts)
    ys = f.at(ts)

    # finite-scale uniformity: clusters of (near-)equal g-value must be flat
    span = 1.0 + float(xs[-1] - xs[0])
    eps_x = 1e-12 * span
    cluster_start = 0
    for i in range(1, len(xs) + 1):
        if i == len(xs) or xs[i] - xs[i - 1] > eps_x:
            osc = float(ys[cluster_start:i].max() - ys[cluster_start:i].min())
            if osc > unif_tol:
                t_lo = ts[cluster_start]
                raise NotUniform(
                    f"oscillation {osc:.3e} across samples at g-distance ~0 "
                    f"near t={t_lo}"
                )
            cluster_start = i

    # collapse duplicates: keep the latest t per x (sigma = sup preimage)
    keep = np.concatenate([np.diff(xs) > eps_x, [True]])
    tab_x, tab_y, tab_t = xs[keep], ys[keep], ts[keep]

    # insert the right-limit endpoint of each jump gap
    gaps = []
    add_x, add_y = [], []
    for d, dlt in g.jumps:
        x_lo = g.eval(d)
        x_hi = x_lo + dlt
        gaps.append((float(x_lo), float(x_hi)))
        if not np.any(np.abs(tab_x - x_hi) <= eps_x):
            add_x.append(x_hi)
            add_y.append(rl[float(d)])
    if add_x:
        tab_x = np.concatenate([tab_x, add_x])
        tab_y = np.concatenate([tab_y, add_y])
        tab_t = np.concatenate([tab_t, np.full(len(add_x), np.nan)])
        order = np.argsort(tab_x, kind="stable")
        tab_x, tab_y, tab_t = tab_x[order], tab_y[order], tab_t[order]

    pad = 0.05 * span
    domain = (float(tab_x[0] - pad), float(tab_x[-1] + pad))

    # validate on construction points and on fresh midpoints
    mids = 0.5 * (ts[:-1] + ts[1:])
    check_ts = np.unique(np.concatenate([ts, mids]))
    recon = np.interp(g.eval(check_ts), tab_x, tab_y)
    err = float(np.max(np.abs(recon - f.at(check_ts))))
    if err > recon_tol:
        raise ReconstructionError(
            f"reconstruction error {err:.3e} exceeds {recon_tol:.1e}"
        )
    return FactorizationResult(
        tilde_x=tab_x,
        tilde_y=tab_y,
        sigma_table=np.column_stack([tab_x, tab_t]),
        gap_list=tuple(gaps),
        recon_error=err,
        domain=domain,
    )


@dataclass(frozen=True)
class WeierstrassFit:
    """Polynomial in the g variable fitted to samples of f."""

    coefficients: np.ndarray  # ascending powers of x = g(t)
    sup_error: float
    degree: int
    method: str

    def poly(self, x):
        return np.polynomial.polynomial.polyval(np.asarray(x, float), self.coefficients)


def weierstrass_fit(
    f: GFunction,
    g: Derivator,
    degree: int,
    sample_n: int = 2001,
    method: str = "lstsq",
) -> WeierstrassFit:
    """Fit a degree-``degree`` polynomial p with p(g(t)) ~ f(t).

    Chebyshev basis over the sampled g-range avoids Vandermonde blowup;
    plain monomial coefficients are returned. ``method`` is "lstsq" or
    "cheb-interp" (interpolation at Chebyshev nodes of the sample hull).
    """
    if degree < 0:
        raise InputError("degree must be non-negative")
    ts = sampling_grid(g, n=sample_n, extra=f.kinks)
    xs = g.eval(ts)
    ys = f.at(ts)
    x_lo, x_hi = float(xs.min()), float(xs.max())
    distinct = np.unique(np.round(xs, 14))
    if distinct.size <= degree:
        raise IllConditioned(
            f"{distinct.size} distinct g-values cannot determine degree "
            f"{degree}"
        )
    if x_hi - x_lo <= 1e-14 * (1.0 + abs(x_hi)):
        raise IllConditioned("g-range degenerate; only degree 0 is determined")
    if method == "lstsq":
        xhat = (2.0 * xs - (x_lo + x_hi)) / (x_hi - x_lo)
        design = np.polynomial.chebyshev.chebvander(xhat, degree)
        coef, _, rank, _ = np.linalg.lstsq(design, ys, rcond=None)
        if rank < degree + 1:
            raise IllConditioned(
                f"fit rank {rank} below {degree + 1}; degree too high for "
                "the sample spread"
            )
        cheb = np.polynomial.Chebyshev(coef, domain=[x_lo, x_hi])
    elif method == "cheb-interp":
        k = np.arange(degree + 1)
        nodes = np.cos(np.pi * (2 * k + 1) / (2 * (degree + 1)))
        x_nodes = 0.5 * (x_lo + x_hi) + 0.5 * (x_hi - x_lo) * nodes
        order = np.argsort(xs, kind="stable")
        y_nodes = np.interp(x_nodes, xs[order], ys[order])
        cheb = np.polynomial.Chebyshev.fit(
            x_nodes, y_nodes, degree, domain=[x_lo, x_hi]
        )
    else:
        raise InputError(f"unknown fit method {method!r}")
    poly = cheb.convert(kind=np.polynomial.Polynomial)
    coeffs = np.zeros(degree + 1)
    coeffs[: len(poly.coef)] = poly.coef
    sup_error = float(
        np.max(np.abs(np.polynomial.polynomial.polyval(xs, coeffs) - ys))
    )
    return WeierstrassFit(
        coefficients=coeffs, sup_error=sup_error, degree=degree, method=method
    )
