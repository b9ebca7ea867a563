"""Finite-scale certificates for compactness criteria.

Certificates never prove compactness: they evaluate the necessary
conditions of each criterion on a finite grid at caller thresholds and
report the measured quantities. Every certificate carries
finite_scale=True and reproduces deterministically from its inputs.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .calculus import (
    GFunction,
    _integral_continuous,
    estimate_right_limit,
    integrate,
    lp_norm,
)
from .decompose import jump_series
from .derivator import Derivator
from .errors import (
    EmptyFamily,
    InputError,
    MissingTailBound,
    NoRightLimit,
    NotDecomposable,
)
from .grids import right_cluster, sampling_grid

__all__ = [
    "FamilySample",
    "Condition",
    "Certificate",
    "default_delta_grid",
    "bc_diagnose",
    "buc_diagnose",
    "lp_seq_diagnose",
    "lp_diagnose",
    "dc_diagnose",
    "epsilon_net",
    "NetResult",
    "family_distance",
]


# ---------------------------------------------------------------------------
# containers


@dataclass
class FamilySample:
    """Family of functions with a shared sampling grid and tail metadata."""

    members: list[GFunction]
    grid: np.ndarray
    metadata: dict = field(default_factory=dict)

    @classmethod
    def build(
        cls,
        members: Iterable[GFunction],
        g: Derivator,
        sample_n: int = 201,
        extra=(),
        metadata: dict | None = None,
        right_clusters: bool = False,
    ) -> "FamilySample":
        members = list(members)
        if not members:
            raise EmptyFamily("family has no members")
        kinks: list[float] = list(extra)
        for f in members:
            kinks.extend(f.kinks)
        grid = sampling_grid(
            g, n=sample_n, extra=kinks, right_clusters=right_clusters
        )
        return cls(members=members, grid=grid, metadata=dict(metadata or {}))

    def values(self, threads: int = 1) -> np.ndarray:
        """Member values on the grid, shape (members, grid)."""
        return np.vstack(_map(lambda f: f.at(self.grid), self.members, threads))


@dataclass(frozen=True)
class Condition:
    cid: str
    verdict: str  # "pass" | "fail" | "inconclusive"
    measured: dict
    witness: str | None = None

    def to_dict(self) -> dict:
        out = {"id": self.cid, "verdict": self.verdict, "measured": self.measured}
        if self.witness is not None:
            out["witness"] = self.witness
        return out


@dataclass(frozen=True)
class Certificate:
    criterion: str
    conditions: tuple[Condition, ...]
    params: dict
    overall: str
    grid_meta: dict
    finite_scale: bool = True

    def to_dict(self) -> dict:
        return {
            "criterion": self.criterion,
            "conditions": [c.to_dict() for c in self.conditions],
            "params": self.params,
            "overall": self.overall,
            "grid_meta": self.grid_meta,
            "finite_scale": self.finite_scale,
        }


def _overall(conditions: Sequence[Condition]) -> str:
    verdicts = [c.verdict for c in conditions]
    if any(v == "fail" for v in verdicts):
        return "fail"
    if any(v == "inconclusive" for v in verdicts):
        return "inconclusive"
    return "pass"


def _map(fn: Callable, items: Sequence, threads: int) -> list:
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def default_delta_grid(g: Derivator, n: int = 12) -> np.ndarray:
    scale = max(g.total_variation, 1e-8)
    return scale * np.geomspace(1e-5, 0.5, n)


# ---------------------------------------------------------------------------
# shared condition builders


def _boundedness_condition(vals: np.ndarray) -> Condition:
    worst = float(np.max(np.abs(vals))) if vals.size else 0.0
    ok = bool(np.all(np.isfinite(vals)))
    return Condition(
        cid="pointwise-bounded",
        verdict="pass" if ok else "fail",
        measured={"sup": worst},
    )


def _stability_points(
    g: Derivator, d: float, delta: float, grid: np.ndarray, cap: int = 160
) -> np.ndarray:
    hi = min(d + delta, g.window[1])
    parts = [
        np.linspace(d, hi, 48, endpoint=False),
        right_cluster(g, d),
        grid,
        np.array([d]),
    ]
    pts = np.unique(np.concatenate(parts))
    pts = pts[(pts >= d) & (pts < hi)]
    if len(pts) > cap:
        idx = np.linspace(0, len(pts) - 1, cap).astype(int)
        pts = pts[np.unique(idx)]
    return pts


def _greedy_covering(
    member_vals: np.ndarray, order: np.ndarray, eps: float, cap: int
) -> int | None:
    """First-fit covering size with per-class member oscillation < eps.

    member_vals has shape (members, points); order gives the insertion
    sequence (by sorted g-value). Returns the class count, or None when
    the cap is exceeded.
    """
    mins: list[np.ndarray] = []
    maxs: list[np.ndarray] = []
    for j in order:
        v = member_vals[:, j]
        placed = False
        for k in range(len(mins)):
            if np.all(np.maximum(maxs[k], v) - np.minimum(mins[k], v) < eps):
                maxs[k] = np.maximum(maxs[k], v)
                mins[k] = np.minimum(mins[k], v)
                placed = True
                break
        if not placed:
            if len(mins) + 1 > cap:
                return None
            mins.append(v.copy())
            maxs.append(v.copy())
    return len(mins)


def _stability_condition(
    S: FamilySample,
    g: Derivator,
    eps: float,
    delta_grid: np.ndarray,
    osc_cap: int,
    threads: int,
) -> Condition:
    per_atom: dict[str, int | None] = {}
    witness = None
    for d in g.jump_points:
        d = float(d)
        best: int | None = None
        for delta in delta_grid:
            pts = _stability_points(g, d, float(delta), S.grid)
            if pts.size == 0:
                continue
            gv = g.eval(pts)
            order = np.argsort(gv, kind="stable")
            vals = np.vstack(_map(lambda f: f.at(pts), S.members, threads))
            size = _greedy_covering(vals, order, eps, osc_cap)
            if size is not None and (best is None or size < best):
                best = size
        per_atom[repr(d)] = best
        if best is None and witness is None:
            witness = f"jump {d}: no covering within cap {osc_cap}"
    ok = all(v is not None for v in per_atom.values())
    return Condition(
        cid="g-stable",
        verdict="pass" if ok else "fail",
        measured={"covering_sizes": per_atom, "cap": osc_cap},
        witness=witness,
    )


def _pair_moduli(
    S: FamilySample, g: Derivator, delta_grid: np.ndarray, threads: int
) -> tuple[np.ndarray, np.ndarray]:
    """Family omega(delta) and pointwise moduli on the shared grid."""
    gv = g.eval(S.grid)
    gdist = np.abs(gv[:, None] - gv[None, :])
    fdiff = np.zeros_like(gdist)
    for vals in _map(lambda f: f.at(S.grid), S.members, threads):
        np.maximum(fdiff, np.abs(vals[:, None] - vals[None, :]), out=fdiff)
    omega = np.empty(len(delta_grid))
    pointwise = np.empty((len(S.grid), len(delta_grid)))
    for k, dl in enumerate(delta_grid):
        masked = np.where(gdist < dl, fdiff, 0.0)
        pointwise[:, k] = masked.max(axis=1)
        omega[k] = pointwise[:, k].max()
    return omega, pointwise


# ---------------------------------------------------------------------------
# diagnoses


def bc_diagnose(
    S: FamilySample,
    g: Derivator,
    eps: float,
    delta_grid=None,
    osc_cap: int = 64,
    threads: int = 1,
) -> Certificate:
    """Bounded + g-equicontinuous + g-stable at finite scale."""
    if not S.members:
        raise EmptyFamily("family has no members")
    deltas = (
        np.asarray(sorted(float(x) for x in delta_grid))
        if delta_grid is not None
        else default_delta_grid(g)
    )
    vals = S.values(threads)
    cond1 = _boundedness_condition(vals)
    _, pointwise = _pair_moduli(S, g, deltas, threads)
    best_pointwise = pointwise.min(axis=1)
    bad = np.nonzero(best_pointwise >= eps)[0]
    cond2 = Condition(
        cid="g-equicontinuous",
        verdict="pass" if bad.size == 0 else "fail",
        measured={
            "worst_pointwise_modulus": float(best_pointwise.max()),
            "eps": eps,
        },
        witness=(
            f"t={float(S.grid[bad[0]])}: modulus "
            f"{float(best_pointwise[bad[0]]):.4g} >= eps"
            if bad.size
            else None
        ),
    )
    cond3 = _stability_condition(S, g, eps, deltas, osc_cap, threads)
    conditions = (cond1, cond2, cond3)
    return Certificate(
        criterion="bc",
        conditions=conditions,
        params={"eps": eps, "delta_grid": deltas.tolist(), "osc_cap": osc_cap},
        overall=_overall(conditions),
        grid_meta={"grid_size": int(len(S.grid)), "members": len(S.members)},
    )


def buc_diagnose(
    S: FamilySample,
    g: Derivator,
    eps: float,
    delta_grid=None,
    rl_tol: float | None = None,
    threads: int = 1,
) -> Certificate:
    """Bounded + uniformly g-equicontinuous, with the equivalent uniform
    right-limit check at every jump point."""
    if not S.members:
        raise EmptyFamily("family has no members")
    deltas = (
        np.asarray(sorted(float(x) for x in delta_grid))
        if delta_grid is not None
        else default_delta_grid(g)
    )
    rl_tol = eps if rl_tol is None else rl_tol
    vals = S.values(threads)
    cond1 = _boundedness_condition(vals)
    omega, _ = _pair_moduli(S, g, deltas, threads)
    ok_idx = np.nonzero(omega < eps)[0]
    cond2 = Condition(
        cid="uniform-g-equicontinuous",
        verdict="pass" if ok_idx.size else "fail",
        measured={
            "omega": {repr(float(d)): float(o) for d, o in zip(deltas, omega)},
            "best_delta": float(deltas[ok_idx[-1]]) if ok_idx.size else None,
            "eps": eps,
        },
        witness=None if ok_idx.size else "no delta in grid brings omega below eps",
    )
    worst_defect = 0.0
    witness = None
    for d in g.jump_points:
        d = float(d)

        def defect_of(f):
            est = estimate_right_limit(f, g, d, tol=min(1e-9, rl_tol))
            return est.defect if not est.converged else 0.0

        defects = _map(defect_of, S.members, threads)
        local = max(defects) if defects else 0.0
        if local > worst_defect:
            worst_defect = local
            if local > rl_tol:
                witness = f"jump {d}: right-limit Cauchy defect {local:.4g}"
    cond3 = Condition(
        cid="uniform-right-limits",
        verdict="pass" if worst_defect <= rl_tol else "fail",
        measured={"worst_defect": float(worst_defect), "tol": rl_tol},
        witness=witness,
    )
    conditions = (cond1, cond2, cond3)
    return Certificate(
        criterion="buc",
        conditions=conditions,
        params={"eps": eps, "delta_grid": deltas.tolist(), "rl_tol": rl_tol},
        overall=_overall(conditions),
        grid_meta={"grid_size": int(len(S.grid)), "members": len(S.members)},
    )


def lp_seq_diagnose(
    sequences: Sequence, p: float, eps: float, tail_bounds=0.0
) -> Certificate:
    """Pointwise bounds + the tail condition for truncated sequences.

    The tail condition passes only when some n strictly below the stored
    truncation achieves sum_{k>n} |x_k|^p + bound^p < eps^p; achieving it
    only by exhausting the stored prefix is a fail at truncation, and a
    declared bound already at eps makes the verdict inconclusive.
    """
    seqs = [np.asarray(x, dtype=float) for x in sequences]
    if not seqs:
        raise EmptyFamily("no sequences given")
    p = float(p)
    if p < 1:
        raise InputError("p must be >= 1")
    if tail_bounds is None:
        raise MissingTailBound("sequences need declared tail bounds")
    if np.isscalar(tail_bounds):
        bounds = [float(tail_bounds)] * len(seqs)
    else:
        bounds = [b for b in tail_bounds]
        if len(bounds) != len(seqs):
            raise InputError("tail_bounds length mismatch")
        if any(b is None for b in bounds):
            raise MissingTailBound("every sequence needs a tail bound")
    k_max = max(len(x) for x in seqs)
    padded = np.zeros((len(seqs), k_max))
    for i, x in enumerate(seqs):
        padded[i, : len(x)] = x
    powers = np.abs(padded) ** p
    suffix = np.concatenate(
        [np.cumsum(powers[:, ::-1], axis=1)[:, ::-1], np.zeros((len(seqs), 1))],
        axis=1,
    )
    bound_p = np.asarray(bounds) ** p
    worst = (suffix + bound_p[:, None]).max(axis=0)
    target = eps**p
    hits = np.nonzero(worst < target)[0]
    minimal_n = int(hits[0]) if hits.size else None
    cond1 = Condition(
        cid="pointwise-bounded",
        verdict="pass" if np.all(np.isfinite(padded)) else "fail",
        measured={"sup_per_index_max": float(np.abs(padded).max())},
    )
    if minimal_n is not None and minimal_n < k_max:
        verdict = "pass"
        witness = None
    elif minimal_n is not None:
        verdict = "fail"
        witness = f"tail condition only holds at the truncation length {k_max}"
    elif float(bound_p.max()) >= target:
        verdict = "inconclusive"
        witness = "declared tail bound alone reaches eps^p"
    else:
        verdict = "fail"
        witness = "no truncation index achieves the tail condition"
    cond2 = Condition(
        cid="p-tail",
        verdict=verdict,
        measured={
            "minimal_n": minimal_n,
            "truncation": int(k_max),
            "eps_p": float(target),
            "worst_tail_at_0": float(worst[0]),
        },
        witness=witness,
    )
    conditions = (cond1, cond2)
    return Certificate(
        criterion="lp-seq",
        conditions=conditions,
        params={"p": p, "eps": eps},
        overall=_overall(conditions),
        grid_meta={"members": len(seqs), "truncation": int(k_max)},
    )


def _atom_enumeration(g: Derivator) -> np.ndarray:
    """Atom order used for tail conditions: decreasing delta, then position."""
    if g.jump_points.size == 0:
        return np.empty(0, dtype=int)
    return np.lexsort((g.jump_points, -g.jump_deltas))


def lp_diagnose(
    S: FamilySample,
    g: Derivator,
    p: float,
    eps: float,
    n_max: int | None = None,
    R: float | None = None,
    rho: float | None = None,
    tol: float = 1e-9,
    h_grid_n: int = 5,
    threads: int = 1,
) -> Certificate:
    """Stieltjes Kolmogorov-Riesz conditions at finite scale.

    1. per-atom boundedness; 2. jump-tail sums in the recorded enumeration
    (decreasing delta, then position); 3. Lebesgue tail of f∘gamma beyond
    |x| > R; 4. translation moduli of f∘gamma for |h| <= rho (log grid).
    Members are treated as zero outside the window unless the metadata key
    "outside_mass_p" declares otherwise (None makes condition 3
    inconclusive).
    """
    if not S.members:
        raise EmptyFamily("family has no members")
    p = float(p)
    if not (1 <= p < math.inf):
        raise InputError("lp_diagnose needs 1 <= p < inf")
    a_win, b_win = g.window
    if R is None:
        R = 0.5 * max(abs(g.eval_cont(a_win)), abs(g.eval_cont(b_win)))
    if rho is None:
        rho = 0.05 * max(g.total_variation, 1e-8)
    order = _atom_enumeration(g)
    atoms = g.jump_points[order]
    deltas = g.jump_deltas[order]
    n_atoms = len(atoms)
    n_cap = n_atoms if n_max is None else min(int(n_max), n_atoms)
    target = eps**p

    # condition 1: per-atom boundedness
    if n_atoms:
        at_vals = np.vstack(_map(lambda f: f.at(atoms), S.members, threads))
        cond1 = Condition(
            cid="atomwise-bounded",
            verdict="pass" if np.all(np.isfinite(at_vals)) else "fail",
            measured={"sup": float(np.abs(at_vals).max())},
        )
    else:
        at_vals = np.zeros((len(S.members), 0))
        cond1 = Condition(
            cid="atomwise-bounded", verdict="pass", measured={"sup": 0.0}
        )

    # condition 2: jump tails in the recorded enumeration
    tail_note = None
    if n_atoms == 0:
        cond2 = Condition(
            cid="jump-tail",
            verdict="pass",
            measured={"minimal_n": 0, "atoms": 0, "enumeration": []},
        )
    else:
        weights = np.abs(at_vals) ** p * deltas[None, :]
        suffix = np.concatenate(
            [np.cumsum(weights[:, ::-1], axis=1)[:, ::-1], np.zeros((len(S.members), 1))],
            axis=1,
        )
        sup_grid = float(np.abs(S.values(threads)).max())
        if g.tail_bound is None:
            extra = None
        else:
            extra = (sup_grid**p) * float(g.tail_bound)
        if extra is None:
            verdict, minimal_n = "inconclusive", None
            tail_note = "derivator tail bound undeclared"
        else:
            worst = suffix.max(axis=0) + extra
            hits = np.nonzero(worst[: n_cap + 1] < target)[0]
            minimal_n = int(hits[0]) if hits.size else None
            if minimal_n is not None and minimal_n < n_atoms:
                verdict = "pass"
            elif minimal_n is not None:
                verdict = "fail"
                tail_note = "tail condition only holds by exhausting all atoms"
            else:
                verdict = "fail"
                tail_note = f"no n <= {n_cap} achieves the tail condition"
        cond2 = Condition(
            cid="jump-tail",
            verdict=verdict,
            measured={
                "minimal_n": minimal_n,
                "atoms": n_atoms,
                "enumeration": atoms.tolist(),
                "eps_p": target,
            },
            witness=tail_note,
        )

    # condition 3: Lebesgue tail beyond |x| > R
    gamma = g._gamma
    x_lo, x_hi = float(g.eval_cont(a_win)), float(g.eval_cont(b_win))
    outside = S.metadata.get("outside_mass_p", 0.0)

    def lebesgue_tail(f: GFunction) -> float:
        total = 0.0
        power = GFunction(
            evaluator=lambda t: np.abs(f.at(t)) ** p, kinks=f.kinks
        )
        if -R > x_lo:
            t_hi = gamma.eval(min(-R, x_hi))
            total += _integral_continuous(
                power.at, g, a_win, float(t_hi), tol, extra_ts=power.kinks
            )
        if R < x_hi:
            t_lo = gamma.eval(max(R, x_lo))
            total += _integral_continuous(
                power.at, g, float(t_lo), b_win, tol, extra_ts=power.kinks
            )
        return total

    tails = _map(lebesgue_tail, S.members, threads)
    worst_tail = max(tails) if tails else 0.0
    if outside is None:
        cond3 = Condition(
            cid="lebesgue-tail",
            verdict="inconclusive",
            measured={"R": R, "worst_tail": float(worst_tail)},
            witness="mass outside the window undeclared",
        )
    else:
        tot = worst_tail + float(outside)
        cond3 = Condition(
            cid="lebesgue-tail",
            verdict="pass" if tot < target else "fail",
            measured={"R": R, "worst_tail": float(tot), "eps_p": target},
            witness=None if tot < target else f"tail {tot:.4g} >= eps^p",
        )

    # condition 4: translation moduli of f∘gamma (zero-extended)
    h_values = rho * np.power(0.5, np.arange(h_grid_n, dtype=float))
    cut_ts = sampling_grid(g, n=2, extra=[k for f in S.members for k in f.kinks],
                           right_clusters=False)
    cuts_x = np.unique(g.eval_cont(cut_ts))

    def translated(f: GFunction) -> float:
        def F(x: np.ndarray) -> np.ndarray:
            x = np.asarray(x, dtype=float)
            inside = (x >= x_lo) & (x <= x_hi)
            out = np.zeros_like(x)
            if inside.any():
                out[inside] = f.at(gamma.eval(np.clip(x[inside], x_lo, x_hi)))
            return out

        worst = 0.0
        for h in h_values:
            for sign in (1.0, -1.0):
                hh = sign * float(h)
                lo = min(x_lo, x_lo - hh)
                hi = max(x_hi, x_hi - hh)
                pieces = np.unique(
                    np.clip(
                        np.concatenate([cuts_x, cuts_x - hh, [lo, hi]]), lo, hi
                    )
                )
                total = 0.0
                for i in range(len(pieces) - 1):
                    seg_lo, seg_hi = float(pieces[i]), float(pieces[i + 1])
                    if seg_hi <= seg_lo:
                        continue
                    total += _simpson_piece(
                        lambda x: np.abs(F(x + hh) - F(x)) ** p,
                        seg_lo,
                        seg_hi,
                        tol,
                    )
                worst = max(worst, total)
        return worst

    trans = _map(translated, S.members, threads)
    worst_trans = max(trans) if trans else 0.0
    cond4 = Condition(
        cid="translation",
        verdict="pass" if worst_trans < target else "fail",
        measured={
            "rho": rho,
            "h_grid": h_values.tolist(),
            "worst": float(worst_trans),
            "eps_p": target,
        },
        witness=None
        if worst_trans < target
        else f"translation modulus {worst_trans:.4g} >= eps^p",
    )

    conditions = (cond1, cond2, cond3, cond4)
    return Certificate(
        criterion="lp",
        conditions=conditions,
        params={"p": p, "eps": eps, "R": R, "rho": rho, "n_max": n_cap},
        overall=_overall(conditions),
        grid_meta={"grid_size": int(len(S.grid)), "members": len(S.members)},
    )


def _simpson_piece(fn, lo: float, hi: float, tol: float) -> float:
    from .calculus import _simpson_doubling

    return _simpson_doubling(fn, lo, hi, max(tol * (hi - lo), 1e-15))


def dc_diagnose(
    S: FamilySample,
    g: Derivator,
    eps: float,
    delta_grid=None,
    n_max: int | None = None,
    tol: float = 1e-9,
    osc_cap: int = 64,
    threads: int = 1,
) -> Certificate:
    """bc conditions plus the jump-mass tail over member jump tables."""
    if not S.members:
        raise EmptyFamily("family has no members")
    try:
        tables = _map(lambda f: jump_series(f, g, tol=tol), S.members, threads)
    except NoRightLimit as exc:
        raise NotDecomposable(str(exc)) from exc
    base = bc_diagnose(
        S, g, eps, delta_grid=delta_grid, osc_cap=osc_cap, threads=threads
    )
    order = _atom_enumeration(g)
    atoms = g.jump_points[order]
    n_atoms = len(atoms)
    if n_atoms == 0:
        cond4 = Condition(
            cid="jump-mass-tail",
            verdict="pass",
            measured={"minimal_n": 0, "atoms": 0, "enumeration": []},
        )
    else:
        mass = np.vstack(
            [np.abs(js.deltas_f[order]) for js in tables]
        )
        suffix = np.concatenate(
            [np.cumsum(mass[:, ::-1], axis=1)[:, ::-1], np.zeros((len(tables), 1))],
            axis=1,
        )
        declared = S.metadata.get("jump_tail_bound", 0.0 if g.tail_bound == 0.0 else None)
        n_cap = n_atoms if n_max is None else min(int(n_max), n_atoms)
        note = None
        if declared is None:
            verdict, minimal_n = "inconclusive", None
            note = "jump-mass tail beyond the stored atoms undeclared"
        else:
            worst = suffix.max(axis=0) + float(declared)
            hits = np.nonzero(worst[: n_cap + 1] < eps)[0]
            minimal_n = int(hits[0]) if hits.size else None
            if minimal_n is not None and minimal_n < n_atoms:
                verdict = "pass"
            elif minimal_n is not None:
                verdict = "fail"
                note = "tail condition only holds by exhausting all atoms"
            else:
                verdict = "fail"
                note = f"no n <= {n_cap} achieves the jump-mass tail condition"
        cond4 = Condition(
            cid="jump-mass-tail",
            verdict=verdict,
            measured={
                "minimal_n": minimal_n,
                "atoms": n_atoms,
                "enumeration": atoms.tolist(),
                "eps": eps,
            },
            witness=note,
        )
    conditions = base.conditions + (cond4,)
    return Certificate(
        criterion="dc",
        conditions=conditions,
        params={**base.params, "n_max": n_max},
        overall=_overall(conditions),
        grid_meta=base.grid_meta,
    )


# ---------------------------------------------------------------------------
# epsilon nets


def family_distance(
    f: GFunction,
    h: GFunction,
    g: Derivator,
    metric: str = "sup",
    p: float = 2.0,
    tol: float = 1e-10,
    sample_n: int = 2001,
) -> float:
    """Distance between members: sup over a fine grid, L^p_g, or DC."""
    if metric == "sup":
        grid = sampling_grid(g, n=sample_n, extra=tuple(f.kinks) + tuple(h.kinks))
        d = float(np.max(np.abs(f.at(grid) - h.at(grid))))
        for pt in g.jump_points:
            pt = float(pt)
            fr = f.declared_right_limit(pt)
            hr = h.declared_right_limit(pt)
            if fr is not None and hr is not None:
                d = max(d, abs(float(fr) - float(hr)))
        return d
    diff = GFunction(
        evaluator=lambda t: f.at(t) - h.at(t),
        kinks=tuple(set(f.kinks) | set(h.kinks)),
        label="diff",
    )
    if metric == "lp":
        return lp_norm(diff, g, p, tol=tol)
    if metric == "dc":
        from .decompose import dc_norm

        return dc_norm(diff, g, tol=max(tol, 1e-10))
    raise InputError(f"unknown metric {metric!r}")


@dataclass(frozen=True)
class NetResult:
    """Greedy epsilon-net: members kept, residual, or a failure witness."""

    net_indices: tuple[int, ...]
    max_residual: float
    eps: float
    metric: str
    failure_witness: int | None

    def to_dict(self) -> dict:
        return {
            "net_indices": list(self.net_indices),
            "max_residual": self.max_residual,
            "eps": self.eps,
            "metric": self.metric,
            "failure_witness": self.failure_witness,
        }


def epsilon_net(
    S: FamilySample,
    g: Derivator,
    eps: float,
    metric: str = "sup",
    p: float = 2.0,
    net_cap: int | None = None,
    tol: float = 1e-10,
) -> NetResult:
    """Greedy net construction in member order.

    A member farther than eps from every current net member joins the net;
    exceeding net_cap reports that member as the failure witness instead.
    """
    if not S.members:
        raise EmptyFamily("family has no members")
    cap = len(S.members) if net_cap is None else int(net_cap)
    net: list[int] = []
    witness = None
    for i, f in enumerate(S.members):
        dists = [
            family_distance(f, S.members[j], g, metric=metric, p=p, tol=tol)
            for j in net
        ]
        if not dists or min(dists) > eps:
            if len(net) + 1 > cap:
                witness = i
                break
            net.append(i)
    residual = 0.0
    if witness is None:
        for i, f in enumerate(S.members):
            if i in net:
                continue
            residual = max(
                residual,
                min(
                    family_distance(f, S.members[j], g, metric=metric, p=p, tol=tol)
                    for j in net
                ),
            )
    return NetResult(
        net_indices=tuple(net),
        max_residual=float(residual),
        eps=eps,
        metric=metric,
        failure_witness=witness,
    )
