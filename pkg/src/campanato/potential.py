"""Nonnegative potentials: reverse Holder class and the critical radius.

The critical radius of a potential V at a point x is

    rho(x) = sup{ r > 0 : r^2 * mean_{B(x,r)} V <= 1 },

computed exactly on a finite space: between consecutive distinct
distances the ball is fixed, r^2 * mean is increasing in r, and the
supremum restricted to that segment is available in closed form; rho(x)
is the maximum over segments.  An admissible function is a positive rho
for which

    1/rho(x) <= C0 * (1/rho(y)) * (1 + d(x,y)/rho(y))^{k0}

holds for all pairs; on a finite space the smallest C0 for a given k0 is
an exact maximum over ordered pairs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .space import MetricMeasureSpace

__all__ = [
    "PotentialVanishes",
    "ReverseHolderReport",
    "AdmissibleFunction",
    "reverse_holder_constant",
    "critical_radius",
    "admissibility_constant",
    "admissibility_sweep",
]


class PotentialVanishes(ValueError):
    """The critical radius is undefined for an identically zero potential."""


@dataclass(frozen=True)
class ReverseHolderReport:
    """Smallest constant C with (mean_B V^q)^(1/q) <= C * mean_B V over balls."""

    q: float
    constant: float
    worst_ball: int


@dataclass(frozen=True)
class AdmissibleFunction:
    """A positive function of point index, with optionally fitted constants."""

    rho: np.ndarray
    c0: float | None = None
    k0: float | None = None


def _check_potential(space: MetricMeasureSpace, v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (space.n,):
        raise ValueError("potential must have one value per point")
    if np.any(v < 0) or np.any(~np.isfinite(v)):
        raise ValueError("potential must be nonnegative and finite")
    return v


def reverse_holder_constant(
    space: MetricMeasureSpace, v: np.ndarray, q: float
) -> ReverseHolderReport:
    """Exact reverse Holder constant of order q over all canonical balls.

    Balls where V vanishes identically contribute ratio 1 (the inequality
    is trivially an equality there).  q = inf compares the ball maximum
    against the ball mean.
    """
    if not q > 1:
        raise ValueError("reverse Holder order must satisfy q > 1")
    v = _check_potential(space, v)
    balls = space.canonical_balls()
    flat, offs = balls.flat_members, balls.offsets
    w_flat = space.weight[flat]
    v_flat = v[flat]

    mean1 = np.add.reduceat(v_flat * w_flat, offs[:-1]) / balls.measures
    if np.isinf(q):
        mean_q = np.maximum.reduceat(v_flat, offs[:-1])
    else:
        mean_q = (np.add.reduceat(v_flat**q * w_flat, offs[:-1]) / balls.measures) ** (
            1.0 / q
        )
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(mean1 > 0.0, mean_q / mean1, 1.0)
    worst = int(np.argmax(ratio))
    return ReverseHolderReport(q=q, constant=float(ratio[worst]), worst_ball=worst)


def critical_radius(space: MetricMeasureSpace, v: np.ndarray) -> AdmissibleFunction:
    """Exact critical radius of V at every point via a segment scan.

    For each center, between consecutive distinct distances d_j < d_{j+1}
    the ball is the fixed prefix set with mean A_j, and r^2 * A_j <= 1 on
    the segment (d_j, d_{j+1}] holds up to r = min(d_{j+1}, A_j^{-1/2});
    the last (all-of-space) segment is capped at the global A^{-1/2}.
    """
    v = _check_potential(space, v)
    if not np.any(v > 0):
        raise PotentialVanishes("potential is identically zero; critical radius undefined")

    rho = np.empty(space.n)
    for c in range(space.n):
        row = space.row(c)
        order = np.argsort(row, kind="stable")
        sorted_d = row[order]
        w_s = space.weight[order]
        vw_s = (v * space.weight)[order]
        uniq, first_idx = np.unique(sorted_d, return_index=True)
        m = uniq.size
        ends = np.concatenate([first_idx[1:], [space.n]])  # prefix length per segment
        cum_w = np.cumsum(w_s)
        cum_vw = np.cumsum(vw_s)
        means = cum_vw[ends - 1] / cum_w[ends - 1]  # A_j per segment j = 0..m-1

        best = 0.0
        for j in range(m):
            left = uniq[j]
            right = uniq[j + 1] if j + 1 < m else np.inf
            a = means[j]
            if a == 0.0:
                cand = right  # whole segment admissible; right end is finite here
            else:
                rmax = a**-0.5
                cand = min(right, rmax) if rmax > left else None
            if cand is not None and np.isfinite(cand):
                best = max(best, float(cand))
        rho[c] = best
    return AdmissibleFunction(rho=rho)


def admissibility_constant(
    space: MetricMeasureSpace, rho: np.ndarray, k0: float
) -> float:
    """Smallest C0 making rho admissible with exponent k0 on this space.

    C0 = max over ordered pairs (x, y) of
    rho(y)/rho(x) * (1 + d(x,y)/rho(y))^(-k0); always >= 1 (pairs x = y).
    """
    if k0 < 0:
        raise ValueError("admissibility exponent k0 must be nonnegative")
    rho = np.asarray(rho, dtype=float)
    if rho.shape != (space.n,):
        raise ValueError("rho must have one value per point")
    if np.any(rho <= 0) or np.any(~np.isfinite(rho)):
        raise ValueError("rho must be positive and finite")
    # term(x, y) = rho(y)/rho(x) * (1 + d(x,y)/rho(y))^(-k0)
    ratio = rho[None, :] / rho[:, None]
    growth = (1.0 + space.dist / rho[None, :]) ** (-k0)
    return float(np.max(ratio * growth))


def admissibility_sweep(
    space: MetricMeasureSpace,
    rho: np.ndarray,
    k0_grid: np.ndarray | None = None,
) -> list[tuple[float, float]]:
    """Fitted C0 over a grid of exponents k0 (convenience report)."""
    if k0_grid is None:
        k0_grid = np.arange(0.0, 4.0 + 1e-9, 0.25)
    return [(float(k0), admissibility_constant(space, rho, float(k0))) for k0 in k0_grid]
