"""Oscillation and size norms over ball families, with localization.

For alpha real, p in (0, inf) and a designated ball class D, the
localized norm of f splits into two exact finite maxima over the
canonical ball list:

    oscillation part:  max over B not in D of
        ( mu(B)^(-1-p*alpha) * sum_B |f - f_B|^p w )^(1/p)
    size part:         max over B in D of
        ( mu(B)^(-1-p*alpha) * sum_B |f|^p w )^(1/p)

and the norm is their sum.  The BLO variant measures oscillation against
the ball minimum instead of the ball mean; the Lipschitz variant takes
the smallest constant bounding sup-oscillation (outside D) and sup-size
(inside D) against mu(B)^alpha, which is a max of the two parts rather
than a sum.  D = empty set recovers the global norms.

The class D_rho collects, for a positive function rho, every ball with
canonical radius >= rho(center); a deduplicated ball joins if any of its
(center, radius) realizations qualifies, with the all-of-space sentinel
radius materialized as diam + h.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .space import BallList, MetricMeasureSpace

__all__ = [
    "BallClass",
    "NormBreakdown",
    "campanato_norm",
    "campanato_blo_norm",
    "lipschitz_norm",
    "morrey_norm",
    "dclass_from_rho",
    "localization_split",
    "truncate",
]


class BallClass:
    """A subset of the canonical balls (by id), used as the class D."""

    def __init__(self, ids, origin: str = "explicit"):
        self.ids = frozenset(int(i) for i in ids)
        self.origin = origin

    @classmethod
    def empty(cls) -> "BallClass":
        return cls(frozenset(), origin="explicit")

    @classmethod
    def all_balls(cls, balls: BallList) -> "BallClass":
        return cls(range(len(balls)), origin="explicit")

    def mask(self, balls: BallList) -> np.ndarray:
        """Boolean membership vector aligned with ball ids."""
        m = np.zeros(len(balls), dtype=bool)
        if self.ids:
            m[np.fromiter(self.ids, dtype=np.int64)] = True
        return m

    def __contains__(self, ball_id: int) -> bool:
        return int(ball_id) in self.ids

    def __len__(self) -> int:
        return len(self.ids)

    def __repr__(self) -> str:
        return f"BallClass(n={len(self.ids)}, origin={self.origin!r})"


def dclass_from_rho(space: MetricMeasureSpace, rho: np.ndarray) -> BallClass:
    """Balls with canonical radius >= rho(center), by any realization.

    The inclusive rule (a member set joins if any realization qualifies)
    is the conservative choice for a class quantified over balls as
    geometric objects.
    """
    rho = np.asarray(rho, dtype=float)
    if np.any(rho <= 0):
        raise ValueError("rho must be positive")
    balls = space.canonical_balls()
    cents, rads, offs = balls.realization_arrays()
    qual = rads >= rho[cents]
    hits = np.add.reduceat(qual.astype(np.int64), offs[:-1]) > 0
    return BallClass(np.flatnonzero(hits), origin="from_rho")


@dataclass(frozen=True)
class NormBreakdown:
    """Oscillation and size parts of a localized norm, with witnesses.

    For the E and BLO classes total = oscillation + size; for the
    Lipschitz class total = max(oscillation, size) (the smallest single
    constant covering both conditions).  Attaining ids are the smallest
    ball id among maximizers, or None when a part ranges over no balls.
    """

    alpha: float
    p: float
    norm_class: str
    oscillation_part: float
    size_part: float
    total: float
    attaining_osc: int | None
    attaining_size: int | None

    @property
    def attaining_balls(self) -> tuple[int | None, int | None]:
        return (self.attaining_osc, self.attaining_size)

    def to_json_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "p": self.p,
            "class": self.norm_class,
            "oscillation_part": self.oscillation_part,
            "size_part": self.size_part,
            "total": self.total,
            "attaining_balls": [self.attaining_osc, self.attaining_size],
        }


def _check_f(space: MetricMeasureSpace, f: np.ndarray) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.shape != (space.n,):
        raise ValueError("function must have one value per point")
    if np.any(~np.isfinite(f)):
        raise ValueError("function values must be finite")
    return f


def _masked_max(values: np.ndarray, mask: np.ndarray) -> tuple[float, int | None]:
    if not mask.any():
        return 0.0, None
    masked = np.where(mask, values, -np.inf)
    idx = int(np.argmax(masked))  # first maximizer = smallest ball id
    return float(masked[idx]), idx


def _norm_parts(
    space: MetricMeasureSpace,
    f: np.ndarray,
    alpha: float,
    p: float,
    dclass: BallClass | None,
    oscillation: str,
) -> NormBreakdown:
    balls = space.canonical_balls()
    flat, offs = balls.flat_members, balls.offsets
    w_flat = space.weight[flat]
    f_flat = f[flat]
    mu = balls.measures
    scale = mu ** (-1.0 - p * alpha)

    in_d = dclass.mask(balls) if dclass is not None else np.zeros(len(balls), dtype=bool)
    out_d = ~in_d

    if oscillation == "mean":
        ref = np.add.reduceat(f_flat * w_flat, offs[:-1]) / mu
        dev = np.abs(f_flat - np.repeat(ref, balls.sizes))
    elif oscillation == "min":
        ref = np.minimum.reduceat(f_flat, offs[:-1])
        dev = f_flat - np.repeat(ref, balls.sizes)  # nonnegative
    else:
        raise ValueError(oscillation)

    osc_vals = (scale * np.add.reduceat(dev**p * w_flat, offs[:-1])) ** (1.0 / p)
    size_vals = (scale * np.add.reduceat(np.abs(f_flat) ** p * w_flat, offs[:-1])) ** (
        1.0 / p
    )

    osc, osc_id = _masked_max(osc_vals, out_d)
    size, size_id = _masked_max(size_vals, in_d)
    return NormBreakdown(
        alpha=alpha,
        p=p,
        norm_class="E" if oscillation == "mean" else "Etilde",
        oscillation_part=osc,
        size_part=size,
        total=osc + size,
        attaining_osc=osc_id,
        attaining_size=size_id,
    )


def campanato_norm(
    space: MetricMeasureSpace,
    f: np.ndarray,
    alpha: float,
    p: float,
    dclass: BallClass | None = None,
) -> NormBreakdown:
    """Localized mean-oscillation norm; D = None or empty gives the global norm."""
    if not p > 0:
        raise ValueError("exponent p must be positive")
    f = _check_f(space, f)
    return _norm_parts(space, f, alpha, p, dclass, oscillation="mean")


def campanato_blo_norm(
    space: MetricMeasureSpace,
    f: np.ndarray,
    alpha: float,
    p: float,
    dclass: BallClass | None = None,
) -> NormBreakdown:
    """Localized lower-oscillation norm: deviation from the ball minimum.

    On a finite space with positive weights the essential infimum over a
    ball is the plain minimum over its members.
    """
    if not p > 0:
        raise ValueError("exponent p must be positive")
    f = _check_f(space, f)
    return _norm_parts(space, f, alpha, p, dclass, oscillation="min")


def lipschitz_norm(
    space: MetricMeasureSpace,
    f: np.ndarray,
    alpha: float,
    dclass: BallClass | None = None,
) -> NormBreakdown:
    """Smallest C with osc_B(f) <= C mu(B)^alpha off D and max_B|f| <= C mu(B)^alpha on D."""
    if not alpha > 0:
        raise ValueError("the Lipschitz-type norm requires alpha > 0")
    f = _check_f(space, f)
    balls = space.canonical_balls()
    flat, offs = balls.flat_members, balls.offsets
    f_flat = f[flat]
    mu_a = balls.measures**alpha

    in_d = dclass.mask(balls) if dclass is not None else np.zeros(len(balls), dtype=bool)
    osc_inf = np.maximum.reduceat(f_flat, offs[:-1]) - np.minimum.reduceat(f_flat, offs[:-1])
    sup_abs = np.maximum.reduceat(np.abs(f_flat), offs[:-1])

    osc, osc_id = _masked_max(osc_inf / mu_a, ~in_d)
    size, size_id = _masked_max(sup_abs / mu_a, in_d)
    return NormBreakdown(
        alpha=alpha,
        p=np.inf,
        norm_class="Lip",
        oscillation_part=osc,
        size_part=size,
        total=max(osc, size),
        attaining_osc=osc_id,
        attaining_size=size_id,
    )


def morrey_norm(space: MetricMeasureSpace, f: np.ndarray, alpha: float, p: float) -> float:
    """Exact max over all balls of the normalized size functional."""
    if not p >= 1:
        raise ValueError("the size-only norm requires p >= 1")
    f = _check_f(space, f)
    balls = space.canonical_balls()
    flat, offs = balls.flat_members, balls.offsets
    vals = (
        balls.measures ** (-1.0 - p * alpha)
        * np.add.reduceat(np.abs(f[flat]) ** p * space.weight[flat], offs[:-1])
    ) ** (1.0 / p)
    return float(vals.max())


def localization_split(
    space: MetricMeasureSpace,
    f: np.ndarray,
    alpha: float,
    p: float,
    dclass: BallClass,
) -> tuple[float, float]:
    """Global norm and the D-size supremum max over B in D of |f_B| mu(B)^(-alpha).

    For p >= 1 these control the localized norm two-sidedly with explicit
    constants:   localized <= 2 * global + size_sup   and
    global + size_sup <= 3 * localized.
    """
    if not p >= 1:
        raise ValueError("the localization split requires p >= 1")
    f = _check_f(space, f)
    glob = campanato_norm(space, f, alpha, p, None).total
    balls = space.canonical_balls()
    mask = dclass.mask(balls)
    if not mask.any():
        return glob, 0.0
    flat, offs = balls.flat_members, balls.offsets
    means = np.add.reduceat(f[flat] * space.weight[flat], offs[:-1]) / balls.measures
    vals = np.abs(means) * balls.measures ** (-alpha)
    return glob, float(vals[mask].max())


def truncate(f: np.ndarray, level: float) -> np.ndarray:
    """Pointwise clamp of f to [-level, level]."""
    if level < 0:
        raise ValueError("truncation level must be nonnegative")
    return np.clip(np.asarray(f, dtype=float), -level, level)
