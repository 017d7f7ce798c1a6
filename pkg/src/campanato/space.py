"""Finite metric measure spaces and exact ball enumeration.

A space is a finite point set with a metric given as a dense distance
table and a strictly positive weight per point (the measure of the
singleton).  Balls use the open convention

    B(x, r) = {y : d(x, y) < r},

so on a finite space every ball equals one of finitely many member sets.
`canonical_balls` enumerates all of them, once per distinct member set,
which turns every supremum over balls appearing in the norm and operator
definitions into an exact finite maximum.

Grid builders produce uniform lattices in 1D/2D with Euclidean distance
and either uniform weights or a power weight ``|x|**sigma`` (a crude
Muckenhoupt-style weight), which is the setting used for the discrete
Schrodinger operators.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

__all__ = [
    "MetricMeasureSpace",
    "GridInfo",
    "Ball",
    "BallList",
    "SpaceProfile",
    "build_grid_space",
    "single_point_space",
    "two_point_space",
    "line_space",
    "random_metric_space",
    "canonical_balls",
    "doubling_profile",
]

# Dense distance tables and materialized ball lists are intended for
# desk-scale spaces; above this the dense table is still accepted but
# enumeration cost grows like sum of ball sizes ~ n^3/6.
_DENSE_LIMIT = 4096


class SpaceValidationError(ValueError):
    """Raised when a distance table or weight vector is not a valid input."""


@dataclass(frozen=True)
class GridInfo:
    """Lattice metadata attached to spaces produced by `build_grid_space`."""

    dim: int
    extent: float
    n_per_axis: int
    h: float
    weight_spec: str          # "uniform" or "power:<sigma>"
    origin_shift: float = 0.0  # lattice offset applied to avoid a zero weight


@dataclass(frozen=True)
class Ball:
    """One open ball, deduplicated by member set.

    `canonical_radius` is the smallest distance from `center` strictly
    exceeding every member distance (np.inf for the all-of-space ball),
    so that members == {y : d(center, y) < canonical_radius} exactly.
    `realizations` lists every (center, canonical_radius) pair that
    produces this member set.
    """

    index: int
    center: int
    canonical_radius: float
    members: np.ndarray
    measure: float
    realizations: tuple[tuple[int, float], ...]

    @property
    def size(self) -> int:
        return self.members.size


class BallList(Sequence):
    """All distinct open balls of a space, in deterministic order.

    Order is by first appearance scanning centers 0..n-1 and radii
    ascending; the index in this list is the ball id used everywhere.
    Besides the `Ball` views, the list carries flat member/offset arrays
    so per-ball sums reduce to `np.add.reduceat` over one long vector.
    """

    def __init__(self, balls: list[Ball], space: "MetricMeasureSpace"):
        self._balls = balls
        self.space = space
        sizes = np.array([b.size for b in balls], dtype=np.int64)
        self.sizes = sizes
        self.offsets = np.concatenate([[0], np.cumsum(sizes)])
        self.flat_members = (
            np.concatenate([b.members for b in balls])
            if balls
            else np.empty(0, dtype=np.int32)
        )
        self.measures = np.array([b.measure for b in balls])
        self.centers = np.array([b.center for b in balls], dtype=np.int32)
        self.radii = np.array([b.canonical_radius for b in balls])

    def __len__(self) -> int:
        return len(self._balls)

    def __getitem__(self, i) -> Ball:
        return self._balls[i]

    def __iter__(self) -> Iterator[Ball]:
        return iter(self._balls)

    def materialized_radii(self) -> np.ndarray:
        """Canonical radii with the np.inf sentinel replaced by diam + h."""
        cap = self.space.diameter + self.space.radius_increment
        return np.where(np.isfinite(self.radii), self.radii, cap)

    def realization_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(centers, materialized radii, offsets) over all realizations."""
        cap = self.space.diameter + self.space.radius_increment
        cents, rads, offs = [], [], [0]
        for b in self._balls:
            for c, r in b.realizations:
                cents.append(c)
                rads.append(r if np.isfinite(r) else cap)
            offs.append(len(cents))
        return (
            np.array(cents, dtype=np.int32),
            np.array(rads),
            np.array(offs, dtype=np.int64),
        )


class MetricMeasureSpace:
    """A finite metric space with a positive weight (measure) per point."""

    def __init__(
        self,
        dist: np.ndarray,
        weight: np.ndarray,
        coords: np.ndarray | None = None,
        label: str = "",
        grid: GridInfo | None = None,
        validate: bool = True,
        check_triangle: bool | None = None,
    ):
        dist = np.asarray(dist, dtype=float)
        weight = np.asarray(weight, dtype=float)
        self.dist = dist
        self.weight = weight
        self.coords = None if coords is None else np.asarray(coords, dtype=float)
        self.label = label
        self.grid = grid
        self.n = weight.shape[0]
        self._balls: BallList | None = None
        if validate:
            # Triangle check is O(n^3); defaults on for explicit metrics at
            # small n, off for Euclidean builds where it holds by construction.
            if check_triangle is None:
                check_triangle = self.coords is None and self.n <= 512
            self.validate(check_triangle=check_triangle)

    # -- invariants ---------------------------------------------------------

    def validate(self, check_triangle: bool = True) -> None:
        d, w, n = self.dist, self.weight, self.n
        if d.shape != (n, n):
            raise SpaceValidationError(f"distance table must be {n}x{n}")
        if np.any(~np.isfinite(d)) or np.any(d < 0):
            raise SpaceValidationError("distances must be finite and nonnegative")
        if np.any(np.diag(d) != 0):
            raise SpaceValidationError("self-distances must be zero")
        if not np.array_equal(d, d.T):
            raise SpaceValidationError("distance table must be symmetric")
        off = d + np.eye(n) * (d.max() + 1.0)
        if n > 1 and off.min() <= 0:
            raise SpaceValidationError("distinct points must have positive distance")
        if np.any(w <= 0) or np.any(~np.isfinite(w)):
            raise SpaceValidationError("weights must be positive and finite")
        if check_triangle:
            for k in range(n):
                if np.any(d > d[:, k, None] + d[None, k, :] + 1e-12 * max(d.max(), 1.0)):
                    raise SpaceValidationError(f"triangle inequality fails through point {k}")

    # -- basic quantities ---------------------------------------------------

    @property
    def total_measure(self) -> float:
        return float(self.weight.sum())

    @property
    def diameter(self) -> float:
        return float(self.dist.max())

    @property
    def radius_increment(self) -> float:
        """Natural radius step: lattice spacing, else smallest positive distance."""
        if self.grid is not None:
            return self.grid.h
        if self.n == 1:
            return 1.0
        off = self.dist[~np.eye(self.n, dtype=bool)]
        return float(off.min())

    def row(self, i: int) -> np.ndarray:
        return self.dist[i]

    def ball_members(self, center: int, r: float) -> np.ndarray:
        """Members of the open ball B(center, r)."""
        return np.flatnonzero(self.dist[center] < r).astype(np.int32)

    def ball_measure(self, center: int, r: float) -> float:
        return float(self.weight[self.dist[center] < r].sum())

    # -- canonical balls ----------------------------------------------------

    def canonical_balls(self) -> BallList:
        """Enumerate every distinct open ball of the space (cached).

        For each center the balls are the prefixes of its sorted distance
        row, one per distinct distance value, plus the all-of-space ball;
        the global list is deduplicated by member set.
        """
        if self._balls is None:
            self._balls = _enumerate_balls(self)
        return self._balls

    # -- serialization ------------------------------------------------------

    def to_json_dict(self) -> dict:
        pts = []
        for i in range(self.n):
            pts.append(
                {
                    "id": i,
                    "coords": None if self.coords is None else list(self.coords[i]),
                    "weight": float(self.weight[i]),
                }
            )
        doc = {
            "label": self.label,
            "points": pts,
            "metric": "euclidean" if self.coords is not None else "explicit",
        }
        if self.coords is None:
            doc["dist"] = [[float(v) for v in row] for row in self.dist]
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=None, separators=(",", ":"))

    @classmethod
    def from_json_dict(cls, doc: dict) -> "MetricMeasureSpace":
        pts = doc["points"]
        weight = np.array([p["weight"] for p in pts])
        coords = None
        if doc["metric"] == "euclidean":
            coords = np.array([p["coords"] for p in pts], dtype=float)
            if coords.ndim == 1:
                coords = coords[:, None]
            dist = _euclidean_table(coords)
        else:
            dist = np.array(doc["dist"], dtype=float)
        return cls(dist, weight, coords=coords, label=doc.get("label", ""))

    @classmethod
    def from_json(cls, text: str) -> "MetricMeasureSpace":
        return cls.from_json_dict(json.loads(text))

    def __repr__(self) -> str:
        return f"MetricMeasureSpace(n={self.n}, label={self.label!r})"


# ---------------------------------------------------------------------------
# Ball enumeration
# ---------------------------------------------------------------------------

def _enumerate_balls(space: MetricMeasureSpace) -> BallList:
    n = space.n
    seen: dict[bytes, int] = {}
    members_list: list[np.ndarray] = []
    first_real: list[tuple[int, float]] = []
    realizations: list[list[tuple[int, float]]] = []

    for c in range(n):
        row = space.row(c)
        order = np.argsort(row, kind="stable").astype(np.int32)
        sorted_d = row[order]
        uniq, first_idx = np.unique(sorted_d, return_index=True)
        m = uniq.size
        for j in range(m):
            end = int(first_idx[j + 1]) if j + 1 < m else n
            radius = float(uniq[j + 1]) if j + 1 < m else np.inf
            members = np.sort(order[:end])
            key = members.tobytes()
            idx = seen.get(key)
            if idx is None:
                seen[key] = len(members_list)
                members_list.append(members)
                first_real.append((c, radius))
                realizations.append([(c, radius)])
            else:
                realizations[idx].append((c, radius))

    w = space.weight
    balls = []
    for i, members in enumerate(members_list):
        center, radius = first_real[i]
        balls.append(
            Ball(
                index=i,
                center=center,
                canonical_radius=radius,
                members=members,
                measure=float(w[members].sum()),
                realizations=tuple(realizations[i]),
            )
        )
    return BallList(balls, space)


def canonical_balls(space: MetricMeasureSpace) -> BallList:
    """Module-level alias for `space.canonical_balls()`."""
    return space.canonical_balls()


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------

def _euclidean_table(coords: np.ndarray) -> np.ndarray:
    diff = coords[:, None, :] - coords[None, :, :]
    d = np.sqrt((diff**2).sum(axis=2))
    return 0.5 * (d + d.T)  # exact symmetry


def build_grid_space(
    dim: int,
    extent: float,
    n_per_axis: int,
    weight_spec: str | tuple[str, float] = "uniform",
    label: str = "",
) -> MetricMeasureSpace:
    """Uniform lattice on [-extent, extent]^dim with Euclidean distance.

    Point order is lexicographic by coordinate.  Weights are w(x) * h^dim
    where w is 1 (uniform) or |x|^sigma (power weight with |sigma| < dim).
    If the power weight would vanish at a lattice node, the lattice is
    shifted off the origin by h/2 and the shift recorded in the grid info.
    """
    if dim not in (1, 2):
        raise ValueError("dim must be 1 or 2")
    if extent <= 0:
        raise ValueError("extent must be positive")
    if n_per_axis < 2:
        raise ValueError("n_per_axis must be at least 2")

    sigma = 0.0
    spec_name = "uniform"
    if isinstance(weight_spec, tuple):
        kind, sigma = weight_spec
        if kind != "power":
            raise ValueError(f"unknown weight spec {weight_spec!r}")
        sigma = float(sigma)
        if abs(sigma) >= dim:
            raise ValueError("power weight needs |sigma| < dim to stay integrable")
        spec_name = f"power:{sigma}"
    elif weight_spec != "uniform":
        raise ValueError(f"unknown weight spec {weight_spec!r}")

    axis = np.linspace(-extent, extent, n_per_axis)
    h = 2.0 * extent / (n_per_axis - 1)

    shift = 0.0
    if sigma != 0.0 and np.any(np.isclose(axis, 0.0, atol=h * 1e-12)):
        shift = h / 2.0
        axis = axis + shift

    # Integer index coordinates make equal lattice distances bitwise equal,
    # so open-ball boundaries at exact distances resolve consistently.
    idx_axis = np.arange(n_per_axis)
    if dim == 1:
        coords = axis[:, None]
        idx = idx_axis[:, None]
    else:
        coords = np.array(list(itertools.product(axis, axis)))
        idx = np.array(list(itertools.product(idx_axis, idx_axis)))
    diff = idx[:, None, :] - idx[None, :, :]
    dist = h * np.sqrt((diff**2).sum(axis=2))

    radii = np.sqrt((coords**2).sum(axis=1))
    w = np.ones(len(coords)) if sigma == 0.0 else radii**sigma
    if np.any(w <= 0) or np.any(~np.isfinite(w)):
        raise ValueError("power weight vanished or blew up at a lattice node")
    weight = w * h**dim

    info = GridInfo(
        dim=dim,
        extent=extent,
        n_per_axis=n_per_axis,
        h=h,
        weight_spec=spec_name,
        origin_shift=shift,
    )
    if not label:
        label = f"grid{dim}d-n{n_per_axis}-{spec_name}"
    return MetricMeasureSpace(
        dist,
        weight,
        coords=coords,
        label=label,
        grid=info,
        check_triangle=False,
    )


def single_point_space(weight: float = 1.0, label: str = "point") -> MetricMeasureSpace:
    return MetricMeasureSpace(
        np.zeros((1, 1)), np.array([weight]), coords=np.zeros((1, 1)), label=label
    )


def two_point_space(
    d: float = 1.0, weights: tuple[float, float] = (1.0, 1.0), label: str = "two-point"
) -> MetricMeasureSpace:
    dist = np.array([[0.0, d], [d, 0.0]])
    return MetricMeasureSpace(dist, np.array(weights), label=label)


def line_space(
    positions: Sequence[float], weights: Sequence[float] | None = None, label: str = "line"
) -> MetricMeasureSpace:
    """Points on a line at the given positions (Euclidean metric)."""
    pos = np.asarray(positions, dtype=float)
    coords = pos[:, None]
    w = np.ones(len(pos)) if weights is None else np.asarray(weights, dtype=float)
    return MetricMeasureSpace(
        _euclidean_table(coords), w, coords=coords, label=label, check_triangle=False
    )


def random_metric_space(
    n: int, seed: int = 0, label: str | None = None
) -> MetricMeasureSpace:
    """Random metric space: shortest-path closure of random edge lengths.

    The shortest-path closure of any symmetric positive edge weighting is
    a genuine metric (triangle inequality by construction); weights are
    drawn uniformly from [0.5, 1.5].  Deterministic for a fixed seed.
    """
    rng = np.random.default_rng(seed)
    raw = rng.uniform(0.2, 1.0, size=(n, n))
    raw = 0.5 * (raw + raw.T)
    np.fill_diagonal(raw, 0.0)
    d = raw.copy()
    for k in range(n):  # Floyd-Warshall
        d = np.minimum(d, d[:, k, None] + d[None, k, :])
    w = rng.uniform(0.5, 1.5, size=n)
    return MetricMeasureSpace(
        d, w, label=label or f"random-metric-{n}-seed{seed}", check_triangle=True
    )


# ---------------------------------------------------------------------------
# Doubling / reverse-doubling profile
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpaceProfile:
    """Fitted measure-growth profile.

    a1 is the exact maximum of mu(B(x,2r))/mu(B(x,r)) over centers and
    canonical radii.  n_exp and kappa are least-squares exponents of
    log mu(B(x,lr))/mu(B(x,r)) against log l over l in {2,4,8}; kappa is
    fitted on the reverse-doubling range (l*r <= diam/2) and clipped to
    n_exp, a3 is the smallest observed ratio / l^kappa there (capped at 1).
    """

    a1: float
    n_exp: float
    a3: float
    kappa: float
    samples: int = 0


_PROFILE_LAMBDAS = (2.0, 4.0, 8.0)


def doubling_profile(space: MetricMeasureSpace) -> SpaceProfile:
    n = space.n
    if n == 1:
        return SpaceProfile(a1=1.0, n_exp=0.0, a3=1.0, kappa=0.0, samples=0)

    diam = space.diameter
    a1 = 1.0
    log_l, log_ratio, in_rd = [], [], []

    for c in range(n):
        row = space.row(c)
        order = np.argsort(row, kind="stable")
        sorted_d = row[order]
        cumw = np.concatenate([[0.0], np.cumsum(space.weight[order])])
        uniq = np.unique(sorted_d)
        radii = uniq[1:]  # positive canonical radii

        def mu(r_vals):
            return cumw[np.searchsorted(sorted_d, r_vals, side="left")]

        base = mu(radii)
        a1 = max(a1, float(np.max(mu(2.0 * radii) / base)))
        for lam in _PROFILE_LAMBDAS:
            ratios = mu(lam * radii) / base
            log_l.extend([np.log(lam)] * len(radii))
            log_ratio.extend(np.log(ratios))
            in_rd.extend(lam * radii <= diam / 2.0)

    x = np.array(log_l)
    y = np.array(log_ratio)
    rd = np.array(in_rd, dtype=bool)

    def slope(mask):
        xs, ys = x[mask], y[mask]
        return float(np.dot(xs, ys) / np.dot(xs, xs)) if xs.size else 0.0

    n_exp = slope(np.ones_like(rd))
    kappa_mask = rd if rd.any() else np.ones_like(rd)
    kappa = min(slope(kappa_mask), n_exp)
    kappa = max(kappa, 0.0)
    ratios_k = np.exp(y[kappa_mask])
    lams_k = np.exp(x[kappa_mask])
    a3 = min(1.0, float(np.min(ratios_k / lams_k**kappa)))
    return SpaceProfile(a1=a1, n_exp=n_exp, a3=a3, kappa=kappa, samples=int(x.size))
