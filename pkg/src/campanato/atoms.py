"""Normalized building blocks supported on balls, and their pairings.

A cancellative atom for exponents p in (0,1], q in [1,inf] with q > p is
a function a supported on a ball B with zero weighted mean and

    ||a||_{L^q(w)} <= mu(B)^(1/q - 1/p);

a local atom drops the mean condition but must be supported on a ball of
the designated class D.  The pairing sum(f * a * w) of a sup-normalized
atom against f is controlled, with constant one, by the localized
mean-oscillation norm of f at alpha = 1/p - 1, exponent 1; that bound is
checked here per atom.

Every local atom splits as b = 2c + s with c = (b - b_B chi_B)/2 of zero
mean and s = b_B chi_B constant on B; both pieces are atoms again (c
with margin at most one, s as a (p, inf) local atom), which is the
constructive step behind re-expressing q-atoms through sup-atoms.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .fnspaces import BallClass, campanato_norm
from .space import MetricMeasureSpace

__all__ = [
    "Atom",
    "AtomValidation",
    "PairingResult",
    "AtomicDecomposition",
    "weighted_lq_norm",
    "validate_atom",
    "make_local_atom",
    "make_cancellative_atom",
    "split_local_atom",
    "pairing",
    "decomposition_cost",
    "greedy_decomposition",
]

MEAN_TOLERANCE = 1e-12   # |sum a*w| <= tol * sum |a|*w counts as zero mean
SIZE_SLACK = 1e-12       # relative slack on the L^q size bound


@dataclass(frozen=True)
class Atom:
    """An atom candidate; validity is established by `validate_atom`."""

    values: np.ndarray
    support_ball: int
    kind: str       # "cancellative" | "local"
    p: float
    q: float        # np.inf allowed

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "p": self.p,
            "q": "inf" if np.isinf(self.q) else self.q,
            "support_ball": self.support_ball,
            "values": [float(v) for v in self.values],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), separators=(",", ":"))

    @classmethod
    def from_json_dict(cls, doc: dict) -> "Atom":
        q = doc["q"]
        return cls(
            values=np.array(doc["values"], dtype=float),
            support_ball=int(doc["support_ball"]),
            kind=doc["kind"],
            p=float(doc["p"]),
            q=np.inf if q == "inf" else float(q),
        )


@dataclass(frozen=True)
class AtomValidation:
    """Structured per-condition report; never raises on a bad atom."""

    ok: bool
    support_ok: bool
    size_ok: bool
    size_margin: float            # ||a||_q * mu(B)^(1/p - 1/q); valid iff <= 1
    cancellation_ok: bool | None  # None for local atoms
    mean_residual: float
    dclass_ok: bool | None        # None for cancellative atoms
    messages: tuple[str, ...] = field(default_factory=tuple)


def weighted_lq_norm(space: MetricMeasureSpace, values: np.ndarray, q: float) -> float:
    if np.isinf(q):
        return float(np.max(np.abs(values)))
    return float(np.sum(np.abs(values) ** q * space.weight) ** (1.0 / q))


def _check_exponents(p: float, q: float) -> None:
    if not (0 < p <= 1):
        raise ValueError("atom exponent p must lie in (0, 1]")
    if not (q >= 1 and q > p):
        raise ValueError("atom exponent q must lie in [1, inf] and exceed p")


def validate_atom(
    space: MetricMeasureSpace, atom: Atom, dclass: BallClass | None = None
) -> AtomValidation:
    """Check support, size and the kind-dependent condition, with margins."""
    _check_exponents(atom.p, atom.q)
    balls = space.canonical_balls()
    ball = balls[atom.support_ball]
    values = np.asarray(atom.values, dtype=float)

    off = np.ones(space.n, dtype=bool)
    off[ball.members] = False
    support_ok = bool(np.all(values[off] == 0.0))

    lq = weighted_lq_norm(space, values, atom.q)
    budget = ball.measure ** (1.0 / atom.q - 1.0 / atom.p) if not np.isinf(atom.q) else (
        ball.measure ** (-1.0 / atom.p)
    )
    size_margin = lq / budget if budget > 0 else np.inf
    size_ok = size_margin <= 1.0 + SIZE_SLACK

    cancellation_ok: bool | None = None
    mean_residual = 0.0
    dclass_ok: bool | None = None
    messages: list[str] = []

    if atom.kind == "cancellative":
        total = float(np.sum(values * space.weight))
        scale = float(np.sum(np.abs(values) * space.weight))
        mean_residual = abs(total) / scale if scale > 0 else abs(total)
        cancellation_ok = mean_residual <= MEAN_TOLERANCE
        if not cancellation_ok:
            messages.append(f"nonzero mean (residual {mean_residual:.3e})")
    elif atom.kind == "local":
        dclass_ok = dclass is not None and atom.support_ball in dclass
        if not dclass_ok:
            messages.append("support ball not in the designated class")
    else:
        raise ValueError(f"unknown atom kind {atom.kind!r}")

    if not support_ok:
        messages.append("values do not vanish off the support ball")
    if not size_ok:
        messages.append(f"size bound exceeded (margin {size_margin:.6g})")

    ok = support_ok and size_ok and (cancellation_ok is not False) and (
        dclass_ok is not False
    )
    return AtomValidation(
        ok=ok,
        support_ok=support_ok,
        size_ok=size_ok,
        size_margin=float(size_margin),
        cancellation_ok=cancellation_ok,
        mean_residual=float(mean_residual),
        dclass_ok=dclass_ok,
        messages=tuple(messages),
    )


def make_local_atom(space: MetricMeasureSpace, ball_id: int, p: float, q: float = np.inf) -> Atom:
    """The canonical local atom mu(B)^(-1/p) * chi_B (saturates the size bound)."""
    _check_exponents(p, q)
    ball = space.canonical_balls()[ball_id]
    values = np.zeros(space.n)
    values[ball.members] = ball.measure ** (-1.0 / p)
    return Atom(values=values, support_ball=ball_id, kind="local", p=p, q=q)


def make_cancellative_atom(
    space: MetricMeasureSpace,
    ball_id: int,
    profile: np.ndarray,
    p: float,
    q: float = np.inf,
) -> Atom:
    """Project a profile onto a valid cancellative atom on the given ball.

    The profile is restricted to the ball, its weighted ball mean removed,
    and the result scaled to saturate the L^q size bound.  The profile
    must not be constant on the ball.
    """
    _check_exponents(p, q)
    ball = space.canonical_balls()[ball_id]
    values = np.zeros(space.n)
    members = ball.members
    w = space.weight[members]
    restricted = np.asarray(profile, dtype=float)[members]
    centered = restricted - np.sum(restricted * w) / np.sum(w)
    values[members] = centered
    lq = weighted_lq_norm(space, values, q)
    if lq == 0.0:
        raise ValueError("profile is constant on the ball; no cancellative part")
    budget = ball.measure ** ((1.0 / q if not np.isinf(q) else 0.0) - 1.0 / p)
    values *= budget / lq
    return Atom(values=values, support_ball=ball_id, kind="cancellative", p=p, q=q)


@dataclass(frozen=True)
class SplitResult:
    """Outcome of splitting a local atom into mean-free and constant parts."""

    cancellative: Atom        # c = (b - b_B chi_B) / 2, zero mean on B
    constant_part: Atom       # s = b_B chi_B, a (p, inf) local atom
    scale_margin: float       # ||c||_q * mu(B)^(1/p-1/q); c valid iff <= 1
    ball_mean: float


def split_local_atom(space: MetricMeasureSpace, atom: Atom, dclass: BallClass) -> SplitResult:
    """Split a valid local atom b as b = 2c + s (exact reconstruction).

    c has zero weighted mean and support B; s is constant on B and always
    a valid (p, inf) local atom.  The reported margin is the factor by
    which c exceeds the (p, q) size bound (at most one by construction).
    """
    check = validate_atom(space, atom, dclass)
    if atom.kind != "local" or not check.ok:
        raise ValueError(f"input must be a valid local atom: {check.messages}")
    ball = space.canonical_balls()[atom.support_ball]
    members = ball.members
    chi = np.zeros(space.n)
    chi[members] = 1.0
    b_mean = float(np.sum(atom.values[members] * space.weight[members]) / ball.measure)

    c_values = (atom.values - b_mean * chi) / 2.0
    s_values = b_mean * chi
    c_atom = Atom(values=c_values, support_ball=atom.support_ball, kind="cancellative",
                  p=atom.p, q=atom.q)
    s_atom = Atom(values=s_values, support_ball=atom.support_ball, kind="local",
                  p=atom.p, q=np.inf)
    margin = validate_atom(space, c_atom, dclass).size_margin
    return SplitResult(
        cancellative=c_atom, constant_part=s_atom, scale_margin=margin, ball_mean=b_mean
    )


@dataclass(frozen=True)
class PairingResult:
    value: float
    bound: float
    within_bound: bool


def pairing(
    space: MetricMeasureSpace, f: np.ndarray, atom: Atom, dclass: BallClass
) -> PairingResult:
    """Weighted pairing sum(f * a * w) with its norm bound.

    For sup-normalized atoms (q = inf) the bound is the localized norm of
    f at alpha = 1/p - 1, exponent 1, with constant exactly one; the
    check is reported for other q as well but only guaranteed at q = inf.
    A local atom whose support ball is outside D is rejected.
    """
    f = np.asarray(f, dtype=float)
    if atom.kind == "local" and atom.support_ball not in dclass:
        raise ValueError("local atom supported outside the designated class")
    value = float(np.sum(f * atom.values * space.weight))
    bound = campanato_norm(space, f, 1.0 / atom.p - 1.0, 1.0, dclass).total
    return PairingResult(
        value=value, bound=bound, within_bound=abs(value) <= bound * (1 + 1e-12)
    )


@dataclass
class AtomicDecomposition:
    """A finite combination sum_j coeff_j * atom_j approximating a target."""

    terms: list[tuple[float, Atom]]
    p: float
    target: np.ndarray | None = None

    def reconstruction(self, space: MetricMeasureSpace) -> np.ndarray:
        out = np.zeros(space.n)
        for coeff, atom in self.terms:
            out += coeff * atom.values
        return out


def decomposition_cost(
    space: MetricMeasureSpace,
    dec: AtomicDecomposition,
    dclass: BallClass | None = None,
) -> float:
    """(sum |coeff|^p)^(1/p), after validating atoms and the reconstruction.

    When the decomposition carries a target, the reconstruction must match
    it to 1e-10 * max|coeff|.
    """
    if not dec.terms:
        return 0.0
    for coeff, atom in dec.terms:
        report = validate_atom(space, atom, dclass)
        if not report.ok:
            raise ValueError(f"invalid atom in decomposition: {report.messages}")
    coeffs = np.array([c for c, _ in dec.terms])
    if dec.target is not None:
        err = np.max(np.abs(dec.reconstruction(space) - dec.target))
        if err > 1e-10 * max(np.max(np.abs(coeffs)), 1e-300):
            raise ValueError(f"reconstruction error {err:.3e} exceeds tolerance")
    return float(np.sum(np.abs(coeffs) ** dec.p) ** (1.0 / dec.p))


def greedy_decomposition(
    space: MetricMeasureSpace,
    f: np.ndarray,
    p: float,
    q: float = np.inf,
    dclass: BallClass | None = None,
) -> AtomicDecomposition:
    """Multiscale greedy decomposition along the ball chain at the peak point.

    Peels the mean-free part of the residual on each ball centered at the
    largest-|f| point, inner to outer; the final all-of-space step leaves
    zero residual when f has zero weighted mean.  A nonzero global mean
    requires the all-of-space ball to lie in D (it becomes a local atom).
    """
    f = np.asarray(f, dtype=float)
    balls = space.canonical_balls()
    terms: list[tuple[float, Atom]] = []
    g = f.copy()

    mean = float(np.sum(g * space.weight) / space.total_measure)
    full_id = next(i for i, b in enumerate(balls) if b.size == space.n)
    if abs(mean) > 1e-14 * max(np.max(np.abs(f)), 1e-300):
        if dclass is None or full_id not in dclass:
            raise ValueError(
                "nonzero-mean targets need the all-of-space ball in the class D"
            )
        coeff = mean * space.total_measure ** (1.0 / p)
        terms.append((coeff, make_local_atom(space, full_id, p, np.inf)))
        g = g - mean

    peak = int(np.argmax(np.abs(g)))
    chain = sorted(
        (i for i, b in enumerate(balls) if any(c == peak for c, _ in b.realizations)),
        key=lambda i: balls[i].size,
    )
    if chain[-1] != full_id:
        chain.append(full_id)

    tol = 1e-14 * max(np.max(np.abs(f)), 1e-300)
    for ball_id in chain:
        ball = balls[ball_id]
        members = ball.members
        w = space.weight[members]
        local_mean = np.sum(g[members] * w) / ball.measure
        h = np.zeros(space.n)
        h[members] = g[members] - local_mean
        lq = weighted_lq_norm(space, h, q)
        if lq <= tol:
            continue
        budget = ball.measure ** ((1.0 / q if not np.isinf(q) else 0.0) - 1.0 / p)
        coeff = lq / budget
        atom = Atom(values=h / coeff, support_ball=ball_id, kind="cancellative", p=p, q=q)
        terms.append((coeff, atom))
        g = g - h

    return AtomicDecomposition(terms=terms, p=p, target=f)
