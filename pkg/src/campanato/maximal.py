"""Maximal operators, the square function, and boundedness reports.

The averaging maximal function is an exact maximum over every ball
containing the point (computed per center from prefix means of the
sorted distance row, so no ball list is materialized).  The radial and
Poisson maximal functions take the pointwise maximum of |T_t f| over a
geometric scale grid, a certified lower bound for the continuum
supremum; the square function

    g(f)(x) = ( int_0^inf |Q_t f(x)|^2 dt/t )^(1/2)

is a per-point trapezoid rule in log t with reported truncation-tail
bounds.  Boundedness reports fit the smallest constant mapping an input
oscillation norm to an output lower-oscillation norm over a seeded
function corpus, together with refinement diagnostics; the constants are
fitted, never asserted.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fnspaces import BallClass, campanato_blo_norm, campanato_norm, dclass_from_rho
from .semigroup import KernelFamily, OperatorSpectrum, default_scale_grid
from .space import MetricMeasureSpace, doubling_profile

__all__ = [
    "hl_maximal",
    "radial_maximal",
    "poisson_maximal",
    "g_function",
    "GFunctionResult",
    "VerificationReport",
    "boundedness_report",
    "hl_domination_split",
    "make_corpus",
]


def hl_maximal(space: MetricMeasureSpace, f: np.ndarray) -> np.ndarray:
    """Exact averaging maximal function: max over balls containing x of mean_B |f|.

    Per center the candidate means are the prefix means of the sorted
    distance row; the balls containing y are exactly the prefixes from
    y's distance group outward, so a suffix maximum finishes the job.
    """
    f = np.asarray(f, dtype=float)
    absf_w = np.abs(f) * space.weight
    out = np.abs(f).astype(float)  # singleton ball at each point
    for c in range(space.n):
        row = space.row(c)
        order = np.argsort(row, kind="stable")
        cw = np.cumsum(space.weight[order])
        cg = np.cumsum(absf_w[order])
        sorted_d = row[order]
        uniq, inv = np.unique(row, return_inverse=True)
        ends = np.searchsorted(sorted_d, uniq, side="right") - 1
        means = cg[ends] / cw[ends]
        suffix = np.maximum.accumulate(means[::-1])[::-1]
        np.maximum(out, suffix[inv], out=out)
    return out


def _scale_max(spec: OperatorSpectrum, kind: str, f: np.ndarray, grid: np.ndarray) -> np.ndarray:
    if len(grid) == 0:
        raise ValueError("scale grid must be nonempty")
    fam = KernelFamily(spec, kind, np.asarray(grid, dtype=float))
    return np.max(np.abs(fam.apply_grid(f)), axis=0)


def radial_maximal(spec: OperatorSpectrum, f: np.ndarray, scale_grid: np.ndarray) -> np.ndarray:
    """Pointwise max of |exp(-t^2 L) f| over the grid (lower bound for sup_t)."""
    return _scale_max(spec, "heat", f, scale_grid)


def poisson_maximal(spec: OperatorSpectrum, f: np.ndarray, scale_grid: np.ndarray) -> np.ndarray:
    """Pointwise max of |exp(-t sqrt(L)) f| over the grid."""
    return _scale_max(spec, "poisson", f, scale_grid)


@dataclass(frozen=True)
class GFunctionResult:
    """Square function values plus bounds on the truncated tail integrals.

    tail_low/tail_high bound the mass of |Q_t f|^2 dt/t outside the grid
    span (per point, on the squared scale), derived from the envelope
    |Q_t f| <= t^2 lam_max B(x) for small t and the decay through the
    smallest positive eigenvalue for large t.
    """

    values: np.ndarray
    grid: np.ndarray
    tail_low: np.ndarray
    tail_high: np.ndarray


def g_function(
    spec: OperatorSpectrum,
    f: np.ndarray,
    scale_grid: np.ndarray | None = None,
    per_octave: int = 4,
) -> GFunctionResult:
    """Trapezoid rule in log t for the square function on a geometric grid.

    The default grid spans [h/4, 4 diam] at 2^(1/per_octave) ratio; a
    supplied grid must be geometric and span at least that range.
    """
    f = np.asarray(f, dtype=float)
    space = spec.space
    if scale_grid is None:
        grid = default_scale_grid(space, per_octave=per_octave)
    else:
        grid = np.asarray(scale_grid, dtype=float)
        logs = np.diff(np.log(grid))
        if len(grid) < 2 or np.any(logs <= 0) or np.ptp(logs) > 1e-9 * logs[0]:
            raise ValueError("scale grid must be geometric and increasing")
        if space.grid is not None:
            h, diam = space.grid.h, space.diameter
            if grid[0] > h / 4.0 * (1 + 1e-12) or grid[-1] < 4.0 * diam * (1 - 1e-12):
                raise ValueError("scale grid must span [h/4, 4*diam]")

    fam = KernelFamily(spec, "qt", grid)
    q_vals = fam.apply_grid(f)  # (T, n)
    u = np.log(grid)
    g_sq = np.trapezoid(q_vals**2, u, axis=0)

    lam = spec.eigenvalues
    coeff = spec.mode_coefficients(f)
    envelope = np.abs(spec.eigenvectors) @ np.abs(coeff)  # B(x) >= |Q_t f(x)| / (u e^-u scale)
    lam_max = float(lam.max()) if lam.size else 0.0
    positive = lam[lam > 1e-12 * max(lam_max, 1.0)]
    tail_low = (lam_max * grid[0] ** 2) ** 2 / 4.0 * envelope**2
    if positive.size:
        u0 = grid[-1] ** 2 * float(positive.min())
        u0 = max(u0, 1.0)  # envelope u e^-u is decreasing past 1
        tail_high = 0.5 * np.exp(-2.0 * u0) * (u0 / 2.0 + 0.25) * envelope**2
    else:
        tail_high = np.zeros_like(tail_low)
    return GFunctionResult(
        values=np.sqrt(g_sq), grid=grid, tail_low=tail_low, tail_high=tail_high
    )


# ---------------------------------------------------------------------------
# Boundedness verification reports
# ---------------------------------------------------------------------------

THEOREM_IDS = ("thm31", "thm32", "thm41", "cor41", "lemma41", "lemma24", "hl_domination")


@dataclass
class VerificationReport:
    """Fitted constant for one operator-boundedness check over a corpus."""

    theorem_id: str
    alpha: float
    p: float
    corpus_size: int
    sup_ratio: float
    worst_function: int
    refinement_ratios: list[float] = field(default_factory=list)
    skipped_zero_norm: int = 0
    alpha_in_range: bool | None = None
    details: dict = field(default_factory=dict)
    table: list[dict] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "theorem_id": self.theorem_id,
            "alpha": self.alpha,
            "p": self.p,
            "corpus_size": self.corpus_size,
            "sup_ratio": self.sup_ratio,
            "worst_function": self.worst_function,
            "refinement_ratios": list(self.refinement_ratios),
            "skipped_zero_norm": self.skipped_zero_norm,
            "alpha_in_range": self.alpha_in_range,
            "details": self.details,
            "table": self.table,
        }


def _alpha_range_ok(theorem_id: str, alpha: float, n_exp: float, par: dict) -> bool | None:
    """Admissible-exponent check for the fitted kernel exponents."""
    n = max(n_exp, 1e-9)
    g, b = par.get("gamma", 1.0), par.get("beta", 1.0)
    d1, d2 = par.get("delta1", 1.0), par.get("delta2", 1.0)
    if theorem_id == "thm31":
        return alpha < g / n and alpha <= min(b / (2 * n), d1 / n, d2 / (2 * n))
    if theorem_id == "thm32":
        gp, bp, d2p = min(g, 1.0), min(b, 1.0), min(d2, 1.0)
        return alpha < gp / n and alpha <= min(bp / (2 * n), d1 / n, d2p / (2 * n))
    if theorem_id in ("thm41", "cor41"):
        return alpha <= b / (3 * n) and alpha < min(g / n, d1 / n, d2 / (3 * n))
    if theorem_id == "lemma41":
        return alpha < min(g, d2) / n
    return None


def boundedness_report(
    theorem_id: str,
    spec: OperatorSpectrum,
    rho: np.ndarray,
    alpha: float,
    p: float,
    corpus: np.ndarray,
    scale_grid: np.ndarray | None = None,
    exponents: dict | None = None,
) -> VerificationReport:
    """Sup over the corpus of output-norm / input-norm for one check id.

    Inputs are measured in the localized mean-oscillation norm with the
    class D_rho; outputs in the lower-oscillation norm (squared-function
    checks use doubled alpha and halved p, with the input norm squared).
    Zero-input-norm functions are skipped and counted.  lemma41 fits the
    pointwise |Q_t f| envelope constant and lemma24 the ball-mean growth
    envelope for balls outside D_rho; hl_domination is handled by
    `hl_domination_split`.
    """
    if theorem_id not in THEOREM_IDS:
        raise ValueError(f"unknown theorem id {theorem_id!r}")
    if theorem_id == "hl_domination":
        raise ValueError("use hl_domination_split for the split-corpus fit")
    corpus = np.atleast_2d(np.asarray(corpus, dtype=float))
    if corpus.shape[0] == 0:
        raise ValueError("corpus must be nonempty")
    space = spec.space
    rho = np.asarray(rho, dtype=float)
    dclass = dclass_from_rho(space, rho)
    grid = default_scale_grid(space) if scale_grid is None else np.asarray(scale_grid)
    par = dict(exponents or {})
    profile = doubling_profile(space)
    in_range = _alpha_range_ok(theorem_id, alpha, profile.n_exp, par)

    sup_ratio = 0.0
    worst = -1
    skipped = 0
    table: list[dict] = []

    if theorem_id == "lemma24":
        sup_ratio, worst, skipped, table = _lemma24_fit(space, dclass, rho, alpha, p, corpus)
    elif theorem_id == "lemma41":
        sup_ratio, worst, skipped, table = _lemma41_fit(
            spec, rho, alpha, p, corpus, grid, par.get("delta1", 1.0), dclass
        )
    else:
        for i, f in enumerate(corpus):
            in_norm = campanato_norm(space, f, alpha, p, dclass).total
            if in_norm <= 0.0:
                skipped += 1
                continue
            if theorem_id == "thm31":
                out = radial_maximal(spec, f, grid)
                out_norm = campanato_blo_norm(space, out, alpha, p, dclass).total
                ratio = out_norm / in_norm
            elif theorem_id == "thm32":
                out = poisson_maximal(spec, f, grid)
                out_norm = campanato_blo_norm(space, out, alpha, p, dclass).total
                ratio = out_norm / in_norm
            elif theorem_id == "thm41":
                gval = g_function(spec, f, grid).values
                out_norm = campanato_blo_norm(space, gval**2, 2 * alpha, p / 2.0, dclass).total
                ratio = out_norm / in_norm**2
            elif theorem_id == "cor41":
                gval = g_function(spec, f, grid).values
                out_norm = campanato_blo_norm(space, gval, alpha, p, dclass).total
                ratio = out_norm / in_norm
            else:  # pragma: no cover
                raise AssertionError(theorem_id)
            table.append(
                {
                    "function_id": i,
                    "input_norm": in_norm,
                    "output_norm": out_norm,
                    "ratio": ratio,
                }
            )
            if ratio > sup_ratio:
                sup_ratio, worst = ratio, i

    return VerificationReport(
        theorem_id=theorem_id,
        alpha=alpha,
        p=p,
        corpus_size=corpus.shape[0],
        sup_ratio=float(sup_ratio),
        worst_function=worst,
        refinement_ratios=[float(sup_ratio)],
        skipped_zero_norm=skipped,
        alpha_in_range=in_range,
        details={"n_exp": profile.n_exp, "exponents": par},
        table=table,
    )


def _lemma24_fit(space, dclass, rho, alpha, p, corpus):
    """Envelope constant for ball means of unit-norm functions off D_rho.

    For each realization B(x0, r) with r < rho(x0):  mean_B |f| against
    (rho(x0)/r)^(alpha n) mu(B)^alpha for alpha > 0, or
    (1 + log(rho(x0)/r)) mu(B)^alpha for alpha <= 0.
    """
    balls = space.canonical_balls()
    n_exp = doubling_profile(space).n_exp
    cents, rads, offs = balls.realization_arrays()
    flat, boffs = balls.flat_members, balls.offsets
    sup_ratio, worst, skipped = 0.0, -1, 0
    table = []
    for i, f in enumerate(corpus):
        norm = campanato_norm(space, f, alpha, p, dclass).total
        if norm <= 0:
            skipped += 1
            continue
        f1 = f / norm
        means = np.add.reduceat(np.abs(f1[flat]) * space.weight[flat], boffs[:-1]) / balls.measures
        best = 0.0
        for b in range(len(balls)):
            for j in range(offs[b], offs[b + 1]):
                x0, r = int(cents[j]), float(rads[j])
                if r >= rho[x0]:
                    continue
                if alpha > 0:
                    env = (rho[x0] / r) ** (alpha * n_exp) * balls.measures[b] ** alpha
                else:
                    env = (1.0 + np.log(rho[x0] / r)) * balls.measures[b] ** alpha
                best = max(best, means[b] / env)
        table.append({"function_id": i, "input_norm": norm, "output_norm": best, "ratio": best})
        if best > sup_ratio:
            sup_ratio, worst = best, i
    return sup_ratio, worst, skipped, table


def _lemma41_fit(spec, rho, alpha, p, corpus, grid, delta1, dclass):
    """Pointwise envelope fit |Q_t f(x)| <= C (rho/(t+rho))^d1 mu(B(x,t))^alpha."""
    space = spec.space
    fam = KernelFamily(spec, "qt", grid)
    mu_t = np.array([((space.dist < t) * space.weight[None, :]).sum(axis=1) for t in grid])
    env = ((rho[None, :] / (grid[:, None] + rho[None, :])) ** delta1) * mu_t**alpha
    sup_ratio, worst, skipped = 0.0, -1, 0
    table = []
    for i, f in enumerate(corpus):
        norm = campanato_norm(space, f, alpha, p, dclass).total
        if norm <= 0:
            skipped += 1
            continue
        q = np.abs(fam.apply_grid(f / norm))
        ratio = float(np.max(q / env))
        table.append({"function_id": i, "input_norm": norm, "output_norm": ratio, "ratio": ratio})
        if ratio > sup_ratio:
            sup_ratio, worst = ratio, i
    return sup_ratio, worst, skipped, table


def hl_domination_split(
    spec: OperatorSpectrum,
    corpus: np.ndarray,
    scale_grid: np.ndarray | None = None,
) -> dict:
    """Fit sup_x T+f(x)/HLf(x) on the first corpus half, verify on the second.

    Returns the fitted constant, the verification maximum, and the count
    of held-out violations (points where T+f exceeds the fitted constant
    times HLf beyond roundoff).
    """
    corpus = np.atleast_2d(np.asarray(corpus, dtype=float))
    space = spec.space
    grid = default_scale_grid(space) if scale_grid is None else np.asarray(scale_grid)
    half = corpus.shape[0] // 2
    if half == 0 or corpus.shape[0] < 2:
        raise ValueError("need at least two corpus functions to split")

    def max_ratio(f):
        tplus = radial_maximal(spec, f, grid)
        hl = hl_maximal(space, f)
        mask = hl > 0
        return float(np.max(tplus[mask] / hl[mask])) if mask.any() else 0.0

    fit_c = max(max_ratio(f) for f in corpus[:half] if np.any(f != 0.0))
    violations = 0
    verify_max = 0.0
    for f in corpus[half:]:
        if not np.any(f != 0.0):
            continue
        r = max_ratio(f)
        verify_max = max(verify_max, r)
        if r > fit_c * (1.0 + 1e-10):
            violations += 1
    return {
        "fitted_constant": fit_c,
        "verify_max": verify_max,
        "violations": violations,
        "fit_half": half,
        "verify_half": corpus.shape[0] - half,
    }


# ---------------------------------------------------------------------------
# Seeded function corpus
# ---------------------------------------------------------------------------

def make_corpus(
    space: MetricMeasureSpace,
    size: int,
    seed: int = 0,
    inner_fraction: float = 0.5,
    alpha_hint: float = 0.5,
) -> np.ndarray:
    """Seeded corpus of test functions supported in the inner box.

    A deterministic mixture of random smooth-mode combinations, mean-free
    bump profiles on small balls, and clamped power profiles |x - x0|^s,
    all multiplied by the indicator of the inner box (coordinatewise
    |x| <= inner_fraction * extent); on non-grid spaces the inner cut is
    skipped.  Row i is function i.
    """
    rng = np.random.default_rng(seed)
    n = space.n
    if space.coords is not None:
        coords = space.coords
        if space.grid is not None:
            cut = inner_fraction * space.grid.extent
            inner = np.all(np.abs(coords - np.mean(coords, axis=0)) <= cut + 1e-12, axis=1)
        else:
            inner = np.ones(n, dtype=bool)
        span = np.ptp(coords, axis=0).max()
    else:
        coords = None
        inner = np.ones(n, dtype=bool)
        span = space.diameter

    out = np.zeros((size, n))
    kinds = ["modes", "bump", "power"]
    for i in range(size):
        kind = kinds[i % len(kinds)]
        if kind == "modes" or coords is None:
            f = np.zeros(n)
            for _ in range(rng.integers(1, 4)):
                k = rng.integers(1, 6)
                amp = rng.normal()
                phase = rng.uniform(0, 2 * np.pi)
                if coords is None:
                    ref = space.dist[rng.integers(0, n)]
                else:
                    ref = coords @ rng.normal(size=coords.shape[1])
                f += amp * np.sin(k * np.pi * ref / max(span, 1e-9) + phase)
        elif kind == "bump":
            center = int(rng.integers(0, n))
            radius = rng.uniform(0.1, 0.5) * span
            prof = np.maximum(0.0, 1.0 - (space.dist[center] / max(radius, 1e-9)) ** 2)
            w = space.weight
            f = prof - np.sum(prof * w) / np.sum(w)
            f *= rng.normal() * 2.0
        else:  # clamped power profile
            center = int(rng.integers(0, n))
            s = max(alpha_hint, 0.25)
            clamp = rng.uniform(0.2, 0.8) * span
            f = np.minimum(space.dist[center], clamp) ** s
            f *= rng.normal()
        out[i] = f * inner
    return out
