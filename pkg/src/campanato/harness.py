"""Scenario runner: build a space and potential from a JSON config, run
named checks, and write one JSON report per check plus a summary.

Checks come in two kinds.  Hard checks verify identities and inequalities
that hold with explicit constants (localization split with constants 2
and 3, truncation with 9/4, atom pairing with 1, the per-ball factor 2^p,
exponent monotonicity, subordination agreement, the derivative-kernel
finite-difference check, and the square-function eigen identities); a
hard failure sets exit status 1 and prints the witness.  Soft checks fit
constants that the theory provides only existentially (operator norms,
kernel envelope constants, growth profiles); they are reported but never
fail the run.

Exit codes: 0 all hard checks pass, 1 hard-check failure, 2 usage or
config error.  For a fixed seed the written reports are byte-identical
across runs (floats are rounded to 12 significant digits; the only
timestamp lives in the summary).
"""

from __future__ import annotations

import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from jsonschema import Draft202012Validator

from . import atoms as atoms_mod
from . import fnspaces, maximal, potential as potential_mod, semigroup
from .space import (
    MetricMeasureSpace,
    build_grid_space,
    line_space,
    doubling_profile,
    random_metric_space,
    two_point_space,
)

__all__ = ["Scenario", "run_scenario", "export_plot_data", "list_checks", "ScenarioError"]

HARD_REL_TOL = 1e-10


class ScenarioError(ValueError):
    """Configuration problems: unknown checks, bad schema, wrong space kind."""


SCENARIO_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["space", "checks", "params"],
    "additionalProperties": False,
    "properties": {
        "label": {"type": "string"},
        "space": {
            "type": "object",
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["grid", "builtin", "explicit"]},
                "dim": {"enum": [1, 2]},
                "extent": {"type": "number", "exclusiveMinimum": 0},
                "n_per_axis": {"type": "integer", "minimum": 2},
                "weight": {
                    "oneOf": [
                        {"const": "uniform"},
                        {
                            "type": "object",
                            "required": ["power"],
                            "properties": {"power": {"type": "number"}},
                        },
                    ]
                },
                "name": {"type": "string"},
                "seed": {"type": "integer"},
                "document": {"type": "object"},
            },
        },
        "potential": {
            "type": "object",
            "required": ["kind"],
            "properties": {
                "kind": {
                    "enum": ["constant", "step", "clamped_square", "power", "explicit"]
                },
                "value": {"type": "number", "minimum": 0},
                "low": {"type": "number", "minimum": 0},
                "high": {"type": "number", "minimum": 0},
                "cap": {"type": "number", "exclusiveMinimum": 0},
                "sigma": {"type": "number"},
                "values": {"type": "array", "items": {"type": "number", "minimum": 0}},
            },
        },
        "bc": {"enum": ["dirichlet", "periodic"]},
        "rho": {
            "oneOf": [
                {"const": "from_potential"},
                {
                    "type": "object",
                    "required": ["explicit"],
                    "properties": {
                        "explicit": {
                            "type": "array",
                            "items": {"type": "number", "exclusiveMinimum": 0},
                        }
                    },
                },
            ]
        },
        "params": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["alpha", "p"],
                "properties": {
                    "alpha": {"type": "number"},
                    "p": {"type": "number", "exclusiveMinimum": 0},
                },
            },
        },
        "checks": {"type": "array", "minItems": 1, "items": {"type": "string"}},
        "seed": {"type": "integer"},
        "corpus_size": {"type": "integer", "minimum": 1},
        "out_dir": {"type": "string"},
    },
}


@dataclass
class Scenario:
    """Parsed configuration plus lazily built resources."""

    config: dict
    seed: int
    out_dir: Path
    _space: MetricMeasureSpace | None = None
    _v: np.ndarray | None = None
    _rho: np.ndarray | None = None
    _spectrum: object | None = None
    _corpus: np.ndarray | None = None
    results: dict = field(default_factory=dict)

    # -- resource builders --------------------------------------------------

    @property
    def space(self) -> MetricMeasureSpace:
        if self._space is None:
            self._space = _build_space(self.config["space"])
        return self._space

    @property
    def v(self) -> np.ndarray:
        if self._v is None:
            self._v = _build_potential(self.config.get("potential"), self.space)
        return self._v

    @property
    def rho(self) -> np.ndarray:
        if self._rho is None:
            spec = self.config.get("rho", "from_potential")
            if spec == "from_potential":
                self._rho = potential_mod.critical_radius(self.space, self.v).rho
            else:
                rho = np.asarray(spec["explicit"], dtype=float)
                if rho.shape != (self.space.n,):
                    raise ScenarioError("explicit rho length must match the space")
                self._rho = rho
        return self._rho

    @property
    def dclass(self) -> fnspaces.BallClass:
        return fnspaces.dclass_from_rho(self.space, self.rho)

    @property
    def spectrum(self):
        if self._spectrum is None:
            if self.space.grid is None and self.space.n > 1:
                raise ScenarioError("spectral checks need a grid-built space")
            self._spectrum = semigroup.build_schrodinger(
                self.space, self.v, self.config.get("bc", "dirichlet")
            )
        return self._spectrum

    @property
    def corpus(self) -> np.ndarray:
        if self._corpus is None:
            self._corpus = maximal.make_corpus(
                self.space, self.config.get("corpus_size", 50), seed=self.seed
            )
        return self._corpus

    @property
    def params(self) -> list[tuple[float, float]]:
        return [(float(q["alpha"]), float(q["p"])) for q in self.config["params"]]

    def rng(self, salt: int = 0) -> np.random.Generator:
        return np.random.default_rng(self.seed + 1000003 * salt)


def _build_space(doc: dict) -> MetricMeasureSpace:
    kind = doc["kind"]
    if kind == "grid":
        weight = doc.get("weight", "uniform")
        spec = "uniform" if weight == "uniform" else ("power", float(weight["power"]))
        return build_grid_space(
            dim=doc.get("dim", 1),
            extent=doc.get("extent", 1.0),
            n_per_axis=doc.get("n_per_axis", 64),
            weight_spec=spec,
        )
    if kind == "builtin":
        name = doc.get("name", "random16")
        seed = doc.get("seed", 0)
        builders = {
            "two_point": lambda: two_point_space(),
            "line3": lambda: line_space([0.0, 1.0, 3.0], label="line3"),
            "random16": lambda: random_metric_space(16, seed=seed),
            "random12": lambda: random_metric_space(12, seed=seed),
            "grid64": lambda: build_grid_space(1, 1.0, 64),
        }
        if name not in builders:
            raise ScenarioError(f"unknown builtin space {name!r}")
        return builders[name]()
    if kind == "explicit":
        if "document" not in doc:
            raise ScenarioError("explicit space needs an inline 'document'")
        return MetricMeasureSpace.from_json_dict(doc["document"])
    raise ScenarioError(f"unknown space kind {kind!r}")


def _build_potential(doc: dict | None, space: MetricMeasureSpace) -> np.ndarray:
    if doc is None:
        return np.full(space.n, 4.0)
    kind = doc["kind"]
    if kind == "constant":
        return np.full(space.n, float(doc.get("value", 4.0)))
    coords = space.coords
    if kind == "explicit":
        vals = np.asarray(doc["values"], dtype=float)
        if vals.shape != (space.n,):
            raise ScenarioError("explicit potential length must match the space")
        return vals
    if coords is None:
        raise ScenarioError(f"potential kind {kind!r} needs point coordinates")
    x0 = coords[:, 0]
    if kind == "step":
        low, high = float(doc.get("low", 1.0)), float(doc.get("high", 9.0))
        return np.where(x0 >= 0, high, low)
    if kind == "clamped_square":
        cap = float(doc.get("cap", 1.0))
        return np.minimum((coords**2).sum(axis=1), cap)
    if kind == "power":
        sigma = float(doc.get("sigma", 0.5))
        r = np.sqrt((coords**2).sum(axis=1))
        if np.any(r == 0):
            raise ScenarioError("power potential undefined at the origin node")
        return r**sigma
    raise ScenarioError(f"unknown potential kind {kind!r}")


# ---------------------------------------------------------------------------
# Check implementations
# ---------------------------------------------------------------------------

def _dclass_variants(sc: Scenario) -> list[fnspaces.BallClass]:
    """The class from rho, everything, and a seeded random subset."""
    balls = sc.space.canonical_balls()
    rng = sc.rng(7)
    random_ids = np.flatnonzero(rng.random(len(balls)) < 0.3)
    return [
        sc.dclass,
        fnspaces.BallClass.all_balls(balls),
        fnspaces.BallClass(random_ids),
    ]


def _check_lemma21(sc: Scenario) -> dict:
    """Two-sided localization split with constants 2 and 3 (p >= 1)."""
    space = sc.space
    violations = []
    worst_margin = 0.0
    n_checked = 0
    for alpha, p in sc.params:
        if p < 1:
            continue
        for d_i, dclass in enumerate(_dclass_variants(sc)):
            for i, f in enumerate(sc.corpus):
                loc = fnspaces.campanato_norm(space, f, alpha, p, dclass).total
                glob, size_sup = fnspaces.localization_split(space, f, alpha, p, dclass)
                scale = max(loc, glob + size_sup, 1e-300)
                up = loc - (2.0 * glob + size_sup)
                down = (glob + size_sup) - 3.0 * loc
                worst_margin = max(worst_margin, up / scale, down / scale)
                n_checked += 1
                if up > HARD_REL_TOL * scale or down > HARD_REL_TOL * scale:
                    violations.append(
                        {"function_id": i, "alpha": alpha, "p": p, "dclass": d_i,
                         "upper_excess": up, "lower_excess": down}
                    )
    return {
        "passed": not violations,
        "checked": n_checked,
        "worst_relative_margin": worst_margin,
        "violations": violations[:10],
    }


def _check_eq27(sc: Scenario) -> dict:
    """Truncation inequality: clamped f keeps at most 9/4 of the localized norm."""
    space = sc.space
    violations = []
    worst = 0.0
    n_checked = 0
    rng = sc.rng(3)
    for p_small in (1.0, 0.5):
        alpha = 1.0 / p_small - 1.0
        for dclass in _dclass_variants(sc):
            for i, f in enumerate(sc.corpus):
                base = fnspaces.campanato_norm(space, f, alpha, 1.0, dclass).total
                level = float(rng.uniform(0.1, 1.0)) * max(np.max(np.abs(f)), 1e-12)
                fn = fnspaces.truncate(f, level)
                trunc = fnspaces.campanato_norm(space, fn, alpha, 1.0, dclass).total
                excess = trunc - 2.25 * base
                scale = max(base, 1e-300)
                worst = max(worst, excess / scale)
                n_checked += 1
                if excess > HARD_REL_TOL * scale:
                    violations.append({"function_id": i, "p": p_small, "excess": excess})
    return {
        "passed": not violations,
        "checked": n_checked,
        "worst_relative_margin": worst,
        "violations": violations[:10],
    }


def _check_atom_pairing(sc: Scenario) -> dict:
    """Pairing of sup-normalized atoms against the localized norm, constant one."""
    space = sc.space
    balls = space.canonical_balls()
    dclass = sc.dclass
    rng = sc.rng(11)
    d_ids = sorted(dclass.ids)
    out_ids = [i for i in range(len(balls)) if i not in dclass and balls[i].size >= 2]
    violations = []
    worst = 0.0
    n_checked = 0
    for i, f in enumerate(sc.corpus):
        for p in (1.0, 0.5):
            candidates = []
            if out_ids:
                bid = int(rng.choice(out_ids))
                prof = rng.normal(size=space.n)
                candidates.append(atoms_mod.make_cancellative_atom(space, bid, prof, p))
            if d_ids:
                candidates.append(atoms_mod.make_local_atom(space, int(rng.choice(d_ids)), p))
            for atom in candidates:
                res = atoms_mod.pairing(space, f, atom, dclass)
                excess = abs(res.value) - res.bound
                scale = max(res.bound, 1e-300)
                worst = max(worst, excess / scale)
                n_checked += 1
                if excess > HARD_REL_TOL * scale:
                    violations.append(
                        {"function_id": i, "p": p, "kind": atom.kind, "excess": excess}
                    )
    return {
        "passed": not violations,
        "checked": n_checked,
        "worst_relative_margin": worst,
        "violations": violations[:10],
    }


def _check_blo_factor(sc: Scenario) -> dict:
    """Per ball: sum |f - f_B|^p w <= 2^p sum (f - min_B f)^p w."""
    space = sc.space
    balls = space.canonical_balls()
    flat, offs = balls.flat_members, balls.offsets
    w_flat = space.weight[flat]
    violations = []
    worst = 0.0
    n_checked = 0
    for p in (1.0, 2.0):
        for i, f in enumerate(sc.corpus):
            f_flat = f[flat]
            means = np.add.reduceat(f_flat * w_flat, offs[:-1]) / balls.measures
            mins = np.minimum.reduceat(f_flat, offs[:-1])
            mean_osc = np.add.reduceat(
                np.abs(f_flat - np.repeat(means, balls.sizes)) ** p * w_flat, offs[:-1]
            )
            min_osc = np.add.reduceat(
                (f_flat - np.repeat(mins, balls.sizes)) ** p * w_flat, offs[:-1]
            )
            excess = mean_osc - 2.0**p * min_osc
            scale = np.maximum(mean_osc, 1e-300)
            rel = excess / scale
            worst = max(worst, float(rel.max()))
            n_checked += len(balls)
            bad = np.flatnonzero(rel > HARD_REL_TOL)
            for b in bad[:3]:
                violations.append({"function_id": i, "p": p, "ball": int(b)})
    return {
        "passed": not violations,
        "checked": n_checked,
        "worst_relative_margin": worst,
        "violations": violations[:10],
    }


def _check_holder_monotonicity(sc: Scenario) -> dict:
    """Per ball, the normalized L^1 oscillation never exceeds the L^2 one."""
    space = sc.space
    balls = space.canonical_balls()
    flat, offs = balls.flat_members, balls.offsets
    w_flat = space.weight[flat]
    violations = []
    worst = 0.0
    for i, f in enumerate(sc.corpus):
        f_flat = f[flat]
        means = np.add.reduceat(f_flat * w_flat, offs[:-1]) / balls.measures
        dev = np.abs(f_flat - np.repeat(means, balls.sizes))
        l1 = np.add.reduceat(dev * w_flat, offs[:-1]) / balls.measures
        l2 = np.sqrt(np.add.reduceat(dev**2 * w_flat, offs[:-1]) / balls.measures)
        excess = l1 - l2
        scale = np.maximum(l2, 1e-300)
        rel = excess / scale
        worst = max(worst, float(rel.max()))
        bad = np.flatnonzero(rel > HARD_REL_TOL)
        for b in bad[:3]:
            violations.append({"function_id": i, "ball": int(b)})
    return {
        "passed": not violations,
        "checked": len(sc.corpus) * len(balls),
        "worst_relative_margin": worst,
        "violations": violations[:10],
    }


def _check_subordination(sc: Scenario) -> dict:
    """Spectral vs quadrature Poisson kernels across the scale grid."""
    spec = sc.spectrum
    grid = semigroup.default_scale_grid(sc.space)
    worst = 0.0
    worst_t = None
    for t in grid:
        a = semigroup.poisson_kernel(spec, float(t), method="spectral")
        b = semigroup.poisson_kernel(spec, float(t), method="quadrature")
        err = float(np.max(np.abs(a - b)))
        if err > worst:
            worst, worst_t = err, float(t)
    return {"passed": worst <= 1e-6, "max_abs_error": worst, "worst_scale": worst_t,
            "tolerance": 1e-6}


def _check_qt_gradient(sc: Scenario) -> dict:
    """Q_t against the centered difference of the heat flow at s = t^2."""
    spec = sc.spectrum
    grid = semigroup.default_scale_grid(sc.space)
    mid = grid[len(grid) // 4 : 3 * len(grid) // 4 : max(1, len(grid) // 8)]
    worst = 0.0
    worst_t = None
    for t in mid:
        t = float(t)
        s = t * t
        ds = s * 1e-4
        q = semigroup.qt_kernel(spec, t)
        lam = spec.eigenvalues
        up = spec.kernel_from_factors(np.exp(-(s + ds) * lam))
        down = spec.kernel_from_factors(np.exp(-(s - ds) * lam))
        fd = s * (up - down) / (2.0 * ds)
        scale = max(float(np.max(np.abs(q))), 1e-300)
        err = float(np.max(np.abs(q - fd))) / scale
        if err > worst:
            worst, worst_t = err, t
    return {"passed": worst <= 1e-5, "max_rel_error": worst, "worst_scale": worst_t,
            "tolerance": 1e-5}


def _g_identity_errors(sc: Scenario, per_octave: int) -> dict:
    spec = sc.spectrum
    space = sc.space
    lam = spec.eigenvalues
    h = space.grid.h if space.grid is not None else space.radius_increment
    lam_max = float(lam.max())
    t_min = min(h / 4.0, 0.05 / np.sqrt(lam_max))
    positive = lam[lam > 1e-12 * max(lam_max, 1.0)]
    t_max = max(4.0 * space.diameter, 4.0 / np.sqrt(float(positive.min())))
    grid = semigroup.default_scale_grid(space, per_octave=per_octave, t_min=t_min, t_max=t_max)
    target = 8.0**-0.5

    idxs = [k for k in np.linspace(0, space.n - 1, 5).astype(int) if lam[k] > 0]
    eig_err = 0.0
    for k in idxs:
        phi = spec.eigenvectors[:, k]
        g = maximal.g_function(spec, phi, grid).values
        ref = target * np.abs(phi)
        eig_err = max(eig_err, float(np.max(np.abs(g - ref)) / np.max(ref)))

    rng = sc.rng(13)
    f = rng.normal(size=space.n)
    g = maximal.g_function(spec, f, grid).values
    l2 = np.sqrt(np.sum(g**2 * space.weight))
    coeff = spec.mode_coefficients(f)
    perp = np.sqrt(np.sum(coeff[lam > 1e-12 * max(lam_max, 1.0)] ** 2))
    l2_err = abs(l2 - target * perp) / (target * perp)
    return {"eigenfunction_rel_error": eig_err, "l2_rel_error": float(l2_err)}


def _check_g_identity(sc: Scenario) -> dict:
    base = _g_identity_errors(sc, per_octave=4)
    dense = _g_identity_errors(sc, per_octave=8)
    worst = max(base["eigenfunction_rel_error"], base["l2_rel_error"])
    return {
        "passed": worst <= 1e-3,
        "tolerance": 1e-3,
        "base": base,
        "double_density": dense,
    }


def _check_boundedness(theorem_id: str):
    def run(sc: Scenario) -> dict:
        reports = []
        for alpha, p in sc.params:
            rep = maximal.boundedness_report(
                theorem_id, sc.spectrum, sc.rho, alpha, p, sc.corpus
            )
            reports.append(rep.to_json_dict())
        return {
            "passed": None,
            "export_kind": "ratio_table",
            "reports": reports,
            "table": reports[0]["table"],
        }

    return run


def _check_hl_domination(sc: Scenario) -> dict:
    res = maximal.hl_domination_split(sc.spectrum, sc.corpus)
    return {"passed": None, **res}


def _check_lemma23(sc: Scenario) -> dict:
    """Size-only norm vs localized norm for alpha < 0 (3x one way, fitted back)."""
    space = sc.space
    dclass = sc.dclass
    rows = []
    worst_ratio = 0.0
    forward_violations = 0
    for alpha, p in sc.params:
        if alpha >= 0 or p < 1:
            continue
        for i, f in enumerate(sc.corpus):
            m = fnspaces.morrey_norm(space, f, alpha, p)
            loc = fnspaces.campanato_norm(space, f, alpha, p, dclass).total
            if m <= 0:
                continue
            if loc > 3.0 * m * (1.0 + HARD_REL_TOL):
                forward_violations += 1
            back = m / loc if loc > 0 else np.inf
            worst_ratio = max(worst_ratio, back)
            rows.append({"function_id": i, "alpha": alpha, "p": p,
                         "morrey": m, "localized": loc})
    profile = doubling_profile(space)
    return {
        "passed": None,
        "forward_violations": forward_violations,
        "fitted_reverse_constant": worst_ratio,
        "reverse_doubling_kappa": profile.kappa,
        "rows": rows[:200],
    }


def _check_kernel_fit(bound_id: str, kind: str):
    def run(sc: Scenario) -> dict:
        fam = semigroup.KernelFamily(
            sc.spectrum, kind, semigroup.default_scale_grid(sc.space)
        )
        fit = semigroup.kernel_bound_fit(fam, sc.rho, bound_id)
        return {
            "passed": None,
            "bound_id": bound_id,
            "family": kind,
            "constant": fit.constant,
            "witness": fit.witness,
            "no_data_scales": list(fit.no_data_scales),
            "per_scale": [[t, c] for t, c in fit.per_scale],
        }

    return run


def _check_space_profile(sc: Scenario) -> dict:
    prof = doubling_profile(sc.space)
    return {
        "passed": None,
        "a1": prof.a1,
        "n_exp": prof.n_exp,
        "a3": prof.a3,
        "kappa": prof.kappa,
        "samples": prof.samples,
    }


def _check_reverse_holder(sc: Scenario) -> dict:
    rows = []
    for q in (2.0, 3.0, np.inf):
        rep = potential_mod.reverse_holder_constant(sc.space, sc.v, q)
        rows.append({"q": "inf" if np.isinf(q) else q, "constant": rep.constant,
                     "worst_ball": rep.worst_ball})
    return {"passed": None, "orders": rows}


def _check_admissibility(sc: Scenario) -> dict:
    sweep = potential_mod.admissibility_sweep(sc.space, sc.rho)
    return {"passed": None, "k0_sweep": [[k, c] for k, c in sweep]}


def _check_kernel_slice(sc: Scenario) -> dict:
    grid = semigroup.default_scale_grid(sc.space)
    t = float(grid[len(grid) // 2])
    k = semigroup.heat_kernel(sc.spectrum, t)
    return {
        "passed": None,
        "export_kind": "kernel_slice",
        "t": t,
        "n": sc.space.n,
        "matrix": [[float(v) for v in row] for row in k],
    }


def _check_norm_profile(sc: Scenario) -> dict:
    space = sc.space
    f = sc.corpus[0]
    dclass = sc.dclass
    alphas = np.linspace(-0.5, 0.5, 11)
    rows = []
    for alpha in alphas:
        for p in sorted({p for _, p in sc.params}):
            e = fnspaces.campanato_norm(space, f, float(alpha), p, dclass)
            b = fnspaces.campanato_blo_norm(space, f, float(alpha), p, dclass)
            rows.append(
                {
                    "alpha": float(alpha),
                    "p": p,
                    "oscillation_part": e.oscillation_part,
                    "size_part": e.size_part,
                    "total": e.total,
                    "blo_total": b.total,
                }
            )
    return {"passed": None, "export_kind": "norm_profile", "rows": rows}


CHECKS: dict[str, tuple[str, object]] = {
    # hard: explicit-constant identities and tolerance-pinned agreements
    "lemma21": ("hard", _check_lemma21),
    "eq27": ("hard", _check_eq27),
    "atom_pairing": ("hard", _check_atom_pairing),
    "blo_factor": ("hard", _check_blo_factor),
    "holder_monotonicity": ("hard", _check_holder_monotonicity),
    "subordination": ("hard", _check_subordination),
    "qt_gradient": ("hard", _check_qt_gradient),
    "g_identity": ("hard", _check_g_identity),
    # soft: fitted constants, reported only
    "thm31": ("soft", _check_boundedness("thm31")),
    "thm32": ("soft", _check_boundedness("thm32")),
    "thm41": ("soft", _check_boundedness("thm41")),
    "cor41": ("soft", _check_boundedness("cor41")),
    "lemma41": ("soft", _check_boundedness("lemma41")),
    "lemma24": ("soft", _check_boundedness("lemma24")),
    "hl_domination": ("soft", _check_hl_domination),
    "lemma23": ("soft", _check_lemma23),
    "eq31_fit": ("soft", _check_kernel_fit("eq31", "heat")),
    "eq32_fit": ("soft", _check_kernel_fit("eq32", "heat")),
    "eq33_fit": ("soft", _check_kernel_fit("eq33", "heat")),
    "qi_fit": ("soft", _check_kernel_fit("qi", "qt")),
    "qii_fit": ("soft", _check_kernel_fit("qii", "qt")),
    "qiii_fit": ("soft", _check_kernel_fit("qiii", "qt")),
    "prop51_fit": ("soft", _check_kernel_fit("prop51", "heat")),
    "space_profile": ("soft", _check_space_profile),
    "reverse_holder": ("soft", _check_reverse_holder),
    "admissibility": ("soft", _check_admissibility),
    "kernel_slice": ("soft", _check_kernel_slice),
    "norm_profile": ("soft", _check_norm_profile),
}


def list_checks() -> list[tuple[str, str]]:
    return [(name, kind) for name, (kind, _) in CHECKS.items()]


# ---------------------------------------------------------------------------
# Runner
# ---------------------------------------------------------------------------

def _round_floats(obj, sig: int = 12):
    """Round floats to `sig` significant digits for byte-stable reports."""
    if isinstance(obj, float):
        if obj == 0.0 or not np.isfinite(obj):
            return 0.0 if obj == 0.0 else (None if np.isnan(obj) else ("inf" if obj > 0 else "-inf"))
        return float(f"{obj:.{sig}g}")
    if isinstance(obj, dict):
        return {k: _round_floats(v, sig) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v, sig) for v in obj]
    if isinstance(obj, (np.floating,)):
        return _round_floats(float(obj), sig)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return _round_floats(obj.tolist(), sig)
    return obj


def run_scenario(
    config_path: str | Path,
    out_dir: str | Path | None = None,
    seed: int | None = None,
) -> int:
    """Execute a scenario config; returns the process exit code (0/1/2)."""
    config_path = Path(config_path)
    try:
        config = json.loads(config_path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    errors = sorted(
        Draft202012Validator(SCENARIO_SCHEMA).iter_errors(config), key=str
    )
    if errors:
        for err in errors[:5]:
            print(f"config schema violation: {err.message}", file=sys.stderr)
        return 2

    unknown = [c for c in config["checks"] if c not in CHECKS]
    if unknown:
        print(f"unknown check ids: {', '.join(unknown)}", file=sys.stderr)
        return 2

    out = Path(out_dir) if out_dir is not None else Path(config.get("out_dir", "reports"))
    out.mkdir(parents=True, exist_ok=True)
    sc = Scenario(
        config=config,
        seed=int(seed if seed is not None else config.get("seed", 0)),
        out_dir=out,
    )

    exit_code = 0
    summary = {"label": config.get("label", ""), "seed": sc.seed, "checks": []}
    for name in config["checks"]:
        kind, fn = CHECKS[name]
        try:
            report = fn(sc)
        except ScenarioError as exc:
            print(f"config error in check {name}: {exc}", file=sys.stderr)
            return 2
        doc = {"check": name, "kind": kind, **report}
        (out / f"{name}.json").write_text(
            json.dumps(_round_floats(doc), indent=1) + "\n"
        )
        passed = report.get("passed")
        if kind == "hard" and passed is False:
            exit_code = 1
            witness = {
                k: v
                for k, v in report.items()
                if k in ("violations", "max_abs_error", "max_rel_error", "worst_scale")
            }
            print(f"hard check {name} FAILED: {json.dumps(_round_floats(witness))}",
                  file=sys.stderr)
        summary["checks"].append({"name": name, "kind": kind, "passed": passed})
        status = {True: "pass", False: "FAIL", None: "reported"}[passed]
        print(f"check {name:22s} [{kind}] {status}")

    summary["exit_code"] = exit_code
    summary["generated_at"] = time.strftime("%Y-%m-%dT%H:%M:%S")
    (out / "summary.json").write_text(json.dumps(_round_floats(summary), indent=1) + "\n")
    return exit_code


# ---------------------------------------------------------------------------
# CSV export
# ---------------------------------------------------------------------------

def export_plot_data(
    report_path: str | Path, kind: str, out_path: str | Path | None = None
) -> Path:
    """Convert a check report to CSV (deterministic column order, LF, UTF-8)."""
    report_path = Path(report_path)
    doc = json.loads(report_path.read_text())
    if doc.get("export_kind") != kind:
        raise ScenarioError(
            f"report {report_path.name} has export kind {doc.get('export_kind')!r}, "
            f"not {kind!r}"
        )
    out = Path(out_path) if out_path else report_path.with_suffix(f".{kind}.csv")

    def fmt(v) -> str:
        return f"{v:.12g}" if isinstance(v, float) else str(v)

    lines: list[str] = []
    if kind == "ratio_table":
        lines.append("function_id,input_norm,output_norm,ratio")
        for row in doc["table"]:
            lines.append(
                ",".join(
                    fmt(row[k]) for k in ("function_id", "input_norm", "output_norm", "ratio")
                )
            )
    elif kind == "kernel_slice":
        for row in doc["matrix"]:
            lines.append(",".join(fmt(v) for v in row))
    elif kind == "norm_profile":
        cols = ["alpha", "p", "oscillation_part", "size_part", "total", "blo_total"]
        lines.append(",".join(cols))
        for row in doc["rows"]:
            lines.append(",".join(fmt(row[k]) for k in cols))
    else:
        raise ScenarioError(f"unknown export kind {kind!r}")

    out.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    return out
