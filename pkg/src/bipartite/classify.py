"""Full structure report for a bipartite state.

Each structure flag is tri-state. A predicate's residual is divided by its
tolerance; scores inside ``[MARGINAL_LOW, MARGINAL_HIGH]`` are reported as
``"marginal"`` instead of a firm yes/no. The flags must respect

    product => zero_min_a => cq => ssppt_a, ssppt_b => ppt
    product => zero_min_b => qc => ssppt_a, ssppt_b => ppt

An implication whose premise holds and whose conclusion fails is resolved by
downgrading the premise to ``"marginal"`` when either side sits in the band,
and is otherwise recorded as a hard violation.
"""
import json
from dataclasses import dataclass, field

import numpy as np

from .criteria import (
    COMMUTATIVITY_TOL,
    POSITIVITY_TOL,
    is_cq,
    is_ppt,
    is_qc,
    is_zero_min_a,
    is_zero_min_b,
    product_residual,
)
from .errors import WrongShape
from .measures import discord_a, discord_b, gmqd_a, gmqd_b, min_a, min_b
from .sppt import corollary1_separability, extract_separable_ensemble, find_ssppt_basis
from .states import is_pure

YES, NO, MARGINAL = "yes", "no", "marginal"
MARGINAL_LOW = 0.1
MARGINAL_HIGH = 10.0
FLAG_ORDER = ("product", "zero_min_a", "zero_min_b", "cq", "qc", "ssppt_a", "ssppt_b", "ppt")
CHAIN = (
    ("product", "zero_min_a"),
    ("product", "zero_min_b"),
    ("zero_min_a", "cq"),
    ("zero_min_b", "qc"),
    ("cq", "ssppt_a"),
    ("cq", "ssppt_b"),
    ("qc", "ssppt_a"),
    ("qc", "ssppt_b"),
    ("ssppt_a", "ppt"),
    ("ssppt_b", "ppt"),
)
SMALL_DIMS = {(2, 2), (2, 3), (3, 2)}
_HUGE = 1e300


@dataclass(frozen=True)
class Evidence:
    residual: float
    tol: float
    holds: bool

    @property
    def score(self):
        return self.residual / self.tol if self.tol > 0 else float("inf")

    @property
    def in_band(self):
        return MARGINAL_LOW <= self.score <= MARGINAL_HIGH

    def flag(self):
        if self.in_band:
            return MARGINAL
        return YES if self.holds else NO

    def to_dict(self):
        return {"residual": _finite(self.residual), "tol": self.tol, "score": _finite(self.score)}


def _finite(x):
    x = float(x)
    return x if np.isfinite(x) else _HUGE


@dataclass(frozen=True)
class Separability:
    verdict: str
    reason: str = None

    def __str__(self):
        return self.verdict if self.reason is None else f"{self.verdict}({self.reason})"


@dataclass
class ClassificationReport:
    dim_a: int
    dim_b: int
    flags: dict
    separability: Separability
    evidence: dict
    measures: dict = None
    warnings: list = field(default_factory=list)
    hard_violations: list = field(default_factory=list)
    ssppt_bases: dict = field(default_factory=dict)
    ensemble: object = None

    def to_dict(self):
        out = {
            "dim_a": self.dim_a,
            "dim_b": self.dim_b,
            "flags": {k: self.flags[k] for k in FLAG_ORDER},
            "separability": {"verdict": self.separability.verdict, "reason": self.separability.reason},
            "evidence": {k: self.evidence[k].to_dict() for k in FLAG_ORDER},
            "measures": self.measures,
            "warnings": list(self.warnings),
            "hard_violations": [list(v) for v in self.hard_violations],
            "ssppt_bases": dict(self.ssppt_bases),
        }
        if self.ensemble is not None:
            out["ensemble"] = {"terms": len(self.ensemble.terms), "residual": self.ensemble.residual}
        return out

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=False)


def _evidence(s, tol, ppt_tol):
    ev = {}
    ev["product"] = _scalar_evidence(product_residual(s), tol)

    cq = is_cq(s, tol)
    qc = is_qc(s, tol)
    ev["cq"] = Evidence(cq.max_violation, tol, cq.is_cq)
    ev["qc"] = Evidence(qc.max_violation, tol, qc.is_cq)

    for name, fn, wit in (("zero_min_a", is_zero_min_a, cq), ("zero_min_b", is_zero_min_b, qc)):
        zm = fn(s, tol, cq=wit) if name == "zero_min_a" else fn(s, tol, qc=wit)
        res = max(wit.max_violation, zm.distance) if wit.is_cq else wit.max_violation
        ev[name] = Evidence(res, tol, zm.holds)

    bases = {}
    for name, side, wit in (("ssppt_a", "a", qc), ("ssppt_b", "b", cq)):
        label, rep = find_ssppt_basis(s, side, tol, wit.basis if wit.is_cq else None)
        res = rep.residual if rep.factorizable else float("inf")
        ev[name] = Evidence(res, tol, rep.holds)
        bases[name] = (label, rep)

    ppt = is_ppt(s, ppt_tol)
    ev["ppt"] = Evidence(max(0.0, -ppt.min_eigenvalue), ppt_tol, ppt.holds)
    return ev, bases


def _scalar_evidence(residual, tol):
    return Evidence(residual, tol, residual <= tol)


def _enforce_chain(flags, evidence):
    warnings, hard = [], []
    changed = True
    while changed:
        changed = False
        for strict, weak in CHAIN:
            if flags[strict] != YES or flags[weak] != NO:
                continue
            if evidence[strict].in_band or evidence[weak].in_band:
                flags[strict] = MARGINAL
                warnings.append(f"{strict} downgraded to marginal: {weak} fails")
                changed = True
            elif (strict, weak) not in hard:
                hard.append((strict, weak))
    return warnings, hard


def _separability(s, evidence, tol):
    if not evidence["ppt"].holds:
        return Separability("Entangled", "NPT")
    if is_pure(s):
        return Separability("Separable", "PurePPT")
    if evidence["ssppt_a"].holds or evidence["ssppt_b"].holds:
        return Separability("Separable", "SSPPT-Thm1")
    if (s.dim_a, s.dim_b) in SMALL_DIMS:
        return Separability("Separable", "PPT-small-dims")
    try:
        if corollary1_separability(s, tol).separable:
            return Separability("Separable", "Corollary1")
    except WrongShape:
        pass
    return Separability("Unknown")


def compute_measures(s, seed=0, restarts=None):
    kw = {"seed": seed}
    if restarts is not None:
        kw["restarts"] = restarts
    out = {}
    jobs = [("min_a", min_a), ("min_b", min_b), ("gmqd_a", gmqd_a), ("gmqd_b", gmqd_b)]
    if s.dim_a <= 3:
        jobs.append(("discord_a", discord_a))
    if s.dim_b <= 3:
        jobs.append(("discord_b", discord_b))
    for name, fn in jobs:
        r = fn(s, **kw)
        out[name] = {"value": r.value, "certificate": r.certificate, "raw_value": r.raw_value}
    return out


def classify(s, tol=COMMUTATIVITY_TOL, ppt_tol=POSITIVITY_TOL, measures=False, ensemble=False, seed=0):
    """Run every predicate and the separability rules on ``s``.

    ``measures=True`` adds MiN, GMQD and (for parties of dimension at most 3)
    discord on both sides. ``ensemble=True`` attaches a product-state
    decomposition whenever an SSPPT side certified separability.
    """
    evidence, bases = _evidence(s, tol, ppt_tol)
    flags = {k: evidence[k].flag() for k in FLAG_ORDER}
    warnings, hard = _enforce_chain(flags, evidence)
    sep = _separability(s, evidence, tol)
    ens = None
    if ensemble and sep.reason == "SSPPT-Thm1":
        name = "ssppt_b" if evidence["ssppt_b"].holds else "ssppt_a"
        rep = bases[name][1]
        ens = extract_separable_ensemble(s, name[-1], index_basis=rep.factor.index_basis, ssppt_tol=tol)
    return ClassificationReport(
        s.dim_a,
        s.dim_b,
        flags,
        sep,
        evidence,
        compute_measures(s, seed) if measures else None,
        warnings,
        hard,
        {k: v[0] for k, v in bases.items()},
        ens,
    )
