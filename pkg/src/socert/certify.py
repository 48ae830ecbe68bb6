"""Second-order sufficient conditions checked per sampled critical direction.

Each theorem pairs generalized-convexity hypotheses on f_j and active g_i
(checked by falsifiers) with a multiplier search per direction d.  The search
is an LP over mu >= 0 and lambda >= 0 on the active set, subject to the
gradient equation and a normalization, maximizing the slack
``s <= sum mu_j f_j''(x; d) + sum lambda_i g_i''(x; d)``.  The local theorem
also needs the cone K(d) to be trivial.

Directions are sampled from the linearized critical cone, which contains the
tangent directions; certifying over a superset can only over-reject.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .cones import (
    ConeH,
    Tolerances,
    active_constraints,
    cone_cxd_perp_from,
    critical_cone_from,
    is_trivial,
    sample_unit,
    zero_sets_from,
)
from .deriv import DerivConfig, DirDeriv2Result, finite, second_derivative
from .gencvx import FalsifyReport, falsify
from .lp import LpProblem, SolverStalled, solve
from .problem import Problem, eta_nodes

THEOREMS = {
    "local2": "LocalOrder2",
    "kkt-weak": "GlobalWeakKKT",
    "kkt-strict": "GlobalStrictKKT",
    "fj-strict": "GlobalStrictFJ",
    "qc-strict": "GlobalStrictQuasiconvex",
}

# theorem -> (normalization, strictness, include d = 0)
_MULTIPLIER_RULE = {
    "local2": ("FJ", "strict", False),
    "kkt-weak": ("KKT", "nonstrict", True),
    "kkt-strict": ("KKT", "nonstrict", True),
    "fj-strict": ("FJ", "nonstrict", True),
    "qc-strict": ("KKT", "strict", False),
}


@dataclass(frozen=True)
class CertifyConfig:
    dirs: int = 256
    seed: int = 0
    hypothesis_samples: int = 1000
    hypothesis_mode: str = "default"  # or "quasiinvex"
    threads: int = 1
    lambda_cap: float = 1e6
    tolerances: Tolerances = Tolerances()
    deriv: DerivConfig = DerivConfig()

    def to_json(self) -> dict:
        out = asdict(self)
        out.pop("threads")  # does not affect results
        return out


@dataclass
class MultiplierPair:
    mu: list[float]
    lam: list[float]
    slack: float
    unbounded: bool = False

    def to_json(self) -> dict:
        return {"mu": self.mu, "lambda": self.lam, "slack": self.slack, "unbounded": self.unbounded}


@dataclass
class DirectionRecord:
    index: int
    d: list[float]
    status: str  # satisfied | violated | inconclusive
    reason: str | None = None
    multipliers: MultiplierPair | None = None
    cond2_ok: bool | None = None
    derivs: dict[str, DirDeriv2Result] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "index": self.index,
            "d": self.d,
            "status": self.status,
            "reason": self.reason,
            "multipliers": self.multipliers.to_json() if self.multipliers else None,
            "cond2_ok": self.cond2_ok,
            "derivs": {k: v.to_json() for k, v in sorted(self.derivs.items())},
        }


@dataclass
class HypothesisReport:
    target: str  # e.g. "objective:1"
    report: FalsifyReport

    def to_json(self) -> dict:
        return {"target": self.target, **self.report.to_json()}


@dataclass
class Certificate:
    theorem: str
    verdict: str  # CertifiedOnSamples | NotCertified | Inconclusive
    reason: str | None
    failure: dict | None
    hypothesis_reports: list[HypothesisReport]
    records: list[DirectionRecord]
    notes: list[str]
    uniform_pair: MultiplierPair | None
    config: CertifyConfig

    def to_json(self) -> dict:
        return {
            "theorem": self.theorem,
            "theorem_name": THEOREMS[self.theorem],
            "verdict": self.verdict,
            "reason": self.reason,
            "failure": self.failure,
            "hypotheses": [h.to_json() for h in self.hypothesis_reports],
            "directions": [r.to_json() for r in self.records],
            "direction_count": len(self.records),
            "uniform_pair": self.uniform_pair.to_json() if self.uniform_pair else None,
            "notes": list(self.notes),
            "margins": {
                "strict": f"> {self.config.tolerances.tau_strict}",
                "nonstrict": f">= -{self.config.tolerances.tau_strict}",
            },
        }


# ---------------------------------------------------------------------------
# Multipliers and the K(d) triviality condition
# ---------------------------------------------------------------------------


def find_multipliers(
    F: np.ndarray,
    G: np.ndarray,
    active: Sequence[int],
    f2: Sequence[float],
    g2: dict[int, float],
    mode: str,
    strictness: str,
    tol: Tolerances = Tolerances(),
    lambda_cap: float = 1e6,
) -> MultiplierPair | None:
    """Best (mu, lambda) for the slack; None when infeasible or slack too small.

    ``F`` (p x n) and ``G`` (m x n) are gradients at the point, ``f2`` the
    objective second derivatives along d, ``g2`` those of active constraints.
    """
    p, n = F.shape
    m = G.shape[0]
    act = list(active)
    k = len(act)
    nv = p + k + 1
    A_eq = np.zeros((n + 1, nv))
    A_eq[:n, :p] = F.T
    if k:
        A_eq[:n, p : p + k] = G[act].T
    A_eq[n, :p] = 1.0
    if mode == "FJ":
        A_eq[n, p : p + k] = 1.0
    elif mode != "KKT":
        raise ValueError(f"unknown multiplier mode {mode!r}")
    b_eq = np.zeros(n + 1)
    b_eq[n] = 1.0
    row = np.zeros(nv)
    row[:p] = -np.asarray(f2, dtype=float)
    row[p : p + k] = [-g2[i] for i in act]
    row[-1] = 1.0
    c = np.zeros(nv)
    c[-1] = 1.0
    lower = np.zeros(nv)
    lower[-1] = -np.inf
    A_le, b_le = row[None, :], np.zeros(1)
    res = solve(LpProblem(c, A_le, b_le, A_eq, b_eq, lower))
    unbounded = False
    if res.status == "unbounded":
        unbounded = True
        cap = np.zeros(nv)
        cap[p : p + k] = 1.0
        res = solve(LpProblem(c, np.vstack([A_le, cap]), np.array([0.0, lambda_cap]), A_eq, b_eq, lower))
    if res.status != "optimal":
        return None
    x = res.x
    mu = np.maximum(x[:p], 0.0)
    lam = np.zeros(m)
    for j, i in enumerate(act):
        lam[i] = max(x[p + j], 0.0)
    slack = float(mu @ np.asarray(f2, dtype=float) + sum(lam[i] * g2[i] for i in act))
    ok = slack > tol.tau_strict if strictness == "strict" else slack >= -tol.tau_strict
    if not ok:
        return None
    return MultiplierPair([float(v) for v in mu], [float(v) for v in lam], slack, unbounded)


def check_condition_II(F, G, active, d, tol: Tolerances = Tolerances()) -> bool:
    sets = zero_sets_from(F, G, active, d, tol)
    return is_trivial(cone_cxd_perp_from(F, G, sets, d, with_objectives=bool(sets.J_zero)), tol)


# ---------------------------------------------------------------------------
# Theorem drivers
# ---------------------------------------------------------------------------


def _hypotheses(problem: Problem, x, theorem: str, active, cfg: CertifyConfig):
    """(target label, ast, kind, eta) tuples required by the theorem."""
    objs = [(f"objective:{j + 1}", a) for j, a in enumerate(problem.objectives)]
    cons = [(f"constraint:{i + 1}", problem.constraints[i]) for i in active]
    if theorem == "local2":
        return []
    if theorem == "kkt-weak":
        return [(t, a, "2-pseudoconvex") for t, a in objs] + [(t, a, "quasiconvex") for t, a in cons]
    if theorem == "kkt-strict":
        return [(t, a, "strictly-2-pseudoconvex") for t, a in objs] + [
            (t, a, "quasiconvex") for t, a in cons
        ]
    if theorem == "fj-strict":
        return [(t, a, "strictly-2-pseudoconvex") for t, a in objs + cons]
    kind = "quasiinvex" if cfg.hypothesis_mode == "quasiinvex" else "quasiconvex"
    return [(t, a, kind) for t, a in objs + cons]


def _direction_key(d: np.ndarray) -> tuple:
    return tuple(float(v) for v in d)


def _evaluate_direction(problem, x, F, G, active, d, theorem, cfg: CertifyConfig):
    tol = cfg.tolerances
    mode, strictness, _ = _MULTIPLIER_RULE[theorem]
    derivs: dict[str, DirDeriv2Result] = {}
    try:
        if np.any(d):
            for j, a in enumerate(problem.objectives):
                derivs[f"f{j + 1}"] = second_derivative(a, x, d, cfg.deriv)
            for i in active:
                derivs[f"g{i + 1}"] = second_derivative(problem.constraints[i], x, d, cfg.deriv)
        else:
            for j in range(problem.p):
                derivs[f"f{j + 1}"] = finite(0.0, 0.0, "zero")
            for i in active:
                derivs[f"g{i + 1}"] = finite(0.0, 0.0, "zero")
    except Exception as exc:  # domain errors along the ray
        return ("inconclusive", f"second derivative failed: {exc}", None, None, derivs)
    bad = [k for k, v in derivs.items() if not v.is_finite]
    if bad:
        return ("inconclusive", f"no finite second derivative for {', '.join(bad)}", None, None, derivs)
    f2 = [derivs[f"f{j + 1}"].value for j in range(problem.p)]
    g2 = {i: derivs[f"g{i + 1}"].value for i in active}
    try:
        pair = find_multipliers(F, G, active, f2, g2, mode, strictness, tol, cfg.lambda_cap)
        cond2 = check_condition_II(F, G, active, d, tol) if theorem == "local2" else None
    except (SolverStalled, RuntimeError) as exc:
        return ("inconclusive", f"LP failure: {exc}", None, None, derivs)
    if pair is None:
        need = "> tau_strict" if strictness == "strict" else ">= -tau_strict"
        return ("violated", f"no {mode} multipliers with slack {need}", None, cond2, derivs)
    if cond2 is False:
        return ("violated", "K(d) is nontrivial", pair, cond2, derivs)
    return ("satisfied", None, pair, cond2, derivs)


def _uniform_pair(records: list[DirectionRecord], strict: bool, tol: Tolerances):
    first = next((r.multipliers for r in records if r.multipliers is not None), None)
    if first is None:
        return None
    for r in records:
        if r.status != "satisfied":
            return None
        s = 0.0
        for key, res in r.derivs.items():
            idx = int(key[1:]) - 1
            w = first.mu[idx] if key[0] == "f" else first.lam[idx]
            s += w * res.value
        if (strict and not s > tol.tau_strict) or (not strict and s < -tol.tau_strict):
            return None
    return first


def certify(problem: Problem, x, theorem: str, cfg: CertifyConfig = CertifyConfig()) -> Certificate:
    if theorem not in THEOREMS:
        raise ValueError(f"unknown theorem {theorem!r}; expected one of {', '.join(THEOREMS)}")
    x = np.asarray(x, dtype=float)
    tol = cfg.tolerances
    active = active_constraints(problem, x, tol)
    F = problem.f_grads(x)
    G = problem.g_grads(x)
    notes = [
        "directions sampled from the linearized critical cone, a superset of the tangent directions",
        "verdict is sample-bounded: CertifiedOnSamples is not a proof over the whole cone",
    ]

    hyps = []
    eta = None
    if theorem == "qc-strict" and cfg.hypothesis_mode == "quasiinvex":
        eta = eta_nodes(problem, x)
        notes.append("quasiinvex hypotheses substituted for quasiconvexity (demonstration mode)")
    for target, ast, kind in _hypotheses(problem, x, theorem, active, cfg):
        rep = falsify(
            ast, x, kind, problem.box, cfg.hypothesis_samples, cfg.seed, tol,
            eta=eta if kind == "quasiinvex" else None, deriv=cfg.deriv,
        )
        hyps.append(HypothesisReport(target, rep))

    def done(verdict, reason=None, failure=None, records=(), uniform=None):
        return Certificate(theorem, verdict, reason, failure, hyps, list(records), notes, uniform, cfg)

    falsified = [h for h in hyps if h.report.status == "falsified"]
    if falsified:
        return done(
            "NotCertified",
            "hypothesis falsified: "
            + "; ".join(f"{h.report.kind} on {h.target}" for h in falsified),
            {
                "kind": "hypothesis",
                "targets": [
                    {"target": h.target, "property": h.report.kind, "witness": {"y": h.report.y, "t": h.report.t}}
                    for h in falsified
                ],
            },
        )

    cone = critical_cone_from(F, G, active)
    mode, strictness, with_zero = _MULTIPLIER_RULE[theorem]
    if is_trivial(cone, tol):
        sample_dirs: list[np.ndarray] = []
        notes.append("critical cone is {0}")
    else:
        sample = sample_unit(cone, cfg.dirs, cfg.seed, tol)
        sample_dirs = sample.vectors
        if sample.short:
            notes.append(f"cone sampling returned {len(sample_dirs)} of {cfg.dirs} directions")
    dirs = ([np.zeros(problem.n)] if with_zero else []) + sample_dirs
    if not dirs:
        return done("CertifiedOnSamples", "vacuous: no nonzero critical directions")

    unique: dict[tuple, np.ndarray] = {}
    for d in dirs:
        unique.setdefault(_direction_key(d), d)
    keys = list(unique)

    def work(key):
        return _evaluate_direction(problem, x, F, G, active, unique[key], theorem, cfg)

    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            results = dict(zip(keys, pool.map(work, keys)))
    else:
        results = {k: work(k) for k in keys}

    records = []
    for idx, d in enumerate(dirs):
        status, reason, pair, cond2, derivs = results[_direction_key(d)]
        records.append(DirectionRecord(idx, [float(v) for v in d], status, reason, pair, cond2, derivs))

    violated = [r for r in records if r.status == "violated"]
    if violated:
        r = violated[0]
        return done(
            "NotCertified",
            f"direction {r.index}: {r.reason}",
            {"kind": "direction", "index": r.index, "d": r.d},
            records,
        )
    pending = [r for r in records if r.status == "inconclusive"]
    hyp_open = [h for h in hyps if h.report.status == "inconclusive"]
    if pending or hyp_open:
        reason = (
            f"direction {pending[0].index}: {pending[0].reason}"
            if pending
            else f"hypothesis on {hyp_open[0].target} inconclusive"
        )
        return done("Inconclusive", reason, None, records)
    uniform = _uniform_pair(records, strictness == "strict", tol)
    return done("CertifiedOnSamples", None, None, records, uniform)
