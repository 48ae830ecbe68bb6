"""Brute-force efficiency oracles, random instances and the soundness harness."""

from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

import numpy as np

from .certify import THEOREMS, CertifyConfig, certify
from .cones import Tolerances
from .expr import ExprError
from .problem import Problem, build_problem

KINDS = ("weak", "efficient", "strict-global", "local2")

# theorem -> oracle kind asserting its conclusion
THEOREM_ORACLE = {
    "local2": "local2",
    "kkt-weak": "weak",
    "kkt-strict": "strict-global",
    "fj-strict": "strict-global",
    "qc-strict": "strict-global",
}


@dataclass(frozen=True)
class OracleConfig:
    n_samples: int = 10_000
    shells: int = 12
    r0: float = 0.5
    alpha_min: float = 1e-3
    seed: int = 0
    per_shell: int = 200
    eps_feas: float = 1e-8
    exclusion: float = 1e-3  # strict-global ignores |x - xbar| < exclusion * box diameter

    def __post_init__(self):
        if not self.r0 > 0:
            raise ValueError("r0 must be positive")
        if self.shells < 4:
            raise ValueError("shells must be at least 4")
        if not self.alpha_min > 0:
            raise ValueError("alpha_min must be positive")

    def to_json(self) -> dict:
        return asdict(self)


@dataclass
class OracleVerdict:
    status: str  # supported | falsified | inconclusive
    kind: str
    witness: list[float] | None = None
    values: list[float] | None = None
    reason: str | None = None
    stats: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {"status": self.status, "kind": self.kind, "stats": self.stats}
        if self.status == "falsified":
            out["witness"] = self.witness
            out["values"] = self.values
        if self.reason is not None:
            out["reason"] = self.reason
        return out


def _violates(kind: str, fx: np.ndarray, fbar: np.ndarray, tau: np.ndarray) -> bool:
    if kind == "weak":
        return bool(np.all(fx < fbar - tau))
    if kind == "efficient":
        return bool(np.all(fx <= fbar + tau) and np.any(fx <= fbar - tau))
    return bool(np.all(fx <= fbar + tau))


def recheck_oracle_witness(problem: Problem, xbar, kind: str, witness, eps_feas: float = 1e-8) -> bool:
    """Fresh evaluation of a global-kind witness."""
    xbar = np.asarray(xbar, dtype=float)
    w = np.asarray(witness, dtype=float)
    try:
        fbar = problem.f(xbar)
        if not problem.feasible(w, eps_feas) or not np.any(w != xbar):
            return False
        return _violates(kind, problem.f(w), fbar, 1e-9 * (1 + np.abs(fbar)))
    except ExprError:
        return False


def _global_candidates(problem: Problem, xbar: np.ndarray, cfg: OracleConfig):
    lo, hi = problem.box[:, 0], problem.box[:, 1]
    n = problem.n
    for k in range(n):
        for s in (1.0, -1.0):
            y = xbar.copy()
            y[k] += s
            if np.all(y >= lo) and np.all(y <= hi):
                yield y
    rng = np.random.default_rng(cfg.seed)
    for i in range(cfg.n_samples):
        y = lo + (hi - lo) * rng.random(n)
        if i % 2 == 1 and n > 1:
            snap = rng.random(n) < 0.5
            y[snap] = xbar[snap]
        yield y


def _shell_points(problem: Problem, xbar: np.ndarray, cfg: OracleConfig):
    rng = np.random.default_rng(cfg.seed)
    n = problem.n
    for k in range(cfg.shells):
        r = cfg.r0 * 2.0**-k
        pts = []
        for j in range(n):
            for s in (1.0, -1.0):
                e = np.zeros(n)
                e[j] = s
                pts.append(xbar + r * e)
        v = rng.standard_normal((cfg.per_shell, n))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        pts.extend(xbar + r * v)
        yield k, r, pts


def _shell_q(problem: Problem, xbar: np.ndarray, cfg: OracleConfig):
    fbar = problem.f(xbar)
    shell_min: list[float | None] = []
    argmins = []
    feasible = 0
    for k, r, pts in _shell_points(problem, xbar, cfg):
        best, arg = None, None
        for y in pts:
            try:
                if not problem.feasible(y, cfg.eps_feas):
                    continue
                q = float(np.max(problem.f(y) - fbar)) / float(np.sum((y - xbar) ** 2))
            except ExprError:
                continue
            feasible += 1
            if best is None or q < best:
                best, arg = q, y
        shell_min.append(best)
        argmins.append(arg)
    return shell_min, argmins, feasible, fbar


def check_efficiency(problem: Problem, xbar, kind: str, cfg: OracleConfig = OracleConfig()) -> OracleVerdict:
    if kind not in KINDS:
        raise ValueError(f"unknown oracle kind {kind!r}")
    xbar = np.asarray(xbar, dtype=float)
    if not problem.feasible(xbar, cfg.eps_feas):
        raise ValueError("xbar is infeasible")
    if kind == "local2":
        return _check_local2(problem, xbar, cfg)
    fbar = problem.f(xbar)
    tau = 1e-9 * (1 + np.abs(fbar))
    diam = float(np.linalg.norm(problem.box[:, 1] - problem.box[:, 0]))
    used = feasible = 0
    for y in _global_candidates(problem, xbar, cfg):
        used += 1
        try:
            if not problem.feasible(y, cfg.eps_feas):
                continue
            fy = problem.f(y)
        except ExprError:
            continue
        feasible += 1
        dist = float(np.linalg.norm(y - xbar))
        if dist == 0 or (kind == "strict-global" and dist < cfg.exclusion * diam):
            continue
        if _violates(kind, fy, fbar, tau):
            return OracleVerdict(
                "falsified", kind, [float(v) for v in y], [float(v) for v in fy],
                stats={"samples": used, "feasible": feasible},
            )
    if feasible == 0:
        return OracleVerdict("inconclusive", kind, reason="no feasible samples", stats={"samples": used, "feasible": 0})
    return OracleVerdict("supported", kind, stats={"samples": used, "feasible": feasible})


def _check_local2(problem: Problem, xbar: np.ndarray, cfg: OracleConfig) -> OracleVerdict:
    shell_min, argmins, feasible, _ = _shell_q(problem, xbar, cfg)
    stats = {"feasible": feasible, "shell_min_q": shell_min}
    if feasible == 0:
        return OracleVerdict("inconclusive", "local2", reason="no feasible shell samples", stats=stats)
    for k in (len(shell_min) - 2, len(shell_min) - 1):
        q = shell_min[k]
        if q is not None and q < cfg.alpha_min * 1e-2:
            y = argmins[k]
            return OracleVerdict(
                "falsified", "local2", [float(v) for v in y],
                [float(v) for v in problem.f(y)], stats=stats,
            )
    qs = [q for q in shell_min if q is not None]
    stats["min_q"] = min(qs)
    if min(qs) >= cfg.alpha_min:
        return OracleVerdict("supported", "local2", stats=stats)
    return OracleVerdict("inconclusive", "local2", reason="min q below alpha_min away from the smallest shells", stats=stats)


def alpha_estimate(problem: Problem, xbar, cfg: OracleConfig = OracleConfig()) -> float:
    """Smallest max_j (f_j(x) - f_j(xbar)) / |x - xbar|^2 over feasible shell samples."""
    shell_min, _, feasible, _ = _shell_q(problem, np.asarray(xbar, dtype=float), cfg)
    if feasible == 0:
        raise ValueError("no feasible shell samples")
    return min(q for q in shell_min if q is not None)


# ---------------------------------------------------------------------------
# Random instances
# ---------------------------------------------------------------------------


def _num(v: float) -> str:
    return f"({float(v)!r})"


def _quadratic_text(Q: np.ndarray, c: np.ndarray) -> str:
    n = len(c)
    terms = []
    for a in range(n):
        terms.append(f"{_num(Q[a, a])}*(x{a + 1} - {_num(c[a])})^2")
        for b in range(a + 1, n):
            terms.append(f"{_num(2 * Q[a, b])}*(x{a + 1} - {_num(c[a])})*(x{b + 1} - {_num(c[b])})")
    return " + ".join(terms)


def _linear_text(a: np.ndarray, b: float) -> str:
    return " + ".join(f"{_num(v)}*x{k + 1}" for k, v in enumerate(a)) + f" - {_num(b)}"


def _qp_minimizer(H, h, A, b) -> np.ndarray:
    """argmin 1/2 x'Hx - h'x s.t. Ax <= b for H positive definite (active-set enumeration)."""
    n, m = len(h), len(b)
    for size in range(m + 1):
        for S in itertools.combinations(range(m), size):
            S = list(S)
            K = np.zeros((n + size, n + size))
            K[:n, :n] = H
            K[:n, n:] = A[S].T
            K[n:, :n] = A[S]
            rhs = np.concatenate([h, b[S]])
            try:
                sol = np.linalg.solve(K, rhs)
            except np.linalg.LinAlgError:
                continue
            x, nu = sol[:n], sol[n:]
            if np.all(A @ x <= b + 1e-10) and np.all(nu >= -1e-10):
                return x
    raise RuntimeError("no KKT point found")


def random_problem(seed: int, cls: str = "ConvexQuadratic") -> tuple[Problem, np.ndarray]:
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 4))
    p = int(rng.integers(1, 4))
    m = int(rng.integers(0, 4))
    if cls == "ConvexQuadratic":
        Qs, cs = [], []
        for _ in range(p):
            M = rng.uniform(-1, 1, (n, n))
            Qs.append(M.T @ M + 0.1 * np.eye(n))
            cs.append(rng.uniform(-1, 1, n))
        A = rng.uniform(-1, 1, (m, n))
        b = rng.uniform(0.0, 0.5, m)
        w = rng.uniform(0.1, 1.0, p)
        H = 2 * sum(wj * Q for wj, Q in zip(w, Qs))
        h = 2 * sum(wj * Q @ c for wj, Q, c in zip(w, Qs, cs))
        anchor = _qp_minimizer(H, h, A, b)
        objectives = [_quadratic_text(Q, c) for Q, c in zip(Qs, cs)]
        constraints = [_linear_text(A[i], b[i]) for i in range(m)]
    elif cls == "Polynomial":
        anchor = rng.uniform(-0.5, 0.5, n)

        def poly():
            terms = []
            for _ in range(int(rng.integers(1, 4))):
                deg = rng.integers(0, 3, n)
                while deg.sum() > 4:
                    deg[rng.integers(n)] -= 1
                mono = "*".join(f"x{k + 1}^{int(e)}" for k, e in enumerate(deg) if e > 0) or "1"
                terms.append(f"{_num(rng.uniform(-1, 1))}*{mono}")
            return " + ".join(terms)

        objectives = [poly() for _ in range(p)]
        constraints = []
        for _ in range(m):
            body = poly()
            probe = build_problem(n, [body], [], [[-1, 1]] * n)
            shift = float(probe.f(anchor)[0]) + (0.0 if rng.random() < 0.5 else float(rng.uniform(0.1, 0.5)))
            constraints.append(f"{body} - {_num(shift)}")
    else:
        raise ValueError(f"unknown problem class {cls!r}")
    box = [[float(a - 2.0), float(a + 2.0)] for a in anchor]
    return build_problem(n, objectives, constraints, box), anchor


# ---------------------------------------------------------------------------
# Cross validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HarnessConfig:
    certify: CertifyConfig = CertifyConfig(dirs=32, hypothesis_samples=300)
    oracle: OracleConfig = OracleConfig(n_samples=2000, per_shell=100)
    problem_class: str = "ConvexQuadratic"

    def to_json(self) -> dict:
        return {
            "certify": self.certify.to_json(),
            "oracle": self.oracle.to_json(),
            "problem_class": self.problem_class,
        }


def _validate_one(problem, anchor, theorem, ccfg, ocfg, label, counts, violations, pairs):
    cert = certify(problem, anchor, theorem, ccfg)
    c = counts.setdefault(theorem, {"CertifiedOnSamples": 0, "NotCertified": 0, "Inconclusive": 0, "oracle": {}})
    c[cert.verdict] += 1
    if cert.verdict != "CertifiedOnSamples":
        return
    if any(h.report.status != "not_falsified" for h in cert.hypothesis_reports):
        return
    kind = THEOREM_ORACLE[theorem]
    verdict = check_efficiency(problem, anchor, kind, replace(ocfg, seed=ccfg.seed))
    c["oracle"][verdict.status] = c["oracle"].get(verdict.status, 0) + 1
    pairs.append({"instance": label, "theorem": theorem, "oracle": kind, "oracle_status": verdict.status})
    if verdict.status == "falsified":
        violations.append(
            {
                "instance": label,
                "theorem": theorem,
                "hypothesis_mode": ccfg.hypothesis_mode,
                "oracle": kind,
                "witness": verdict.witness,
                "values": verdict.values,
            }
        )


def cross_validate(n_instances: int, seed: int = 0, cfg: HarnessConfig = HarnessConfig()) -> dict:
    counts: dict = {}
    violations: list = []
    pairs: list = []
    ccfg = replace(cfg.certify, seed=seed)
    for i in range(n_instances):
        problem, anchor = random_problem(seed * 100_003 + i, cfg.problem_class)
        for theorem in THEOREMS:
            _validate_one(problem, anchor, theorem, ccfg, cfg.oracle, f"{cfg.problem_class}#{i}", counts, violations, pairs)
    return {
        "instances": n_instances,
        "problem_class": cfg.problem_class,
        "counts": counts,
        "certified_pairs": pairs,
        "violations": violations,
        "violation_count": len(violations),
    }


def quasiinvex_gap_demo(problem: Problem, xbar, seed: int = 0, cfg: HarnessConfig = HarnessConfig()) -> dict:
    """Every theorem as stated, plus the strict quasiconvex theorem with
    quasiinvex hypotheses substituted; the substitution is unsound here."""
    counts: dict = {}
    violations: list = []
    pairs: list = []
    ccfg = replace(cfg.certify, seed=seed)
    xbar = np.asarray(xbar, dtype=float)
    for theorem in THEOREMS:
        _validate_one(problem, xbar, theorem, ccfg, cfg.oracle, "quasiinvex-gap", counts, violations, pairs)
    qi = replace(ccfg, hypothesis_mode="quasiinvex")
    demo_counts: dict = {}
    _validate_one(problem, xbar, "qc-strict", qi, cfg.oracle, "quasiinvex-gap:substituted", demo_counts, violations, pairs)
    counts["qc-strict:quasiinvex"] = demo_counts["qc-strict"]
    return {
        "instances": 1,
        "problem_class": "quasiinvex-gap",
        "counts": counts,
        "certified_pairs": pairs,
        "violations": violations,
        "violation_count": len(violations),
    }
