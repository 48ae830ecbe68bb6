"""Active sets, critical cones as H-cones, triviality tests and cone sampling."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .lp import LpProblem, solve
from .problem import Problem


class InfeasiblePoint(ValueError):
    """Point violates a constraint beyond eps_feas."""


@dataclass(frozen=True)
class Tolerances:
    eps_active: float = 1e-8
    eps_feas: float = 1e-8
    eps_zero: float = 1e-8
    tau_strict: float = 1e-7

    def __post_init__(self):
        for name in ("eps_active", "eps_feas", "eps_zero", "tau_strict"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class ActiveSets:
    I_active: tuple[int, ...]
    J_zero: tuple[int, ...]
    I_zero: tuple[int, ...]


@dataclass
class ConeH:
    """``{w : A_le w <= 0, A_eq w = 0}`` in R^n."""

    A_le: np.ndarray
    A_eq: np.ndarray
    n: int

    def __post_init__(self):
        self.A_le = np.asarray(self.A_le, dtype=float).reshape(-1, self.n)
        self.A_eq = np.asarray(self.A_eq, dtype=float).reshape(-1, self.n)

    def to_json(self) -> dict:
        return {"A_le": self.A_le.tolist(), "A_eq": self.A_eq.tolist(), "n": self.n}


# ---------------------------------------------------------------------------
# Index sets and cones built from a problem
# ---------------------------------------------------------------------------


def active_constraints(problem: Problem, x, tol: Tolerances = Tolerances()) -> tuple[int, ...]:
    """0-based indices of constraints with |g_i(x)| <= eps_active."""
    g = problem.g(x)
    for i, v in enumerate(g):
        if v > tol.eps_feas:
            raise InfeasiblePoint(f"constraint g{i + 1} violated: g{i + 1}(x) = {v!r}")
    return tuple(i for i, v in enumerate(g) if abs(v) <= tol.eps_active)


def _zero_rows(G: np.ndarray, d: np.ndarray, eps: float) -> tuple[int, ...]:
    dn = float(np.linalg.norm(d))
    return tuple(
        i for i in range(G.shape[0]) if abs(G[i] @ d) <= eps * dn * max(1.0, np.linalg.norm(G[i]))
    )


def zero_sets_from(F: np.ndarray, G: np.ndarray, active, d, tol: Tolerances) -> ActiveSets:
    """``F``: objective gradients; ``G``: all constraint gradients."""
    d = np.asarray(d, dtype=float)
    if not np.any(d):
        raise ValueError("direction must be nonzero")
    J = _zero_rows(F, d, tol.eps_zero)
    Iz = tuple(active[k] for k in _zero_rows(G[list(active)], d, tol.eps_zero)) if active else ()
    return ActiveSets(tuple(active), J, Iz)


def zero_sets(problem: Problem, x, d, tol: Tolerances = Tolerances()) -> ActiveSets:
    active = active_constraints(problem, x, tol)
    return zero_sets_from(problem.f_grads(x), problem.g_grads(x), active, d, tol)


def critical_cone_from(F: np.ndarray, G: np.ndarray, active) -> ConeH:
    rows = [F] + ([G[list(active)]] if active else [])
    return ConeH(np.vstack(rows), np.zeros((0, F.shape[1])), F.shape[1])


def critical_cone(problem: Problem, x, tol: Tolerances = Tolerances()) -> ConeH:
    active = active_constraints(problem, x, tol)
    return critical_cone_from(problem.f_grads(x), problem.g_grads(x), active)


def cone_cxd_perp_from(F, G, sets: ActiveSets, d, with_objectives: bool) -> ConeH:
    n = F.shape[1]
    rows = [G[list(sets.I_zero)]] if sets.I_zero else []
    if with_objectives and sets.J_zero:
        rows.append(F[list(sets.J_zero)])
    A = np.vstack(rows) if rows else np.zeros((0, n))
    return ConeH(A, np.asarray(d, dtype=float).reshape(1, n), n)


def cone_cxd_perp(
    problem: Problem, x, d, with_objectives: bool, tol: Tolerances = Tolerances()
) -> ConeH:
    sets = zero_sets(problem, x, d, tol)
    return cone_cxd_perp_from(problem.f_grads(x), problem.g_grads(x), sets, d, with_objectives)


# ---------------------------------------------------------------------------
# Membership and triviality
# ---------------------------------------------------------------------------


def contains(cone: ConeH, w, tol: Tolerances = Tolerances()) -> bool:
    w = np.asarray(w, dtype=float)
    wn = float(np.linalg.norm(w))
    if wn == 0:
        return True
    for a in cone.A_le:
        if a @ w > tol.eps_zero * wn * max(1.0, np.linalg.norm(a)):
            return False
    for e in cone.A_eq:
        if abs(e @ w) > tol.eps_zero * wn * max(1.0, np.linalg.norm(e)):
            return False
    return True


def _unit_rows(A: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(A, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    return A / norms


def is_trivial(cone: ConeH, tol: Tolerances = Tolerances()) -> bool:
    """True iff the cone is {0}: 2n LPs maximizing +-w_k under s*w_k <= 1."""
    n = cone.n
    A_le = _unit_rows(cone.A_le)
    A_eq = _unit_rows(cone.A_eq)
    free = np.full(n, -np.inf)
    for k in range(n):
        for s in (1.0, -1.0):
            c = np.zeros(n)
            c[k] = s
            lp = LpProblem(
                c,
                np.vstack([A_le, c[None, :]]),
                np.concatenate([np.zeros(A_le.shape[0]), [1.0]]),
                A_eq if A_eq.shape[0] else None,
                np.zeros(A_eq.shape[0]) if A_eq.shape[0] else None,
                lower=free,
            )
            res = solve(lp)
            if res.status != "optimal":
                raise RuntimeError(f"triviality LP ended {res.status}")
            if res.value > tol.tau_strict:
                return False
    return True


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


def _implicit_equalities(cone: ConeH, tol: Tolerances) -> list[int]:
    """Rows a of A_le with a.w = 0 on the whole cone."""
    n = cone.n
    A_le = _unit_rows(cone.A_le)
    A_eq = _unit_rows(cone.A_eq)
    box = np.vstack([np.eye(n), -np.eye(n)])
    out = []
    for i, a in enumerate(A_le):
        lp = LpProblem(
            -a,
            np.vstack([A_le, box]),
            np.concatenate([np.zeros(A_le.shape[0]), np.ones(2 * n)]),
            A_eq if A_eq.shape[0] else None,
            np.zeros(A_eq.shape[0]) if A_eq.shape[0] else None,
            lower=np.full(n, -np.inf),
        )
        res = solve(lp)
        if res.status == "optimal" and res.value <= tol.tau_strict:
            out.append(i)
    return out


def _null_space(E: np.ndarray, n: int) -> np.ndarray:
    """Orthonormal basis (columns) of {w : E w = 0}."""
    if E.shape[0] == 0:
        return np.eye(n)
    _, sv, vt = np.linalg.svd(E)
    rank = int(np.sum(sv > 1e-10 * max(1.0, sv[0])))
    return vt[rank:].T


def _clean_unit(v: np.ndarray) -> np.ndarray:
    v = np.where(np.abs(v) < 1e-14 * np.abs(v).max(), 0.0, v)
    return v / np.linalg.norm(v)


def _extreme_rays(cone: ConeH, N: np.ndarray, R: np.ndarray, tol: Tolerances) -> list[np.ndarray]:
    r = N.shape[1]
    if r == 0:
        return []
    B = R @ N  # inequality rows in reduced coordinates
    rays: list[np.ndarray] = []
    for S in itertools.combinations(range(B.shape[0]), r - 1):
        M = B[list(S)]
        if M.shape[0]:
            _, sv, vt = np.linalg.svd(M)
            if np.sum(sv > 1e-10 * max(1.0, sv[0])) != r - 1:
                continue
            z = vt[-1]
        elif r == 1:
            z = np.ones(1)
        else:
            continue
        for s in (1.0, -1.0):
            w = _clean_unit(N @ (s * z))
            if contains(cone, w, tol) and not any(np.allclose(w, u, atol=1e-12) for u in rays):
                rays.append(w)
    return rays


@dataclass
class ConeSample:
    vectors: list[np.ndarray]
    rays: int
    short: bool  # fewer than requested


def sample_unit(
    cone: ConeH, count: int, seed: int = 0, tol: Tolerances = Tolerances()
) -> ConeSample:
    """Unit vectors in the cone: extreme rays (n <= 3) then seeded draws."""
    n = cone.n
    if is_trivial(cone, tol):
        return ConeSample([], 0, True)
    implicit = _implicit_equalities(cone, tol)
    E = np.vstack([_unit_rows(cone.A_eq), _unit_rows(cone.A_le[implicit])])
    keep = [i for i in range(cone.A_le.shape[0]) if i not in implicit]
    R = cone.A_le[keep]
    N = _null_space(E, n)
    rays = _extreme_rays(cone, N, R, tol) if n <= 3 else []
    out = list(rays[:count])
    rng = np.random.default_rng(seed)
    r = N.shape[1]
    tries = 0
    max_tries = 200 * count + 1000
    while len(out) < count and tries < max_tries:
        tries += 1
        w = N @ rng.standard_normal(r)
        nw = np.linalg.norm(w)
        if nw == 0:
            continue
        w = w / nw
        if contains(cone, w, tol):
            out.append(w)
        elif tries >= 1000 and len(out) < tries // 100 and rays:
            break  # acceptance stalled
    if len(out) < count and rays:
        R_ = np.array(rays)
        for _ in range(50 * count):
            if len(out) >= count:
                break
            wts = rng.exponential(size=len(rays))
            w = wts @ R_
            nw = np.linalg.norm(w)
            if nw > 0 and contains(cone, w / nw, tol):
                out.append(w / nw)
    return ConeSample(out, len(rays[:count]), len(out) < count)
