"""Dense two-phase simplex (Bland's rule) and a brute-force vertex oracle."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

PIVOT_TOL = 1e-9


class SolverStalled(RuntimeError):
    """Iteration cap reached without termination."""


@dataclass
class LpProblem:
    """Maximize ``c @ x`` subject to ``A_le x <= b_le``, ``A_eq x = b_eq`` and bounds.

    ``lower[j]`` is 0 or ``-inf``; ``upper[j]`` is finite or ``+inf``.
    Omitted bounds default to ``x >= 0``.
    """

    c: np.ndarray
    A_le: np.ndarray | None = None
    b_le: np.ndarray | None = None
    A_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).reshape(-1)
        n = self.c.size
        self.A_le, self.b_le = _rows(self.A_le, self.b_le, n)
        self.A_eq, self.b_eq = _rows(self.A_eq, self.b_eq, n)
        self.lower = np.zeros(n) if self.lower is None else np.asarray(self.lower, dtype=float)
        self.upper = np.full(n, np.inf) if self.upper is None else np.asarray(self.upper, dtype=float)
        if self.lower.shape != (n,) or self.upper.shape != (n,):
            raise ValueError("bounds must have one entry per variable")
        if not np.all((self.lower == 0) | (self.lower == -np.inf)):
            raise ValueError("lower bounds must be 0 or -inf")
        if np.any(self.upper == -np.inf) or np.any(np.isnan(self.upper)):
            raise ValueError("upper bounds must be finite or +inf")
        for arr in (self.c, self.A_le, self.b_le, self.A_eq, self.b_eq):
            if not np.all(np.isfinite(arr)):
                raise ValueError("LP data must be finite")

    @property
    def n(self) -> int:
        return self.c.size


def _rows(A, b, n):
    if A is None:
        return np.zeros((0, n)), np.zeros(0)
    A = np.asarray(A, dtype=float).reshape(-1, n)
    b = np.asarray(b, dtype=float).reshape(-1)
    if b.size != A.shape[0]:
        raise ValueError("row count mismatch")
    return A, b


@dataclass
class LpResult:
    status: str  # optimal | infeasible | unbounded
    x: np.ndarray | None = None
    value: float | None = None
    iterations: int = field(default=0, compare=False)


BLAND_AFTER = 50  # consecutive degenerate pivots


def _pivot(T: np.ndarray, r: int, j: int) -> None:
    T[r] /= T[r, j]
    col = T[:, j].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])


def _run(T, basis, cols, cap, counter) -> str:
    """Maximize the objective stored in the last row of ``T`` over ``cols``."""
    m = T.shape[0] - 1
    degenerate = 0
    while True:
        obj = T[-1]
        entering = -1
        for j in cols:
            if obj[j] > PIVOT_TOL:
                entering = j
                break
        if entering < 0:
            return "optimal"
        col = T[:m, entering]
        best = math.inf
        leave = -1
        # ties: largest pivot for stability; lowest basis index once degenerate runs get long
        bland = degenerate >= BLAND_AFTER
        for i in range(m):
            if col[i] > PIVOT_TOL:
                ratio = T[i, -1] / col[i]
                if ratio < best - 1e-12:
                    best, leave = ratio, i
                elif abs(ratio - best) <= 1e-12:
                    if (basis[i] < basis[leave]) if bland else (col[i] > col[leave]):
                        best, leave = ratio, i
        if leave < 0:
            return "unbounded"
        degenerate = degenerate + 1 if best <= 1e-12 else 0
        _pivot(T, leave, entering)
        basis[leave] = entering
        counter[0] += 1
        if counter[0] > cap:
            raise SolverStalled(f"simplex exceeded {cap} iterations")


def solve(lp: LpProblem) -> LpResult:
    """Two-phase simplex with Bland's anti-cycling rule; returns the maximum."""
    n = lp.n
    # column map: x_j = sum(sign * y_col)
    colmap: list[tuple[int, float]] = []
    for j in range(n):
        colmap.append((j, 1.0))
        if lp.lower[j] == -np.inf:
            colmap.append((j, -1.0))
    ny = len(colmap)
    M = np.zeros((n, ny))
    for k, (j, s) in enumerate(colmap):
        M[j, k] = s

    le_rows = [lp.A_le @ M]
    le_b = [lp.b_le]
    ub = np.where(np.isfinite(lp.upper))[0]
    if ub.size:
        le_rows.append(np.eye(n)[ub] @ M)
        le_b.append(lp.upper[ub])
    A_le = np.vstack(le_rows)
    b_le = np.concatenate(le_b)
    A_eq = lp.A_eq @ M
    b_eq = lp.b_eq
    m_le, m_eq = A_le.shape[0], A_eq.shape[0]
    m = m_le + m_eq
    nvar = ny + m_le  # structural + slack
    total = nvar + m  # + artificials

    T = np.zeros((m + 1, total + 1))
    T[:m_le, :ny] = A_le
    T[:m_le, ny : ny + m_le] = np.eye(m_le)
    T[:m_le, -1] = b_le
    T[m_le:m, :ny] = A_eq
    T[m_le:m, -1] = b_eq
    neg = T[:m, -1] < 0
    T[:m][neg] *= -1.0
    T[:m, nvar:total] = np.eye(m)
    basis = list(range(nvar, total))

    cap = int(1e4 * (total + m + 1))
    counter = [0]
    scale = 1.0 + (np.max(np.abs(T[:m, -1])) if m else 0.0)

    # phase 1: maximize -sum(artificials)
    T[-1, :] = 0.0
    T[-1, nvar:total] = -1.0
    for i in range(m):
        T[-1] += T[i]
    T[-1, nvar:total] = 0.0
    _run(T, basis, range(total), cap, counter)
    # objective-row rhs holds the remaining sum of artificials
    if T[-1, -1] > 1e-9 * scale:
        return LpResult("infeasible", iterations=counter[0])

    # drive artificials out of the basis; drop redundant rows
    keep = []
    for i in range(m):
        if basis[i] >= nvar:
            row = T[i, :nvar]
            cand = np.where(np.abs(row) > PIVOT_TOL)[0]
            if cand.size:
                _pivot(T, i, int(cand[0]))
                basis[i] = int(cand[0])
                keep.append(i)
        else:
            keep.append(i)
    T = np.vstack([T[keep][:, list(range(nvar)) + [total]], np.zeros((1, nvar + 1))])
    basis = [basis[i] for i in keep]

    # phase 2
    cy = np.zeros(nvar)
    cy[:ny] = M.T @ lp.c
    T[-1, :nvar] = cy
    for i, b in enumerate(basis):
        T[-1] -= cy[b] * T[i]
    status = _run(T, basis, range(nvar), cap, counter)
    if status == "unbounded":
        return LpResult("unbounded", iterations=counter[0])
    y = np.zeros(nvar)
    for i, b in enumerate(basis):
        y[b] = T[i, -1]
    x = M @ y[:ny]
    return LpResult("optimal", x, float(lp.c @ x), counter[0])


# ---------------------------------------------------------------------------
# Vertex enumeration oracle
# ---------------------------------------------------------------------------

MAX_ENUM_VARS = 6
MAX_ENUM_ROWS = 10


def _as_inequalities(lp: LpProblem) -> tuple[np.ndarray, np.ndarray]:
    n = lp.n
    rows = [lp.A_le]
    rhs = [lp.b_le]
    lo = np.where(lp.lower == 0)[0]
    if lo.size:
        rows.append(-np.eye(n)[lo])
        rhs.append(np.zeros(lo.size))
    ub = np.where(np.isfinite(lp.upper))[0]
    if ub.size:
        rows.append(np.eye(n)[ub])
        rhs.append(lp.upper[ub])
    return np.vstack(rows), np.concatenate(rhs)


def _independent_rows(A: np.ndarray, tol: float = 1e-10) -> list[int]:
    chosen: list[int] = []
    for i in range(A.shape[0]):
        trial = A[chosen + [i]]
        if np.linalg.matrix_rank(trial, tol=tol * (1 + np.abs(A).max())) == len(chosen) + 1:
            chosen.append(i)
    return chosen


def _square_solutions(Aeq, beq, G, h, k):
    """Solve all systems [Aeq; G_S] x = [beq; h_S] with |S| = k; yields (x, S)."""
    n = G.shape[1]
    subsets = list(itertools.combinations(range(G.shape[0]), k))
    if not subsets:
        return np.zeros((0, n))
    S = np.array(subsets, dtype=int).reshape(len(subsets), k)
    mats = np.concatenate([np.broadcast_to(Aeq, (len(S),) + Aeq.shape), G[S]], axis=1)
    rhs = np.concatenate([np.broadcast_to(beq, (len(S), beq.size)), h[S]], axis=1)
    dets = np.abs(np.linalg.det(mats))
    ok = dets > 1e-10 * max(1.0, np.abs(mats).max()) ** n
    if not np.any(ok):
        return np.zeros((0, n))
    return np.linalg.solve(mats[ok], rhs[ok][..., None])[..., 0]


def _null_vectors(Aeq, G, k):
    """Unit null vectors of [Aeq; G_S] for |S| = k when that nullspace is 1-D."""
    n = G.shape[1]
    subsets = list(itertools.combinations(range(G.shape[0]), k))
    if not subsets:
        return np.zeros((0, n))
    S = np.array(subsets, dtype=int).reshape(len(subsets), k)
    mats = np.concatenate([np.broadcast_to(Aeq, (len(S),) + Aeq.shape), G[S]], axis=1)
    if mats.shape[1] == 0:
        # no rows: the whole space, 1-D only when n == 1
        return np.ones((1, 1)) if n == 1 else np.zeros((0, n))
    _, sv, vt = np.linalg.svd(mats)
    scale = max(1.0, np.abs(mats).max())
    full = sv[:, n - 2] > 1e-9 * scale if n >= 2 else np.ones(len(S), bool)
    return vt[full, n - 1, :]


def enumerate_vertices(lp: LpProblem) -> LpResult:
    """Best feasible vertex by brute force over active sets (test oracle)."""
    n = lp.n
    if n > MAX_ENUM_VARS or lp.A_le.shape[0] + lp.A_eq.shape[0] > MAX_ENUM_ROWS:
        raise ValueError("problem exceeds vertex-enumeration size cap")
    G, h = _as_inequalities(lp)
    Aeq, beq = lp.A_eq, lp.b_eq
    scale = 1.0 + max(np.abs(h).max(initial=0.0), np.abs(beq).max(initial=0.0))
    tol = 1e-9 * scale

    # lineality space: directions along which the region is invariant
    allrows = np.vstack([G, Aeq])
    if allrows.shape[0]:
        _, sv, vt = np.linalg.svd(allrows)
        rank = int(np.sum(sv > 1e-10 * max(1.0, np.abs(allrows).max())))
    else:
        vt = np.eye(n)
        rank = 0
    lineality = vt[rank:]
    eq_idx = _independent_rows(Aeq) if Aeq.shape[0] else []
    Aeq_i, beq_i = Aeq[eq_idx], beq[eq_idx]

    def feasible(x):
        return (G.shape[0] == 0 or np.all(G @ x <= h + tol)) and (
            Aeq.shape[0] == 0 or np.all(np.abs(Aeq @ x - beq) <= tol)
        )

    if lineality.shape[0]:
        Aeq_i = np.vstack([Aeq_i, lineality])
        beq_i = np.concatenate([beq_i, np.zeros(lineality.shape[0])])
    r = Aeq_i.shape[0]
    k = n - r
    best = None
    if k >= 0:
        for x in _square_solutions(Aeq_i, beq_i, G, h, k):
            if feasible(x):
                v = float(lp.c @ x)
                if best is None or v > best[1] + 1e-12:
                    best = (x, v)
    if best is None:
        return LpResult("infeasible")
    if lineality.shape[0] and np.any(np.abs(lineality @ lp.c) > 1e-12 * (1 + np.abs(lp.c).max())):
        return LpResult("unbounded")
    # extreme rays of the (pointed) recession cone
    ctol = 1e-9 * (1 + np.abs(lp.c).max())
    if k - 1 >= 0:
        for ray in _null_vectors(Aeq_i, G, k - 1):
            for s in (1.0, -1.0):
                d = s * ray
                if G.shape[0] and np.any(G @ d > 1e-9):
                    continue
                if lp.c @ d > ctol:
                    return LpResult("unbounded")
    return LpResult("optimal", best[0], best[1])
