"""Sampling falsifiers for generalized-convexity properties at a point.

A property holds at ``xbar`` when an implication holds for every ``y`` in
the box.  The falsifier searches for a ``y`` where the antecedent holds and
the consequent fails.  Finding none is evidence, never proof.

Antecedent bands:

* ``phi(y) < phi(xbar)`` needs a margin ``tau_strict * (1 + |phi(xbar)|)``;
* ``phi(y) <= phi(xbar)`` is compared exactly;
* ``<grad, y - xbar> = 0`` uses ``eps_zero * |y - xbar| * max(1, |grad|)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cones import Tolerances
from .deriv import DerivConfig, second_derivative
from .expr import ExprError, Node, evaluate, grad

KINDS = ("quasiconvex", "pseudoconvex", "2-pseudoconvex", "strictly-2-pseudoconvex", "quasiinvex")
T_GRID = tuple(k / 16 for k in range(1, 16))


@dataclass
class FalsifyReport:
    status: str  # falsified | not_falsified | inconclusive
    kind: str
    y: list[float] | None = None
    t: float | None = None
    clause: str | None = None
    samples_used: int = 0
    skipped: int = 0
    inconclusive_samples: int = 0
    reason: str | None = None
    note: str = "sample-bounded evidence over the box; the property quantifies over an open set"

    def to_json(self) -> dict:
        out = {
            "status": self.status,
            "kind": self.kind,
            "samples_used": self.samples_used,
            "skipped": self.skipped,
            "inconclusive_samples": self.inconclusive_samples,
        }
        if self.status == "falsified":
            out["witness"] = {"y": self.y, "t": self.t}
            out["violated_clause"] = self.clause
        elif self.status == "inconclusive":
            out["reason"] = self.reason
        else:
            out["note"] = self.note
        return out


@dataclass
class _Ctx:
    ast: Node
    xbar: np.ndarray
    phibar: float
    g0: np.ndarray
    kind: str
    eta: tuple[Node, ...] | None
    tol: Tolerances
    deriv: DerivConfig
    cache: dict = field(default_factory=dict)


def _make_ctx(ast, xbar, kind, eta, tol, deriv) -> _Ctx:
    if kind not in KINDS:
        raise ValueError(f"unknown property kind {kind!r}")
    if kind == "quasiinvex" and eta is None:
        raise ValueError("quasiinvex needs eta")
    xbar = np.asarray(xbar, dtype=float)
    if eta is not None and len(eta) != len(xbar):
        raise ValueError("eta must have one component per coordinate")
    return _Ctx(ast, xbar, evaluate(ast, xbar), grad(ast, xbar), kind, eta, tol, deriv)


def _band(ctx: _Ctx, v: np.ndarray) -> float:
    return ctx.tol.eps_zero * float(np.linalg.norm(v)) * max(1.0, float(np.linalg.norm(ctx.g0)))


def _strictly_below(ctx: _Ctx, val: float) -> bool:
    return val < ctx.phibar - ctx.tol.tau_strict * (1 + abs(ctx.phibar))


def _check(ctx: _Ctx, y: np.ndarray, t: float | None = None):
    """Returns (status, t, clause); status in violated/ok/inconclusive/vacuous."""
    d = y - ctx.xbar
    if not np.any(d):
        return "vacuous", None, None
    phiy = evaluate(ctx.ast, y)
    kind = ctx.kind
    if kind == "quasiconvex":
        if not phiy <= ctx.phibar:
            return "vacuous", None, None
        limit = ctx.phibar + ctx.tol.tau_strict * (1 + abs(ctx.phibar))
        grid = T_GRID if t is None else (t,)
        if t is not None and not (0 < t < 1):
            return "ok", None, None
        best_t, best_v = None, limit
        for s in grid:
            v = evaluate(ctx.ast, ctx.xbar + s * d)
            if v > best_v:
                best_t, best_v = s, v
        if best_t is None:
            return "ok", None, None
        return "violated", best_t, "phi(y) <= phi(xbar) but phi(xbar + t(y - xbar)) > phi(xbar)"
    ip = float(ctx.g0 @ d)
    band = _band(ctx, d)
    if kind == "quasiinvex":
        if not phiy <= ctx.phibar:
            return "vacuous", None, None
        e = np.array([evaluate(c, y) for c in ctx.eta])
        if float(ctx.g0 @ e) > _band(ctx, e):
            return "violated", None, "phi(y) <= phi(xbar) but <grad phi(xbar), eta(y, xbar)> > 0"
        return "ok", None, None
    if kind == "pseudoconvex":
        if not _strictly_below(ctx, phiy):
            return "vacuous", None, None
        if ip >= -band:
            return "violated", None, "phi(y) < phi(xbar) but <grad phi(xbar), y - xbar> >= 0"
        return "ok", None, None
    if kind == "2-pseudoconvex":
        holds = _strictly_below(ctx, phiy)
        rel = "<"
    else:
        holds = phiy <= ctx.phibar
        rel = "<="
    if not holds:
        return "vacuous", None, None
    if ip > band:
        return "violated", None, f"phi(y) {rel} phi(xbar) but <grad phi(xbar), y - xbar> > 0"
    if abs(ip) > band:
        return "ok", None, None
    res = second_derivative(ctx.ast, ctx.xbar, d, ctx.deriv)
    if not res.is_finite:
        return "inconclusive", None, None
    if res.value - res.uncertainty >= -ctx.tol.tau_strict * float(d @ d):
        return (
            "violated",
            None,
            f"phi(y) {rel} phi(xbar) and <grad phi(xbar), y - xbar> = 0 but phi''(xbar; y - xbar) >= 0",
        )
    return "ok", None, None


def _candidates(ctx: _Ctx, box: np.ndarray, n_samples: int, seed: int):
    """Structured probes first, then uniform draws (every other one projected
    onto the hyperplane <grad, y - xbar> = 0)."""
    n = len(ctx.xbar)
    lo, hi = box[:, 0], box[:, 1]
    g = ctx.g0
    gg = float(g @ g)

    def proj(y):
        if gg == 0:
            return None
        return y - (float(g @ (y - ctx.xbar)) / gg) * g

    probes = []
    for k in range(n):
        for s in (1.0, -1.0):
            y = ctx.xbar.copy()
            y[k] += s
            probes.append(y)
    for y in list(probes):
        py = proj(y)
        if py is not None:
            probes.append(py)
    for y in probes:
        if np.all(y >= lo) and np.all(y <= hi):
            yield y
    rng = np.random.default_rng(seed)
    for i in range(n_samples):
        y = lo + (hi - lo) * rng.random(n)
        if i % 2 == 1:
            py = proj(y)
            if py is not None and np.all(py >= lo) and np.all(py <= hi):
                y = py
        yield y


def falsify(
    ast: Node,
    xbar: Sequence[float],
    kind: str,
    box,
    n_samples: int = 1000,
    seed: int = 0,
    tol: Tolerances = Tolerances(),
    eta: Sequence[Node] | None = None,
    deriv: DerivConfig = DerivConfig(),
) -> FalsifyReport:
    box = np.asarray(box, dtype=float)
    ctx = _make_ctx(ast, xbar, kind, tuple(eta) if eta is not None else None, tol, deriv)
    if not (np.all(ctx.xbar > box[:, 0]) and np.all(ctx.xbar < box[:, 1])):
        raise ValueError("box must contain xbar in its interior")
    used = skipped = inconclusive = 0
    for y in _candidates(ctx, box, n_samples, seed):
        used += 1
        try:
            status, t, clause = _check(ctx, y)
        except ExprError:
            skipped += 1
            continue
        if status == "violated":
            return FalsifyReport(
                "falsified", kind, [float(v) for v in y], t, clause, used, skipped, inconclusive
            )
        if status == "inconclusive":
            inconclusive += 1
    if skipped > used / 2:
        return FalsifyReport(
            "inconclusive",
            kind,
            samples_used=used,
            skipped=skipped,
            inconclusive_samples=inconclusive,
            reason=f"{skipped} of {used} samples failed to evaluate",
        )
    return FalsifyReport(
        "not_falsified", kind, samples_used=used, skipped=skipped, inconclusive_samples=inconclusive
    )


def recheck_witness(
    ast: Node,
    xbar: Sequence[float],
    kind: str,
    y: Sequence[float],
    t: float | None = None,
    tol: Tolerances = Tolerances(),
    eta: Sequence[Node] | None = None,
    deriv: DerivConfig = DerivConfig(),
) -> bool:
    """Re-evaluate one witness; true iff the violation is confirmed."""
    try:
        ctx = _make_ctx(ast, xbar, kind, tuple(eta) if eta is not None else None, tol, deriv)
        if kind == "quasiconvex" and t is None:
            return False
        status, _, _ = _check(ctx, np.asarray(y, dtype=float), t)
    except (ExprError, ValueError):
        return False
    return status == "violated"
