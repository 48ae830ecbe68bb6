"""Directional derivatives: first order, Demyanov-Pevnyi second order, and
Hadamard-type estimates, each computed as a numerical limit with diagnostics.

The second-order quotient along ``x + t d`` is

    q(t) = 2 [phi(x + t d) - phi(x) - t <grad phi(x), d>] / t^2

evaluated on the geometric grid ``t_k = t0 * rho^k``.  A sequence is
classified by, in order:

* a tight window (the last ``window`` values agree to ``tol``),
* Richardson extrapolation in ``t`` with a roundoff-aware error bound,
* monotone growth (divergence),
* a shrinking oscillation envelope (slow fractional-rate convergence),

and otherwise reported as having no limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .expr import DomainError, ExprError, Jet, KinkError, Node, evaluate, grad, jet_eval

EPS = np.finfo(float).eps
RICHARDSON_LEVELS = 4
HADAMARD_PERTURBATIONS = 8


class DerivError(ValueError):
    """Invalid request (for example a zero direction)."""


class StabilityInconclusive(RuntimeError):
    """Too many gradient evaluations failed near the point."""


@dataclass(frozen=True)
class DerivConfig:
    t0: float = 0.1
    rho: float = 0.5
    max_steps: int = 40
    window: int = 6
    tol_rel: float = 1e-6
    tol_abs: float = 1e-9

    def __post_init__(self):
        if not (0 < self.rho < 1):
            raise ValueError("rho must lie in (0, 1)")
        if not self.t0 > 0:
            raise ValueError("t0 must be positive")
        if self.window < 3:
            raise ValueError("window must be at least 3")
        if self.max_steps < self.window:
            raise ValueError("max_steps must be at least window")
        if self.tol_rel < 0 or self.tol_abs < 0:
            raise ValueError("tolerances must be non-negative")

    def tol(self, value: float) -> float:
        return self.tol_abs + self.tol_rel * abs(value)


@dataclass
class DirDeriv2Result:
    """``kind`` is ``finite``, ``divergent`` or ``nolimit``."""

    kind: str
    value: float | None = None
    uncertainty: float | None = None
    sign: int | None = None
    amplitude: float | None = None
    trace: list[float] = field(default_factory=list)
    method: str = ""

    @property
    def is_finite(self) -> bool:
        return self.kind == "finite"

    def to_json(self) -> dict:
        out: dict = {"kind": self.kind, "method": self.method}
        if self.kind == "finite":
            out["value"] = self.value
            out["uncertainty"] = self.uncertainty
        elif self.kind == "divergent":
            out["sign"] = "+" if self.sign > 0 else "-"
        else:
            out["amplitude"] = self.amplitude
            out["trace"] = list(self.trace)
        return out


def finite(value: float, uncertainty: float, method: str) -> DirDeriv2Result:
    return DirDeriv2Result("finite", float(value), float(uncertainty), method=method)


# ---------------------------------------------------------------------------
# First order
# ---------------------------------------------------------------------------


def dir_deriv1(ast: Node, x: Sequence[float], d: Sequence[float]) -> float:
    d = np.asarray(d, dtype=float)
    if not np.any(d):
        return 0.0
    return float(grad(ast, x) @ d)


# ---------------------------------------------------------------------------
# Sequence analysis
# ---------------------------------------------------------------------------


def _window_tight(q: list[float], cfg: DerivConfig) -> DirDeriv2Result | None:
    w = q[-cfg.window :]
    med = float(np.median(w))
    if max(abs(v - med) for v in w) <= cfg.tol(med):
        return finite(med, max(w) - min(w), "window")
    return None


def _richardson(q, noise, ratio, cfg) -> DirDeriv2Result | None:
    """Eliminate powers of the step variable; ``ratio`` is its grid factor."""
    n = len(q)
    levels = min(RICHARDSON_LEVELS, n - 3)
    if levels < 1:
        return None
    R = np.full((n, levels + 1), np.nan)
    R[:, 0] = q
    amp = [1.0]
    for j in range(1, levels + 1):
        f = ratio**j
        amp.append(amp[-1] * (1 + f) / (1 - f))
        for k in range(j, n):
            R[k, j] = (R[k, j - 1] - f * R[k - 1, j - 1]) / (1 - f)
    best = None
    for j in range(1, levels + 1):
        for k in range(j + 2, n):
            v = R[k, j]
            err = abs(v - R[k - 1, j]) + amp[j] * noise[k]
            tol = cfg.tol(v)
            if err > tol or abs(R[k - 1, j] - R[k - 2, j]) > tol:
                continue
            if not _raw_monotone(q[max(0, k - j - 2) : k + 1], noise[max(0, k - j - 2) : k + 1]):
                continue
            if best is None or err < best[1]:
                best = (v, err, k)
    if best is None:
        return None
    v, err, k = best
    # envelope width: the limit lies between the raw quotient and v
    return finite(v, max(err, abs(q[k] - v)), "richardson")


def _raw_monotone(q, noise) -> bool:
    # differences above noise must keep one sign and not grow
    diffs = []
    for k in range(1, len(q)):
        dq = q[k] - q[k - 1]
        if abs(dq) > 10 * (noise[k] + noise[k - 1]):
            diffs.append(dq)
    if not diffs:
        return True
    if not (all(v > 0 for v in diffs) or all(v < 0 for v in diffs)):
        return False
    return all(abs(b) <= abs(a) * (1 + 1e-9) for a, b in zip(diffs, diffs[1:]))


def _divergent(q, cfg) -> DirDeriv2Result | None:
    w = [abs(v) for v in q[-cfg.window :]]
    if not all(b > a for a, b in zip(w, w[1:])):
        return None
    tail = q[-cfg.window :]
    if not (all(v > 0 for v in tail) or all(v < 0 for v in tail)):
        return None
    first = max(abs(q[0]), cfg.tol_abs)
    if w[-1] > 1.0 / max(cfg.tol_abs, 1e-300) or w[-1] >= 100 * first:
        return DirDeriv2Result("divergent", sign=1 if q[-1] > 0 else -1, method="growth")
    return None


def _envelope(q, steps, cfg) -> DirDeriv2Result | None:
    """Oscillation whose amplitude shrinks like a power of the step."""
    w = cfg.window
    nblocks = len(q) // w
    if nblocks < 3:
        return None
    start = len(q) - nblocks * w
    amps, logt = [], []
    for b in range(nblocks):
        seg = q[start + b * w : start + (b + 1) * w]
        amps.append((max(seg) - min(seg)) / 2)
        logt.append(float(np.mean(np.log(steps[start + b * w : start + (b + 1) * w]))))
    last = q[-w:]
    mid = (max(last) + min(last)) / 2
    spread = max(last) - min(last)
    if amps[-1] <= cfg.tol(mid):
        return finite(mid, spread, "envelope")
    if min(amps) <= 0:
        return None
    slope = float(np.polyfit(logt, np.log(amps), 1)[0])
    if slope >= 0.1 and amps[-1] <= 0.5 * amps[0] and all(
        b <= a * 1.5 for a, b in zip(amps, amps[1:])
    ):
        return finite(mid, spread, "envelope")
    return None


def _classify(q, noise, steps, ratio, cfg) -> DirDeriv2Result:
    res = _window_tight(q, cfg)
    if res is None:
        res = _richardson(q, noise, ratio, cfg)
    if res is None:
        res = _divergent(q, cfg)
    if res is None:
        res = _envelope(q, steps, cfg)
    if res is None:
        last = q[-cfg.window :]
        res = DirDeriv2Result(
            "nolimit", amplitude=(max(last) - min(last)) / 2, trace=list(q), method="oscillation"
        )
    return res


# ---------------------------------------------------------------------------
# Demyanov-Pevnyi second derivative
# ---------------------------------------------------------------------------


def second_dp(
    ast: Node, x: Sequence[float], d: Sequence[float], cfg: DerivConfig = DerivConfig()
) -> DirDeriv2Result:
    x = np.asarray(x, dtype=float)
    d = np.asarray(d, dtype=float)
    if not np.any(d):
        raise DerivError("direction must be nonzero")
    phi0 = evaluate(ast, x)
    slope = float(grad(ast, x) @ d)
    q, noise, steps = [], [], []
    for k in range(cfg.max_steps):
        t = cfg.t0 * cfg.rho**k
        phit = evaluate(ast, x + t * d)
        q.append(2.0 * (phit - phi0 - t * slope) / (t * t))
        noise.append(8 * EPS * (abs(phit) + abs(phi0) + abs(t * slope)) * 2.0 / (t * t))
        steps.append(t)
        if len(q) >= cfg.window:
            early = _window_tight(q, cfg)
            if early is not None:
                return early
    return _classify(q, noise, steps, cfg.rho, cfg)


def second_ad(ast: Node, x: Sequence[float], d: Sequence[float]) -> float | None:
    """Taylor-jet second derivative along the ray, or None near kinks/branch changes."""
    x = np.asarray(x, dtype=float)
    d = np.asarray(d, dtype=float)
    vals, sigs = [], []
    for t in (0.0, 1e-7, 2e-7):
        xs = [Jet(float(x[i] + t * d[i]), np.array([d[i]]), np.zeros(1)) for i in range(len(x))]
        try:
            out, events = jet_eval(ast, xs, order=2)
        except KinkError:
            return None
        if any(e[0] == "kink" and e[2] == 0 for e in events):
            return None
        sigs.append(events)
        vals.append(2.0 * float(out.d2[0]))
    if not (sigs[0] == sigs[1] == sigs[2]):
        return None
    return 2.0 * vals[1] - vals[2]


def second_derivative(
    ast: Node, x: Sequence[float], d: Sequence[float], cfg: DerivConfig = DerivConfig()
) -> DirDeriv2Result:
    """Jet fast path when the ray map is smooth at 0+, otherwise ``second_dp``."""
    if not np.any(np.asarray(d, dtype=float)):
        return finite(0.0, 0.0, "zero")
    try:
        v = second_ad(ast, x, d)
    except DomainError:
        v = None
    if v is not None and math.isfinite(v):
        return finite(v, 1e-12 * (1 + abs(v)), "jet")
    return second_dp(ast, x, d, cfg)


# ---------------------------------------------------------------------------
# Hadamard-type estimate
# ---------------------------------------------------------------------------


def _unit_perturbations(n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((HADAMARD_PERTURBATIONS, n))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def hadamard_second_estimate(
    ast: Node,
    x: Sequence[float],
    d: Sequence[float],
    cfg: DerivConfig = DerivConfig(),
    seed: int = 0,
) -> DirDeriv2Result:
    x = np.asarray(x, dtype=float)
    d = np.asarray(d, dtype=float)
    dp = second_dp(ast, x, d, cfg)
    if not dp.is_finite:
        return dp
    phi0 = evaluate(ast, x)
    g = grad(ast, x)
    sratio = math.sqrt(cfg.rho)
    values, traces = [], []
    tight = True
    for v in _unit_perturbations(len(x), seed):
        q, noise, steps = [], [], []
        for k in range(cfg.max_steps):
            t = cfg.t0 * cfg.rho**k
            u = d + math.sqrt(t) * v
            phit = evaluate(ast, x + t * u)
            lin = t * float(g @ u)
            q.append(2.0 * (phit - phi0 - lin) / (t * t))
            noise.append(8 * EPS * (abs(phit) + abs(phi0) + abs(lin)) * 2.0 / (t * t))
            steps.append(math.sqrt(t))
        res = _window_tight(q, cfg) or _richardson(q, noise, sratio, cfg)
        traces.append(q)
        if res is None:
            tight = False
            continue
        values.append(res.value)
    if tight:
        lo, hi = min(values + [dp.value]), max(values + [dp.value])
        ref = max(abs(lo), abs(hi))
        if hi - lo <= cfg.tol(ref):
            return finite(dp.value, max(hi - lo, dp.uncertainty), "hadamard")
    last = [t[-1] for t in traces]
    return DirDeriv2Result(
        "nolimit",
        amplitude=(max(last) - min(last)) / 2 if tight else float(
            max(abs(t[-1] - dp.value) for t in traces)
        ),
        trace=[t[-1] for t in traces] + traces[0][-cfg.window :],
        method="hadamard",
    )


# ---------------------------------------------------------------------------
# Gradient stability
# ---------------------------------------------------------------------------


@dataclass
class GradientStability:
    bounded: bool
    modulus_estimate: float
    shell_max: list[float]
    skipped: int


def gradient_stability_estimate(
    ast: Node,
    x: Sequence[float],
    cfg: DerivConfig = DerivConfig(),
    seed: int = 0,
    shells: int = 8,
    per_shell: int = 32,
) -> GradientStability:
    """Largest ``|grad(y) - grad(x)| / |y - x|`` on shrinking shells around ``x``."""
    x = np.asarray(x, dtype=float)
    g0 = grad(ast, x)
    rng = np.random.default_rng(seed)
    shell_max, skipped, total = [], 0, 0
    for k in range(shells):
        r = cfg.t0 * 10.0**-k
        dirs = rng.standard_normal((per_shell, len(x)))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        best = 0.0
        for v in dirs:
            total += 1
            try:
                gy = grad(ast, x + r * v)
            except ExprError:
                skipped += 1
                continue
            best = max(best, float(np.linalg.norm(gy - g0)) / r)
        shell_max.append(best)
    if skipped > total / 2:
        raise StabilityInconclusive(f"{skipped} of {total} gradient samples failed")
    tail = shell_max[-3:]
    bounded = not (tail[0] > 0 and tail[-1] >= 10 * tail[0]) and not (tail[0] == 0 and tail[-1] > 0)
    return GradientStability(bool(bounded), max(shell_max), shell_max, skipped)
