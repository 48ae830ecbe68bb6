"""Vector optimization problems: minimize f(x) subject to g_i(x) <= 0."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .expr import Binary, Const, Node, evaluate, grad, parse_expr, print_expr, substitute_constants


class ProblemError(ValueError):
    """Malformed problem data."""


@dataclass(frozen=True)
class Problem:
    n: int
    objectives: tuple[Node, ...]
    constraints: tuple[Node, ...]
    box: np.ndarray  # shape (n, 2)
    eta_texts: tuple[str, ...] | None = None  # in y1..yn and xbar1..xbarn
    overrides: dict = field(default_factory=dict, compare=False)

    @property
    def p(self) -> int:
        return len(self.objectives)

    @property
    def m(self) -> int:
        return len(self.constraints)

    def f(self, x: Sequence[float]) -> np.ndarray:
        return np.array([evaluate(a, x) for a in self.objectives])

    def g(self, x: Sequence[float]) -> np.ndarray:
        return np.array([evaluate(a, x) for a in self.constraints])

    def f_grads(self, x) -> np.ndarray:
        return np.array([grad(a, x) for a in self.objectives]).reshape(self.p, self.n)

    def g_grads(self, x) -> np.ndarray:
        return np.array([grad(a, x) for a in self.constraints]).reshape(self.m, self.n)

    def feasible(self, x, eps: float = 1e-8) -> bool:
        return self.m == 0 or bool(np.all(self.g(x) <= eps))

    def in_box(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.box[:, 0]) and np.all(x <= self.box[:, 1]))

    def scaled(self, obj_scale: Sequence[float] = (), con_scale: Sequence[float] = ()) -> "Problem":
        """Copy with f_j and g_i multiplied by positive constants."""
        objs = tuple(
            Binary("mul", Const(float(s)), a) if s != 1 else a
            for a, s in zip(self.objectives, list(obj_scale) + [1] * self.p)
        )
        cons = tuple(
            Binary("mul", Const(float(s)), a) if s != 1 else a
            for a, s in zip(self.constraints, list(con_scale) + [1] * self.m)
        )
        return Problem(self.n, objs, cons, self.box, self.eta_texts, self.overrides)

    def to_json(self) -> dict:
        out = {
            "n": self.n,
            "objectives": [print_expr(a) for a in self.objectives],
            "constraints": [print_expr(a) for a in self.constraints],
            "box": self.box.tolist(),
        }
        if self.eta_texts is not None:
            out["eta"] = list(self.eta_texts)
        return out


def build_problem(
    n: int,
    objectives: Sequence[str],
    constraints: Sequence[str],
    box: Sequence[Sequence[float]],
    eta: Sequence[str] | None = None,
    overrides: dict | None = None,
) -> Problem:
    if not isinstance(n, int) or n < 1:
        raise ProblemError("n must be a positive integer")
    if not objectives:
        raise ProblemError("at least one objective is required")
    b = np.asarray(box, dtype=float)
    if b.shape != (n, 2):
        raise ProblemError(f"box must be a list of {n} [lo, hi] pairs")
    if not np.all(np.isfinite(b)) or not np.all(b[:, 0] < b[:, 1]):
        raise ProblemError("box needs finite bounds with lo < hi")
    objs = tuple(parse_expr(s, n) for s in objectives)
    cons = tuple(parse_expr(s, n) for s in constraints)
    if eta is not None:
        if len(eta) != n:
            raise ProblemError("eta needs one expression per coordinate")
        # syntax check only; xbar values are bound at use
        for s in eta:
            parse_expr(substitute_constants(s, [0.0] * n), n, prefix="y")
    return Problem(
        n,
        objs,
        cons,
        b,
        tuple(eta) if eta is not None else None,
        dict(overrides or {}),
    )


def eta_nodes(problem: Problem, xbar: Sequence[float]) -> tuple[Node, ...]:
    """Parse eta(y, xbar) with ``xbar`` bound; variables are y1..yn."""
    if problem.eta_texts is None:
        raise ProblemError("problem defines no eta")
    return tuple(
        parse_expr(substitute_constants(s, list(xbar)), problem.n, prefix="y")
        for s in problem.eta_texts
    )


OVERRIDE_KEYS = ("tolerances", "deriv", "oracle", "certify", "falsify")


def problem_from_dict(data: dict) -> Problem:
    if not isinstance(data, dict):
        raise ProblemError("problem file must hold a JSON object")
    missing = [k for k in ("n", "objectives", "box") if k not in data]
    if missing:
        raise ProblemError(f"missing field(s): {', '.join(missing)}")
    unknown = set(data) - {"n", "objectives", "constraints", "box", "eta", *OVERRIDE_KEYS}
    if unknown:
        raise ProblemError(f"unknown field(s): {', '.join(sorted(unknown))}")
    overrides = {k: data[k] for k in OVERRIDE_KEYS if k in data}
    return build_problem(
        data["n"],
        data["objectives"],
        data.get("constraints", []),
        data["box"],
        data.get("eta"),
        overrides,
    )


def load_problem(path: str | Path) -> Problem:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ProblemError(f"invalid JSON: {exc}") from None
    return problem_from_dict(data)


def parse_point(text: str, n: int) -> np.ndarray:
    try:
        vals = [float(s) for s in text.split(",")]
    except ValueError:
        raise ProblemError(f"point {text!r} is not a comma-separated list of numbers") from None
    if len(vals) != n or not all(np.isfinite(vals)):
        raise ProblemError(f"point must have {n} finite coordinates")
    return np.array(vals)
