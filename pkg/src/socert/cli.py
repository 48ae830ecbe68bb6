"""Command-line frontend: certify, oracle, falsify, deriv and harness."""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile
from dataclasses import asdict, fields, replace
from pathlib import Path

import numpy as np

from . import __version__
from .certify import THEOREMS, CertifyConfig, certify
from .cones import InfeasiblePoint, Tolerances
from .deriv import (
    DerivConfig,
    DerivError,
    dir_deriv1,
    gradient_stability_estimate,
    hadamard_second_estimate,
    second_dp,
)
from .expr import ExprError, grad
from .gencvx import KINDS as PROPERTY_KINDS
from .gencvx import falsify
from .oracle import KINDS as ORACLE_KINDS
from .oracle import HarnessConfig, OracleConfig, check_efficiency, cross_validate, quasiinvex_gap_demo
from .problem import OVERRIDE_KEYS, Problem, ProblemError, eta_nodes, load_problem, parse_point

EXIT_OK, EXIT_NEG, EXIT_INCONCLUSIVE, EXIT_USAGE, EXIT_DATA = 0, 1, 2, 64, 65

CONFIG_SECTIONS = OVERRIDE_KEYS + ("harness",)
CERTIFY_KEYS = ("dirs", "hypothesis_samples", "hypothesis_mode", "lambda_cap")
FALSIFY_KEYS = ("n_samples",)
HARNESS_KEYS = ("n", "problem_class")


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="socert", description="Second-order optimality certificates for vector optimization.")
    parser.add_argument("--version", action="version", version=f"socert {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def common(p, problem_required=True):
        p.add_argument("--problem", required=problem_required, help="problem JSON file")
        p.add_argument("--point", required=problem_required, help="comma-separated coordinates of xbar")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--config", help="JSON file with config overrides")
        p.add_argument("--out", help="write the report here instead of stdout")

    p = sub.add_parser("certify", help="check a sufficient condition on sampled directions")
    common(p)
    p.add_argument("--theorem", required=True, choices=sorted(THEOREMS))
    p.add_argument("--dirs", type=int)

    p = sub.add_parser("oracle", help="brute-force efficiency check")
    common(p)
    p.add_argument("--kind", required=True, choices=ORACLE_KINDS)

    p = sub.add_parser("falsify", help="search for a generalized-convexity counterexample")
    common(p)
    p.add_argument("--property", required=True, help="KIND:objective|constraint:INDEX")

    p = sub.add_parser("deriv", help="derivative diagnostics for one function")
    common(p)
    p.add_argument("--function", required=True, help="objective|constraint:INDEX")
    p.add_argument("--direction", required=True, help="comma-separated direction")

    p = sub.add_parser("harness", help="soundness cross-validation")
    common(p, problem_required=False)
    p.add_argument("--n", type=int, help="number of random instances")
    p.add_argument("--class", dest="problem_class", choices=("ConvexQuadratic", "Polynomial"))
    p.add_argument("--demo", choices=("santos-gap",))
    return parser


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


def _section(src: dict, name: str, allowed) -> dict:
    sec = src.get(name, {})
    if not isinstance(sec, dict):
        raise DataError(f"config section {name!r} must be an object")
    unknown = set(sec) - set(allowed)
    if unknown:
        raise DataError(f"unknown key(s) in {name!r}: {', '.join(sorted(unknown))}")
    return sec


def _merge(layers: list[dict]) -> dict:
    merged: dict = {k: {} for k in CONFIG_SECTIONS}
    names = {
        "tolerances": [f.name for f in fields(Tolerances)],
        "deriv": [f.name for f in fields(DerivConfig)],
        "oracle": [f.name for f in fields(OracleConfig) if f.name != "seed"],
        "certify": list(CERTIFY_KEYS),
        "falsify": list(FALSIFY_KEYS),
        "harness": list(HARNESS_KEYS),
    }
    for layer in layers:
        unknown = set(layer) - set(CONFIG_SECTIONS)
        if unknown:
            raise DataError(f"unknown config section(s): {', '.join(sorted(unknown))}")
        for name in CONFIG_SECTIONS:
            sec = _section(layer, name, names[name] + (["effective", "demo"] if name == "harness" else []))
            merged[name].update({k: v for k, v in sec.items() if k not in ("effective", "demo")})
    return merged


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise DataError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"invalid config JSON: {exc}") from None
    if not isinstance(data, dict):
        raise DataError("config file must hold a JSON object")
    if "config" in data and "tool" in data:
        data = data["config"]  # a previous report
    data = {k: v for k, v in data.items() if k != "seed"}
    return data


class Settings:
    """Effective configuration for one run."""

    def __init__(self, merged: dict, seed: int, threads: int):
        try:
            self.tol = Tolerances(**merged["tolerances"])
            self.deriv = DerivConfig(**merged["deriv"])
            self.oracle = OracleConfig(**merged["oracle"], seed=seed)
            cert = {"dirs": 256, "hypothesis_samples": 1000, **merged["certify"]}
            self.certify = CertifyConfig(
                **cert, seed=seed, threads=threads, tolerances=self.tol, deriv=self.deriv
            )
            self.falsify_samples = int(merged["falsify"].get("n_samples", 1000))
        except (TypeError, ValueError) as exc:
            raise DataError(f"invalid config: {exc}") from None
        if self.certify.dirs < 1 or self.falsify_samples < 1:
            raise DataError("dirs and n_samples must be positive")
        if self.certify.hypothesis_mode not in ("default", "quasiinvex"):
            raise DataError("hypothesis_mode must be 'default' or 'quasiinvex'")
        self.harness = dict(merged["harness"])
        self.seed = seed

    def snapshot(self) -> dict:
        cert = self.certify
        return {
            "seed": self.seed,
            "tolerances": asdict(self.tol),
            "deriv": asdict(self.deriv),
            "oracle": {k: v for k, v in asdict(self.oracle).items() if k != "seed"},
            "certify": {k: getattr(cert, k) for k in CERTIFY_KEYS},
            "falsify": {"n_samples": self.falsify_samples},
            "harness": dict(self.harness),
        }


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def _load(path: str) -> tuple[Problem, bytes]:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise DataError(f"cannot read problem file: {exc}") from None
    return load_problem(path), raw


def _function(problem: Problem, target: str):
    parts = target.split(":")
    if len(parts) != 2 or parts[0] not in ("objective", "constraint"):
        raise UsageError(f"function must be objective:INDEX or constraint:INDEX, got {target!r}")
    try:
        idx = int(parts[1])
    except ValueError:
        raise UsageError(f"bad function index in {target!r}") from None
    pool = problem.objectives if parts[0] == "objective" else problem.constraints
    if not 1 <= idx <= len(pool):
        raise DataError(f"{parts[0]} index {idx} out of range 1..{len(pool)}")
    return pool[idx - 1]


def _floats(v) -> list[float]:
    return [float(a) for a in np.asarray(v, dtype=float).ravel()]


def _write(report: dict, out: str | None) -> None:
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    target = Path(out)
    fd, tmp = tempfile.mkstemp(dir=target.parent or ".", prefix=".socert-", suffix=".json")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# Subcommands; each returns (payload, exit code)
# ---------------------------------------------------------------------------


def _cmd_certify(args, problem, x, st: Settings):
    cfg = st.certify if args.dirs is None else replace(st.certify, dirs=args.dirs)
    if cfg.dirs < 1:
        raise UsageError("--dirs must be positive")
    st.certify = cfg
    cert = certify(problem, x, args.theorem, cfg)
    code = {"CertifiedOnSamples": EXIT_OK, "NotCertified": EXIT_NEG}.get(cert.verdict, EXIT_INCONCLUSIVE)
    return cert.to_json(), code


def _cmd_oracle(args, problem, x, st: Settings):
    if not problem.feasible(x, st.oracle.eps_feas):
        raise DataError("point is infeasible")
    verdict = check_efficiency(problem, x, args.kind, st.oracle)
    code = {"supported": EXIT_OK, "falsified": EXIT_NEG}.get(verdict.status, EXIT_INCONCLUSIVE)
    return verdict.to_json(), code


def _cmd_falsify(args, problem, x, st: Settings):
    kind, _, target = args.property.partition(":")
    if kind not in PROPERTY_KINDS:
        raise UsageError(f"unknown property kind {kind!r}; choose from {', '.join(PROPERTY_KINDS)}")
    ast = _function(problem, target)
    eta = None
    if kind == "quasiinvex":
        if problem.eta_texts is None:
            raise DataError("quasiinvex needs an eta field in the problem file")
        eta = eta_nodes(problem, x)
    try:
        rep = falsify(ast, x, kind, problem.box, st.falsify_samples, st.seed, st.tol, eta, st.deriv)
    except ValueError as exc:
        raise DataError(str(exc)) from None
    code = {"not_falsified": EXIT_OK, "falsified": EXIT_NEG}.get(rep.status, EXIT_INCONCLUSIVE)
    return {"target": target, **rep.to_json()}, code


def _cmd_deriv(args, problem, x, st: Settings):
    ast = _function(problem, args.function)
    d = parse_point(args.direction, problem.n)
    stab = gradient_stability_estimate(ast, x, st.deriv, seed=st.seed)
    payload = {
        "function": args.function,
        "direction": _floats(d),
        "gradient": _floats(grad(ast, x)),
        "first": float(dir_deriv1(ast, x, d)),
        "second_dp": second_dp(ast, x, d, st.deriv).to_json(),
        "hadamard": hadamard_second_estimate(ast, x, d, st.deriv, seed=st.seed).to_json(),
        "gradient_stability": {
            "bounded": bool(stab.bounded),
            "modulus_estimate": float(stab.modulus_estimate),
            "shell_max": _floats(stab.shell_max),
            "skipped": int(stab.skipped),
        },
    }
    return payload, EXIT_OK


def _cmd_harness(args, st: Settings):
    h = st.harness
    n = args.n if args.n is not None else int(h.get("n", 50))
    cls = args.problem_class or h.get("problem_class", "ConvexQuadratic")
    if n < 1:
        raise UsageError("--n must be positive")
    # reduced sampling keeps 50 instances within the desk-scale budget
    cfg = HarnessConfig(
        certify=replace(st.certify, dirs=32, hypothesis_samples=300),
        oracle=replace(st.oracle, n_samples=2000, per_shell=100),
        problem_class=cls,
    )
    st.harness = {"n": n, "problem_class": cls, "effective": cfg.to_json()}
    if args.demo == "santos-gap":
        if args.problem is None or args.point is None:
            raise UsageError("--demo santos-gap needs --problem and --point")
        problem, _ = _load(args.problem)
        x = parse_point(args.point, problem.n)
        st.harness = {"demo": "santos-gap", "effective": cfg.to_json()}
        result = quasiinvex_gap_demo(problem, x, st.seed, cfg)
    else:
        result = cross_validate(n, st.seed, cfg)
    return result, EXIT_OK if result["violation_count"] == 0 else EXIT_NEG


# ---------------------------------------------------------------------------
# Entry points
# ---------------------------------------------------------------------------


def _command_echo(args) -> dict:
    skip = {"threads", "out", "config"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip and v is not None}


VALUE_FLAGS = ("--point", "--direction")


def _join_negative(argv: list[str]) -> list[str]:
    """Bind values such as ``-1,0`` to the preceding coordinate flag."""
    out: list[str] = []
    i = 0
    while i < len(argv):
        a = argv[i]
        if a in VALUE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
            continue
        out.append(a)
        i += 1
    return out


def run(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(_join_negative(argv))
        if args.command is None:
            raise UsageError("a subcommand is required")
        if args.threads < 1:
            raise UsageError("--threads must be positive")
        digest = hashlib.sha256()
        layers = []
        problem = x = None
        if args.problem is not None:
            problem, raw = _load(args.problem)
            digest.update(raw)
            layers.append(problem.overrides)
        if args.point is not None:
            if problem is None:
                raise UsageError("--point needs --problem")
            x = parse_point(args.point, problem.n)
        layers.append(_load_config(args.config))
        st = Settings(_merge(layers), args.seed, args.threads)
        if args.command == "harness":
            payload, code = _cmd_harness(args, st)
        else:
            handler = {
                "certify": _cmd_certify,
                "oracle": _cmd_oracle,
                "falsify": _cmd_falsify,
                "deriv": _cmd_deriv,
            }[args.command]
            payload, code = handler(args, problem, x, st)
        report = {
            "tool": {"name": "socert", "version": __version__},
            "input_digest": "sha256:" + digest.hexdigest(),
            "command": {"name": args.command, "args": _command_echo(args)},
            "config": st.snapshot(),
            "result": payload,
            "exit_code": code,
        }
        _write(report, args.out)
        return code
    except UsageError as exc:
        print(f"socert: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, ProblemError, ExprError, InfeasiblePoint, DerivError) as exc:
        print(f"socert: input error: {exc}", file=sys.stderr)
        return EXIT_DATA


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
