import numpy as np
import pytest

from socert.certify import CertifyConfig
from socert.oracle import (
    HarnessConfig,
    OracleConfig,
    alpha_estimate,
    check_efficiency,
    cross_validate,
    random_problem,
    recheck_oracle_witness,
    quasiinvex_gap_demo,
)
from socert.gencvx import falsify
from socert.problem import build_problem


def test_lvp_oracles(lvp):
    assert check_efficiency(lvp, [0, 0], "weak", OracleConfig(n_samples=10_000)).status == "supported"
    for kind in ("efficient", "strict-global"):
        v = check_efficiency(lvp, [0, 0], kind)
        assert v.status == "falsified"
        assert recheck_oracle_witness(lvp, [0, 0], kind, v.witness)
    v = check_efficiency(lvp, [0, 0], "strict-global")
    assert v.witness == [-1.0, 0.0]
    assert check_efficiency(lvp, [0, 0], "local2").status == "falsified"


def test_counterexample_weak_oracle(counterexample):
    v = check_efficiency(counterexample, [0.0], "weak")
    assert v.status == "falsified"
    assert v.witness == pytest.approx([1.0])
    assert v.values[0] <= -1 + 1e-9


def test_weak_witness_is_a_witness_for_every_kind(counterexample, lvp):
    for prob, x in ((counterexample, [0.0]), (lvp, [0.5, 0.5])):
        v = check_efficiency(prob, x, "weak")
        assert v.status == "falsified"
        for kind in ("weak", "efficient", "strict-global"):
            assert recheck_oracle_witness(prob, x, kind, v.witness)


def test_ex1_local2_supported_with_shells_bounded_below(ex1):
    cfg = OracleConfig()
    v = check_efficiency(ex1, [0, 0], "local2", cfg)
    assert v.status == "supported"
    shells = [q for q in v.stats["shell_min_q"] if q is not None]
    assert len(shells) == cfg.shells
    assert min(shells) >= cfg.alpha_min
    assert alpha_estimate(ex1, [0, 0]) > 0


def test_alpha_estimate_examples(lvp):
    assert alpha_estimate(lvp, [0, 0]) <= 0
    sq = build_problem(2, ["x1^2 + x2^2"], [], [[-1, 1], [-1, 1]])
    assert alpha_estimate(sq, [0, 0]) == pytest.approx(1.0, rel=1e-9)


def test_infeasible_point_rejected(lvp):
    with pytest.raises(ValueError):
        check_efficiency(lvp, [0.0, -1.0], "weak")


def test_random_problem_properties():
    for seed in range(12):
        for cls in ("ConvexQuadratic", "Polynomial"):
            prob, anchor = random_problem(seed, cls)
            assert prob.feasible(anchor)
            assert prob.in_box(anchor)
    a = random_problem(2)
    b = random_problem(2)
    assert a[1].tobytes() == b[1].tobytes()
    assert a[0].to_json() == b[0].to_json()


def test_random_convex_instance_hypotheses_hold():
    prob, anchor = random_problem(1)
    for f in prob.objectives:
        assert falsify(f, anchor, "2-pseudoconvex", prob.box, n_samples=300).status == "not_falsified"
    active = [g for g in prob.constraints if abs(float(np.asarray(prob.g(anchor))[list(prob.constraints).index(g)])) <= 1e-8]
    for g in active:
        assert falsify(g, anchor, "quasiconvex", prob.box, n_samples=300).status == "not_falsified"


def test_harness_empty_and_small():
    rep = cross_validate(0)
    assert rep["violation_count"] == 0 and rep["instances"] == 0 and rep["certified_pairs"] == []
    rep = cross_validate(5, seed=3)
    assert rep["violation_count"] == 0


def test_quasiinvex_gap_demo_flags_one_violation(counterexample):
    rep = quasiinvex_gap_demo(counterexample, [0.0])
    assert rep["violation_count"] == 1
    (viol,) = rep["violations"]
    assert viol["theorem"] == "qc-strict" and viol["hypothesis_mode"] == "quasiinvex"
    assert recheck_oracle_witness(counterexample, [0.0], viol["oracle"], viol["witness"])


def test_polynomial_harness_is_sound():
    cfg = HarnessConfig(problem_class="Polynomial")
    assert cross_validate(5, seed=1, cfg=cfg)["violation_count"] == 0


def test_oracle_determinism(ex1):
    a = check_efficiency(ex1, [0, 0], "local2", OracleConfig(seed=4)).to_json()
    b = check_efficiency(ex1, [0, 0], "local2", OracleConfig(seed=4)).to_json()
    assert a == b


def test_config_validation():
    with pytest.raises(ValueError):
        OracleConfig(shells=2)
    with pytest.raises(ValueError):
        OracleConfig(alpha_min=0)
