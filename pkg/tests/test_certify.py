import numpy as np
import pytest

from socert.certify import CertifyConfig, certify, check_condition_II, find_multipliers
from socert.cones import Tolerances
from socert.problem import build_problem

BOX2 = [[-1, 1], [-1, 1]]
D = np.array([-1.0, 0.0])


def _grads(problem, x):
    return problem.f_grads(x), problem.g_grads(x)


def test_ex1_multipliers_at_minus_e1(ex1):
    F, G = _grads(ex1, [0, 0])
    pair = find_multipliers(F, G, [0], [0.0, 0.0], {0: 2.0}, "FJ", "strict")
    assert pair.mu == pytest.approx([0.5, 0.0], abs=1e-12)
    assert pair.lam == pytest.approx([0.5], abs=1e-12)
    assert pair.slack == pytest.approx(1.0, abs=1e-12)


def test_lvp_kkt_multipliers(lvp):
    F, G = _grads(lvp, [0, 0])
    pair = find_multipliers(F, G, [0], [0.0, 0.0], {0: 0.0}, "KKT", "nonstrict")
    assert pair.mu == pytest.approx([0.0, 1.0], abs=1e-12)
    assert pair.lam == pytest.approx([1.0], abs=1e-12)
    assert pair.slack == pytest.approx(0.0, abs=1e-12)


def test_lvp_fj_strict_has_no_multipliers(lvp):
    F, G = _grads(lvp, [0, 0])
    assert find_multipliers(F, G, [0], [0.0, 0.0], {0: 0.0}, "FJ", "strict") is None


def test_condition_II_examples(ex1, lvp):
    assert check_condition_II(*_grads(ex1, [0, 0]), [0], D)
    assert check_condition_II(*_grads(lvp, [0, 0]), [0], D)
    free = build_problem(2, ["x1 + x2"], [], BOX2)
    assert not check_condition_II(*_grads(free, [0, 0]), [], np.array([1.0, 0.0]))


def test_ex1_local2_certified(ex1):
    cert = certify(ex1, [0, 0], "local2", CertifyConfig(dirs=256, seed=7, deriv=_ex1_deriv(ex1)))
    assert cert.verdict == "CertifiedOnSamples"
    assert len(cert.records) >= 1
    rep = cert.to_json()
    assert rep["direction_count"] == len(cert.records)
    for r in cert.records:
        assert r.cond2_ok is True
        assert r.d == [-1.0, 0.0]
        assert r.multipliers.mu == pytest.approx([0.5, 0.0], abs=1e-9)
        assert r.multipliers.lam == pytest.approx([0.5], abs=1e-9)
        assert abs(r.multipliers.slack - 1.0) <= 1e-6


def _ex1_deriv(ex1):
    from socert.deriv import DerivConfig

    return DerivConfig(**ex1.overrides.get("deriv", {}))


def test_lvp_verdicts(lvp):
    cert = certify(lvp, [0, 0], "kkt-weak")
    assert cert.verdict == "CertifiedOnSamples"
    for r in cert.records:
        assert r.multipliers.mu == pytest.approx([0.0, 1.0], abs=1e-9)
        assert r.multipliers.lam == pytest.approx([1.0], abs=1e-9)
    assert certify(lvp, [0, 0], "local2").verdict == "NotCertified"
    for theorem in ("kkt-strict", "fj-strict"):
        cert = certify(lvp, [0, 0], theorem)
        assert cert.verdict == "NotCertified"
        assert cert.failure["kind"] == "hypothesis"
        targets = {t["target"]: t for t in cert.failure["targets"]}
        assert targets["objective:1"]["witness"]["y"] == [0.0, 1.0]


def test_counterexample_verdicts(counterexample):
    for theorem in ("qc-strict", "kkt-weak"):
        cert = certify(counterexample, [0.0], theorem)
        assert cert.verdict == "NotCertified"
        assert cert.failure["kind"] == "hypothesis"
        assert any(t["target"] == "constraint:1" for t in cert.failure["targets"])


def test_zero_gradient_makes_condition_II_fail():
    prob = build_problem(2, ["x1^2 + x2^2"], [], BOX2)
    cert = certify(prob, [0, 0], "local2", CertifyConfig(dirs=16))
    assert cert.verdict == "NotCertified"


def test_convex_stationary_point_forces_zero_lambda():
    prob = build_problem(2, ["x1^2 + x2^2"], ["-x2"], BOX2)
    cert = certify(prob, [0, 0], "kkt-weak", CertifyConfig(dirs=32))
    assert cert.verdict == "CertifiedOnSamples"
    for r in cert.records:
        assert r.multipliers.lam == pytest.approx([0.0], abs=1e-12)
    cert = certify(prob, [0, 0], "qc-strict", CertifyConfig(dirs=32))
    assert cert.verdict == "CertifiedOnSamples"
    for r in cert.records:
        if np.any(r.d):
            assert r.multipliers.slack == pytest.approx(2 * np.dot(r.d, r.d), rel=1e-9)


def test_quartic_strict_kkt():
    prob = build_problem(1, ["x1^4"], [], [[-1, 1]])
    assert certify(prob, [0.0], "kkt-strict", CertifyConfig(dirs=8)).verdict == "CertifiedOnSamples"


def test_fj_strict_with_inactive_constraint():
    prob = build_problem(1, ["x1^2"], ["x1^2 - 1"], [[-2, 2]])
    cert = certify(prob, [0.0], "fj-strict", CertifyConfig(dirs=8))
    assert cert.verdict == "CertifiedOnSamples"
    for r in cert.records:
        if np.any(r.d):
            assert r.multipliers.slack == pytest.approx(2 * np.dot(r.d, r.d), rel=1e-9)


def test_infeasible_point_rejected(ex1):
    with pytest.raises(ValueError):
        certify(ex1, [0.0, -0.5], "local2")


def test_unknown_theorem(ex1):
    with pytest.raises(ValueError):
        certify(ex1, [0, 0], "bogus")


def _all_certificates(ex1, lvp, counterexample):
    deriv = _ex1_deriv(ex1)
    cases = [
        (ex1, [0, 0], CertifyConfig(dirs=32, deriv=deriv)),
        (lvp, [0, 0], CertifyConfig(dirs=32)),
        (counterexample, [0.0], CertifyConfig(dirs=32)),
    ]
    for prob, x, cfg in cases:
        for theorem in ("local2", "kkt-weak", "kkt-strict", "fj-strict", "qc-strict"):
            yield prob, x, cfg, theorem


def test_multiplier_recomputation(ex1, lvp, counterexample):
    for prob, x, cfg, theorem in _all_certificates(ex1, lvp, counterexample):
        cert = certify(prob, x, theorem, cfg)
        F, G = _grads(prob, x)
        for r in cert.records:
            pair = r.multipliers
            if pair is None:
                continue
            resid = np.asarray(pair.mu) @ F + (np.asarray(pair.lam) @ G if prob.m else 0)
            assert np.max(np.abs(resid)) <= 1e-7
            slack = sum(pair.mu[j] * r.derivs[f"f{j + 1}"].value for j in range(prob.p))
            slack += sum(pair.lam[int(k[1:]) - 1] * v.value for k, v in r.derivs.items() if k[0] == "g")
            assert slack == pytest.approx(pair.slack, abs=1e-9)


def test_verdicts_invariant_under_positive_rescaling(ex1, lvp, counterexample):
    for prob, x, cfg, theorem in _all_certificates(ex1, lvp, counterexample):
        base = certify(prob, x, theorem, cfg)
        for obj_scale, con_scale in (((3.0,), ()), ((1.0, 0.25), ()), ((), (5.0,)), ((0.5, 7.0), (0.125,))):
            scaled = certify(prob.scaled(obj_scale, con_scale), x, theorem, cfg)
            assert scaled.verdict == base.verdict, (theorem, obj_scale, con_scale)
            assert [r.status for r in scaled.records] == [r.status for r in base.records]


def test_direction_status_is_scale_free(ex1, lvp):
    from socert.certify import _evaluate_direction

    for prob, theorem, deriv in ((ex1, "local2", _ex1_deriv(ex1)), (lvp, "kkt-weak", None), (lvp, "local2", None)):
        cfg = CertifyConfig(dirs=8, **({"deriv": deriv} if deriv else {}))
        F, G = _grads(prob, [0, 0])
        for alpha in (0.5, 2.0, 3.0):
            a = _evaluate_direction(prob, np.zeros(2), F, G, (0,), D, theorem, cfg)
            b = _evaluate_direction(prob, np.zeros(2), F, G, (0,), alpha * D, theorem, cfg)
            assert a[0] == b[0]


def test_threads_do_not_change_the_certificate(lvp):
    a = certify(lvp, [0, 0], "kkt-weak", CertifyConfig(dirs=64, threads=1)).to_json()
    b = certify(lvp, [0, 0], "kkt-weak", CertifyConfig(dirs=64, threads=4)).to_json()
    assert a == b


def test_tolerances_are_reported(lvp):
    rep = certify(lvp, [0, 0], "kkt-weak", CertifyConfig(tolerances=Tolerances(tau_strict=1e-6))).to_json()
    assert rep["margins"]["strict"] == "> 1e-06"
