import json

import numpy as np
import pytest

from socert.problem import ProblemError, build_problem, eta_nodes, load_problem, parse_point, problem_from_dict
from socert.expr import ExprError, evaluate


def test_fixture_shapes(ex1, lvp, counterexample):
    assert (ex1.n, ex1.p, ex1.m) == (2, 2, 1)
    assert (lvp.n, lvp.p, lvp.m) == (2, 2, 1)
    assert (counterexample.n, counterexample.p, counterexample.m) == (1, 1, 1)
    assert ex1.overrides == {"deriv": {"max_steps": 80}}


def test_counterexample_values(counterexample):
    assert counterexample.f([1.0])[0] == -1.0
    assert counterexample.g([1.0])[0] == 0.0
    assert counterexample.feasible([1.0])


def test_eta_binding(counterexample):
    (eta,) = eta_nodes(counterexample, [0.25])
    assert evaluate(eta, [1.0]) == 0.75


@pytest.mark.parametrize(
    "data",
    [
        [],
        {"n": 1, "objectives": ["x1"]},
        {"n": 0, "objectives": ["x1"], "box": []},
        {"n": 1, "objectives": [], "box": [[-1, 1]]},
        {"n": 1, "objectives": ["x1"], "box": [[-1, 1], [0, 1]]},
        {"n": 1, "objectives": ["x1"], "box": [[0, 0]]},
        {"n": 1, "objectives": ["x1"], "box": [[-1, 1]], "eta": ["y1", "y1"]},
        {"n": 1, "objectives": ["x1"], "box": [[-1, 1]], "extra": True},
    ],
)
def test_malformed_problems(data):
    with pytest.raises(ProblemError):
        problem_from_dict(data)


def test_parse_point():
    np.testing.assert_array_equal(parse_point("1,-2.5", 2), [1.0, -2.5])
    for bad in ("1", "a,b", "1,nan"):
        with pytest.raises(ProblemError):
            parse_point(bad, 2)


def test_scaled_problem(lvp):
    s = lvp.scaled((2.0, 1.0), (3.0,))
    np.testing.assert_array_equal(s.f([1.0, 1.0]), [2.0, 1.0])
    np.testing.assert_array_equal(s.g([1.0, 1.0]), [-3.0])


def test_to_json_round_trip(tmp_path, ex1):
    path = tmp_path / "p.json"
    path.write_text(json.dumps(ex1.to_json()))
    again = load_problem(path)
    assert again.objectives == ex1.objectives and again.constraints == ex1.constraints


def test_build_problem_validates_expressions():
    with pytest.raises(ExprError):
        build_problem(1, ["x2"], [], [[-1, 1]])
