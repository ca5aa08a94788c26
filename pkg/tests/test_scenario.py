import io
import json

import numpy as np
import pytest

from tsgronwall import emit
from tsgronwall.errors import (
    BadParameter,
    BadScaleSpec,
    ExpressionError,
    MissingFunction,
    ParseError,
    ScenarioError,
    ShapeMismatch,
)
from tsgronwall.runner import evaluate, verify
from tsgronwall.scenario import build_problem, load_scenario, refinement_study

SCALES = {"t1": {"kind": "integers", "lo": 0, "hi": 2},
          "t2": {"kind": "integers", "lo": 0, "hi": 2},
          "i": {"kind": "integers", "lo": 0, "hi": 1}}


def doc(**kw):
    base = {"theorem": "thm21", "scales": SCALES, "functions": {"p1": "1", "p2": "1", "f": "1"}}
    base.update(kw)
    return json.dumps(base)


def errors_of(text):
    with pytest.raises(ScenarioError) as info:
        load_scenario(text)
    return info.value.errors


def test_minimal_thm21():
    sc = load_scenario(doc())
    assert sc.theorem == "thm21"
    assert [len(sc.scales[k]) for k in ("t1", "t2", "i")] == [3, 3, 2]
    report, ev = verify(build_problem(sc))
    assert report.verdict == "dominated"
    assert ev.bound.values[2, 2, 0] == 37


def test_missing_function():
    errs = errors_of(doc(functions={"p1": "1", "p2": "1"}))
    assert any(isinstance(e, MissingFunction) and e.name == "f" for e in errs)


def test_bad_q_scale():
    scales = dict(SCALES, t1={"kind": "q_scale", "q": 0.5, "t0": 1, "n": 3})
    assert any(isinstance(e, BadScaleSpec) for e in errors_of(doc(scales=scales)))


def test_errors_are_aggregated():
    scales = dict(SCALES, t2={"kind": "explicit", "points": [0, 2, 1]})
    errs = errors_of(doc(scales=scales, functions={"p1": "1 +", "p2": "exp(s)"}))
    kinds = {type(e) for e in errs}
    assert {BadScaleSpec, MissingFunction, ParseError, ExpressionError} <= kinds


def test_table_shape_checked():
    errs = errors_of(doc(functions={"p1": {"table": [[1, 2], [3, 4]]}, "p2": "1", "f": "1"}))
    assert any(isinstance(e, ShapeMismatch) for e in errs)


def test_schema_rejects_unknown_keys_and_bad_tolerance():
    assert errors_of(doc(extra=1))
    assert errors_of(doc(options={"tol": 0}))
    assert errors_of(doc(theorem="thm99"))
    assert errors_of("{not json")


def test_kernel_components_use_source_variables():
    text = json.dumps({
        "theorem": "thm31", "scales": SCALES,
        "functions": {"g": "1", "r": "1 + x", "f": "1"},
        "kernel": {"F": {"family": "separable_linear", "r": "1 + x", "f": "exp(-x)"}},
    })
    assert any("kernel.F.f" in str(e) for e in errors_of(text))
    sc = load_scenario(text.replace("exp(-x)", "exp(-s)"))
    kernel = build_problem(sc).kernel()
    np.testing.assert_allclose(kernel.f.values[:, 0, 0], np.exp(-np.arange(3.0)))


def test_thm33_requires_comparison_kernel():
    text = json.dumps({"theorem": "thm33", "scales": SCALES,
                       "functions": {"g": "1", "v": "0", "r": "1", "f": "1"}})
    assert any(isinstance(e, MissingFunction) for e in errors_of(text))


def test_solution_round_trip(tmp_path):
    sc = load_scenario(doc(functions={"p1": "1 + x*y + z/3", "p2": "0.5", "f": "x + 1"}))
    ev = evaluate(build_problem(sc))
    buf = io.StringIO()
    emit.write_solution(ev.solutions, buf)
    (tmp_path / "u.csv").write_text(buf.getvalue())
    again = load_scenario(doc(functions={"p1": {"csv": "u.csv", "column": "u"},
                                         "p2": "1", "f": "0"}), base_dir=tmp_path)
    ev2 = evaluate(build_problem(again))
    assert np.array_equal(ev2.solutions["u"].values, ev.solutions["u"].values)
    buf2 = io.StringIO()
    emit.write_solution(ev2.solutions, buf2)
    assert buf2.getvalue() == buf.getvalue()


def test_refinement_rejects_tables():
    sc = load_scenario(doc(functions={"p1": {"table": np.ones((3, 3, 2)).tolist()},
                                      "p2": "1", "f": "1"}))
    with pytest.raises(BadParameter):
        build_problem(sc, 2)


def test_refinement_study_rows():
    sc = load_scenario(json.dumps({
        "theorem": "lemma",
        "scales": {"t1": {"kind": "uniform", "start": 0, "stop": 1, "n": 2},
                   "t2": {"kind": "explicit", "points": [0, 1]}},
        "functions": {"a": "2", "f": "1"},
    }))
    rows, reports = refinement_study(sc, 3)
    assert [r[1] for r in rows] == [1, 2, 4, 8]
    assert [r[2] for r in rows] == [3, 5, 9, 17]
    assert all(rep.verdict == "dominated" for rep in reports)
    bounds = [r[9] for r in rows]
    assert bounds == sorted(bounds)
    assert bounds[-1] < 2 * np.e
