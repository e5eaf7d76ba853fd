import json
import math

import pytest

import qident

Q24 = [[1, 0], [0, 1], [1, 0], [0, 1]]


def test_check_q24():
    v = qident.check_dina(Q24)
    assert v["scenario"] == "GenericScenarioB2"
    assert v["conditions"]["A"] and not v["conditions"]["C"]
    assert v["constraints"] == ["p01·p10 ≠ p00·p11"]


def test_enumerate_count():
    assert len(qident.enumerate(5, 2)) == 121


def test_distribution_sums_to_one():
    d = qident.dina_distribution(Q24, [0.2] * 4, [0.2] * 4, [0.25] * 4)
    assert len(d) == 16
    assert math.isclose(sum(d), 1.0, abs_tol=1e-12)
    assert math.isclose(d[0], 0.1156, rel_tol=1e-12)


def test_fit_roundtrip():
    r = qident.simulate_dina(Q24, [0.1] * 4, [0.2] * 4, [0.1, 0.2, 0.3, 0.4], 400, 7)
    out = json.loads(qident.fit("dina", Q24, r, restarts=2, seed=3))
    assert out["model"] == "dina"
    assert out["loglik"] < 0


def test_witnesses_and_errors():
    diffs = qident.q24_witnesses([0.2] * 4, [0.2] * 4, [0.25] * 4)
    assert len(diffs) >= 2 and max(diffs) < 1e-12
    with pytest.raises(qident.QidentError):
        qident.check_dina([[0, 0], [1, 0]])
