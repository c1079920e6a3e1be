import json
import pathlib

import numpy as np
import pytest

import reqclust

FIXTURES = pathlib.Path(__file__).resolve().parents[2] / "tests" / "fixtures"


def nrp20():
    return json.loads((FIXTURES / "nrp20.json").read_text())


def test_standardize_has_zero_mean_unit_sd():
    z = reqclust.standardize(np.array([[1.0, 10.0], [2.0, 20.0], [6.0, 60.0]]))
    assert np.allclose(z.mean(axis=0), 0.0)
    assert np.allclose(z.std(axis=0, ddof=1), 1.0)


def test_pam_on_two_groups():
    x = np.array([[0.0, 0.0], [0.0, 1.0], [5.0, 0.0], [5.0, 1.0]])
    p = reqclust.pam(x, 2)
    assert p["labels"] == [0, 0, 1, 1]
    assert reqclust.validity(x, p["labels"])["dunn"] == pytest.approx(5.0)


def test_algorithms_agree_on_separated_blobs():
    rng = np.random.default_rng(7)
    x = np.vstack([rng.normal(c, 0.1, size=(10, 2)) for c in ((0, 0), (5, 5), (0, 5))])
    expected = [0] * 10 + [1] * 10 + [2] * 10
    assert reqclust.kmeans(x, 3)["labels"] == expected
    assert reqclust.pam(x, 3)["labels"] == expected
    assert reqclust.hierarchical(x, 3, "average")["labels"] == expected


def test_analyze_reproduces_core_set():
    report = reqclust.analyze(nrp20())
    k4 = next(p for p in report["plans"] if p["k"] == 4)
    assert k4["algorithm"] == "pam"
    assert k4["plan"]["core"] == ["r1", "r4", "r8", "r9", "r10", "r11", "r14", "r15"]
    assert k4["plan"]["added_by_closure"] == ["r13"]
    assert report["k_estimates"]["majority_k"] == 3


def test_estimate_k_on_fixture():
    problem = nrp20()
    raw = np.array([[r["effort"], problem["satisfactions"][r["id"]]] for r in problem["requirements"]])
    est = reqclust.estimate_k(reqclust.standardize(raw))
    assert est["elbow"]["chosen_k"] == 3
    assert est["silhouette"]["chosen_k"] == 3


def test_invalid_problem_raises():
    with pytest.raises(ValueError):
        reqclust.validate_problem({"requirements": [{"id": "a", "effort": -1}]})
