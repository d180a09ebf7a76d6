import json
import math

import numpy as np
import pytest

from bosonic_mac import lemmas
from bosonic_mac.lemmas import (
    LemmaCheck,
    gentle_ensemble_check,
    gentle_operator_check,
    haar_state,
    matrix_from_json,
    matrix_to_json,
    psd_sqrt,
    random_density_matrix,
    random_povm_element,
    random_projector,
    run_all,
    trace_inequality_check,
    union_bound_check,
)


def pure(v):
    v = np.asarray(v, dtype=complex)
    return np.outer(v, v.conj())


def test_gentle_operator_examples():
    rho = random_density_matrix(3, np.random.default_rng(0))
    out = gentle_operator_check(np.eye(3), rho)
    assert out.lhs == pytest.approx(0.0, abs=1e-12) and out.rhs == 0.0 and out.holds
    psi = haar_state(4, np.random.default_rng(1))
    out = gentle_operator_check(pure(psi), pure(psi))
    assert out.lhs == pytest.approx(0.0, abs=1e-7) and out.holds


def test_gentle_operator_qubit_instance():
    # rho = |0><0|, Lambda = diag(0.81, 1) rotated so that Tr{Lambda rho} = 0.81
    theta = 0.4
    u = np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])
    lam_diag = np.diag([0.81, 1.0])
    lam = u @ lam_diag @ u.T
    rho = pure([1, 0])
    eps = 1 - np.trace(lam @ rho).real
    out = gentle_operator_check(lam, rho)
    # hand computation: sqrt(Lambda) rho sqrt(Lambda) = |s><s| with s = sqrt(Lambda)|0>
    s = u @ np.diag([0.9, 1.0]) @ u.T @ np.array([1.0, 0.0])
    diff = rho - np.outer(s, s)
    assert out.lhs == pytest.approx(np.sum(np.abs(np.linalg.eigvalsh(diff))), abs=1e-12)
    assert out.rhs == pytest.approx(2 * math.sqrt(eps))
    assert out.holds


def test_gentle_operator_eps_019():
    lam = np.diag([0.81, 0.0])
    rho = np.diag([1.0, 0.0])
    out = gentle_operator_check(lam, rho)
    assert out.rhs == pytest.approx(2 * math.sqrt(0.19)) and out.rhs == pytest.approx(0.8718, abs=1e-4)
    assert out.lhs == pytest.approx(0.19, abs=1e-12)
    assert out.holds


def test_gentle_ensemble_examples():
    rng = np.random.default_rng(2)
    rho, lam = random_density_matrix(3, rng), random_povm_element(3, rng)
    single = gentle_ensemble_check([(1.0, rho)], lam)
    direct = gentle_operator_check(lam, rho)
    assert single.lhs == pytest.approx(direct.lhs) and single.rhs == pytest.approx(direct.rhs)
    ens = [(0.2, random_density_matrix(3, rng)), (0.8, rho)]
    assert gentle_ensemble_check(ens, np.eye(3)).lhs == pytest.approx(0.0, abs=1e-12)


def test_trace_inequality_examples():
    rng = np.random.default_rng(3)
    rho, lam = random_density_matrix(4, rng), random_povm_element(4, rng)
    out = trace_inequality_check(rho, rho, lam)
    assert out.lhs == pytest.approx(out.rhs) and out.holds
    sigma = random_density_matrix(4, rng)
    out = trace_inequality_check(rho, sigma, np.zeros((4, 4)))
    assert out.lhs == 0.0 and out.rhs >= 0.0 and out.holds


def test_union_bound_examples():
    rng = np.random.default_rng(4)
    sigma = random_density_matrix(3, rng)
    out = union_bound_check(sigma, [np.eye(3)] * 3)
    assert out.lhs == pytest.approx(0.0, abs=1e-12) and out.rhs == pytest.approx(0.0, abs=1e-7)
    psi = np.array([math.sqrt(0.75), math.sqrt(0.25)])
    out = union_bound_check(pure(psi), [pure([1, 0])])
    assert out.lhs == pytest.approx(0.25) and out.rhs == pytest.approx(1.0)
    assert out.holds


def test_invalid_inputs():
    with pytest.raises(ValueError):
        gentle_operator_check(np.diag([1.5, 0.0]), np.eye(2) / 2)
    with pytest.raises(ValueError):
        gentle_operator_check(np.eye(2), np.diag([1.0, -0.5]))
    with pytest.raises(ValueError):
        trace_inequality_check(np.eye(2), np.eye(2), np.array([[0, 1], [0, 0]]))
    with pytest.raises(ValueError):
        union_bound_check(np.eye(2) / 2, [np.diag([0.5, 1.0])])
    with pytest.raises(ValueError):
        union_bound_check(np.eye(2), [np.eye(2)])
    with pytest.raises(ValueError):
        gentle_ensemble_check([(0.5, np.eye(2) / 2)], np.eye(2))


def test_lemma_check_holds_tolerance():
    assert LemmaCheck(1.0 + 5e-10, 1.0).holds
    assert not LemmaCheck(1.0 + 2e-9, 1.0).holds


def test_generators_valid():
    rng = np.random.default_rng(5)
    for d in (2, 5, 16):
        rho = random_density_matrix(d, rng)
        assert np.trace(rho).real == pytest.approx(1.0)
        assert np.linalg.eigvalsh(rho)[0] > -1e-12
        lam = np.linalg.eigvalsh(random_povm_element(d, rng))
        assert lam[0] >= -1e-12 and lam[-1] <= 1 + 1e-12
        P = random_projector(d, 2, rng)
        assert P @ P == pytest.approx(P, abs=1e-12) and np.trace(P).real == pytest.approx(2.0)


def test_psd_sqrt_clamps():
    s = psd_sqrt(np.diag([-1e-15, 0.25, 1.0 + 1e-15]))
    assert s == pytest.approx(np.diag([0.0, 0.5, 1.0]))


def test_matrix_json_roundtrip():
    m = random_density_matrix(3, np.random.default_rng(6))
    back = matrix_from_json(json.loads(json.dumps(matrix_to_json(m))))
    assert np.array_equal(back, m)


def test_sweep_records_failures(monkeypatch):
    # a checker that always fails must serialize its instance for replay
    monkeypatch.setattr(lemmas, "trace_inequality_check", lambda **kw: LemmaCheck(1.0, 0.0))
    res = lemmas._sweep(
        "broken", 3, 0,
        lambda rng: {"rho": np.eye(2) / 2, "sigma": np.eye(2) / 2, "lam": np.eye(2)},
        lemmas.trace_inequality_check,
    )
    assert res.violations == 3 and not res.passed
    inst = res.failures[0]["instance"]
    assert matrix_from_json(inst["rho"]) == pytest.approx(np.eye(2) / 2)
    json.dumps(res.as_dict())


def test_sweeps_deterministic():
    a = lemmas.sweep_union_bound(50, seed=11)
    b = lemmas.sweep_union_bound(50, seed=11)
    assert a.worst_margin == b.worst_margin


def test_all_sweeps_small():
    results = run_all(300, seed=1)
    assert [r.lemma for r in results] == list(lemmas.SWEEPS)
    for r in results:
        assert r.passed, r.as_dict()
