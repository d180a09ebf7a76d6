import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bosonic_mac.errors import ResourceError
from bosonic_mac.lemmas import haar_unitary
from bosonic_mac.typicality import (
    cond_typical_projector,
    conditional_entropy,
    entropy,
    expected_typical_mass,
    mean_within_probability,
    sample_entropy,
    typical_probability,
    typical_projector,
    typical_set,
)


def rotated(spec, seed):
    u = haar_unitary(len(spec), np.random.default_rng(seed))
    return (u * np.asarray(spec)) @ u.conj().T


def brute_typical_probability(p, n, delta):
    """Sum over every sequence; independent of the type enumeration."""
    H = -sum(q * math.log2(q) for q in p if q > 0)
    total = 0.0
    for seq in itertools.product(range(len(p)), repeat=n):
        prob = math.prod(p[s] for s in seq)
        if prob > 0 and abs(-math.log2(prob) / n - H) <= delta + 1e-12:
            total += prob
    return total


def test_sample_entropy_examples():
    assert sample_entropy([0, 1, 1, 0, 1], [0.5, 0.5]) == pytest.approx(1.0)
    assert sample_entropy([0, 0, 1, 1], [0.75, 0.25]) == pytest.approx(1.207518, abs=1e-6)
    assert sample_entropy([0, 0, 0], [1.0, 0.0]) == 0.0
    with pytest.raises(ValueError):
        sample_entropy([1], [1.0, 0.0])


def test_distribution_validation():
    with pytest.raises(ValueError):
        entropy([0.5, 0.6])
    with pytest.raises(ValueError):
        entropy([1.2, -0.2])


def test_typical_set_examples():
    assert len(typical_set([0.5, 0.5], 6, 0.01)) == 64
    ts = typical_set([1.0, 0.0], 5, 0.3)
    assert ts.members.tolist() == [[0, 0, 0, 0, 0]] and ts.probability == pytest.approx(1.0)
    ts = typical_set([0.89, 0.11], 10, 0.1)
    assert ts.probability == pytest.approx(brute_typical_probability([0.89, 0.11], 10, 0.1), abs=1e-12)
    for seq in ts.members:
        assert abs(sample_entropy(seq, [0.89, 0.11]) - ts.entropy) <= 0.1 + 1e-12


def test_typical_set_guard():
    with pytest.raises(ResourceError):
        typical_set([0.5, 0.5], 21, 0.1)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.01, 1.0), min_size=2, max_size=3), st.integers(1, 7), st.floats(0.01, 0.5))
def test_type_enumeration_matches_brute_force(weights, n, delta):
    p = np.array(weights) / sum(weights)
    assert typical_probability(p, n, delta) == pytest.approx(brute_typical_probability(list(p), n, delta), abs=1e-12)


def test_typical_probability_large_n():
    # mass tends to one for a fixed delta
    p = [0.89, 0.11]
    masses = [typical_probability(p, n, 0.1) for n in (50, 200, 1000)]
    assert masses[-1] > 0.99 and masses[0] < masses[-1]


def test_mean_within_probability_uniform_values():
    assert mean_within_probability([1.0, 1.0], [0.3, 0.7], 9, 1.0, 0.0) == pytest.approx(1.0)


def test_projector_examples():
    P = typical_projector(np.eye(2) / 2, 5, 0.05)
    assert P.rank == 32 and P.matrix() == pytest.approx(np.eye(32))
    psi = np.array([0.6, 0.8j])
    P = typical_projector(np.outer(psi, psi.conj()), 4, 0.1)
    big = psi
    for _ in range(3):
        big = np.kron(big, psi)
    assert P.rank == 1
    assert P.matrix() == pytest.approx(np.outer(big, big.conj()), abs=1e-12)


def test_projector_thermal_qubit():
    rho = np.diag([0.8, 0.2])
    P = typical_projector(rho, 8, 0.15)
    assert P.mass == pytest.approx(brute_typical_probability([0.8, 0.2], 8, 0.15), abs=1e-12)
    assert P.rank <= 2 ** (8 * (entropy([0.8, 0.2]) + 0.15))
    dense = P.dense_checks()
    assert dense["mass"] == pytest.approx(P.mass, abs=1e-12)
    assert dense["trace"] == pytest.approx(P.rank)
    assert dense["idempotent"] and dense["lower_ok"] and dense["upper_ok"]


def test_projector_guard():
    with pytest.raises(ResourceError):
        typical_projector(np.eye(3) / 3, 9, 0.1)


def test_cond_projector_examples():
    pure0 = np.diag([1.0, 0.0])
    plus = np.full((2, 2), 0.5)
    P = cond_typical_projector([pure0, plus], [0.5, 0.5], [0, 1, 1, 0], 0.1)
    assert P.rank == 1 and P.entropy == 0.0
    mixed = np.eye(2) / 2
    P = cond_typical_projector([mixed, mixed], [0.3, 0.7], [1, 0, 1], 0.01)
    assert P.rank == 8


def test_cond_projector_sandwich_binary_family():
    states = [np.diag([0.9, 0.1]), np.diag([0.5, 0.5])]
    rng = np.random.default_rng(4)
    for _ in range(10):
        xn = rng.integers(2, size=8)
        P = cond_typical_projector(states, [0.5, 0.5], xn, 0.2)
        assert P.sandwich_ok() and P.rank_ok()
        lo, hi = P.sandwich_bounds
        ev = P.typical_eigenvalues()
        assert np.all(ev >= lo * (1 - 1e-9)) and np.all(ev <= hi * (1 + 1e-9))


def test_conditional_entropy():
    states = [np.diag([0.9, 0.1]), np.eye(2) / 2]
    assert conditional_entropy(states, [0.5, 0.5]) == pytest.approx(0.5 * entropy([0.9, 0.1]) + 0.5)


def test_expected_mass_matches_average():
    states = [rotated([0.9, 0.1], 1), rotated([0.6, 0.4], 2)]
    px = [0.3, 0.7]
    n, delta = 6, 0.2
    avg = 0.0
    for xn in itertools.product(range(2), repeat=n):
        weight = math.prod(px[x] for x in xn)
        avg += weight * cond_typical_projector(states, px, xn, delta).mass
    assert expected_typical_mass(states, px, n, delta) == pytest.approx(avg, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([(0.7, 0.3), (0.9, 0.1), (0.5, 0.3, 0.2), (0.4, 0.3, 0.3), (0.6, 0.2, 0.2)]),
       st.integers(1, 8), st.floats(0.01, 0.4), st.integers(0, 1000))
def test_rank_and_sandwich_always_hold(spec, n, delta, seed):
    if len(spec) ** n > 2 ** 14:
        return
    P = typical_projector(rotated(spec, seed), n, delta)
    assert P.rank_ok() and P.sandwich_ok()
    if P.dim <= 256:
        dense = P.dense_checks()
        assert dense["idempotent"] and dense["lower_ok"] and dense["upper_ok"]
        assert dense["mass"] == pytest.approx(P.mass, abs=1e-10)


def test_degenerate_labels_are_deterministic():
    rho = rotated([0.4, 0.3, 0.3], 9)
    a = typical_projector(rho, 4, 0.1)
    b = typical_projector(rho.copy(), 4, 0.1)
    assert np.array_equal(a.mask, b.mask)
    assert a.matrix() == pytest.approx(b.matrix())


@pytest.mark.parametrize("spec,delta", [((0.7, 0.3), 0.3), ((0.5, 0.3, 0.2), 0.2)])
def test_mass_increases_over_n(spec, delta):
    masses = [typical_projector(rotated(spec, 0), n, delta).mass for n in (4, 6, 8)]
    assert masses[0] < masses[1] < masses[2]


def test_diagnostics_records():
    recs = typical_projector(np.diag([0.7, 0.3]), 6, 0.2).diagnostics()
    assert [r["property"] for r in recs] == ["typical_mass", "rank_bound", "eigenvalue_sandwich"]
    assert recs[1]["holds"] and recs[2]["holds"]
