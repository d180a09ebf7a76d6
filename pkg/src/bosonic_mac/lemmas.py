"""Randomized checks of the four operator inequalities behind the error analysis.

Each ``*_check`` evaluates one inequality on a concrete instance and returns
both sides; each ``sweep_*`` draws many random instances from a seed and
collects any violation (serialized for replay).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .fock import trace_norm

CHECK_TOL = 1e-9


@dataclass(frozen=True)
class LemmaCheck:
    lhs: float
    rhs: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs + CHECK_TOL

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs


@dataclass
class SweepResult:
    lemma: str
    samples: int
    seed: int
    violations: int = 0
    worst_margin: float = math.inf
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def as_dict(self) -> dict:
        return {
            "lemma": self.lemma, "samples": self.samples, "seed": self.seed,
            "violations": self.violations, "worst_margin": self.worst_margin,
            "failures": self.failures,
        }


# -- validation --------------------------------------------------------------


def _hermitian(m, name: str) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or not np.allclose(m, m.conj().T, atol=CHECK_TOL):
        raise ValueError(f"{name} must be a Hermitian square matrix")
    return 0.5 * (m + m.conj().T)


def _check_povm_element(lam) -> np.ndarray:
    lam = _hermitian(lam, "Lambda")
    ev = np.linalg.eigvalsh(lam)
    if ev[0] < -CHECK_TOL or ev[-1] > 1 + CHECK_TOL:
        raise ValueError(f"Lambda must satisfy 0 <= Lambda <= I, eigenvalues in [{ev[0]:.3g}, {ev[-1]:.3g}]")
    return lam


def _check_positive(m, name: str, max_trace: float | None = None) -> np.ndarray:
    m = _hermitian(m, name)
    if np.linalg.eigvalsh(m)[0] < -CHECK_TOL:
        raise ValueError(f"{name} must be positive semidefinite")
    if max_trace is not None and np.real(np.trace(m)) > max_trace + CHECK_TOL:
        raise ValueError(f"{name} must have trace <= {max_trace}")
    return m


def _check_projector(p) -> np.ndarray:
    p = _hermitian(p, "projector")
    if not np.allclose(p @ p, p, atol=CHECK_TOL):
        raise ValueError("projector must be idempotent")
    return p


def psd_sqrt(m: np.ndarray) -> np.ndarray:
    """Square root through eigendecomposition, eigenvalues clamped to [0, 1]."""
    lam, vecs = np.linalg.eigh(m)
    return (vecs * np.sqrt(np.clip(lam, 0.0, 1.0))) @ vecs.conj().T


# -- the four inequalities ----------------------------------------------------


def gentle_operator_check(lam, rho) -> LemmaCheck:
    """``||rho - sqrt(L) rho sqrt(L)||_1 <= 2 sqrt(eps)`` with ``eps = 1 - Tr{L rho}``."""
    lam = _check_povm_element(lam)
    rho = _check_positive(rho, "rho", max_trace=1.0)
    eps = max(0.0, 1.0 - float(np.real(np.trace(lam @ rho))))
    s = psd_sqrt(lam)
    return LemmaCheck(trace_norm(rho - s @ rho @ s), 2.0 * math.sqrt(eps))


def gentle_ensemble_check(ensemble, lam) -> LemmaCheck:
    """Expected disturbance of an ensemble ``[(p_x, rho_x), ...]`` by ``L``."""
    lam = _check_povm_element(lam)
    s = psd_sqrt(lam)
    probs = np.array([p for p, _ in ensemble], dtype=float)
    if np.any(probs < 0) or not math.isclose(probs.sum(), 1.0, abs_tol=1e-12):
        raise ValueError("ensemble weights must form a probability distribution")
    states = [_check_positive(r, "rho_x", max_trace=1.0) for _, r in ensemble]
    avg = sum(p * r for p, r in zip(probs, states))
    eps = max(0.0, 1.0 - float(np.real(np.trace(lam @ avg))))
    lhs = sum(p * trace_norm(s @ r @ s - r) for p, r in zip(probs, states))
    return LemmaCheck(float(lhs), 2.0 * math.sqrt(eps))


def trace_inequality_check(rho, sigma, lam) -> LemmaCheck:
    """``Tr{L rho} <= Tr{L sigma} + ||rho - sigma||_1``."""
    lam = _check_povm_element(lam)
    rho = _check_positive(rho, "rho")
    sigma = _check_positive(sigma, "sigma")
    lhs = float(np.real(np.trace(lam @ rho)))
    rhs = float(np.real(np.trace(lam @ sigma))) + trace_norm(rho - sigma)
    return LemmaCheck(lhs, rhs)


def union_bound_check(sigma, projs) -> LemmaCheck:
    """Non-commutative union bound for the chain ``projs[0]`` first, ``projs[-1]`` last."""
    sigma = _check_positive(sigma, "sigma", max_trace=1.0)
    projs = [_check_projector(p) for p in projs]
    d = sigma.shape[0]
    chained = sigma
    for p in projs:
        chained = p @ chained @ p
    lhs = float(np.real(np.trace(sigma) - np.trace(chained)))
    miss = sum(float(np.real(np.trace((np.eye(d) - p) @ sigma))) for p in projs)
    return LemmaCheck(lhs, 2.0 * math.sqrt(max(miss, 0.0)))


# -- random instances ----------------------------------------------------------


def haar_state(d: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_density_matrix(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Wishart matrix normalized to unit trace."""
    k = rank or d
    g = rng.standard_normal((d, k)) + 1j * rng.standard_normal((d, k))
    w = g @ g.conj().T
    return w / np.real(np.trace(w))


def random_povm_element(d: int, rng: np.random.Generator) -> np.ndarray:
    u = haar_unitary(d, rng)
    # Bias eigenvalues toward 1 so that eps is spread over (0, 1).
    lam = rng.beta(2.0, 0.5, size=d)
    return (u * lam) @ u.conj().T


def random_projector(d: int, rank: int, rng: np.random.Generator) -> np.ndarray:
    u = haar_unitary(d, rng)[:, :rank]
    return u @ u.conj().T


def _near_projector(d: int, target: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Projector whose range is a random perturbation of ``target``'s, so tests mostly pass."""
    rank = int(rng.integers(1, d + 1))
    base = np.column_stack([target] + [haar_state(d, rng) for _ in range(rank - 1)])
    base = base + rng.uniform(0.0, 0.6) * (rng.standard_normal(base.shape) + 1j * rng.standard_normal(base.shape))
    q, _ = np.linalg.qr(base)
    return q @ q.conj().T


# -- serialization -------------------------------------------------------------


def matrix_to_json(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.atleast_2d(m)]


def matrix_from_json(rows) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows], dtype=complex)


def _serialize(instance: dict) -> dict:
    out = {}
    for key, value in instance.items():
        if key == "projs":
            out[key] = [matrix_to_json(p) for p in value]
        elif key == "ensemble":
            out[key] = [[p, matrix_to_json(r)] for p, r in value]
        else:
            out[key] = matrix_to_json(value)
    return out


# -- sweeps ----------------------------------------------------------------------


def _sweep(name: str, samples: int, seed: int, draw: Callable, check: Callable) -> SweepResult:
    res = SweepResult(name, samples, seed)
    root = np.random.SeedSequence(seed)
    for i, child in enumerate(root.spawn(samples)):
        rng = np.random.default_rng(child)
        instance = draw(rng)
        out = check(**instance)
        res.worst_margin = min(res.worst_margin, out.margin)
        if not out.holds:
            res.violations += 1
            res.failures.append({"index": i, "lhs": out.lhs, "rhs": out.rhs, "instance": _serialize(instance)})
    return res


def sweep_gentle_operator(samples: int, seed: int, max_dim: int = 16) -> SweepResult:
    def draw(rng):
        d = int(rng.integers(2, max_dim + 1))
        rank = int(rng.integers(1, d + 1))
        return {"lam": random_povm_element(d, rng), "rho": random_density_matrix(d, rng, rank)}

    return _sweep("gentle_operator", samples, seed, draw, gentle_operator_check)


def sweep_gentle_ensemble(samples: int, seed: int, max_dim: int = 16, max_states: int = 4) -> SweepResult:
    def draw(rng):
        d = int(rng.integers(2, max_dim + 1))
        k = int(rng.integers(1, max_states + 1))
        probs = rng.dirichlet(np.ones(k))
        ens = [(float(p), random_density_matrix(d, rng, int(rng.integers(1, d + 1)))) for p in probs]
        ens[-1] = (1.0 - sum(p for p, _ in ens[:-1]), ens[-1][1])
        return {"ensemble": ens, "lam": random_povm_element(d, rng)}

    return _sweep("gentle_ensemble", samples, seed, draw, gentle_ensemble_check)


def sweep_trace_inequality(samples: int, seed: int, max_dim: int = 16) -> SweepResult:
    def draw(rng):
        d = int(rng.integers(2, max_dim + 1))
        rho = random_density_matrix(d, rng) * rng.uniform(0.1, 2.0)
        sigma = random_density_matrix(d, rng) * rng.uniform(0.1, 2.0)
        return {"rho": rho, "sigma": sigma, "lam": random_povm_element(d, rng)}

    return _sweep("trace_inequality", samples, seed, draw, trace_inequality_check)


def sweep_union_bound(samples: int, seed: int, max_dim: int = 16, max_chain: int = 6) -> SweepResult:
    def draw(rng):
        d = int(rng.integers(2, max_dim + 1))
        psi = haar_state(d, rng)
        if rng.random() < 0.5:
            sigma = np.outer(psi, psi.conj())
        else:
            sigma = random_density_matrix(d, rng, int(rng.integers(1, d + 1)))
        sigma = sigma * rng.uniform(0.2, 1.0)
        N = int(rng.integers(1, max_chain + 1))
        projs = [_near_projector(d, psi, rng) if rng.random() < 0.7 else
                 random_projector(d, int(rng.integers(1, d + 1)), rng) for _ in range(N)]
        return {"sigma": sigma, "projs": projs}

    return _sweep("union_bound", samples, seed, draw, union_bound_check)


SWEEPS = {
    "gentle_operator": sweep_gentle_operator,
    "gentle_ensemble": sweep_gentle_ensemble,
    "trace_inequality": sweep_trace_inequality,
    "union_bound": sweep_union_bound,
}


def run_all(samples: int, seed: int) -> list[SweepResult]:
    """All four sweeps, each from its own seed derived from ``seed``."""
    seeds = np.random.SeedSequence(seed).generate_state(len(SWEEPS), np.uint32)
    return [fn(samples, int(s)) for (name, fn), s in zip(SWEEPS.items(), seeds)]
