"""Truncated Fock-space numerics used as an independent oracle.

Single-mode objects live in the number basis |0>, ..., |D-1>. Multimode pure
states are arrays of shape ``(D,) * n`` (or their flattening); the n-fold
vacuum is flat index 0 either way.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm
from scipy.special import gammainc

from .errors import ResourceError, TruncationError

MAX_MULTIMODE_DIM = 200_000
UNITARITY_TOL = 1e-6
HERMITIAN_TOL = 1e-9


@dataclass(frozen=True)
class TruncationPolicy:
    dim: int = 60
    tail_tol: float = 1e-10

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError(f"truncation dimension must be >= 2, got {self.dim}")
        if not 0 < self.tail_tol < 1:
            raise ValueError(f"tail_tol must lie in (0, 1), got {self.tail_tol}")


def suggested_dim(alpha) -> int:
    """Rule-of-thumb cutoff ``|alpha|^2 + 8|alpha| + 20``."""
    r = abs(complex(alpha))
    return int(math.ceil(r * r + 8 * r + 20))


def coherent_tail_mass(alpha, dim: int) -> float:
    """Poisson weight of |alpha> on levels >= dim."""
    lam = abs(complex(alpha)) ** 2
    return 0.0 if lam == 0 else float(gammainc(dim, lam))


def _required_dim(alpha, tail_tol: float) -> int:
    d = 2
    while coherent_tail_mass(alpha, d) >= tail_tol:
        d += 1
    return d


def coherent_fock(alpha, policy: TruncationPolicy = TruncationPolicy()) -> np.ndarray:
    """Number-basis amplitudes of |alpha>, truncated without renormalizing."""
    alpha = complex(alpha)
    tail = coherent_tail_mass(alpha, policy.dim)
    if tail >= policy.tail_tol:
        need = _required_dim(alpha, policy.tail_tol)
        raise TruncationError(
            f"|alpha={alpha}> leaves tail mass {tail:.2e} beyond D={policy.dim}; need D >= {need}",
            required_dim=need,
        )
    vec = np.empty(policy.dim, dtype=complex)
    vec[0] = math.exp(-0.5 * abs(alpha) ** 2)
    for k in range(1, policy.dim):
        vec[k] = vec[k - 1] * alpha / math.sqrt(k)
    return vec


def lowering(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)


def displacement_matrix(alpha, policy: TruncationPolicy = TruncationPolicy()) -> np.ndarray:
    """``exp(alpha a^dag - conj(alpha) a)`` on the truncated ladder.

    The truncated generator is anti-Hermitian, so the exponential is unitary
    to rounding error whatever the cutoff. Truncation damage therefore shows
    up in the displaced vacuum rather than in unitarity, and both are gated.
    """
    alpha = complex(alpha)
    a = lowering(policy.dim)
    D = expm(alpha * a.conj().T - alpha.conjugate() * a)
    unitarity = np.linalg.norm(D.conj().T @ D - np.eye(policy.dim), 2)
    vacuum_defect = np.linalg.norm(D[:, 0] - coherent_fock(alpha, policy))
    if unitarity > UNITARITY_TOL or vacuum_defect > UNITARITY_TOL:
        raise TruncationError(
            f"D({alpha}) unreliable at D={policy.dim}: unitarity defect {unitarity:.2e}, "
            f"displaced-vacuum defect {vacuum_defect:.2e}",
            required_dim=suggested_dim(alpha),
        )
    return D


def product_state(vectors) -> np.ndarray:
    """Tensor product of single-mode vectors as a ``(D,) * n`` array."""
    out = np.asarray(vectors[0], dtype=complex)
    for v in vectors[1:]:
        out = np.multiply.outer(out, np.asarray(v, dtype=complex))
    return out


def multimode_coherent(gammas, policy: TruncationPolicy = TruncationPolicy()) -> np.ndarray:
    gammas = np.atleast_1d(gammas)
    _check_multimode(policy.dim, len(gammas))
    return product_state([coherent_fock(g, policy) for g in gammas])


def _check_multimode(dim: int, n: int):
    if dim ** n > MAX_MULTIMODE_DIM:
        raise ResourceError(f"D^n = {dim}^{n} exceeds the dense multimode limit {MAX_MULTIMODE_DIM}")


def apply_per_mode(state: np.ndarray, ops) -> np.ndarray:
    """Apply ``ops[i]`` to mode ``i`` of a ``(D,) * n`` tensor."""
    out = state
    for i, op in enumerate(ops):
        out = np.moveaxis(np.tensordot(op, out, axes=([1], [i])), 0, i)
    return out


def vacuum_or_not(state: np.ndarray, density: bool = False):
    """Projective measurement onto the n-fold vacuum and its complement.

    Accepts a pure state (any shape whose flat index 0 is the vacuum) or,
    with ``density=True``, a density matrix in the flattened basis. Returns
    ``(p_vac, post_vac, post_not)``; ``p_vac`` is relative to the input
    norm or trace and the branches are left unnormalized.
    """
    state = np.asarray(state, dtype=complex)
    if density:
        if state.ndim != 2 or state.shape[0] != state.shape[1] or not _is_density(state):
            raise ValueError("density=True requires a Hermitian square matrix")
        total = float(np.real(np.trace(state)))
        if total <= 0:
            raise ValueError("cannot measure a zero-trace state")
        post_vac = np.zeros_like(state)
        post_vac[0, 0] = state[0, 0]
        post_not = state.copy()
        post_not[0, :] = 0
        post_not[:, 0] = 0
        return float(np.real(state[0, 0])) / total, post_vac, post_not
    flat = state.reshape(-1)
    total = float(np.real(np.vdot(flat, flat)))
    if total <= 0:
        raise ValueError("cannot measure a zero-norm state")
    post_vac = np.zeros_like(flat)
    post_vac[0] = flat[0]
    post_not = flat.copy()
    post_not[0] = 0
    return abs(flat[0]) ** 2 / total, post_vac.reshape(state.shape), post_not.reshape(state.shape)


def _is_density(m: np.ndarray) -> bool:
    return bool(np.allclose(m, m.conj().T, atol=HERMITIAN_TOL))


def three_step_test(state: np.ndarray, gammas, policy: TruncationPolicy = TruncationPolicy(), *, displacements=None):
    """Displace by -gamma, test for vacuum, displace back.

    ``state`` is a ``(D,) * n`` pure-state tensor. Both returned branches are
    displaced back by +gamma, so ``post_yes`` is the projection of the input
    onto |gamma^n> and ``post_no`` onto its complement.
    """
    gammas = np.atleast_1d(gammas)
    n = len(gammas)
    _check_multimode(policy.dim, n)
    state = np.asarray(state, dtype=complex).reshape((policy.dim,) * n)
    if displacements is None:
        displacements = [displacement_matrix(g, policy) for g in gammas]
    shifted = apply_per_mode(state, [D.conj().T for D in displacements])
    p_yes, vac, rest = vacuum_or_not(shifted)
    return p_yes, apply_per_mode(vac, displacements), apply_per_mode(rest, displacements)


def chain_success_probabilities(gammas: np.ndarray, policy: TruncationPolicy = TruncationPolicy()) -> np.ndarray:
    """Success probability of the sequential receiver for every true pair.

    ``gammas`` is the (K, n) array of output amplitudes in scan order.
    """
    gammas = np.atleast_2d(gammas)
    K, n = gammas.shape
    _check_multimode(policy.dim, n)
    disp = [[displacement_matrix(g, policy) for g in row] for row in gammas]
    out = np.empty(K)
    for t in range(K):
        state = multimode_coherent(gammas[t], policy)
        for k in range(t):
            _, _, state = three_step_test(state, gammas[k], policy, displacements=disp[k])
        _, yes, _ = three_step_test(state, gammas[t], policy, displacements=disp[t])
        out[t] = float(np.real(np.vdot(yes, yes)))
    return out


def thermal_state(N: float, policy: TruncationPolicy = TruncationPolicy()) -> np.ndarray:
    """Diagonal thermal state with mean photon number ``N`` (not renormalized)."""
    if not math.isfinite(N) or N < 0:
        raise ValueError(f"mean photon number must be finite and >= 0, got {N}")
    tail = (N / (N + 1.0)) ** policy.dim
    if tail >= policy.tail_tol:
        need = math.ceil(math.log(policy.tail_tol) / math.log(N / (N + 1.0)))
        raise TruncationError(
            f"thermal N={N} leaves tail mass {tail:.2e} beyond D={policy.dim}; need D >= {need}",
            required_dim=need,
        )
    k = np.arange(policy.dim)
    return np.diag((N ** k / (N + 1.0) ** (k + 1)).astype(complex))


def _hermitian_eigvals(rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {rho.shape}")
    if not _is_density(rho):
        raise ValueError("matrix is not Hermitian")
    return np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))


def min_entropy(rho: np.ndarray) -> float:
    """``-log2`` of the largest eigenvalue."""
    lam = _hermitian_eigvals(rho)
    if lam[0] < -HERMITIAN_TOL:
        raise ValueError(f"matrix is not positive semidefinite (eigenvalue {lam[0]:.3e})")
    return float(-math.log2(lam[-1]))


def von_neumann_entropy(rho: np.ndarray) -> float:
    lam = _hermitian_eigvals(rho)
    lam = lam[lam > 0]
    return float(-np.sum(lam * np.log2(lam)))


def trace_norm(m: np.ndarray) -> float:
    return float(np.sum(np.linalg.svd(np.asarray(m, dtype=complex), compute_uv=False)))


def spectral_functionals(a: np.ndarray, b: np.ndarray) -> dict:
    """Von Neumann entropy of ``a`` and the trace norm ``||a - b||_1``."""
    _hermitian_eigvals(b)
    return {"von_neumann_a": von_neumann_entropy(a), "trace_distance": trace_norm(np.asarray(a) - np.asarray(b))}


def displaced(rho: np.ndarray, alpha, policy: TruncationPolicy = TruncationPolicy()) -> np.ndarray:
    D = displacement_matrix(alpha, policy)
    return D @ rho @ D.conj().T
