"""Finite pure-state MACs: entropies, achievable regions and sequential decoding.

A channel maps letters ``(x, y)`` to unit vectors ``phi[x, y]`` in C^d. The
sequential receiver is simulated exactly on dense vectors of dimension d^n.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.hermite import hermgauss

from . import rates as R
from .errors import ResourceError
from .fock import TruncationPolicy, coherent_fock, min_entropy, von_neumann_entropy
from .gram_decoder import ErrorEstimate, GramMatrix, _stderr, codebook_sizes, success_probabilities
from .typicality import expected_typical_mass, typical_probability

MAX_OUTPUT_DIM = 2 ** 14
SLACK = 1e-12


@dataclass
class PureStateMAC:
    phi: np.ndarray  # (dx, dy, d)

    def __post_init__(self):
        self.phi = np.asarray(self.phi, dtype=complex)
        if self.phi.ndim != 3:
            raise ValueError(f"phi must have shape (dx, dy, d), got {self.phi.shape}")
        norms = np.linalg.norm(self.phi, axis=2)
        if not np.allclose(norms, 1.0, atol=1e-12, rtol=0):
            raise ValueError(f"output states must be unit vectors (norm error {np.max(np.abs(norms - 1)):.2e})")

    @property
    def dx(self) -> int:
        return self.phi.shape[0]

    @property
    def dy(self) -> int:
        return self.phi.shape[1]

    @property
    def d(self) -> int:
        return self.phi.shape[2]

    def to_json(self) -> str:
        rows = [[[[float(z.real), float(z.imag)] for z in vec] for vec in row] for row in self.phi]
        return json.dumps({"dx": self.dx, "dy": self.dy, "d": self.d, "phi": rows})

    @classmethod
    def from_json(cls, text: str) -> "PureStateMAC":
        data = json.loads(text)
        phi = np.array(data["phi"], dtype=float)
        if phi.shape != (data["dx"], data["dy"], data["d"], 2):
            raise ValueError(f"phi has shape {phi.shape[:3]}, header says {(data['dx'], data['dy'], data['d'])}")
        return cls(phi[..., 0] + 1j * phi[..., 1])


@dataclass(frozen=True)
class InputDists:
    px: tuple
    py: tuple

    def __post_init__(self):
        for name in ("px", "py"):
            p = np.asarray(getattr(self, name), dtype=float)
            if p.ndim != 1 or np.any(p < 0) or not math.isclose(p.sum(), 1.0, abs_tol=1e-12):
                raise ValueError(f"{name} is not a probability distribution: {p}")
            object.__setattr__(self, name, tuple(float(v) for v in p))

    @classmethod
    def uniform(cls, mac: PureStateMAC) -> "InputDists":
        return cls(tuple([1.0 / mac.dx] * mac.dx), tuple([1.0 / mac.dy] * mac.dy))


@dataclass(frozen=True)
class CqEntropies:
    h_b: float
    h_b_given_x: float
    h_b_given_y: float
    hmin_b_given_x: float
    hmin_b_given_y: float
    i_x_b: float
    i_y_b: float

    @classmethod
    def from_entropy_set(cls, e: R.EntropySet) -> "CqEntropies":
        return cls(e.h_b, e.h_b_given_x, e.h_b_given_y, e.hmin_b_given_x, e.hmin_b_given_y,
                   e.h_b - e.h_b_given_x, e.h_b - e.h_b_given_y)


def xor_mac() -> PureStateMAC:
    """Binary adder channel onto qubit basis states, ``|x XOR y>``."""
    phi = np.zeros((2, 2, 2), dtype=complex)
    for x in range(2):
        for y in range(2):
            phi[x, y, x ^ y] = 1.0
    return PureStateMAC(phi)


def noisy_xor_mac(spread: float, seed: int) -> PureStateMAC:
    """XOR channel whose four output vectors are randomly tilted by ``spread``."""
    rng = np.random.default_rng(seed)
    phi = np.zeros((2, 2, 2), dtype=complex)
    for x in range(2):
        for y in range(2):
            v = np.eye(2)[x ^ y] + spread * (rng.standard_normal(2) + 1j * rng.standard_normal(2))
            phi[x, y] = v / np.linalg.norm(v)
    return PureStateMAC(phi)


def _mix(weights, vecs) -> np.ndarray:
    return np.einsum("k,ki,kj->ij", weights, vecs, vecs.conj())


def cq_entropies(mac: PureStateMAC, dists: InputDists) -> CqEntropies:
    """All entropies of the cq state ``sum p(x) p(y) |x><x| (x) |y><y| (x) phi_xy``."""
    if len(dists.px) != mac.dx or len(dists.py) != mac.dy:
        raise ValueError("input distributions do not match the channel alphabets")
    px, py = np.array(dists.px), np.array(dists.py)
    rho_x = [_mix(py, mac.phi[x]) for x in range(mac.dx)]
    rho_y = [_mix(px, mac.phi[:, y]) for y in range(mac.dy)]
    rho = sum(p * r for p, r in zip(px, rho_x))

    h_b = von_neumann_entropy(rho)
    h_b_x = sum(p * von_neumann_entropy(r) for p, r in zip(px, rho_x) if p > 0)
    h_b_y = sum(p * von_neumann_entropy(r) for p, r in zip(py, rho_y) if p > 0)
    hmin_x = min(min_entropy(r) for p, r in zip(px, rho_x) if p > 0)
    hmin_y = min(min_entropy(r) for p, r in zip(py, rho_y) if p > 0)

    for states, probs, hmin in ((rho_x, px, hmin_x), (rho_y, py, hmin_y)):
        ceiling = 2.0 ** (-hmin)
        for p, r in zip(probs, states):
            if p > 0 and np.linalg.eigvalsh(ceiling * np.eye(mac.d) - r)[0] < -1e-9:
                raise ValueError("conditional state exceeds its min-entropy ceiling")

    vals = [max(0.0, float(v)) for v in (h_b, h_b_x, h_b_y, hmin_x, hmin_y)]
    h_b, h_b_x, h_b_y, hmin_x, hmin_y = vals
    i_x, i_y = h_b - h_b_x, h_b - h_b_y
    if min(i_x, i_y) < -1e-9:
        raise ValueError(f"negative mutual information ({i_x:.3e}, {i_y:.3e})")
    return CqEntropies(h_b, h_b_x, h_b_y, hmin_x, hmin_y, max(i_x, 0.0), max(i_y, 0.0))


def achievable_regions(ent: CqEntropies) -> tuple[R.RateRegion, R.RateRegion, R.PolygonRegion]:
    first = R.RateRegion(ent.hmin_b_given_y, ent.h_b_given_x, ent.h_b)
    second = R.RateRegion(ent.h_b_given_y, ent.hmin_b_given_x, ent.h_b)
    return first, second, R.hull_region(first, second)


def corner_equality_check(ent: CqEntropies) -> bool:
    """Whether both min-entropy corner points reach the von Neumann corners."""
    return (ent.i_x_b <= ent.hmin_b_given_y + SLACK) and (ent.i_y_b <= ent.hmin_b_given_x + SLACK)


def error_bound(eps: float, delta: float, n: int, L: int, M: int, ent: CqEntropies) -> float:
    """Upper bound on the expected error of the sequential decoder for region 1."""
    if eps < 0 or delta < 0:
        raise ValueError("eps and delta must be >= 0")
    inner = (
        4 * math.sqrt(eps)
        + 2.0 ** (-n * ent.hmin_b_given_y) * L
        + 2.0 ** (-n * (ent.h_b_given_x - delta)) * M
        + 2.0 ** (-n * (ent.h_b - delta)) * L * M
    )
    return 6 * eps + 2 * math.sqrt(eps) + 2 * math.sqrt(inner)


def typicality_epsilon(mac: PureStateMAC, dists: InputDists, n: int, delta: float) -> float:
    """Smallest eps for which both typical-mass properties hold exactly at this ``n``."""
    px, py = np.array(dists.px), np.array(dists.py)
    rho_x = [_mix(py, mac.phi[x]) for x in range(mac.dx)]
    rho = sum(p * r for p, r in zip(px, rho_x))
    lam = np.clip(np.linalg.eigvalsh(rho), 0, None)
    lam = lam / lam.sum()
    mass = typical_probability(lam, n, delta)
    cond_mass = expected_typical_mass(rho_x, px, n, delta)
    return max(0.0, 1.0 - mass, 1.0 - cond_mass)


def realized_bound(mac: PureStateMAC, dists: InputDists, n: int, L: int, M: int,
                   deltas=(0.0, 0.05, 0.1, 0.15, 0.2, 0.3)) -> tuple[float, float, float]:
    """Smallest ``error_bound`` over ``deltas``, each with its exact typicality eps.

    Returns ``(bound, eps, delta)``.
    """
    ent = cq_entropies(mac, dists)
    best = (math.inf, 1.0, 0.0)
    for delta in deltas:
        eps = typicality_epsilon(mac, dists, n, delta)
        b = error_bound(eps, delta, n, L, M, ent)
        if b < best[0]:
            best = (b, eps, delta)
    return best


def sample_letters(p, size: int, n: int, rng: np.random.Generator) -> np.ndarray:
    return rng.choice(len(p), size=(size, n), p=np.asarray(p))


def output_vectors(mac: PureStateMAC, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Dense output codewords, one row per pair in scan order (l fastest)."""
    L, n = xs.shape
    M = ys.shape[0]
    letters = mac.phi[xs[None, :, :], ys[:, None, :]].reshape(L * M, n, mac.d)
    out = letters[:, 0, :]
    for i in range(1, n):
        out = np.einsum("ka,kb->kab", out, letters[:, i, :]).reshape(L * M, -1)
    return out


def chain_success(vectors: np.ndarray, true_index: int) -> float:
    psi = vectors[true_index].copy()
    for k in range(true_index):
        v = vectors[k]
        psi -= (v.conj() @ psi) * v
    return abs(vectors[true_index].conj() @ psi) ** 2


def chain_success_all(vectors: np.ndarray) -> np.ndarray:
    """Success probabilities for every true pair, carrying all chains together."""
    K = vectors.shape[0]
    psi = vectors.copy()
    for k in range(K - 1):
        v = vectors[k]
        tail = psi[k + 1:]
        tail -= np.outer(tail @ v.conj(), v)
    return np.abs(np.sum(vectors.conj() * psi, axis=1)) ** 2


def simulate_sequential(mac: PureStateMAC, dists: InputDists, rates: tuple[float, float], n: int,
                        codebooks: int, seed: int, trials_per: int | None = None,
                        max_dim: int = MAX_OUTPUT_DIM, workers: int | None = None) -> ErrorEstimate:
    """Average error of the sequential decoder over random i.i.d. codebooks.

    With ``trials_per=None`` every message pair of every codebook is decoded
    exactly; the chain is evaluated through the Gram matrix of the dense
    output vectors, which is the same computation as projecting them one by
    one (see ``chain_success_all``) at a fraction of the cost. Otherwise
    ``trials_per`` uniformly drawn message pairs are decoded by explicit
    projection in dimension d^n.
    """
    if mac.d ** n > max_dim:
        raise ResourceError(f"output dimension {mac.d}^{n} exceeds the limit {max_dim}")
    if codebooks < 1:
        raise ValueError("codebooks must be >= 1")
    L, M = codebook_sizes(rates, n)

    def one(i: int):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(i,)))
        xs = sample_letters(dists.px, L, n, rng)
        ys = sample_letters(dists.py, M, n, rng)
        V = output_vectors(mac, xs, ys)
        if trials_per is None:
            ts = np.arange(L * M)
            G = V.conj() @ V.T
            succ = success_probabilities(GramMatrix(G, L, M))
            bounds = 2.0 * np.sqrt(np.sum(np.abs(np.triu(G, 1)) ** 2, axis=0))
        else:
            ts = rng.integers(L * M, size=trials_per)
            succ = np.zeros(L * M)
            bounds = np.zeros(L * M)
            for t in set(ts.tolist()):
                succ[t] = chain_success(V, t)
                bounds[t] = 2.0 * math.sqrt(float(np.sum(np.abs(V[:t].conj() @ V[t]) ** 2)))
        errs = 1.0 - succ[ts]
        distinct = np.unique(ts)
        sen = int(np.sum(1.0 - succ[distinct] > bounds[distinct] + 1e-9))
        return errs, sen

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, range(codebooks)))
    else:
        results = [one(i) for i in range(codebooks)]
    all_errs = np.concatenate([r[0] for r in results])
    per_cb = np.array([r[0].mean() for r in results])
    return ErrorEstimate(
        mean=float(all_errs.mean()),
        stderr=_stderr(per_cb) if codebooks > 1 else _stderr(all_errs),
        trials=len(all_errs),
        codebooks=codebooks,
        sizes=(L, M),
        sen_bound_violations=sum(r[1] for r in results),
        per_codebook=per_cb.tolist(),
    )


def decreasing_at_confidence(estimates: list[ErrorEstimate], z: float = 1.6448536269514722) -> bool:
    """One-sided z-test that each estimate is below its predecessor (95% by default)."""
    for prev, cur in zip(estimates, estimates[1:]):
        se = math.hypot(prev.stderr, cur.stderr)
        diff = prev.mean - cur.mean
        if se == 0.0:
            if diff <= 0:
                return False
        elif diff / se <= z:
            return False
    return True


def discretized_coherent_mac(eta: float, nsa: float, nsb: float, points: int,
                             policy: TruncationPolicy = TruncationPolicy(60, 1e-8)) -> tuple[PureStateMAC, InputDists]:
    """Coherent-state MAC with Gaussian inputs replaced by a Gauss-Hermite grid.

    Each sender's amplitude takes ``points**2`` values on a product grid in
    the complex plane; the output coherent states are truncated in Fock space
    and renormalized so the channel is a proper pure-state MAC.
    """
    t, w = hermgauss(points)
    grid = (t[:, None] + 1j * t[None, :]).ravel()
    weights = (w[:, None] * w[None, :]).ravel() / math.pi
    weights = weights / weights.sum()
    alphas = math.sqrt(nsa) * grid
    betas = math.sqrt(nsb) * grid
    phi = np.empty((len(alphas), len(betas), policy.dim), dtype=complex)
    for x, a in enumerate(alphas):
        for y, b in enumerate(betas):
            v = coherent_fock(math.sqrt(eta) * a + math.sqrt(1 - eta) * b, policy)
            phi[x, y] = v / np.linalg.norm(v)
    return PureStateMAC(phi), InputDists(tuple(weights), tuple(weights))
