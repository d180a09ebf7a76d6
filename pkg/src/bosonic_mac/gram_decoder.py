"""Sequential vacuum-or-not decoding simulated in the span of the output codewords.

Every receiver state that can occur during decoding lies in the span of the
K = |L|*|M| output states |gamma^n(l, m)>. A state is stored as a coefficient
vector ``c`` over that (non-orthogonal) family and all inner products go
through the Gram matrix, so no Fock truncation is involved and the cost is
independent of the number of modes once G is built.

Message labels ``(l, m)`` are 1-based like the scan-order display; the pair
index ``k`` used for Gram rows is 0-based with ``k = (m - 1) * L + (l - 1)``,
which makes the scan order simply ``k = 0, 1, ..., K - 1``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .coherent import CodebookPair, GaussianSource, mix_output, sample_codebook
from .errors import ConditioningError, ResourceError
from .rates import ChannelParams

PSD_TOL = 1e-9
DEFAULT_MAX_PAIRS = 4096


@dataclass(frozen=True)
class GramMatrix:
    matrix: np.ndarray
    n_a: int
    n_b: int

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def pair_index(self, l: int, m: int) -> int:
        if not (1 <= l <= self.n_a and 1 <= m <= self.n_b):
            raise ValueError(f"pair ({l}, {m}) outside codebook sizes ({self.n_a}, {self.n_b})")
        return (m - 1) * self.n_a + (l - 1)

    def pair(self, k: int) -> tuple[int, int]:
        return k % self.n_a + 1, k // self.n_a + 1


@dataclass(frozen=True)
class SpanState:
    """``sum_k coeffs[k] |gamma_k>``; possibly subnormalized."""

    coeffs: np.ndarray

    @classmethod
    def basis(cls, k: int, dim: int) -> "SpanState":
        c = np.zeros(dim, dtype=complex)
        c[k] = 1.0
        return cls(c)

    def norm2(self, G: GramMatrix) -> float:
        c = self.coeffs
        return float(np.real(np.vdot(c, G.matrix @ c)))


@dataclass(frozen=True)
class DecodeOutcome:
    decoded: tuple[int, int] | None
    tests_performed: int
    correct: bool


@dataclass
class ErrorEstimate:
    mean: float
    stderr: float
    trials: int
    codebooks: int
    sizes: tuple[int, int]
    sen_bound_violations: int = 0
    resampled: int = 0
    per_codebook: list[float] = field(default_factory=list, repr=False)

    @property
    def pairs(self) -> int:
        return self.sizes[0] * self.sizes[1]


def scan_order(L: int, M: int) -> list[tuple[int, int]]:
    """Pairs in the receiver's test order: ``l`` runs fastest, ``m`` slowest."""
    if L < 1 or M < 1:
        raise ValueError(f"codebook sizes must be >= 1, got ({L}, {M})")
    return [(l, m) for m in range(1, M + 1) for l in range(1, L + 1)]


def output_amplitudes(cb: CodebookPair, eta: float) -> np.ndarray:
    """(K, n) array of output amplitudes, rows in scan order."""
    a, b = cb.sender_a, cb.sender_b
    return mix_output(eta, a[None, :, :], b[:, None, :]).reshape(-1, cb.n)


def gram_from_amplitudes(gammas: np.ndarray, n_a: int | None = None, n_b: int = 1, psd_tol: float = PSD_TOL) -> GramMatrix:
    gammas = np.atleast_2d(np.asarray(gammas, dtype=complex))
    K = gammas.shape[0]
    if n_a is None:
        n_a = K // n_b
    if n_a * n_b != K:
        raise ValueError(f"{K} output states do not factor as {n_a} x {n_b}")
    sq = 0.5 * np.sum(np.abs(gammas) ** 2, axis=1)
    log_g = -sq[:, None] - sq[None, :] + np.conj(gammas) @ gammas.T
    G = np.exp(log_g)
    G = 0.5 * (G + G.conj().T)
    np.fill_diagonal(G, 1.0)
    if K > 1:
        lam_min = np.linalg.eigvalsh(G)[0]
        if lam_min < -psd_tol:
            raise ConditioningError(f"Gram matrix has eigenvalue {lam_min:.3e} below -{psd_tol:g}")
    return GramMatrix(G, n_a, n_b)


def build_gram(cb: CodebookPair, eta: float, psd_tol: float = PSD_TOL) -> GramMatrix:
    """Gram matrix of all output codewords ``<gamma_k|gamma_k'>``."""
    L, M = cb.sizes
    return gram_from_amplitudes(output_amplitudes(cb, eta), L, M, psd_tol)


def apply_pair_test(state: SpanState, k: int, G: GramMatrix) -> tuple[float, SpanState, SpanState]:
    """Binary test {|gamma_k><gamma_k|, I - |gamma_k><gamma_k|} on a span state.

    Returns the "yes" probability relative to the input norm together with
    the two unnormalized branches; their squared norms add up to the input's.
    """
    c = state.coeffs
    gc = G.matrix @ c
    norm2 = float(np.real(np.vdot(c, gc)))
    if norm2 <= 0.0:
        raise ValueError("cannot measure a zero-norm state")
    amp = gc[k]
    yes = np.zeros_like(c)
    yes[k] = amp
    no = c.copy()
    no[k] -= amp
    return abs(amp) ** 2 / norm2, SpanState(yes), SpanState(no)


def success_probability_exact(cb: CodebookPair, eta: float, true_pair: tuple[int, int], G: GramMatrix | None = None) -> float:
    """Probability that every test before ``true_pair`` says "no" and its own test says "yes"."""
    if G is None:
        G = build_gram(cb, eta)
    t = G.pair_index(*true_pair)
    state = SpanState.basis(t, G.dim)
    for k in range(t):
        _, _, state = apply_pair_test(state, k, G)
        if state.norm2(G) <= 0.0:
            return 0.0  # an earlier identical codeword absorbed the whole state
    _, yes, _ = apply_pair_test(state, t, G)
    return yes.norm2(G)


def success_probabilities(G: GramMatrix) -> np.ndarray:
    """Exact success probability for every true pair at once.

    The chain of "no" projections applied to |gamma_t> only rewrites the
    coefficients of earlier pairs, one at a time, which is forward
    substitution with the unit-lower-triangular part of G. Solving all
    columns together costs one triangular solve.
    """
    Gm = G.matrix
    K = G.dim
    lower = np.tril(Gm, -1) + np.eye(K)
    X = solve_triangular(lower, np.triu(Gm, 1), lower=True, unit_diagonal=True)
    C = np.eye(K, dtype=complex) - np.triu(X, 1)
    amps = np.sum(Gm * C.T, axis=1)
    return np.abs(amps) ** 2


def outcome_distribution(G: GramMatrix, true_index: int) -> np.ndarray:
    """Probabilities of decoding each pair index, plus the all-"no" branch last."""
    K = G.dim
    probs = np.zeros(K + 1)
    state = SpanState.basis(true_index, K)
    for k in range(K):
        remaining = state.norm2(G)
        if remaining <= 0.0:
            break
        p_yes, _, state = apply_pair_test(state, k, G)
        probs[k] = p_yes * remaining
    probs[K] = max(state.norm2(G), 0.0)
    return probs


def sen_bound(G: GramMatrix, true_index: int) -> float:
    """Non-commutative union bound on the error for true pair ``true_index``.

    The chain is the complements of the earlier tests followed by the true
    pair's own projector; the latter never fails on its own state, so only
    the overlaps with earlier codewords contribute.
    """
    return 2.0 * math.sqrt(float(np.sum(np.abs(G.matrix[:true_index, true_index]) ** 2)))


def simulate_decoding(G: GramMatrix, true_index: int, rng: np.random.Generator) -> DecodeOutcome:
    """Run the receiver once, sampling every binary outcome by the Born rule."""
    Gm = G.matrix
    c = np.zeros(G.dim, dtype=complex)
    c[true_index] = 1.0
    norm2 = 1.0
    for k in range(G.dim):
        amp = Gm[k] @ c
        w = abs(amp) ** 2
        if norm2 > 0 and rng.random() * norm2 < w:
            return DecodeOutcome(G.pair(k), k + 1, k == true_index)
        c[k] -= amp
        norm2 = max(norm2 - w, 0.0)
    return DecodeOutcome(None, G.dim, False)


def codebook_sizes(rates: tuple[float, float], n: int) -> tuple[int, int]:
    """Ceiling of 2^(nR) for each sender, so realized rates are never below the request."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    out = []
    for r in rates:
        if r < 0 or not math.isfinite(r):
            raise ValueError(f"rates must be finite and >= 0, got {rates}")
        out.append(max(1, math.ceil(2.0 ** (n * r) - 1e-9)))
    return out[0], out[1]


def _trial_errors(G: GramMatrix, probs: np.ndarray, trials: int, rng: np.random.Generator,
                  true_index: int | None, sample_outcomes: bool) -> np.ndarray:
    errs = np.empty(trials)
    for i in range(trials):
        t = int(rng.integers(G.dim)) if true_index is None else true_index
        if sample_outcomes:
            errs[i] = 0.0 if simulate_decoding(G, t, rng).correct else 1.0
        else:
            errs[i] = 1.0 - probs[t]
    return errs


def _sen_violations(G: GramMatrix, probs: np.ndarray, tol: float = 1e-9) -> int:
    bounds = 2.0 * np.sqrt(np.sum(np.abs(np.triu(G.matrix, 1)) ** 2, axis=0))
    return int(np.sum(1.0 - probs > bounds + tol))


def _stderr(values: np.ndarray) -> float:
    return float(np.std(values, ddof=1) / math.sqrt(len(values))) if len(values) > 1 else 0.0


def estimate_codebook_error(cb: CodebookPair, eta: float, trials: int, seed: int,
                            true_pair: tuple[int, int] | None = None,
                            sample_outcomes: bool = True) -> ErrorEstimate:
    """Monte Carlo error for one fixed codebook (uniform or fixed true pair)."""
    G = build_gram(cb, eta)
    probs = success_probabilities(G)
    t = None if true_pair is None else G.pair_index(*true_pair)
    errs = _trial_errors(G, probs, trials, np.random.default_rng(seed), t, sample_outcomes)
    return ErrorEstimate(float(errs.mean()), _stderr(errs), trials, 1, cb.sizes,
                         _sen_violations(G, probs), 0, [float(errs.mean())])


def monte_carlo_error(params: ChannelParams, rates: tuple[float, float], n: int, codebooks: int,
                      trials_per: int, seed: int, *, sample_outcomes: bool = True,
                      max_pairs: int = DEFAULT_MAX_PAIRS, psd_tol: float = PSD_TOL,
                      max_resample: int = 10, workers: int | None = None) -> ErrorEstimate:
    """Average decoding error over random Gaussian codebooks and uniform messages.

    Each codebook instance ``i`` draws its codewords and its trial randomness
    from seeds derived from ``(seed, i)`` alone, so the result does not depend
    on ``workers``. With ``sample_outcomes=False`` each trial contributes the
    exact error ``1 - P(success)`` of its message pair instead of a sampled
    0/1 outcome.
    """
    L, M = codebook_sizes(rates, n)
    if L * M > max_pairs:
        raise ResourceError(
            f"{L} x {M} = {L * M} codeword pairs exceeds the cap of {max_pairs}; lower the rates or n"
        )
    if codebooks < 1 or trials_per < 1:
        raise ValueError("codebooks and trials_per must be >= 1")

    def one(i: int):
        resampled = 0
        while True:
            ss = np.random.SeedSequence(seed, spawn_key=(i, resampled))
            sa, sb, st = (int(s) for s in ss.generate_state(3, np.uint64))
            cb = sample_codebook(GaussianSource(params.nsa, sa), GaussianSource(params.nsb, sb), (L, M), n)
            try:
                G = build_gram(cb, params.eta, psd_tol)
                break
            except ConditioningError:
                resampled += 1
                if resampled > max_resample:
                    raise
        probs = success_probabilities(G)
        errs = _trial_errors(G, probs, trials_per, np.random.default_rng(st), None, sample_outcomes)
        return errs, _sen_violations(G, probs), resampled

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, range(codebooks)))
    else:
        results = [one(i) for i in range(codebooks)]

    all_errs = np.concatenate([r[0] for r in results])
    per_cb = np.array([r[0].mean() for r in results])
    stderr = _stderr(per_cb) if codebooks > 1 else _stderr(all_errs)
    return ErrorEstimate(
        mean=float(all_errs.mean()),
        stderr=stderr,
        trials=len(all_errs),
        codebooks=codebooks,
        sizes=(L, M),
        sen_bound_violations=sum(r[1] for r in results),
        resampled=sum(r[2] for r in results),
        per_codebook=per_cb.tolist(),
    )


def simulation_report(params: dict, rates: tuple[float, float], n: int, est: ErrorEstimate) -> dict:
    return {
        "params": params,
        "rates": [float(rates[0]), float(rates[1])],
        "n": n,
        "K": est.pairs,
        "error_mean": est.mean,
        "error_stderr": est.stderr,
        "sen_bound_violations": est.sen_bound_violations,
    }
