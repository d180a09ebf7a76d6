"""Weak typical sets, typical projectors and their three standard properties.

Everything here is exhaustive: sets are enumerated and projectors are built
from explicit eigenvalue-label sequences, so the properties can be checked
exactly at small n rather than asymptotically.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import ResourceError

MAX_SEQUENCES = 2 ** 20
MAX_SUBSPACE_DIM = 2 ** 14
MAX_DENSE_DIM = 2 ** 11
_MEMBER_SLACK = 1e-12


def as_distribution(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValueError("a distribution is a nonempty 1-D array")
    if np.any(p < 0) or not math.isclose(p.sum(), 1.0, abs_tol=1e-12):
        raise ValueError(f"not a probability distribution: {p}")
    return p


def entropy(p) -> float:
    p = as_distribution(p)
    nz = p[p > 0]
    return float(-np.sum(nz * np.log2(nz)))


def sample_entropy(xn, p) -> float:
    """``-(1/n) log2 p(x^n)`` for an i.i.d. source ``p``."""
    p = as_distribution(p)
    xn = np.asarray(xn, dtype=int)
    probs = p[xn]
    if np.any(probs == 0):
        raise ValueError("sequence contains a symbol of zero probability")
    return float(-np.mean(np.log2(probs)))


@dataclass(frozen=True)
class TypicalSet:
    n: int
    delta: float
    entropy: float
    members: np.ndarray
    probability: float

    def __len__(self):
        return len(self.members)


def _all_sequences(alphabet: int, n: int) -> np.ndarray:
    if alphabet ** n > MAX_SEQUENCES:
        raise ResourceError(f"{alphabet}^{n} sequences exceed the enumeration limit {MAX_SEQUENCES}")
    return np.array(list(itertools.product(range(alphabet), repeat=n)), dtype=int).reshape(-1, n)


def _log2_or_neg_inf(x: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.where(x > 0, np.log2(np.where(x > 0, x, 1.0)), -np.inf)


def typical_set(p, n: int, delta: float) -> TypicalSet:
    """All sequences whose sample entropy is within ``delta`` of ``H(p)``."""
    p = as_distribution(p)
    seqs = _all_sequences(len(p), n)
    logp = _log2_or_neg_inf(p)[seqs].sum(axis=1)
    H = entropy(p)
    mask = np.abs(-logp / n - H) <= delta + _MEMBER_SLACK
    return TypicalSet(n, delta, H, seqs[mask], float(np.sum(np.exp2(logp[mask]))))


def mean_within_probability(values, probs, n: int, center: float, delta: float) -> float:
    """P(|mean of n i.i.d. draws of ``values`` - center| <= delta), by type enumeration."""
    values = np.asarray(values, dtype=float)
    probs = np.asarray(probs, dtype=float)
    keep = probs > 0
    values, probs = values[keep], probs[keep]
    # merge symbols sharing a value: fewer types, same distribution of the mean
    uniq, inv = np.unique(np.round(values, 12), return_inverse=True)
    merged = np.bincount(inv, weights=probs)
    vals = np.array([values[inv == j][0] for j in range(len(uniq))])
    total = 0.0
    for counts in _compositions(n, len(vals)):
        c = np.array(counts)
        if abs(float(c @ vals) / n - center) <= delta + _MEMBER_SLACK:
            log_mult = math.lgamma(n + 1) - sum(math.lgamma(k + 1) for k in counts)
            total += math.exp(log_mult + float(c @ np.log(merged)))
    return total


def _compositions(n: int, parts: int):
    if parts == 1:
        yield (n,)
        return
    for first in range(n + 1):
        for rest in _compositions(n - first, parts - 1):
            yield (first,) + rest


def typical_probability(p, n: int, delta: float) -> float:
    p = as_distribution(p)
    nz = p[p > 0]
    return mean_within_probability(-np.log2(nz), nz, n, entropy(p), delta)


def _spectrum(rho: np.ndarray):
    """Eigenpairs sorted by descending eigenvalue, ties by original position."""
    rho = np.asarray(rho, dtype=complex)
    lam, vecs = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    lam = np.clip(lam, 0.0, None)
    order = sorted(range(len(lam)), key=lambda i: (-round(lam[i], 12), i))
    return lam[order], vecs[:, order]


@dataclass
class TypicalProjector:
    """Projector onto the span of typical eigenvector-label sequences.

    Stored implicitly: the per-position eigenbases and a mask over label
    sequences. ``matrix()`` materializes it for small dimensions.
    """

    n: int
    delta: float
    entropy: float
    eigvals: list
    eigvecs: list
    labels: np.ndarray
    mask: np.ndarray
    label_probs: np.ndarray

    @property
    def rank(self) -> int:
        return int(self.mask.sum())

    @property
    def dim(self) -> int:
        return int(np.prod([len(v) for v in self.eigvals]))

    @property
    def mass(self) -> float:
        """``Tr{Pi rho_{x^n}}``: total weight of the typical labels."""
        return float(self.label_probs[self.mask].sum())

    @property
    def rank_bound(self) -> float:
        return 2.0 ** (self.n * (self.entropy + self.delta))

    @property
    def sandwich_bounds(self) -> tuple[float, float]:
        return 2.0 ** (-self.n * (self.entropy + self.delta)), 2.0 ** (-self.n * (self.entropy - self.delta))

    def typical_eigenvalues(self) -> np.ndarray:
        return self.label_probs[self.mask]

    def rank_ok(self) -> bool:
        return self.rank <= self.rank_bound * (1 + 1e-12)

    def sandwich_ok(self) -> bool:
        ev = self.typical_eigenvalues()
        if ev.size == 0:
            return True
        lo, hi = self.sandwich_bounds
        return bool(ev.min() >= lo * (1 - 1e-9) and ev.max() <= hi * (1 + 1e-9))

    def _dense_guard(self):
        if self.dim > MAX_DENSE_DIM:
            raise ResourceError(f"dense projector of dimension {self.dim} exceeds {MAX_DENSE_DIM}")

    def state_matrix(self) -> np.ndarray:
        """The n-fold state ``rho_{x_1} (x) ... (x) rho_{x_n}`` as a dense matrix."""
        self._dense_guard()
        out = np.ones((1, 1), dtype=complex)
        for lam, vecs in zip(self.eigvals, self.eigvecs):
            out = np.kron(out, (vecs * lam) @ vecs.conj().T)
        return out

    def matrix(self) -> np.ndarray:
        self._dense_guard()
        cols = np.ones((1, 1), dtype=complex)
        for vecs in self.eigvecs:
            cols = np.kron(cols, vecs)
        W = cols[:, self.mask]
        return W @ W.conj().T

    def dense_checks(self, tol: float = 1e-9) -> dict:
        """Operator-level checks of idempotence, rank and the sandwich bound."""
        P = self.matrix()
        R = self.state_matrix()
        PRP = P @ R @ P
        lo, hi = self.sandwich_bounds
        scale = max(hi, 1e-300)
        return {
            "idempotent": bool(np.allclose(P @ P, P, atol=tol)),
            "trace": float(np.real(np.trace(P))),
            "mass": float(np.real(np.trace(P @ R))),
            "lower_ok": bool(np.linalg.eigvalsh(PRP - lo * P)[0] >= -tol * scale),
            "upper_ok": bool(np.linalg.eigvalsh(hi * P - PRP)[0] >= -tol * scale),
        }

    def diagnostics(self) -> list[dict]:
        lo, hi = self.sandwich_bounds
        ev = self.typical_eigenvalues()
        return [
            {"property": "typical_mass", "n": self.n, "delta": self.delta, "value": self.mass},
            {"property": "rank_bound", "n": self.n, "delta": self.delta, "value": self.rank,
             "bound": self.rank_bound, "holds": self.rank_ok()},
            {"property": "eigenvalue_sandwich", "n": self.n, "delta": self.delta,
             "min_eigenvalue": float(ev.min()) if ev.size else None,
             "max_eigenvalue": float(ev.max()) if ev.size else None,
             "lower": lo, "upper": hi, "holds": self.sandwich_ok()},
        ]


def _build(spectra, entropy_value: float, n: int, delta: float) -> TypicalProjector:
    d = int(np.prod([len(lam) for lam, _ in spectra]))
    if d > MAX_SUBSPACE_DIM:
        raise ResourceError(f"Hilbert dimension {d} exceeds the limit {MAX_SUBSPACE_DIM}")
    labels = _all_sequences(len(spectra[0][0]), n) if spectra else np.zeros((1, 0), int)
    logp = np.zeros(len(labels))
    for i, (lam, _) in enumerate(spectra):
        logp += _log2_or_neg_inf(lam)[labels[:, i]]
    mask = np.abs(-logp / n - entropy_value) <= delta + _MEMBER_SLACK
    return TypicalProjector(
        n=n, delta=delta, entropy=entropy_value,
        eigvals=[lam for lam, _ in spectra], eigvecs=[v for _, v in spectra],
        labels=labels, mask=mask, label_probs=np.exp2(logp),
    )


def typical_projector(rho, n: int, delta: float) -> TypicalProjector:
    """Weak typical projector of ``rho^{(x) n}``."""
    lam, vecs = _spectrum(rho)
    if lam.size ** n > MAX_SUBSPACE_DIM:
        raise ResourceError(f"{lam.size}^{n} exceeds the limit {MAX_SUBSPACE_DIM}")
    return _build([(lam, vecs)] * n, entropy(lam / lam.sum()), n, delta)


def conditional_entropy(states, px) -> float:
    """``H(Y|X)`` where ``p(y|x)`` is the spectrum of ``states[x]``."""
    px = as_distribution(px)
    return float(sum(px[x] * entropy(_spectrum(s)[0]) for x, s in enumerate(states) if px[x] > 0))


def cond_typical_projector(states, px, xn, delta: float) -> TypicalProjector:
    """Weak conditionally typical projector of ``rho_{x_1} (x) ... (x) rho_{x_n}``.

    ``px`` fixes the conditional entropy ``H(Y|X)`` that sample conditional
    entropies are compared against.
    """
    xn = [int(x) for x in xn]
    spectra = [_spectrum(s) for s in states]
    d = spectra[0][0].size
    if d ** len(xn) > MAX_SUBSPACE_DIM:
        raise ResourceError(f"{d}^{len(xn)} exceeds the limit {MAX_SUBSPACE_DIM}")
    return _build([spectra[x] for x in xn], conditional_entropy(states, px), len(xn), delta)


def expected_typical_mass(states, px, n: int, delta: float) -> float:
    """``E_{X^n} Tr{Pi_{rho_{X^n}} rho_{X^n}}`` in closed form over types."""
    px = as_distribution(px)
    values, probs = [], []
    for x, s in enumerate(states):
        lam = _spectrum(s)[0]
        for l in lam:
            if px[x] > 0 and l > 0:
                values.append(-math.log2(l))
                probs.append(px[x] * l)
    return mean_within_probability(values, probs, n, conditional_entropy(states, px), delta)
