"""Coherent-state amplitude algebra and Gaussian codebooks.

Amplitudes are plain Python/numpy complex numbers; a codeword is a 1-D
complex array with one entry per temporal mode.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

SENDER_A = 0
SENDER_B = 1


@dataclass(frozen=True)
class GaussianSource:
    """Circularly symmetric complex Gaussian with ``E|alpha|^2 = variance``."""

    variance: float
    seed: int

    def __post_init__(self):
        if not np.isfinite(self.variance) or self.variance < 0:
            raise ValueError(f"variance must be finite and >= 0, got {self.variance}")


@dataclass
class CodebookPair:
    """Codebooks of both senders; rows are codewords, columns are modes."""

    sender_a: np.ndarray
    sender_b: np.ndarray

    def __post_init__(self):
        self.sender_a = np.atleast_2d(np.asarray(self.sender_a, dtype=complex))
        self.sender_b = np.atleast_2d(np.asarray(self.sender_b, dtype=complex))
        if self.sender_a.shape[1] != self.sender_b.shape[1]:
            raise ValueError(
                f"codeword lengths differ: {self.sender_a.shape[1]} vs {self.sender_b.shape[1]}"
            )
        if self.sender_a.shape[0] < 1 or self.sender_b.shape[0] < 1 or self.n < 1:
            raise ValueError("codebooks need at least one codeword of at least one mode")
        if not (np.all(np.isfinite(self.sender_a)) and np.all(np.isfinite(self.sender_b))):
            raise ValueError("codeword amplitudes must be finite")

    @property
    def n(self) -> int:
        return self.sender_a.shape[1]

    @property
    def sizes(self) -> tuple[int, int]:
        return self.sender_a.shape[0], self.sender_b.shape[0]

    def to_json(self) -> str:
        def enc(book):
            return [[{"re": float(z.real), "im": float(z.imag)} for z in row] for row in book]

        return json.dumps({"n": self.n, "sender_a": enc(self.sender_a), "sender_b": enc(self.sender_b)})

    @classmethod
    def from_json(cls, text: str) -> "CodebookPair":
        data = json.loads(text)

        def dec(rows):
            return np.array([[complex(z["re"], z["im"]) for z in row] for row in rows], dtype=complex)

        cb = cls(dec(data["sender_a"]), dec(data["sender_b"]))
        if cb.n != data["n"]:
            raise ValueError(f"declared n={data['n']} but codewords have {cb.n} modes")
        return cb


def overlap(a, b) -> complex:
    """Inner product <a|b> of two multimode coherent states.

    Evaluated as a single exponential of the summed per-mode exponents so
    long codewords do not underflow mode by mode.
    """
    a = np.atleast_1d(np.asarray(a, dtype=complex))
    b = np.atleast_1d(np.asarray(b, dtype=complex))
    if a.shape != b.shape:
        raise ValueError(f"codeword lengths differ: {a.shape} vs {b.shape}")
    exponent = np.sum(-0.5 * np.abs(a) ** 2 - 0.5 * np.abs(b) ** 2 + np.conj(a) * b)
    return complex(np.exp(exponent))


def mix_output(eta: float, alpha, beta):
    """Output amplitude ``sqrt(eta) alpha + sqrt(1 - eta) beta`` of the beamsplitter.

    Works elementwise on arrays, so whole codewords can be mixed at once.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must lie in [0, 1], got {eta}")
    return np.sqrt(eta) * np.asarray(alpha, dtype=complex) + np.sqrt(1.0 - eta) * np.asarray(
        beta, dtype=complex
    )


def _codeword_stream(seed: int, sender: int, message: int) -> np.random.Generator:
    # One independent stream per (sender, message): codeword i never depends on
    # how many other codewords are drawn or in which order.
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(sender, message)))


def sample_codewords(src: GaussianSource, size: int, n: int, sender: int = SENDER_A) -> np.ndarray:
    if size < 1 or n < 1:
        raise ValueError(f"need size >= 1 and n >= 1, got size={size}, n={n}")
    out = np.empty((size, n), dtype=complex)
    scale = np.sqrt(src.variance / 2.0)
    for m in range(size):
        re_im = _codeword_stream(src.seed, sender, m).standard_normal((n, 2))
        out[m] = scale * (re_im[:, 0] + 1j * re_im[:, 1])
    return out


def sample_codebook(src_a: GaussianSource, src_b: GaussianSource, sizes: tuple[int, int], n: int) -> CodebookPair:
    """Draw i.i.d. Gaussian codebooks for both senders.

    Real and imaginary parts are N(0, variance / 2) so that each amplitude
    has mean photon number ``variance``. Identical sources give identical
    codebooks; the two senders never share a stream even with equal seeds.
    """
    return CodebookPair(
        sample_codewords(src_a, sizes[0], n, SENDER_A),
        sample_codewords(src_b, sizes[1], n, SENDER_B),
    )


def mean_photon(codewords) -> float:
    cw = np.asarray(codewords, dtype=complex)
    if cw.size == 0:
        raise ValueError("mean photon number of an empty codebook is undefined")
    return float(np.mean(np.abs(cw) ** 2))
