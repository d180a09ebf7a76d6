"""Sequential decoding for the pure-interference bosonic multiple-access channel."""

from . import coherent, discrete_mac, fock, gram_decoder, lemmas, rates, typicality
from .errors import ConditioningError, ResourceError, TruncationError

__all__ = [
    "coherent", "discrete_mac", "fock", "gram_decoder", "lemmas", "rates", "typicality",
    "ConditioningError", "ResourceError", "TruncationError",
]
__version__ = "0.1.0"
