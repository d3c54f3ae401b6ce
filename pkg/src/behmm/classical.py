"""Classical Markov chain reference and the diagonal-restriction checks."""
from dataclasses import dataclass

import numpy as np

from .entangled import channel_from_pair_map
from .errors import DimensionMismatch, EmptyWord, IndexOutOfRange
from .joint import hidden_expectation
from .matrix import matrix_unit, max_norm


def as_diagonal_word(indices, d):
    idx = [int(j) for j in indices]
    if not idx:
        raise EmptyWord("diagonal word is empty")
    for m, j in enumerate(idx):
        if not 0 <= j < d:
            raise IndexOutOfRange(f"word[{m}] = {j} out of range for d={d}")
    return idx


def classical_markov_probability(model, word):
    """``pi[j_0] * prod_m Pi[j_m, j_{m+1}]`` for a path of hidden states."""
    idx = as_diagonal_word(word, model.d)
    p = float(model.pi[idx[0]])
    for a, b in zip(idx, idx[1:]):
        p *= float(model.Pi[a, b])
    return p


@dataclass(frozen=True)
class DiagonalRestriction:
    quantum: float
    classical: float
    defect: float


def diagonal_restriction_check(model, word, channel=None):
    """Compare the underlying chain on diagonal matrix units with the classical path law."""
    idx = as_diagonal_word(word, model.d)
    ch = channel if channel is not None else channel_from_pair_map(model, "O_underlying")
    value = hidden_expectation(model.W0, ch, [matrix_unit(j, j, model.d) for j in idx])
    classical = classical_markov_probability(model, idx)
    return DiagonalRestriction(value.real, classical, abs(value - classical))


@dataclass(frozen=True)
class DiagonalClosure:
    image_offdiag_norm: float
    image_diag: np.ndarray
    expected_diag: np.ndarray

    @property
    def diag_defect(self):
        return max_norm(self.image_diag - self.expected_diag)


def diagonal_closure_check(model, x, y, channel=None):
    """Apply the underlying transition expectation to ``diag(x) (x) diag(y)``.

    The image should be diagonal with entries ``x_i * (Pi @ y)_i``.
    """
    d = model.d
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    for name, v in (("x", x), ("y", y)):
        if v.shape != (d,):
            raise DimensionMismatch(f"{name}: expected length {d}, got shape {v.shape}")
    ch = channel if channel is not None else channel_from_pair_map(model, "O_underlying")
    image = ch.apply_pair(np.diag(x), np.diag(y))
    off = image - np.diag(np.diag(image))
    return DiagonalClosure(max_norm(off), np.diag(image).copy(), x * (model.Pi @ y))
