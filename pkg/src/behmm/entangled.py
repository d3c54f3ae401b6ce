"""Entangled Markov operators built from a classical hidden Markov model.

Given row-stochastic ``P``, the entangled operator acts on ``A = (a_kl)`` by

    P(A)_ij = sum_{k,l} sqrt(P_ik P_jl) a_kl

and the three maps of interest are Schur products against such images:

    E_H(a (x) b)       = a <> P_H(b)
    E_HO(a (x) b)      = a <> P_HO(b)
    E_H^(O)(a (x) b)   = a <> P_HO(id) <> P_H(b)     (underlying hidden chain)

where ``<>`` is the entrywise product, ``P_H`` is built from the hidden
transition matrix and ``P_HO`` from the emission matrix.

Channels M_{D} -> M_d are stored by a Choi-type matrix with the packing

    L(x)_ij = sum_{k,l} choi[i*D + k, j*D + l] * x_kl

i.e. rows pack (output row i, input row k) and columns pack (output col j,
input col l). This is a simultaneous row/column permutation of the usual Choi
matrix, so it is PSD exactly when the map is completely positive.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NotCP, NotDensity, NotStochastic, NotUnital
from .matrix import EPS_EQ, PSD_FLOOR, as_matrix, frozen, is_hermitian, kron, max_norm, min_eigenvalue, schur_product

EPS_STOCH = 1e-9


def check_stochastic(P, name="P", renormalize=False, tol=EPS_STOCH):
    """Return ``P`` as a validated real row-stochastic array.

    Entries that are negative within ``tol`` are clamped to zero. Rows that miss
    unit sum are rejected unless ``renormalize`` is set.
    """
    arr = np.array(P, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise NotStochastic(f"{name}: expected a non-empty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NotStochastic(f"{name}: entries must be finite")
    neg = np.argwhere(arr < -tol)
    if len(neg):
        i, j = neg[0]
        raise NotStochastic(f"{name}[{i}][{j}] = {arr[i, j]!r} is negative")
    arr = np.clip(arr, 0.0, None)
    sums = arr.sum(axis=1)
    if renormalize:
        if np.any(sums <= 0):
            i = int(np.argmax(sums <= 0))
            raise NotStochastic(f"{name} row {i} has zero sum and cannot be renormalized")
        arr = arr / sums[:, None]
    else:
        bad = np.flatnonzero(np.abs(sums - 1.0) > tol)
        if len(bad):
            i = int(bad[0])
            raise NotStochastic(f"{name} row {i} sums to {sums[i]!r}, expected 1")
    return arr


def check_distribution(pi, d, name="pi", renormalize=False, tol=EPS_STOCH):
    vec = np.array(pi, dtype=float)
    if vec.shape != (d,):
        raise DimensionMismatch(f"{name}: expected length {d}, got shape {vec.shape}")
    if not np.all(np.isfinite(vec)):
        raise NotStochastic(f"{name}: entries must be finite")
    neg = np.flatnonzero(vec < -tol)
    if len(neg):
        raise NotStochastic(f"{name}[{neg[0]}] = {vec[neg[0]]!r} is negative")
    vec = np.clip(vec, 0.0, None)
    total = vec.sum()
    if renormalize and total > 0:
        vec = vec / total
    elif abs(total - 1.0) > tol:
        raise NotStochastic(f"{name} sums to {total!r}, expected 1")
    return vec


def check_density(W, d, name="W0"):
    W = as_matrix(W, d, name)
    if not is_hermitian(W):
        raise NotDensity(f"{name}: not Hermitian")
    tr = np.trace(W)
    if abs(tr - 1.0) > EPS_STOCH:
        raise NotDensity(f"{name}: trace is {tr.real!r}, expected 1")
    lam = min_eigenvalue(W)
    if lam < PSD_FLOOR:
        raise NotDensity(f"{name}: not positive semidefinite (min eigenvalue {lam!r})")
    return W


@dataclass(frozen=True)
class HiddenModel:
    """The triple (pi, Pi, Q) with its initial density ``W0``.

    ``W0`` defaults to ``diag(pi)``; an explicit density may override it.
    Use :meth:`create` to build a validated instance.
    """

    pi: np.ndarray
    Pi: np.ndarray
    Q: np.ndarray
    W0: np.ndarray
    sqrt_Pi: np.ndarray = field(repr=False, compare=False)
    sqrt_Q: np.ndarray = field(repr=False, compare=False)

    @classmethod
    def create(cls, pi, Pi, Q, W0=None, renormalize=False):
        Pi = check_stochastic(Pi, "Pi", renormalize)
        d = Pi.shape[0]
        Q = check_stochastic(Q, "Q", renormalize)
        if Q.shape != Pi.shape:
            raise DimensionMismatch(f"Q: expected {d}x{d}, got {Q.shape[0]}x{Q.shape[1]}")
        pi = check_distribution(pi, d, "pi", renormalize)
        if W0 is None:
            W0 = np.diag(pi).astype(complex)
        else:
            W0 = check_density(W0, d)
        return cls(frozen(pi), frozen(Pi), frozen(Q), frozen(W0), frozen(np.sqrt(Pi)), frozen(np.sqrt(Q)))

    @property
    def d(self):
        return self.Pi.shape[0]

    def __eq__(self, other):
        if not isinstance(other, HiddenModel):
            return NotImplemented
        return all(np.array_equal(getattr(self, k), getattr(other, k)) for k in ("pi", "Pi", "Q", "W0"))

    __hash__ = None


def _root(P):
    if isinstance(P, HiddenModel):
        raise TypeError("pass a stochastic matrix, not a model")
    return np.sqrt(np.clip(np.asarray(P, dtype=float), 0.0, None))


def apply_entangled(P, A):
    """The entangled operator of the stochastic matrix ``P`` applied to ``A``.

    Uses ``R A R^T`` with ``R`` the entrywise square root of ``P``, which is
    the quadruple sum ``sum_kl sqrt(P_ik P_jl) a_kl`` regrouped.
    """
    A = np.asarray(A)
    R = _root(P)
    if A.shape != R.shape:
        raise DimensionMismatch(f"apply_entangled: operator has shape {A.shape}, stochastic matrix {R.shape}")
    return R @ A @ R.T


def _check_pair(model, a, b):
    d = model.d
    for name, x in (("a", a), ("b", b)):
        if np.shape(x) != (d, d):
            raise DimensionMismatch(f"{name}: expected {d}x{d}, got shape {np.shape(x)}")


def transition_expectation_H(model, a, b):
    _check_pair(model, a, b)
    return schur_product(np.asarray(a), model.sqrt_Pi @ np.asarray(b) @ model.sqrt_Pi.T)


def emission_operator_HO(model, a, b):
    _check_pair(model, a, b)
    return schur_product(np.asarray(a), model.sqrt_Q @ np.asarray(b) @ model.sqrt_Q.T)


def emission_identity_image(model):
    """``P_HO(id)``; its diagonal is identically one."""
    return model.sqrt_Q @ model.sqrt_Q.T


def underlying_transition_expectation(model, a, b):
    _check_pair(model, a, b)
    return np.asarray(a) * emission_identity_image(model) * (model.sqrt_Pi @ np.asarray(b) @ model.sqrt_Pi.T)


PAIR_MAPS = {
    "H": transition_expectation_H,
    "HO": emission_operator_HO,
    "O_underlying": underlying_transition_expectation,
}


@dataclass(frozen=True)
class QuantumChannelMap:
    """A linear map M_{in_dim} -> M_{out_dim} stored by its Choi-type matrix."""

    in_dim: int
    out_dim: int
    choi: np.ndarray

    def __post_init__(self):
        n = self.in_dim * self.out_dim
        if np.shape(self.choi) != (n, n):
            raise DimensionMismatch(f"choi: expected {n}x{n}, got shape {np.shape(self.choi)}")
        object.__setattr__(self, "choi", frozen(np.asarray(self.choi, dtype=complex)))

    @classmethod
    def from_linear_map(cls, fn, in_dim, out_dim):
        """Tabulate an arbitrary linear map ``fn: M_in -> M_out`` on matrix units."""
        choi = np.zeros((out_dim, in_dim, out_dim, in_dim), dtype=complex)
        unit = np.zeros((in_dim, in_dim), dtype=complex)
        for k in range(in_dim):
            for l in range(in_dim):
                unit[k, l] = 1.0
                choi[:, k, :, l] = fn(unit.copy())
                unit[k, l] = 0.0
        return cls(in_dim, out_dim, choi.reshape(out_dim * in_dim, out_dim * in_dim))

    def __call__(self, x):
        x = np.asarray(x)
        if x.shape != (self.in_dim, self.in_dim):
            raise DimensionMismatch(f"channel input: expected {self.in_dim}x{self.in_dim}, got shape {x.shape}")
        c = self.choi.reshape(self.out_dim, self.in_dim, self.out_dim, self.in_dim)
        return np.einsum("ikjl,kl->ij", c, x)

    def apply_pair(self, a, b):
        """Evaluate on ``a (x) b``; requires ``in_dim == out_dim**2``."""
        if self.in_dim != self.out_dim ** 2:
            raise DimensionMismatch(f"apply_pair: channel input dimension {self.in_dim} is not {self.out_dim}^2")
        return self(kron(a, b))

    __hash__ = None


def channel_from_pair_map(model, which):
    """Materialize one of the pair maps as a channel on M_{d^2}.

    ``which`` is ``"H"``, ``"HO"`` or ``"O_underlying"``.
    """
    try:
        fn = PAIR_MAPS[which]
    except KeyError:
        raise ValueError(f"unknown channel {which!r}; expected one of {sorted(PAIR_MAPS)}") from None
    d = model.d
    choi = np.zeros((d, d, d, d, d, d), dtype=complex)  # (i, p, r, j, s, t)
    for p in range(d):
        for s in range(d):
            a = np.zeros((d, d), dtype=complex)
            a[p, s] = 1.0
            for r in range(d):
                for t in range(d):
                    b = np.zeros((d, d), dtype=complex)
                    b[r, t] = 1.0
                    choi[:, p, r, :, s, t] = fn(model, a, b)
    n = d ** 3
    return QuantumChannelMap(d * d, d, choi.reshape(n, n))


@dataclass(frozen=True)
class ValidationReport:
    cp: bool
    unital: bool
    min_choi_eigenvalue: float
    unitality_defect: float
    hermitian_choi: bool = True

    @property
    def ok(self):
        return self.cp and self.unital


def validate_channel(ch, floor=PSD_FLOOR, tol=EPS_EQ):
    herm = is_hermitian(ch.choi, tol)
    lam = min_eigenvalue(ch.choi)
    defect = max_norm(ch(np.eye(ch.in_dim)) - np.eye(ch.out_dim))
    return ValidationReport(
        cp=bool(herm and lam >= floor),
        unital=bool(defect <= tol),
        min_choi_eigenvalue=lam,
        unitality_defect=defect,
        hermitian_choi=bool(herm),
    )


def require_channel(ch, name="channel"):
    """Raise if ``ch`` is not a unital CP map on M_{d^2} -> M_d."""
    if ch.in_dim != ch.out_dim ** 2:
        raise DimensionMismatch(f"{name}: input dimension {ch.in_dim} is not {ch.out_dim}^2")
    rep = validate_channel(ch)
    if not rep.cp:
        raise NotCP(f"{name}: not completely positive (min Choi eigenvalue {rep.min_choi_eigenvalue!r})")
    if not rep.unital:
        raise NotUnital(f"{name}: not unital (defect {rep.unitality_defect!r})")
    return rep

