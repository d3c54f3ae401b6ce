"""Stopping times, accessibility and recurrence of a quantum Markov chain.

For a projection ``e`` with complement ``f = id - e``:

* ``stopping_time_word(e, k)`` is ``(f, ..., f, e)`` with ``k`` copies of ``f``:
  the event ``e`` happens for the first time at step ``k``;
* ``tail_word(e, n)`` is ``n + 1`` copies of ``f``: ``e`` has not happened up
  to step ``n``.

Their nested compressions satisfy, for every horizon ``N``,

    sum_{n <= N} E0(stopping_time_word(e, n)) + E0(tail_word(e, N)) = id

and recurrence diagnostics are finite-horizon truncations of the limits that
define it. Nothing is extrapolated past the horizon unless a geometric decay
certificate is available.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from .entangled import channel_from_pair_map, require_channel
from .errors import DegenerateTrace, UndefinedRecurrence
from .joint import e0_of_word
from .matrix import EPS_EQ, as_projection, complement, max_norm

NUMERICAL_RESIDUAL = 1e-8
DECAY_RATIO = 0.99
DECAY_WINDOW = 5
# residuals at or below this are treated as exact zeros in the decay test
ROUNDOFF = 1e-14
BOUND_SLACK = 1e-9


def q_value(e):
    """Sum of absolute entries of ``id - e``."""
    return float(np.abs(complement(np.asarray(e, dtype=complex))).sum())


def stopping_time_word(e, k):
    if k < 0:
        raise ValueError(f"k must be non-negative, got {k}")
    e = np.asarray(e, dtype=complex)
    return [complement(e)] * k + [e]


def tail_word(e, n):
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    return [complement(np.asarray(e, dtype=complex))] * (n + 1)


def _tails(te, f, N):
    """``E0(tail_word(e, n))`` for n = 0..N, built by prepending ``f``."""
    d = te.out_dim
    out = []
    y = np.eye(d, dtype=complex)
    for _ in range(N + 1):
        y = te.apply_pair(f, y)
        out.append(y)
    return out


def _first_hits(te, e, f, N):
    """``E0(stopping_time_word(e, n))`` for n = 0..N."""
    d = te.out_dim
    out = []
    y = te.apply_pair(e, np.eye(d, dtype=complex))
    out.append(y)
    for _ in range(N):
        y = te.apply_pair(f, y)
        out.append(y)
    return out


@dataclass(frozen=True)
class CompleteAccessibility:
    accessible: bool
    residual_norms: list


def complete_accessibility(te, e, N, tol=NUMERICAL_RESIDUAL):
    """Finite-horizon test that ``E0(tail_word(e, n))`` vanishes.

    ``accessible`` requires the last residual to be at most ``tol`` and the
    max-norm sequence to be non-increasing over the last ``ceil(N / 2)``
    steps. For a positive unital ``te`` the compressions form a decreasing
    sequence of positive operators, so a rising norm flags a broken channel.
    """
    require_channel(te, "transition expectation")
    e = as_projection(e, te.out_dim)
    if N < 1:
        raise ValueError(f"horizon must be at least 1, got {N}")
    norms = [max_norm(t) for t in _tails(te, complement(e), N)]
    window = norms[-(math.ceil(N / 2) + 1):]
    monotone = all(b <= a + EPS_EQ for a, b in zip(window, window[1:]))
    return CompleteAccessibility(bool(norms[-1] <= tol and monotone), norms)


@dataclass(frozen=True)
class RecurrenceReport:
    q: float
    q_threshold: float
    bound_certified: bool
    residual_sequence: list
    partition_defect: float
    phi_e: float
    verdict: str
    bounds: list = field(default_factory=list)
    bound_holds: bool = True
    phi_normalized_sum: float = float("nan")
    tail_bound: float = None


def _decaying(residuals):
    tail = residuals[-(DECAY_WINDOW + 1):]
    return all(b <= ROUNDOFF or b <= DECAY_RATIO * a for a, b in zip(tail, tail[1:]))


def phi_recurrence_report(model, e, N, strict=True):
    """Recurrence diagnostics of ``e`` for the underlying hidden chain of ``model``.

    The chain is ``(W0, E_H^(O))``. Residuals are

        r_n = |phi(e (x) tail_word(e, n))|,   n = 1..N

    and when ``q = sum |(id - e)_ij| < 1/d`` each is checked against the
    geometric bound ``d**2 * (d*q)**(n-1)``. Raises UndefinedRecurrence when
    ``phi(e)`` vanishes, unless ``strict`` is False, in which case the report
    carries ``verdict="undefined"``.
    """
    d = model.d
    e = as_projection(e, d)
    f = complement(e)
    ch = channel_from_pair_map(model, "O_underlying")
    W0 = model.W0

    def phi(x):
        return complex(np.trace(W0 @ x))

    id_d = np.eye(d, dtype=complex)
    phi_e = phi(ch.apply_pair(e, id_d)).real
    q = q_value(e)
    certified = q < 1.0 / d
    if phi_e <= EPS_EQ:
        if strict:
            raise UndefinedRecurrence(f"phi(e) = {phi_e!r} vanishes; recurrence is undefined")
        return RecurrenceReport(q, 1.0 / d, certified, [], float("nan"), phi_e, "undefined")

    tails = _tails(ch, f, N)
    hits = _first_hits(ch, e, f, N)
    residuals = [abs(phi(ch.apply_pair(e, tails[n]))) for n in range(1, N + 1)]
    partition_defect = max_norm(sum(hits) + tails[N] - id_d)
    returns = sum(phi(ch.apply_pair(e, h)) for h in hits).real
    normalized = returns / phi_e

    if certified:
        bounds = [d ** 2 * (d * q) ** (n - 1) for n in range(1, N + 1)]
        bound_holds = all(r <= b * (1 + BOUND_SLACK) for r, b in zip(residuals, bounds))
        tail_bound = d ** 2 * (d * q) ** N / (1 - d * q)
    else:
        bounds, bound_holds, tail_bound = [], True, None

    if certified and bound_holds:
        verdict = "recurrent_certified"
    elif residuals[-1] <= NUMERICAL_RESIDUAL and _decaying(residuals):
        verdict = "recurrent_numerical"
    else:
        verdict = "inconclusive"
    return RecurrenceReport(
        q=q,
        q_threshold=1.0 / d,
        bound_certified=certified,
        residual_sequence=residuals,
        partition_defect=partition_defect,
        phi_e=phi_e,
        verdict=verdict,
        bounds=bounds,
        bound_holds=bound_holds,
        phi_normalized_sum=normalized,
        tail_bound=tail_bound,
    )


@dataclass(frozen=True)
class ERecurrenceCheck:
    lhs: float
    satisfied: bool
    residual: float


def e_recurrence_check(te, e, N, tol=NUMERICAL_RESIDUAL):
    """Truncated normalized return sum for ``te``-recurrence of ``e``.

    ``lhs = Tr(sum_{n <= N} E0(e, stopping_time_word(e, n))) / Tr(te(e (x) id))``
    and ``residual = ||te(e (x) E0(tail_word(e, N)))||_max``; both must be
    within ``tol`` of their limits 1 and 0.
    """
    d = te.out_dim
    e = as_projection(e, d)
    f = complement(e)
    denom = np.trace(te.apply_pair(e, np.eye(d))).real
    if denom <= EPS_EQ:
        raise DegenerateTrace(f"Tr(E(e (x) id)) = {denom!r}; normalized return sum is undefined")
    total = sum(te.apply_pair(e, h) for h in _first_hits(te, e, f, N))
    lhs = float(np.trace(total).real / denom)
    residual = max_norm(te.apply_pair(e, _tails(te, f, N)[-1]))
    return ERecurrenceCheck(lhs, bool(abs(lhs - 1) <= tol and residual <= tol), residual)


@dataclass(frozen=True)
class Accessibility:
    accessible: bool
    first_m: int = None


def accessibility(te, e, f, M):
    """Smallest ``m <= M`` with ``E0(e, id, ..., id, f)`` nonzero (``m - 1`` identities)."""
    d = te.out_dim
    e = as_projection(e, d, "e")
    f = as_projection(f, d, "f")
    id_d = np.eye(d, dtype=complex)
    for m in range(1, M + 1):
        if max_norm(e0_of_word(te, [e] + [id_d] * (m - 1) + [f])) > EPS_EQ:
            return Accessibility(True, m)
    return Accessibility(False, None)


def communicates(te, e, f, M):
    return accessibility(te, e, f, M).accessible and accessibility(te, f, e, M).accessible
