"""Joint expectations of finite operator words.

A word ``[(a_0, b_0), ..., (a_n, b_n)]`` stands for the cylinder element
``prod_m j_{H_m}(a_m) j_{O_m}(b_m)``; a hidden word ``[a_0, ..., a_n]`` for
``prod_m j_{H_m}(a_m)``. All nested evaluations run right to left, starting
from the identity at site ``n + 1``.
"""
import string

import numpy as np

from .entangled import check_density
from .errors import BudgetExceeded, DimensionMismatch, EmptyWord

SUMMAND_BUDGET = 1e8


def as_word(word, d):
    """Validate an operator word as a list of ``(a, b)`` complex array pairs."""
    pairs = list(word)
    if not pairs:
        raise EmptyWord("operator word is empty")
    out = []
    for m, pair in enumerate(pairs):
        try:
            a, b = pair
        except (TypeError, ValueError):
            raise DimensionMismatch(f"word[{m}]: expected an (a, b) pair") from None
        a = np.asarray(a, dtype=complex)
        b = np.asarray(b, dtype=complex)
        for name, x in (("a", a), ("b", b)):
            if x.shape != (d, d):
                raise DimensionMismatch(f"word[{m}].{name}: expected {d}x{d}, got shape {x.shape}")
        out.append((a, b))
    return out


def as_hidden_word(word, d):
    mats = [np.asarray(a, dtype=complex) for a in word]
    if not mats:
        raise EmptyWord("hidden word is empty")
    for m, a in enumerate(mats):
        if a.shape != (d, d):
            raise DimensionMismatch(f"word[{m}]: expected {d}x{d}, got shape {a.shape}")
    return mats


def joint_expectation_bi(model, word):
    """Joint expectation of the bi-entangled model on an operator word.

    Runs the recursion ``Y <- a_m <> P_HO(b_m) <> P_H(Y)`` from ``Y = id`` and
    returns ``Tr(W0 Y_0)``. Cost is O(n d^3).
    """
    d = model.d
    sP, sQ = model.sqrt_Pi, model.sqrt_Q
    y = np.eye(d, dtype=complex)
    for a, b in reversed(as_word(word, d)):
        y = a * (sQ @ b @ sQ.T) * (sP @ y @ sP.T)
    return complex(np.trace(model.W0 @ y))


def _check_budget(d, n_indices, budget):
    count = float(d) ** n_indices
    if count > budget:
        raise BudgetExceeded(f"explicit sum has {count:.3g} summands, budget is {budget:.3g}")


def joint_expectation_oracle(model, word, budget=SUMMAND_BUDGET):
    """Joint expectation as one flat sum over every hidden and emission index.

    Expanding the recursion of :func:`joint_expectation_bi` one Schur product
    and one entangled operator at a time gives, with ``(k_0, l_0) = (i, j)``,

        sum  W0[j, i] * prod_{m=0}^{n} [ a_m[k_m, l_m]
                                         sqrt(Q[k_m, o_m] Q[l_m, o'_m]) b_m[o_m, o'_m] ]
                      * prod_{m=1}^{n} sqrt(Pi[k_{m-1}, k_m] Pi[l_{m-1}, l_m])
                      * sqrt(Pi[k_n, h] Pi[l_n, h])

    over ``d**(4n + 5)`` index tuples. The per-site factors are tabulated by
    broadcasting, and a single unoptimized ``einsum`` then walks the whole
    index space; no partial sums are shared between terms.
    """
    d = model.d
    pairs = as_word(word, d)
    n = len(pairs) - 1
    _check_budget(d, 4 * n + 5, budget)
    sP, sQ = model.sqrt_Pi, model.sqrt_Q
    letters = iter(string.ascii_letters)
    k = [next(letters) for _ in range(n + 1)]
    l = [next(letters) for _ in range(n + 1)]
    o = [next(letters) for _ in range(n + 1)]
    op = [next(letters) for _ in range(n + 1)]
    h = next(letters)

    operands, subscripts = [], []
    for m, (a, b) in enumerate(pairs):
        # factors of site m over (k_m, l_m, o_m, o'_m)
        site = a[:, :, None, None] * sQ[:, None, :, None] * sQ[None, :, None, :] * b[None, None, :, :]
        if m == 0:
            operands.append(site * model.W0.T[:, :, None, None])
            subscripts.append(k[0] + l[0] + o[0] + op[0])
        else:
            # prepend the hidden link (k_{m-1}, l_{m-1}) -> (k_m, l_m)
            link = sP[:, None, :, None] * sP[None, :, None, :]
            operands.append(link[:, :, :, :, None, None] * site[None, None])
            subscripts.append(k[m - 1] + l[m - 1] + k[m] + l[m] + o[m] + op[m])
    operands.append(sP[:, None, :] * sP[None, :, :])
    subscripts.append(k[n] + l[n] + h)
    expr = ",".join(subscripts) + "->"
    return complex(np.einsum(expr, *operands, optimize=False))


def e0_of_word(te, word):
    """Nested compression ``E(a_0 (x) E(a_1 (x) ... E(a_n (x) id)...))``."""
    d = te.out_dim
    y = np.eye(d, dtype=complex)
    for a in reversed(as_hidden_word(word, d)):
        y = te.apply_pair(a, y)
    return y


def _trace_against(init, x):
    return complex(np.trace(init @ x))


def joint_expectation_generic(init, te, em, word):
    """Joint expectation of the hidden quantum Markov model ``(init, te, em)``.

    Evaluates ``te(em(a_m (x) b_m) (x) Y)`` from the right with ``Y = id``
    and traces the result against the density ``init``.
    """
    d = te.out_dim
    if em.out_dim != d:
        raise DimensionMismatch(f"emission output dimension {em.out_dim} differs from transition dimension {d}")
    init = check_density(init, d, "init")
    y = np.eye(d, dtype=complex)
    for a, b in reversed(as_word(word, d)):
        y = te.apply_pair(em.apply_pair(a, b), y)
    return _trace_against(init, y)


def hidden_expectation(init, te, word):
    """Expectation of a hidden word in the Markov chain ``(init, te)``."""
    init = check_density(init, te.out_dim, "init")
    return _trace_against(init, e0_of_word(te, word))


def hidden_lemma_formula(model, word, budget=SUMMAND_BUDGET):
    """Nested ``E_H`` compression of a hidden word as an explicit index sum.

    For ``word = [a_0, ..., a_r]`` the entry ``(k_0, l_0)`` of the result is

        sum  prod_{m=0}^{r-1} sqrt(Pi[k_m, k_{m+1}] Pi[l_m, l_{m+1}]) a_m[k_m, l_m]
             * a_r[k_r, l_r] * sum_j sqrt(Pi[k_r, j] Pi[l_r, j])

    over the chains ``k_1..k_r``, ``l_1..l_r`` and the terminal ``j``.
    """
    d = model.d
    mats = as_hidden_word(word, d)
    r = len(mats) - 1
    _check_budget(d, 2 * r + 3, budget)
    sP = model.sqrt_Pi
    letters = iter(string.ascii_letters)
    k = [next(letters) for _ in range(r + 1)]
    l = [next(letters) for _ in range(r + 1)]
    j = next(letters)
    operands, subscripts = [], []
    for m, a in enumerate(mats):
        operands.append(a)
        subscripts.append(k[m] + l[m])
        if m < r:
            operands.append(sP[:, None, :, None] * sP[None, :, None, :])
            subscripts.append(k[m] + l[m] + k[m + 1] + l[m + 1])
    operands.append(sP[:, None, :] * sP[None, :, :])
    subscripts.append(k[r] + l[r] + j)
    expr = ",".join(subscripts) + "->" + k[0] + l[0]
    return np.einsum(expr, *operands, optimize=False)
