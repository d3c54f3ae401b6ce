import itertools

import numpy as np
import pytest
from helpers import random_complex, random_hermitian, random_model, random_psd, random_word

from behmm.entangled import HiddenModel, QuantumChannelMap, channel_from_pair_map
from behmm.errors import BudgetExceeded, DimensionMismatch, EmptyWord, NotDensity
from behmm.joint import (
    e0_of_word,
    hidden_expectation,
    hidden_lemma_formula,
    joint_expectation_bi,
    joint_expectation_generic,
    joint_expectation_oracle,
)
from behmm.matrix import matrix_unit


def underlying_e0_sum(model, word):
    """Nested compression of the underlying chain by explicit loops over every index.

    result[i, j] = sum a_0[i,j] a_1[k1,l1] ... a_n[kn,ln]
                   sqrt(Q[i,o1] Q[j,o1]) sqrt(Pi[i,k1] Pi[j,l1])
                   prod_{m=1..n} sqrt(Q[km,o_{m+1}] Q[lm,o_{m+1}])
                   prod_{m=1..n-1} sqrt(Pi[km,k_{m+1}] Pi[lm,l_{m+1}])
                   sqrt(Pi[kn,h] Pi[ln,h])
    """
    d = model.d
    Q, Pi = model.Q, model.Pi
    n = len(word) - 1
    out = np.zeros((d, d), dtype=complex)
    for i, j in itertools.product(range(d), repeat=2):
        total = 0.0
        for ks in itertools.product(range(d), repeat=n):
            for ls in itertools.product(range(d), repeat=n):
                for os_ in itertools.product(range(d), repeat=n + 1):
                    for h in range(d):
                        kk = (i,) + ks
                        ll = (j,) + ls
                        term = 1.0 + 0j
                        for m in range(n + 1):
                            term *= word[m][kk[m], ll[m]] * np.sqrt(Q[kk[m], os_[m]] * Q[ll[m], os_[m]])
                        for m in range(n):
                            term *= np.sqrt(Pi[kk[m], kk[m + 1]] * Pi[ll[m], ll[m + 1]])
                        term *= np.sqrt(Pi[kk[n], h] * Pi[ll[n], h])
                        total += term
        out[i, j] = total
    return out


def test_all_identity_word_gives_one():
    rng = np.random.default_rng(20)
    for d in (1, 2, 3):
        model = random_model(rng, d)
        word = [(np.eye(d), np.eye(d))] * 4
        assert joint_expectation_bi(model, word) == pytest.approx(1.0, abs=1e-12)
        assert joint_expectation_oracle(model, word[:3]) == pytest.approx(1.0, abs=1e-12)


def test_scalar_model_is_a_product():
    model = HiddenModel.create([1.0], [[1.0]], [[1.0]])
    rng = np.random.default_rng(21)
    word = [(random_complex(rng, 1), random_complex(rng, 1)) for _ in range(3)]
    expected = np.prod([a[0, 0] * b[0, 0] for a, b in word])
    assert joint_expectation_bi(model, word) == pytest.approx(expected, rel=1e-12)
    assert joint_expectation_oracle(model, word) == pytest.approx(expected, rel=1e-12)


def test_oracle_hand_expansion():
    # only i = j = 0 survives; sum_o Q[0,o] = 1 and sum_h Pi[0,h] = 1
    model = HiddenModel.create([0.3, 0.7], [[0.2, 0.8], [0.6, 0.4]], [[0.9, 0.1], [0.5, 0.5]])
    word = [(matrix_unit(0, 0, 2), np.eye(2))]
    assert joint_expectation_oracle(model, word) == pytest.approx(0.3, abs=1e-15)
    assert joint_expectation_bi(model, word) == pytest.approx(0.3, abs=1e-15)


def test_oracle_equivalence():
    rng = np.random.default_rng(22)
    for d in (1, 2, 3):
        for n in (0, 1, 2):
            for _ in range(100):
                model = random_model(rng, d, sparsity=0.2)
                word = random_word(rng, d, n + 1)
                v = joint_expectation_bi(model, word)
                assert abs(v - joint_expectation_oracle(model, word)) <= 1e-10 * (1 + abs(v))


def test_oracle_with_non_diagonal_initial_state():
    rng = np.random.default_rng(23)
    rho = random_psd(rng, 3)
    rho /= np.trace(rho)
    model = HiddenModel.create([1 / 3] * 3, random_model(rng, 3).Pi, random_model(rng, 3).Q, W0=rho)
    word = random_word(rng, 3, 3)
    v = joint_expectation_bi(model, word)
    assert abs(v - joint_expectation_oracle(model, word)) <= 1e-10 * (1 + abs(v))


def test_oracle_budget():
    model = HiddenModel.create([0.5, 0.5], np.full((2, 2), 0.5), np.eye(2))
    word = [(np.eye(2), np.eye(2))] * 6
    with pytest.raises(BudgetExceeded):
        joint_expectation_oracle(model, word, budget=1e4)
    assert joint_expectation_oracle(model, word[:2], budget=1e4) == pytest.approx(1.0)


def test_word_validation():
    model = HiddenModel.create([1.0], [[1.0]], [[1.0]])
    with pytest.raises(EmptyWord):
        joint_expectation_bi(model, [])
    with pytest.raises(DimensionMismatch):
        joint_expectation_bi(model, [(np.eye(2), np.eye(2))])
    with pytest.raises(DimensionMismatch):
        joint_expectation_oracle(model, [(np.eye(1),)])


def test_generic_matches_bi():
    rng = np.random.default_rng(24)
    for _ in range(30):
        d = int(rng.integers(1, 4))
        model = random_model(rng, d, sparsity=0.2)
        te, em = channel_from_pair_map(model, "H"), channel_from_pair_map(model, "HO")
        word = random_word(rng, d, int(rng.integers(1, 5)))
        v = joint_expectation_bi(model, word)
        assert abs(joint_expectation_generic(model.W0, te, em, word) - v) <= 1e-10 * (1 + abs(v))


def test_generic_identity_and_density_check():
    rng = np.random.default_rng(25)
    model = random_model(rng, 2)
    te, em = channel_from_pair_map(model, "H"), channel_from_pair_map(model, "HO")
    word = [(np.eye(2), np.eye(2))] * 3
    assert joint_expectation_generic(model.W0, te, em, word) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(NotDensity):
        joint_expectation_generic(2 * model.W0, te, em, word)
    with pytest.raises(NotDensity):
        joint_expectation_generic(np.diag([1.5, -0.5]), te, em, word)


def test_inert_emission_reduces_to_hidden_chain():
    # with b_m = id the emission contributes P_HO(id), whose diagonal is one;
    # for diagonal a_m the joint value equals the E_H chain value
    rng = np.random.default_rng(26)
    model = random_model(rng, 3)
    te, em = channel_from_pair_map(model, "H"), channel_from_pair_map(model, "HO")
    hw = [np.diag(rng.normal(size=3)) for _ in range(3)]
    joint = joint_expectation_generic(model.W0, te, em, [(a, np.eye(3)) for a in hw])
    assert joint == pytest.approx(hidden_expectation(model.W0, te, hw), abs=1e-12)


def test_hidden_expectation_examples():
    model = HiddenModel.create([0.5, 0.5], [[0.7, 0.3], [0.4, 0.6]], [[0.9, 0.1], [0.2, 0.8]])
    te = channel_from_pair_map(model, "H")
    word = [matrix_unit(0, 0, 2), matrix_unit(1, 1, 2)]
    assert hidden_expectation(model.W0, te, word) == pytest.approx(0.15, abs=1e-15)
    assert hidden_expectation(model.W0, te, [np.eye(2)] * 3) == pytest.approx(1.0, abs=1e-12)
    scalar = HiddenModel.create([1.0], [[1.0]], [[1.0]])
    ch = channel_from_pair_map(scalar, "H")
    assert hidden_expectation(scalar.W0, ch, [np.array([[2.0]]), np.array([[3j]])]) == pytest.approx(6j)


def test_e0_examples():
    rng = np.random.default_rng(27)
    model = random_model(rng, 3)
    te = channel_from_pair_map(model, "H")
    a = random_complex(rng, 3)
    assert np.abs(e0_of_word(te, [a]) - te.apply_pair(a, np.eye(3))).max() <= 1e-15
    assert np.abs(e0_of_word(te, [np.eye(3)] * 4) - np.eye(3)).max() <= 1e-12


def test_e0_underlying_matches_explicit_sum():
    rng = np.random.default_rng(28)
    model = random_model(rng, 2)
    ch = channel_from_pair_map(model, "O_underlying")
    word = [matrix_unit(0, 0, 2), matrix_unit(0, 0, 2)]
    assert np.abs(e0_of_word(ch, word) - underlying_e0_sum(model, word)).max() <= 1e-12
    for length in (1, 2, 3):
        word = [random_complex(rng, 2) for _ in range(length)]
        assert np.abs(e0_of_word(ch, word) - underlying_e0_sum(model, word)).max() <= 1e-12


def test_hidden_lemma_formula():
    rng = np.random.default_rng(29)
    for d in (1, 2, 3):
        model = random_model(rng, d, sparsity=0.2)
        te = channel_from_pair_map(model, "H")
        a = random_complex(rng, d)
        base = a * (model.sqrt_Pi @ model.sqrt_Pi.T)
        assert np.abs(hidden_lemma_formula(model, [a]) - base).max() <= 1e-12
        assert np.abs(hidden_lemma_formula(model, [np.eye(d)] * 3) - np.eye(d)).max() <= 1e-12
        for r in (1, 2, 3):
            word = [random_complex(rng, d) for _ in range(r + 1)]
            assert np.abs(hidden_lemma_formula(model, word) - e0_of_word(te, word)).max() <= 1e-10


def test_positivity_and_reality():
    rng = np.random.default_rng(30)
    for _ in range(50):
        d = int(rng.integers(1, 4))
        model = random_model(rng, d)
        psd_word = [(random_psd(rng, d), random_psd(rng, d)) for _ in range(3)]
        v = joint_expectation_bi(model, psd_word)
        assert v.real >= -1e-12 and abs(v.imag) <= 1e-10 * (1 + abs(v))
        herm_word = [(random_hermitian(rng, d), random_hermitian(rng, d)) for _ in range(3)]
        v = joint_expectation_bi(model, herm_word)
        assert abs(v.imag) <= 1e-10 * (1 + abs(v))


def test_normalization_and_projectivity():
    rng = np.random.default_rng(31)
    for _ in range(30):
        d = int(rng.integers(1, 4))
        model = random_model(rng, d)
        word = random_word(rng, d, int(rng.integers(1, 4)))
        v = joint_expectation_bi(model, word)
        extended = word + [(np.eye(d), np.eye(d))]
        assert abs(joint_expectation_bi(model, extended) - v) <= 1e-10 * (1 + abs(v))
        ones = [(np.eye(d), np.eye(d))] * 4
        ones[int(rng.integers(0, 4))] = (np.eye(d), np.eye(d))
        assert joint_expectation_bi(model, ones) == pytest.approx(1.0, abs=1e-12)


def test_off_diagonal_dependence_of_full_state():
    # a non-diagonal input changes the value, unlike any classical restriction
    model = HiddenModel.create([0.5, 0.5], [[0.7, 0.3], [0.4, 0.6]], [[0.9, 0.1], [0.2, 0.8]])
    flip = np.array([[0, 1], [1, 0]], dtype=complex)
    base = joint_expectation_bi(model, [(np.eye(2), np.eye(2)), (np.diag([1, 1]), np.eye(2))])
    changed = joint_expectation_bi(model, [(np.eye(2), np.eye(2)), (np.eye(2) + flip, np.eye(2))])
    assert abs(changed - base) > 0.1
    assert abs(joint_expectation_oracle(model, [(np.eye(2), np.eye(2)), (flip, np.eye(2))])) > 0.1


def test_generic_rejects_non_pair_channel():
    model = HiddenModel.create([0.5, 0.5], np.eye(2), np.eye(2))
    te = channel_from_pair_map(model, "H")
    plain = QuantumChannelMap.from_linear_map(lambda x: x, 2, 2)
    with pytest.raises(DimensionMismatch):
        joint_expectation_generic(model.W0, te, plain, [(np.eye(2), np.eye(2))])
