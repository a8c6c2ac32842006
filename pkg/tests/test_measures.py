import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qcbalance import measures
from qcbalance.linalg import ValidationError
from qcbalance.measures import Classification
from qcbalance.qstate import (
    LabeledState,
    Party,
    PartyLayout,
    UnsupportedConfigurationError,
    apply_unitary,
    basis_state,
    random_density,
    random_pure_state,
    random_unitary,
    singlet,
    two_qubit_layout,
    werner,
)

from oracles import concurrence_spin_flip, entropy_bits, eof_from_c, werner_by_hand

A, B = Party.ALICE, Party.BOB
H09 = 0.4689955935892811  # binary entropy of 0.9, from the oracle


def product_pure():
    return LabeledState.from_vector(two_qubit_layout(), np.kron([0.6, 0.8], [1, 1j]) / math.sqrt(2))


def test_entropy_of_entanglement_examples():
    assert measures.entropy_of_entanglement(product_pure()) == pytest.approx(0, abs=1e-12)
    assert measures.entropy_of_entanglement(singlet()) == pytest.approx(1, abs=1e-12)
    psi = LabeledState.from_vector(two_qubit_layout(), [math.sqrt(0.9), 0, 0, math.sqrt(0.1)])
    rho_a = np.diag([0.9, 0.1])
    assert entropy_bits(rho_a) == pytest.approx(H09, abs=1e-12)
    assert measures.entropy_of_entanglement(psi) == pytest.approx(H09, abs=1e-12)


def test_entropy_of_entanglement_rejects_mixed():
    with pytest.raises(UnsupportedConfigurationError):
        measures.entropy_of_entanglement(werner(0.8))


def test_concurrence_examples():
    assert measures.concurrence(singlet()) == pytest.approx(1, abs=1e-9)
    assert measures.entanglement_of_formation(singlet()) == pytest.approx(1, abs=1e-9)
    assert measures.concurrence(np.eye(4) / 4) == 0
    assert measures.entanglement_of_formation(np.eye(4) / 4) == 0
    c_oracle = concurrence_spin_flip(werner_by_hand(0.8))
    assert c_oracle == pytest.approx(0.6, abs=1e-12)
    assert measures.concurrence(werner(0.8)) == pytest.approx(c_oracle, abs=1e-9)
    assert measures.entanglement_of_formation(werner(0.8)) == pytest.approx(eof_from_c(c_oracle), abs=1e-9)
    assert measures.entanglement_of_formation(werner(0.8)) == pytest.approx(H09, abs=1e-9)


def test_concurrence_matches_spin_flip_oracle_on_random_states():
    for seed in range(50):
        rho = random_density(2, seed=seed, rank=1 + seed % 4)
        assert measures.concurrence(rho) == pytest.approx(concurrence_spin_flip(rho.density), abs=1e-7)


def test_concurrence_wrong_dimension():
    with pytest.raises(ValidationError):
        measures.concurrence(random_density(3, seed=0))


def test_negativity_examples():
    prod = basis_state(two_qubit_layout())
    assert measures.negativity(prod) == pytest.approx(0, abs=1e-12)
    assert measures.is_ppt(prod)
    pt = measures.partial_transpose(singlet())
    assert np.linalg.eigvalsh(pt)[0] == pytest.approx(-0.5, abs=1e-12)
    assert measures.negativity(singlet()) == pytest.approx(0.5, abs=1e-12)
    assert not measures.is_ppt(singlet())


def test_werner_ppt_boundary():
    for f in np.linspace(0, 1, 41):
        # direct eigensolve of the partial transpose as the reference
        w = np.linalg.eigvalsh(measures.partial_transpose(werner(float(f))))
        assert measures.is_ppt(werner(float(f))) == (f <= 0.5 + 1e-12)
        assert (w[0] >= -1e-9) == (f <= 0.5 + 1e-12)


def test_negativity_cut_is_symmetric_and_validated():
    rho = random_density(2, seed=3, layout=two_qubit_layout())
    assert measures.negativity(rho, A) == pytest.approx(measures.negativity(rho, B), abs=1e-12)
    one_party = random_density(2, seed=3)
    with pytest.raises(ValidationError):
        measures.negativity(one_party, A)  # default layout puts every qubit on Alice's side


def test_negativity_multi_qubit_cut():
    lay = PartyLayout.of(("a0", A), ("a1", A), ("b0", B))
    rho = random_density(3, seed=12, layout=lay)
    assert measures.negativity(rho, A) == pytest.approx(measures.negativity(rho, B), abs=1e-10)


def test_hashing_examples():
    assert measures.hashing_lower_bound(singlet()) == pytest.approx(1.0, abs=1e-12)
    assert measures.hashing_lower_bound(werner(0.8)) == 0.0
    expected = 1 - entropy_bits(werner_by_hand(0.95))
    assert expected == pytest.approx(0.6343549178479853, abs=1e-12)
    assert measures.hashing_lower_bound(werner(0.95)) == pytest.approx(expected, abs=1e-12)


def test_hashing_is_zero_for_product_states():
    assert measures.hashing_lower_bound(basis_state(two_qubit_layout())) == 0.0


def test_gibbs_helmholtz_pure():
    for seed in range(10):
        s = random_pure_state(2, seed=seed, layout=two_qubit_layout())
        rec = measures.gibbs_helmholtz(s)
        assert rec.classification is Classification.PURE
        assert rec.e_bound_lower == 0 and rec.e_bound_upper == 0
        assert rec.e_d_lower == rec.e_d_upper == rec.e_f


def test_gibbs_helmholtz_large_pure():
    lay = PartyLayout.of(("a0", A), ("a1", A), ("b0", B), ("b1", B), ("b2", B))
    rec = measures.gibbs_helmholtz(random_pure_state(5, seed=1, layout=lay))
    assert rec.e_bound_upper == 0


def test_gibbs_helmholtz_separable():
    for rho in (np.eye(4) / 4, werner_by_hand(0.4), werner_by_hand(0.5)):
        rec = measures.gibbs_helmholtz(rho)
        assert rec.classification is Classification.SEPARABLE
        assert (rec.e_f, rec.e_d_lower, rec.e_d_upper, rec.e_bound_lower, rec.e_bound_upper) == (0, 0, 0, 0, 0)


def test_gibbs_helmholtz_werner():
    rec = measures.gibbs_helmholtz(werner(0.8))
    assert rec.classification is Classification.FREE_MIXED
    assert rec.e_f == pytest.approx(H09, abs=1e-9)
    assert 0 < rec.e_d_lower <= rec.e_d_upper <= rec.e_f
    assert rec.e_bound_upper > 0 and rec.e_bound_lower >= 0
    assert rec.as_dict()["e_f_single_copy"] == rec.e_f


def test_gibbs_helmholtz_mixed_large_cut_unsupported():
    with pytest.raises(UnsupportedConfigurationError):
        measures.gibbs_helmholtz(random_density(3, seed=0, layout=PartyLayout.of(("a", A), ("b", B), ("c", B))))


# -- invariants


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_local_unitary_invariance(seed):
    rng = np.random.default_rng(seed)
    rho = random_density(2, seed=rng, layout=two_qubit_layout(), rank=int(rng.integers(1, 5)))
    out = apply_unitary(rho, random_unitary(1, rng), ["S_A"])
    out = apply_unitary(out, random_unitary(1, rng), ["S_B"])
    for fn in (measures.concurrence, measures.entanglement_of_formation, measures.negativity):
        assert abs(fn(out) - fn(rho)) < 1e-8


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_formation_equals_entropy_on_pure(seed):
    psi = random_pure_state(2, seed=seed, layout=two_qubit_layout())
    assert abs(measures.entanglement_of_formation(psi) - measures.entropy_of_entanglement(psi)) < 1e-8


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_ppt_means_no_distillability_claim(seed):
    rho = random_density(2, seed=seed, layout=two_qubit_layout())
    rec = measures.gibbs_helmholtz(rho)
    if measures.is_ppt(rho):
        assert rec.e_d_lower == 0
    assert rec.e_d_lower <= rec.e_d_upper + 1e-9
    assert min(rec.e_bound_lower, rec.e_bound_upper, rec.e_d_lower) >= 0


def test_formation_monotone_in_werner_fidelity():
    vals = [measures.entanglement_of_formation(werner(float(f))) for f in np.linspace(0.5, 1, 26)]
    assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))
