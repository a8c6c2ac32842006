import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qcbalance import ledger
from qcbalance.linalg import ValidationError
from qcbalance.protocols import random_transcript, send_qubit, teleport
from qcbalance.qstate import (
    LabeledState,
    Party,
    PartyLayout,
    Role,
    UnsupportedConfigurationError,
    apply_unitary,
    basis_state,
    random_pure_state,
    random_unitary,
    singlet,
    tensor,
    transmit,
    werner,
)
from qcbalance.transcript import Channel, TranscriptBuilder

from oracles import entropy_bits, werner_by_hand

A, B = Party.ALICE, Party.BOB


def test_informational_content_examples():
    one = basis_state(PartyLayout.of(("s", A)))
    assert ledger.informational_content(one, A) == pytest.approx(1.0)
    assert ledger.informational_content(one, B) == 0.0
    assert ledger.informational_content(singlet(), A) == pytest.approx(0.0, abs=1e-12)
    bob_pair = werner(0.8, PartyLayout.of(("b0", B), ("b1", B)))
    expected = 2 - entropy_bits(werner_by_hand(0.8))
    assert expected == pytest.approx(0.961079404968406, abs=1e-12)
    assert ledger.informational_content(bob_pair, B) == pytest.approx(expected, abs=1e-12)


def test_informational_content_bounds():
    lay = PartyLayout.of(("a0", A), ("a1", A), ("b0", B))
    for seed in range(20):
        s = random_pure_state(3, seed=seed, layout=lay)
        for party, n in ((A, 2), (B, 1)):
            i = ledger.informational_content(s, party)
            assert -1e-9 <= i <= n + 1e-9


def test_physical_work():
    assert ledger.physical_work(["S1"]) == 1
    assert ledger.physical_work(["M1", "M2"]) == 2
    assert ledger.physical_work([]) == 0
    s = basis_state(PartyLayout.of(("x", A), ("y", B)))
    with pytest.raises(ValidationError):
        ledger.physical_work(["y"], s, sender=A)


def test_logical_work_examples():
    t = send_qubit("unentangled")
    assert ledger.logical_work(t.initial, t.final, B) == pytest.approx(1.0)
    t = send_qubit("entangled_half")
    assert ledger.logical_work(t.initial, t.final, B) == pytest.approx(0.0, abs=1e-12)


def test_logical_work_zero_for_local_unitaries():
    lay = PartyLayout.of(("a0", A), ("a1", A), ("b0", B), ("b1", B))
    for seed in range(10):
        s = random_pure_state(4, seed=seed, layout=lay)
        out = apply_unitary(s, random_unitary(2, seed), ["a0", "a1"])
        out = apply_unitary(out, random_unitary(1, seed + 50), ["b1"])
        assert abs(ledger.logical_work(s, out, B)) < 1e-9


def test_cut_entanglement_examples():
    prod = basis_state(PartyLayout.of(("a", A), ("b", B)))
    assert ledger.cut_entanglement(prod) == 0
    assert ledger.cut_entanglement(singlet()) == pytest.approx(1.0, abs=1e-12)
    assert ledger.cut_entanglement(singlet(), B) == pytest.approx(1.0, abs=1e-12)
    t = teleport(np.array([1, 0]))
    assert ledger.cut_entanglement(t.final) == pytest.approx(2.0, abs=1e-9)


def test_cut_entanglement_rejects_mixed():
    with pytest.raises(UnsupportedConfigurationError):
        ledger.cut_entanglement(werner(0.8))


def test_cut_entanglement_accepts_rank_one_density():
    assert ledger.cut_entanglement(singlet().to_density()) == pytest.approx(1.0, abs=1e-9)


def test_balance_teleport():
    led = ledger.check_balance(teleport(np.array([1, 0])))
    assert (led.e_in, led.w_p, led.e_out, led.w_u) == pytest.approx((1, 2, 2, 1), abs=1e-8)
    assert led.ok


def test_balance_unentangled_send():
    led = ledger.check_balance(send_qubit("unentangled"))
    assert (led.e_in, led.w_p, led.e_out, led.w_l) == pytest.approx((0, 1, 0, 1), abs=1e-8)
    assert led.balance_ok


def test_balance_second_qubit_sent_too():
    b = TranscriptBuilder.extend(send_qubit("entangled_half"), "send_both")
    mid = b.current
    assert ledger.cut_entanglement(mid) == pytest.approx(1.0)
    b.transmit(["S1"], to=B)
    led = ledger.check_balance(b.finish())
    assert led.e_out == pytest.approx(0.0, abs=1e-12)
    assert led.w_l == pytest.approx(2.0, abs=1e-12)
    assert led.w_p == 2
    assert led.balance_ok


def test_balance_flags_violation():
    # appending a fresh qubit to Bob's side between snapshots is not a closed-system step
    t = send_qubit("unentangled")
    grown = tensor(t.final, basis_state(PartyLayout.of(("extra", B))))
    tampered = type(t)(t.name, t.initial, t.steps, (grown,), t.channel)
    led = ledger.check_balance(tampered)
    assert not led.balance_ok
    assert led.residual == pytest.approx(-1.0)


def test_transmissions_both_ways_rejected():
    s = basis_state(PartyLayout.of(("a", A), ("b", B)))
    b = TranscriptBuilder("pingpong", s)
    b.transmit(["a"], to=B)
    b.transmit(["b"], to=A)
    with pytest.raises(UnsupportedConfigurationError):
        ledger.check_balance(b.finish())


def test_transmit_requires_ownership():
    s = basis_state(PartyLayout.of(("a", A), ("b", B)))
    b = TranscriptBuilder("bad", s)
    with pytest.raises(ValidationError):
        b.transmit(["b"], to=B)


def test_snapshots_track_steps():
    snaps = ledger.snapshots(teleport(np.array([0, 1])))
    assert [s.step for s in snaps] == list(range(len(snaps)))
    assert snaps[0].e == pytest.approx(1.0)
    assert snaps[1].e == pytest.approx(1.0)  # Alice's local measurement changes nothing
    assert snaps[-1].e == pytest.approx(2.0)
    assert snaps[-1].w_p == 2


def _dephasing_transcript():
    lay = PartyLayout.of(("M", A, Role.M), ("R", A, Role.R))
    b = TranscriptBuilder("dephase", basis_state(lay), Channel(("M",), ("M",)))
    b.decohere(["M"], ["R"])
    b.transmit(["M"], to=B)
    return b.finish()


def test_useful_work_teleport():
    assert ledger.useful_work(teleport(np.array([1, 0])), 2, epsilon=1e-9) == 1.0


def test_useful_work_dephasing_channel_is_zero():
    t = _dephasing_transcript()
    assert ledger.useful_work(t, 2) == 0.0
    led = ledger.check_balance(t)
    assert led.w_l == pytest.approx(1.0)
    assert led.w_u == 0.0


def test_useful_work_identity_two_qubits():
    lay = PartyLayout.of(("x", A), ("y", A))
    b = TranscriptBuilder("identity", basis_state(lay), Channel(("x", "y"), ("x", "y")))
    b.transmit(["x", "y"], to=B)
    t = b.finish()
    assert ledger.useful_work(t, 4) == 2.0
    assert ledger.useful_work(t, 2) == 1.0


def test_useful_work_errors():
    t = _dephasing_transcript()
    with pytest.raises(ValidationError):
        ledger.useful_work(t, 4)
    with pytest.raises(ValidationError):
        ledger.useful_work(t, 3)
    with pytest.raises(ValidationError):
        ledger.useful_work(send_qubit("entangled_half"), 2)


# -- invariants


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_random_transcripts_balance(seed):
    t = random_transcript(seed)
    led = ledger.check_balance(t)
    assert abs(led.residual) < 1e-8
    assert led.e_out - led.e_in <= led.w_p + 1e-8
    assert 0 <= led.w_u <= led.w_p + 1e-9
    assert abs(led.conservation_in - led.conservation_out) < 1e-8


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 4), st.integers(1, 4))
def test_conservation_under_local_unitaries(seed, na, nb):
    rng = np.random.default_rng(seed)
    lay = PartyLayout.of(*[(f"a{i}", A) for i in range(na)], *[(f"b{i}", B) for i in range(nb)])
    s = LabeledState.from_vector(lay, random_pure_state(na + nb, rng).vector)
    before = ledger.conservation_total(s)
    s = apply_unitary(s, random_unitary(na, rng), lay.owned_by(A))
    s = apply_unitary(s, random_unitary(nb, rng), lay.owned_by(B))
    assert abs(ledger.conservation_total(s) - before) < 1e-8


def test_content_invariant_under_other_party_unitaries():
    lay = PartyLayout.of(("a0", A), ("a1", A), ("b0", B))
    for seed in range(10):
        s = random_pure_state(3, seed=seed, layout=lay)
        out = apply_unitary(s, random_unitary(2, seed + 7), ["a0", "a1"])
        assert abs(ledger.informational_content(out, B) - ledger.informational_content(s, B)) < 1e-9


def test_transmit_then_relabel_matches_builder():
    s = random_pure_state(2, seed=1, layout=PartyLayout.of(("a", A), ("b", B)))
    b = TranscriptBuilder("t", s)
    b.transmit(["a"], to=B)
    assert b.current.layout == transmit(s, ["a"], B).layout
