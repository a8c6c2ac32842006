"""Executable protocols as unitary circuits over labeled states.

Measurement never projects. A measured qubit is copied into a pointer (M)
qubit by a C-NOT, and the pointer is copied into an environment (R) qubit to
make the record irreversible. Probabilities of "outcomes" are read off as
weights of blocks of the resulting pure state.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import linalg
from .linalg import CNOT, H, I2, X, Z, ValidationError
from .measures import (
    entanglement_of_formation,
    entropy_of_entanglement,
    hashing_lower_bound,
    is_ppt,
)
from .qstate import (
    LabeledState,
    Party,
    PartyLayout,
    Qubit,
    Role,
    apply_unitary,
    basis_state,
    marginal,
    purify,
    random_unitary,
    random_vector,
    singlet_vector,
    tensor,
    two_qubit_layout,
    von_neumann_entropy,
)
from .transcript import Channel, ProtocolTranscript, TranscriptBuilder, require_zero

__all__ = [
    "measure_as_entanglement",
    "teleport",
    "send_qubit",
    "twirl",
    "bbpssw_step",
    "recurrence_map",
    "bell_diagonal_recurrence",
    "bbpssw_iterate",
    "recurrence_hashing_estimate",
    "distillation_report",
    "random_transcript",
]


# ---------------------------------------------------------------- measurement

def measure_as_entanglement(
    s: LabeledState,
    measured: Sequence[str],
    pointer: Sequence[str],
    environment: Sequence[str] | None = None,
) -> LabeledState:
    """Record ``measured`` qubits in ``pointer`` qubits, then in the environment.

    Pointers must start in |0>. If ``environment`` is omitted, one fresh
    R qubit per pointer is appended, owned by the pointer's party.
    """
    measured, pointer = list(measured), list(pointer)
    if len(measured) != len(pointer):
        raise ValidationError("one pointer qubit per measured qubit is required")
    for p in pointer:
        require_zero(s, p)
    for m, p in zip(measured, pointer):
        s = apply_unitary(s, CNOT, [m, p], check=False)
    if environment is None:
        taken = set(s.layout.labels)
        fresh = []
        for p in pointer:
            name = f"R_{p}"
            while name in taken:
                name += "'"
            taken.add(name)
            fresh.append(Qubit(name, s.layout.qubit(p).party, Role.R))
        extra = basis_state(PartyLayout(tuple(fresh)))
        s = tensor(s, extra if s.is_vector else extra.to_density())
        environment = [q.label for q in fresh]
    else:
        environment = list(environment)
        if len(environment) != len(pointer):
            raise ValidationError("one environment qubit per pointer is required")
        for e in environment:
            require_zero(s, e)
    for p, e in zip(pointer, environment):
        s = apply_unitary(s, CNOT, [p, e], check=False)
    return s


# ---------------------------------------------------------------- teleportation

def _bell_measurement_unitary() -> np.ndarray:
    """Unitary on (S', S'', M1, M2) writing the Bell index of S'S'' into M1M2.

    Rotates the Bell basis onto the computational basis, copies both bits
    into the pointers and rotates back, so S'S'' keep their Bell state.
    """
    rot = linalg.kron(H, I2) @ CNOT
    rot4 = linalg.kron(rot, np.eye(4))
    copy = np.zeros((16, 16), dtype=complex)
    for a, b, m1, m2 in itertools.product((0, 1), repeat=4):
        src = (a << 3) | (b << 2) | (m1 << 1) | m2
        dst = (a << 3) | (b << 2) | ((m1 ^ a) << 1) | (m2 ^ b)
        copy[dst, src] = 1
    return linalg.dagger(rot4) @ copy @ rot4


def _bob_correction_unitary() -> np.ndarray:
    """Controlled Pauli on (M1, M2, S_B) undoing the singlet-resource rotation."""
    u = np.zeros((8, 8), dtype=complex)
    for m1, m2 in itertools.product((0, 1), repeat=2):
        p = np.linalg.matrix_power(Z, m1) @ np.linalg.matrix_power(X, m2) @ X @ Z
        k = 2 * m1 + m2
        u[2 * k:2 * k + 2, 2 * k:2 * k + 2] = p
    return u


BELL_MEASUREMENT = _bell_measurement_unitary()
BOB_CORRECTION = _bob_correction_unitary()


def teleport(unknown, environment: bool = True) -> ProtocolTranscript:
    """Teleportation as a closed, purely unitary run.

    Registers: the unknown qubit ``S1_A``, the singlet halves ``S2_A`` and
    ``S_B``, Alice's pointers ``M1``/``M2`` and, with ``environment``, the
    environment qubits ``R1``/``R2`` that make her record irreversible.
    """
    psi = np.asarray(unknown.vector if isinstance(unknown, LabeledState) else unknown, dtype=complex)
    psi = psi.reshape(-1)
    if psi.shape != (2,) or abs(np.vdot(psi, psi).real - 1) > 1e-10:
        raise ValidationError("teleport expects a normalized single-qubit state vector")
    A, B = Party.ALICE, Party.BOB
    qubits = [
        ("S1_A", A, Role.S),
        ("S2_A", A, Role.S),
        ("S_B", B, Role.S),
        ("M1", A, Role.M),
        ("M2", A, Role.M),
    ]
    if environment:
        qubits += [("R1", A, Role.R), ("R2", A, Role.R)]
    layout = PartyLayout.of(*qubits)
    v = np.kron(psi, singlet_vector())
    v = np.kron(v, np.eye(2 ** (len(qubits) - 3))[0])
    initial = LabeledState.from_vector(layout, v)

    b = TranscriptBuilder("teleport", initial, Channel(("S1_A",), ("S_B",)))
    b.unitary("alice_bell_measurement", BELL_MEASUREMENT, ["S1_A", "S2_A", "M1", "M2"])
    if environment:
        b.decohere(["M1", "M2"], ["R1", "R2"])
    b.transmit(["M1", "M2"], to=B)
    b.unitary("bob_correction", BOB_CORRECTION, ["M1", "M2", "S_B"])
    return b.finish()


def teleported_state(t: ProtocolTranscript) -> LabeledState:
    return marginal(t.final, ["S_B"])


# ---------------------------------------------------------------- sending a qubit

def send_qubit(mode: str = "unentangled", payload=None) -> ProtocolTranscript:
    """Alice hands one qubit to Bob.

    ``unentangled``: a pure qubit (|0> unless ``payload`` is given).
    ``entangled_half``: one half of a singlet whose other half stays with Alice.
    """
    A, B = Party.ALICE, Party.BOB
    if mode == "unentangled":
        psi = np.array([1, 0], dtype=complex) if payload is None else np.asarray(payload, dtype=complex)
        layout = PartyLayout.of(("S1", A, Role.S))
        b = TranscriptBuilder("send_unentangled", LabeledState.from_vector(layout, psi), Channel(("S1",), ("S1",)))
        b.transmit(["S1"], to=B)
        return b.finish()
    if mode == "entangled_half":
        layout = PartyLayout.of(("S1", A, Role.S), ("S2", A, Role.S))
        b = TranscriptBuilder("send_entangled_half", LabeledState.from_vector(layout, singlet_vector()))
        b.transmit(["S2"], to=B)
        return b.finish()
    raise ValidationError(f"unknown send mode {mode!r}")


# ---------------------------------------------------------------- twirling

def _twirl_rotations() -> list[np.ndarray]:
    """The 12 rotations of the tetrahedral group as SU(2) matrices.

    Their adjoint action is irreducible, so averaging ``U x U`` over them
    equals the full SU(2) twirl.
    """
    rots = [I2, -1j * X, -1j * linalg.Y, -1j * Z]
    c, s = math.cos(math.pi / 3), math.sin(math.pi / 3)
    for sign in itertools.product((1, -1), repeat=3):
        n = np.array(sign) / math.sqrt(3)
        gen = n[0] * X + n[1] * linalg.Y + n[2] * Z
        rots.append(c * I2 - 1j * s * gen)
    return rots


TWIRL_ROTATIONS = _twirl_rotations()
_BILATERAL = [np.kron(u, u) for u in TWIRL_ROTATIONS]


def twirl(rho) -> np.ndarray:
    """Exact bilateral twirl onto the Werner family (singlet fidelity preserved)."""
    m = linalg.as_matrix(rho.rho() if isinstance(rho, LabeledState) else rho)
    out = sum(u @ m @ u.conj().T for u in _BILATERAL) / len(_BILATERAL)
    return (out + out.conj().T) / 2


# Bob's local rotation taking the singlet to phi+ and back.
_ALIGN = np.kron(I2, X @ Z)

# Bell index k = 2 * phase + parity: phi+ = 0, psi+ = 1, phi- = 2, psi- = 3.
SINGLET_INDEX = 3


def _bell_basis() -> np.ndarray:
    s = 1 / math.sqrt(2)
    return np.array(
        [[s, 0, 0, s], [0, s, s, 0], [s, 0, 0, -s], [0, s, -s, 0]], dtype=complex
    ).T


BELL_BASIS = _bell_basis()


def bell_weights(rho) -> np.ndarray:
    m = linalg.as_matrix(rho)
    return np.real(np.einsum("ik,ij,jk->k", BELL_BASIS.conj(), m, BELL_BASIS))


# ---------------------------------------------------------------- recurrence

@dataclass(frozen=True, eq=False)
class RecurrenceStep:
    p_keep: float
    rho_next: np.ndarray
    branch_state: LabeledState | None
    transcript: ProtocolTranscript | None

    @property
    def fidelity(self) -> float:
        v = singlet_vector()
        return float(np.vdot(v, self.rho_next @ v).real)


SOURCE = ("A1", "B1")
TARGET = ("A2", "B2")
POINTERS = ("P_A", "P_B")
ENVIRONMENT = ("R_A", "R_B")


def _pointer_layout() -> PartyLayout:
    A, B = Party.ALICE, Party.BOB
    return PartyLayout.of(
        ("P_A", A, Role.M), ("P_B", B, Role.M), ("R_A", A, Role.R), ("R_B", B, Role.R)
    )


def _pair_layout(a: str, b: str) -> PartyLayout:
    return PartyLayout.of((a, Party.ALICE, Role.S), (b, Party.BOB, Role.S))


def _agree_block(s: LabeledState) -> tuple[float, np.ndarray]:
    """Weight and unnormalized source-pair state of the agreeing-pointer block."""
    red = marginal(s, [*SOURCE, *POINTERS]).density.reshape(4, 4, 4, 4)
    block = red[:, 0, :, 0] + red[:, 3, :, 3]
    return float(np.trace(block).real), block


def _prepare(rho, do_twirl: bool) -> np.ndarray:
    m = linalg.as_matrix(rho.rho() if isinstance(rho, LabeledState) else rho)
    if m.shape != (4, 4):
        raise ValidationError("recurrence acts on two-qubit densities")
    LabeledState.from_density(two_qubit_layout(), m)
    if do_twirl:
        m = twirl(m)
    return _ALIGN @ m @ _ALIGN.conj().T


def bbpssw_step(rho, twirl: bool = True, branch: bool = True) -> RecurrenceStep:
    """One recurrence round simulated from the raw circuit.

    Two copies of ``rho`` form a source pair (A1, B1) and a target pair
    (A2, B2). Both parties XOR source into target, record their target qubit
    in a pointer and couple the pointer to the environment. The kept branch
    is the block where the two pointers agree.

    With ``branch`` set, the same circuit is also run on a purification of
    both pairs, giving the unprojected pure ``branch_state`` and its
    transcript (Bob's pointer is sent to Alice at the end).
    """
    aligned = _prepare(rho, twirl)
    pairs = LabeledState.from_density(
        _pair_layout(*SOURCE) + _pair_layout(*TARGET),
        linalg.kron(aligned, aligned),
        validate=False,
    )
    s = tensor(pairs, basis_state(_pointer_layout()).to_density())
    s = apply_unitary(s, CNOT, ["A1", "A2"], check=False)
    s = apply_unitary(s, CNOT, ["B1", "B2"], check=False)
    s = measure_as_entanglement(s, TARGET, POINTERS, ENVIRONMENT)
    p_keep, block = _agree_block(s)
    if p_keep <= 0:
        raise linalg.NumericError("agreeing branch has zero weight")
    rho_next = _ALIGN.conj().T @ (block / p_keep) @ _ALIGN
    rho_next = (rho_next + rho_next.conj().T) / 2

    state, transcript = None, None
    if branch:
        transcript = _branch_transcript(aligned)
        state = transcript.final
    return RecurrenceStep(p_keep, rho_next, state, transcript)


def _branch_transcript(aligned: np.ndarray) -> ProtocolTranscript:
    src = purify(LabeledState.from_density(_pair_layout(*SOURCE), aligned, validate=False), prefix="E1_")
    tgt = purify(LabeledState.from_density(_pair_layout(*TARGET), aligned, validate=False), prefix="E2_")
    initial = tensor(src, tgt, basis_state(_pointer_layout()))
    b = TranscriptBuilder("bbpssw_round", initial)
    b.unitary("xor_alice", CNOT, ["A1", "A2"])
    b.unitary("xor_bob", CNOT, ["B1", "B2"])
    b.unitary("pointer_alice", CNOT, ["A2", "P_A"])
    b.unitary("pointer_bob", CNOT, ["B2", "P_B"])
    b.decohere(POINTERS, ENVIRONMENT)
    b.transmit(["P_B"], to=Party.ALICE)
    return b.finish()


def branch_view(state: LabeledState) -> tuple[float, np.ndarray]:
    """Agree-branch weight and normalized source state read off a branch state."""
    p, block = _agree_block(state)
    rho = _ALIGN.conj().T @ (block / p) @ _ALIGN
    return p, (rho + rho.conj().T) / 2


def bell_diagonal_recurrence(weights) -> tuple[float, np.ndarray]:
    """Closed-form recurrence on Bell-diagonal weights in the phi+ frame.

    Bilateral XOR maps source (phase a1, parity b1) and target (a2, b2) to
    source (a1 ^ a2, b1) and target (a2, b1 ^ b2); pointers agree when the
    target parity is 0.
    """
    w = np.asarray(weights, dtype=float)
    out = np.zeros(4)
    for (k1, p1), (k2, p2) in itertools.product(enumerate(w), repeat=2):
        a1, b1 = divmod(k1, 2)
        a2, b2 = divmod(k2, 2)
        if b1 == b2:
            out[2 * (a1 ^ a2) + b1] += p1 * p2
    p = float(out.sum())
    return p, out / p


def _werner_weights_aligned(f: float) -> np.ndarray:
    # the alignment swaps psi- with phi+, and psi+ with phi-
    return np.array([f, (1 - f) / 3, (1 - f) / 3, (1 - f) / 3])


def recurrence_map(f: float) -> tuple[float, float]:
    """``(p_keep, F')`` for a Werner input of singlet fidelity ``f``."""
    p, w = bell_diagonal_recurrence(_werner_weights_aligned(f))
    return p, float(w[0])


@dataclass(frozen=True)
class RecurrenceRound:
    round: int
    fidelity: float
    p_keep: float
    surviving_fraction: float


def bbpssw_iterate(f0: float, rounds: int) -> list[RecurrenceRound]:
    """Twirled recurrence rounds starting from a Werner state of fidelity ``f0``.

    Two pairs are consumed per kept pair, so the surviving fraction is
    multiplied by ``p_keep / 2`` each round.
    """
    if not 0.25 < f0 <= 1:
        raise ValidationError(f"initial fidelity {f0} outside (0.25, 1]")
    if rounds < 1:
        raise ValidationError("rounds must be >= 1")
    out = []
    f, frac = f0, 1.0
    for r in range(1, rounds + 1):
        p, f = recurrence_map(f)
        frac *= p / 2
        out.append(RecurrenceRound(r, f, p, frac))
    return out


@dataclass(frozen=True)
class HashingEstimate:
    e_d: float
    rounds: int
    yield_fraction: float
    communication: float


def recurrence_hashing_estimate(rho, max_rounds: int = 8) -> HashingEstimate:
    """Best of hashing after 0..max_rounds recurrence rounds, weighted by yield.

    Each round twirls, applies the closed-form recurrence and leaves a
    Bell-diagonal pair, on which hashing gives ``1 - S``. Communication is
    charged at one pointer qubit per pair entering a round.
    """
    m = linalg.as_matrix(rho.rho() if isinstance(rho, LabeledState) else rho)
    best = HashingEstimate(hashing_lower_bound(m), 0, 1.0, 0.0)
    v = singlet_vector()
    f = float(np.vdot(v, m @ v).real)
    frac, comm = 1.0, 0.0
    for r in range(1, max_rounds + 1):
        comm += frac
        p, w = bell_diagonal_recurrence(_werner_weights_aligned(f))
        frac *= p / 2
        f = float(w[0])
        rate = max(0.0, 1.0 - linalg.shannon_bits(w))
        if frac * rate > best.e_d:
            best = HashingEstimate(frac * rate, r, frac, comm)
    return best


@dataclass(frozen=True)
class DistillationLedger:
    e_f: float
    delta: float
    e_d: float
    e_bound: float
    w_p: float
    rounds: int
    yield_fraction: float
    shape: str

    def as_dict(self) -> dict:
        return {
            "e_f_single_copy": self.e_f,
            "delta": self.delta,
            "e_d_estimate": self.e_d,
            "e_bound_estimate": self.e_bound,
            "w_p": self.w_p,
            "rounds": self.rounds,
            "yield": self.yield_fraction,
            "shape": self.shape,
        }


def distillation_report(rho, max_rounds: int = 8, w_p: float | None = None) -> DistillationLedger:
    """Distillation balance for one input pair.

    ``delta`` is the purification surplus ``S(rho)``. ``e_d`` is the best
    recurrence-then-hashing yield and ``e_bound = e_f - e_d``; both are
    estimates for mixed inputs. ``w_p`` defaults to the pointer qubits the
    recurrence stage exchanges per input pair.
    """
    m = linalg.as_matrix(rho.rho() if isinstance(rho, LabeledState) else rho)
    state = LabeledState.from_density(two_qubit_layout(), m)
    if state.is_pure():
        e = entropy_of_entanglement(state)
        return DistillationLedger(e, 0.0, e, 0.0, 0.0 if w_p is None else w_p, 0, 1.0, "2a")
    e_f = entanglement_of_formation(m)
    delta = von_neumann_entropy(state)
    if is_ppt(state):
        est = HashingEstimate(0.0, 0, 1.0, 0.0)
    else:
        est = recurrence_hashing_estimate(m, max_rounds)
    e_d = min(est.e_d, e_f)
    if e_f <= 1e-12:
        shape = "separable"
    elif e_d <= 1e-12:
        shape = "2c"
    else:
        shape = "2b"
    return DistillationLedger(
        e_f=e_f,
        delta=delta,
        e_d=e_d,
        e_bound=e_f - e_d,
        w_p=est.communication if w_p is None else w_p,
        rounds=est.rounds,
        yield_fraction=est.yield_fraction,
        shape=shape,
    )


# ---------------------------------------------------------------- random runs

def random_transcript(seed: int, max_per_side: int = 4, max_total: int = 8) -> ProtocolTranscript:
    """Random local unitaries around one random Alice-to-Bob transmission."""
    rng = np.random.default_rng(seed)
    n_a = int(rng.integers(1, max_per_side + 1))
    n_b = int(rng.integers(0, min(max_per_side, max_total - n_a) + 1))
    layout = PartyLayout.of(
        *[(f"a{i}", Party.ALICE, Role.S) for i in range(n_a)],
        *[(f"b{i}", Party.BOB, Role.S) for i in range(n_b)],
    )
    initial = LabeledState.from_vector(layout, random_vector(n_a + n_b, rng))
    b = TranscriptBuilder(f"random_{seed}", initial)

    def local_unitaries(tag: str):
        for party in (Party.ALICE, Party.BOB):
            owned = b.current.layout.owned_by(party)
            if not owned:
                continue
            k = int(rng.integers(1, min(len(owned), 3) + 1))
            targets = list(rng.choice(owned, size=k, replace=False))
            b.unitary(f"{tag}_{party.value.lower()}", random_unitary(k, rng), targets)

    local_unitaries("pre")
    alice = b.current.layout.owned_by(Party.ALICE)
    k = int(rng.integers(1, len(alice) + 1))
    b.transmit(list(rng.choice(alice, size=k, replace=False)), to=Party.BOB)
    local_unitaries("post")
    return b.finish()
