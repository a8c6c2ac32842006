"""Information accounting for closed bipartite systems.

For a pure global state shared between Alice and Bob:

* informational content of a party: ``I = log2(dim) - S(reduced)``
* cut entanglement: ``E = S(reduced Alice) = S(reduced Bob)``
* physical work: number of qubits transmitted
* logical work: gain in the receiver's informational content
* useful work: log2 of the largest subspace the run transmits faithfully

Balance: ``E_in + W_p = E_out + W_l``. Conservation: ``I_A + I_B + 2E`` is
constant under local unitaries.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from . import linalg
from .linalg import ValidationError
from .qstate import (
    LabeledState,
    Party,
    PartyLayout,
    UnsupportedConfigurationError,
    marginal,
    partial_trace,
    permute,
    random_vector,
    reduced,
    schmidt_entropy,
    tensor,
    von_neumann_entropy,
)
from .transcript import ProtocolTranscript, TransmitStep, replay

BALANCE_TOL = 1e-8
SIDE_AGREEMENT_TOL = 1e-8
PURE_TOL = 1e-9

DEFAULT_TRIALS = 64
DEFAULT_EPSILON = 1e-6


def _party_entropy(s: LabeledState, party: Party) -> float:
    labels = s.layout.owned_by(party)
    if not labels:
        return 0.0
    if s.is_vector:
        return schmidt_entropy(s, labels)
    return von_neumann_entropy(reduced(s, party))


def informational_content(s: LabeledState, party) -> float:
    """``log2 dim - S`` of everything ``party`` holds (0 when it holds nothing)."""
    party = Party.parse(party)
    n = len(s.layout.owned_by(party))
    if n == 0:
        return 0.0
    return n - _party_entropy(s, party)


def physical_work(
    transmission: Sequence[str],
    state: LabeledState | None = None,
    sender=None,
) -> float:
    """Number of transmitted qubits.

    M-role and S-role particles are charged identically. With ``state`` and
    ``sender`` given, ownership is checked before counting.
    """
    labels = list(transmission)
    if state is not None and sender is not None:
        sender = Party.parse(sender)
        for label in labels:
            if state.layout.qubit(label).party is not sender:
                raise ValidationError(f"qubit {label!r} is not owned by {sender.value}")
    if len(set(labels)) != len(labels):
        raise ValidationError("a qubit cannot be transmitted twice in one step")
    return float(len(labels))


def logical_work(before: LabeledState, after: LabeledState, receiver) -> float:
    return informational_content(after, receiver) - informational_content(before, receiver)


def _pure_view(s: LabeledState) -> LabeledState:
    if s.is_vector:
        return s
    if not s.is_pure(PURE_TOL):
        raise UnsupportedConfigurationError(
            "cut entanglement is defined here only for pure global states"
        )
    return LabeledState.from_vector(s.layout, s.as_vector(), validate=False)


def cut_entanglement(s: LabeledState, cut=Party.ALICE) -> float:
    """Entropy of entanglement across the Alice|Bob cut of a pure global state.

    ``cut`` picks which side's reduced state is reported; the other side is
    computed independently and must agree within ``SIDE_AGREEMENT_TOL``.
    """
    cut = Party.parse(cut)
    s = _pure_view(s)
    mine = s.layout.owned_by(cut)
    theirs = s.layout.owned_by(cut.other)
    if not mine or not theirs:
        return 0.0
    e_svd = schmidt_entropy(s, mine)
    # the smaller side is cheaper to diagonalize
    side = mine if len(mine) <= len(theirs) else theirs
    e_rho = von_neumann_entropy(partial_trace(s, side))
    if abs(e_svd - e_rho) > SIDE_AGREEMENT_TOL:
        raise linalg.NumericError(
            f"reduced entropies disagree across the cut: {e_svd!r} vs {e_rho!r}"
        )
    return e_svd


def conservation_total(s: LabeledState) -> float:
    """``I_A + I_B + 2E``."""
    return (
        informational_content(s, Party.ALICE)
        + informational_content(s, Party.BOB)
        + 2 * cut_entanglement(s)
    )


@dataclass(frozen=True)
class Snapshot:
    step: int
    name: str
    i_a: float
    i_b: float
    e: float
    w_p: float
    conservation: float


@dataclass(frozen=True)
class BalanceLedger:
    protocol: str
    receiver: str
    i_a_in: float
    i_a_out: float
    i_b_in: float
    i_b_out: float
    e_in: float
    e_out: float
    w_p: float
    w_l: float
    w_u: float
    conservation_in: float
    conservation_out: float
    residual: float
    segment_residual: float
    balance_ok: bool
    second_principle_ok: bool
    conservation_ok: bool

    @property
    def ok(self) -> bool:
        return self.balance_ok and self.second_principle_ok and self.conservation_ok

    def as_dict(self) -> dict:
        return asdict(self)


def _receiver(t: ProtocolTranscript) -> Party:
    sends = t.transmissions
    if not sends:
        return Party.BOB
    receivers = {st.receiver for st in sends}
    if len(receivers) > 1:
        raise UnsupportedConfigurationError(
            "transcripts with transmissions in both directions need separate ledgers"
        )
    return receivers.pop()


def snapshots(t: ProtocolTranscript) -> list[Snapshot]:
    """Ledger quantities at the initial state and after every step."""
    out = []
    w_p = 0.0
    states = (t.initial,) + t.states
    names = ("initial",) + tuple(_step_name(st) for st in t.steps)
    for k, (s, name) in enumerate(zip(states, names)):
        if k > 0 and isinstance(t.steps[k - 1], TransmitStep):
            w_p += physical_work(t.steps[k - 1].labels)
        i_a = informational_content(s, Party.ALICE)
        i_b = informational_content(s, Party.BOB)
        e = cut_entanglement(s)
        out.append(Snapshot(k, name, i_a, i_b, e, w_p, i_a + i_b + 2 * e))
    return out


def _step_name(st) -> str:
    if isinstance(st, TransmitStep):
        return f"transmit {'+'.join(st.labels)} -> {st.receiver.value}"
    return getattr(st, "name", None) or f"decohere {'+'.join(st.measured)}"


def check_balance(
    t: ProtocolTranscript,
    trials: int = DEFAULT_TRIALS,
    epsilon: float = DEFAULT_EPSILON,
    seed: int = 0,
    subspace_dim: int | None = None,
) -> BalanceLedger:
    """Fill a :class:`BalanceLedger` for a completed transcript.

    Useful work is certified only when the transcript declares a channel;
    otherwise it is reported as 0.
    """
    if t.initial is None or t.final is None:
        raise ValidationError("transcript is incomplete")
    receiver = _receiver(t)
    snaps = snapshots(t)
    first, last = snaps[0], snaps[-1]
    e_in, e_out = first.e, last.e
    w_p = last.w_p
    if receiver is Party.BOB:
        w_l = last.i_b - first.i_b
    else:
        w_l = last.i_a - first.i_a
    residual = e_in + w_p - e_out - w_l

    # conservation is checked between consecutive snapshots with no transmission in between
    seg = 0.0
    for k, st in enumerate(t.steps):
        if not isinstance(st, TransmitStep):
            seg = max(seg, abs(snaps[k + 1].conservation - snaps[k].conservation))

    w_u = 0.0
    if t.channel is not None:
        dim = subspace_dim or 2 ** len(t.channel.inputs)
        w_u = useful_work(t, dim, trials=trials, epsilon=epsilon, seed=seed)

    return BalanceLedger(
        protocol=t.name,
        receiver=receiver.value,
        i_a_in=first.i_a,
        i_a_out=last.i_a,
        i_b_in=first.i_b,
        i_b_out=last.i_b,
        e_in=e_in,
        e_out=e_out,
        w_p=w_p,
        w_l=w_l,
        w_u=w_u,
        conservation_in=first.conservation,
        conservation_out=last.conservation,
        residual=residual,
        segment_residual=seg,
        balance_ok=abs(residual) <= BALANCE_TOL,
        second_principle_ok=e_out - e_in <= w_p + BALANCE_TOL,
        conservation_ok=seg <= BALANCE_TOL,
    )


def _substitute(initial: LabeledState, inputs: Sequence[str], psi: np.ndarray) -> LabeledState:
    """Replace the input register of a product initial state by ``psi``."""
    inputs = list(inputs)
    rest = [label for label in initial.layout.labels if label not in inputs]
    init = _pure_view(initial)
    if schmidt_entropy(init, inputs) > PURE_TOL:
        raise UnsupportedConfigurationError(
            "channel input is entangled with the rest of the initial state"
        )
    in_layout = PartyLayout(tuple(init.layout.qubit(x) for x in inputs))
    test = LabeledState.from_vector(in_layout, psi, validate=False)
    if not rest:
        return permute(test, initial.layout.labels)
    rest_vec = marginal(init, rest).as_vector()
    rest_layout = PartyLayout(tuple(init.layout.qubit(x) for x in rest))
    env = LabeledState.from_vector(rest_layout, rest_vec, validate=False)
    return permute(tensor(test, env), initial.layout.labels)


def useful_work(
    t: ProtocolTranscript,
    subspace_dim: int,
    trials: int = DEFAULT_TRIALS,
    epsilon: float = DEFAULT_EPSILON,
    seed: int = 0,
) -> float:
    """Certified faithful qubits of the transcript's channel.

    The subspace is spanned by the first ``subspace_dim`` computational basis
    states of the input register. It is certified when every basis state and
    ``trials`` Haar-random superpositions inside it reach the output register
    with fidelity at least ``1 - epsilon``. Returns ``log2(subspace_dim)`` on
    success and 0 otherwise.
    """
    if t.channel is None:
        raise ValidationError("transcript declares no channel")
    k = len(t.channel.inputs)
    if subspace_dim < 1 or subspace_dim & (subspace_dim - 1):
        raise ValidationError("subspace_dim must be a power of two")
    if subspace_dim > 2**k:
        raise ValidationError(
            f"subspace of dimension {subspace_dim} exceeds the {k}-qubit input register"
        )
    if subspace_dim == 1:
        return 0.0
    rng = np.random.default_rng(seed)
    tests = []
    for j in range(subspace_dim):
        v = np.zeros(2**k, dtype=complex)
        v[j] = 1
        tests.append(v)
    n_sub = int(math.log2(subspace_dim))
    for _ in range(trials):
        v = np.zeros(2**k, dtype=complex)
        v[:subspace_dim] = random_vector(n_sub, rng)
        tests.append(v)
    for psi in tests:
        start = _substitute(t.initial, t.channel.inputs, psi)
        end = replay(t.steps, start)
        out = marginal(end, t.channel.outputs)
        f = float(np.vdot(psi, out.density @ psi).real)
        if f < 1 - epsilon:
            return 0.0
    return float(n_sub)
