"""Protocol transcripts: an initial state, an ordered step list, and the states in between."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from . import linalg
from .linalg import ValidationError
from .qstate import LabeledState, Party, apply_unitary, marginal, transmit

FRESH_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class UnitaryStep:
    name: str
    matrix: np.ndarray
    targets: tuple[str, ...]

    def apply(self, s: LabeledState) -> LabeledState:
        return apply_unitary(s, self.matrix, self.targets)

    def describe(self) -> dict:
        return {"kind": "unitary", "name": self.name, "targets": list(self.targets)}


@dataclass(frozen=True)
class TransmitStep:
    labels: tuple[str, ...]
    sender: Party
    receiver: Party

    def apply(self, s: LabeledState) -> LabeledState:
        for label in self.labels:
            owner = s.layout.qubit(label).party
            if owner is not self.sender:
                raise ValidationError(
                    f"qubit {label!r} belongs to {owner.value}, not sender {self.sender.value}"
                )
        return transmit(s, self.labels, self.receiver)

    def describe(self) -> dict:
        return {
            "kind": "transmit",
            "labels": list(self.labels),
            "from": self.sender.value,
            "to": self.receiver.value,
        }


@dataclass(frozen=True)
class DecohereStep:
    """C-NOT from each measured (M) qubit into an untouched environment (R) qubit."""

    measured: tuple[str, ...]
    environment: tuple[str, ...]

    def apply(self, s: LabeledState) -> LabeledState:
        if len(self.measured) != len(self.environment):
            raise ValidationError("each measured qubit needs one environment qubit")
        for env in self.environment:
            require_zero(s, env)
        for m, env in zip(self.measured, self.environment):
            s = apply_unitary(s, linalg.CNOT, [m, env], check=False)
        return s

    def describe(self) -> dict:
        return {
            "kind": "decohere",
            "measured": list(self.measured),
            "environment": list(self.environment),
        }


Step = Union[UnitaryStep, TransmitStep, DecohereStep]


def require_zero(s: LabeledState, label: str) -> None:
    p0 = marginal(s, [label]).density[0, 0].real
    if p0 < 1 - FRESH_TOL:
        raise ValidationError(f"qubit {label!r} is not in |0> (population {p0:.3e})")


@dataclass(frozen=True)
class Channel:
    """Designated input and output registers, used to certify useful work."""

    inputs: tuple[str, ...]
    outputs: tuple[str, ...]

    def __post_init__(self):
        if len(self.inputs) != len(self.outputs):
            raise ValidationError("channel input and output registers differ in size")


@dataclass(frozen=True, eq=False)
class ProtocolTranscript:
    name: str
    initial: LabeledState
    steps: tuple[Step, ...]
    states: tuple[LabeledState, ...]
    channel: Channel | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.states) != len(self.steps):
            raise ValidationError("one recorded state per step is required")

    @property
    def final(self) -> LabeledState:
        return self.states[-1] if self.states else self.initial

    @property
    def transmissions(self) -> list[TransmitStep]:
        return [st for st in self.steps if isinstance(st, TransmitStep)]

    def describe(self) -> list[dict]:
        return [st.describe() for st in self.steps]


def replay(steps: Sequence[Step], initial: LabeledState) -> LabeledState:
    s = initial
    for st in steps:
        s = st.apply(s)
    return s


class TranscriptBuilder:
    """Applies steps eagerly while recording them.

    >>> b = TranscriptBuilder("demo", state)
    >>> b.transmit(["S_A"], to="Bob")
    >>> t = b.finish()
    """

    def __init__(self, name: str, initial: LabeledState, channel: Channel | None = None):
        self.name = name
        self.initial = initial
        self.channel = channel
        self.meta: dict = {}
        self._steps: list[Step] = []
        self._states: list[LabeledState] = []

    @classmethod
    def extend(cls, t: ProtocolTranscript, name: str | None = None) -> "TranscriptBuilder":
        b = cls(name or t.name, t.initial, t.channel)
        b._steps = list(t.steps)
        b._states = list(t.states)
        b.meta = dict(t.meta)
        return b

    @property
    def current(self) -> LabeledState:
        return self._states[-1] if self._states else self.initial

    def add(self, step: Step) -> LabeledState:
        nxt = step.apply(self.current)
        self._steps.append(step)
        self._states.append(nxt)
        return nxt

    def unitary(self, name: str, u, targets: Sequence[str]) -> LabeledState:
        return self.add(UnitaryStep(name, linalg.as_matrix(u), tuple(targets)))

    def transmit(self, labels: Sequence[str], to) -> LabeledState:
        to = Party.parse(to)
        return self.add(TransmitStep(tuple(labels), to.other, to))

    def decohere(self, measured: Sequence[str], environment: Sequence[str]) -> LabeledState:
        return self.add(DecohereStep(tuple(measured), tuple(environment)))

    def finish(self) -> ProtocolTranscript:
        return ProtocolTranscript(
            self.name,
            self.initial,
            tuple(self._steps),
            tuple(self._states),
            self.channel,
            dict(self.meta),
        )
