"""Party-labeled multi-qubit states.

A :class:`LabeledState` is a pure vector or a density matrix over an ordered
register of qubits. Each qubit carries a label, an owner (Alice or Bob) and
a role: ``S`` for the signal system, ``M`` for measuring apparatus and
``R`` for environment. Tensor order is always the layout order, with the
first qubit as the most significant bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from . import linalg
from .linalg import ValidationError

NORM_TOL = 1e-10
NEG_EIG_TOL = 1e-9


class UnsupportedConfigurationError(ValueError):
    """Raised for inputs outside what the accounting model covers."""


class Party(str, Enum):
    ALICE = "Alice"
    BOB = "Bob"

    @property
    def other(self) -> "Party":
        return Party.BOB if self is Party.ALICE else Party.ALICE

    @classmethod
    def parse(cls, value) -> "Party":
        if isinstance(value, Party):
            return value
        key = str(value).strip().lower()
        if key in ("a", "alice"):
            return cls.ALICE
        if key in ("b", "bob"):
            return cls.BOB
        raise ValueError(f"unknown party {value!r}")


class Role(str, Enum):
    S = "S"
    M = "M"
    R = "R"


@dataclass(frozen=True)
class Qubit:
    label: str
    party: Party
    role: Role = Role.S


@dataclass(frozen=True)
class PartyLayout:
    qubits: tuple[Qubit, ...]

    def __post_init__(self):
        labels = [q.label for q in self.qubits]
        if len(set(labels)) != len(labels):
            raise ValidationError(f"duplicate qubit labels in layout: {labels}")

    @classmethod
    def of(cls, *specs) -> "PartyLayout":
        """Build a layout from ``(label, party, role)`` tuples or :class:`Qubit` objects."""
        qubits = []
        for spec in specs:
            if isinstance(spec, Qubit):
                qubits.append(spec)
            else:
                label, party, *rest = spec
                role = Role(rest[0]) if rest else Role.S
                qubits.append(Qubit(label, Party.parse(party), role))
        return cls(tuple(qubits))

    def __len__(self) -> int:
        return len(self.qubits)

    def __iter__(self):
        return iter(self.qubits)

    @property
    def labels(self) -> list[str]:
        return [q.label for q in self.qubits]

    def index(self, label: str) -> int:
        for i, q in enumerate(self.qubits):
            if q.label == label:
                return i
        raise KeyError(f"unknown qubit label {label!r}")

    def qubit(self, label: str) -> Qubit:
        return self.qubits[self.index(label)]

    def owned_by(self, party) -> list[str]:
        party = Party.parse(party)
        return [q.label for q in self.qubits if q.party is party]

    def with_role(self, party, role) -> list[str]:
        party = Party.parse(party)
        return [q.label for q in self.qubits if q.party is party and q.role is Role(role)]

    def m_count(self, party) -> int:
        return len(self.with_role(party, Role.M))

    def transfer(self, labels: Iterable[str], to) -> "PartyLayout":
        to = Party.parse(to)
        moved = set(labels)
        for label in moved:
            self.index(label)
        return PartyLayout(
            tuple(replace(q, party=to) if q.label in moved else q for q in self.qubits)
        )

    def subset(self, labels: Iterable[str]) -> "PartyLayout":
        keep = set(labels)
        return PartyLayout(tuple(q for q in self.qubits if q.label in keep))

    def __add__(self, other: "PartyLayout") -> "PartyLayout":
        return PartyLayout(self.qubits + other.qubits)

    def to_json(self) -> list[dict]:
        return [{"label": q.label, "party": q.party.value, "role": q.role.value} for q in self.qubits]

    @classmethod
    def from_json(cls, data) -> "PartyLayout":
        return cls.of(*[(d["label"], d["party"], d.get("role", "S")) for d in data])


@dataclass(frozen=True, eq=False)
class LabeledState:
    """Immutable state over a :class:`PartyLayout`.

    Exactly one of ``vector`` and ``density`` is set. Use
    :meth:`from_vector` / :meth:`from_density` to get validation.
    """

    layout: PartyLayout
    vector: np.ndarray | None = None
    density: np.ndarray | None = None

    @classmethod
    def from_vector(cls, layout: PartyLayout, amplitudes, validate: bool = True) -> "LabeledState":
        v = np.asarray(amplitudes, dtype=complex).reshape(-1)
        if v.shape[0] != 2 ** len(layout):
            raise ValidationError(
                f"{v.shape[0]} amplitudes do not match {len(layout)} qubits"
            )
        if validate:
            norm = float(np.vdot(v, v).real)
            if abs(norm - 1) > NORM_TOL:
                raise ValidationError(f"state vector not normalized (norm^2 = {norm!r})")
        v.setflags(write=False)
        return cls(layout, vector=v)

    @classmethod
    def from_density(cls, layout: PartyLayout, rho, validate: bool = True) -> "LabeledState":
        m = linalg.as_matrix(rho)
        d = 2 ** len(layout)
        if m.shape != (d, d):
            raise ValidationError(f"density of shape {m.shape} does not match {len(layout)} qubits")
        if validate:
            _check_density(m)
        m = (m + m.conj().T) / 2
        m.setflags(write=False)
        return cls(layout, density=m)

    @property
    def n_qubits(self) -> int:
        return len(self.layout)

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    @property
    def is_vector(self) -> bool:
        return self.vector is not None

    def rho(self) -> np.ndarray:
        if self.vector is not None:
            return np.outer(self.vector, self.vector.conj())
        return np.array(self.density)

    def purity(self) -> float:
        if self.vector is not None:
            return 1.0
        return float(np.real(np.trace(self.density @ self.density)))

    def is_pure(self, tol: float = 1e-9) -> bool:
        return self.purity() >= 1 - tol

    def as_vector(self, tol: float = 1e-9) -> np.ndarray:
        """State vector, extracted from a rank-1 density if needed (global phase arbitrary)."""
        if self.vector is not None:
            return np.array(self.vector)
        w, v = linalg.hermitian_eig(self.density)
        if w[0] < 1 - tol:
            raise UnsupportedConfigurationError("state is mixed; no state vector exists")
        return v[:, 0]

    def to_density(self) -> "LabeledState":
        if self.density is not None:
            return self
        return LabeledState.from_density(self.layout, self.rho(), validate=False)

    def relabel(self, layout: PartyLayout) -> "LabeledState":
        if len(layout) != len(self.layout):
            raise ValidationError("relabeling must keep the qubit count")
        return replace(self, layout=layout)

    def to_json(self) -> dict:
        out: dict = {"layout": self.layout.to_json()}
        if self.vector is not None:
            out["amplitudes"] = [[float(z.real), float(z.imag)] for z in self.vector]
        else:
            out["density"] = [[[float(z.real), float(z.imag)] for z in row] for row in self.density]
        return out

    @classmethod
    def from_json(cls, data: dict) -> "LabeledState":
        layout = PartyLayout.from_json(data["layout"])
        if "amplitudes" in data:
            amps = np.array([complex(re, im) for re, im in data["amplitudes"]])
            return cls.from_vector(layout, amps)
        if "density" in data:
            rho = np.array([[complex(re, im) for re, im in row] for row in data["density"]])
            return cls.from_density(layout, rho)
        raise ValidationError("state JSON needs 'amplitudes' or 'density'")


def _check_density(m: np.ndarray) -> None:
    err = linalg.hermiticity_error(m)
    if err > linalg.HERMITIAN_TOL:
        raise ValidationError(f"density not Hermitian (max deviation {err:.3e})")
    tr = np.trace(m)
    if abs(tr - 1) > NORM_TOL:
        raise ValidationError(f"density trace {tr.real:.12g} != 1")
    lo = linalg.hermitian_eigvals(m)[-1]
    if lo < -NEG_EIG_TOL:
        raise ValidationError(f"density has negative eigenvalue {lo:.3e}")


# ---------------------------------------------------------------- construction

def basis_state(layout: PartyLayout, bits: str | Sequence[int] | None = None) -> LabeledState:
    """Computational basis state; ``bits`` defaults to all zeros."""
    n = len(layout)
    if bits is None:
        bits = "0" * n
    bits = "".join(str(b) for b in bits)
    if len(bits) != n:
        raise ValidationError(f"{len(bits)} bits for {n} qubits")
    v = np.zeros(2**n, dtype=complex)
    v[int(bits, 2) if n else 0] = 1
    return LabeledState.from_vector(layout, v)


def tensor(*states: LabeledState) -> LabeledState:
    """Tensor product; layouts are concatenated in argument order."""
    layout = PartyLayout(tuple(q for s in states for q in s.layout.qubits))
    if all(s.is_vector for s in states):
        v = np.ones(1, dtype=complex)
        for s in states:
            v = np.kron(v, s.vector)
        return LabeledState.from_vector(layout, v, validate=False)
    rho = linalg.kron_all(*[s.rho() for s in states])
    return LabeledState.from_density(layout, rho, validate=False)


def singlet_vector() -> np.ndarray:
    """(|01> - |10>)/sqrt(2)."""
    return np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)


def bell_vectors() -> dict[str, np.ndarray]:
    s = 1 / np.sqrt(2)
    return {
        "phi+": np.array([s, 0, 0, s], dtype=complex),
        "phi-": np.array([s, 0, 0, -s], dtype=complex),
        "psi+": np.array([0, s, s, 0], dtype=complex),
        "psi-": singlet_vector(),
    }


def two_qubit_layout(a: str = "S_A", b: str = "S_B") -> PartyLayout:
    return PartyLayout.of((a, Party.ALICE, Role.S), (b, Party.BOB, Role.S))


def singlet(layout: PartyLayout | None = None) -> LabeledState:
    return LabeledState.from_vector(layout or two_qubit_layout(), singlet_vector())


def werner_matrix(fidelity: float) -> np.ndarray:
    """F |psi-><psi-| + (1 - F)/3 (I - |psi-><psi-|)."""
    p = np.outer(singlet_vector(), singlet_vector().conj())
    return fidelity * p + (1 - fidelity) / 3 * (np.eye(4) - p)


def werner(fidelity: float, layout: PartyLayout | None = None) -> LabeledState:
    if not 0 <= fidelity <= 1:
        raise ValidationError(f"Werner fidelity {fidelity} outside [0, 1]")
    return LabeledState.from_density(layout or two_qubit_layout(), werner_matrix(fidelity))


def maximally_mixed(layout: PartyLayout) -> LabeledState:
    d = 2 ** len(layout)
    return LabeledState.from_density(layout, np.eye(d) / d)


def default_layout(n_qubits: int, party=Party.ALICE, prefix: str = "q") -> PartyLayout:
    party = Party.parse(party)
    return PartyLayout(tuple(Qubit(f"{prefix}{i}", party, Role.S) for i in range(n_qubits)))


# ---------------------------------------------------------------- operations

def _axes(layout: PartyLayout, labels: Sequence[str]) -> list[int]:
    axes = [layout.index(label) for label in labels]
    if len(set(axes)) != len(axes):
        raise ValidationError(f"repeated target labels {list(labels)}")
    return axes


def _apply_on_axes(t: np.ndarray, u: np.ndarray, axes: list[int]) -> np.ndarray:
    k = len(axes)
    ut = u.reshape((2,) * (2 * k))
    out = np.tensordot(ut, t, axes=(list(range(k, 2 * k)), axes))
    return np.moveaxis(out, list(range(k)), axes)


def apply_unitary(s: LabeledState, u, targets: Sequence[str], check: bool = True) -> LabeledState:
    """Apply ``u`` to the qubits ``targets`` (in the listed order), identity elsewhere."""
    u = linalg.as_matrix(u)
    targets = list(targets)
    if u.shape != (2 ** len(targets), 2 ** len(targets)):
        raise ValidationError(
            f"unitary of shape {u.shape} does not act on {len(targets)} qubits"
        )
    if check and not linalg.is_unitary(u):
        raise ValidationError("matrix is not unitary")
    axes = _axes(s.layout, targets)
    n = s.n_qubits
    if s.is_vector:
        t = s.vector.reshape((2,) * n)
        t = _apply_on_axes(t, u, axes)
        return LabeledState.from_vector(s.layout, t.reshape(-1), validate=False)
    t = s.density.reshape((2,) * (2 * n))
    t = _apply_on_axes(t, u, axes)
    t = _apply_on_axes(t, u.conj(), [n + a for a in axes])
    return LabeledState.from_density(s.layout, t.reshape(2**n, 2**n), validate=False)


def partial_trace(s: LabeledState, keep: Sequence[str]) -> LabeledState:
    """Reduced density over ``keep``, which come out in their original relative order."""
    keep = list(keep)
    if not keep:
        raise ValidationError("partial_trace needs at least one qubit to keep")
    axes = sorted(_axes(s.layout, keep))
    n = s.n_qubits
    rest = [i for i in range(n) if i not in axes]
    layout = PartyLayout(tuple(s.layout.qubits[i] for i in axes))
    dk, dr = 2 ** len(axes), 2 ** len(rest)
    if s.is_vector:
        m = np.transpose(s.vector.reshape((2,) * n), axes + rest).reshape(dk, dr)
        rho = m @ m.conj().T
    else:
        t = s.density.reshape((2,) * (2 * n))
        perm = axes + rest + [n + i for i in axes] + [n + i for i in rest]
        t = np.transpose(t, perm).reshape(dk, dr, dk, dr)
        rho = np.einsum("ijkj->ik", t)
    return LabeledState.from_density(layout, rho, validate=False)


def reduced(s: LabeledState, party) -> LabeledState | None:
    """Reduced state of everything ``party`` holds; ``None`` if it holds nothing."""
    labels = s.layout.owned_by(party)
    if not labels:
        return None
    if len(labels) == s.n_qubits:
        return s
    return partial_trace(s, labels)


def spectrum(s: LabeledState) -> np.ndarray:
    if s.is_vector:
        w = np.zeros(s.dim)
        w[0] = 1.0
        return w
    return linalg.clamp_spectrum(linalg.hermitian_eigvals(s.density))


def von_neumann_entropy(s: LabeledState) -> float:
    """Entropy in bits."""
    if s.is_vector:
        return 0.0
    return linalg.shannon_bits(spectrum(s))


def schmidt_entropy(s: LabeledState, side: Sequence[str]) -> float:
    """Entropy of the reduced state on ``side`` for a pure global state.

    Uses the singular values of the amplitude matrix, which is cheaper and
    better conditioned than diagonalizing the reduced density.
    """
    side = list(side)
    if not side or len(side) == s.n_qubits:
        return 0.0
    v = s.as_vector()
    axes = sorted(_axes(s.layout, side))
    rest = [i for i in range(s.n_qubits) if i not in axes]
    m = np.transpose(v.reshape((2,) * s.n_qubits), axes + rest).reshape(2 ** len(axes), -1)
    sv = np.linalg.svd(m, compute_uv=False)
    return linalg.shannon_bits(linalg.clamp_spectrum(sv**2))


def purify(rho: LabeledState, party=Party.ALICE, prefix: str = "R_pur") -> LabeledState:
    """Pure state on the original qubits plus ``ceil(log2 rank)`` ancillas.

    Ancillas get role ``R`` and belong to ``party``. Tracing them out
    recovers ``rho``; their entanglement with the original qubits equals
    ``S(rho)``.
    """
    if rho.is_vector:
        return rho
    w, v = linalg.hermitian_eig(rho.density)
    w = linalg.clamp_spectrum(w)
    rank = int(np.count_nonzero(w > linalg.EIG_CLAMP))
    if rank < 1:
        raise ValidationError("density has no positive eigenvalue")
    if rank == 1:
        return LabeledState.from_vector(rho.layout, v[:, 0], validate=False)
    k = math.ceil(math.log2(rank))
    party = Party.parse(party)
    taken = set(rho.layout.labels)
    names = []
    i = 0
    while len(names) < k:
        name = f"{prefix}{i}"
        if name not in taken:
            names.append(name)
        i += 1
    anc = PartyLayout(tuple(Qubit(n, party, Role.R) for n in names))
    psi = np.zeros((rho.dim, 2**k), dtype=complex)
    weights = w[:rank] / np.sum(w[:rank])
    for j in range(rank):
        psi[:, j] = np.sqrt(weights[j]) * v[:, j]
    return LabeledState.from_vector(rho.layout + anc, psi.reshape(-1))


def fidelity(a: LabeledState, b: LabeledState) -> float:
    """Overlap fidelity; Uhlmann fidelity when both states are mixed."""
    if a.dim != b.dim:
        raise ValidationError(f"dimension mismatch {a.dim} vs {b.dim}")
    if a.is_vector and b.is_vector:
        return float(abs(np.vdot(a.vector, b.vector)) ** 2)
    if a.is_vector or b.is_vector:
        psi, mixed = (a, b) if a.is_vector else (b, a)
        val = np.vdot(psi.vector, mixed.density @ psi.vector).real
        return float(np.clip(val, 0.0, 1.0))
    w, v = linalg.hermitian_eig(a.density)
    sq = (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T
    inner = linalg.hermitian_eigvals(sq @ b.density @ sq)
    val = float(np.sum(np.sqrt(np.clip(inner, 0, None))) ** 2)
    return float(np.clip(val, 0.0, 1.0))


def transmit(s: LabeledState, labels: Sequence[str], to) -> LabeledState:
    """Hand ownership of ``labels`` to ``to``; amplitudes are not permuted."""
    return s.relabel(s.layout.transfer(labels, to))


# ---------------------------------------------------------------- randomness

def random_unitary(n_qubits: int, seed: int | np.random.Generator | None = None) -> np.ndarray:
    """Haar-random unitary on ``n_qubits`` via QR with phase correction."""
    if n_qubits < 1:
        raise ValidationError("n_qubits must be >= 1")
    rng = np.random.default_rng(seed)
    d = 2**n_qubits
    g = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(g)
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def random_vector(n_qubits: int, seed: int | np.random.Generator | None = None) -> np.ndarray:
    if n_qubits < 1:
        raise ValidationError("n_qubits must be >= 1")
    rng = np.random.default_rng(seed)
    d = 2**n_qubits
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


def random_pure_state(
    n_qubits: int,
    seed: int | np.random.Generator | None = None,
    layout: PartyLayout | None = None,
) -> LabeledState:
    """Haar-random pure state; the layout defaults to ``q0..q{n-1}`` owned by Alice."""
    layout = layout or default_layout(n_qubits)
    if len(layout) != n_qubits:
        raise ValidationError("layout size does not match n_qubits")
    return LabeledState.from_vector(layout, random_vector(n_qubits, seed))


def random_density(
    n_qubits: int,
    seed: int | np.random.Generator | None = None,
    layout: PartyLayout | None = None,
    rank: int | None = None,
) -> LabeledState:
    """Random mixed state: reduced state of a Haar-random purification."""
    layout = layout or default_layout(n_qubits)
    rng = np.random.default_rng(seed)
    d = 2**n_qubits
    rank = rank or d
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    rho = g @ g.conj().T
    return LabeledState.from_density(layout, rho / np.trace(rho).real)


def permute(s: LabeledState, order: Sequence[str]) -> LabeledState:
    """Same state with the layout (and tensor factors) reordered to ``order``."""
    order = list(order)
    if sorted(order) != sorted(s.layout.labels):
        raise ValidationError("permutation must list every qubit exactly once")
    axes = [s.layout.index(label) for label in order]
    layout = PartyLayout(tuple(s.layout.qubits[i] for i in axes))
    n = s.n_qubits
    if s.is_vector:
        v = np.transpose(s.vector.reshape((2,) * n), axes).reshape(-1)
        return LabeledState.from_vector(layout, v, validate=False)
    t = np.transpose(s.density.reshape((2,) * (2 * n)), axes + [n + a for a in axes])
    return LabeledState.from_density(layout, t.reshape(2**n, 2**n), validate=False)


def marginal(s: LabeledState, labels: Sequence[str]) -> LabeledState:
    """Reduced state on ``labels`` with factors in the listed order."""
    return permute(partial_trace(s, labels), labels)
