"""Entanglement measures and the formation = distillable + bound decomposition."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from enum import Enum

import numpy as np

from . import linalg
from .linalg import ValidationError
from .qstate import (
    LabeledState,
    Party,
    UnsupportedConfigurationError,
    partial_trace,
    two_qubit_layout,
    von_neumann_entropy,
)

PPT_TOL = 1e-9
PURE_TOL = 1e-9
SIDE_AGREEMENT_TOL = 1e-8
DEFAULT_MAX_ROUNDS = 8

_YY = np.kron(linalg.Y, linalg.Y)


def _as_state(rho) -> LabeledState:
    if isinstance(rho, LabeledState):
        return rho
    m = linalg.as_matrix(rho)
    if m.shape[1] == 1:
        return LabeledState.from_vector(two_qubit_layout(), m[:, 0])
    return LabeledState.from_density(two_qubit_layout(), m)


def _two_qubit_matrix(rho) -> np.ndarray:
    s = _as_state(rho)
    if s.n_qubits != 2:
        raise ValidationError(f"expected a two-qubit state, got {s.n_qubits} qubits")
    return s.rho()


def binary_entropy(p: float) -> float:
    return linalg.shannon_bits([p, 1 - p])


def entropy_of_entanglement(psi, cut=Party.ALICE) -> float:
    """Reduced-state entropy of a pure bipartite state, checked from both sides."""
    s = _as_state(psi)
    if not s.is_vector:
        if not s.is_pure(PURE_TOL):
            raise UnsupportedConfigurationError("entropy of entanglement needs a pure state")
        s = LabeledState.from_vector(s.layout, s.as_vector(), validate=False)
    cut = Party.parse(cut)
    mine = s.layout.owned_by(cut)
    theirs = s.layout.owned_by(cut.other)
    if not mine or not theirs:
        return 0.0
    a = von_neumann_entropy(partial_trace(s, mine))
    b = von_neumann_entropy(partial_trace(s, theirs))
    if abs(a - b) > SIDE_AGREEMENT_TOL:
        raise linalg.NumericError(f"reduced entropies disagree: {a!r} vs {b!r}")
    return a


def concurrence(rho) -> float:
    """Wootters concurrence from the spin-flipped spectrum.

    With ``rho = W W^dagger``, the square roots of the eigenvalues of
    ``rho (Y x Y) rho* (Y x Y)`` are the singular values of
    ``W^T (Y x Y) W``. Working with singular values avoids taking square
    roots of round-off eigenvalues on rank-deficient inputs.
    """
    m = _two_qubit_matrix(rho)
    w, v = linalg.hermitian_eig(m)
    keep = w > linalg.EIG_CLAMP
    factor = v[:, keep] * np.sqrt(w[keep])
    lam = np.zeros(4)
    sv = np.linalg.svd(factor.T @ _YY @ factor, compute_uv=False)
    lam[: len(sv)] = sv
    c = lam[0] - lam[1] - lam[2] - lam[3]
    return float(min(max(c, 0.0), 1.0))


def formation_from_concurrence(c: float) -> float:
    if c <= 0:
        return 0.0
    return binary_entropy((1 + np.sqrt(max(0.0, 1 - c * c))) / 2)


def entanglement_of_formation(rho) -> float:
    """Single-copy two-qubit entanglement of formation in ebits."""
    return formation_from_concurrence(concurrence(rho))


def partial_transpose(s: LabeledState, cut=Party.ALICE) -> np.ndarray:
    cut = Party.parse(cut)
    mine = s.layout.owned_by(cut)
    if not mine or len(mine) == s.n_qubits:
        raise ValidationError("cut must leave qubits on both sides")
    n = s.n_qubits
    t = s.rho().reshape((2,) * (2 * n))
    perm = list(range(2 * n))
    for label in mine:
        i = s.layout.index(label)
        perm[i], perm[n + i] = perm[n + i], perm[i]
    return np.transpose(t, perm).reshape(2**n, 2**n)


def negativity(rho, cut=Party.ALICE) -> float:
    """Sum of the magnitudes of negative partial-transpose eigenvalues."""
    w = linalg.hermitian_eigvals(partial_transpose(_as_state(rho), cut))
    return float(-np.sum(w[w < 0]))


def log_negativity(rho, cut=Party.ALICE) -> float:
    return float(np.log2(2 * negativity(rho, cut) + 1))


def is_ppt(rho, cut=Party.ALICE) -> bool:
    w = linalg.hermitian_eigvals(partial_transpose(_as_state(rho), cut))
    return bool(w[-1] >= -PPT_TOL)


def hashing_lower_bound(rho) -> float:
    """One-way hashing yield, ``max(0, max(S(A), S(B)) - S(AB))`` ebits per pair.

    On Bell-diagonal inputs both marginals are maximally mixed and this is
    ``max(0, 1 - S(rho))``. The coherent-information form keeps it a valid
    lower bound for states with non-maximal marginals, e.g. product states.
    """
    s = _as_state(rho)
    if s.n_qubits != 2:
        raise ValidationError("hashing bound is implemented for two-qubit states")
    s_ab = von_neumann_entropy(s)
    labels = s.layout.labels
    s_a = von_neumann_entropy(partial_trace(s, labels[:1]))
    s_b = von_neumann_entropy(partial_trace(s, labels[1:]))
    return max(0.0, max(s_a, s_b) - s_ab)


class Classification(str, Enum):
    PURE = "Pure"
    FREE_MIXED = "FreeMixed"
    PPT_SEPARABLE_OR_BOUND = "PptSeparableOrBound"
    SEPARABLE = "Separable"


@dataclass(frozen=True)
class GibbsHelmholtzRecord:
    e_f: float
    e_d_lower: float
    e_d_upper: float
    e_bound_lower: float
    e_bound_upper: float
    classification: Classification
    negativity: float = 0.0
    concurrence: float | None = None

    def as_dict(self) -> dict:
        d = asdict(self)
        d["classification"] = self.classification.value
        # single-copy Wootters value, not the regularized quantity
        d["e_f_single_copy"] = d.pop("e_f")
        return d

    @property
    def strict_irreversibility(self) -> bool:
        return self.e_f - self.e_d_upper > 1e-9


def gibbs_helmholtz(rho, cut=Party.ALICE, max_rounds: int = DEFAULT_MAX_ROUNDS) -> GibbsHelmholtzRecord:
    """Bracket the decomposition ``E_F = E_D + E_bound``.

    Pure inputs of any size give ``E_D = E_F`` and zero bound entanglement.
    Mixed inputs must be two-qubit; ``E_D`` is bracketed below by hashing
    (directly or after recurrence rounds) and above by ``min(E_F, log
    negativity)``.
    """
    s = _as_state(rho)
    cut = Party.parse(cut)
    if s.is_vector or s.is_pure(PURE_TOL):
        e = entropy_of_entanglement(s, cut)
        return GibbsHelmholtzRecord(e, e, e, 0.0, 0.0, Classification.PURE)
    if s.n_qubits != 2 or len(s.layout.owned_by(cut)) != 1:
        raise UnsupportedConfigurationError(
            "mixed-state brackets are available for two-qubit cuts only"
        )
    from .protocols import recurrence_hashing_estimate

    c = concurrence(s)
    e_f = formation_from_concurrence(c)
    neg = negativity(s, cut)
    ppt = is_ppt(s, cut)
    if ppt:
        e_d_lower = 0.0
    else:
        e_d_lower = max(hashing_lower_bound(s), recurrence_hashing_estimate(s, max_rounds).e_d)
    e_d_upper = min(e_f, float(np.log2(2 * neg + 1)))
    e_d_lower = min(e_d_lower, e_d_upper)
    if ppt:
        cls = Classification.SEPARABLE if c <= 1e-12 else Classification.PPT_SEPARABLE_OR_BOUND
    else:
        cls = Classification.FREE_MIXED
    return GibbsHelmholtzRecord(
        e_f=e_f,
        e_d_lower=e_d_lower,
        e_d_upper=e_d_upper,
        e_bound_lower=max(0.0, e_f - e_d_upper),
        e_bound_upper=max(0.0, e_f - e_d_lower),
        classification=cls,
        negativity=neg,
        concurrence=c,
    )
