"""Brute-force reference computations, deliberately independent of the package code paths.

Everything here works on explicit full-size matrices built from index loops
and permutation matrices, never on the tensordot/SVD routes used by qcbalance.
"""

import itertools
import math

import numpy as np

SINGLET = np.array([0, 1, -1, 0], dtype=complex) / math.sqrt(2)


def werner_by_hand(f):
    p = np.outer(SINGLET, SINGLET.conj())
    return f * p + (1 - f) / 3 * (np.eye(4) - p)


def partial_trace_loops(rho, n, keep):
    """Reduced density by explicit index contraction."""
    keep = sorted(keep)
    rest = [i for i in range(n) if i not in keep]
    dk = 2 ** len(keep)
    out = np.zeros((dk, dk), dtype=complex)
    for i, j in itertools.product(range(dk), repeat=2):
        bi = format(i, f"0{len(keep)}b")
        bj = format(j, f"0{len(keep)}b")
        for r in range(2 ** len(rest)):
            br = format(r, f"0{len(rest)}b") if rest else ""
            row = ["0"] * n
            col = ["0"] * n
            for pos, q in enumerate(keep):
                row[q] = bi[pos]
                col[q] = bj[pos]
            for pos, q in enumerate(rest):
                row[q] = br[pos]
                col[q] = br[pos]
            out[i, j] += rho[int("".join(row), 2), int("".join(col), 2)]
    return out


def entropy_bits(rho):
    w = np.linalg.eigvals(rho).real
    w = w[w > 1e-13]
    return float(-np.sum(w * np.log2(w)))


def basis_permutation_gate(n, fn):
    """Full 2^n x 2^n permutation matrix for a classical reversible map on bit tuples."""
    d = 2**n
    u = np.zeros((d, d))
    for x in range(d):
        bits = [int(b) for b in format(x, f"0{n}b")]
        y = int("".join(str(b) for b in fn(bits)), 2)
        u[y, x] = 1
    return u


def cnot_full(n, control, target):
    def fn(bits):
        bits = list(bits)
        bits[target] ^= bits[control]
        return bits

    return basis_permutation_gate(n, fn)


def local_full(n, qubit, u):
    mats = [np.eye(2)] * n
    mats[qubit] = u
    out = np.ones((1, 1))
    for m in mats:
        out = np.kron(out, m)
    return out


def concurrence_spin_flip(rho):
    """Square roots of the (non-Hermitian) spectrum of rho * rho~."""
    yy = np.array([[0, 0, 0, -1], [0, 0, 1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]], dtype=complex)
    r = rho @ yy @ rho.conj() @ yy
    lam = np.sort(np.sqrt(np.clip(np.linalg.eigvals(r).real, 0, None)))[::-1]
    return max(0.0, lam[0] - lam[1] - lam[2] - lam[3])


def eof_from_c(c):
    if c == 0:
        return 0.0
    x = (1 + math.sqrt(1 - c * c)) / 2
    return -x * math.log2(x) - (1 - x) * math.log2(1 - x) if 0 < x < 1 else 0.0


def twirl_haar_monte_carlo(rho, samples, rng):
    out = np.zeros((4, 4), dtype=complex)
    for _ in range(samples):
        g = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        q, r = np.linalg.qr(g)
        q = q * (np.diag(r) / abs(np.diag(r)))
        u = np.kron(q, q)
        out += u @ rho @ u.conj().T
    return out / samples


def bbpssw_brute_force(rho):
    """One recurrence round on 8 qubits: pairs, pointers and environment, all as full matrices.

    Qubit order: A1 B1 A2 B2 P_A P_B R_A R_B. The twirl is skipped (inputs
    here are already Werner); Bob's alignment rotation XZ takes the singlet
    to phi+ before the round and is undone afterwards.
    """
    xz = np.array([[0, -1], [1, 0]], dtype=complex)
    align = np.kron(np.eye(2), xz)
    a = align @ rho @ align.conj().T
    zero4 = np.zeros((16, 16))
    zero4[0, 0] = 1
    state = np.kron(np.kron(a, a), zero4)
    n = 8
    for c, t in [(0, 2), (1, 3), (2, 4), (3, 5), (4, 6), (5, 7)]:
        u = cnot_full(n, c, t)
        state = u @ state @ u.T
    agree = np.zeros((2**n, 2**n))
    for x in range(2**n):
        bits = format(x, "08b")
        if bits[4] == bits[5]:
            agree[x, x] = 1
    kept = agree @ state @ agree
    p = np.trace(kept).real
    src = partial_trace_loops(kept, n, [0, 1]) / p
    src = align.conj().T @ src @ align
    return p, src


def fidelity_with_singlet(rho):
    return float(np.vdot(SINGLET, rho @ SINGLET).real)
