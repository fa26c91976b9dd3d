"""Dense statevector simulator used as an independent brute-force oracle.

Amplitude index bit ``q`` is qubit ``q`` (qubit 0 least significant). A
19-qubit state is 2**19 complex128 values (8 MiB); the hard ceiling is 20
qubits (16 MiB per state, a few copies live at once during gate application).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

MAX_QUBITS = 20
_SQRT_HALF = 1.0 / np.sqrt(2.0)

_MATRICES = {
    "H": np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT_HALF,
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
}


class OracleError(ValueError):
    pass


@lru_cache(maxsize=4)
def _index_array(n: int) -> np.ndarray:
    idx = np.arange(1 << n, dtype=np.int64)
    idx.flags.writeable = False
    return idx


@dataclass
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    @classmethod
    def zeros(cls, n: int) -> "StateVector":
        if not 1 <= n <= MAX_QUBITS:
            raise OracleError(f"statevector oracle supports 1..{MAX_QUBITS} qubits, got {n}")
        amp = np.zeros(1 << n, dtype=complex)
        amp[0] = 1.0
        return cls(n, amp)

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amplitudes.copy())

    def norm(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def _index(self) -> np.ndarray:
        return _index_array(self.n_qubits)


def _one_qubit(state: StateVector, m: np.ndarray, q: int):
    n = state.n_qubits
    psi = state.amplitudes.reshape(1 << (n - q - 1), 2, 1 << q)
    lo, hi = psi[:, 0, :], psi[:, 1, :]
    out = np.empty_like(psi)
    out[:, 0, :] = m[0, 0] * lo + m[0, 1] * hi
    out[:, 1, :] = m[1, 0] * lo + m[1, 1] * hi
    state.amplitudes = out.reshape(-1)


def sv_apply(state: StateVector, gate: str, targets: Sequence[int]) -> StateVector:
    """Apply H/X/Y/Z/S or CNOT in place and return the state."""
    g = gate.upper()
    for q in targets:
        if not 0 <= q < state.n_qubits:
            raise OracleError(f"qubit {q} out of range")
    if len(set(targets)) != len(targets):
        raise OracleError("duplicate targets")
    if g in ("CX", "CNOT"):
        c, t = targets
        idx = state._index()
        src = idx ^ (((idx >> c) & 1) << t)
        state.amplitudes = state.amplitudes[src]
    elif g in _MATRICES:
        (q,) = targets
        _one_qubit(state, _MATRICES[g], q)
    else:
        raise OracleError(f"unsupported gate {gate!r}")
    return state


def pauli_matrix_apply(state: StateVector, pauli) -> np.ndarray:
    """Return P|psi> for a PauliString-like object (x_bits, z_bits, phase_exp)."""
    idx = state._index()
    x, z = pauli.x_bits, pauli.z_bits
    out = state.amplitudes[idx ^ x]
    # P = i^phase * prod_j sigma_j with Y = i X Z: |b> -> i^{#Y} (-1)^{z.(b^x)} |b^x>
    par = np.bitwise_count(np.bitwise_and(idx ^ x, z)) & 1
    signs = 1 - 2 * par.astype(np.int8)
    n_y = (x & z).bit_count()
    return (1j ** ((pauli.phase_exp + n_y) % 4)) * signs * out


def sv_expectation(state: StateVector, pauli) -> float:
    return float(np.vdot(state.amplitudes, pauli_matrix_apply(state, pauli)).real)


def sv_project(state: StateVector, pauli, outcome: int = 0) -> float:
    """Project onto the (-1)**outcome eigenspace of a Hermitian Pauli.

    Returns the outcome probability; the state is renormalized unless that
    probability is zero.
    """
    sign = 1 - 2 * outcome
    proj = 0.5 * (state.amplitudes + sign * pauli_matrix_apply(state, pauli))
    prob = float(np.vdot(proj, proj).real)
    if prob > 1e-15:
        state.amplitudes = proj / np.sqrt(prob)
    return prob


def sv_probability(state: StateVector, qubit: int, basis: str = "Z") -> float:
    """Probability of the -1 outcome when measuring one qubit."""
    if basis == "Z":
        mask = ((state._index() >> qubit) & 1).astype(bool)
        return float(np.sum(np.abs(state.amplitudes[mask]) ** 2))
    work = state.copy()
    if basis == "X":
        sv_apply(work, "H", [qubit])
    else:
        raise OracleError(f"unknown basis {basis!r}")
    return sv_probability(work, qubit, "Z")


def sv_measure(state: StateVector, qubit: int, basis: str, rng=None, forced: Optional[int] = None):
    """Born-rule measurement; returns ``(bit, probability_of_that_bit)``.

    ``rng`` is a numpy Generator; ``forced`` postselects the given bit.
    """
    if not 0 <= qubit < state.n_qubits:
        raise OracleError(f"qubit {qubit} out of range")
    p1 = sv_probability(state, qubit, basis)
    if forced is None:
        if rng is None:
            raise OracleError("sampling needs an rng")
        bit = int(rng.random() < p1)
    else:
        bit = int(forced)
    prob = p1 if bit else 1.0 - p1
    if basis == "X":
        sv_apply(state, "H", [qubit])
    mask = ((state._index() >> qubit) & 1).astype(bool)
    keep = mask if bit else ~mask
    amp = np.where(keep, state.amplitudes, 0)
    if prob > 1e-15:
        amp = amp / np.sqrt(prob)
    state.amplitudes = amp
    if basis == "X":
        sv_apply(state, "H", [qubit])
    return bit, prob


def sv_overlap(state: StateVector, other: StateVector) -> float:
    if state.n_qubits != other.n_qubits:
        raise OracleError("size mismatch")
    return float(abs(np.vdot(state.amplitudes, other.amplitudes)) ** 2)


def marginal_distribution(state: StateVector, qubits: Sequence[int]) -> np.ndarray:
    """Exact joint Z-basis distribution of ``qubits``; outcome k has bit j for qubits[j]."""
    idx = state._index()
    key = np.zeros(len(idx), dtype=np.int64)
    for j, q in enumerate(qubits):
        key |= ((idx >> q) & 1) << j
    probs = np.abs(state.amplitudes) ** 2
    return np.bincount(key, weights=probs, minlength=1 << len(qubits))


def stabilizer_state(n: int, generators) -> StateVector:
    """The unique state fixed by n independent commuting generators (by projection)."""
    if len(generators) != n:
        raise OracleError("need exactly n generators")
    # a random start overlaps every stabilizer state with probability one
    gen = np.random.default_rng(12345)
    amp = gen.normal(size=1 << n) + 1j * gen.normal(size=1 << n)
    state = StateVector(n, amp / np.linalg.norm(amp))
    for g in generators:
        if sv_project(state, g, 0) < 1e-12:
            raise OracleError("projection annihilated the state")
    return state


def execute(circuit, state: StateVector, rng=None, forced: Optional[Sequence[int]] = None):
    """Run an AdaptiveCircuit on a statevector.

    Measurements (including resets) are sampled with ``rng`` or, when
    ``forced`` is given, postselected on successive bits from it. Returns
    ``(state, registers, trace)`` where trace lists ``(bit, probability)`` per
    measurement-like instruction in program order.
    """
    from . import circuit_lang as cl

    regs = circuit.fresh_registers()
    trace = []
    forced_iter = iter(forced) if forced is not None else None

    def pick():
        return None if forced_iter is None else next(forced_iter)

    for ins in circuit.instructions:
        if isinstance(ins, cl.Gate):
            sv_apply(state, ins.name, ins.qubits)
        elif isinstance(ins, cl.CondGate):
            if regs.bit(ins.cbit) == ins.value:
                sv_apply(state, ins.gate.name, ins.gate.qubits)
        elif isinstance(ins, cl.Measure):
            bit, p = sv_measure(state, ins.qubit, "Z", rng, pick())
            trace.append((bit, p))
            regs.set(ins.cbit, bit)
        elif isinstance(ins, cl.Reset):
            bit, p = sv_measure(state, ins.qubit, "Z", rng, pick())
            trace.append((bit, p))
            if bit:
                sv_apply(state, "X", [ins.qubit])
        elif isinstance(ins, cl.Assign):
            regs.set(ins.target, regs.eval(ins.terms))
    return state, regs, trace
