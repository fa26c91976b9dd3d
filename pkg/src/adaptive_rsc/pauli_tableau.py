"""Bit-packed Pauli algebra and stabilizer tableaux.

Pauli strings keep their X and Z components as packed integers (bit ``j`` is
qubit ``j``) and a power of ``i`` as phase; ``x=z=1`` on a qubit denotes the
Hermitian ``Y``. Tableaux follow the Aaronson-Gottesman layout: rows
``0..n-1`` are destabilizers, rows ``n..2n-1`` stabilizers, each with a sign
bit.

:class:`TableauBatch` runs many shots of the same Clifford skeleton at once.
Pauli gates, Pauli faults and measurement outcomes only ever change sign
bits, so the X/Z frame is shared and each row's sign becomes a boolean vector
over shots.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from . import gf2

GATES_1Q = ("H", "X", "Z", "S")
GATES_2Q = ("CNOT",)
GATES = GATES_1Q + GATES_2Q

_PAULI_CHARS = {"I": (0, 0), "_": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}


class TableauError(ValueError):
    """Invalid input to a tableau operation."""


def product_phase(x1: int, z1: int, x2: int, z2: int) -> int:
    """Exponent g (mod 4) with sigma(x1,z1) sigma(x2,z2) = i^g sigma(x1^x2, z1^z2)."""
    ys = x1 & z1
    xs = x1 & ~z1
    zs = ~x1 & z1
    pos = (ys & z2 & ~x2) | (xs & z2 & x2) | (zs & x2 & ~z2)
    neg = (ys & x2 & ~z2) | (xs & z2 & ~x2) | (zs & x2 & z2)
    return (pos.bit_count() - neg.bit_count()) & 3


def anticommutes(x1: int, z1: int, x2: int, z2: int) -> bool:
    return bool(((x1 & z2) ^ (z1 & x2)).bit_count() & 1)


@dataclass(frozen=True)
class PauliString:
    """``i**phase_exp`` times a tensor product of I/X/Y/Z."""

    n_qubits: int
    x_bits: int = 0
    z_bits: int = 0
    phase_exp: int = 0

    def __post_init__(self):
        if self.n_qubits < 0:
            raise TableauError("n_qubits must be nonnegative")
        limit = 1 << self.n_qubits
        if not (0 <= self.x_bits < limit and 0 <= self.z_bits < limit):
            raise TableauError("bit vector longer than n_qubits")
        object.__setattr__(self, "phase_exp", self.phase_exp & 3)

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """Parse labels such as ``"+XZ_Y"`` or ``"-iZZ"``; character j is qubit j."""
        phase = 0
        s = label.strip()
        if s.startswith("+"):
            s = s[1:]
        elif s.startswith("-"):
            phase = 2
            s = s[1:]
        if s.startswith("i"):
            phase += 1
            s = s[1:]
        x = z = 0
        for j, ch in enumerate(s):
            try:
                bx, bz = _PAULI_CHARS[ch]
            except KeyError:
                raise TableauError(f"bad Pauli character {ch!r}") from None
            x |= bx << j
            z |= bz << j
        return cls(len(s), x, z, phase)

    @classmethod
    def from_support(cls, n: int, kind: str, support: Iterable[int], sign: int = 1) -> "PauliString":
        bits = gf2.support_to_int(support)
        x = bits if kind in ("X", "Y") else 0
        z = bits if kind in ("Z", "Y") else 0
        return cls(n, x, z, 0 if sign > 0 else 2)

    def label(self) -> str:
        prefix = {0: "+", 1: "+i", 2: "-", 3: "-i"}[self.phase_exp]
        chars = []
        for j in range(self.n_qubits):
            chars.append("_XZY"[((self.x_bits >> j) & 1) | (((self.z_bits >> j) & 1) << 1)])
        return prefix + "".join(chars)

    __str__ = label

    @property
    def is_hermitian(self) -> bool:
        return self.phase_exp in (0, 2)

    @property
    def sign(self) -> int:
        if not self.is_hermitian:
            raise TableauError("non-Hermitian Pauli has no real sign")
        return 1 if self.phase_exp == 0 else -1

    @property
    def weight(self) -> int:
        return (self.x_bits | self.z_bits).bit_count()

    def support(self) -> List[int]:
        return gf2.int_to_support(self.x_bits | self.z_bits)

    def commutes(self, other: "PauliString") -> bool:
        return not anticommutes(self.x_bits, self.z_bits, other.x_bits, other.z_bits)

    def __mul__(self, other: "PauliString") -> "PauliString":
        if self.n_qubits != other.n_qubits:
            raise TableauError("size mismatch")
        g = product_phase(self.x_bits, self.z_bits, other.x_bits, other.z_bits)
        return PauliString(
            self.n_qubits,
            self.x_bits ^ other.x_bits,
            self.z_bits ^ other.z_bits,
            self.phase_exp + other.phase_exp + g,
        )

    def __neg__(self) -> "PauliString":
        return PauliString(self.n_qubits, self.x_bits, self.z_bits, self.phase_exp + 2)

    def unsigned(self) -> "PauliString":
        return PauliString(self.n_qubits, self.x_bits, self.z_bits, 0)

    def embed(self, n: int, offset: int = 0) -> "PauliString":
        """Place this string on qubits ``offset..`` of an ``n``-qubit register."""
        if offset + self.n_qubits > n:
            raise TableauError("embedding does not fit")
        return PauliString(n, self.x_bits << offset, self.z_bits << offset, self.phase_exp)


@dataclass(frozen=True)
class MeasurementOutcome:
    value: int
    was_deterministic: bool

    @property
    def bit(self) -> int:
        return 0 if self.value == 1 else 1


class _TableauCore:
    """Shared X/Z frame; subclasses decide what a sign bit is."""

    n_qubits: int
    xs: List[int]
    zs: List[int]
    rs: list

    def _check_targets(self, targets: Sequence[int], arity: int):
        if len(targets) != arity:
            raise TableauError(f"expected {arity} target(s), got {len(targets)}")
        for q in targets:
            if not 0 <= q < self.n_qubits:
                raise TableauError(f"qubit {q} out of range")
        if len(set(targets)) != len(targets):
            raise TableauError("duplicate targets")

    # sign flips are applied with ``^ True`` so ints and bool arrays both work
    def _flip(self, i: int, mask=True):
        self.rs[i] = self.rs[i] ^ mask

    def apply(self, gate: str, *targets: int):
        g = gate.upper()
        if g in ("CX", "CNOT"):
            self._check_targets(targets, 2)
            self._cnot(*targets)
            return self
        if g not in GATES_1Q:
            raise TableauError(f"unsupported gate {gate!r}")
        self._check_targets(targets, 1)
        q = targets[0]
        b = 1 << q
        xs, zs = self.xs, self.zs
        if g == "H":
            for i in range(2 * self.n_qubits):
                x, z = xs[i], zs[i]
                if x & z & b:
                    self._flip(i)
                if bool(x & b) != bool(z & b):
                    xs[i] = x ^ b
                    zs[i] = z ^ b
        elif g == "S":
            for i in range(2 * self.n_qubits):
                x = xs[i]
                if x & b:
                    if zs[i] & b:
                        self._flip(i)
                    zs[i] ^= b
        elif g == "X":
            for i in range(2 * self.n_qubits):
                if zs[i] & b:
                    self._flip(i)
        elif g == "Z":
            for i in range(2 * self.n_qubits):
                if xs[i] & b:
                    self._flip(i)
        return self

    def _cnot(self, c: int, t: int):
        bc, bt = 1 << c, 1 << t
        xs, zs = self.xs, self.zs
        for i in range(2 * self.n_qubits):
            x, z = xs[i], zs[i]
            xc = x & bc
            zt = z & bt
            if xc and zt and (bool(x & bt) == bool(z & bc)):
                self._flip(i)
            if xc:
                xs[i] = x ^ bt
            if zt:
                zs[i] = z ^ bc

    def apply_pauli(self, p: PauliString, mask=True):
        """Conjugate by a Pauli (sign-only update), optionally on a shot mask."""
        if p.n_qubits != self.n_qubits:
            raise TableauError("size mismatch")
        for i in range(2 * self.n_qubits):
            if anticommutes(self.xs[i], self.zs[i], p.x_bits, p.z_bits):
                self._flip(i, mask)
        return self

    def _rowmul(self, h: int, i: int):
        """row h <- row i * row h (rows must commute)."""
        g = product_phase(self.xs[i], self.zs[i], self.xs[h], self.zs[h])
        self.rs[h] = self.rs[h] ^ self.rs[i] ^ bool(g & 2)
        self.xs[h] ^= self.xs[i]
        self.zs[h] ^= self.zs[i]

    def stabilizers(self) -> List[Tuple[int, int]]:
        n = self.n_qubits
        return list(zip(self.xs[n:], self.zs[n:]))

    def _anticommuting_stab(self, p: PauliString) -> Optional[int]:
        n = self.n_qubits
        for i in range(n, 2 * n):
            if anticommutes(self.xs[i], self.zs[i], p.x_bits, p.z_bits):
                return i
        return None

    def _deterministic_sign(self, p: PauliString):
        """Sign bit (0 => +1) of p, assuming p commutes with every stabilizer."""
        n = self.n_qubits
        ax = az = 0
        phase = 0
        sign = False
        for i in range(n):
            if anticommutes(self.xs[i], self.zs[i], p.x_bits, p.z_bits):
                s = i + n
                phase += product_phase(ax, az, self.xs[s], self.zs[s])
                ax ^= self.xs[s]
                az ^= self.zs[s]
                sign = sign ^ self.rs[s]
        if ax != p.x_bits or az != p.z_bits:
            raise TableauError("tableau invariant broken: operator not in stabilizer group")
        phase &= 3
        if phase & 1:
            raise TableauError("tableau invariant broken: imaginary stabilizer product")
        return sign ^ bool((phase ^ p.phase_exp) & 2)

    def _project(self, p: PauliString, pivot: int, outcome):
        """Random-outcome update: the state ends in the (-1)**outcome eigenspace of p."""
        n = self.n_qubits
        partner = pivot - n
        for i in range(2 * n):
            if i == pivot or i == partner:
                continue
            if anticommutes(self.xs[i], self.zs[i], p.x_bits, p.z_bits):
                self._rowmul(i, pivot)
        self.xs[partner] = self.xs[pivot]
        self.zs[partner] = self.zs[pivot]
        self.rs[partner] = self.rs[pivot]
        self.xs[pivot] = p.x_bits
        self.zs[pivot] = p.z_bits
        self.rs[pivot] = outcome ^ bool(p.phase_exp & 2)

    def _check_measurable(self, p: PauliString):
        if p.n_qubits != self.n_qubits:
            raise TableauError("size mismatch")
        if not p.is_hermitian:
            raise TableauError("cannot measure a non-Hermitian Pauli")
        if p.x_bits == 0 and p.z_bits == 0:
            raise TableauError("cannot measure the identity")

    def is_valid(self) -> bool:
        """Debug validator for the commutation/rank invariants."""
        n = self.n_qubits
        xs, zs = self.xs, self.zs
        for i in range(n):
            for j in range(n):
                if anticommutes(xs[n + i], zs[n + i], xs[n + j], zs[n + j]):
                    return False
                if anticommutes(xs[i], zs[i], xs[n + j], zs[n + j]) != (i == j):
                    return False
        rows = [x | (z << n) for x, z in zip(xs, zs)]
        return gf2.rank(rows) == 2 * n


class StabilizerTableau(_TableauCore):
    """Full stabilizer/destabilizer frame of an n-qubit stabilizer state."""

    def __init__(self, n_qubits: int):
        if n_qubits < 1:
            raise TableauError("need at least one qubit")
        self.n_qubits = n_qubits
        self.xs = [1 << i for i in range(n_qubits)] + [0] * n_qubits
        self.zs = [0] * n_qubits + [1 << i for i in range(n_qubits)]
        self.rs = [0] * (2 * n_qubits)

    def copy(self) -> "StabilizerTableau":
        t = StabilizerTableau.__new__(StabilizerTableau)
        t.n_qubits = self.n_qubits
        t.xs = list(self.xs)
        t.zs = list(self.zs)
        t.rs = list(self.rs)
        return t

    def row(self, i: int) -> PauliString:
        return PauliString(self.n_qubits, self.xs[i], self.zs[i], 2 * int(self.rs[i]))

    @property
    def stab_rows(self) -> List[PauliString]:
        return [self.row(i) for i in range(self.n_qubits, 2 * self.n_qubits)]

    @property
    def destab_rows(self) -> List[PauliString]:
        return [self.row(i) for i in range(self.n_qubits)]

    def measure(self, p: PauliString, rng=None, forced: Optional[int] = None) -> MeasurementOutcome:
        """Measure a Hermitian Pauli.

        Random outcomes take one bit from ``rng.bit()`` unless ``forced`` (0 for
        +1, 1 for -1) is given, in which case no randomness is consumed.
        """
        self._check_measurable(p)
        pivot = self._anticommuting_stab(p)
        if pivot is None:
            s = int(self._deterministic_sign(p))
            return MeasurementOutcome(1 - 2 * s, True)
        if forced is not None:
            b = int(forced)
        elif rng is None:
            raise TableauError("random outcome requires an rng")
        else:
            b = int(rng.bit())
        self._project(p, pivot, b)
        return MeasurementOutcome(1 - 2 * b, False)

    def expectation(self, p: PauliString) -> int:
        """<p> in {-1, 0, +1}."""
        if p.n_qubits != self.n_qubits or not p.is_hermitian:
            raise TableauError("expectation needs a Hermitian Pauli of matching size")
        if p.x_bits == 0 and p.z_bits == 0:
            return p.sign
        if self._anticommuting_stab(p) is not None:
            return 0
        return 1 - 2 * int(self._deterministic_sign(p))

    def canonical_stabilizers(self) -> List[PauliString]:
        """Row-reduced stabilizer generators; equal groups give equal lists."""
        n = self.n_qubits
        rows = [self.row(i) for i in range(n, 2 * n)]
        out: List[PauliString] = []
        # elimination on packed (x | z<<n), highest pivot first, tracking phases
        for col in reversed(range(2 * n)):
            bit_of = (lambda r: (r.x_bits >> col) & 1) if col < n else (lambda r: (r.z_bits >> (col - n)) & 1)
            idx = next((k for k, r in enumerate(rows) if bit_of(r)), None)
            if idx is None:
                continue
            piv = rows.pop(idx)
            rows = [piv * r if bit_of(r) else r for r in rows]
            out = [piv * r if bit_of(r) else r for r in out]
            out.append(piv)
        return sorted(out, key=lambda r: (r.x_bits | (r.z_bits << n)), reverse=True)

    def __eq__(self, other):
        if not isinstance(other, StabilizerTableau) or other.n_qubits != self.n_qubits:
            return NotImplemented
        return self.canonical_stabilizers() == other.canonical_stabilizers()

    __hash__ = None


class TableauBatch(_TableauCore):
    """Many shots sharing one X/Z frame; ``rs[i]`` is a bool vector over shots."""

    def __init__(self, n_qubits: int, shots: int):
        if n_qubits < 1 or shots < 1:
            raise TableauError("need at least one qubit and one shot")
        self.n_qubits = n_qubits
        self.shots = shots
        self.xs = [1 << i for i in range(n_qubits)] + [0] * n_qubits
        self.zs = [0] * n_qubits + [1 << i for i in range(n_qubits)]
        self.rs = [np.zeros(shots, dtype=bool) for _ in range(2 * n_qubits)]

    def measure(self, p: PauliString, bits: Optional[np.ndarray] = None):
        """Measure p in every shot.

        Returns ``(outcome_bits, deterministic)``; for a random measurement the
        caller supplies ``bits`` (one per shot).
        """
        self._check_measurable(p)
        pivot = self._anticommuting_stab(p)
        if pivot is None:
            s = self._deterministic_sign(p)
            out = np.broadcast_to(np.asarray(s, dtype=bool), (self.shots,)).copy()
            return out, True
        if bits is None:
            raise TableauError("random outcome requires per-shot bits")
        b = np.asarray(bits, dtype=bool)
        self._project(p, pivot, b)
        return b.copy(), False

    def random_pivot(self, p: PauliString) -> bool:
        return self._anticommuting_stab(p) is not None

    def shot(self, k: int) -> StabilizerTableau:
        t = StabilizerTableau(self.n_qubits)
        t.xs = list(self.xs)
        t.zs = list(self.zs)
        t.rs = [int(r[k]) for r in self.rs]
        return t


def new_tableau(n: int, basis_per_qubit: Sequence[str]) -> StabilizerTableau:
    """Product state with qubit i in |0> (``"Zplus"``) or |+> (``"Xplus"``)."""
    if len(basis_per_qubit) != n:
        raise TableauError("basis list length must equal n")
    t = StabilizerTableau(n)
    for q, b in enumerate(basis_per_qubit):
        if b in ("Xplus", "X", "+"):
            t.apply("H", q)
        elif b not in ("Zplus", "Z", "0"):
            raise TableauError(f"unknown basis {b!r}")
    return t


def apply_clifford(t: _TableauCore, gate: str, targets: Sequence[int]):
    return t.apply(gate, *targets)


def measure_pauli(t: StabilizerTableau, p: PauliString, rng) -> MeasurementOutcome:
    return t.measure(p, rng)


def single_qubit_measure(t: StabilizerTableau, qubit: int, basis: str, rng) -> MeasurementOutcome:
    if not 0 <= qubit < t.n_qubits:
        raise TableauError(f"qubit {qubit} out of range")
    if basis not in ("X", "Z", "Y"):
        raise TableauError(f"unknown basis {basis!r}")
    return t.measure(PauliString.from_support(t.n_qubits, basis, [qubit]), rng)


def check_generators(gens: Sequence[PauliString], n: int):
    for g in gens:
        if g.n_qubits != n:
            raise TableauError("generator size mismatch")
        if not g.is_hermitian:
            raise TableauError("generators need +-1 phases")
    for a in range(len(gens)):
        for b in range(a + 1, len(gens)):
            if not gens[a].commutes(gens[b]):
                raise TableauError(f"generators {a} and {b} do not commute")
    rows = [g.x_bits | (g.z_bits << n) for g in gens]
    if gf2.rank(rows) != len(gens):
        raise TableauError("generators are not independent")


def exact_state_overlap(t: StabilizerTableau, target_generators: Sequence[PauliString]) -> float:
    """<prod_i (1 + G_i)/2> on t, by sequential projection on a working copy."""
    check_generators(target_generators, t.n_qubits)
    work = t.copy()
    prob = 1.0
    for g in target_generators:
        out = work.measure(g, forced=0)
        if out.was_deterministic:
            if out.value != 1:
                return 0.0
        else:
            prob *= 0.5
    return prob


def batch_overlap(t: TableauBatch, target_generators: Sequence[PauliString]) -> np.ndarray:
    """Per-shot :func:`exact_state_overlap` for a batch."""
    check_generators(target_generators, t.n_qubits)
    work = TableauBatch.__new__(TableauBatch)
    work.n_qubits, work.shots = t.n_qubits, t.shots
    work.xs, work.zs = list(t.xs), list(t.zs)
    work.rs = [r.copy() for r in t.rs]
    alive = np.ones(t.shots, dtype=bool)
    halvings = 0
    for g in target_generators:
        if work.random_pivot(g):
            work.measure(g, bits=np.zeros(t.shots, dtype=bool))
            halvings += 1
        else:
            bits, _ = work.measure(g)
            alive &= ~bits
    return alive * 0.5**halvings
