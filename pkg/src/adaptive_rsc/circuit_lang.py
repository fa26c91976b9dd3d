"""A small adaptive-circuit language in OpenQASM-2 style.

Grammar::

    program := { stmt } ;
    stmt    := "qreg" ID "[" INT "]" ";" | "creg" ID "[" INT "]" ";"
             | gate ";" | "measure" qarg "->" carg ";" | "reset" qarg ";"
             | "if" "(" carg "==" INT ")" gate ";" | carg "=" cexpr ";"
             | "barrier" ";" ;
    gate    := ("h"|"x"|"z"|"s") qarg | "cx" qarg "," qarg ;
    cexpr   := term { "^" term } ;   term := carg | "0" | "1" ;

``//`` starts a comment. Qubits and classical bits are flattened in
declaration order; the IR stores flat indices plus the register table.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .noise import NoiseModel, pair_fault, single_fault
from .pauli_tableau import PauliString, StabilizerTableau, TableauBatch
from .rng import NOISE_STREAM, BIT_STREAM, ShotRng, fault_index, stream_words, threshold

_GATE_TEXT = {"h": "H", "x": "X", "z": "Z", "s": "S", "cx": "CNOT"}
_TEXT_GATE = {v: k for k, v in _GATE_TEXT.items()}
PAULI_GATES = ("X", "Z")


class CircuitSyntaxError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {message}")
        self.line = line
        self.col = col
        self.message = message


# ---------------------------------------------------------------- IR


@dataclass(frozen=True)
class Gate:
    name: str
    qubits: Tuple[int, ...]

    @property
    def is_two_qubit(self) -> bool:
        return len(self.qubits) == 2


@dataclass(frozen=True)
class Measure:
    qubit: int
    cbit: int


@dataclass(frozen=True)
class Reset:
    qubit: int


@dataclass(frozen=True)
class CondGate:
    cbit: int
    value: int
    gate: Gate


@dataclass(frozen=True)
class Assign:
    """``target = t0 ^ t1 ^ ...``; a term is a cbit index or the string "0"/"1"."""

    target: int
    terms: Tuple[Union[int, str], ...]


@dataclass(frozen=True)
class Barrier:
    pass


Instruction = Union[Gate, Measure, Reset, CondGate, Assign, Barrier]


class Registers:
    """Live classical state of one shot."""

    def __init__(self, cregs: Sequence[Tuple[str, int]]):
        self.cregs = list(cregs)
        self.bits = [0] * sum(w for _, w in cregs)

    def bit(self, i: int) -> int:
        return self.bits[i]

    def set(self, i: int, v: int):
        self.bits[i] = int(v) & 1

    def eval(self, terms) -> int:
        v = 0
        for t in terms:
            v ^= int(t) if isinstance(t, str) else self.bits[t]
        return v

    def snapshot(self) -> Dict[str, List[int]]:
        out, k = {}, 0
        for name, w in self.cregs:
            out[name] = self.bits[k:k + w]
            k += w
        return out


@dataclass
class AdaptiveCircuit:
    qregs: List[Tuple[str, int]] = field(default_factory=list)
    cregs: List[Tuple[str, int]] = field(default_factory=list)
    instructions: List[Instruction] = field(default_factory=list)

    @property
    def n_qubits(self) -> int:
        return sum(w for _, w in self.qregs)

    @property
    def n_cbits(self) -> int:
        return sum(w for _, w in self.cregs)

    def fresh_registers(self) -> Registers:
        return Registers(self.cregs)

    def _offset(self, regs, name):
        k = 0
        for r, w in regs:
            if r == name:
                return k, w
            k += w
        raise KeyError(name)

    def qubit(self, reg: str, idx: int) -> int:
        k, w = self._offset(self.qregs, reg)
        if not 0 <= idx < w:
            raise IndexError(f"{reg}[{idx}] out of range")
        return k + idx

    def cbit(self, reg: str, idx: int) -> int:
        k, w = self._offset(self.cregs, reg)
        if not 0 <= idx < w:
            raise IndexError(f"{reg}[{idx}] out of range")
        return k + idx

    # builder helpers used by generators
    def add(self, ins: Instruction) -> "AdaptiveCircuit":
        self.instructions.append(ins)
        return self

    def gate(self, name: str, *qubits: int):
        return self.add(Gate(name, tuple(qubits)))

    def count(self, kind=None, name: Optional[str] = None) -> int:
        n = 0
        for ins in self.instructions:
            if kind is not None and not isinstance(ins, kind):
                continue
            if name is not None:
                g = ins.gate if isinstance(ins, CondGate) else ins
                if not isinstance(g, Gate) or g.name != name:
                    continue
            n += 1
        return n


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(
    r"(?P<ws>\s+)|(?P<comment>//[^\n]*)|(?P<arrow>->)|(?P<eq>==)"
    r"|(?P<id>[A-Za-z_][A-Za-z0-9_]*)|(?P<int>[0-9]+)|(?P<sym>[\[\];,()=^])"
)
_KEYWORDS = {"qreg", "creg", "measure", "reset", "if", "barrier"}


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> List[_Tok]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise CircuitSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        s = m.group()
        if kind not in ("ws", "comment"):
            toks.append(_Tok(kind if kind != "sym" and kind != "arrow" and kind != "eq" else s, s, line, pos - line_start + 1))
        nl = s.count("\n")
        if nl:
            line += nl
            line_start = pos + s.rfind("\n") + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0
        self.circ = AdaptiveCircuit()
        self.names = set()

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def take(self, kind: str, what: Optional[str] = None) -> _Tok:
        t = self.toks[self.i]
        if t.kind != kind:
            shown = t.text or "end of input"
            raise CircuitSyntaxError(f"expected {what or kind!r}, found {shown!r}", t.line, t.col)
        self.i += 1
        return t

    def error(self, msg: str, tok: _Tok):
        raise CircuitSyntaxError(msg, tok.line, tok.col)

    def parse(self) -> AdaptiveCircuit:
        while self.peek().kind != "eof":
            self.stmt()
        return self.circ

    def stmt(self):
        t = self.peek()
        if t.kind != "id":
            self.error(f"unexpected {t.text!r}", t)
        word = t.text
        if word in ("qreg", "creg"):
            self.i += 1
            name = self.take("id", "register name")
            if name.text in _KEYWORDS:
                self.error(f"reserved word {name.text!r} used as register name", name)
            self.take("[")
            size = self.take("int", "register size")
            self.take("]")
            self.take(";")
            if name.text in self.names:
                self.error(f"duplicate declaration of {name.text!r}", name)
            if int(size.text) < 1:
                self.error("register size must be positive", size)
            self.names.add(name.text)
            (self.circ.qregs if word == "qreg" else self.circ.cregs).append((name.text, int(size.text)))
        elif word == "measure":
            self.i += 1
            q = self.qarg()
            self.take("->", "->")
            c = self.carg()
            self.take(";")
            self.circ.add(Measure(q, c))
        elif word == "reset":
            self.i += 1
            q = self.qarg()
            self.take(";")
            self.circ.add(Reset(q))
        elif word == "barrier":
            self.i += 1
            self.take(";")
            self.circ.add(Barrier())
        elif word == "if":
            self.i += 1
            self.take("(")
            c = self.carg()
            self.take("==", "==")
            v = self.take("int", "0 or 1")
            if v.text not in ("0", "1"):
                self.error("condition value must be 0 or 1", v)
            self.take(")")
            g = self.gate()
            self.take(";")
            self.circ.add(CondGate(c, int(v.text), g))
        elif word in _GATE_TEXT and self.toks[self.i + 1].kind != "[":
            g = self.gate()
            self.take(";")
            self.circ.add(g)
        else:
            if self.toks[self.i + 1].kind != "[":
                self.error(f"unknown statement or gate {word!r}", t)
            target = self.carg()
            self.take("=", "=")
            terms = [self.term()]
            while self.peek().kind == "^":
                self.i += 1
                terms.append(self.term())
            self.take(";")
            self.circ.add(Assign(target, tuple(terms)))

    def gate(self) -> Gate:
        t = self.take("id", "gate name")
        if t.text not in _GATE_TEXT:
            self.error(f"unknown gate {t.text!r}", t)
        name = _GATE_TEXT[t.text]
        if name == "CNOT":
            a = self.qarg()
            comma = self.take(",")
            b = self.qarg()
            if a == b:
                self.error("cx with duplicate targets", comma)
            return Gate(name, (a, b))
        return Gate(name, (self.qarg(),))

    def term(self):
        t = self.peek()
        if t.kind == "int":
            if t.text not in ("0", "1"):
                self.error("constant must be 0 or 1", t)
            self.i += 1
            return t.text
        return self.carg()

    def _ref(self, regs, kind):
        name = self.take("id", f"{kind} register")
        self.take("[")
        idx = self.take("int", "index")
        self.take("]")
        k = 0
        for r, w in regs:
            if r == name.text:
                if int(idx.text) >= w:
                    self.error(f"index {idx.text} out of range for {r}[{w}]", idx)
                return k + int(idx.text)
            k += w
        self.error(f"undeclared {kind} register {name.text!r}", name)

    def qarg(self) -> int:
        return self._ref(self.circ.qregs, "quantum")

    def carg(self) -> int:
        return self._ref(self.circ.cregs, "classical")


def parse(text: str) -> AdaptiveCircuit:
    return _Parser(text).parse()


def _name_of(regs, flat: int) -> str:
    k = 0
    for name, w in regs:
        if flat < k + w:
            return f"{name}[{flat - k}]"
        k += w
    raise IndexError(flat)


def serialize(c: AdaptiveCircuit) -> str:
    lines = [f"qreg {n}[{w}];" for n, w in c.qregs]
    lines += [f"creg {n}[{w}];" for n, w in c.cregs]
    q = lambda i: _name_of(c.qregs, i)  # noqa: E731
    b = lambda i: _name_of(c.cregs, i)  # noqa: E731

    def gate_text(g: Gate) -> str:
        return f"{_TEXT_GATE[g.name]} " + ",".join(q(i) for i in g.qubits)

    for ins in c.instructions:
        if isinstance(ins, Gate):
            lines.append(gate_text(ins) + ";")
        elif isinstance(ins, Measure):
            lines.append(f"measure {q(ins.qubit)} -> {b(ins.cbit)};")
        elif isinstance(ins, Reset):
            lines.append(f"reset {q(ins.qubit)};")
        elif isinstance(ins, CondGate):
            lines.append(f"if ({b(ins.cbit)}=={ins.value}) {gate_text(ins.gate)};")
        elif isinstance(ins, Assign):
            rhs = " ^ ".join(t if isinstance(t, str) else b(t) for t in ins.terms)
            lines.append(f"{b(ins.target)} = {rhs};")
        elif isinstance(ins, Barrier):
            lines.append("barrier;")
    return "\n".join(lines) + ("\n" if lines else "")


# ---------------------------------------------------------------- analysis


def two_qubit_gates(c: AdaptiveCircuit):
    for k, ins in enumerate(c.instructions):
        g = ins.gate if isinstance(ins, CondGate) else ins
        if isinstance(g, Gate) and g.is_two_qubit:
            yield k, g


def depth(c: AdaptiveCircuit) -> int:
    """Longest chain of qubit-sharing two-qubit gates in program order."""
    level: Dict[int, int] = {}
    best = 0
    for _, g in two_qubit_gates(c):
        d = 1 + max(level.get(q, 0) for q in g.qubits)
        for q in g.qubits:
            level[q] = d
        best = max(best, d)
    return best


def gate_layers(c: AdaptiveCircuit) -> Dict[int, int]:
    """Instruction index -> ASAP layer of each two-qubit gate."""
    level: Dict[int, int] = {}
    out = {}
    for k, g in two_qubit_gates(c):
        d = 1 + max(level.get(q, 0) for q in g.qubits)
        for q in g.qubits:
            level[q] = d
        out[k] = d
    return out


def validate_connectivity(c: AdaptiveCircuit, layout) -> List[int]:
    """Indices of two-qubit gates whose pair is not a layout edge (empty if ok)."""
    if c.n_qubits != layout.n_qubits:
        raise ValueError("circuit and layout qubit counts differ")
    edges = layout.edge_set
    return [k for k, g in two_qubit_gates(c) if frozenset(g.qubits) not in edges]


# ---------------------------------------------------------------- execution


@dataclass
class ExecutionResult:
    tableau: StabilizerTableau
    registers: Registers
    outcomes: list  # MeasurementOutcome per Measure/Reset, program order
    fired: List[int]  # indices of CondGate instructions that fired


def _noise_thresholds(noise: Optional[NoiseModel]):
    if noise is None:
        return 0, 0, 0, 0
    return threshold(noise.p1), threshold(noise.p2), threshold(noise.pm), threshold(noise.pi)


def execute(c: AdaptiveCircuit, t: StabilizerTableau, rng: ShotRng,
            noise: Optional[NoiseModel] = None) -> ExecutionResult:
    """Run one shot in place on ``t``.

    Every noise location with nonzero probability draws one word from
    ``rng.word()``; conditional gates draw whether or not they fire, and a
    fault is applied only after a gate that actually ran.
    """
    if t.n_qubits != c.n_qubits:
        raise ValueError("tableau and circuit qubit counts differ")
    t1, t2, tm, ti = _noise_thresholds(noise)
    n = t.n_qubits
    regs = c.fresh_registers()
    outcomes = []
    fired = []

    def gate_noise(g: Gate, ran: bool):
        thr = t2 if g.is_two_qubit else t1
        if thr == 0:
            return
        w = rng.word()
        if not ran:
            return
        if g.is_two_qubit:
            k = fault_index(w, thr, 15)
            if k >= 0:
                t.apply_pauli(pair_fault(n, g.qubits[0], g.qubits[1], k))
        else:
            k = fault_index(w, thr, 3)
            if k >= 0:
                t.apply_pauli(single_fault(n, g.qubits[0], k))

    for idx, ins in enumerate(c.instructions):
        if isinstance(ins, Gate):
            t.apply(ins.name, *ins.qubits)
            gate_noise(ins, True)
        elif isinstance(ins, CondGate):
            ran = regs.bit(ins.cbit) == ins.value
            if ran:
                t.apply(ins.gate.name, *ins.gate.qubits)
                fired.append(idx)
            gate_noise(ins.gate, ran)
        elif isinstance(ins, Measure):
            out = t.measure(PauliString.from_support(n, "Z", [ins.qubit]), rng)
            outcomes.append(out)
            bit = out.bit
            if tm and fault_index(rng.word(), tm, 1) == 0:
                bit ^= 1
            regs.set(ins.cbit, bit)
        elif isinstance(ins, Reset):
            out = t.measure(PauliString.from_support(n, "Z", [ins.qubit]), rng)
            outcomes.append(out)
            if out.value == -1:
                t.apply("X", ins.qubit)
            if ti and fault_index(rng.word(), ti, 1) == 0:
                t.apply("X", ins.qubit)
        elif isinstance(ins, Assign):
            regs.set(ins.target, regs.eval(ins.terms))
    return ExecutionResult(t, regs, outcomes, fired)


class BatchUnsupported(ValueError):
    """Circuit has a conditional non-Pauli gate; the X/Z frame would diverge."""


class _BatchRandomness:
    """Column-wise view of many shots' streams, drawn in the per-shot order."""

    def __init__(self, seed: int, shots: Sequence[int], n_words: int):
        self.seed = seed
        self.shots = list(shots)
        self.words = np.stack([stream_words(seed, s, NOISE_STREAM, n_words) for s in self.shots]) \
            if n_words else np.zeros((len(self.shots), 0), dtype=np.uint64)
        self.word_cursor = 0
        self._blocks: List[np.ndarray] = []
        self.bit_cursor = 0

    def bits(self) -> np.ndarray:
        block, off = divmod(self.bit_cursor, 64)
        while len(self._blocks) <= block:
            j = len(self._blocks)
            col = np.array([stream_words(self.seed, s, BIT_STREAM, j + 1)[j] for s in self.shots],
                           dtype=np.uint64)
            self._blocks.append(col)
        self.bit_cursor += 1
        return ((self._blocks[block] >> np.uint64(off)) & np.uint64(1)).astype(bool)

    def word(self) -> np.ndarray:
        w = self.words[:, self.word_cursor]
        self.word_cursor += 1
        return w


def _fault_labels(w: np.ndarray, thr: int, n_choices: int) -> np.ndarray:
    """Vectorised :func:`fault_index` (exact integer arithmetic)."""
    labels = np.full(len(w), -1, dtype=np.int64)
    if thr >= 1 << 64:
        hit = np.ones(len(w), dtype=bool)
    else:
        hit = w < np.uint64(thr)
    for k in np.flatnonzero(hit):
        labels[k] = (int(w[k]) * n_choices) // thr
    return labels


def count_noise_words(c: AdaptiveCircuit, noise: Optional[NoiseModel], extra_measurements: int = 0) -> int:
    t1, t2, tm, ti = _noise_thresholds(noise)
    n = 0
    for ins in c.instructions:
        g = ins.gate if isinstance(ins, CondGate) else ins
        if isinstance(g, Gate):
            n += bool(t2 if g.is_two_qubit else t1)
        elif isinstance(ins, Measure):
            n += bool(tm)
        elif isinstance(ins, Reset):
            n += bool(ti)
    return n + extra_measurements * bool(tm)


@dataclass
class BatchResult:
    tableau: TableauBatch
    registers: np.ndarray  # (n_cbits, shots) bool
    fired: Dict[int, np.ndarray]  # CondGate index -> shot mask
    randomness: _BatchRandomness


def execute_batch(c: AdaptiveCircuit, seed: int, shots: Sequence[int],
                  noise: Optional[NoiseModel] = None, extra_noise_words: int = 0) -> BatchResult:
    """Shot-parallel version of :func:`execute` with identical per-shot results.

    Only valid when every conditional gate is a Pauli (X or Z); otherwise
    :class:`BatchUnsupported` is raised and callers fall back to
    :func:`execute`.
    """
    for ins in c.instructions:
        if isinstance(ins, CondGate) and ins.gate.name not in PAULI_GATES:
            raise BatchUnsupported(f"conditional {ins.gate.name} cannot be batched")
    n = c.n_qubits
    m = len(shots)
    t1, t2, tm, ti = _noise_thresholds(noise)
    rnd = _BatchRandomness(seed, shots, count_noise_words(c, noise) + extra_noise_words)
    t = TableauBatch(n, m)
    regs = np.zeros((c.n_cbits, m), dtype=bool)
    fired: Dict[int, np.ndarray] = {}

    def gate_noise(g: Gate, ran):
        thr = t2 if g.is_two_qubit else t1
        if thr == 0:
            return
        w = rnd.word()
        labels = _fault_labels(w, thr, 15 if g.is_two_qubit else 3)
        if ran is not True:
            labels = np.where(ran, labels, -1)
        for k in np.unique(labels[labels >= 0]):
            if g.is_two_qubit:
                p = pair_fault(n, g.qubits[0], g.qubits[1], int(k))
            else:
                p = single_fault(n, g.qubits[0], int(k))
            t.apply_pauli(p, labels == k)

    def measure_z(q):
        p = PauliString.from_support(n, "Z", [q])
        if t.random_pivot(p):
            return t.measure(p, rnd.bits())[0]
        return t.measure(p)[0]

    for idx, ins in enumerate(c.instructions):
        if isinstance(ins, Gate):
            t.apply(ins.name, *ins.qubits)
            gate_noise(ins, True)
        elif isinstance(ins, CondGate):
            mask = regs[ins.cbit] == bool(ins.value)
            g = ins.gate
            t.apply_pauli(PauliString.from_support(n, g.name, g.qubits), mask)
            fired[idx] = mask
            gate_noise(g, mask)
        elif isinstance(ins, Measure):
            bits = measure_z(ins.qubit)
            if tm:
                bits = bits ^ (_fault_labels(rnd.word(), tm, 1) == 0)
            regs[ins.cbit] = bits
        elif isinstance(ins, Reset):
            bits = measure_z(ins.qubit)
            x = PauliString.from_support(n, "X", [ins.qubit])
            if ti:
                bits = bits ^ (_fault_labels(rnd.word(), ti, 1) == 0)
            t.apply_pauli(x, bits)
        elif isinstance(ins, Assign):
            v = np.zeros(m, dtype=bool)
            for term in ins.terms:
                v = v ^ (bool(int(term)) if isinstance(term, str) else regs[term])
            regs[ins.target] = v
    return BatchResult(t, regs, fired, rnd)
