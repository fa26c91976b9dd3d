"""Adaptive preparation of the logical |+> state on a surface-code strip.

The circuit resets everything, puts the data in |+>, extracts every Z check
onto its ancilla with the four-layer CNOT schedule, measures the ancillas into
``s`` and then purges the -1 checks with X gates conditioned on classical
bits. Two purge programs are available:

* ``"chain"``: walk a fixed path of data qubits; flip a qubit when the first
  of its two checks still reads -1 and push that defect onward.
* ``"gf2"``: apply a precomputed right inverse of the Z-check incidence
  matrix, so each data flip is a fixed XOR of syndrome bits.
"""
from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import IO, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from . import gf2
from .circuit_lang import (AdaptiveCircuit, Assign, Barrier, CondGate, Gate, Measure, Reset,
                           _fault_labels, execute, execute_batch)
from .noise import NoiseModel
from .pauli_tableau import (PauliString, StabilizerTableau, TableauBatch, batch_overlap,
                            exact_state_overlap)
from .rng import ShotRng, fault_index, threshold
from .surface_code import CodeLayout, LayoutError, target_generators

__all__ = [
    "NoiseModel", "ShotRecord", "ChainStep", "build_prep_circuit", "correction_chain",
    "greedy_correction", "solve_correction_gf2", "run_shot", "run_shots", "write_records",
    "read_records",
]

THREADS_ENV = "ADAPTIVE_PREP_THREADS"


@dataclass(frozen=True)
class ChainStep:
    data_qubit: int
    left: int  # Z-check index (syndrome position)
    right: Optional[int]  # None: the qubit touches no other Z check


@dataclass
class ShotRecord:
    shot_index: int
    basis: str
    syndrome: List[int]
    correction_support: List[int]
    final_bits: List[int]
    rng_seed: int

    def to_json(self) -> str:
        return json.dumps({"type": "shot", **asdict(self)}, separators=(",", ":"))

    @classmethod
    def from_dict(cls, d: dict) -> "ShotRecord":
        try:
            rec = cls(int(d["shot_index"]), str(d["basis"]), [int(b) for b in d["syndrome"]],
                      [int(q) for q in d["correction_support"]], [int(b) for b in d["final_bits"]],
                      int(d["rng_seed"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed shot record: {exc}") from None
        if rec.basis not in ("X", "Z"):
            raise ValueError(f"malformed shot record: basis {rec.basis!r}")
        if any(b not in (0, 1) for b in rec.syndrome + rec.final_bits):
            raise ValueError("malformed shot record: bits must be 0 or 1")
        return rec


# ---------------------------------------------------------------- corrections


def correction_chain(layout: CodeLayout) -> List[ChainStep]:
    """Purge walk for a strip, in execution order."""
    if not isinstance(layout, CodeLayout) or layout.n_data != 2 * (layout.L + 1):
        raise LayoutError("correction chain is defined for strip layouts only")
    L = layout.L
    d = layout.data_index
    zi = layout.z_index
    steps: List[Tuple[int, str, Optional[str]]] = []
    if L >= 3:
        steps += [(d(1, 1), "T1", "P0"), (d(0, 1), "P0", "B1"), (d(0, 2), "B1", "P2")]
        for c in range(3, L, 2):
            steps += [(d(1, c), f"P{c - 1}", f"T{c}"), (d(1, c + 1), f"T{c}", f"P{c + 1}"),
                      (d(0, c + 1), f"B{c}", f"P{c + 1}")]
    steps.append((d(0, L), f"P{L - 1}", None))
    out = [ChainStep(q, zi[a], None if b is None else zi[b]) for q, a, b in steps]
    for st in out:
        touching = {k for k, row in enumerate(layout.hz_rows) if (row >> st.data_qubit) & 1}
        expect = {st.left} | ({st.right} if st.right is not None else set())
        if touching != expect:
            raise LayoutError(f"chain qubit {st.data_qubit} touches checks {touching}, expected {expect}")
    return out


def greedy_correction(layout: CodeLayout, syndrome: Sequence[int]) -> Tuple[List[int], List[int]]:
    """Run the purge walk classically; returns (flipped data qubits, residual syndrome)."""
    s = [int(b) & 1 for b in syndrome]
    if len(s) != layout.n_ancilla:
        raise ValueError("syndrome length must equal the number of Z checks")
    flips = 0
    for st in correction_chain(layout):
        if s[st.left]:
            flips ^= 1 << st.data_qubit
            s[st.left] = 0
            if st.right is not None:
                s[st.right] ^= 1
    return gf2.int_to_support(flips), s


def solve_correction_gf2(layout: CodeLayout, syndrome: Sequence[int]) -> List[int]:
    """Data qubits x with H_Z x = syndrome over GF(2)."""
    if len(syndrome) != layout.n_ancilla:
        raise ValueError("syndrome length must equal the number of Z checks")
    x = gf2.solve(layout.hz_rows, layout.n_data, [int(b) & 1 for b in syndrome])
    if x is None:
        raise RuntimeError("Z-check incidence system inconsistent; layout is defective")
    return gf2.int_to_support(x)


def syndrome_of(layout: CodeLayout, support: Iterable[int]) -> List[int]:
    v = gf2.support_to_int(support)
    return [gf2.parity(row & v) for row in layout.hz_rows]


def _right_inverse(layout: CodeLayout) -> List[List[int]]:
    """Per data qubit, the syndrome bits whose XOR says whether to flip it."""
    rows: List[List[int]] = [[] for _ in range(layout.n_data)]
    for k in range(layout.n_ancilla):
        e = [0] * layout.n_ancilla
        e[k] = 1
        for q in solve_correction_gf2(layout, e):
            rows[q].append(k)
    return rows


# ---------------------------------------------------------------- circuit


def build_prep_circuit(layout: CodeLayout, correction: str = "chain") -> AdaptiveCircuit:
    m = layout.n_ancilla
    c = AdaptiveCircuit(qregs=[("q", layout.n_qubits)], cregs=[("s", m)])
    for q in range(layout.n_qubits):
        c.add(Reset(q))
    for q in layout.data_qubits:
        c.gate("H", q)
    current = 0
    for dq, anc, layer in layout.schedule:
        if layer != current:
            c.add(Barrier())
            current = layer
        c.gate("CNOT", dq, anc)
    c.add(Barrier())
    for k in range(m):
        c.add(Measure(layout.ancilla_of(k), k))
    for k in range(m):
        c.add(Reset(layout.ancilla_of(k)))
    if correction == "chain":
        # work on a copy so s keeps the raw syndrome
        c.cregs.append(("w", m))
        w = lambda k: m + k  # noqa: E731
        for k in range(m):
            c.add(Assign(w(k), (k,)))
        for st in correction_chain(layout):
            c.add(CondGate(w(st.left), 1, Gate("X", (st.data_qubit,))))
            if st.right is not None:
                c.add(Assign(w(st.right), (w(st.right), w(st.left))))
            c.add(Assign(w(st.left), ("0",)))
    elif correction == "gf2":
        inv = _right_inverse(layout)
        used = [q for q in layout.data_qubits if inv[q]]
        c.cregs.append(("f", len(used)))
        for j, q in enumerate(used):
            c.add(Assign(m + j, tuple(inv[q])))
            c.add(CondGate(m + j, 1, Gate("X", (q,))))
    else:
        raise ValueError(f"unknown correction {correction!r}")
    return c


def strip_conditionals(c: AdaptiveCircuit) -> AdaptiveCircuit:
    """Same program with every conditional gate removed (no feed-forward)."""
    return AdaptiveCircuit(list(c.qregs), list(c.cregs),
                           [ins for ins in c.instructions if not isinstance(ins, CondGate)])


# ---------------------------------------------------------------- shots


def _support_from_fired(c: AdaptiveCircuit, fired_idx: Iterable[int]) -> List[int]:
    v = 0
    for k in fired_idx:
        v ^= 1 << c.instructions[k].gate.qubits[0]
    return gf2.int_to_support(v)


def run_shot(layout: CodeLayout, noise: Optional[NoiseModel], basis: str, rng: ShotRng,
             correction: str = "chain", circuit: Optional[AdaptiveCircuit] = None,
             return_fidelity: bool = False):
    """One full shot on a fresh tableau (reference single-shot path)."""
    if basis not in ("X", "Z"):
        raise ValueError(f"basis must be X or Z, got {basis!r}")
    circ = circuit or build_prep_circuit(layout, correction)
    t = StabilizerTableau(layout.n_qubits)
    res = execute(circ, t, rng, noise)
    fid = exact_state_overlap(t, target_generators(layout)) if return_fidelity else None
    tm = threshold(noise.pm) if noise is not None else 0
    bits = []
    for q in layout.data_qubits:
        out = t.measure(PauliString.from_support(layout.n_qubits, basis, [q]), rng)
        b = out.bit
        if tm and fault_index(rng.word(), tm, 1) == 0:
            b ^= 1
        bits.append(b)
    m = layout.n_ancilla
    rec = ShotRecord(
        shot_index=rng.shot,
        basis=basis,
        syndrome=res.registers.bits[:m],
        correction_support=_support_from_fired(circ, res.fired),
        final_bits=bits,
        rng_seed=rng.seed,
    )
    return (rec, fid) if return_fidelity else rec


@dataclass
class ShotBatch:
    records: List[ShotRecord]
    fidelities: np.ndarray  # exact per-shot fidelity of the pre-readout state
    syndromes: np.ndarray = field(repr=False, default=None)


def _run_chunk(layout, circ, noise, seed, shot_ids, bases, with_fidelity):
    n = layout.n_qubits
    tm = threshold(noise.pm) if noise is not None else 0
    res = execute_batch(circ, seed, shot_ids, noise, extra_noise_words=layout.n_data)
    t = res.tableau
    fids = batch_overlap(t, target_generators(layout)) if with_fidelity else np.full(len(shot_ids), np.nan)
    bits = np.zeros((len(shot_ids), layout.n_data), dtype=np.uint8)
    for basis in ("X", "Z"):
        sel = np.array([b == basis for b in bases])
        if not sel.any():
            continue
        # the two bases share nothing after this point, so run them on separate copies
        sub = _select_shots(t, sel)
        words_before = res.randomness.word_cursor
        bits_before = res.randomness.bit_cursor
        rnd = _SubRandomness(res.randomness, sel)
        for q in layout.data_qubits:
            p = PauliString.from_support(n, basis, [q])
            if sub.random_pivot(p):
                b = sub.measure(p, rnd.bits())[0]
            else:
                b = sub.measure(p)[0]
            if tm:
                b = b ^ (rnd.fault(tm))
            bits[sel, q] = b
        res.randomness.word_cursor = words_before
        res.randomness.bit_cursor = bits_before
    m = layout.n_ancilla
    syn = res.registers[:m].T.astype(np.uint8)
    fired_support = np.zeros((len(shot_ids), layout.n_data), dtype=bool)
    for k, mask in res.fired.items():
        fired_support[:, circ.instructions[k].gate.qubits[0]] ^= mask
    records = [
        ShotRecord(int(s), bases[i], syn[i].tolist(), np.flatnonzero(fired_support[i]).tolist(),
                   bits[i].tolist(), int(seed))
        for i, s in enumerate(shot_ids)
    ]
    return records, fids, syn


class _SubRandomness:
    """Restrict a batch's random columns to a subset of shots."""

    def __init__(self, rnd, sel):
        self.rnd = rnd
        self.sel = sel

    def bits(self):
        return self.rnd.bits()[self.sel]

    def fault(self, thr):
        return _fault_labels(self.rnd.word()[self.sel], thr, 1) == 0


def _select_shots(t, sel):
    sub = TableauBatch.__new__(TableauBatch)
    sub.n_qubits = t.n_qubits
    sub.shots = int(sel.sum())
    sub.xs, sub.zs = list(t.xs), list(t.zs)
    sub.rs = [r[sel].copy() for r in t.rs]
    return sub


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def run_shots(layout: CodeLayout, noise: Optional[NoiseModel], shots_x: int, shots_z: int,
              seed: int, correction: str = "chain", with_fidelity: bool = False,
              chunk: int = 4096, workers: Optional[int] = None) -> ShotBatch:
    """X-basis shots get indices 0..shots_x-1, Z-basis shots follow.

    Results are identical to calling :func:`run_shot` per shot index with
    ``ShotRng(seed, index)``, independent of chunking and worker count.
    """
    if shots_x < 0 or shots_z < 0:
        raise ValueError("shot counts must be nonnegative")
    circ = build_prep_circuit(layout, correction)
    ids = list(range(shots_x + shots_z))
    bases = ["X"] * shots_x + ["Z"] * shots_z
    jobs = [(ids[i:i + chunk], bases[i:i + chunk]) for i in range(0, len(ids), chunk)]
    workers = workers or worker_count()

    def job(j):
        return _run_chunk(layout, circ, noise, seed, j[0], j[1], with_fidelity)

    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(job, jobs))
    else:
        parts = [job(j) for j in jobs]
    records = [r for p in parts for r in p[0]]
    fids = np.concatenate([p[1] for p in parts]) if parts else np.zeros(0)
    syn = np.concatenate([p[2] for p in parts]) if parts else np.zeros((0, layout.n_ancilla), dtype=np.uint8)
    return ShotBatch(records, fids, syn)


# ---------------------------------------------------------------- record files


def write_records(out: IO[str], records: Sequence[ShotRecord], manifest: Optional[dict] = None):
    if manifest is not None:
        out.write(json.dumps({"type": "manifest", **manifest}, separators=(",", ":"), sort_keys=True) + "\n")
    for r in records:
        out.write(r.to_json() + "\n")


def read_records(lines: Iterable[str]) -> Tuple[Optional[dict], List[ShotRecord]]:
    manifest = None
    records = []
    for n, line in enumerate(lines, 1):
        line = line.strip()
        if not line:
            continue
        try:
            d = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValueError(f"line {n}: not JSON ({exc.msg})") from None
        if not isinstance(d, dict):
            raise ValueError(f"line {n}: expected an object")
        kind = d.get("type", "shot")
        if kind == "manifest":
            manifest = {k: v for k, v in d.items() if k != "type"}
        elif kind == "shot":
            try:
                records.append(ShotRecord.from_dict(d))
            except ValueError as exc:
                raise ValueError(f"line {n}: {exc}") from None
        else:
            raise ValueError(f"line {n}: unknown record type {kind!r}")
    return manifest, records
