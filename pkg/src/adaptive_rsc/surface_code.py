"""Thin rotated-surface-code strips: geometry, stabilizers, schedule.

Data qubit ``d(r, c)`` sits at row ``r`` in {0 (bottom), 1 (top)} and column
``c`` in ``0..L``; its index is ``r * (L + 1) + c``. Full plaquettes ``P_c``
span columns ``c, c+1``; even ``c`` is Z-type, odd ``c`` X-type. Every X-type
full plaquette is flanked by weight-2 Z checks on the top and bottom edge, and
the two short ends carry weight-2 X checks. Ancillas (one per Z check) follow
the data qubits, in purge-chain order.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Dict, FrozenSet, List, Tuple

from . import gf2
from .pauli_tableau import PauliString, StabilizerTableau


class LayoutError(ValueError):
    pass


@dataclass(frozen=True)
class Check:
    """One stabilizer generator: an id, its Pauli type and data support."""

    name: str
    kind: str  # "X" or "Z"
    support: Tuple[int, ...]
    # for Z checks: named corner -> data index, used by the schedule
    corners: Tuple[Tuple[str, int], ...] = ()

    @property
    def weight(self) -> int:
        return len(self.support)


@dataclass(frozen=True)
class CodeLayout:
    L: int
    z_checks: Tuple[Check, ...]
    x_checks: Tuple[Check, ...]
    logical_x: Tuple[int, ...]
    logical_z_left: Tuple[int, ...]
    logical_z_right: Tuple[int, ...]
    schedule: Tuple[Tuple[int, int, int], ...] = field(default=())  # (data, ancilla, layer)

    # ---- sizes and indices
    @property
    def n_data(self) -> int:
        return 2 * (self.L + 1)

    @property
    def n_ancilla(self) -> int:
        return len(self.z_checks)

    @property
    def n_qubits(self) -> int:
        return self.n_data + self.n_ancilla

    def data_index(self, row: int, col: int) -> int:
        if row not in (0, 1) or not 0 <= col <= self.L:
            raise LayoutError(f"no data qubit at ({row}, {col})")
        return row * (self.L + 1) + col

    def data_coords(self, idx: int) -> Tuple[int, int]:
        return divmod(idx, self.L + 1)

    def ancilla_of(self, k: int) -> int:
        return self.n_data + k

    @property
    def data_qubits(self) -> List[int]:
        return list(range(self.n_data))

    @property
    def ancilla_qubits(self) -> List[int]:
        return [self.ancilla_of(k) for k in range(self.n_ancilla)]

    @cached_property
    def z_index(self) -> Dict[str, int]:
        return {c.name: k for k, c in enumerate(self.z_checks)}

    @cached_property
    def check_by_name(self) -> Dict[str, Check]:
        return {c.name: c for c in self.z_checks + self.x_checks}

    # ---- connectivity
    @cached_property
    def connectivity(self) -> List[Tuple[int, int]]:
        """(data, ancilla) edges, one per Z-check/vertex incidence."""
        return [(d, self.ancilla_of(k)) for k, c in enumerate(self.z_checks) for d in c.support]

    @cached_property
    def edge_set(self) -> FrozenSet[FrozenSet[int]]:
        return frozenset(frozenset(e) for e in self.connectivity)

    @cached_property
    def neighbors(self) -> Dict[int, List[int]]:
        adj: Dict[int, List[int]] = {q: [] for q in range(self.n_qubits)}
        for a, b in self.connectivity:
            adj[a].append(b)
            adj[b].append(a)
        return adj

    # ---- incidence matrices (rows packed over data indices)
    @cached_property
    def hz_rows(self) -> List[int]:
        return [gf2.support_to_int(c.support) for c in self.z_checks]

    @cached_property
    def hx_rows(self) -> List[int]:
        return [gf2.support_to_int(c.support) for c in self.x_checks]

    def pauli(self, kind: str, support, sign: int = 1) -> PauliString:
        return PauliString.from_support(self.n_qubits, kind, support, sign)

    @property
    def layout_id(self) -> str:
        return hashlib.sha256(json.dumps(self.to_dict(), sort_keys=True).encode()).hexdigest()[:16]

    def to_dict(self) -> dict:
        """Structured export; see README for the field reference."""
        data = [
            {"index": self.data_index(r, c), "row": r, "col": c, "x": float(c), "y": float(r)}
            for r in (0, 1) for c in range(self.L + 1)
        ]
        anc = []
        for k, chk in enumerate(self.z_checks):
            rows = [self.data_coords(d) for d in chk.support]
            y = sum(r for r, _ in rows) / len(rows)
            if chk.weight == 2:
                y = 1.5 if rows[0][0] == 1 else -0.5
            anc.append({
                "index": self.ancilla_of(k),
                "stabilizer": chk.name,
                "syndrome_bit": k,
                "x": sum(c for _, c in rows) / len(rows),
                "y": y,
            })

        def checks(cs):
            return [{"id": c.name, "type": c.kind, "support": list(c.support)} for c in cs]

        return {
            "kind": "rotated_surface_code_strip",
            "L": self.L,
            "n_qubits": self.n_qubits,
            "data_qubits": data,
            "ancilla_qubits": anc,
            "z_stabilizers": checks(self.z_checks),
            "x_stabilizers": checks(self.x_checks),
            "logical_x": list(self.logical_x),
            "logical_z_left": list(self.logical_z_left),
            "logical_z_right": list(self.logical_z_right),
            "edges": [list(e) for e in self.connectivity],
            "schedule": [{"control": d, "target": a, "layer": layer} for d, a, layer in self.schedule],
            "syndrome_order": [c.name for c in self.z_checks],
        }


def _z_chain_names(L: int) -> List[str]:
    """Z checks in purge-chain order: T1, P0, B1, P2, then (T_c, P_{c+1}, B_c) for c = 3, 5, ..."""
    if L == 1:
        return ["P0"]
    names = ["T1", "P0", "B1", "P2"]
    for c in range(3, L, 2):
        names += [f"T{c}", f"P{c + 1}", f"B{c}"]
    return names


def build_strip(L: int) -> CodeLayout:
    """Strip of L full plaquettes (L odd) on a 2 x (L+1) grid of data qubits."""
    if not isinstance(L, int) or L < 1 or L % 2 == 0:
        raise LayoutError(f"strip length must be a positive odd integer, got {L!r}")
    d = lambda r, c: r * (L + 1) + c  # noqa: E731
    z: Dict[str, Check] = {}
    x: List[Check] = [Check("XL", "X", (d(0, 0), d(1, 0)))]
    for c in range(L):
        corners = (("NW", d(1, c)), ("NE", d(1, c + 1)), ("SW", d(0, c)), ("SE", d(0, c + 1)))
        support = tuple(sorted(q for _, q in corners))
        if c % 2 == 0:
            z[f"P{c}"] = Check(f"P{c}", "Z", support, corners)
        else:
            x.append(Check(f"P{c}", "X", support))
            z[f"T{c}"] = Check(f"T{c}", "Z", (d(1, c), d(1, c + 1)), (("W", d(1, c)), ("E", d(1, c + 1))))
            z[f"B{c}"] = Check(f"B{c}", "Z", (d(0, c), d(0, c + 1)), (("W", d(0, c)), ("E", d(0, c + 1))))
    x.append(Check("XR", "X", (d(0, L), d(1, L))))
    z_checks = tuple(z[name] for name in _z_chain_names(L))
    layout = CodeLayout(
        L=L,
        z_checks=z_checks,
        x_checks=tuple(x),
        logical_x=tuple(d(0, c) for c in range(L + 1)),
        logical_z_left=(d(0, 0), d(1, 0)),
        logical_z_right=(d(0, L), d(1, L)),
    )
    return replace(layout, schedule=tuple(measurement_schedule(layout)))


_LAYER = {
    ("full", "NW"): 1, ("full", "NE"): 2, ("full", "SW"): 3, ("full", "SE"): 4,
    ("top", "W"): 1, ("top", "E"): 2, ("bottom", "W"): 3, ("bottom", "E"): 4,
}


def measurement_schedule(layout: CodeLayout) -> List[Tuple[int, int, int]]:
    """CNOT (data -> ancilla) list with layers 1..4, sorted by layer.

    Full Z plaquettes touch NW, NE, SW, SE in layers 1-4; top weight-2 checks
    use layers 1-2 and bottom ones 3-4 (west corner first).
    """
    out = []
    for k, chk in enumerate(layout.z_checks):
        if chk.weight == 4:
            shape = "full"
        else:
            shape = "top" if layout.data_coords(chk.support[0])[0] == 1 else "bottom"
        for corner, q in chk.corners:
            out.append((q, layout.ancilla_of(k), _LAYER[(shape, corner)]))
    out.sort(key=lambda e: (e[2], e[1]))
    _check_schedule(layout, out)
    return out


def _check_schedule(layout: CodeLayout, sched):
    seen = set()
    for layer in range(1, 5):
        busy = set()
        for dq, a, lay in sched:
            if lay != layer:
                continue
            if dq in busy or a in busy:
                raise LayoutError(f"schedule conflict in layer {layer}")
            busy |= {dq, a}
    for dq, a, lay in sched:
        if lay not in (1, 2, 3, 4):
            raise LayoutError("layer outside 1..4")
        if (dq, a) in seen:
            raise LayoutError("duplicate CNOT in schedule")
        seen.add((dq, a))
    if seen != set(layout.connectivity):
        raise LayoutError("schedule does not cover every Z-check incidence exactly once")


def stabilizer_generators(layout: CodeLayout) -> Tuple[List[PauliString], List[PauliString]]:
    """(S^X, S^Z) over the full data+ancilla register."""
    sx = [layout.pauli("X", c.support) for c in layout.x_checks]
    sz = [layout.pauli("Z", c.support) for c in layout.z_checks]
    return sx, sz


def logical_operators(layout: CodeLayout) -> Dict[str, PauliString]:
    return {
        "X": layout.pauli("X", layout.logical_x),
        "Z_L": layout.pauli("Z", layout.logical_z_left),
        "Z_R": layout.pauli("Z", layout.logical_z_right),
    }


def target_generators(layout: CodeLayout) -> List[PauliString]:
    """S^X, S^Z and the logical X: together they fix |+> of the code on the data."""
    sx, sz = stabilizer_generators(layout)
    return sx + sz + [logical_operators(layout)["X"]]


def energy(t: StabilizerTableau, layout: CodeLayout) -> float:
    """-sum <S> - sum <S'> with stabilizer-group expectations in {-1, 0, 1}."""
    if t.n_qubits != layout.n_qubits:
        raise LayoutError("tableau does not match layout")
    sx, sz = stabilizer_generators(layout)
    return -float(sum(t.expectation(p) for p in sx + sz))


def ideal_tableau(layout: CodeLayout) -> StabilizerTableau:
    """Noise-free |+> logical state with ancillas in |0>, built without feed-forward.

    Starts from |+> on the data and projects every Z check onto +1 (forced
    outcomes), which is exactly the target state.
    """
    t = StabilizerTableau(layout.n_qubits)
    for q in layout.data_qubits:
        t.apply("H", q)
    for p in stabilizer_generators(layout)[1]:
        t.measure(p, forced=0)
    return t


def product_tableau(layout: CodeLayout) -> StabilizerTableau:
    """All data in |+>, ancillas in |0>."""
    t = StabilizerTableau(layout.n_qubits)
    for q in layout.data_qubits:
        t.apply("H", q)
    return t
