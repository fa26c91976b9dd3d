"""Why depth-4 local unitaries stop at fidelity 1/2.

Under a depth-d circuit on the layout's connectivity, Z_L and Z_R only see
their past causal cones. When those cones are disjoint the two-outcome
measurements pi_L and pi_R are uncorrelated on any state prepared from a
product input, so the four-outcome distribution q factorizes as
(ab, a(1-b), (1-a)b, (1-a)(1-b)). The target gives p = (1, 0, 0, 1)/2, and the
Bhattacharyya overlap of p with any product-form q is at most 1/2.

The module also carries a random-circuit harness that checks the ceiling on
exactly simulable Clifford circuits.
"""
from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from typing import FrozenSet, Iterable, List, Sequence, Tuple

import numpy as np

from .pauli_tableau import StabilizerTableau, exact_state_overlap
from .surface_code import CodeLayout, logical_operators, target_generators

IDEAL_P = (0.5, 0.0, 0.0, 0.5)
_PROB_TOL = 1e-12


class BoundError(ValueError):
    pass


# ---------------------------------------------------------------- POVM algebra


def _check_prob(v: Sequence[float], name: str) -> np.ndarray:
    a = np.asarray(v, dtype=float)
    if a.shape != (4,):
        raise BoundError(f"{name} must have four entries")
    if (a < -_PROB_TOL).any() or abs(a.sum() - 1.0) > _PROB_TOL:
        raise BoundError(f"{name} is not a probability vector: {a.tolist()}")
    return np.clip(a, 0.0, None)


def product_form(a: float, b: float) -> Tuple[float, float, float, float]:
    """q for independent pi_L^+ (prob a) and pi_R^+ (prob b), order ++, +-, -+, --."""
    if not (0.0 <= a <= 1.0 and 0.0 <= b <= 1.0):
        raise BoundError("marginals must lie in [0, 1]")
    return (a * b, a * (1 - b), (1 - a) * b, (1 - a) * (1 - b))


def bhattacharyya_bound(p: Sequence[float], q: Sequence[float]) -> float:
    """(sum_j sqrt(p_j q_j))^2."""
    pa, qa = _check_prob(p, "p"), _check_prob(q, "q")
    return float(np.sqrt(pa * qa).sum() ** 2)


def product_form_bound(a: float, b: float) -> float:
    """Closed form of the bound against IDEAL_P: (u.v)^2 / 2 with u = (sqrt a, sqrt(1-a))."""
    return 0.5 * (math.sqrt(a * b) + math.sqrt((1 - a) * (1 - b))) ** 2


def max_product_form_bound(grid_step: float) -> float:
    """Grid maximum over a, b in [0, 1] of the bound for product-form q."""
    if not 0.0 < grid_step <= 0.01:
        raise BoundError("grid_step must lie in (0, 0.01]")
    grid = np.linspace(0.0, 1.0, int(round(1.0 / grid_step)) + 1)
    a, b = np.meshgrid(grid, grid, indexing="ij")
    sq = np.sqrt(0.5 * a * b) + np.sqrt(0.5 * (1 - a) * (1 - b))
    return float((sq ** 2).max())


@dataclass(frozen=True)
class PovmProfile:
    p: Tuple[float, float, float, float]
    q: Tuple[float, float, float, float]
    a: float
    b: float

    def __post_init__(self):
        _check_prob(self.p, "p")
        _check_prob(self.q, "q")

    @classmethod
    def from_q(cls, q: Sequence[float], p: Sequence[float] = IDEAL_P) -> "PovmProfile":
        """Marginals a = q_++ + q_+-, b = q_++ + q_-+."""
        q = tuple(float(v) for v in q)
        return cls(tuple(float(v) for v in p), q, q[0] + q[1], q[0] + q[2])

    @property
    def product_residual(self) -> float:
        """|q - product_form(a, b)|_1; zero when pi_L and pi_R are uncorrelated."""
        a = min(max(self.a, 0.0), 1.0)
        b = min(max(self.b, 0.0), 1.0)
        return float(np.abs(np.subtract(self.q, product_form(a, b))).sum())

    @property
    def bound(self) -> float:
        return bhattacharyya_bound(self.p, self.q)


def _logical_expectations(t: StabilizerTableau, layout: CodeLayout) -> Tuple[int, int, int]:
    ops = logical_operators(layout)
    zl, zr = ops["Z_L"], ops["Z_R"]
    return t.expectation(zl), t.expectation(zr), t.expectation(zl * zr)


def povm_distribution(t: StabilizerTableau, layout: CodeLayout) -> Tuple[float, float, float, float]:
    """Probabilities of pi_L^(+/-) pi_R^(+/-), order ++, +-, -+, --."""
    el, er, elr = _logical_expectations(t, layout)
    return tuple(
        (1 + sl * el + sr * er + sl * sr * elr) / 4
        for sl in (1, -1) for sr in (1, -1)
    )


def connected_correlation(t: StabilizerTableau, layout: CodeLayout) -> float:
    """<Z_L Z_R> - <Z_L><Z_R>."""
    el, er, elr = _logical_expectations(t, layout)
    return float(elr - el * er)


# ---------------------------------------------------------------- causal cones


def past_cone(layout: CodeLayout, support: Iterable[int], depth: int) -> FrozenSet[int]:
    """Qubits within ``depth`` hops of ``support`` on the connectivity graph."""
    start = frozenset(support)
    if not start:
        raise BoundError("support must be nonempty")
    if depth < 0:
        raise BoundError("depth must be nonnegative")
    dist = {q: 0 for q in start}
    todo = deque(start)
    while todo:
        q = todo.popleft()
        if dist[q] == depth:
            continue
        for nb in layout.neighbors[q]:
            if nb not in dist:
                dist[nb] = dist[q] + 1
                todo.append(nb)
    return frozenset(dist)


@dataclass(frozen=True)
class ConeReport:
    layout_id: str
    depth: int
    cone_left: FrozenSet[int]
    cone_right: FrozenSet[int]

    @property
    def overlap(self) -> FrozenSet[int]:
        return self.cone_left & self.cone_right

    @property
    def disjoint(self) -> bool:
        return not self.overlap

    def to_dict(self) -> dict:
        return {
            "layout_id": self.layout_id,
            "depth": self.depth,
            "disjoint": self.disjoint,
            "cones": {"Z_L": sorted(self.cone_left), "Z_R": sorted(self.cone_right)},
            "overlap": sorted(self.overlap),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def cones_disjoint(layout: CodeLayout, depth: int) -> ConeReport:
    return ConeReport(
        layout.layout_id, depth,
        past_cone(layout, layout.logical_z_left, depth),
        past_cone(layout, layout.logical_z_right, depth),
    )


# ---------------------------------------------------------------- two-qubit Cliffords
#
# A gate word is a tuple over H0, H1, S0, S1, CX01 acting on an ordered edge
# (u, v). Cliffords modulo Paulis form Sp(4, 2) with 720 elements; a breadth
# first search stores one shortest word per element, and a uniform Clifford is
# a uniform word followed by a uniform Pauli.

_LOCAL = {"H0": ("H", 0), "H1": ("H", 1), "S0": ("S", 0), "S1": ("S", 1)}
_GEN = ("H0", "H1", "S0", "S1", "CX01")


def _act(gen: str, p: Tuple[int, int, int, int]) -> Tuple[int, int, int, int]:
    x0, x1, z0, z1 = p
    if gen == "H0":
        return z0, x1, x0, z1
    if gen == "H1":
        return x0, z1, z0, x1
    if gen == "S0":
        return x0, x1, z0 ^ x0, z1
    if gen == "S1":
        return x0, x1, z0, z1 ^ x1
    return x0, x1 ^ x0, z0 ^ z1, z1  # CX01


_BASIS = ((1, 0, 0, 0), (0, 0, 1, 0), (0, 1, 0, 0), (0, 0, 0, 1))


def _clifford_words() -> List[Tuple[str, ...]]:
    seen = {_BASIS: ()}
    todo = deque([_BASIS])
    while todo:
        img = todo.popleft()
        for g in _GEN:
            nxt = tuple(_act(g, p) for p in img)
            if nxt not in seen:
                seen[nxt] = seen[img] + (g,)
                todo.append(nxt)
    return sorted(seen.values(), key=lambda w: (len(w), w))


CLIFFORD_WORDS: List[Tuple[str, ...]] = _clifford_words()
SWAP_WORD = ("CX01", "H0", "H1", "CX01", "H0", "H1", "CX01")
CX_WORD = ("CX01",)
# single-qubit stabilizer states from |0>: |0>, |1>, |+>, |->, |+i>, |-i>
_PRODUCT_STATES = ((), ("X",), ("H",), ("X", "H"), ("H", "S"), ("X", "H", "S"))


def random_two_qubit_clifford(rng: np.random.Generator) -> Tuple[str, ...]:
    word = CLIFFORD_WORDS[int(rng.integers(len(CLIFFORD_WORDS)))]
    pauli = int(rng.integers(16))
    tail = tuple(name for bit, name in zip(range(4), ("X0", "Z0", "X1", "Z1")) if pauli >> bit & 1)
    return word + tail


def _apply_word(t: StabilizerTableau, word: Sequence[str], u: int, v: int):
    for g in word:
        if g == "CX01":
            t.apply("CNOT", u, v)
        elif g in _LOCAL:
            name, k = _LOCAL[g]
            t.apply(name, (u, v)[k])
        else:
            t.apply(g[0], (u, v)[int(g[1])])


# ---------------------------------------------------------------- layered circuits


@dataclass
class LayeredCircuit:
    """Product input plus ``depth`` layers of disjoint two-qubit gates on edges."""

    inputs: List[Tuple[str, ...]]
    layers: List[List[Tuple[int, int, Tuple[str, ...]]]] = field(default_factory=list)

    @property
    def depth(self) -> int:
        return len(self.layers)

    def check(self, layout: CodeLayout):
        for k, layer in enumerate(self.layers):
            busy = set()
            for u, v, _ in layer:
                if frozenset((u, v)) not in layout.edge_set:
                    raise BoundError(f"layer {k}: ({u}, {v}) is not a connectivity edge")
                if u in busy or v in busy:
                    raise BoundError(f"layer {k}: qubit used twice")
                busy |= {u, v}

    def run(self, n_qubits: int) -> StabilizerTableau:
        return self.apply_to(StabilizerTableau(n_qubits))

    def apply_to(self, t: StabilizerTableau) -> StabilizerTableau:
        """Prepare the inputs on a fresh tableau ``t`` and run the layers."""
        for q, word in enumerate(self.inputs):
            for g in word:
                t.apply(g, q)
        for layer in self.layers:
            for u, v, word in layer:
                _apply_word(t, word, u, v)
        return t


def random_matching(layout: CodeLayout, rng: np.random.Generator) -> List[Tuple[int, int]]:
    """Greedy maximal matching over shuffled edges, each edge randomly oriented."""
    edges = list(layout.connectivity)
    busy, out = set(), []
    for k in rng.permutation(len(edges)):
        u, v = edges[k]
        if u in busy or v in busy:
            continue
        busy |= {u, v}
        out.append((u, v) if rng.random() < 0.5 else (v, u))
    return out


def random_product_input(n: int, rng: np.random.Generator) -> List[Tuple[str, ...]]:
    return [_PRODUCT_STATES[int(k)] for k in rng.integers(len(_PRODUCT_STATES), size=n)]


def uniform_random_circuit(layout: CodeLayout, depth: int, rng: np.random.Generator) -> LayeredCircuit:
    """Random product input, then uniform two-qubit Cliffords on random matchings."""
    return LayeredCircuit(
        random_product_input(layout.n_qubits, rng),
        [[(u, v, random_two_qubit_clifford(rng)) for u, v in random_matching(layout, rng)]
         for _ in range(depth)],
    )


def extremal_circuit(layout: CodeLayout) -> LayeredCircuit:
    """Depth-4 preparation of the logical |0> state, whose overlap with |+> is 1/2.

    On a strip the logical |0> is a product of GHZ blocks: a Bell pair on each
    end column and a four-qubit GHZ state on every pair of columns (c, c+1), c
    odd. Each block is grown by copying into an ancilla and swapping the
    ancilla into the next data qubit, which leaves every ancilla in |0>.
    """
    L = layout.L
    d = layout.data_index
    anc = lambda name: layout.ancilla_of(layout.z_index[name])  # noqa: E731
    inputs: List[Tuple[str, ...]] = [()] * layout.n_qubits
    layers: List[list] = [[] for _ in range(4)]

    def bell(src, a, dst, first):
        inputs[src] = ("H",)
        layers[first].append((src, a, CX_WORD))
        layers[first + 1].append((a, dst, SWAP_WORD))

    bell(d(0, 0), anc("P0"), d(1, 0), 2)
    bell(d(0, L), anc(f"P{L - 1}"), d(1, L), 0)
    for c in range(1, L, 2):
        p, b, t = anc(f"P{c - 1}"), anc(f"B{c}"), anc(f"T{c}")
        inputs[d(0, c)] = ("H",)
        layers[0].append((d(0, c), p, CX_WORD))
        layers[1] += [(p, d(1, c), SWAP_WORD), (d(0, c), b, CX_WORD)]
        layers[2] += [(d(1, c), t, CX_WORD), (b, d(0, c + 1), SWAP_WORD)]
        layers[3].append((t, d(1, c + 1), SWAP_WORD))
    return LayeredCircuit(inputs, layers)


def perturbed_circuit(base: LayeredCircuit, layout: CodeLayout, rate: float,
                      rng: np.random.Generator) -> LayeredCircuit:
    """Randomize ``base``: each input, each gate and each idle edge slot is hit with prob ``rate``.

    A hit input becomes a random single-qubit stabilizer state, a hit gate a
    uniform Clifford on the same edge, and a hit idle edge gains a uniform
    Clifford.
    """
    inputs = [_PRODUCT_STATES[int(rng.integers(6))] if rng.random() < rate else w
              for w in base.inputs]
    layers = []
    for layer in base.layers:
        new = [(u, v, random_two_qubit_clifford(rng) if rng.random() < rate else w)
               for u, v, w in layer]
        busy = {q for u, v, _ in new for q in (u, v)}
        for k in rng.permutation(len(layout.connectivity)):
            u, v = layout.connectivity[k]
            if u in busy or v in busy or rng.random() >= rate:
                continue
            busy |= {u, v}
            new.append((u, v, random_two_qubit_clifford(rng)))
        layers.append(new)
    return LayeredCircuit(inputs, layers)


@dataclass(frozen=True)
class CeilingSample:
    ensemble: str
    index: int
    fidelity: float
    povm: PovmProfile
    connected: float


def sample_ceiling(layout: CodeLayout, n_samples: int, depth: int = 4, seed: int = 0,
                   ensemble: str = "uniform", rate: float = 0.05) -> List[CeilingSample]:
    """Exact fidelity and POVM profile of random depth-``depth`` circuits.

    ``ensemble`` is "uniform" or "perturbed" (the extremal circuit randomized
    at ``rate``; needs depth 4). Sample k uses its own generator seeded by
    (seed, ensemble, k), so results do not depend on evaluation order.
    """
    if ensemble not in ("uniform", "perturbed"):
        raise BoundError(f"unknown ensemble {ensemble!r}")
    if ensemble == "perturbed" and depth != 4:
        raise BoundError("the perturbed ensemble is built around a depth-4 circuit")
    base = extremal_circuit(layout) if ensemble == "perturbed" else None
    tag = 0 if ensemble == "uniform" else 1
    gens = target_generators(layout)
    out = []
    for k in range(n_samples):
        rng = np.random.default_rng([seed, tag, k])
        circ = (uniform_random_circuit(layout, depth, rng) if base is None
                else perturbed_circuit(base, layout, rate, rng))
        circ.check(layout)
        t = circ.run(layout.n_qubits)
        out.append(CeilingSample(
            ensemble, k, exact_state_overlap(t, gens),
            PovmProfile.from_q(povm_distribution(t, layout)),
            connected_correlation(t, layout),
        ))
    return out
