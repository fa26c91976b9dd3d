"""Tableau engine versus statevector oracle.

Three families of checks, all on one layout:

* lockstep: the tableau runs a circuit with sampled outcomes; the oracle runs
  it postselected on the same outcomes and must assign probability 1 to every
  outcome the tableau called deterministic and 1/2 to every random one.
  Every stabilizer row of the final tableau, sign included, must have
  expectation +1 on the oracle state.
* fidelity: exact_state_overlap on the tableau against the squared overlap of
  the oracle state with the target built by projection.
* sampling: per-bit and per-check outcome frequencies of many tableau shots
  against the oracle's exact probabilities, compared by total variation
  distance.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Sequence

import numpy as np

from . import oracle as sv
from .adaptive_prep import build_prep_circuit, run_shots, strip_conditionals
from .bound_analysis import LayeredCircuit, uniform_random_circuit, extremal_circuit
from .circuit_lang import Measure, execute
from .pauli_tableau import PauliString, StabilizerTableau, exact_state_overlap
from .rng import ShotRng
from .surface_code import CodeLayout, target_generators

PROB_TOL = 1e-9
FIDELITY_TOL = 1e-10
TVD_TOL = 0.02


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)


@dataclass
class EquivalenceReport:
    layout_id: str
    L: int
    checks: List[CheckResult]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "layout_id": self.layout_id,
            "L": self.L,
            "passed": self.passed,
            "checks": [{"name": c.name, "passed": c.passed, **c.detail} for c in self.checks],
        }


def _lockstep_ok(outcomes, trace) -> tuple:
    """(ok, worst deviation) for tableau outcomes against oracle (bit, prob) trace."""
    worst = 0.0
    for out, (_, p) in zip(outcomes, trace):
        want = 1.0 if out.was_deterministic else 0.5
        worst = max(worst, abs(p - want))
    return worst <= PROB_TOL and len(outcomes) == len(trace), worst


def _stabilizer_deviation(t: StabilizerTableau, state: sv.StateVector) -> float:
    """max |<g> - 1| over the tableau's stabilizer rows, evaluated on the oracle state."""
    return max(abs(sv.sv_expectation(state, g) - 1.0) for g in t.stab_rows)


def _target_state(layout: CodeLayout) -> sv.StateVector:
    """|+> of the code on the data, ancillas in |0>."""
    anc = [layout.pauli("Z", [a]) for a in layout.ancilla_qubits]
    return sv.stabilizer_state(layout.n_qubits, target_generators(layout) + anc)


def _target_overlap(state: sv.StateVector, layout: CodeLayout) -> float:
    """Probability that the data pass every target projector, ancillas traced out."""
    work = state.copy()
    prob = 1.0
    for g in target_generators(layout):
        prob *= sv.sv_project(work, g, 0)
        if prob < 1e-15:
            return 0.0
    return prob


def _sv_run_layered(circ: LayeredCircuit, n: int) -> sv.StateVector:
    state = sv.StateVector.zeros(n)
    for q, word in enumerate(circ.inputs):
        for g in word:
            sv.sv_apply(state, g, [q])
    for layer in circ.layers:
        for u, v, word in layer:
            for g in word:
                if g == "CX01":
                    sv.sv_apply(state, "CNOT", [u, v])
                else:
                    sv.sv_apply(state, g[0], [(u, v)[int(g[1])]])
    return state


def check_prep_lockstep(layout: CodeLayout, seeds: Sequence[int],
                        tableau_factory: Callable[[int], StabilizerTableau]) -> List[CheckResult]:
    out = []
    target = _target_state(layout)
    for variant, circ in (("adaptive", build_prep_circuit(layout)),
                          ("no_feedforward", strip_conditionals(build_prep_circuit(layout)))):
        worst_p, worst_f, ok = 0.0, 0.0, True
        for seed in seeds:
            t = tableau_factory(layout.n_qubits)
            res = execute(circ, t, ShotRng(seed, 0))
            bits = [o.bit for o in res.outcomes]
            state, regs, trace = sv.execute(circ, sv.StateVector.zeros(layout.n_qubits), forced=bits)
            good, dev = _lockstep_ok(res.outcomes, trace)
            dev = max(dev, _stabilizer_deviation(t, state))
            good &= dev <= PROB_TOL
            f_tab = exact_state_overlap(t, target_generators(layout))
            f_sv = _target_overlap(state, layout)
            ok &= good and regs.bits == res.registers.bits and abs(f_tab - f_sv) <= FIDELITY_TOL
            worst_p, worst_f = max(worst_p, dev), max(worst_f, abs(f_tab - f_sv))
            if variant == "adaptive":
                f_pure = sv.sv_overlap(state, target)
                ok &= abs(f_pure - f_tab) <= FIDELITY_TOL
                worst_f = max(worst_f, abs(f_pure - f_tab))
        out.append(CheckResult(f"prep_lockstep_{variant}", bool(ok), {
            "shots": len(seeds), "max_probability_deviation": worst_p, "max_fidelity_deviation": worst_f,
        }))
    return out


def check_random_circuits(layout: CodeLayout, n_circuits: int, seed: int,
                          tableau_factory: Callable[[int], StabilizerTableau]) -> CheckResult:
    """Random depth-4 Clifford circuits plus the extremal one, then every qubit measured."""
    n = layout.n_qubits
    circuits = [extremal_circuit(layout)]
    circuits += [uniform_random_circuit(layout, 4, np.random.default_rng([seed, k]))
                 for k in range(n_circuits)]
    worst_p, worst_f, ok = 0.0, 0.0, True
    gens = target_generators(layout)
    for k, circ in enumerate(circuits):
        t = circ.apply_to(tableau_factory(n))
        state = _sv_run_layered(circ, n)
        f_tab, f_sv = exact_state_overlap(t, gens), _target_overlap(state, layout)
        worst_f = max(worst_f, abs(f_tab - f_sv))
        stab_dev = _stabilizer_deviation(t, state)
        worst_p = max(worst_p, stab_dev)
        ok &= abs(f_tab - f_sv) <= FIDELITY_TOL and stab_dev <= PROB_TOL
        rng = ShotRng(seed, 1 + k)
        for q in range(n):
            basis = "XZ"[q % 2]
            res = t.measure(PauliString.from_support(n, basis, [q]), rng)
            _, p = sv.sv_measure(state, q, basis, forced=res.bit)
            dev = abs(p - (1.0 if res.was_deterministic else 0.5))
            worst_p = max(worst_p, dev)
            ok &= dev <= PROB_TOL
    return CheckResult("random_clifford_lockstep", bool(ok), {
        "circuits": len(circuits), "max_probability_deviation": worst_p,
        "max_fidelity_deviation": worst_f,
    })


def _tvd_bits(freq1: np.ndarray, p1: np.ndarray) -> np.ndarray:
    """TVD of two-outcome distributions given their probabilities of outcome 1."""
    return np.abs(freq1 - p1)


def check_sampling(layout: CodeLayout, shots: int, seed: int) -> List[CheckResult]:
    """Tableau shot frequencies against exact oracle probabilities."""
    circ = build_prep_circuit(layout)
    n, m = layout.n_qubits, layout.n_ancilla
    # oracle: stop just before the ancilla measurements for the syndrome law
    first_measure = next(k for k, ins in enumerate(circ.instructions) if isinstance(ins, Measure))
    head = type(circ)(list(circ.qregs), list(circ.cregs), circ.instructions[:first_measure])
    pre, _, _ = sv.execute(head, sv.StateVector.zeros(n), forced=[0] * n)
    law = sv.marginal_distribution(pre, layout.ancilla_qubits)
    law_dev = float(np.abs(law - 1.0 / (1 << m)).max())
    syn_p1 = np.array([sv.sv_probability(pre, a, "Z") for a in layout.ancilla_qubits])
    # final state is the same for every syndrome; any forced branch will do
    post, _, _ = sv.execute(circ, sv.StateVector.zeros(n), forced=[0] * (n + 2 * m))
    bits_p1 = {b: np.array([sv.sv_probability(post, q, b) for q in layout.data_qubits]) for b in "XZ"}
    checks = {"X": [c.support for c in layout.x_checks] + [layout.logical_x],
              "Z": [c.support for c in layout.z_checks]}
    par_p1 = {b: np.array([(1 - sv.sv_expectation(post, layout.pauli(b, s))) / 2 for s in checks[b]])
              for b in "XZ"}

    batch = run_shots(layout, None, shots, shots, seed)
    syn = batch.syndromes.astype(float)
    tv = {"syndrome_bits": float(_tvd_bits(syn.mean(axis=0), syn_p1).max())}
    for b in "XZ":
        fb = np.array([r.final_bits for r in batch.records if r.basis == b], dtype=np.uint8)
        tv[f"{b}_bits"] = float(_tvd_bits(fb.mean(axis=0), bits_p1[b]).max())
        par = np.array([(fb[:, list(s)].sum(axis=1) & 1).mean() for s in checks[b]])
        tv[f"{b}_checks"] = float(_tvd_bits(par, par_p1[b]).max())
    return [
        CheckResult("syndrome_law_exact", law_dev <= 1e-12, {"max_deviation_from_uniform": law_dev}),
        CheckResult("sampled_tvd", max(tv.values()) < TVD_TOL, {"shots_per_basis": shots, "max_tvd": tv}),
    ]


def run_suite(layout: CodeLayout, shots: int = 10_000, seed: int = 0, lockstep_shots: int = 3,
              n_circuits: int = 2,
              tableau_factory: Callable[[int], StabilizerTableau] = StabilizerTableau) -> EquivalenceReport:
    """All checks; raises oracle.OracleError beyond the statevector ceiling."""
    if layout.n_qubits > sv.MAX_QUBITS:
        raise sv.OracleError(
            f"L={layout.L} needs {layout.n_qubits} qubits; the oracle stops at {sv.MAX_QUBITS}")
    checks = check_prep_lockstep(layout, range(seed, seed + lockstep_shots), tableau_factory)
    checks.append(check_random_circuits(layout, n_circuits, seed, tableau_factory))
    checks += check_sampling(layout, shots, seed)
    return EquivalenceReport(layout.layout_id, layout.L, checks)
