from __future__ import annotations

from dataclasses import asdict, dataclass

from .pauli_tableau import PauliString
from .rng import fault_index, threshold

_SINGLE = ("X", "Y", "Z")
_LETTERS = "IXYZ"


@dataclass(frozen=True)
class NoiseModel:
    """Local Pauli noise, each fault supported on the qubits of its operation.

    p1: uniformly random X/Y/Z after each single-qubit gate
    p2: uniformly random non-identity two-qubit Pauli after each CNOT
    pm: classical flip of each recorded measurement bit
    pi: X after each qubit (re)initialization
    """

    p1: float = 0.0
    p2: float = 0.0
    pm: float = 0.0
    pi: float = 0.0

    def __post_init__(self):
        for name, p in asdict(self).items():
            if not 0.0 <= float(p) <= 1.0:
                raise ValueError(f"noise probability {name}={p} outside [0, 1]")

    @classmethod
    def parse(cls, text: str) -> "NoiseModel":
        """From ``"p1,p2,pm,pi"`` (missing trailing fields are zero)."""
        parts = [float(v) for v in text.split(",") if v.strip()]
        if len(parts) > 4:
            raise ValueError("noise takes at most four values p1,p2,pm,pi")
        return cls(*parts)

    @classmethod
    def calibrated(cls, p2: float) -> "NoiseModel":
        """One-parameter family used for calibration: p1 = p2/10, pm = p2/2."""
        return cls(p1=p2 / 10, p2=p2, pm=p2 / 2, pi=0.0)

    @property
    def is_zero(self) -> bool:
        return self.p1 == self.p2 == self.pm == self.pi == 0.0

    def as_dict(self) -> dict:
        return asdict(self)


def single_fault(n: int, q: int, label: int) -> PauliString:
    return PauliString.from_support(n, _SINGLE[label], [q])


def pair_fault(n: int, a: int, b: int, label: int) -> PauliString:
    """Label 0..14 enumerates the 15 non-identity Paulis on (a, b)."""
    code = label + 1
    pa, pb = _LETTERS[code // 4], _LETTERS[code % 4]
    x = z = 0
    for q, ch in ((a, pa), (b, pb)):
        if ch in "XY":
            x |= 1 << q
        if ch in "ZY":
            z |= 1 << q
    return PauliString(n, x, z, 0)


__all__ = ["NoiseModel", "single_fault", "pair_fault", "threshold", "fault_index"]
