"""Fidelity estimation from X- and Z-basis readout shots.

Each X-basis shot gives a 0/1 indicator that every X check and the logical X
read +1; each Z-basis shot an indicator for all Z checks. Their means
estimate <P_x> and <P_z>, and <P_x> + <P_z> - 1 lower-bounds the fidelity.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Dict, Optional, Sequence

import numpy as np

from .pauli_tableau import StabilizerTableau, exact_state_overlap
from .surface_code import CodeLayout, target_generators

DEFAULT_RESAMPLES = 100


class EstimationError(ValueError):
    pass


def projector_indicator(bits: Sequence[int], operator_supports: Sequence[Sequence[int]],
                        include_logical: Optional[Sequence[int]] = None) -> int:
    """1 iff every support has product +1 over the +-1 outcomes ``bits``.

    ``include_logical``, when given, is one more support checked the same way.
    """
    supports = list(operator_supports)
    if include_logical is not None:
        supports.append(include_logical)
    n = len(bits)
    for sup in supports:
        prod = 1
        for j in sup:
            if not 0 <= j < n:
                raise EstimationError(f"support index {j} out of range for {n} bits")
            prod *= bits[j]
        if prod != 1:
            return 0
    return 1


def _parity_matrix(bits: np.ndarray, supports: Sequence[Sequence[int]]) -> np.ndarray:
    """(shots, operators) array: 1 where that operator read +1."""
    out = np.empty((bits.shape[0], len(supports)), dtype=np.uint8)
    for k, sup in enumerate(supports):
        out[:, k] = (bits[:, list(sup)].sum(axis=1) & 1) == 0
    return out


@dataclass
class FidelityEstimate:
    px_hat: float
    pz_hat: float
    lower_bound: float
    sigma: float
    n_x: int
    n_z: int
    n_resamples: int
    per_stabilizer: Dict[str, float] = field(default_factory=dict)
    logical_x_fid: float = float("nan")

    def formatted(self) -> str:
        return format_with_sigma(self.lower_bound, self.sigma)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lower_bound_formatted"] = self.formatted()
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


class _Indicators:
    """Per-shot indicator tables for both bases."""

    def __init__(self, records, layout: CodeLayout):
        xs = [r for r in records if r.basis == "X"]
        zs = [r for r in records if r.basis == "Z"]
        if not xs or not zs:
            raise EstimationError("zero shots in basis " + ("X" if not xs else "Z"))
        for r in xs + zs:
            if len(r.final_bits) != layout.n_data:
                raise EstimationError(f"shot {r.shot_index}: expected {layout.n_data} data bits")
        xbits = np.array([r.final_bits for r in xs], dtype=np.uint8)
        zbits = np.array([r.final_bits for r in zs], dtype=np.uint8)
        self.x_names = [c.name for c in layout.x_checks] + ["X_L"]
        self.z_names = [c.name for c in layout.z_checks]
        self.x_ops = _parity_matrix(xbits, [c.support for c in layout.x_checks] + [layout.logical_x])
        self.z_ops = _parity_matrix(zbits, [c.support for c in layout.z_checks])
        self.px = self.x_ops.all(axis=1).astype(float)
        self.pz = self.z_ops.all(axis=1).astype(float)


def estimate(records, layout: CodeLayout, n_resamples: int = DEFAULT_RESAMPLES,
             rng: Optional[np.random.Generator] = None) -> FidelityEstimate:
    """Point estimates plus bootstrap sigma (``n_resamples=0`` skips the bootstrap)."""
    ind = _Indicators(records, layout)
    px, pz = float(ind.px.mean()), float(ind.pz.mean())
    per = {name: float(v) for name, v in zip(ind.x_names[:-1], ind.x_ops[:, :-1].mean(axis=0))}
    per.update({name: float(v) for name, v in zip(ind.z_names, ind.z_ops.mean(axis=0))})
    sigma = _bootstrap(ind, n_resamples, rng) if n_resamples else float("nan")
    return FidelityEstimate(
        px_hat=px, pz_hat=pz, lower_bound=px + pz - 1.0, sigma=sigma,
        n_x=len(ind.px), n_z=len(ind.pz), n_resamples=n_resamples,
        per_stabilizer=per, logical_x_fid=float(ind.x_ops[:, -1].mean()),
    )


def _bootstrap(ind: _Indicators, n_resamples: int, rng) -> float:
    if n_resamples < 2:
        raise EstimationError("bootstrap needs at least two resamples")
    rng = rng if rng is not None else np.random.default_rng(0)
    nx, nz = len(ind.px), len(ind.pz)
    vals = np.empty(n_resamples)
    for k in range(n_resamples):
        bx = ind.px[rng.integers(0, nx, nx)].mean()
        bz = ind.pz[rng.integers(0, nz, nz)].mean()
        vals[k] = bx + bz - 1.0
    return float(vals.std(ddof=1))


def bootstrap_sigma(records, layout: CodeLayout, n_resamples: int = DEFAULT_RESAMPLES,
                    rng: Optional[np.random.Generator] = None) -> float:
    """1-sigma spread of the lower bound over resamples drawn per basis."""
    if not records:
        raise EstimationError("empty record set")
    return _bootstrap(_Indicators(records, layout), n_resamples, rng)


def analytic_sigma(px: float, pz: float, n_x: int, n_z: int) -> float:
    """Binomial standard error of px + pz - 1."""
    return math.sqrt(px * (1 - px) / n_x + pz * (1 - pz) / n_z)


def exact_fidelity(t: StabilizerTableau, layout: CodeLayout) -> float:
    return exact_state_overlap(t, target_generators(layout))


def format_with_sigma(value: float, sigma: float) -> str:
    """``0.769(13)`` style: sigma to two significant digits on the last places."""
    if not math.isfinite(sigma):
        return f"{value:.3f}"
    if sigma <= 0:
        return f"{value:.3f}(0)"
    decimals = max(0, 1 - math.floor(math.log10(sigma)))
    digits = round(sigma * 10**decimals)
    if digits >= 100:
        decimals -= 1
        digits = round(sigma * 10**decimals)
    return f"{value:.{decimals}f}({digits})"
