"""Linear algebra over GF(2) on bit-packed rows.

A vector is a Python ``int`` whose bit ``j`` holds coordinate ``j``; a matrix
is a list of such row vectors. Python ints are arbitrary width, so one row
packs any number of columns into machine words.
"""
from __future__ import annotations

from typing import Iterable, List, Optional, Sequence


def pack(bits: Iterable[int]) -> int:
    """Pack an iterable of 0/1 values (index 0 first) into an int."""
    v = 0
    for j, b in enumerate(bits):
        if b:
            v |= 1 << j
    return v


def unpack(v: int, n: int) -> List[int]:
    return [(v >> j) & 1 for j in range(n)]


def support_to_int(indices: Iterable[int]) -> int:
    v = 0
    for j in indices:
        v ^= 1 << j
    return v


def int_to_support(v: int) -> List[int]:
    out = []
    j = 0
    while v:
        if v & 1:
            out.append(j)
        v >>= 1
        j += 1
    return out


def parity(v: int) -> int:
    return v.bit_count() & 1


def _echelon(rows: Sequence[int]):
    """Reduced echelon form; returns (basis rows, pivot bit of each row)."""
    basis: List[int] = []
    pivots: List[int] = []
    for r in rows:
        for b, p in zip(basis, pivots):
            if (r >> p) & 1:
                r ^= b
        if r:
            p = r.bit_length() - 1
            # keep the basis fully reduced so membership tests are one pass
            for i in range(len(basis)):
                if (basis[i] >> p) & 1:
                    basis[i] ^= r
            basis.append(r)
            pivots.append(p)
    return basis, pivots


def rank(rows: Sequence[int]) -> int:
    return len(_echelon(rows)[0])


def in_span(rows: Sequence[int], v: int) -> bool:
    basis, pivots = _echelon(rows)
    for b, p in zip(basis, pivots):
        if (v >> p) & 1:
            v ^= b
    return v == 0


def solve(rows: Sequence[int], n_cols: int, rhs: Sequence[int]) -> Optional[int]:
    """Find x with ``parity(rows[i] & x) == rhs[i]`` for every i.

    Returns the packed solution (free variables set to 0), or ``None`` when the
    system is inconsistent.
    """
    if len(rows) != len(rhs):
        raise ValueError("rhs length must equal the number of rows")
    flag = 1 << n_cols
    aug = [r | (flag if b else 0) for r, b in zip(rows, rhs)]
    # eliminate on the column part only: pivots chosen below the flag bit
    basis: List[int] = []
    pivots: List[int] = []
    mask = flag - 1
    for r in aug:
        for b, p in zip(basis, pivots):
            if (r >> p) & 1:
                r ^= b
        if r & mask:
            p = (r & mask).bit_length() - 1
            for i in range(len(basis)):
                if (basis[i] >> p) & 1:
                    basis[i] ^= r
            basis.append(r)
            pivots.append(p)
        elif r:
            return None
    x = 0
    for b, p in zip(basis, pivots):
        if b & flag:
            x |= 1 << p
    return x


def nullspace(rows: Sequence[int], n_cols: int) -> List[int]:
    """Basis of {x : parity(r & x) == 0 for all rows r}."""
    basis, pivots = _echelon(rows)
    pivot_set = set(pivots)
    out = []
    for f in range(n_cols):
        if f in pivot_set:
            continue
        x = 1 << f
        for b, p in zip(basis, pivots):
            if (b >> f) & 1:
                x |= 1 << p
        out.append(x)
    return out
