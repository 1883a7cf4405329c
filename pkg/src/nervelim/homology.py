"""Simplicial homology over GF(2) with bitset Gaussian elimination.

Betti numbers are the instrument for homotopy-type agreement checks: the
GF(2) ranks of the boundary maps of a downward-closed complex.  All target
examples here are torsion free, so GF(2) ranks determine the answer.
"""

from __future__ import annotations

from dataclasses import dataclass

from .complexes import LambdaIndex, SimplicialComplex
from .report import Report
from .systems import InverseSystem


@dataclass(frozen=True)
class BoundaryMatrix:
    """Boundary map from k-simplices to (k-1)-simplices over GF(2).

    Columns are k-simplices, rows (k-1)-simplices, both in sorted order;
    each column is stored as an integer bitmask over the rows.
    """

    dimension: int
    rows: tuple[tuple[int, ...], ...]
    cols: tuple[tuple[int, ...], ...]
    column_bits: tuple[int, ...]


def boundary_matrix(cx: SimplicialComplex, k: int) -> BoundaryMatrix:
    if k < 1:
        raise ValueError("boundary matrices start at dimension 1")
    rows = cx.k_simplices(k - 1)
    cols = cx.k_simplices(k)
    row_index = {s: i for i, s in enumerate(rows)}
    bits = []
    for s in cols:
        mask = 0
        for drop in range(len(s)):
            face = s[:drop] + s[drop + 1 :]
            mask |= 1 << row_index[face]
        bits.append(mask)
    return BoundaryMatrix(k, tuple(rows), tuple(cols), tuple(bits))


def gf2_rank(vectors: list[int]) -> int:
    """Rank of a set of GF(2) vectors encoded as integer bitmasks."""
    basis: list[int] = []
    rank = 0
    for v in vectors:
        for b in basis:
            v = min(v, v ^ b)
        if v:
            basis.append(v)
            basis.sort(reverse=True)
            rank += 1
    return rank


def boundary_composition_is_zero(cx: SimplicialComplex, k: int) -> bool:
    """d_k . d_{k+1} = 0, checked column by column."""
    outer = boundary_matrix(cx, k)
    inner = boundary_matrix(cx, k + 1)
    outer_index = {s: outer.column_bits[i] for i, s in enumerate(outer.cols)}
    for s, mask in zip(inner.cols, inner.column_bits):
        acc = 0
        i = 0
        m = mask
        while m:
            if m & 1:
                acc ^= outer_index[inner.rows[i]]
            m >>= 1
            i += 1
        if acc:
            return False
    return True


@dataclass(frozen=True)
class BettiVector:
    numbers: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(b < 0 for b in self.numbers):
            raise ValueError("negative Betti number")

    def padded(self, length: int) -> tuple[int, ...]:
        """Exactly ``length`` entries; refuses to drop a nonzero one."""
        if any(self.numbers[length:]):
            raise ValueError("nonzero entries beyond the requested length")
        return (self.numbers + (0,) * length)[:length]

    def to_json(self) -> list[int]:
        return list(self.numbers)


def betti(cx: SimplicialComplex, max_dim: int | None = None) -> BettiVector:
    """GF(2) Betti numbers b_0..b_top via rank-nullity on bitset matrices."""
    top = cx.dim if max_dim is None else min(max_dim, cx.dim)
    counts = [len(cx.k_simplices(k)) for k in range(top + 2)]
    ranks = [0]  # rank of d_0 is 0
    for k in range(1, top + 2):
        if counts[k] == 0:
            ranks.append(0)
        else:
            ranks.append(gf2_rank(list(boundary_matrix(cx, k).column_bits)))
    numbers = tuple(counts[k] - ranks[k] - ranks[k + 1] for k in range(top + 1))
    return BettiVector(numbers)


@dataclass
class StabilizationRow:
    lam: LambdaIndex
    complex_kind: str  # "N" or "F"
    bettis: BettiVector


@dataclass
class StabilizationTable:
    rows: list[StabilizationRow]
    nerve_stabilized: bool

    def to_json(self) -> dict:
        return {
            "rows": [
                {
                    "level": list(r.lam.cover_ids),
                    "complex": r.complex_kind,
                    "betti": list(r.bettis.numbers),
                }
                for r in self.rows
            ],
            "nerve_stabilized": self.nerve_stabilized,
        }

    def csv(self) -> str:
        lines = ["level,complex,b0,b1,b2"]
        for r in self.rows:
            b = r.bettis.padded(3)[:3]
            level = "|".join(str(i) for i in r.lam.cover_ids)
            lines.append(f"{level},{r.complex_kind},{b[0]},{b[1]},{b[2]}")
        return "\n".join(lines) + "\n"


def betti_stabilization(system: InverseSystem, chain: list[LambdaIndex]) -> StabilizationTable:
    """Betti vectors of nerve and flag complexes along an increasing chain,
    flagged stabilized when the last two nerve entries agree."""
    for a, b in zip(chain, chain[1:]):
        if not a <= b:
            raise ValueError("chain must be increasing")
    rows = []
    nerve_values = []
    for lam in chain:
        level = system.levels[lam]
        bn = betti(level.nerve)
        bf = betti(level.flag)
        rows.append(StabilizationRow(lam, "N", bn))
        rows.append(StabilizationRow(lam, "F", bf))
        nerve_values.append(bn.padded(3))
    stabilized = len(nerve_values) >= 2 and nerve_values[-1] == nerve_values[-2]
    return StabilizationTable(rows, stabilized)


def check_boundary_identity(system: InverseSystem) -> Report:
    """d.d = 0 for every level complex and every dimension."""
    bad = None
    for lam in system.lambdas:
        for cx, kind in ((system.levels[lam].nerve, "N"), (system.levels[lam].flag, "F")):
            for k in range(1, cx.dim + 1):
                if not boundary_composition_is_zero(cx, k):
                    bad = {"lambda": list(lam.cover_ids), "complex": kind, "k": k}
                    break
            if bad:
                break
        if bad:
            break
    return Report("boundary_identity", bad is None, counterexample=bad)
