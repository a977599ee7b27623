"""Dense linear algebra over the prime field F_p.

Matrices are small (a few thousand columns at most) so everything is plain
Gaussian elimination on numpy int64 arrays.  Every matrix carries its own
prime, which lets tests over several primes share one process.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    d = 3
    while d * d <= p:
        if p % d == 0:
            return False
        d += 2
    return True


@dataclass(frozen=True)
class FpMatrix:
    p: int
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"modulus {self.p} is not prime")
        arr = np.asarray(self.data, dtype=np.int64)
        if arr.ndim != 2:
            raise ValueError("FpMatrix data must be two-dimensional")
        arr = arr % self.p
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @classmethod
    def from_rows(cls, p: int, rows: Sequence[Sequence[int]], cols: Optional[int] = None):
        if len(rows) == 0:
            return cls.zeros(p, 0, cols or 0)
        return cls(p, np.array(rows, dtype=np.int64))

    @classmethod
    def zeros(cls, p: int, rows: int, cols: int):
        return cls(p, np.zeros((rows, cols), dtype=np.int64))

    @classmethod
    def identity(cls, p: int, size: int):
        return cls(p, np.eye(size, dtype=np.int64))

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self):
        return self.data.shape

    def entries(self) -> list[int]:
        """Row-major list of residues."""
        return [int(e) for e in self.data.ravel()]

    def tolist(self) -> list[list[int]]:
        return self.data.tolist()

    def __matmul__(self, other):
        if isinstance(other, FpMatrix):
            if other.p != self.p:
                raise ValueError("prime mismatch")
            return FpMatrix(self.p, _matmul_mod(self.data, other.data, self.p))
        vec = np.asarray(other, dtype=np.int64)
        return _matmul_mod(self.data, vec, self.p)

    def __eq__(self, other):
        if not isinstance(other, FpMatrix):
            return NotImplemented
        return self.p == other.p and np.array_equal(self.data, other.data)

    def __hash__(self):
        return hash((self.p, self.data.shape, self.data.tobytes()))

    def is_zero(self) -> bool:
        return not self.data.any()

    def rank(self) -> int:
        return len(row_reduce(self)[1])


def _matmul_mod(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    # Entries < p, so each product < p^2; chunk the inner dimension to keep
    # partial sums well inside int64.
    inner = a.shape[1]
    if inner == 0:
        shape = (a.shape[0],) + b.shape[1:]
        return np.zeros(shape, dtype=np.int64)
    chunk = max(1, (2**62) // ((p - 1) ** 2 + 1))
    out = None
    for start in range(0, inner, chunk):
        part = (a[:, start:start + chunk] @ b[start:start + chunk]) % p
        out = part if out is None else (out + part) % p
    return out


def _rref_inplace(a: np.ndarray, p: int) -> list[int]:
    rows, cols = a.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(a[r:, c])
        if nz.size == 0:
            continue
        k = r + nz[0]
        if k != r:
            a[[r, k]] = a[[k, r]]
        inv = pow(int(a[r, c]), -1, p)
        if inv != 1:
            a[r] = (a[r] * inv) % p
        col = a[:, c].copy()
        col[r] = 0
        hit = np.flatnonzero(col)
        if hit.size:
            a[hit] = (a[hit] - np.outer(col[hit], a[r])) % p
        pivots.append(c)
        r += 1
    return pivots


def row_reduce(m: FpMatrix) -> tuple[FpMatrix, list[int]]:
    """Reduced row echelon form of ``m`` and its pivot columns."""
    a = np.array(m.data, dtype=np.int64)
    pivots = _rref_inplace(a, m.p)
    return FpMatrix(m.p, a), pivots


def kernel_basis(m: FpMatrix) -> list[np.ndarray]:
    """A basis of the right null space {x : m x = 0}."""
    reduced, pivots = row_reduce(m)
    data = reduced.data
    pivot_set = set(pivots)
    basis = []
    for free in range(m.cols):
        if free in pivot_set:
            continue
        v = np.zeros(m.cols, dtype=np.int64)
        v[free] = 1
        for i, pc in enumerate(pivots):
            v[pc] = (-data[i, free]) % m.p
        basis.append(v)
    return basis


def solve_linear(m: FpMatrix, b: Sequence[int]) -> Optional[np.ndarray]:
    """Some x with m x = b, or None when b is not in the image.

    Free variables are set to zero, so the answer is deterministic.
    """
    b = np.asarray(b, dtype=np.int64) % m.p
    if b.shape != (m.rows,):
        raise ValueError(f"right-hand side has shape {b.shape}, expected ({m.rows},)")
    aug = np.concatenate([np.array(m.data), b.reshape(-1, 1)], axis=1)
    pivots = _rref_inplace(aug, m.p)
    if pivots and pivots[-1] == m.cols:
        return None
    x = np.zeros(m.cols, dtype=np.int64)
    for i, pc in enumerate(pivots):
        x[pc] = aug[i, m.cols]
    return x


def span_basis(p: int, vectors: Iterable[Sequence[int]], dim: int) -> FpMatrix:
    """Rows of the RREF of the span of ``vectors`` (zero rows dropped)."""
    vecs = [np.asarray(v, dtype=np.int64) for v in vectors]
    if not vecs:
        return FpMatrix.zeros(p, 0, dim)
    reduced, pivots = row_reduce(FpMatrix(p, np.stack(vecs)))
    return FpMatrix(p, reduced.data[: len(pivots)])


def reduce_against(p: int, vec: np.ndarray, rref_rows: np.ndarray, pivots: Sequence[int]) -> np.ndarray:
    """Clear the pivot coordinates of ``vec`` using RREF rows."""
    out = np.array(vec, dtype=np.int64) % p
    for row, pc in zip(rref_rows, pivots):
        c = out[pc]
        if c:
            out = (out - c * row) % p
    return out


def valuation_maximize(cycle: Sequence[int], boundary_basis: Sequence[Sequence[int]],
                       valuation_order: Sequence[Sequence[int]], p: int) -> np.ndarray:
    """Representative of ``cycle + span(boundary_basis)`` with the largest valuation.

    ``valuation_order`` lists coordinate blocks from lowest valuation to
    highest; the valuation of a vector is the index of the first block in
    which it is nonzero.  Reordering the coordinates block by block and fully
    reducing against the echelon form of the boundaries pushes the first
    nonzero coordinate as far right as the coset allows.  The result is the
    unique fully reduced coset element, hence deterministic.
    """
    cycle = np.asarray(cycle, dtype=np.int64) % p
    perm = [c for block in valuation_order for c in block]
    if sorted(perm) != list(range(cycle.shape[0])):
        raise ValueError("valuation_order must partition the coordinates")
    if len(boundary_basis) == 0:
        return cycle
    perm = np.array(perm, dtype=np.int64)
    bmat = np.stack([np.asarray(b, dtype=np.int64) for b in boundary_basis])[:, perm]
    reduced, pivots = row_reduce(FpMatrix(p, bmat))
    rows = reduced.data[: len(pivots)]
    permuted = reduce_against(p, cycle[perm], rows, pivots)
    out = np.zeros_like(cycle)
    out[perm] = permuted
    return out


def valuation_of(vec: Sequence[int], valuation_order: Sequence[Sequence[int]]) -> Optional[int]:
    """Index of the first block where ``vec`` is nonzero (None for the zero vector)."""
    for i, block in enumerate(valuation_order):
        if any(vec[c] for c in block):
            return i
    return None
