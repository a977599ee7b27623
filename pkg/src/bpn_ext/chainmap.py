"""Majorization classes, the lifted chain maps P^I~, and the classes phi^I.

Polynomials in v_0, v_1, ... are dicts from exponent tuples to residues.
Exponent sequences and v-exponent tuples are compared after stripping
trailing zeros unless a fixed length is stated.
"""
from __future__ import annotations

import csv
import io
from collections import Counter, defaultdict
from dataclasses import dataclass
from itertools import product
from typing import Optional

import numpy as np

from . import fp_linalg
from .fp_linalg import FpMatrix
from .koszul import (
    KoszulElement,
    _slice_basis,
    _slice_index,
    compositions,
    differential,
    format_koszul,
    v_topological_degree,
)
from .milnor import Monomial, _strip, algebraic_degree, q_action_monomial, q_multiply, weight


def _pad(seq, length):
    seq = tuple(seq)
    if len(seq) > length and any(seq[length:]):
        raise ValueError(f"{seq} does not fit in length {length}")
    return (seq + (0,) * length)[:length]


# -- majorization classes -----------------------------------------------------

@dataclass(frozen=True)
class Placement:
    boxes: tuple   # label of each box, in box order
    balls: tuple   # label of the ball placed in each box

    def index(self, p: int) -> tuple:
        return placement_index(self.balls, self.boxes, p)


def placement_index(balls, boxes, p) -> tuple:
    """Sum of local indices: a ball i in a box i+j contributes p^i e_j."""
    out: dict[int, int] = defaultdict(int)
    for b, x in zip(balls, boxes):
        if x > b:
            out[x - b] += p**b
    if not out:
        return ()
    return _strip(out.get(j, 0) for j in range(1, max(out) + 1))


def _box_labels(R) -> tuple:
    return tuple(i for i, r in enumerate(R) for _ in range(r))


def _fillings(boxes, counts):
    """Sequences of ball labels, one per box, with ball <= box and the given label counts.

    Boxes are distinguishable and same-labelled balls are not, so distinct
    label sequences are exactly the distinct placements.
    """
    out = []
    seq = []

    def rec(k):
        if k == len(boxes):
            out.append(tuple(seq))
            return
        for label in range(min(boxes[k], len(counts) - 1) + 1):
            if counts[label]:
                counts[label] -= 1
                seq.append(label)
                rec(k + 1)
                seq.pop()
                counts[label] += 1

    rec(0)
    return out


def majorizations(S, R, p: int) -> list[tuple[Placement, tuple]]:
    """All majorization classes from S to R together with their indices."""
    S, R = _strip(S), _strip(R)
    if sum(S) != sum(R):
        raise ValueError(f"sum(S)={sum(S)} differs from sum(R)={sum(R)}")
    boxes = _box_labels(R)
    out = []
    for balls in _fillings(boxes, list(S)):
        pl = Placement(boxes, balls)
        out.append((pl, pl.index(p)))
    return out


def seq_of_sum(total: int, labels: int) -> list[tuple]:
    """Seq(total) restricted to sequences supported on labels 0..labels-1."""
    return [_strip(c) for c in compositions(total, labels)]


def _subtract_index(I: tuple, ind: tuple) -> Optional[tuple]:
    if len(ind) > len(I):
        if any(ind[len(I):]):
            return None
    J = list(I)
    for j, c in enumerate(ind):
        J[j] -= c
        if J[j] < 0:
            return None
    return _strip(J)


def lift_monomial(I, S, p: int) -> dict[tuple, int]:
    """P^I~(u^S) = sum over R and sigma in Maj(S, R) of P^{I - ind(sigma)} u^R.

    Returns {(J, R): coefficient mod p}.  Only R whose box labels exceed a
    ball label by at most len(I) can contribute, which keeps the sum finite.
    """
    I, S = _strip(I), _strip(S)
    L = sum(S)
    top = len(S) + len(I)
    out: Counter = Counter()
    for R in seq_of_sum(L, top):
        for pl, ind in majorizations(S, R, p):
            J = _subtract_index(I, ind)
            if J is not None:
                out[(J, R)] += 1
    return {k: c % p for k, c in out.items() if c % p}


def _koszul_d_terms(J: tuple, R: tuple):
    """P^J d(u^R) = sum_i P^J Q_i u^{R - f_i}, as (monomial, R') keys."""
    for i, r in enumerate(R):
        if r:
            R2 = list(R)
            R2[i] -= 1
            yield Monomial(J, (i,)), _strip(R2)


def verify_chain_map(I, L: int, p: int, n_truncation: int) -> bool:
    """Check d P^I~ = P^I~ d on every u^S with |S| = L and labels <= n_truncation.

    Both sides are computed exactly in the free A-module on the symbols u^R,
    with left Q-multiplication taken from the Milnor product formula.
    """
    if L < 1:
        raise ValueError("L must be >= 1")
    return not chain_map_defects(I, L, p, n_truncation)


def chain_map_defects(I, L: int, p: int, n_truncation: int) -> list[tuple]:
    bad = []
    for S in seq_of_sum(L, n_truncation + 1):
        lhs: Counter = Counter()
        for (J, R), c in lift_monomial(I, S, p).items():
            for key in _koszul_d_terms(J, R):
                lhs[key] += c
        rhs: Counter = Counter()
        for i, s in enumerate(S):
            if not s:
                continue
            S2 = list(S)
            S2[i] -= 1
            for (J, R), c in lift_monomial(I, S2, p).items():
                for mono, sign in q_multiply(i, Monomial(J, ()), p):
                    rhs[(mono, R)] += sign * c
        if any((lhs[k] - rhs[k]) % p for k in set(lhs) | set(rhs)):
            bad.append(S)
    return bad


# -- induced maps on F_p[v_0, v_1, ...] ---------------------------------------

def pi_action(I, R, p: int) -> dict[tuple, int]:
    """(P^I)_*(v^R) = sum_S #{sigma in Maj(S, R) : ind(sigma) = I} v^S.

    Output exponent tuples have the same length as ``R``.
    """
    R = tuple(R)
    I = _strip(I)
    boxes = _box_labels(R)
    counts: Counter = Counter()
    for balls in product(*(range(x + 1) for x in boxes)):
        if placement_index(balls, boxes, p) == I:
            S = [0] * len(R)
            for b in balls:
                S[b] += 1
            counts[tuple(S)] += 1
    return {S: c % p for S, c in counts.items() if c % p}


def topological_degree_P(I, p: int) -> int:
    return algebraic_degree(Monomial(_strip(I), ()), p)


def poly_multiply_monomial(poly: dict, r: tuple, p: int) -> dict:
    out = {}
    for e, c in poly.items():
        out[tuple(a + b for a, b in zip(e, r))] = c
    return out


def induced_action(cycle: KoszulElement, x) -> dict[tuple, int]:
    """f_*(v^x) for the class f represented by ``cycle``.

    Q-terms die in A//E(infinity), every P^J v^T term contributes
    v^T (P^J)_*(v^x), and the result is projected to F_p[v_0..v_m].
    """
    p, m, n = cycle.p, cycle.m, cycle.n
    x = _pad(x, n + 1)
    out: Counter = Counter()
    for (T, mono), c in cycle.terms.items():
        if mono.Q:
            continue
        for S, a in pi_action(mono.P, x, p).items():
            if any(S[m + 1:]):
                continue
            key = tuple(s + t for s, t in zip(S[: m + 1], T))
            out[key] += a * c
    return {k: v % p for k, v in out.items() if v % p}


# -- phi^I ----------------------------------------------------------------------

@dataclass(frozen=True)
class PhiMap:
    p: int
    m: int
    n: int
    I: tuple
    N: int
    cycle: KoszulElement

    def header(self) -> str:
        return f"# phi p={self.p} m={self.m} n={self.n} I={list(self.I)} N={self.N}"

    def serialize(self) -> str:
        return self.header() + "\n" + format_koszul(self.cycle) + "\n"

    def pad(self, N: int) -> "PhiMap":
        """The same class multiplied up to v_0^N P^I + ...; exact on cycles."""
        if N < self.N:
            raise ValueError(f"cannot lower N from {self.N} to {N}")
        return PhiMap(self.p, self.m, self.n, self.I, N, self.cycle.multiply_v(0, N - self.N))


def _partial_differential(x: KoszulElement, start: int) -> KoszulElement:
    """d^start = v_start Q_start + ... + v_m Q_m."""
    out = x._empty()
    for (r, mono), c in x.terms.items():
        for i in range(start, x.m + 1):
            for image, sign in q_action_monomial(i, mono, x.p, x.n):
                r2 = r[:i] + (r[i] + 1,) + r[i + 1:]
                out._add((r2, image), sign * c)
    return out


def _q0_system(p, m, n, k, t, w):
    """Q_0 from the v_0-free part of slice (k, t, w) into slice (k, t-1, w)."""
    cols = [key for key in _slice_basis(p, m, n, k, t, w) if key[0][0] == 0]
    rows = _slice_index(p, m, n, k, t - 1, w)
    mat = np.zeros((len(rows), len(cols)), dtype=np.int64)
    for j, (r, mono) in enumerate(cols):
        for image, sign in q_action_monomial(0, mono, p, n):
            mat[rows[(r, image)], j] = (mat[rows[(r, image)], j] + sign) % p
    return cols, rows, FpMatrix(p, mat)


def phi_step_bound(p: int, I) -> int:
    """Upper bound on the number of lifting steps.

    A nonzero step-k term has an A//E(n) coefficient of degree at most
    deg(P^I) - (2p-2)k, and no monomial of weight w has degree below -w.
    """
    mono = Monomial(_strip(I), ())
    return (algebraic_degree(mono, p) + weight(mono, p)) // (2 * p - 2) + 1


def build_phi(p: int, m: int, n: int, I) -> PhiMap:
    """Lift P^I to a cycle v_0^N P^I + v_0^{N-1} x_{N-1} + ... + x_0.

    Each step solves Q_0 y_k = -d^1 y_{k-1} with y_0 = P^I; the sign makes the
    v_0^{N-k+1} coefficient of d(cycle) cancel.  Iteration stops at the first
    zero right-hand side and N is the number of nonzero steps taken.
    """
    if not 0 <= m <= n:
        raise ValueError(f"need 0 <= m <= n, got m={m}, n={n}")
    I = _pad(_strip(I), n)
    mono = Monomial(_strip(I), ())
    w = weight(mono, p)
    deg = algebraic_degree(mono, p)
    zero = (0,) * (m + 1)
    ys = [KoszulElement(p, m, n, {(zero, mono): 1})]
    bound = phi_step_bound(p, I)
    while True:
        rhs = _partial_differential(ys[-1], 1).scale(-1)
        if not rhs:
            break
        k = len(ys)
        if k > bound:
            raise RuntimeError(f"lifting of P^{list(I)} did not terminate within {bound} steps")
        cols, rows, mat = _q0_system(p, m, n, k, k + deg, w)
        b = np.zeros(len(rows), dtype=np.int64)
        for key, c in rhs.terms.items():
            b[rows[key]] = c
        sol = fp_linalg.solve_linear(mat, b) if cols else None
        if sol is None:
            raise RuntimeError(f"Q_0 y = -d^1 y' has no solution at step {k}; exactness fails")
        ys.append(KoszulElement(p, m, n, {cols[j]: int(c) for j, c in enumerate(sol) if c}))
    N = len(ys) - 1
    cycle = KoszulElement(p, m, n)
    for k, y in enumerate(ys):
        cycle = cycle + y.multiply_v(0, N - k)
    if differential(cycle):
        raise RuntimeError("constructed phi is not a cycle")
    return PhiMap(p, m, n, I, N, cycle)


def phi_action(phi: PhiMap, x) -> dict[tuple, int]:
    """(phi^I)_*(v^x) for deg(v^x) + deg(P^I) <= 0."""
    x = _pad(x, phi.n + 1)
    if v_topological_degree(x, phi.p) + topological_degree_P(phi.I, phi.p) > 0:
        raise ValueError("phi_action is only established when deg(x) + deg(P^I) <= 0")
    return induced_action(phi.cycle, x)


# -- surjectivity matrix ----------------------------------------------------------

def _v_seqs_of_degree(c: int, length: int, p: int) -> list[tuple]:
    """Exponent vectors (over v_1..v_length) of topological degree c, lex ascending."""
    out = []

    def rec(k, remaining, acc):
        if k > length:
            if remaining == 0:
                out.append(tuple(acc))
            return
        step = 2 * p**k - 2
        for e in range(remaining // step + 1):
            rec(k + 1, remaining - e * step, acc + [e])

    if c < 0:
        return []
    if length == 0:
        return [()] if c == 0 else []
    rec(1, c, [])
    return sorted(out)


def surjectivity_index(p: int, m: int, n: int, D: int, k: int) -> list[tuple]:
    """The ordered index set M: pairs (I, J) ordered by degree c, then lexicographically."""
    out = []
    for c in range(0, k + 1):
        pairs = [(I, J) for I in _v_seqs_of_degree(c, n, p) for J in _v_seqs_of_degree(c + D, m, p)]
        out.extend(sorted(pairs, key=lambda ij: ij[0] + ij[1]))
    return out


@dataclass
class SurjectivityReport:
    p: int
    m: int
    n: int
    D: int
    k: int
    index: list
    entries: list  # entries[row][col] = (coefficient, v0 exponent) or None
    lower_triangular: bool
    diagonal_ok: bool
    phis: dict

    @property
    def verdict(self) -> bool:
        return self.lower_triangular and self.diagonal_ok

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        labels = [_label(I, J) for I, J in self.index]
        writer.writerow(["row\\col"] + labels)
        for label, row in zip(labels, self.entries):
            writer.writerow([label] + [format_v0_entry(e) for e in row])
        return buf.getvalue()


def _label(I, J) -> str:
    return "I=" + "/".join(map(str, I)) + ";J=" + "/".join(map(str, J))


def format_v0_entry(entry) -> str:
    if entry is None:
        return "0"
    c, a = entry
    return f"v0^{a}" if c == 1 else f"{c}*v0^{a}"


def surjectivity_matrix(p: int, m: int, n: int, D: int, k: int) -> SurjectivityReport:
    """Evaluate (v^J phi^I)_* on the natural Hom basis indexed by M."""
    if not 0 <= m <= n:
        raise ValueError(f"need 0 <= m <= n, got m={m}, n={n}")
    if D % 2:
        raise ValueError("D must be even")
    index = surjectivity_index(p, m, n, D, k)
    phis = {}
    entries = [[None] * len(index) for _ in index]
    for col, (I, J) in enumerate(index):
        if I not in phis:
            phis[I] = build_phi(p, m, n, I)
        cycle = phis[I].cycle
        for i, e in enumerate(J, start=1):
            if e:
                cycle = cycle.multiply_v(i, e)
        for row, (I2, J2) in enumerate(index):
            image = induced_action(cycle, (0,) + tuple(I2))
            hits = [(c, e[0]) for e, c in image.items() if tuple(e[1:]) == tuple(J2)]
            if len(hits) > 1:
                raise RuntimeError("image is not homogeneous in Adams degree")
            entries[row][col] = hits[0] if hits else None
    lower = all(entries[r][c] is None for r in range(len(index)) for c in range(r + 1, len(index)))
    diag = all(entries[i][i] is not None and entries[i][i][0] == 1 for i in range(len(index)))
    return SurjectivityReport(p, m, n, D, k, index, entries, lower, diag, phis)
