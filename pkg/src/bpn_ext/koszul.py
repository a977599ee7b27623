"""The complex (A//E(n))[v_0, ..., v_m] with d = sum_i v_i Q_i.

Its cohomology is Ext_{E(m)}(F_p, A//E(n)).  The complex is trigraded by
Adams degree s, algebraic degree t and weight w; d preserves t and w and
raises s by one, so everything is computed one finite slice at a time.

Inside a slice the basis is ordered by v-exponent (lexicographically
ascending) and then by monomial.  The v-exponent blocks are therefore in
order of increasing valuation, which is what the normal-representation code
relies on.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Optional

import numpy as np

from . import fp_linalg
from .fp_linalg import FpMatrix
from .milnor import (
    Element,
    Monomial,
    algebraic_degree,
    basis_sort_key,
    enumerate_basis,
    format_monomial,
    in_quotient,
    parse_monomial,
    q_action_monomial,
    weight,
)


class Tridegree(NamedTuple):
    s: int
    t: int
    w: int

    @property
    def topological(self) -> int:
        return self.t - self.s


def v_degree(r: tuple, p: int) -> int:
    """Algebraic degree of v_0^{r_0} ... v_m^{r_m}."""
    return sum(ri * (2 * p**i - 1) for i, ri in enumerate(r))


def v_topological_degree(r: tuple, p: int) -> int:
    return sum(ri * (2 * p**i - 2) for i, ri in enumerate(r))


def compositions(total: int, parts: int):
    """All tuples of ``parts`` nonnegative integers summing to ``total``, lex ascending."""
    if parts <= 0:
        if total == 0 and parts == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


def v_monomials(s: int, m: int) -> list[tuple]:
    return list(compositions(s, m + 1))


def _check_params(m, n):
    if m < 0 or n < 0 or m > n:
        raise ValueError(f"need 0 <= m <= n, got m={m}, n={n}")


class KoszulElement:
    """A homogeneous F_p-combination of v^R * monomial terms."""

    __slots__ = ("p", "m", "n", "terms")

    def __init__(self, p: int, m: int, n: int, terms=None):
        _check_params(m, n)
        self.p, self.m, self.n = p, m, n
        self.terms: dict[tuple, int] = {}
        if terms:
            items = terms.items() if isinstance(terms, dict) else terms
            for (r, mono), c in items:
                r = tuple(r)
                if len(r) != m + 1 or min(r) < 0:
                    raise ValueError(f"bad v-exponent {r} for m={m}")
                if not in_quotient(mono, n):
                    raise ValueError(f"{format_monomial(mono)} is not in A//E({n})")
                self._add((r, mono), c)
        self._check_homogeneous()

    def _add(self, key, c):
        c = (self.terms.get(key, 0) + c) % self.p
        if c:
            self.terms[key] = c
        else:
            self.terms.pop(key, None)

    def _term_degree(self, key) -> Tridegree:
        r, mono = key
        return Tridegree(sum(r), v_degree(r, self.p) + algebraic_degree(mono, self.p),
                         weight(mono, self.p))

    def _check_homogeneous(self):
        degs = {self._term_degree(k) for k in self.terms}
        if len(degs) > 1:
            raise ValueError(f"inhomogeneous element with tridegrees {sorted(degs)}")

    @property
    def tridegree(self) -> Optional[Tridegree]:
        for key in self.terms:
            return self._term_degree(key)
        return None

    @classmethod
    def from_element(cls, x: Element, m: int, r: Optional[tuple] = None):
        r = tuple(r) if r is not None else (0,) * (m + 1)
        return cls(x.p, m, x.n, {(r, mono): c for mono, c in x.terms.items()})

    def _empty(self):
        return KoszulElement(self.p, self.m, self.n)

    def __add__(self, other):
        if (self.p, self.m, self.n) != (other.p, other.m, other.n):
            raise ValueError("elements live in different complexes")
        out = self._empty()
        out.terms = dict(self.terms)
        for key, c in other.terms.items():
            out._add(key, c)
        out._check_homogeneous()
        return out

    def scale(self, c: int):
        out = self._empty()
        for key, a in self.terms.items():
            out._add(key, a * c)
        return out

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def multiply_v(self, i: int, power: int = 1):
        """Multiply by v_i^power (the F_p[v_0..v_m]-module structure)."""
        if not 0 <= i <= self.m:
            raise ValueError(f"v_{i} is not a generator for m={self.m}")
        out = self._empty()
        for (r, mono), c in self.terms.items():
            r2 = list(r)
            r2[i] += power
            out.terms[(tuple(r2), mono)] = c
        return out

    def coefficient(self, r: tuple) -> Element:
        """The A//E(n) coefficient of v^r."""
        return Element(self.p, self.n, {mono: c for (rr, mono), c in self.terms.items() if rr == tuple(r)})

    def valuation(self) -> Optional[tuple]:
        """The sequence (r_0, ..., r_m): the lexicographically least v-exponent present."""
        if not self.terms:
            return None
        return min(r for r, _ in self.terms)

    def __eq__(self, other):
        if not isinstance(other, KoszulElement):
            return NotImplemented
        return (self.p, self.m, self.n, self.terms) == (other.p, other.m, other.n, other.terms)

    def __bool__(self):
        return bool(self.terms)

    def __str__(self):
        return format_koszul(self)

    def __repr__(self):
        return f"KoszulElement(p={self.p}, m={self.m}, n={self.n}, {format_koszul(self)})"


def differential(x: KoszulElement) -> KoszulElement:
    out = x._empty()
    for (r, mono), c in x.terms.items():
        for i in range(x.m + 1):
            images = q_action_monomial(i, mono, x.p, x.n)
            if not images:
                continue
            r2 = list(r)
            r2[i] += 1
            r2 = tuple(r2)
            for image, sign in images:
                out._add((r2, image), sign * c)
    return out


# -- text form ----------------------------------------------------------------

def _print_key(key):
    r, mono = key
    return (tuple(-x for x in r), basis_sort_key(mono))


def format_koszul(x: KoszulElement) -> str:
    if not x.terms:
        return "0"
    parts = []
    for key in sorted(x.terms, key=_print_key):
        r, mono = key
        c = x.terms[key]
        text = "v[" + ",".join(map(str, r)) + "]"
        if mono.P or mono.Q:
            text += "*" + format_monomial(mono)
        if c != 1:
            text = f"{c}*" + text
        parts.append(text)
    return " + ".join(parts)


_V_RE = re.compile(r"^v\[([0-9, ]*)\]$")


def parse_koszul(text: str, p: int, m: int, n: int) -> KoszulElement:
    text = text.strip()
    terms: dict = {}
    if text != "0":
        for term in text.split("+"):
            factors = [f.strip() for f in term.split("*")]
            c = 1
            if factors and re.fullmatch(r"-?[0-9]+", factors[0]):
                c = int(factors.pop(0))
            if not factors or not _V_RE.match(factors[0]):
                raise ValueError(f"cannot parse term {term.strip()!r}")
            r = tuple(int(x) for x in _V_RE.match(factors[0]).group(1).split(","))
            if len(factors) > 2:
                raise ValueError(f"cannot parse term {term.strip()!r}")
            mono = parse_monomial(factors[1]) if len(factors) == 2 else Monomial()
            key = (r, mono)
            terms[key] = (terms.get(key, 0) + c) % p
    return KoszulElement(p, m, n, {k: c for k, c in terms.items() if c})


# -- slices -------------------------------------------------------------------

def slice_basis(p: int, m: int, n: int, tri) -> list[tuple]:
    """Ordered basis of (v^R, monomial) pairs in the given tridegree."""
    _check_params(m, n)
    s, t, w = tri
    if s < 0 or w < 0:
        return []
    return list(_slice_basis(p, m, n, s, t, w))


@lru_cache(maxsize=None)
def _slice_basis(p, m, n, s, t, w) -> tuple:
    out = []
    for r in v_monomials(s, m):
        for mono in enumerate_basis(p, n, w, t - v_degree(r, p)):
            out.append((r, mono))
    return tuple(out)


@lru_cache(maxsize=None)
def _slice_index(p, m, n, s, t, w) -> dict:
    return {key: i for i, key in enumerate(_slice_basis(p, m, n, s, t, w))}


@lru_cache(maxsize=None)
def differential_matrix(p: int, m: int, n: int, s: int, t: int, w: int) -> FpMatrix:
    """Matrix of d from slice (s, t, w) to slice (s+1, t, w), acting on columns."""
    src = _slice_basis(p, m, n, s, t, w) if s >= 0 else ()
    tgt_index = _slice_index(p, m, n, s + 1, t, w) if s + 1 >= 0 else {}
    mat = np.zeros((len(tgt_index), len(src)), dtype=np.int64)
    for col, (r, mono) in enumerate(src):
        for i in range(m + 1):
            images = q_action_monomial(i, mono, p, n)
            if not images:
                continue
            r2 = r[:i] + (r[i] + 1,) + r[i + 1:]
            for image, sign in images:
                row = tgt_index[(r2, image)]
                mat[row, col] = (mat[row, col] + sign) % p
    return FpMatrix(p, mat)


@lru_cache(maxsize=None)
def differential_rank(p, m, n, s, t, w) -> int:
    mat = differential_matrix(p, m, n, s, t, w)
    if mat.rows == 0 or mat.cols == 0:
        return 0
    return mat.rank()


@dataclass(frozen=True)
class Slice:
    p: int
    m: int
    n: int
    tridegree: Tridegree
    basis: tuple
    differential_out: FpMatrix
    differential_in: FpMatrix

    @property
    def dim(self) -> int:
        return len(self.basis)

    def blocks(self) -> list[list[int]]:
        """Coordinate blocks sharing a v-exponent, in order of increasing valuation."""
        out: list[list[int]] = []
        last = None
        for i, (r, _) in enumerate(self.basis):
            if r != last:
                out.append([])
                last = r
            out[-1].append(i)
        return out

    def to_vector(self, x: KoszulElement) -> np.ndarray:
        index = _slice_index(self.p, self.m, self.n, *self.tridegree)
        vec = np.zeros(self.dim, dtype=np.int64)
        for key, c in x.terms.items():
            if key not in index:
                raise ValueError(f"term {key} does not lie in slice {self.tridegree}")
            vec[index[key]] = c
        return vec

    def to_element(self, vec) -> KoszulElement:
        return KoszulElement(self.p, self.m, self.n,
                             {self.basis[i]: int(c) for i, c in enumerate(vec) if c % self.p})

    def boundaries(self) -> list[np.ndarray]:
        """A basis (RREF rows) of the image of the incoming differential."""
        d_in = self.differential_in
        if d_in.cols == 0 or d_in.rows == 0:
            return []
        rows = fp_linalg.span_basis(self.p, d_in.data.T, self.dim)
        return list(rows.data)

    def cycles(self) -> list[np.ndarray]:
        d_out = self.differential_out
        if d_out.rows == 0:
            return [np.eye(self.dim, dtype=np.int64)[i] for i in range(self.dim)]
        return fp_linalg.kernel_basis(d_out)


def get_slice(p: int, m: int, n: int, tri) -> Slice:
    _check_params(m, n)
    tri = Tridegree(*tri)
    return _get_slice(p, m, n, tri)


@lru_cache(maxsize=4096)
def _get_slice(p, m, n, tri):
    s, t, w = tri
    basis = _slice_basis(p, m, n, s, t, w) if s >= 0 and w >= 0 else ()
    d_out = differential_matrix(p, m, n, s, t, w) if basis else FpMatrix.zeros(p, 0, 0)
    if s >= 1 and basis:
        d_in = differential_matrix(p, m, n, s - 1, t, w)
    else:
        d_in = FpMatrix.zeros(p, len(basis), 0)
    return Slice(p, m, n, tri, basis, d_out, d_in)


def ext_dimension(p: int, m: int, n: int, tri) -> int:
    """dim ker(d_out) - rank(d_in); only ranks are computed."""
    _check_params(m, n)
    s, t, w = tri
    if s < 0 or w < 0:
        return 0
    dim = len(_slice_basis(p, m, n, s, t, w))
    if dim == 0:
        return 0
    rank_out = differential_rank(p, m, n, s, t, w)
    rank_in = differential_rank(p, m, n, s - 1, t, w) if s >= 1 else 0
    return dim - rank_out - rank_in


@dataclass(frozen=True)
class ExtClass:
    tridegree: Tridegree
    cycle: KoszulElement
    r_seq: tuple
    leading: Element

    def to_dict(self) -> dict:
        s, t, w = self.tridegree
        return {"s": s, "t": t, "w": w, "r_seq": list(self.r_seq),
                "leading": str(self.leading), "cycle": format_koszul(self.cycle)}


def _make_class(sl: Slice, vec) -> ExtClass:
    cycle = sl.to_element(vec)
    r_seq = cycle.valuation()
    return ExtClass(sl.tridegree, cycle, r_seq, cycle.coefficient(r_seq))


def ext_basis(p: int, m: int, n: int, tri) -> tuple[int, list[ExtClass]]:
    """Dimension of Ext in ``tri`` and representatives in normal form.

    Each representative is fully reduced against the boundaries, and the
    representatives have pairwise distinct leading coordinates, so each is
    the normal representation of its own class.
    """
    sl = get_slice(p, m, n, tri)
    if sl.dim == 0:
        return 0, []
    bounds = sl.boundaries()
    cyc = sl.cycles()
    if len(cyc) == len(bounds):
        return 0, []
    b_pivots = {int(np.flatnonzero(b)[0]) for b in bounds}
    stacked = FpMatrix(p, np.stack(bounds + cyc))
    reduced, pivots = fp_linalg.row_reduce(stacked)
    classes = [_make_class(sl, reduced.data[i]) for i, c in enumerate(pivots) if c not in b_pivots]
    assert len(classes) == len(cyc) - len(bounds)
    return len(classes), classes


def is_cycle(x: KoszulElement) -> bool:
    return not differential(x)


def is_boundary(x: KoszulElement) -> bool:
    tri = x.tridegree
    if tri is None:
        return True
    sl = get_slice(x.p, x.m, x.n, tri)
    vec = sl.to_vector(x)
    d_in = sl.differential_in
    if d_in.cols == 0:
        return not vec.any()
    return fp_linalg.solve_linear(d_in, vec) is not None


def normal_representation(c: ExtClass) -> ExtClass:
    """Representative of the class of ``c.cycle`` with lexicographically largest valuation."""
    x = c.cycle
    if not is_cycle(x):
        raise ValueError("representative is not a cycle")
    if is_boundary(x):
        raise ValueError("representative is a boundary; it has no normal representation")
    sl = get_slice(x.p, x.m, x.n, x.tridegree)
    vec = fp_linalg.valuation_maximize(sl.to_vector(x), sl.boundaries(), sl.blocks(), x.p)
    return _make_class(sl, vec)


def ext_class_of(x: KoszulElement) -> ExtClass:
    """Wrap a cycle as an ExtClass, keeping the given representative."""
    r_seq = x.valuation()
    return ExtClass(x.tridegree, x, r_seq, x.coefficient(r_seq))


def clear_caches():
    for fn in (_slice_basis, _slice_index, differential_matrix, differential_rank, _get_slice):
        fn.cache_clear()
