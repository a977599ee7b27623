"""Milnor monomials P^I Q^E and the quotient module A//E(n).

A monomial is stored as a pair of tuples: the 1-indexed exponent sequence I
(trailing zeros stripped) and the strictly increasing list of Q indices.
Degrees use the homological convention, so every degree is <= 0.
"""
from __future__ import annotations

import re
from functools import lru_cache
from typing import Iterable, NamedTuple, Optional

from .fp_linalg import is_prime


def _strip(seq: Iterable[int]) -> tuple:
    seq = list(seq)
    while seq and seq[-1] == 0:
        seq.pop()
    return tuple(seq)


class Monomial(NamedTuple):
    P: tuple = ()
    Q: tuple = ()

    @classmethod
    def make(cls, P: Iterable[int] = (), Q: Iterable[int] = ()) -> "Monomial":
        P = _strip(P)
        if any(i < 0 for i in P):
            raise ValueError(f"negative exponent in {P}")
        Qs = tuple(Q)
        if any(j < 0 for j in Qs) or any(a >= b for a, b in zip(Qs, Qs[1:])):
            raise ValueError(f"Q indices must be strictly increasing and nonnegative: {Qs}")
        return cls(P, Qs)

    def __str__(self):
        return format_monomial(self)


UNIT = Monomial((), ())


def algebraic_degree(m: Monomial, p: int) -> int:
    deg = 0
    for j, i in enumerate(m.P, start=1):
        deg -= (2 * p**j - 2) * i
    for j in m.Q:
        deg -= 2 * p**j - 1
    return deg


def weight(m: Monomial, p: int) -> int:
    w = 0
    for j, i in enumerate(m.P, start=1):
        w += 2 * p**j * i
    for j in m.Q:
        w += 2 * p**j
    return w


def mixed_weight(m: Monomial, p: int, ell: int) -> int:
    """The ell-mixed weight; the Q part contributes nothing."""
    if ell < 1:
        raise ValueError("ell must be >= 1")
    total = 0
    for j, i in enumerate(m.P, start=1):
        total += 2 * p**min(j, ell) * i
    return total


def p_part_weight(m: Monomial, p: int) -> int:
    return sum(2 * p**j * i for j, i in enumerate(m.P, start=1))


def in_quotient(m: Monomial, n: int) -> bool:
    """Whether ``m`` is a basis monomial of A//E(n)."""
    return all(j > n for j in m.Q)


def insert_q(q: tuple, j: int) -> Optional[tuple[tuple, int]]:
    """Right-multiply Q^E by Q_j written on the left: Q_j Q^E = sign * Q^{E+j}.

    Returns None when j already occurs (Q_j^2 = 0).
    """
    pos = 0
    for e in q:
        if e == j:
            return None
        if e > j:
            break
        pos += 1
    return q[:pos] + (j,) + q[pos:], (-1) ** pos


def q_multiply(k: int, m: Monomial, p: int) -> list[tuple[Monomial, int]]:
    """Q_k * P^I Q^E in the full Steenrod algebra, as (monomial, sign) pairs.

    Q_k P^I = P^I Q_k + sum_{j>=1} P^{I - p^k e_j} Q_{k+j}; the Q produced
    is then moved into sorted position inside E.
    """
    out = []
    merged = insert_q(m.Q, k)
    if merged is not None:
        out.append((Monomial(m.P, merged[0]), merged[1]))
    step = p**k
    for j, i in enumerate(m.P, start=1):
        if i < step:
            continue
        new_p = list(m.P)
        new_p[j - 1] -= step
        merged = insert_q(m.Q, k + j)
        if merged is None:
            continue
        out.append((Monomial(_strip(new_p), merged[0]), merged[1]))
    return out


def q_action_monomial(k: int, m: Monomial, p: int, n: int) -> list[tuple[Monomial, int]]:
    """Q_k * m inside A//E(n): the full product with every Q_{<=n} term dropped."""
    if not 0 <= k <= n:
        raise ValueError(f"Q_{k} does not act through E({n})")
    return [(mono, sign) for mono, sign in q_multiply(k, m, p) if in_quotient(mono, n)]


class Element:
    """An F_p-linear combination of A//E(n) basis monomials."""

    __slots__ = ("p", "n", "terms")

    def __init__(self, p: int, n: int, terms=None):
        self.p = p
        self.n = n
        self.terms: dict[Monomial, int] = {}
        if terms:
            items = terms.items() if isinstance(terms, dict) else terms
            for mono, c in items:
                if not in_quotient(mono, n):
                    raise ValueError(f"{format_monomial(mono)} is not a basis element of A//E({n})")
                self._add(mono, c)

    def _add(self, mono, c):
        c = (self.terms.get(mono, 0) + c) % self.p
        if c:
            self.terms[mono] = c
        else:
            self.terms.pop(mono, None)

    @classmethod
    def monomial(cls, p, n, mono: Monomial, coeff: int = 1):
        return cls(p, n, {mono: coeff})

    def __add__(self, other: "Element") -> "Element":
        self._check(other)
        out = Element(self.p, self.n)
        out.terms = dict(self.terms)
        for mono, c in other.terms.items():
            out._add(mono, c)
        return out

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c: int) -> "Element":
        out = Element(self.p, self.n)
        for mono, a in self.terms.items():
            out._add(mono, a * c)
        return out

    def _check(self, other):
        if (self.p, self.n) != (other.p, other.n):
            raise ValueError("elements live in different modules")

    def __eq__(self, other):
        if not isinstance(other, Element):
            return NotImplemented
        return (self.p, self.n, self.terms) == (other.p, other.n, other.terms)

    def __bool__(self):
        return bool(self.terms)

    def __repr__(self):
        return f"Element(p={self.p}, n={self.n}, {format_element(self)})"

    def __str__(self):
        return format_element(self)


def q_left_action(k: int, x: Element) -> Element:
    """Q_k . x for 0 <= k <= n."""
    out = Element(x.p, x.n)
    for mono, c in x.terms.items():
        for image, sign in q_action_monomial(k, mono, x.p, x.n):
            out._add(image, sign * c)
    return out


# -- enumeration ------------------------------------------------------------

def basis_sort_key(m: Monomial):
    return (sum(m.P), m.P, len(m.Q), m.Q)


@lru_cache(maxsize=None)
def _basis_by_degree(p: int, n: int, w: int) -> dict:
    if w < 0 or w % 2:
        return {}
    found: list[Monomial] = []
    top = 1
    while 2 * p ** (top + 1) <= w:
        top += 1

    # Q indices first (each at most once, index > n), then P exponents.
    def place_q(j, remaining, qs):
        if j > top:
            place_p(top, remaining, [0] * top, tuple(sorted(qs)))
            return
        place_q(j + 1, remaining, qs)
        c = 2 * p**j
        if j > n and c <= remaining:
            place_q(j + 1, remaining - c, qs + [j])

    def place_p(j, remaining, exps, qs):
        if j == 0:
            if remaining == 0:
                found.append(Monomial(_strip(exps), qs))
            return
        c = 2 * p**j
        for i in range(remaining // c + 1):
            exps[j - 1] = i
            place_p(j - 1, remaining - i * c, exps, qs)
        exps[j - 1] = 0

    place_q(0, w, [])
    grouped: dict[int, list] = {}
    for mono in found:
        grouped.setdefault(algebraic_degree(mono, p), []).append(mono)
    return {deg: tuple(sorted(ms, key=basis_sort_key)) for deg, ms in grouped.items()}


def enumerate_basis(p: int, n: int, w: int, t: Optional[int] = None) -> list[Monomial]:
    """All A//E(n) basis monomials of weight ``w`` (and degree ``t`` if given)."""
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    groups = _basis_by_degree(p, n, w)
    if t is not None:
        return list(groups.get(t, ()))
    return sorted((m for ms in groups.values() for m in ms), key=basis_sort_key)


def degrees_at_weight(p: int, n: int, w: int) -> list[int]:
    return sorted(_basis_by_degree(p, n, w), reverse=True)


# -- text form ----------------------------------------------------------------

def format_monomial(m: Monomial) -> str:
    if not m.P and not m.Q:
        return "1"
    out = ""
    if m.P:
        out += "P[" + ",".join(map(str, m.P)) + "]"
    if m.Q:
        out += "Q{" + ",".join(map(str, m.Q)) + "}"
    return out


_MONO_RE = re.compile(r"^(?:P\[(?P<P>[0-9, ]*)\])?(?:Q\{(?P<Q>[0-9, ]*)\})?$")


def parse_monomial(text: str) -> Monomial:
    text = text.strip()
    if text == "1":
        return UNIT
    match = _MONO_RE.match(text)
    if not text or not match:
        raise ValueError(f"cannot parse monomial {text!r}")

    def ints(group):
        if group is None or not group.strip():
            return ()
        return tuple(int(x) for x in group.split(","))

    return Monomial.make(ints(match.group("P")), ints(match.group("Q")))


def format_element(x: Element) -> str:
    if not x.terms:
        return "0"
    parts = []
    for mono in sorted(x.terms, key=basis_sort_key):
        c = x.terms[mono]
        parts.append(format_monomial(mono) if c == 1 else f"{c}*{format_monomial(mono)}")
    return " + ".join(parts)


def parse_element(text: str, p: int, n: int) -> Element:
    out = Element(p, n)
    text = text.strip()
    if text == "0":
        return out
    for term in text.split("+"):
        term = term.strip()
        coeff, _, rest = term.rpartition("*")
        c = int(coeff) if coeff else 1
        mono = parse_monomial(rest)
        if not in_quotient(mono, n):
            raise ValueError(f"{rest} is not a basis element of A//E({n})")
        out._add(mono, c)
    return out
