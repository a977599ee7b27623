"""Finite-range audits of the exactness, degree, inequality and vanishing statements.

Every audit walks weights in ascending order (algebraic degree descending
inside a weight) and produces an AuditReport.  Reports for disjoint weight
ranges merge associatively, so a weight range can be split across worker
processes and recombined in any order.
"""
from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from . import koszul
from .fp_linalg import FpMatrix
from .koszul import Tridegree, compositions, ext_basis, ext_dimension, v_degree, v_monomials
from .milnor import (
    algebraic_degree,
    degrees_at_weight,
    enumerate_basis,
    format_monomial,
    mixed_weight,
    q_action_monomial,
)

KINDS = ("exactness", "mainineq", "vanishing", "degrees")


@dataclass
class AuditReport:
    kind: str
    params: dict
    violations: list = field(default_factory=list)
    epsilon_max: Optional[Fraction] = None
    epsilon_witness: Optional[dict] = None
    inventory: list = field(default_factory=list)   # odd classes: (s, t, w, dim)
    checked: int = 0
    notes: list = field(default_factory=list)

    @property
    def verdict(self) -> bool:
        return not self.violations

    def merge(self, other: "AuditReport") -> "AuditReport":
        if (self.kind, self.params) != (other.kind, other.params):
            raise ValueError("cannot merge reports of different audits")
        eps, wit = self.epsilon_max, self.epsilon_witness
        if other.epsilon_max is not None and (eps is None or _eps_key(other) < _eps_key(self)):
            eps, wit = other.epsilon_max, other.epsilon_witness
        return AuditReport(
            self.kind,
            self.params,
            sorted(self.violations + other.violations, key=_violation_key),
            eps,
            wit,
            sorted(self.inventory + other.inventory, key=_inventory_key),
            self.checked + other.checked,
            sorted(set(self.notes) | set(other.notes)),
        )

    def to_dict(self) -> dict:
        return {
            "schema": "audit-report/1",
            "kind": self.kind,
            "params": self.params,
            "verdict": "pass" if self.verdict else "fail",
            "checked": self.checked,
            "violations": self.violations,
            "epsilon_max": None if self.epsilon_max is None else str(self.epsilon_max),
            "epsilon_witness": self.epsilon_witness,
            "inventory": [{"s": s, "t": t, "w": w, "dim": d} for s, t, w, d in self.inventory],
            "notes": self.notes,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_table(self) -> str:
        lines = [f"audit {self.kind}  " + " ".join(f"{k}={v}" for k, v in self.params.items()),
                 f"verdict: {'PASS' if self.verdict else 'FAIL'}  (checked {self.checked})"]
        if self.epsilon_max is not None:
            w = self.epsilon_witness
            lines.append(f"epsilon_max: {self.epsilon_max} (= {float(self.epsilon_max):.6g})"
                         f"  witness s={w['s']} t={w['t']} w={w['w']}")
        if self.inventory:
            lines.append(f"{'s':>4} {'t':>7} {'t-s':>7} {'w':>6} {'dim':>4}")
            for s, t, w, d in self.inventory:
                lines.append(f"{s:>4} {t:>7} {t - s:>7} {w:>6} {d:>4}")
        for v in self.violations:
            lines.append("VIOLATION " + json.dumps(v, sort_keys=True))
        for note in self.notes:
            lines.append("note: " + note)
        return "\n".join(lines)


def _eps_key(report):
    w = report.epsilon_witness
    return (report.epsilon_max, w["w"], -w["t"], w["s"])


def _violation_key(v):
    return (v.get("w", 0), -v.get("t", 0), v.get("s", 0), json.dumps(v, sort_keys=True))


def _inventory_key(e):
    s, t, w, _ = e
    return (w, -t, s)


def odd_line(p: int, n: int) -> int:
    """The x-intercept 1 - 2p^{n+1} of the vanishing line."""
    return 1 - 2 * p ** (n + 1)


def main_inequality_bound(p: int, n: int, w: int) -> Fraction:
    return Fraction(w - 2 * p ** (n + 1), 2 * p**n * (p - 1))


def default_s_max(p: int, m: int, n: int, w_max: int) -> int:
    """Adams-degree cutoff for audits: the largest s an odd class could have
    under the main inequality, plus a margin of 3."""
    if w_max < 2 * p ** (n + 1):
        return 3
    per = main_inequality_bound(p, n, w_max)
    return m * int(per) + 3


def weights(w_max: int) -> list[int]:
    return list(range(0, w_max + 1, 2))


# -- closed form ------------------------------------------------------------------

def baseline_ext_fp(p: int, m: int, s: int, t: int) -> int:
    """dim Ext^{s,t}_{E(m)}(F_p, F_p): v-monomials with s factors and degree t."""
    if s < 0:
        return 0
    return sum(1 for r in compositions(s, m + 1) if v_degree(r, p) == t)


# -- Q_k matrices on A//E(n) ------------------------------------------------------

def q_matrix(p: int, n: int, k: int, w: int, t: int) -> FpMatrix:
    """Q_k from the (w, t) piece of A//E(n) to the (w, t - (2p^k - 1)) piece."""
    src = enumerate_basis(p, n, w, t)
    tgt = {mono: i for i, mono in enumerate(enumerate_basis(p, n, w, t - (2 * p**k - 1)))}
    mat = np.zeros((len(tgt), len(src)), dtype=np.int64)
    for j, mono in enumerate(src):
        for image, sign in q_action_monomial(k, mono, p, n):
            mat[tgt[image], j] = (mat[tgt[image], j] + sign) % p
    return FpMatrix(p, mat)


def _rank(mat: FpMatrix) -> int:
    return 0 if mat.rows == 0 or mat.cols == 0 else mat.rank()


def _odd_tridegrees(p, m, n, w, s_max):
    """(s, t) with t - s odd and a nonempty slice at weight w, t descending."""
    out = set()
    degs = degrees_at_weight(p, n, w)
    for s in range(s_max + 1):
        for r in v_monomials(s, m):
            vd = v_degree(r, p)
            for d in degs:
                if (vd + d - s) % 2:
                    out.add((s, vd + d))
    return sorted(out, key=lambda st: (-st[1], st[0]))


# -- audits per weight (module level so worker processes can run them) --------------

def _exactness_at(p, n, w):
    rep = AuditReport("exactness", {})
    for t in degrees_at_weight(p, n, w):
        if t % 2 == 0:
            continue
        dim = len(enumerate_basis(p, n, w, t))
        for k in range(n + 1):
            kernel = dim - _rank(q_matrix(p, n, k, w, t))
            image = _rank(q_matrix(p, n, k, w, t + 2 * p**k - 1))
            rep.checked += 1
            if kernel != image:
                rep.violations.append({"w": w, "t": t, "k": k, "kernel": kernel, "image": image})
    return rep


def _degrees_at(p, n, w):
    rep = AuditReport("degrees", {})
    floor = 2 * p ** (n + 1)
    for mono in enumerate_basis(p, n, w):
        deg = algebraic_degree(mono, p)
        if deg % 2 == 0:
            continue
        rep.checked += 1
        upper = Fraction(-(p - 1) * w, p) + 1 - 2 * p**n
        if not (-w + 1 <= deg <= upper):
            rep.violations.append({"w": w, "t": deg, "monomial": format_monomial(mono),
                                   "reason": "degree outside [-w+1, -(p-1)w/p + 1 - 2p^n]"})
        for ell in range(1, len(mono.P) + 2):
            if mixed_weight(mono, p, ell) > w - floor:
                rep.violations.append({"w": w, "t": deg, "monomial": format_monomial(mono),
                                       "ell": ell, "reason": "mixed weight exceeds w - 2p^(n+1)"})
    return rep


def _mainineq_at(p, m, n, w, s_max):
    rep = AuditReport("mainineq", {})
    bound = main_inequality_bound(p, n, w)
    for s, t in _odd_tridegrees(p, m, n, w, s_max):
        if ext_dimension(p, m, n, (s, t, w)) == 0:
            continue
        _, classes = ext_basis(p, m, n, (s, t, w))
        for c in classes:
            rep.checked += 1
            r = c.r_seq
            bad = r[m] != 0 or any(Fraction(ri) > bound for ri in r[:m])
            if bad:
                rep.violations.append({"s": s, "t": t, "w": w, "r_seq": list(r),
                                       "bound": str(bound), "witness": koszul.format_koszul(c.cycle)})
    return rep


def _vanishing_at(p, m, n, w, s_max):
    rep = AuditReport("vanishing", {})
    line = odd_line(p, n)
    for s, t in _odd_tridegrees(p, m, n, w, s_max):
        rep.checked += 1
        dim = ext_dimension(p, m, n, (s, t, w))
        if dim == 0:
            continue
        rep.inventory.append((s, t, w, dim))
        if t - s > line:
            _, classes = ext_basis(p, m, n, (s, t, w))
            rep.violations.append({"s": s, "t": t, "w": w, "dim": dim,
                                   "witness": koszul.format_koszul(classes[0].cycle)})
        if s > 0:
            eps = Fraction(line - (t - s), s)
            cand = AuditReport("vanishing", {}, epsilon_max=eps,
                               epsilon_witness={"s": s, "t": t, "w": w})
            if rep.epsilon_max is None or _eps_key(cand) < _eps_key(rep):
                rep.epsilon_max, rep.epsilon_witness = eps, cand.epsilon_witness
    return rep


def _run_weight(task):
    kind, args, w = task
    if kind == "exactness":
        return _exactness_at(*args, w)
    if kind == "degrees":
        return _degrees_at(*args, w)
    p, m, n, s_max = args
    if kind == "mainineq":
        return _mainineq_at(p, m, n, w, s_max)
    return _vanishing_at(p, m, n, w, s_max)


def _run(kind, params, args, w_max, jobs):
    tasks = [(kind, args, w) for w in weights(w_max)]
    if jobs and jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_run_weight, tasks))
    else:
        parts = [_run_weight(task) for task in tasks]
    report = AuditReport(kind, params)
    for part in parts:
        part.params = params
        report = report.merge(part)
    return report


def _vacuous_note(report, p, n, w_max):
    if w_max < 2 * p ** (n + 1):
        report.notes.append(f"w_max < 2p^(n+1) = {2 * p ** (n + 1)}: no odd classes possible")
    return report


def audit_exactness(p: int, n: int, w_max: int, jobs: int = 1) -> AuditReport:
    """ker Q_k = im Q_k on every odd (w, t) piece of A//E(n) with w <= w_max."""
    params = {"p": p, "n": n, "w_max": w_max}
    return _vacuous_note(_run("exactness", params, (p, n), w_max, jobs), p, n, w_max)


def audit_degree_bounds(p: int, n: int, w_max: int, jobs: int = 1) -> AuditReport:
    params = {"p": p, "n": n, "w_max": w_max}
    return _vacuous_note(_run("degrees", params, (p, n), w_max, jobs), p, n, w_max)


def audit_main_inequality(p: int, m: int, n: int, w_max: int, s_max: Optional[int] = None,
                          jobs: int = 1) -> AuditReport:
    """r_m = 0 and r_i <= (w - 2p^{n+1}) / (2p^n(p-1)) for every normal representative."""
    if not 0 <= m <= n:
        raise ValueError(f"need 0 <= m <= n, got m={m}, n={n}")
    if s_max is None:
        s_max = default_s_max(p, m, n, w_max)
    params = {"p": p, "m": m, "n": n, "w_max": w_max, "s_max": s_max}
    return _vacuous_note(_run("mainineq", params, (p, m, n, s_max), w_max, jobs), p, n, w_max)


def audit_vanishing(p: int, m: int, n: int, w_max: int, s_max: Optional[int] = None,
                    jobs: int = 1) -> AuditReport:
    """No odd class right of t - s = 1 - 2p^{n+1}; also the empirical slope epsilon_max."""
    if not 0 <= m <= n:
        raise ValueError(f"need 0 <= m <= n, got m={m}, n={n}")
    if s_max is None:
        s_max = default_s_max(p, m, n, w_max)
    params = {"p": p, "m": m, "n": n, "w_max": w_max, "s_max": s_max}
    return _vacuous_note(_run("vanishing", params, (p, m, n, s_max), w_max, jobs), p, n, w_max)


def run_audit(kind: str, p: int, m: int, n: int, w_max: int, s_max: Optional[int] = None,
              jobs: int = 1) -> AuditReport:
    if kind == "exactness":
        return audit_exactness(p, n, w_max, jobs)
    if kind == "degrees":
        return audit_degree_bounds(p, n, w_max, jobs)
    if kind == "mainineq":
        return audit_main_inequality(p, m, n, w_max, s_max, jobs)
    if kind == "vanishing":
        return audit_vanishing(p, m, n, w_max, s_max, jobs)
    raise ValueError(f"unknown audit kind {kind!r}; expected one of {KINDS}")


# -- named witness ---------------------------------------------------------------

def find_witness(p: int, m: int, n: int, tri, r_seq, monomial) -> Optional[dict]:
    """A class whose normal representation has valuation ``r_seq`` and whose
    leading coefficient contains ``monomial``; None if there is none."""
    tri = Tridegree(*tri)
    r_seq = tuple(r_seq)
    _, classes = ext_basis(p, m, n, tri)
    for c in classes:
        if c.r_seq == r_seq and monomial in c.leading.terms:
            rep = koszul.normal_representation(c)
            return {
                "tridegree": list(tri),
                "r_seq": list(rep.r_seq),
                "leading": str(rep.leading),
                "cycle": koszul.format_koszul(rep.cycle),
                "is_cycle": koszul.is_cycle(rep.cycle),
                "is_boundary": koszul.is_boundary(rep.cycle),
                "n_terms": len(rep.cycle.terms),
            }
    return None
