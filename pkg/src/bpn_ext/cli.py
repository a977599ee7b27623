"""Command-line interface: ``bpn-ext <command> ...``.

Exit codes: 0 success / audit pass, 2 audit violations, 1 usage or input error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from typing import Optional

from . import chainmap, charts, ext_analysis, koszul, milnor
from .cache import SliceCache, resolve_cache_dir

EXT_SCHEMA = "ext-report/1"
log = logging.getLogger("bpn_ext")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> tuple:
    text = text.strip().strip("()[]")
    if not text:
        return ()
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


# -- Ext tables --------------------------------------------------------------------

def _tridegrees_at(p, m, n, w, s_values, t_fixed):
    degs = milnor.degrees_at_weight(p, n, w)
    out = set()
    for s in s_values:
        for r in koszul.v_monomials(s, m):
            vd = koszul.v_degree(r, p)
            for d in degs:
                if t_fixed is None or vd + d == t_fixed:
                    out.add((s, vd + d))
    return sorted(out, key=lambda st: (-st[1], st[0]))


def _dims_for_weight(task):
    p, m, n, w, s_values, t_fixed, cache_dir = task
    cache = SliceCache(cache_dir) if cache_dir else None
    rows = []
    for s, t in _tridegrees_at(p, m, n, w, s_values, t_fixed):
        key = {"p": p, "m": m, "n": n, "s": s, "t": t, "w": w}
        if cache is None:
            dim = koszul.ext_dimension(p, m, n, (s, t, w))
        else:
            dim = cache.ensure(key, lambda: koszul.ext_dimension(p, m, n, (s, t, w)))
        if dim:
            rows.append({"s": s, "t": t, "w": w, "dim": dim})
    return rows


def ext_table(p, m, n, w_values, s_values, t_fixed=None, cache_dir=None, jobs=1) -> dict:
    """Nonzero Ext dimensions over the range, as an ext-report/1 document."""
    if not 0 <= m <= n:
        raise UsageError(f"need 0 <= m <= n, got m={m}, n={n}")
    tasks = [(p, m, n, w, tuple(s_values), t_fixed, cache_dir) for w in w_values]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_dims_for_weight, tasks))
    else:
        parts = [_dims_for_weight(task) for task in tasks]
    entries = [row for part in parts for row in part]
    return {"schema": EXT_SCHEMA, "p": p, "m": m, "n": n, "entries": entries}


def table_to_csv(table: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["s", "t", "w", "t-s", "dim"])
    for e in table["entries"]:
        writer.writerow([e["s"], e["t"], e["w"], e["t"] - e["s"], e["dim"]])
    return buf.getvalue()


def _ranges(args):
    if args.w is not None:
        w_values = [args.w]
    elif args.wmax is not None:
        w_values = ext_analysis.weights(args.wmax)
    else:
        raise UsageError("give --w or --wmax")
    if args.s is not None:
        s_values = [args.s]
    else:
        s_values = list(range(0, (args.smax if args.smax is not None else 6) + 1))
    return w_values, s_values


def _cache_dir(args) -> Optional[str]:
    if args.no_cache:
        return None
    return str(resolve_cache_dir(args.cache_dir))


# -- commands --------------------------------------------------------------------

def cmd_basis(args, out):
    basis = milnor.enumerate_basis(args.p, args.n, args.w, args.t)
    if args.format == "json":
        out.write(json.dumps({"p": args.p, "n": args.n, "w": args.w, "t": args.t,
                              "basis": [milnor.format_monomial(b) for b in basis]}) + "\n")
    else:
        for b in basis:
            out.write(milnor.format_monomial(b) + "\n")
    return 0


def cmd_ext(args, out):
    w_values, s_values = _ranges(args)
    table = ext_table(args.p, args.m, args.n, w_values, s_values, args.t, _cache_dir(args), args.jobs)
    if args.format == "csv":
        out.write(table_to_csv(table))
    else:
        out.write(json.dumps(table, indent=2) + "\n")
    return 0


def cmd_chart(args, out):
    w_values, s_values = _ranges(args)
    table = ext_table(args.p, args.m, args.n, w_values, s_values, None, _cache_dir(args), args.jobs)
    line_x = ext_analysis.odd_line(args.p, args.n)
    epsilon = Fraction(args.epsilon) if args.epsilon is not None else None
    render = charts.render_svg if args.format == "svg" else charts.render_ascii
    out.write(render(table["entries"], line_x=line_x, epsilon=epsilon,
                     xmin=args.xmin, xmax=args.xmax, smax=args.smax))
    return 0


def cmd_audit(args, out):
    if args.wmax is None:
        raise UsageError("audit needs --wmax")
    report = ext_analysis.run_audit(args.kind, args.p, args.m, args.n, args.wmax,
                                    args.smax, args.jobs)
    out.write((report.to_json() if args.format == "json" else report.to_table()) + "\n")
    return 0 if report.verdict else 2


def cmd_phi(args, out):
    phi = chainmap.build_phi(args.p, args.m, args.n, args.I)
    if args.N is not None:
        phi = phi.pad(args.N)
    if args.format == "json":
        out.write(json.dumps({"p": phi.p, "m": phi.m, "n": phi.n, "I": list(phi.I), "N": phi.N,
                              "cycle": koszul.format_koszul(phi.cycle)}) + "\n")
    elif args.header:
        out.write(phi.serialize())
    else:
        out.write(koszul.format_koszul(phi.cycle) + "\n")
    return 0


def format_poly(poly: dict) -> str:
    if not poly:
        return "0"
    parts = []
    for e in sorted(poly, reverse=True):
        c = poly[e]
        mono = "*".join(f"v{i}^{a}" if a > 1 else f"v{i}" for i, a in enumerate(e) if a) or "1"
        parts.append(mono if c == 1 else f"{c}*{mono}")
    return " + ".join(parts)


def cmd_action(args, out):
    phi = chainmap.build_phi(args.p, args.m, args.n, args.I)
    image = chainmap.phi_action(phi, args.x)
    if args.format == "json":
        out.write(json.dumps({"N": phi.N, "x": list(args.x),
                              "image": [{"v": list(e), "c": c} for e, c in sorted(image.items())]}) + "\n")
    else:
        out.write(format_poly(image) + "\n")
    return 0


def cmd_surjectivity(args, out):
    rep = chainmap.surjectivity_matrix(args.p, args.m, args.n, args.D, args.k)
    if args.format == "json":
        out.write(json.dumps({"p": rep.p, "m": rep.m, "n": rep.n, "D": rep.D, "k": rep.k,
                              "verdict": "pass" if rep.verdict else "fail",
                              "index": [[list(I), list(J)] for I, J in rep.index],
                              "matrix": [[chainmap.format_v0_entry(e) for e in row] for row in rep.entries]},
                             indent=2) + "\n")
    else:
        out.write(rep.to_csv())
    return 0 if rep.verdict else 2


def cmd_witness(args, out):
    mono = milnor.parse_monomial(args.monomial)
    found = ext_analysis.find_witness(args.p, args.m, args.n, (args.s, args.t, args.w), args.r, mono)
    out.write(json.dumps({"found": found is not None, "witness": found}, indent=2) + "\n")
    return 0 if found else 2


# -- parser -----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bpn-ext", description="Ext over E(m) with coefficients in A//E(n).")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, m=True):
        sp.add_argument("--p", type=int, required=True)
        if m:
            sp.add_argument("--m", type=int, required=True)
        sp.add_argument("--n", type=int, required=True)

    def ranges(sp):
        sp.add_argument("--w", type=int)
        sp.add_argument("--wmax", type=int)
        sp.add_argument("--s", type=int)
        sp.add_argument("--smax", type=int)
        sp.add_argument("--cache-dir")
        sp.add_argument("--no-cache", action="store_true")
        sp.add_argument("--jobs", type=int, default=1)

    sp = sub.add_parser("basis", help="list A//E(n) monomials of a weight")
    common(sp, m=False)
    sp.add_argument("--w", type=int, required=True)
    sp.add_argument("--t", type=int)
    sp.add_argument("--format", choices=["text", "json"], default="text")
    sp.set_defaults(func=cmd_basis)

    sp = sub.add_parser("ext", help="table of Ext dimensions")
    common(sp)
    ranges(sp)
    sp.add_argument("--t", type=int)
    sp.add_argument("--format", choices=["json", "csv"], default="json")
    sp.set_defaults(func=cmd_ext)

    sp = sub.add_parser("chart", help="Adams chart of the Ext table")
    common(sp)
    ranges(sp)
    sp.add_argument("--epsilon", help="slope parameter of the overlay line (rational)")
    sp.add_argument("--xmin", type=int)
    sp.add_argument("--xmax", type=int)
    sp.add_argument("--format", choices=["ascii", "svg"], default="ascii")
    sp.set_defaults(func=cmd_chart)

    sp = sub.add_parser("audit", help="finite-range audit")
    sp.add_argument("kind", choices=ext_analysis.KINDS)
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--m", type=int, default=0)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--wmax", type=int)
    sp.add_argument("--smax", type=int)
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--format", choices=["table", "json"], default="table")
    sp.set_defaults(func=cmd_audit)

    sp = sub.add_parser("phi", help="build the cycle phi^I")
    common(sp)
    sp.add_argument("--I", type=_int_list, required=True)
    sp.add_argument("--N", type=int, help="pad to this v_0 power")
    sp.add_argument("--header", action="store_true")
    sp.add_argument("--format", choices=["text", "json"], default="text")
    sp.set_defaults(func=cmd_phi)

    sp = sub.add_parser("action", help="evaluate (phi^I)_* on a v-monomial")
    common(sp)
    sp.add_argument("--I", type=_int_list, required=True)
    sp.add_argument("--x", type=_int_list, required=True, help="exponents r0,...,rn")
    sp.add_argument("--format", choices=["text", "json"], default="text")
    sp.set_defaults(func=cmd_action)

    sp = sub.add_parser("surjectivity", help="triangular matrix of (v^J phi^I)_*")
    common(sp)
    sp.add_argument("--D", type=int, default=0)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--format", choices=["csv", "json"], default="csv")
    sp.set_defaults(func=cmd_surjectivity)

    sp = sub.add_parser("witness", help="find a class with given normal data and leading monomial")
    common(sp)
    sp.add_argument("--s", type=int, required=True)
    sp.add_argument("--t", type=int, required=True)
    sp.add_argument("--w", type=int, required=True)
    sp.add_argument("--r", type=_int_list, required=True)
    sp.add_argument("--monomial", required=True)
    sp.set_defaults(func=cmd_witness)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args, out)
    except (UsageError, ValueError) as exc:
        print(f"bpn-ext: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
