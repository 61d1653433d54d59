"""Command-line interface.

One verb per artifact: gen, validate, stats, decomp build/validate,
solve, kernelize, compress, eptas max/min, bench.  All documents are the
canonical JSON formats of the library; exit status is 0 on success, 1 on
validation failure or infeasibility, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction

from . import eptas, kernel, oracle
from .decomposition import (
    build_sphere_cut,
    decomposition_from_document,
    validate_decomposition,
)
from .dp import solve_dp
from .errors import BudgetExceeded, Error
from .generate import GenParams, gen_instance
from .plane import (
    Instance,
    decode_instance,
    encode_instance,
    format_weight,
    canonical_json,
    make_solution,
)


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}")


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, "r", encoding="utf-8") as f:
        return f.read()


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8") as f:
            f.write(text + "\n")
    else:
        print(text)


def _load_instance(path: str) -> Instance:
    return decode_instance(_read(path))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mwbs",
                                description="maximum weighted bimodal subgraph toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a seeded random instance")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--bias", type=_fraction, default=Fraction(1, 2),
                   help="orientation bias in [0,1]")
    g.add_argument("--wmin", type=_fraction, default=Fraction(1))
    g.add_argument("--wmax", type=_fraction, default=Fraction(9))
    g.add_argument("--density", choices=["triangulation", "sparse"],
                   default="triangulation")
    g.add_argument("--p", type=_fraction, default=Fraction(1, 2),
                   help="chord keep probability for sparse")
    g.add_argument("--out")

    v = sub.add_parser("validate", help="validate an instance document")
    v.add_argument("file")
    v.add_argument("--solution", help="solution document to check against the instance")

    s = sub.add_parser("stats", help="bad vertices, wedges and sections")
    s.add_argument("file")

    d = sub.add_parser("decomp", help="branch decompositions")
    dsub = d.add_subparsers(dest="decomp_command", required=True)
    db = dsub.add_parser("build")
    db.add_argument("file")
    db.add_argument("--strategy", choices=["greedy-sweep", "recursive-bisection"],
                    default="recursive-bisection")
    db.add_argument("--out")
    dv = dsub.add_parser("validate")
    dv.add_argument("file")
    dv.add_argument("decomposition")

    so = sub.add_parser("solve", help="solve an instance")
    so.add_argument("file")
    so.add_argument("--method", choices=["oracle", "dp", "subexp", "auto"],
                    default="auto")
    so.add_argument("--decomposition", help="imported decomposition for --method dp")
    so.add_argument("--out")

    k = sub.add_parser("kernelize", help="reduce to the simple normal form")
    k.add_argument("file")
    k.add_argument("--out")

    c = sub.add_parser("compress", help="compress to all-or-nothing cut classes")
    c.add_argument("file")
    c.add_argument("--no-shrink", action="store_true",
                   help="stop before the class-shrinking rules")
    c.add_argument("--out")

    e = sub.add_parser("eptas", help="approximation schemes")
    e.add_argument("variant", choices=["max", "min"])
    e.add_argument("file")
    e.add_argument("--epsilon", type=_fraction, required=True)
    e.add_argument("--out")

    b = sub.add_parser("bench", help="benchmark the solvers on a seeded suite")
    b.add_argument("--suite", choices=["small", "medium"], default="small")
    b.add_argument("--check-oracle", action="store_true")
    b.add_argument("--out")
    return p


def _cmd_gen(args) -> int:
    params = GenParams(n=args.n, seed=args.seed, orientation_bias=args.bias,
                       weight_lo=args.wmin, weight_hi=args.wmax,
                       density=args.density, sparse_p=args.p)
    _emit(encode_instance(gen_instance(params)), args.out)
    return 0


def _cmd_validate(args) -> int:
    try:
        instance = _load_instance(args.file)
    except Error as exc:
        print(json.dumps({"ok": False, "error": str(exc)}))
        return 1
    result = {"ok": True, "vertices": instance.graph.vertex_count,
              "edges": instance.graph.edge_count,
              "faces": len(instance.graph.faces),
              "bad_vertices": instance.graph.bad_vertices()}
    if args.solution:
        sol = json.loads(_read(args.solution))
        kept = set(sol["kept"])
        try:
            check = make_solution(instance, kept, sol.get("method", "unknown"))
        except Error as exc:
            print(json.dumps({"ok": False, "error": str(exc)}))
            return 1
        mismatches = []
        if format_weight(check.kept_weight) != sol["kept_weight"]:
            mismatches.append("kept_weight")
        if format_weight(check.deleted_weight) != sol["deleted_weight"]:
            mismatches.append("deleted_weight")
        if list(check.certificate) != list(sol.get("certificate", [])):
            mismatches.append("certificate")
        if mismatches:
            print(json.dumps({"ok": False, "error": "solution mismatch",
                              "fields": mismatches}))
            return 1
        result["solution_ok"] = True
    print(json.dumps(result))
    return 0


def _cmd_stats(args) -> int:
    instance = _load_instance(args.file)
    g = instance.graph
    bad = g.bad_vertices()
    sections = {}
    for v in bad:
        sections[str(v)] = [
            {"start": s.start, "length": s.length, "cyclic": s.cyclic}
            for s in g.good_edge_sections(v)
        ]
    doc = {
        "vertices": g.vertex_count,
        "edges": g.edge_count,
        "total_weight": format_weight(instance.total_weight),
        "b": len(bad),
        "bad_vertices": bad,
        "wedge_counts": [len(g.wedges(v)) for v in range(g.vertex_count)],
        "sections": sections,
    }
    print(canonical_json(doc))
    return 0


def _cmd_decomp(args) -> int:
    instance = _load_instance(args.file)
    if args.decomp_command == "build":
        dec = build_sphere_cut(instance.graph, args.strategy)
        doc = dec.document()
        doc["width"] = dec.declared_width
        _emit(canonical_json(doc), args.out)
        return 0
    dec = decomposition_from_document(json.loads(_read(args.decomposition)))
    report = validate_decomposition(instance.graph, dec)
    print(json.dumps({"ok": report.ok, "width": report.width,
                      "violations": report.violations}))
    return 0 if report.ok else 1


def _solution_for_method(instance: Instance, method: str, dec_doc=None):
    if method == "oracle":
        return oracle.brute_force_mwbs(instance)
    if method == "dp":
        from .plane import subgraph_by_edges
        components = [edges for _v, edges in instance.graph.components() if edges]
        if dec_doc is not None and len(components) > 1:
            raise Error("imported decompositions require a connected instance")
        kept = set()
        for comp_edges in components:
            sub, _v, eids = subgraph_by_edges(instance, comp_edges)
            if dec_doc is not None:
                dec = decomposition_from_document(dec_doc)
                sol = solve_dp(sub, dec)
            elif oracle.is_star(sub.graph) is not None or sub.graph.edge_count < 2:
                sol = oracle.star_solve(sub)
            else:
                dec = build_sphere_cut(sub.graph)
                sol = solve_dp(sub, dec)
            kept.update(eids[j] for j in sol.kept_edges)
        return make_solution(instance, kept, "dp")
    if method == "subexp":
        return kernel.solve_subexponential(instance)
    try:
        return oracle.brute_force_mwbs(instance)
    except BudgetExceeded:
        return kernel.solve_subexponential(instance)


def _cmd_solve(args) -> int:
    instance = _load_instance(args.file)
    dec_doc = json.loads(_read(args.decomposition)) if args.decomposition else None
    solution = _solution_for_method(instance, args.method, dec_doc)
    _emit(canonical_json(solution.document()), args.out)
    return 0


def _cmd_kernelize(args) -> int:
    instance = _load_instance(args.file)
    red = kernel.reduce_to_simple(instance)
    from .plane import instance_document
    doc = {
        "instance": instance_document(red.instance),
        "base_kept_weight": format_weight(red.base_kept_weight),
        "target_shift": format_weight(red.target_shift),
        "orig_edge_ids": list(red.orig_edge_ids),
        "banked_edges": list(red.banked_edges),
    }
    _emit(canonical_json(doc), args.out)
    return 0


def _cmd_compress(args) -> int:
    instance = _load_instance(args.file)
    cut = kernel.to_cut_instance(instance)
    if not args.no_shrink:
        cut = kernel.shrink_cut_instance(cut)
    _emit(canonical_json(cut.document()), args.out)
    return 0


def _cmd_eptas(args) -> int:
    instance = _load_instance(args.file)
    if args.variant == "max":
        solution, report = eptas.eptas_max(instance, args.epsilon)
        report["solution"] = solution.document()
    else:
        deleted, cost, report = eptas.eptas_min(instance, args.epsilon)
        kept = set(range(instance.graph.edge_count)) - deleted
        report["deleted"] = sorted(deleted)
        report["deleted_weight"] = format_weight(cost)
        report["solution"] = make_solution(instance, kept, "eptas-min").document()
    _emit(canonical_json(report), args.out)
    return 0


_SUITES = {
    "small": [(4, 11), (5, 12), (5, 13), (6, 14), (6, 15), (7, 16), (6, 17), (5, 18)],
    "medium": [(8, 21), (10, 22), (12, 23), (14, 24)],
}


def _cmd_bench(args) -> int:
    rows = ["instance,method,value,deleted,width,b,millis"]
    failures = 0
    for n, seed in _SUITES[args.suite]:
        instance = gen_instance(GenParams(n=n, seed=seed, density="sparse"))
        name = f"gen-n{n}-s{seed}"
        b = len(instance.graph.bad_vertices())
        results = {}
        methods = ["dp", "subexp"]
        if instance.graph.edge_count <= 16:
            methods.insert(0, "oracle")
        for method in methods:
            t0 = time.perf_counter()
            sol = _solution_for_method(instance, method)
            millis = int(1000 * (time.perf_counter() - t0))
            width = ""
            if method == "dp":
                try:
                    width = build_sphere_cut(instance.graph).declared_width
                except Error:
                    width = ""
            results[method] = sol
            rows.append(f"{name},{method},{sol.kept_weight},{sol.deleted_weight},"
                        f"{width},{b},{millis}")
        if args.check_oracle:
            want = results["oracle" if "oracle" in results else "dp"].kept_weight
            for method, sol in results.items():
                if sol.kept_weight != want:
                    failures += 1
    _emit("\n".join(rows), args.out)
    return 1 if failures else 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "gen": _cmd_gen,
        "validate": _cmd_validate,
        "stats": _cmd_stats,
        "decomp": _cmd_decomp,
        "solve": _cmd_solve,
        "kernelize": _cmd_kernelize,
        "compress": _cmd_compress,
        "eptas": _cmd_eptas,
        "bench": _cmd_bench,
    }
    try:
        return handlers[args.command](args)
    except Error as exc:
        print(json.dumps({"ok": False, "error": str(exc)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
