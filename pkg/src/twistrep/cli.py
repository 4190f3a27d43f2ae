"""Command-line front end: file-based verification, decomposition, models, extensions.

Exit codes: 0 all requested checks pass, 1 a mathematical check fails,
2 input/schema error.
"""

import argparse
import json
import sys

import numpy as np

from . import extension, factory, model, specio, wold
from .representation import CheckReport
from .tensorspace import check_hexagon

PASS, MATH_FAIL, INPUT_ERROR = 0, 1, 2


def _read_document(path):
    if path == "-":
        return sys.stdin.read()
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _load(path):
    try:
        return specio.load_tuple(_read_document(path))
    except (OSError, specio.SpecError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        raise SystemExit(INPUT_ERROR)


def _emit(args, doc, human_lines):
    if getattr(args, "json", False):
        print(specio.canonical_json(specio.jsonable(doc)), end="")
    else:
        for line in human_lines:
            print(line)
    report_path = getattr(args, "report", None)
    if report_path:
        with open(report_path, "w", encoding="utf-8") as fh:
            fh.write(specio.canonical_json(specio.jsonable(doc)))


def _summary(reports):
    lines = []
    for r in reports:
        status = "PASS" if r.ok else "FAIL"
        line = f"{status}  {r.name:<18} max deviation {r.max_deviation:.3e} (tol {r.tol:.1e})"
        if not r.ok and r.worst:
            line += f"  worst: {r.worst}"
        lines.append(line)
    return lines


def cmd_verify(args):
    t, extras = _load(args.file)
    window = args.window if args.window is not None else extras.get("window") or 8
    reports = t.check_all(window=window, tol=args.tol)
    doc = specio.report_document("verify", reports, {"window": window, "tol": args.tol})
    _emit(args, doc, _summary(reports))
    return PASS if all(r.ok for r in reports) else MATH_FAIL


def cmd_wold(args):
    t, extras = _load(args.file)
    window = args.window if args.window is not None else extras.get("window") or 8
    reports = t.check_all(window=window, tol=args.tol)
    if not all(r.ok for r in reports):
        doc = specio.report_document("wold", reports, {"note": "relation checks failed"})
        _emit(args, doc, _summary(reports) + ["wold: skipped (tuple fails its relation checks)"])
        return MATH_FAIL
    existence = wold.check_existence(t, window=window, tol=args.tol)
    lines = [f"existence: {'true' if existence.ok else 'false'}"
             f" (max commutator deviation {existence.max_deviation:.3e})"]
    extra = {"existence": existence.ok, "witness": existence.witness}
    if not existence.ok:
        lines.append(f"witness: {existence.witness}")
        doc = specio.report_document("wold", reports, extra)
        _emit(args, doc, lines)
        return MATH_FAIL
    dec = wold.verify_decomposition(t, window=window, depth=args.depth, tol=max(args.tol, 1e-8))
    summands = {}
    for subset, dims in dec.summand_dims.items():
        key = "{" + ",".join(str(x) for x in subset) + "}"
        summands[key] = {" ".join(str(x) for x in deg): d for deg, d in dims.items()}
        total = sum(dims.values())
        lines.append(f"H_{key}: total dimension {total} on the window")
    for name, (ok, dev) in dec.items.items():
        lines.append(f"{'PASS' if ok else 'FAIL'}  {name:<18} deviation {dev:.3e}")
    extra.update({"summands": summands, "decomposition": {k: {"passed": v[0], "deviation": v[1]}
                                                          for k, v in dec.items.items()}})
    if args.emit_bases:
        bases = {}
        for subset in dec.summand_dims:
            sub = wold.summand(t, subset, window=window, depth=args.depth)
            key = "{" + ",".join(str(x) for x in subset) + "}"
            bases[key] = {" ".join(str(x) for x in deg): specio.encode_matrix(b)
                          for deg, b in sub.blocks.items() if b.shape[1]}
        extra["bases"] = bases
    doc = specio.report_document("wold", reports, extra)
    _emit(args, doc, lines)
    return PASS if dec.ok else MATH_FAIL


def cmd_model(args):
    t, extras = _load(args.file)
    window = args.window if args.window is not None else extras.get("window") or 6
    subset = _parse_subset(args.subset) if args.subset is not None else extras.get("subset")
    if subset is None:
        print("input error: no subset given (file key 'subset' or --subset)", file=sys.stderr)
        return INPUT_ERROR
    try:
        fm = model.pi_a(t, subset, window=window, tol=args.tol)
    except ValueError as exc:
        print(f"model: {exc}", file=sys.stderr)
        return MATH_FAIL
    rep = model.verify_equivalence(t, fm, tol=args.tol)
    lines = _summary([rep])
    lines.append(f"core dimension: {fm.core_dim}")
    doc = specio.report_document("model", [rep], {
        "subset": list(subset), "core_dim": fm.core_dim,
        "model": specio.tuple_to_document(fm.tuple),
    })
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(specio.dump_tuple(fm.tuple, window=window))
        lines.append(f"model spec written to {args.out}")
    _emit(args, doc, lines)
    return PASS if rep.ok else MATH_FAIL


def cmd_extend(args):
    t, extras = _load(args.file)
    window = args.window if args.window is not None else extras.get("window") or 6
    try:
        res = extension.extend_doubly_twisted_isometries(t, window=window, tol=args.tol)
    except ValueError as exc:
        print(f"extend: {exc}", file=sys.stderr)
        return MATH_FAIL
    reports = extension.verify_extension(res, window=window, tol=args.tol)
    rep_list = list(reports.values()) + res.level_reports
    lines = _summary(rep_list)
    lines.append(f"shift coordinates: {list(res.shift_coords)}; copy offset per level: "
                 f"{list(res.embedding_offset(1))}")
    doc = specio.report_document("extend", rep_list, {
        "shift_coords": list(res.shift_coords),
        "phi_offset": list(res.phi_offset),
        "extension": specio.tuple_to_document(res.extended),
    })
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(specio.dump_tuple(res.extended, window=window))
        lines.append(f"extension spec written to {args.out}")
    _emit(args, doc, lines)
    return PASS if all(r.ok for r in rep_list) else MATH_FAIL


def cmd_braid(args):
    t, extras = _load(args.file)
    report = check_hexagon(t.fibers, nmax=args.n)
    lines = [f"pairs checked: {len(report.pair_deviations)}, "
             f"triples checked: {len(report.triple_deviations)}"]
    for key, dev in sorted(report.triple_deviations.items()):
        lines.append(f"  triple {key}: deviation {dev:.3e}")
    lines.append(("PASS" if report.ok else "FAIL")
                 + f"  hexagon max deviation {report.max_deviation:.3e}")
    if not report.ok:
        lines.append(f"first violation: {report.first_violation}")
    check = CheckReport("hexagon", report.ok, report.max_deviation, 1e-14,
                        {"first_violation": report.first_violation})
    doc = specio.report_document("braid", [check], {
        "pair_deviations": {f"{i},{j}": d for (i, j), d in report.pair_deviations.items()},
        "triple_deviations": {f"{i},{j},{l},{n}": d
                              for (i, j, l, n), d in report.triple_deviations.items()},
    })
    _emit(args, doc, lines)
    return PASS if report.ok else MATH_FAIL


def cmd_example(args):
    params = {}
    if args.example == "fock_model":
        params = {"k": args.k or 2, "subset": _parse_subset(args.subset or "0"),
                  "core_dim": args.core_dim, "seed": args.seed}
    elif args.example == "polydisc":
        params = {"n": args.k or 2}
    elif args.example in ("m2_hardy",):
        params = {}
    elif args.example in ("scalar_s_family",):
        params = {"seed": args.seed}
    try:
        t = factory.make(args.example, **params)
    except (TypeError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return INPUT_ERROR
    text = specio.dump_tuple(t, window=8)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        print(text, end="")
    return PASS


def _parse_subset(text):
    text = text.strip()
    if not text:
        return ()
    return tuple(sorted(int(x) for x in text.split(",")))


def build_parser():
    p = argparse.ArgumentParser(
        prog="twistrep",
        description="Verify, decompose, model, and extend twisted isometric tuples.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, window_default=None):
        sp.add_argument("file", help="operator-spec file (JSON), or - for stdin")
        sp.add_argument("--window", type=int, default=window_default,
                        help="degree window per coordinate (default 8, or the file's)")
        sp.add_argument("--tol", type=float, default=1e-10,
                        help="deviation tolerance (default 1e-10)")
        sp.add_argument("--json", action="store_true", help="print the JSON report to stdout")
        sp.add_argument("--report", help="also write the JSON report to this path")

    sp = sub.add_parser("verify", help="isometric/twisted/doubly-twisted/covariance checks")
    common(sp)
    sp.set_defaults(fn=cmd_verify)

    sp = sub.add_parser("wold", help="existence verdict and Wold summand dimensions")
    common(sp)
    sp.add_argument("--depth", type=int, default=3, help="core intersection depth (default 3)")
    sp.add_argument("--emit-bases", action="store_true", help="include summand bases in the report")
    sp.set_defaults(fn=cmd_wold)

    sp = sub.add_parser("model", help="transport a summand onto its Fock-space model")
    common(sp)
    sp.add_argument("--subset", help="comma-separated subset A, e.g. 0,1")
    sp.add_argument("--out", help="write the transported model as a new spec file")
    sp.set_defaults(fn=cmd_model)

    sp = sub.add_parser("extend", help="bilateral unitary extension")
    common(sp)
    sp.add_argument("--out", help="write the extension as a new spec file")
    sp.set_defaults(fn=cmd_extend)

    sp = sub.add_parser("braid", help="hexagon/braid identity report for the stored flips")
    common(sp)
    sp.add_argument("--n", type=int, default=3, help="iterated-flip level bound (default 3)")
    sp.set_defaults(fn=cmd_braid)

    sp = sub.add_parser("example", help="emit a deterministic example spec file")
    sp.add_argument("example", choices=sorted(factory.EXAMPLE_IDS))
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--k", type=int, help="rank for polydisc / fock_model")
    sp.add_argument("--subset", help="subset for fock_model, e.g. 0")
    sp.add_argument("--core-dim", type=int, default=2)
    sp.add_argument("--out", help="output path (default: stdout)")
    sp.set_defaults(fn=cmd_example)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    raise SystemExit(main())
