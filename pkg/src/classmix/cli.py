"""Command-line front end.

Subcommands map one-to-one onto the library pipelines; every run is keyed by
an explicit seed (default 0, never wall clock) and writes canonical JSON so
identical configs produce identical bytes.  Timestamps go to a separate
.meta.json that golden comparisons ignore.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import __version__
from .characters import dixon_character_table, structure_constants, verify_orthogonality, witten_zeta
from .errors import ClassmixError, GoldenMismatch, SpecSyntax, UnsupportedParameters
from .groups import GroupSpec, conj_classes, group_build, parse_cycles
from .interleave import (
    advantage,
    deviation_report,
    exact_distribution,
    full_tuple_set,
    load_protocol,
    mc_distribution,
    seeded_tuple_set,
)
from .mixing import (
    BijectionCoupling,
    Diagonal,
    Independent,
    TranslatedInverse,
    coverage,
    dist_to_uniform,
    l2_sq,
    l2_sq_char,
    p_brute,
    p_char,
    survey,
    thompson_search,
)
from .rng import make_stream

FLOAT_TOL = 1e-12


def parse_spec(text: str) -> GroupSpec:
    """Grammar: A:<n> | S:<n> | SL2:<q> | PSL2:<q> | permgen:<file> | matgen:<file>,q=<q>."""
    text = text.strip()
    head, sep, rest = text.partition(":")
    if not sep:
        raise SpecSyntax(f"group spec needs a ':': {text!r}")
    if head in ("A", "S", "SL2", "PSL2"):
        try:
            value = int(rest)
        except ValueError as exc:
            raise SpecSyntax(f"numeric parameter expected in {text!r}") from exc
        if head == "A":
            return GroupSpec.alt(value)
        if head == "S":
            return GroupSpec.sym(value)
        if head == "SL2":
            return GroupSpec.sl2(value)
        return GroupSpec.psl2(value)
    if head == "permgen":
        return _permgen_spec(rest)
    if head == "matgen":
        return _matgen_spec(rest)
    raise SpecSyntax(f"unknown group kind {head!r} in {text!r}")


def _permgen_spec(path_text: str) -> GroupSpec:
    path = Path(path_text)
    if not path.exists():
        raise SpecSyntax(f"generator file not found: {path}")
    lines = [ln.strip() for ln in path.read_text(encoding="utf-8").splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    degree = None
    if lines and lines[0].startswith("n="):
        degree = int(lines[0][2:])
        lines = lines[1:]
    if not lines:
        raise SpecSyntax(f"no generators in {path}")
    gens = [parse_cycles(ln, degree) for ln in lines]
    if degree is None:
        degree = max(len(g) for g in gens)
        gens = [g + tuple(range(len(g), degree)) for g in gens]
    return GroupSpec.from_perm_generators([tuple(g) for g in gens], label=f"permgen:{path.name}")


def _matgen_spec(rest: str) -> GroupSpec:
    path_text, _, qpart = rest.partition(",")
    if not qpart.startswith("q="):
        raise SpecSyntax("matgen spec must look like matgen:<file>,q=<q>")
    q = int(qpart[2:])
    path = Path(path_text)
    if not path.exists():
        raise SpecSyntax(f"generator file not found: {path}")
    gens = []
    for ln in path.read_text(encoding="utf-8").splitlines():
        ln = ln.strip()
        if not ln or ln.startswith("#"):
            continue
        parts = ln.split(",")
        if len(parts) != 4:
            raise SpecSyntax(f"matrix generator needs four entries: {ln!r}")
        gens.append(tuple(int(p) for p in parts))
    if not gens:
        raise SpecSyntax(f"no generators in {path}")
    return GroupSpec.from_matrix_generators(gens, q=q, label=f"matgen:{path.name}")


def _parse_element(table, text: str) -> int:
    """Element reference: decimal index, or hex:<canonical bytes>."""
    if text.startswith("hex:"):
        return table.index_of(bytes.fromhex(text[4:]))
    try:
        idx = int(text)
    except ValueError as exc:
        raise SpecSyntax(f"element reference must be an index or hex:<bytes>: {text!r}") from exc
    if not (0 <= idx < table.order):
        raise SpecSyntax(f"element index {idx} out of range [0, {table.order})")
    return idx


def _parse_coupling(table, text: str):
    if text == "independent":
        return Independent()
    if text == "diagonal":
        return Diagonal()
    if text.startswith("transinv:"):
        return TranslatedInverse(_parse_element(table, text.split(":", 1)[1]))
    if text.startswith("bijfile:"):
        path = Path(text.split(":", 1)[1])
        if not path.exists():
            raise SpecSyntax(f"bijection file not found: {path}")
        mapping = tuple(int(ln) for ln in path.read_text().split())
        if len(mapping) != table.order:
            raise SpecSyntax(f"bijection file has {len(mapping)} entries, group order is {table.order}")
        return BijectionCoupling(mapping)
    raise SpecSyntax(f"unknown coupling {text!r}")


# ---------------------------------------------------------------------------
# report plumbing


def _canonical_json(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _report_name(args) -> str:
    spec_key = args.group.replace(":", "").replace("/", "_").replace(",", "_")
    return f"{args.command}__{spec_key}__seed{args.seed}"


def _emit(args, payload: dict, csv_text: str | None = None) -> int:
    payload = dict(payload)
    payload.setdefault("schema", 1)
    payload["subcommand"] = args.command
    payload["group"] = args.group
    payload["seed"] = args.seed
    body = _canonical_json(payload)
    name = _report_name(args)

    if args.out:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        (outdir / f"{name}.json").write_text(body, encoding="utf-8")
        meta = {"written_at": time.strftime("%Y-%m-%dT%H:%M:%S"), "version": __version__}
        (outdir / f"{name}.meta.json").write_text(_canonical_json(meta), encoding="utf-8")
        if csv_text is not None and "csv" in args.formats:
            (outdir / f"{name}.csv").write_text(csv_text, encoding="utf-8")
    if not args.quiet:
        sys.stdout.write(body)

    if args.golden:
        golden_dir = Path(args.golden_dir)
        golden_path = golden_dir / f"{name}.json"
        if args.golden == "write":
            golden_dir.mkdir(parents=True, exist_ok=True)
            golden_path.write_text(body, encoding="utf-8")
        else:
            if not golden_path.exists():
                raise GoldenMismatch(f"golden file missing: {golden_path}")
            recorded = golden_path.read_text(encoding="utf-8")
            if recorded != body:
                drift = _first_drift(json.loads(recorded), json.loads(body))
                raise GoldenMismatch(f"golden drift in {golden_path.name}: {drift}")
    return 0


def _first_drift(old, new, path="$"):
    if isinstance(old, dict) and isinstance(new, dict):
        for key in sorted(set(old) | set(new)):
            if key not in old or key not in new:
                return f"{path}.{key} present on one side only"
            hit = _first_drift(old[key], new[key], f"{path}.{key}")
            if hit:
                return hit
        return None
    if isinstance(old, list) and isinstance(new, list):
        if len(old) != len(new):
            return f"{path} length {len(old)} != {len(new)}"
        for i, (a, b) in enumerate(zip(old, new)):
            hit = _first_drift(a, b, f"{path}[{i}]")
            if hit:
                return hit
        return None
    if isinstance(old, float) and isinstance(new, float):
        scale = max(abs(old), abs(new), 1.0)
        if abs(old - new) > FLOAT_TOL * scale:
            return f"{path}: {old!r} -> {new!r}"
        return None
    if old != new:
        return f"{path}: {old!r} -> {new!r}"
    return None


def _build_all(args):
    spec = parse_spec(args.group)
    if args.max_order:
        spec = GroupSpec(
            kind=spec.kind,
            n=spec.n,
            q=spec.q,
            perm_generators=spec.perm_generators,
            mat_generators=spec.mat_generators,
            max_order=args.max_order,
            label=spec.label,
        )
    table = group_build(spec)
    classes = conj_classes(table)
    return table, classes


# ---------------------------------------------------------------------------
# subcommands


def _cmd_chartable(args) -> int:
    table, classes = _build_all(args)
    constants = structure_constants(table, classes)
    chartable = dixon_character_table(classes, constants)
    report = verify_orthogonality(chartable, classes)
    payload = chartable.to_json_dict(table.spec.label)
    payload["orthogonality"] = {
        "row_residual": report.max_row_residual,
        "col_residual": report.max_col_residual,
        "tolerance": report.tolerance,
        "passed": report.passed,
    }
    payload["class_orders"] = list(classes.orders)
    payload["modulus_prime"] = chartable.modulus_prime
    return _emit(args, payload)


def _cmd_zeta(args) -> int:
    table, classes = _build_all(args)
    chartable = dixon_character_table(classes, structure_constants(table, classes))
    values = {repr(s): witten_zeta(chartable, s) for s in args.s}
    payload = {
        "order": table.order,
        "class_count": classes.k,
        "degrees": list(chartable.degrees),
        "zeta": values,
    }
    return _emit(args, payload)


def _cmd_mixpair(args) -> int:
    table, classes = _build_all(args)
    chartable = dixon_character_table(classes, structure_constants(table, classes))
    if not (0 <= args.x < classes.k and 0 <= args.y < classes.k):
        raise UnsupportedParameters(f"class indices must lie in [0, {classes.k})")
    dist = (
        p_brute(args.x, args.y, table, classes)
        if args.method == "brute"
        else p_char(args.x, args.y, chartable, classes)
    )
    dr = dist_to_uniform(dist, classes)
    cov = coverage(dist, classes)
    payload = {
        "x_class": args.x,
        "y_class": args.y,
        "method": dist.source,
        "probs_per_class": [float(p) for p in dist.probs],
        "class_sizes": list(classes.sizes),
        "l2_sq": l2_sq(dist, classes),
        "l2_sq_char": l2_sq_char(args.x, args.y, chartable),
        "n_stat": table.order * l2_sq_char(args.x, args.y, chartable),
        "l1": dr.l1,
        "l2_sq_dist": dr.l2_sq,
        "linf": dr.linf,
        "coverage": {"support": cov.support, "fraction": cov.fraction, "exact": cov.exact},
    }
    return _emit(args, payload)


def _cmd_survey(args) -> int:
    table, classes = _build_all(args)
    chartable = dixon_character_table(classes, structure_constants(table, classes))
    coupling = _parse_coupling(table, args.coupling)
    stream = make_stream(args.seed, 0)
    rep = survey(
        table,
        classes,
        chartable,
        coupling,
        thresholds=tuple(args.thresholds),
        stream=stream,
        samples=args.samples,
    )
    return _emit(args, rep.to_json_dict(), csv_text=rep.to_csv())


def _cmd_thompson(args) -> int:
    table, classes = _build_all(args)
    constants = structure_constants(table, classes)
    res = thompson_search(table, classes, constants)
    payload = {
        "best_class": res.best_class,
        "support": res.support,
        "fraction": res.fraction,
        "witness": res.witness,
        "per_class": [{"class": c, "support": s} for c, s in res.per_class],
        "class_orders": list(classes.orders),
        "class_sizes": list(classes.sizes),
    }
    return _emit(args, payload)


def _cmd_interleave(args) -> int:
    table, _ = _build_all(args)
    if args.alpha >= 1.0:
        a_set = full_tuple_set(table, args.t)
        b_set = full_tuple_set(table, args.t)
    else:
        a_set = seeded_tuple_set(table, args.t, args.alpha, make_stream(args.seed, 1), "A")
        b_set = seeded_tuple_set(table, args.t, args.alpha, make_stream(args.seed, 2), "B")
    if args.mc:
        est = mc_distribution(a_set, b_set, args.mc, make_stream(args.seed, 3), table)
    else:
        est = exact_distribution(a_set, b_set, table)
    family, base = _family_base(table)
    rep = deviation_report(
        est, float(a_set.density), float(b_set.density), family=family, base=base, arity=args.t
    )
    payload = est.to_json_dict(table)
    payload["deviation"] = rep.to_json_dict()
    payload["alpha"] = float(a_set.density)
    payload["beta"] = float(b_set.density)
    payload["t"] = args.t
    return _emit(args, payload)


def _family_base(table) -> tuple[str, float]:
    spec = table.spec
    if spec.kind in ("alt", "sym", "permgen"):
        return spec.kind, float(spec.n)
    return spec.kind, float(spec.q)


def _cmd_advantage(args) -> int:
    table, _ = _build_all(args)
    protocol = load_protocol(args.protocol, table)
    g = _parse_element(table, args.g)
    h = _parse_element(table, args.h)
    rep = advantage(protocol, table, g, h, samples=args.samples, stream=make_stream(args.seed, 4))
    payload = rep.to_json_dict()
    payload["g"] = g
    payload["h"] = h
    payload["protocol"] = str(args.protocol)
    payload["rectangles"] = len(protocol.rectangles)
    return _emit(args, payload)


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(sub):
    sub.add_argument("group", help="group spec, e.g. A:5, PSL2:11, permgen:<file>, matgen:<file>,q=<q>")
    sub.add_argument("--seed", type=int, default=0, help="64-bit seed (fixed default, never wall clock)")
    sub.add_argument("--out", default=None, help="directory for JSON/CSV reports")
    sub.add_argument("--formats", default="json,csv", help="comma list of output formats")
    sub.add_argument("--max-order", type=int, default=None, help="enumeration cap override")
    sub.add_argument("--golden", choices=["write", "compare"], default=None)
    sub.add_argument("--golden-dir", default="goldens/v1")
    sub.add_argument("--threads", type=int, default=1, help="worker cap (modules parallelize internally)")
    sub.add_argument("--quiet", action="store_true", help="suppress stdout report")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="classmix", description=__doc__)
    parser.add_argument("--version", action="version", version=f"classmix {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("chartable", help="character table with orthogonality report")
    _add_common(p)
    p.set_defaults(func=_cmd_chartable)

    p = subs.add_parser("zeta", help="Witten zeta values")
    _add_common(p)
    p.add_argument("--s", type=float, nargs="+", required=True)
    p.set_defaults(func=_cmd_zeta)

    p = subs.add_parser("mixpair", help="class-product distribution for one class pair")
    _add_common(p)
    p.add_argument("--x", type=int, required=True, help="x class index")
    p.add_argument("--y", type=int, required=True, help="y class index")
    p.add_argument("--method", choices=["char", "brute"], default="char")
    p.set_defaults(func=_cmd_mixpair)

    p = subs.add_parser("survey", help="coupling-weighted N statistic survey")
    _add_common(p)
    p.add_argument("--coupling", default="independent", help="independent|diagonal|transinv:<elt>|bijfile:<path>")
    p.add_argument("--thresholds", type=float, nargs="+", default=[0.0, 0.01, 0.1, 0.5, 1.0, 2.0])
    p.add_argument("--samples", type=int, default=10**5, help="draws when the exact sweep is infeasible")
    p.set_defaults(func=_cmd_survey)

    p = subs.add_parser("thompson", help="exact class-square coverage search")
    _add_common(p)
    p.set_defaults(func=_cmd_thompson)

    p = subs.add_parser("interleave", help="interleaved-product distribution over G^t")
    _add_common(p)
    p.add_argument("--t", type=int, default=2)
    p.add_argument("--alpha", type=float, default=0.5, help="tuple-set density (1.0 = full)")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--exact", action="store_true", help="exact enumeration (default)")
    group.add_argument("--mc", type=int, default=None, help="Monte Carlo with this many samples")
    p.set_defaults(func=_cmd_interleave)

    p = subs.add_parser("advantage", help="rectangle-protocol distinguishing advantage")
    _add_common(p)
    p.add_argument("--protocol", required=True, help="protocol file: bit,<afile>,<bfile> per line")
    p.add_argument("--g", required=True, help="first promised product (index or hex:<bytes>)")
    p.add_argument("--h", required=True, help="second promised product")
    p.add_argument("--samples", type=int, default=10**5)
    p.set_defaults(func=_cmd_advantage)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ClassmixError as exc:
        print(f"error[{exc.exit_code}] {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    raise SystemExit(main())
