"""Batch command line: import/export, validation, reports, linking,
curation tasks, and the HTTP service.

Exit codes: 0 success, 1 validation or domain failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import errors
from .browse import search
from .coverage import DEFAULT_BANDS, DEFAULT_MIN_RATE, coverage_report, standardization_impact
from .curation import Proposal
from .formats import export_canonical, import_canonical, import_corpus, load_rules
from .linking import link
from .metrics import compute_metrics
from .workspace import Workspace


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def _open_store(args) -> Workspace:
    return Workspace.open(args.store)


def _parse_bands(spec: str):
    bands = []
    for part in spec.split(","):
        lo, _, hi = part.partition(":")
        bands.append((float(lo), float(hi)))
    return tuple(bands)


def cmd_import(args) -> int:
    store = import_canonical(_read(args.file))
    target = Path(args.store)
    if target.exists() and any(target.iterdir()) and not args.force:
        print(f"refusing to overwrite non-empty {target} (use --force)",
              file=sys.stderr)
        return 1
    Workspace.init(target, store)
    print(f"imported {len(store.active_concepts())} concepts into {target}")
    return 0


def cmd_export(args) -> int:
    ws = _open_store(args)
    data = export_canonical(ws.store)
    if args.output and args.output != "-":
        Path(args.output).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
    return 0


def cmd_validate(args) -> int:
    if args.store:
        store = _open_store(args).store
    else:
        store = import_canonical(_read(args.file))
    violations = store.validate()
    for v in violations:
        print(v)
    if violations:
        return 1
    print("ok")
    return 0


def cmd_metrics(args) -> int:
    m = compute_metrics(_open_store(args).store)
    if args.format == "json":
        print(json.dumps(m.as_dict(), indent=2))
    else:
        print(m.as_text())
    return 0


def cmd_coverage(args) -> int:
    ws = _open_store(args)
    corpus = import_corpus(_read(args.corpus), name=Path(args.corpus).stem)
    bands = _parse_bands(args.bands) if args.bands else DEFAULT_BANDS
    report = coverage_report(corpus, ws.store, min_rate=args.min_rate, bands=bands)
    if args.format == "json":
        print(json.dumps(report.as_dict(), indent=2))
    else:
        print(f"# terms={report.total_terms} covered={report.covered_terms} "
              f"term_coverage={report.term_coverage}%")
        print(f"# entities={report.total_entities} covered={report.covered_entities} "
              f"entity_coverage={report.entity_coverage}%")
        print("low\thigh\tterms\tcovered\tcoverage_pct")
        for band in report.per_band:
            print(f"{band.low}\t{band.high}\t{band.terms}\t{band.covered}\t"
                  f"{band.coverage_pct}")
    return 0


def cmd_impact(args) -> int:
    ws = _open_store(args)
    corpus = import_corpus(_read(args.corpus), name=Path(args.corpus).stem)
    terms = [line.strip() for line in _read(args.terms).splitlines() if line.strip()]
    report = standardization_impact(corpus, terms, ws.store)
    if args.format == "json":
        print(json.dumps(report.as_dict(), indent=2, ensure_ascii=False))
    else:
        print(f"# terms={report.distinct_input_terms} "
              f"concepts={report.mapped_concepts} "
              f"reduction={report.dimension_reduction}% "
              f"approximate={report.approximate}")
        print("term\tconcept\tpre\tpost\texpanded")
        for row in report.rows:
            print(f"{row.source_term}\t{row.concept}\t{row.pre_count}\t"
                  f"{row.post_count}\t{'|'.join(row.expanded_terms)}")
        for term in report.unmapped:
            print(f"{term}\tUNMAPPED\t\t\t")
    return 0


def cmd_link(args) -> int:
    ws = _open_store(args)
    rules = load_rules(_read(args.rules), ws.store) if args.rules else []
    terms = [line.strip() for line in _read(args.file).splitlines() if line.strip()]
    for term in terms:
        result = link(term, ws.store, rules, threshold=args.threshold, k=args.top_k)
        candidates = "|".join(f"{c.cui}:{c.score:.4f}" for c in result.candidates)
        print(f"{term}\t{result.status}\t{'|'.join(result.targets)}\t{candidates}")
    return 0


def cmd_search(args) -> int:
    ws = _open_store(args)
    results = search(ws.store, args.query, scope=args.scope, root=args.root)
    if args.format == "json":
        print(json.dumps([r.as_dict() for r in results], indent=2,
                         ensure_ascii=False))
    else:
        for r in results:
            flag = "=" if r.exact else "~"
            code = ws.store.concepts[r.concept].code
            print(f"{flag} {r.concept}  {code}  {r.matched_term} ({r.match_kind})")
    return 0


def cmd_tasks(args) -> int:
    ws = _open_store(args)
    if args.tasks_cmd == "create":
        terms = [line.strip() for line in _read(args.terms).splitlines() if line.strip()]
        tasks = ws.create_batch(terms, args.annotators.split(","),
                                group_count=args.groups, per_term=args.per_term,
                                seed=args.seed, actor="cli", at=_now())
        for t in tasks:
            print(f"{t.id}\tgroup={t.group}\t{t.term}\t{','.join(t.assignees)}")
    elif args.tasks_cmd == "list":
        for t in ws.board.tasks.values():
            if args.state and t.state != args.state:
                continue
            print(f"{t.id}\t{t.state}\t{t.term}\tvotes={len(t.votes)}/"
                  f"{len(t.assignees)}")
    elif args.tasks_cmd == "vote":
        if args.existing:
            proposal = Proposal.existing(args.existing)
        elif args.new_label:
            proposal = Proposal.new_concept(args.new_label, args.new_parent)
        else:
            proposal = Proposal.not_a_symptom()
        task = ws.submit_vote(args.task, args.annotator, proposal, at=_now())
        print(f"{task.id}\t{task.state}\tvotes={len(task.votes)}/{len(task.assignees)}")
    elif args.tasks_cmd == "resolve":
        task = ws.resolve_task(args.task, force=args.force, actor="cli", at=_now())
        print(f"{task.id}\t{task.state}")
    elif args.tasks_cmd == "finalize":
        override = Proposal.existing(args.override_existing) \
            if args.override_existing else None
        task = ws.finalize_task(args.task, args.reviewer, override, at=_now())
        print(f"{task.id}\t{task.state}\t{json.dumps(task.applied)}")
    return 0


def cmd_serve(args) -> int:
    from .service import serve

    ws_probe = Workspace.open(args.store)  # fail fast on a corrupt store
    ws_probe.close()
    rules = []
    if args.rules:
        rules = load_rules(_read(args.rules), ws_probe.store)
    serve(args.store, args.addr, rules=rules, static_dir=args.ui)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ispo",
                                     description="Symptom terminology toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("import", help="create a store directory from a canonical file")
    p.add_argument("file")
    p.add_argument("--store", required=True)
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_import)

    p = sub.add_parser("export", help="write the canonical serialization")
    p.add_argument("--store", required=True)
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("validate", help="check structural invariants")
    p.add_argument("file", nargs="?", help="canonical file (or use --store)")
    p.add_argument("--store")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("metrics", help="structural metrics")
    p.add_argument("--store", required=True)
    p.add_argument("--format", choices=("json", "text"), default="text")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("coverage", help="clinical coverage of a corpus")
    p.add_argument("--store", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--min-rate", type=float, default=DEFAULT_MIN_RATE)
    p.add_argument("--bands", help="comma-separated lo:hi fractions")
    p.add_argument("--format", choices=("json", "tsv"), default="json")
    p.set_defaults(func=cmd_coverage)

    p = sub.add_parser("impact", help="standardization impact of a term list")
    p.add_argument("--store", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--terms", required=True, help="one term per line")
    p.add_argument("--format", choices=("json", "tsv"), default="json")
    p.set_defaults(func=cmd_impact)

    p = sub.add_parser("link", help="run the linking pipeline over terms")
    p.add_argument("file", nargs="?", default="-", help="one term per line")
    p.add_argument("--store", required=True)
    p.add_argument("--rules")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--top-k", type=int, default=5)
    p.set_defaults(func=cmd_link)

    p = sub.add_parser("search", help="synonym-expanded substring search")
    p.add_argument("query")
    p.add_argument("--store", required=True)
    p.add_argument("--scope", choices=("global", "subtree"), default="global")
    p.add_argument("--root")
    p.add_argument("--format", choices=("json", "text"), default="text")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("tasks", help="curation workflow")
    p.add_argument("--store", required=True)
    tsub = p.add_subparsers(dest="tasks_cmd", required=True)
    t = tsub.add_parser("create")
    t.add_argument("--terms", required=True)
    t.add_argument("--annotators", required=True, help="comma separated")
    t.add_argument("--groups", type=int, default=5)
    t.add_argument("--per-term", type=int, default=3)
    t.add_argument("--seed", type=int, default=0)
    t = tsub.add_parser("list")
    t.add_argument("--state")
    t = tsub.add_parser("vote")
    t.add_argument("--task", required=True)
    t.add_argument("--annotator", required=True)
    t.add_argument("--existing")
    t.add_argument("--new-label")
    t.add_argument("--new-parent")
    t.add_argument("--not-a-symptom", action="store_true")
    t = tsub.add_parser("resolve")
    t.add_argument("--task", required=True)
    t.add_argument("--force", action="store_true")
    t = tsub.add_parser("finalize")
    t.add_argument("--task", required=True)
    t.add_argument("--reviewer", required=True)
    t.add_argument("--override-existing")
    p.set_defaults(func=cmd_tasks)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--store", required=True)
    p.add_argument("--addr", default="127.0.0.1:8642")
    p.add_argument("--rules")
    p.add_argument("--ui", help="directory of static UI files to mount")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except errors.IspoError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
