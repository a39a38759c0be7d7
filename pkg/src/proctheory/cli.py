"""Command-line front end.

Exit codes: 0 when every requested check passes, 1 on check failures (the
report is still written), 2 on usage or configuration errors.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from datetime import datetime, timezone
from fractions import Fraction

import numpy as np

from . import __version__
from .audit import ALL_CHECKS, MUTANTS, REPORT_SCHEMA, AuditConfig, AuditConfigError, reconstruction_roundtrip, run_audit
from .backends import MatCategory, RelCategory, spek_closure
from .catcore import LAW_FAMILIES, UnsupportedLaw, check_laws
from .cpm import CpmCategory, choi_distance, random_channel
from .phased import check_gp_dagger_compact, check_gp_roundtrip
from .scalars import get_backend
from .subcausal import FinitePCM, totalise_pcm, unit_interval_pcm

LAW_BACKENDS = {
    "matB": lambda: MatCategory("bool"),
    "matN": lambda: MatCategory("nat"),
    "matQ": lambda: MatCategory("rat"),
    "matQi": lambda: MatCategory("gauss_rat"),
    "matR": lambda: MatCategory("float_real"),
    "matC": lambda: MatCategory("float_complex"),
    "rel": RelCategory,
    "cpmC": lambda: CpmCategory("float_complex"),
    "cpmR": lambda: CpmCategory("float_real"),
}


class UsageError(Exception):
    pass


def _dims(text: str) -> list[int]:
    try:
        dims = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"dims must be comma-separated integers, got {text!r}")
    if not dims or any(d < 0 for d in dims):
        raise argparse.ArgumentTypeError("dims must be nonnegative")
    return dims


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="proctheory", description="Executable process theories and principle audits.")
    p.add_argument("--version", action="version", version=f"proctheory {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, backend_default=None, dims_default="2,3"):
        if backend_default is not None:
            sp.add_argument("--backend", default=backend_default)
        sp.add_argument("--dims", type=_dims, default=_dims(dims_default))
        sp.add_argument("--samples", type=int, default=200)
        sp.add_argument("--seed", type=int, default=42)
        sp.add_argument("--tol", type=float, default=1e-9)
        sp.add_argument("--format", choices=("text", "json"), default="text")
        sp.add_argument("--output", "-o", default=None, help="write the report here instead of stdout")

    a = sub.add_parser("audit", help="run the principle audit on cpmC, cpmR or mspek")
    common(a, "cpmC")
    a.add_argument("--checks", default="all", help=f"comma-separated subset of: {', '.join(ALL_CHECKS)}")
    a.add_argument("--mutant", default=None, help=f"inject a defect: {', '.join(MUTANTS)}")
    a.add_argument("--config", default=None, help="audit config JSON file (flags are ignored)")
    a.add_argument("--workers", type=int, default=1)

    lw = sub.add_parser("laws", help="check categorical law families")
    common(lw, "matQ", "4")
    lw.add_argument("--laws", default="all", help=f"comma-separated subset of: {', '.join(LAW_FAMILIES)}")

    c = sub.add_parser("closure", help="generate the Spekkens closure")
    common(c, None, "1")
    c.add_argument("--mixed", action="store_true", help="include the mixed generators")
    c.add_argument("--budget", type=int, default=100_000)
    c.add_argument("--allow-large", action="store_true")

    g = sub.add_parser("gp-roundtrip", help="GP reconstruction and CPM round trip")
    common(g, None, "1,2,3")

    t = sub.add_parser("totalise", help="bounded totalisation of a finite PCM")
    common(t, None, "2")
    t.add_argument("--denominator", type=int, default=2, help="use the PCM {0, 1/d, ..., 1}")
    t.add_argument("--pcm", default=None, help="PCM JSON file (elements, zero, ovee)")
    t.add_argument("--max-word", type=int, default=6)

    sub.add_parser("report-schema", help="print the JSON schema of audit reports")
    return p


def _emit(args, text: str, payload: dict) -> None:
    if args.format == "json":
        payload = dict(payload)
        payload.setdefault("timestamp", {})
        payload["timestamp"] = {"generated_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
                                **payload["timestamp"]}
        out = json.dumps(payload, indent=2, sort_keys=False, default=str) + "\n"
    else:
        out = text + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)


def _law_json(rep) -> dict:
    d = rep.to_json()
    d.pop("elapsed_ms", None)
    return d


def cmd_audit(args) -> int:
    try:
        if args.config:
            with open(args.config, encoding="utf-8") as fh:
                obj = json.load(fh)
            if "PROCTHEORY_SEED" in os.environ:
                obj["seed"] = args.seed
            cfg = AuditConfig.from_json(obj)
        else:
            cfg = AuditConfig(backend=args.backend, dims=tuple(args.dims), samples=args.samples, seed=args.seed,
                              tol=args.tol, checks=tuple(c.strip() for c in args.checks.split(",") if c.strip()),
                              mutant=args.mutant, workers=args.workers)
    except (AuditConfigError, OSError, json.JSONDecodeError, TypeError) as exc:
        raise UsageError(str(exc))
    report = run_audit(cfg)
    payload = report.to_json()
    timing = payload.pop("timestamp")
    payload["timestamp"] = {"elapsed_ms": timing["elapsed_ms"]}
    _emit(args, report.summary(), payload)
    return 0 if report.passed else 1


def cmd_laws(args) -> int:
    if args.backend not in LAW_BACKENDS:
        raise UsageError(f"unknown backend {args.backend!r}; choose from {', '.join(LAW_BACKENDS)}")
    cat = LAW_BACKENDS[args.backend]()
    laws = "all" if args.laws == "all" else [x.strip() for x in args.laws.split(",") if x.strip()]
    tol = None if cat.exact else max(args.tol, 1e-8)
    try:
        reports = check_laws(cat, laws, seed=args.seed, budget=args.samples, max_dim=max(args.dims), tol=tol)
    except UnsupportedLaw as exc:
        raise UsageError(str(exc))
    passed = all(r.passed for r in reports.values())
    text = "\n".join(r.summary() for r in reports.values()) + ("\nPASS" if passed else "\nFAIL")
    payload = {
        "command": "laws",
        "config": {"backend": args.backend, "max_dim": max(args.dims), "samples": args.samples, "seed": args.seed, "tol": tol},
        "passed": passed,
        "reports": [_law_json(r) for r in reports.values()],
        "timestamp": {"elapsed_ms": {k: round(r.elapsed_ms, 3) for k, r in reports.items()}},
    }
    _emit(args, text, payload)
    return 0 if passed else 1


def cmd_closure(args) -> int:
    n = max(args.dims)
    try:
        res = spek_closure(n, mixed=args.mixed, budget=args.budget, allow_large=args.allow_large)
    except ValueError as exc:
        raise UsageError(str(exc))
    cards = {}
    for k in range(n + 1):
        sizes = sorted({r.cardinality() for r in res.states(k) if not r.is_zero()})
        cards[str(4**k)] = sizes
    body = res.to_json()
    body["state_cardinalities"] = cards
    lines = [f"{'MSpek' if args.mixed else 'Spek'} closure, n <= {n}: {res.total} morphisms, saturated={res.saturated}"]
    lines += [f"  states of {k}: cardinalities {v}" for k, v in cards.items()]
    payload = {"command": "closure", "config": {"n": n, "mixed": args.mixed, "budget": args.budget},
               "passed": res.saturated, "result": body, "timestamp": {"elapsed_ms": round(res.elapsed_ms, 3)}}
    _emit(args, "\n".join(lines), payload)
    return 0 if res.saturated else 1


def cmd_gp_roundtrip(args) -> int:
    max_dim = max(args.dims)
    if max_dim < 1:
        raise UsageError("gp-roundtrip needs a positive dimension")
    gp = check_gp_roundtrip(samples=args.samples, seed=args.seed, max_dim=max_dim, tol=max(args.tol, 1e-9))
    bk = get_backend("float_complex", args.tol)
    rng = np.random.default_rng([args.seed, 101])
    worst, bad = 0.0, []
    for _ in range(args.samples):
        n, m = (int(x) for x in rng.integers(1, max_dim + 1, size=2))
        f = random_channel(bk, rng, n, m)
        _, dev = reconstruction_roundtrip(f, args.tol)
        worst = max(worst, dev)
        if dev > 1e-7 and len(bad) < 5:
            bad.append({"in": n, "out": m, "deviation": dev})
    compact = check_gp_dagger_compact(max_dim, tol=max(args.tol, 1e-9))
    passed = gp.passed and compact.passed and not bad
    text = f"{gp.summary()}\n{compact.summary()}\nCPM round trip: worst Choi distance {worst:.2e} over {args.samples} channels\n" + (
        "PASS" if passed else "FAIL")
    payload = {"command": "gp-roundtrip", "config": {"max_dim": max_dim, "samples": args.samples, "seed": args.seed},
               "passed": passed, "gp": _law_json(gp), "dagger_compact": _law_json(compact), "cpm_roundtrip": {"worst": worst, "failures": bad},
               "timestamp": {"elapsed_ms": round(gp.elapsed_ms, 3)}}
    _emit(args, text, payload)
    return 0 if passed else 1


def cmd_totalise(args) -> int:
    if args.pcm:
        try:
            with open(args.pcm, encoding="utf-8") as fh:
                pcm = FinitePCM.from_json(json.load(fh))
        except (OSError, json.JSONDecodeError, KeyError) as exc:
            raise UsageError(f"cannot read PCM: {exc}")
    else:
        if args.denominator < 1:
            raise UsageError("denominator must be positive")
        pcm = unit_interval_pcm(args.denominator)
    if args.max_word < 2:
        raise UsageError("max-word must be at least 2")
    axioms = pcm.check_axioms()
    tot = totalise_pcm(pcm, args.max_word)
    down, fact = tot.verify_downset(), tot.verify_totalisation_fact()
    passed = not (axioms or down or fact)
    fmt = lambda w: "[" + ", ".join(str(Fraction(x)) if isinstance(x, Fraction) else str(x) for x in w) + "]"  # noqa: E731
    classes = [{"representative": fmt(c.representative), "words": len(c.words), "certified": c.certified} for c in tot.classes]
    lines = [f"totalisation with max_word={args.max_word}: {len(tot.classes)} classes, "
             f"{len(tot.certified_classes())} certified"]
    lines += [f"  {c['representative']:24s} {'certified' if c['certified'] else 'uncertified'} ({c['words']} words)" for c in classes]
    lines.append("PASS" if passed else "FAIL")
    payload = {"command": "totalise", "config": {"max_word": args.max_word}, "pcm": pcm.to_json(), "passed": passed,
               "classes": classes, "axiom_violations": [list(map(str, v)) for v in axioms],
               "downset_violations": [list(map(str, v)) for v in down],
               "fact_violations": [list(map(str, v)) for v in fact]}
    _emit(args, "\n".join(lines), payload)
    return 0 if passed else 1


COMMANDS = {
    "audit": cmd_audit,
    "laws": cmd_laws,
    "closure": cmd_closure,
    "gp-roundtrip": cmd_gp_roundtrip,
    "totalise": cmd_totalise,
}


def main(argv: list[str] | None = None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    if args.command == "report-schema":
        sys.stdout.write(json.dumps(REPORT_SCHEMA, indent=2) + "\n")
        return 0
    env_seed = os.environ.get("PROCTHEORY_SEED")
    if env_seed is not None:
        try:
            args.seed = int(env_seed)
        except ValueError:
            print(f"proctheory: PROCTHEORY_SEED must be an integer, got {env_seed!r}", file=sys.stderr)
            return 2
    if args.samples < 1:
        print("proctheory: --samples must be positive", file=sys.stderr)
        return 2
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"proctheory: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
