"""Command-line front end.

    uvsmf example-a [--steps K] [--runs R] [--samples N] [--seed S] [--out DIR]
                    [--engines LIST] [--workers W] [--unrelated] [--dump-samples] [--figures]
    uvsmf example-b [--steps K] [--runs R] [--seed S] [--out DIR] [--zero-noise] [--figures]
    uvsmf lemma-check [--iterations I] [--seed S] [--out DIR]

Exit codes: 0 success, 2 invariant violation, 3 sampling starvation, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import experiments
from .lemmas import format_report, run_lemma_suite
from .oracle import AcceptanceStarvation

EXIT_OK, EXIT_VIOLATION, EXIT_STARVATION, EXIT_IO = 0, 2, 3, 4


def _engines(s: str) -> list[str]:
    return [e.strip() for e in s.split(",") if e.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="uvsmf", description="Set-membership filtering reproductions and lemma checks.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--descriptor", type=Path, help="RunDescriptor JSON; explicit flags override its fields")
        sp.add_argument("--steps", type=int)
        sp.add_argument("--runs", type=int)
        sp.add_argument("--samples", type=int)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--engines", type=_engines)
        sp.add_argument("--out", type=Path, default=Path("out"))
        sp.add_argument("--workers", type=int, default=1)
        sp.add_argument("--figures", action="store_true", help="also render PNG figures next to the data files")

    a = sub.add_parser("example-a", help="scalar nonlinear system with related noises")
    common(a)
    a.add_argument("--unrelated", action="store_true", help="disable the process/measurement noise relatedness")
    a.add_argument("--dump-samples", action="store_true", help="write accepted Monte Carlo samples of run 0")

    b = sub.add_parser("example-b", help="linear system with a constant process noise")
    common(b)
    b.add_argument("--zero-noise", action="store_true", help="set both noise ranges to {0}")

    lc = sub.add_parser("lemma-check", help="randomized check of the range identities")
    lc.add_argument("--iterations", type=int, default=1000)
    lc.add_argument("--seed", type=int, default=0)
    lc.add_argument("--out", type=Path, default=None)
    return p


def _descriptor(args, example: str) -> experiments.RunDescriptor:
    base = {"example": example}
    if args.descriptor is not None:
        base = json.loads(args.descriptor.read_text(encoding="utf-8"))
        if base.get("example", example) != example:
            raise ValueError(f"descriptor is for example {base['example']!r}")
        base["example"] = example
    overrides = dict(steps=args.steps, runs=args.runs, samples=args.samples, seed=args.seed, engines=args.engines)
    if example == "a" and args.unrelated:
        overrides["related"] = False
    if example == "b" and args.zero_noise:
        overrides["zero_noise"] = True
    desc = experiments.RunDescriptor.from_json(base, **overrides)
    desc.out = str(args.out)
    desc.dump_samples = bool(getattr(args, "dump_samples", False))
    return desc


def cmd_example_a(args) -> int:
    desc = _descriptor(args, "a")
    try:
        summary = experiments.example_a(desc, workers=args.workers)
    except AcceptanceStarvation as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_STARVATION
    experiments.write_example_a(desc, summary, Path(desc.out), figures=args.figures)
    engines = list(summary.avg_diameter)
    print("k," + ",".join(f"avg_diam_{e}" for e in engines) + ",containment_violations")
    for k in summary.k:
        print(",".join([str(k)] + [experiments.fmt(summary.avg_diameter[e][k]) for e in engines] + [str(summary.violations_per_k[k])]))
    if summary.total_violations:
        print(f"containment violated in {summary.total_violations} run-steps", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_example_b(args) -> int:
    desc = _descriptor(args, "b")
    runs = experiments.example_b(desc, workers=args.workers)
    experiments.write_example_b(desc, runs, Path(desc.out), figures=args.figures)
    bad = 0
    for r in runs:
        if r.error:
            print(f"run {r.run}: {r.error}", file=sys.stderr)
            bad += 1
            continue
        for k in range(len(r.classical)):
            if not (r.contained(k) and r.truth_in("classical", k) and r.truth_in("optimal", k)):
                bad += 1
        marks = [k for k in (10, 20) if k < len(r.classical)] or [len(r.classical) - 1]
        print(f"run {r.run}: " + ", ".join(f"ratio(k={k}) = {experiments.fmt(r.ratio(k))}" for k in marks))
    return EXIT_VIOLATION if bad else EXIT_OK


def cmd_lemma_check(args) -> int:
    report = run_lemma_suite(args.iterations, args.seed)
    sys.stdout.write(format_report(report))
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "lemma_report.json").write_text(
            json.dumps(report.to_json(), sort_keys=True, indent=1) + "\n", encoding="utf-8", newline="\n"
        )
    for f in report.failures[:5]:
        print(json.dumps(f, sort_keys=True), file=sys.stderr)
    return EXIT_OK if report.ok else EXIT_VIOLATION


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"example-a": cmd_example_a, "example-b": cmd_example_b, "lemma-check": cmd_lemma_check}[args.command]
    try:
        return handler(args)
    except OSError as err:
        print(f"I/O error: {err}", file=sys.stderr)
        return EXIT_IO
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
