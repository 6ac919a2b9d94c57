"""Command-line front end: ``irreality-lab <subcommand> [options]``.

Exit codes: 0 success, 1 usage or parse error, 2 acceptance-threshold
violation, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .channels import dephase, state_distance
from .classical import classical_sequential, classical_unrevealed, random_distribution
from .experiments import DEFAULT_SAMPLES, PAPER_SAMPLES, ExperimentConfig, format_value, run_experiment
from .linalg import HermiticityError, NonConvergenceError
from .measures import MeasureReport, measure_report
from .qstate import RngStream, StateError, bloch_observable, bloch_state, load_spec, observable_from_spec, state_from_spec

EXIT_OK, EXIT_USAGE, EXIT_VIOLATION, EXIT_NUMERIC = 0, 1, 2, 3
FIGURES = {"fig1": "fig1", "fig2": "fig2", "fig3": "fig3", "fig4": "fig4", "mu-fit": "mu_fit", "verify": "verify"}
# the tolerance that --tol overrides for each experiment
TOL_KEYS = {
    "fig1": "closed_vs_numeric",
    "fig2": "closed_vs_numeric",
    "fig3": "numeric_ratio",
    "fig4": "spot_check",
    "mu_fit": None,
    "verify": None,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _samples(text: str):
    if text in ("default", "paper"):
        return text
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, 'default' or 'paper', got {text!r}") from None
    if n < 0:
        raise argparse.ArgumentTypeError("sample count must be nonnegative")
    return n


def _seed(text: str) -> int:
    try:
        n = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= n < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return n


def _positive_int(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return n


def _doc(arg: str) -> dict:
    # inline JSON or a path to a JSON file
    if arg.lstrip().startswith("{"):
        try:
            return json.loads(arg)
        except json.JSONDecodeError as exc:
            raise StateError(f"inline spec: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    path = Path(arg)
    if not path.is_file():
        raise StateError(f"{arg}: no such spec file")
    return load_spec(path)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="irreality-lab", description="Irreality and joint irreality of quantum observables.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    m = sub.add_parser("measure", help="evaluate every measure for a state and observables")
    m.add_argument("--state", required=True, help="state spec (JSON file or inline JSON)")
    m.add_argument("--x", required=True, help="observable X spec")
    m.add_argument("--y", help="observable Y spec (pair quantities need it)")
    m.add_argument("--local", nargs=2, metavar=("A", "B"), help="local observable specs for the symmetric discord")
    m.add_argument("--onesided", action="store_true", help="also minimize the one-sided discord (two qubits)")
    m.add_argument("--format", choices=("json", "csv"), default="json")
    m.add_argument("--log-base", choices=("2", "e"), default="2", help="entropy units: bits (2) or nats (e)")
    m.add_argument("--out", help="write the report to this file instead of stdout")

    for name in FIGURES:
        e = sub.add_parser(name, help=f"run the {name} experiment")
        e.add_argument("--seed", type=_seed, default=0)
        e.add_argument("--samples", type=_samples, default="default", help="n, 'default' or 'paper'")
        e.add_argument("--out", default=f"results/{FIGURES[name]}", help="output directory")
        e.add_argument("--tol", type=float, help="override the closed-form vs numeric tolerance")
        e.add_argument("--threads", type=_positive_int, default=1, help="worker processes (capped by IRREALITY_LAB_THREADS)")
        e.add_argument("--werner-sign", choices=("minus", "plus"), default="minus")
        e.add_argument("--lueders", action="store_true", help="use spectral projectors for the Werner observables")

    c = sub.add_parser("classical-demo", help="classical unrevealed measurement versus a qubit")
    c.add_argument("--grid", type=_positive_int, default=32, help="grid size n for an n x n distribution")
    c.add_argument("--seed", type=_seed, default=0)
    return p


def _report_text(report: MeasureReport, fmt: str, log_base: str) -> str:
    d = report.to_dict(log_base)
    if fmt == "json":
        return json.dumps({k: (None if v is None else float(format_value(v))) for k, v in d.items()}, indent=2)
    names = MeasureReport.field_names()
    return ",".join(names) + "\n" + ",".join(format_value(d[k]) for k in names)


def cmd_measure(args) -> int:
    rho = state_from_spec(_doc(args.state))
    x = observable_from_spec(_doc(args.x))
    y = observable_from_spec(_doc(args.y)) if args.y else None
    local = tuple(observable_from_spec(_doc(s)) for s in args.local) if args.local else None
    for name, obs in (("X", x), ("Y", y)):
        if obs is not None and obs.dim != rho.dim:
            raise StateError(f"observable {name} has dimension {obs.dim}, state has {rho.dim}")
    if (local or args.onesided) and rho.dims is None:
        raise StateError("correlation measures need a bipartite state")
    report = measure_report(rho, x, y, local=local, onesided=args.onesided)
    text = _report_text(report, args.format, args.log_base)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return EXIT_OK


def cmd_experiment(args) -> int:
    exp = FIGURES[args.command]
    if args.samples == "default":
        samples = DEFAULT_SAMPLES[exp]
    elif args.samples == "paper":
        samples = PAPER_SAMPLES[exp]
    else:
        samples = args.samples
    tolerances = {}
    if args.tol is not None:
        key = TOL_KEYS[exp]
        if key is None:
            raise UsageError(f"--tol is not used by {args.command}")
        tolerances[key] = args.tol
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise UsageError(f"cannot create output directory {out}: {exc}") from exc
    cfg = ExperimentConfig(
        exp,
        samples=samples,
        seed=args.seed,
        threads=args.threads,
        out_dir=out,
        werner_sign="-" if args.werner_sign == "minus" else "+",
        refined=not args.lueders,
        tolerances=tolerances,
    )
    result = run_experiment(cfg)
    for check in result.checks:
        status = "PASS" if check.passed else "FAIL"
        print(f"{status} {check.name}: {format_value(check.value)} (threshold {format_value(check.threshold)})"
              + (f" [{check.detail}]" if check.detail else ""))
    print(f"wrote {out}/{exp}.csv in {result.summary['duration_s']} s")
    return EXIT_OK if result.passed else EXIT_VIOLATION


def cmd_classical_demo(args) -> int:
    g = RngStream(args.seed, 0).generator()
    w = random_distribution((args.grid, args.grid), g)
    dev = {
        "q": np.max(np.abs(classical_unrevealed(w, "q") - w)),
        "p": np.max(np.abs(classical_unrevealed(w, "p") - w)),
        "q-then-p": np.max(np.abs(classical_sequential(w, "q-then-p") - w)),
        "p-then-q": np.max(np.abs(classical_sequential(w, "p-then-q") - w)),
    }
    for k, v in dev.items():
        print(f"classical {k}: max deviation {format_value(float(v))}")
    plus = bloch_state([1.0, 0.0, 0.0])
    quantum = state_distance(dephase(plus, bloch_observable([0.0, 0.0, 1.0])), plus)
    print(f"quantum |+><+| under sigma_z: Schatten-2 deviation {format_value(quantum)} (1/sqrt 2 = {format_value(1 / math.sqrt(2))})")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "measure":
            return cmd_measure(args)
        if args.command == "classical-demo":
            return cmd_classical_demo(args)
        return cmd_experiment(args)
    except NonConvergenceError as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (StateError, HermiticityError, UsageError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
