"""Command-line front end: ``agm <subcommand> [options]``.

Exit codes: 0 success, 1 usage or input error, 2 a conjectured inequality
was violated beyond tolerance (written to the violation ledger), 3 an
acceptance criterion failed in ``report-bundle``.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import io
from .expectations import DEFAULT_SAMPLES, InvalidSpecError, MatrixTuple
from .frames import frame_to_tuple, general_frame, harmonic_frame_2d
from .linalg import InvalidInputError

EXIT_OK, EXIT_INPUT, EXIT_VIOLATION, EXIT_ACCEPTANCE = 0, 1, 2, 3

CONJECTURE_NAMES = ("bias", "variance", "strong")
ALL_CHECKS = ("bias", "variance", "strong", "worst-case", "psd-order", "bhatia", "ncsos")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _threads(value: str):
    if value == "auto":
        return value
    try:
        n = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError("--threads takes a positive integer or 'auto'")
    if n < 1:
        raise argparse.ArgumentTypeError("--threads must be >= 1")
    return n


def _seed(value: str) -> int:
    try:
        s = int(value, 0)
    except ValueError:
        raise argparse.ArgumentTypeError("--seed takes an unsigned 64-bit integer")
    if not 0 <= s < 2**64:
        raise argparse.ArgumentTypeError("--seed must lie in [0, 2^64)")
    return s


def _keyvals(text: str) -> dict[str, int]:
    out = {}
    for part in text.split(","):
        key, sep, val = part.partition("=")
        if not sep:
            raise UsageError(f"expected key=value pairs, got {text!r}")
        try:
            out[key.strip()] = int(val)
        except ValueError:
            raise UsageError(f"{key.strip()} must be an integer in {text!r}")
    return out


def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    kw = {"default": argparse.SUPPRESS} if suppress else {}
    p.add_argument("--seed", type=_seed, **({"default": 0} if not suppress else kw),
                   help="master seed (unsigned 64-bit)")
    p.add_argument("--threads", type=_threads, **({"default": "auto"} if not suppress else kw),
                   help="worker threads (recorded; computation is vectorised)")
    p.add_argument("--out", **({"default": None} if not suppress else kw), help="output path")
    p.add_argument("--json", action="store_true", **kw, help="print machine-readable JSON")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="agm", parents=[_global_flags(False)],
                     description="Matrix arithmetic-geometric mean checks and incremental solver experiments.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = [_global_flags(True)]

    p = sub.add_parser("check", parents=common, help="check inequalities on a tuple or a random sweep")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--file", help="tuple JSON file")
    src.add_argument("--frames-2d", type=int, metavar="N", help="planar harmonic frame with N vectors")
    src.add_argument("--frame", metavar="d=D,n=N", help="d-dimensional harmonic frame")
    src.add_argument("--random-psd", metavar="n=N,d=D", help="seeded random PSD tuples")
    p.add_argument("--k", type=int, help="product length (default n; random per tuple in sweeps)")
    p.add_argument("--ineq", default="bias,variance",
                   help=f"comma list from {', '.join(ALL_CHECKS)} or 'all'")
    p.add_argument("--method", choices=("exact", "monte-carlo"), default="exact")
    p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    p.add_argument("--order", help="comma list of 1-based indices for the worst-case bound")
    p.add_argument("--sweeps", type=int, default=1, help="number of random tuples")
    p.add_argument("--ledger", default="violations.jsonl", help="JSON-lines violation ledger")

    p = sub.add_parser("frames", parents=common, help="generate a harmonic frame as a tuple file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, default=2)

    for name, helptext in (("kaczmarz", "randomized Kaczmarz experiment"),
                           ("igm", "LMS incremental gradient experiment")):
        p = sub.add_parser(name, parents=common, help=helptext)
        p.add_argument("--rows", choices=("harmonic", "general-frame", "haar", "gaussian", "file"),
                       default="harmonic")
        p.add_argument("--rows-file", help="n x d matrix (.npy or text) for --rows file")
        p.add_argument("--n", type=int, default=42)
        p.add_argument("--d", type=int, default=40)
        p.add_argument("--rho", type=float, default=0.01 if name == "igm" else 0.0)
        p.add_argument("--scheme", default="both",
                       help="wr, wo, row-norm-weighted, deterministic-cycle, or both (wr and wo)")
        p.add_argument("--weight-power", type=int, choices=(1, 2), default=2)
        p.add_argument("--epochs", type=int, default=3)
        p.add_argument("--trials", type=int, default=100)
        if name == "igm":
            p.add_argument("--gamma", type=float, help="constant step (default 0.5/max||a||^2)")
            p.add_argument("--step", choices=("constant", "harmonic"), default="constant")

    p = sub.add_parser("lambda", parents=common, help="lambda(n) series and brute-force alpha")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--bruteforce", action="store_true")

    p = sub.add_parser("wishart", parents=common, help="random PSD ensemble moments and bounds")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--r", type=int, default=2)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--dist", choices=("gaussian", "rademacher", "uniform-symmetric"), default="gaussian")
    p.add_argument("--samples", type=int, default=100_000)

    p = sub.add_parser("figure1", parents=common, help="with- vs without-replacement panels (CSV)")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--epochs", type=int, default=3)
    p.add_argument("--d", type=int, default=40)
    p.add_argument("--n", type=int, nargs="+", default=[42, 80])
    p.add_argument("--full-size", action="store_true", help="d = 100 with n = 105 and 200")

    p = sub.add_parser("report-bundle", parents=common, help="run the acceptance suite into a directory")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override an acceptance tolerance")
    p.add_argument("--only", help="comma list of criterion numbers")

    p = sub.add_parser("replay", parents=common, help="re-run the command recorded in a manifest")
    p.add_argument("manifest")
    return parser


# ------------------------------------------------------------------ helpers

def _emit(args, payload: dict, human: str | None = None) -> None:
    if args.json or human is None:
        print(io.dumps(payload))
    else:
        print(human)


def _write_with_manifest(args, argv, path, writer) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    writer(path)
    io.write_manifest(path, io.run_manifest(args.command, argv, _flags(args), args.seed))
    return path


def _flags(args) -> dict:
    return {k: v for k, v in vars(args).items() if k != "command"}


# ----------------------------------------------------------------- commands

def _tuple_from_args(args) -> tuple[MatrixTuple, str]:
    if args.file:
        return io.read_tuple(args.file), f"file {args.file}"
    if args.frames_2d is not None:
        return frame_to_tuple(harmonic_frame_2d(args.frames_2d)), f"planar harmonic frame n={args.frames_2d}"
    kv = _keyvals(args.frame)
    if set(kv) != {"d", "n"}:
        raise UsageError("--frame needs d=..,n=..")
    return frame_to_tuple(general_frame(kv["d"], kv["n"])), f"harmonic frame d={kv['d']} n={kv['n']}"


def _parse_ineq(text: str) -> list[str]:
    names = list(ALL_CHECKS) if text == "all" else [s.strip() for s in text.split(",") if s.strip()]
    unknown = [s for s in names if s not in ALL_CHECKS]
    if unknown or not names:
        raise UsageError(f"unknown inequality {unknown}; choose from {', '.join(ALL_CHECKS)} or all")
    return names


def cmd_check(args, argv) -> int:
    from .inequalities import (
        check_bhatia,
        check_worst_case_bound,
        conjecture_sweep,
        ncsos_witness_check,
        run_checks,
        symmetrized_order_check,
    )

    names = _parse_ineq(args.ineq)
    if args.random_psd:
        kv = _keyvals(args.random_psd)
        if set(kv) != {"n", "d"}:
            raise UsageError("--random-psd needs n=..,d=..")
        conj = [s for s in names if s in CONJECTURE_NAMES]
        if not conj:
            raise UsageError("random sweeps check bias, variance and/or strong")
        report = conjecture_sweep(args.sweeps, kv["n"], kv["d"], args.seed, conj, args.k,
                                  fixed_shape=True, ledger_path=args.ledger)
        payload = {"source": f"random PSD n={kv['n']} d={kv['d']}", "seed": args.seed, **report.to_dict()}
        if report.violation_count == 0:
            payload["ledger"] = None
        _maybe_write_json(args, argv, payload)
        _emit(args, payload, _human_sweep(payload))
        return EXIT_VIOLATION if report.violation_count else EXIT_OK

    t, source = _tuple_from_args(args)
    k = t.n if args.k is None else args.k
    verdicts: dict[str, dict] = {}
    conj = [s for s in names if s in CONJECTURE_NAMES]
    violations = []
    for name, v in run_checks(t, k, conj, args.method, args.samples, args.seed).items():
        verdicts[name] = v.to_dict()
        if not v.holds:
            violations.append({"inequality": name, "k": k, "seed": args.seed, "source": source,
                               "verdict": v.to_dict(), "tuple": io.tuple_to_dict(t)})
    if "worst-case" in names:
        order = [int(s) for s in args.order.split(",")] if args.order else None
        verdicts["worst-case"] = check_worst_case_bound(t, k, order).to_dict()
    if "psd-order" in names:
        verdicts["psd-order"] = {
            f"k={kk}": dict(zip(("holds", "witness_eigenvalue"), symmetrized_order_check(t, kk)))
            for kk in sorted({k, t.n})
        }
    for name, fn in (("bhatia", check_bhatia), ("ncsos", ncsos_witness_check)):
        if name in names:
            if t.n != 2:
                verdicts[name] = {"skipped": "two-matrix check needs n = 2"}
            elif name == "bhatia":
                verdicts[name] = fn(*t.stack).to_dict()
            else:
                w = fn(*t.stack)
                verdicts[name] = {"passed": w.passed, "identity_residual": w.identity_residual,
                                  "difference_min_eig": w.difference_min_eig,
                                  "q_eigenvalues": w.q_eigenvalues}
    if violations:
        io.append_jsonl(args.ledger, violations)
    payload = {"source": source, "n": t.n, "d": t.d, "k": k, "verdicts": verdicts,
               "violations": len(violations), "ledger": args.ledger if violations else None}
    _maybe_write_json(args, argv, payload)
    _emit(args, payload, _human_check(payload))
    return EXIT_VIOLATION if violations else EXIT_OK


def _human_check(p: dict) -> str:
    lines = [f"{p['source']}: n={p['n']} d={p['d']} k={p['k']}"]
    for name, v in p["verdicts"].items():
        if "status" in v:
            lines.append(f"  {name:<10} {v['status']:<12} lhs={v['lhs']:.12g} rhs={v['rhs']:.12g}")
        else:
            lines.append(f"  {name:<10} {json.dumps(v, default=io._default)}")
    if p["violations"]:
        lines.append(f"  {p['violations']} violation(s) appended to {p['ledger']}")
    return "\n".join(lines)


def _human_sweep(p: dict) -> str:
    lines = [f"{p['source']}: {p['tuples']} tuples, seed {p['seed']}"]
    for name, c in p["counts"].items():
        lines.append(f"  {name:<10} holds={c['holds']} inconclusive={c['inconclusive']} violated={c['violated']}")
    if p["violations"]:
        lines.append(f"  {p['violations']} violation(s) appended to {p['ledger']}")
    return "\n".join(lines)


def _maybe_write_json(args, argv, payload) -> None:
    if args.out:
        _write_with_manifest(args, argv, args.out, lambda path: io.write_json(path, payload))


def cmd_frames(args, argv) -> int:
    frame = harmonic_frame_2d(args.n) if args.d == 2 else general_frame(args.d, args.n)
    t = frame_to_tuple(frame)
    payload = {"kind": frame.kind, "n": frame.n, "d": frame.d,
               "tightness_residual": frame.tightness_residual(),
               "adjacent_inner_products": frame.adjacent_inner_products()}
    if args.out:
        _write_with_manifest(args, argv, args.out, lambda path: io.write_tuple(path, t))
        payload["tuple_file"] = str(args.out)
        _emit(args, payload, f"{frame.kind} frame n={frame.n} d={frame.d} written to {args.out}")
    elif args.json:
        _emit(args, payload)
    else:
        sys.stdout.write(io.tuple_to_json(t))
    return EXIT_OK


def _experiment(args, argv, method: str) -> int:
    from .solvers.iterative import make_instance, make_rows, run_igm, run_kaczmarz
    from .solvers.epoch_comparison import LONG_HEADER, SUMMARY_HEADER
    from .solvers.sampling import WO, WR, SamplerConfig

    if args.rows == "file":
        if not args.rows_file:
            raise UsageError("--rows file needs --rows-file")
        rows = _load_rows(args.rows_file)
    else:
        rows = make_rows(args.rows, args.n, args.d, args.seed)
    inst = make_instance(rows, args.rho, args.seed)
    schemes = [WO, WR] if args.scheme == "both" else [args.scheme]
    k = args.epochs * inst.n
    runs = []
    for scheme in schemes:
        sampler = SamplerConfig(scheme, args.seed, args.weight_power)
        if method == "kaczmarz":
            runs.append(run_kaczmarz(inst, sampler, k, args.trials))
        else:
            runs.append(run_igm(inst, sampler, k, args.trials, args.step, args.gamma))
    out = Path(args.out or "trace.csv")
    summary = out.with_name(out.stem + "_summary" + (out.suffix or ".csv"))
    _write_with_manifest(args, argv, out, lambda p: io.write_csv(
        p, LONG_HEADER, (r for run in runs for r in run.long_rows())))
    _write_with_manifest(args, argv, summary, lambda p: io.write_csv(
        p, SUMMARY_HEADER, (r for run in runs for r in run.summary_rows())))
    payload = {
        "method": method, "rows": args.rows, "n": inst.n, "d": inst.d, "rho": args.rho,
        "iterations": k, "trials": args.trials, "trace": str(out), "summary": str(summary),
        "median_final_error": {run.scheme: float(np.nanmedian(run.final_errors)) for run in runs},
        "diverged_trials": {run.scheme: sorted(run.diverged) for run in runs if run.diverged},
    }
    human = "\n".join([f"{method} on {args.rows} rows n={inst.n} d={inst.d}, {k} steps, {args.trials} trials"]
                      + [f"  {s:<34} median final error {e:.6g}"
                         for s, e in payload["median_final_error"].items()]
                      + [f"  trace {out}, summary {summary}"])
    _emit(args, payload, human)
    return EXIT_OK


def _load_rows(path: str) -> np.ndarray:
    try:
        rows = np.load(path) if path.endswith(".npy") else np.loadtxt(path, delimiter=None if not path.endswith(".csv") else ",", ndmin=2)
    except (OSError, ValueError) as exc:
        raise InvalidInputError(f"cannot read rows from {path}: {exc}") from exc
    if rows.ndim != 2:
        raise InvalidInputError("rows file must hold an n x d matrix")
    return rows


def cmd_lambda(args, argv) -> int:
    from .combinatorics import lambda_value

    if args.n < 3:
        raise UsageError("--n must be >= 3")
    if args.bruteforce and args.n > 7:
        raise UsageError("brute force enumeration supports n <= 7")
    lv = lambda_value(args.n, bruteforce=args.bruteforce or args.n <= 7)
    payload = lv.to_dict()
    _maybe_write_json(args, argv, payload)
    human = f"lambda({args.n}) = {payload['series_exact']} = {lv.series_value:.15g}"
    if lv.alpha_bruteforce is not None:
        human += f"\nalpha({args.n}) = {lv.alpha_bruteforce:.15g}; 2^n alpha = {lv.scaled_alpha:.15g}"
    _emit(args, payload, human)
    return EXIT_OK


def cmd_wishart(args, argv) -> int:
    from . import randmat as rm

    dist = rm.EntryDistribution(args.dist, args.sigma)
    spec = rm.EnsembleSpec(args.d, args.r, args.n, dist, args.seed)
    m1 = rm.mc_mean_moment(spec, args.samples)
    m2 = rm.mc_square_moment(spec, args.samples)
    z = rm.zeta(spec)
    patterns = {}
    for name, idx in (("same-pair-diagonal", (0, 0, 0, 0)), ("same-pair-offdiagonal", (0, 1, 0, 1)),
                      ("distinct-diagonal", (0, 0, 1, 1)), ("mismatched", (0, 0, 0, 1))):
        if max(idx) < args.d:
            est = rm.mc_entry_pair_moment(spec, idx, args.samples)
            patterns[name] = {"closed_form": rm.fourth_moment_entry(spec, name),
                              "monte_carlo": float(est.mean), "stderr": float(est.stderr)}
    bounds = rm.wishart_gap_bounds(args.k, args.r, args.d, args.sigma)
    payload = {
        "dist": args.dist, "sigma": args.sigma, "xi4": dist.xi4, "d": args.d, "r": args.r, "n": args.n,
        "samples": args.samples,
        "mean": {"closed_form": args.r * args.sigma**2, "monte_carlo": m1.mean, "stderr": m1.stderr},
        "square": {"zeta": z, "monte_carlo": m2.mean, "stderr": m2.stderr},
        "entry_pairs": patterns,
        "jensen_p2": rm.jensen_moment_check(dist, 2, args.samples, args.seed).to_dict(),
        "bounds": bounds._asdict(),
        "bounds_intermediate_log": rm.wishart_intermediate_log(args.k, args.r, args.d),
    }
    if args.k <= args.n:
        payload["ensemble_bias"] = rm.ensemble_bias_check(spec, args.k, min(args.samples, 20_000)).to_dict()
    _maybe_write_json(args, argv, payload)
    _emit(args, payload)
    return EXIT_OK


def cmd_figure1(args, argv) -> int:
    from .solvers.epoch_comparison import run_epoch_comparison, write_panel_csv

    results = run_epoch_comparison(args.trials, args.epochs, args.seed, args.full_size, args.d, args.n)
    outdir = Path(args.out or "figure1")
    files = []
    for res in results:
        for path in write_panel_csv(res, outdir):
            io.write_manifest(path, io.run_manifest(args.command, argv, _flags(args), args.seed))
            files.append(str(path))
    panels = [r.to_dict() for r in results]
    payload = {"panels": panels, "files": files}
    io.write_json(outdir / "figure1.json", {"panels": panels})
    io.write_manifest(outdir / "figure1.json", io.run_manifest(args.command, argv, _flags(args), args.seed))
    human = "\n".join(f"  {p['panel']:<24} median wo {p['median_final_wo']:.6g}  wr {p['median_final_wr']:.6g}"
                      f"  {'wo <= wr' if p['wo_not_worse'] else 'wo > wr'}" for p in panels)
    _emit(args, payload, f"figure1 panels written to {outdir}\n{human}")
    return EXIT_OK


def cmd_report_bundle(args, argv) -> int:
    from .acceptance import CRITERIA, DEFAULT_TOLERANCES, format_result, run_criterion

    overrides = {}
    for item in args.set:
        key, sep, val = item.partition("=")
        if not sep or key not in DEFAULT_TOLERANCES:
            raise UsageError(f"--set needs KEY=VALUE with KEY in {sorted(DEFAULT_TOLERANCES)}")
        try:
            overrides[key] = float(val)
        except ValueError:
            raise UsageError(f"--set {key} needs a number")
    numbers = sorted(CRITERIA) if not args.only else [int(s) for s in args.only.split(",")]
    if any(n not in CRITERIA for n in numbers):
        raise UsageError(f"criteria are numbered {min(CRITERIA)}..{max(CRITERIA)}")
    outdir = Path(args.out or "bundle")
    outdir.mkdir(parents=True, exist_ok=True)
    ledger = outdir / "violations.jsonl"
    if ledger.exists():
        ledger.unlink()
    manifest = io.run_manifest(args.command, argv, _flags(args), args.seed)
    summary = []
    for n in numbers:
        extra = {"ledger_path": ledger} if n == 9 else {}
        res = run_criterion(n, args.seed, overrides, **extra)
        record = res.to_dict()
        record.pop("seconds")
        path = outdir / f"criterion_{n:02d}.json"
        io.write_json(path, record)
        io.write_manifest(path, manifest)
        summary.append({"criterion": n, "title": res.title, "passed": res.passed})
        if not args.json:
            print(format_result(res))
    if ledger.exists():
        io.write_manifest(ledger, manifest)
    findings = ledger.read_text().count("\n") if ledger.exists() else 0
    all_passed = all(s["passed"] for s in summary)
    payload = {"seed": args.seed, "overrides": overrides, "criteria": summary,
               "all_passed": all_passed, "sweep_violations_ledgered": findings}
    io.write_json(outdir / "summary.json", payload)
    io.write_manifest(outdir / "summary.json", manifest)
    if args.json:
        print(io.dumps(payload))
    else:
        print(f"{sum(s['passed'] for s in summary)}/{len(summary)} criteria passed; bundle in {outdir}")
    return EXIT_OK if all_passed else EXIT_ACCEPTANCE


def cmd_replay(args, argv) -> int:
    try:
        manifest = json.loads(Path(args.manifest).read_text())
        recorded = manifest["argv"]
    except (OSError, ValueError, KeyError) as exc:
        raise InvalidInputError(f"cannot read manifest {args.manifest}: {exc}") from exc
    if recorded and recorded[0] == "replay":
        raise UsageError("refusing to replay a replay")
    return main(recorded)


COMMANDS = {
    "check": cmd_check,
    "frames": cmd_frames,
    "kaczmarz": lambda a, v: _experiment(a, v, "kaczmarz"),
    "igm": lambda a, v: _experiment(a, v, "igm"),
    "lambda": cmd_lambda,
    "wishart": cmd_wishart,
    "figure1": cmd_figure1,
    "report-bundle": cmd_report_bundle,
    "replay": cmd_replay,
}


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args, argv)
    except (UsageError, InvalidInputError, InvalidSpecError, OSError) as exc:
        print(f"agm {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"agm {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
