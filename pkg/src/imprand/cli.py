"""Command-line surface: batch analysis, interval estimation, sequence
generation, verification and running averages.

Exit codes: 0 success, 1 parse or I/O error, 2 model-invariant violation,
3 deficiency at or above the threshold (analyze only).  Every run is a pure
function of its input files, flags and seed.  The optional IMPRAND_THREADS
environment variable caps internal worker threads.
"""

from __future__ import annotations

import argparse
import json
import os
import sys as _sys
from typing import List, Optional

from imprand.analysis import (
    check_running_average,
    estimate_interval,
    run_battery,
)
from imprand.core import (
    Gamble,
    ImprandError,
    ModelInvariantError,
    ProbabilityMassFunction,
    SpaceMismatchError,
    format_rational,
    parse_rational,
)
from imprand.lowerexp import LinearModel, check_coherence
from imprand.martingale import (
    LLNStrategyParams,
    SelectionProcess,
    classify_process,
    from_multiplier,
    lln_strategy,
)
from imprand.modelio import (
    ParseError,
    load_battery,
    load_gamble,
    load_model,
    load_system,
    write_trajectory_csv,
)
from imprand.sequences import GeneratorSpec, generate, read_sequence, write_sequence

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_INVARIANT = 2
EXIT_THRESHOLD = 3


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags; route through the parse-error code path
    def error(self, message):
        raise ParseError(message)


def _max_threads() -> int:
    raw = os.environ.get("IMPRAND_THREADS")
    if raw is None:
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise ParseError(f"IMPRAND_THREADS must be a positive integer, got {raw!r}")
    if value < 1:
        raise ParseError(f"IMPRAND_THREADS must be a positive integer, got {raw!r}")
    return value


def _emit(obj: dict, out: Optional[str]) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        _sys.stdout.write(text)


def _build_processes(entries, system):
    return tuple(
        lln_strategy(e, system) if isinstance(e, LLNStrategyParams) else e
        for e in entries
    )


def _parse_selection(text: str) -> SelectionProcess:
    if text == "all":
        return SelectionProcess.all_ones()
    parts = text.split(":")
    if len(parts) == 3 and parts[0] == "residue":
        try:
            return SelectionProcess.residue_class(int(parts[1]), int(parts[2]))
        except ValueError:
            pass
    raise ParseError(f"selection must be 'all' or 'residue:m:i', got {text!r}")


def _cmd_analyze(args) -> int:
    system = load_system(args.system)
    battery = _build_processes(load_battery(args.battery, system.space), system)
    prefix = read_sequence(args.sequence, system.space)
    trajectory = run_battery(
        prefix,
        system,
        battery,
        audit_depth=args.audit_depth,
        threads=_max_threads(),
    )
    report = {
        "steps": len(prefix),
        "strategies": len(battery),
        "deficiency_bits": trajectory.deficiency_bits,
        "threshold_bits": args.threshold_bits,
        "exceeded": trajectory.deficiency_bits >= args.threshold_bits,
        "mixture_max": format_rational(trajectory.running_max[-1]),
        "argmax_step": trajectory.argmax_step,
    }
    if args.out:
        if args.format == "csv":
            write_trajectory_csv(trajectory, args.out)
        else:
            _emit(report, args.out)
    print(
        f"deficiency {trajectory.deficiency_bits:.6f} bits over {len(prefix)} steps "
        f"({len(battery)} strategies)"
    )
    return EXIT_THRESHOLD if report["exceeded"] else EXIT_OK


def _cmd_estimate_interval(args) -> int:
    f = load_gamble(args.gamble)
    prefix = read_sequence(args.sequence, f.space)
    try:
        moduli = tuple(int(m) for m in args.selection_moduli.split(","))
        grid_step = parse_rational(args.grid_step)
    except (ValueError, ModelInvariantError) as exc:
        raise ParseError(str(exc)) from None
    estimate = estimate_interval(
        prefix,
        f,
        threshold_bits=args.threshold_bits,
        grid_step=grid_step,
        selection_moduli=moduli,
    )
    report = {
        "gamble": [format_rational(v) for v in f.values],
        "lo_accept": format_rational(estimate.lo_accept),
        "hi_accept": format_rational(estimate.hi_accept),
        "threshold_bits": estimate.threshold_bits,
        "grid_step": format_rational(estimate.grid_step),
        "lower_grid": [
            {
                "gamma": format_rational(p.gamma),
                "raw_bits": p.raw_bits,
                "repaired_bits": p.repaired_bits,
                "accepted": p.accepted,
            }
            for p in estimate.lower_grid
        ],
        "upper_grid": [
            {
                "gamma": format_rational(p.gamma),
                "raw_bits": p.raw_bits,
                "repaired_bits": p.repaired_bits,
                "accepted": p.accepted,
            }
            for p in estimate.upper_grid
        ],
    }
    _emit(report, args.out)
    print(
        f"accepted interval [{format_rational(estimate.lo_accept)}, "
        f"{format_rational(estimate.hi_accept)}]"
    )
    return EXIT_OK


def _pmfs_from_model_file(path) -> List[ProbabilityMassFunction]:
    from imprand.modelio import _load_json, model_from_dict

    obj = _load_json(path)
    items = obj if isinstance(obj, list) else [obj]
    pmfs = []
    for i, item in enumerate(items):
        model = model_from_dict(item, context=f"{path}[{i}]")
        if not isinstance(model, LinearModel):
            raise ParseError(f"{path}[{i}]: generation needs linear models")
        pmfs.append(model.pmf)
    return pmfs


def _cmd_generate(args) -> int:
    if args.kind in ("iid", "cyclic"):
        if not args.models:
            raise ParseError(f"--models is required for kind {args.kind}")
        pmfs = _pmfs_from_model_file(args.models)
        if args.kind == "iid":
            if len(pmfs) != 1:
                raise ParseError("iid generation takes exactly one mass function")
            spec = GeneratorSpec.iid(pmfs[0], args.length, args.seed)
        else:
            spec = GeneratorSpec.cyclic(pmfs, args.length, args.seed)
    else:
        if not args.system or not args.battery:
            raise ParseError("adversarial generation needs --system and --battery")
        system = load_system(args.system)
        battery = _build_processes(load_battery(args.battery, system.space), system)
        spec = GeneratorSpec.adversarial(system, battery, args.length)
    prefix = generate(spec)
    write_sequence(prefix, args.out)
    print(f"wrote {len(prefix)} symbols to {args.out}")
    return EXIT_OK


def _default_probes(space) -> List[Gamble]:
    indicators = [Gamble.indicator(space, t) for t in space.symbols]
    probes = list(indicators)
    probes.extend(-g for g in indicators)
    probes.append(Gamble.constant(space, 1))
    for i in range(len(indicators)):
        for j in range(i + 1, len(indicators)):
            probes.append(indicators[i] - indicators[j])
    return probes


def _cmd_verify(args) -> int:
    if not args.model and not args.system:
        raise ParseError("verify needs --model and/or --system with --battery")
    report: dict = {}
    ok = True

    if args.model:
        model = load_model(args.model)
        coherence = check_coherence(model, _default_probes(model.space))
        report["coherence"] = {
            "ok": coherence.ok,
            "violations": [
                {"axiom": v.axiom, "detail": v.detail} for v in coherence.violations
            ],
        }
        ok = ok and coherence.ok

    if args.system:
        if not args.battery:
            raise ParseError("verify --system needs --battery")
        system = load_system(args.system)
        battery = _build_processes(load_battery(args.battery, system.space), system)
        classifications = []
        for i, member in enumerate(battery):
            c = classify_process(from_multiplier(member), system, args.depth)
            classifications.append(
                {
                    "strategy": i,
                    "depth": c.depth,
                    "supermartingale": c.supermartingale,
                    "strict": c.strict,
                    "submartingale": c.submartingale,
                    "non_negative": c.non_negative,
                    "test": c.test,
                    "witnesses": [
                        {"situation": list(tokens), "value": value}
                        for tokens, value in c.witnesses
                    ],
                }
            )
            ok = ok and c.test
        report["classification"] = classifications

    report["ok"] = ok
    _emit(report, args.out)
    return EXIT_OK if ok else EXIT_INVARIANT


def _cmd_average(args) -> int:
    f = load_gamble(args.gamble)
    system = load_system(args.system)
    prefix = read_sequence(args.sequence, f.space)
    selection = _parse_selection(args.selection)
    result = check_running_average(prefix, f, selection, system)

    def fmt(v):
        return None if v is None else format_rational(v)

    report = {
        "selected_count": result.selected_count,
        "average": fmt(result.average),
        "average_above_lower": fmt(result.average_above_lower),
        "average_below_upper": fmt(result.average_below_upper),
        "lower_margin": fmt(result.lower_margin),
        "upper_margin": fmt(result.upper_margin),
    }
    _emit(report, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="imprand",
        description=(
            "Betting-based randomness analysis of finite-alphabet sequences "
            "against imprecise probability models."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", help="run a strategy battery along data")
    analyze.add_argument("--system", required=True)
    analyze.add_argument("--battery", required=True)
    analyze.add_argument("--sequence", required=True)
    analyze.add_argument("--threshold-bits", type=float, default=10.0)
    analyze.add_argument("--audit-depth", type=int, default=None)
    analyze.add_argument("--out")
    analyze.add_argument("--format", choices=("csv", "json"), default="csv")
    analyze.set_defaults(handler=_cmd_analyze)

    est = sub.add_parser(
        "estimate-interval", help="accepted expectation interval for a gamble"
    )
    est.add_argument("--gamble", required=True)
    est.add_argument("--sequence", required=True)
    est.add_argument("--threshold-bits", type=float, default=10.0)
    est.add_argument("--grid-step", default="1/16")
    est.add_argument("--selection-moduli", default="1,2,3,4")
    est.add_argument("--out")
    est.set_defaults(handler=_cmd_estimate_interval)

    gen = sub.add_parser("generate", help="produce a test sequence")
    gen.add_argument("--kind", choices=("iid", "cyclic", "adversarial"), required=True)
    gen.add_argument("--models")
    gen.add_argument("--system")
    gen.add_argument("--battery")
    gen.add_argument("--length", type=int, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)
    gen.set_defaults(handler=_cmd_generate)

    verify = sub.add_parser("verify", help="coherence and supermartingale checks")
    verify.add_argument("--model")
    verify.add_argument("--system")
    verify.add_argument("--battery")
    verify.add_argument("--depth", type=int, default=6)
    verify.add_argument("--out")
    verify.set_defaults(handler=_cmd_verify)

    avg = sub.add_parser("average", help="selected running averages of a gamble")
    avg.add_argument("--gamble", required=True)
    avg.add_argument("--system", required=True)
    avg.add_argument("--sequence", required=True)
    avg.add_argument("--selection", default="all")
    avg.add_argument("--out")
    avg.set_defaults(handler=_cmd_average)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.handler(args)
    except (ModelInvariantError, SpaceMismatchError) as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_INVARIANT
    except (ParseError, ImprandError, OSError) as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    raise SystemExit(main())
