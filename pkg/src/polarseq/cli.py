"""Command-line front end.

Subcommands
-----------
upo          cover edges of the universal partial order (text or DOT)
seq          reliability sequence from a base value, a base interval, or a
             channel oracle
breakpoints  order breakpoints with witness polynomials
refine       narrow a base interval from pair decisions or an oracle
oracle       per-index reliability metrics as CSV
simulate     Monte-Carlo BLER runs driven by a config file
study        doubling-step interval convergence table

All real numbers print with six decimals so outputs are byte-stable.
Exit codes: 0 success, 2 usage error, 3 infeasible or ill-conditioned
computation.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from polarseq import beta_expansion as bx
from polarseq import oracles, partial_order, simulation
from polarseq.codec import select_frozen
from polarseq.partial_order import Relation

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_COMPUTE = 3

_CONFIG_KEYS = {
    "n", "k", "crc", "list", "modulation", "snr_db", "seed",
    "max_trials", "target_errors", "construction",
}


class UsageError(Exception):
    pass


def _write(text: str, output: str | None) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        Path(output).write_text(text, newline="\n")


def _parse_interval(text: str) -> bx.BetaInterval:
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError(f"interval must be 'lo,hi', got {text!r}")
    try:
        lo = float(parts[0])
        hi = math.inf if parts[1].strip() in ("inf", "+inf") else float(parts[1])
        return bx.BetaInterval(lo, hi)
    except ValueError as exc:
        raise UsageError(f"bad interval {text!r}: {exc}") from exc


def _parse_decision(text: str) -> tuple[tuple[int, int], Relation]:
    for sep, flip in (("<", False), (">", True)):
        if sep in text:
            a_txt, _, b_txt = text.partition(sep)
            try:
                a, b = int(a_txt), int(b_txt)
            except ValueError as exc:
                raise UsageError(f"bad decision {text!r}") from exc
            if flip:
                a, b = b, a
            # now a is declared less reliable than b
            x, y = min(a, b), max(a, b)
            rel = Relation.LESS if (a, b) == (x, y) else Relation.GREATER
            return (x, y), rel
    raise UsageError(f"decision {text!r} needs '<' or '>'")


def _sequence_from_source(args) -> tuple[bx.ReliabilitySequence, str]:
    if args.beta is not None:
        seq = bx.rank_by_pw(args.n, args.beta)
        return seq, f"{args.beta:.6f}"
    if args.interval is not None:
        interval = _parse_interval(args.interval)
        seq = bx.order_for_interval(args.n, interval)
        hi = "inf" if math.isinf(interval.hi) else f"{interval.hi:.6f}"
        return seq, f"({interval.lo:.6f},{hi})"
    if args.oracle == "ga":
        rel = oracles.ga_reliability(args.n, args.snr)
        return oracles.oracle_order(rel), f"ga:{args.snr:.6f}"
    rel = oracles.bec_reliability(args.n, args.eps)
    return oracles.oracle_order(rel), f"bec:{args.eps:.6f}"


def _build_sequence(n: int, construction: str) -> bx.ReliabilitySequence:
    kind, _, value = construction.partition(":")
    try:
        num = float(value)
    except ValueError as exc:
        raise UsageError(f"bad construction {construction!r}") from exc
    if kind == "beta":
        return bx.rank_by_pw(n, num)
    if kind == "ga":
        return oracles.oracle_order(oracles.ga_reliability(n, num))
    if kind == "bec":
        return oracles.oracle_order(oracles.bec_reliability(n, num))
    raise UsageError(f"unknown construction kind {kind!r}")


def _parse_sim_config(text: str) -> dict:
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise UsageError(f"config line {lineno}: expected 'key = value'")
        key, _, value = stripped.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _CONFIG_KEYS:
            raise UsageError(f"config line {lineno}: unknown key {key!r}")
        if key in raw:
            raise UsageError(f"config line {lineno}: duplicate key {key!r}")
        raw[key] = value
    for required in ("n", "k", "snr_db", "construction"):
        if required not in raw:
            raise UsageError(f"config is missing required key {required!r}")
    try:
        cfg = {
            "n": int(raw["n"]),
            "k": int(raw["k"]),
            "crc": int(raw.get("crc", "0")),
            "list": int(raw.get("list", "1")),
            "modulation": raw.get("modulation", "bpsk").lower(),
            "snr_db": tuple(float(v) for v in raw["snr_db"].split(",")),
            "seed": int(raw.get("seed", "0")),
            "max_trials": int(raw.get("max_trials", "10000")),
            "target_errors": int(raw.get("target_errors", "100")),
            "construction": raw["construction"],
        }
    except ValueError as exc:
        raise UsageError(f"bad config value: {exc}") from exc
    return cfg


def _cmd_upo(args) -> int:
    poset = partial_order.cover_edges(args.n)
    if args.format == "edges":
        _write(partial_order.to_edge_list(poset), args.output)
    else:
        _write(partial_order.to_dot(poset), args.output)
    return EXIT_OK


def _cmd_seq(args) -> int:
    seq, label = _sequence_from_source(args)
    _write(bx.format_sequence_file(seq, label), args.output)
    return EXIT_OK


def _cmd_breakpoints(args) -> int:
    _write(bx.format_breakpoint_report(bx.breakpoints(args.n)), args.output)
    return EXIT_OK


def _cmd_refine(args) -> int:
    interval = _parse_interval(args.interval)
    if args.decide:
        decisions = [_parse_decision(d) for d in args.decide]
    else:
        rel = (oracles.ga_reliability(args.n, args.snr) if args.oracle == "ga"
               else oracles.bec_reliability(args.n, args.eps))
        pairs = bx.constraining_pairs(args.n, interval)
        decisions = oracles.decide_pairs(sorted({(x, y) for x, y, _ in pairs}), rel)
    refined = bx.refine_interval(args.n, interval, decisions)
    lines = []
    for (x, y), rel_ in decisions:
        arrow = "<" if rel_ is Relation.LESS else ">"
        lines.append(f"pair\t{x}{arrow}{y}")
    hi = "inf" if math.isinf(refined.hi) else f"{refined.hi:.6f}"
    lines.append(f"interval\t{refined.lo:.6f}\t{hi}")
    _write("\n".join(lines) + "\n", args.output)
    return EXIT_OK


def _cmd_oracle(args) -> int:
    rel = (oracles.ga_reliability(args.n, args.snr) if args.type == "ga"
           else oracles.bec_reliability(args.n, args.eps))
    _write(oracles.to_csv(rel), args.output)
    return EXIT_OK


def _cmd_simulate(args) -> int:
    cfg = _parse_sim_config(Path(args.config).read_text())
    if args.seed is not None:
        cfg["seed"] = args.seed
    try:
        seq = _build_sequence(cfg["n"], cfg["construction"])
        code = select_frozen(seq, cfg["k"], cfg["crc"], cfg["list"])
        sim = simulation.SimConfig(
            code=code,
            modulation=cfg["modulation"],
            snr_points_db=cfg["snr_db"],
            max_trials=cfg["max_trials"],
            target_errors=cfg["target_errors"],
            seed=cfg["seed"],
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    points = simulation.run_bler(sim)
    _write(simulation.format_bler_csv(points), args.output)
    if args.plot_dir:
        from polarseq.plotting import save_bler_figure

        Path(args.plot_dir).mkdir(parents=True, exist_ok=True)
        save_bler_figure({cfg["construction"]: points},
                         str(Path(args.plot_dir) / "bler.png"))
    return EXIT_OK


def _cmd_study(args) -> int:
    grid = tuple(float(v) for v in args.snr_grid.split(","))
    steps = simulation.convergence_study(args.n_max, grid)
    _write(simulation.format_study_tsv(steps), args.output)
    if args.plot_dir and steps:
        from polarseq.plotting import save_study_figure

        Path(args.plot_dir).mkdir(parents=True, exist_ok=True)
        save_study_figure(steps, str(Path(args.plot_dir) / "interval_convergence.png"))
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polarseq",
        description="polar code construction and evaluation toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("upo", help="cover edges of the universal partial order")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--format", choices=("edges", "dot"), default="edges")
    p.add_argument("-o", "--output")
    p.set_defaults(func=_cmd_upo)

    p = sub.add_parser("seq", help="write a reliability sequence")
    p.add_argument("--n", type=int, required=True)
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--beta", type=float)
    source.add_argument("--interval")
    source.add_argument("--oracle", choices=("ga", "bec"))
    p.add_argument("--snr", type=float, default=2.0)
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("-o", "--output")
    p.set_defaults(func=_cmd_seq)

    p = sub.add_parser("breakpoints", help="order breakpoints with witnesses")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("-o", "--output")
    p.set_defaults(func=_cmd_breakpoints)

    p = sub.add_parser("refine", help="narrow a base interval")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--interval", required=True)
    p.add_argument("--decide", action="append",
                   help="pair decision such as '8<3' (repeatable)")
    p.add_argument("--oracle", choices=("ga", "bec"), default="ga")
    p.add_argument("--snr", type=float, default=2.0)
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("-o", "--output")
    p.set_defaults(func=_cmd_refine)

    p = sub.add_parser("oracle", help="per-index reliability metrics as CSV")
    p.add_argument("--type", choices=("ga", "bec"), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--snr", type=float, default=2.0)
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("-o", "--output")
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("simulate", help="Monte-Carlo BLER from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--plot-dir")
    p.add_argument("-o", "--output")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("study", help="interval convergence table")
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--snr-grid", default="-2,0,2,4,6")
    p.add_argument("--plot-dir")
    p.add_argument("-o", "--output")
    p.set_defaults(func=_cmd_study)

    return parser


def _validate(args) -> None:
    if args.command == "upo" and not 1 <= args.n <= 10:
        raise UsageError(f"upo needs 1 <= n <= 10, got {args.n}")
    if args.command in ("seq", "breakpoints", "refine", "oracle"):
        if not 1 <= args.n <= 12:
            raise UsageError(f"{args.command} needs 1 <= n <= 12, got {args.n}")
    if args.command == "study" and not 1 <= args.n_max <= 10:
        raise UsageError(f"study needs 1 <= n_max <= 10, got {args.n_max}")


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        _validate(args)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (bx.IllConditionedBetaError, bx.AmbiguousIntervalError,
            bx.InfeasibleConstraintsError, oracles.UndecidablePairError) as exc:
        message = str(exc)
        if isinstance(exc, bx.IllConditionedBetaError):
            pair = exc.pair
            p = bx.diff_polynomial(
                partial_order.ChannelIndex(pair[0], _pair_width(pair)),
                partial_order.ChannelIndex(pair[1], _pair_width(pair)),
            )
            roots = bx.roots_in_unit_to_two(p)
            if roots:
                message += f"; nearest breakpoint {roots[0]:.9f}"
        print(f"error: {message}", file=sys.stderr)
        return EXIT_COMPUTE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def _pair_width(pair: tuple[int, int]) -> int:
    return max(2, max(pair).bit_length())


def entry_point() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
