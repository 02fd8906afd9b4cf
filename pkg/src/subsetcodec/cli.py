"""Command-line front end.

Exit codes: 0 success or unique decode, 1 bad input, 2 ambiguous decode,
3 no consistent sequence, 4 failed verification.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__, counting, ratefuncs
from .codec import (
    AMBIGUOUS, NOT_FOUND, SCHEMES, EncodedMessage, JointDistribution, decode, encode,
)
from .experiments import SweepConfig, level_for_rate, run_ambiguity_sweep
from .instance import SourceSequence, WeightSet
from .verify import SUITES, run_suite

EXIT_OK, EXIT_INPUT, EXIT_AMBIGUOUS, EXIT_NOT_FOUND, EXIT_VERIFY = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INPUT)


def _load_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}")


def _emit(obj, out: str | None) -> None:
    text = json.dumps(obj, sort_keys=True)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _echo_config(args) -> None:
    """Resolved flags, defaults included, go to stderr as one JSON line."""
    resolved = {k: v for k, v in vars(args).items() if k != "func"}
    print(json.dumps({"config": resolved, "version": __version__}, sort_keys=True),
          file=sys.stderr)


def _parse_tau(text: str) -> list[int]:
    text = text.strip()
    if set(text) <= {"+", "-"}:
        return [1 if c == "+" else -1 for c in text]
    return [int(x) for x in text.replace(",", " ").split()]


# --------------------------------------------------------------------------


def cmd_encode(args) -> int:
    weights = WeightSet.from_json(_load_json(args.weights))
    k = args.k if args.scheme == "kary" else None
    seq = SourceSequence.from_string(args.seq, k)
    msg = encode(args.scheme, seq, weights)
    _emit(msg.to_json(), args.out)
    return EXIT_OK


def cmd_decode(args) -> int:
    weights = WeightSet.from_json(_load_json(args.weights))
    msg = EncodedMessage.from_json(_load_json(args.message))
    tau = joint = None
    if msg.scheme == "side_info":
        if args.tau is None or args.joint is None:
            raise UsageError("side_info decoding needs --tau and --joint")
        tau = _parse_tau(args.tau)
        joint = JointDistribution.from_json(_load_json(args.joint))
    out = decode(msg, weights, args.strategy, args.max_witnesses, tau=tau, joint=joint)
    _emit(out.to_json(), args.out)
    return {AMBIGUOUS: EXIT_AMBIGUOUS, NOT_FOUND: EXIT_NOT_FOUND}.get(out.kind, EXIT_OK)


def _level(args) -> int:
    if args.L is not None:
        return args.L
    if args.rate is None:
        raise UsageError("give --L or --rate")
    return level_for_rate(args.n, args.rate)


def cmd_count(args) -> int:
    L = _level(args)
    if args.what == "lambda":
        table = counting.lambda_table(args.n, L)
        lines = ["s,count"] + [f"{s},{c}" for s, c in sorted(table.counts.items())]
        text = "\n".join(lines) + "\n"
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
        return EXIT_OK
    if args.scheme == "constrained":
        n_plus = args.n_plus if args.n_plus is not None else int(round(args.p * args.n))
        res = counting.expected_omega_constrained(n_plus, args.n - n_plus, L, args.method)
    elif args.scheme == "unconstrained":
        res = counting.expected_omega_unconstrained(args.n, args.p, L, args.method)
    else:
        raise UsageError("omega counting covers the constrained and unconstrained schemes")
    _emit(res.to_json(), args.out)
    return EXIT_OK


def _grid(text: str) -> list[float]:
    try:
        if ":" in text:
            start, stop, step = (float(x) for x in text.split(":"))
            if step <= 0:
                raise ValueError
            count = int(round((stop - start) / step)) + 1
            return [start + i * step for i in range(count)]
        return [float(x) for x in text.split(",")]
    except ValueError:
        raise UsageError(f"bad grid {text!r}; use start:stop:step or a comma list")


def cmd_ratefunc(args) -> int:
    rows = ratefuncs.tabulate(args.name, _grid(args.grid))
    text = "x,value\n" + "".join(f"{x:.12g},{v:.17g}\n" for x, v in rows)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def read_config(path: str) -> dict:
    raw = Path(path).read_bytes()
    if path.endswith(".toml"):
        if sys.version_info >= (3, 11):
            import tomllib
        else:
            import tomli as tomllib
        try:
            return tomllib.loads(raw.decode())
        except tomllib.TOMLDecodeError as exc:
            raise UsageError(f"bad TOML in {path}: {exc}")
    try:
        return json.loads(raw)
    except json.JSONDecodeError as exc:
        raise UsageError(f"bad JSON in {path}: {exc}")


def _parse_rate(text: str):
    parts = text.split("/")
    return float(parts[0]) if len(parts) == 1 else tuple(float(x) for x in parts)


def cmd_sweep(args) -> int:
    cfg = read_config(args.config) if args.config else {}
    flags = {"scheme": args.scheme, "n": args.n, "p": args.p, "trials": args.trials,
             "seed": args.seed, "strategy": args.strategy, "output": args.out}
    if args.rate:
        flags["rates"] = [_parse_rate(r) for r in args.rate]
    cfg.update({k: v for k, v in flags.items() if v is not None})
    cfg["threads"] = args.threads
    if "seed" not in cfg:
        raise UsageError("sweep needs an explicit --seed (or a seed in the config)")
    if "output" not in cfg:
        raise UsageError("sweep needs --out (or output in the config)")
    try:
        config = SweepConfig.from_dict(cfg)
    except TypeError as exc:
        raise UsageError(f"incomplete sweep config: {exc}")
    result = run_ambiguity_sweep(config)
    result.write(config.output)
    for pt in result.points:
        if pt.note:
            print(f"R={pt.rate}: {pt.note}", file=sys.stderr)
    return EXIT_OK


def cmd_verify(args) -> int:
    checks = run_suite(args.suite)
    for c in checks:
        print(c.line())
    failed = [c for c in checks if not c.passed]
    if failed:
        print(f"{len(failed)} of {len(checks)} checks failed:")
        for c in failed:
            print(f"  {c.name}")
        return EXIT_VERIFY
    print(f"all {len(checks)} checks passed")
    return EXIT_OK


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="subsetcodec", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("encode", help="encode a sequence to a message JSON")
    p.add_argument("--scheme", choices=SCHEMES, required=True)
    p.add_argument("--seq", required=True, help="'+'/'-' string, or digits 1..K for kary")
    p.add_argument("--weights", required=True, help="WeightSet JSON file")
    p.add_argument("--k", type=int, default=None, help="alphabet size (kary)")
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="decode a message JSON (exit 0/2/3)")
    p.add_argument("--message", required=True, help="EncodedMessage JSON file")
    p.add_argument("--weights", required=True, help="WeightSet JSON file")
    p.add_argument("--strategy", choices=("exhaustive", "mitm"), default="mitm")
    p.add_argument("--max-witnesses", type=int, default=2)
    p.add_argument("--tau", help="side information, '+'/'-' string or integer list (side_info)")
    p.add_argument("--joint", help="JointDistribution JSON file (side_info)")
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("count", help="Lambda tables (CSV) or exact expected Omega (JSON)")
    p.add_argument("what", choices=("lambda", "omega"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--L", type=int, help="weight range 1..L")
    p.add_argument("--rate", type=float, help="sets L = round(2^(N R)) when --L is absent")
    p.add_argument("--scheme", choices=("constrained", "unconstrained"), default="constrained")
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--n-plus", type=int, help="exact number of +1s (constrained)")
    p.add_argument("--method", choices=("auto", "table", "closed"), default="auto")
    p.add_argument("--out")
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("ratefunc", help="tabulate h, phi, psi, xi or Rc as CSV x,value")
    p.add_argument("name", choices=sorted(ratefuncs.RATE_FUNCTIONS))
    p.add_argument("--grid", default="0.05:0.95:0.05", help="start:stop:step or comma list")
    p.add_argument("--out")
    p.set_defaults(func=cmd_ratefunc)

    p = sub.add_parser("sweep", help="Monte Carlo ambiguity sweep to CSV")
    p.add_argument("--config", help="TOML or JSON sweep config; flags override it")
    p.add_argument("--scheme", choices=SCHEMES)
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--rate", action="append",
                   help="grid rate; repeat per point, '/'-separate rows for multi/kary")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--strategy", choices=("exhaustive", "mitm"))
    p.add_argument("--out", help="CSV path; metadata goes to <out>.meta.json")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="run a self-check suite (exit 0 or 4)")
    p.add_argument("suite", choices=[*SUITES, "all"])
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    _echo_config(args)
    try:
        return args.func(args)
    except (UsageError, ValueError, OverflowError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
