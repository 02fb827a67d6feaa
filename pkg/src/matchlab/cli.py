"""Command-line entry point.

Subcommands mirror the experiment runners; flags can be overridden by a
key=value config file via --config.  Exit codes: 0 success, 2 bad
configuration, 3 size cap exceeded.
"""

from __future__ import annotations

import argparse
import sys

from .errors import CapExceeded, ConfigError, MatchlabError
from .experiments import EXPERIMENTS, RUNNERS, ExperimentConfig

_LIST_FIELDS = {"sizes", "gaps", "sizes_b"}
_INT_FIELDS = {"markets_per_size", "paths_per_start", "max_steps", "master_seed", "search_budget"}
_FLOAT_FIELDS = {"kappa", "eta", "epsilon", "p_destab"}
_BOOL_FIELDS = {"full_scale"}


def _parse_sizes(text: str) -> list[tuple[int, int]]:
    """'4,6,8' -> balanced sizes; '5x7,6x6' -> explicit pairs."""
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        if "x" in tok:
            a, b = tok.split("x")
            out.append((int(a), int(b)))
        else:
            out.append((int(tok), int(tok)))
    if not out:
        raise ConfigError("empty size list")
    return out


def _parse_int_list(text: str) -> list[int]:
    return [int(tok) for tok in text.split(",") if tok.strip()]


def _apply_config_file(cfg: ExperimentConfig, path: str) -> None:
    """key=value lines; unknown keys and malformed lines are config errors."""
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for raw in lines:
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"bad config line (want key=value): {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if not hasattr(cfg, key):
            raise ConfigError(f"unknown config key {key!r}")
        try:
            if key == "sizes":
                setattr(cfg, key, _parse_sizes(value))
            elif key in _LIST_FIELDS:
                setattr(cfg, key, _parse_int_list(value))
            elif key in _INT_FIELDS:
                setattr(cfg, key, int(value))
            elif key in _FLOAT_FIELDS:
                setattr(cfg, key, float(value))
            elif key in _BOOL_FIELDS:
                setattr(cfg, key, value.lower() in ("1", "true", "yes"))
            else:
                setattr(cfg, key, value)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {value!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="matchlab",
        description="Two-sided matching market laboratory: decentralized "
                    "blocking-pair dynamics, fragments, and exact absorption analysis.")
    sub = parser.add_subparsers(dest="experiment", required=True)
    trace = sub.add_parser("trace", help="per-step TSV trace of a single path")
    trace.add_argument("--market-file", type=str, required=True)
    trace.add_argument("--start-file", type=str, default=None,
                       help="matching file; default: the empty matching")
    trace.add_argument("--rule", choices=("uniform", "agent-best", "surplus-total",
                                          "surplus-gain"), default="uniform")
    trace.add_argument("--kappa", type=float, default=None)
    trace.add_argument("--max-steps", type=int, default=10**5)
    trace.add_argument("--seed", type=int, default=0, dest="master_seed")
    trace.add_argument("--out", type=str, default="trace.tsv", dest="output_path")
    for name in EXPERIMENTS:
        p = sub.add_parser(name)
        p.add_argument("--sizes", type=str, default=None,
                       help="comma list: '4,6,8' (balanced) or '5x7,6x6' (pairs)")
        p.add_argument("--markets", type=int, default=None, dest="markets_per_size")
        p.add_argument("--paths", type=int, default=None, dest="paths_per_start")
        p.add_argument("--max-steps", type=int, default=None)
        p.add_argument("--rule", choices=("uniform", "agent-best", "surplus-total", "surplus-gain"),
                       default=None)
        p.add_argument("--kappa", type=float, default=None)
        p.add_argument("--seed", type=int, default=None, dest="master_seed")
        p.add_argument("--out", type=str, default=None, dest="output_path")
        p.add_argument("--full-scale", action="store_true")
        p.add_argument("--eta", type=float, default=None)
        p.add_argument("--epsilon", type=float, default=None)
        p.add_argument("--p-destab", type=float, default=None)
        p.add_argument("--gaps", type=str, default=None)
        p.add_argument("--sizes-b", type=str, default=None)
        p.add_argument("--search-budget", type=int, default=None)
        p.add_argument("--market-file", type=str, default=None)
        p.add_argument("--config", type=str, default=None,
                       help="key=value file overriding the flags above")
    return parser


_DEFAULT_SIZES = {
    "fragments-freq": [(n, n) for n in range(2, 9)],
    "multi-stable": [(n, n) for n in (4, 6, 8, 10)],
    "unique-stable": [(6, 6), (6, 7), (6, 8), (6, 9), (6, 12)],
    "timing-study": [(n, n) for n in (10, 20, 30, 40, 50)],
    "eta-construct": [(n, n) for n in (8, 12, 16)],
    "walk": [],
    "absorption": [],
    "verify-equivalence": [(3, 3), (4, 4)],
}


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    cfg = ExperimentConfig(experiment=args.experiment)
    cfg.sizes = _DEFAULT_SIZES.get(args.experiment, [])
    if args.sizes is not None:
        cfg.sizes = _parse_sizes(args.sizes)
    for name in ("markets_per_size", "paths_per_start", "max_steps", "rule", "kappa",
                 "master_seed", "output_path", "eta", "epsilon", "p_destab",
                 "search_budget", "market_file"):
        value = getattr(args, name, None)
        if value is not None:
            setattr(cfg, name, value)
    if args.full_scale:
        cfg.full_scale = True
        cfg.markets_per_size = 1000
        cfg.paths_per_start = 300
    if args.gaps is not None:
        cfg.gaps = _parse_int_list(args.gaps)
    if args.sizes_b is not None:
        cfg.sizes_b = _parse_int_list(args.sizes_b)
    if args.config is not None:
        _apply_config_file(cfg, args.config)
    return cfg


def _run_trace(args: argparse.Namespace) -> str:
    from .dynamics import WeightRule, trace_path
    from .experiments import RULE_NAMES
    from .market import Matching
    from .stable import deferred_acceptance
    from .textio import market_from_text, matching_from_text
    try:
        with open(args.market_file) as fh:
            market = market_from_text(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read market file: {exc}") from exc
    if args.start_file:
        with open(args.start_file) as fh:
            start = matching_from_text(fh.read(), market.n_firms, market.n_workers)
    else:
        start = Matching.empty(market.n_firms, market.n_workers)
    rule = WeightRule.named(RULE_NAMES[args.rule], args.kappa)
    reference = deferred_acceptance(market, "firm")
    text = trace_path(market, start, rule, reference, args.max_steps, args.master_seed)
    with open(args.output_path, "w") as fh:
        fh.write(text)
    return args.output_path


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.experiment == "trace":
            out = _run_trace(args)
            print(f"wrote {out}")
            return 0
        cfg = config_from_args(args)
        cfg.validate()
        RUNNERS[cfg.experiment](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except CapExceeded as exc:
        print(f"cap exceeded: {exc}", file=sys.stderr)
        return 3
    except MatchlabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {cfg.output_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
