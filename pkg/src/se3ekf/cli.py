"""Command-line entry point.

::

    se3ekf validate --config campaign.json
    se3ekf simulate --config campaign.json --out streams/
    se3ekf run      --config campaign.json --variant se3_body
    se3ekf compare  --config campaign.json --variant se3_body --variant mekf_body

Exit status: 0 on success, 1 on usage or configuration errors, 2 when every
trial of some requested variant diverged.  Diagnostics go to stderr; stdout
gets a single JSON line.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from .filters import Variant
from .harness import load_config, run_campaign, simulate_only
from .sensors import ConfigError

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DIVERGED = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="se3ekf", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, variants: bool):
        p.add_argument("--config", required=True, help="campaign JSON file")
        p.add_argument("--seed", type=int, help="override sim.seed")
        p.add_argument("--out", help="override the output directory")
        if variants:
            p.add_argument("--variant", action="append", help="filter variant (repeatable)")
            p.add_argument("--threads", type=int, default=1, help="max worker threads")

    common(sub.add_parser("validate", help="check a config without running"), False)
    common(sub.add_parser("simulate", help="write truth and measurement CSVs"), False)
    common(sub.add_parser("run", help="run one filter variant"), True)
    common(sub.add_parser("compare", help="run several variants on paired streams"), True)
    return parser


def _resolve(args):
    cfg = load_config(args.config)
    sim = cfg.sim
    if args.seed is not None:
        if args.seed < 0 or args.seed >= 2**64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        sim = dataclasses.replace(sim, seed=args.seed)
    cfg = dataclasses.replace(cfg, sim=sim, output=args.out or cfg.output)
    variants = getattr(args, "variant", None)
    if variants:
        try:
            names = tuple(Variant.parse(v).value for v in variants)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        cfg = dataclasses.replace(cfg, variants=names)
    cfg.validate()
    return cfg


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        cfg = _resolve(args)
        if args.command == "run" and len(cfg.variants) != 1:
            raise ConfigError("run needs exactly one variant; pass --variant or use compare")
    except ConfigError as exc:
        print(f"se3ekf: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    line = {"command": args.command, "status": "ok"}
    if args.command == "validate":
        line["variants"] = list(cfg.variants)
        print(json.dumps(line))
        return EXIT_OK

    if args.command == "simulate":
        files = simulate_only(cfg)
        line.update(output=cfg.output, files=len(files))
        print(json.dumps(line))
        return EXIT_OK

    result = run_campaign(cfg, workers=max(1, args.threads))
    code = EXIT_OK
    brief = {}
    for name, s in result.summary["variants"].items():
        brief[name] = {
            "attitude_rmse_deg": s["attitude_rmse_deg"],
            "mean_nees": s["mean_nees"],
            "divergence_count": s["divergence_count"],
        }
        if s["divergence_count"] == s["trials"]:
            print(f"se3ekf: {name} diverged in all {s['trials']} trials", file=sys.stderr)
            code = EXIT_DIVERGED
    line.update(output=cfg.output, variants=brief)
    if code != EXIT_OK:
        line["status"] = "diverged"
    print(json.dumps(line))
    return code


if __name__ == "__main__":
    sys.exit(main())
