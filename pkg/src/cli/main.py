"""Command-line entry point: ``python -m src <family> <action> ...``.

Exit codes: 0 success, 1 error, 2 destabilizer found, 64 usage.
"""
import argparse
import asyncio
import json
import os
import sys
from typing import Any, Dict, List, Optional

import structlog

from ..core.artifacts import write_atomic
from ..core.config import get_config
from ..core.errors import KStabError
from ..core.log import configure_logging
from ..core.processor import default_processor
from ..core.workflow import RunReport, WorkflowResult
from ..futaki.ruled import MODES

logger = structlog.get_logger()

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_DESTABILIZED = 2
EXIT_USAGE = 64


class UsageParser(argparse.ArgumentParser):
    """Parse failures print usage and exit with 64."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the JSON report here instead of stdout")
    common.add_argument("--no-timings", action="store_true", help="drop the timings block")
    common.add_argument("--seed", type=int, default=0, help="seed for randomised samplers")
    common.add_argument("--jobs", type=int, default=None, help="worker processes for independent sub-tasks")
    return common


def build_parser() -> UsageParser:
    common = _common()
    parser = UsageParser(prog="kstab", description="Exact K-stability invariants")
    families = parser.add_subparsers(dest="command", required=True)

    polygon = families.add_parser("polygon", help="toric stability of a rational polygon")
    polygon_actions = polygon.add_subparsers(dest="action", required=True)
    for name in ("check", "decompose", "uniform", "extremal-affine"):
        p = polygon_actions.add_parser(name, parents=[common])
        p.add_argument("file", help="polygon JSON document")
        if name != "extremal-affine":
            p.add_argument("--resolution", default=None, help="grid resolution, or a comma list for check")
        if name == "check":
            p.add_argument("--relative", action="store_true", help="use the extremal affine function")
            p.add_argument("--witness", default=None, help="where a destabilising witness is written")
        if name == "uniform":
            p.add_argument("--samples", type=int, default=None)

    torus = families.add_parser("git-torus", help="stability under a torus action")
    torus_actions = torus.add_subparsers(dest="action", required=True)
    for name in ("classify", "minimize", "check-bounds"):
        p = torus_actions.add_parser(name, parents=[common])
        p.add_argument("file", nargs="?", default=None, help="action JSON document")
        p.add_argument("--weights", default=None, help="JSON list of weight vectors")
        p.add_argument("--support", default=None, help="JSON list of support flags")
        if name == "minimize":
            p.add_argument("--tol", type=float, default=None)
        if name == "check-bounds":
            p.add_argument("--alpha", default=None, help="integer direction, e.g. '1,-1'")
            p.add_argument("--chi", default=None, help="rational vector; defaults to the extremal vector")

    ruled = families.add_parser("ruled", help="the ruled surface over a genus-2 curve")
    ruled_actions = ruled.add_subparsers(dest="action", required=True)
    p = ruled_actions.add_parser("futaki", parents=[common])
    p.add_argument("--m", required=True)
    p.add_argument("--c", required=True)
    p.add_argument("--pair", choices=("sinf", "s0"), default=None)
    p.add_argument("--bruteforce-check", type=int, default=None, metavar="KMAX")
    p = ruled_actions.add_parser("thresholds", parents=[common])
    p.add_argument("--precision", default="1/1000")
    p.add_argument("--m", default=None, help="also report the c-window where F_chi < 0")
    p.add_argument("--mode", choices=MODES, default="whole")
    p = ruled_actions.add_parser("extremal", parents=[common])
    p.add_argument("--m", required=True)
    p.add_argument("--type", choices=("smooth", "no-szero", "no-sinf"), default="smooth")
    p.add_argument("--shift", default=None)
    p = ruled_actions.add_parser("calabi-inf", parents=[common])
    p.add_argument("--m", required=True)
    p.add_argument("--refine", type=int, default=None)
    p = ruled_actions.add_parser("sample")
    p.add_argument("--m", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out", default=None, help="CSV file with columns tau,phi,S")
    p.add_argument("--type", choices=("glued", "smooth", "no-szero", "no-sinf"), default=None)
    p.add_argument("--no-timings", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=None)

    surface = families.add_parser("surface", help="curves on polarised surfaces")
    surface_actions = surface.add_subparsers(dest="action", required=True)
    p = surface_actions.add_parser("normal-cone", parents=[common])
    p.add_argument("--data", default=None, help="intersection numbers JSON")
    p.add_argument("--m", default=None, help="use the ruled surface instead")
    p.add_argument("--divisor", choices=("sinf", "s0"), default="sinf")
    p.add_argument("--c", required=True)
    p.add_argument("--norm", default=None, help="‖α‖ for the Calabi lower bound")

    bundle = families.add_parser("bundle", help="toric bundles")
    bundle_actions = bundle.add_subparsers(dest="action", required=True)
    p = bundle_actions.add_parser("futaki", parents=[common])
    p.add_argument("--interval", nargs=2, default=None, metavar=("LO", "HI"))
    p.add_argument("--polygon", default=None)
    p.add_argument("--q1", default=None, help="comma coefficients (interval) or expression in x, y")
    p.add_argument("--q2", default=None)
    p.add_argument("--crease", default=None)
    p.add_argument("--knots", default=None)
    p.add_argument("--values", default=None)
    p.add_argument("--hinge", default=None, help="a0,a1,a2 for max(a0 + a1 x + a2 y, 0)")
    p.add_argument("--resolution", type=int, default=None)
    return parser


def _split(text: Optional[str]) -> Optional[List[str]]:
    return None if text is None else [t.strip() for t in text.split(",") if t.strip()]


def workflow_input(args: argparse.Namespace) -> Dict[str, Any]:
    """Translate parsed arguments into the workflow's data dict."""
    data: Dict[str, Any] = {"action": args.action}
    if args.command == "polygon":
        data["polygon"] = args.file
        resolution = getattr(args, "resolution", None)
        data["resolutions"] = [int(n) for n in _split(resolution)] if resolution else None
        data["seed"] = args.seed
        if args.action == "check":
            data["relative"] = args.relative
            data["witness_out"] = args.witness or os.path.splitext(args.file)[0] + ".witness.json"
        if args.action == "uniform":
            data["samples"] = args.samples
    elif args.command == "git-torus":
        data["weights"] = json.loads(args.weights) if args.weights else None
        data["support"] = json.loads(args.support) if args.support else None
        data["action_file"] = args.file
        if data["weights"] is None and args.file is None:
            raise KStabError("either an action file or --weights is required")
        for name in ("tol", "alpha", "chi"):
            if hasattr(args, name):
                data[name] = getattr(args, name)
    elif args.command == "ruled":
        data["m"] = args.m
        if args.action == "futaki":
            data.update(c=args.c, mode=f"pair-{args.pair}" if args.pair else "whole", bruteforce_check=args.bruteforce_check)
        elif args.action == "thresholds":
            data.update(precision=args.precision, m=args.m, mode=args.mode)
        elif args.action == "extremal":
            data.update(type=args.type, shift=args.shift)
        elif args.action == "calabi-inf":
            data["refine"] = args.refine
        else:
            data.update(n=args.n, out=args.out, type=args.type)
    elif args.command == "surface":
        if args.data is None and args.m is None:
            raise KStabError("either --data or --m is required")
        data.update(data=args.data, m=args.m, divisor=args.divisor, c=args.c, norm=args.norm)
    else:
        if (args.interval is None) == (args.polygon is None):
            raise KStabError("give exactly one of --interval and --polygon")
        data.update(interval=args.interval, polygon=args.polygon, resolution=args.resolution)
        if args.polygon is not None:
            data.update(q1=args.q1, q2=args.q2, hinge=_split(args.hinge) or ["0", "0", "0"])
        else:
            data.update(q1=_split(args.q1), q2=_split(args.q2), crease=args.crease,
                        knots=_split(args.knots), values=_split(args.values))
            if args.crease is None and args.knots is None:
                raise KStabError("an interval function needs --crease or --knots/--values")
    return data


def exit_code(result: WorkflowResult) -> int:
    if not result.success:
        return EXIT_ERROR
    return EXIT_DESTABILIZED if result.destabilized else EXIT_OK


def _emit(text: str, path: Optional[str]) -> None:
    if path:
        write_atomic(path, text + "\n")
    else:
        sys.stdout.write(text + "\n")


def run(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    configure_logging(get_config().logging)
    command = f"{args.command} {args.action}"
    report_path = None if (args.command, args.action) == ("ruled", "sample") else args.out
    try:
        data = workflow_input(args)
        processor = default_processor(args.jobs)
    except KStabError as e:
        _emit(json.dumps({"command": command, "results": {"error": e.to_dict()}}, sort_keys=True, indent=2), None)
        return EXIT_ERROR

    result = asyncio.run(processor.run(args.command, data))
    inputs = {k: v for k, v in sorted(vars(args).items()) if k not in ("command", "action")}
    report = RunReport.from_result(command, inputs, result)
    _emit(report.to_json(include_timings=not args.no_timings), report_path)
    code = exit_code(result)
    logger.bind(component="cli").info("command_finished", command=command, exit_code=code)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
