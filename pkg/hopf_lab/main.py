"""
Command-line entry point.

    python -m hopf_lab analyze  --system example21-case3 --window -1 1
    python -m hopf_lab predprey --d1 1 --d2 3 --k 17 --theta 4 --n 1
    python -m hopf_lab sweep    --system example21-case2 --grid -0.3 0.3 7
    python -m hopf_lab cycle    --system example21-case3 --lam 0.2
"""
import argparse
import logging
import sys as _sys
from pathlib import Path

from . import report
from .classifier import analyze
from .config import merged
from .dynamics import find_limit_cycle, monodromy
from .errors import ConfigError, HopfLabError, NoHopfCandidate, exit_code_for
from .predprey import PredPreyParams, galerkin_system, predprey_report
from .sweep import amplitude_sweep, cycle_direction, guess_amplitude, linear_grid
from .systems import PolynomialField, get_system

logger = logging.getLogger(__name__)


def build_system(config):
    if config.system is not None:
        return get_system(config.system, config.seed)
    if config.polynomial is not None:
        block = config.polynomial
        terms = [(t["component"], t["exponents"], t["coefficients"]) for t in block["terms"]]
        window = block.get("window", config.window or (-1.0, 1.0))
        return PolynomialField(block["dim"], terms).system(label="polynomial", window=window)
    params = PredPreyParams(**config.predprey)
    return galerkin_system(params, config.modes or max(2, 2 * config.n), params.ell)


def default_window(config, sys):
    if config.window is not None:
        return config.window
    return sys.window


def _hopf_point(config, sys, tol):
    """The analyzed candidate nearest the middle of the grid (or window)."""
    analyses = analyze(sys, default_window(config, sys), tol)
    if config.grid is not None:
        middle = 0.5 * (config.grid[0] + config.grid[1])
    elif config.lam is not None:
        middle = config.lam
    else:
        middle = 0.5 * sum(default_window(config, sys))
    return min(analyses, key=lambda a: abs(a.spec.lambda0 - middle))


def run_analyze(config):
    sys = build_system(config)
    tol = config.tolerances
    analyses = analyze(sys, default_window(config, sys), tol)
    return report.dumps({
        "system": sys.label,
        "window": default_window(config, sys),
        "points": [report.analysis_record(a, tol) for a in analyses],
    })


def run_predprey(config):
    block = config.predprey
    if block is None:
        raise ConfigError("the predprey command needs a predprey block or --d1/--d2/--k/--theta")
    params = PredPreyParams(**block)
    result = predprey_report(params, config.n, config.modes, config.tolerances)
    return report.dumps(report.predprey_record(result, config.tolerances))


def run_sweep(config):
    if config.grid is None:
        raise ConfigError("the sweep command needs a grid")
    sys = build_system(config)
    point = _hopf_point(config, sys, config.tolerances)
    rows = amplitude_sweep(sys, linear_grid(*config.grid), point.spec, point.prediction,
                           point.classification, config.tolerances)
    return report.sweep_csv(rows)


def run_cycle(config):
    if config.lam is None:
        raise ConfigError("the cycle command needs --lam")
    sys = build_system(config)
    tol = config.tolerances
    point = _hopf_point(config, sys, tol)
    cycle = find_limit_cycle(sys, config.lam, guess_amplitude(point.prediction, config.lam, point.spec),
                             cycle_direction(point.classification), spec=point.spec, tol=tol)
    floquet = monodromy(sys, config.lam, cycle)
    return report.dumps(report.cycle_record(cycle, floquet, tol))


COMMANDS = {
    "analyze": run_analyze,
    "predprey": run_predprey,
    "sweep": run_sweep,
    "cycle": run_cycle,
}


def run_command(config):
    """Execute a validated RunConfig; returns (exit code, report text or None)."""
    try:
        text = COMMANDS[config.command](config)
    except NoHopfCandidate as exc:
        logger.error("%s", exc)
        return exc.exit_code, None
    except HopfLabError as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        return exit_code_for(exc), None
    if config.output:
        Path(config.output).write_text(text, encoding="utf-8")
        logger.info("wrote %s", config.output)
    return 0, text


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--output", help="write the report here instead of stdout")
    common.add_argument("--window", nargs=2, type=float, metavar=("LO", "HI"))
    common.add_argument("--tau-trans", type=float)
    common.add_argument("--tau-deg", type=float)
    common.add_argument("--tau-coeff", type=float)
    common.add_argument("--seed", type=int)
    common.add_argument("-v", "--verbose", action="store_true")
    common.add_argument("-q", "--quiet", action="store_true")

    system = argparse.ArgumentParser(add_help=False)
    system.add_argument("--system", help="registry label")

    parser = argparse.ArgumentParser(prog="hopf_lab", description="Hopf bifurcation analysis")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("analyze", parents=[common, system], help="locate and classify Hopf points")
    pp = sub.add_parser("predprey", parents=[common], help="diffusive predator-prey report")
    for name in ("d1", "d2", "k", "theta", "ell"):
        pp.add_argument(f"--{name}", type=float)
    pp.add_argument("--n", type=int)
    pp.add_argument("--modes", type=int)
    sw = sub.add_parser("sweep", parents=[common, system], help="amplitude sweep to CSV")
    sw.add_argument("--grid", nargs=3, type=float, metavar=("START", "STOP", "COUNT"))
    cy = sub.add_parser("cycle", parents=[common, system], help="single cycle with Floquet data")
    cy.add_argument("--lam", type=float)
    return parser


def _overrides(args):
    values = {
        "command": args.command,
        "output": args.output,
        "window": args.window,
        "seed": args.seed,
        "system": getattr(args, "system", None),
        "grid": getattr(args, "grid", None),
        "lam": getattr(args, "lam", None),
        "n": getattr(args, "n", None),
        "modes": getattr(args, "modes", None),
        "tolerances": {k: v for k, v in (("tau_trans", args.tau_trans), ("tau_deg", args.tau_deg),
                                         ("tau_coeff", args.tau_coeff)) if v is not None},
    }
    if args.command == "predprey":
        block = {k: getattr(args, k) for k in ("d1", "d2", "k", "theta", "ell")
                 if getattr(args, k) is not None}
        if block:
            values["predprey"] = block
    return values


def _configure_logging(args):
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    handler = logging.StreamHandler(_sys.stderr)
    handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s"))
    root = logging.getLogger("hopf_lab")
    root.handlers[:] = [handler]
    root.setLevel(level)


def main(argv=None):
    args = _parser().parse_args(argv)
    _configure_logging(args)
    try:
        text = Path(args.config).read_text(encoding="utf-8") if args.config else None
        config = merged(text, _overrides(args))
    except ConfigError as exc:
        logger.error("config: %s", exc)
        return exc.exit_code
    except OSError as exc:
        logger.error("cannot read config: %s", exc)
        return 2

    code, output = run_command(config)
    if output is not None and not config.output:
        _sys.stdout.write(output)
    return code


if __name__ == "__main__":
    _sys.exit(main())
