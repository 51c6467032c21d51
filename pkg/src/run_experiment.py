import argparse
import logging
import sys
from pathlib import Path

from pydantic import ValidationError

from analysis.errors import ConfigurationError
from experiments.config import RunMode, parse_config
from experiments.presets import FIGURES, figure_config, table2
from experiments.report import TRACE_SCHEMA, write_csv_atomic
from experiments.runner import run_experiment
from experiments.settings import RuntimeSettings
from simulation.montecarlo import capture_trace

EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_RUNTIME_ERROR = 3

logger = logging.getLogger(__name__)


def setup_logger(level: str = "INFO"):
    """Configure the logging system"""
    root = logging.getLogger()
    root.setLevel(level)

    # Console handler only
    if not any(getattr(h, "_wsn_fusion", False) for h in root.handlers):
        console_handler = logging.StreamHandler()
        console_handler.setFormatter(logging.Formatter('%(asctime)s - %(levelname)s - %(message)s'))
        console_handler._wsn_fusion = True
        root.addHandler(console_handler)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wsn-fusion",
        description="Decision error probability of sensor networks with noisy sensing, "
                    "multi-hop binary symmetric channels and OR/AND/K-OUT-OF-N/MAJORITY fusion",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Run a configured parameter sweep")
    run.add_argument("--config", type=Path, help="key = value configuration file")
    run.add_argument("--mode", choices=[m.value for m in RunMode])
    run.add_argument("--sweep", help="AXIS=start:step:stop or AXIS=v1,v2 with AXIS in N, M, p, x_th")
    run.add_argument("--rules", help="Comma separated: or, and, majority, kofn:K")
    run.add_argument("--seed", help="64-bit simulation seed")
    run.add_argument("--trials", help="Passes over the sample grid per simulated point")
    run.add_argument("--n-sensors", dest="n_sensors", help="Number of sensors N")
    run.add_argument("--hop-probs", dest="hop_probs", help="Comma separated per-hop flip probabilities")
    run.add_argument("--x-th", dest="x_th", help="Quantization threshold")
    run.add_argument("--eta", help="Number of samples of the built-in signal")
    run.add_argument("--convention", choices=["0", "1"], help="Bit assigned to x(t_n) <= x_th")
    run.add_argument("--out", help="CSV output path")
    run.add_argument("--trace-out", dest="trace_out", type=Path, help="Export a channel trace CSV")
    run.add_argument("--trace-window", dest="trace_window", default="0:300",
                     help="Sample window start:stop of the exported trace (default 0:300)")
    run.add_argument("--workers", type=int, help="Monte Carlo worker processes")

    table = sub.add_parser("table2", help="Analytic and simulated P_e of the three-sensor snapshot")
    table.add_argument("--seed", type=int, default=0)
    table.add_argument("--out", type=Path)
    table.add_argument("--workers", type=int)

    fig = sub.add_parser("fig", help="Data series of one figure")
    fig.add_argument("number", type=int, choices=FIGURES)
    _add_figure_arguments(fig)
    fig.add_argument("--out", type=Path)

    every = sub.add_parser("all", help="Data series of every figure, stopping at the first failure")
    _add_figure_arguments(every)
    every.add_argument("--out-dir", dest="out_dir", type=Path, default=Path("."))

    return parser


def _add_figure_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--mode", choices=[m.value for m in RunMode], default=RunMode.ANALYTIC.value)
    parser.add_argument("--trials", type=int, default=100)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--workers", type=int)


def _parse_window(text: str) -> tuple:
    try:
        start, stop = (int(part) for part in text.split(":"))
    except ValueError:
        raise ConfigurationError(f"Trace window must be start:stop (got '{text}')")
    return start, stop


def _run(args, settings: RuntimeSettings, workers: int) -> int:
    overrides = {key: getattr(args, key) for key in (
        "mode", "sweep", "rules", "seed", "trials", "n_sensors", "hop_probs", "x_th", "eta",
        "convention", "out",
    )}
    config = parse_config(args.config, overrides)
    result = run_experiment(config, workers=workers)
    if config.out is None:
        print(result.to_frame().to_string(index=False))

    if args.trace_out is not None:
        trace = capture_trace(config.base, _parse_window(args.trace_window), limit=settings.trace_limit)
        write_csv_atomic(trace.to_frame(), args.trace_out, TRACE_SCHEMA)
    return EXIT_OK


def _figure(number: int, args, workers: int, out) -> None:
    config = figure_config(number, mode=RunMode(args.mode), trials=args.trials, seed=args.seed, out=out)
    result = run_experiment(config, workers=workers)
    if out is None:
        print(result.to_frame().to_string(index=False))


def _all_figures(args, workers: int) -> int:
    if not args.out_dir.is_dir():
        raise ConfigurationError(f"Output directory does not exist: {args.out_dir}")
    logger.info(f"Regenerating figures {', '.join(str(n) for n in FIGURES)}")
    for number in FIGURES:
        try:
            _figure(number, args, workers, args.out_dir / f"fig{number}.csv")
        except Exception as e:
            logger.error(f"Figure {number} failed: {e}. Stopping.")
            raise
        logger.info(f"Completed figure {number}")
    logger.info("All figures regenerated")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    try:
        settings = RuntimeSettings()
        setup_logger(settings.log_level)
        workers = args.workers or settings.workers

        if args.command == "run":
            return _run(args, settings, workers)
        if args.command == "table2":
            df = table2(seed=args.seed, workers=workers, out=args.out)
            if args.out is None:
                print(df.to_string(index=False))
            return EXIT_OK
        if args.command == "fig":
            _figure(args.number, args, workers, args.out)
            return EXIT_OK
        return _all_figures(args, workers)

    except (ConfigurationError, ValidationError) as e:
        setup_logger()
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG_ERROR
    except Exception as e:
        setup_logger()
        logger.critical(f"An unhandled error occurred: {e}", exc_info=True)
        return EXIT_RUNTIME_ERROR


if __name__ == "__main__":
    sys.exit(main())
