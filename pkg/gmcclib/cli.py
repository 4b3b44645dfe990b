""" gmcc command-line interface: kernel evaluation, EMSE theory and the Monte Carlo experiments. """

import argparse
import logging
import sys
from dataclasses import replace
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from gmcclib import schema
from gmcclib.config_node import as_plain, parse_override
from gmcclib.config_root import ConfigRoot
from gmcclib.enums import Rule, Subcommand
from gmcclib.exceptions import ConfigError, DomainError
from gmcclib.filters import AlgorithmSpec
from gmcclib.harness import (
    RunConfig,
    calibrate_step_size,
    convergence_comparison,
    emse_sweep,
    pod_experiment,
    select_lambda,
)
from gmcclib.kernel import (
    correntropy_estimate,
    gc_loss,
    gc_loss_gradient,
    gc_loss_hessian_diag,
    gcim,
    ggd_density,
    l_alpha_beta,
)
from gmcclib.noise import noise_from_dict
from gmcclib.result_writer import ResultWriter
from gmcclib.theory import TheoryInputs, emse_curve, lms_emse
from gmcclib.utils import worker_count

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2


def main() -> None:
    """
    Console entry point - collects command-line arguments
    """
    sys.exit(run_cli())


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON configuration file")
    common.add_argument("--out", required=True, help="output file (CSV or JSON)")
    common.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="PATH=VALUE",
        help="override a configuration value; VALUE is JSON, PATH uses / or . separators",
    )
    common.add_argument("--runs", type=int, help="override the number of Monte Carlo runs")
    common.add_argument("--seed", type=int, help="override the base seed")
    common.add_argument(
        "-v", "--verbose", action="count", default=0, help="-v for progress, -vv for debug output"
    )

    parser = argparse.ArgumentParser(
        prog="gmcc", description="Generalized correntropy adaptive filtering experiments"
    )
    subparsers = parser.add_subparsers(dest="subcommand", required=True)
    subparsers.add_parser(
        Subcommand.KERNEL_EVAL.value, parents=[common], help="Evaluate correntropy estimators on samples"
    )
    subparsers.add_parser(Subcommand.THEORY.value, parents=[common], help="Theoretical steady-state EMSE")
    subparsers.add_parser(Subcommand.POD.value, parents=[common], help="Probability of divergence sweep")
    subparsers.add_parser(Subcommand.EMSE.value, parents=[common], help="Simulated against theoretical EMSE")
    subparsers.add_parser(
        Subcommand.CONVERGE.value, parents=[common], help="Learning curves of several algorithms"
    )
    return parser


def configure_logging(verbosity: int) -> None:
    """Stream handler on the package logger; WARNING, INFO (-v) or DEBUG (-vv)"""
    package_logger = logging.getLogger("gmcclib")
    console_handler = logging.StreamHandler()
    formatter = logging.Formatter(
        "%(asctime)s %(levelname)s %(threadName)s %(filename)s:%(funcName)s: %(message)s"
    )
    console_handler.setFormatter(formatter)
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    package_logger.handlers = [h for h in package_logger.handlers if isinstance(h, logging.NullHandler)]
    package_logger.addHandler(console_handler)
    package_logger.setLevel(level)


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse, run and write one invocation
    :param argv: arguments (sys.argv[1:] by default)
    :return: exit status: 0 success, 2 configuration error, 1 other errors
    """
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG if e.code else EXIT_OK
    configure_logging(args.verbose)
    subcommand = Subcommand(args.subcommand)
    try:
        overrides = [parse_override(text) for text in args.set]
        if args.runs is not None:
            overrides.append(("runs", args.runs))
        if args.seed is not None:
            overrides.append(("seed", args.seed))
        config = ConfigRoot(args.config, template_gen=schema.TEMPLATES[subcommand], overrides=overrides)
        logger.info("Running %s with config %s (hash %s)", subcommand.value, args.config, config.config_hash())
        HANDLERS[subcommand](config, args.out, worker_count())
    except ConfigError as e:
        print(f"gmcc: {e.diagnostic()}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, ArithmeticError, OSError) as e:
        logger.debug("Run failed", exc_info=True)
        print(f"gmcc: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def _optional(compute: Callable[[], Any], what: str) -> Any:
    try:
        return compute()
    except DomainError as e:
        logger.warning("%s not reported: %s", what, e)
        return None


def kernel_eval(config: ConfigRoot, out: str, workers: int) -> None:
    """Estimators of the sample pair (x, y) under the configured kernel"""
    k = schema.kernel_from(config)
    x = np.asarray(config.get("x"), dtype=float)
    y = np.asarray(config.get("y"), dtype=float) if config.get("y") is not None else np.zeros_like(x)
    e = x - y
    payload = {
        "kernel": k.describe(),
        "n": int(x.size),
        "correntropy": correntropy_estimate(x, y, k),
        "gc_loss": gc_loss(x, y, k),
        "gcim": gcim(x, y, k),
        "l_alpha_beta": l_alpha_beta(e, k),
        "density": ggd_density(e, k).tolist(),
        "gradient": _optional(lambda: gc_loss_gradient(e, k).tolist(), "Gradient"),
        "hessian_diag": _optional(lambda: gc_loss_hessian_diag(e, k).tolist(), "Hessian"),
    }
    ResultWriter(out, config, Subcommand.KERNEL_EVAL.value).json(payload)


def theory(config: ConfigRoot, out: str, workers: int) -> None:
    """Full and simplified EMSE with the noise expectations behind them"""
    k = schema.kernel_from(config)
    noise = noise_from_dict(as_plain(config.get("noise")))
    trace = config.get("trace_rxx")
    if trace is None:
        trace = config.get("m") * config.get("input_variance")
    etas = config.get("etas") or [config.get("eta")]
    results = emse_curve(TheoryInputs(k, float(etas[0]), trace, noise), etas)
    expectations = results[0].diagnostics
    payload = {
        "kernel": k.describe(),
        "noise": noise.to_dict(),
        "trace_rxx": trace,
        "expectations": {
            "e_f_squared": expectations.e_f_squared,
            "e_f_prime": expectations.e_f_prime,
            "e_zeta": expectations.e_zeta,
        },
        "results": [
            {
                "eta": r.eta,
                "full": r.full,
                "simplified": r.simplified,
                "valid": r.valid,
                "simplified_valid": r.simplified_valid,
                "denominator_full": r.diagnostics.denominator_full,
                "denominator_simplified": r.diagnostics.denominator_simplified,
                "lms_reference": lms_emse(r.eta, trace, noise.variance),
            }
            for r in results
        ],
    }
    ResultWriter(out, config, Subcommand.THEORY.value).json(payload)


def pod(config: ConfigRoot, out: str, workers: int) -> None:
    """One CSV row per (algorithm, eta)"""
    etas = schema.pod_etas(config)
    rows: List[Dict[str, Any]] = []
    summary: Dict[str, Any] = {"etas": etas, "algorithms": {}}
    for label, spec in schema.labelled_algorithms(config):
        report = pod_experiment(
            schema.run_config_from(config, spec),
            etas,
            config.get("divergence_threshold"),
            workers,
            label=label,
        )
        summary["algorithms"][label] = spec.to_dict()
        rows += [
            {
                "label": label,
                "eta": row.eta,
                "diverged_count": row.diverged_count,
                "total_runs": row.total_runs,
                "pod": row.pod,
            }
            for row in report.rows
        ]
    frame = pd.DataFrame(rows, columns=["label", "eta", "diverged_count", "total_runs", "pod"])
    ResultWriter(out, config, Subcommand.POD.value, config.get("seed")).csv(frame, summary)


def emse(config: ConfigRoot, out: str, workers: int) -> None:
    """One CSV row per (noise variance, eta)"""
    spec = schema.algorithm_from(config)
    etas = config.get("etas") or [spec.eta]
    reports = emse_sweep(
        schema.run_config_from(config, spec),
        etas,
        config.get("noise_variances"),
        config.get("steady_window"),
        workers,
    )
    frame = pd.DataFrame(
        [
            {
                "eta": r.eta,
                "noise_variance": r.noise_variance,
                "simulated_emse": r.simulated_emse,
                "theoretical_full": r.theoretical_full,
                "theoretical_simplified": r.theoretical_simplified,
                "theory_valid": int(r.theory_valid),
                "diverged_runs": r.diverged_runs,
            }
            for r in reports
        ]
    )
    ResultWriter(out, config, Subcommand.EMSE.value, config.get("seed")).csv(
        frame, {"algorithm": spec.to_dict()}
    )


def tune(config: ConfigRoot, shared: RunConfig, spec: AlgorithmSpec, workers: int) -> AlgorithmSpec:
    """
    Step-size calibration and lambda selection on the held-out seed
    (calibration seed, or base seed + 1)
    """
    calibration = config.get("calibration")
    lambda_grid = config.get("lambda_grid")
    held_out_seed = shared.base_seed + 1
    if calibration and calibration.get("seed") is not None:
        held_out_seed = calibration["seed"]
    held_out = replace(shared, base_seed=held_out_seed)

    def calibrate(current: AlgorithmSpec) -> AlgorithmSpec:
        eta = calibrate_step_size(
            held_out.with_algorithm(current),
            calibration["target_wep"],
            calibration["at_iteration"],
            runs=calibration["runs"],
            workers=workers,
        )
        return current.with_eta(eta)

    if calibration:
        spec = calibrate(spec)
    if lambda_grid and spec.rule == Rule.GMCC:
        spec = spec.with_lambda(select_lambda(shared.with_algorithm(spec), lambda_grid, held_out_seed, workers))
        if calibration:
            spec = calibrate(spec)
    return spec


def converge(config: ConfigRoot, out: str, workers: int) -> None:
    """One CSV row per iteration, one column per algorithm label"""
    entries = schema.labelled_algorithms(config)
    shared = schema.run_config_from(config, entries[0][1])
    tuned = [(label, tune(config, shared, spec, workers)) for label, spec in entries]
    curves = convergence_comparison(tuned, shared, config.get("divergence_threshold"), workers)
    columns: Dict[str, Any] = {"iteration": np.arange(shared.iterations + 1)}
    summary: Dict[str, Any] = {}
    for (label, curve), (_, spec) in zip(curves, tuned):
        columns[label] = curve.wep
        summary[label] = {
            **spec.to_dict(),
            "runs": curve.runs,
            "diverged": curve.diverged,
            "pod": curve.pod,
            "final_wep": float(curve.wep[-1]),
        }
    ResultWriter(out, config, Subcommand.CONVERGE.value, config.get("seed")).csv(
        pd.DataFrame(columns), summary
    )


HANDLERS: Dict[Subcommand, Callable[[ConfigRoot, str, int], None]] = {
    Subcommand.KERNEL_EVAL: kernel_eval,
    Subcommand.THEORY: theory,
    Subcommand.POD: pod,
    Subcommand.EMSE: emse,
    Subcommand.CONVERGE: converge,
}


if __name__ == "__main__":
    main()
