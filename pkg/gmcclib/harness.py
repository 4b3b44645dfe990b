""" Seeded Monte Carlo system-identification experiments."""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from gmcclib.enums import Rule
from gmcclib.exceptions import DomainError
from gmcclib.filters import AlgorithmSpec
from gmcclib.noise import GaussianNoise, NoiseModel, SeededStream, noise_from_dict
from gmcclib.theory import TheoryInputs, emse_curve

logger = logging.getLogger(__name__)

DEFAULT_W0 = (0.1, 0.2, 0.3, 0.4, 0.5, 0.4, 0.3, 0.2, 0.1)
DEFAULT_DIVERGENCE_THRESHOLD = 100.0
# a run whose weight-error power passes this is halted as diverged
DIVERGENCE_CAP = 1e100
# stream channels within a run
INPUT_CHANNEL = 0
NOISE_CHANNEL = 1


@dataclass(frozen=True)
class SystemIdSetup:
    """
    Unknown system W0 driven by white Gaussian input, observed in additive noise
    d(i) = W0'X(i) + v(i)
    """

    w0: np.ndarray
    input_variance: float
    noise: NoiseModel

    def __post_init__(self) -> None:
        w0 = np.array(self.w0, dtype=float).reshape(-1)
        if w0.size < 1 or not np.all(np.isfinite(w0)):
            raise DomainError("w0 must be a non-empty vector of finite taps")
        if not self.input_variance > 0:
            raise DomainError(f"Input variance must be positive, got {self.input_variance}")
        w0.setflags(write=False)
        object.__setattr__(self, "w0", w0)

    @property
    def m(self) -> int:
        return self.w0.size

    @property
    def trace_rxx(self) -> float:
        return self.m * self.input_variance

    @classmethod
    def from_dict(cls, spec: Mapping[str, Any]) -> "SystemIdSetup":
        """
        :param spec: mapping with w0 (default: the nine-tap symmetric system), optional m
            (zero-pads w0), input_variance (default 1) and noise
        :return: SystemIdSetup
        """
        w0 = list(spec.get("w0") or DEFAULT_W0)
        m = spec.get("m")
        if m is not None:
            if int(m) < len(w0):
                raise DomainError(f"m={m} is shorter than w0 ({len(w0)} taps)")
            w0 += [0.0] * (int(m) - len(w0))
        return cls(
            np.array(w0, dtype=float),
            float(spec.get("input_variance", 1.0)),
            noise_from_dict(spec["noise"]),
        )


@dataclass(frozen=True)
class RunConfig:
    """Monte Carlo settings for one algorithm on one setup"""

    iterations: int
    num_runs: int
    base_seed: int
    algorithm: AlgorithmSpec
    setup: SystemIdSetup

    def __post_init__(self) -> None:
        if self.iterations < 1 or self.num_runs < 1:
            raise DomainError(
                f"iterations and num_runs must be >= 1, got {self.iterations}, {self.num_runs}"
            )

    def with_algorithm(self, algorithm: AlgorithmSpec) -> "RunConfig":
        return replace(self, algorithm=algorithm)


@dataclass
class RunTrace:
    """
    Per-iteration record of one run. wep has iterations + 1 entries (wep[0] is the
    initial ||W0||^2); ea, e and xnorm2 have one entry per iteration and hold nan
    after a halt.
    """

    wep: np.ndarray
    ea: np.ndarray
    e: np.ndarray
    xnorm2: np.ndarray
    diverged: bool = False
    halted_at: Optional[int] = None

    @property
    def final_wep(self) -> float:
        return float(self.wep[-1])


@dataclass
class LearningCurve:
    """Weight-error power averaged over runs, with the number of diverged runs"""

    wep: np.ndarray
    runs: int
    diverged: int = 0

    @property
    def pod(self) -> float:
        return self.diverged / self.runs


@dataclass
class PodRow:
    """
    Diverged runs at one step-size. halted_count counts runs stopped at
    DIVERGENCE_CAP; max_final_wep is the largest final weight-error power.
    """

    eta: float
    diverged_count: int
    total_runs: int
    halted_count: int = 0
    max_final_wep: float = math.nan

    @property
    def pod(self) -> float:
        return self.diverged_count / self.total_runs


@dataclass
class PodReport:
    """Probability of divergence per step-size"""

    label: str
    rows: List[PodRow] = field(default_factory=list)


@dataclass
class EmseReport:
    """Simulated against theoretical steady-state EMSE at one (eta, noise variance) point"""

    eta: float
    noise_variance: float
    simulated_emse: float
    theoretical_full: float
    theoretical_simplified: float
    theory_valid: bool
    diverged_runs: int = 0

    @property
    def relative_gap(self) -> float:
        """|simulated - theory| / theory; inf when the theory predicts zero"""
        if self.theoretical_full == 0:
            return math.inf
        return abs(self.simulated_emse - self.theoretical_full) / self.theoretical_full


def tapped_delay_line(x: np.ndarray, m: int) -> np.ndarray:
    """
    Rows X(i) = [x(i), x(i-1), ..., x(i-m+1)] with zero pre-history
    :param x: input signal
    :param m: filter length
    :return: array of shape (len(x), m)
    """
    padded = np.concatenate([np.zeros(m - 1), np.asarray(x, dtype=float)])
    return np.ascontiguousarray(sliding_window_view(padded, m)[:, ::-1])


def system_signals(
    setup: SystemIdSetup, iterations: int, base_seed: int, run_index: int
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Input vectors, desired signal and noise of one run; a pure function of
    (setup, iterations, base_seed, run_index), whatever algorithm consumes them.
    :return: (X, d, v)
    """
    stream = SeededStream(base_seed, run_index)
    x = GaussianNoise(0.0, setup.input_variance).draw(iterations, stream.generator(INPUT_CHANNEL))
    v = setup.noise.draw(iterations, stream.generator(NOISE_CHANNEL))
    xs = tapped_delay_line(x, setup.m)
    return xs, xs @ setup.w0 + v, v


def adapt(
    spec: AlgorithmSpec, w0: np.ndarray, xs: np.ndarray, d: np.ndarray, v: np.ndarray
) -> RunTrace:
    """
    Run one adaptive filter from the null vector over prepared signals
    :param spec: update rule
    :param w0: true system
    :param xs: input vectors, one row per iteration
    :param d: desired signal
    :param v: noise (for the a priori error e_a = e - v)
    :return: RunTrace
    """
    n = xs.shape[0]
    gain, eta = spec.gain, spec.eta
    w = np.zeros(w0.size)
    wep = np.empty(n + 1)
    wep[0] = float(w0 @ w0)
    ea = np.full(n, np.nan)
    e_trace = np.full(n, np.nan)
    xnorm2 = np.einsum("ij,ij->i", xs, xs)
    d_list, v_list = d.tolist(), v.tolist()

    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(n):
            x = xs[i]
            e = d_list[i] - float(w @ x)
            e_trace[i] = e
            ea[i] = e - v_list[i]
            step = eta * gain(e)
            if step != 0.0:
                w = w + step * x
            diff = w0 - w
            power = float(diff @ diff)
            if not math.isfinite(power) or power > DIVERGENCE_CAP:
                last = power if math.isfinite(power) else wep[i]
                wep[i + 1 :] = last
                xnorm2[i + 1 :] = np.nan
                logger.debug("Run halted at iteration %d (wep %s)", i + 1, power)
                return RunTrace(wep, ea, e_trace, xnorm2, diverged=True, halted_at=i + 1)
            wep[i + 1] = power
    return RunTrace(wep, ea, e_trace, xnorm2)


def run_single(config: RunConfig, run_index: int) -> RunTrace:
    """
    One Monte Carlo run, fully determined by (config.base_seed, run_index)
    :param config: run configuration
    :param run_index: stream index of this run
    :return: RunTrace
    """
    xs, d, v = system_signals(config.setup, config.iterations, config.base_seed, run_index)
    return adapt(config.algorithm, config.setup.w0, xs, d, v)


def _final_task(task: Tuple[RunConfig, int]) -> Tuple[float, bool]:
    trace = run_single(*task)
    return trace.final_wep, trace.diverged


def _paired_task(
    task: Tuple[Sequence[AlgorithmSpec], RunConfig, int]
) -> List[Tuple[np.ndarray, bool]]:
    specs, config, run_index = task
    xs, d, v = system_signals(config.setup, config.iterations, config.base_seed, run_index)
    results = []
    for spec in specs:
        trace = adapt(spec, config.setup.w0, xs, d, v)
        results.append((trace.wep, trace.diverged))
    return results


def _emse_task(task: Tuple[RunConfig, int, int]) -> Tuple[float, bool]:
    config, run_index, window = task
    trace = run_single(config, run_index)
    tail = trace.ea[-window:]
    return math.fsum((tail * tail).tolist()) / window, trace.diverged


def _map_runs(fn: Callable[[Any], Any], tasks: List[Any], workers: int) -> List[Any]:
    """Results in task order, serially or on a process pool"""
    if workers <= 1 or len(tasks) <= 1:
        return [fn(task) for task in tasks]
    chunk = max(1, len(tasks) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks, chunksize=chunk))


def _column_means(rows: List[np.ndarray]) -> np.ndarray:
    stack = np.vstack(rows)
    return np.array([math.fsum(col) for col in stack.T.tolist()]) / stack.shape[0]


def pod_experiment(
    config: RunConfig,
    etas: Iterable[float],
    divergence_threshold: float = DEFAULT_DIVERGENCE_THRESHOLD,
    workers: int = 1,
    label: Optional[str] = None,
) -> PodReport:
    """
    Probability of divergence of config.algorithm for each step-size.
    A run diverges when its final ||W0 - W||^2 exceeds the threshold or its weights
    stop being finite.
    :param config: run configuration (its algorithm's eta is replaced)
    :param etas: step-sizes
    :param divergence_threshold: weight-error power threshold (> 0)
    :param workers: parallel processes
    :param label: report label (defaults to the algorithm label)
    :return: PodReport
    """
    if not 0 < divergence_threshold < DIVERGENCE_CAP:
        raise DomainError(
            f"Divergence threshold must be in (0, {DIVERGENCE_CAP:g}), got {divergence_threshold}"
        )
    report = PodReport(label or config.algorithm.label)
    for eta in etas:
        run_config = config.with_algorithm(config.algorithm.with_eta(eta))
        tasks = [(run_config, run) for run in range(config.num_runs)]
        outcomes = _map_runs(_final_task, tasks, workers)
        diverged = sum(
            1 for final, stopped in outcomes if stopped or final > divergence_threshold
        )
        halted = sum(1 for _, stopped in outcomes if stopped)
        row = PodRow(
            float(eta), diverged, config.num_runs, halted, max(final for final, _ in outcomes)
        )
        logger.info("%s eta=%g: %d/%d runs diverged", report.label, eta, diverged, config.num_runs)
        report.rows.append(row)
    return report


def emse_sweep(
    config: RunConfig,
    etas: Iterable[float],
    noise_variances: Optional[Iterable[float]] = None,
    steady_window: int = 500,
    workers: int = 1,
) -> List[EmseReport]:
    """
    Simulated and theoretical steady-state EMSE over step-sizes and, optionally,
    noise variances (the noise model is rescaled to each variance)
    :return: one EmseReport per (noise variance, eta), noise variance outermost
    """
    if config.algorithm.rule != Rule.GMCC:
        raise DomainError("EMSE experiments need a GMCC algorithm")
    if not 0 < steady_window < config.iterations:
        raise DomainError(
            f"steady_window must be in (0, {config.iterations}), got {steady_window}"
        )
    etas = [float(eta) for eta in etas]
    setups = (
        [config.setup]
        if noise_variances is None
        else [
            replace(config.setup, noise=config.setup.noise.with_variance(var))
            for var in noise_variances
        ]
    )
    reports = []
    for setup in setups:
        base = TheoryInputs(config.algorithm.kernel, 0.0, setup.trace_rxx, setup.noise)
        theory = emse_curve(base, etas)
        for eta, predicted in zip(etas, theory):
            run_config = replace(config, setup=setup, algorithm=config.algorithm.with_eta(eta))
            tasks = [(run_config, run, steady_window) for run in range(config.num_runs)]
            outcomes = _map_runs(_emse_task, tasks, workers)
            diverged = sum(1 for _, halted in outcomes if halted)
            simulated = math.fsum(value for value, _ in outcomes) / config.num_runs
            if diverged:
                logger.warning("%d runs diverged at eta=%g; simulated EMSE is nan", diverged, eta)
            logger.info(
                "eta=%g noise variance=%g: simulated %.6g, theory %.6g",
                eta,
                setup.noise.variance,
                simulated,
                predicted.full,
            )
            reports.append(
                EmseReport(
                    eta=eta,
                    noise_variance=setup.noise.variance,
                    simulated_emse=simulated,
                    theoretical_full=predicted.full,
                    theoretical_simplified=predicted.simplified,
                    theory_valid=predicted.valid,
                    diverged_runs=diverged,
                )
            )
    return reports


def emse_experiment(config: RunConfig, steady_window: int = 500, workers: int = 1) -> EmseReport:
    """
    Steady-state EMSE of config.algorithm: mean over runs of the mean of e_a(i)^2
    over the last steady_window iterations, next to the theoretical values with
    Tr(Rxx) = m * input_variance
    :return: EmseReport
    """
    return emse_sweep(config, [config.algorithm.eta], None, steady_window, workers)[0]


def convergence_comparison(
    entries: Sequence[Tuple[str, AlgorithmSpec]],
    config: RunConfig,
    divergence_threshold: float = DEFAULT_DIVERGENCE_THRESHOLD,
    workers: int = 1,
) -> List[Tuple[str, LearningCurve]]:
    """
    Averaged learning curves of several algorithms on identical signal realizations
    (every algorithm sees the same input and noise in a given run)
    :param entries: (label, AlgorithmSpec) pairs
    :param config: shared settings; its own algorithm is ignored
    :param divergence_threshold: final weight-error power counted as divergence
    :param workers: parallel processes
    :return: (label, LearningCurve) pairs in entry order
    """
    specs = [spec for _, spec in entries]
    tasks = [(specs, config, run) for run in range(config.num_runs)]
    per_run = _map_runs(_paired_task, tasks, workers)
    curves = []
    for index, (label, _) in enumerate(entries):
        weps = [outcome[index][0] for outcome in per_run]
        diverged = sum(
            1
            for wep, halted in (outcome[index] for outcome in per_run)
            if halted or wep[-1] > divergence_threshold
        )
        curve = LearningCurve(_column_means(weps), config.num_runs, diverged)
        logger.info("%s: final wep %.6g, %d diverged", label, curve.wep[-1], diverged)
        curves.append((label, curve))
    return curves


def _mean_wep_at(config: RunConfig, at_iteration: int, workers: int) -> float:
    tasks = [(replace(config, iterations=at_iteration), run) for run in range(config.num_runs)]
    outcomes = _map_runs(_final_task, tasks, workers)
    return math.fsum(final for final, _ in outcomes) / config.num_runs


def calibrate_step_size(
    config: RunConfig,
    target_wep: float,
    at_iteration: int = 200,
    lo: float = 1e-6,
    hi: float = 1.0,
    runs: int = 20,
    rtol: float = 0.1,
    max_steps: int = 40,
    workers: int = 1,
) -> float:
    """
    Geometric bisection of eta so that the mean weight-error power at at_iteration
    is within rtol of target_wep; used to give several algorithms the same initial
    convergence speed.
    :return: calibrated eta (the closest candidate when the tolerance is not met)
    """
    if not target_wep > 0 or at_iteration < 1 or not 0 < lo < hi:
        raise DomainError("Calibration needs target_wep > 0, at_iteration >= 1 and 0 < lo < hi")
    probe = replace(config, num_runs=min(runs, config.num_runs))
    best_eta, best_miss = math.sqrt(lo * hi), math.inf
    for _ in range(max_steps):
        mid = math.sqrt(lo * hi)
        value = _mean_wep_at(probe.with_algorithm(probe.algorithm.with_eta(mid)), at_iteration, workers)
        miss = abs(value / target_wep - 1.0)
        logger.debug("Calibration eta=%g: wep(%d)=%g", mid, at_iteration, value)
        if miss < best_miss:
            best_eta, best_miss = mid, miss
        if miss <= rtol:
            break
        if value > target_wep:
            lo = mid
        else:
            hi = mid
    else:
        logger.warning(
            "Calibration of %s did not reach %.0f%% of the target; using eta=%g",
            config.algorithm.label,
            100 * rtol,
            best_eta,
        )
    logger.info("Calibrated %s to eta=%g", config.algorithm.label, best_eta)
    return best_eta


def select_lambda(
    config: RunConfig, lambdas: Iterable[float], seed: int, workers: int = 1
) -> float:
    """
    Grid search of the GMCC kernel parameter on a held-out seed, minimizing the mean
    final weight-error power (first candidate wins ties)
    :return: selected lambda
    """
    if config.algorithm.rule != Rule.GMCC:
        raise DomainError("Only GMCC algorithms have a kernel parameter")
    held_out = replace(config, base_seed=seed)
    best, best_value = None, math.inf
    for lam in lambdas:
        probe = held_out.with_algorithm(config.algorithm.with_lambda(lam))
        value = _mean_wep_at(probe, config.iterations, workers)
        logger.debug("lambda=%g: mean final wep %g", lam, value)
        if best is None or value < best_value:
            best, best_value = float(lam), value
    if best is None:
        raise DomainError("No lambda candidates given")
    logger.info("Selected lambda=%g for %s", best, config.algorithm.label)
    return best
