import math
import unittest

import numpy as np
from numpy.testing import assert_allclose, assert_array_equal

from gmcclib.exceptions import DomainError
from gmcclib.filters import AlgorithmSpec
from gmcclib.harness import (
    DEFAULT_W0,
    EmseReport,
    RunConfig,
    SystemIdSetup,
    calibrate_step_size,
    convergence_comparison,
    emse_experiment,
    emse_sweep,
    pod_experiment,
    run_single,
    select_lambda,
    system_signals,
    tapped_delay_line,
)
from gmcclib.noise import GaussianNoise, MixtureNoise, UniformNoise
from gmcclib.theory import empirical_step_bound

BASE_SEED = 2015
ROOT3 = math.sqrt(3.0)


def _config(algorithm, iterations=500, runs=4, noise=None, m=None, seed=BASE_SEED):
    w0 = np.array(DEFAULT_W0 + (0.0,) * ((m or len(DEFAULT_W0)) - len(DEFAULT_W0)))
    setup = SystemIdSetup(w0, 1.0, noise or GaussianNoise(0.0, 1.0))
    return RunConfig(iterations, runs, seed, algorithm, setup)


class TestSignals(unittest.TestCase):
    def test_tapped_delay_line(self):
        assert_array_equal(tapped_delay_line(np.array([1.0, 2.0, 3.0]), 2), [[1.0, 0.0], [2.0, 1.0], [3.0, 2.0]])
        assert_array_equal(tapped_delay_line(np.array([1.0, 2.0]), 1), [[1.0], [2.0]])

    def test_signals_are_reproducible(self):
        setup = _config(AlgorithmSpec.lmp(2.0, 0.01)).setup
        first = system_signals(setup, 100, BASE_SEED, 7)
        second = system_signals(setup, 100, BASE_SEED, 7)
        for a, b in zip(first, second):
            assert_array_equal(a, b)
        xs, d, v = first
        assert_allclose(d, xs @ setup.w0 + v)
        self.assertFalse(np.array_equal(v, system_signals(setup, 100, BASE_SEED, 8)[2]))

    def test_setup_from_dict(self):
        setup = SystemIdSetup.from_dict({"m": 20, "noise": {"kind": "uniform", "lo": -ROOT3, "hi": ROOT3}})
        self.assertEqual(setup.m, 20)
        assert_array_equal(setup.w0[:9], DEFAULT_W0)
        assert_array_equal(setup.w0[9:], np.zeros(11))
        self.assertEqual(setup.trace_rxx, 20.0)
        with self.assertRaises(DomainError):
            SystemIdSetup.from_dict({"w0": [1.0, 2.0, 3.0], "m": 2, "noise": {"kind": "gaussian"}})

    def test_invalid_run_config(self):
        with self.assertRaises(DomainError):
            _config(AlgorithmSpec.lmp(2.0, 0.01), iterations=0)
        with self.assertRaises(DomainError):
            _config(AlgorithmSpec.lmp(2.0, 0.01), runs=0)


class TestRunSingle(unittest.TestCase):
    def test_zero_step_size_keeps_initial_error(self):
        trace = run_single(_config(AlgorithmSpec.gmcc(4.0, 0.1, 0.0), iterations=50), 0)
        assert_allclose(trace.wep, np.full(51, sum(w * w for w in DEFAULT_W0)))
        self.assertFalse(trace.diverged)

    def test_deterministic(self):
        config = _config(AlgorithmSpec.gmcc(4.0, 0.1, 0.01), iterations=200)
        a, b = run_single(config, 3), run_single(config, 3)
        assert_array_equal(a.wep, b.wep)
        assert_array_equal(a.ea, b.ea)

    def test_gmcc_converges(self):
        config = _config(AlgorithmSpec.gmcc(4.0, 0.1, 0.01), iterations=1000)
        trace = run_single(config, 0)
        self.assertLess(trace.final_wep, 0.5 * trace.wep[0])
        self.assertEqual(trace.wep.size, 1001)
        self.assertEqual(trace.ea.size, 1000)
        assert_allclose(trace.e - trace.ea, system_signals(config.setup, 1000, BASE_SEED, 0)[2], atol=1e-12)

        bound = empirical_step_bound(trace.ea, trace.e, trace.xnorm2, config.algorithm.kernel)
        self.assertTrue(math.isfinite(bound))
        self.assertGreater(bound, 0.0)

    def test_lmf_overflow_halts_run(self):
        trace = run_single(_config(AlgorithmSpec.lmp(4.0, 1.0), iterations=500), 0)
        self.assertTrue(trace.diverged)
        self.assertIsNotNone(trace.halted_at)
        self.assertTrue(np.all(np.isfinite(trace.wep)))
        self.assertTrue(np.all(np.isnan(trace.ea[trace.halted_at :])))


class TestPod(unittest.TestCase):
    def test_zero_step_size_never_diverges(self):
        report = pod_experiment(_config(AlgorithmSpec.lmp(4.0, 0.0), iterations=50, runs=5), [0.0])
        self.assertEqual(report.rows[0].diverged_count, 0)
        self.assertEqual(report.rows[0].pod, 0.0)

    def test_gmcc_and_lmf(self):
        gmcc = pod_experiment(_config(AlgorithmSpec.gmcc(4.0, 1.0, 0.0), iterations=300, runs=10), [0.01, 0.1])
        self.assertEqual([row.diverged_count for row in gmcc.rows], [0, 0])
        self.assertEqual([row.halted_count for row in gmcc.rows], [0, 0])
        self.assertTrue(all(0 < row.max_final_wep < 100 for row in gmcc.rows))
        lmf = pod_experiment(_config(AlgorithmSpec.lmp(4.0, 0.0), iterations=300, runs=10), [0.1], label="LMF")
        self.assertEqual(lmf.label, "LMF")
        self.assertGreater(lmf.rows[0].pod, 0.0)
        self.assertEqual(lmf.rows[0].total_runs, 10)
        self.assertLessEqual(lmf.rows[0].halted_count, lmf.rows[0].diverged_count)

    def test_parallel_matches_serial(self):
        config = _config(AlgorithmSpec.lmp(4.0, 0.0), iterations=100, runs=6)
        serial = pod_experiment(config, [0.01, 0.05], workers=1)
        parallel = pod_experiment(config, [0.01, 0.05], workers=2)
        self.assertEqual(serial, parallel)

    def test_invalid_threshold(self):
        with self.assertRaises(DomainError):
            pod_experiment(_config(AlgorithmSpec.lmp(4.0, 0.0)), [0.01], divergence_threshold=0.0)


class TestEmse(unittest.TestCase):
    def test_nearly_noiseless_emse_vanishes(self):
        config = _config(AlgorithmSpec.gmcc(2.0, 1.0, 0.05), iterations=3000, runs=2, noise=GaussianNoise(0.0, 1e-10))
        report = emse_experiment(config, steady_window=500)
        self.assertLess(report.simulated_emse, 1e-8)
        self.assertTrue(report.theory_valid)
        self.assertEqual(report.diverged_runs, 0)

    def test_sweep_layout(self):
        config = _config(
            AlgorithmSpec.gmcc(4.0, 0.03, 1e-3),
            iterations=400,
            runs=2,
            noise=UniformNoise(-ROOT3, ROOT3),
            m=20,
        )
        reports = emse_sweep(config, [1e-3, 2e-3], [0.5, 1.0], steady_window=100)
        self.assertEqual([r.eta for r in reports], [1e-3, 2e-3, 1e-3, 2e-3])
        assert_allclose([r.noise_variance for r in reports], [0.5, 0.5, 1.0, 1.0])
        self.assertLess(reports[0].theoretical_full, reports[1].theoretical_full)
        self.assertLess(reports[0].theoretical_full, reports[2].theoretical_full)

    def test_rejected_configs(self):
        with self.assertRaises(DomainError):
            emse_experiment(_config(AlgorithmSpec.lmp(2.0, 0.01)))
        with self.assertRaises(DomainError):
            emse_experiment(_config(AlgorithmSpec.gmcc(4.0, 0.1, 0.01), iterations=100), steady_window=100)

    def test_relative_gap(self):
        report = EmseReport(1e-3, 1.0, 0.011, 0.01, 0.009, True)
        assert_allclose(report.relative_gap, 0.1)
        zero_step = emse_experiment(_config(AlgorithmSpec.gmcc(4.0, 0.1, 0.0), iterations=200, runs=2), steady_window=50)
        self.assertEqual(zero_step.theoretical_full, 0.0)
        self.assertGreater(zero_step.simulated_emse, 0.0)
        self.assertEqual(zero_step.relative_gap, math.inf)


class TestConvergence(unittest.TestCase):
    def test_identical_specs_give_identical_curves(self):
        spec = AlgorithmSpec.gmcc(4.0, 0.1, 0.01)
        config = _config(spec, iterations=300, runs=3)
        curves = convergence_comparison([("a", spec), ("b", spec)], config)
        self.assertEqual([label for label, _ in curves], ["a", "b"])
        assert_array_equal(curves[0][1].wep, curves[1][1].wep)
        self.assertEqual(curves[0][1].runs, 3)

    def test_paired_runs_match_single_runs(self):
        gmcc, lms = AlgorithmSpec.gmcc(4.0, 0.1, 0.01), AlgorithmSpec.lmp(2.0, 0.01)
        config = _config(gmcc, iterations=200, runs=1)
        curves = convergence_comparison([("gmcc", gmcc), ("lms", lms)], config)
        assert_allclose(curves[0][1].wep, run_single(config, 0).wep)
        assert_allclose(curves[1][1].wep, run_single(config.with_algorithm(lms), 0).wep)

    def test_impulsive_noise(self):
        noise = MixtureNoise(0.06, UniformNoise(-ROOT3, ROOT3), GaussianNoise(0.0, 100.0))
        config = _config(AlgorithmSpec.gmcc(4.0, 0.1, 0.01), iterations=1000, runs=4, noise=noise)
        curves = dict(
            convergence_comparison(
                [("gmcc", config.algorithm), ("lmf", AlgorithmSpec.lmp(4.0, 0.01))], config, workers=2
            )
        )
        self.assertLess(curves["gmcc"].wep[-1], curves["gmcc"].wep[0])
        self.assertEqual(curves["gmcc"].diverged, 0)
        self.assertGreater(curves["lmf"].pod, 0.5)


class TestTuning(unittest.TestCase):
    def test_calibrated_step_size_hits_target(self):
        config = _config(AlgorithmSpec.lmp(2.0, 0.0), iterations=200, runs=10, noise=GaussianNoise(0.0, 0.01))
        eta = calibrate_step_size(config, target_wep=0.1, at_iteration=200, runs=10)
        probe = config.with_algorithm(config.algorithm.with_eta(eta))
        mean = math.fsum(run_single(probe, run).wep[200] for run in range(10)) / 10
        self.assertLessEqual(abs(mean / 0.1 - 1.0), 0.1)

    def test_select_lambda(self):
        config = _config(AlgorithmSpec.gmcc(4.0, 0.1, 0.01), iterations=200, runs=2)
        self.assertIn(select_lambda(config, [0.01, 0.1, 1.0], seed=BASE_SEED + 1), (0.01, 0.1, 1.0))
        with self.assertRaises(DomainError):
            select_lambda(config.with_algorithm(AlgorithmSpec.lmp(2.0, 0.01)), [0.1], seed=1)
        with self.assertRaises(DomainError):
            select_lambda(config, [], seed=1)

    def test_calibration_arguments(self):
        config = _config(AlgorithmSpec.lmp(2.0, 0.0), iterations=50, runs=2)
        with self.assertRaises(DomainError):
            calibrate_step_size(config, target_wep=0.0)
        with self.assertRaises(DomainError):
            calibrate_step_size(config, target_wep=0.1, lo=1.0, hi=0.5)
