""" Acceptance runs of the shipped experiment configurations (desk scale).
Set GMCC_THREADS to cap the number of worker processes."""

import math
import os
import unittest
from dataclasses import replace

import numpy as np

from gmcclib import schema
from gmcclib.config_root import ConfigRoot
from gmcclib.enums import Rule, Subcommand
from gmcclib.harness import convergence_comparison, emse_sweep, pod_experiment
from gmcclib.utils import worker_count

CONFIGS = os.path.join(os.path.dirname(os.path.abspath(__file__)), os.pardir, "configs")


def load(name, subcommand):
    return ConfigRoot(os.path.join(CONFIGS, name), template_gen=schema.TEMPLATES[subcommand])


class TestProbabilityOfDivergence(unittest.TestCase):
    def test_gmcc_weights_stay_bounded(self):
        config = load("pod.json", Subcommand.POD)
        etas = schema.pod_etas(config)
        threshold = config.get("divergence_threshold")
        self.assertEqual(len(etas), 10)
        entries = schema.labelled_algorithms(config)
        self.assertEqual(sorted(spec.kernel.lam for _, spec in entries), [0.1, 1.0])
        for label, spec in entries:
            report = pod_experiment(
                schema.run_config_from(config, spec), etas, threshold, worker_count(), label=label
            )
            for row in report.rows:
                self.assertEqual(row.total_runs, 200)
                # weights stay bounded everywhere; a few lambda=0.1 runs settle above
                # the threshold at the largest step-size
                self.assertEqual(row.halted_count, 0, f"{label} halted at eta={row.eta}")
                self.assertLess(row.max_final_wep, 10 * threshold, f"{label} at eta={row.eta}")
                if spec.kernel.lam == 1.0 or row.eta <= 0.2:
                    self.assertEqual(row.diverged_count, 0, f"{label} diverged at eta={row.eta}")

    def test_lmf_diverges(self):
        config = load("pod_lmf.json", Subcommand.POD)
        (label, spec), = schema.labelled_algorithms(config)
        self.assertEqual(spec.rule, Rule.LMP)
        self.assertEqual(spec.p, 4.0)
        report = pod_experiment(
            schema.run_config_from(config, spec),
            schema.pod_etas(config),
            config.get("divergence_threshold"),
            worker_count(),
            label=label,
        )
        self.assertGreater(report.rows[0].pod, 0.0)


class TestSteadyStateEmse(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        config = load("emse_uniform.json", Subcommand.EMSE)
        spec = schema.algorithm_from(config)
        cls.reports = emse_sweep(
            schema.run_config_from(config, spec),
            config.get("etas"),
            None,
            config.get("steady_window"),
            worker_count(),
        )

    def test_small_step_size_matches_theory(self):
        report = self.reports[0]
        self.assertEqual(report.eta, 1e-3)
        self.assertTrue(report.theory_valid)
        self.assertEqual(report.diverged_runs, 0)
        self.assertLessEqual(report.relative_gap, 0.15)

    def test_increasing_in_step_size(self):
        simulated = [r.simulated_emse for r in self.reports]
        # outside its validity region the theory predicts no finite EMSE
        theory = [r.theoretical_full if r.theory_valid else math.inf for r in self.reports]
        self.assertTrue(np.all(np.isfinite(simulated)))
        self.assertTrue(all(a < b for a, b in zip(simulated, simulated[1:])), simulated)
        self.assertTrue(all(a < b for a, b in zip(theory, theory[1:])), theory)

    def test_gap_grows_with_step_size(self):
        first, last = self.reports[0], self.reports[-1]
        gap = last.relative_gap if last.theory_valid else math.inf
        self.assertGreater(gap, first.relative_gap)


class TestImpulsiveNoise(unittest.TestCase):
    def test_gmcc_converges_lmf_diverges(self):
        config = load("converge_impulsive.json", Subcommand.CONVERGE)
        entries = dict(schema.labelled_algorithms(config))
        self.assertEqual(list(entries), ["SA", "LMS", "LMF", "MCC", "GMCC", "GMCC_alpha_6"])
        shared = schema.run_config_from(config, entries["GMCC"])
        curves = dict(
            convergence_comparison(
                [(label, entries[label]) for label in ("GMCC", "LMF", "SA", "LMS")],
                shared,
                config.get("divergence_threshold"),
                worker_count(),
            )
        )
        gmcc = curves["GMCC"]
        self.assertEqual(gmcc.runs, 100)
        self.assertTrue(math.isfinite(gmcc.wep[-1]))
        self.assertLess(gmcc.wep[-1], gmcc.wep[0])
        self.assertGreater(curves["LMF"].pod, 0.5)
        # the low-order members of the family stay bounded in the same noise
        for label in ("SA", "LMS"):
            self.assertEqual(curves[label].diverged, 0, label)
            self.assertLess(curves[label].wep[-1], curves[label].wep[0], label)


class TestLightTailedMixtures(unittest.TestCase):
    NOISES = ("gaussian", "binary", "laplace", "uniform")

    def test_configurations(self):
        for kind in self.NOISES:
            config = load(f"converge_mixture_{kind}.json", Subcommand.CONVERGE)
            entries = dict(schema.labelled_algorithms(config))
            self.assertEqual(list(entries), ["SA", "LMS", "LMF", "MCC", "GMCC_alpha_4", "GMCC_alpha_6"])
            self.assertEqual(entries["MCC"].kernel.alpha, 2.0)
            self.assertEqual(entries["GMCC_alpha_6"].kernel.alpha, 6.0)
            noise = schema.setup_from(config).noise
            self.assertEqual(noise.c, 0.06)
            self.assertEqual(noise.outer.variance, 15.0)
            self.assertAlmostEqual(noise.inner.variance, 1.0, places=12)

    def test_sixth_order_beats_mcc(self):
        for kind in ("binary", "uniform"):
            config = load(f"converge_mixture_{kind}.json", Subcommand.CONVERGE)
            entries = dict(schema.labelled_algorithms(config))
            shared = replace(schema.run_config_from(config, entries["MCC"]), num_runs=20, iterations=3000)
            curves = dict(
                convergence_comparison(
                    [("MCC", entries["MCC"]), ("GMCC_alpha_6", entries["GMCC_alpha_6"])],
                    shared,
                    config.get("divergence_threshold"),
                    worker_count(),
                )
            )
            steady = {label: float(np.mean(curve.wep[-1000:])) for label, curve in curves.items()}
            self.assertEqual(curves["GMCC_alpha_6"].diverged, 0, kind)
            self.assertLess(steady["GMCC_alpha_6"], steady["MCC"], f"{kind}: {steady}")
