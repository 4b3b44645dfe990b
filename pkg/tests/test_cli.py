""" End-to-end tests of the gmcc command line."""

import contextlib
import io
import json
import logging
import math
import os
import tempfile
import unittest
from unittest import mock

import pandas as pd
from numpy.testing import assert_allclose

from gmcclib.cli import EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, run_cli
from gmcclib.result_writer import META_SUFFIX

POD = {
    "schema": 1,
    "runs": 4,
    "iterations": 100,
    "seed": 7,
    "setup": {"noise": {"kind": "gaussian"}},
    "algorithms": {
        "GMCC": {"rule": "gmcc", "alpha": 4, "lambda": 1.0},
        "LMF": {"rule": "lmf"},
    },
    "etas": [0.01, 0.1],
}

EMSE = {
    "schema": 1,
    "runs": 2,
    "iterations": 400,
    "setup": {"m": 20, "noise": {"kind": "uniform", "lo": -1.7320508075688772, "hi": 1.7320508075688772}},
    "algorithm": {"rule": "gmcc", "alpha": 4, "lambda": 0.03, "eta": 0.002},
    "etas": [0.001, 0.002],
    "steady_window": 100,
}

CONVERGE = {
    "schema": 1,
    "runs": 2,
    "iterations": 100,
    "setup": {"noise": {"kind": "gaussian", "variance": 0.01}},
    "algorithms": {
        "GMCC": {"rule": "gmcc", "alpha": 4, "lambda": 0.03},
        "LMS": {"rule": "lms"},
    },
    "calibration": {"target_wep": 0.5, "at_iteration": 50, "runs": 2},
}


@mock.patch.dict(os.environ, {"GMCC_THREADS": "1"})
class TestCli(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.package_logger = logging.getLogger("gmcclib")
        self.saved = (list(self.package_logger.handlers), self.package_logger.level)

    def tearDown(self):
        self.package_logger.handlers, level = self.saved
        self.package_logger.setLevel(level)
        self.tmp.cleanup()

    def path(self, name):
        return os.path.join(self.tmp.name, name)

    def write_config(self, document, name="config.json"):
        with open(self.path(name), "w", encoding="utf-8") as f:
            if isinstance(document, str):
                f.write(document)
            else:
                json.dump(document, f, indent=2)
        return self.path(name)

    def run_gmcc(self, subcommand, document, out="out.csv", extra=()):
        """Run one invocation; returns (exit status, stderr text)"""
        stderr = io.StringIO()
        with contextlib.redirect_stderr(stderr):
            status = run_cli([subcommand, "--config", self.write_config(document), "--out", self.path(out), *extra])
        return status, stderr.getvalue()

    def read(self, name):
        with open(self.path(name), "r", encoding="utf-8") as f:
            return f.read()

    def read_csv(self, name="out.csv"):
        return pd.read_csv(self.path(name), skiprows=1)

    def read_meta(self, name="out.csv"):
        return json.loads(self.read(name + META_SUFFIX))

    # kernel-eval
    def test_kernel_eval(self):
        document = {"schema": 1, "kernel": {"alpha": 2, "beta": 1.0}, "x": [0.0, 1.0], "y": [0.0, 0.0]}
        status, _ = self.run_gmcc("kernel-eval", document, out="out.json")
        self.assertEqual(status, EXIT_OK)
        payload = json.loads(self.read("out.json"))
        gamma = 1.0 / math.sqrt(math.pi)
        assert_allclose(payload["correntropy"], gamma * (1.0 + math.exp(-1.0)) / 2.0, rtol=1e-12)
        assert_allclose(payload["gc_loss"], gamma * (1.0 - math.exp(-1.0)) / 2.0, rtol=1e-12)
        assert_allclose(payload["density"], [gamma, gamma * math.exp(-1.0)], rtol=1e-12)
        self.assertEqual(payload["n"], 2)
        self.assertEqual(payload["subcommand"], "kernel-eval")
        self.assertEqual(len(payload["config_hash"]), 64)
        self.assertFalse(os.path.exists(self.path("out.json" + META_SUFFIX)))

    def test_kernel_eval_singular_gradient_is_omitted(self):
        document = {"schema": 1, "kernel": {"alpha": 1, "lambda": 1.0}, "x": [0.0, 1.0]}
        with self.assertLogs("gmcclib.cli", "WARNING"):
            status, _ = self.run_gmcc("kernel-eval", document, out="out.json")
        self.assertEqual(status, EXIT_OK)
        payload = json.loads(self.read("out.json"))
        self.assertIsNone(payload["gradient"])
        self.assertIsNone(payload["hessian_diag"])

    # theory
    def test_theory(self):
        document = {
            "schema": 1,
            "kernel": {"alpha": 4, "lambda": 0.03},
            "etas": [0.001, 0.002],
            "m": 20,
            "noise": {"kind": "uniform", "lo": -1.7320508075688772, "hi": 1.7320508075688772},
        }
        status, _ = self.run_gmcc("theory", document, out="theory.json")
        self.assertEqual(status, EXIT_OK)
        payload = json.loads(self.read("theory.json"))
        self.assertEqual(payload["trace_rxx"], 20.0)
        self.assertEqual([r["eta"] for r in payload["results"]], [0.001, 0.002])
        self.assertTrue(all(r["valid"] for r in payload["results"]))
        self.assertLess(payload["results"][0]["full"], payload["results"][1]["full"])

    def test_runtime_error(self):
        document = {
            "schema": 1,
            "kernel": {"alpha": 1, "lambda": 0.5},
            "eta": 0.01,
            "trace_rxx": 10,
            "noise": {"kind": "gaussian"},
        }
        status, stderr = self.run_gmcc("theory", document, out="theory.json")
        self.assertEqual(status, EXIT_RUNTIME)
        self.assertIn("UnsupportedDensityError", stderr)
        self.assertFalse(os.path.exists(self.path("theory.json")))

    # configuration errors
    def test_malformed_json(self):
        status, stderr = self.run_gmcc("pod", '{\n  "schema": 1\n  "runs": 2\n}\n')
        self.assertEqual(status, EXIT_CONFIG)
        self.assertIn("config error at line 3", stderr)
        self.assertEqual(os.listdir(self.tmp.name), ["config.json"])

    def test_validation_error(self):
        status, stderr = self.run_gmcc("pod", dict(POD, runs=0))
        self.assertEqual(status, EXIT_CONFIG)
        self.assertIn("config error at line 3: /runs: Parameter /runs failed validation for value 0", stderr)
        self.assertFalse(os.path.exists(self.path("out.csv")))

    def test_missing_config_file(self):
        stderr = io.StringIO()
        with contextlib.redirect_stderr(stderr):
            status = run_cli(["pod", "--config", self.path("none.json"), "--out", self.path("out.csv")])
        self.assertEqual(status, EXIT_CONFIG)
        self.assertIn("does not exist or is not readable", stderr.getvalue())

    def test_bad_override(self):
        status, stderr = self.run_gmcc("pod", POD, extra=["--set", "runs"])
        self.assertEqual(status, EXIT_CONFIG)
        self.assertIn("is not of the form path=value", stderr)

    def test_usage_error(self):
        with contextlib.redirect_stderr(io.StringIO()):
            self.assertEqual(run_cli(["fit", "--config", "a.json", "--out", "b.csv"]), EXIT_CONFIG)
            self.assertEqual(run_cli(["pod", "--config", "a.json"]), EXIT_CONFIG)

    # pod
    def test_pod(self):
        status, _ = self.run_gmcc("pod", POD)
        self.assertEqual(status, EXIT_OK)
        meta = self.read_meta()
        header = self.read("out.csv").splitlines()[0]
        self.assertTrue(header.startswith("# gmcclib "))
        self.assertIn(f"config_hash={meta['config_hash']}", header)
        self.assertIn("base_seed=7", header)
        self.assertEqual(meta["subcommand"], "pod")
        self.assertEqual(meta["base_seed"], 7)
        self.assertEqual(meta["config"]["runs"], 4)

        frame = self.read_csv()
        self.assertEqual(list(frame.columns), ["label", "eta", "diverged_count", "total_runs", "pod"])
        self.assertEqual(meta["columns"], list(frame.columns))
        self.assertEqual(list(frame["label"]), ["GMCC", "GMCC", "LMF", "LMF"])
        assert_allclose(frame["eta"], [0.01, 0.1, 0.01, 0.1])
        self.assertEqual(list(frame["total_runs"]), [4, 4, 4, 4])
        self.assertEqual(list(frame["diverged_count"][:2]), [0, 0])
        assert_allclose(frame["pod"], frame["diverged_count"] / frame["total_runs"])

    def test_rerun_is_byte_identical(self):
        self.run_gmcc("pod", POD, out="first.csv")
        self.run_gmcc("pod", POD, out="second.csv")
        self.assertEqual(self.read("first.csv"), self.read("second.csv"))
        self.assertEqual(self.read("first.csv" + META_SUFFIX), self.read("second.csv" + META_SUFFIX))

    def test_worker_count_does_not_change_results(self):
        self.run_gmcc("pod", POD, out="serial.csv")
        with mock.patch.dict(os.environ, {"GMCC_THREADS": "2"}):
            self.run_gmcc("pod", POD, out="parallel.csv")
        self.assertEqual(self.read("serial.csv"), self.read("parallel.csv"))

    def test_overrides(self):
        status, _ = self.run_gmcc("pod", POD, extra=["--runs", "2", "--seed", "3", "--set", "etas=[0.02]"])
        self.assertEqual(status, EXIT_OK)
        frame = self.read_csv()
        self.assertEqual(list(frame["total_runs"]), [2, 2])
        assert_allclose(frame["eta"], [0.02, 0.02])
        self.assertEqual(self.read_meta()["base_seed"], 3)

        self.run_gmcc("pod", POD, out="plain.csv")
        self.assertNotEqual(self.read_meta()["config_hash"], self.read_meta("plain.csv")["config_hash"])

    # emse
    def test_emse(self):
        status, _ = self.run_gmcc("emse", EMSE, extra=["--set", "noise_variances=[0.5, 1.0]"])
        self.assertEqual(status, EXIT_OK)
        frame = self.read_csv()
        self.assertEqual(
            list(frame.columns),
            [
                "eta",
                "noise_variance",
                "simulated_emse",
                "theoretical_full",
                "theoretical_simplified",
                "theory_valid",
                "diverged_runs",
            ],
        )
        assert_allclose(frame["eta"], [0.001, 0.002, 0.001, 0.002])
        assert_allclose(frame["noise_variance"], [0.5, 0.5, 1.0, 1.0])
        self.assertEqual(list(frame["theory_valid"]), [1, 1, 1, 1])
        self.assertTrue((frame["simulated_emse"] > 0).all())
        self.assertEqual(self.read_meta()["summary"]["algorithm"]["lambda"], 0.03)

    # converge
    def test_converge_with_calibration(self):
        status, _ = self.run_gmcc("converge", CONVERGE)
        self.assertEqual(status, EXIT_OK)
        frame = self.read_csv()
        self.assertEqual(list(frame.columns), ["iteration", "GMCC", "LMS"])
        self.assertEqual(len(frame), 101)
        self.assertEqual(list(frame["iteration"][:3]), [0, 1, 2])
        assert_allclose(frame["GMCC"][0], frame["LMS"][0])

        summary = self.read_meta()["summary"]
        for label in ("GMCC", "LMS"):
            self.assertGreater(summary[label]["eta"], 0.0)
            self.assertEqual(summary[label]["runs"], 2)
        self.assertEqual(summary["GMCC"]["lambda"], 0.03)

    def test_converge_lambda_grid(self):
        document = dict(CONVERGE, lambda_grid=[0.01, 0.1])
        del document["calibration"]
        document["algorithms"] = {"GMCC": {"rule": "gmcc", "alpha": 4, "lambda": 0.5, "eta": 0.01}}
        status, _ = self.run_gmcc("converge", document)
        self.assertEqual(status, EXIT_OK)
        self.assertIn(self.read_meta()["summary"]["GMCC"]["lambda"], (0.01, 0.1))
