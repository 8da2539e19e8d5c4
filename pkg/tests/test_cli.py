"""
End-to-end tests of the sphere-moments command line.
"""

import csv
import json
import shutil
import tempfile
import unittest
from pathlib import Path

from cli.commands import EXIT_CONFIG, EXIT_OK, run


def read_output(path: Path):
    """Rows as dicts plus the decoded footer lines."""
    lines = path.read_text(encoding="utf-8").splitlines()
    body = [line for line in lines if not line.startswith("#")]
    footers = [json.loads(line[2:]) for line in lines if line.startswith("# ")]
    return list(csv.DictReader(body)), footers


class CliTestCase(unittest.TestCase):

    def setUp(self):
        self.tmp = Path(tempfile.mkdtemp())
        self.config = self.write_config({})

    def tearDown(self):
        shutil.rmtree(self.tmp, ignore_errors=True)

    def write_config(self, values, name="run.json") -> Path:
        path = self.tmp / name
        path.write_text(json.dumps(values), encoding="utf-8")
        return path

    def run_cli(self, command, *extra, config=None, out="out.csv"):
        out_path = self.tmp / out
        code = run([command, "--config", str(config or self.config), "--out", str(out_path), *extra])
        return code, out_path


class TestShapeDerivativeCommand(CliTestCase):
    """u' at the default evaluation points."""

    def test_example1_values(self):
        code, out = self.run_cli("shape-derivative")
        self.assertEqual(code, EXIT_OK)
        rows, footers = read_output(out)
        values = [float(row["u_prime"]) for row in rows]
        self.assertAlmostEqual(values[0], 1.0 / 210.0, places=14)
        self.assertAlmostEqual(values[1], 1.0 / 210.0, places=14)
        self.assertAlmostEqual(values[2], 0.0, places=14)
        self.assertEqual(len(footers), 1)
        self.assertEqual(len(footers[0]["config_hash"]), 64)

    def test_equal_coefficients(self):
        code, out = self.run_cli("shape-derivative", "--set", "alpha_plus=2.0")
        self.assertEqual(code, EXIT_OK)
        rows, _ = read_output(out)
        self.assertTrue(all(float(row["u_prime"]) == 0.0 for row in rows))

    def test_reruns_are_byte_identical(self):
        _, first = self.run_cli("shape-derivative", out="a.csv")
        _, second = self.run_cli("shape-derivative", out="b.csv")
        self.assertEqual(first.read_bytes(), second.read_bytes())

    def test_hash_follows_configuration(self):
        _, first = self.run_cli("shape-derivative", out="a.csv")
        _, second = self.run_cli("shape-derivative", "--seed", "7", out="b.csv")
        self.assertNotEqual(read_output(first)[1][0]["config_hash"], read_output(second)[1][0]["config_hash"])


class TestMomentsCommand(CliTestCase):
    """Moments of u' at pairs of evaluation points."""

    def test_covariance(self):
        code, out = self.run_cli("moments")
        self.assertEqual(code, EXIT_OK)
        rows, footers = read_output(out)
        self.assertEqual(len(rows), 6)
        self.assertIn("scaled_cov", rows[0])
        cov = float(rows[0]["cov_uprime"])
        self.assertAlmostEqual(cov / (1.0 / 132300.0), 1.0, places=10)
        self.assertAlmostEqual(float(rows[0]["scaled_cov"]), 0.01 * cov, places=18)
        self.assertAlmostEqual(float(rows[2]["cov_uprime"]), 0.0, places=16)
        self.assertEqual(footers[0]["moment_order"], 2)

    def test_third_moment_vanishes(self):
        code, out = self.run_cli("moments", "--set", "moment_order=3")
        self.assertEqual(code, EXIT_OK)
        rows, _ = read_output(out)
        self.assertTrue(all(float(row["m3_uprime"]) == 0.0 for row in rows))

    def test_multi_mode_third_moment_rejected(self):
        config = self.write_config(
            {
                "moment_order": 3,
                "kappa": {"modes": [{"constant": 1.0}, {"sigma": 0.1, "harmonics": [[1, 0, 1.0]]}]},
            },
            name="modes.json",
        )
        code, _ = self.run_cli("moments", config=config)
        self.assertEqual(code, EXIT_CONFIG)


class TestConfigErrors(CliTestCase):
    """Invalid configurations exit with code 2 and name the field."""

    def test_invalid_epsilon(self):
        with self.assertLogs("sphere_moments", level="ERROR") as logs:
            code, _ = self.run_cli("shape-derivative", "--set", "epsilon=1.5")
        self.assertEqual(code, EXIT_CONFIG)
        self.assertIn("epsilon", "\n".join(logs.output))

    def test_unknown_key(self):
        config = self.write_config({"band_limt": 8}, name="typo.json")
        with self.assertLogs("sphere_moments", level="ERROR") as logs:
            code, _ = self.run_cli("shape-derivative", config=config)
        self.assertEqual(code, EXIT_CONFIG)
        self.assertIn("band_limt", "\n".join(logs.output))

    def test_missing_config_file(self):
        code, _ = self.run_cli("shape-derivative", config=self.tmp / "missing.json")
        self.assertEqual(code, EXIT_CONFIG)

    def test_bad_kappa_spec(self):
        config = self.write_config({"kappa": {"amplitude_law": "gaussian"}}, name="law.json")
        code, _ = self.run_cli("moments", config=config)
        self.assertEqual(code, EXIT_CONFIG)


class TestStudyAndValidateCommands(CliTestCase):

    def test_linearization_mean_slope(self):
        code, out = self.run_cli("study", "--kind", "linearization", "--quantity", "mean")
        self.assertEqual(code, EXIT_OK)
        rows, footers = read_output(out)
        self.assertEqual(len(rows), 4)
        self.assertGreaterEqual(footers[0]["slope"], 1.9)
        self.assertLessEqual(footers[0]["slope"], 2.1)
        self.assertEqual(footers[0]["seed"], 12345)
        self.assertFalse(footers[0]["cancelled"])

    def test_validate_passes_for_equal_coefficients(self):
        code, out = self.run_cli(
            "validate", "--set", "alpha_plus=2.0", "--set", "mc_samples=2000", "--set", "band_limit=8"
        )
        self.assertEqual(code, EXIT_OK)
        rows, footers = read_output(out)
        self.assertTrue(all(row["passed"] == "true" for row in rows))
        self.assertEqual(footers[0]["failed"], [])

    def test_validate_deterministic_checks(self):
        self.run_cli("validate", "--set", "mc_samples=2000", "--set", "band_limit=8")
        rows, _ = read_output(self.tmp / "out.csv")
        names = {row["check"]: row["passed"] for row in rows}
        self.assertEqual(len(names), 8)
        self.assertLessEqual(set(names.values()), {"true", "false"})
        for name, passed in names.items():
            if name != "oracle_agreement_se":
                self.assertEqual(passed, "true", name)


if __name__ == "__main__":
    unittest.main()
