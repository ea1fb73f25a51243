#!/usr/bin/env python3
"""End-to-end checks of the kpgot command line tool.

usage: test_cli.py <kpgot-binary> <report-schema>
"""

import csv
import json
import subprocess
import sys
import tempfile
import unittest
from pathlib import Path

import jsonschema

CLI = ""
SCHEMA = {}


def run(*args, cwd=None):
    return subprocess.run([CLI, *map(str, args)], capture_output=True, text=True, cwd=cwd)


def write_points(path, rows, weights=None):
    dim = len(rows[0])
    with open(path, "w", newline="") as f:
        header = [f"x{d}" for d in range(dim)] + (["weight"] if weights else [])
        f.write(",".join(header) + "\n")
        for k, row in enumerate(rows):
            values = [repr(float(v)) for v in row]
            if weights:
                values.append(repr(float(weights[k])))
            f.write(",".join(values) + "\n")


def write_keypoints(path, pairs):
    Path(path).write_text(json.dumps({"pairs": pairs}))


def read_dense_plan(path):
    with open(path) as f:
        return [[float(v) for v in row] for row in csv.reader(f)]


class Solve(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)
        self.src = self.dir / "src.csv"
        self.tgt = self.dir / "tgt.csv"
        self.kp = self.dir / "kp.json"
        write_points(self.src, [[0, 0], [1, 0], [0, 1], [1, 1], [2, 2]])
        write_points(self.tgt, [[0.1, 0], [1, 0.2], [0, 1.3], [1.2, 1], [2, 2.1]])
        write_keypoints(self.kp, [[0, 0], [4, 4]])

    def tearDown(self):
        self.tmp.cleanup()

    def solve(self, *extra):
        return run("solve", "--source", self.src, "--target", self.tgt, *extra)

    def test_balanced_lp_succeeds(self):
        out = self.dir / "plan.csv"
        rep = self.dir / "report.json"
        res = self.solve("--method", "kpg-rl", "--keypoints", self.kp, "--out", out, "--report", rep)
        self.assertEqual(res.returncode, 0, res.stderr)
        plan = read_dense_plan(out)
        for row in plan:
            self.assertAlmostEqual(sum(row), 0.2, delta=1e-10)
        self.assertEqual(plan[0][0], 0.2)
        doc = json.loads(rep.read_text())
        jsonschema.validate(doc, SCHEMA)
        self.assertIsNone(doc["results"][0]["wall_ms"])

    def test_every_method_reports_valid_json(self):
        for method in ["kp", "gw", "kpg-rl", "kpg-rl-kp", "kpg-rl-gw", "dual-kpg-rl"]:
            rep = self.dir / f"report_{method}.json"
            res = self.solve("--method", method, "--keypoints", self.kp, "--report", rep, "--timing")
            self.assertIn(res.returncode, (0, 3), method + ": " + res.stderr)
            doc = json.loads(rep.read_text())
            jsonschema.validate(doc, SCHEMA)
            self.assertIsNotNone(doc["results"][0]["wall_ms"])

    def test_keypoint_mass_mismatch_names_pair(self):
        write_points(self.tgt, [[0, 0], [1, 0], [0, 1], [1, 1], [2, 2]],
                     [0.1, 0.3, 0.2, 0.2, 0.2])
        res = self.solve("--method", "kpg-rl", "--keypoints", self.kp)
        self.assertEqual(res.returncode, 1)
        self.assertIn("(0,0)", res.stderr)
        self.assertEqual(len(res.stderr.strip().splitlines()), 1)

    def test_partial_budget_above_min_mass(self):
        res = self.solve("--method", "partial-kpg-rl", "--keypoints", self.kp, "--mass-budget", 1.5)
        self.assertEqual(res.returncode, 1)

    def test_partial_within_budget(self):
        rep = self.dir / "report.json"
        res = self.solve("--method", "partial-kpg-rl", "--keypoints", self.kp, "--mass-budget", 0.6,
                         "--report", rep)
        self.assertEqual(res.returncode, 0, res.stderr)
        doc = json.loads(rep.read_text())
        jsonschema.validate(doc, SCHEMA)
        self.assertEqual(doc["config"]["mass_budget"], 0.6)

    def test_unknown_method(self):
        res = self.solve("--method", "sinkhorn")
        self.assertEqual(res.returncode, 1)
        self.assertIn("kpg-rl-kp", res.stderr)

    def test_infeasible_mask_exits_2(self):
        # Both targets are keypoints, so the tiny free source mass has nowhere to go.
        write_points(self.src, [[0, 0], [1, 0], [0, 1]], [0.5, 0.5, 1e-13])
        write_points(self.tgt, [[0, 0], [1, 0]], [0.5, 0.5])
        write_keypoints(self.kp, [[0, 0], [1, 1]])
        res = self.solve("--method", "kpg-rl", "--keypoints", self.kp)
        self.assertEqual(res.returncode, 2, res.stderr)

    def test_not_converged_exits_3_and_writes_plan(self):
        out = self.dir / "plan.csv"
        res = self.solve("--method", "kpg-rl", "--keypoints", self.kp, "--backend", "sinkhorn",
                         "--max-iterations", 1, "--tolerance", 1e-15, "--out", out)
        self.assertEqual(res.returncode, 3, res.stderr)
        self.assertTrue(out.exists())

    def test_missing_file(self):
        res = run("solve", "--method", "kp", "--source", self.dir / "nope.csv", "--target", self.tgt)
        self.assertEqual(res.returncode, 1)

    def test_bad_option(self):
        self.assertEqual(run("solve", "--bogus").returncode, 1)
        self.assertEqual(run().returncode, 1)


class Toy(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_seed_is_byte_reproducible(self):
        for name in ("a", "b"):
            res = run("toy", "--scenario", "fig1", "--seed", 7, "--out-dir", self.dir / name)
            self.assertEqual(res.returncode, 0, res.stderr)
        files = sorted(p.name for p in (self.dir / "a").iterdir())
        self.assertIn("report.json", files)
        self.assertIn("matching.csv", files)
        for name in files:
            self.assertEqual((self.dir / "a" / name).read_bytes(), (self.dir / "b" / name).read_bytes(),
                             name)
        jsonschema.validate(json.loads((self.dir / "a" / "report.json").read_text()), SCHEMA)

    def test_fig4_keypoints_help(self):
        res = run("toy", "--scenario", "fig4", "--methods", "kp,kpg-rl-kp", "--out-dir", self.dir)
        self.assertEqual(res.returncode, 0, res.stderr)
        doc = json.loads((self.dir / "report.json").read_text())
        jsonschema.validate(doc, SCHEMA)
        acc = {r["method"]: r["accuracy"] for r in doc["results"]}
        self.assertGreaterEqual(acc["kpg-rl-kp"], acc["kp"])

    def test_fig5_reports_outliers(self):
        res = run("toy", "--scenario", "fig5", "--out-dir", self.dir)
        self.assertEqual(res.returncode, 0, res.stderr)
        doc = json.loads((self.dir / "report.json").read_text())
        jsonschema.validate(doc, SCHEMA)
        self.assertIn("outlier_detection", doc)
        self.assertGreaterEqual(doc["outlier_detection"]["recall"], 0.9)

    def test_unknown_method_lists_valid(self):
        res = run("toy", "--methods", "kp,magic", "--out-dir", self.dir)
        self.assertEqual(res.returncode, 1)
        for name in ("kpg-rl-gw", "partial-kpg-rl"):
            self.assertIn(name, res.stderr)

    def test_custom_scenario(self):
        res = run("toy", "--scenario", "custom", "--classes", 4, "--points-per-class", 5,
                  "--keypoints-per-class", 1, "--out-dir", self.dir)
        self.assertEqual(res.returncode, 0, res.stderr)
        doc = json.loads((self.dir / "report.json").read_text())
        jsonschema.validate(doc, SCHEMA)
        self.assertEqual(doc["scenario"]["source_points"], 20)


if __name__ == "__main__":
    CLI = sys.argv[1]
    SCHEMA = json.loads(Path(sys.argv[2]).read_text())
    unittest.main(argv=[sys.argv[0], "-v"])
