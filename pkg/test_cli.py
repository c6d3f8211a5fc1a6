#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Novikov Analyzer 命令行测试
"""

import csv
import io
import json
import os
import tempfile
import unittest
from pathlib import Path
from unittest.mock import patch

import numpy as np
from rich.console import Console

from main import (
    EXIT_INTERRUPTED,
    EXIT_OK,
    EXIT_USAGE,
    a_for_j,
    build_parser,
    main,
    parse_j_list,
    resolve_workers,
)
from numerics import ParameterError

SLOW = os.environ.get("NOVIKOV_SLOW_TESTS") == "1"


def silent_console() -> Console:
    return Console(file=io.StringIO())


def read_rows(path: Path):
    lines = [line for line in path.read_text(encoding="utf-8").splitlines() if not line.startswith("# ")]
    return list(csv.DictReader(lines))


class TestArguments(unittest.TestCase):
    """
    测试参数解析
    """

    def test_j_list(self):
        self.assertEqual(parse_j_list("3..15"), list(range(3, 16)))
        self.assertEqual(parse_j_list("3,5,7"), [3, 5, 7])
        self.assertEqual(parse_j_list("9, 3..5, 4"), [3, 4, 5, 9])
        self.assertEqual(parse_j_list("1..3", allow_near_peakon=True), [1, 2, 3])

    def test_j_list_errors(self):
        for text in (",", "", "2", "16", "1..4"):
            with self.assertRaises(ParameterError):
                parse_j_list(text)
        with self.assertRaises(ValueError):
            parse_j_list("a..b")

    def test_a_for_j(self):
        self.assertAlmostEqual(a_for_j(8, 1.0), 3.0 * np.sqrt(3.0) / 32.0, places=15)
        self.assertAlmostEqual(a_for_j(16, 4.0), 3.0 * np.sqrt(3.0), places=14)

    def test_workers(self):
        self.assertEqual(resolve_workers(4), 4)
        self.assertEqual(resolve_workers(0), 1)
        with patch.dict(os.environ, {"NOVIKOV_WORKERS": "3"}):
            self.assertEqual(resolve_workers(None), 3)
        with patch.dict(os.environ, {"NOVIKOV_WORKERS": "many"}):
            self.assertEqual(resolve_workers(None), 1)

    def test_missing_command(self):
        with patch("sys.stderr", io.StringIO()):
            with self.assertRaises(SystemExit) as ctx:
                build_parser().parse_args([])
        self.assertEqual(ctx.exception.code, 2)

    def test_exclusive_options(self):
        with patch("sys.stderr", io.StringIO()):
            with self.assertRaises(SystemExit):
                build_parser().parse_args(["wave", "--a", "0.1", "--k", "0.2"])


class TestExitCodes(unittest.TestCase):
    """
    测试退出码与输出文件
    """

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.output = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def run_cli(self, *argv) -> int:
        return main(["-o", str(self.output), "--workers", "1", *argv], console=silent_console())

    def test_usage_errors(self):
        self.assertEqual(self.run_cli("verify", "--j", ","), EXIT_USAGE)
        self.assertEqual(self.run_cli("verify", "--j", "3..16"), EXIT_USAGE)
        self.assertEqual(self.run_cli("vk", "--kmin", "0.1", "--kmax", "0.2", "--n", "2"), EXIT_USAGE)
        self.assertEqual(self.run_cli("vk", "--kmin", "0.1", "--kmax", "0.6", "--n", "5"), EXIT_USAGE)
        self.assertEqual(self.run_cli("wave", "--k", "0.7"), EXIT_USAGE)
        self.assertEqual(self.run_cli("wave", "--a", "0.9"), EXIT_USAGE)
        self.assertEqual(self.run_cli("vk", "--kmin", "0.1", "--kmax", "0.2", "--n", "1"), EXIT_USAGE)

    def test_invalid_wave_in_batch(self):
        self.assertEqual(self.run_cli("verify", "--a", "0.5"), EXIT_USAGE)
        rows = read_rows(self.output / "reports" / "summary.csv")
        self.assertEqual(len(rows), 1)
        self.assertEqual(rows[0]["stage"], "params")
        self.assertEqual(rows[0]["h1_verdict"], "False")
        self.assertEqual(rows[0]["L"], "")
        self.assertNotIn("# L:", (self.output / "reports" / "summary.csv").read_text(encoding="utf-8"))

    def test_wave(self):
        self.assertEqual(self.run_cli("wave", "--c", "1", "--a", "0.16238"), EXIT_OK)
        config = json.loads((self.output / "run_config.json").read_text(encoding="utf-8"))
        self.assertEqual(config["command"], "wave")

        headers = list((self.output / "profiles").glob("wave_c1_k*.json"))
        headers = [p for p in headers if not p.name.endswith("_functionals.json")]
        self.assertEqual(len(headers), 1)
        header = json.loads(headers[0].read_text(encoding="utf-8"))
        self.assertAlmostEqual(header["params"]["k"], 0.16993, delta=1e-5)

        table = headers[0].with_suffix(".csv")
        text = table.read_text(encoding="utf-8")
        self.assertTrue(text.startswith("# "))
        rows = read_rows(table)
        self.assertEqual(len(rows), header["grid_points"])
        self.assertEqual(list(rows[0].keys()), ["x", "phi", "dphi", "mu0", "mu1", "mu2", "mu3", "mu4"])

        functionals = list((self.output / "profiles").glob("*_functionals.json"))
        self.assertEqual(len(functionals), 1)
        self.assertTrue(json.loads(functionals[0].read_text(encoding="utf-8"))["variation_positive"])

    def test_wave_from_k(self):
        self.assertEqual(self.run_cli("wave", "--k", "0.25"), EXIT_OK)
        header = json.loads((self.output / "profiles" / "wave_c1_k0.25000000.json").read_text(encoding="utf-8"))
        self.assertAlmostEqual(header["params"]["a"], 0.25 * 0.9375 ** 1.5, places=14)

    def test_vk(self):
        self.assertEqual(self.run_cli("vk", "--c", "1", "--kmin", "0.02", "--kmax", "0.48", "--n", "6"), EXIT_OK)
        table = self.output / "vk" / "vk_scan_c1.csv"
        rows = read_rows(table)
        self.assertEqual(len(rows), 6)
        self.assertTrue(all(float(r["calF"]) > 0 for r in rows))
        self.assertTrue(all(float(r["inner_product"]) < 0 for r in rows))
        self.assertIn("# verdict: true", table.read_text(encoding="utf-8"))

    def test_vk_deterministic(self):
        argv = ("vk", "--kmin", "0.1", "--kmax", "0.3", "--n", "4")
        self.assertEqual(self.run_cli(*argv), EXIT_OK)
        first = (self.output / "vk" / "vk_scan_c1.csv").read_bytes()
        self.assertEqual(self.run_cli(*argv), EXIT_OK)
        self.assertEqual((self.output / "vk" / "vk_scan_c1.csv").read_bytes(), first)

    def test_interrupt(self):
        """Ctrl-C 的退出码与判定为假（1）区分开"""
        with patch("main.NovikovAnalyzer.scan_vk", side_effect=KeyboardInterrupt):
            code = self.run_cli("vk", "--kmin", "0.1", "--kmax", "0.3", "--n", "4")
        self.assertEqual(code, EXIT_INTERRUPTED)
        self.assertNotIn(code, (0, 1, 2, 3))

    @unittest.skipUnless(SLOW, "设置 NOVIKOV_SLOW_TESTS=1 运行完整验证")
    def test_verify_reference_wave(self):
        self.assertEqual(self.run_cli("verify", "--a", "0.162380"), EXIT_OK)
        rows = read_rows(self.output / "reports" / "summary.csv")
        self.assertEqual(rows[0]["h1_verdict"], "True")
        self.assertEqual(rows[0]["winding_gamma1"], "1")
        self.assertEqual(rows[0]["winding_gamma2"], "2")
        self.assertGreaterEqual(float(rows[0]["L"]), 25.0)
        self.assertTrue((self.output / "reports" / "summary.md").exists())
        self.assertTrue(list((self.output / "evans").glob("a01_*.csv")))

    @unittest.skipUnless(SLOW, "设置 NOVIKOV_SLOW_TESTS=1 运行完整验证")
    def test_verify_all_waves(self):
        workers = str(max(1, min(4, os.cpu_count() or 1)))
        code = main(["-o", str(self.output), "--workers", workers, "verify", "--j", "3..15"],
                    console=silent_console())
        self.assertEqual(code, EXIT_OK)
        rows = read_rows(self.output / "reports" / "summary.csv")
        self.assertEqual([r["label"] for r in rows], [f"j{j:02d}" for j in range(3, 16)])
        self.assertTrue(all(r["h1_verdict"] == "True" for r in rows))


if __name__ == '__main__':
    console = Console()
    console.print("\n🧪 [bold blue]命令行测试[/bold blue]")
    console.print("=" * 50)

    test_suite = unittest.TestSuite()
    for test_class in [TestArguments, TestExitCodes]:
        test_suite.addTests(unittest.TestLoader().loadTestsFromTestCase(test_class))

    result = unittest.TextTestRunner(verbosity=2).run(test_suite)
    console.print("\n" + "=" * 50)
    if result.wasSuccessful():
        console.print("✅ [green]所有测试通过！[/green]")
    else:
        console.print(f"❌ [red]测试失败: {len(result.failures)} 个失败, {len(result.errors)} 个错误[/red]")
