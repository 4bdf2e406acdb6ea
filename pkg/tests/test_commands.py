import json
import os
import os.path
from io import StringIO

import numpy as np
import pandas as pd
from mock import patch

import tktp
import tktp.test
from tktp.commands import paths, screen, study
from tktp.multistage import generate_reject_boundary
from tktp.test.context import TestConfig, TestContext

WORKED = "x,y\n1,4\n2,3\n4,1\n3,5\n5,2\n"


def concordant(n):
    return "x,y\n" + "".join("{0},{0}\n".format(i) for i in range(1, n + 1))


class TaupathCommandTest(tktp.test.TestCase):
    command_base = paths

    def test_csv_report(self):
        """`tktp taupath <input> -o <file>`"""
        source = self.path("sample.csv", WORKED)
        self.invoke.taupath("{} -o {}".format(source, self.path("out.csv")))
        report = pd.read_csv(self.path("out.csv"))
        self.assertEqual(list(report.columns), ["stage", "id", "tau"])
        self.assertEqual(report.id.tolist(), [4, 1, 2, 5, 3])
        self.assertAlmostEqual(report.tau.iloc[-1], -0.4)

    def test_json_report(self):
        """`tktp taupath -f json <input>` carries the run parameters"""
        source = self.path("sample.csv", WORKED)
        self.invoke.taupath("-f json --algo fastbcs {} -o {}".format(
            source, self.path("out.json")))
        report = json.loads(self.read("out.json"))
        self.assertEqual(report["pi"], [4, 1, 2, 5, 3])
        self.assertEqual(report["algorithm"], "fastbcs")
        self.assertFalse(report["negate"])

    def test_negate(self):
        """`tktp taupath --negate` reports the path of the negated sample"""
        source = self.path("sample.csv", concordant(6))
        self.invoke.taupath("--negate -f json {} -o {}".format(
            source, self.path("out.json")))
        report = json.loads(self.read("out.json"))
        self.assertEqual(report["tau"], [1, -1, -1, -1, -1, -1])
        self.assertTrue(report["negate"])

    def test_stdout(self):
        source = self.path("sample.csv", WORKED)
        result = self.invoke.taupath(source)
        self.assertIn("stage,id,tau", result.output)

    def test_missing_input(self):
        result = self.invoke.taupath(self.path("none.csv"), assrt=False)
        self.assertEqual(result.exit_code, 1)

    def test_malformed_input(self):
        source = self.path("sample.csv", "x,y\n1,2\n3,abc\n")
        result = self.invoke.taupath(source, assrt=False)
        self.assertEqual(result.exit_code, 2)
        self.assertIn("row 3", result.output)


class SelectCommandTest(tktp.test.TestCase):
    command_base = paths

    def test_select(self):
        """`tktp select <input>` reports the stopping stage and selection"""
        source = self.path("sample.csv", concordant(40))
        cache = self.path("cache")
        self.invoke.select("-w 3 --nsim 20 --cache-dir {} {} -o {}".format(
            cache, source, self.path("out.csv")))

        header = self.header("out.csv")
        self.assertEqual((header["n"], header["window"], header["nsim"]),
                         ("40", "3", "20"))
        k_hat = int(header["k_hat"])
        report = pd.read_csv(self.path("out.csv"), comment="#")
        self.assertEqual(report.id.tolist(), list(range(1, k_hat + 1)))
        self.assertEqual(len(os.listdir(cache)), 1)

    def test_cache_reuse(self):
        source = self.path("sample.csv", concordant(30))
        cache = self.path("cache")
        args = "-w 3 --nsim 10 --cache-dir {} -f json {} -o {}"
        self.invoke.select(args.format(cache, source, self.path("a.json")))
        with patch("tktp.boundary.generate_reject_boundary") as generate:
            self.invoke.select(args.format(cache, source,
                                           self.path("b.json")))
        self.assertFalse(generate.called)
        self.assertEqual(json.loads(self.read("a.json")),
                         json.loads(self.read("b.json")))

    def test_no_cache(self):
        source = self.path("sample.csv", concordant(30))
        cache = self.path("cache")
        self.invoke.select("-w 3 --nsim 10 --no-cache --cache-dir {} {} -o "
                           "{}".format(cache, source, self.path("out.csv")))
        self.assertFalse(os.path.exists(cache))

    @tktp.test.with_config(tktp={"window": "3", "nsim": "10", "format": "json"})
    def test_config_settings(self):
        source = self.path("sample.csv", concordant(30))
        self.invoke.select("--no-cache {} -o {}".format(
            source, self.path("out.json")))
        report = json.loads(self.read("out.json"))
        self.assertEqual(report["window"], 3)
        self.assertEqual(report["nsim"], 10)
        self.assertEqual(report["n"], 30)

    def test_sample_too_small(self):
        source = self.path("sample.csv", concordant(4))
        result = self.invoke.select("-w 3 --no-cache {}".format(source),
                                    assrt=False)
        self.assertEqual(result.exit_code, 1)


class BoundaryCommandTest(tktp.test.TestCase):
    command_base = paths

    def test_csv(self):
        """`tktp boundary <n>` writes the quantiles at full precision"""
        self.invoke.boundary("12 -w 3 --nsim 5 --cache-dir {} -o {}".format(
            self.path("cache"), self.path("q.csv")))
        self.assertEqual(self.header("q.csv"),
                         {"n": "12", "alpha": "0.05", "window": "3", "nsim": "5",
                          "seed": "0"})
        report = pd.read_csv(self.path("q.csv"), comment="#",
                             float_precision="round_trip")
        self.assertEqual(report.stage.tolist(), list(range(4, 13)))
        expected = generate_reject_boundary(12, 3, 5, 0.05, 0)
        self.assertTrue(np.array_equal(report.q.to_numpy(), expected.q))

    def test_json(self):
        self.invoke.boundary("10 -w 3 --nsim 5 --seed 2 -f json --cache-dir {} "
                             "-o {}".format(self.path("cache"),
                                            self.path("q.json")))
        report = json.loads(self.read("q.json"))
        self.assertEqual(report["n"], 10)
        self.assertEqual(report["seed"], 2)
        self.assertEqual(len(report["q"]), 7)


class SimulateCommandTest(tktp.test.TestCase):
    command_base = study

    GRID = "\n".join([
        "[grid]",
        "family=frank",
        "sizes=20",
        "taus=0.5, 0.8",
        "proportions=1",
        "replicates=2",
        "[tktp]",
        "window=3",
        "nsim=10",
    ])

    def test_simulate(self):
        """`tktp simulate <grid> --raw <file> -o <file>`"""
        grid = self.path("grid.ini", self.GRID)
        self.invoke.simulate("--no-cache --raw {} {} -o {}".format(
            self.path("raw.csv"), grid, self.path("summary.csv")))
        summary = pd.read_csv(self.path("summary.csv"))
        raw = pd.read_csv(self.path("raw.csv"))
        self.assertEqual(summary.tau.tolist(), [0.5, 0.8])
        self.assertEqual(len(raw), 4)
        self.assertTrue(np.all(raw.associated == 20))

    def test_missing_grid(self):
        result = self.invoke.simulate(self.path("none.ini"), assrt=False)
        self.assertEqual(result.exit_code, 1)


class BenchCommandTest(tktp.test.TestCase):
    command_base = study

    def test_doubling(self):
        """`tktp bench doubling <n_lo> <n_hi>`"""
        self.invoke.bench_group("doubling 8 16 -i 1 -o {}".format(
            self.path("out.csv")))
        report = pd.read_csv(self.path("out.csv"))
        self.assertEqual(report.n.tolist(), [8, 16])

    def test_profile(self):
        """`tktp bench profile <sizes>...`"""
        self.invoke.bench_group("profile 10 20 -r 2 -f json -o {}".format(
            self.path("out.json")))
        report = json.loads(self.read("out.json"))
        self.assertEqual([row["n"] for row in report["means"]], [10, 20])
        self.assertIn("n_r", report["models"])

    def test_prefix(self):
        self.invoke.bench_group("prof 10 -r 1 -o {}".format(
            self.path("out.csv")))
        self.assertEqual(len(pd.read_csv(self.path("out.csv"))), 1)


class ScreenCommandTest(tktp.test.TestCase):
    command_base = screen

    def table(self):
        rng = np.random.default_rng(4)
        predictor = rng.random(40)
        rows = ["t,P,A,D"]
        for t in range(40):
            follows = predictor[t - 1] if t else 0.5
            rows.append("{},{!r},{!r},{!r}".format(t, float(predictor[t]),
                                                   float(follows),
                                                   -float(follows)))
        return self.path("table.csv", "\n".join(rows) + "\n")

    def test_screen(self):
        """`tktp screen <table> <predictor> <lag>` with every report file"""
        self.invoke.screen(
            "-w 3 --nsim 20 --no-cache --clusters {} --inclusion {} {} P 1 "
            "-o {}".format(self.path("clusters.json"),
                           self.path("inclusion.csv"), self.table(),
                           self.path("pairs.csv")))
        header = self.header("pairs.csv")
        self.assertEqual((header["predictor"], header["lag"], header["alpha"],
                          header["window"], header["nsim"]),
                         ("P", "1", "0.05", "3", "20"))
        pairs = pd.read_csv(self.path("pairs.csv"), comment="#")
        self.assertEqual(pairs.name.tolist(), ["A", "D"])
        self.assertEqual(pairs.passed.tolist(), [True, False])
        clusters = json.loads(self.read("clusters.json"))
        self.assertEqual(clusters["clusters"], [])
        self.assertEqual(clusters["threshold"], 0.8)
        self.assertEqual(self.header("inclusion.csv")["threshold"], "0.8")
        self.assertEqual(self.read("inclusion.csv").splitlines()[1],
                         "cluster,position,label,count")

    def test_series_filter(self):
        self.invoke.screen("-w 3 --nsim 20 --no-cache -s D --negate -f json "
                           "{} P 1 -o {}".format(self.table(),
                                                 self.path("pairs.json")))
        report = json.loads(self.read("pairs.json"))
        self.assertEqual([pair["name"] for pair in report["pairs"]], ["D"])
        self.assertTrue(report["pairs"][0]["passed"])

    def test_unknown_predictor(self):
        result = self.invoke.screen("--no-cache {} Q 1".format(self.table()),
                                    assrt=False)
        self.assertEqual(result.exit_code, 2)


class RunTest(tktp.test.TestCase):
    def make_context(self):
        context = TestContext()
        context.config = TestConfig()
        return context

    def run_cli(self, *args):
        with patch("sys.stdout", new_callable=StringIO) as out, \
                patch("sys.stderr", new_callable=StringIO) as err:
            code = tktp.run(list(args), context=self.make_context())
        return code, out.getvalue(), err.getvalue()

    def test_version(self):
        code, out, _ = self.run_cli("version")
        self.assertEqual(code, 0)
        self.assertIn("tktp version {}".format(tktp.__version__), out)

    def test_usage_error(self):
        code, _, _ = self.run_cli("taupath")
        self.assertEqual(code, 1)

    def test_argument_error_as_json(self):
        code, _, err = self.run_cli("--json", "taupath",
                                    self.path("none.csv"))
        self.assertEqual(code, 1)
        report = json.loads(err.strip().splitlines()[-1])
        self.assertEqual(report["error"], "argument")
        self.assertEqual(report["exit_code"], 1)

    def test_data_error(self):
        source = self.path("sample.csv", "x,y\n1,2\n3,abc\n")
        code, _, err = self.run_cli("--json", "taupath", source)
        self.assertEqual(code, 2)
        self.assertEqual(json.loads(err.strip().splitlines()[-1])["error"],
                         "malformed")

    def test_internal_error(self):
        source = self.path("sample.csv", WORKED)
        with patch("tktp.commands.paths.search",
                   side_effect=RuntimeError("broken")):
            code, _, err = self.run_cli("taupath", source)
        self.assertEqual(code, 3)
        self.assertIn("broken", err)

    def test_prefix_resolution(self):
        source = self.path("sample.csv", WORKED)
        code, out, _ = self.run_cli("tau", source)
        self.assertEqual(code, 0)
        self.assertIn("stage,id,tau", out)


class WriteTest(tktp.test.TestCase):
    def test_stdout_is_verbatim(self):
        text = 'name,error\nA,"series `A` has 3 usable pairs"\n'
        with patch("sys.stdout", new_callable=StringIO) as out:
            TestContext().write(text)
        self.assertEqual(out.getvalue(), text)

    def test_file(self):
        TestContext().write("a,b", self.path("out.csv"))
        self.assertEqual(self.read("out.csv"), "a,b\n")
