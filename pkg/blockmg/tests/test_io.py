"""Unit tests for blockmg.io"""
import io
import json
import os
import tempfile
import unittest
from contextlib import redirect_stdout
import numpy as np
import pandas as pd
from scipy.io import mmread
from blockmg.calc.apps import fem_symbols_1d
from blockmg.calc.structured import build_operator
from blockmg.calc.symbols import MatrixSymbol
from blockmg.io import ResultsWriter, SymbolReader, write_matrix_market, write_symbol
from blockmg.io.rstrategies import JsonSymbolReader, NpzSymbolReader, SymbolFileError
from blockmg.utils.results import ConditioningReport, ConditioningRow, SolveReport


def solve_report(z: float, iterations: int = 15) -> SolveReport:
    history = np.logspace(0, -8, iterations + 1)
    return SolveReport(iterations=iterations, residual_history=history, converged=True,
                       final_error_A_norm=1.23456789e-9, context={"app": "q-fem-1d", "t": 5, "z": z})


class TestSymbolReader(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.TEST_TEMPORARY_DIRECTORY = tempfile.TemporaryDirectory(prefix="BlockMGTest.")
        cls.TEST_TEMPDIR = cls.TEST_TEMPORARY_DIRECTORY.name

    @classmethod
    def tearDownClass(cls):
        cls.TEST_TEMPORARY_DIRECTORY.cleanup()

    def _write_json(self, name: str, content) -> str:
        path = os.path.join(self.TEST_TEMPDIR, name)
        with open(path, "w") as fhandle:
            fhandle.write(content if isinstance(content, str) else json.dumps(content))
        return path

    def test_write_and_read_json(self):
        f, _ = fem_symbols_1d(3)
        path = os.path.join(self.TEST_TEMPDIR, "q3.json")
        write_symbol(f, path)
        self.assertIsInstance(SymbolReader.guess_strategy(path), JsonSymbolReader)
        sym = SymbolReader().readFile(path)
        self.assertEqual((sym.block_size, sym.levels), (3, 1))
        self.assertTrue(sym.hermitian)
        for j in f.offsets:
            np.testing.assert_allclose(sym.coefficient(j), f.coefficient(j))

    def test_complex_json(self):
        path = self._write_json("complex.json", {
            "levels": 1, "d": 1,
            "coeffs": [{"offset": [0], "re": [[2.]]},
                       {"offset": [1], "re": [[0.]], "im": [[1.]]},
                       {"offset": [-1], "re": [[0.]], "im": [[-1.]]}]})
        sym = SymbolReader("json").readFile(path)
        self.assertTrue(sym.hermitian)
        np.testing.assert_allclose(sym(np.pi / 3), [[2 - 2 * np.sin(np.pi / 3)]], atol=1e-14)

    def test_malformed_json(self):
        paths = [
            self._write_json("missing.json", {"levels": 1, "coeffs": []}),
            self._write_json("shape.json", {"levels": 1, "d": 2, "coeffs": [{"offset": [0], "re": [[1.]]}]}),
            self._write_json("offset.json", {"levels": 2, "d": 1, "coeffs": [{"offset": [0], "re": [[1.]]}]}),
            self._write_json("twice.json", {"levels": 1, "d": 1, "coeffs": [{"offset": [0], "re": [[1.]]},
                                                                             {"offset": [0], "re": [[1.]]}]}),
            self._write_json("skew.json", {"levels": 1, "d": 1, "coeffs": [{"offset": [1], "re": [[1.]]}]}),
            self._write_json("broken.json", "{\"levels\": 1,"),
            self._write_json("nan.json", "{\"levels\": 1, \"d\": 1, \"coeffs\": [{\"offset\": [0], \"re\": [[NaN]]}]}"),
            self._write_json("ragged.json", {"levels": 1, "d": 2, "coeffs": [{"offset": [0], "re": [[1., 0.], [0.]]}]}),
            self._write_json("text.json", {"levels": 1, "d": 1, "coeffs": [{"offset": [0], "re": [["one"]]}]}),
            self._write_json("levels.json", {"levels": 1.5, "d": 1, "coeffs": [{"offset": [0], "re": [[1.]]}]}),
            self._write_json("dims.json", {"levels": 1, "d": "1", "coeffs": [{"offset": [0], "re": [[1.]]}]}),
            self._write_json("entry.json", {"levels": 1, "d": 1, "coeffs": [3]}),
            self._write_json("fraction.json", {"levels": 1, "d": 1, "coeffs": [{"offset": [0.5], "re": [[1.]]}]}),
        ]
        for path in paths:
            with self.assertRaises(SymbolFileError, msg=path):
                SymbolReader("json").readFile(path)
            with self.assertRaises(SymbolFileError, msg=path):
                SymbolReader().readFile(path)

    def test_unknown_format(self):
        with self.assertRaises(ValueError):
            SymbolReader("yaml").readFile(os.path.join(self.TEST_TEMPDIR, "none.yaml"))

    def test_npz(self):
        path = os.path.join(self.TEST_TEMPDIR, "laplacian.npz")
        np.savez(path, offsets=np.array([[-1], [0], [1]]), coeffs=np.array([[[-1.]], [[2.]], [[-1.]]]))
        self.assertIsInstance(SymbolReader.guess_strategy(path), NpzSymbolReader)
        sym = SymbolReader().readFile(path)
        np.testing.assert_allclose(sym(np.pi), [[4.]], atol=1e-14)
        bad = os.path.join(self.TEST_TEMPDIR, "bad.npz")
        np.savez(bad, offsets=np.array([[0], [1]]), coeffs=np.ones((3, 1, 1)))
        with self.assertRaises(SymbolFileError):
            SymbolReader("npz").readFile(bad)


class TestResultsWriter(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.TEST_TEMPORARY_DIRECTORY = tempfile.TemporaryDirectory(prefix="BlockMGTest.")
        cls.TEST_TEMPDIR = cls.TEST_TEMPORARY_DIRECTORY.name

    @classmethod
    def tearDownClass(cls):
        cls.TEST_TEMPORARY_DIRECTORY.cleanup()

    def test_csv(self):
        path = os.path.join(self.TEST_TEMPDIR, "solve.csv")
        ResultsWriter(path).write_results([solve_report(1.), solve_report(2., 16)])
        frame = pd.read_csv(path)
        self.assertEqual(frame["iterations"].tolist(), [15, 16])
        self.assertEqual(frame["z"].tolist(), [1., 2.])

    def test_tsv_precision(self):
        path = os.path.join(self.TEST_TEMPDIR, "solve.tsv")
        ResultsWriter(path, float_precision=3).write_results(solve_report(1.))
        frame = pd.read_csv(path, sep="\t")
        self.assertAlmostEqual(frame["final_error_A_norm"][0], 1.23e-9, places=20)

    def test_json(self):
        path = os.path.join(self.TEST_TEMPDIR, "analysis.json")
        report = ConditioningReport(z=1., rows=[ConditioningRow(j=1, lambda_pp0=.5, lambda_max_sup=21.333333,
                                                                kappa=42.666666)])
        ResultsWriter(path, float_precision=4).write_results(report)
        with open(path) as fhandle:
            content = json.load(fhandle)
        self.assertEqual(content["tool"], "blockmg")
        self.assertIn("creation_date", content)
        self.assertEqual(len(content["results"]), 1)
        self.assertEqual(content["results"][0]["levels"][0]["kappa"], 42.67)

    def test_stdout(self):
        buffer = io.StringIO()
        with redirect_stdout(buffer):
            ResultsWriter().write_results(solve_report(3.))
        self.assertTrue(buffer.getvalue().startswith("app,t,z,iterations"))

    def test_unknown_format(self):
        with self.assertRaises(ValueError):
            ResultsWriter(os.path.join(self.TEST_TEMPDIR, "out.xlsx"))
        writer = ResultsWriter(os.path.join(self.TEST_TEMPDIR, "out.csv"))
        with self.assertRaises(ValueError):
            writer.format = "parquet"

    def test_matrix_market(self):
        f, _ = fem_symbols_1d(2)
        op = build_operator(f, 7, "toeplitz", cut=True)
        path = os.path.join(self.TEST_TEMPDIR, "q2.mtx")
        write_matrix_market(op, path)
        np.testing.assert_allclose(mmread(path).toarray(), op.matrix.toarray(), atol=1e-14)

    def test_symbol_roundtrip_multilevel(self):
        sym = MatrixSymbol({(0, 0): 4 * np.eye(2), (1, 0): -np.eye(2), (-1, 0): -np.eye(2)},
                           block_size=2, levels=2, hermitian=True)
        path = os.path.join(self.TEST_TEMPDIR, "twolevel.json")
        write_symbol(sym, path)
        back = SymbolReader().readFile(path)
        self.assertEqual(back.levels, 2)
        np.testing.assert_allclose(back(np.array([.3, .7])), sym(np.array([.3, .7])), atol=1e-14)


if __name__ == "__main__":
    unittest.main()
