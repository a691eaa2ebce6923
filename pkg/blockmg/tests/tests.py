"""module for unit testing blockmg"""
import os
import tempfile
import unittest
import numpy as np
import pandas as pd
from scipy.io import mmread
from blockmg import BlockMG
from blockmg.calc.apps import ApplicationError
from blockmg.calc.symbols import MatrixSymbol
from blockmg.io import write_symbol
from blockmg.utils.logging import logging

logger = logging.getLogger("BlockMG")


class TestWrapper(unittest.TestCase):
    """Class that runs test runs on the wrapper as a whole"""

    TEST_TEMPORARY_DIRECTORY = None
    TEST_TEMPDIR = None
    TEST_SYMBOLFILE = None

    @classmethod
    def setUpClass(cls):
        """Setup method that generates a temporary directory and a symbol file
        that are used by all tests"""
        if cls.TEST_TEMPORARY_DIRECTORY is None:
            cls.TEST_TEMPORARY_DIRECTORY = tempfile.TemporaryDirectory(prefix="BlockMGTest.")
            cls.TEST_TEMPDIR = cls.TEST_TEMPORARY_DIRECTORY.name
            logger.warning(f"TEST PREPARATION: Creating temporary directory: {cls.TEST_TEMPDIR}")
            cls.TEST_SYMBOLFILE = os.path.join(cls.TEST_TEMPDIR, "shifted_laplacian.json")
            write_symbol(MatrixSymbol.scalar({0: 3, 1: -1, -1: -1}), cls.TEST_SYMBOLFILE)

    @classmethod
    def tearDownClass(cls):
        if cls.TEST_TEMPORARY_DIRECTORY is not None:
            cls.TEST_TEMPORARY_DIRECTORY.cleanup()
            cls.TEST_TEMPORARY_DIRECTORY = None

    def test_0a_OperatorCaching(self):
        """Test that the fine operator is reused until its parameters change"""
        bmg = BlockMG(t=4, verbose=0)
        op = bmg._current_operator()
        self.assertEqual(op.dim, 30, "Unexpected size of the uncut Q2 operator.")
        self.assertIs(op, bmg._current_operator(), "Failed to reuse prebuilt operator.")
        bmg.set_param("t", 5)
        self.assertIsNot(op, bmg._current_operator(), "Failed to rebuild operator after parameter change.")

    def test_0b_SingleValueAsList(self):
        """Test that list parameters accept single values"""
        bmg = BlockMG(verbose=0)
        bmg.set_param("z", 2.)
        self.assertEqual(bmg.get_param("z"), [2.])
        bmg.unset_param("z")
        self.assertEqual(bmg.get_param("z"), [])

    def test_1a_SolveTwoGrid(self):
        """Test a two-grid solve of the Q2 stiffness"""
        bmg = BlockMG(t=4, z=[2., 3.], cycle="tgm", smoother="gs", verbose=0)
        reports = bmg.solve()
        self.assertEqual(len(reports), 2)
        for report in reports:
            self.assertTrue(report.converged, f"Two-grid solve did not converge: {report}")
            self.assertLessEqual(report.relative_residual, 1e-7)
            self.assertEqual(report.context["N"], 30)

    def test_1b_SolveSymbolFile(self):
        """Test a V-cycle on a circulant operator read from a symbol file"""
        bmg = BlockMG(app="symbol-file", symbol_file=self.TEST_SYMBOLFILE, kind="circulant",
                      t=5, z=1., cycle="vcycle", verbose=0)
        report, = bmg.solve()
        self.assertTrue(report.converged, f"V-cycle did not converge: {report}")
        self.assertEqual(report.context["N"], 32)

    def test_1c_SolveRandomGuess(self):
        """Test that a seeded random initial guess still converges"""
        bmg = BlockMG(t=4, z=2., smoother="jacobi", seed=7, verbose=0)
        report, = bmg.solve()
        self.assertTrue(report.converged)
        self.assertGreater(report.residual_history[0], 0.)

    def test_2a_RunWritesCsv(self):
        """Test that `run` writes one CSV row per value of z"""
        output_file = os.path.join(self.TEST_TEMPDIR, "solve.csv")
        bmg = BlockMG(t=4, z=[1., 2.], output_file=output_file, verbose=0)
        self.assertEqual(bmg.run(), 0)
        frame = pd.read_csv(output_file)
        self.assertEqual(len(frame), 2)
        self.assertIn("iterations", frame.columns)
        self.assertTrue(frame["converged"].all())

    def test_2b_RunNotConverged(self):
        """Test the exit status of a solve that hits the iteration limit"""
        output_file = os.path.join(self.TEST_TEMPDIR, "limit.json")
        bmg = BlockMG(t=5, z=2., max_iter=1, output_file=output_file, verbose=0)
        self.assertEqual(bmg.run(), 1)

    def test_3a_RunConditions(self):
        """Test the condition check command on the Q2 stiffness"""
        output_file = os.path.join(self.TEST_TEMPDIR, "conditions.csv")
        bmg = BlockMG(command="conditions", z=[1., 2.], grid=1024, output_file=output_file, verbose=0)
        self.assertEqual(bmg.run(), 0)
        frame = pd.read_csv(output_file)
        self.assertEqual(len(frame), 6)
        self.assertTrue(frame["passed"].all())

    def test_3b_AnalyzeRejectsMultilevel(self):
        """Test that the symbol analysis is restricted to 1-level applications"""
        bmg = BlockMG(command="analyze", app="q-fem-2d", verbose=0)
        with self.assertRaises(ApplicationError):
            bmg.analyze()

    def test_3c_CutRejectsMultilevelSymbolFile(self):
        """Test that a cut operator is refused for a 2-level symbol file"""
        symbol_file = os.path.join(self.TEST_TEMPDIR, "laplacian_2d.json")
        write_symbol(MatrixSymbol({(0, 0): [[4.]], (1, 0): [[-1.]], (-1, 0): [[-1.]], (0, 1): [[-1.]],
                                   (0, -1): [[-1.]]}, block_size=1, levels=2, hermitian=True), symbol_file)
        bmg = BlockMG(app="symbol-file", symbol_file=symbol_file, t=3, z=2., cut=True, verbose=0)
        with self.assertRaises(ApplicationError):
            bmg.solve()

    def test_4a_ExportMatrix(self):
        """Test the Matrix Market export of the fine operator"""
        output_file = os.path.join(self.TEST_TEMPDIR, "export.csv")
        matrix_file = os.path.join(self.TEST_TEMPDIR, "export.mtx")
        bmg = BlockMG(t=3, z=2., cut=True, output_file=output_file, export_matrix=matrix_file, verbose=0)
        self.assertEqual(bmg.run(), 0)
        matrix = mmread(matrix_file)
        self.assertEqual(matrix.shape, (13, 13))
        np.testing.assert_allclose(matrix.toarray(), bmg._current_operator().matrix.toarray())

    def test_4b_UnknownCommand(self):
        """Test that unknown commands are rejected"""
        bmg = BlockMG(command="plot", verbose=0)
        with self.assertRaises(ValueError):
            bmg.run()


def run_unittest() -> bool:
    """Run the unittests of blockmg (all `test*.py` modules in this directory)"""
    loader = unittest.defaultTestLoader
    suite = unittest.TestSuite((
        loader.loadTestsFromTestCase(TestWrapper),
        loader.discover(os.path.dirname(os.path.abspath(__file__)), pattern="test_*.py",
                        top_level_dir=os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))),
    ))
    runner = unittest.TextTestRunner()
    return runner.run(suite).wasSuccessful()

if __name__ == "__main__":
    run_unittest()
