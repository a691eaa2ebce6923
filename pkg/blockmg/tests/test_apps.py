"""Unit tests for blockmg.calc.apps"""
import os
import tempfile
import unittest
import numpy as np
from blockmg.calc.apps import (
    ApplicationError, DgCoefficientError, DgSpec, FemSpec, application_problem, dg_system,
    dg_transfer, fem_mass_1d, fem_matrix_1d, fem_matrix_2d, fem_symbols_1d, load_dg_symbol,
    synthetic_dg_symbol, validate_dg_symbol)
from blockmg.calc.symbols import MatrixSymbol
from blockmg.io import write_symbol
from blockmg.io.rstrategies import SymbolFileError


class TestFemSymbols(unittest.TestCase):

    def test_q2_coefficients(self):
        f, _ = fem_symbols_1d(2)
        np.testing.assert_allclose(f.coefficient(0), np.array([[16, -8], [-8, 14]]) / 3, atol=1e-13)
        np.testing.assert_allclose(f.coefficient(1), np.array([[0, -8], [0, 1]]) / 3, atol=1e-13)
        np.testing.assert_allclose(f.coefficient(-1), np.array([[0, 0], [-8, 1]]) / 3, atol=1e-13)

    def test_q1_is_laplacian(self):
        f, h = fem_symbols_1d(1)
        self.assertAlmostEqual(f.coefficient(0)[0, 0], 2.)
        self.assertAlmostEqual(f.coefficient(1)[0, 0], -1.)
        self.assertAlmostEqual(h.coefficient(0)[0, 0], 2 / 3)
        self.assertAlmostEqual(h.coefficient(1)[0, 0], 1 / 6)

    def test_stiffness_kernel_and_mass_definiteness(self):
        for deg in range(1, 7):
            f, h = fem_symbols_1d(deg)
            self.assertEqual(f.block_size, deg)
            eigs = np.linalg.eigvalsh(f(0.))
            self.assertLessEqual(abs(eigs[0]), 1e-10 * max(abs(eigs[-1]), 1.), f"{deg=}")
            if deg > 1:
                self.assertGreater(eigs[1], 0., f"{deg=}")
            for theta in (0., 1., np.pi):
                self.assertGreater(np.linalg.eigvalsh(h(theta))[0], 0., f"{deg=}, {theta=}")

    def test_minimal_eigenvalue_bounds(self):
        """c (2 - 2cos) <= lambda_min(f_deg) <= 2 - 2cos away from the zero"""
        theta = np.linspace(np.pi / 512, np.pi, 512)
        laplacian = 2 - 2 * np.cos(theta)
        for deg in (2, 3, 4):
            f, _ = fem_symbols_1d(deg)
            lam = np.array([np.linalg.eigvalsh(f(x))[0] for x in theta])
            ratio = lam / laplacian
            self.assertLessEqual(ratio.max(), 1 + 1e-10, f"{deg=}")
            self.assertGreater(ratio.min(), 1e-6, f"{deg=}")

    def test_unsupported_degree(self):
        with self.assertRaises(ApplicationError):
            fem_symbols_1d(7)
        with self.assertRaises(ApplicationError):
            FemSpec(0)
        with self.assertRaises(ApplicationError):
            FemSpec(2, dimension=3)
        with self.assertRaises(ApplicationError):
            FemSpec(2, t=1)


class TestFemMatrices(unittest.TestCase):

    def test_1d_sizes(self):
        self.assertEqual(fem_matrix_1d(FemSpec(2, t=3)).dim, 13)
        self.assertEqual(fem_matrix_1d(FemSpec(3, t=3)).dim, 20)
        self.assertEqual(fem_matrix_1d(FemSpec(2, t=3), cut=False).dim, 14)
        self.assertEqual(fem_mass_1d(FemSpec(2, t=3)).dim, 13)

    def test_1d_cut_is_dirichlet_stiffness(self):
        """Q1 on 7 elements: the cut matrix is the Dirichlet Laplacian tridiag(-1, 2, -1)"""
        a = fem_matrix_1d(FemSpec(1, t=3)).matrix.toarray()
        self.assertEqual(a.shape, (6, 6))
        np.testing.assert_allclose(a, 2 * np.eye(6) - np.eye(6, k=1) - np.eye(6, k=-1))

    def test_2d_sizes(self):
        op = fem_matrix_2d(FemSpec(2, dimension=2, t=3))
        self.assertEqual(op.dim, 169)
        self.assertEqual(op.sizes, (7, 7))
        self.assertEqual(fem_matrix_2d(FemSpec(3, dimension=2, t=3)).dim, 400)
        a = op.matrix
        self.assertEqual(abs(a - a.T).max(), 0.)

    def test_2d_positive_definite(self):
        a = fem_matrix_2d(FemSpec(2, dimension=2, t=2)).matrix.toarray()
        self.assertGreater(np.linalg.eigvalsh(a)[0], 0.)


class TestDg(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.TEST_TEMPORARY_DIRECTORY = tempfile.TemporaryDirectory(prefix="BlockMGTest.")
        cls.TEST_TEMPDIR = cls.TEST_TEMPORARY_DIRECTORY.name

    @classmethod
    def tearDownClass(cls):
        cls.TEST_TEMPORARY_DIRECTORY.cleanup()

    def test_synthetic_symbol(self):
        sym = validate_dg_symbol(synthetic_dg_symbol())
        op = dg_system(DgSpec(None, t=3), sym)
        self.assertEqual(op.dim, 441)
        self.assertEqual(dg_transfer(DgSpec(None, t=3), 2.).matrix.shape, (441, 81))

    def test_rejected_symbols(self):
        with self.assertRaises(DgCoefficientError):
            validate_dg_symbol(MatrixSymbol.constant(np.zeros((9, 9)), levels=2))
        with self.assertRaises(DgCoefficientError):
            validate_dg_symbol(MatrixSymbol.scalar({0: 2, 1: -1, -1: -1}))
        sym = synthetic_dg_symbol()
        coeffs = dict(sym.coeffs)
        coeffs[(1, 1)] = np.zeros((9, 9))
        coeffs[(2, 0)] = -.1 * np.eye(9)
        coeffs[(-2, 0)] = -.1 * np.eye(9)
        with self.assertRaises(DgCoefficientError):
            validate_dg_symbol(MatrixSymbol(coeffs, block_size=9, levels=2, hermitian=True))
        shifted = dict(sym.coeffs)
        shifted[(0, 0)] = shifted[(0, 0)] + np.eye(9)
        with self.assertRaises(DgCoefficientError):
            validate_dg_symbol(MatrixSymbol(shifted, block_size=9, levels=2, hermitian=True))

    def test_coefficient_file(self):
        path = os.path.join(self.TEST_TEMPDIR, "dg.json")
        write_symbol(synthetic_dg_symbol(c=.5), path)
        sym = load_dg_symbol(path)
        np.testing.assert_allclose(sym.coefficient((0, 0)), synthetic_dg_symbol(c=.5).coefficient((0, 0)))
        fine, p = application_problem("dg", t=3, z=2., coefficient_file=path)
        self.assertEqual(fine.dim, 441)
        self.assertEqual((p.block_size, p.levels), (9, 2))

    def test_non_hermitian_file(self):
        sym = synthetic_dg_symbol()
        coeffs = dict(sym.coeffs)
        coeffs[(1, 0)] = 2 * coeffs[(1, 0)]
        path = os.path.join(self.TEST_TEMPDIR, "skewed.json")
        write_symbol(MatrixSymbol(coeffs, block_size=9, levels=2), path)
        with open(path) as fhandle:
            content = fhandle.read().replace('"hermitian": false', '"hermitian": true')
        with open(path, "w") as fhandle:
            fhandle.write(content)
        with self.assertRaises(SymbolFileError):
            load_dg_symbol(path)

    def test_unknown_application(self):
        with self.assertRaises(ApplicationError):
            application_problem("q-fem-3d")


if __name__ == "__main__":
    unittest.main()
