"""Unit tests for blockmg.calc.symbols"""
import unittest
import numpy as np
from blockmg.calc.apps import fem_symbols_1d
from blockmg.calc.symbols import (
    MatrixSymbol, SymbolError, adjoint_symbol, coarse_symbol, evaluate, evaluate_grid, hermitian_eig,
    iterate_coarse_symbols, projector_symbol_pz, projector_symbol_pz_multilevel,
    sup_norm, symbol_product, theta_grid)


LAPLACIAN = MatrixSymbol.scalar({0: 2, 1: -1, -1: -1})


class TestMatrixSymbol(unittest.TestCase):

    def test_evaluate_scalar(self):
        for theta in (0., .3, np.pi / 2, np.pi):
            np.testing.assert_allclose(evaluate(LAPLACIAN, theta), [[2 - 2 * np.cos(theta)]], atol=1e-14)

    def test_call_matches_evaluate_grid(self):
        f, _ = fem_symbols_1d(3)
        thetas = theta_grid(16)
        values = evaluate_grid(f, thetas)
        self.assertEqual(values.shape, (16, 3, 3))
        np.testing.assert_allclose(values[5], f(thetas[5]), atol=1e-13)

    def test_hermitian_violation(self):
        with self.assertRaises(SymbolError):
            MatrixSymbol.scalar({0: 2, 1: -1, -1: -.5})
        # Without the flag the same coefficients are accepted
        MatrixSymbol.scalar({0: 2, 1: -1, -1: -.5}, hermitian=False)

    def test_bad_shapes(self):
        with self.assertRaises(SymbolError):
            MatrixSymbol({(0,): np.eye(3)}, block_size=2)
        with self.assertRaises(SymbolError):
            MatrixSymbol({(0, 1): np.eye(2)}, block_size=2, levels=1)
        with self.assertRaises(ValueError):
            MatrixSymbol({(0,): [[np.nan]]}, block_size=1)

    def test_degree_and_missing_offsets(self):
        f, _ = fem_symbols_1d(2)
        self.assertEqual(f.degree, (1,))
        np.testing.assert_array_equal(f.coefficient(5), np.zeros((2, 2)))

    def test_eigen_decomposition(self):
        m = np.array([[2., 1j], [-1j, 3.]])
        eig = hermitian_eig(m)
        np.testing.assert_allclose(eig.reconstruct(), m, atol=1e-14)
        self.assertLess(eig.lambda_min, eig.lambda_max)
        with self.assertRaises(SymbolError):
            hermitian_eig(np.array([[1., 2.], [0., 1.]]))

    def test_sup_norm(self):
        self.assertAlmostEqual(sup_norm(LAPLACIAN, 4096), 4., places=12)
        f, _ = fem_symbols_1d(2)
        self.assertAlmostEqual(sup_norm(f, 4096), 32 / 3, places=10)


class TestProjectors(unittest.TestCase):

    def test_projector_values(self):
        p = projector_symbol_pz(3, 2.)
        b = np.eye(3) + np.ones((3, 3)) / 3
        np.testing.assert_allclose(p(0.), 2 * b, atol=1e-14)
        np.testing.assert_allclose(p(np.pi), np.zeros((3, 3)), atol=1e-14)

    def test_projector_z_one(self):
        p = projector_symbol_pz(2, 1.)
        for theta in (.1, 1., 2.5):
            np.testing.assert_allclose(p(theta), (1 + np.cos(theta)) * np.eye(2), atol=1e-14)

    def test_projector_rejects_nonpositive_z(self):
        with self.assertRaises(SymbolError):
            projector_symbol_pz(2, 0.)
        with self.assertRaises(SymbolError):
            projector_symbol_pz(2, -1.)

    def test_multilevel_projector(self):
        p = projector_symbol_pz_multilevel(2, 3., levels=2)
        b = np.eye(2) + np.ones((2, 2))
        theta = np.array([.4, 1.3])
        np.testing.assert_allclose(p(theta), (1 + np.cos(.4)) * (1 + np.cos(1.3)) * b, atol=1e-13)


class TestSymbolAlgebra(unittest.TestCase):

    def test_product_of_scalar_symbols(self):
        """(1 + cos)^2 = 3/2 + 2cos + cos(2 theta) / 2"""
        p = MatrixSymbol.scalar({0: 1, 1: .5, -1: .5})
        sq = symbol_product(p, p)
        self.assertEqual(sq.degree, (2,))
        self.assertAlmostEqual(sq.coefficient(0)[0, 0], 1.5)
        self.assertAlmostEqual(sq.coefficient(1)[0, 0], 1.)
        self.assertAlmostEqual(sq.coefficient(2)[0, 0], .25)

    def test_adjoint(self):
        a = MatrixSymbol({(0,): np.eye(2), (1,): np.array([[0., 1j], [2., 0.]])}, block_size=2, levels=1)
        twice = adjoint_symbol(adjoint_symbol(a))
        for theta in (.4, 2.):
            np.testing.assert_allclose(adjoint_symbol(a)(theta), a(theta).conj().T, atol=1e-14)
            np.testing.assert_allclose(twice(theta), a(theta), atol=1e-14)
        f, _ = fem_symbols_1d(2)
        np.testing.assert_allclose(adjoint_symbol(f)(1.3), f(1.3), atol=1e-13)


class TestCoarseSymbols(unittest.TestCase):

    def test_laplacian_with_linear_interpolation(self):
        """(1 + cos)^2 (2 - 2cos) halves to 1 - cos on the coarse level"""
        fhat = coarse_symbol(LAPLACIAN, projector_symbol_pz(1, 1.))
        self.assertEqual(fhat.degree, (1,))
        self.assertAlmostEqual(fhat.coefficient(0)[0, 0], 1.)
        self.assertAlmostEqual(fhat.coefficient(1)[0, 0], -.5)
        self.assertAlmostEqual(fhat.coefficient(-1)[0, 0], -.5)
        self.assertTrue(fhat.hermitian)

    def test_coarse_symbol_is_average_of_halves(self):
        f, _ = fem_symbols_1d(2)
        p = projector_symbol_pz(2, 2.5)
        g = symbol_product(symbol_product(p, f), p)
        fhat = coarse_symbol(f, p)
        for theta in (.2, 1.1, 3.):
            expected = .5 * (g(theta / 2) + g(theta / 2 + np.pi))
            np.testing.assert_allclose(fhat(theta), expected, atol=1e-12)

    def test_iterated_symbols_keep_the_zero(self):
        f, _ = fem_symbols_1d(2)
        for fhat in iterate_coarse_symbols(f, projector_symbol_pz(2, 2.), 3):
            self.assertLess(abs(np.linalg.eigvalsh(fhat(0.))[0]), 1e-9 * fhat.scale)

    def test_incompatible_symbols(self):
        with self.assertRaises(SymbolError):
            coarse_symbol(LAPLACIAN, projector_symbol_pz(2, 1.))


if __name__ == "__main__":
    unittest.main()
