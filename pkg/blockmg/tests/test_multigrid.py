"""Unit tests for blockmg.calc.multigrid"""
import unittest
import numpy as np
from blockmg.calc.apps import application_problem, fem_symbols_1d
from blockmg.calc.multigrid import (
    HierarchyError, a_norm, build_hierarchy, check_size_law, cycle_once, make_rhs_sine, solve)
from blockmg.calc.smoothers import SmootherConfig
from blockmg.calc.structured import build_operator
from blockmg.calc.symbols import MatrixSymbol, projector_symbol_pz

GAUSS_SEIDEL = SmootherConfig(method="gauss_seidel")
JACOBI_Q2 = SmootherConfig(method="jacobi", omega=7 / 8, omega_post=7 / 12)


def q2_problem(t: int):
    f, _ = fem_symbols_1d(2)
    return build_operator(f, 2 ** t - 1, "toeplitz")


class TestHierarchy(unittest.TestCase):

    def test_size_law(self):
        f, _ = fem_symbols_1d(2)
        with self.assertRaises(HierarchyError):
            check_size_law(build_operator(f, 8, "toeplitz"))
        with self.assertRaises(HierarchyError):
            build_hierarchy(build_operator(f, 9, "toeplitz"), projector_symbol_pz(2, 2.), GAUSS_SEIDEL)
        shifted = MatrixSymbol.scalar({0: 3, 1: -1, -1: -1})
        with self.assertRaises(HierarchyError):
            check_size_law(build_operator(shifted, 7, "circulant"))

    def test_two_grid_depth(self):
        h = build_hierarchy(q2_problem(5), projector_symbol_pz(2, 2.), GAUSS_SEIDEL, "tgm")
        self.assertEqual(h.depth, 2)
        self.assertEqual(h.sizes, [(31,), (15,)])
        self.assertEqual(len(h.transfers), 1)

    def test_vcycle_depth(self):
        h = build_hierarchy(q2_problem(5), projector_symbol_pz(2, 2.), GAUSS_SEIDEL, "vcycle")
        self.assertEqual(h.sizes, [(31,), (15,), (7,), (3,)])
        self.assertEqual(h.levels[-1].operator.dim, 6)

    def test_unknown_cycle(self):
        with self.assertRaises(HierarchyError):
            build_hierarchy(q2_problem(3), projector_symbol_pz(2, 2.), GAUSS_SEIDEL, "wcycle")

    def test_invalid_level(self):
        h = build_hierarchy(q2_problem(3), projector_symbol_pz(2, 2.), GAUSS_SEIDEL, "tgm")
        with self.assertRaises(HierarchyError):
            cycle_once(h, 2, np.zeros(14), np.zeros(14))

    def test_singular_coarse_operator(self):
        """The circulant Laplacian keeps the constants in its kernel on every level"""
        laplacian = MatrixSymbol.scalar({0: 2, 1: -1, -1: -1})
        for n in (8, 16, 32, 64):
            op = build_operator(laplacian, n, "circulant")
            for cycle in ("tgm", "vcycle"):
                with self.assertRaises(HierarchyError, msg=f"{n=}, {cycle=}"):
                    build_hierarchy(op, projector_symbol_pz(1, 1.), GAUSS_SEIDEL, cycle)

    def test_singular_coarse_operator_pseudo_inverse(self):
        laplacian = MatrixSymbol.scalar({0: 2, 1: -1, -1: -1})
        op = build_operator(laplacian, 32, "circulant")
        h = build_hierarchy(op, projector_symbol_pz(1, 1.), GAUSS_SEIDEL, "tgm", allow_singular=True)
        np.testing.assert_allclose(np.abs(h.kernel[:, 0]), np.full(32, 32 ** -.5), atol=1e-10)
        _, b = make_rhs_sine(op)
        report = solve(h, b)
        self.assertTrue(report.converged)
        self.assertLess(report.iterations, 30)


class TestSolve(unittest.TestCase):

    def test_two_grid_gauss_seidel_q2(self):
        op = q2_problem(5)
        h = build_hierarchy(op, projector_symbol_pz(2, 2.), GAUSS_SEIDEL, "tgm")
        x_true, b = make_rhs_sine(op)
        report = solve(h, b, x_true=x_true)
        self.assertTrue(report.converged)
        self.assertLessEqual(abs(report.iterations - 15), 3, report)
        self.assertLessEqual(report.relative_residual, 1e-7)
        self.assertEqual(len(report.residual_history), report.iterations + 1)
        self.assertLess(report.final_error_A_norm, 1e-3 * a_norm(op, x_true))

    def test_two_grid_jacobi_q2(self):
        op = q2_problem(5)
        h = build_hierarchy(op, projector_symbol_pz(2, 2.), JACOBI_Q2, "tgm")
        _, b = make_rhs_sine(op)
        report = solve(h, b)
        self.assertTrue(report.converged)
        self.assertLessEqual(abs(report.iterations - 33), 3, report)

    def test_vcycle_circulant(self):
        op = build_operator(MatrixSymbol.scalar({0: 3, 1: -1, -1: -1}), 64, "circulant")
        h = build_hierarchy(op, projector_symbol_pz(1, 1.), GAUSS_SEIDEL, "vcycle")
        self.assertEqual(h.sizes[-1], (2,))
        _, b = make_rhs_sine(op)
        report = solve(h, b)
        self.assertTrue(report.converged)
        self.assertLess(report.iterations, 30)

    def test_vcycle_fem_2d(self):
        fine, p = application_problem("q-fem-2d", deg=2, t=3, z=2.)
        h = build_hierarchy(fine, p, GAUSS_SEIDEL, "vcycle")
        self.assertEqual(h.sizes, [(7, 7), (3, 3)])
        _, b = make_rhs_sine(fine)
        self.assertTrue(solve(h, b).converged)

    def test_zero_rhs(self):
        op = q2_problem(4)
        h = build_hierarchy(op, projector_symbol_pz(2, 2.), GAUSS_SEIDEL, "tgm")
        report = solve(h, np.zeros(op.dim))
        self.assertEqual(report.iterations, 0)
        self.assertTrue(report.converged)
        np.testing.assert_array_equal(report.solution, np.zeros(op.dim))

    def test_iteration_limit(self):
        op = q2_problem(4)
        h = build_hierarchy(op, projector_symbol_pz(2, 2.), GAUSS_SEIDEL, "tgm")
        _, b = make_rhs_sine(op)
        report = solve(h, b, max_iter=2)
        self.assertFalse(report.converged)
        self.assertEqual(report.iterations, 2)
        self.assertLess(report.residual_history[-1], report.residual_history[0])

    def test_invalid_arguments(self):
        op = q2_problem(3)
        h = build_hierarchy(op, projector_symbol_pz(2, 2.), GAUSS_SEIDEL, "tgm")
        with self.assertRaises(ValueError):
            solve(h, np.ones(op.dim), tol=0.)
        with self.assertRaises(ValueError):
            solve(h, np.ones(op.dim + 1))

    def test_sine_rhs(self):
        op = q2_problem(3)
        x_true, b = make_rhs_sine(op)
        self.assertEqual(x_true[0], 0.)
        self.assertAlmostEqual(x_true[-1], 0., places=12)
        np.testing.assert_allclose(b, op.matrix @ x_true)


if __name__ == "__main__":
    unittest.main()
