"""blockmg.__main__ is the executable for the command line functionality of
the tool."""
import sys
import argparse
import textwrap as tw
from blockmg import BlockMG, BlockMGParameters, __version__
from blockmg.calc.reproduce import TABLES
from blockmg.tests.tests import run_unittest


def _add_output_options(parser):
    """Input/output and miscellaneous flags shared by all analysis subcommands"""
    grpIO = parser.add_argument_group("Output options")
    grpIO.add_argument("-o", "--output", type=str, metavar="<file.csv>", help=tw.dedent(
        """\
        The file to write the results to. If not given, the
        results are written to stdout (as CSV unless
        `--output-format` says otherwise)."""))
    grpIO.add_argument("--output-format", choices=["auto", "csv", "json", "tsv"], default="auto",
        help="Format of the output: {'csv', 'json', 'tsv'}. (default: 'auto')")
    grpIO.add_argument("--precision", metavar="<int>", type=int, default=6,
        help="Significant digits of floating point values. (default: 6)")

    grpMisc = parser.add_argument_group("Miscellaneous options")
    grpMisc.add_argument("-v", "--verbose", action="count", default=0, help=tw.dedent(
        """\
        Set verbosity level of screen output. Flag can be given
        multiple times (up to 2) to gradually increase output to
        debugging mode."""))


def _add_problem_options(parser, z_default=None):
    """Flags that select the application and the projector"""
    grpApp = parser.add_argument_group("Problem options")
    grpApp.add_argument("--app", choices=["q-fem-1d", "q-fem-2d", "dg", "symbol-file"], default="q-fem-1d",
        help=tw.dedent(
        """\
        The application: Q_deg FEM stiffness in 1D or 2D, the
        staggered DG Toeplitz system, or an operator generated
        by the symbol in `--symbol-file`. (default: 'q-fem-1d')"""))
    grpApp.add_argument("--deg", type=int, metavar="<int>", default=2,
        help="FEM polynomial degree: 1..6. (default: 2)")
    grpApp.add_argument("--t", type=int, metavar="<int>", default=5, help=tw.dedent(
        """\
        Level exponent: n = 2^t - 1 blocks per direction
        (n = 2^t for circulant operators). (default: 5)"""))
    grpApp.add_argument("--z", type=float, nargs="+", metavar="<float>", default=z_default, help=tw.dedent(
        """\
        Parameter(s) of the projector p_z. Multiple values can
        be provided. (default: 1 2 3 4 5)"""))
    grpApp.add_argument("--kind", choices=["toeplitz", "circulant"], default="toeplitz",
        help="Operator kind of the `symbol-file` application. (default: 'toeplitz')")
    grpApp.add_argument("--cut", action="store_true", help=tw.dedent(
        """\
        Remove the last row and column of the 1D operator
        (size deg*n - 1 instead of deg*n)."""))
    grpApp.add_argument("--symbol-file", type=str, metavar="<file.json>",
        help="JSON file with the symbol of the `symbol-file` application.")
    grpApp.add_argument("--coefficient-file", type=str, metavar="<file.json>",
        help="JSON file with the DG coefficients (`dg` application).")


def parse_parameters(cmdline_arguments):
    """Parse command line arguments and return them as argparse.Namespace"""
    parser = argparse.ArgumentParser(description=tw.dedent(
        """\
        BlockMG solves linear systems with block-Toeplitz and block-circulant
        matrices generated by matrix-valued trigonometric polynomials (symbols)
        using two-grid and V-cycle multigrid methods. The grid transfer operators
        are built from the projector family

            p_z(theta) = (1 + cos theta) (I_d + (z-1)/d ee^T)

        and the coarse operators are Galerkin products. Smoothers are relaxed
        Richardson, relaxed Jacobi and Gauss-Seidel.

        The `blockmg solve` submodule runs the multigrid method on Q_deg FEM
        stiffness matrices (1D and 2D), staggered DG systems or any symbol
        given as a file.

        The `blockmg analyze` submodule computes the conditioning of the coarse
        symbols over several levels (or the level ratios of the second
        derivative of the minimal eigenvalue with `--conjecture`).

        The `blockmg conditions` submodule checks the two-grid conditions on
        the symbol and the projector numerically.

        The `blockmg reproduce` submodule runs the sweep of a published
        iteration or conditioning table and compares it to the expected
        values."""),
        formatter_class=argparse.RawTextHelpFormatter, add_help=False)

    # General flags for the main software
    genOpt = parser.add_argument_group("Generic options")
    genOpt.add_argument("-h", "--help", action="help", help=tw.dedent(
        """\
        Show this help message and exit. For detailed
        information on the subcommands, run:
        `%(prog)s SUBCOMMAND -h`"""))
    genOpt.add_argument("--version", action="version", version=f"%(prog)s {__version__}",
        help="Show the program's version number and exit")

    subparsers = parser.add_subparsers(title="Subcommands",
        dest="subcommand", required=True, help=tw.dedent(
        """\
        solve
            Solve a structured system with a multigrid method
        analyze
            Conditioning of the coarse symbols over the levels
        conditions
            Numeric check of the two-grid conditions
        reproduce
            Reproduce a published table
        test
            Run unit tests of the installed package"""))

    # ==================
    #  Subparser: solve
    # ==================
    parser_solve = subparsers.add_parser("solve", description=tw.dedent(
        """\
        The `blockmg solve` submodule builds the fine operator of the chosen
        application, the multigrid hierarchy for every value of z, and solves
        A x = b for the right-hand side b = A sin(pi i / (N-1)) from a zero
        initial guess until the relative residual drops below the tolerance.

        The exit status is nonzero if a solve reaches the maximum number of
        iterations."""),
        formatter_class=argparse.RawTextHelpFormatter)
    _add_problem_options(parser_solve)

    solMG = parser_solve.add_argument_group("Multigrid options")
    solMG.add_argument("--cycle", choices=["tgm", "vcycle"], default="tgm",
        help="Two-grid method or V-cycle. (default: 'tgm')")
    solMG.add_argument("--smoother", choices=["gs", "jacobi", "richardson"], default="gs",
        help="Pre- and post-smoother. (default: 'gs')")
    solMG.add_argument("--omega-pre", type=float, metavar="<float>", default=None, help=tw.dedent(
        """\
        Relaxation of the pre-smoother. By default the
        admissible bound of Jacobi/Richardson (1 for
        Gauss-Seidel)."""))
    solMG.add_argument("--omega-post", type=float, metavar="<float>", default=None, help=tw.dedent(
        """\
        Relaxation of the post-smoother. (default: 2/3 of
        `--omega-pre`)"""))
    solMG.add_argument("--tol", type=float, metavar="<float>", default=1e-7,
        help="Relative residual tolerance. (default: 1e-7)")
    solMG.add_argument("--max-iter", type=int, metavar="<int>", default=4000,
        help="Maximum number of iterations. (default: 4000)")
    solMG.add_argument("--seed", type=int, metavar="<int>", default=None,
        help="Start from a random initial guess with this seed.")
    solMG.add_argument("--export-matrix", type=str, metavar="<file.mtx>", default=None,
        help="Write the fine operator in Matrix Market format.")
    _add_output_options(parser_solve)

    # ====================
    #  Subparser: analyze
    # ====================
    parser_analyze = subparsers.add_parser("analyze", description=tw.dedent(
        """\
        The `blockmg analyze` submodule computes the coarse symbols of a 1-level
        symbol f with the projector p_z over several levels and reports per
        level the second derivative of lambda_min at the origin, the supremum
        of lambda_max and their ratio kappa.

        With `--conjecture`, the ratios of the second derivatives to (z^2/2)^j
        are reported instead (Q_deg FEM, deg in 2..4); the exit status is
        nonzero if the ratios are not constant over the levels."""),
        formatter_class=argparse.RawTextHelpFormatter)
    _add_problem_options(parser_analyze)
    anaOpt = parser_analyze.add_argument_group("Analysis options")
    anaOpt.add_argument("--levels", type=int, metavar="<int>", default=4,
        help="Number of coarse levels. (default: 4)")
    anaOpt.add_argument("--grid", type=int, metavar="<int>", default=4096,
        help="Grid points for the supremum of lambda_max. (default: 4096)")
    anaOpt.add_argument("--conjecture", action="store_true",
        help="Report the level ratios of the second derivatives.")
    _add_output_options(parser_analyze)

    # =======================
    #  Subparser: conditions
    # =======================
    parser_conditions = subparsers.add_parser("conditions", description=tw.dedent(
        """\
        The `blockmg conditions` submodule checks numerically, for a 1-level
        symbol f and the projector p_z:
            * the trace norm of f^{-1/2}(theta) p(theta+pi)^H stays bounded
            * p^H p(theta) + p^H p(theta+pi) is positive definite
            * p(theta) and p(theta+pi) commute
        The exit status is nonzero if any condition fails."""),
        formatter_class=argparse.RawTextHelpFormatter)
    _add_problem_options(parser_conditions)
    conOpt = parser_conditions.add_argument_group("Analysis options")
    conOpt.add_argument("--grid", type=int, metavar="<int>", default=4096,
        help="Grid points of the check. (default: 4096)")
    _add_output_options(parser_conditions)

    # ======================
    #  Subparser: reproduce
    # ======================
    parser_reproduce = subparsers.add_parser("reproduce", description=tw.dedent(
        """\
        The `blockmg reproduce` submodule runs the sweep of a published table
        and adds, for every z-column, the difference to the published value.
        Sizes are capped by the environment variables BLOCKMG_MAX_T_1D (13),
        BLOCKMG_MAX_T_2D (8) and BLOCKMG_MAX_T_DG (8).

        Table 10 needs DG coefficients (`--coefficient-file`); without them,
        property checks on a synthetic DG symbol are run instead.

        The exit status is nonzero if any cell lies outside the tolerance."""),
        formatter_class=argparse.RawTextHelpFormatter)
    repOpt = parser_reproduce.add_argument_group("Table options")
    repOpt.add_argument("--table", required=True, choices=list(TABLES),
        help="The table to reproduce.")
    repOpt.add_argument("--t-min", type=int, metavar="<int>", default=None,
        help="First row (t, or j for table 3).")
    repOpt.add_argument("--t-max", type=int, metavar="<int>", default=None,
        help="Last row (t, or j for table 3).")
    repOpt.add_argument("--z", type=float, nargs="+", metavar="<float>", default=None,
        help="Columns z (default: the published ones).")
    repOpt.add_argument("--coefficient-file", type=str, metavar="<file.json>",
        help="JSON file with the DG coefficients (table 10).")
    repOpt.add_argument("--progress", action="store_true",
        help="Show a progress bar.")
    _add_output_options(parser_reproduce)

    # ======================
    #  Subparser: test
    # ======================
    subparsers.add_parser("test", description=tw.dedent(
        """\
        The `blockmg test` submodule runs the unit tests of the installed
        package. The long table sweeps only run if the environment variable
        BLOCKMG_ACCEPTANCE is set."""),
        formatter_class=argparse.RawTextHelpFormatter)

    # Parse command line arguments
    return parser.parse_args(cmdline_arguments)


def _parameters(args) -> BlockMGParameters:
    """Convert command line arguments to BlockMGParameters"""
    params = BlockMGParameters(verbose=args.verbose)
    params.command = args.subcommand
    params.output_file = args.output
    params.output_format = args.output_format
    params.precision = args.precision
    params.coefficient_file = args.coefficient_file
    if args.z is not None:
        params.z = args.z
    for name in ("app", "deg", "t", "kind", "cut", "symbol_file"):
        if hasattr(args, name):
            setattr(params, name, getattr(args, name))
    return params


def run_solve(args) -> int:
    """Run solve subcommand when invoked from command line"""
    params = _parameters(args)
    params.cycle = args.cycle
    params.smoother = args.smoother
    params.omega_pre = args.omega_pre
    params.omega_post = args.omega_post
    params.tol = args.tol
    params.max_iter = args.max_iter
    params.seed = args.seed
    params.export_matrix = args.export_matrix
    return BlockMG(params).run()


def run_analyze(args) -> int:
    """Run analyze subcommand when invoked from command line"""
    params = _parameters(args)
    params.levels = args.levels
    params.grid = args.grid
    params.conjecture = args.conjecture
    return BlockMG(params).run()


def run_conditions(args) -> int:
    """Run conditions subcommand when invoked from command line"""
    params = _parameters(args)
    params.grid = args.grid
    return BlockMG(params).run()


def run_reproduce(args) -> int:
    """Run reproduce subcommand when invoked from command line"""
    params = _parameters(args)
    params.table = args.table
    params.t_min = args.t_min
    params.t_max = args.t_max
    params.z = args.z
    params.show_progress = args.progress
    return BlockMG(params).run()


def main(cmdline_arguments=None) -> int:
    """main function executed when running script in command line mode"""
    # Parse command line parameters
    args = parse_parameters(sys.argv[1:] if cmdline_arguments is None else cmdline_arguments)
    if args.subcommand == "solve":
        return run_solve(args)
    elif args.subcommand == "analyze":
        return run_analyze(args)
    elif args.subcommand == "conditions":
        return run_conditions(args)
    elif args.subcommand == "reproduce":
        return run_reproduce(args)
    elif args.subcommand == "test":
        return int(not run_unittest())

if __name__ == "__main__":
    sys.exit(main())
