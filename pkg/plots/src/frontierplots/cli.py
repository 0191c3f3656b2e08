"""Command line entry points: plot-frontier and plot-solutions."""
import argparse
import sys

from .errors import PlotInputError
from .figures import frontier_overlay_figure, save_figure, solutions_figure
from .io import read_frontier_csv, read_solutions_csv


class _Parser(argparse.ArgumentParser):
    """Usage problems exit 64, matching the solver CLI convention."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(64, f"{self.prog}: error: {message}\n")


def _run(render) -> int:
    try:
        out = render()
    except PlotInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {out}")
    return 0


def main_frontier(argv=None) -> int:
    parser = _Parser(prog="plot-frontier",
                     description="Overlay efficient-frontier CSV curves.")
    parser.add_argument("--in", dest="inputs", nargs="+", required=True,
                        metavar="CSV", help="frontier CSV files, one curve each")
    parser.add_argument("--out", required=True, metavar="IMAGE",
                        help="output image (.svg or .png)")
    parser.add_argument("--x", choices=("std_dev", "variance"),
                        default="std_dev",
                        help="column drawn on the x axis (default std_dev)")
    args = parser.parse_args(argv)

    def render():
        series = [read_frontier_csv(p) for p in args.inputs]
        return save_figure(frontier_overlay_figure(series, args.x), args.out)

    return _run(render)


def main_solutions(argv=None) -> int:
    parser = _Parser(prog="plot-solutions",
                     description="Diagnostic panels of psi, p, g per regime.")
    parser.add_argument("--in", dest="inputs", required=True, metavar="CSV",
                        help="solutions CSV from the solve subcommand")
    parser.add_argument("--out", required=True, metavar="IMAGE",
                        help="output image (.svg or .png)")
    args = parser.parse_args(argv)

    def render():
        return save_figure(solutions_figure(read_solutions_csv(args.inputs)),
                           args.out)

    return _run(render)
