"""Command line driver: single solves, convergence sweeps and the case list.

    lsstokes solve --case 2 --re 100 --w 6
    lsstokes sweep --case 1 --w 2:8 --out t1.csv
    lsstokes list-cases
"""
import argparse
import csv
import logging
import sys
from dataclasses import dataclass

from .geometry import CASE_IDS, build_case_mesh
from .postproc import ErrorReport, exponential_slope, run_case
from .problems import describe_cases, make_case
from .solver import DEFAULT_MAXITER, DEFAULT_TOL

log = logging.getLogger("lsstokes")

CSV_HEADER = ["case", "W", "param", "E_u_H1", "E_p_L2", "E_c_L2", "iters", "converged", "seconds"]


@dataclass
class RunConfig:
    command: str
    case: int = None
    W: tuple = ()
    re: float = None
    nu: float = None
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAXITER
    quad_extra: int = 3
    out: str = None
    timing: bool = True


def _w_range(text):
    try:
        if ":" in text:
            lo, hi = (int(t) for t in text.split(":"))
            ws = tuple(range(lo, hi + 1))
        else:
            ws = (int(text),)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected W or A:B, got {text!r}")
    if not ws:
        raise argparse.ArgumentTypeError(f"empty W range {text!r}")
    if ws[0] < 2:
        raise argparse.ArgumentTypeError("W must be >= 2")
    return ws


def _positive(kind):
    def check(text):
        try:
            v = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a number: {text!r}")
        if not v > 0:
            raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
        return v
    return check


def _nonneg_int(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def build_parser():
    parser = argparse.ArgumentParser(prog="lsstokes", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (("solve", "solve one case at one W"), ("sweep", "solve a case over a range of W")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--case", type=int, required=True, choices=CASE_IDS)
        p.add_argument("--w", dest="W", type=_w_range, required=True,
                       help="polynomial degree W, or inclusive range A:B")
        grp = p.add_mutually_exclusive_group()
        grp.add_argument("--re", type=_positive(float), help="Reynolds number (case 2)")
        grp.add_argument("--nu", type=_positive(float), help="viscosity (cases other than 2)")
        p.add_argument("--tol", type=_positive(float), default=DEFAULT_TOL)
        p.add_argument("--max-iter", type=_positive(int), default=DEFAULT_MAXITER)
        p.add_argument("--quad-extra", type=_nonneg_int, default=3,
                       help="volume quadrature uses W + QUAD_EXTRA Gauss points")
        p.add_argument("--out", help="CSV output path")
        p.add_argument("--no-timing", dest="timing", action="store_false",
                       help="leave the seconds column empty (reproducible output)")
    sub.add_parser("list-cases", help="describe the benchmark cases")
    return parser


def parse_args(argv=None):
    parser = build_parser()
    ns = parser.parse_args(argv)
    if ns.command == "list-cases":
        return RunConfig("list-cases")
    if ns.command == "solve" and len(ns.W) != 1:
        parser.error("solve takes a single W; use sweep for ranges")
    if ns.re is not None and ns.case != 2:
        parser.error("--re applies to case 2 only")
    if ns.nu is not None and ns.case == 2:
        parser.error("case 2 is parametrized by --re")
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    return RunConfig(ns.command, ns.case, ns.W, ns.re, ns.nu, ns.tol, ns.max_iter,
                     ns.quad_extra, ns.out, ns.timing)


def _fmt(v):
    return "" if v is None else format(v, ".17g")


def report_row(r, timing=True):
    return [str(r.case_id), str(r.W), _fmt(r.param), _fmt(r.E_u_H1), _fmt(r.E_p_L2),
            _fmt(r.E_c_L2), str(r.iterations), "true" if r.converged else "false",
            _fmt(r.seconds) if timing else ""]


def write_csv(fh, reports, timing=True):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in reports:
        w.writerow(report_row(r, timing))


def read_csv(path):
    """Parse a CSV written by ``write_csv`` back into ErrorReports."""
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            num = lambda k: float(row[k]) if row[k] else None
            out.append(ErrorReport(
                case_id=int(row["case"]), W=int(row["W"]), E_u_H1=float(row["E_u_H1"]),
                E_p_L2=float(row["E_p_L2"]), E_c_L2=float(row["E_c_L2"]),
                iterations=int(row["iters"]), converged=row["converged"] == "true",
                seconds=num("seconds") or 0.0, param=num("param"),
            ))
    return out


def format_table(reports):
    head = f"{'case':>4} {'W':>3} {'param':>8} {'E_u_H1':>12} {'E_p_L2':>12} {'E_c_L2':>12} {'iters':>6} {'conv':>5} {'seconds':>8}"
    lines = [head]
    for r in reports:
        lines.append(f"{r.case_id:>4} {r.W:>3} {r.param if r.param is not None else '':>8} "
                     f"{r.E_u_H1:12.4e} {r.E_p_L2:12.4e} {r.E_c_L2:12.4e} "
                     f"{r.iterations:>6} {str(r.converged).lower():>5} {r.seconds:8.2f}")
    return "\n".join(lines)


def run(config, stdout=None):
    """Execute a RunConfig; returns the process exit status."""
    stdout = stdout or sys.stdout
    if config.command == "list-cases":
        for cid, text in describe_cases().items():
            print(f"{cid}: {text}", file=stdout)
        return 0

    try:
        fh = open(config.out, "w", newline="") if config.out else None
    except OSError as exc:
        print(f"lsstokes: cannot write {config.out}: {exc}", file=sys.stderr)
        return 1

    kw = {"re": config.re} if config.case == 2 else {"nu": config.nu}
    case = make_case(config.case, **kw)
    mesh = build_case_mesh(config.case)
    reports = []
    for W in config.W:
        r = run_case(case, mesh, W, config.tol, config.max_iter, W + config.quad_extra)
        log.info("case %d W=%d E_u=%.3e iters=%d", config.case, W, r.E_u_H1, r.iterations)
        reports.append(r)

    print(format_table(reports), file=stdout)
    if len(reports) > 1:
        Ws = [r.W for r in reports]
        print(f"exponential slope: u {exponential_slope(Ws, [r.E_u_H1 for r in reports]):.3f}, "
              f"p {exponential_slope(Ws, [r.E_p_L2 for r in reports]):.3f}", file=stdout)
    if fh is not None:
        try:
            with fh:
                write_csv(fh, reports, config.timing)
        except OSError as exc:
            print(f"lsstokes: cannot write {config.out}: {exc}", file=sys.stderr)
            return 1
    return 0 if all(r.converged for r in reports) else 1


def main(argv=None):
    return run(parse_args(argv))


if __name__ == "__main__":
    sys.exit(main())
