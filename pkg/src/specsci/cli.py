"""Command-line front end.

Every subcommand loads an operator spec (JSON), runs one algorithm and writes
<prefix>.csv and/or <prefix>.json plus <prefix>.meta.json with the resolved
configuration. Exit codes: 0 success, 2 bad parameters or spec, 3 numerical
failure, 4 inconclusive.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .errors import Inconclusive, NumericalError, ParameterError
from .parallel import THREADS_ENV, default_threads
from .sets import GridSpec, PointSet, RegionEstimate, _json_default, attouch_wets, hausdorff

EXIT_OK, EXIT_PARAM, EXIT_NUMERIC, EXIT_INCONCLUSIVE = 0, 2, 3, 4

COMMANDS = (
    "pseudospec",
    "spectrum-compact",
    "spectrum-banded",
    "spectrum-bounded",
    "residual",
    "hull",
    "numrange",
    "resolvent",
    "funcalc",
    "log",
    "metrics",
    "counterexample",
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ParameterError(message)


def _threads(value: str) -> int:
    if value == "auto":
        return os.cpu_count() or 1
    try:
        n = int(value)
    except ValueError as exc:
        raise ParameterError(f"--threads must be an integer or 'auto', got {value!r}") from exc
    if n < 1:
        raise ParameterError("--threads must be >= 1")
    return n


def _complex_list(text: str) -> list[complex]:
    from .operators import parse_complex

    text = text.strip()
    if text.startswith("["):
        return [parse_complex(v) for v in json.loads(text)]
    return [parse_complex(v) for v in text.split(",") if v.strip()]


def _common(p: argparse.ArgumentParser, op: bool = True, grid: bool = False):
    if op:
        p.add_argument("--op", required=True, help="operator spec JSON file")
    if grid:
        p.add_argument("--outer", type=int, help="use the grid Theta_outer")
        p.add_argument("--rect", type=float, nargs=5, metavar=("RE0", "RE1", "IM0", "IM1", "STEP"),
                       help="use a rectangular grid instead")
    p.add_argument("--output", help="output path prefix (default: the command name)")
    p.add_argument("--format", choices=("csv", "json", "both"), default="csv")
    p.add_argument("--threads", type=_threads, default=None,
                   help=f"worker threads or 'auto' (default: ${THREADS_ENV} or 1)")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized searches")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="specsci", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("pseudospec", help="(n, eps)-pseudospectrum on a grid")
    _common(p, grid=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--m", type=int, help="compression size (default: --outer)")
    p.add_argument("--k", default="full", help="inner truncation or 'full'")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--precision", choices=("auto", "double"), default="auto")
    p.add_argument("--tau", type=float, default=0.0)

    p = sub.add_parser("residual", help="residual pseudospectrum and its adjoint counterpart")
    _common(p, grid=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--k", default="full")
    p.add_argument("--zero-tol", type=float)
    p.add_argument("--tol", type=float, default=1e-10)

    p = sub.add_parser("spectrum-compact", help="compact-operator tower on Theta_n")
    _common(p)
    p.add_argument("--n", type=int, required=True)

    p = sub.add_parser("spectrum-bounded", help="bounded-operator tower; omit --n2 for the exact inner limit")
    _common(p)
    p.add_argument("--n1", type=int, required=True)
    p.add_argument("--n2", type=int)
    p.add_argument("--n", type=int, default=0)
    p.add_argument("--eps", type=float, required=True)

    p = sub.add_parser("spectrum-banded", help="banded one-limit tower on Theta_k")
    _common(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n", type=int, default=0)
    p.add_argument("--eps", type=float, required=True)

    p = sub.add_parser("hull", help="nested polynomial hulls from the enumeration")
    _common(p)
    p.add_argument("--steps", type=int, default=5)
    p.add_argument("--budget", type=int, default=10_000, help="enumeration indices per step")
    p.add_argument("--samples", type=int, default=201, help="lattice points per axis")
    p.add_argument("--resume", help="HullState JSON from an earlier run")
    p.add_argument("--degree", type=int, help="instead run the min-norm search at this degree")
    p.add_argument("--search-budget", type=int, default=2000)

    p = sub.add_parser("numrange", help="closure of the numerical range (order-1 hull)")
    _common(p, grid=True)
    p.add_argument("--c-samples", type=int, default=41)

    p = sub.add_parser("resolvent", help="resolvent series at a point")
    _common(p)
    _poly_args(p)
    p.add_argument("--z", required=True)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--n-max", type=int, default=100_000)

    p = sub.add_parser("funcalc", help="f(a) by the multicentric calculus")
    _common(p)
    _poly_args(p)
    p.add_argument("--function", required=True, choices=("log", "sqrt", "exp", "rational", "power_series"))
    p.add_argument("--cut", type=float, help="branch cut angle for log and sqrt")
    p.add_argument("--num", help="rational numerator coefficients, highest power first")
    p.add_argument("--den", help="rational denominator coefficients, highest power first")
    p.add_argument("--series", help="power series coefficients from the constant term up")
    p.add_argument("--center", default="0", help="power series center")
    p.add_argument("--radius", type=float, help="power series radius of convergence")
    p.add_argument("--J", type=int, help="series order (default: adaptive)")
    p.add_argument("--tol", type=float, default=1e-10)

    p = sub.add_parser("log", help="log(a) via a hull that excludes 0")
    _common(p)
    p.add_argument("--budget", type=int, default=10_000)
    p.add_argument("--max-degree", type=int, default=4)
    p.add_argument("--search-budget", type=int, default=2000)

    p = sub.add_parser("metrics", help="Hausdorff and Attouch-Wets distances between member sets")
    p.add_argument("files", nargs=2, help="two region or point CSV files")
    p.add_argument("--hausdorff", action="store_true", help="print only the Hausdorff distance")
    p.add_argument("--attouch-wets", action="store_true", help="print only the Attouch-Wets distance")
    p.add_argument("--i-max", type=int, default=30)

    p = sub.add_parser("counterexample", help="check the diagonal-subsequence counterexample")
    _common(p, op=False)
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--schedule", default="2,1", help="'a,b' for k_m = a m + b, or a JSON list k_1, k_2, ...")
    return parser


def _poly_args(p):
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--roots", help="roots of p, comma separated or a JSON list")
    g.add_argument("--coeffs", help="coefficients a_1..a_d of the monic p")


def _poly(args):
    from .poly import MonicPoly

    if args.roots:
        return MonicPoly.from_roots(_complex_list(args.roots))
    return MonicPoly(tuple(_complex_list(args.coeffs)))


def _grid(args, default_outer: int | None) -> GridSpec:
    if getattr(args, "rect", None):
        return GridSpec.rectangle(*args.rect)
    outer = args.outer if args.outer is not None else default_outer
    if outer is None:
        raise ParameterError("give --outer or --rect")
    return GridSpec.theta(outer)


def _dense_matrix(spec) -> np.ndarray:
    from .operators import section

    if not spec.finite:
        raise ParameterError(f"this command needs a finite operator, got kind {spec.kind!r}")
    return section(spec, spec.dim).entries


class _Writer:
    def __init__(self, args):
        self.prefix = Path(args.output or args.command)
        self.format = getattr(args, "format", "csv")
        self.files: list[str] = []

    def region(self, region: RegionEstimate, suffix: str = ""):
        base = str(self.prefix) + suffix
        if self.format in ("csv", "both"):
            self._write(base + ".csv", region.to_csv())
        if self.format in ("json", "both"):
            self._write(base + ".json", region.to_json())

    def document(self, doc: dict, suffix: str = ""):
        self._write(str(self.prefix) + suffix + ".json", json.dumps(doc, indent=1, default=_json_default))

    def meta(self, args, extra: dict):
        config = {k: v for k, v in vars(args).items()}
        doc = {"command": args.command, "config": config, "version": __version__,
               "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"), "outputs": self.files, **extra}
        self._write(str(self.prefix) + ".meta.json", json.dumps(doc, indent=1, default=_json_default))

    def _write(self, path: str, text: str):
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)
        self.files.append(path)


def _matrix_doc(m: np.ndarray) -> list:
    return [[[complex(v).real, complex(v).imag] for v in row] for row in m]


def _load(args):
    from .operators import load_spec

    return load_spec(args.op)


def _run(args) -> int:
    from . import calculus, hulls, pseudospectra, sci

    out = _Writer(args) if args.command != "metrics" else None
    threads = getattr(args, "threads", None)
    if threads is None and args.command != "metrics":
        args.threads = threads = default_threads()
    cmd = args.command

    if cmd == "pseudospec":
        spec = _load(args)
        grid = _grid(args, None)
        m = args.m if args.m is not None else (args.outer if args.outer is not None else None)
        if m is None:
            raise ParameterError("give --m when using --rect")
        if spec.finite:
            m = min(m, spec.dim)
        k = args.k if args.k == "full" else int(args.k)
        region = pseudospectra.n_eps_region(spec, grid, args.n, args.eps, m, k, args.tol, args.precision, args.tau, threads)
        out.region(region)
        out.meta(args, {"region_meta": region.meta, "grid": grid.to_json(), "members": int(region.member.sum())})
        print(f"{int(region.member.sum())} of {region.z.size} grid points are members")
        return EXIT_OK

    if cmd == "residual":
        spec = _load(args)
        grid = _grid(args, args.m)
        k = args.k if args.k == "full" else int(args.k)
        first, second = pseudospectra.residual_regions(spec, grid, args.eps, args.m, k, args.zero_tol, args.tol, "auto", threads)
        out.region(first, ".res")
        out.region(second, ".res_adjoint")
        out.meta(args, {"residual_meta": first.meta | {"other_values": None},
                        "adjoint_meta": second.meta | {"other_values": None}, "grid": grid.to_json()})
        print(f"residual: {int(first.member.sum())} points, adjoint residual: {int(second.member.sum())} points")
        return EXIT_OK

    if cmd in ("spectrum-compact", "spectrum-bounded", "spectrum-banded"):
        spec = _load(args)
        if cmd == "spectrum-compact":
            res = sci.gamma_compact(spec, args.n, threads)
        elif cmd == "spectrum-banded":
            res = sci.gamma_banded(spec, args.k, args.n, args.eps, threads)
        elif args.n2 is None:
            res = sci.gamma_bounded_limit(spec, args.n1, args.n, args.eps, threads)
        else:
            res = sci.gamma_bounded(spec, args.n1, args.n2, args.n, args.eps, threads)
        out.region(res.region)
        out.meta(args, {"level": res.level, "parameters": res.parameters, "region_meta": res.region.meta,
                        "grid": res.region.grid.to_json()})
        print(f"{res.level}: {int(res.region.member.sum())} member points")
        return EXIT_OK

    if cmd == "hull":
        spec = _load(args)
        if args.degree is not None:
            p, norm = hulls.min_norm_poly(spec, args.degree, args.search_budget, args.seed)
            out.document({"poly": p.to_json(), "norm": norm.to_json()})
            out.meta(args, {})
            print(f"||p(a)|| = {norm.value:.17g} ({norm.mode})")
            return EXIT_OK
        state = None
        if args.resume:
            try:
                state = hulls.HullState.from_json(json.loads(Path(args.resume).read_text()))
            except (OSError, json.JSONDecodeError, KeyError) as exc:
                raise ParameterError(f"cannot read hull state: {exc}") from exc
        state = hulls.hull_enumeration(spec, args.steps, args.budget, args.samples, state)
        out.document(state.to_json())
        re0, re1, im0, im1 = state.window
        grid = GridSpec.rectangle(re0, re1, im0, im1, (re1 - re0) / (state.samples - 1))
        out.region(hulls.vp_region(state.poly(-1), state.norm(-1), grid), ".last")
        out.meta(args, {"status": state.status, "accepted": len(state.accepted)})
        print(f"{len(state.accepted)} accepted sets, status {state.status}, cursor {state.cursor}")
        return EXIT_OK

    if cmd == "numrange":
        spec = _load(args)
        grid = _grid(args, None)
        region = hulls.numerical_range_v1(spec, args.c_samples, grid)
        out.region(region)
        out.meta(args, {"region_meta": region.meta, "grid": grid.to_json()})
        print(f"{int(region.member.sum())} member points")
        return EXIT_OK

    if cmd == "resolvent":
        from .operators import parse_complex

        a = _dense_matrix(_load(args))
        z = parse_complex(args.z)
        result, report = calculus.resolvent_series(_poly(args), a, z, args.tol, args.n_max)
        out.document({"resolvent": _matrix_doc(result), "report": report.to_json()})
        out.meta(args, {"report": report.to_json()})
        print(f"N = {report.n_terms}, rho = {report.rho:.6g}, residual = {report.residual:.3g}")
        return EXIT_OK

    if cmd == "funcalc":
        from .operators import parse_complex

        a = _dense_matrix(_load(args))
        params = {}
        if args.cut is not None:
            params["cut"] = args.cut
        if args.function == "rational":
            if not (args.num and args.den):
                raise ParameterError("rational needs --num and --den")
            params.update(num=_complex_list(args.num), den=_complex_list(args.den))
        if args.function == "power_series":
            if not (args.series and args.radius):
                raise ParameterError("power_series needs --series and --radius")
            params.update(coeffs=_complex_list(args.series), center=parse_complex(args.center), radius=args.radius)
        f = calculus.make_function(args.function, **params)
        result, report = calculus.funcalc(f, _poly(args), a, args.J, args.tol)
        out.document({"result": _matrix_doc(result), "report": report.to_json()})
        out.meta(args, {"report": report.to_json()})
        print(f"J = {report.J}, tail bound = {report.tail_bound:.3g}")
        return EXIT_OK

    if cmd == "log":
        a = _dense_matrix(_load(args))
        try:
            result, report = calculus.log_element(a, args.budget, args.max_degree, args.search_budget, seed=args.seed)
        except Inconclusive as exc:
            out.document(exc.report)
            out.meta(args, {"outcome": "inconclusive"})
            print("inconclusive: " + str(exc), file=sys.stderr)
            return EXIT_INCONCLUSIVE
        out.document({"result": _matrix_doc(result), "report": report})
        out.meta(args, {"outcome": "ok"})
        print(f"cut angle {report['cut_angle']:.6g}, exp residual {report.get('exp_residual', float('nan')):.3g}")
        return EXIT_OK

    if cmd == "metrics":
        a, b = (_read_points(f) for f in args.files)
        if len(a) == 0 or len(b) == 0:
            raise ParameterError("member set is empty")
        if args.hausdorff and not args.attouch_wets:
            print(f"{hausdorff(a, b):.17g}")
        elif args.attouch_wets and not args.hausdorff:
            print(f"{attouch_wets(a, b, args.i_max):.17g}")
        else:
            print(json.dumps(compare_regions(a, b, args.i_max)))
        return EXIT_OK

    if cmd == "counterexample":
        from .operators import Schedule

        text = args.schedule.strip()
        if text.startswith("["):
            schedule = Schedule(values=tuple(json.loads(text)))
        else:
            parts = [int(v) for v in text.split(",")]
            if len(parts) != 2:
                raise ParameterError("--schedule takes 'a,b' or a JSON list")
            schedule = Schedule(affine=tuple(parts))
        report = sci.counterexample_check(args.eps, args.m, schedule)
        out.document(report.to_json())
        out.meta(args, {})
        print(json.dumps(report.to_json(), default=_json_default))
        return EXIT_OK

    raise ParameterError(f"unknown command {cmd}")


def _read_points(path: str) -> PointSet:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParameterError(f"cannot read {path}: {exc}") from exc
    header = text.split("\n", 1)[0].strip()
    if header == "re,im":
        rows = [ln.split(",") for ln in text.strip().splitlines()[1:] if ln.strip()]
        return PointSet(np.array([complex(float(r[0]), float(r[1])) for r in rows]))
    return RegionEstimate.from_csv(text).members()


def compare_regions(a, b, i_max: int = 30) -> dict:
    """Hausdorff and Attouch-Wets distances between two member sets."""
    a = a if isinstance(a, PointSet) else _read_points(a)
    b = b if isinstance(b, PointSet) else _read_points(b)
    if len(a) == 0 or len(b) == 0:
        raise ParameterError("member set is empty")
    return {"hausdorff": hausdorff(a, b), "attouch_wets": attouch_wets(a, b, i_max)}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return _run(args)
    except (ParameterError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAM
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except Inconclusive as exc:
        print(f"inconclusive: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
