"""Command-line front end.

Exit codes: 0 success, 1 argument or domain error, 2 numerical failure.

A ``--config file.json`` document uses the flag names as keys (``"r-min"``,
``"log-spacing"``, ...).  Its entries are expanded into flags placed before
the command-line flags, so explicit flags win and both routes share one
parser.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotics import fit_decay, fit_decay_auto
from .bell import (
    ALL_SPACE,
    CorrelatedPackets,
    ProductPackets,
    Region,
    UnitVector3,
    chsh,
    g_factor,
    spin_correlation,
    violation_threshold,
)
from .errors import EntangleLabError
from .field import phi_radial, r0
from .formfactor import QuadratureSpec, StepCutoff, formfactor_from_name
from .franson import FransonSettings, coincidence_rate, model_coincidence, visibility
from .svg import PlotError, emit_svg
from .table import NonFiniteValue, SweepTable

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2
THREADS_ENV = "ENTANGLE_LAB_THREADS"
# not echoed into outputs: they name files, not the computation
_IO_KEYS = {"config", "out", "json_out", "plot", "input"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common_parent() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("model")
    g.add_argument("--formfactor", choices=["step", "gaussian", "bump"], default="step")
    g.add_argument("--cutoff", type=float, default=1.0, help="step cutoff A")
    g.add_argument("--width", type=float, default=1.0, help="gaussian width A in exp(-x^2/A)")
    g.add_argument("--support", type=float, nargs=2, default=[0.5, 2.0], metavar=("A", "B"),
                   help="bump support (a, b)")
    g.add_argument("--t", type=float, default=1.0, help="time (same unit as r)")
    g = p.add_argument_group("grid")
    g.add_argument("--r-min", type=float, default=1.0)
    g.add_argument("--r-max", type=float, default=10.0)
    g.add_argument("--points", type=int, default=32)
    g.add_argument("--log-spacing", action=argparse.BooleanOptionalAction, default=False)
    g = p.add_argument_group("numerics")
    g.add_argument("--tol", type=float, default=1e-10, help="relative quadrature tolerance")
    g.add_argument("--abs-tol", type=float, default=1e-12)
    g.add_argument("--seed", type=int, default=0)
    g = p.add_argument_group("io")
    g.add_argument("--config", help="JSON document with flag names as keys")
    g.add_argument("--out", help="CSV output (stdout if omitted)")
    g.add_argument("--json-out", help="JSON output")
    g.add_argument("--plot", help="SVG chart output")
    return p


def _packet_parent() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("wave packets and regions")
    g.add_argument("--packet", choices=["product", "correlated"], default="product")
    g.add_argument("--center1", type=float, nargs=3, default=[0.0, 0.0, 0.0])
    g.add_argument("--center2", type=float, nargs=3, default=[0.0, 0.0, 0.0])
    g.add_argument("--packet-width", type=float, default=1.0, help="product packet width")
    g.add_argument("--offset", type=float, nargs=3, default=[2.0, 0.0, 0.0],
                   help="correlated packet: mean of r1 - r2")
    g.add_argument("--sigma-rel", type=float, default=1.0)
    g.add_argument("--sigma-cm", type=float, default=1.0)
    g.add_argument("--cm-center", type=float, nargs=3, default=[0.0, 0.0, 0.0])
    g.add_argument("--region1", nargs="+", default=["all"],
                   help="'all' or six numbers lo_x lo_y lo_z hi_x hi_y hi_z")
    g.add_argument("--region2", nargs="+", default=["all"])
    g.add_argument("--budget", type=int, default=100_000, help="Monte Carlo samples")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="entangle-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    # parents are rebuilt per subcommand: their actions (and defaults) would otherwise be shared
    sub.add_parser("phi", parents=[_common_parent()], help="phi(r,t) on a radial grid")

    p = sub.add_parser("r0-sweep", parents=[_common_parent()], help="mirror-free coincidence rate R0")
    p.add_argument("--r2", type=float, default=None, help="fixed second radius (default: r2 = r1)")
    p.add_argument("--swap", action=argparse.BooleanOptionalAction, default=False,
                   help="sweep r2 over the grid and hold r1 at --r2")

    p = sub.add_parser("decay-fit", parents=[_common_parent()], help="log-log decay exponent")
    p.add_argument("--quantity", choices=["abs_phi_sq", "r0"], default="abs_phi_sq")
    p.add_argument("--envelope", choices=["auto", "on", "off"], default="auto")
    p.add_argument("--input", help="fit a CSV table instead of evaluating the model")
    p.add_argument("--x-column", default="r")
    p.add_argument("--y-column", default="abs_phi_sq")
    p.set_defaults(r_min=100.0, r_max=1000.0, points=None, log_spacing=True)

    p = sub.add_parser("chsh", parents=[_common_parent(), _packet_parent()], help="CHSH value weighted by g")
    p.add_argument("--angles", type=float, nargs=4, default=[0.0, 90.0, 45.0, 135.0],
                   metavar=("A", "A2", "B", "B2"), help="coplanar settings in degrees")

    sub.add_parser("g-factor", parents=[_common_parent(), _packet_parent()], help="spatial weight g(O1, O2)")

    p = sub.add_parser("franson", parents=[_common_parent()], help="coincidence fringe over phase difference")
    p.add_argument("--r1", type=float, default=2.0)
    p.add_argument("--r2", type=float, default=3.0)
    p.add_argument("--phi2", type=float, default=0.0)
    p.add_argument("--delta-t", type=float, default=0.0)
    p.add_argument("--eta1", type=float, default=1.0)
    p.add_argument("--eta2", type=float, default=1.0)
    p.add_argument("--phase-points", type=int, default=360)
    return parser


def config_to_argv(config: dict) -> list[str]:
    tokens = []
    for key, value in config.items():
        if key == "config":
            raise UsageError("a config file cannot name another config")
        flag = "--" + key.replace("_", "-")
        if isinstance(value, bool):
            tokens.append(flag if value else "--no-" + key.replace("_", "-"))
        elif value is None:
            continue
        elif isinstance(value, (list, tuple)):
            tokens.append(flag)
            tokens.extend(str(v) for v in value)
        else:
            tokens.append(flag)
            tokens.append(str(value))
    return tokens


def parse_args(argv: list[str]) -> argparse.Namespace:
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        try:
            config = json.loads(Path(known.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            parser.error(f"--config: cannot read {known.config}: {exc}")
        if not isinstance(config, dict):
            parser.error("--config: top level must be an object")
        command = config.pop("command", None)
        if not argv or argv[0].startswith("-"):
            parser.error("the subcommand must come first")
        if command is not None and command != argv[0]:
            parser.error(f"--config is for {command!r}, not {argv[0]!r}")
        try:
            argv = [argv[0], *config_to_argv(config), *argv[1:]]
        except UsageError as exc:
            parser.error(str(exc))
    return parser.parse_args(argv)


def resolved_config(args: argparse.Namespace) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in _IO_KEYS}


def provenance(args: argparse.Namespace) -> dict:
    return {"entangle_lab": __version__, "command": args.command, "seed": args.seed,
            "config": resolved_config(args)}


def _workers() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise UsageError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    return min(8, os.cpu_count() or 1)


def parallel_map(fn, items) -> list:
    """``map`` over worker threads; results come back in input order."""
    items = list(items)
    n = _workers()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def _formfactor(args):
    try:
        return formfactor_from_name(args.formfactor, cutoff=args.cutoff, width=args.width,
                                    support=tuple(args.support))
    except ValueError as exc:
        flag = {"step": "cutoff", "gaussian": "width", "bump": "support"}[args.formfactor]
        raise UsageError(f"--{flag}: {exc}") from None


def _spec(args) -> QuadratureSpec:
    if not args.tol > 0:
        raise UsageError("--tol must be positive")
    if not args.abs_tol > 0:
        raise UsageError("--abs-tol must be positive")
    return QuadratureSpec(rel_tol=args.tol, abs_tol=args.abs_tol)


def radial_grid(args, points: int | None = None) -> np.ndarray:
    points = args.points if points is None else points
    if not args.r_min > 0:
        raise UsageError(f"--r-min must be > 0 (r = 0 is outside the domain), got {args.r_min}")
    if not args.r_max >= args.r_min:
        raise UsageError(f"--r-max must be >= --r-min, got {args.r_max} < {args.r_min}")
    if points is None or points < 2:
        raise UsageError(f"--points must be >= 2, got {points}")
    if args.log_spacing:
        return np.geomspace(args.r_min, args.r_max, points)
    return np.linspace(args.r_min, args.r_max, points)


def cmd_phi(args) -> SweepTable:
    f, spec = _formfactor(args), _spec(args)
    grid = radial_grid(args)
    amps = parallel_map(lambda r: phi_radial(f, float(r), args.t, spec), grid)
    table = SweepTable(["r", "t", "phi_re", "phi_im", "abs_phi_sq", "est_error"], provenance=provenance(args))
    for a in amps:
        table.append((a.r, a.t, a.value.real, a.value.imag, abs(a.value) ** 2, a.est_error))
    return table


def cmd_r0_sweep(args) -> SweepTable:
    f, spec = _formfactor(args), _spec(args)
    grid = radial_grid(args)
    if args.r2 is not None and not args.r2 > 0:
        raise UsageError(f"--r2 must be > 0, got {args.r2}")

    def pair(r):
        r = float(r)
        if args.r2 is None:
            return r, r
        return (args.r2, r) if args.swap else (r, args.r2)

    bases = parallel_map(lambda r: r0(f, *pair(r), args.t, spec), grid)
    table = SweepTable(["r1", "r2", "t", "r0"], provenance=provenance(args))
    for b in bases:
        table.append((b.r1, b.r2, b.t, b.r0))
    return table


def cmd_decay_fit(args) -> tuple[dict, SweepTable]:
    if args.input:
        try:
            source = SweepTable.from_csv(Path(args.input).read_text())
            xs, ys = source.column(args.x_column), source.column(args.y_column)
        except (OSError, ValueError, KeyError) as exc:
            raise UsageError(f"--input: {exc}") from None
        if not source.rows:
            raise UsageError(f"--input: {args.input} has no data rows")
        use_env = args.envelope == "on"
        table = SweepTable([args.x_column, args.y_column], list(zip(xs, ys)), provenance=provenance(args))
        samples = list(zip(xs, ys))
        prefer = False
    else:
        f, spec = _formfactor(args), _spec(args)
        prefer = {"auto": isinstance(f, StepCutoff), "on": True, "off": False}[args.envelope]
        points = args.points if args.points is not None else (4001 if prefer else 32)
        grid = radial_grid(args, points)
        if args.quantity == "r0":
            ys = parallel_map(lambda r: r0(f, float(r), float(r), args.t, spec).r0, grid)
        else:
            ys = parallel_map(lambda r: abs(phi_radial(f, float(r), args.t, spec).value) ** 2, grid)
        table = SweepTable(["r", args.quantity], list(zip(map(float, grid), ys)), provenance=provenance(args))
        samples = list(zip(map(float, grid), ys))
        use_env = prefer
    table.check_finite()
    fit = fit_decay_auto(samples, prefer_envelope=True) if prefer else fit_decay(samples, use_envelope=use_env)
    doc = fit.as_dict()
    doc["provenance"] = provenance(args)
    return doc, table


def _region(tokens, flag):
    if isinstance(tokens, str):
        tokens = [tokens]
    if len(tokens) == 1 and str(tokens[0]).lower() == "all":
        return ALL_SPACE
    try:
        vals = [float(v) for v in tokens]
    except ValueError:
        raise UsageError(f"--{flag}: expected 'all' or six numbers") from None
    if len(vals) != 6:
        raise UsageError(f"--{flag}: expected 'all' or six numbers, got {len(vals)}")
    try:
        return Region(tuple(vals[:3]), tuple(vals[3:]))
    except ValueError as exc:
        raise UsageError(f"--{flag}: {exc}") from None


def _packets(args):
    try:
        if args.packet == "product":
            return ProductPackets(tuple(args.center1), tuple(args.center2), args.packet_width, args.packet_width)
        return CorrelatedPackets(tuple(args.offset), args.sigma_rel, args.sigma_cm, tuple(args.cm_center))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _g(args):
    if args.budget < 1:
        raise UsageError("--budget must be >= 1")
    return g_factor(_packets(args), _region(args.region1, "region1"), _region(args.region2, "region2"),
                    args.budget, args.seed)


def cmd_g_factor(args) -> dict:
    res = _g(args)
    return {"g": res.g, "g_error": res.est_error, "method": res.method.value, "provenance": provenance(args)}


def cmd_chsh(args) -> dict:
    a, a2, b, b2 = (UnitVector3.in_xz_plane(d) for d in args.angles)
    res = _g(args)
    s_spin = chsh(a, a2, b, b2, spin_correlation)
    verdict = violation_threshold(res.g)
    return {
        "g": res.g,
        "g_error": res.est_error,
        "g_method": res.method.value,
        "s_spin": s_spin,
        "s_weighted": res.g * s_spin,
        "max_chsh": verdict.max_chsh,
        "violated": verdict.violated,
        "provenance": provenance(args),
    }


def cmd_franson(args) -> tuple[SweepTable, dict]:
    f, spec = _formfactor(args), _spec(args)
    if args.phase_points < 2:
        raise UsageError("--phase-points must be >= 2")
    for flag, r in (("r1", args.r1), ("r2", args.r2)):
        if not r > 0:
            raise UsageError(f"--{flag} must be > 0, got {r}")
    try:
        FransonSettings(args.phi2, args.phi2, args.delta_t, args.eta1, args.eta2)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    base = r0(f, args.r1, args.r2, args.t, spec)
    dphis = 2.0 * math.pi * np.arange(args.phase_points) / args.phase_points

    def row(dphi):
        s = FransonSettings(args.phi2 + float(dphi), args.phi2, args.delta_t, args.eta1, args.eta2)
        rc = coincidence_rate(base, s).rc
        ratio = rc / base.r0 if base.r0 > 0 else math.nan
        return float(dphi), rc, ratio, model_coincidence(f, args.r1, args.r2, args.t, s, spec)

    table = SweepTable(["delta_phi", "rc", "rc_over_r0", "model_rc"], provenance=provenance(args))
    for values in parallel_map(row, dphis):
        table.append(values)
    v = visibility([(d, rc) for d, rc, _, _ in table.rows])
    table.trailer = {"visibility": v, "r0": base.r0}
    return table, {"visibility": v, "r0": base.r0, "provenance": provenance(args)}


def _write_table(args, table: SweepTable) -> None:
    table.check_finite()
    text = table.to_csv()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _write_json(args, doc: dict, echo: bool = True) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if args.json_out:
        Path(args.json_out).write_text(text)
    if echo:
        sys.stdout.write(text)


def _plot(args, table: SweepTable, x: str, ys: list[str]) -> None:
    if not args.plot:
        return
    log = bool(getattr(args, "log_spacing", False))
    positive = all(v > 0 for y in ys for v in table.column(y)) if table.rows else False
    emit_svg(table, x, ys, args.plot, log_x=log, log_y=log and positive, title=args.command)


def run(args) -> int:
    cmd = args.command
    if cmd in ("chsh", "g-factor") and args.plot:
        raise UsageError(f"--plot is not available for {cmd}")
    if cmd == "phi":
        table = cmd_phi(args)
        _write_table(args, table)
        _plot(args, table, "r", ["abs_phi_sq"])
    elif cmd == "r0-sweep":
        table = cmd_r0_sweep(args)
        _write_table(args, table)
        _plot(args, table, "r2" if args.swap else "r1", ["r0"])
    elif cmd == "decay-fit":
        doc, table = cmd_decay_fit(args)
        if args.out:
            _write_table(args, table)
        _write_json(args, doc)
        _plot(args, table, table.columns[0], [table.columns[1]])
    elif cmd == "chsh":
        _write_json(args, cmd_chsh(args))
    elif cmd == "g-factor":
        _write_json(args, cmd_g_factor(args))
    elif cmd == "franson":
        table, doc = cmd_franson(args)
        _write_table(args, table)
        if args.json_out:
            _write_json(args, doc, echo=False)
        _plot(args, table, "delta_phi", ["rc", "model_rc"])
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return run(args)
    except (UsageError, PlotError) as exc:
        print(f"entangle-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"entangle-lab: error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (EntangleLabError, NonFiniteValue) as exc:
        print(f"entangle-lab: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
