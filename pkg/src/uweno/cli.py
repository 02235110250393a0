"""Command-line driver: ``uweno {meshgen,run,convergence,weights-report}``."""

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import io
from .cases import CASES, convergence_orders, error_norms, get_case, line_cut
from .errors import UwenoError
from .mesh import MESH_KINDS, generate_mesh, normalize_kind, read_mesh, write_mesh
from .solver import Solver, SolverState, set_threads
from .weno import precompute_tables

log = logging.getLogger("uweno")

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


class UsageError(Exception):
    pass


def _on_off(text):
    val = str(text).strip().lower()
    if val in ("1", "on", "true", "yes"):
        return True
    if val in ("0", "off", "false", "no"):
        return False
    raise argparse.ArgumentTypeError(f"expected on/off, got {text!r}")


def _int_list(text):
    try:
        return [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _domain(text):
    try:
        vals = tuple(float(v) for v in str(text).split(","))
    except ValueError:
        vals = ()
    if len(vals) != 4 or not (vals[1] > vals[0] and vals[3] > vals[2]):
        raise argparse.ArgumentTypeError("domain must be x0,x1,y0,y1 with x1>x0 and y1>y0")
    return vals


def read_config(path):
    """``key = value`` lines; ``#`` starts a comment. Keys use flag names."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = val
    return out


def _common(p):
    p.add_argument("--mesh", help="mesh kind (" + ", ".join(MESH_KINDS) + ") or a mesh file")
    p.add_argument("--n", type=int, help="cells per unit length (h = 1/n)")
    p.add_argument("--amplitude", type=float, help="node perturbation amplitude (fraction of h)")
    p.add_argument("--seed", type=int, help="perturbation seed")
    p.add_argument("--threads", type=int, help="cap on compute threads")
    p.add_argument("--config", help="key = value file with defaults for these flags")
    p.add_argument("--out", help="output directory or file")
    p.add_argument("-v", "--verbose", action="store_true")


def _solver_flags(p):
    p.add_argument("--tend", type=float, help="end time")
    p.add_argument("--cfl", type=float, help="time-step coefficient (cfl or accuracy factor)")
    p.add_argument("--dt-mode", choices=("cfl", "accuracy"))
    p.add_argument("--epsilon", type=float)
    p.add_argument("--theta", type=float)
    p.add_argument("--characteristic", type=_on_off, help="on/off")


def build_parser():
    parser = argparse.ArgumentParser(prog="uweno", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("meshgen", help="generate a mesh file")
    _common(p)
    p.add_argument("--case", choices=sorted(CASES), help="take the domain from a case")
    p.add_argument("--domain", type=_domain, help="x0,x1,y0,y1 (default unit square)")

    p = sub.add_parser("run", help="run a benchmark case")
    p.add_argument("case", choices=sorted(CASES))
    _common(p)
    _solver_flags(p)
    p.add_argument("--no-vtk", action="store_true", help="skip the VTK field file")

    p = sub.add_parser("convergence", help="error table over a mesh-size ladder")
    p.add_argument("case", choices=sorted(c for c, s in CASES.items() if s.exact is not None))
    _common(p)
    _solver_flags(p)
    p.add_argument("--sizes", type=_int_list, help="values of 1/h, e.g. 8,16,32,64")

    p = sub.add_parser("weights-report", help="linear-weight statistics per Gauss point")
    _common(p)
    p.add_argument("--case", choices=sorted(CASES), help="take the domain from a case")
    p.add_argument("--domain", type=_domain)
    p.add_argument("--sizes", type=_int_list, help="values of 1/h")
    p.add_argument("--theta", type=float)
    return parser


def _apply_config(parser, args, argv):
    """Fill flags not given on the command line from ``--config``."""
    if not getattr(args, "config", None):
        return args
    cfg = read_config(args.config)
    given = {a.split("=", 1)[0].lstrip("-").replace("-", "_") for a in argv if a.startswith("--")}
    actions = {a.dest: a for sp in parser._subparsers._group_actions
               for a in sp.choices[args.command]._actions}
    for key, raw in cfg.items():
        if key not in actions or key in ("config", "command", "help"):
            raise UsageError(f"unknown config key {key!r}")
        if key in given:
            continue
        act = actions[key]
        try:
            val = act.type(raw) if act.type else raw
        except (argparse.ArgumentTypeError, ValueError) as exc:
            raise UsageError(f"config key {key!r}: {exc}") from None
        if act.choices is not None and val not in act.choices:
            raise UsageError(f"config key {key!r}: invalid choice {val!r}")
        setattr(args, key, val)
    return args


def _validate(args):
    if getattr(args, "theta", None) is not None and not args.theta > 1.0:
        raise UsageError("--theta must exceed 1")
    if getattr(args, "epsilon", None) is not None and not args.epsilon > 0.0:
        raise UsageError("--epsilon must be positive")
    if getattr(args, "cfl", None) is not None:
        mode = getattr(args, "dt_mode", None)
        if not args.cfl > 0.0 or (mode != "accuracy" and args.cfl > 1.0):
            raise UsageError("--cfl must lie in (0, 1]")
    if getattr(args, "n", None) is not None and args.n < 1:
        raise UsageError("--n must be positive")
    if getattr(args, "amplitude", None) is not None and not 0.0 <= args.amplitude <= 0.4:
        raise UsageError("--amplitude must lie in [0, 0.4]")
    if getattr(args, "tend", None) is not None and not args.tend >= 0.0:
        raise UsageError("--tend must be non-negative")
    if getattr(args, "threads", None) is not None and args.threads < 1:
        raise UsageError("--threads must be positive")
    if getattr(args, "mesh", None) is not None and not Path(args.mesh).is_file():
        try:
            normalize_kind(args.mesh)
        except ValueError as exc:
            raise UsageError(str(exc)) from None


def _mesh_for(case, args, n=None):
    if args.mesh is not None and Path(args.mesh).is_file():
        x0, x1, y0, y1 = case.domain
        per = (x1 - x0 if case.periodic[0] else None, y1 - y0 if case.periodic[1] else None)
        return read_mesh(args.mesh, periodic=per)
    n = n or args.n
    h = case.h if n is None else 1.0 / n
    seed = 0 if args.seed is None else args.seed
    return case.make_mesh(args.mesh, h=h, amplitude=args.amplitude, seed=seed)


def _make_solver(case, mesh, args, tables=None):
    kw = {}
    if args.epsilon is not None:
        kw["epsilon"] = args.epsilon
    if args.theta is not None:
        kw["theta"] = args.theta
    if args.characteristic is not None:
        kw["characteristic"] = args.characteristic
    return Solver(mesh, case.bcs, gamma=case.gamma, tables=tables, **kw)


def _controls(case, args):
    return case.controls(end_time=args.tend, mode=args.dt_mode, coefficient=args.cfl)


def _outdir(args, default):
    out = Path(args.out or default)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_meshgen(args):
    if args.case:
        domain = get_case(args.case).domain
    else:
        domain = args.domain or (0.0, 1.0, 0.0, 1.0)
    n = args.n or 16
    nx = max(2, int(round((domain[1] - domain[0]) * n)))
    ny = max(2, int(round((domain[3] - domain[2]) * n)))
    mesh = generate_mesh(args.mesh or "regular-quad", nx, ny, domain,
                         perturb_amplitude=args.amplitude, seed=args.seed or 0)
    out = Path(args.out or f"mesh_{normalize_kind(args.mesh or 'regular-quad')}_{n}.umesh")
    write_mesh(mesh, out)
    print(f"wrote {out} ({mesh.n_cells} cells, {mesh.n_faces} faces)")
    return EXIT_OK


def cmd_run(args):
    case = get_case(args.case)
    mesh = _mesh_for(case, args)
    solver = _make_solver(case, mesh, args)
    state = SolverState(case.initial_state(mesh))
    controls = _controls(case, args)
    out = _outdir(args, f"out_{case.name}")

    def progress(st):
        if st.step % 100 == 0:
            log.info("step %d t=%.6g", st.step, st.time)

    mass0 = float((state.W[:, 0] * mesh.area).sum())
    metrics = solver.run(state, controls, progress=progress)
    info = metrics.as_dict()
    # wall time goes to stdout only so the written files are reproducible
    wall = info.pop("wall_time")
    info.update(case=case.name, time=state.time, cells=mesh.n_cells,
                mass_balance=(float((state.W[:, 0] * mesh.area).sum()) - mass0
                              + float(metrics.boundary_flux[0])) / mass0)
    if case.exact is not None:
        info["L1"], info["Linf"] = error_norms(mesh, state.W, case.exact, state.time, case.gamma)
    x, prim = line_cut(mesh, state.W, gamma=case.gamma)
    io.write_line_cut(out / f"{case.name}_cut.csv", x, prim)
    if not args.no_vtk:
        io.write_vtk(out / f"{case.name}.vtk", mesh, state.W, case.gamma)
    io.write_metrics(out / "metrics.json", info)
    print(f"steps={info['steps']} wall_time={wall:.3f}s fallback_points={info['fallback_points']}"
          f" min_density={info['min_density']:.6g} min_pressure={info['min_pressure']:.6g}")
    return EXIT_OK


def convergence_study(case, kind, sizes, args=None, amplitude=None, seed=0, **solver_kw):
    """Errors on a ladder of meshes; returns ``(h, L1, L1_order, Linf, Linf_order)`` arrays."""
    hs, l1, linf = [], [], []
    for n in sizes:
        mesh = case.make_mesh(kind, h=1.0 / n, amplitude=amplitude, seed=seed)
        solver = Solver(mesh, case.bcs, gamma=case.gamma, **solver_kw)
        state = SolverState(case.initial_state(mesh))
        controls = case.controls() if args is None else _controls(case, args)
        solver.run(state, controls)
        e1, ei = error_norms(mesh, state.W, case.exact, state.time, case.gamma)
        hs.append(1.0 / n)
        l1.append(e1)
        linf.append(ei)
        log.info("h=1/%d L1=%.4e Linf=%.4e", n, e1, ei)
    return (np.array(hs), np.array(l1), convergence_orders(l1),
            np.array(linf), convergence_orders(linf))


def cmd_convergence(args):
    case = get_case(args.case)
    sizes = args.sizes or ([8, 16, 32, 64] if case.name == "advection" else [4, 8, 16])
    kind = args.mesh or case.mesh_kind
    if Path(kind).is_file():
        raise UsageError("convergence needs a generated mesh kind, not a file")
    kw = {}
    if args.epsilon is not None:
        kw["epsilon"] = args.epsilon
    if args.theta is not None:
        kw["theta"] = args.theta
    if args.characteristic is not None:
        kw["characteristic"] = args.characteristic
    table = convergence_study(case, kind, sizes, args, amplitude=args.amplitude,
                              seed=args.seed or 0, **kw)
    out = Path(args.out or f"convergence_{case.name}_{normalize_kind(kind)}.csv")
    if out.suffix != ".csv":
        out.mkdir(parents=True, exist_ok=True)
        out = out / f"convergence_{case.name}_{normalize_kind(kind)}.csv"
    io.write_error_table(out, *table)
    for row in zip(*table):
        print("h=%-10.6g L1=%.4e (%.2f) Linf=%.4e (%.2f)" % row)
    return EXIT_OK


def weights_rows(tables):
    """``(cell, gauss_pt, max_abs_gamma_raw, max_abs_gamma_opt, n_negative)`` rows."""
    rows = []
    for c in range(len(tables.nsub)):
        m = tables.nsub[c]
        for g in range(tables.ngp[c]):
            raw = tables.gamma_raw[c, g, :m]
            opt = tables.gamma[c, g, :m]
            rows.append((c, g, float(np.abs(raw).max()), float(np.abs(opt).max()),
                         int((opt < 0.0).sum())))
    return rows


def cmd_weights_report(args):
    periodic = (False, False)
    if args.case:
        domain = get_case(args.case).domain
        periodic = get_case(args.case).periodic
    else:
        domain = args.domain or (0.0, 1.0, 0.0, 1.0)
    sizes = args.sizes or [8, 16, 32, 64]
    kind = normalize_kind(args.mesh or "perturbed-quad")
    out = _outdir(args, "weights_report")
    theta = args.theta if args.theta is not None else 3.0
    summary = []
    for n in sizes:
        nx = max(2, int(round((domain[1] - domain[0]) * n)))
        ny = max(2, int(round((domain[3] - domain[2]) * n)))
        mesh = generate_mesh(kind, nx, ny, domain, perturb_amplitude=args.amplitude,
                             seed=args.seed or 0, periodic=periodic)
        rows = weights_rows(precompute_tables(mesh, theta))
        path = io.write_csv(out / f"weights_{kind}_{n}.csv",
                            ("cell", "gauss_pt", "max_abs_gamma_raw", "max_abs_gamma_opt",
                             "n_negative"), rows)
        raw = max(r[2] for r in rows)
        opt = max(r[3] for r in rows)
        neg = sum(r[4] for r in rows)
        summary.append((1.0 / n, raw, opt, neg))
        print(f"h=1/{n}: max|gamma| raw={raw:.4e} optimized={opt:.4e} negative={neg} -> {path}")
    io.write_csv(out / f"weights_{kind}_summary.csv",
                 ("mesh_size", "max_abs_gamma_raw", "max_abs_gamma_opt", "n_negative"), summary)
    return EXIT_OK


COMMANDS = {
    "meshgen": cmd_meshgen,
    "run": cmd_run,
    "convergence": cmd_convergence,
    "weights-report": cmd_weights_report,
}


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        args = _apply_config(parser, args, argv)
        _validate(args)
        set_threads(args.threads)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"uweno: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UwenoError, FloatingPointError, OSError) as exc:
        print(f"uweno: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
