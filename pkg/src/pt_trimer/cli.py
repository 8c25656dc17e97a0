"""``pt-trimer`` command-line front end.

Every subcommand writes its outputs plus ``manifest.json`` into ``--out``.
Exit codes: 0 success, 1 physics error (or a failed acceptance criterion),
2 usage error.
"""
from __future__ import annotations

import argparse
import ast
import math
import operator
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .acceptance import CRITERIA, run_all
from .dynamics import (fit_probability_polynomial, propagate_analytic, propagate_numeric)
from .errors import OscillationPresent, PhysicsError
from .io import (BAND_HEADER, EVOLUTION_HEADER, PHASE_HEADER, SCATTER_HEADER, SNAPSHOT_HEADER,
                 SPECTRUM_HEADER, complex_cells, snapshot_filename, write_csv, write_json,
                 write_manifest)
from .lattice import (DEFAULT_LATTICE_DT, LatticeConfig, Packet, default_regions,
                      evolve_lattice, gaussian_packet, measure_platform, platform_height_unit)
from .linalg import DEFAULT_TOL, eig3
from .models import TrimerParams, build_hamiltonian, check_symmetries
from .scattering import (emission_contrast, scattering_sweep, singularity_gamma_ring)
from .spectral import (Axis, band_sweep, classify_phase, critical_gamma_ep2, phase_diagram)

WORKERS_ENV = "PT_TRIMER_WORKERS"


class UsageError(ValueError):
    """Bad command-line input; exit code 2."""


# -- expressions --------------------------------------------------------------

_BINARY = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNARY = {ast.UAdd: operator.pos, ast.USub: operator.neg}
_FUNCS = {"sqrt": np.lib.scimath.sqrt, "cos": np.cos, "sin": np.sin, "tan": np.tan,
          "exp": np.exp, "abs": abs}
_CONSTS = {"pi": math.pi, "e": math.e}


def _name_value(name: str, variables: dict):
    if name in variables:
        return variables[name]
    if name in _CONSTS:
        return _CONSTS[name]
    if name.startswith("sqrt") and name[4:].isdigit():
        return math.sqrt(int(name[4:]))
    raise UsageError(f"unknown name {name!r} in expression")


def evaluate(text: str, variables: Optional[dict] = None):
    """Evaluate an arithmetic expression such as ``sqrt3/2``, ``pi/3`` or ``1j``.

    Supports numbers, ``pi``, ``e``, ``sqrtN``, ``sqrt()``, ``cos()``,
    ``sin()``, ``tan()``, ``exp()``, ``abs()``, ``+ - * / **`` and any names
    passed in ``variables``. The result is real unless the input is complex.
    """
    variables = variables or {}

    def walk(node):
        if isinstance(node, ast.Expression):
            return walk(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float, complex)):
            return node.value
        if isinstance(node, ast.Name):
            return _name_value(node.id, variables)
        if isinstance(node, ast.BinOp) and type(node.op) in _BINARY:
            return _BINARY[type(node.op)](walk(node.left), walk(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
            return _UNARY[type(node.op)](walk(node.operand))
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id in _FUNCS and len(node.args) == 1 and not node.keywords):
            return _FUNCS[node.func.id](walk(node.args[0]))
        raise UsageError(f"unsupported syntax in expression {text!r}")

    try:
        tree = ast.parse(text.strip(), mode="eval")
        value = walk(tree)
    except SyntaxError:
        raise UsageError(f"cannot parse expression {text!r}") from None
    except ZeroDivisionError:
        raise UsageError(f"division by zero in {text!r}") from None
    value = complex(value)
    return value.real if value.imag == 0 else value


def real_expr(text: str) -> float:
    value = evaluate(text)
    if isinstance(value, complex):
        raise UsageError(f"expected a real value, got {text!r}")
    if not math.isfinite(value):
        raise UsageError(f"expected a finite value, got {text!r}")
    return float(value)


def vector_expr(text: str) -> np.ndarray:
    parts = [p for p in text.split(",")]
    if len(parts) != 3:
        raise UsageError(f"--psi0 needs 3 comma-separated amplitudes, got {text!r}")
    return np.array([complex(evaluate(p)) for p in parts])


def list_expr(text: str) -> list:
    return [real_expr(p) for p in text.split(",") if p.strip()]


def range_expr(text: str) -> np.ndarray:
    try:
        start, stop, samples = text.split(":")
    except ValueError:
        raise UsageError(f"expected start:stop:samples, got {text!r}") from None
    n = int(samples)
    if n < 1:
        raise UsageError("range needs at least one sample")
    return np.linspace(real_expr(start), real_expr(stop), n)


# -- shared helpers -----------------------------------------------------------

def resolve_workers(flag: Optional[int]) -> int:
    if flag is not None:
        return max(1, flag)
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"{WORKERS_ENV} must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def make_params(args) -> TrimerParams:
    if args.boundary == "chain":
        return TrimerParams.chain(args.kappa, args.gamma)
    return TrimerParams.ring(args.kappa, args.j, args.gamma, args.phi)


def param_manifest(params: TrimerParams) -> dict:
    return params.as_dict()


def _finish(args, parameters: dict, outputs: list) -> int:
    parameters = dict(parameters, ep_tol=args.ep_tol)
    write_manifest(args.out, args.command, parameters, outputs)
    for name in outputs:
        print(f"wrote {Path(args.out) / name}")
    return 0


# -- subcommands --------------------------------------------------------------

def cmd_spectrum(args) -> int:
    params = make_params(args)
    H = build_hamiltonian(params)
    decomp = eig3(H, args.ep_tol)
    label = classify_phase(params, args.ep_tol)
    sym = check_symmetries(H)
    rows = []
    index = 0
    for E, size in decomp.jordan_blocks:
        for _ in range(size):
            rows.append((index, float(E.real), float(E.imag), size))
            index += 1
    write_csv(Path(args.out) / "spectrum.csv", SPECTRUM_HEADER, rows)
    write_json(Path(args.out) / "spectrum.json", {
        "parameters": param_manifest(params), "phase": label.kind,
        "coalesced_energy": label.coalesced_energy, "discriminant": label.discriminant,
        "jordan_blocks": [[E, size] for E, size in decomp.jordan_blocks],
        "pt_symmetric": sym.pt_symmetric, "chiral_symmetric": sym.chiral_symmetric,
    })
    print(f"phase: {label.kind.value}")
    for E, size in decomp.jordan_blocks:
        print(f"E = {E.real:.12g}{E.imag:+.12g}j  (block size {size})")
    return _finish(args, param_manifest(params), ["spectrum.csv", "spectrum.json"])


def cmd_phase_diagram(args) -> int:
    if len(args.sweep) != 2:
        raise UsageError("--sweep needs exactly two axis specs")
    axes = [Axis.parse(s, number=real_expr) for s in args.sweep]
    fixed = make_params(args)
    grid = phase_diagram(axes, fixed, args.ep_tol, workers=resolve_workers(args.workers))
    rows = []
    for i in range(axes[0].samples):
        for j in range(axes[1].samples):
            v = grid.node_values(i, j)
            rows.append([v["phi"], v["kappa"], v["gamma"], v["j"], str(grid.labels[i, j]),
                         float(grid.discriminant[i, j])] + complex_cells(grid.energies[i, j]))
    write_csv(Path(args.out) / "phase_diagram.csv", PHASE_HEADER, rows)
    counts = {k: int(np.sum(grid.labels == k)) for k in ("exact", "broken", "ep2", "ep3")}
    print(" ".join(f"{k}={v}" for k, v in counts.items()))
    parameters = dict(param_manifest(fixed),
                      sweep=[[a.name, a.start, a.stop, a.samples] for a in axes])
    return _finish(args, parameters, ["phase_diagram.csv"])


def cmd_bands(args) -> int:
    base = TrimerParams.ring(args.kappa, args.j, 0.0, 0.0)
    if args.gamma_expr.strip().lower() == "ep2":
        gamma_of = lambda phi: critical_gamma_ep2(base.kappa, base.j_coupling, phi)  # noqa: E731
    else:
        def gamma_of(phi):
            value = evaluate(args.gamma_expr, {"phi": phi})
            if isinstance(value, complex):
                raise UsageError("gain/loss expression must be real")
            return float(value)
        gamma_of(args.phi_min)
    table = band_sweep(lambda phi: base.replace(flux=phi, gamma=gamma_of(phi)),
                       args.samples, args.phi_min, args.phi_max)
    rows = [[float(phi)] + complex_cells(E) for phi, E in zip(table.phis, table.energies)]
    write_csv(Path(args.out) / "bands.csv", BAND_HEADER, rows)
    parameters = {"kappa": base.kappa, "j": base.j_coupling, "gamma": args.gamma_expr,
                  "phi_min": args.phi_min, "phi_max": args.phi_max, "samples": args.samples}
    return _finish(args, parameters, ["bands.csv"])


def cmd_evolve(args) -> int:
    params = make_params(args)
    psi0 = vector_expr(args.psi0)
    if args.t_end < 0:
        raise UsageError("--t-end must be non-negative")
    if args.samples < 2:
        raise UsageError("--samples must be at least 2")
    label = classify_phase(params, args.ep_tol)
    analytic = propagate_analytic(params, psi0, np.linspace(0.0, args.t_end, args.samples),
                                  args.ep_tol, snap=not args.no_snap)
    if args.method == "numeric":
        H = build_hamiltonian(params)
        dt = args.dt if args.dt is not None else 1e-3 / abs(params.kappa or 1.0)
        steps = max(1, math.ceil(args.t_end / dt - 1e-9))
        result = propagate_numeric(H, psi0, args.t_end, dt,
                                   record_every=max(1, steps // (args.samples - 1)))
        result.growth = analytic.growth
    else:
        dt = None
        result = analytic
    rows = [[float(t)] + complex_cells(psi) + [float(p)]
            for t, psi, p in zip(result.times, result.states, result.probability)]
    write_csv(Path(args.out) / "evolution.csv", EVOLUTION_HEADER, rows)

    summary = {"parameters": param_manifest(params), "phase": label.kind,
               "growth_order": None, "behavior": None, "period": None, "poly_coeffs": None}
    growth = result.growth
    if growth is not None:
        summary.update(growth_order=growth.order, behavior=growth.behavior, period=growth.period)
    if label.at_ep and result.times.size >= 12:
        try:
            fit = fit_probability_polynomial(result, scale=params.kappa or 1.0)
            summary["poly_coeffs"] = fit.coeffs
            summary["poly_residual"] = fit.residual
        except OscillationPresent:
            pass
    write_json(Path(args.out) / "summary.json", summary)
    print(f"phase: {label.kind.value}")
    if growth is not None:
        print(f"growth order {growth.order}, {growth.behavior}")
    parameters = dict(param_manifest(params), psi0=psi0, t_end=args.t_end, samples=args.samples,
                      method=args.method, dt=dt, snap=not args.no_snap)
    return _finish(args, parameters, ["evolution.csv", "summary.json"])


def cmd_scatter(args) -> int:
    gammas = list_expr(args.gammas)
    ks = range_expr(args.k)
    phi = args.phi if args.boundary == "ring" else None
    rows = []
    for row in scattering_sweep(args.boundary, gammas, ks, phi):
        r = row.result
        probs = [None] * 3 if r.singular else [r.T, r.R_left, r.R_right]
        rows.append([row.system, row.gamma, row.phi, row.k] + probs + [r.singular])
    write_csv(Path(args.out) / "scatter.csv", SCATTER_HEADER, rows)
    singular = sum(1 for row in rows if row[-1])
    print(f"{len(rows)} rows, {singular} singular")
    parameters = {"boundary": args.boundary, "gammas": gammas, "phi": phi,
                  "k": [float(ks[0]), float(ks[-1]), int(ks.size)]}
    return _finish(args, parameters, ["scatter.csv"])


def cmd_singularity(args) -> int:
    if args.boundary == "chain":
        gamma = 1.0 if args.gamma_given is None else args.gamma_given
        contrast = emission_contrast(gamma, "chain")
        info = {"system": "chain", "gamma": gamma, "k": math.pi / 4, "contrast": contrast}
    else:
        gamma = singularity_gamma_ring(args.phi) if args.gamma_given is None else args.gamma_given
        contrast = emission_contrast(gamma, "ring", args.phi)
        info = {"system": "ring", "gamma": gamma, "phi": args.phi, "contrast": contrast}
    write_json(Path(args.out) / "singularity.json", info)
    print(f"gamma = {gamma:.12g}, emission contrast = {contrast:.12g}")
    return _finish(args, {k: v for k, v in info.items() if k != "contrast"},
                   ["singularity.json"])


def cmd_wavepacket(args) -> int:
    params = TrimerParams.chain(args.kappa, args.gamma) if args.boundary == "chain" else \
        TrimerParams.ring(args.kappa, args.j, args.gamma, args.phi)
    embed = args.n_sites // 2 if args.embed is None else args.embed
    try:
        config = LatticeConfig(args.n_sites, embed, params, Packet(args.alpha, args.center, args.k))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    snaps = list_expr(args.snapshots) if args.snapshots else []
    final, snapshots = evolve_lattice(config, gaussian_packet(config), args.t_end, args.dt, snaps)
    outputs = []
    for snap in snapshots + [final]:
        name = snapshot_filename(snap.time)
        if name in outputs:
            continue
        write_csv(Path(args.out) / name, SNAPSHOT_HEADER,
                  [(i, float(p)) for i, p in enumerate(snap.probability)])
        outputs.append(name)
    left, right = default_regions(config)
    heights = measure_platform(final, left, right)
    unit = platform_height_unit(args.alpha)
    summary = {"t": final.time, "regions": [list(left), list(right)],
               "height_left": heights.left, "height_right": heights.right,
               "ratio": heights.ratio, "height_unit": unit,
               "total_probability": final.total_probability}
    write_json(Path(args.out) / "wavepacket.json", summary)
    outputs.append("wavepacket.json")
    print(f"platforms: left {heights.left:.6g}, right {heights.right:.6g}, "
          f"ratio {heights.ratio:.6g} (unit {unit:.6g})")
    parameters = dict(param_manifest(params), n_sites=args.n_sites, embed=embed,
                      alpha=args.alpha, center=args.center, k=args.k, t_end=args.t_end,
                      dt=args.dt, snapshots=snaps)
    return _finish(args, parameters, outputs)


def cmd_verify(args) -> int:
    numbers = None
    if args.criteria:
        numbers = {int(c) for c in args.criteria.split(",")}
        known = {num for num, _, _ in CRITERIA}
        if not numbers <= known:
            raise UsageError(f"unknown criteria {sorted(numbers - known)}")
    lines = []

    def echo(line):
        print(line, flush=True)
        lines.append(line)

    results = run_all(numbers, echo=echo)
    passed = sum(r.passed for r in results)
    echo(f"{passed}/{len(results)} criteria passed")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "verify.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    _finish(args, {"criteria": sorted(numbers) if numbers else "all"}, ["verify.txt"])
    return 0 if passed == len(results) else 1


# -- parser -------------------------------------------------------------------

def _add_common(p):
    p.add_argument("--out", default="pt_trimer_out", help="output directory")
    p.add_argument("--ep-tol", type=real_expr, default=DEFAULT_TOL,
                   help="exceptional-point tolerance (default 1e-9)")


def _add_physics(p, boundary_default="chain"):
    p.add_argument("--boundary", choices=("chain", "ring"), default=boundary_default)
    p.add_argument("--kappa", type=real_expr, default=1.0, help="nearest-neighbour coupling")
    p.add_argument("--gamma", type=real_expr, default=0.0, help="balanced gain/loss rate")
    p.add_argument("--j", type=real_expr, default=1.0, help="ring closing coupling")
    p.add_argument("--phi", type=real_expr, default=0.0, help="ring flux")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pt-trimer", description=__doc__.splitlines()[0],
        epilog="Numbers accept expressions such as sqrt2, sqrt3/2, pi/3 or 1/sqrt(2).")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="eigenvalues, Jordan blocks and phase label")
    _add_physics(p)
    _add_common(p)
    p.set_defaults(parser=p, func=cmd_spectrum)

    p = sub.add_parser("phase-diagram", help="classify a 2D parameter grid")
    _add_physics(p, boundary_default="ring")
    p.add_argument("--sweep", nargs=2, required=True, metavar="NAME:START:STOP:N",
                   help="two axes among kappa, gamma, j, phi")
    p.add_argument("--workers", type=int, default=None,
                   help=f"process count (default ${WORKERS_ENV} or all cores)")
    _add_common(p)
    p.set_defaults(parser=p, func=cmd_phase_diagram)

    p = sub.add_parser("bands", help="ring spectrum along a flux sweep")
    p.add_argument("--kappa", type=real_expr, default=1.0)
    p.add_argument("--j", type=real_expr, default=1.0)
    p.add_argument("--gamma", dest="gamma_expr", default="0",
                   help="gain/loss, an expression in phi, or 'ep2' for the critical value")
    p.add_argument("--phi-min", type=real_expr, default=0.0)
    p.add_argument("--phi-max", type=real_expr, default=2 * math.pi)
    p.add_argument("--samples", type=int, default=401)
    _add_common(p)
    p.set_defaults(parser=p, func=cmd_bands)

    p = sub.add_parser("evolve", help="three-site time evolution")
    _add_physics(p)
    p.add_argument("--psi0", required=True, help="three comma-separated amplitudes")
    p.add_argument("--t-end", type=real_expr, required=True)
    p.add_argument("--samples", type=int, default=201, help="output times (analytic method)")
    p.add_argument("--method", choices=("analytic", "numeric"), default="analytic")
    p.add_argument("--dt", type=real_expr, default=None, help="RK4 step (numeric method)")
    p.add_argument("--no-snap", action="store_true",
                   help="treat near-EP input as diagonalizable")
    _add_common(p)
    p.set_defaults(parser=p, func=cmd_evolve)

    p = sub.add_parser("scatter", help="transmission and reflection table")
    p.add_argument("--boundary", choices=("chain", "ring"), default="chain")
    p.add_argument("--gammas", default="1", help="comma-separated gain/loss values")
    p.add_argument("--phi", type=real_expr, default=0.0, help="ring flux")
    p.add_argument("--k", default="pi/200:pi-pi/200:199", metavar="START:STOP:N",
                   help="wave-vector grid inside (0, pi)")
    _add_common(p)
    p.set_defaults(parser=p, func=cmd_scatter)

    p = sub.add_parser("singularity", help="emission contrast at a spectral singularity")
    p.add_argument("--boundary", choices=("chain", "ring"), default="chain")
    p.add_argument("--gamma", dest="gamma_given", type=real_expr, default=None,
                   help="gain/loss (default: the singular value)")
    p.add_argument("--phi", type=real_expr, default=0.0, help="ring flux")
    _add_common(p)
    p.set_defaults(parser=p, func=cmd_singularity)

    p = sub.add_parser("wavepacket", help="Gaussian packet on a lead-trimer-lead lattice")
    _add_physics(p)
    p.set_defaults(gamma=1.0)
    p.add_argument("--n-sites", type=int, default=1200)
    p.add_argument("--embed", type=int, default=None, help="index of trimer site 1")
    p.add_argument("--alpha", type=real_expr, default=0.02)
    p.add_argument("--center", type=int, default=900)
    p.add_argument("--k", type=real_expr, default=-math.pi / 4, help="carrier wave vector")
    p.add_argument("--t-end", type=real_expr, default=500.0)
    p.add_argument("--dt", type=real_expr, default=DEFAULT_LATTICE_DT)
    p.add_argument("--snapshots", default="", help="comma-separated snapshot times")
    _add_common(p)
    p.set_defaults(parser=p, func=cmd_wavepacket)

    p = sub.add_parser("verify", help="run the acceptance suite")
    p.add_argument("--criteria", default="", help="comma-separated criterion numbers")
    _add_common(p)
    p.set_defaults(parser=p, func=cmd_verify)
    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ValueError as exc:
        args.parser.print_usage(sys.stderr)
        print(f"pt-trimer: error: {exc}", file=sys.stderr)
        return 2
    except PhysicsError as exc:
        print(f"pt-trimer: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
