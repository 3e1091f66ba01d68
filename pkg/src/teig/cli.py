"""Command-line front end.

Subcommands: eig, sweep, invert, validate, oracle. Options may also come
from a key=value config file (``--config``); command-line flags win.
Exit codes: 0 success, 2 configuration error, 3 solver error, 4 a
validation threshold was exceeded.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction

import numpy as np

from . import analysis, oracle, specfun
from .errors import (
    ConfigError,
    DomainError,
    GeometryError,
    SolverError,
    TeigError,
    UnsupportedBranchError,
)
from .geometry import build_mesh, parse_curve
from .nep import ContourConfig, MediumParams, beyn_solve, scan_eigenvalues

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_VALIDATION = 0, 2, 3, 4


class ValidationFailed(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


# --- config files ------------------------------------------------------------------


def read_config(path: str) -> dict[str, str]:
    """Plain key=value lines; '#' starts a comment."""
    out = {}
    try:
        text = open(path, encoding="utf-8").read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc}") from None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, val = line.split("=", 1)
        out[key.strip().replace("-", "_")] = val.strip()
    return out


def _range(text: str) -> tuple[float, float]:
    try:
        a, b = (float(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"range must look like a:b, got {text!r}") from None
    return a, b


def _number(text: str) -> float:
    """Float that also accepts fractions like 1/2."""
    try:
        return float(Fraction(text)) if "/" in text else float(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


# --- parser --------------------------------------------------------------------------


def _add_output(p):
    p.add_argument("--config", help="key=value config file; flags override its values")
    p.add_argument("--out", help="write the table here instead of stdout")
    p.add_argument("--json", action="store_true", help="emit JSON {command, config_echo, rows}")
    p.add_argument("--paper-format", action="store_true", help="round eigenvalue and EOC columns to 4 decimals")


def _add_curve(p):
    p.add_argument("--curve", default="circle", help="circle | ellipse | trigpoly, or a full curve spec")
    p.add_argument("--radius", type=_number, default=1.0, help="circle radius")
    p.add_argument("--a", type=_number, default=1.0, help="ellipse semi-axis along x")
    p.add_argument("--b", type=_number, default=0.8, help="ellipse semi-axis along y")
    p.add_argument("--nodes", type=int, default=40, help="collocation points (even, >= 6)")


def _add_contour(p):
    p.add_argument("--mu", type=_number, action="append", help="contour center (repeatable)")
    p.add_argument("--contour-radius", type=_number, default=0.5)
    p.add_argument("--quad-nodes", type=int, default=24)
    p.add_argument("--probe", type=int, default=16)
    p.add_argument("--rank-tol", type=_number, default=1e-4)
    p.add_argument("--residual-tol", type=_number, default=1e-4)
    p.add_argument("--seed", type=int, default=42)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="teig", description="Transmission eigenvalues with a conductive boundary condition")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("eig", help="eigenvalues by the boundary-integral solver or an analytic oracle")
    _add_output(p)
    _add_curve(p)
    _add_contour(p)
    p.add_argument("--n", type=_number, default=4.0)
    p.add_argument("--ntilde", type=_number, default=1.0)
    p.add_argument("--eta", type=_number, default=0.0)
    p.add_argument("--range", type=_range, help="scan real parts a:b instead of single contours")
    p.add_argument("--oracle", choices=["disk", "double-layer"], help="use an analytic determinant instead")
    p.add_argument("--variant", choices=list(oracle.VARIANTS), help="oracle variant (default from ntilde/eta)")
    p.add_argument("--m-max", type=int, default=oracle.M_MAX)
    p.add_argument("--R", type=_number, default=1.0, dest="outer_radius")
    p.add_argument("--r", type=_number, default=0.5, dest="inner_radius")
    p.add_argument("--n1", type=_number, default=0.5)
    p.add_argument("--n2", type=_number, default=4.0)

    p = sub.add_parser("sweep", help="eta sweeps with EOC (conductivity-limit tables)")
    _add_output(p)
    p.add_argument("--table", type=int, choices=[1, 2, 3, 4, 5], help="use a preset")
    p.add_argument("--variant", choices=list(oracle.VARIANTS), default="conductive")
    p.add_argument("--double-layer", action="store_true")
    p.add_argument("--n", type=_number, default=4.0)
    p.add_argument("--radius", type=_number, default=1.0)
    p.add_argument("--R", type=_number, default=1.0, dest="outer_radius")
    p.add_argument("--r", type=_number, default=0.5, dest="inner_radius")
    p.add_argument("--n1", type=_number, default=0.5)
    p.add_argument("--n2", type=_number, default=4.0)
    p.add_argument("--direction", choices=list(analysis.DIRECTIONS), default="to_infinity")
    p.add_argument("--eta0", type=_number, default=80.0)
    p.add_argument("--steps", type=int, default=10)
    p.add_argument("--tracked", type=int, default=1)
    p.add_argument("--seeds", help="comma list of k or k@m starting values")
    p.add_argument("--reference", default="none", help="classical_oracle | dirichlet_family | none | number")
    p.add_argument("--bie", action="store_true", help="force the boundary-integral path on disks")

    p = sub.add_parser("invert", help="estimate the refractive index from a first eigenvalue")
    _add_output(p)
    p.add_argument("--mode", choices=["small", "large"], required=True)
    p.add_argument("--k1", type=_number, help="measured first eigenvalue")
    p.add_argument("--measure", choices=list(oracle.VARIANTS), help="take k1 from this disk oracle instead")
    p.add_argument("--n-true", type=_number, default=4.0, help="index used by --measure")
    p.add_argument("--eta-true", type=_number, default=0.0, help="conductivity used by --measure")
    p.add_argument("--eta", type=_number, default=0.0, help="conductivity of the small-eta model")
    p.add_argument("--radius", type=_number, default=1.0)
    p.add_argument("--dirichlet-k", type=_number, help="Dirichlet wavenumber for non-disk domains (large mode)")

    p = sub.add_parser("validate", help="boundary-integral vs oracle eigenvalues on a disk")
    _add_output(p)
    _add_contour(p)
    p.add_argument("--radius", type=_number, default=1.0)
    p.add_argument("--nodes", type=int, default=40)
    p.add_argument("--n", type=_number, default=4.0)
    p.add_argument("--ntilde", type=_number, default=1.0)
    p.add_argument("--eta", type=_number, default=0.0)
    p.add_argument("--tol", type=_number, default=5e-4)

    p = sub.add_parser("oracle", help="direct analytic queries")
    _add_output(p)
    p.add_argument("query", choices=["roots", "double-layer", "dirichlet", "modified", "bessel-zero"])
    p.add_argument("--variant", choices=list(oracle.VARIANTS), default="classical")
    p.add_argument("--n", type=_number, default=4.0)
    p.add_argument("--eta", type=_number, default=0.0)
    p.add_argument("--radius", type=_number, default=1.0)
    p.add_argument("--R", type=_number, default=1.0, dest="outer_radius")
    p.add_argument("--r", type=_number, default=0.5, dest="inner_radius")
    p.add_argument("--n1", type=_number, default=0.5)
    p.add_argument("--n2", type=_number, default=4.0)
    p.add_argument("--range", type=_range, default=(0.5, 4.0))
    p.add_argument("--m-max", type=int, default=oracle.M_MAX)
    p.add_argument("--m", type=int, default=0)
    p.add_argument("--s", type=int, default=1)
    return parser


def parse(argv) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        values = read_config(args.config)
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest: a for a in sub._actions}
        defaults = {}
        for key, val in values.items():
            if key not in known or key in ("config", "help"):
                raise ConfigError(f"unknown config key {key!r} for command {args.command}")
            act = known[key]
            if act.nargs == 0:
                defaults[key] = val.lower() in ("1", "true", "yes", "on")
            elif isinstance(act, argparse._AppendAction):
                defaults[key] = [act.type(v.strip()) for v in val.split(",")]
            else:
                try:
                    defaults[key] = act.type(val) if act.type else val
                except argparse.ArgumentTypeError as exc:
                    raise ConfigError(f"config key {key}: {exc}") from None
                except ValueError:
                    raise ConfigError(f"config key {key}: bad value {val!r}") from None
        sub.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


# --- output --------------------------------------------------------------------------


def fmt(x, decimals: int | None = None) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if decimals is not None:
        return f"{x:.{decimals}f}"
    return f"{x:.15g}"


def _echo(args) -> dict:
    skip = {"out", "json", "config"}
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in skip:
            continue
        out[k] = list(v) if isinstance(v, tuple) else v
    return out


def emit(args, columns: list[str], rows: list[list], decimals: dict[str, int] | None = None) -> str:
    """Render rows as CSV (with a one-field config echo record) or JSON."""
    decimals = decimals or {}
    config = _echo(args)
    if args.json:
        doc = {
            "command": args.command,
            "config_echo": config,
            "rows": [dict(zip(columns, [_jsonable(v) for v in r])) for r in rows],
        }
        text = json.dumps(doc, indent=2) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["# config " + json.dumps(config, sort_keys=True)])
        w.writerow(columns)
        for r in rows:
            w.writerow([fmt(v, decimals.get(c)) for c, v in zip(columns, r)])
        text = buf.getvalue()
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return text


def _jsonable(v):
    if v is None or isinstance(v, str):
        return v
    if isinstance(v, (np.integer, int)) and not isinstance(v, bool):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v) if math.isfinite(v) else None
    return v


def _paper(args, cols):
    return {c: 4 for c in cols} if args.paper_format else {}


# --- commands ----------------------------------------------------------------------


def _curve(args):
    kind = args.curve.strip()
    if " " in kind or "=" in kind:
        return parse_curve(kind)
    if kind == "circle":
        return parse_curve(f"circle radius={args.radius}")
    if kind == "ellipse":
        return parse_curve(f"ellipse a={args.a} b={args.b}")
    raise ConfigError(f"curve {kind!r} needs its coefficients, e.g. 'trigpoly cx=0,1 sy=0,1'")


def _contour(args, mu):
    return ContourConfig(
        center_mu=mu,
        radius=args.contour_radius,
        quad_nodes=args.quad_nodes,
        probe_cols=args.probe,
        rank_rel_tol=args.rank_tol,
        residual_tol=args.residual_tol,
        rng_seed=args.seed,
    )


def _disk_variant(ntilde: float, eta: float, explicit: str | None) -> str:
    if explicit:
        return explicit
    if ntilde == 0:
        return "zero_index"
    if ntilde != 1:
        raise ConfigError("disk oracles exist only for ntilde in {0, 1}")
    return "conductive" if eta else "classical"


def cmd_eig(args) -> int:
    cols = ["k_re", "k_im", "residual", "cluster", "method"]
    rows = []
    if args.oracle:
        if args.range is None:
            raise ConfigError("oracle runs need --range a:b")
        if args.oracle == "disk":
            prob = oracle.DiskProblem(_disk_variant(args.ntilde, args.eta, args.variant), args.n, args.eta, args.radius)
            roots = oracle.disk_roots(prob, *args.range, m_max=args.m_max)
        else:
            variant = "zero_index" if (args.variant == "zero_index" or args.ntilde == 0) else "conductive"
            prob = oracle.DoubleLayerDisk(args.outer_radius, args.inner_radius, args.n1, args.n2, args.eta, variant)
            roots = oracle.double_layer_roots(prob, *args.range, m_max=args.m_max)
        for r in roots:
            mult = 2 if r.m >= 1 else 1
            rows += [[r.k, 0.0, r.defect, mult, "oracle"]] * mult
    else:
        mesh = build_mesh(_curve(args), args.nodes)
        params = MediumParams(args.n, args.ntilde, args.eta)
        if args.range:
            res = scan_eigenvalues(mesh, params, *args.range, _contour(args, args.range[0] + 0.25))
            found = res.eigenvalues
        else:
            if not args.mu:
                raise ConfigError("give --mu (contour center) or --range a:b")
            found = []
            for mu in args.mu:
                found += beyn_solve(mesh, params, _contour(args, mu)).eigenvalues
            found.sort(key=lambda e: (e.k.real, e.k.imag))
        rows = [[e.k.real, e.k.imag, e.residual, e.cluster_size, "bie"] for e in found]
    emit(args, cols, rows, _paper(args, ["k_re", "k_im"]))
    return EXIT_OK


def _parse_seeds(text: str):
    out = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if "@" in item:
            k, m = item.split("@")
            out.append(analysis.Branch(float(k), int(m)))
        else:
            out.append(analysis.Branch(float(item)))
    return out


def _eta_label(eta: float, paper: bool):
    if not paper:
        return eta
    if eta < 1:
        inv = 1 / eta
        if abs(inv - round(inv)) < 1e-9:
            return f"1/{int(round(inv))}"
    if abs(eta - round(eta)) < 1e-9:
        return str(int(round(eta)))
    return fmt(eta)


def cmd_sweep(args) -> int:
    if args.table:
        problem, spec, branches = analysis.table_preset(args.table)
    else:
        ref = args.reference
        if ref not in analysis.REFERENCES:
            try:
                ref = float(ref)
            except ValueError:
                raise ConfigError(f"unknown reference {args.reference!r}") from None
        spec = analysis.SweepSpec(args.direction, args.eta0, args.steps, ref)
        if args.double_layer:
            variant = "zero_index" if args.variant == "zero_index" else "conductive"
            problem = oracle.DoubleLayerDisk(args.outer_radius, args.inner_radius, args.n1, args.n2, args.eta0, variant)
        else:
            variant = "conductive" if args.variant == "classical" else args.variant
            problem = oracle.DiskProblem(variant, args.n, args.eta0, args.radius)
        branches = _parse_seeds(args.seeds) if args.seeds else None
        if branches and any(b.m is None for b in branches) and not args.bie:
            raise ConfigError("oracle sweeps need seeds of the form k@m")
    rows = analysis.run_sweep(problem, spec, tracked=args.tracked, branches=branches, force_bie=args.bie)
    ntr = len(rows[0].k_values)
    cols = ["eta"]
    for j in range(1, ntr + 1):
        cols += [f"k{j}", f"eoc{j}"]
    out = []
    for r in rows:
        line = [_eta_label(r.eta, args.paper_format)]
        for k, e in zip(r.k_values, r.eoc):
            line += [k, e]
        out.append(line)
    emit(args, cols, out, _paper(args, cols[1:]))
    return EXIT_OK


def _measure(args) -> float:
    if args.k1 is not None:
        return args.k1
    if not args.measure:
        raise ConfigError("give --k1 or --measure VARIANT")
    prob = oracle.DiskProblem(args.measure, args.n_true, args.eta_true, args.radius)
    return analysis.first_root(prob, 1)


def cmd_invert(args) -> int:
    k1 = _measure(args)
    if args.mode == "small":
        n = analysis.estimate_n_small_eta(k1, args.eta, args.radius)
        variant = "conductive" if args.eta else "classical"
        model = analysis.first_root(oracle.DiskProblem(variant, n, args.eta, args.radius), 1)
    else:
        n = analysis.estimate_n_large_eta(k1, args.radius, args.dirichlet_k)
        kd = args.dirichlet_k if args.dirichlet_k is not None else specfun.bessel_zero(1, 1) / args.radius
        model = kd / math.sqrt(n)
    emit(args, ["mode", "k1_measured", "n_approx", "residual"], [[args.mode, k1, n, model - k1]])
    return EXIT_OK


def cmd_validate(args) -> int:
    from .geometry import Circle

    mesh = build_mesh(Circle(args.radius), args.nodes)
    params = MediumParams(args.n, args.ntilde, args.eta)
    prob = oracle.DiskProblem(_disk_variant(args.ntilde, args.eta, None), args.n, args.eta, args.radius)
    mus = args.mu or [3.1]
    rows = []
    worst = 0.0
    for mu in mus:
        cfg = _contour(args, mu)
        bie = sorted(e.k.real for e in beyn_solve(mesh, params, cfg).eigenvalues)
        lo, hi = max(1e-3, mu - cfg.radius), mu + cfg.radius
        ref = sorted(oracle.disk_roots(prob, lo, hi).values())
        used = [False] * len(ref)
        for k in bie:
            j = min((i for i in range(len(ref)) if not used[i]), key=lambda i: abs(ref[i] - k), default=None)
            if j is None:
                rows.append([mu, k, None, math.inf])
                worst = math.inf
                continue
            used[j] = True
            d = abs(ref[j] - k)
            worst = max(worst, d)
            rows.append([mu, k, ref[j], d])
        for i, u in enumerate(used):
            if not u:
                rows.append([mu, None, ref[i], math.inf])
                worst = math.inf
    emit(args, ["mu", "k_bie", "k_oracle", "delta"], rows, _paper(args, ["k_bie", "k_oracle"]))
    if worst > args.tol:
        raise ValidationFailed(f"max |k_bie - k_oracle| = {worst:.3e} exceeds tol {args.tol:.3e}")
    return EXIT_OK


def cmd_oracle(args) -> int:
    q = args.query
    if q in ("roots", "double-layer"):
        if q == "roots":
            prob = oracle.DiskProblem(args.variant, args.n, args.eta, args.radius)
            roots = oracle.disk_roots(prob, *args.range, m_max=args.m_max)
        else:
            variant = "zero_index" if args.variant == "zero_index" else "conductive"
            prob = oracle.DoubleLayerDisk(args.outer_radius, args.inner_radius, args.n1, args.n2, args.eta, variant)
            roots = oracle.double_layer_roots(prob, *args.range, m_max=args.m_max)
        rows = [[r.k, r.m, 2 if r.m >= 1 else 1, r.defect] for r in roots]
        emit(args, ["k", "m", "multiplicity", "defect"], rows, _paper(args, ["k"]))
        for d in roots.diagnostics:
            print(f"diagnostic: {d}", file=sys.stderr)
        return EXIT_OK
    if q == "dirichlet":
        val = oracle.dirichlet_eig(args.radius, args.s, args.m)
    elif q == "modified":
        val = oracle.modified_dirichlet_eig(args.radius, args.n, args.s, args.m)
    else:
        val = specfun.bessel_zero(args.m, args.s)
    emit(args, ["query", "m", "s", "value"], [[q, args.m, args.s, val]])
    return EXIT_OK


COMMANDS = {"eig": cmd_eig, "sweep": cmd_sweep, "invert": cmd_invert, "validate": cmd_validate, "oracle": cmd_oracle}


def main(argv=None) -> int:
    try:
        args = parse(sys.argv[1:] if argv is None else argv)
        return COMMANDS[args.command](args)
    except ValidationFailed as exc:
        print(f"validation failed: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ConfigError, GeometryError, DomainError, UnsupportedBranchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverError, TeigError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
