"""Command-line driver: hit functions, coefficient scans, resummation and exact references.

Every scan writes a CSV with a fixed header.  Numbers use 17 significant
digits, and values that are undefined at a given T are left empty.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from pathlib import Path

import numpy as np

from . import boundary_coeffs as bc
from . import exact_ref, hitfn, oracle, resum
from .errors import DegenerateApproximantError, HitPropError
from .geometry import Plane, PolygonalPath, QuadratureConfig

PROPAGATOR_COLUMNS = ["T", "c0", "c1", "c2", "c3", "P11", "P22", "P33", "S1", "S2", "eps", "exact", "exact_minus_free"]

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def fmt(v) -> str:
    if v is None:
        return ""
    v = float(v)
    if not math.isfinite(v):
        return ""
    return f"{v:.17g}"


def _write_csv(rows, columns, out):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(row.get(c)) for c in columns])
    text = buf.getvalue()
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def t_grid(args) -> np.ndarray:
    geometry = getattr(args, "geometry", "sphere")
    tmin = args.tmin if args.tmin is not None else (0.02 if geometry == "sphere" else 0.1)
    tmax = args.tmax if args.tmax is not None else (2.5 if geometry == "sphere" else 6.0)
    spacing = args.spacing or ("log" if geometry == "sphere" else "linear")
    if args.points < 1:
        raise ConfigError("--points must be >= 1")
    if not 0 < tmin <= tmax:
        raise ConfigError("need 0 < tmin <= tmax")
    if args.points == 1:
        return np.array([tmin])
    if spacing == "log":
        return np.geomspace(tmin, tmax, args.points)
    if spacing == "linear":
        return np.linspace(tmin, tmax, args.points)
    raise ConfigError(f"unknown spacing {spacing!r}")


def parse_path(text: str) -> PolygonalPath:
    """'x;z1;...;zn;y' with comma-separated coordinates."""
    try:
        pts = [[float(v) for v in p.split(",")] for p in text.split(";") if p.strip()]
    except ValueError as exc:
        raise ConfigError(f"cannot parse path {text!r}: {exc}") from exc
    if len(pts) < 2:
        raise ConfigError("a path needs at least a start and an end point")
    try:
        return PolygonalPath(pts[0], pts[1:-1], pts[-1])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _quad(args) -> QuadratureConfig:
    try:
        return QuadratureConfig(rel_tol=args.rel_tol, rho_max=args.rho_max)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _case(args, T):
    if args.geometry == "sphere":
        if not 0 <= args.r < 1:
            raise ConfigError("--r must be in [0, 1)")
        return bc.SphereCase(args.r, T)
    if args.d <= 0:
        raise ConfigError("--d must be positive")
    return bc.PlaneCase(args.d, T)


def _exact(args, T):
    if args.geometry == "sphere":
        cfg = exact_ref.SphereModeSumConfig(args.lmax, args.kmax)
        x, y = (0.0, 0.0, 0.0), (0.0, 0.0, args.r)
        full = exact_ref.sphere_exact(x, y, T, cfg)
        return full, exact_ref.sphere_exact_subtracted(x, y, T, cfg)
    p = (0.0, 0.0, args.d)
    full = exact_ref.plane_exact(p, p, T, Plane())
    return full, exact_ref.plane_exact_subtracted(p, p, T, Plane())


def _coeff_kwargs(args) -> dict:
    if args.geometry == "plane":
        kw = {"seed": args.seed, "log2n": args.qmc_log2n, "reps": args.qmc_reps}
        if args.method:
            kw["method"] = args.method
        return kw
    return {}


def _coefficients(args, T) -> resum.CoefficientSeries:
    geometry = Plane(quad=_quad(args)) if args.geometry == "plane" else "sphere"
    return bc.coefficient_series(geometry, _case(args, T), **_coeff_kwargs(args))


def propagator_row(args, T) -> dict:
    row = {"T": T}
    c = _coefficients(args, T)
    row.update({f"c{i}": v for i, v in enumerate(c.values)})
    try:
        res = resum.resum_series(c, T)
        row.update(P11=res.P11, P22=res.P22, P33=res.P33, S1=res.S1, S2=res.S2, eps=res.eps)
    except DegenerateApproximantError as exc:
        print(f"warning: T={T:.17g}: {exc}; row left with gaps", file=sys.stderr)
        for N in (1, 2, 3):
            try:
                row[f"P{N}{N}"] = resum.diagonal_pade_strong_coupling(c, N)
            except DegenerateApproximantError:
                pass
    row["exact"], row["exact_minus_free"] = _exact(args, T)
    return row


def run_propagator_scan(args):
    rows = [propagator_row(args, float(T)) for T in t_grid(args)]
    _write_csv(rows, PROPAGATOR_COLUMNS, args.out)
    return rows


def run_coeffs(args):
    rows = []
    for T in t_grid(args):
        c = _coefficients(args, float(T))
        rows.append({"T": float(T), **{f"c{i}": v for i, v in enumerate(c.values)}})
    _write_csv(rows, ["T", "c0", "c1", "c2", "c3"], args.out)


def run_exact(args):
    rows = []
    for T in t_grid(args):
        full, sub = _exact(args, float(T))
        rows.append({"T": float(T), "exact": full, "exact_minus_free": sub})
    _write_csv(rows, ["T", "exact", "exact_minus_free"], args.out)


def _hit_value(path, T, method, args):
    q = hitfn.HitQuery(path, T)
    if method == "closed":
        return hitfn.hit_closed(q), "closed-form"
    if method == "bromwich":
        return hitfn.hit_bromwich(q), "bromwich"
    if method == "oracle":
        return oracle.hit_by_time_quadrature(q), "oracle"
    if method == "mc":
        est, se = oracle.hit_by_monte_carlo(q, cfg=oracle.McConfig(seed=args.seed))
        return est, f"monte-carlo(std_error={se:.3g})"
    raise ConfigError(f"unknown hit method {method!r}")


def run_hit_eval(args):
    if not args.path:
        raise ConfigError("--path is required")
    path = parse_path(args.path)
    T = args.T if args.T is not None else 1.0
    value, label = _hit_value(path, T, args.method or "closed", args)
    print(f"D={path.dim} n={path.order} T={fmt(T)} value={fmt(value)} method={label}")


def run_hit_scan(args):
    if not args.path:
        raise ConfigError("--path is required")
    path = parse_path(args.path)
    args.geometry = "plane"  # linear grid by default
    rows = [{"T": float(T), "H": _hit_value(path, float(T), args.method or "closed", args)[0]} for T in t_grid(args)]
    _write_csv(rows, ["T", "H"], args.out)


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"cannot parse numbers {text!r}") from exc


def run_pade(args):
    if not args.coeffs:
        raise ConfigError("--coeffs is required")
    c = _floats(args.coeffs)
    if args.mn:
        M, N = (int(v) for v in args.mn.split(","))
        print(f"[{M}/{N}]({fmt(args.x)}) = {fmt(resum.pade(M, N, c, args.x))}")
        return
    for N in (1, 2, 3):
        print(f"P{N}{N} = {fmt(resum.diagonal_pade_strong_coupling(c, N))}")


def run_shanks(args):
    if not args.values:
        raise ConfigError("--values is required")
    a = _floats(args.values)
    if len(a) == 3:
        s1, s2 = resum.shanks_s1_s2(*a)
        print(f"S1 = {fmt(s1)}\nS2 = {fmt(s2)}\neps = {fmt(resum.leibniz_error(s1, s2))}")
    else:
        print(",".join(fmt(v) for v in resum.shanks(a)))


PLOT_TEMPLATE = '''"""Plot {title} from {csv_name}. Generated by hitprop plot-script."""
import csv
import sys

import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else {csv_path!r}
out = sys.argv[2] if len(sys.argv) > 2 else {png_path!r}

cols = {{}}
with open(path) as fh:
    for row in csv.DictReader(fh):
        for k, v in row.items():
            cols.setdefault(k, []).append(float(v) if v else float("nan"))

T = cols["T"]
fig, ax = plt.subplots(figsize=(6, 4))
ax.plot(T, cols["exact_minus_free"], "k-", lw=1.5, label="exact")
for name, style in (("P11", "--"), ("P22", "-."), ("P33", ":")):
    ax.plot(T, cols[name], style, lw=1, label=name)
ax.plot(T, cols["S1"], "-", lw=1, label="S1")
ax.plot(T, cols["S2"], "-", lw=1, label="S2")
lo = [s * (1 - e) for s, e in zip(cols["S2"], cols["eps"])]
hi = [s * (1 + e) for s, e in zip(cols["S2"], cols["eps"])]
ax.fill_between(T, lo, hi, color="C4", alpha=0.25, lw=0, label="S2 (1 +/- eps)")
ax.set_xscale({xscale!r})
ax.set_xlabel("T")
ax.set_ylabel("K - K0")
ax.set_title({title!r})
ax.legend(frameon=False, fontsize=8)
fig.tight_layout()
fig.savefig(out, dpi=200)
'''


def emit_plot_script(csv_path, script_path=None) -> str:
    """Write a matplotlib script that draws the scan in ``csv_path``; nothing is rendered here."""
    csv_path = Path(csv_path)
    try:
        with csv_path.open() as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            rows = list(reader)
    except OSError as exc:
        raise ConfigError(f"cannot read {csv_path}: {exc}") from exc
    if header != PROPAGATOR_COLUMNS:
        raise ConfigError(f"{csv_path} does not have the propagator scan header")
    if not rows:
        raise ConfigError(f"{csv_path} has no data rows")
    T = [float(r[0]) for r in rows]
    log = len(T) > 2 and all(t > 0 for t in T) and T[-1] / T[0] > 20
    text = PLOT_TEMPLATE.format(
        title=f"vacuum-subtracted kernel, {csv_path.stem}",
        csv_name=csv_path.name,
        csv_path=str(csv_path),
        png_path=str(csv_path.with_suffix(".png")),
        xscale="log" if log else "linear",
    )
    if script_path not in (None, "-"):
        Path(script_path).write_text(text)
    return text


def run_plot_script(args):
    if not args.csv:
        raise ConfigError("--csv is required")
    text = emit_plot_script(args.csv, args.out)
    if args.out in (None, "-"):
        sys.stdout.write(text)


COMMANDS = {
    "hit-eval": run_hit_eval,
    "hit-scan": run_hit_scan,
    "coeffs": run_coeffs,
    "propagator": run_propagator_scan,
    "exact": run_exact,
    "pade": run_pade,
    "shanks": run_shanks,
    "plot-script": run_plot_script,
}


def read_config_file(path) -> dict:
    """Plain key=value lines; '#' starts a comment, keys may use '-' or '_'."""
    out = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for i, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{i}: expected key=value")
        k, v = (s.strip() for s in line.split("=", 1))
        out[k.replace("-", "_")] = v
    return out


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hitprop", description="n-hit functions and Dirichlet kernels by boundary-series resummation")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="key=value file; command-line flags take precedence")
    p.add_argument("--geometry", choices=["sphere", "plane"], default="sphere")
    p.add_argument("--r", type=float, default=0.0, help="|y| for the sphere, x at the center")
    p.add_argument("--d", type=float, default=1.0, help="distance of p from the plane")
    p.add_argument("--tmin", type=float)
    p.add_argument("--tmax", type=float)
    p.add_argument("--points", type=int, default=25)
    p.add_argument("--spacing", choices=["linear", "log"])
    p.add_argument("--lmax", type=int, default=3)
    p.add_argument("--kmax", type=int, default=8)
    p.add_argument("--rho-max", type=float)
    p.add_argument("--rel-tol", type=float, default=1e-4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-")
    p.add_argument("--method", help="hit-eval: closed|bromwich|oracle|mc; plane coeffs: auto|nested|qmc")
    p.add_argument("--path", help="hit-eval/hit-scan points 'x;z1;...;y', coordinates comma separated")
    p.add_argument("--T", type=float, help="transition time for hit-eval")
    p.add_argument("--coeffs", help="pade: comma-separated c0,c1,...")
    p.add_argument("--mn", help="pade: 'M,N' for a general [M/N] approximant at --x")
    p.add_argument("--x", type=float, default=1.0)
    p.add_argument("--values", help="shanks: comma-separated sequence")
    p.add_argument("--csv", help="plot-script: propagator scan CSV")
    p.add_argument("--qmc-log2n", type=int, default=17)
    p.add_argument("--qmc-reps", type=int, default=8)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        pre, _ = parser.parse_known_args(argv)
        if pre.config:
            known = {a.dest: a for a in parser._actions}
            defaults = {}
            for k, v in read_config_file(pre.config).items():
                if k not in known or k in ("command", "config"):
                    raise ConfigError(f"unknown config key {k!r}")
                action = known[k]
                try:
                    defaults[k] = action.type(v) if action.type else v
                except ValueError as exc:
                    raise ConfigError(f"bad value for {k}: {v!r}") from exc
                if action.choices and defaults[k] not in action.choices:
                    raise ConfigError(f"{k} must be one of {action.choices}")
            parser.set_defaults(**defaults)
        args = parser.parse_args(argv)
        COMMANDS[args.command](args)
    except SystemExit as exc:
        # argparse exits on --help and on usage errors
        return exc.code if isinstance(exc.code, int) else EXIT_CONFIG
    except ConfigError as exc:
        print(f"hitprop: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (HitPropError, FloatingPointError, ArithmeticError) as exc:
        print(f"hitprop: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"hitprop: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
