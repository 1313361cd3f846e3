"""``radres`` command-line front end.

Every command writes one CSV file whose first line is a ``#`` comment of
``key=value`` pairs (inputs and summary results). A config file of
``key = value`` lines can stand in for the flags; flags given on the
command line take precedence. Exit codes: 0 success, 2 precondition
violation, 3 numerical-quality failure (the CSV is still written).
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import mellin
from .fitting import FitError, fit_power_law
from .plots import emit_plot_script
from .potential import parse_potential
from .radial_solver import DRIFT_TOL, Channel, NumericalQualityWarning, channel_grid, solve_channel
from .resolvent import WeightedNormRequest, channel_norm, full_norm_nd
from .specfun import bessel_jy, envelope_ratios

__all__ = ["main", "build_parser", "ExperimentConfig", "parse_grid", "EXIT_OK", "EXIT_PRECONDITION", "EXIT_QUALITY"]

EXIT_OK = 0
EXIT_PRECONDITION = 2
EXIT_QUALITY = 3

COMMANDS = ("solve", "norm", "sweep-h", "sweep-m", "mellin-check", "bessel-check")


class QualityFailure(Exception):
    """Raised after output is written when a numerical tolerance was missed."""


def parse_grid(spec: str) -> np.ndarray:
    """``geom:a:b:n``, ``lin:a:b:n`` or a comma-separated list."""
    spec = spec.strip()
    if spec.startswith(("geom:", "lin:")):
        kind, a, b, n = spec.split(":")
        a, b, n = float(a), float(b), int(n)
        if n < 1:
            raise ValueError("grid needs at least one point")
        if kind == "geom":
            if a <= 0 or b <= 0:
                raise ValueError("geometric grid needs positive ends")
            return np.geomspace(a, b, n)
        return np.linspace(a, b, n)
    vals = [float(t) for t in spec.split(",") if t.strip()]
    if not vals:
        raise ValueError("empty grid")
    return np.array(vals)


def _grid_arg(s):
    try:
        parse_grid(s)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc
    return s


def _common(p, out_required=True):
    p.add_argument("--out", required=out_required, help="CSV path, '-' for stdout")
    p.add_argument("--threads", type=int, default=1, help="worker cap for channel loops")
    p.add_argument("--plot", action="store_true", help="also write a plotting script next to the CSV")


def _physics(p, need_m=False, need_h=True):
    p.add_argument("--potential", default="zero", help="file, 'zero', 'well:d:r' or 'barrier:v:r'")
    if need_h:
        p.add_argument("--h", type=float, required=True)
    p.add_argument("--E", type=float, required=True)
    p.add_argument("--eps", type=float, default=0.0)
    p.add_argument("--n", type=int, default=3, help="spatial dimension")
    p.add_argument("--r-max", type=float, default=8.0)
    p.add_argument("--ppw", type=float, default=24.0, help="grid points per wavelength")
    if need_m:
        p.add_argument("--m", type=float, required=True)


def _weights(p):
    p.add_argument("--s", type=float, default=1.0)
    p.add_argument("--exterior-R", type=float, default=None)
    p.add_argument("--method", choices=("power-iteration", "hilbert-schmidt"), default="power-iteration")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="radres", description="Radial resolvent kernels and weighted norms.")
    parser.add_argument("--config", help="key = value file supplying defaults for the command's flags")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="u0, u1 and the Wronskian of one channel")
    _physics(p, need_m=True)
    p.add_argument("--r-ode", type=float, default=None, help="integrate u0 by ODE up to this radius")
    p.add_argument("--drift-tol", type=float, default=DRIFT_TOL)
    _common(p)

    p = sub.add_parser("norm", help="channel norms and their maximum")
    _physics(p)
    _weights(p)
    p.add_argument("--k-max", type=int, default=None)
    _common(p)

    p = sub.add_parser("sweep-h", help="full norm over an h grid")
    _physics(p, need_h=False)
    p.add_argument("--h-grid", type=_grid_arg, required=True)
    _weights(p)
    p.add_argument("--k-max", type=int, default=None)
    _common(p)

    p = sub.add_parser("sweep-m", help="single-channel norm over an m grid")
    _physics(p)
    p.add_argument("--m-grid", type=_grid_arg, required=True)
    _weights(p)
    _common(p)

    p = sub.add_parser("mellin-check", help="multiplier bound, Parseval and reconstruction")
    p.add_argument("--m", type=float, required=True)
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--t0", type=float, default=None, help="contour height (default -1/2 or 1 by m)")
    _common(p)

    p = sub.add_parser("bessel-check", help="envelope ratios and Wronskian errors")
    p.add_argument("--nu-grid", type=_grid_arg, required=True)
    p.add_argument("--z-grid", type=_grid_arg, required=True)
    _common(p)
    return parser


# config files -----------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    """A command with its fully resolved flag values."""

    command: str
    params: dict = field(default_factory=dict)

    @classmethod
    def from_namespace(cls, ns: argparse.Namespace) -> ExperimentConfig:
        d = {k: v for k, v in vars(ns).items() if k not in ("command", "config")}
        return cls(ns.command, d)

    def to_text(self) -> str:
        lines = [f"command = {self.command}"]
        for key in sorted(self.params):
            val = self.params[key]
            if val is None or val is False:
                continue
            text = "true" if val is True else (repr(val) if isinstance(val, float) else str(val))
            lines.append(f"{key.replace('_', '-')} = {text}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, extra_argv=()) -> ExperimentConfig:
        command, argv = _config_argv(text)
        ns = build_parser().parse_args([command, *argv, *extra_argv])
        return cls.from_namespace(ns)


def _config_argv(text: str):
    command = None
    argv = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line without '=': {raw!r}")
        key, val = (t.strip() for t in line.split("=", 1))
        key = key.replace("_", "-")
        if key == "command":
            command = val
        elif val.lower() == "true":
            argv.append(f"--{key}")
        elif val.lower() != "false":
            argv.extend([f"--{key}", val])
    if command not in COMMANDS:
        raise ValueError(f"config must name a command out of {COMMANDS}")
    return command, argv


# output -----------------------------------------------------------------------


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if isinstance(v, (complex, np.complexfloating)):
        return f"{v.real:.17g}{v.imag:+.17g}j"
    return "" if v is None else str(v)


def _write_csv(path, header: dict, columns, rows):
    buf = io.StringIO()
    buf.write("# " + " ".join(f"{k}={_fmt(v)}" for k, v in header.items()) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    if path == "-":
        sys.stdout.write(buf.getvalue())
    else:
        Path(path).write_text(buf.getvalue())


def _request(a, exterior=True) -> WeightedNormRequest:
    return WeightedNormRequest(
        s=a.s,
        exterior_R=a.exterior_R if exterior else None,
        r_max=a.r_max,
        points_per_wavelength=a.ppw,
        method=a.method,
    )


# commands ---------------------------------------------------------------------


def _cmd_solve(a):
    V = parse_potential(a.potential)
    ch = Channel(a.n, a.h, a.E, a.eps, a.m)
    grid = channel_grid(ch, V, a.r_max, a.ppw)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NumericalQualityWarning)
        pair = solve_channel(ch, V, grid, r_ode=a.r_ode)
    u0, u1 = pair.u0.values(), pair.u1.values()
    with np.errstate(divide="ignore"):
        l0 = pair.u0.log_mag / math.log(10)
        l1 = pair.u1.log_mag / math.log(10)
    header = {
        "command": "solve",
        "potential": a.potential,
        "h": a.h,
        "E": a.E,
        "eps": a.eps,
        "m": a.m,
        "nu": ch.nu,
        "W": pair.wronskian,
        "drift": pair.wronskian_drift,
    }
    rows = zip(pair.grid, u0.real, u0.imag, u1.real, u1.imag, l0, l1)
    _write_csv(a.out, header, ["r", "re_u0", "im_u0", "re_u1", "im_u1", "log10_abs_u0", "log10_abs_u1"], rows)
    if pair.wronskian_drift > a.drift_tol:
        raise QualityFailure(f"Wronskian drift {pair.wronskian_drift:.3g} above {a.drift_tol:g}")


def _full_norm(a, V, h):
    return full_norm_nd(V, a.E, h, _request(a), a.n, k_max=a.k_max, eps=a.eps, threads=a.threads)


def _cmd_norm(a):
    V = parse_potential(a.potential)
    res = _full_norm(a, V, a.h)
    rows = [(int(k), m, int(mu), v, t) for k, m, mu, v, t in zip(res.degrees, res.m, res.multiplicity, res.norms, res.tails)]
    rows.append(("max", res.m[res.argmax], int(res.multiplicity[res.argmax]), res.estimate.value, res.estimate.tail_bound))
    header = {
        "command": "norm",
        "potential": a.potential,
        "n": a.n,
        "h": a.h,
        "E": a.E,
        "s": a.s,
        "exterior_R": a.exterior_R,
        "r_max": a.r_max,
        "argmax_k": int(res.degrees[res.argmax]),
        "stop": res.stop_reason,
        "converged": res.estimate.converged,
    }
    _write_csv(a.out, header, ["k", "m", "multiplicity", "norm", "tail_bound"], rows)
    if not res.estimate.converged:
        raise QualityFailure("power iteration did not converge in some channel")


def _cmd_sweep_h(a):
    V = parse_potential(a.potential)
    hs = parse_grid(a.h_grid)
    rows, pts, ok = [], [], True
    for h in hs:
        res = _full_norm(a, V, float(h))
        val = res.estimate.value
        ok &= res.estimate.converged
        pts.append((h, val))
        try:
            slope = fit_power_law(pts).exponent
        except FitError:
            slope = None
        rows.append((h, val, h * math.log(val), slope))
    header = {"command": "sweep-h", "potential": a.potential, "n": a.n, "E": a.E, "s": a.s, "exterior_R": a.exterior_R}
    _write_csv(a.out, header, ["h", "norm", "h_times_log_norm", "fitted_slope_so_far"], rows)
    if not ok:
        raise QualityFailure("power iteration did not converge in some channel")


def _cmd_sweep_m(a):
    V = parse_potential(a.potential)
    req = _request(a)
    rows, ok = [], True
    for m in parse_grid(a.m_grid):
        est = channel_norm(Channel(a.n, a.h, a.E, a.eps, float(m)), V, req)
        ok &= est.converged
        rows.append((m, est.value, a.h * math.log(est.value) / (1.0 + math.sqrt(abs(m)))))
    header = {"command": "sweep-m", "potential": a.potential, "h": a.h, "E": a.E, "s": a.s, "exterior_R": a.exterior_R}
    _write_csv(a.out, header, ["m", "norm", "log_norm_times_h_over_1_plus_sqrt_m"], rows)
    if not ok:
        raise QualityFailure("power iteration did not converge")


def _cmd_mellin(a):
    t0 = mellin.t0_choice(a.m, a.h) if a.t0 is None else a.t0
    lam = mellin.lambda_bound(t0, a.m, a.h)
    u, v = mellin.manufactured(a.m, a.h)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", mellin.SupportLeakageWarning)
        line = mellin.mellin_forward(u, t0)
        dec = mellin.decompose(v, t0, a.m, a.h)
    pars = mellin.parseval_relerr(u, line)
    rec = mellin.reconstruction_relerr(u, dec, t0)
    mult = np.abs(mellin.multiplier(line.tau, t0, a.m, a.h))
    order = np.argsort(line.tau)
    rows = ((line.tau[i], mult[i], lam, pars, rec) for i in order)
    header = {"command": "mellin-check", "m": a.m, "h": a.h, "t0": t0, "case": dec.pi_part.case, "sup_over_Lambda": mult.max() / lam}
    _write_csv(a.out, header, ["tau", "abs_multiplier", "Lambda", "parseval_relerr", "reconstruction_relerr"], rows)
    if pars > 1e-8 or rec > 1e-6:
        raise QualityFailure(f"Parseval {pars:.3g} or reconstruction {rec:.3g} out of tolerance")


def _cmd_bessel(a):
    rows, worst = [], 0.0
    for nu in parse_grid(a.nu_grid):
        z = parse_grid(a.z_grid)
        env = envelope_ratios(float(nu), z)
        wr = bessel_jy(float(nu), nu * z).wronskian_relerr()
        worst = max(worst, float(np.max(wr)))
        rows.extend(zip([nu] * z.size, z, env.j, env.y, env.ratio_j, env.ratio_y, wr))
    header = {"command": "bessel-check", "max_wronskian_relerr": worst}
    _write_csv(a.out, header, ["nu", "z", "J", "Y", "envelope_ratio_J", "envelope_ratio_Y", "wronskian_relerr"], rows)
    if worst > 1e-10:
        raise QualityFailure(f"Wronskian error {worst:.3g}")


_DISPATCH = {
    "solve": _cmd_solve,
    "norm": _cmd_norm,
    "sweep-h": _cmd_sweep_h,
    "sweep-m": _cmd_sweep_m,
    "mellin-check": _cmd_mellin,
    "bessel-check": _cmd_bessel,
}


def _resolve_argv(argv):
    """Expand ``--config FILE`` into flags placed before the explicit ones."""
    argv = list(argv)
    if "--config" not in argv and not any(t.startswith("--config=") for t in argv):
        return argv
    rest, path = [], None
    it = iter(argv)
    for tok in it:
        if tok == "--config":
            path = next(it, None)
        elif tok.startswith("--config="):
            path = tok.split("=", 1)[1]
        else:
            rest.append(tok)
    if path is None:
        raise ValueError("--config needs a path")
    command, cfg_argv = _config_argv(Path(path).read_text())
    if rest and rest[0] in COMMANDS:
        if rest[0] != command:
            raise ValueError(f"config is for {command!r}, command line asks for {rest[0]!r}")
        rest = rest[1:]
    return [command, *cfg_argv, *rest]


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    parser = build_parser()
    try:
        argv = _resolve_argv(argv)
    except (OSError, ValueError) as exc:
        print(f"radres: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_PRECONDITION
    code = EXIT_OK
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", NumericalQualityWarning)
            _DISPATCH[args.command](args)
        flagged = [w for w in caught if issubclass(w.category, NumericalQualityWarning)]
        if flagged:
            raise QualityFailure(str(flagged[0].message))
    except QualityFailure as exc:
        print(f"radres: numerical quality: {exc}", file=sys.stderr)
        code = EXIT_QUALITY
    except RuntimeError as exc:
        print(f"radres: numerical failure: {exc}", file=sys.stderr)
        return EXIT_QUALITY
    except (ValueError, ArithmeticError, OSError) as exc:
        print(f"radres: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    if args.plot and args.out != "-":
        emit_plot_script(args.out, args.command)
    return code


if __name__ == "__main__":
    sys.exit(main())
