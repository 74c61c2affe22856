"""Configuration-driven command line interface.

Every module is exposed as a subcommand (mesh, solve, ray, toda-check,
holonomy, expmap, moduli).  A run can be described by a flat key=value config
file; subcommand flags override file values.  Exit codes: 0 success, 1 usage
or validation failure, 2 numerical failure, 3 mathematical nonexistence (a
correct no-solution answer, not an error).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field, fields

import numpy as np

from . import gauss, moduli, normal_flow, surface, toda
from .errors import (
    MinlagError,
    NonexistenceError,
    NumericalError,
    UsageError,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_NONEXISTENCE = 3

COMMANDS = ("mesh", "solve", "ray", "toda-check", "holonomy", "expmap", "moduli")

_DEFAULTS = {
    "refine": 3,
    "q": 1.0,
    "q_file": None,
    "t": 0.0,
    "t_max": 0.5,
    "step": 0.02,
    "tol": 1e-11,
    "genus": 2,
    "Q0": 0.3,
    "sweep": False,
    "nr": 40,
    "nalpha": 24,
    "steps": 10000,
    "radius": 0.3,
    "nx": 81,
    "extent": 0.5,
    "centre": 0.0,
    "signs": "+",
    "out": None,
    "format": "csv",
    "plot": True,
    "seed": 0,
}


@dataclass
class RunConfig:
    """Validated parameters of one CLI run."""

    command: str
    refine: int = 3
    q: float = 1.0
    q_file: str | None = None
    t: float = 0.0
    t_max: float = 0.5
    step: float = 0.02
    tol: float = 1e-11
    genus: int = 2
    Q0: float = 0.3
    sweep: bool = False
    nr: int = 40
    nalpha: int = 24
    steps: int = 10000
    radius: float = 0.3
    nx: int = 81
    extent: float = 0.5
    centre: float = 0.0
    signs: str = "+"
    chart: str | None = None
    out: str | None = None
    format: str = "csv"
    plot: bool = True
    seed: int = 0


@dataclass
class ConfigError:
    message: str
    line: int | None = None
    column: int | None = None

    def __str__(self):
        if self.line is None:
            return self.message
        return f"line {self.line}, column {self.column}: {self.message}"


# ---------------------------------------------------------------------------
# Config parsing and full validation
# ---------------------------------------------------------------------------

_BOOL_KEYS = {"sweep", "plot"}
_INT_KEYS = {"refine", "genus", "nr", "nalpha", "steps", "nx", "seed"}
_FLOAT_KEYS = {"q", "t", "t_max", "step", "tol", "Q0", "radius", "extent", "centre"}
_STR_KEYS = {"command", "q_file", "chart", "out", "format", "signs"}


def parse_config_text(text):
    """Flat key = value lines into a raw string dict; reports line/column."""
    raw = {}
    errors = []
    for ln, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            errors.append(ConfigError("expected 'key = value'", ln, line.find(stripped[0]) + 1))
            continue
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            errors.append(ConfigError("empty key", ln, 1))
            continue
        raw[key] = value
    return raw, errors


def _convert(key, value, errors):
    try:
        if key in _BOOL_KEYS:
            if value.lower() in ("1", "true", "yes", "on"):
                return True
            if value.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {value!r}")
        if key in _INT_KEYS:
            return int(value)
        if key in _FLOAT_KEYS:
            return float(value)
        return value
    except ValueError as exc:
        errors.append(ConfigError(f"{key}: {exc}"))
        return None


def validate(config_text):
    """Full validation of a config document; reports every violation.

    Returns (RunConfig or None, list of ConfigError).
    """
    if isinstance(config_text, bytes):
        config_text = config_text.decode("utf-8", errors="replace")
    raw, errors = parse_config_text(config_text)
    known = {f.name for f in fields(RunConfig)}
    params = {}
    for key, value in raw.items():
        if key not in known:
            errors.append(ConfigError(f"unknown key {key!r}"))
            continue
        converted = _convert(key, value, errors)
        if converted is not None:
            params[key] = converted
    command = params.pop("command", None)
    if command is None:
        errors.append(ConfigError("missing 'command' (one of " + ", ".join(COMMANDS) + ")"))
    elif command not in COMMANDS:
        errors.append(ConfigError(f"unknown command {command!r}"))
    cfg = RunConfig(command=command or "invalid", **params) if not errors or command else None
    if cfg is not None:
        errors.extend(validate_config(cfg, present=set(params)))
    if errors:
        return None, errors
    return cfg, []


# parameters each command validates (plus anything explicitly supplied)
_SCOPE = {
    "mesh": {"refine"},
    "solve": {"refine", "q", "t", "tol"},
    "ray": {"refine", "q", "t_max", "step", "tol"},
    "toda-check": {"nx", "extent", "centre"},
    "holonomy": {"nx", "extent", "radius", "steps"},
    "expmap": {"Q0", "nr", "nalpha"},
    "moduli": {"genus", "signs"},
}

_UNIVERSAL = {"format", "out", "seed", "plot", "chart", "q_file", "sweep", "command"}


def validate_config(cfg, present=None):
    """Constraint checks against the target command's preconditions.

    Explicitly supplied keys (``present``) are validated even when the
    command does not use them, so a config file cannot smuggle bad values.
    """
    errors = []

    def bad(msg):
        errors.append(ConfigError(msg))

    if cfg.command not in COMMANDS:
        bad(f"unknown command {cfg.command!r}")
        return errors
    scope = _SCOPE[cfg.command] | (set(present) if present else set())

    def active(key):
        return key in scope

    if active("refine") and not (0 <= cfg.refine <= surface.MAX_REFINEMENT):
        bad(f"refine must be in [0, {surface.MAX_REFINEMENT}] (memory guard)")
    if active("q") and cfg.q < 0.0:
        bad("qsq must be >= 0 (q is its square root; negative q rejected)")
    if active("t") and cfg.t < 0.0:
        bad("t must be >= 0")
    if active("t_max") and cfg.t_max < 0.0:
        bad("ray precondition violated: t_max must be >= 0")
    if active("step") and cfg.step <= 0.0:
        bad("ray precondition violated: step must be > 0")
    if active("tol") and cfg.tol <= 0.0:
        bad("tol must be > 0")
    if active("genus") and cfg.genus < 2:
        bad("genus must be >= 2")
    if active("Q0") and not (0.0 <= cfg.Q0 < 0.5):
        bad("Q0 must lie in [0, 1/2)")
    if active("steps") and cfg.steps < 100:
        bad("holonomy needs steps >= 100")
    if active("nx") and cfg.nx < 5:
        bad("grid needs nx >= 5")
    if active("extent") and (cfg.extent <= 0.0 or cfg.extent * math.sqrt(2.0) >= 1.0):
        bad("chart extent must keep the grid strictly inside the unit disc")
    if active("radius") and not (0.0 < cfg.radius):
        bad("loop radius must be > 0")
    if cfg.command == "holonomy" and cfg.radius >= cfg.extent:
        bad("loop radius must stay inside the chart extent")
    if cfg.format not in ("csv", "json", "md"):
        bad("format must be csv, json, or md")
    if active("signs") and cfg.signs not in ("+", "-", "both"):
        bad("signs must be '+', '-', or 'both'")
    if active("nr") and (cfg.nr < 2 or cfg.nalpha < 2):
        bad("sweep grid needs nr >= 2 and nalpha >= 2")
    return errors


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def _build_parser():
    p = argparse.ArgumentParser(
        prog="minlag",
        description="Numerical laboratory for equivariant minimal Lagrangian "
        "surfaces in the complex hyperbolic plane",
    )
    p.add_argument("--config", help="flat key=value config file")
    sub = p.add_subparsers(dest="command")

    def add_common(sp):
        sp.add_argument("--out", help="output file (csv or json)")
        sp.add_argument("--format", choices=["csv", "json", "md"], dest="format")
        sp.add_argument("--seed", type=int)

    sp = sub.add_parser("mesh", help="build and export the genus-2 mesh")
    sp.add_argument("--refine", type=int)
    add_common(sp)

    sp = sub.add_parser("solve", help="solve the conformal-factor equation at one t")
    sp.add_argument("--refine", type=int)
    sp.add_argument("--q", type=float, help="constant sqrt(qsq)")
    sp.add_argument("--q-file", dest="q_file", help="JSON array with per-vertex qsq")
    sp.add_argument("--t", type=float)
    sp.add_argument("--tol", type=float)
    add_common(sp)

    sp = sub.add_parser("ray", help="continue solutions along t*q with fold detection")
    sp.add_argument("--refine", type=int)
    sp.add_argument("--q", type=float)
    sp.add_argument("--q-file", dest="q_file")
    sp.add_argument("--t-max", dest="t_max", type=float)
    sp.add_argument("--step", type=float)
    sp.add_argument("--tol", type=float)
    sp.add_argument("--plot", dest="plot", action="store_true", default=None)
    sp.add_argument("--no-plot", dest="plot", action="store_false", default=None)
    add_common(sp)

    sp = sub.add_parser("toda-check", help="chart residual and curvature report")
    sp.add_argument("--chart", help="chart JSON file (default: disc-model data)")
    sp.add_argument("--nx", type=int)
    sp.add_argument("--extent", type=float)
    sp.add_argument("--centre", type=float, help="real Mobius centre for the disc data")
    sp.add_argument("--plot", dest="plot", action="store_true", default=None)
    sp.add_argument("--no-plot", dest="plot", action="store_false", default=None)
    add_common(sp)

    sp = sub.add_parser("holonomy", help="loop holonomy of the chart connection")
    sp.add_argument("--chart")
    sp.add_argument("--nx", type=int)
    sp.add_argument("--extent", type=float)
    sp.add_argument("--radius", type=float)
    sp.add_argument("--steps", type=int)
    add_common(sp)

    sp = sub.add_parser("expmap", help="normal exponential map sweep tables")
    sp.add_argument("--Q0", dest="Q0", type=float)
    sp.add_argument("--sweep", action="store_true", default=None)
    sp.add_argument("--nr", type=int)
    sp.add_argument("--nalpha", type=int)
    sp.add_argument("--plot", dest="plot", action="store_true", default=None)
    sp.add_argument("--no-plot", dest="plot", action="store_false", default=None)
    add_common(sp)

    sp = sub.add_parser("moduli", help="moduli component tables for a genus")
    sp.add_argument("--genus", type=int)
    sp.add_argument("--signs", choices=["+", "-", "both"])
    add_common(sp)
    return p


def _merge_config(args):
    """Combine config-file values and CLI flags into a validated RunConfig."""
    file_params = {}
    if args.config:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read config file: {exc}")
        raw, parse_errors = parse_config_text(text)
        if parse_errors:
            raise UsageError("; ".join(str(e) for e in parse_errors))
        errors = []
        for key, value in raw.items():
            if key not in {f.name for f in fields(RunConfig)}:
                errors.append(ConfigError(f"unknown key {key!r}"))
                continue
            converted = _convert(key, value, errors)
            if converted is not None:
                file_params[key] = converted
        if errors:
            raise UsageError("; ".join(str(e) for e in errors))
    command = args.command or file_params.pop("command", None)
    if command is None:
        raise UsageError("no command given (flag or config 'command = ...')")
    file_params.pop("command", None)
    params = dict(file_params)
    for key in _DEFAULTS:
        cli_val = getattr(args, key, None)
        if cli_val is not None:
            params[key] = cli_val
    if getattr(args, "chart", None) is not None:
        params["chart"] = args.chart
    merged = {k: params.get(k, v) for k, v in _DEFAULTS.items()}
    merged["chart"] = params.get("chart")
    cfg = RunConfig(command=command, **merged)
    errors = validate_config(cfg, present=set(params))
    if errors:
        raise UsageError("; ".join(str(e) for e in errors))
    return cfg


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------


def _fmt(x):
    if isinstance(x, float):
        return format(x, ".12g")
    return str(x)


def _write_csv(path, header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    data = buf.getvalue()
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(data)
    return data


def _write_json(path, doc):
    data = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(data)
    return data


def _plot_path(out):
    if out is None:
        return None
    base = out.rsplit(".", 1)[0] if "." in out else out
    return base + ".png"


# ---------------------------------------------------------------------------
# Command implementations
# ---------------------------------------------------------------------------


def _load_qsq(cfg, mesh):
    if cfg.q_file:
        with open(cfg.q_file, "r", encoding="utf-8") as fh:
            vals = np.asarray(json.load(fh), dtype=float)
        if vals.shape != (mesh.num_vertices,):
            raise UsageError(
                f"q-file has {vals.shape} entries, mesh has {mesh.num_vertices} vertices"
            )
        if np.any(vals < 0.0):
            raise UsageError("qsq must be >= 0")
        return surface.ScalarField(vals, mesh)
    return surface.ScalarField.constant(mesh, cfg.q**2)


def _cmd_mesh(cfg):
    mesh = surface.build_bolza_mesh(cfg.refine)
    doc = surface.mesh_to_json(mesh)
    if cfg.out:
        _write_json(cfg.out, doc)
    print(
        f"genus-2 mesh level {cfg.refine}: chi={mesh.euler_characteristic()} "
        f"vertices={mesh.num_vertices} triangles={len(mesh.triangles)} "
        f"area={mesh.total_area:.6f} (4*pi = {4 * math.pi:.6f})"
    )
    return EXIT_OK


def _cmd_solve(cfg):
    mesh = surface.build_bolza_mesh(cfg.refine)
    qsq = _load_qsq(cfg, mesh)
    problem = gauss.GaussProblem(mesh, qsq, cfg.t)
    sol = gauss.solve(problem, tol=cfg.tol)
    stab = gauss.f_stability(sol, problem)
    emb = gauss.embedding_check(sol, problem)
    area_gamma, q_integral = gauss.area_report(sol, problem)
    doc = {
        "t": cfg.t,
        "min_u": sol.u.min(),
        "max_u": sol.u.max(),
        "lambda_min": stab.lambda_min,
        "is_F_stable": stab.is_F_stable,
        "max_Qsq_gamma": emb.max_Qsq_gamma,
        "almost_R_Fuchsian": emb.almost_R_Fuchsian,
        "T0": emb.T0,
        "area_gamma": area_gamma,
        "hitchin_level": moduli.hitchin_from_area(area_gamma),
        "residual_norm": sol.residual_norm,
        "newton_iters": sol.newton_iters,
        "u": sol.u.values.tolist(),
    }
    if cfg.format == "json" or (cfg.out or "").endswith(".json"):
        _write_json(cfg.out, doc)
    elif cfg.out:
        _write_csv(
            cfg.out,
            ["vertex", "u", "qsq"],
            [(i, u, q) for i, (u, q) in enumerate(zip(sol.u.values, qsq.values))],
        )
    print(
        f"solved t={cfg.t:.6g}: min_u={sol.u.min():.8f} max_u={sol.u.max():.3e} "
        f"lambda_min={stab.lambda_min:.6f} max_Qsq_gamma={emb.max_Qsq_gamma:.6f} "
        f"almost_R_Fuchsian={emb.almost_R_Fuchsian} (T0 = {emb.T0:.4f})"
    )
    return EXIT_OK


def _ray_rows(result, problem_factory):
    rows = []
    for smp in result.samples:
        problem = problem_factory(smp.t)
        emb = gauss.embedding_check(smp.solution, problem)
        area_gamma, _ = gauss.area_report(smp.solution, problem)
        rows.append(
            (
                smp.t,
                smp.solution.u.min(),
                smp.solution.u.max(),
                smp.stability.lambda_min,
                emb.max_Qsq_gamma,
                area_gamma,
                smp.solution.newton_iters,
            )
        )
    return rows


RAY_COLUMNS = ["t", "min_u", "max_u", "lambda_min", "max_Qsq_gamma", "area_gamma", "newton_iters"]


def _cmd_ray(cfg):
    mesh = surface.build_bolza_mesh(cfg.refine)
    qsq = _load_qsq(cfg, mesh)
    result = gauss.continue_ray(qsq, cfg.t_max, cfg.step, tol=cfg.tol)
    rows = _ray_rows(result, lambda t: gauss.GaussProblem(mesh, qsq, t))
    if cfg.format == "json":
        doc = {
            "t0": result.t0,
            "fold_t": result.fold_t,
            "status": result.status,
            "newton_fail_t": result.newton_fail_t,
            "stable_monotone": result.stable_monotone,
            "samples": [dict(zip(RAY_COLUMNS, row)) for row in rows],
        }
        _write_json(cfg.out, doc)
    else:
        _write_csv(cfg.out, RAY_COLUMNS, rows)
    if cfg.plot and cfg.out:
        from . import plots

        plots.ray_figure(rows, result, _plot_path(cfg.out))
    if result.fold_t is not None:
        print(f"fold T1 ≈ {result.fold_t:.4f} (T0 = {result.t0:.4f})")
    else:
        print(f"no fold up to t_max={cfg.t_max:.4f} (T0 = {result.t0:.4f})")
    print(
        f"ray status={result.status}: {len(result.samples)} samples, "
        f"stable branch monotone={result.stable_monotone}"
        + (
            f", first Newton failure at t={result.newton_fail_t:.4f} (T2 probe)"
            if result.newton_fail_t is not None
            else ""
        )
    )
    return EXIT_OK


def _chart_data(cfg):
    if cfg.chart:
        with open(cfg.chart, "r", encoding="utf-8") as fh:
            return toda.chart_from_json(json.load(fh))
    grid = toda.ChartGrid(-cfg.extent, cfg.extent, -cfg.extent, cfg.extent, cfg.nx, cfg.nx)
    return toda.fuchsian_chart_data(grid, cfg.centre)


def _cmd_toda_check(cfg):
    data = _chart_data(cfg)
    r1, r2 = toda.toda_residuals(data)
    conn = toda.assemble_connection(data)
    flat = toda.flatness_residual(conn)
    kah = toda.kahler_report(data)
    curv = toda.curvature_report(data)
    inner = conn.grid.interior()
    pts = inner.points()
    rows = []
    for j in range(inner.ny):
        for i in range(inner.nx):
            rows.append(
                (
                    pts[j, i].real,
                    pts[j, i].imag,
                    r1[1:-1, 1:-1][j, i],
                    r2[1:-1, 1:-1][j, i],
                    flat[j, i],
                    kah.cos_theta[2:-2, 2:-2][j, i],
                    curv.kappa_gamma[1:-1, 1:-1][j, i],
                    curv.kappa_perp[1:-1, 1:-1][j, i],
                    curv.identity_residual[1:-1, 1:-1][j, i],
                )
            )
    header = [
        "x",
        "y",
        "toda_r1",
        "toda_r2",
        "flatness",
        "cos_theta",
        "kappa_gamma",
        "kappa_perp",
        "curvature_identity",
    ]
    if cfg.format == "json":
        doc = {
            "max_r1": float(np.max(np.abs(r1))),
            "max_r2": float(np.max(np.abs(r2))),
            "max_flatness": float(np.max(flat)),
            "rows": [dict(zip(header, row)) for row in rows],
        }
        _write_json(cfg.out, doc)
    else:
        _write_csv(cfg.out, header, rows)
    if cfg.plot and cfg.out:
        from . import plots

        plots.toda_figure(data, r1, flat, _plot_path(cfg.out))
    print(
        f"toda-check (h={data.grid.h:.4g}): max|r1|={np.max(np.abs(r1)):.3e} "
        f"max|r2|={np.max(np.abs(r2)):.3e} max flatness={np.max(flat):.3e} "
        f"kappa_gamma range [{curv.kappa_gamma.min():.4f}, {curv.kappa_gamma.max():.4f}]"
    )
    return EXIT_OK


def _cmd_holonomy(cfg):
    data = _chart_data(cfg)
    conn = toda.assemble_connection(data)
    angles = np.linspace(0.0, 2.0 * np.pi, 65)
    loop = cfg.radius * np.exp(1j * angles)
    result = toda.holonomy(conn, loop, cfg.steps)
    doc = {
        "steps": result.step_count,
        "radius": cfg.radius,
        "unitarity_deviation": result.unitarity_deviation(),
        "scale_c": result.scale(),
        "matrix_re": result.matrix.real.tolist(),
        "matrix_im": result.matrix.imag.tolist(),
    }
    if cfg.out:
        _write_json(cfg.out, doc)
    print(
        f"holonomy: radius={cfg.radius} steps={result.step_count} "
        f"|M^H eta M - c eta|={result.unitarity_deviation():.3e} c={result.scale():.6f}"
    )
    return EXIT_OK


def _cmd_expmap(cfg):
    rows = normal_flow.sweep_rows(cfg.Q0, cfg.nr, cfg.nalpha)
    header = ["Q0", "r", "alpha", "l", "k_re", "k_im", "lower_bound", "a", "da_dr"]
    if cfg.format == "json":
        doc = {
            "Q0": cfg.Q0,
            "complete": normal_flow.completeness_verdict(cfg.Q0),
            "rows": [dict(zip(header, row)) for row in rows],
        }
        _write_json(cfg.out, doc)
    else:
        _write_csv(cfg.out, header, rows)
    if cfg.plot and cfg.out:
        from . import plots

        plots.expmap_figure(rows, cfg.Q0, _plot_path(cfg.out))
    lb = min(row[6] for row in rows)
    da = min(row[8] for row in rows if row[1] > 0)
    print(
        f"expmap Q0={cfg.Q0}: min lower_bound={lb:.6f} min da_dr={da:.6f} "
        f"complete={normal_flow.completeness_verdict(cfg.Q0)}"
    )
    return EXIT_OK


def _moduli_rows(cfg):
    rows = []
    for comp in moduli.enumerate_nonhol(cfg.genus):
        rep = moduli.nonhol_invariants(comp)
        rows.append(
            (
                "nonhol",
                "",
                comp.d1,
                comp.d2,
                str(rep.toledo),
                rep.euler_normal,
                rep.dim,
                rep.fiber_rank,
                rep.hodge_length,
                f"{rep.hitchin_critical_coeff}*pi",
            )
        )
    signs = ["+", "-"] if cfg.signs == "both" else [cfg.signs]
    for sign in signs:
        for comp in moduli.enumerate_hol(cfg.genus, sign):
            rep = moduli.hol_invariants(comp)
            rows.append(
                (
                    "hol",
                    sign,
                    comp.b,
                    comp.l,
                    str(rep.toledo),
                    "",
                    rep.dim,
                    rep.fiber_rank,
                    rep.hodge_length,
                    "",
                )
            )
    return rows


MODULI_COLUMNS = [
    "family",
    "sign",
    "deg1",
    "deg2",
    "toledo",
    "euler_normal",
    "dim",
    "fiber_rank",
    "hodge_length",
    "hitchin_level",
]


def _cmd_moduli(cfg):
    rows = _moduli_rows(cfg)
    if cfg.format == "json":
        _write_json(cfg.out, {"genus": cfg.genus, "rows": [dict(zip(MODULI_COLUMNS, r)) for r in rows]})
    elif cfg.format == "md":
        lines = ["| " + " | ".join(MODULI_COLUMNS) + " |"]
        lines.append("|" + "---|" * len(MODULI_COLUMNS))
        for row in rows:
            lines.append("| " + " | ".join(str(v) for v in row) + " |")
        text = "\n".join(lines) + "\n"
        if cfg.out:
            with open(cfg.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            print(text)
    else:
        _write_csv(cfg.out, MODULI_COLUMNS, rows)
    n_nonhol = sum(1 for r in rows if r[0] == "nonhol")
    n_hol = sum(1 for r in rows if r[0] == "hol")
    taus = sorted({r[4] for r in rows})
    print(
        f"genus {cfg.genus}: {n_nonhol} non-holomorphic and {n_hol} holomorphic "
        f"components; dims 8g-8={8 * cfg.genus - 8} and 3(g-1)+l+1; tau values {taus}"
    )
    return EXIT_OK


_DISPATCH = {
    "mesh": _cmd_mesh,
    "solve": _cmd_solve,
    "ray": _cmd_ray,
    "toda-check": _cmd_toda_check,
    "holonomy": _cmd_holonomy,
    "expmap": _cmd_expmap,
    "moduli": _cmd_moduli,
}


def run(cfg):
    """Dispatch a validated RunConfig; returns the process exit code."""
    errors = validate_config(cfg)
    if errors:
        raise UsageError("; ".join(str(e) for e in errors))
    return _DISPATCH[cfg.command](cfg)


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        cfg = _merge_config(args)
        return run(cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NonexistenceError as exc:
        print(f"no solution: {exc}", file=sys.stderr)
        return EXIT_NONEXISTENCE
    except (NumericalError, MinlagError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def main_entry():
    raise SystemExit(main())


if __name__ == "__main__":
    main_entry()
