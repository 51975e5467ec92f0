"""Command-line front end: ``sutherland eval | verify | compare-n2``.

Settings are layered: built-in defaults, then a JSON config file
(``--config``), then ``SUTHERLAND_*`` environment variables, then flags.

Exit codes: 0 success, 1 invalid configuration, 2 quadrature did not reach
the tolerance, 3 an identity or oracle comparison failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, field, fields
from typing import Optional

import numpy as np

from . import gz
from .errors import CoincidentCoordinates, Divergence, GridTooCoarse, SingularParameter
from .oracles import g_half_kernel_consistency, phi_n2_closed
from .quadrature import GridSpec, PhiIntegral, QmcPhiIntegral, gauge_factor
from .verify import run_identity_suite

EXIT_OK, EXIT_CONFIG, EXIT_GRID, EXIT_CHECK = 0, 1, 2, 3
MODES = ("eval", "verify", "compare-n2")
FORMATS = ("json", "csv")
METHODS = ("dense", "qmc")
FAULTS = ("coeff-b",)
ENV_PREFIX = "SUTHERLAND_"

# g x lambda-gap x x-gap grid used by ``compare-n2 --acceptance-grid``
GRID27_G = (0.5, 0.75, 1.5)
GRID27_LAMBDA_GAP = (0.6, 1.6, 3.0)
GRID27_X_GAP = (0.5, 1.0, 2.0)

EVAL_COLUMNS = ("x", "phi_re", "phi_im", "psi_re", "psi_im", "error_estimate", "nodes", "level",
                "closed_re", "closed_im")
VERIFY_COLUMNS = ("identity", "n", "cases", "max_residual", "tol", "exact", "passed", "seconds")
COMPARE_COLUMNS = ("g", "lambda", "x", "status", "quad_re", "quad_im", "closed_re", "closed_im",
                   "ratio_re", "ratio_im", "deviation", "g_half_deviation")


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass
class RunConfig:
    mode: str = "eval"
    n: Optional[int] = None
    g: float = 1.0
    lam: list = field(default_factory=list)
    x: list = field(default_factory=list)
    grid_halfwidth: Optional[float] = None
    grid_step: float = 0.25
    tol: float = 1e-8
    max_levels: int = 4
    method: str = "dense"
    qmc_points: int = 2**16
    output_format: str = "json"
    threads: int = 1
    seed: int = 0
    out: Optional[str] = None
    timing: bool = True
    acceptance_grid: bool = False
    inject_fault: Optional[str] = None

    def public(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        d.pop("inject_fault")
        return d


# -- parsing -----------------------------------------------------------------

def _floats(text, name):
    if isinstance(text, (list, tuple)):
        items = text
    else:
        items = [s for s in str(text).replace(" ", "").split(",") if s]
    try:
        return [float(v) for v in items]
    except (TypeError, ValueError):
        raise ConfigError(name, f"cannot parse {text!r} as comma-separated reals") from None


def _points(text, name="x"):
    if isinstance(text, (list, tuple)):
        return [_floats(p, name) for p in text]
    return [_floats(p, name) for p in str(text).split(";") if p.strip()]


def _bool(text, name):
    v = str(text).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(name, f"expected a boolean, got {text!r}")


_CONVERTERS = {
    "n": lambda v, k: int(v),
    "g": lambda v, k: float(v),
    "lam": _floats,
    "x": _points,
    "grid_halfwidth": lambda v, k: None if v is None else float(v),
    "grid_step": lambda v, k: float(v),
    "tol": lambda v, k: float(v),
    "max_levels": lambda v, k: int(v),
    "method": lambda v, k: str(v),
    "qmc_points": lambda v, k: int(v),
    "output_format": lambda v, k: str(v),
    "threads": lambda v, k: int(v),
    "seed": lambda v, k: int(v),
    "out": lambda v, k: None if v in (None, "") else str(v),
    "timing": _bool,
    "acceptance_grid": _bool,
    "mode": lambda v, k: str(v),
    "inject_fault": lambda v, k: v,
}

# names used in config files, environment variables and messages
_EXTERNAL = {"lam": "lambda", "output_format": "format"}


def _external(name):
    return _EXTERNAL.get(name, name)


def _apply(cfg: RunConfig, values: dict) -> None:
    for key, raw in values.items():
        if raw is None:
            continue
        try:
            setattr(cfg, key, _CONVERTERS[key](raw, _external(key)))
        except ConfigError:
            raise
        except (TypeError, ValueError):
            raise ConfigError(_external(key), f"invalid value {raw!r}") from None


def _from_file(path) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"{path} is not valid JSON: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError("config", "top level must be an object")
    inverse = {v: k for k, v in _EXTERNAL.items()}
    known = {f.name for f in fields(RunConfig)} - {"inject_fault"}
    out = {}
    for key, value in data.items():
        name = inverse.get(key, key).replace("-", "_")
        if name not in known:
            raise ConfigError(key, "unknown config key")
        out[name] = value
    return out


def _from_env(environ) -> dict:
    out = {}
    for f in fields(RunConfig):
        if f.name in ("mode", "inject_fault"):
            continue
        key = ENV_PREFIX + _external(f.name).upper()
        if key in environ:
            out[f.name] = environ[key]
    return out


def validate(cfg: RunConfig) -> RunConfig:
    if cfg.mode not in MODES:
        raise ConfigError("mode", f"must be one of {MODES}")
    if cfg.output_format not in FORMATS:
        raise ConfigError("format", f"must be one of {FORMATS}")
    if cfg.method not in METHODS:
        raise ConfigError("method", f"must be one of {METHODS}")
    if not (cfg.g > 0 and math.isfinite(cfg.g)):
        raise ConfigError("g", "coupling must be positive")
    if not (cfg.tol > 0):
        raise ConfigError("tol", "must be positive")
    if cfg.threads < 0:
        raise ConfigError("threads", "must be >= 0 (0 means all cores)")
    if cfg.max_levels < 0:
        raise ConfigError("max_levels", "must be >= 0")
    if cfg.qmc_points < 2:
        raise ConfigError("qmc_points", "must be >= 2")
    if cfg.inject_fault not in (None,) + FAULTS:
        raise ConfigError("inject_fault", f"must be one of {FAULTS}")
    if cfg.grid_halfwidth is not None:
        try:
            GridSpec(cfg.grid_halfwidth, cfg.grid_step, 1)
        except ValueError as exc:
            raise ConfigError("grid_halfwidth", str(exc)) from None
    elif not cfg.grid_step > 0:
        raise ConfigError("grid_step", "must be positive")

    if cfg.mode == "verify":
        if cfg.n is not None and not 1 <= cfg.n <= 6:
            raise ConfigError("n", "verify runs ranks 1..6")
        return cfg
    if cfg.mode == "compare-n2":
        if cfg.n not in (None, 2):
            raise ConfigError("n", "compare-n2 needs n = 2")
        cfg.n = 2
        if cfg.acceptance_grid:
            return cfg
    if cfg.n is None:
        if not cfg.lam:
            raise ConfigError("lambda", "required (comma-separated imaginary parts)")
        cfg.n = len(cfg.lam)
    if cfg.n < 1:
        raise ConfigError("n", "must be >= 1")
    if len(cfg.lam) != cfg.n:
        raise ConfigError("lambda", f"expected {cfg.n} entries, got {len(cfg.lam)}")
    if not cfg.x:
        raise ConfigError("x", "at least one point is required")
    for p in cfg.x:
        if len(p) != cfg.n:
            raise ConfigError("x", f"point {p} has {len(p)} coordinates, expected {cfg.n}")
        if not all(math.isfinite(v) for v in p):
            raise ConfigError("x", f"point {p} is not finite")
    if not all(math.isfinite(v) for v in cfg.lam):
        raise ConfigError("lambda", "entries must be finite")
    return cfg


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sutherland", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode, helptext in (("eval", "evaluate Phi and Psi at points x"),
                           ("verify", "run the identity suite"),
                           ("compare-n2", "compare n = 2 quadrature with the closed form")):
        p = sub.add_parser(mode, help=helptext)
        p.add_argument("--config", help="JSON file mirroring the run configuration")
        p.add_argument("--n", type=int, help="rank (inferred from --lambda when omitted)")
        p.add_argument("--g", type=float, help="coupling g > 0")
        p.add_argument("--lambda", dest="lam", help="imaginary parts of lambda, comma separated")
        p.add_argument("--x", help='points "x1,x2;x1,x2;..."')
        p.add_argument("--grid-halfwidth", type=float, dest="grid_halfwidth")
        p.add_argument("--grid-step", type=float, dest="grid_step")
        p.add_argument("--tol", type=float)
        p.add_argument("--max-levels", type=int, dest="max_levels",
                       help="step halvings allowed to reach --tol")
        p.add_argument("--method", choices=METHODS, help="dense trapezoid or quasi-Monte Carlo")
        p.add_argument("--qmc-points", type=int, dest="qmc_points")
        p.add_argument("--format", dest="output_format", choices=FORMATS)
        p.add_argument("--threads", type=int, help="worker threads; 0 uses every core")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="write the table here instead of stdout")
        p.add_argument("--no-timing", dest="timing", action="store_const", const=False,
                       help="report wall_time as null so reruns are byte-identical")
        if mode == "compare-n2":
            p.add_argument("--acceptance-grid", dest="acceptance_grid", action="store_const",
                           const=True, help="use the fixed 27-point (g, lambda, x) grid")
        if mode == "verify":
            p.add_argument("--inject-fault", dest="inject_fault", choices=FAULTS,
                           help=argparse.SUPPRESS)
    return parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def load_config(argv=None, environ=None) -> RunConfig:
    args = build_parser().parse_args(argv)
    environ = os.environ if environ is None else environ
    cfg = RunConfig(mode=args.mode)
    if cfg.mode == "compare-n2":
        cfg.g, cfg.lam, cfg.x = 0.75, [0.8, -0.8], [[1.0, 0.0]]
    config_path = args.config or environ.get(ENV_PREFIX + "CONFIG")
    if config_path:
        _apply(cfg, _from_file(config_path))
    _apply(cfg, _from_env(environ))
    flags = {k: v for k, v in vars(args).items() if k not in ("mode", "config")}
    _apply(cfg, flags)
    return validate(cfg)


# -- commands ----------------------------------------------------------------

def _grid(cfg: RunConfig, n: int) -> GridSpec:
    if cfg.grid_halfwidth is not None:
        return GridSpec(cfg.grid_halfwidth, cfg.grid_step, 1)
    return GridSpec.for_tolerance(n, cfg.tol, cfg.grid_step, 1)


def _relative(err, value):
    return err / max(abs(value), 1e-300)


def cmd_eval(cfg: RunConfig):
    lam = 1j * np.array(cfg.lam, dtype=float)
    if cfg.method == "qmc":
        integral = QmcPhiIntegral(lam, cfg.g, points=cfg.qmc_points, seed=cfg.seed)
    else:
        integral = PhiIntegral(lam, cfg.g, _grid(cfg, cfg.n), threads=cfg.threads)
    rows, worst = [], 0.0
    for x in cfg.x:
        res = integral(x)
        while (cfg.method == "dense" and cfg.n > 1
               and _relative(res.error_estimate, res.value) > cfg.tol
               and len(integral.levels) <= cfg.max_levels):
            integral.add_level()
            res = integral(x)
        rel = _relative(res.error_estimate, res.value)
        if rel > cfg.tol:
            raise GridTooCoarse(f"x={x}: relative error estimate {rel:.3e} exceeds tol {cfg.tol:g}")
        worst = max(worst, rel)
        try:
            psi = gauge_factor(x, cfg.g) * res.value
        except CoincidentCoordinates:
            psi = 0j  # sinh^g of a zero gap
        closed = None
        if cfg.n == 2:
            try:
                closed = phi_n2_closed(lam[0], lam[1], cfg.g, x[0], x[1])
            except (ValueError, Divergence, SingularParameter):
                closed = None
        rows.append({
            "x": list(x),
            "phi_re": res.value.real, "phi_im": res.value.imag,
            "psi_re": psi.real, "psi_im": psi.imag,
            "error_estimate": res.error_estimate, "nodes": res.nodes,
            "level": max(0, len(getattr(integral, "levels", ())) - 1),
            "closed_re": None if closed is None else closed.real,
            "closed_im": None if closed is None else closed.imag,
        })
    return rows, {"max_residual": worst}, None


def cmd_verify(cfg: RunConfig):
    def corrupted_b(i, j, k, p, g):
        return gz.coeff_b(i, j, k, p, g) * (1 + gz._div(1, 1009))

    coeff_b = corrupted_b if cfg.inject_fault == "coeff-b" else None
    suite = run_identity_suite(n_max=cfg.n or 5, points=20, seed=cfg.seed, coeff_b=coeff_b)
    rows = [{
        "identity": c.name, "n": c.n, "cases": c.cases, "max_residual": c.max_residual,
        "tol": c.tol, "exact": c.exact, "passed": c.passed,
        "seconds": round(c.seconds, 3) if cfg.timing else None,
    } for c in suite.checks]
    worst = max((c.max_residual for c in suite.checks), default=0.0)
    failure = None
    bad = suite.first_failure
    if bad is not None:
        failure = f"identity {bad.name} failed at n={bad.n}: max residual {bad.max_residual:.3e}"
    return rows, {"max_residual": worst, "passed": suite.passed}, failure


def _compare_cases(cfg: RunConfig):
    if cfg.acceptance_grid:
        for g in GRID27_G:
            for lg in GRID27_LAMBDA_GAP:
                for xg in GRID27_X_GAP:
                    yield g, (lg / 2, -lg / 2), (xg / 2, -xg / 2)
    else:
        for x in cfg.x:
            yield cfg.g, tuple(cfg.lam), tuple(x)


def cmd_compare_n2(cfg: RunConfig):
    rows, worst, ratios = [], 0.0, []
    integrals, g_half = {}, {}
    for g, mu, x in _compare_cases(cfg):
        lam = (1j * mu[0], 1j * mu[1])
        row = {"g": g, "lambda": list(mu), "x": list(x), "status": "ok"}
        for key in COMPARE_COLUMNS[4:]:
            row[key] = None
        if g == 0.5:
            if mu not in g_half:
                g_half[mu] = g_half_kernel_consistency(lam).deviation
            row["g_half_deviation"] = g_half[mu]
        try:
            gauge_factor(x, g)
            closed = phi_n2_closed(lam[0], lam[1], g, x[0], x[1])
        except (ValueError, Divergence, SingularParameter) as exc:
            row["status"] = f"rejected: {exc}"
            rows.append(row)
            continue
        if (g, mu) not in integrals:
            integrals[g, mu] = PhiIntegral(lam, g, _grid(cfg, 2), threads=cfg.threads)
        quad = integrals[g, mu](x).value
        ratio = quad / closed
        dev = abs(ratio - 1)
        ratios.append(ratio)
        worst = max(worst, dev)
        row.update(quad_re=quad.real, quad_im=quad.imag, closed_re=closed.real,
                   closed_im=closed.imag, ratio_re=ratio.real, ratio_im=ratio.imag, deviation=dev)
        rows.append(row)
    spread = 0.0
    if ratios:
        mean = complex(np.mean(ratios))
        spread = max(abs(r / mean - 1) for r in ratios)
    summary = {"max_residual": worst, "ratio_spread": spread, "compared": len(ratios),
               "rejected": len(rows) - len(ratios)}
    failure = None
    if worst >= cfg.tol:
        bad = next(r for r in rows if r["deviation"] is not None and r["deviation"] >= cfg.tol)
        failure = (f"deviation {bad['deviation']:.3e} >= tol {cfg.tol:g} at g={bad['g']}, "
                   f"lambda={bad['lambda']}, x={bad['x']}")
    return rows, summary, failure


COMMANDS = {"eval": (cmd_eval, EVAL_COLUMNS), "verify": (cmd_verify, VERIFY_COLUMNS),
            "compare-n2": (cmd_compare_n2, COMPARE_COLUMNS)}


# -- output ------------------------------------------------------------------

def _cell(v):
    if v is None:
        return ""
    if isinstance(v, list):
        return ";".join(repr(float(t)) for t in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _json_safe(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, dict):
        return {k: _json_safe(t) for k, t in v.items()}
    if isinstance(v, list):
        return [_json_safe(t) for t in v]
    return v


def render(cfg: RunConfig, columns, rows, summary) -> str:
    if cfg.output_format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(row.get(c)) for c in columns])
        return buf.getvalue()
    doc = {"config": cfg.public(), "rows": rows, "summary": summary}
    return json.dumps(_json_safe(doc), indent=2) + "\n"


def main(argv=None, environ=None) -> int:
    try:
        cfg = load_config(argv, environ)
    except ConfigError as exc:
        print(f"sutherland: invalid {exc}", file=sys.stderr)
        return EXIT_CONFIG
    command, columns = COMMANDS[cfg.mode]
    start = time.perf_counter()
    try:
        rows, summary, failure = command(cfg)
    except GridTooCoarse as exc:
        print(f"sutherland: grid too coarse: {exc}", file=sys.stderr)
        return EXIT_GRID
    summary["wall_time"] = round(time.perf_counter() - start, 6) if cfg.timing else None
    text = render(cfg, columns, rows, summary)
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if failure:
        print(f"sutherland: {failure}", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
