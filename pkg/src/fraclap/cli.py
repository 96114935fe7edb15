"""Command-line front end: ``fraclap {kernel,distance,ortho,green,disperse}``.

Every command writes CSV (17 significant digits, LF line endings) to ``--out``
or standard output.  With ``--out`` a sidecar ``<stem>.manifest.txt`` records
the resolved settings as ``key=value`` lines, which ``--config`` accepts back,
plus version, timestamp and per-run status as ``#`` comment lines.

Precedence of settings: explicit flag > FRACLAP_SEED (seed only) > config file > default.
Exit codes: 0 ok, 2 argument/domain error, 3 numerical-contract failure.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import io
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import DomainError, NumericalContractError
from .experiments import ORTHO_GRID_C, ExperimentConfig, run_distance_sweep, run_ortho_sweep
from .green import default_quad_for, dispersion_exponent, green_profile
from .kernel import check_order, kernel_table
from .lattice import LatticeVector, derive_seed
from .spectral import orthogonality_check

log = logging.getLogger("fraclap")

EXIT_OK, EXIT_DOMAIN, EXIT_CONTRACT = 0, 2, 3
SEED_ENV = "FRACLAP_SEED"


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), ".17g")


def float_list(text: str) -> list:
    try:
        return [float(tok) for tok in str(text).split(",") if tok.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def seed_value(text: str) -> int:
    text = str(text).strip()
    try:
        v = int(text, 16) if text.lower().startswith("0x") else int(text, 10)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}") from exc
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


class _UsageError(Exception):
    pass


# default values per command; flags are parsed with SUPPRESS so we can layer sources
DEFAULTS = {
    "kernel": dict(s=None, M=None, both_signs=False),
    "distance": dict(
        s=[0.9, 1.0, 1.1], c=[0.0001], M=300, iters=1000, realizations=10, seed=0,
        phi_site=0, v_M=None, orth="lanczos", reorth=False, site_cap=None,
    ),
    "ortho": dict(
        s=[0.9, 1.0, 1.1], c=list(ORTHO_GRID_C), M=100, n=150, seed=0, phi_site=0, unit_basis=False,
    ),
    "green": dict(s=None, t=[1.0], xmax=None, quad=4096),
    "disperse": dict(s=None, tmin=10.0, tmax=1000.0, points=10, xmax=None, quad=None),
}
REQUIRED = {"kernel": ("s", "M"), "green": ("s", "xmax"), "disperse": ("s",)}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fraclap", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--out", default=argparse.SUPPRESS, help="CSV path (default: stdout)")
        p.add_argument("--config", default=argparse.SUPPRESS, help="flat key=value settings file")

    p = sub.add_parser("kernel", help="tabulate K_s(m) and P_s(m)", argument_default=argparse.SUPPRESS)
    p.add_argument("--s", type=float)
    p.add_argument("--M", type=int)
    p.add_argument("--both-signs", dest="both_signs", action="store_true")
    common(p)

    p = sub.add_parser("distance", help="averaged spectral distance traces", argument_default=argparse.SUPPRESS)
    p.add_argument("--s", type=float_list)
    p.add_argument("--c", type=float_list)
    p.add_argument("--M", type=int)
    p.add_argument("--iters", type=int)
    p.add_argument("--realizations", type=int)
    p.add_argument("--seed", type=seed_value)
    p.add_argument("--phi-site", dest="phi_site", type=int)
    p.add_argument("--v-M", dest="v_M", type=int)
    p.add_argument("--orth", choices=("lanczos", "full"))
    p.add_argument("--reorth", action="store_true")
    p.add_argument("--site-cap", dest="site_cap", type=int)
    common(p)

    p = sub.add_parser("ortho", help="Gram-Schmidt orthogonality loss Q", argument_default=argparse.SUPPRESS)
    p.add_argument("--s", type=float_list)
    p.add_argument("--c", type=float_list)
    p.add_argument("--M", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--seed", type=seed_value)
    p.add_argument("--phi-site", dest="phi_site", type=int)
    p.add_argument("--unit-basis", dest="unit_basis", action="store_true", help=argparse.SUPPRESS)
    common(p)

    p = sub.add_parser("green", help="lattice Green's function profiles", argument_default=argparse.SUPPRESS)
    p.add_argument("--s", type=float)
    p.add_argument("--t", type=float_list)
    p.add_argument("--xmax", type=int)
    p.add_argument("--quad", type=int)
    common(p)

    p = sub.add_parser("disperse", help="half-mass width and dispersion exponent", argument_default=argparse.SUPPRESS)
    p.add_argument("--s", type=float)
    p.add_argument("--tmin", type=float)
    p.add_argument("--tmax", type=float)
    p.add_argument("--points", type=int)
    p.add_argument("--xmax", type=int)
    p.add_argument("--quad", type=int)
    common(p)
    return parser


_BOOL_KEYS = {"both_signs", "reorth", "unit_basis"}
_META_KEYS = {"command", "out"}


def read_config(path: str) -> dict:
    """Parse ``key=value`` lines; blank lines and ``#`` comments are skipped."""
    entries = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise DomainError(f"{path}:{lineno}: expected key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        entries[key.replace("-", "_")] = value
    return entries


def _config_tokens(command: str, entries: dict) -> list:
    tokens = []
    for key, value in entries.items():
        if key in _META_KEYS:
            continue
        if key not in DEFAULTS[command]:
            raise DomainError(f"unknown setting {key!r} for command {command!r}")
        flag = "--" + key.replace("_", "-")
        if key in _BOOL_KEYS:
            if value.lower() in ("1", "true", "yes", "on"):
                tokens.append(flag)
        elif value.lower() != "none":
            tokens += [flag, value]
    return tokens


def resolve(argv) -> tuple:
    """Parse argv into (command, settings, out_path) applying the precedence rules."""
    parser = build_parser()
    ns = parser.parse_args(argv)
    command = ns.command
    settings = dict(DEFAULTS[command])
    out = getattr(ns, "out", None)
    config_path = getattr(ns, "config", None)
    if config_path is not None:
        entries = read_config(config_path)
        if "command" in entries and entries["command"] != command:
            raise DomainError(f"config is for command {entries['command']!r}, not {command!r}")
        cfg_ns = parser.parse_args([command] + _config_tokens(command, entries))
        settings.update({k: v for k, v in vars(cfg_ns).items() if k in settings})
        if out is None and entries.get("out") not in (None, "-", "None"):
            out = entries["out"]
    if "seed" in settings and os.environ.get(SEED_ENV):
        try:
            settings["seed"] = seed_value(os.environ[SEED_ENV])
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise DomainError(f"{SEED_ENV} is not a valid seed") from exc
    settings.update({k: v for k, v in vars(ns).items() if k in settings})
    for key in REQUIRED.get(command, ()):
        if settings[key] is None:
            raise DomainError(f"--{key} is required for {command}")
    return command, settings, out, ns.verbose


class Run:
    """Collects CSV text and manifest lines for one command invocation."""

    def __init__(self, command: str, settings: dict, out):
        self.command = command
        self.settings = settings
        self.out = out
        self.buf = io.StringIO(newline="")
        self.notes = []

    def row(self, *fields):
        self.buf.write(",".join(f if isinstance(f, str) else fmt(f) for f in fields) + "\n")

    def note(self, text: str):
        self.notes.append(text)

    def manifest_text(self) -> str:
        lines = [f"command={self.command}"]
        for key, value in self.settings.items():
            if isinstance(value, list):
                value = ",".join(fmt(v) for v in value)
            elif isinstance(value, bool):
                value = "true" if value else "false"
            elif isinstance(value, float):
                value = fmt(value)
            lines.append(f"{key}={value}")
        lines.append(f"out={self.out if self.out else '-'}")
        lines.append(f"# version={__version__}")
        lines.append(f"# timestamp={_dt.datetime.now(_dt.timezone.utc).isoformat()}")
        lines += [f"# {n}" for n in self.notes]
        return "\n".join(lines) + "\n"

    def emit(self):
        data = self.buf.getvalue()
        if not self.out or self.out == "-":
            sys.stdout.write(data)
            sys.stdout.flush()
            return
        path = Path(self.out)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(data)
        with open(manifest_path(path), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.manifest_text())


def manifest_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.stem + ".manifest.txt")


def cmd_kernel(run: Run):
    st = run.settings
    table = kernel_table(st["s"], st["M"])
    run.row("m", "K", "P")
    ms = range(-table.M, table.M + 1) if st["both_signs"] else range(1, table.M + 1)
    for m in ms:
        k = table[m]
        run.row(m, k, k / table.A)
    run.note(f"A={fmt(table.A)}")


def cmd_distance(run: Run):
    st = run.settings
    cfg = ExperimentConfig(
        s_list=tuple(st["s"]), c_list=tuple(st["c"]), M=st["M"], n_max=st["iters"],
        realizations=st["realizations"], base_seed=st["seed"], phi_site=st["phi_site"],
        v_M=st["v_M"], orth=st["orth"], reorthogonalize=st["reorth"], site_cap=st["site_cap"],
        output_path=run.out or "-",
    )
    run.row("s", "c", "n", "D_mean", "D_min", "D_max", "realizations", "status")
    for cell in run_distance_sweep(cfg):
        status = "+".join(sorted(set(cell.statuses)))
        avg = cell.average
        for n in avg.n:
            run.row(cell.s, cell.c, int(n), avg.mean[n], avg.min[n], avg.max[n], avg.realizations, status)
        for r, (seed, stat, cl, cp) in enumerate(zip(cell.seeds, cell.statuses, cell.clamped, cell.clipped)):
            run.note(f"run s={fmt(cell.s)} c={fmt(cell.c)} r={r} seed={seed} status={stat} clamped={cl} capped={cp}")


def cmd_ortho(run: Run):
    st = run.settings
    run.row("s", "c", "M", "n", "Q")
    if st["unit_basis"]:
        basis = [LatticeVector.delta(i) for i in range(st["n"])]
        for s in st["s"]:
            for c in st["c"]:
                check_order(s)
                run.row(s, c, st["M"], st["n"], orthogonality_check(basis).Q)
        run.note("test mode: injected standard unit-vector basis")
        return
    seed = derive_seed(st["seed"], 0)
    for s, c, Q, status, count in run_ortho_sweep(st["s"], st["c"], st["M"], st["n"], seed, st["phi_site"]):
        run.row(s, c, st["M"], count, Q)
        run.note(f"run s={fmt(s)} c={fmt(c)} seed={seed} status={status} vectors={count}")


def cmd_green(run: Run):
    st = run.settings
    run.row("x", "t", "G")
    for t in st["t"]:
        prof = green_profile(st["s"], t, st["xmax"], st["quad"])
        for x, g in zip(prof.x, prof.values):
            run.row(int(x), t, g)
        run.note(f"t={fmt(t)} mass={fmt(prof.mass)}")


def default_xmax(s: float, tmax: float) -> int:
    return max(100, int(math.ceil(50.0 * tmax ** (1.0 / (2.0 * s)))))


def cmd_disperse(run: Run):
    st = run.settings
    s = check_order(st["s"])
    if st["points"] < 5 or not 0 < st["tmin"] < st["tmax"]:
        raise DomainError("need --points >= 5 and 0 < tmin < tmax")
    if st["xmax"] is None:
        st["xmax"] = default_xmax(s, st["tmax"])
    if st["quad"] is None:
        st["quad"] = default_quad_for(st["xmax"])
    times = np.geomspace(st["tmin"], st["tmax"], st["points"])
    fit = dispersion_exponent(s, times, st["xmax"], st["quad"])
    run.row("t", "width", "width_sq")
    for t, w in zip(fit.times, fit.widths):
        run.row(t, w, w * w)
    run.row("exponent", fit.exponent)


COMMANDS = {
    "kernel": cmd_kernel,
    "distance": cmd_distance,
    "ortho": cmd_ortho,
    "green": cmd_green,
    "disperse": cmd_disperse,
}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        command, settings, out, verbose = resolve(argv)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except (_UsageError, DomainError, OSError) as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_DOMAIN
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, format="%(levelname)s %(message)s")
    run = Run(command, settings, out)
    try:
        COMMANDS[command](run)
    except DomainError as exc:
        print(f"fraclap {command}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except NumericalContractError as exc:
        print(f"fraclap {command}: numerical contract failed: {exc}", file=sys.stderr)
        return EXIT_CONTRACT
    run.emit()
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
