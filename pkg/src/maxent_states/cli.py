"""Command-line front end.

Every output file starts with the tool version and the fully resolved
configuration; passing such a file back through ``--config`` reruns it.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .distributions import discretize, induced_subsystem_distribution, load_tabulated
from .ensemble import build_ensemble
from .entropy import (
    DEFAULT_N_A_VALUES,
    delta_s_average_exact,
    default_delta_grid,
    figure1_sweep,
    narayana,
    page_entropy,
    predicted_entropy,
)
from .fock_space import SystemPartition, spectral_density
from .sampler import MAX_SAMPLING_N, monte_carlo_entropy
from .scramble import CatProductSpec, eth_deviation_experiment

EXIT_OK, EXIT_CONFIG, EXIT_RESOURCE, EXIT_IO = 0, 2, 3, 4

CONFIG_PREFIX = "# config: "

DEFAULTS = {
    "curves": {"n_a_values": list(DEFAULT_N_A_VALUES), "delta": None, "delta_min": 0.05, "delta_max": 4.0,
               "points": 200, "kappa": [0.0]},
    "sample": {"n": 12, "na": None, "dist": "spectral", "samples": 200, "seed": 0, "workers": 1},
    "scramble": {"n": None, "na": None, "dist": "cat:3,4", "samples": 200, "seed": 0, "mode": "haar",
                 "workers": 1},
    "induced": {"n": 12, "na": None, "dist": "spectral"},
    "narayana": {"r": 8},
}
COMMON = {"format": "csv", "out": None}


class ConfigError(ValueError):
    pass


class ResourceRefusal(RuntimeError):
    pass


def parse_dist(text: str, n: int):
    """``gaussian:qbar,dq | micro:q0 | flat | spectral | cat:M,L | table:path``."""
    kind, _, arg = text.partition(":")
    spectral = spectral_density(n)
    try:
        if kind == "gaussian":
            q_bar, dq = (float(x) for x in arg.split(","))
            return discretize("gaussian", spectral, q_bar=q_bar, delta_q=dq)
        if kind == "micro":
            return discretize("microcanonical", spectral, q0=float(arg))
        if kind == "flat":
            return discretize("flat", spectral)
        if kind == "spectral":
            return discretize("spectral", spectral)
        if kind == "cat":
            m, l = (int(x) for x in arg.split(","))
            return discretize("cat_product", spectral, blocks=m, block_size=l)
        if kind == "table":
            p = load_tabulated(arg)
            if p.n != n:
                raise ConfigError(f"table {arg} is for N={p.n}, not N={n}")
            return p
    except OSError:
        raise
    except ValueError as exc:
        raise ConfigError(f"--dist {text}: {exc}") from exc
    raise ConfigError(f"unknown distribution {text!r}")


def parse_range(text, n: int) -> list[int]:
    """Subsystem sizes from ``"3"``, ``"1..11"`` or ``"2,4,6"``; ``None`` means every cut."""
    if text is None:
        return list(range(1, n))
    if isinstance(text, int):
        return [text]
    text = str(text)
    try:
        if ".." in text:
            lo, hi = (int(x) for x in text.split(".."))
            return list(range(lo, hi + 1))
        return [int(x) for x in text.split(",")]
    except ValueError as exc:
        raise ConfigError(f"bad subsystem size list {text!r}") from exc


def parse_floats(text) -> list[float]:
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    return [float(x) for x in str(text).split(",")]


def parse_mode(text: str) -> tuple[str, int]:
    if text == "haar":
        return "per_sector_haar", 0
    kind, _, steps = text.partition(":")
    if kind == "brickwork" and steps.isdigit():
        return "brickwork_conserving", int(steps)
    raise ConfigError(f"--mode must be 'haar' or 'brickwork:STEPS', got {text!r}")


def _partition(n: int, n_a: int) -> SystemPartition:
    try:
        return SystemPartition(n, n_a)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def cmd_curves(cfg: dict) -> tuple[list[str], list[list]]:
    n_a = parse_floats(cfg["n_a_values"])
    if cfg["delta"] is not None:
        grid = np.array(parse_floats(cfg["delta"]))
    else:
        if cfg["points"] < 2 or not 0 <= cfg["delta_min"] < cfg["delta_max"]:
            raise ConfigError("invalid delta grid")
        grid = default_delta_grid(cfg["points"], cfg["delta_min"], cfg["delta_max"])
    rows = []
    try:
        for kappa in parse_floats(cfg["kappa"]):
            rows.extend(figure1_sweep(n_a, grid, kappa).tolist())
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return ["n_a", "delta", "kappa", "delta_s"], rows


def cmd_sample(cfg: dict) -> tuple[list[str], list[list]]:
    n = cfg["n"]
    if n > MAX_SAMPLING_N:
        raise ResourceRefusal(f"sampling needs 2^N amplitudes; refusing N={n} > {MAX_SAMPLING_N}")
    if cfg["samples"] < 2:
        raise ConfigError("--samples must be at least 2")
    p = parse_dist(cfg["dist"], n)
    ens = build_ensemble(p, spectral_density(n))
    rows = []
    for n_a in parse_range(cfg["na"], n):
        cut = _partition(n, n_a)
        est = monte_carlo_entropy(ens, cut, cfg["samples"], cfg["seed"], cfg["workers"])
        pred = predicted_entropy(p, cut).total
        rows.append([n, n_a, cfg["dist"], est.samples, cfg["seed"], est.mean, est.stderr, pred, page_entropy(cut)])
    return ["n", "n_a", "distribution", "samples", "seed", "mean", "stderr", "prediction", "page_value"], rows


def cmd_scramble(cfg: dict) -> tuple[list[str], list[list]]:
    kind, _, arg = cfg["dist"].partition(":")
    if kind != "cat":
        raise ConfigError("scramble needs --dist cat:M,L")
    try:
        m, l = (int(x) for x in arg.split(","))
        spec = CatProductSpec(m, l)
    except ValueError as exc:
        raise ConfigError(f"--dist {cfg['dist']}: {exc}") from exc
    n = cfg["n"] if cfg["n"] is not None else spec.n
    if n != spec.n:
        raise ConfigError(f"M*L = {spec.n} does not match --n {n}")
    if n > MAX_SAMPLING_N:
        raise ResourceRefusal(f"refusing N={n} > {MAX_SAMPLING_N}")
    mode, steps = parse_mode(cfg["mode"])
    sizes = parse_range(cfg["na"] if cfg["na"] is not None else n // 2, n)
    rows = []
    for n_a in sizes:
        rec = eth_deviation_experiment(spec, _partition(n, n_a), cfg["samples"], cfg["seed"], mode, steps,
                                       cfg["workers"]).as_dict()
        rows.append([rec[c] for c in SCRAMBLE_COLUMNS])
    return list(SCRAMBLE_COLUMNS), rows


SCRAMBLE_COLUMNS = ("n", "n_a", "blocks", "block_size", "trials", "seed", "measured_mean", "measured_stderr",
                    "prediction", "average_prediction", "page_value", "initial_entropy", "charge_residual")


def cmd_induced(cfg: dict) -> tuple[list[str], list[list]]:
    n = cfg["n"]
    p = parse_dist(cfg["dist"], n)
    spectral = spectral_density(n)
    rows = []
    for n_a in parse_range(cfg["na"] if cfg["na"] is not None else n // 2, n):
        cut = _partition(n, n_a)
        p_a = induced_subsystem_distribution(p, spectral, cut)
        ds = delta_s_average_exact(p_a)
        omega_a = spectral_density(n_a).omega
        for k_a, (w, om) in enumerate(zip(p_a.table.tolist(), omega_a.tolist())):
            rows.append([n, n_a, k_a, k_a - n_a / 2, w, om, ds])
    return ["n", "n_a", "k_a", "q_a", "p_a", "omega_a", "delta_s_average"], rows


def cmd_narayana(cfg: dict) -> tuple[list[str], list[list]]:
    if cfg["r"] < 1:
        raise ConfigError("--r must be positive")
    rows = [[r, k, narayana(r, k)] for r in range(1, cfg["r"] + 1) for k in range(1, r + 1)]
    return ["r", "k", "narayana"], rows


COMMANDS = {"curves": cmd_curves, "sample": cmd_sample, "scramble": cmd_scramble,
            "induced": cmd_induced, "narayana": cmd_narayana}


def _fmt(x) -> str:
    if isinstance(x, np.generic):
        x = x.item()
    if isinstance(x, float):
        return repr(x) if math.isfinite(x) else str(x)
    return str(x)


def render(command: str, cfg: dict, columns: list[str], rows: list[list], fmt: str) -> str:
    header = {"tool": "maxent_states", "version": __version__, "command": command, "config": cfg}
    if fmt == "json":
        records = [dict(zip(columns, row)) for row in rows]
        return json.dumps({**header, "records": records}, indent=1) + "\n"
    buf = io.StringIO()
    buf.write(f"# tool: maxent_states {__version__}\n")
    buf.write(f"# command: {command}\n")
    buf.write(CONFIG_PREFIX + json.dumps(cfg, sort_keys=True) + "\n")
    if "seed" in cfg:
        buf.write(f"# seed: {cfg['seed']}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def read_config(path) -> dict:
    """Config from a JSON file, or the embedded config of a previous output (CSV or JSON)."""
    text = Path(path).read_text()
    for line in text.splitlines():
        if line.startswith(CONFIG_PREFIX):
            return json.loads(line[len(CONFIG_PREFIX):])
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: neither JSON nor an output file with an embedded config") from exc
    return doc.get("config", doc)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="maxent-states", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"maxent_states {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config or a previous output file; flags take precedence")
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"))
        return p

    p = common(sub.add_parser("curves", help="closed-form entropy deficit vs relative width"))
    p.add_argument("--n-a-values", help="comma-separated relative subsystem sizes")
    p.add_argument("--delta", help="explicit comma-separated delta values (overrides the grid)")
    p.add_argument("--delta-min", type=float)
    p.add_argument("--delta-max", type=float)
    p.add_argument("--points", type=int)
    p.add_argument("--kappa", help="comma-separated kappa values")

    for name, text in (("sample", "Monte Carlo entanglement entropy of maxent states"),
                       ("induced", "dump induced subsystem charge distributions"),
                       ("scramble", "scramble cat-product states and compare with maxent")):
        p = common(sub.add_parser(name, help=text))
        p.add_argument("--n", type=int)
        p.add_argument("--na", help="subsystem size: N_A, 'lo..hi' or 'a,b,c'")
        p.add_argument("--dist", help="gaussian:qbar,dq | micro:q0 | flat | spectral | cat:M,L | table:path")
        if name != "induced":
            p.add_argument("--samples", type=int)
            p.add_argument("--seed", type=int)
            p.add_argument("--workers", type=int)
        if name == "scramble":
            p.add_argument("--mode", help="haar | brickwork:STEPS")

    p = common(sub.add_parser("narayana", help="table of Narayana numbers"))
    p.add_argument("--r", type=int)
    return parser


def resolve(args: argparse.Namespace) -> tuple[dict, str, str | None]:
    cfg = dict(DEFAULTS[args.command])
    file_cfg = read_config(args.config) if args.config else {}
    unknown = set(file_cfg) - set(cfg) - set(COMMON)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    cfg.update({k: v for k, v in file_cfg.items() if k in cfg})
    for key in cfg:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    fmt = args.format or file_cfg.get("format") or COMMON["format"]
    out = args.out or file_cfg.get("out")
    return cfg, fmt, out


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg, fmt, out = resolve(args)
        columns, rows = COMMANDS[args.command](cfg)
        text = render(args.command, cfg, columns, rows, fmt)
        if out:
            Path(out).write_text(text)
        else:
            sys.stdout.write(text)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceRefusal as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
