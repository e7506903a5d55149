"""Command-line entry point: ``fslab {surface,dimension,certify,markov,esc}``."""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .attractor import box_count, chaos_game, subdivision_mesh, write_csv, write_obj, write_pgm, write_table
from .cfs import cfs_constants, esc_violation_search, from_projected_x, lemma_A_constant
from .dimension import affinity_dimension, box_dimension_fit, closed_form_dimension
from .furstenberg import build_furstenberg, certificate_pipeline, project_1d
from .markov import BLOCK_ORDER, build_gd_ifs, chain_analysis, gh_group, return_counts, t_hat, transition_matrix
from .surface import SurfaceIFS, build_from_config, load_config

EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 2, 3
REPORT_SCHEMA_VERSION = 1


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# report serialization
# ---------------------------------------------------------------------------


def _encode(obj, indent=0):
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(_encode(v, indent + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _encode(v, indent + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, Fraction):
        return json.dumps(str(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x) or math.isinf(x):
            return json.dumps(str(x))
        return format(x, ".17g")
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist(), indent)
    return json.dumps(str(obj))


def dumps_report(report: dict) -> str:
    """Deterministic JSON text with every float at 17 significant digits."""
    return _encode(report) + "\n"


def write_report(report: dict, out: Path, name: str, started: float) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{name}.json"
    path.write_text(dumps_report(report))
    meta = {
        "written_at": datetime.now(timezone.utc).isoformat(),
        "wall_clock_seconds": time.perf_counter() - started,
    }
    (out / f"{name}.meta.json").write_text(dumps_report(meta))
    return path


# ---------------------------------------------------------------------------
# shared option handling
# ---------------------------------------------------------------------------


def resolve_workers(flag) -> int:
    if flag is not None:
        return max(1, int(flag))
    env = os.environ.get("FSL_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"FSL_WORKERS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def parse_scales(text):
    if text is None:
        return None
    try:
        vals = [float(eval_scale(t)) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad --scales value: {exc}") from None
    return vals


def eval_scale(token: str) -> float:
    """A float, or a power written like 3^-4."""
    token = token.strip()
    if "^" in token:
        base, exp = token.split("^", 1)
        return float(base) ** float(exp)
    return float(token)


def read_config(path) -> dict:
    if path is None:
        raise ConfigError("--config is required")
    try:
        cfg = load_config(path)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    return cfg


def option(args, cfg, name, default):
    val = getattr(args, name, None)
    if val is not None:
        return val
    return cfg.get("options", {}).get(name, default)


def inputs_echo(cfg: dict) -> dict:
    return json.loads(json.dumps(cfg))


def default_scales(ifs: SurfaceIFS) -> list:
    if ifs.construction == "massopust":
        return [float(ifs.N) ** -k for k in range(2, 7)]
    return [2.0**-k for k in range(2, 7)]


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_surface(args, started) -> dict:
    cfg = read_config(args.config)
    ifs = build_from_config(cfg)
    depth = int(option(args, cfg, "depth", 4))
    mesh = subdivision_mesh(ifs, depth)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    obj = write_obj(mesh, out / "surface.obj")
    pgm = write_pgm(mesh, out / "surface.pgm", int(option(args, cfg, "pgm_size", 256)))
    report = {
        "schema": REPORT_SCHEMA_VERSION,
        "tool": f"fslab {__version__}",
        "command": "surface",
        "inputs": inputs_echo(cfg),
        "depth": depth,
        "faces": len(mesh),
        "files": [obj.name, pgm.name],
    }
    write_report(report, out, "report", started)
    return report


def cmd_dimension(args, started) -> dict:
    cfg = read_config(args.config)
    ifs = build_from_config(cfg)
    seed = int(option(args, cfg, "seed", 0))
    samples = int(option(args, cfg, "samples", 2_000_000))
    scales = parse_scales(args.scales) or cfg.get("options", {}).get("scales") or default_scales(ifs)
    workers = resolve_workers(args.workers)
    sol = affinity_dimension(ifs)
    if ifs.construction == "massopust":
        formula = closed_form_dimension("massopust", ifs.s, ifs.N)
    else:
        formula = closed_form_dimension("geronimo-hardin", float(ifs.s[0]))
    cloud = chaos_game(ifs.maps, None, samples, seed=seed, workers=workers)
    table = box_count(cloud, scales)
    slope, stderr = box_dimension_fit(table)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_table(table, out / "occupancy.csv")
    report = {
        "schema": REPORT_SCHEMA_VERSION,
        "tool": f"fslab {__version__}",
        "command": "dimension",
        "inputs": inputs_echo(cfg),
        "seed": seed,
        "samples": samples,
        "t0": sol.t0,
        "r1": sol.r1,
        "r2": sol.r2,
        "branch": sol.branch,
        "closed_form": formula,
        "solver_minus_formula": sol.t0 - formula,
        "occupancy": [{"delta": d, "count": c} for d, c in table.rows()],
        "box_slope": slope,
        "box_slope_stderr": stderr,
        "abs_slope_minus_t0": abs(slope - sol.t0),
    }
    write_report(report, out, "report", started)
    return report


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def cmd_certify(args, started) -> dict:
    cfg = read_config(args.config)
    ifs = build_from_config(cfg)
    verdict = certificate_pipeline(ifs)
    report = {
        "schema": REPORT_SCHEMA_VERSION,
        "tool": f"fslab {__version__}",
        "command": "certify",
        "inputs": inputs_echo(cfg),
        "verdict": verdict.status,
        "t0": verdict.t0,
        "trace": _plain(verdict.trace),
    }
    write_report(report, Path(args.out), "report", started)
    return report


def cmd_markov(args, started) -> dict:
    n_max = int(args.n_max if args.n_max is not None else 12)
    if args.config:
        raise ConfigError("markov takes no construction config")
    group = gh_group()
    P = transition_matrix(group, BLOCK_ORDER)
    chain = chain_analysis(P)
    counts = return_counts(group, n_max)
    gd = build_gd_ifs(group)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    labels = [f"Q{k + 1}" for k in BLOCK_ORDER]
    write_csv(out / "group_table.csv", ["row"] + [f"Q{k + 1}" for k in range(12)],
              ([f"Q{i + 1}"] + [f"Q{j + 1}" for j in row] for i, row in enumerate(group.table)))
    write_csv(out / "transition.csv", ["state"] + labels, ([lab] + [str(x) for x in row] for lab, row in zip(labels, P)))
    write_csv(out / "R.csv", ["state"] + labels[:6], ([lab] + [str(x) for x in row] for lab, row in zip(labels, chain.R)))
    write_csv(out / "return_counts.csv", ["n", "N_n", "bound_16n_over_12", "holds"],
              ([n, c, str(Fraction(16**n, 12)), h] for n, (c, h) in enumerate(zip(counts.counts, counts.bound_holds), 1)))
    s = float(args.s) if args.s is not None else 0.82
    report = {
        "schema": REPORT_SCHEMA_VERSION,
        "tool": f"fslab {__version__}",
        "command": "markov",
        "group_order": group.order,
        "period": chain.period,
        "P2_block_diagonal": chain.block_diagonal,
        "P_bipartite": chain.bipartite,
        "R": [[str(x) for x in row] for row in chain.R],
        "R_power_converged_at": chain.converged_at,
        "R_power_max_deviation": chain.max_deviation,
        "return_counts": list(counts.counts),
        "brute_force_counts": list(counts.brute_force),
        "brute_force_agreement": "ok" if counts.agree else "MISMATCH",
        "N0": counts.N0,
        "t_hat": {"s": s, "values": [t_hat(n, s) for n in range(1, n_max + 1)]},
        "gd_ifs": {
            "out_degree": list(gd.out_degree),
            "in_degree": list(gd.in_degree),
            "distinct_offsets": gd.distinct_offsets,
            "offsets": [[float(e.offset) for e in gd.edges if e.source == l] for l in range(len(gd.vertices))],
            "witnesses": [list(map(str, w)) for w in gd.witnesses],
        },
    }
    write_report(report, out, "report", started)
    return report


def cmd_esc(args, started) -> dict:
    cfg = read_config(args.config)
    ifs = build_from_config(cfg)
    if ifs.construction != "massopust":
        raise ConfigError("esc needs a massopust construction")
    n = int(args.depth if args.depth is not None else cfg.get("options", {}).get("word_length", 3))
    b = float(option(args, cfg, "slope", 10.0))
    budget = int(option(args, cfg, "budget", 9**6))
    seed = int(option(args, cfg, "seed", 0))
    fifs = build_furstenberg(ifs)
    sys_ = from_projected_x(project_1d(fifs, "X", ifs))
    res = esc_violation_search(sys_, n, b, budget, seed)
    lemma = lemma_A_constant(sys_)
    B, D = cfs_constants(sys_)
    report = {
        "schema": REPORT_SCHEMA_VERSION,
        "tool": f"fslab {__version__}",
        "command": "esc",
        "inputs": inputs_echo(cfg),
        "depth": n,
        "slope": b,
        "classes": {"I0": list(sys_.I0), "I1": list(sys_.I1), "I2": list(sys_.I2)},
        "B": B,
        "D": D,
        "lemma_A": {"A": lemma.A, "ok": lemma.ok},
        "exhaustive": res.exhaustive,
        "eligible_pairs": res.eligible_pairs,
        "checked_pairs": res.checked_pairs,
        "coverage": res.coverage,
        "threshold": res.threshold,
        "violations": [{"i": list(u), "j": list(v), "distance": d} for u, v, d in res.violations],
    }
    write_report(report, Path(args.out), "report", started)
    return report


COMMANDS = {
    "surface": cmd_surface,
    "dimension": cmd_dimension,
    "certify": cmd_certify,
    "markov": cmd_markov,
    "esc": cmd_esc,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fslab", description=__doc__)
    p.add_argument("--version", action="version", version=f"fslab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON construction config")
        sp.add_argument("--out", default="out", help="output directory")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--workers", type=int)
        sp.add_argument("--depth", type=int, help="mesh depth (surface) or word length (esc)")
        sp.add_argument("--samples", type=int)
        sp.add_argument("--scales", help='comma list such as "3^-2,3^-3,3^-4"')
        if name == "markov":
            sp.add_argument("--n-max", dest="n_max", type=int)
            sp.add_argument("--s", type=float, help="scaling factor for the t_hat column")
        if name == "esc":
            sp.add_argument("--slope", type=float)
            sp.add_argument("--budget", type=int)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    started = time.perf_counter()
    try:
        report = COMMANDS[args.command](args, started)
    except OSError as exc:
        print(f"fslab: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"fslab: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    summary = {k: report[k] for k in ("command", "verdict", "t0", "box_slope", "group_order") if k in report}
    if "violations" in report:
        summary["violation_count"] = len(report["violations"])
    print(dumps_report(summary), end="")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
