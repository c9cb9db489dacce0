"""Command-line entry point: ``python -m nlcevqe <command> [options]``.

Every output file starts with the resolved configuration.  CSV files carry
it as ``# key = value`` lines, JSON files under ``"config"``.  Such a file
can be passed back with ``--config`` to rerun the same job.

Exit codes: 0 success, 2 usage error, 3 numerical failure (any failure of
the eigensolver, or non-converged optimizations under ``--strict``).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from .lattice import Cluster, build_plan
from .model import build_hamiltonian
from .nlce import LayerRule, run_nlce
from .noise import SCALINGS, noise_rows_to_csv, scaling_study
from .reference import (
    ed_finite_size_check,
    ed_ground_state,
    exact_chain_energy_per_site,
    load_reference_table,
    shipped_square_reference,
)
from .series import lattice_series, pade_table
from .vqe import METHODS, OptimizerConfig, SweepRecord, records_to_csv, solve_cluster

OUTPUT_ENV = "NLCEVQE_OUTPUT_DIR"
LATTICES = ("chain", "square")
COMMANDS = ("clusters", "solve", "nlce", "noise", "oracle")
# keys left out of the embedded configuration (they do not change results)
NOT_EMBEDDED = {"config", "out", "verbose"}

log = logging.getLogger("nlcevqe")


class UsageError(Exception):
    pass


class NumericalFailure(Exception):
    pass


def parse_grid(text: str) -> np.ndarray:
    """``start:stop:step`` with the stop included, or a comma list."""
    if ":" in text:
        try:
            start, stop, step = (float(x) for x in text.split(":"))
        except ValueError:
            raise UsageError(f"grid must be start:stop:step, got {text!r}")
        if step <= 0 or stop < start:
            raise UsageError("grid needs step > 0 and stop >= start")
        n = int(round((stop - start) / step))
        return np.round(start + step * np.arange(n + 1), 12)
    try:
        return np.array(sorted(float(x) for x in text.split(",")))
    except ValueError:
        raise UsageError(f"cannot parse grid {text!r}")


def parse_orders(text: str) -> List[int]:
    if ":" in text:
        start, stop, step = (int(x) for x in text.split(":"))
        if step <= 0:
            raise UsageError("order step must be positive")
        return list(range(start, stop + 1, step))
    return [int(x) for x in text.split(",")]


def read_config(path: str) -> Dict[str, str]:
    """Key-value pairs from a config file or from a previous output file.

    Accepts ``key = value`` lines (optionally behind ``#``) or a JSON object,
    possibly nested under ``"config"``.
    """
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        data = json.loads(text)
        data = data.get("config", data)
        return {k: v for k, v in data.items() if not isinstance(v, (dict, list))}
    out = {}
    for line in text.splitlines():
        key, eq, val = line.lstrip("#").partition("=")
        if eq and key.strip().isidentifier():
            out[key.strip()] = val.strip()
    return out


def _config_argv(cfg: Dict[str, object]) -> List[str]:
    argv = []
    for key, val in cfg.items():
        if key == "command" or key in NOT_EMBEDDED:
            continue
        flag = "--" + key.replace("_", "-")
        sval = str(val)
        if sval.lower() in ("true", "false"):
            if sval.lower() == "true":
                argv.append(flag)
            continue
        if sval in ("None", ""):
            continue
        argv += [flag, sval]
    return argv


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value file (or a previous output) supplying defaults")
    p.add_argument("--out", default=None, help=f"output directory (default ${OUTPUT_ENV} or .)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--strict", action="store_true", help="exit 3 on non-converged optimizations")
    p.add_argument("--verbose", action="store_true")


def _add_grid(p: argparse.ArgumentParser) -> None:
    p.add_argument("--grid", help="J/h values as start:stop:step (stop included) or a comma list")
    p.add_argument("--at", type=float, help="single J/h value")


def _add_optimizer(p: argparse.ArgumentParser) -> None:
    p.add_argument("--method", choices=METHODS, default=METHODS[0])
    p.add_argument("--gtol", type=float, default=1e-10)
    p.add_argument("--ftol", type=float, default=1e-12)
    p.add_argument("--max-iter", type=int, default=10000)
    p.add_argument("--restarts", type=int, default=0)
    p.add_argument("--perturbation", type=float, default=0.1)
    p.add_argument("--delta", type=float, default=0.02)
    p.add_argument("--ring-starts", type=int, default=4)
    p.add_argument("--no-fallback", action="store_true")
    p.add_argument("--variant", choices=("phva", "hva"), default="phva")
    p.add_argument("--ring", choices=("perimeter", "sites"), default="perimeter")
    p.add_argument("--seed-ratio", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="python -m nlcevqe", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("clusters", help="write the rectangular expansion plan")
    _add_common(p)
    p.add_argument("--lattice", choices=LATTICES, required=True)
    p.add_argument("--n-max", type=int, required=True)

    p = sub.add_parser("solve", help="solve one cluster over a J/h grid")
    _add_common(p)
    _add_grid(p)
    _add_optimizer(p)
    p.add_argument("--lattice", choices=LATTICES, default="chain")
    p.add_argument("--lx", type=int, required=True)
    p.add_argument("--ly", type=int, required=True)
    p.add_argument("--solver", choices=("vqe", "ed"), default="vqe")
    p.add_argument("--layers", type=int, default=None)

    p = sub.add_parser("nlce", help="run a linked-cluster expansion")
    _add_common(p)
    _add_grid(p)
    _add_optimizer(p)
    p.add_argument("--lattice", choices=LATTICES, required=True)
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--solver", choices=("ed", "vqe", "hybrid"), default="ed")
    p.add_argument("--layer-rule", default="ceil", help="ceil, ceil-1, ceil+1 or fixed:L")
    p.add_argument("--ed-cutoff", type=int, default=0)
    p.add_argument("--check-against-ed", type=int, default=14)
    p.add_argument("--reference", default=None, help="exact (chain), series (shipped square table) or a CSV path")
    p.add_argument("--checkpoint", default=None)
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("noise", help="shot-noise propagation study")
    _add_common(p)
    p.add_argument("--lattice", choices=LATTICES, required=True)
    p.add_argument("--orders", default="4:14:2")
    p.add_argument("--modes", default="constant,linearN")
    p.add_argument("--sigma", type=float, default=1e-3)
    p.add_argument("--samples", type=int, default=100_000)

    p = sub.add_parser("oracle", help="exact, ED, finite-size or series reference tables")
    _add_common(p)
    _add_grid(p)
    p.add_argument("--kind", choices=("exact", "ed", "finite-size", "series"), required=True)
    p.add_argument("--lattice", choices=LATTICES, default="chain")
    p.add_argument("--lx", type=int, default=1)
    p.add_argument("--ly", type=int, default=2)
    p.add_argument("--periodic", action="store_true")
    p.add_argument("--l-max", type=int, default=14)
    p.add_argument("--series-order", type=int, default=16, help="highest power of J in the series (even)")
    return parser


def _grid(args) -> np.ndarray:
    if args.grid is not None and args.at is not None:
        raise UsageError("give --grid or --at, not both")
    if args.at is not None:
        return np.array([args.at])
    if args.grid is None:
        raise UsageError("a J/h grid is required (--grid or --at)")
    grid = parse_grid(args.grid)
    if np.any(grid < 0):
        raise UsageError("J/h must be non-negative")
    return grid


def _optimizer(args) -> OptimizerConfig:
    return OptimizerConfig(
        method=args.method,
        gradient_tolerance=args.gtol,
        energy_tolerance=args.ftol,
        max_iterations=args.max_iter,
        restarts=args.restarts,
        perturbation=args.perturbation,
        fallback=not args.no_fallback,
        delta=args.delta,
        ring_starts=args.ring_starts,
        seed=args.seed,
    )


def resolved_config(args) -> Dict[str, object]:
    return {k: v for k, v in sorted(vars(args).items()) if k not in NOT_EMBEDDED}


def _header(config: Dict[str, object]) -> str:
    return "".join(f"# {k} = {v}\n" for k, v in config.items())


def _write(args, name: str, csv_text: Optional[str], payload: Optional[dict]) -> Path:
    out = Path(args.out or os.environ.get(OUTPUT_ENV) or ".")
    out.mkdir(parents=True, exist_ok=True)
    config = resolved_config(args)
    if args.format == "json" or csv_text is None:
        path = out / f"{name}.json"
        path.write_text(json.dumps({"config": config, **(payload or {})}, indent=1) + "\n")
    else:
        path = out / f"{name}.csv"
        path.write_text(_header(config) + csv_text)
    print(f"wrote {path}")
    return path


def _rows_csv(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(x) if isinstance(x, float) else x for x in r])
    return buf.getvalue()


def cmd_clusters(args) -> int:
    if args.n_max < 1:
        raise UsageError("--n-max must be at least 1")
    plan = build_plan(args.lattice, args.n_max)
    print(f"{'cluster':>8} {'N':>4} {'weight':>6}")
    for c in plan.clusters:
        print(f"{c.id:>8} {c.n_sites:>4} {plan.weights[c.id]:>6}")
    print(f"{len(plan.clusters)} clusters")
    _write(args, f"plan_{args.lattice}_n{args.n_max}", None, plan.to_dict())
    return 0


def _ed_records(c: Cluster, grid) -> List[SweepRecord]:
    recs = []
    for g in grid:
        res = ed_ground_state(build_hamiltonian(c, float(g), 1.0))
        recs.append(SweepRecord(c.id, c.lx, c.ly, float(g), 0, res.ground_energy, np.zeros(0), 0, 0.0, True, method="ed"))
    return recs


def cmd_solve(args) -> int:
    grid = _grid(args)
    c = Cluster(min(args.lx, args.ly), max(args.lx, args.ly))
    if c.lx < 1:
        raise UsageError("--lx and --ly must be positive")
    if args.lattice == "chain" and not c.is_chain:
        raise UsageError("chain clusters need lx = 1")
    if args.solver == "ed":
        recs = _ed_records(c, grid)
    else:
        if args.layers is not None and args.layers < 1:
            raise UsageError("--layers must be positive")
        recs = solve_cluster(
            c, grid, args.layers, _optimizer(args), variant=args.variant,
            seed_ratio=args.seed_ratio, ring=args.ring,
        )
    _write(args, f"solve_{c.id}_{args.solver}", records_to_csv(recs), {"records": [r.to_dict() for r in recs]})
    bad = [r.J_over_h for r in recs if not r.converged]
    if bad:
        log.warning("%d of %d points did not reach the gradient tolerance", len(bad), len(recs))
        if args.strict:
            raise NumericalFailure(f"no convergence at J/h = {bad}")
    return 0


def _reference(args):
    ref = args.reference
    if ref is None:
        return None
    if ref == "exact":
        if args.lattice != "chain":
            raise UsageError("--reference exact is only available for the chain")
        return lambda g: exact_chain_energy_per_site(g, 1.0)
    if ref == "series":
        if args.lattice != "square":
            raise UsageError("--reference series is the shipped square-lattice table")
        return shipped_square_reference()
    if not Path(ref).exists():
        raise UsageError(f"reference file {ref} not found")
    try:
        return load_reference_table(ref)
    except (ValueError, KeyError) as exc:
        raise UsageError(str(exc))


def cmd_nlce(args) -> int:
    grid = _grid(args)
    if args.n_max < 1:
        raise UsageError("--n-max must be at least 1")
    try:
        rule = LayerRule.parse(args.layer_rule)
    except ValueError as exc:
        raise UsageError(str(exc))
    reference = _reference(args)
    result = run_nlce(
        args.lattice, args.n_max, grid, args.solver, layer_rule=rule, cfg=_optimizer(args),
        ed_cutoff=args.ed_cutoff, check_against_ed=args.check_against_ed, checkpoint=args.checkpoint,
        variant=args.variant, ring=args.ring, seed_ratio=args.seed_ratio, jobs=args.jobs,
    )
    payload = result.to_dict()
    if reference is not None:
        payload["reference"] = [reference(float(g)) for g in result.grid]
    _write(args, f"nlce_{args.lattice}_n{args.n_max}_{args.solver}", result.to_csv(reference), payload)
    final = result.energy()
    for g, e in zip(result.grid, final):
        print(f"J/h = {g:.6g}  e = {e:.12f}")
    flagged = [k for k, d in result.diagnostics.items() if d.get("flagged") or not all(d["converged"])]
    if flagged:
        log.warning("clusters with convergence issues: %s", ", ".join(flagged))
        if args.strict:
            raise NumericalFailure(f"convergence issues on {flagged}")
    return 0


def cmd_noise(args) -> int:
    modes = [m.strip() for m in args.modes.split(",") if m.strip()]
    unknown = [m for m in modes if m not in SCALINGS]
    if unknown:
        raise UsageError(f"unknown noise mode(s) {unknown}; choose from {sorted(SCALINGS)}")
    try:
        orders = parse_orders(args.orders)
    except ValueError:
        raise UsageError(f"cannot parse orders {args.orders!r}")
    if not orders or min(orders) < 1:
        raise UsageError("orders must be positive")
    if args.sigma < 0 or args.samples < 1000:
        raise UsageError("need sigma >= 0 and at least 1000 samples")
    rows = scaling_study(args.lattice, orders, modes, args.sigma, args.samples, args.seed)
    for r in rows:
        print(f"{r.mode:>8} order {r.order:>3}  sigma_nlce = {r.sigma_nlce:.4e}")
    _write(args, f"noise_{args.lattice}", noise_rows_to_csv(rows), {"rows": [vars(r) for r in rows]})
    return 0


def cmd_oracle(args) -> int:
    if args.kind == "finite-size":
        ratio = args.at if args.at is not None else 1.0
        if not 3 <= args.l_max <= 18:
            raise UsageError("--l-max must lie in 3..18")
        rows = ed_finite_size_check(args.l_max, ratio, 1.0)
        table = [(r.L, ratio, r.ed_per_site, r.exact_per_site, r.abs_error) for r in rows]
        head = ("L", "J_over_h", "ed_per_site", "exact_per_site", "abs_error")
    elif args.kind == "exact":
        grid = _grid(args)
        table = [(float(g), exact_chain_energy_per_site(float(g), 1.0)) for g in grid]
        head = ("J_over_h", "energy_per_site")
    elif args.kind == "ed":
        grid = _grid(args)
        c = Cluster(min(args.lx, args.ly), max(args.lx, args.ly))
        if c.n_sites > 18:
            raise UsageError("ED is limited to 18 sites")
        table = []
        for g in grid:
            e = ed_ground_state(build_hamiltonian(c, float(g), 1.0, periodic=args.periodic)).ground_energy
            table.append((c.id, float(g), e, e / c.n_sites))
        head = ("cluster", "J_over_h", "energy", "energy_per_site")
    else:
        grid = _grid(args)
        if args.series_order % 2 or not 4 <= args.series_order <= 16:
            raise UsageError("--series-order must be even and within 4..16")
        coeffs = lattice_series(args.lattice, args.series_order // 2)
        table = []
        for g in grid:
            vals = [v for (n, m), v in pade_table(coeffs, float(g)).items() if abs(n - m) <= 2]
            table.append((float(g), float(np.mean(vals)), float(np.std(vals)), len(vals)))
        head = ("J_over_h", "energy_per_site", "uncertainty", "n_approximants")
    text = _rows_csv(head, table)
    print(text, end="")
    _write(args, f"oracle_{args.kind}", text, {"columns": list(head), "rows": [list(r) for r in table]})
    return 0


HANDLERS = {"clusters": cmd_clusters, "solve": cmd_solve, "nlce": cmd_nlce, "noise": cmd_noise, "oracle": cmd_oracle}


def _expand_config(argv: List[str]) -> List[str]:
    """Insert ``--config`` values right after the command so explicit flags win."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        return argv
    path = argv[i + 1]
    rest = argv[:i] + argv[i + 2 :]
    try:
        cfg = read_config(path)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}")
    commands = [a for a in rest if a in COMMANDS]
    if commands:
        j = rest.index(commands[0])
        return rest[: j + 1] + _config_argv(cfg) + rest[j + 1 :]
    if "command" not in cfg:
        raise UsageError("config has no command; give one on the command line")
    return [str(cfg["command"])] + _config_argv(cfg) + rest


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _expand_config(argv)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return HANDLERS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NumericalFailure, RuntimeError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
