"""Batch runner: seeded replica sweeps, transfer chains, penalty runs, setup grids.

Output layout under ``out_dir``::

    config.ini                      effective configuration
    summary.csv / summary.json      one row per (N, D) [per grid cell for sweeps]
    replicas.csv                    one row per replica
    N{n}_D{d}/replica{k:02d}.csv    learning curve
    N{n}_D{d}/replica{k:02d}.json   checkpoint

Replica ``k`` always uses seed ``base_seed + k``.
"""

from __future__ import annotations

import configparser
import csv
import hashlib
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .ansatz import (
    LAYOUT_VERSION,
    AnsatzSpec,
    InitStrategy,
    build_ansatz,
    family_for,
    init_params,
    insert_block,
    prepare_state,
)
from .exact import ground_truth, normalized_energy
from .hamiltonians import ModelSpec, parity_ops
from .optimizer import OptimizerConfig, RunRecord, minimize, penalty_objective
from .pauli import expectation

log = logging.getLogger(__name__)

CHECKPOINT_VERSION = 1
SUMMARY_VERSION = 1
CURVE_HEADER = ["epoch", "objective", "energy", "grad_norm", "p1", "p2"]
SUMMARY_HEADER = [
    "n", "depth", "best_normalized_energy", "best_seed", "best_energy", "e_gs", "replicas", "failed",
]
REPLICA_HEADER = [
    "n", "depth", "replica", "seed", "status", "epochs", "final_energy", "normalized_energy",
    "final_objective", "p1", "p2",
]


@dataclass
class ExperimentConfig:
    model: str = "tfi"
    n_list: list[int] = field(default_factory=lambda: [8])
    h: float = 0.5
    ansatz: str = "sb"
    depths: list[int] = field(default_factory=lambda: [4])
    init: str = "normal:0.001"
    replicas: int = 12
    base_seed: int = 0
    jobs: int = 1
    out_dir: str = "runs"
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    alpha: tuple[float, float] = (2.0, 2.0)
    perturb: float = 0.01
    new_block_sigma: float = 0.001
    insert_position: str = "floor"
    chain: int = 1
    ground_method: str = "auto"

    def __post_init__(self):
        if self.replicas < 1 or self.jobs < 1:
            raise ValueError("replicas and jobs must be >= 1")
        InitStrategy.parse(self.init)
        for n in self.n_list:
            ModelSpec(self.model, n, self.h)
            build_ansatz(self.family(), n, 1)

    def model_spec(self, n: int) -> ModelSpec:
        return ModelSpec(self.model, n, self.h)

    def family(self) -> str:
        return family_for(ModelSpec(self.model, self.n_list[0], self.h).model, self.ansatz)

    def seed(self, replica: int) -> int:
        return self.base_seed + replica

    def to_ini(self) -> str:
        cp = configparser.ConfigParser()
        cp["model"] = {"model": self.model, "n": _join(self.n_list), "h": repr(self.h)}
        cp["ansatz"] = {"ansatz": self.ansatz, "depth": _join(self.depths), "init": self.init}
        opt = self.optimizer
        cp["optimizer"] = {
            "eta": repr(opt.eta), "lambda0": repr(opt.lambda0),
            "lambda_decay": repr(opt.lambda_decay), "lambda_floor": repr(opt.lambda_floor),
            "epochs": str(opt.max_epochs), "stop_window": str(opt.stop_window),
            "stop_tol": repr(opt.stop_tol), "fisher": opt.fisher_variant,
        }
        cp["experiment"] = {
            "replicas": str(self.replicas), "seed": str(self.base_seed),
            "jobs": str(self.jobs), "out": self.out_dir, "ground_method": self.ground_method,
        }
        cp["penalty"] = {"alpha": _join(self.alpha)}
        cp["transfer"] = {
            "perturb": repr(self.perturb), "new_block_sigma": repr(self.new_block_sigma),
            "insert_position": self.insert_position, "chain": str(self.chain),
        }
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()


def _join(values) -> str:
    return ",".join(str(v) for v in values)


def _ints(text: str) -> list[int]:
    return [int(v) for v in str(text).split(",") if v.strip()]


def _floats(text: str) -> list[float]:
    return [float(v) for v in str(text).split(",") if v.strip()]


# config key -> (ExperimentConfig / OptimizerConfig field, parser)
_KEYS = {
    "model": ("model", str), "n": ("n_list", _ints), "h": ("h", float),
    "ansatz": ("ansatz", str), "depth": ("depths", _ints), "init": ("init", str),
    "replicas": ("replicas", int), "seed": ("base_seed", int), "jobs": ("jobs", int),
    "out": ("out_dir", str), "ground_method": ("ground_method", str),
    "alpha": ("alpha", lambda s: tuple(_floats(s))),
    "perturb": ("perturb", float), "new_block_sigma": ("new_block_sigma", float),
    "insert_position": ("insert_position", str), "chain": ("chain", int),
}
_OPT_KEYS = {
    "eta": ("eta", float), "lambda0": ("lambda0", float),
    "lambda_decay": ("lambda_decay", float), "lambda_floor": ("lambda_floor", float),
    "epochs": ("max_epochs", int), "stop_window": ("stop_window", int),
    "stop_tol": ("stop_tol", float), "fisher": ("fisher_variant", str),
}


def make_config(values: dict) -> ExperimentConfig:
    """Build a config from flat ``key -> value`` pairs (strings or parsed values)."""
    exp, opt = {}, {}
    for key, value in values.items():
        if value is None:
            continue
        key = key.replace("-", "_")
        if key in _KEYS:
            name, parse = _KEYS[key]
            exp[name] = parse(value) if isinstance(value, str) else value
        elif key in _OPT_KEYS:
            name, parse = _OPT_KEYS[key]
            opt[name] = parse(value) if isinstance(value, str) else value
        else:
            raise KeyError(f"unknown config key {key!r}")
    if "alpha" in exp and len(exp["alpha"]) == 1:
        exp["alpha"] = (exp["alpha"][0],) * 2
    return ExperimentConfig(optimizer=OptimizerConfig(**opt), **exp)


def read_config_file(path: str | Path) -> dict:
    cp = configparser.ConfigParser()
    if not cp.read(path):
        raise FileNotFoundError(path)
    values = {}
    for section in cp.sections():
        for key, value in cp[section].items():
            values[key] = value
    return values


# ---------------------------------------------------------------------------
# persistence


def write_curve(path: Path, rec: RunRecord) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CURVE_HEADER)
        for t, obj, e, g, par in zip(rec.epochs, rec.objective, rec.energy, rec.grad_norm, rec.parities):
            par = [repr(v) for v in par[:2]] + [""] * (2 - min(len(par), 2))
            w.writerow([t, repr(obj), repr(e), repr(g), *par])


def read_curve(path: str | Path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def checkpoint_dict(
    model: ModelSpec, spec: AnsatzSpec, rec: RunRecord, e_gs: float, source: str | None = None
) -> dict:
    return {
        "format_version": CHECKPOINT_VERSION,
        "model": {"model": model.model, "n": model.n_qubits, "h": model.h},
        "ansatz": {"family": spec.family, "n": spec.n_qubits, "depth": spec.depth},
        "layout_version": LAYOUT_VERSION,
        "params": [float(v) for v in rec.params],
        "final_energy": rec.final_energy,
        "final_objective": rec.final_objective,
        "final_parities": rec.final_parities,
        "e_gs": e_gs,
        "seed": rec.seed,
        "epochs": rec.n_epochs,
        "status": rec.status,
        "source": source,
    }


def save_checkpoint(path: str | Path, data: dict) -> None:
    Path(path).write_text(json.dumps(data, indent=1) + "\n")


def load_checkpoint(path: str | Path) -> dict:
    data = json.loads(Path(path).read_text())
    if data.get("format_version") != CHECKPOINT_VERSION:
        raise ValueError(f"{path}: unsupported checkpoint version {data.get('format_version')}")
    if data.get("layout_version") != LAYOUT_VERSION:
        raise ValueError(f"{path}: unsupported parameter layout {data.get('layout_version')}")
    return data


def checkpoint_model(data: dict) -> ModelSpec:
    m = data["model"]
    return ModelSpec(m["model"], m["n"], m["h"])


def checkpoint_ansatz(data: dict) -> AnsatzSpec:
    a = data["ansatz"]
    return build_ansatz(a["family"], a["n"], a["depth"])


def evaluate_checkpoint(data: dict) -> float:
    """Energy of the stored parameters under the stored model Hamiltonian."""
    psi = prepare_state(checkpoint_ansatz(data), np.array(data["params"]))
    return expectation(checkpoint_model(data).hamiltonian(), psi)


def checkpoint_id(path: str | Path) -> str:
    digest = hashlib.sha256(Path(path).read_bytes()).hexdigest()[:12]
    return f"{Path(path)}#{digest}"


# ---------------------------------------------------------------------------
# replica execution


@dataclass
class ReplicaTask:
    model: ModelSpec
    family: str
    depth: int
    replica: int
    seed: int
    optimizer: OptimizerConfig
    e_gs: float
    out_dir: str
    init: str = "normal:0.001"
    # transfer
    source_params: list[float] | None = None
    source_depth: int | None = None
    source_id: str | None = None
    perturb: float = 0.01
    new_block_sigma: float = 0.001
    insert_position: str = "floor"
    # penalty
    alpha: tuple[float, float] | None = None


def _initial(task: ReplicaTask) -> tuple[AnsatzSpec, np.ndarray]:
    n = task.model.n_qubits
    if task.source_params is None:
        spec = build_ansatz(task.family, n, task.depth)
        return spec, init_params(spec, InitStrategy.parse(task.init, task.seed))
    src = build_ansatz(task.family, n, task.source_depth)
    rng = np.random.default_rng(task.seed)
    return insert_block(
        src, np.array(task.source_params), task.perturb, rng,
        new_block_sigma=task.new_block_sigma, position=task.insert_position,
    )


def run_replica(task: ReplicaTask) -> dict:
    """Run one seeded optimisation, write its curve and checkpoint, return a summary row."""
    h = task.model.hamiltonian()
    track = parity_ops(task.model) if task.model.n_qubits % 2 == 0 else []
    objective = h
    if task.alpha is not None:
        objective = penalty_objective(h, list(zip(task.alpha, track)))
    row = {"n": task.model.n_qubits, "depth": task.depth, "replica": task.replica, "seed": task.seed}
    run_dir = Path(task.out_dir) / f"N{task.model.n_qubits}_D{task.depth}"
    run_dir.mkdir(parents=True, exist_ok=True)
    stem = run_dir / f"replica{task.replica:02d}"
    try:
        spec, init = _initial(task)
        rec = minimize(objective, spec, init, task.optimizer, track, hamiltonian=h, seed=task.seed)
    except Exception as exc:  # recorded, sweep continues
        log.exception("replica %s failed", stem)
        return {**row, "status": "error", "message": str(exc)}
    write_curve(stem.with_suffix(".csv"), rec)
    save_checkpoint(stem.with_suffix(".json"), checkpoint_dict(task.model, spec, rec, task.e_gs, task.source_id))
    par = list(rec.final_parities) + [None, None]
    return {
        **row,
        "status": rec.status,
        "epochs": rec.n_epochs,
        "final_energy": rec.final_energy,
        "normalized_energy": normalized_energy(rec.final_energy, task.e_gs),
        "final_objective": rec.final_objective,
        "p1": par[0],
        "p2": par[1],
        "checkpoint": str(stem.with_suffix(".json")),
    }


def run_tasks(tasks: list[ReplicaTask], jobs: int = 1) -> list[dict]:
    if jobs <= 1 or len(tasks) <= 1:
        return [run_replica(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(run_replica, tasks))


def completed(row: dict) -> bool:
    return row.get("status") in ("converged", "budget")


def summarize(rows: list[dict], e_gs: dict[int, float]) -> list[dict]:
    """Best final normalized energy per (N, D); ties go to the lowest seed."""
    out = []
    keys = sorted({(r["n"], r["depth"]) for r in rows})
    for n, d in keys:
        group = [r for r in rows if (r["n"], r["depth"]) == (n, d)]
        done = [r for r in group if completed(r)]
        best = min(done, key=lambda r: (r["normalized_energy"], r["seed"])) if done else None
        out.append({
            "n": n,
            "depth": d,
            "best_normalized_energy": best["normalized_energy"] if best else math.nan,
            "best_seed": best["seed"] if best else None,
            "best_energy": best["final_energy"] if best else math.nan,
            "e_gs": e_gs[n],
            "replicas": len(group),
            "failed": len(group) - len(done),
            "best_checkpoint": best["checkpoint"] if best else None,
        })
    return out


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_table(path: Path, header: list[str], rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(r.get(k)) for k in header])


def write_outputs(out: Path, summary: list[dict], rows: list[dict], extra: dict | None = None) -> None:
    out.mkdir(parents=True, exist_ok=True)
    write_table(out / "summary.csv", SUMMARY_HEADER, summary)
    write_table(out / "replicas.csv", REPLICA_HEADER, rows)
    payload = {"format_version": SUMMARY_VERSION, "summary": summary, **(extra or {})}
    (out / "summary.json").write_text(json.dumps(payload, indent=1, default=_json_default) + "\n")


def _json_default(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    raise TypeError(type(v))


def _ground_energies(cfg: ExperimentConfig) -> dict[int, float]:
    return {n: ground_truth(cfg.model_spec(n).hamiltonian(), cfg.ground_method).energy for n in cfg.n_list}


def _prepare_out(cfg: ExperimentConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.ini").write_text(cfg.to_ini())
    return out


def _solve_tasks(cfg: ExperimentConfig, e_gs: dict[int, float], out: Path, alpha=None) -> list[ReplicaTask]:
    family = cfg.family()
    return [
        ReplicaTask(
            model=cfg.model_spec(n), family=family, depth=d, replica=k, seed=cfg.seed(k),
            optimizer=cfg.optimizer, e_gs=e_gs[n], out_dir=str(out), init=cfg.init, alpha=alpha,
        )
        for n in cfg.n_list
        for d in cfg.depths
        for k in range(cfg.replicas)
    ]


# ---------------------------------------------------------------------------
# commands


def cmd_solve(cfg: ExperimentConfig) -> dict:
    """(N, D) sweep with seeded replicas; returns ``{"summary", "replicas"}``."""
    out = _prepare_out(cfg)
    e_gs = _ground_energies(cfg)
    rows = run_tasks(_solve_tasks(cfg, e_gs, out), cfg.jobs)
    summary = summarize(rows, e_gs)
    write_outputs(out, summary, rows, {"command": "solve", "family": cfg.family()})
    return {"summary": summary, "replicas": rows}


def cmd_penalty(cfg: ExperimentConfig) -> dict:
    """Penalty-objective runs; energies are reported against the bare Hamiltonian."""
    if cfg.model_spec(cfg.n_list[0]).model != "cluster":
        raise ValueError("penalty runs are defined for the open cluster model")
    out = _prepare_out(cfg)
    e_gs = _ground_energies(cfg)
    rows = run_tasks(_solve_tasks(cfg, e_gs, out, alpha=tuple(cfg.alpha)), cfg.jobs)
    summary = summarize(rows, e_gs)
    write_outputs(out, summary, rows, {"command": "penalty", "alpha": list(cfg.alpha)})
    return {"summary": summary, "replicas": rows}


def cmd_transfer(cfg: ExperimentConfig, sources: list[str | Path]) -> dict:
    """Grow each source checkpoint by one block per chain step and re-optimise.

    Step ``s`` starts every replica from the best checkpoint of step ``s-1``
    (the source itself for the first step).
    """
    out = _prepare_out(cfg)
    e_gs = _ground_energies(cfg) if cfg.n_list else {}
    family = cfg.family()
    all_rows, all_summary = [], []
    for source in sources:
        data = load_checkpoint(source)
        model = checkpoint_model(data)
        if (model.model, model.n_qubits, model.h) != (cfg.model_spec(model.n_qubits).model, model.n_qubits, cfg.h):
            raise ValueError(f"{source}: model {data['model']} does not match the configuration")
        if data["ansatz"]["family"] != family:
            raise ValueError(f"{source}: ansatz {data['ansatz']['family']} does not match {family}")
        n = model.n_qubits
        if n not in e_gs:
            e_gs[n] = ground_truth(model.hamiltonian(), cfg.ground_method).energy
        current, current_path = data, Path(source)
        for _ in range(cfg.chain):
            src_id = checkpoint_id(current_path)
            tasks = [
                ReplicaTask(
                    model=model, family=family, depth=current["ansatz"]["depth"] + 1, replica=k,
                    seed=cfg.seed(k), optimizer=cfg.optimizer, e_gs=e_gs[n], out_dir=str(out),
                    source_params=current["params"], source_depth=current["ansatz"]["depth"],
                    source_id=src_id, perturb=cfg.perturb, new_block_sigma=cfg.new_block_sigma,
                    insert_position=cfg.insert_position,
                )
                for k in range(cfg.replicas)
            ]
            rows = run_tasks(tasks, cfg.jobs)
            for r in rows:
                r["source"] = src_id
                r["source_normalized_energy"] = normalized_energy(current["final_energy"], e_gs[n])
            summary = summarize(rows, e_gs)
            for s in summary:
                s["source"] = src_id
                s["source_normalized_energy"] = rows[0]["source_normalized_energy"]
            all_rows += rows
            all_summary += summary
            best = summary[0]["best_checkpoint"]
            if best is None:
                break
            current, current_path = load_checkpoint(best), Path(best)
    write_outputs(out, all_summary, all_rows, {"command": "transfer", "sources": [str(s) for s in sources]})
    return {"summary": all_summary, "replicas": all_rows}


SETUP_GRID = [
    ("centered", "normal"),
    ("centered", "sboffset"),
    ("uncentered", "normal"),
    ("uncentered", "sboffset"),
]


def cmd_sweep_setups(cfg: ExperimentConfig) -> dict:
    """{centered, uncentered} Fisher x {normal, offset} initialisation grid."""
    out = _prepare_out(cfg)
    sigma = InitStrategy.parse(cfg.init).sigma
    cells = {}
    grid_rows = []
    for fisher, init in SETUP_GRID:
        cell = f"{fisher}_{init}"
        sub = replace(
            cfg,
            init=f"{init}:{sigma:g}",
            optimizer=replace(cfg.optimizer, fisher_variant=fisher),
            out_dir=str(out / cell),
        )
        result = cmd_solve(sub)
        cells[cell] = result
        for s in result["summary"]:
            grid_rows.append({"fisher": fisher, "init": init, **s})
    header = ["fisher", "init"] + SUMMARY_HEADER
    write_table(out / "summary.csv", header, grid_rows)
    (out / "summary.json").write_text(
        json.dumps({"format_version": SUMMARY_VERSION, "command": "sweep-setups", "grid": grid_rows},
                   indent=1, default=_json_default) + "\n"
    )
    return {"grid": grid_rows, "cells": cells}


def cmd_exact(model: ModelSpec, method: str = "auto") -> dict:
    return ground_truth(model.hamiltonian(), method).to_dict()


def gnuplot_hints() -> str:
    cols = ", ".join(f"{i + 1}:{name}" for i, name in enumerate(CURVE_HEADER))
    return (
        f"learning curves (replicaNN.csv): {cols}; p1/p2 empty when no parity is tracked\n"
        f"summary.csv: {', '.join(f'{i + 1}:{c}' for i, c in enumerate(SUMMARY_HEADER))}\n"
    )


def config_dict(cfg: ExperimentConfig) -> dict:
    d = asdict(cfg)
    d["optimizer"] = cfg.optimizer.to_dict()
    return d
