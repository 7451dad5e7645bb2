"""File formats.

Tabular artifacts (problems, chains, samples) are columnar CSV with a one-line
JSON header carrying dimensions, seed and a config hash, then a column-name
row, then rows of floats serialized with repr() so values round-trip exactly.
Reports are plain JSON. Plot data is bare CSV (named header row only) so any
plotting tool can consume it.
"""

from __future__ import annotations

import io
import json
from pathlib import Path

import numpy as np

from .coder import CodingProblem, PosteriorChain
from .harness import ScenarioReport, config_hash
from .samplers import Chain

__all__ = [
    "write_table",
    "read_table",
    "save_problem",
    "load_problem",
    "save_prior_chain",
    "save_posterior_chain",
    "load_chain",
    "save_report",
    "load_report",
    "write_plot_data",
]


def _fmt(v) -> str:
    return repr(float(v))


def write_table(path, columns: dict, meta: dict) -> None:
    """Columnar CSV with a one-line JSON header; exact float round-trip."""
    names = list(columns)
    arrays = [np.asarray(columns[k], dtype=float) for k in names]
    if not arrays:
        raise ValueError("need at least one column")
    n = arrays[0].shape[0]
    if any(a.ndim != 1 or a.shape[0] != n for a in arrays):
        raise ValueError("columns must be 1-D and equally long")
    meta = dict(meta)
    meta["columns"] = names
    meta["rows"] = n
    with open(path, "w") as fh:
        fh.write(json.dumps(meta, sort_keys=True) + "\n")
        fh.write(",".join(names) + "\n")
        for i in range(n):
            fh.write(",".join(_fmt(a[i]) for a in arrays) + "\n")


def read_table(path):
    """Inverse of write_table: returns (meta, {name: array})."""
    with open(path) as fh:
        meta = json.loads(fh.readline())
        names = fh.readline().strip().split(",")
        body = fh.read()
    if body.strip():
        data = np.loadtxt(io.StringIO(body), delimiter=",", ndmin=2)
    else:
        data = np.empty((0, len(names)))
    if meta.get("columns") != names:
        raise ValueError("column row disagrees with JSON header")
    return meta, {name: data[:, j].copy() for j, name in enumerate(names)}


def save_problem(path, problem: CodingProblem, seed=None, extra_meta=None) -> None:
    cols = {"y": problem.y}
    for j in range(problem.dim):
        cols[f"h{j}"] = problem.h[:, j]
    meta = {
        "kind": "problem",
        "n_measurements": problem.n_measurements,
        "dim": problem.dim,
        "hyper_a": problem.hyper_a,
        "hyper_b": problem.hyper_b,
        "seed": seed,
    }
    if extra_meta:
        meta.update(extra_meta)
    meta["config_hash"] = config_hash(meta)
    write_table(path, cols, meta)


def load_problem(path):
    meta, cols = read_table(path)
    if meta.get("kind") != "problem":
        raise ValueError(f"{path} is not a problem file")
    dim = int(meta["dim"])
    h = np.column_stack([cols[f"h{j}"] for j in range(dim)])
    problem = CodingProblem(
        y=cols["y"], h=h, hyper_a=float(meta["hyper_a"]), hyper_b=float(meta["hyper_b"])
    )
    return problem, meta


def _chain_meta(kind, seed, extra):
    meta = {"kind": kind, "seed": seed}
    if extra:
        meta.update(extra)
    meta["config_hash"] = config_hash(meta)
    return meta


def save_prior_chain(path, chain: Chain, seed=None, extra_meta=None) -> None:
    cols = {f"x{j}": chain.samples[:, j] for j in range(chain.samples.shape[1])}
    extra = {
        "burn_in": chain.burn_in,
        "accepts": chain.accepts,
        "proposals": chain.proposals,
        "step_size": None if np.isnan(chain.step_size) else chain.step_size,
        "dim": chain.samples.shape[1],
    }
    if extra_meta:
        extra.update(extra_meta)
    write_table(path, cols, _chain_meta("prior_chain", seed, extra))


def save_posterior_chain(path, chain: PosteriorChain, seed=None, extra_meta=None) -> None:
    cols = {f"x{j}": chain.coefs[:, j] for j in range(chain.coefs.shape[1])}
    cols["sigma2"] = chain.sigma2s
    cols["mu"] = chain.mus
    extra = {
        "burn_in": chain.burn_in,
        "step_kind": chain.step_kind,
        "accepts": chain.accepts,
        "proposals": chain.proposals,
        "step_size": None if np.isnan(chain.step_size) else chain.step_size,
        "dim": chain.coefs.shape[1],
    }
    if extra_meta:
        extra.update(extra_meta)
    write_table(path, cols, _chain_meta("posterior_chain", seed, extra))


def load_chain(path):
    """Load either chain flavor; returns (meta, Chain or PosteriorChain)."""
    meta, cols = read_table(path)
    kind = meta.get("kind")
    dim = int(meta["dim"])
    xs = np.column_stack([cols[f"x{j}"] for j in range(dim)])
    step = meta.get("step_size")
    step = float("nan") if step is None else float(step)
    if kind == "prior_chain":
        chain = Chain(
            samples=xs,
            burn_in=int(meta["burn_in"]),
            accepts=int(meta["accepts"]),
            proposals=int(meta["proposals"]),
            step_size=step,
        )
    elif kind == "posterior_chain":
        chain = PosteriorChain(
            coefs=xs,
            sigma2s=cols["sigma2"],
            mus=cols["mu"],
            burn_in=int(meta["burn_in"]),
            step_kind=str(meta["step_kind"]),
            accepts=int(meta["accepts"]),
            proposals=int(meta["proposals"]),
            step_size=step,
        )
    else:
        raise ValueError(f"{path} is not a chain file")
    return meta, chain


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if np.isnan(v):
            return "nan"
        if np.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def save_report(path, report) -> None:
    """Serialize a ScenarioReport (or any mapping) as JSON."""
    if isinstance(report, ScenarioReport):
        payload = {
            "config": report.config,
            "config_hash": report.config_hash,
            "records": report.records,
            "aggregates": report.aggregates,
        }
    else:
        payload = report
    Path(path).write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True))


def load_report(path) -> dict:
    return json.loads(Path(path).read_text())


def write_plot_data(path, columns: dict) -> None:
    """Bare CSV (named header row, repr floats) for external plotting."""
    names = list(columns)
    arrays = [np.asarray(columns[k], dtype=float) for k in names]
    n = arrays[0].shape[0]
    with open(path, "w") as fh:
        fh.write(",".join(names) + "\n")
        for i in range(n):
            fh.write(",".join(_fmt(a[i]) for a in arrays) + "\n")
