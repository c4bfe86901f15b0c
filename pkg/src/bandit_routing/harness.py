"""Experiment plumbing: single runs, sweeps, CSV output and the oracle checks."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np

from . import oracles
from .errors import BudgetExceeded, CapExceeded, NoSecondPath, RoutingError
from .network import (DEFAULT_PATH_CAP, Network, Sense, enumerate_paths, extremal_path,
                      count_paths, grid_network, load_network, network_from_json)
from .policies import POLICY_NAMES, DEBUG_POLICY_NAMES, make_policy, ssp
from .sim import make_instance, policy_rng, run
from .spanner import basis_from_json, coefficients, compute_S, exploration_basis

log = logging.getLogger(__name__)

TRACE_COLUMNS = ["seed", "policy", "p", "d", "T", "R", "t", "cum_pseudo_regret",
                 "commit_epoch", "runtime_ms"]
RUN_COLUMNS = ["seed", "policy", "p", "d", "T", "R", "final_pseudo_regret",
               "time_avg_pseudo_regret", "commit_epoch", "fallback_epoch", "runtime_ms", "status"]
SWEEP_COLUMNS = ["policy", "p", "d", "T", "R", "runs", "mean_time_avg_regret",
                 "stderr_time_avg_regret", "mean_runtime_ms", "not_run"]


@dataclass
class NetworkSpec:
    """Either a grid side length or a network JSON file."""

    grid: int | None = None
    file: str | None = None

    def __post_init__(self):
        if (self.grid is None) == (self.file is None):
            raise ValueError("give exactly one of grid or file")

    def build(self) -> Network:
        return grid_network(self.grid) if self.grid is not None else load_network(self.file)

    @property
    def label(self) -> str:
        return str(self.grid) if self.grid is not None else ""


@dataclass
class ExperimentConfig:
    networks: list[NetworkSpec]
    policies: list[str]
    T: list[int]
    R: list[float]
    mu_max: float = 1000.0
    iterations: int = 50
    seed: int = 0
    out: str | None = None
    stride: int = 100
    jobs: int = 1
    budget_secs: float | None = 90.0
    record_runtime: bool = False

    def __post_init__(self):
        if not self.policies:
            raise ValueError("policy list is empty")
        for name in self.policies:
            if name not in POLICY_NAMES + DEBUG_POLICY_NAMES:
                raise ValueError(f"unknown policy {name!r}")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not self.T or not self.R or not self.networks:
            raise ValueError("need at least one T, R and network")
        if any(t < 1 for t in self.T) or any(r < 0 for r in self.R):
            raise ValueError("T must be >= 1 and R >= 0")
        if self.stride < 1:
            raise ValueError("stride must be >= 1")

    @classmethod
    def from_json(cls, obj: dict) -> "ExperimentConfig":
        obj = dict(obj)
        nets = obj.pop("network", obj.pop("networks", None))
        if nets is None:
            raise ValueError("config needs a network entry")
        if isinstance(nets, dict):
            nets = [nets]
        obj["networks"] = [NetworkSpec(**n) for n in nets]
        for key in ("T", "R", "policies"):
            if key in obj and not isinstance(obj[key], list):
                obj[key] = [obj[key]]
        return cls(**obj)


@lru_cache(maxsize=16)
def _network_and_basis(spec_json: str):
    spec = NetworkSpec(**json.loads(spec_json))
    net = spec.build()
    return net, exploration_basis(net)


def _spec_key(spec: NetworkSpec) -> str:
    return json.dumps(asdict(spec), sort_keys=True)


@dataclass
class RunResult:
    seed: int
    policy: str
    p: str
    d: int
    T: int
    R: float
    status: str = "ok"
    final_pseudo_regret: float | None = None
    time_avg_pseudo_regret: float | None = None
    commit_epoch: int | None = None
    fallback_epoch: int | None = None
    runtime_ms: float | None = None
    checkpoints: list[tuple[int, float]] = field(default_factory=list, repr=False)


def run_single(spec: NetworkSpec, policy: str, T: int, R: float, seed: int,
               mu_max: float = 1000.0, stride: int = 100,
               budget_secs: float | None = None) -> RunResult:
    """One (network, policy, T, R, seed) cell.  Never raises for expected failures."""
    net, basis = _network_and_basis(_spec_key(spec))
    if T < basis.d0:
        log.warning("T=%d shorter than one epoch (%d); clamping", T, basis.d0)
        T = basis.d0
    res = RunResult(seed, policy, spec.label, net.d, T, R)
    inst = make_instance(net, mu_max, R, seed)
    start = time.perf_counter()
    try:
        pol = make_policy(policy, net, basis, T, R, policy_rng(seed), inst)
        trace = run(pol, inst, T, seed, budget_secs=budget_secs)
    except CapExceeded:
        res.status = "not run: CapExceeded"
        return res
    except BudgetExceeded:
        res.status = "timeout"
        res.runtime_ms = (time.perf_counter() - start) * 1e3
        return res
    res.runtime_ms = (time.perf_counter() - start) * 1e3
    cum = trace.cumulative
    ts = list(range(stride, T + 1, stride))
    if not ts or ts[-1] != T:
        ts.append(T)
    res.checkpoints = [(t, float(cum[t - 1])) for t in ts]
    res.final_pseudo_regret = float(cum[-1])
    res.time_avg_pseudo_regret = float(cum[-1]) / T
    res.commit_epoch = trace.commit_epoch
    res.fallback_epoch = trace.fallback_epoch
    return res


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def trace_rows(res: RunResult, record_runtime: bool = False):
    runtime = _fmt(res.runtime_ms) if record_runtime else ""
    for t, cum in res.checkpoints:
        yield [res.seed, res.policy, res.p, res.d, res.T, _fmt(res.R), t, _fmt(cum),
               _fmt(res.commit_epoch), runtime]


def run_row(res: RunResult, record_runtime: bool = False):
    return [res.seed, res.policy, res.p, res.d, res.T, _fmt(res.R),
            _fmt(res.final_pseudo_regret), _fmt(res.time_avg_pseudo_regret),
            _fmt(res.commit_epoch), _fmt(res.fallback_epoch),
            _fmt(res.runtime_ms) if record_runtime else "", res.status]


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _cell(args):
    spec, policy, T, R, seed, cfg = args
    return run_single(spec, policy, T, R, seed, cfg.mu_max, cfg.stride, cfg.budget_secs)


def sweep(cfg: ExperimentConfig) -> list[RunResult]:
    """Run every (network, R, T, policy, seed) cell, in deterministic key order."""
    cells = [(spec, policy, T, R, cfg.seed + i, cfg)
             for spec in cfg.networks for R in cfg.R for T in cfg.T
             for policy in cfg.policies for i in range(cfg.iterations)]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            return list(pool.map(_cell, cells, chunksize=max(1, len(cells) // (4 * cfg.jobs))))
    return [_cell(c) for c in cells]


def aggregate(results: list[RunResult]) -> list[dict]:
    """Mean and standard error of time-average pseudo-regret per (policy, p, d, T, R)."""
    groups: dict[tuple, list[RunResult]] = {}
    for r in results:
        groups.setdefault((r.policy, r.p, r.d, r.T, r.R), []).append(r)
    rows = []
    for (policy, p, d, T, R), rs in groups.items():
        ok = [r for r in rs if r.status == "ok"]
        vals = np.array([r.time_avg_pseudo_regret for r in ok])
        mean = float(vals.mean()) if len(vals) else None
        se = float(vals.std(ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else (0.0 if len(vals) else None)
        runtimes = [r.runtime_ms for r in rs if r.runtime_ms is not None]
        rows.append({
            "policy": policy, "p": p, "d": d, "T": T, "R": R, "runs": len(ok),
            "mean_time_avg_regret": mean, "stderr_time_avg_regret": se,
            "mean_runtime_ms": float(np.mean(runtimes)) if runtimes else None,
            "not_run": len(rs) - len(ok),
        })
    return rows


def aggregate_rows(agg: list[dict], record_runtime: bool = False):
    for a in agg:
        yield [a["policy"], a["p"], a["d"], a["T"], _fmt(a["R"]), a["runs"],
               _fmt(a["mean_time_avg_regret"]), _fmt(a["stderr_time_avg_regret"]),
               _fmt(a["mean_runtime_ms"]) if record_runtime else "", a["not_run"]]


def aggregate_from_runs_csv(path) -> list[dict]:
    """Recompute sweep aggregates from a per-run CSV."""
    results = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            r = RunResult(int(row["seed"]), row["policy"], row["p"], int(row["d"]),
                          int(row["T"]), float(row["R"]), status=row["status"])
            if row["time_avg_pseudo_regret"]:
                r.time_avg_pseudo_regret = float(row["time_avg_pseudo_regret"])
            if row["runtime_ms"]:
                r.runtime_ms = float(row["runtime_ms"])
            results.append(r)
    return aggregate(results)


# -- oracle verification -------------------------------------------------------

@dataclass
class Check:
    name: str
    passed: bool
    detail: str


def verify(net: Network, basis_obj: dict | None = None, trials: int = 100, seed: int = 0,
           cap: int = DEFAULT_PATH_CAP, expected_rank: int | None = None) -> list[Check]:
    """Cross-check the fast routines against the exhaustive oracles on ``net``."""
    rng = np.random.default_rng(seed)
    checks: list[Check] = []
    paths = enumerate_paths(net, cap)

    checks.append(Check("path count DP == enumeration", count_paths(net) == len(paths),
                        f"{count_paths(net)} vs {len(paths)}"))

    bad = 0
    for _ in range(trials):
        w = rng.standard_normal(net.d)
        _, v = extremal_path(net, w, Sense.MIN)
        _, bv = oracles.brute_shortest(net, w, cap)
        bad += v != bv
    checks.append(Check("extremal_path == brute_shortest", bad == 0,
                        f"{bad}/{trials} value mismatches"))

    if len(paths) >= 2:
        bad = 0
        for _ in range(trials):
            psi = rng.standard_normal(net.d)
            best, _ = extremal_path(net, psi, Sense.MIN)
            sv = ssp(net, psi, best).value(psi)
            _, bv = oracles.brute_second_shortest(net, psi, cap)
            bad += sv != bv
        checks.append(Check("ssp == brute_second_shortest", bad == 0,
                            f"{bad}/{trials} value mismatches"))

    if basis_obj is None:
        basis = exploration_basis(net)
        label = "computed basis"
    else:
        try:
            basis = basis_from_json(basis_obj, net)
        except (ValueError, RoutingError) as exc:
            checks.append(Check("basis file loads", False, str(exc)))
            return checks
        label = "basis file"

    s_fast = compute_S(basis, net)
    s_brute = oracles.brute_S(basis, net, cap)
    checks.append(Check(f"compute_S == brute_S ({label})", abs(s_fast - s_brute) < 1e-8,
                        f"{s_fast!r} vs {s_brute!r}"))
    if basis_obj is not None:
        checks.append(Check("stored S == brute_S", abs(basis.S - s_brute) < 1e-6,
                            f"{basis.S!r} vs {s_brute!r}"))

    worst = max(coefficients(basis, a).residual for a in paths)
    checks.append(Check(f"basis reconstruction residual < 1e-8 ({label})", worst < 1e-8,
                        f"max residual {worst:.3e}"))

    rank = oracles.path_matrix_rank(net, cap)
    checks.append(Check("path_matrix_rank == d0", rank == basis.d0, f"{rank} vs {basis.d0}"))
    if expected_rank is not None:
        checks.append(Check("path_matrix_rank == expected", rank == expected_rank,
                            f"{rank} vs {expected_rank}"))
    return checks
