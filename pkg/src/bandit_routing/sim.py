"""Stochastic delay environment, the round loop, and pseudo-regret accounting."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetExceeded, DegenerateInstance, NoSecondPath
from .network import Network, PathVector, Sense, extremal_path
from .policies import ssp

UNIQUE_GAP_RTOL = 1e-6
MAX_DRAWS = 100
BUDGET_CHECK_EVERY = 256


@dataclass(frozen=True)
class Instance:
    net: Network
    mu: np.ndarray
    mu_max: float
    noise_std: float
    optimal: PathVector
    optimal_value: float
    gap_min: float
    gap_max: float

    def gap(self, path: PathVector) -> float:
        return path.value(self.mu) - self.optimal_value


def instance_from_mu(net: Network, mu, noise_std: float, mu_max: float | None = None) -> Instance:
    """Wrap a given delay vector.  Does not enforce a unique optimum."""
    mu = np.asarray(mu, dtype=float)
    if mu.shape != (net.d,):
        raise ValueError(f"mu must have length {net.d}")
    best, best_val = extremal_path(net, mu, Sense.MIN)
    _, worst_val = extremal_path(net, mu, Sense.MAX)
    try:
        gap_min = ssp(net, mu, best).value(mu) - best_val
    except NoSecondPath:
        gap_min = math.inf
    mu.flags.writeable = False
    return Instance(net, mu, float(mu.max()) if mu_max is None else float(mu_max), float(noise_std),
                    best, best_val, gap_min, worst_val - best_val)


def make_instance(net: Network, mu_max: float, R: float, seed: int) -> Instance:
    """Draw link delays i.i.d. uniform on [0, mu_max] until the best path is unique.

    Raises:
        DegenerateInstance: no draw in ``MAX_DRAWS`` attempts had a unique optimum.
    """
    if mu_max <= 0 or R < 0:
        raise ValueError("need mu_max > 0 and R >= 0")
    rng = np.random.default_rng([seed, 0])
    for _ in range(MAX_DRAWS):
        inst = instance_from_mu(net, rng.uniform(0.0, mu_max, net.d), R, mu_max)
        if inst.gap_min >= UNIQUE_GAP_RTOL * mu_max:
            return inst
    raise DegenerateInstance(f"no unique optimum in {MAX_DRAWS} draws")


def pull(instance: Instance, path: PathVector, rng: np.random.Generator) -> float:
    """End-to-end delay of ``path``: mean delay plus one Gaussian noise draw."""
    mean = path.value(instance.mu)
    if instance.noise_std == 0:
        return mean
    return mean + instance.noise_std * rng.standard_normal()


@dataclass
class RegretTrace:
    policy: str
    T: int
    regret: np.ndarray = field(repr=False)
    path_ids: np.ndarray = field(repr=False)
    paths: list[PathVector] = field(repr=False)
    realized_regret: float
    commit_epoch: int | None
    fallback_epoch: int | None
    runtime_s: float
    oracle_assisted: bool = False

    @property
    def cumulative(self) -> np.ndarray:
        return np.cumsum(self.regret)

    @property
    def total(self) -> float:
        return float(self.cumulative[-1])

    @property
    def time_average(self) -> float:
        return self.total / self.T


def noise_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng([seed, 1])


def policy_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng([seed, 2])


def run(policy, instance: Instance, T: int, seed: int,
        budget_secs: float | None = None) -> RegretTrace:
    """Play ``policy`` for T rounds and record its pseudo-regret.

    The policy only ever sees the delay of the path it chose.  Noise comes
    from a stream keyed on ``seed`` alone, so different policies face the
    same noise sequence.

    Raises:
        BudgetExceeded: wall-clock time passed ``budget_secs``.
    """
    if T < 1:
        raise ValueError("T must be >= 1")
    noise = instance.noise_std * noise_rng(seed).standard_normal(T)
    regret = np.empty(T)
    path_ids = np.empty(T, dtype=np.int32)
    ids: dict[PathVector, int] = {}
    paths: list[PathVector] = []
    gaps: list[float] = []
    means: list[float] = []
    loss_total = 0.0
    start = time.perf_counter()
    for t in range(1, T + 1):
        path = policy.select(t)
        k = ids.get(path)
        if k is None:
            k = ids[path] = len(paths)
            paths.append(path)
            means.append(path.value(instance.mu))
            gaps.append(means[-1] - instance.optimal_value)
        loss = means[k] + noise[t - 1]
        policy.observe(t, path, loss)
        regret[t - 1] = gaps[k]
        path_ids[t - 1] = k
        loss_total += loss
        if budget_secs is not None and t % BUDGET_CHECK_EVERY == 0:
            if time.perf_counter() - start > budget_secs:
                raise BudgetExceeded(f"{policy.name} exceeded {budget_secs}s at round {t}")
    runtime = time.perf_counter() - start
    return RegretTrace(
        policy=policy.name, T=T, regret=regret, path_ids=path_ids, paths=paths,
        realized_regret=loss_total - T * instance.optimal_value,
        commit_epoch=policy.commit_epoch, fallback_epoch=policy.fallback_epoch,
        runtime_s=runtime, oracle_assisted=policy.oracle_assisted)
