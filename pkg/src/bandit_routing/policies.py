"""Routing policies sharing one select/observe contract.

A policy is asked for a path each round with :meth:`Policy.select` and is
then told the end-to-end delay of that path with :meth:`Policy.observe`.

The exploration-based policies (EC, TTC, MTTC) play the basis paths in a
fixed order, one epoch being one pass over the basis.  Since TTC discards
every path but one in a single step, the surviving path set is either "all
paths" or a single committed path and is never materialised.
"""

from __future__ import annotations

import enum
import logging
import math

import numpy as np
import scipy.linalg

from .errors import NoSecondPath, PathMismatch
from .estimation import ConfidenceParams, DesignState, radius_general, radius_identifiable
from .network import Network, PathVector, Sense, enumerate_paths, extremal_path, path_matrix, sample_uniform_path
from .spanner import Basis

log = logging.getLogger(__name__)

POLICY_NAMES = ("ec-gap", "ec-worstcase", "ttc", "mttc", "ts", "ofu", "uniform-random")
DEBUG_POLICY_NAMES = ("optimal",)
OFU_PATH_CAP = 5000


class Phase(enum.Enum):
    EXPLORING = "exploring"
    COMMITTED = "committed"
    FALLBACK = "fallback"


def ssp(net: Network, psi, shortest: PathVector) -> PathVector:
    """Second-shortest path under link weights ``psi``.

    For every link of ``shortest`` the best path avoiding that link is found
    by inflating its weight; the cheapest of these candidates, measured
    under the original weights, is the runner-up.

    Raises:
        NoSecondPath: no other source-destination path exists.
    """
    psi = np.asarray(psi, dtype=float)
    # any path through the inflated link now outweighs every path avoiding it
    penalty = 2.0 * float(np.sum(np.abs(psi))) + 1.0
    best = None
    best_key = None
    for j in shortest.links:
        shifted = psi.copy()
        shifted[j] += penalty
        cand, _ = extremal_path(net, shifted, Sense.MIN)
        if j in cand.links:
            continue
        key = (cand.value(psi), cand.links)
        if best_key is None or key < best_key:
            best, best_key = cand, key
    if best is None:
        raise NoSecondPath("every path shares all links with the shortest path")
    return best


class Policy:
    """Base class.  Subclasses implement :meth:`_choose` and :meth:`_learn`."""

    name = "policy"
    oracle_assisted = False

    def __init__(self):
        self._issued: PathVector | None = None
        self.commit_epoch: int | None = None
        self.fallback_epoch: int | None = None

    def select(self, t: int) -> PathVector:
        self._issued = self._choose(t)
        return self._issued

    def observe(self, t: int, path: PathVector, loss: float) -> None:
        if path != self._issued:
            raise PathMismatch(f"round {t}: observed {path.links}, issued "
                               f"{None if self._issued is None else self._issued.links}")
        self._issued = None
        self._learn(t, path, float(loss))

    def _choose(self, t):
        raise NotImplementedError

    def _learn(self, t, path, loss):
        pass


class FixedPath(Policy):
    """Always plays one path; with the true optimum this is the zero-regret reference."""

    name = "fixed"

    def __init__(self, path: PathVector, name: str = "fixed", oracle_assisted: bool = False):
        super().__init__()
        self.path = path
        self.name = name
        self.oracle_assisted = oracle_assisted

    def _choose(self, t):
        return self.path


class UniformRandom(Policy):
    name = "uniform-random"

    def __init__(self, net: Network, rng: np.random.Generator):
        super().__init__()
        self.net = net
        self.rng = rng

    def _choose(self, t):
        return sample_uniform_path(self.net, self.rng)


class ThompsonSampling(Policy):
    """Gaussian Thompson sampling over link delays.

    Prior ``mu ~ N(0, I/lam)`` and Gaussian noise of variance
    ``sigma^2 = max(R^2, 1e-6)`` give the posterior precision
    ``P = lam*I + sum a a^T / sigma^2`` and mean ``P^-1 sum a*loss / sigma^2``.
    Each round routes on the shortest path under one posterior draw.
    """

    name = "ts"

    def __init__(self, net: Network, R: float, rng: np.random.Generator, lam: float = 1.0):
        super().__init__()
        self.net = net
        self.rng = rng
        self.noise_var = max(R * R, 1e-6)
        self.precision = lam * np.eye(net.d)
        self.b = np.zeros(net.d)

    def warm_start(self, gram, response) -> None:
        """Fold in earlier observations given as sum a a^T and sum a*loss."""
        self.precision = self.precision + np.asarray(gram) / self.noise_var
        self.b = self.b + np.asarray(response) / self.noise_var

    def sample(self) -> np.ndarray:
        chol = np.linalg.cholesky(self.precision)
        mean = scipy.linalg.cho_solve((chol, True), self.b, check_finite=False)
        z = self.rng.standard_normal(self.net.d)
        # chol^-T z has covariance precision^-1
        return mean + scipy.linalg.solve_triangular(
            chol, z, lower=True, trans="T", check_finite=False)

    def _choose(self, t):
        path, _ = extremal_path(self.net, self.sample(), Sense.MIN)
        return path

    def _learn(self, t, path, loss):
        idx = list(path.links)
        self.precision[np.ix_(idx, idx)] += 1.0 / self.noise_var
        self.b[idx] += loss / self.noise_var


class OFU(Policy):
    """Optimistic linear bandit over the enumerated path set.

    Plays ``argmin <a, mu_ridge> - beta_t * ||a||_{V^-1}``.  Only feasible on
    small networks: construction raises :class:`CapExceeded` beyond ``cap``
    paths.
    """

    name = "ofu"

    def __init__(self, net: Network, R: float, T: int, lam: float = 1.0, cap: int = OFU_PATH_CAP):
        super().__init__()
        self.paths = enumerate_paths(net, cap)
        self.A = path_matrix(self.paths)
        self.R = R
        self.lam = lam
        self.delta = 1.0 / max(T, 2)
        d = net.d
        self.Vinv = np.eye(d) / lam
        self.b = np.zeros(d)
        self.width2 = np.einsum("kd,kd->k", self.A, self.A) / lam
        self.n_obs = 0

    def beta(self) -> float:
        d = self.A.shape[1]
        return (self.R * math.sqrt(d * math.log((1 + self.n_obs * d / self.lam) / self.delta))
                + math.sqrt(self.lam) * math.sqrt(d))

    def _choose(self, t):
        mu_hat = self.Vinv @ self.b
        index = self.A @ mu_hat - self.beta() * np.sqrt(np.maximum(self.width2, 0.0))
        return self.paths[int(np.argmin(index))]

    def _learn(self, t, path, loss):
        a = path.coords
        u = self.Vinv @ a
        denom = 1.0 + a @ u
        self.Vinv -= np.outer(u, u) / denom
        self.width2 -= (self.A @ u) ** 2 / denom
        self.b += a * loss
        self.n_obs += 1


class _EpochPolicy(Policy):
    """Shared epoch machine: explore the basis in order, then commit or hand off."""

    def __init__(self, net: Network, basis: Basis, T: int):
        super().__init__()
        self.net = net
        self.basis = basis
        self.T = T
        self.design = DesignState(basis)
        self.phase = Phase.EXPLORING
        self.committed: PathVector | None = None
        self.fallback: Policy | None = None
        self._epoch_losses: list[float] = []

    @property
    def epoch(self) -> int:
        return self.design.m

    def _choose(self, t):
        if self.phase is Phase.COMMITTED:
            return self.committed
        if self.phase is Phase.FALLBACK:
            return self.fallback.select(t)
        return self.basis.paths[len(self._epoch_losses)]

    def observe(self, t, path, loss):
        if self.phase is Phase.FALLBACK:
            self._issued = None
            self.fallback.observe(t, path, loss)
            return
        super().observe(t, path, loss)

    def _learn(self, t, path, loss):
        if self.phase is not Phase.EXPLORING:
            return
        self._epoch_losses.append(loss)
        if len(self._epoch_losses) == self.basis.d0:
            self.design.record_epoch(self._epoch_losses)
            self._epoch_losses = []
            self._epoch_end()

    def _commit(self, path: PathVector):
        self.phase = Phase.COMMITTED
        self.committed = path
        self.commit_epoch = self.epoch

    def _epoch_end(self):
        raise NotImplementedError


def ec_epochs_known_gap(d: int, T: int, S: float, R: float, gap_min: float) -> int:
    """Exploration length tuned with the true minimum gap (at least one epoch)."""
    s2r2 = S * S * R * R
    n = (16 * d * s2r2 * math.log(d * T) + 8 * math.log(2) * d * d * s2r2) / gap_min ** 2
    return max(1, math.ceil(n))


def ec_epochs_worst_case(d: int, T: int) -> int:
    return max(1, math.ceil(d ** (-2 / 3) * T ** (2 / 3)))


class ExploreThenCommit(_EpochPolicy):
    """Explore for a fixed number of epochs, then commit to the estimated best path.

    ``gap_min`` switches on the known-gap tuning; it is simulator knowledge,
    so such a policy is flagged ``oracle_assisted``.
    """

    def __init__(self, net, basis, T, R, gap_min: float | None = None):
        super().__init__(net, basis, T)
        d0 = basis.d0
        if gap_min is None:
            self.name = "ec-worstcase"
            n = ec_epochs_worst_case(d0, T)
        else:
            self.name = "ec-gap"
            self.oracle_assisted = True
            n = ec_epochs_known_gap(d0, T, basis.S, R, gap_min)
        if n * d0 > T:
            clamped = max(1, T // d0)
            log.warning("EC exploration of %d epochs exceeds horizon; clamping to %d", n, clamped)
            n = clamped
        self.n_epochs = n

    def _epoch_end(self):
        if self.epoch >= self.n_epochs:
            path, _ = extremal_path(self.net, self.design.mu_hat, Sense.MIN)
            self._commit(path)


def ttc_radius_fn(basis: Basis, R: float, T: int):
    """Confidence radius per epoch: the full-rank form with delta = T^-2,
    the rank-deficient form with delta = T^-3."""
    general = basis.d0 < basis.d
    power = 3 if general else 2
    delta = float(T) ** -power if T > 1 else 0.5
    params = ConfidenceParams(basis.S, R, basis.d0, delta)
    fn = radius_general if general else radius_identifiable
    return lambda m: fn(m, params)


def mttc_epoch_cap(basis: Basis, R: float, T: int) -> int:
    """Epochs MTTC spends before handing off to Thompson sampling."""
    s2r2 = basis.S ** 2 * R ** 2
    d0 = basis.d0
    log_t = math.log(T)
    if basis.d0 < basis.d:
        n = math.sqrt(T) * s2r2 * (32 * math.log(2) * d0 + 96 * log_t) / d0 ** 2
    else:
        n = math.sqrt(T) * s2r2 * (2 * math.log(2) * d0 + 8 * log_t) / d0 ** 2
    return max(1, math.ceil(n))


class TopTwoComparison(_EpochPolicy):
    """Explores until the estimated best and runner-up paths separate.

    After each epoch it commits to the estimated shortest path once the
    runner-up (from :func:`ssp`) is estimated more than twice the confidence
    radius longer.
    """

    name = "ttc"

    def __init__(self, net, basis, T, R):
        super().__init__(net, basis, T)
        self.R = R
        self.radius = ttc_radius_fn(basis, R, T)
        self.last_gap: float | None = None

    def _epoch_end(self):
        mu_hat = self.design.mu_hat
        best, best_val = extremal_path(self.net, mu_hat, Sense.MIN)
        try:
            runner_up = ssp(self.net, mu_hat, best)
        except NoSecondPath:
            self._commit(best)
            return
        self.last_gap = runner_up.value(mu_hat) - best_val
        if self.last_gap > 2.0 * self.radius(self.epoch):
            self._commit(best)


class ModifiedTopTwoComparison(TopTwoComparison):
    """TTC capped at a fixed number of epochs, then Thompson sampling.

    The fallback sampler is warm-started with every exploration observation.
    """

    name = "mttc"

    def __init__(self, net, basis, T, R, rng: np.random.Generator):
        super().__init__(net, basis, T, R)
        self.rng = rng
        self.epoch_cap = mttc_epoch_cap(basis, R, T)

    def _epoch_end(self):
        super()._epoch_end()
        if self.phase is Phase.EXPLORING and self.epoch >= self.epoch_cap:
            ts = ThompsonSampling(self.net, self.R, self.rng)
            ts.warm_start(self.design.V, self.design.design_response)
            self.fallback = ts
            self.phase = Phase.FALLBACK
            self.fallback_epoch = self.epoch + 1


def make_policy(name: str, net: Network, basis: Basis | None, T: int, R: float,
                rng: np.random.Generator, instance=None, ofu_cap: int = OFU_PATH_CAP) -> Policy:
    """Build a policy by its command-line name.

    ``instance`` is only consulted by oracle-assisted policies (``ec-gap``
    reads the true minimum gap, ``optimal`` the true best path).
    """
    if name == "ec-gap":
        if instance is None:
            raise ValueError("ec-gap needs the instance's minimum gap")
        return ExploreThenCommit(net, basis, T, R, gap_min=instance.gap_min)
    if name == "ec-worstcase":
        return ExploreThenCommit(net, basis, T, R)
    if name == "ttc":
        return TopTwoComparison(net, basis, T, R)
    if name == "mttc":
        return ModifiedTopTwoComparison(net, basis, T, R, rng)
    if name == "ts":
        return ThompsonSampling(net, R, rng)
    if name == "ofu":
        return OFU(net, R, T, cap=ofu_cap)
    if name == "uniform-random":
        return UniformRandom(net, rng)
    if name == "optimal":
        if instance is None:
            raise ValueError("optimal needs the instance")
        return FixedPath(instance.optimal, name="optimal", oracle_assisted=True)
    raise ValueError(f"unknown policy {name!r}; choose from {POLICY_NAMES + DEBUG_POLICY_NAMES}")
