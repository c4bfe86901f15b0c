import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bandit_routing import (CapExceeded, NoSecondPath, PathMismatch, Sense, enumerate_paths,
                            extremal_path, grid_network)
from bandit_routing.oracles import brute_second_shortest
from bandit_routing.policies import (OFU, ExploreThenCommit, FixedPath, ModifiedTopTwoComparison,
                                     Phase, ThompsonSampling, TopTwoComparison,
                                     ec_epochs_known_gap, ec_epochs_worst_case, make_policy,
                                     mttc_epoch_cap, ssp, ttc_radius_fn)
from bandit_routing.sim import instance_from_mu, make_instance, policy_rng, run
from bandit_routing.spanner import exploration_basis, general_basis

from conftest import chain_net, diamond_net, parallel_net


def _drive(policy, instance, T, rng=None):
    rng = rng or np.random.default_rng(0)
    seq = []
    for t in range(1, T + 1):
        a = policy.select(t)
        seq.append(a)
        policy.observe(t, a, a.value(instance.mu) + instance.noise_std * rng.standard_normal())
    return seq


# -- second shortest path ------------------------------------------------------

def test_ssp_diamond():
    net = diamond_net()
    rng = np.random.default_rng(0)
    for _ in range(10):
        psi = rng.normal(size=4)
        best, _ = extremal_path(net, psi)
        other = ssp(net, psi, best)
        assert other != best
        assert set(other.links) | set(best.links) == {0, 1, 2, 3}


def test_ssp_single_path():
    net = chain_net()
    best, _ = extremal_path(net, np.ones(3))
    with pytest.raises(NoSecondPath):
        ssp(net, np.ones(3), best)


@pytest.mark.parametrize("p", [2, 3, 4])
def test_ssp_matches_brute(p):
    net = grid_network(p)
    rng = np.random.default_rng(p)
    for _ in range(100):
        psi = rng.normal(size=net.d)
        best, _ = extremal_path(net, psi)
        second = ssp(net, psi, best)
        assert second != best
        assert second.value(psi) == brute_second_shortest(net, psi)[1]


def test_ssp_negative_weights(grid4):
    # large negative entries are where a too-small exclusion weight fails
    rng = np.random.default_rng(9)
    for _ in range(50):
        psi = rng.normal(size=grid4.d) * 100 - 80
        best, _ = extremal_path(grid4, psi)
        assert ssp(grid4, psi, best).value(psi) == brute_second_shortest(grid4, psi)[1]


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(-50, 50), min_size=8, max_size=8))
def test_ssp_with_ties(w):
    # integer weights produce many ties; values must still agree
    net = grid_network(2)
    psi = np.array(w, dtype=float)
    best, _ = extremal_path(net, psi)
    second = ssp(net, psi, best)
    assert second != best
    assert second.value(psi) == brute_second_shortest(net, psi)[1]


# -- policy contract -----------------------------------------------------------

def test_path_mismatch(grid2):
    paths = enumerate_paths(grid2)
    pol = FixedPath(paths[0])
    pol.select(1)
    with pytest.raises(PathMismatch):
        pol.observe(1, paths[1], 0.0)


def test_exploring_issues_basis_in_order(grid4):
    inst = make_instance(grid4, 1000, 1.0, 0)
    basis = general_basis(grid4)
    pol = TopTwoComparison(grid4, basis, 10_000, 1.0)
    pol.radius = lambda m: math.inf
    seq = _drive(pol, inst, 3 * basis.d0)
    assert pol.phase is Phase.EXPLORING
    assert seq == basis.paths * 3


# -- explore then commit -------------------------------------------------------

def test_ec_worst_case_epochs():
    assert ec_epochs_worst_case(8, 25000) == 214


def test_ec_known_gap_formula():
    d, T, S, R, gap = 4, 1000, 1.0, 1.0, 3.0
    expected = math.ceil((16 * d * math.log(d * T) + 8 * math.log(2) * d * d) / gap ** 2)
    assert ec_epochs_known_gap(d, T, S, R, gap) == expected
    assert ec_epochs_known_gap(d, T, S, R, 1e9) == 1


def test_ec_clamps_to_horizon(grid2):
    basis = general_basis(grid2)
    pol = ExploreThenCommit(grid2, basis, 20, 1.0, gap_min=1e-3)
    assert pol.n_epochs == 20 // basis.d0


def test_ec_known_gap_zero_noise_diamond():
    net = diamond_net()
    inst = instance_from_mu(net, [1.0, 5.0, 2.0, 3.0], 0.0)
    basis = exploration_basis(net)
    pol = ExploreThenCommit(net, basis, 1000, 0.0, gap_min=inst.gap_min)
    assert pol.oracle_assisted
    _drive(pol, inst, 100)
    assert pol.phase is Phase.COMMITTED
    assert pol.committed == inst.optimal
    assert pol.commit_epoch == 1


# -- top-two comparison --------------------------------------------------------

def test_ttc_commit_boundary(grid2):
    inst = make_instance(grid2, 1000, 0.0, 3)
    basis = general_basis(grid2)

    probe = TopTwoComparison(grid2, basis, 1000, 0.0)
    probe.radius = lambda m: math.inf
    _drive(probe, inst, basis.d0)
    gap = probe.last_gap
    assert gap == pytest.approx(inst.gap_min)

    strict = TopTwoComparison(grid2, basis, 1000, 0.0)
    strict.radius = lambda m: gap / 2
    _drive(strict, inst, basis.d0)
    assert strict.phase is Phase.EXPLORING

    wide = TopTwoComparison(grid2, basis, 1000, 0.0)
    wide.radius = lambda m: gap / 3
    _drive(wide, inst, basis.d0)
    assert wide.phase is Phase.COMMITTED


def test_ttc_zero_noise_diamond():
    net = diamond_net()
    inst = instance_from_mu(net, [1.0, 5.0, 2.0, 3.0], 0.0)
    pol = TopTwoComparison(net, exploration_basis(net), 1000, 0.0)
    seq = _drive(pol, inst, 50)
    assert pol.commit_epoch == 1
    assert all(a == inst.optimal for a in seq[2:])


def test_ttc_single_path_commits():
    net = chain_net()
    inst = instance_from_mu(net, [1.0, 2.0, 3.0], 0.0)
    pol = TopTwoComparison(net, exploration_basis(net), 10, 1.0)
    _drive(pol, inst, 5)
    assert pol.committed == inst.optimal


@pytest.mark.parametrize("p", [2, 4])
def test_ttc_commit_epoch_matches_analytic(p):
    """Exact observations with a positive radius: commit at the first m with gap > 2 r(m)."""
    net = grid_network(p)
    basis = general_basis(net)
    T, R = 25000, 1.0
    radius = ttc_radius_fn(basis, R, T)
    for seed in range(5):
        inst = make_instance(net, 1000, 0.0, seed)
        expected = next(m for m in range(1, 10**6) if inst.gap_min > 2 * radius(m))
        pol = TopTwoComparison(net, basis, T, R)
        _drive(pol, inst, expected * basis.d0 + 3)
        assert pol.commit_epoch == expected
        assert pol.committed == inst.optimal


def test_ttc_radius_delta_rule():
    par = exploration_basis(parallel_net(4))
    r = ttc_radius_fn(par, 1.0, 100)
    assert r(1) == pytest.approx(2.0 * math.sqrt(2 * math.log(2) * 16 + 16 * math.log(100 ** 2)))
    g = general_basis(grid_network(2))
    r = ttc_radius_fn(g, 1.0, 100)
    assert r(1) == pytest.approx(g.S * math.sqrt(32 * math.log(6) * 16 + 32 * 4 * math.log(100 ** 3)))


@pytest.mark.parametrize("p", [2, 4])
def test_ttc_commit_soundness_noiseless(p):
    net = grid_network(p)
    basis = general_basis(net)
    for seed in range(100):
        inst = make_instance(net, 1000, 0.0, seed)
        pol = TopTwoComparison(net, basis, 1000, 0.0)
        _drive(pol, inst, basis.d0)
        assert pol.committed == inst.optimal


# -- modified top-two comparison ----------------------------------------------

def test_mttc_cap_identifiable_example():
    basis = exploration_basis(parallel_net(8))
    assert basis.S == 2.0 and basis.d0 == basis.d == 8
    expected = math.ceil(math.sqrt(25000) * 4 * (2 * math.log(2) * 8 + 8 * math.log(25000)) / 64)
    assert mttc_epoch_cap(basis, 1.0, 25000) == expected


def test_mttc_cap_general_form(grid4):
    basis = general_basis(grid4)
    T, R = 25000, 1.0
    expected = math.ceil(math.sqrt(T) * basis.S ** 2 * R ** 2
                         * (32 * math.log(2) * 16 + 96 * math.log(T)) / 256)
    assert mttc_epoch_cap(basis, R, T) == expected
    assert mttc_epoch_cap(basis, 1e-9, T) == 1


def test_mttc_equals_ttc_when_committing_early(grid2):
    basis = general_basis(grid2)
    for seed in range(5):
        inst = make_instance(grid2, 1000, 0.1, seed)
        ttc = TopTwoComparison(grid2, basis, 5000, 0.1)
        mttc = ModifiedTopTwoComparison(grid2, basis, 5000, 0.1, policy_rng(seed))
        a = run(ttc, inst, 5000, seed)
        b = run(mttc, inst, 5000, seed)
        assert ttc.commit_epoch is not None and ttc.commit_epoch < mttc.epoch_cap
        assert [a.paths[i] for i in a.path_ids] == [b.paths[i] for i in b.path_ids]


def test_mttc_falls_back_on_zero_gap():
    net = diamond_net()
    inst = instance_from_mu(net, [1.0, 1.0, 1.0, 1.0], 0.1)
    basis = exploration_basis(net)
    T, R = 2000, 0.1
    pol = ModifiedTopTwoComparison(net, basis, T, R, np.random.default_rng(0))
    cap = pol.epoch_cap
    assert cap * basis.d0 < T
    _drive(pol, inst, T)
    assert pol.commit_epoch is None
    assert pol.phase is Phase.FALLBACK
    assert pol.fallback_epoch == cap + 1


# -- Thompson sampling ---------------------------------------------------------

def test_ts_converges_zero_noise():
    net = diamond_net()
    inst = instance_from_mu(net, [1.0, 5.0, 2.0, 3.0], 0.0)
    pol = ThompsonSampling(net, 0.0, np.random.default_rng(0))
    seq = _drive(pol, inst, 1000)
    assert set(seq[:50]) == set(enumerate_paths(net))
    assert sum(a == inst.optimal for a in seq[-100:]) >= 95


def test_ts_deterministic(grid4):
    inst = make_instance(grid4, 1000, 1.0, 0)
    runs = [_drive(ThompsonSampling(grid4, 1.0, np.random.default_rng(5)), inst, 300)
            for _ in range(2)]
    assert runs[0] == runs[1]


def test_ts_prior_round(grid2):
    pol = ThompsonSampling(grid2, 1.0, np.random.default_rng(0))
    assert pol.select(1) in enumerate_paths(grid2)


def test_ts_warm_start_matches_sequential(grid2):
    rng = np.random.default_rng(1)
    paths = enumerate_paths(grid2)
    a = ThompsonSampling(grid2, 0.5, rng)
    gram = np.zeros((grid2.d, grid2.d))
    resp = np.zeros(grid2.d)
    for k in range(20):
        path = paths[k % 4]
        loss = float(k)
        a._issued = path
        a.observe(k, path, loss)
        gram += np.outer(path.coords, path.coords)
        resp += path.coords * loss
    b = ThompsonSampling(grid2, 0.5, rng)
    b.warm_start(gram, resp)
    np.testing.assert_allclose(a.precision, b.precision)
    np.testing.assert_allclose(a.b, b.b)


# -- OFU -----------------------------------------------------------------------

def test_ofu_first_round_max_width(grid2):
    pol = OFU(grid2, 1.0, 1000)
    assert pol.select(1).hop_count == 4


def test_ofu_converges_zero_noise(grid2):
    inst = make_instance(grid2, 1000, 0.0, 0)
    pol = OFU(grid2, 0.0, 5000)
    seq = _drive(pol, inst, 3000)
    assert all(a == inst.optimal for a in seq[-200:])


def test_ofu_sherman_morrison(grid2):
    inst = make_instance(grid2, 1000, 1.0, 0)
    pol = OFU(grid2, 1.0, 1000)
    seq = _drive(pol, inst, 40)
    V = np.eye(grid2.d) + sum(np.outer(a.coords, a.coords) for a in seq)
    np.testing.assert_allclose(pol.Vinv, np.linalg.inv(V), atol=1e-10)
    w2 = np.einsum("kd,de,ke->k", pol.A, np.linalg.inv(V), pol.A)
    np.testing.assert_allclose(pol.width2, w2, atol=1e-9)


def test_ofu_cap():
    with pytest.raises(CapExceeded):
        OFU(grid_network(8), 1.0, 1000, cap=5000)


# -- factory -------------------------------------------------------------------

@pytest.mark.parametrize("name", ["ec-gap", "ec-worstcase", "ttc", "mttc", "ts", "ofu",
                                  "uniform-random", "optimal"])
def test_make_policy_names(grid2, name):
    inst = make_instance(grid2, 1000, 1.0, 0)
    pol = make_policy(name, grid2, general_basis(grid2), 1000, 1.0, np.random.default_rng(0), inst)
    assert pol.name == name
    assert pol.oracle_assisted == (name in ("ec-gap", "optimal"))


def test_make_policy_errors(grid2):
    basis = general_basis(grid2)
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        make_policy("nope", grid2, basis, 10, 1.0, rng)
    with pytest.raises(ValueError):
        make_policy("ec-gap", grid2, basis, 10, 1.0, rng)
