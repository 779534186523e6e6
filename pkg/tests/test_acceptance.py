"""Randomized sweeps at acceptance scale on unit-disk graphs with their
grid partition. Run with ``pytest -m slow``."""

import pytest
from enumeration import coct_parity, cvc_parity, fvs_parity, steiner_parity
from graphs import random_disks

from geosolve import oracles
from geosolve.branching import max_independent_set, min_r_dominating_set
from geosolve.cutcount.core import (
    MODES,
    evaluate_over_treedepth,
    sample_weights,
)
from geosolve.cutcount.plugins import (
    CoctPlugin,
    CvcPlugin,
    FvsPlugin,
    SteinerPlugin,
)
from geosolve.cutcount.solvers import (
    connected_vertex_cover,
    feedback_vertex_set,
    odd_cycle_transversal,
    steiner_tree,
)
from geosolve.decomposition import (
    build_separator_tree,
    build_weighted_treedepth,
)

pytestmark = pytest.mark.slow

DETECTION_TRIALS = 10
DETECTION_RATE = 0.99


def _disks(n, seed):
    g, q = random_disks(n, seed, density=0.4)
    return g, q, build_weighted_treedepth(q)


def _cut_count_cases(g, q, td):
    terminals = sorted({0, g.n - 1})
    yield (
        oracles.brute_steiner(g, terminals).value,
        lambda k, **kw: steiner_tree(g, q, td, terminals, k, **kw),
    )
    yield (
        oracles.brute_cvc(g).value,
        lambda k, **kw: connected_vertex_cover(g, q, td, k, **kw),
    )
    yield (
        oracles.brute_fvs(g).value,
        lambda k, **kw: feedback_vertex_set(g, q, td, k, **kw),
    )
    for connected in (False, True):
        yield (
            oracles.brute_oct(g, connected=connected).value,
            lambda k, connected=connected, **kw: odd_cycle_transversal(
                g, q, td, k, connected, **kw
            ),
        )


def test_cut_count_detection_rate():
    detected = total = 0
    for seed in range(24):
        g, q, td = _disks(8 + seed % 4, seed)
        for best, decide in _cut_count_cases(g, q, td):
            if best is None:
                continue
            total += 1
            result = decide(best, trials=DETECTION_TRIALS, seed=seed)
            detected += bool(result)
            if best > 0:
                assert not decide(
                    best - 1, trials=DETECTION_TRIALS, seed=seed
                )
    assert total >= 48
    assert detected >= DETECTION_RATE * total


@pytest.mark.parametrize("seed", range(50))
def test_root_polynomial_matches_parity(seed):
    g, q, td = _disks(5 + seed % 4, seed)
    n = g.n
    terminals = [0, n - 1]
    cases = [
        (
            SteinerPlugin(g, q, terminals, n),
            lambda w, caps: steiner_parity(g, q, terminals, w, caps),
        ),
        (CvcPlugin(g, q, n, 0), lambda w, caps: cvc_parity(g, q, 0, w, caps)),
        (
            FvsPlugin(g, q, seed % n),
            lambda w, caps: fvs_parity(g, q, w, caps),
        ),
    ]
    for root in (None, 0):
        cases.append(
            (
                CoctPlugin(g, q, n, root),
                lambda w, caps, root=root: coct_parity(g, q, root, w, caps),
            )
        )
    for plugin, parity in cases:
        weights = sample_weights(plugin.universe(), seed)
        polys = [
            evaluate_over_treedepth(plugin, td, weights, mode=mode)
            for mode in MODES
        ]
        assert set(polys[0].terms) == parity(weights, plugin.caps())
        assert polys[0] == polys[1]


@pytest.mark.parametrize("seed", range(200))
def test_independent_set_at_scale(seed):
    g, q, td = _disks(10 + seed % 9, seed)
    result = max_independent_set(g, q, td)
    assert result.value == oracles.brute_is(g).value
    assert result.stats.within_space_bound(g.n)


@pytest.mark.parametrize("seed", range(200))
def test_dominating_set_at_scale(seed):
    g, q, _ = _disks(10 + seed % 9, seed)
    r = 1 + seed % 2
    result = min_r_dominating_set(g, q, build_separator_tree(q, r), r)
    assert result.value == oracles.brute_rds(g, r).value
    assert result.stats.within_space_bound(g.n)
