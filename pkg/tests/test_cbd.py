import itertools

import numpy as np
import pytest

from ctxkit.cbd import (
    CyclicSystem,
    classify_cbd,
    cnt1,
    direct_influence,
    to_cyclic_system,
)
from ctxkit.core import EmpiricalModel, ScenarioError, permute_outcomes, uniform_model
from ctxkit.measures import cyclic_violation
from ctxkit.scenarios import (
    bell_chsh_scenario,
    bell_model,
    generalized_ws_scenario,
    pr_box_model,
    pr_prism_model,
    sahara_model,
    ws_model,
)

from conftest import cycle_scenario, random_model
from oracles import random_nonsignalling_cycle


def test_to_cyclic_system_sizes():
    assert to_cyclic_system(bell_model()).n == 4
    assert to_cyclic_system(pr_prism_model()).n == 3
    assert to_cyclic_system(uniform_model(generalized_ws_scenario("p", "s", "a", "q", "t", "b"))).n == 4
    with pytest.raises(ScenarioError, match="2 observables|need 2"):
        to_cyclic_system(ws_model())


def test_cycle_walk_order():
    sys_ = to_cyclic_system(bell_model())
    assert sys_.context_pairs == (("a1", "b1"), ("a1", "b2"), ("a2", "b2"), ("a2", "b1"))


def test_direct_influence_examples():
    assert direct_influence(to_cyclic_system(bell_model())) == 0
    assert direct_influence(to_cyclic_system(pr_box_model())) == 0
    two = CyclicSystem(["a", "b"], [("a", "b"), ("a", "b")], [(1, 0.2, 0.2), (-1, 0.2, -0.2)])
    assert direct_influence(two) == pytest.approx(2.0)


def test_cnt1_examples():
    r = cnt1(to_cyclic_system(pr_box_model()))
    assert (r.s_odd_value, r.delta, r.cnt1, r.contextual) == (4.0, 0.0, 2.0, True)
    s = classify_cbd(sahara_model())
    assert s.s_odd_value == pytest.approx(2.192, abs=0.005)
    assert s.delta == pytest.approx(0.0, abs=1e-12)
    assert s.cnt1 == pytest.approx(0.192, abs=0.005) and s.contextual
    det = EmpiricalModel(bell_chsh_scenario(), [(1, 0, 0, 0)] * 4)
    d = classify_cbd(det)
    assert (d.s_odd_value, d.delta, d.cnt1, d.contextual) == (2.0, 0.0, 0.0, False)


def test_classify_examples():
    prism = classify_cbd(pr_prism_model())
    # s_odd(1, 1, -1) = 3, n = 3: cnt1 = 3 - 0 - 3 + 2
    assert prism.s_odd_value == 3 and prism.cnt1 == 2 and prism.contextual
    assert classify_cbd(pr_box_model()).contextual
    u = classify_cbd(uniform_model(bell_chsh_scenario()))
    assert u.cnt1 == -2 and not u.contextual


def test_system_invariants():
    with pytest.raises(ScenarioError, match="appears"):
        CyclicSystem(["a", "b", "c"], [("a", "b"), ("b", "c")], np.zeros((2, 3)))
    with pytest.raises(ScenarioError, match="joint distribution"):
        CyclicSystem(["a", "b"], [("a", "b"), ("a", "b")], [(1, -1, 1), (0, 0, 0)])
    with pytest.raises(ScenarioError, match="\\[-1, 1\\]"):
        CyclicSystem(["a", "b"], [("a", "b"), ("a", "b")], [(1.5, 0, 0), (0, 0, 0)])
    with pytest.raises(ScenarioError, match="cycle order"):
        CyclicSystem(list("abcd"), [("a", "b"), ("c", "d"), ("b", "c"), ("d", "a")], np.zeros((4, 3)))


@pytest.mark.parametrize("n", [3, 4, 5])
def test_nonsignalling_cnt1_equals_violation(n):
    rng = np.random.default_rng(n)
    sc = cycle_scenario(n)
    for _ in range(10):
        m = EmpiricalModel(sc, random_nonsignalling_cycle(rng, n))
        r = classify_cbd(m)
        assert r.delta <= 1e-9
        assert r.cnt1 == pytest.approx(cyclic_violation(m).violation, abs=1e-9)


def _rotate_reverse(system, shift, reverse):
    pairs = list(system.context_pairs)
    ex = list(system.expectations)
    idx = list(range(system.n))
    idx = idx[shift:] + idx[:shift]
    if reverse:
        idx = idx[::-1]
    return CyclicSystem(system.contents, [pairs[i] for i in idx], [ex[i] for i in idx])


def test_delta_invariant_under_rotation_and_reversal(rng):
    m = random_model(cycle_scenario(4), rng)
    system = to_cyclic_system(m)
    base = direct_influence(system)
    assert base > 0
    for shift in range(4):
        for rev in (False, True):
            assert direct_influence(_rotate_reverse(system, shift, rev)) == pytest.approx(base, abs=1e-12)


@pytest.mark.parametrize("n", [3, 4])
def test_cnt1_invariant_under_every_sign_flip_pattern(n):
    rng = np.random.default_rng(100 + n)
    m = random_model(cycle_scenario(n), rng)
    base = classify_cbd(m)
    for pattern in itertools.product((False, True), repeat=n):
        flips = {f"x{i}": [1, 0] for i, f in enumerate(pattern) if f}
        r = classify_cbd(permute_outcomes(m, flips))
        assert r.cnt1 == pytest.approx(base.cnt1, abs=1e-12)
        assert r.delta == pytest.approx(base.delta, abs=1e-12)


def test_pairwise_reconstruction(rng):
    for n in (3, 4):
        m = random_model(cycle_scenario(n), rng)
        system = to_cyclic_system(m)
        from ctxkit.core import cycle_order
        order = cycle_order(m.scenario)
        rebuilt = system.pairwise_distributions()
        for row, j in zip(rebuilt, order):
            assert row == pytest.approx(m.tables[j], abs=1e-12)
