import itertools

import numpy as np
import pytest
from scipy.optimize import linprog

from ctxkit.core import (
    EmpiricalModel,
    Scenario,
    ScenarioError,
    is_nonsignalling,
    marginalize,
    mix,
    permute_outcomes,
    uniform_model,
)
from ctxkit.measures import (
    GlobalAssignmentLimitError,
    check_ns_witness,
    check_witness,
    contextual_fraction,
    cf_violation_relation,
    cyclic_correlations,
    cyclic_violation,
    emeriau_conclusive,
    global_assignments,
    incidence_matrix,
    s_odd,
    signalling_fraction,
)
from ctxkit.scenarios import (
    bell_chsh_scenario,
    bell_model,
    pr_box_model,
    pr_prism_model,
    pr_prism_scenario,
    sahara_model,
    trophy_suitcase_scenario,
)

from conftest import cycle_scenario, random_model
from oracles import random_nonsignalling_cycle, s_odd_exhaustive, vertex_max


def brute_incidence(scenario):
    """Incidence matrix built by direct comparison of assignments."""
    sizes = [len(o) for o in scenario.outcomes]
    gs = list(itertools.product(*map(range, sizes)))
    rows = []
    for ctx in scenario.contexts:
        pos = [scenario.observables.index(o) for o in ctx]
        for sec in itertools.product(*(range(sizes[p]) for p in pos)):
            rows.append([1.0 if tuple(g[p] for p in pos) == sec else 0.0 for g in gs])
    return np.array(rows)


def test_global_assignments_counts():
    assert len(global_assignments(bell_chsh_scenario())) == 16
    assert len(global_assignments(pr_prism_scenario())) == 8
    assert len(global_assignments(trophy_suitcase_scenario())) == 4
    assert global_assignments(pr_prism_scenario())[1].tolist() == [0, 0, 1]


def test_global_assignment_limit(monkeypatch):
    with pytest.raises(GlobalAssignmentLimitError):
        global_assignments(bell_chsh_scenario(), limit=15)
    monkeypatch.setenv("CTXKIT_GLOBAL_LIMIT", "8")
    with pytest.raises(GlobalAssignmentLimitError):
        contextual_fraction(bell_model())
    assert len(global_assignments(pr_prism_scenario())) == 8


def test_incidence_matrix_shapes():
    m = incidence_matrix(bell_chsh_scenario())
    assert m.shape == (16, 16)
    assert np.all(m.sum(axis=0) == 4)
    p = incidence_matrix(pr_prism_scenario())
    assert p.shape == (12, 8)
    assert np.all(p.sum(axis=0) == 3)
    single = Scenario(["a", "b"], "01", [("a", "b")])
    assert np.array_equal(incidence_matrix(single), np.eye(4))


@pytest.mark.parametrize("sc", [bell_chsh_scenario(), pr_prism_scenario(), trophy_suitcase_scenario(),
                                Scenario(["p", "q"], {"p": "abc", "q": "xy"}, [("p",), ("q", "p")])])
def test_incidence_matches_brute_force(sc):
    assert np.array_equal(incidence_matrix(sc), brute_incidence(sc))


def test_cf_pr_box_and_brute_force_column_check():
    m = brute_incidence(bell_chsh_scenario())
    e = pr_box_model().vector()
    # every global assignment hits at least one zero-probability section
    assert all(np.any(e[m[:, g] == 1] == 0) for g in range(16))
    assert contextual_fraction(pr_box_model()).value == pytest.approx(1.0, abs=1e-9)


def test_cf_deterministic_single_context():
    sc = Scenario(["a", "b"], "01", [("a", "b")])
    assert contextual_fraction(EmpiricalModel(sc, [(0, 0, 1, 0)])).value == pytest.approx(0.0, abs=1e-12)


def test_cf_sahara():
    assert contextual_fraction(sahara_model()).value == pytest.approx(0.096, abs=0.005)


def test_cf_bell():
    r = contextual_fraction(bell_model())
    assert r.value == pytest.approx(0.25, abs=1e-9)
    assert check_witness(bell_model(), r.witness)
    assert r.witness.sum() == pytest.approx(0.75)


def test_sf_examples():
    assert signalling_fraction(bell_model()).value == pytest.approx(0.0, abs=1e-12)
    assert signalling_fraction(pr_box_model()).value == pytest.approx(0.0, abs=1e-12)
    sc = Scenario(["a1", "b1", "b2"], "01", [("a1", "b1"), ("a1", "b2")])
    m = EmpiricalModel(sc, [(1, 0, 0, 0), (0, 0, 0, 1)])
    # common mass on a1 is sum_t min(marg1, marg2) = min(1,0) + min(0,1) = 0
    r = signalling_fraction(m)
    assert r.value == pytest.approx(1.0, abs=1e-12)


def test_sf_two_context_closed_form(rng):
    # for two contexts sharing one observable the largest non-signalling
    # sub-model has mass sum_t min(m1(t), m2(t)) of the overlap marginals
    sc = Scenario(["a", "b", "c"], {"a": "012", "b": "01", "c": "01"}, [("a", "b"), ("a", "c")])
    for _ in range(20):
        m = random_model(sc, rng)
        m1 = marginalize(m.distribution(0), ["a"]).probabilities
        m2 = marginalize(m.distribution(1), ["a"]).probabilities
        r = signalling_fraction(m)
        assert r.value == pytest.approx(1 - np.minimum(m1, m2).sum(), abs=1e-9)
        assert check_ns_witness(m, r.witness)


def test_emeriau_examples():
    ok, slack = emeriau_conclusive(pr_box_model())
    assert ok and slack == pytest.approx(1.0, abs=1e-9)
    ok, slack = emeriau_conclusive(bell_model())
    assert ok and slack == pytest.approx(0.25, abs=1e-9)
    ok, slack = emeriau_conclusive(uniform_model(bell_chsh_scenario()))
    assert not ok and slack == pytest.approx(0.0, abs=1e-12)


def test_cyclic_correlations():
    e = cyclic_correlations(sahara_model(renormalize_rows=False))
    assert e == pytest.approx([0.610, -0.822, 0.382, 0.378], abs=1e-12)
    assert cyclic_correlations(bell_model()) == pytest.approx([1, 0.5, 0.5, -0.5])
    assert cyclic_correlations(uniform_model(bell_chsh_scenario())) == pytest.approx([0, 0, 0, 0])
    with pytest.raises(ScenarioError):
        cyclic_correlations(EmpiricalModel(trophy_suitcase_scenario(), [(1, 0), (0, 1)]))
    ternary = Scenario(["a", "b"], "xyz", [("a", "b")])
    with pytest.raises(ScenarioError):
        cyclic_correlations(uniform_model(ternary))


def test_s_odd_examples():
    assert s_odd([1, 0.5, 0.5, -0.5]) == pytest.approx(2.5)
    assert s_odd([1, 1, 1, 1]) == pytest.approx(2.0)
    assert s_odd([0.610, -0.822, 0.382, 0.378]) == pytest.approx(2.192)
    assert s_odd([0.0, 1.0]) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        s_odd([])


@pytest.mark.parametrize("n", range(1, 13))
def test_s_odd_matches_exhaustive_search(n):
    rng = np.random.default_rng(n)
    for _ in range(5 if n > 9 else 30):
        # dyadic entries keep both sums exact
        x = rng.integers(-64, 65, size=n) / 64
        assert s_odd(x) == s_odd_exhaustive(x)
        y = rng.uniform(-1, 1, size=n)
        assert s_odd(y) == pytest.approx(s_odd_exhaustive(y), abs=1e-12)


def test_cyclic_violation_examples():
    assert cyclic_violation(sahara_model()).violation == pytest.approx(0.192, abs=0.005)
    assert cyclic_violation(bell_model()).violation == pytest.approx(0.5, abs=1e-12)
    v = cyclic_violation(pr_box_model())
    assert v.violation == pytest.approx(2.0) and v.n == 4
    p = cyclic_violation(pr_prism_model())
    assert p.n == 3 and p.violation == pytest.approx(2.0)
    with pytest.raises(ScenarioError):
        cyclic_violation(EmpiricalModel(trophy_suitcase_scenario(), [(1, 0), (0, 1)]))


def test_cf_violation_relation():
    r = cf_violation_relation(sahara_model())
    assert r.applicable
    assert r.lhs == pytest.approx(0.096, abs=0.005)
    assert abs(r.lhs - r.rhs) <= 0.005
    pr = cf_violation_relation(pr_box_model())
    assert pr.holds_as_equality and pr.lhs == pytest.approx(1.0)
    u = cf_violation_relation(uniform_model(bell_chsh_scenario()))
    assert u.lhs == 0 and u.rhs == pytest.approx(0.0, abs=1e-12) and u.holds_as_equality


def test_cf_violation_relation_not_asserted_for_asymmetric():
    sc = bell_chsh_scenario()
    m = EmpiricalModel(sc, [(0.7, 0.1, 0.1, 0.1)] * 4)
    r = cf_violation_relation(m)
    assert not r.applicable and not r.holds_as_equality


@pytest.mark.parametrize("name,model", [("pr-box", pr_box_model()), ("sahara", sahara_model())])
def test_cf_monotone_under_noise(name, model):
    u = uniform_model(model.scenario)
    cfs = [contextual_fraction(mix(model, u, t)).value for t in np.linspace(0, 1, 11)]
    assert all(b <= a + 1e-9 for a, b in zip(cfs, cfs[1:]))
    assert cfs[-1] == pytest.approx(0.0, abs=1e-12)


def test_violation_bounded_by_two(rng):
    for n in (3, 4, 5):
        sc = cycle_scenario(n)
        for _ in range(20):
            assert cyclic_violation(random_model(sc, rng)).violation <= 2 + 1e-12


def test_violation_sign_flip_invariance():
    model = sahara_model()
    base = cyclic_violation(model).violation
    for obs in model.scenario.observables:
        flipped = permute_outcomes(model, {obs: [1, 0]})
        assert cyclic_violation(flipped).violation == pytest.approx(base, abs=1e-12)
    assert cyclic_violation(model, sign_map=(-1, 1)).violation == pytest.approx(base, abs=1e-12)


def test_sf_zero_characterization(rng):
    for n in (3, 4):
        sc = cycle_scenario(n)
        for k in range(12):
            tables = random_nonsignalling_cycle(rng, n)
            if k % 2:
                tables = tables + rng.uniform(0, 0.05, size=tables.shape)
                tables /= tables.sum(axis=1, keepdims=True)
            m = EmpiricalModel(sc, tables)
            sf = signalling_fraction(m).value
            assert (sf <= 1e-7) == is_nonsignalling(m, 1e-7)


def test_cf_witness_dominated(rng):
    for sc in (bell_chsh_scenario(), pr_prism_scenario(), cycle_scenario(5)):
        for _ in range(5):
            m = random_model(sc, rng)
            r = contextual_fraction(m)
            assert check_witness(m, r.witness, 1e-7)
            assert 1 - r.witness.sum() == pytest.approx(r.value, abs=1e-9)


def _all_covers(n):
    obs = [f"x{i}" for i in range(n)]
    subsets = [c for k in range(1, n + 1) for c in itertools.combinations(obs, k)]
    for r in range(1, len(subsets) + 1):
        for fam in itertools.combinations(subsets, r):
            if set().union(*map(set, fam)) == set(obs):
                yield Scenario(obs, "01", fam)


def test_cf_matches_highs_on_every_small_binary_scenario(rng):
    covers = [sc for n in (1, 2, 3) for sc in _all_covers(n)]
    assert len(covers) > 100
    for sc in covers:
        m = random_model(sc, rng)
        a = brute_incidence(sc)
        ref = linprog(-np.ones(a.shape[1]), A_ub=a, b_ub=m.vector(), bounds=(0, None), method="highs")
        assert contextual_fraction(m).value == pytest.approx(1 + ref.fun, abs=1e-6)
