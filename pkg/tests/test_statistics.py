from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from empchoice.classes import (EuSingleton, ExplicitFinite, FsdIsotoneIndicators, GridSpec,
                               SsdConcave, TabulatedFunction)
from empchoice.errors import DomainError, UnsupportedClassError
from empchoice.protocol import ConsequenceSpace, EmpiricalSample, sample_of
from empchoice.statistics import (ContaminationSpec, PairEvaluator, criterion_pair,
                                  evaluate_witness, fsd_statistic_bruteforce, pairwise_t_matrix,
                                  robust_bruteforce, robust_t_inf, robust_t_sup,
                                  ssd_statistic_direct, t_statistic)

FSD = FsdIsotoneIndicators()
EU = EuSingleton()


def sample(values, dim=1, dirs=None):
    arr = np.asarray(values, dtype=float).reshape(-1, dim)
    return EmpiricalSample(ConsequenceSpace(dim, dirs), arr)


def random_pair(rng, dim, zu, zv, levels=3):
    return (sample(rng.integers(0, levels, (zu, dim)), dim),
            sample(rng.integers(0, levels, (zv, dim)), dim))


def test_table1_black_vs_red(table1):
    black, red = sample_of(table1, "Black"), sample_of(table1, "Red")
    sv = t_statistic(FSD, black, red)
    assert sv.value == pytest.approx(-0.4, abs=1e-15)
    assert sv.witness.kind == "threshold"
    assert sv.witness.points[0][0] in (2.0, 3.0)
    assert evaluate_witness(FSD, black, red, sv.witness) == sv.value
    cp = criterion_pair(FSD, black, red)
    assert cp.cr1 == pytest.approx(0.4) and cp.cr2 == 0.0
    assert cp.dominated()


def test_table1_eu_pair(table1):
    red, blue = sample_of(table1, "Red"), sample_of(table1, "Blue")
    cp = criterion_pair(EU, red, blue)
    means = red.points.mean() - blue.points.mean()
    assert cp.cr1 == pytest.approx(-means)
    assert cp.cr2 == pytest.approx(-means)
    assert not cp.dominated()


@pytest.mark.parametrize("cls", [FSD, EU, SsdConcave()])
def test_identical_samples_give_zero(cls):
    s = sample([1, 2, 2, 5])
    assert t_statistic(cls, s, s).value == 0.0


def test_empty_set_wins_ties():
    u = sample([5, 6])
    v = sample([1, 2])
    sv = t_statistic(FSD, u, v)
    assert sv.value == 0.0
    assert sv.witness.kind == "empty"


def test_prompting_minimize_direction(prompting):
    n, p = sample_of(prompting, "neutral"), sample_of(prompting, "polite")
    sv = t_statistic(FSD, n, p)
    assert sv.witness.kind == "upper_set"
    assert evaluate_witness(FSD, n, p, sv.witness) == pytest.approx(sv.value, abs=1e-15)
    assert sv.value == pytest.approx(fsd_statistic_bruteforce(n, p), abs=1e-12)


@pytest.mark.parametrize("dim", [1, 2, 3])
def test_min_cut_matches_bruteforce(dim, rng):
    for _ in range(40):
        u, v = random_pair(rng, dim, int(rng.integers(1, 6)), int(rng.integers(1, 6)))
        got = t_statistic(FSD, u, v, method="closure").value
        assert abs(got - fsd_statistic_bruteforce(u, v)) <= 1e-12


def test_threshold_matches_closure(rng):
    for _ in range(100):
        u, v = random_pair(rng, 1, int(rng.integers(1, 9)), int(rng.integers(1, 9)), levels=6)
        a = t_statistic(FSD, u, v, method="threshold").value
        b = t_statistic(FSD, u, v, method="closure").value
        assert abs(a - b) <= 1e-12


def test_threshold_method_rejects_dim2():
    s = sample([[0, 1]], dim=2)
    with pytest.raises(DomainError):
        t_statistic(FSD, s, s, method="threshold")


def test_witnesses_reevaluate(rng):
    for dim in (1, 2):
        for _ in range(30):
            u, v = random_pair(rng, dim, 4, 5)
            for side, gu, gv in (("base", 0, 0), ("sup", .2, .2), ("inf", .1, .3), ("sup", .3, 0)):
                ev = PairEvaluator(FSD, u, v)
                sv = ev.observed(side, gu, gv)
                assert evaluate_witness(FSD, u, v, sv.witness) == pytest.approx(sv.value, abs=1e-12)


def test_eu_witness_and_translation(rng):
    x, y = rng.normal(size=7), rng.normal(size=9)
    t = t_statistic(EU, sample(x), sample(y)).value
    assert t == pytest.approx(x.mean() - y.mean(), abs=1e-12)
    t2 = t_statistic(EU, sample(x + 3.0), sample(y + 3.0)).value
    assert t2 == pytest.approx(t, abs=1e-12)
    assert t_statistic(EU, sample(x), sample(y)).witness.kind == "utility"


def test_eu_weights_use_normalized_coordinates():
    cls = EuSingleton(weights=(1.0, 1.0))
    u = sample([[10, 1.0]], dim=2, dirs=("min", "max"))
    v = sample([[12, 1.0]], dim=2, dirs=("min", "max"))
    assert t_statistic(cls, u, v).value == pytest.approx(2.0)


def test_explicit_class():
    f = TabulatedFunction.from_mapping("hi", {1.0: 0.0, 2.0: 1.0})
    g = TabulatedFunction.from_mapping("lo", {1.0: 1.0, 2.0: 0.0})
    cls = ExplicitFinite((f, g))
    u, v = sample([1, 2, 2]), sample([1, 1, 2])
    sv = t_statistic(cls, u, v)
    assert sv.value == pytest.approx(-1 / 3)
    assert sv.witness.name == "lo"
    assert evaluate_witness(cls, u, v, sv.witness) == pytest.approx(sv.value)


def test_ssd_fast_path_matches_direct(rng):
    for _ in range(60):
        x = rng.integers(0, 12, int(rng.integers(1, 8))).astype(float)
        y = rng.integers(0, 12, int(rng.integers(1, 8))).astype(float)
        grid = GridSpec(0.0, 13.0, int(rng.integers(50, 600)))
        u, v = sample(x), sample(y)
        got = t_statistic(SsdConcave(grid), u, v)
        assert abs(got.value - ssd_statistic_direct(u, v, grid)) <= 1e-12
        assert got.value <= 0.0
        assert evaluate_witness(SsdConcave(grid), u, v, got.witness) == pytest.approx(got.value, abs=1e-12)


def test_ssd_default_grid():
    u, v = sample([1, 5, 9]), sample([3, 4, 6])
    got = t_statistic(SsdConcave(), u, v).value
    assert got == pytest.approx(ssd_statistic_direct(u, v), abs=1e-12)


def test_ssd_is_not_robust():
    s = sample([1, 2])
    with pytest.raises(UnsupportedClassError):
        robust_t_sup(SsdConcave(), s, s, 0.1, 0.1)


def test_gamma_out_of_range():
    s = sample([1, 2])
    with pytest.raises(DomainError):
        robust_t_sup(FSD, s, s, 1.5, 0.0)
    with pytest.raises(DomainError):
        ContaminationSpec(default=-0.1)
    with pytest.raises(DomainError):
        ContaminationSpec(gamma={"a": 0.1}, k={"a": 1})


def test_contamination_counts(table1):
    spec = ContaminationSpec(k={"Red": 1})
    assert spec.gamma_for("Red", 5) == pytest.approx(0.2)
    assert spec.pair(table1, "Red", "Blue") == (pytest.approx(0.2), 0.0)
    with pytest.raises(DomainError):
        ContaminationSpec(k={"Red": 6}).validate(table1)
    with pytest.raises(DomainError):
        ContaminationSpec(gamma={"Purple": 0.1}).validate(table1)


@pytest.mark.parametrize("cls", [FSD, EU])
def test_robust_degenerate_shares(cls, rng):
    for _ in range(30):
        u, v = random_pair(rng, 1, 4, 6, levels=5)
        t = t_statistic(cls, u, v).value
        assert robust_t_sup(cls, u, v, 0, 0).value == t
        assert robust_t_inf(cls, u, v, 0, 0).value == t
        lo = robust_t_inf(cls, u, v, .2, .3).value
        hi = robust_t_sup(cls, u, v, .2, .3).value
        assert lo <= t <= hi


def test_fsd_full_contamination():
    u, v = sample([0, 0]), sample([5, 5])
    assert robust_t_sup(FSD, u, v, 1.0, 1.0).value == 0.0
    assert robust_t_inf(FSD, u, v, 1.0, 1.0).value == -1.0


@pytest.mark.parametrize("cls", [FSD, EU])
def test_robust_matches_bruteforce(cls, rng):
    for _ in range(25):
        dim = 1 if cls is EU else int(rng.integers(1, 3))
        u, v = random_pair(rng, dim, int(rng.integers(1, 4)), int(rng.integers(1, 4)), levels=3)
        for gu, gv in ((0.25, 0.25), (0.5, 0.0), (0.0, 0.75), (0.25, 0.5)):
            hi, lo = robust_bruteforce(cls, u, v, gu, gv)
            assert robust_t_sup(cls, u, v, gu, gv).value == pytest.approx(hi, abs=1e-12)
            assert robust_t_inf(cls, u, v, gu, gv).value == pytest.approx(lo, abs=1e-12)


@pytest.mark.parametrize("cls", [FSD, EU])
def test_robust_monotone_in_each_share(cls, rng):
    gs = np.linspace(0, 1, 11)
    for _ in range(15):
        u, v = random_pair(rng, 1, 5, 4, levels=4)
        for fixed in (0.0, 0.3):
            sup_u = [robust_t_sup(cls, u, v, g, fixed).value for g in gs]
            sup_v = [robust_t_sup(cls, u, v, fixed, g).value for g in gs]
            inf_u = [robust_t_inf(cls, u, v, g, fixed).value for g in gs]
            inf_v = [robust_t_inf(cls, u, v, fixed, g).value for g in gs]
            for seq in (sup_u, sup_v):
                assert all(b >= a - 1e-12 for a, b in zip(seq, seq[1:]))
            for seq in (inf_u, inf_v):
                assert all(b <= a + 1e-12 for a, b in zip(seq, seq[1:]))


def test_pairwise_matrix_matches_single_calls(rng):
    for dim in (1, 2):
        samples = [sample(rng.integers(0, 4, (int(rng.integers(2, 6)), dim)), dim) for _ in range(4)]
        for cls in ([FSD] if dim == 2 else [FSD, EU]):
            T = pairwise_t_matrix(cls, samples)
            for i, j in itertools.permutations(range(4), 2):
                assert T[i, j] == t_statistic(cls, samples[i], samples[j]).value


_pts = st.lists(st.integers(0, 4), min_size=1, max_size=7)


@settings(max_examples=200)
@given(_pts, _pts)
def test_fsd_nonpositive_and_bounded(x, y):
    t = t_statistic(FSD, sample(x), sample(y)).value
    assert -1.0 <= t <= 0.0
