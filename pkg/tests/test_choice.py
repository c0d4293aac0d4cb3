from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from empchoice.choice import (RegularizationSchedule, ecf_dominance, ecf_eu, ecf_regularized,
                              recf_gamma_robust)
from empchoice.classes import EuSingleton, FsdIsotoneIndicators, SsdConcave
from empchoice.errors import DomainError, UnsupportedClassError
from empchoice.protocol import Protocol, sample_of, sub_protocol
from empchoice.statistics import (ContaminationSpec, criterion_pair, robust_bruteforce,
                                  robust_t_inf, robust_t_sup)

FSD = FsdIsotoneIndicators()


def test_table1_eu_and_fsd(table1):
    sp = sub_protocol(table1)
    assert ecf_eu(sp).chosen == ("Red",)
    fsd = ecf_dominance(sp, FSD)
    assert fsd.chosen == ("Red", "Blue", "Green")
    assert {e.action for e in fsd.rationale} == {"Yellow", "Black"}


def test_table1_sub_protocols(table1):
    assert ecf_dominance(sub_protocol(table1, ["Black", "Red"]), FSD).chosen == ("Red",)
    assert ecf_dominance(sub_protocol(table1, ["Blue"]), FSD).chosen == ("Blue",)


def test_prompting_fsd_chooses_all(prompting):
    assert ecf_dominance(sub_protocol(prompting), FSD).chosen == ("neutral", "polite", "inpolite")


def test_regularized_zero_delta_equals_dominance(table1):
    sp = sub_protocol(table1)
    sched = RegularizationSchedule(c=0.0)
    assert ecf_regularized(sp, FSD, sched).chosen == ecf_dominance(sp, FSD).chosen


def test_regularized_default_schedule_on_table1(table1):
    sp = sub_protocol(table1)
    r = ecf_regularized(sp, FSD)
    assert r.margin2 == pytest.approx(4 * 2 * 5 ** -0.25)
    assert set(r.chosen) <= set(ecf_dominance(sp, FSD).chosen)


def test_schedule_validation():
    with pytest.raises(DomainError):
        RegularizationSchedule(c=-1.0)
    with pytest.raises(DomainError):
        RegularizationSchedule().epsilon(0)
    assert RegularizationSchedule(c=1, L=2).delta(16) == pytest.approx(1.0)


def test_robust_degenerate_cases(table1):
    sp = sub_protocol(table1)
    base = ecf_dominance(sp, FSD).chosen
    assert recf_gamma_robust(sp, FSD, ContaminationSpec.uniform(0.0)).chosen == base
    assert recf_gamma_robust(sp, FSD, ContaminationSpec.uniform(1.0)).chosen == sp.actions
    with pytest.raises(UnsupportedClassError):
        recf_gamma_robust(sp, SsdConcave(), ContaminationSpec())


def test_table1_robust_matches_bruteforce(table1):
    sp = sub_protocol(table1)
    g = 0.1
    got = recf_gamma_robust(sp, FSD, ContaminationSpec.uniform(g)).chosen
    samples = {a: sample_of(table1, a) for a in sp.actions}
    expected = []
    for a in sp.actions:
        excluded = False
        for b in sp.actions:
            if a == b:
                continue
            sup_ab, _ = robust_bruteforce(FSD, samples[a], samples[b], g, g)
            _, inf_ba = robust_bruteforce(FSD, samples[b], samples[a], g, g)
            if -sup_ab > 0 and inf_ba >= 0:
                excluded = True
        if not excluded:
            expected.append(a)
    assert got == tuple(expected)
    assert {"Red", "Blue", "Green"} <= set(got)


def test_rationale_reverifies(table1):
    sp = sub_protocol(table1)
    for e in ecf_dominance(sp, FSD).rationale:
        cp = criterion_pair(FSD, sample_of(table1, e.action), sample_of(table1, e.by))
        assert cp.cr1 == e.cr1 and cp.cr2 == e.cr2 and cp.dominated()
    spec = ContaminationSpec(gamma={"Red": 0.05})
    for e in recf_gamma_robust(sp, FSD, spec).rationale:
        x, y = sample_of(table1, e.action), sample_of(table1, e.by)
        gx, gy = spec.pair(table1, e.action, e.by)
        assert -robust_t_sup(FSD, x, y, gx, gy).value > 0
        assert robust_t_inf(FSD, y, x, gy, gx).value >= 0


def test_choice_set_reports(table1):
    cs = ecf_dominance(sub_protocol(table1), FSD)
    d = cs.to_dict()
    assert d["chosen"] == ["Red", "Blue", "Green"]
    assert len(d["excluded"]) == 2
    assert "excluded" in cs.table() and "Red" in cs
    assert cs.as_set() == frozenset({"Red", "Blue", "Green"})


def test_eu_rule_rejects_other_classes(table1):
    with pytest.raises(UnsupportedClassError):
        ecf_eu(sub_protocol(table1), FSD)


def test_eu_ties_kept():
    p = Protocol.from_samples({"a": [1.0, 3.0], "b": [2.0, 2.0], "c": [0.0]})
    assert ecf_eu(sub_protocol(p)).chosen == ("a", "b")


def test_duplicate_distributions_survive():
    p = Protocol.from_samples({"a": [1.0, 2.0], "b": [2.0, 1.0]})
    assert ecf_dominance(sub_protocol(p), FSD).chosen == ("a", "b")


_samples = st.lists(st.integers(0, 5), min_size=1, max_size=6)


@st.composite
def protocols(draw, equal=False):
    k = draw(st.integers(2, 4))
    if equal:
        n = draw(st.integers(1, 6))
        data = [draw(st.lists(st.integers(0, 5), min_size=n, max_size=n)) for _ in range(k)]
    else:
        data = [draw(_samples) for _ in range(k)]
    return Protocol.from_samples({f"a{i}": [float(x) for x in d] for i, d in enumerate(data)})


@settings(max_examples=150)
@given(protocols(), st.floats(0, 1), st.floats(0, 1))
def test_robust_monotone_in_gamma(p, g1, g2):
    lo, hi = sorted((g1, g2))
    sp = sub_protocol(p)
    a = set(recf_gamma_robust(sp, FSD, ContaminationSpec.uniform(lo)).chosen)
    b = set(recf_gamma_robust(sp, FSD, ContaminationSpec.uniform(hi)).chosen)
    assert a <= b


@settings(max_examples=150)
@given(protocols(equal=True))
def test_sorting_argument(p):
    sp = sub_protocol(p)
    chosen = set(ecf_dominance(sp, FSD).chosen)
    srt = {a: np.sort(p.raw(a)[:, 0]) for a in p.actions}
    for a in p.actions:
        beaten = any(np.all(srt[b] >= srt[a]) and np.any(srt[b] > srt[a])
                     for b in p.actions if b != a)
        if not beaten:
            assert a in chosen


@settings(max_examples=150)
@given(protocols())
def test_rationale_soundness_property(p):
    sp = sub_protocol(p)
    for cls in (FSD, EuSingleton()):
        cs = ecf_dominance(sp, cls)
        for e in cs.rationale:
            cp = criterion_pair(cls, p.sample_of(e.action), p.sample_of(e.by))
            assert cp.dominated()
