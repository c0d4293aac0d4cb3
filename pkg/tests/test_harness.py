from __future__ import annotations

import numpy as np
import pytest

from empchoice.choice import ecf_dominance, ecf_regularized, recf_gamma_robust
from empchoice.classes import EuSingleton, FsdIsotoneIndicators, GridSpec
from empchoice.errors import DomainError
from empchoice.harness import (BinomialIid, DeterministicAdversary, Engine, FromFile, ScenarioSpec,
                               data_path, example4_engine, example4_scenario, replicate_table1,
                               run_scenario, ssd_assumption3_demo)
from empchoice.protocol import sub_protocol
from empchoice.statistics import ContaminationSpec

FSD = FsdIsotoneIndicators()


def test_replicate_table1():
    res = replicate_table1()
    assert res["eu"].chosen == ("Red",)
    assert res["fsd"].chosen == ("Red", "Blue", "Green")


@pytest.mark.parametrize("engine", [Engine("eu", EuSingleton()), Engine("dominance")])
def test_adversary_always_red(engine):
    trace = run_scenario(ScenarioSpec(DeterministicAdversary(), rounds=50), engine)
    assert all(c == frozenset({"Red"}) for c in trace.chosen)
    assert trace.held_since({"Red"}) == 1


def test_zero_rounds():
    trace = run_scenario(ScenarioSpec(BinomialIid((0.5, 0.5), actions=("a", "b")), rounds=0))
    assert len(trace) == 0
    assert trace.indicator_matrix().shape == (0, 2)
    assert trace.held_since({"a"}) is None


def test_scenario_validation():
    with pytest.raises(DomainError):
        BinomialIid((0.5,), actions=("a", "b"))
    with pytest.raises(DomainError):
        BinomialIid((1.5, 0.5), actions=("a", "b"))
    with pytest.raises(DomainError):
        ScenarioSpec(DeterministicAdversary(), rounds=-1)
    with pytest.raises(DomainError):
        DeterministicAdversary(default_state=9)
    with pytest.raises(DomainError):
        Engine("magic")
    with pytest.raises(DomainError):
        Engine("robust")
    with pytest.raises(DomainError):
        example4_scenario(3)


def test_traces_are_seeded():
    spec = example4_scenario(2, rounds=40, seed=9)
    a = run_scenario(spec, example4_engine(2))
    b = run_scenario(spec, example4_engine(2))
    assert a.chosen == b.chosen
    c = run_scenario(example4_scenario(2, rounds=40, seed=10), example4_engine(2))
    assert a.z_min == c.z_min == tuple(range(1, 41))


def test_rules_nest_along_a_trace():
    spec = example4_scenario(2, rounds=60, seed=1)
    dom = run_scenario(spec, Engine("dominance"))
    reg = run_scenario(spec, Engine("regularized", FSD))
    rob = run_scenario(spec, Engine("robust", FSD, contamination=ContaminationSpec.uniform(0.1)))
    for r, d, b in zip(reg.chosen, dom.chosen, rob.chosen):
        assert r <= d <= b


def test_file_scenario():
    trace = run_scenario(ScenarioSpec(FromFile(str(data_path("table1.csv"))), rounds=5))
    assert trace.chosen[-1] == frozenset({"Red", "Blue", "Green"})
    with pytest.raises(DomainError):
        run_scenario(ScenarioSpec(FromFile(str(data_path("table1.csv"))), rounds=6))


def test_trace_exports():
    trace = run_scenario(ScenarioSpec(DeterministicAdversary(), rounds=3))
    assert trace.csv_header() == ["round", "z_min", *trace.actions]
    assert trace.csv_rows()[0][:3] == [1, 1, 1]
    assert trace.to_dict()["rounds"][0] == ["Red"]


def test_held_since():
    from empchoice.harness import EvolutionTrace
    a, b = frozenset("a"), frozenset("ab")
    t = EvolutionTrace(("a", "b"), (b, a, b, a, a), (1, 2, 3, 4, 5))
    assert t.held_since({"a"}) == 4
    assert t.held_since({"a", "b"}) is None


def test_regularized_scenario_engine():
    eng = example4_engine(2)
    assert eng.rule == "regularized" and eng.schedule.regularize_first
    assert example4_engine(1).rule == "eu"


def test_ssd_demo_single_replication():
    demo = ssd_assumption3_demo(5, n_rep=1, seed=0, grid=GridSpec(0, 40, 2000))
    assert demo.t1.size == demo.t2.size == 1
    assert set(np.unique(demo.ecdf1)) <= {0.0, 1.0}
    assert demo.to_dict()["n_rep"] == 1


def test_ssd_demo_validation():
    with pytest.raises(DomainError):
        ssd_assumption3_demo(0, n_rep=10)


def test_examples_containment_on_bundled_data(table1, prompting):
    for p in (table1, prompting):
        sp = sub_protocol(p)
        dom = set(ecf_dominance(sp, FSD).chosen)
        assert set(ecf_regularized(sp, FSD).chosen) <= dom
        assert dom <= set(recf_gamma_robust(sp, FSD, ContaminationSpec.uniform(0.05)).chosen)
