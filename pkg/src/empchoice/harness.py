"""Simulation scenarios and replication drivers.

A scenario grows a protocol by one observation per action per round and
records the choice set an engine picks after every round.  The drivers at
the bottom reproduce the worked examples shipped with the package.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from .choice import (ChoiceSet, RegularizationSchedule, dominance_choice, ecf_dominance,
                     ecf_eu, eu_choice, recf_gamma_robust, regularization_margins)
from .classes import EuSingleton, FsdIsotoneIndicators, FunctionClass, GridSpec, SsdConcave
from .errors import DomainError
from .inference import (BreakdownCurve, PairwiseResult, TestConfig, TestReport,
                        breakdown_curve, membership_test, pairwise_permutation_test)
from .protocol import ConsequenceSpace, EmpiricalSample, Protocol, load_protocol, sub_protocol
from .statistics import ContaminationSpec, PairEvaluator

COLORS = ("Red", "Blue", "Green", "Yellow", "Black")
SCENARIO_P = {
    1: (0.25, 0.2, 0.22, 0.22, 0.21),
    2: (0.32, 0.32, 0.45, 0.8, 0.8),
}
ADVERSARY_TABLE = {
    "Red": (4.0, 1.0, 1.0),
    "Blue": (6.0, 3.0, 2.0),
    "Green": (5.0, 3.0, 3.0),
    "Yellow": (10.0, 2.0, 2.0),
    "Black": (8.0, 2.0, 3.0),
}


def data_path(name: str) -> Path:
    """Path of a bundled data file (``table1.csv``, ``prompting.csv``)."""
    return Path(str(resources.files("empchoice") / "data" / name))


# ------------------------------------------------------------ scenarios

@dataclass(frozen=True)
class BinomialIid:
    """Each action yields independent ``Bin(size, p_a)`` consequences."""

    p: tuple[float, ...]
    size: int = 10
    actions: tuple[str, ...] = COLORS

    def __post_init__(self):
        object.__setattr__(self, "p", tuple(float(x) for x in self.p))
        if len(self.p) != len(self.actions):
            raise DomainError(f"{len(self.p)} probabilities for {len(self.actions)} actions")
        if any(not 0.0 <= x <= 1.0 for x in self.p):
            raise DomainError("binomial probabilities must lie in [0, 1]")

    def draw(self, rounds: int, rng: np.random.Generator) -> np.ndarray:
        return rng.binomial(self.size, self.p, size=(rounds, len(self.p))).astype(float)


@dataclass(frozen=True)
class DeterministicAdversary:
    """The world answers each action with a fixed state.

    ``table[a][s]`` is the payoff of ``a`` in state ``s``; ``state_of`` maps
    actions to the state index they trigger, the rest get ``default_state``.
    With the defaults the first state occurs iff Red is played, otherwise the
    third.
    """

    table: tuple[tuple[str, tuple[float, ...]], ...] = tuple(ADVERSARY_TABLE.items())
    state_of: tuple[tuple[str, int], ...] = (("Red", 0),)
    default_state: int = 2

    def __post_init__(self):
        tab = self.table.items() if isinstance(self.table, dict) else self.table
        tab = tuple((str(a), tuple(float(x) for x in row)) for a, row in tab)
        widths = {len(row) for _, row in tab}
        if len(widths) != 1:
            raise DomainError("adversary table must be rectangular")
        st = self.state_of.items() if isinstance(self.state_of, dict) else self.state_of
        object.__setattr__(self, "table", tab)
        object.__setattr__(self, "state_of", tuple((str(a), int(s)) for a, s in st))
        n_states = widths.pop()
        for _, s in (*self.state_of, ("", self.default_state)):
            if not 0 <= s < n_states:
                raise DomainError(f"state index {s} outside the table")

    @property
    def actions(self) -> tuple[str, ...]:
        return tuple(a for a, _ in self.table)

    def draw(self, rounds: int, rng=None) -> np.ndarray:
        st = dict(self.state_of)
        row = [payoff[st.get(a, self.default_state)] for a, payoff in self.table]
        return np.tile(np.array(row, dtype=float), (rounds, 1))


@dataclass(frozen=True)
class FromFile:
    """Replays a protocol file; round ``r`` uses each action's first ``r``
    observations."""

    path: str

    def load(self) -> Protocol:
        return load_protocol(self.path)


@dataclass(frozen=True)
class ScenarioSpec:
    kind: BinomialIid | DeterministicAdversary | FromFile
    rounds: int = 500
    seed: int = 0

    def __post_init__(self):
        if int(self.rounds) < 0:
            raise DomainError("rounds must be >= 0")

    def observations(self) -> tuple[tuple[str, ...], ConsequenceSpace, list[np.ndarray]]:
        """Actions, space and per-action arrays of ``rounds`` observations."""
        k = self.kind
        if isinstance(k, FromFile):
            p = k.load()
            if self.rounds > p.min_count:
                raise DomainError(f"file has only {p.min_count} observations for some action")
            return p.actions, p.space, [p.raw(a)[: self.rounds] for a in p.actions]
        rng = np.random.default_rng(np.random.SeedSequence([self.seed & ((1 << 64) - 1), 0xE4]))
        data = k.draw(self.rounds, rng)
        space = ConsequenceSpace.maximize(1)
        return k.actions, space, [data[:, a].reshape(-1, 1) for a in range(data.shape[1])]


@dataclass(frozen=True)
class Engine:
    """Which choice rule a scenario records.

    ``rule`` is ``eu``, ``dominance``, ``regularized`` or ``robust``.
    """

    rule: str = "dominance"
    cls: FunctionClass = field(default_factory=FsdIsotoneIndicators)
    schedule: RegularizationSchedule = field(default_factory=RegularizationSchedule)
    contamination: ContaminationSpec | None = None

    def __post_init__(self):
        if self.rule not in ("eu", "dominance", "regularized", "robust"):
            raise DomainError(f"unknown choice rule {self.rule!r}")
        if self.rule == "robust" and self.contamination is None:
            raise DomainError("robust rule needs a contamination spec")

    def choose(self, actions, space, arrays) -> ChoiceSet:
        samples = [EmpiricalSample(space, a) for a in arrays]
        if self.rule == "eu":
            cls = self.cls if isinstance(self.cls, EuSingleton) else EuSingleton()
            return eu_choice(actions, samples, cls)
        if self.rule == "dominance":
            return dominance_choice(actions, samples, self.cls)
        z_min = min(a.shape[0] for a in arrays)
        if self.rule == "regularized":
            m1, m2 = regularization_margins(self.schedule, z_min)
            return dominance_choice(actions, samples, self.cls, m1, m2, f"{self.cls.kind}-regularized")
        p = Protocol.from_samples(dict(zip(actions, arrays)), space)
        return recf_gamma_robust(sub_protocol(p), self.cls, self.contamination)


@dataclass(frozen=True)
class EvolutionTrace:
    actions: tuple[str, ...]
    chosen: tuple[frozenset, ...]
    z_min: tuple[int, ...]
    rule: str = ""

    def __len__(self):
        return len(self.chosen)

    def indicator_matrix(self) -> np.ndarray:
        """``(rounds, actions)`` 0/1 matrix of chosen actions."""
        return np.array([[a in c for a in self.actions] for c in self.chosen],
                        dtype=np.int8).reshape(len(self.chosen), len(self.actions))

    def held_since(self, target) -> int | None:
        """First round (1-based) from which the choice set equals ``target``
        through the last round, or ``None``."""
        target = frozenset(target)
        r = len(self.chosen)
        while r > 0 and self.chosen[r - 1] == target:
            r -= 1
        return None if r == len(self.chosen) else r + 1

    def csv_rows(self) -> list[list]:
        m = self.indicator_matrix()
        return [[r + 1, self.z_min[r], *m[r].tolist()] for r in range(len(self.chosen))]

    def csv_header(self) -> list[str]:
        return ["round", "z_min", *self.actions]

    def to_dict(self) -> dict:
        return {"rule": self.rule, "actions": list(self.actions),
                "rounds": [sorted(c, key=self.actions.index) for c in self.chosen],
                "z_min": list(self.z_min)}


def run_scenario(spec: ScenarioSpec, engine: Engine | None = None) -> EvolutionTrace:
    """Grow the protocol round by round and record ``engine``'s choice set."""
    engine = engine or Engine()
    actions, space, arrays = spec.observations()
    chosen, zs = [], []
    for r in range(1, spec.rounds + 1):
        cs = engine.choose(actions, space, [a[:r] for a in arrays])
        chosen.append(frozenset(cs.chosen))
        zs.append(r)
    return EvolutionTrace(tuple(actions), tuple(chosen), tuple(zs), engine.rule)


def example4_engine(scenario: int, rule: str | None = None) -> Engine:
    """Default engines of the two binomial scenarios.

    Scenario 1 uses the EU rule.  Scenario 2 uses the regularized FSD rule
    with both conditions relaxed (``c = 0.2``, ``L = 2``), which keeps
    equally distributed actions together.
    """
    if scenario == 1:
        return Engine("eu" if rule is None else rule, EuSingleton())
    sched = RegularizationSchedule(c=0.2, L=2.0, regularize_first=True)
    return Engine("regularized" if rule is None else rule, FsdIsotoneIndicators(), sched)


def example4_scenario(scenario: int, rounds: int = 500, seed: int = 0) -> ScenarioSpec:
    if scenario not in SCENARIO_P:
        raise DomainError("scenario must be 1 or 2")
    return ScenarioSpec(BinomialIid(SCENARIO_P[scenario]), rounds, seed)


# ------------------------------------------------------------ replications

def replicate_table1(path: str | Path | None = None) -> dict[str, ChoiceSet]:
    p = load_protocol(path or data_path("table1.csv"))
    sp = sub_protocol(p)
    return {"eu": ecf_eu(sp), "fsd": ecf_dominance(sp, FsdIsotoneIndicators())}


NEUTRAL_PAIRS = (("polite", "neutral"), ("inpolite", "neutral"))


@dataclass(frozen=True)
class PromptingBundle:
    choice: ChoiceSet
    pairwise: tuple[PairwiseResult, ...]
    membership: TestReport
    breakdown: tuple[BreakdownCurve, ...]

    @property
    def significant_pairs(self) -> tuple[tuple[str, str], ...]:
        return tuple((r.j, r.i) for r in self.pairwise if r.reject)

    def to_dict(self) -> dict:
        return {"choice": self.choice.to_dict(),
                "pairwise": [r.to_dict() for r in self.pairwise],
                "significant_pairs": [list(p) for p in self.significant_pairs],
                "membership": self.membership.to_dict(),
                "breakdown": [c.to_dict() for c in self.breakdown]}


def replicate_prompting_study(path: str | Path | None = None, cfg: TestConfig | None = None,
                              target: str = "neutral",
                              shares: Sequence[float] | None = None) -> PromptingBundle:
    """FSD choice set, all six pairwise tests, the membership test for
    ``target`` and breakdown curves.

    Breakdown curves are drawn for every significant pair, and always for the
    two pairs against ``neutral``.
    """
    cfg = cfg or TestConfig(0.05, 10_000, 0)
    p = load_protocol(path or data_path("prompting.csv"))
    cls = FsdIsotoneIndicators()
    choice = ecf_dominance(sub_protocol(p), cls)
    pairs = [(j, i) for j in p.actions for i in p.actions if j != i]
    results = tuple(pairwise_permutation_test(p, j, i, cls, cfg) for j, i in pairs)
    report = membership_test(p, target, None, cls, cfg)
    if shares is None:
        shares = np.round(np.arange(0.0, 0.3001, 0.005), 6)
    want = [(r.j, r.i) for r in results if r.reject]
    want += [q for q in NEUTRAL_PAIRS if q not in want and set(q) <= set(p.actions)]
    curves = tuple(breakdown_curve(p, j, i, cls, cfg, shares) for j, i in want)
    return PromptingBundle(choice, results, report, curves)


@dataclass(frozen=True)
class SsdDemo:
    n: int
    t1: np.ndarray
    t2: np.ndarray
    points: np.ndarray
    ecdf1: np.ndarray
    ecdf2: np.ndarray
    z: float = 3.0

    @property
    def violations(self) -> np.ndarray:
        """Points where ``ECDF(T1)`` exceeds ``ECDF(T2)`` by more than ``z``
        standard errors of the difference."""
        R = self.t1.size
        f = 0.5 * (self.ecdf1 + self.ecdf2)
        se = np.sqrt(2.0 * f * (1.0 - f) / R)
        return (self.ecdf1 - self.ecdf2) > self.z * se

    @property
    def violation_fraction(self) -> float:
        return float(self.violations.mean()) if self.points.size else 0.0

    @property
    def violated(self) -> bool:
        return bool(self.violations.any())

    @property
    def max_excess(self) -> float:
        return float((self.ecdf1 - self.ecdf2).max()) if self.points.size else 0.0

    def csv_rows(self) -> list[list[float]]:
        return [[float(x), float(a), float(b)] for x, a, b in zip(self.points, self.ecdf1, self.ecdf2)]

    def to_dict(self) -> dict:
        return {"n": self.n, "n_rep": int(self.t1.size), "violated": self.violated,
                "violation_fraction": self.violation_fraction, "max_excess": self.max_excess,
                "mean_t1": float(self.t1.mean()), "mean_t2": float(self.t2.mean())}


def ssd_assumption3_demo(n: int = 5, n_rep: int = 10_000, seed: int = 0,
                         grid: GridSpec | None = None, rate: float = 20.0,
                         shift: float = 20.0, noise_rate: float = 1.0) -> SsdDemo:
    """Distribution of the SSD statistic on a mean-preserving spread pair
    (``T1``) and on a random re-split of the pooled data (``T2``).

    ``y ~ Exp(rate) + shift`` and ``x = Exp(rate) + shift + e`` with
    ``e ~ Exp(noise_rate) - 1 / noise_rate``; ``T1`` is the statistic for
    ``x`` being second-order dominated by ``y``.
    """
    if n < 1 or n_rep < 1:
        raise DomainError("n and n_rep must be positive")
    grid = grid or GridSpec(0.0, 40.0, 50_000)
    cls = SsdConcave(grid)
    rng = np.random.default_rng(np.random.SeedSequence([seed & ((1 << 64) - 1), 0x55D]))
    space = ConsequenceSpace.maximize(1)
    t1 = np.empty(n_rep)
    t2 = np.empty(n_rep)
    for k in range(n_rep):
        e = rng.exponential(1.0 / noise_rate, n) - 1.0 / noise_rate
        y = rng.exponential(1.0 / rate, n) + shift
        x = rng.exponential(1.0 / rate, n) + shift + e
        z = rng.permutation(np.concatenate([x, y]))
        t1[k] = PairEvaluator(cls, EmpiricalSample(space, y), EmpiricalSample(space, x)).observed().value
        t2[k] = PairEvaluator(cls, EmpiricalSample(space, z[n:]),
                              EmpiricalSample(space, z[:n])).observed().value
    pts = np.unique(np.concatenate([t1, t2]))
    e1 = np.searchsorted(np.sort(t1), pts, side="right") / n_rep
    e2 = np.searchsorted(np.sort(t2), pts, side="right") / n_rep
    return SsdDemo(n, t1, t2, pts, e1, e2)
