"""Resampling tests for membership of an action in the population choice set.

For a target action ``i`` and a competitor ``j`` the statistic
``T(X_j, X_i)`` is compared with its distribution under random re-splits of
the pooled sample.  Small values speak against ``j`` dominating ``i``; the
target is declared a member once every competitor's test rejects.

The robust variant compares the contamination supremum of the observed
statistic with the contamination infima of the resampled ones.

Resampling is organised in fixed-size blocks.  Block ``b`` of the pair
``(j, i)`` draws from ``SeedSequence([seed, index(j), index(i), b])`` so the
outcome depends neither on the number of worker threads nor on the order in
which competitors are listed.
"""

from __future__ import annotations

import itertools
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Sequence

import numpy as np

from .classes import FunctionClass
from .errors import DomainError, UnsupportedClassError
from .protocol import EmpiricalSample, Protocol
from .statistics import ContaminationSpec, PairEvaluator, StatValue

BLOCK = 1024
SEED_MASK = (1 << 64) - 1
TIE_RTOL = 1e-12
QUANTILE_LEVELS = (0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9)


class Mode(str, Enum):
    PERMUTATION = "permutation"
    BOOTSTRAP = "bootstrap"


@dataclass(frozen=True)
class TestConfig:
    """Level, resampling budget and seeding of a test.

    ``alpha = 0`` is accepted and never rejects.
    """

    __test__ = False  # not a pytest class

    alpha: float = 0.05
    n_resamples: int = 10_000
    seed: int = 0
    mode: Mode = Mode.PERMUTATION
    keep_distribution: bool = False
    n_jobs: int = 1

    def __post_init__(self):
        if not 0.0 <= self.alpha < 0.5:
            raise DomainError(f"alpha must lie in [0, 0.5), got {self.alpha}")
        if int(self.n_resamples) < 1:
            raise DomainError("n_resamples must be positive")
        if int(self.n_jobs) < 1:
            raise DomainError("n_jobs must be positive")
        try:
            object.__setattr__(self, "mode", Mode(self.mode))
        except ValueError:
            raise DomainError(f"unknown resampling mode {self.mode!r}") from None
        object.__setattr__(self, "n_resamples", int(self.n_resamples))
        object.__setattr__(self, "n_jobs", int(self.n_jobs))
        object.__setattr__(self, "seed", int(self.seed))

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "n_resamples": self.n_resamples, "seed": self.seed,
                "mode": self.mode.value, "n_jobs": self.n_jobs}


@dataclass(frozen=True)
class PairwiseResult:
    j: str
    i: str
    observed: StatValue
    p_value: float
    reject: bool
    quantiles: dict
    n_resamples: int
    resample_stats: np.ndarray | None = None
    # robust tests only
    d0: float | None = None
    q_alpha: float | None = None
    gamma_j: float = 0.0
    gamma_i: float = 0.0

    def to_dict(self, full: bool = False) -> dict:
        out = {"j": self.j, "i": self.i, "observed": self.observed.to_dict(),
               "p_value": self.p_value, "reject": self.reject,
               "n_resamples": self.n_resamples,
               "quantiles": {str(k): v for k, v in self.quantiles.items()}}
        if self.d0 is not None:
            out.update(d0=self.d0, q_alpha=self.q_alpha, gamma_j=self.gamma_j, gamma_i=self.gamma_i)
        if full and self.resample_stats is not None:
            out["resample_stats"] = self.resample_stats.tolist()
        return out


@dataclass(frozen=True)
class TestReport:
    __test__ = False

    target: str
    competitors: tuple[str, ...]
    pairwise: tuple[PairwiseResult, ...]
    global_reject: bool
    config: TestConfig
    function_class: str
    contamination: ContaminationSpec | None = None

    def to_dict(self, full: bool = False) -> dict:
        out = {"target": self.target, "competitors": list(self.competitors),
               "global_reject": self.global_reject, "class": self.function_class,
               "config": self.config.to_dict(),
               "pairwise": [r.to_dict(full) for r in self.pairwise]}
        if self.contamination is not None:
            out["contamination"] = self.contamination.to_dict()
        return out


@dataclass(frozen=True)
class BreakdownCurve:
    pair: tuple[str, str]
    shares: tuple[float, ...]
    p_values: tuple[float, ...]
    d0: tuple[float, ...]
    q_alpha: tuple[float, ...]
    alpha: float
    breakdown_share: float | None

    def to_dict(self) -> dict:
        return {"pair": list(self.pair), "alpha": self.alpha,
                "breakdown_share": self.breakdown_share,
                "points": [{"share": s, "p_value": p, "d0": d, "q_alpha": q}
                           for s, p, d, q in zip(self.shares, self.p_values, self.d0, self.q_alpha)]}

    def rows(self) -> list[tuple[float, float]]:
        return list(zip(self.shares, self.p_values))


# ------------------------------------------------------------ resampling

def _block_sizes(n: int) -> list[int]:
    full, rest = divmod(n, BLOCK)
    return [BLOCK] * full + ([rest] if rest else [])


def resample_block(mode: Mode, n: int, size: int, seed_words: Sequence[int]) -> np.ndarray:
    """Index matrix of ``size`` resampled splits of a pooled sample of ``n``."""
    rng = np.random.default_rng(np.random.SeedSequence([w & SEED_MASK for w in seed_words]))
    if mode is Mode.PERMUTATION:
        base = np.tile(np.arange(n, dtype=np.int64), (size, 1))
        return rng.permuted(base, axis=1)
    return rng.integers(0, n, size=(size, n), dtype=np.int64)


def _resampled_values(ev: PairEvaluator, cfg: TestConfig, words: Sequence[int],
                      fn: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    sizes = _block_sizes(cfg.n_resamples)

    def run(b):
        idx = resample_block(cfg.mode, ev.n, sizes[b], [*words, b])
        return fn(idx)

    if cfg.n_jobs > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=cfg.n_jobs) as pool:
            parts = list(pool.map(run, range(len(sizes))))
    else:
        parts = [run(b) for b in range(len(sizes))]
    return np.concatenate(parts) if parts else np.empty(0)


def _tie_tol(t0: float) -> float:
    return TIE_RTOL * max(1.0, abs(t0))


def p_value(stats: np.ndarray, t0: float, tol: float | None = None) -> float:
    """``(1 + #{t_k <= t0}) / (N + 1)`` with a tiny tie tolerance."""
    tol = _tie_tol(t0) if tol is None else tol
    return (1 + int(np.count_nonzero(stats <= t0 + tol))) / (stats.size + 1)


def lower_quantile(stats: np.ndarray, alpha: float) -> float:
    """Order statistic ``floor(alpha (N + 1))`` (at least the first)."""
    s = np.sort(stats)
    k = max(1, int(math.floor(alpha * (s.size + 1))))
    return float(s[min(k, s.size) - 1])


def _quantiles(stats):
    return {q: float(np.quantile(stats, q)) for q in QUANTILE_LEVELS}


def _check_pair(protocol: Protocol, j: str, i: str) -> tuple[int, int]:
    if j == i:
        raise DomainError("a pairwise test needs two distinct actions")
    jj, ii = protocol.index_of(j), protocol.index_of(i)
    zj, zi = protocol.counts[j], protocol.counts[i]
    if max(zj, zi) > 20 * min(zj, zi):
        warnings.warn(f"unbalanced samples for ({j}, {i}): {zj} vs {zi}", stacklevel=3)
    return jj, ii


def _evaluator(protocol, j, i, cls):
    return PairEvaluator(cls, protocol.sample_of(j), protocol.sample_of(i))


# ------------------------------------------------------------ base tests

def pairwise_permutation_test(protocol: Protocol, j: str, i: str, cls: FunctionClass,
                              cfg: TestConfig) -> PairwiseResult:
    """Test of ``T(X_j, X_i)`` against its resampling distribution."""
    jj, ii = _check_pair(protocol, j, i)
    ev = _evaluator(protocol, j, i, cls)
    obs = ev.observed()
    stats = _resampled_values(ev, cfg, [cfg.seed, jj, ii], ev.values)
    p = p_value(stats, obs.value)
    return PairwiseResult(j, i, obs, p, p < cfg.alpha, _quantiles(stats), cfg.n_resamples,
                          stats if cfg.keep_distribution else None)


def bootstrap_variant(protocol: Protocol, j: str, i: str, cls: FunctionClass,
                      cfg: TestConfig) -> PairwiseResult:
    """Same test with resampling from the pooled sample with replacement."""
    if cfg.mode is not Mode.BOOTSTRAP:
        cfg = TestConfig(cfg.alpha, cfg.n_resamples, cfg.seed, Mode.BOOTSTRAP,
                         cfg.keep_distribution, cfg.n_jobs)
    return pairwise_permutation_test(protocol, j, i, cls, cfg)


def _members(protocol: Protocol, target: str, D: Iterable[str] | None) -> tuple[str, ...]:
    D = protocol.actions if D is None else tuple(D)
    unknown = set(D) - set(protocol.actions)
    if unknown:
        raise DomainError(f"unknown actions {sorted(unknown)}")
    if target not in D:
        raise DomainError(f"target {target!r} is not in the comparison set")
    comps = tuple(a for a in protocol.actions if a in set(D) and a != target)
    if not comps:
        raise DomainError("membership test needs at least one competitor")
    return comps


def membership_test(protocol: Protocol, target: str, D: Iterable[str] | None,
                    cls: FunctionClass, cfg: TestConfig) -> TestReport:
    """Reject "``target`` is not chosen from ``D``" when every pairwise
    test against a competitor rejects."""
    comps = _members(protocol, target, D)
    results = tuple(pairwise_permutation_test(protocol, j, target, cls, cfg) for j in comps)
    return TestReport(target, comps, results, all(r.reject for r in results), cfg, cls.describe())


# ------------------------------------------------------------ robust tests

def robust_pairwise_test(protocol: Protocol, j: str, i: str, cls: FunctionClass,
                         spec: ContaminationSpec, cfg: TestConfig) -> PairwiseResult:
    if not cls.supports_robust:
        raise UnsupportedClassError(f"class {cls.kind!r} has no contamination bounds")
    jj, ii = _check_pair(protocol, j, i)
    gj, gi = spec.pair(protocol, j, i)
    ev = _evaluator(protocol, j, i, cls)
    tol = _tie_tol(ev.observed().value)
    d0 = ev.observed("sup", gj, gi)
    infs = _resampled_values(ev, cfg, [cfg.seed, jj, ii],
                             lambda idx: ev.values(idx, "inf", gj, gi))
    p = p_value(infs, d0.value, tol)
    q = lower_quantile(infs, cfg.alpha) if cfg.alpha > 0 else -math.inf
    return PairwiseResult(j, i, d0, p, p < cfg.alpha, _quantiles(infs), cfg.n_resamples,
                          infs if cfg.keep_distribution else None,
                          d0=d0.value, q_alpha=q, gamma_j=gj, gamma_i=gi)


def robust_membership_test(protocol: Protocol, target: str, D: Iterable[str] | None,
                           cls: FunctionClass, spec: ContaminationSpec,
                           cfg: TestConfig) -> TestReport:
    spec.validate(protocol)
    comps = _members(protocol, target, D)
    results = tuple(robust_pairwise_test(protocol, j, target, cls, spec, cfg) for j in comps)
    return TestReport(target, comps, results, all(r.reject for r in results), cfg,
                      cls.describe(), spec)


def breakdown_curve(protocol: Protocol, j: str, i: str, cls: FunctionClass, cfg: TestConfig,
                    shares: Sequence[float]) -> BreakdownCurve:
    """Robust p-value of the pair ``(j, i)`` as both actions' contamination
    share grows.

    One resampling stream is shared by all shares, so the curve is
    nondecreasing.
    """
    if not cls.supports_robust:
        raise UnsupportedClassError(f"class {cls.kind!r} has no contamination bounds")
    shares = [float(s) for s in shares]
    if any(not 0.0 <= s <= 1.0 for s in shares) or shares != sorted(shares):
        raise DomainError("shares must be sorted and lie in [0, 1]")
    jj, ii = _check_pair(protocol, j, i)
    ev = _evaluator(protocol, j, i, cls)
    m_obs = ev.values(ev.observed_index)
    m_res = _resampled_values(ev, cfg, [cfg.seed, jj, ii], ev.values)
    tol = _tie_tol(float(m_obs[0]))
    ps, ds, qs = [], [], []
    for s in shares:
        d0 = float(ev._equal_share(m_obs, s, "sup")[0])
        infs = ev._equal_share(m_res, s, "inf")
        ps.append(p_value(infs, d0, tol))
        ds.append(d0)
        qs.append(lower_quantile(infs, cfg.alpha) if cfg.alpha > 0 else -math.inf)
    keep = [s for s, p in zip(shares, ps) if p < cfg.alpha]
    return BreakdownCurve((j, i), tuple(shares), tuple(ps), tuple(ds), tuple(qs), cfg.alpha,
                          max(keep) if keep else None)


# ------------------------------------------------------------ exact oracles

def _exact(ev: PairEvaluator, rows: Iterable[np.ndarray], t0: float, chunk: int = 4096) -> float:
    hits = total = 0
    tol = _tie_tol(t0)
    buf = []

    def flush():
        nonlocal hits, total
        vals = ev.values(np.array(buf))
        hits += int(np.count_nonzero(vals <= t0 + tol))
        total += len(buf)
        buf.clear()

    for r in rows:
        buf.append(r)
        if len(buf) >= chunk:
            flush()
    if buf:
        flush()
    return hits / total


def exact_permutation_pvalue(u: EmpiricalSample, v: EmpiricalSample, cls: FunctionClass) -> float:
    """Share of all ``C(n, z_u)`` splits whose statistic is at most the
    observed one."""
    ev = PairEvaluator(cls, u, v)
    n, zu = ev.n, ev.zu
    full = set(range(n))

    def rows():
        for comb in itertools.combinations(range(n), zu):
            yield np.array([*comb, *sorted(full.difference(comb))])

    return _exact(ev, rows(), ev.observed().value)


def exact_bootstrap_pvalue(u: EmpiricalSample, v: EmpiricalSample, cls: FunctionClass,
                           max_n: int = 6) -> float:
    """Probability under with-replacement resampling, by enumerating all
    ``n ** n`` draws."""
    ev = PairEvaluator(cls, u, v)
    if ev.n > max_n:
        raise DomainError(f"exhaustive bootstrap limited to {max_n} pooled points")
    rows = (np.array(r) for r in itertools.product(range(ev.n), repeat=ev.n))
    return _exact(ev, rows, ev.observed().value)


# ------------------------------------------------------------ level check

@dataclass(frozen=True)
class BinomialPair:
    """Two independent ``Bin(size, p)`` samples of ``z`` observations each."""

    p: float = 0.3
    size: int = 10
    z: int = 20
    z_other: int | None = None

    def draw(self, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        zo = self.z if self.z_other is None else self.z_other
        return (rng.binomial(self.size, self.p, self.z).astype(float),
                rng.binomial(self.size, self.p, zo).astype(float))


@dataclass(frozen=True)
class ConstantPair:
    value: float = 1.0
    z: int = 10

    def draw(self, rng):
        return np.full(self.z, self.value), np.full(self.z, self.value)


@dataclass(frozen=True)
class SimulationResult:
    rate: float
    rejections: int
    n_trials: int
    alpha: float

    @property
    def bound(self) -> float:
        """``alpha`` plus three binomial standard errors."""
        return self.alpha + 3.0 * math.sqrt(self.alpha * (1 - self.alpha) / self.n_trials)


def type1_error_simulation(generator, cls: FunctionClass, cfg: TestConfig,
                           n_trials: int) -> SimulationResult:
    """Rejection rate of the pairwise test on data drawn by ``generator``
    (any object with ``draw(rng) -> (x, y)``)."""
    hits = 0
    for t in range(n_trials):
        rng = np.random.default_rng(np.random.SeedSequence([cfg.seed & SEED_MASK, 0x7E57, t]))
        x, y = generator.draw(rng)
        p = Protocol.from_samples({"j": x, "i": y})
        sub = TestConfig(cfg.alpha, cfg.n_resamples, (cfg.seed * 1_000_003 + t) & SEED_MASK,
                         cfg.mode)
        hits += pairwise_permutation_test(p, "j", "i", cls, sub).reject
    return SimulationResult(hits / n_trials if n_trials else 0.0, hits, n_trials, cfg.alpha)
