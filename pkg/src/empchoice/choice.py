"""Empirical choice functions.

All rules except :func:`ecf_eu` work from the criterion pair
``cr(x_i, x_j) = (-T(x_i, x_j), T(x_j, x_i))``: action ``i`` is excluded when
some ``j`` in the sub-protocol gives ``cr1 > 0`` and ``cr2 >= 0`` (or a
relaxed version of these conditions).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .classes import EuSingleton, FunctionClass
from .errors import DomainError, UnsupportedClassError
from .protocol import SubProtocol
from .statistics import ContaminationSpec, pairwise_t_matrix, robust_t_inf, robust_t_sup


@dataclass(frozen=True)
class Exclusion:
    action: str
    by: str
    cr1: float
    cr2: float

    def to_dict(self) -> dict:
        return {"action": self.action, "by": self.by, "cr1": self.cr1, "cr2": self.cr2}


@dataclass(frozen=True)
class ChoiceSet:
    """Chosen actions (in protocol order) and, per excluded action, the first
    action that excluded it."""

    chosen: tuple[str, ...]
    actions: tuple[str, ...]
    rationale: tuple[Exclusion, ...] = ()
    rule: str = ""
    margin1: float = 0.0
    margin2: float = 0.0

    def __contains__(self, a) -> bool:
        return a in self.chosen

    def as_set(self) -> frozenset[str]:
        return frozenset(self.chosen)

    def to_dict(self) -> dict:
        return {"rule": self.rule, "chosen": list(self.chosen), "actions": list(self.actions),
                "margins": [self.margin1, self.margin2],
                "excluded": [e.to_dict() for e in self.rationale]}

    def table(self) -> str:
        width = max(len(a) for a in self.actions)
        lines = [f"{'action':<{width}}  status    by{'':<{max(0, width - 2)}}  cr1        cr2"]
        why = {e.action: e for e in self.rationale}
        for a in self.actions:
            if a in why:
                e = why[a]
                lines.append(f"{a:<{width}}  excluded  {e.by:<{width}}  {e.cr1:<+9.4g}  {e.cr2:<+9.4g}")
            else:
                lines.append(f"{a:<{width}}  chosen")
        return "\n".join(lines)


@dataclass(frozen=True)
class RegularizationSchedule:
    """``eps = c * z_min ** (-1/4)`` and ``delta = L * eps``.

    ``regularize_first`` also requires ``cr1 > 4 delta`` for an exclusion.
    """

    c: float = 1.0
    L: float = 2.0
    regularize_first: bool = False

    def __post_init__(self):
        if not self.c >= 0 or not self.L >= 0:
            raise DomainError("regularization scale and Lipschitz factor must be >= 0")

    def epsilon(self, z_min: int) -> float:
        if z_min < 1:
            raise DomainError("z_min must be positive")
        return self.c * z_min ** -0.25

    def delta(self, z_min: int) -> float:
        return self.L * self.epsilon(z_min)


def _samples(sp: SubProtocol):
    return [sp.sample_of(a) for a in sp.actions]


def _by_pairs(actions, cr, margin1, margin2, rule) -> ChoiceSet:
    """Exclude ``i`` when some ``j`` has ``cr1 > margin1`` and
    ``cr2 + margin2 >= 0``; ``cr`` maps ``(i, j)`` to the criterion pair."""
    chosen, why = [], []
    for i, a in enumerate(actions):
        hit = None
        for j, b in enumerate(actions):
            if i == j:
                continue
            c1, c2 = cr(i, j)
            if c1 > margin1 and c2 + margin2 >= 0.0:
                hit = Exclusion(a, b, float(c1), float(c2))
                break
        if hit is None:
            chosen.append(a)
        else:
            why.append(hit)
    return ChoiceSet(tuple(chosen), tuple(actions), tuple(why), rule, margin1, margin2)


def eu_choice(actions, samples, cls: EuSingleton | None = None,
              rel_tol: float = 1e-12) -> ChoiceSet:
    """Actions whose mean utility is maximal (ties within ``rel_tol``)."""
    cls = cls or EuSingleton()
    if not isinstance(cls, EuSingleton):
        raise UnsupportedClassError("the EU rule needs a single utility")
    means = np.array([float(np.mean(cls.utility(s))) for s in samples])
    best = means.max()
    top = actions[int(np.argmax(means))]
    chosen, why = [], []
    for a, m in zip(actions, means):
        if math.isclose(m, best, rel_tol=rel_tol, abs_tol=rel_tol):
            chosen.append(a)
        else:
            why.append(Exclusion(a, top, float(best - m), float(best - m)))
    return ChoiceSet(tuple(chosen), tuple(actions), tuple(why), "eu")


def dominance_choice(actions, samples, cls: FunctionClass, margin1: float = 0.0,
                     margin2: float = 0.0, rule: str | None = None) -> ChoiceSet:
    """Exclude ``i`` when some ``j`` has ``-T(x_i, x_j) > margin1`` and
    ``T(x_j, x_i) + margin2 >= 0``."""
    T = pairwise_t_matrix(cls, samples)
    return _by_pairs(tuple(actions), lambda i, j: (-T[i, j], T[j, i]), margin1, margin2,
                     rule or cls.kind)


def regularization_margins(sched: "RegularizationSchedule", z_min: int) -> tuple[float, float]:
    d4 = 4.0 * sched.delta(z_min)
    return (d4 if sched.regularize_first else 0.0), d4


def ecf_eu(sp: SubProtocol, cls: EuSingleton | None = None, rel_tol: float = 1e-12) -> ChoiceSet:
    """Actions of ``sp`` with maximal empirical mean utility."""
    return eu_choice(sp.actions, _samples(sp), cls, rel_tol)


def criterion_matrix(sp: SubProtocol, cls: FunctionClass) -> np.ndarray:
    """``T[i, j] = T(x_i, x_j)`` over the sub-protocol's actions."""
    return pairwise_t_matrix(cls, _samples(sp))


def ecf_dominance(sp: SubProtocol, cls: FunctionClass) -> ChoiceSet:
    """Exclude actions strictly dominated on the observed samples."""
    return dominance_choice(sp.actions, _samples(sp), cls)


def ecf_regularized(sp: SubProtocol, cls: FunctionClass,
                    sched: RegularizationSchedule | None = None) -> ChoiceSet:
    """Exclude ``i`` when ``cr1 > 0`` and ``cr2 + 4 delta >= 0``.

    ``delta`` uses the smallest sample size of the parent protocol.
    """
    sched = sched or RegularizationSchedule()
    m1, m2 = regularization_margins(sched, sp.parent.min_count)
    return dominance_choice(sp.actions, _samples(sp), cls, m1, m2, f"{cls.kind}-regularized")


def recf_gamma_robust(sp: SubProtocol, cls: FunctionClass, spec: ContaminationSpec) -> ChoiceSet:
    """Exclude ``i`` only when ``j`` dominates it for every contamination.

    The dominance claim is worst-cased jointly: ``i``'s free mass sits above
    and ``j``'s below every observation, giving ``cr1 = -sup T(x_i, x_j)``
    and ``cr2 = inf T(x_j, x_i)``.
    """
    if not cls.supports_robust:
        raise UnsupportedClassError(f"class {cls.kind!r} has no contamination bounds")
    spec.validate(sp.parent)
    counts = sp.counts
    samples = dict(zip(sp.actions, _samples(sp)))
    gam = {a: spec.gamma_for(a, counts[a]) for a in sp.actions}
    acts = sp.actions

    def cr(i, j):
        a, b = acts[i], acts[j]
        c1 = -robust_t_sup(cls, samples[a], samples[b], gam[a], gam[b]).value
        if not c1 > 0.0:
            return c1, -math.inf
        return c1, robust_t_inf(cls, samples[b], samples[a], gam[b], gam[a]).value

    return _by_pairs(acts, cr, 0.0, 0.0, f"{cls.kind}-robust")
