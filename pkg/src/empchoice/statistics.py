"""The two-sample statistic ``T(u, v) = inf_f (E_u f - E_v f)`` and its
contamination bounds.

Every value is computed from integer counts through one canonical
expression (``su * a - sv * b`` with ``su = (1 - gamma_u) / z_u``), both for
observed and for resampled splits.  Equal splits therefore give bit-equal
values, which keeps permutation p-values free of rounding artefacts and makes
``gamma = 0`` robust results identical to the plain statistic.

Contamination (the linear-vacuous model) adds mass ``gamma`` anywhere in the
consequence space.  The supremum of ``T`` over both credal sets is reached by
moving ``u``'s free mass to a virtual point above everything and ``v``'s free
mass to a virtual point below everything; the infimum swaps the roles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import kernels
from .classes import (EuSingleton, ExplicitFinite, FsdIsotoneIndicators, FunctionClass,
                      GridSpec, SsdConcave, build_dominance_dag)
from .errors import DomainError, SchemaError, UnsupportedClassError
from .protocol import EmpiricalSample, Protocol

SIDES = ("base", "sup", "inf")


@dataclass(frozen=True)
class Witness:
    """The minimising member of the class.

    ``kind`` is one of ``empty`` (the zero function / empty upper set),
    ``threshold`` (upper set ``{x >= point}`` on the line), ``upper_set``
    (explicit maximize-oriented points), ``utility`` (EU), ``grid`` (SSD grid
    index ``index``) or ``function`` (name of an explicit member).
    """

    kind: str
    points: tuple[tuple[float, ...], ...] = ()
    index: int = -1
    name: str = ""
    side: str = "base"
    gamma_u: float = 0.0
    gamma_v: float = 0.0

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "side": self.side}
        if self.points:
            out["points"] = [list(p) for p in self.points]
        if self.index >= 0:
            out["index"] = self.index
        if self.name:
            out["name"] = self.name
        if self.side != "base":
            out["gamma_u"] = self.gamma_u
            out["gamma_v"] = self.gamma_v
        return out


@dataclass(frozen=True)
class StatValue:
    value: float
    witness: Witness

    def to_dict(self) -> dict:
        return {"value": self.value, "witness": self.witness.to_dict()}


@dataclass(frozen=True)
class CriterionPair:
    """``cr1 = -T(x, y)`` and ``cr2 = T(y, x)``.

    ``cr1 > 0`` together with ``cr2 >= 0`` says that ``y`` strictly
    dominates ``x`` empirically.
    """

    cr1: float
    cr2: float

    def dominated(self, margin1: float = 0.0, margin2: float = 0.0) -> bool:
        return self.cr1 > margin1 and self.cr2 + margin2 >= 0.0


@dataclass(frozen=True)
class ContaminationSpec:
    """Per-action contamination shares.

    ``gamma`` maps actions to shares in ``[0, 1]``; ``k`` maps actions to a
    number of contaminated observations, converted to ``k / z_a``.  Actions
    missing from both maps use ``default``.
    """

    gamma: Mapping[str, float] = field(default_factory=dict)
    k: Mapping[str, int] = field(default_factory=dict)
    default: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "gamma", {str(a): float(g) for a, g in dict(self.gamma).items()})
        object.__setattr__(self, "k", {str(a): int(v) for a, v in dict(self.k).items()})
        for a, g in [*self.gamma.items(), ("<default>", self.default)]:
            if not 0.0 <= g <= 1.0 or math.isnan(g):
                raise DomainError(f"contamination share for {a} must lie in [0, 1], got {g}")
        for a, v in self.k.items():
            if v < 0:
                raise DomainError(f"contaminated count for {a} must be >= 0, got {v}")
        both = set(self.gamma) & set(self.k)
        if both:
            raise DomainError(f"actions {sorted(both)} have both gamma and k")
        object.__setattr__(self, "default", float(self.default))

    @classmethod
    def uniform(cls, gamma: float) -> "ContaminationSpec":
        return cls(default=gamma)

    def gamma_for(self, action: str, z: int) -> float:
        if action in self.k:
            k = self.k[action]
            if k > z:
                raise DomainError(f"k = {k} exceeds the {z} observations of {action!r}")
            return k / z
        return self.gamma.get(action, self.default)

    def validate(self, protocol: Protocol) -> None:
        unknown = (set(self.gamma) | set(self.k)) - set(protocol.actions)
        if unknown:
            raise DomainError(f"contamination given for unknown actions {sorted(unknown)}")
        for a, z in protocol.counts.items():
            self.gamma_for(a, z)

    def pair(self, protocol: Protocol, u: str, v: str) -> tuple[float, float]:
        c = protocol.counts
        return self.gamma_for(u, c[u]), self.gamma_for(v, c[v])

    def to_dict(self) -> dict:
        return {"gamma": dict(self.gamma), "k": dict(self.k), "default": self.default}


def _check_gamma(g: float) -> float:
    g = float(g)
    if not 0.0 <= g <= 1.0:
        raise DomainError(f"contamination share must lie in [0, 1], got {g}")
    return g


def split_counts(index: np.ndarray, zu: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-row multiplicity of every pooled observation in the two groups."""
    index = np.asarray(index, dtype=np.int64)
    B = index.shape[0]
    off = (np.arange(B, dtype=np.int64) * n)[:, None]
    cu = np.bincount((index[:, :zu] + off).ravel(), minlength=B * n).reshape(B, n)
    cv = np.bincount((index[:, zu:] + off).ravel(), minlength=B * n).reshape(B, n)
    return cu, cv


class PairEvaluator:
    """Statistic of one pooled two-sample problem over many splits.

    Splits are rows of an index matrix into the pooled sample (``u`` first,
    then ``v``); the first ``zu`` entries of a row form the ``u`` group.  The
    observed split is ``arange(zu + zv)``.
    """

    def __init__(self, cls: FunctionClass, u: EmpiricalSample, v: EmpiricalSample,
                 method: str = "auto"):
        if u.space.dim != v.space.dim:
            raise SchemaError(f"samples of dimension {u.space.dim} and {v.space.dim}")
        cls.check_applicable(u.space)
        self.cls = cls
        self.u, self.v = u, v
        self.zu, self.zv = u.n, v.n
        self.n = self.zu + self.zv
        self.pooled = np.vstack([u.normalized, v.normalized])
        self.signs = u.space.signs
        if isinstance(cls, FsdIsotoneIndicators):
            self._init_fsd(method)
        elif isinstance(cls, EuSingleton):
            self.kind = "eu"
            self.util = np.concatenate([cls.utility(u), cls.utility(v)])
            self.bounds = cls.resolve_bounds(u, v)
        elif isinstance(cls, SsdConcave):
            self._init_ssd()
        elif isinstance(cls, ExplicitFinite):
            self.kind = "explicit"
            self.fvals = np.vstack([np.concatenate([f(u), f(v)]) for f in cls.functions])
        else:
            raise UnsupportedClassError(f"no statistic for class {type(cls).__name__}")

    # ------------------------------------------------------------ set-up
    def _init_fsd(self, method):
        self.kind = "fsd"
        self.dag = build_dominance_dag(self.pooled)
        if method == "auto":
            method = "threshold" if self.pooled.shape[1] == 1 else "closure"
        if method == "threshold" and self.pooled.shape[1] != 1:
            raise DomainError("threshold method needs one-dimensional consequences")
        if method not in ("threshold", "closure"):
            raise DomainError(f"unknown FSD method {method!r}")
        self.method = method

    def _init_ssd(self):
        self.kind = "ssd"
        x = self.pooled[:, 0]
        grid = self.cls.grid or GridSpec.default_for(x)
        grid.check_covers(x)
        self.grid = grid
        g = grid.values
        K = g.shape[0]
        kx = np.clip(np.searchsorted(g, x, side="left"), 1, K - 1)
        # D(k) / g_k is monotone between consecutive breakpoints
        cand = np.unique(np.clip(np.concatenate([[1, K - 1], kx, kx - 1]), 1, K - 1))
        self.ssd_k = cand
        self.ssd_g = g[cand]
        self.ssd_M = np.maximum(0, cand[:, None] - kx[None, :] + 1).astype(np.float64)
        self.ssd_kx = kx

    # ------------------------------------------------------------ core
    def _scales(self, gamma_u, gamma_v):
        return (1.0 - gamma_u) / self.zu, (1.0 - gamma_v) / self.zv

    def _fsd_counts(self, index, su, sv):
        if self.method == "threshold":
            a, b, t = kernels.threshold_batch(self.dag.index, self.dag.n_nodes, index,
                                              self.zu, su, sv)
            return a, b, t
        a, b, members = kernels.closure_batch(self.dag.index, self.dag.n_nodes, self.dag.edges,
                                              index, self.zu, su, sv)
        return a, b, members

    def _base_values(self, index, su, sv):
        """Minimum over the class of ``su * sum_u f - sv * sum_v f``; returns
        ``(values, witness_data)``."""
        if self.kind == "fsd":
            a, b, w = self._fsd_counts(index, su, sv)
            return su * a - sv * b, w
        cu, cv = split_counts(index, self.zu, self.n)
        if self.kind == "eu":
            sum_u = (cu * self.util[None, :]).sum(axis=1)
            sum_v = (cv * self.util[None, :]).sum(axis=1)
            return su * sum_u - sv * sum_v, None
        if self.kind == "ssd":
            Su = cu.astype(np.float64) @ self.ssd_M.T
            Sv = cv.astype(np.float64) @ self.ssd_M.T
            D = (sv * Sv - su * Su) / self.ssd_g[None, :]
            arg = np.argmin(D, axis=1)
            dmin = D[np.arange(D.shape[0]), arg]
            vals = self.grid.spacing * np.minimum(0.0, dmin)
            arg = np.where(dmin < 0.0, arg, -1)
            return vals, arg
        su_f = (cu[:, None, :] * self.fvals[None, :, :]).sum(axis=2)
        sv_f = (cv[:, None, :] * self.fvals[None, :, :]).sum(axis=2)
        D = su * su_f - sv * sv_f
        arg = np.argmin(D, axis=1)
        return D[np.arange(D.shape[0]), arg], arg

    def values(self, index, side: str = "base", gamma_u: float = 0.0, gamma_v: float = 0.0,
               with_witness: bool = False):
        """Statistic for every split row of ``index``.

        ``side`` selects the plain value, the contamination supremum or the
        infimum.
        """
        if side not in SIDES:
            raise DomainError(f"side must be one of {SIDES}")
        gamma_u, gamma_v = _check_gamma(gamma_u), _check_gamma(gamma_v)
        index = np.atleast_2d(np.asarray(index, dtype=np.int64))
        if side == "base":
            su, sv = self._scales(0.0, 0.0)
            vals, wd = self._base_values(index, su, sv)
            return (vals, wd) if with_witness else vals
        if not self.cls.supports_robust:
            raise UnsupportedClassError(f"no contamination bounds for class {self.cls.kind!r}")
        if gamma_u == gamma_v:
            # shares act on the base statistic in closed form
            su, sv = self._scales(0.0, 0.0)
            m0, wd = self._base_values(index, su, sv)
            vals = self._equal_share(m0, gamma_u, side)
        else:
            su, sv = self._scales(gamma_u, gamma_v)
            m, wd = self._base_values(index, su, sv)
            vals = self._general(m, gamma_u, gamma_v, side)
        return (vals, wd) if with_witness else vals

    def _equal_share(self, m0, s, side):
        if self.kind == "fsd":
            if side == "sup":
                return np.minimum(0.0, m0 + s * (1.0 - m0))
            return np.minimum(0.0, m0 - s * (1.0 + m0))
        A, B = self.bounds
        if side == "sup":
            return m0 + s * ((B - A) - m0)
        return m0 - s * ((B - A) + m0)

    def _general(self, m, gu, gv, side):
        if self.kind == "fsd":
            if side == "sup":
                return np.minimum(0.0, gu + m)
            return np.minimum(0.0, m - gv)
        A, B = self.bounds
        if side == "sup":
            return m + gu * B - gv * A
        return m + gu * A - gv * B

    # ------------------------------------------------------------ observed
    @property
    def observed_index(self) -> np.ndarray:
        return np.arange(self.n, dtype=np.int64)[None, :]

    def observed(self, side="base", gamma_u=0.0, gamma_v=0.0) -> StatValue:
        vals, wd = self.values(self.observed_index, side, gamma_u, gamma_v, with_witness=True)
        value = float(vals[0])
        return StatValue(value, self._witness(wd, value, side, gamma_u, gamma_v))

    def _witness(self, wd, value, side, gu, gv) -> Witness:
        extra = dict(side=side, gamma_u=float(gu), gamma_v=float(gv))
        if self.kind == "eu":
            return Witness("utility", **extra)
        if self.kind == "explicit":
            return Witness("function", name=self.cls.functions[int(wd[0])].name, **extra)
        if self.kind == "ssd":
            k = int(wd[0])
            if k < 0:
                return Witness("empty", **extra)
            return Witness("grid", index=int(self.ssd_k[k]), **extra)
        # fsd: report the minimising observed upper set in raw coordinates
        if self.method == "threshold":
            t = int(wd[0])
            members = np.arange(self.dag.n_nodes) >= t
        else:
            members = wd[0].astype(bool)
        if side != "base" and value == 0.0:
            return Witness("empty", **extra)
        if not members.any():
            return Witness("empty", **extra)
        nodes = self.dag.nodes[members]
        if self.pooled.shape[1] == 1:
            t = nodes.min(axis=0) * self.signs
            return Witness("threshold", points=(tuple(float(x) for x in t),), **extra)
        raw = nodes * self.signs
        return Witness("upper_set", points=tuple(tuple(float(x) for x in p) for p in raw), **extra)


# ---------------------------------------------------------------- public API

def t_statistic(cls: FunctionClass, u: EmpiricalSample, v: EmpiricalSample,
                method: str = "auto") -> StatValue:
    """``inf_f (E_u f - E_v f)`` over ``cls`` (capped at 0 when the class
    contains the zero function)."""
    return PairEvaluator(cls, u, v, method).observed()


def criterion_pair(cls: FunctionClass, x: EmpiricalSample, y: EmpiricalSample) -> CriterionPair:
    return CriterionPair(-t_statistic(cls, x, y).value, t_statistic(cls, y, x).value)


def robust_t_sup(cls: FunctionClass, u: EmpiricalSample, v: EmpiricalSample,
                 gamma_u: float = 0.0, gamma_v: float = 0.0) -> StatValue:
    """Supremum of ``T`` when ``u`` and ``v`` each lose a share ``gamma`` of
    their mass to arbitrary contamination."""
    return PairEvaluator(cls, u, v).observed("sup", gamma_u, gamma_v)


def robust_t_inf(cls: FunctionClass, u: EmpiricalSample, v: EmpiricalSample,
                 gamma_u: float = 0.0, gamma_v: float = 0.0) -> StatValue:
    """Infimum counterpart of :func:`robust_t_sup`."""
    return PairEvaluator(cls, u, v).observed("inf", gamma_u, gamma_v)


def evaluate_witness(cls: FunctionClass, u: EmpiricalSample, v: EmpiricalSample,
                     witness: Witness) -> float:
    """Recompute the statistic from its witness alone."""
    gu, gv, side = witness.gamma_u, witness.gamma_v, witness.side
    zu, zv = u.n, v.n
    if isinstance(cls, FsdIsotoneIndicators):
        xu, xv = u.normalized, v.normalized
        if witness.kind == "empty":
            inu, inv = np.zeros(zu, bool), np.zeros(zv, bool)
        elif witness.kind == "threshold":
            t = witness.points[0][0] * u.space.signs[0]
            inu, inv = xu[:, 0] >= t, xv[:, 0] >= t
        else:
            pts = {tuple(np.asarray(p) * u.space.signs) for p in witness.points}
            inu = np.array([tuple(p) in pts for p in xu])
            inv = np.array([tuple(p) in pts for p in xv])
        a, b = int(inu.sum()), int(inv.sum())
        if side == "base" or gu == gv:
            m0 = (1.0 - 0.0) / zu * a - (1.0 - 0.0) / zv * b
            if side == "base":
                return m0
            if side == "sup":
                return min(0.0, m0 + gu * (1.0 - m0))
            return min(0.0, m0 - gu * (1.0 + m0))
        m = (1.0 - gu) / zu * a - (1.0 - gv) / zv * b
        return min(0.0, gu + m) if side == "sup" else min(0.0, m - gv)
    ev = PairEvaluator(cls, u, v)
    if isinstance(cls, EuSingleton):
        return float(ev.values(ev.observed_index, side, gu, gv)[0])
    if isinstance(cls, SsdConcave):
        if witness.kind == "empty":
            return 0.0
        k = witness.index
        g = ev.grid.values[k]
        kx = ev.ssd_kx
        row = np.maximum(0, k - kx + 1).astype(np.float64)
        su, sv = 1.0 / zu, 1.0 / zv
        d = (sv * float(row[zu:].sum()) - su * float(row[:zu].sum())) / g
        return ev.grid.spacing * min(0.0, d)
    if isinstance(cls, ExplicitFinite):
        f = next(f for f in cls.functions if f.name == witness.name)
        return (1.0 / zu) * float(f(u).sum()) - (1.0 / zv) * float(f(v).sum())
    raise UnsupportedClassError(f"cannot evaluate witness for {type(cls).__name__}")


# ------------------------------------------------------------- oracles

def fsd_statistic_bruteforce(u: EmpiricalSample, v: EmpiricalSample, limit: int = 1 << 16) -> float:
    """Exhaustive minimum over all upper sets of the pooled points."""
    from .classes import enumerate_upper_sets
    dag = build_dominance_dag(np.vstack([u.normalized, v.normalized]))
    cu = np.bincount(dag.index[:u.n], minlength=dag.n_nodes)
    cv = np.bincount(dag.index[u.n:], minlength=dag.n_nodes)
    su, sv = 1.0 / u.n, 1.0 / v.n
    best = 0.0
    for U in enumerate_upper_sets(dag, limit):
        idx = list(U)
        best = min(best, su * int(cu[idx].sum()) - sv * int(cv[idx].sum()))
    return best


def ssd_statistic_direct(u: EmpiricalSample, v: EmpiricalSample, grid: GridSpec | None = None) -> float:
    """Grid statistic evaluated at every grid point (reference for the fast
    candidate-point evaluation)."""
    x, y = u.normalized[:, 0], v.normalized[:, 0]
    grid = grid or GridSpec.default_for(np.concatenate([x, y]))
    grid.check_covers(np.concatenate([x, y]))
    g = grid.values[1:]
    Fu = np.searchsorted(np.sort(x), g, side="right")
    Fv = np.searchsorted(np.sort(y), g, side="right")
    Su = np.cumsum(Fu).astype(np.float64)
    Sv = np.cumsum(Fv).astype(np.float64)
    D = ((1.0 / v.n) * Sv - (1.0 / u.n) * Su) / g
    return grid.spacing * min(0.0, float(D.min()))


def robust_bruteforce(cls: FunctionClass, u: EmpiricalSample, v: EmpiricalSample,
                      gamma_u: float, gamma_v: float, steps: int = 4) -> tuple[float, float]:
    """Sup and inf of ``T`` over contamination placements on a mixture grid.

    Contamination of each sample is spread over the pooled points plus a
    virtual top and bottom point with weights on a simplex grid of
    resolution ``1 / steps``.  Returns ``(sup, inf)``; exponential in the
    number of pooled points, so only for tiny instances.
    """
    from itertools import product
    from .classes import enumerate_upper_sets

    pooled = np.vstack([u.normalized, v.normalized])
    dag = build_dominance_dag(pooled)
    n = dag.n_nodes
    base_u = np.bincount(dag.index[:u.n], minlength=n) / u.n
    base_v = np.bincount(dag.index[u.n:], minlength=n) / v.n
    # support: nodes 0..n-1, then a virtual top and bottom point
    if isinstance(cls, FsdIsotoneIndicators):
        rows = [np.zeros(n + 2)]
        for U in enumerate_upper_sets(dag):
            row = np.zeros(n + 2)
            row[list(U)] = 1.0
            row[n] = 1.0
            rows.append(row)
        rows.append(np.ones(n + 2))
        F = np.array(rows)
    elif isinstance(cls, EuSingleton):
        A, B = cls.resolve_bounds(u, v)
        w = np.concatenate([cls.utility(u), cls.utility(v)])
        node_w = np.zeros(n)
        node_w[dag.index] = w
        F = np.concatenate([node_w, [B, A]])[None, :]
    else:
        raise UnsupportedClassError("brute force only for FSD and EU")

    def weights(k):
        for c in product(range(steps + 1), repeat=k):
            if sum(c) == steps:
                yield np.array(c, dtype=float) / steps

    m = n + 2
    # the mixture grid explodes quickly; larger supports use point masses
    mix = list(weights(m)) if m <= 6 else [np.eye(m)[k] for k in range(m)]
    pu = np.concatenate([base_u, [0.0, 0.0]])
    pv = np.concatenate([base_v, [0.0, 0.0]])
    hi, lo = -np.inf, np.inf
    for cu in mix:
        eu = F @ ((1 - gamma_u) * pu + gamma_u * cu)
        for cv in mix:
            t = float((eu - F @ ((1 - gamma_v) * pv + gamma_v * cv)).min())
            hi = max(hi, t)
            lo = min(lo, t)
    return hi, lo


def pairwise_t_matrix(cls: FunctionClass, samples: Sequence[EmpiricalSample]) -> np.ndarray:
    """``T[i, j] = T(samples[i], samples[j])`` for all ordered pairs.

    One-dimensional FSD is computed jointly from suffix counts; other
    classes fall back to one evaluation per ordered pair.  Values agree
    bit-for-bit with :func:`t_statistic`.
    """
    k = len(samples)
    T = np.zeros((k, k))
    if k == 0:
        return T
    dim = samples[0].space.dim
    if isinstance(cls, FsdIsotoneIndicators) and dim == 1:
        xs = [s.normalized[:, 0] for s in samples]
        support = np.unique(np.concatenate(xs))
        S = np.zeros((k, support.size + 1), dtype=np.int64)
        for a, x in enumerate(xs):
            c = np.bincount(np.searchsorted(support, x), minlength=support.size)
            S[a, :-1] = np.cumsum(c[::-1])[::-1]
        z = np.array([s.n for s in samples], dtype=float)
        scale = 1.0 / z
        for i in range(k):
            vals = scale[i] * S[i][None, :] - scale[:, None] * S
            T[i] = vals.min(axis=1)
        np.fill_diagonal(T, 0.0)
        return T
    for i in range(k):
        for j in range(k):
            if i != j:
                T[i, j] = t_statistic(cls, samples[i], samples[j]).value
    return T
