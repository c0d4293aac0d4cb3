"""Function classes and the componentwise order they are built on.

A function class ``F`` determines the statistic ``inf_f (E_u f - E_v f)`` and
thereby every choice rule and test in the package.  Four variants exist:

* :class:`EuSingleton`: a single utility (expected-utility comparisons);
* :class:`FsdIsotoneIndicators`: indicators of upper sets of the
  componentwise order plus the zero function (first-order dominance);
* :class:`SsdConcave`: concave isotone utilities on the line, realised by a
  grid of integrated ECDFs (second-order dominance);
* :class:`ExplicitFinite`: a user supplied finite list of tabulated
  functions.

FSD is handled exactly through upper sets of the *pooled observed points*:
empirical expectations of an isotone indicator only depend on which observed
points its support contains.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import DomainError, ResourceError, SchemaError, UnsupportedClassError
from .protocol import ConsequenceSpace, EmpiricalSample


@dataclass(frozen=True)
class GridSpec:
    """Equally spaced integration grid ``linspace(lo, hi, points)``."""

    lo: float
    hi: float
    points: int = 50_000

    def __post_init__(self):
        if not self.lo < self.hi:
            raise DomainError(f"grid needs lo < hi, got [{self.lo}, {self.hi}]")
        if int(self.points) < 2:
            raise DomainError("grid needs at least two points")
        if self.lo < 0:
            # the 1/t weight changes sign for negative t
            raise DomainError("grid lower end must be >= 0 for the 1/t weighting")
        object.__setattr__(self, "points", int(self.points))

    @cached_property
    def values(self) -> np.ndarray:
        g = np.linspace(self.lo, self.hi, self.points)
        g.setflags(write=False)
        return g

    @property
    def spacing(self) -> float:
        return (self.hi - self.lo) / self.points

    def check_covers(self, values) -> None:
        arr = np.asarray(values, dtype=float)
        if arr.size and (arr.min() < self.lo or arr.max() > self.hi):
            from .errors import CoverageError
            raise CoverageError(
                f"grid [{self.lo}, {self.hi}] too small for data range "
                f"[{arr.min()}, {arr.max()}]")

    @classmethod
    def default_for(cls, values, points: int = 50_000) -> "GridSpec":
        arr = np.asarray(values, dtype=float)
        lo, hi = float(arr.min()), float(arr.max())
        if lo < 0:
            raise DomainError("default SSD grid requires nonnegative data")
        return cls(max(0.0, lo - 1.0), hi + 1.0, points)


class FunctionClass:
    """Common interface of the function-class variants."""

    #: name used in reports and on the command line
    kind: str = ""
    #: class contains the all-zero function (statistic is then <= 0)
    contains_zero: bool = False
    #: robust sup/inf bounds are implemented
    supports_robust: bool = False

    def check_applicable(self, space: ConsequenceSpace) -> None:
        """Raise when the class cannot be used on ``space``."""

    def describe(self) -> str:
        return self.kind


@dataclass(frozen=True)
class EuSingleton(FunctionClass):
    """Single utility: linear ``weights`` on the maximize-oriented
    coordinates, or a ``table`` mapping raw consequences to utilities.

    ``bounds`` is the range ``[A, B]`` of the utility.  When omitted, the
    range of the utility over the pooled observed points is used.
    """

    weights: tuple[float, ...] | None = None
    table: tuple[tuple[tuple[float, ...], float], ...] | None = None
    bounds: tuple[float, float] | None = None

    kind = "eu"
    contains_zero = False
    supports_robust = True

    def __post_init__(self):
        if self.weights is not None and self.table is not None:
            raise DomainError("give either weights or a utility table, not both")
        if self.weights is not None:
            object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if self.table is not None:
            tab = self.table.items() if isinstance(self.table, dict) else self.table
            norm = tuple((tuple(float(x) for x in np.atleast_1d(k)), float(v)) for k, v in tab)
            object.__setattr__(self, "table", norm)
        if self.bounds is not None:
            a, b = (float(x) for x in self.bounds)
            if not a < b:
                raise DomainError(f"bounds need A < B, got {self.bounds}")
            object.__setattr__(self, "bounds", (a, b))

    def check_applicable(self, space):
        if self.weights is not None and len(self.weights) != space.dim:
            raise SchemaError(f"{len(self.weights)} utility weights for a {space.dim}-d space")
        if self.weights is None and self.table is None and space.dim != 1:
            raise SchemaError("identity utility needs a one-dimensional space; pass weights")

    def utility(self, sample: EmpiricalSample) -> np.ndarray:
        self.check_applicable(sample.space)
        if self.table is not None:
            lut = dict(self.table)
            try:
                return np.array([lut[tuple(float(x) for x in row)] for row in sample.points])
            except KeyError as exc:
                raise DomainError(f"utility table has no entry for {exc.args[0]}") from None
        x = sample.normalized
        if self.weights is None:
            return x[:, 0].copy()
        return x @ np.asarray(self.weights)

    def resolve_bounds(self, *samples: EmpiricalSample) -> tuple[float, float]:
        if self.bounds is not None:
            return self.bounds
        vals = np.concatenate([self.utility(s) for s in samples])
        if self.table is not None:
            vals = np.concatenate([vals, [v for _, v in self.table]])
        return float(vals.min()), float(vals.max())

    def describe(self):
        if self.table is not None:
            return "eu:table"
        if self.weights is None:
            return "eu"
        return "eu:" + ",".join(repr(w) for w in self.weights)


@dataclass(frozen=True)
class FsdIsotoneIndicators(FunctionClass):
    """Indicators of upper sets of the componentwise order, plus zero."""

    kind = "fsd"
    contains_zero = True
    supports_robust = True
    bounds = (0.0, 1.0)


@dataclass(frozen=True)
class SsdConcave(FunctionClass):
    """Concave isotone utilities on the line via integrated ECDFs.

    ``grid=None`` picks ``[max(0, min - 1), max + 1]`` with 50 000 points
    from the pooled data of each comparison.
    """

    grid: GridSpec | None = None

    kind = "ssd"
    contains_zero = True
    supports_robust = False
    bounds = (0.0, 1.0)

    def check_applicable(self, space):
        if space.dim != 1:
            raise UnsupportedClassError("SSD statistic is only defined for one-dimensional consequences")

    def describe(self):
        if self.grid is None:
            return "ssd"
        g = self.grid
        return f"ssd:{g.lo!r}:{g.hi!r}:{g.points}"


@dataclass(frozen=True)
class TabulatedFunction:
    """A bounded function given by its values on raw consequence points."""

    name: str
    table: tuple[tuple[tuple[float, ...], float], ...]

    def __call__(self, sample: EmpiricalSample) -> np.ndarray:
        lut = dict(self.table)
        try:
            return np.array([lut[tuple(float(x) for x in row)] for row in sample.points])
        except KeyError as exc:
            raise DomainError(f"function {self.name!r} undefined at {exc.args[0]}") from None

    @classmethod
    def from_mapping(cls, name, mapping) -> "TabulatedFunction":
        items = mapping.items() if isinstance(mapping, dict) else mapping
        return cls(name, tuple((tuple(float(x) for x in np.atleast_1d(k)), float(v))
                               for k, v in items))


@dataclass(frozen=True)
class ExplicitFinite(FunctionClass):
    """A finite list of tabulated functions, all within ``bounds``."""

    functions: tuple[TabulatedFunction, ...] = ()
    bounds: tuple[float, float] = (0.0, 1.0)

    kind = "explicit"
    supports_robust = False

    def __post_init__(self):
        if not self.functions:
            raise DomainError("explicit class needs at least one function")
        a, b = self.bounds
        if not a < b:
            raise DomainError(f"bounds need A < B, got {self.bounds}")
        for f in self.functions:
            vals = [v for _, v in f.table]
            if min(vals) < a or max(vals) > b:
                raise DomainError(f"function {f.name!r} leaves the bounds [{a}, {b}]")

    @property
    def contains_zero(self):  # type: ignore[override]
        return any(all(v == 0.0 for _, v in f.table) for f in self.functions)

    def describe(self):
        return f"explicit[{len(self.functions)}]"


def parse_class(text: str) -> FunctionClass:
    """Parse ``fsd | eu | eu:<w1,w2,..> | ssd | ssd:<lo>:<hi>:<points> | file:<path>``."""
    text = text.strip()
    head, _, rest = text.partition(":")
    head = head.lower()
    if head == "fsd" and not rest:
        return FsdIsotoneIndicators()
    if head == "eu":
        if not rest:
            return EuSingleton()
        return EuSingleton(weights=tuple(float(w) for w in rest.split(",")))
    if head == "ssd":
        if not rest:
            return SsdConcave()
        parts = rest.split(":")
        if len(parts) != 3:
            raise DomainError("ssd grid must be given as ssd:<lo>:<hi>:<points>")
        return SsdConcave(GridSpec(float(parts[0]), float(parts[1]), int(parts[2])))
    if head == "file":
        return load_class(rest)
    raise DomainError(f"unknown function class {text!r}")


def load_class(path: str | Path) -> FunctionClass:
    """Read a class from JSON.

    ``{"kind": "explicit", "bounds": [A, B], "functions": [{"name": .., "points":
    [[..], ..], "values": [..]}, ..]}``; ``kind`` may also be ``fsd``, ``ssd``
    (with optional ``grid``) or ``eu`` (with ``weights`` or a table given as
    ``points``/``values``).
    """
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    kind = data.get("kind", "explicit")
    if kind == "fsd":
        return FsdIsotoneIndicators()
    if kind == "ssd":
        g = data.get("grid")
        return SsdConcave(GridSpec(**g) if g else None)
    if kind == "eu":
        bounds = tuple(data["bounds"]) if "bounds" in data else None
        if "points" in data:
            return EuSingleton(table=tuple(zip(map(tuple, np.atleast_2d(data["points"]).tolist()),
                                               data["values"])), bounds=bounds)
        return EuSingleton(weights=tuple(data["weights"]) if "weights" in data else None,
                           bounds=bounds)
    if kind == "explicit":
        fs = []
        for k, f in enumerate(data["functions"]):
            pts = [tuple(np.atleast_1d(p).tolist()) for p in f["points"]]
            fs.append(TabulatedFunction.from_mapping(f.get("name", f"f{k}"), zip(pts, f["values"])))
        return ExplicitFinite(tuple(fs), tuple(data.get("bounds", (0.0, 1.0))))
    raise DomainError(f"unknown class kind {kind!r} in {path}")


# ------------------------------------------------------ componentwise order

def dominates(space: ConsequenceSpace, x, y) -> bool:
    """``x`` is at least as good as ``y`` in every coordinate."""
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    ya = np.atleast_1d(np.asarray(y, dtype=float))
    if xa.shape != (space.dim,) or ya.shape != (space.dim,):
        raise DomainError(f"consequences {xa.shape} and {ya.shape} do not fit a {space.dim}-d space")
    xa, ya = space.normalize(xa), space.normalize(ya)
    return bool(np.all(xa >= ya))


@dataclass(frozen=True, eq=False)
class DominanceDag:
    """Hasse diagram of the componentwise order on distinct points.

    ``nodes`` are distinct maximize-oriented points, ``edges`` the covering
    pairs ``(a, b)`` with ``nodes[a] < nodes[b]``, and ``counts`` the
    multiplicity of each node in the input list.  ``index`` maps every input
    point to its node.
    """

    nodes: np.ndarray
    counts: np.ndarray
    edges: np.ndarray
    index: np.ndarray = field(default=None)

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    def successors(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.n_nodes)]
        for a, b in self.edges:
            out[a].append(int(b))
        return out

    def is_upper_set(self, members) -> bool:
        m = np.zeros(self.n_nodes, dtype=bool)
        m[list(members)] = True
        return not any(m[a] and not m[b] for a, b in self.edges)


def strict_order_matrix(nodes: np.ndarray) -> np.ndarray:
    """``S[a, b]`` is true iff ``nodes[a] <= nodes[b]`` componentwise and a != b."""
    le = np.all(nodes[:, None, :] <= nodes[None, :, :], axis=2)
    np.fill_diagonal(le, False)
    return le


def build_dominance_dag(points) -> DominanceDag:
    """Distinct points of ``points`` (already maximize-oriented) with their
    covering relation."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    if pts.shape[0] == 0:
        raise DomainError("dominance DAG needs at least one point")
    nodes, index, counts = np.unique(pts, axis=0, return_inverse=True, return_counts=True)
    index = np.asarray(index).reshape(-1)
    S = strict_order_matrix(nodes)
    if nodes.shape[0] > 1:
        Sf = S.astype(np.float32)
        through = (Sf @ Sf) > 0
        cover = S & ~through
    else:
        cover = S
    edges = np.argwhere(cover).astype(np.int64).reshape(-1, 2)
    return DominanceDag(nodes, counts.astype(np.int64), edges, index)


def enumerate_upper_sets(dag: DominanceDag, limit: int = 1 << 16) -> list[frozenset[int]]:
    """All upper sets of ``dag`` (including the empty and the full set).

    Intended as a brute-force oracle; raises :class:`ResourceError` once more
    than ``limit`` sets would be produced.
    """
    n = dag.n_nodes
    succ = dag.successors()
    # nodes from the top of the order downwards: all successors come first
    order = sorted(range(n), key=lambda k: tuple(-dag.nodes[k]))
    # lexicographic descending sort is a linear extension of the reversed order
    out: list[frozenset[int]] = []
    chosen = np.zeros(n, dtype=bool)

    def rec(pos: int):
        if pos == n:
            if len(out) >= limit:
                raise ResourceError(f"more than {limit} upper sets")
            out.append(frozenset(np.flatnonzero(chosen).tolist()))
            return
        k = order[pos]
        rec(pos + 1)
        if all(chosen[s] for s in succ[k]):
            chosen[k] = True
            rec(pos + 1)
            chosen[k] = False

    import sys
    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, n + 100))
    try:
        rec(0)
    finally:
        sys.setrecursionlimit(old)
    return out
