"""Protocols of observed act-consequence pairs.

A protocol is the raw material of every analysis in this package: an ordered
list of ``(action, consequence)`` observations over a consequence space with
per-coordinate optimization directions.  Coordinates marked ``min`` are
negated once when numeric arrays are requested, so downstream code only ever
deals with componentwise maximization.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, ParseError, SchemaError, ValidationError


class Direction(str, Enum):
    MAXIMIZE = "max"
    MINIMIZE = "min"

    @classmethod
    def parse(cls, value) -> "Direction":
        if isinstance(value, Direction):
            return value
        key = str(value).strip().lower()
        if key in ("max", "maximize", "+"):
            return cls.MAXIMIZE
        if key in ("min", "minimize", "-"):
            return cls.MINIMIZE
        raise SchemaError(f"unknown direction {value!r}")


@dataclass(frozen=True)
class ConsequenceSpace:
    """Dimension, per-coordinate direction and column names of consequences."""

    dim: int
    directions: tuple[Direction, ...] = ()
    names: tuple[str, ...] = ()

    def __post_init__(self):
        if not isinstance(self.dim, (int, np.integer)) or self.dim < 1:
            raise SchemaError(f"dim must be a positive integer, got {self.dim!r}")
        dirs = self.directions or (Direction.MAXIMIZE,) * self.dim
        dirs = tuple(Direction.parse(d) for d in dirs)
        if len(dirs) != self.dim:
            raise SchemaError(f"expected {self.dim} directions, got {len(dirs)}")
        names = tuple(self.names) or tuple(f"c{k + 1}" for k in range(self.dim))
        if len(names) != self.dim:
            raise SchemaError(f"expected {self.dim} column names, got {len(names)}")
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "directions", dirs)
        object.__setattr__(self, "names", names)

    @classmethod
    def maximize(cls, dim: int = 1, names: Sequence[str] = ()) -> "ConsequenceSpace":
        return cls(dim, (Direction.MAXIMIZE,) * dim, tuple(names))

    @property
    def signs(self) -> np.ndarray:
        """``+1`` for maximized and ``-1`` for minimized coordinates."""
        return np.array([1.0 if d is Direction.MAXIMIZE else -1.0 for d in self.directions])

    def normalize(self, values) -> np.ndarray:
        """Map raw consequences to the all-maximize orientation."""
        arr = np.asarray(values, dtype=float)
        if arr.shape[-1] != self.dim:
            raise SchemaError(f"consequence has {arr.shape[-1]} coordinates, space has {self.dim}")
        return arr * self.signs

    def to_dict(self) -> dict:
        return {"columns": list(self.names), "directions": [d.value for d in self.directions]}

    @classmethod
    def from_dict(cls, data: dict) -> "ConsequenceSpace":
        names = tuple(data.get("columns", ()))
        dirs = tuple(data.get("directions", ()))
        dim = data.get("dim", len(names) or len(dirs))
        return cls(dim, dirs, names)


def _as_consequence(values, dim: int) -> tuple[float, ...]:
    if np.isscalar(values):
        values = (values,)
    out = tuple(float(v) for v in values)
    if len(out) != dim:
        raise SchemaError(f"consequence {out} has {len(out)} coordinates, expected {dim}")
    if not all(math.isfinite(v) for v in out):
        raise ValidationError(f"non-finite consequence {out}")
    return out


@dataclass(frozen=True, eq=False)
class EmpiricalSample:
    """The consequences observed under one action, each with weight ``1/n``."""

    space: ConsequenceSpace
    points: np.ndarray  # raw values, shape (n, dim)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1) if self.space.dim == 1 else pts.reshape(1, -1)
        if pts.ndim != 2 or pts.shape[1] != self.space.dim:
            raise SchemaError(f"sample shape {pts.shape} does not match dim {self.space.dim}")
        if pts.shape[0] < 1:
            raise ValidationError("an empirical sample needs at least one point")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def from_values(cls, values, space: ConsequenceSpace | None = None) -> "EmpiricalSample":
        arr = np.asarray(values, dtype=float)
        if space is None:
            space = ConsequenceSpace.maximize(1 if arr.ndim == 1 else arr.shape[1])
        return cls(space, arr)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def normalized(self) -> np.ndarray:
        return self.points * self.space.signs

    def __eq__(self, other):
        if not isinstance(other, EmpiricalSample):
            return NotImplemented
        return self.space == other.space and np.array_equal(self.points, other.points)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class Protocol:
    """An ordered family of ``(action, consequence)`` observations.

    ``actions`` keeps first-appearance order unless given explicitly; every
    listed action must occur at least once.
    """

    space: ConsequenceSpace
    entries: tuple[tuple[str, tuple[float, ...]], ...]
    actions: tuple[str, ...] = ()

    def __post_init__(self):
        entries = tuple((str(a), _as_consequence(c, self.space.dim)) for a, c in self.entries)
        seen = list(dict.fromkeys(a for a, _ in entries))
        actions = tuple(str(a) for a in self.actions) or tuple(seen)
        if len(set(actions)) != len(actions):
            raise ValidationError(f"duplicate action ids in {actions}")
        known = set(actions)
        for a, _ in entries:
            if a not in known:
                raise ValidationError(f"entry action {a!r} is not a declared action")
        missing = [a for a in actions if a not in set(seen)]
        if missing:
            raise ValidationError(f"actions without any trial: {missing}")
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "actions", actions)
        groups: dict[str, list[tuple[float, ...]]] = {a: [] for a in actions}
        for a, c in entries:
            groups[a].append(c)
        arrays = {}
        for a, pts in groups.items():
            arr = np.array(pts, dtype=float).reshape(len(pts), self.space.dim)
            arr.setflags(write=False)
            arrays[a] = arr
        object.__setattr__(self, "_groups", arrays)

    @classmethod
    def from_samples(cls, samples: dict, space: ConsequenceSpace | None = None) -> "Protocol":
        """Build a protocol from ``{action: values}`` (grouped observation order)."""
        if space is None:
            first = np.asarray(next(iter(samples.values())), dtype=float)
            space = ConsequenceSpace.maximize(1 if first.ndim == 1 else first.shape[1])
        entries = []
        for a, vals in samples.items():
            arr = np.asarray(vals, dtype=float).reshape(-1, space.dim)
            entries.extend((a, tuple(row)) for row in arr)
        return cls(space, tuple(entries), tuple(samples))

    @property
    def counts(self) -> dict[str, int]:
        return {a: self._groups[a].shape[0] for a in self.actions}

    @property
    def n_entries(self) -> int:
        return len(self.entries)

    @property
    def min_count(self) -> int:
        return min(self.counts.values())

    def index_of(self, action: str) -> int:
        try:
            return self.actions.index(action)
        except ValueError:
            raise DomainError(f"unknown action {action!r}") from None

    def raw(self, action: str) -> np.ndarray:
        if action not in self._groups:
            raise DomainError(f"unknown action {action!r}")
        return self._groups[action]

    def sample_of(self, action: str) -> EmpiricalSample:
        return sample_of(self, action)

    def __eq__(self, other):
        if not isinstance(other, Protocol):
            return NotImplemented
        return (self.space == other.space and self.actions == other.actions
                and self.entries == other.entries)

    __hash__ = None

    # JSON mirror of the CSV contract
    def to_json_dict(self) -> dict:
        return {
            "space": self.space.to_dict(),
            "actions": list(self.actions),
            "entries": [[a, list(c)] for a, c in self.entries],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "Protocol":
        space = ConsequenceSpace.from_dict(data["space"])
        entries = tuple((a, tuple(c)) for a, c in data["entries"])
        return cls(space, entries, tuple(data.get("actions", ())))


@dataclass(frozen=True, eq=False)
class SubProtocol:
    """View of a protocol restricted to the actions in ``selected``."""

    parent: Protocol
    selected: tuple[str, ...]

    @property
    def actions(self) -> tuple[str, ...]:
        return self.selected

    @property
    def entries(self) -> tuple[tuple[str, tuple[float, ...]], ...]:
        keep = set(self.selected)
        return tuple(e for e in self.parent.entries if e[0] in keep)

    @property
    def space(self) -> ConsequenceSpace:
        return self.parent.space

    @property
    def counts(self) -> dict[str, int]:
        c = self.parent.counts
        return {a: c[a] for a in self.selected}

    def sample_of(self, action: str) -> EmpiricalSample:
        if action not in self.selected:
            raise DomainError(f"action {action!r} not in sub-protocol")
        return sample_of(self.parent, action)


def sub_protocol(p: Protocol, M: Iterable[str] | None = None) -> SubProtocol:
    """Restrict ``p`` to the action subset ``M`` (all actions when ``None``).

    The selection is stored in the parent's action order.
    """
    if M is None:
        return SubProtocol(p, p.actions)
    if isinstance(M, str):
        M = [M]
    chosen = set(M)
    if not chosen:
        raise DomainError("sub-protocol needs a nonempty action subset")
    unknown = chosen - set(p.actions)
    if unknown:
        raise DomainError(f"unknown actions {sorted(unknown)}")
    return SubProtocol(p, tuple(a for a in p.actions if a in chosen))


def sample_of(p: Protocol, action: str) -> EmpiricalSample:
    return EmpiricalSample(p.space, p.raw(action))


# ---------------------------------------------------------------- file I/O

def sidecar_path(path: str | Path) -> Path:
    path = Path(path)
    return path.with_suffix(path.suffix + ".json")


def load_protocol(path: str | Path, space: ConsequenceSpace | None = None,
                  directions: dict[str, str] | None = None) -> Protocol:
    """Read a protocol CSV with header ``action,<c1>,<c2>,...``.

    Directions come from, in order of precedence, ``space``, the
    ``directions`` mapping of column name to ``min``/``max``, a JSON sidecar
    ``<path>.json``, or default to maximize for every column.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ParseError(f"no such protocol file: {path}") from None
    rows = list(csv.reader(text.splitlines()))
    # drop fully blank lines but keep numbering
    numbered = [(k + 1, r) for k, r in enumerate(rows) if any(cell.strip() for cell in r)]
    if not numbered:
        raise ParseError(f"empty protocol file: {path}")
    header_line, header = numbered[0]
    header = [h.strip() for h in header]
    if len(header) < 2 or header[0].lower() != "action":
        raise ParseError("header must read 'action,<c1>,...'", header_line)
    names = tuple(header[1:])

    declared_actions: tuple[str, ...] = ()
    if space is None:
        meta = {}
        side = sidecar_path(path)
        if side.exists():
            try:
                meta = json.loads(side.read_text(encoding="utf-8"))
            except json.JSONDecodeError as exc:
                raise ParseError(f"bad sidecar {side}: {exc}") from None
            declared_actions = tuple(meta.get("actions", ()))
        dir_map = dict(zip(meta.get("columns", names), meta.get("directions", ())))
        if directions:
            unknown = set(directions) - set(names)
            if unknown:
                raise SchemaError(f"direction given for unknown columns {sorted(unknown)}")
            dir_map.update(directions)
        space = ConsequenceSpace(len(names), tuple(dir_map.get(n, "max") for n in names), names)
    elif space.dim != len(names):
        raise SchemaError(f"file has {len(names)} consequence columns, schema expects {space.dim}")

    entries = []
    for line, row in numbered[1:]:
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(row)}", line)
        action = row[0].strip()
        if not action:
            raise ParseError("missing action id", line)
        try:
            vals = tuple(float(cell) for cell in row[1:])
        except ValueError:
            raise ParseError(f"non-numeric consequence in {row[1:]}", line) from None
        if not all(math.isfinite(v) for v in vals):
            raise ParseError(f"non-finite consequence in {row[1:]}", line)
        entries.append((action, vals))
    if not entries:
        raise ParseError(f"protocol file has a header but no trials: {path}")
    return Protocol(space, tuple(entries), declared_actions)


def save_protocol(p: Protocol, path: str | Path, sidecar: bool = True) -> None:
    """Write ``p`` in the CSV contract (``repr`` floats round-trip exactly)."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["action", *p.space.names])
        for a, c in p.entries:
            w.writerow([a, *(repr(v) for v in c)])
    if sidecar:
        meta = p.space.to_dict()
        meta["actions"] = list(p.actions)
        sidecar_path(path).write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")


def load_protocol_json(path: str | Path) -> Protocol:
    return Protocol.from_json_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def save_protocol_json(p: Protocol, path: str | Path) -> None:
    Path(path).write_text(json.dumps(p.to_json_dict(), indent=2) + "\n", encoding="utf-8")
