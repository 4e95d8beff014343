"""Grids, sampled functions, piecewise functions and the Bielecki norm.

A :class:`PiecewiseFunction` stores one sampled segment per half-open
subinterval of the partition, closed-segment style: each segment carries both
endpoint nodes, the left endpoint holding the right-limit value x(left+) and
the right endpoint the left-limit value x(right-).  Evaluation at a
breakpoint returns the left limit, matching the left-continuity convention
of piecewise-continuous state spaces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, StructuralError

__all__ = [
    "Grid",
    "SampledFunction",
    "Segment",
    "ProblemGrid",
    "PiecewiseFunction",
    "BieleckiWeight",
    "bielecki_norm",
    "sup_norm",
]

DIFFERENTIAL = "differential"
IMPULSE = "impulse"


@dataclass(frozen=True, eq=False)
class Grid:
    """Strictly increasing nodes spanning [a, b].

    Equality is identity (array-valued fields make generated equality
    ill-defined); compare node arrays explicitly where needed.
    """

    nodes: np.ndarray

    def __post_init__(self):
        nodes = np.ascontiguousarray(self.nodes, dtype=np.float64)
        object.__setattr__(self, "nodes", nodes)
        if nodes.ndim != 1 or nodes.size < 2:
            raise StructuralError("Grid needs at least 2 nodes")
        if not np.all(np.diff(nodes) > 0):
            raise StructuralError("Grid nodes must be strictly increasing")

    @property
    def a(self) -> float:
        return float(self.nodes[0])

    @property
    def b(self) -> float:
        return float(self.nodes[-1])

    @property
    def spacing(self) -> float:
        """Common spacing of a uniform grid; raises for nonuniform grids."""
        d = np.diff(self.nodes)
        h = float(d[0])
        if not np.allclose(d, h, rtol=1e-9, atol=1e-14):
            raise StructuralError("Grid is not uniform")
        return h

    @classmethod
    def uniform(cls, a: float, b: float, n_panels: int) -> "Grid":
        return cls(np.linspace(a, b, n_panels + 1))


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Values of a real function on the nodes of a grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.ascontiguousarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", vals)
        if vals.shape != self.grid.nodes.shape:
            raise StructuralError("values length must equal node count")
        if not np.all(np.isfinite(vals)):
            raise StructuralError("values must all be finite")

    @classmethod
    def from_callable(cls, grid: Grid, fn) -> "SampledFunction":
        return cls(grid, np.asarray(fn(grid.nodes), dtype=np.float64))

    def __call__(self, tau: float) -> float:
        if tau < self.grid.a - 1e-12 or tau > self.grid.b + 1e-12:
            raise DomainError(f"tau={tau} outside [{self.grid.a}, {self.grid.b}]")
        return float(np.interp(tau, self.grid.nodes, self.values))


@dataclass(frozen=True, eq=False)
class Segment:
    """One half-open subinterval (left, right] of the partition.

    ``kind`` is "differential" for (sigma_i, tau_{i+1}] or "impulse" for
    (tau_i, sigma_i]; ``index`` is the interval index i of the partition.
    Degenerate impulse intervals (left == right) carry a single node.
    """

    kind: str
    index: int
    nodes: np.ndarray

    @property
    def left(self) -> float:
        return float(self.nodes[0])

    @property
    def right(self) -> float:
        return float(self.nodes[-1])

    @property
    def spacing(self) -> float:
        if self.nodes.size < 2:
            return 0.0
        return float(self.nodes[1] - self.nodes[0])

    @property
    def degenerate(self) -> bool:
        return self.nodes.size < 2


@dataclass(frozen=True, eq=False)
class ProblemGrid:
    """Ordered segments tiling (0, T]; breakpoints are nodes of both neighbours."""

    segments: tuple

    def __post_init__(self):
        prev_right = None
        for seg in self.segments:
            if prev_right is not None and not math.isclose(seg.left, prev_right, abs_tol=1e-12):
                raise StructuralError("segments must tile the interval in order")
            prev_right = seg.right

    @property
    def T(self) -> float:
        return self.segments[-1].right

    def segment_of(self, tau: float) -> Segment:
        """Segment whose half-open interval (left, right] contains tau (tau=0 maps
        to the first segment)."""
        if tau < 0 or tau > self.T + 1e-12:
            raise DomainError(f"tau={tau} outside [0, {self.T}]")
        if tau <= self.segments[0].right:
            return self.segments[0]
        for seg in self.segments[1:]:
            if seg.left < tau <= seg.right:
                return seg
        return self.segments[-1]


@dataclass(frozen=True)
class BieleckiWeight:
    """Exponential weight e^(-theta * tau) with theta > 0."""

    theta: float

    def __post_init__(self):
        if not self.theta > 0:
            raise DomainError(f"Bielecki weight must be positive, got theta={self.theta}")


@dataclass
class PiecewiseFunction:
    """Per-segment samples of a piecewise-continuous function on (0, T]."""

    grid: ProblemGrid
    segment_values: list = field(default_factory=list)

    def __post_init__(self):
        if len(self.segment_values) != len(self.grid.segments):
            raise StructuralError("one value array per segment required")
        vals = []
        for seg, v in zip(self.grid.segments, self.segment_values):
            arr = np.ascontiguousarray(v, dtype=np.float64)
            if arr.shape != seg.nodes.shape:
                raise StructuralError(
                    f"segment {seg.kind}:{seg.index} expects {seg.nodes.size} values, got {arr.size}"
                )
            if not np.all(np.isfinite(arr)):
                raise StructuralError(f"non-finite values on segment {seg.kind}:{seg.index}")
            vals.append(arr)
        self.segment_values = vals

    @classmethod
    def from_segment_callables(cls, grid: ProblemGrid, fns) -> "PiecewiseFunction":
        """Build from one callable per segment (evaluated on closed segments,
        so each callable supplies its own one-sided limits)."""
        return cls(grid, [np.asarray(fn(seg.nodes), dtype=np.float64) for fn, seg in zip(fns, grid.segments)])

    @classmethod
    def constant(cls, grid: ProblemGrid, value: float) -> "PiecewiseFunction":
        return cls(grid, [np.full(seg.nodes.shape, float(value)) for seg in grid.segments])

    def copy(self) -> "PiecewiseFunction":
        return PiecewiseFunction(self.grid, [v.copy() for v in self.segment_values])

    def left_limits(self) -> dict:
        """Stored left-limit values keyed by breakpoint."""
        return {seg.right: float(v[-1]) for seg, v in zip(self.grid.segments, self.segment_values)}

    def __call__(self, tau: float) -> float:
        """Evaluate with the left-continuity convention at breakpoints."""
        seg = self.grid.segment_of(tau)
        i = self.grid.segments.index(seg)
        vals = self.segment_values[i]
        if seg.degenerate:
            return float(vals[0])
        return float(np.interp(tau, seg.nodes, vals))

    def all_nodes(self) -> np.ndarray:
        return np.concatenate([seg.nodes for seg in self.grid.segments])

    def all_values(self) -> np.ndarray:
        return np.concatenate(self.segment_values)

    def to_csv(self, path) -> None:
        """Write columns tau,value,segment_index."""
        with open(path, "w") as fh:
            fh.write("tau,value,segment_index\n")
            for i, (seg, vals) in enumerate(zip(self.grid.segments, self.segment_values)):
                for t, v in zip(seg.nodes, vals):
                    fh.write(f"{t:.17g},{v:.17g},{i}\n")


def _compatible(a: ProblemGrid, b: ProblemGrid) -> bool:
    if a is b:
        return True
    if len(a.segments) != len(b.segments):
        return False
    for sa, sb in zip(a.segments, b.segments):
        if sa.kind != sb.kind or sa.index != sb.index or sa.nodes.size != sb.nodes.size:
            return False
        if abs(sa.left - sb.left) > 1e-12 or abs(sa.right - sb.right) > 1e-12:
            return False
    return True


def _diff(x: PiecewiseFunction, y: PiecewiseFunction):
    if not _compatible(x.grid, y.grid):
        raise StructuralError("piecewise functions live on incompatible grids")
    return [a - b for a, b in zip(x.segment_values, y.segment_values)]


def bielecki_norm(x: PiecewiseFunction, w: BieleckiWeight) -> float:
    """Discrete Bielecki norm: max over all stored samples of |x| * e^(-theta tau).

    Grid maximum, not a true supremum; both one-sided limits at every
    breakpoint participate (they are stored as segment endpoint samples).
    """
    out = 0.0
    for seg, vals in zip(x.grid.segments, x.segment_values):
        out = max(out, float(np.max(np.abs(vals) * np.exp(-w.theta * seg.nodes))))
    return out


def sup_norm(x: PiecewiseFunction) -> float:
    return max(float(np.max(np.abs(v))) for v in x.segment_values)


def pb_distance(x: PiecewiseFunction, y: PiecewiseFunction, w: BieleckiWeight) -> float:
    out = 0.0
    for seg, d in zip(x.grid.segments, _diff(x, y)):
        out = max(out, float(np.max(np.abs(d) * np.exp(-w.theta * seg.nodes))))
    return out


def sup_distance(x: PiecewiseFunction, y: PiecewiseFunction) -> float:
    return max(float(np.max(np.abs(d))) for d in _diff(x, y))
