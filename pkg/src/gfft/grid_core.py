"""Uniform-grid calculus on [0, T].

Everything downstream works with real-valued functions sampled on the
uniform grid t_k = k*T/N, k = 0..N.  Conventions fixed here:

* Quadrature is the composite trapezoid rule on the grid nodes, so
  inner products and norms carry its O((T/N)^2) discretisation error.
  Binary operations require the two operands to share the grid exactly
  (same T, same N); there is no resampling.

* The combination s(h1, h2) of two weights is the canonical nonnegative
  square root of h1^2 + h2^2, taken nodewise.  For a finite sequence H
  the combination is sqrt(sum of squares), with the nodewise sum done in
  exact (fsum) arithmetic so that permutations of H give bit-identical
  results.  The singleton case s((h,)) = |h|, not h.

* Two sequences are s-equivalent when their nodewise sums of squares
  agree within an absolute max-norm tolerance (default 1e-9).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator, Sequence

import numpy as np

__all__ = [
    "GridMismatchError",
    "TimeGrid",
    "GridFunction",
    "HSeq",
    "inner_product",
    "norm_l2",
    "beta",
    "s_combine",
    "s_combine_seq",
    "wedge",
    "s_equivalent",
    "sum_squares",
]

#: default absolute tolerance for s-equivalence (max norm on sums of squares)
S_EQUIV_TOL = 1e-9


class GridMismatchError(ValueError):
    """Raised when an operation mixes functions on different grids."""


@dataclass(frozen=True)
class TimeGrid:
    """Uniform partition of [0, T] into N steps (N+1 nodes)."""

    T: float
    N: int

    def __post_init__(self) -> None:
        if not (self.T > 0 and math.isfinite(self.T)):
            raise ValueError(f"grid horizon must be finite and positive, got T={self.T}")
        if self.N < 2:
            raise ValueError(f"grid needs at least 2 steps, got N={self.N}")

    @property
    def dt(self) -> float:
        return self.T / self.N

    def times(self) -> np.ndarray:
        return np.arange(self.N + 1) * self.dt


def _require_same_grid(a: "TimeGrid", b: "TimeGrid") -> None:
    if a.T != b.T or a.N != b.N:
        raise GridMismatchError(f"grid mismatch: (T={a.T}, N={a.N}) vs (T={b.T}, N={b.N})")


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Real function known at the N+1 nodes of a TimeGrid."""

    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.N + 1,):
            raise ValueError(f"expected {self.grid.N + 1} node values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("node values must be finite")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def constant(cls, grid: TimeGrid, c: float) -> "GridFunction":
        return cls(grid, np.full(grid.N + 1, float(c)))

    @classmethod
    def from_callable(cls, grid: TimeGrid, fn: Callable[[np.ndarray], np.ndarray]) -> "GridFunction":
        return cls(grid, np.asarray(fn(grid.times()), dtype=float))

    @classmethod
    def zero(cls, grid: TimeGrid) -> "GridFunction":
        return cls(grid, np.zeros(grid.N + 1))

    def __mul__(self, other: "GridFunction | float") -> "GridFunction":
        if isinstance(other, GridFunction):
            _require_same_grid(self.grid, other.grid)
            return GridFunction(self.grid, self.values * other.values)
        return GridFunction(self.grid, self.values * float(other))

    __rmul__ = __mul__

    def __add__(self, other: "GridFunction") -> "GridFunction":
        _require_same_grid(self.grid, other.grid)
        return GridFunction(self.grid, self.values + other.values)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        _require_same_grid(self.grid, other.grid)
        return GridFunction(self.grid, self.values - other.values)

    def __neg__(self) -> "GridFunction":
        return GridFunction(self.grid, -self.values)

    def abs(self) -> "GridFunction":
        return GridFunction(self.grid, np.abs(self.values))

    def allclose(self, other: "GridFunction", tol: float = S_EQUIV_TOL) -> bool:
        _require_same_grid(self.grid, other.grid)
        return bool(np.max(np.abs(self.values - other.values)) <= tol)

    def is_zero(self, tol: float = 0.0) -> bool:
        return bool(np.max(np.abs(self.values)) <= tol)

    def to_csv(self, path: str | Path) -> None:
        """Write the sampled function as `t,value` rows, 17 significant digits."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "value"])
            for t, v in zip(self.grid.times(), self.values):
                w.writerow([format(t, ".17g"), format(v, ".17g")])

    @classmethod
    def from_csv(cls, path: str | Path) -> "GridFunction":
        """Read a `t,value` file; the grid is reconstructed and must be uniform from 0."""
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows or [c.strip() for c in rows[0]] != ["t", "value"]:
            raise ValueError(f"{path}: expected header 't,value'")
        body = [r for r in rows[1:] if r]
        if len(body) < 3:
            raise ValueError(f"{path}: need at least 3 nodes")
        t = np.array([float(r[0]) for r in body])
        v = np.array([float(r[1]) for r in body])
        N = len(t) - 1
        if abs(t[0]) > 1e-15:
            raise ValueError(f"{path}: grid must start at t=0, got {t[0]}")
        T = float(t[-1])
        grid = TimeGrid(T, N)
        if np.max(np.abs(t - grid.times())) > 1e-12 * max(T, 1.0):
            raise ValueError(f"{path}: nodes are not a uniform grid on [0, {T}]")
        return cls(grid, v)


@dataclass(frozen=True, eq=False)
class HSeq:
    """Finite (possibly empty) sequence of GridFunctions on one grid."""

    grid: TimeGrid
    items: tuple[GridFunction, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "items", tuple(self.items))
        for f in self.items:
            _require_same_grid(self.grid, f.grid)

    @classmethod
    def of(cls, *items: GridFunction) -> "HSeq":
        if not items:
            raise ValueError("HSeq.of needs at least one function; use HSeq(grid) for empty")
        return cls(items[0].grid, tuple(items))

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self) -> Iterator[GridFunction]:
        return iter(self.items)

    def __getitem__(self, i: int) -> GridFunction:
        return self.items[i]


def inner_product(f: GridFunction, g: GridFunction) -> float:
    """Trapezoid-rule L2 inner product on the shared grid."""
    _require_same_grid(f.grid, g.grid)
    p = f.values * g.values
    dt = f.grid.dt
    return float(dt * (p.sum() - 0.5 * (p[0] + p[-1])))


def norm_l2(f: GridFunction) -> float:
    return math.sqrt(max(inner_product(f, f), 0.0))


def beta(h: GridFunction, t: float) -> float:
    """Running quadratic variation budget: trapezoid integral of h^2 over [0, t].

    Between nodes the integrand h^2 is interpolated linearly (the same
    piecewise-linear model the trapezoid rule integrates exactly), so
    beta is additive under s_combine at every t, not just at nodes.
    """
    grid = h.grid
    if not (-1e-12 <= t <= grid.T * (1 + 1e-12)):
        raise ValueError(f"t={t} outside [0, {grid.T}]")
    t = min(max(t, 0.0), grid.T)
    u = h.values * h.values
    dt = grid.dt
    k = min(int(t / dt), grid.N - 1)
    # cumulative trapezoid up to node k
    head = float(0.5 * dt * (u[: k + 1][1:] + u[:k]).sum()) if k > 0 else 0.0
    rem = t - k * dt
    if rem <= 0.0:
        return head
    theta = rem / dt
    u_t = u[k] + (u[k + 1] - u[k]) * theta
    return head + 0.5 * rem * (u[k] + u_t)


def s_combine(h1: GridFunction, h2: GridFunction) -> GridFunction:
    """Nodewise nonnegative root of h1^2 + h2^2."""
    _require_same_grid(h1.grid, h2.grid)
    return GridFunction(h1.grid, np.hypot(h1.values, h2.values))


def sum_squares(H: HSeq) -> np.ndarray:
    """Nodewise sum of squares over the sequence, exact under permutation.

    math.fsum makes the per-node sum correctly rounded, so any reordering
    of H yields the identical array.
    """
    if len(H) == 0:
        return np.zeros(H.grid.N + 1)
    if len(H) == 1:
        return H[0].values * H[0].values
    sq = np.stack([f.values * f.values for f in H])
    return np.array([math.fsum(col) for col in sq.T])


def s_combine_seq(H: HSeq) -> GridFunction:
    """Nonnegative root of the nodewise sum of squares; s((h,)) = |h|."""
    return GridFunction(H.grid, np.sqrt(sum_squares(H)))


def wedge(H1: HSeq, H2: HSeq) -> HSeq:
    """Concatenation of the two sequences."""
    _require_same_grid(H1.grid, H2.grid)
    return HSeq(H1.grid, H1.items + H2.items)


def s_equivalent(H1: HSeq, H2: HSeq, tol: float = S_EQUIV_TOL) -> bool:
    """Whether the nodewise sums of squares agree within max-norm tol."""
    _require_same_grid(H1.grid, H2.grid)
    return bool(np.max(np.abs(sum_squares(H1) - sum_squares(H2))) <= tol)
