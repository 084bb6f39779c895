"""Domain types shared by all modules.

A parameter vector ``beta`` of length ``p = m * d`` is viewed interchangeably
as a ``d x m`` matrix ``theta`` whose column ``j`` is the ``j``-th contiguous
block of ``beta`` (column-major layout: entry ``(i, j)`` of the matrix is
component ``d*j + i`` of the vector, zero-based).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "GroupedMatrix",
    "SparsityBudget",
    "SupportSet",
    "NoiseModel",
    "vec_to_matrix",
    "matrix_to_vec",
    "support_of",
    "excess_support",
    "stream",
]


@dataclass(frozen=True)
class GroupedMatrix:
    """A dense d x m real matrix; column j holds group j of the paired vector."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float)
        if arr.ndim != 2:
            raise ValueError(f"expected a 2-d array, got ndim={arr.ndim}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"empty matrix shape {arr.shape}")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]

    @property
    def p(self) -> int:
        return self.values.size

    def frobenius_norm(self) -> float:
        return float(np.linalg.norm(self.values))


def vec_to_matrix(beta: np.ndarray, m: int, d: int) -> GroupedMatrix:
    """Reshape a length-``m*d`` vector into its d x m grouped matrix form."""
    beta = np.asarray(beta, dtype=float)
    if beta.ndim != 1:
        raise ValueError("beta must be a 1-d vector")
    if beta.size != m * d:
        raise ValueError(f"length {beta.size} does not match m*d = {m * d}")
    return GroupedMatrix(beta.reshape((d, m), order="F"))


def matrix_to_vec(theta: GroupedMatrix) -> np.ndarray:
    """Inverse of :func:`vec_to_matrix`; bit-exact round trip."""
    return theta.values.reshape(-1, order="F").copy()


@dataclass(frozen=True)
class SupportSet:
    """A set of (row, column) index pairs on a d x m grid (zero-based)."""

    entries: frozenset

    def __post_init__(self):
        object.__setattr__(self, "entries", frozenset(tuple(e) for e in self.entries))

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, pair) -> bool:
        return tuple(pair) in self.entries

    @property
    def columns(self) -> frozenset:
        return frozenset(j for _, j in self.entries)

    def column_counts(self) -> dict:
        counts: dict = {}
        for _, j in self.entries:
            counts[j] = counts.get(j, 0) + 1
        return counts

    def in_hard_class(self, s: int, s0: int) -> bool:
        """Membership in the class of supports with at most ``s`` occupied
        columns and at most ``s0`` entries in each column."""
        counts = self.column_counts()
        return len(counts) <= s and all(c <= s0 for c in counts.values())

    def in_heterogeneous_class(self, s: int, s_prime: int) -> bool:
        """At most ``s`` occupied columns and at most ``s_prime`` entries total."""
        return len(self.columns) <= s and len(self.entries) <= s_prime


def support_of(theta: GroupedMatrix) -> SupportSet:
    """Index pairs of the nonzero entries of ``theta``."""
    rows, cols = np.nonzero(theta.values)
    return SupportSet(frozenset(zip(rows.tolist(), cols.tolist())))


def excess_support(candidate: SupportSet, truth: SupportSet) -> SupportSet:
    """Set difference ``candidate - truth`` (entries of candidate outside truth)."""
    return SupportSet(candidate.entries - truth.entries)


@dataclass(frozen=True)
class SparsityBudget:
    """Group/within-group sparsity budget on a d x m grid.

    Modes:
      hard           -- at most ``s`` nonzero columns, at most ``s0`` nonzeros per column
      soft           -- at most ``s`` nonzero columns, per-column l_q mass at most ``rq``
      heterogeneous  -- at most ``s`` nonzero columns, at most ``s_prime`` nonzeros total
    """

    m: int
    d: int
    s: int
    mode: str
    s0: int | None = None
    q: float | None = None
    rq: float | None = None
    s_prime: int | None = None

    def __post_init__(self):
        if self.m < 1 or self.d < 1:
            raise ValueError("m and d must be positive")
        if not 1 <= self.s <= self.m:
            raise ValueError(f"s must lie in [1, m]={self.m}, got {self.s}")
        if self.mode == "hard":
            if self.s0 is None or not 1 <= self.s0 <= self.d:
                raise ValueError(f"s0 must lie in [1, d]={self.d}, got {self.s0}")
        elif self.mode == "soft":
            if self.q is None or not 0.0 < self.q <= 1.0:
                raise ValueError(f"q must lie in (0, 1], got {self.q}")
            if self.rq is None or self.rq <= 0:
                raise ValueError(f"rq must be positive, got {self.rq}")
        elif self.mode == "heterogeneous":
            if self.s_prime is None or not 1 <= self.s_prime <= self.s * self.d:
                raise ValueError(
                    f"s_prime must lie in [1, s*d]={self.s * self.d}, got {self.s_prime}"
                )
            if self.s0 is None:
                object.__setattr__(
                    self, "s0", min(self.d, math.ceil(self.s_prime / self.s))
                )
        else:
            raise ValueError(f"unknown mode {self.mode!r}")

    @classmethod
    def hard(cls, m: int, d: int, s: int, s0: int) -> "SparsityBudget":
        return cls(m=m, d=d, s=s, mode="hard", s0=s0)

    @classmethod
    def soft(cls, m: int, d: int, s: int, q: float, rq: float) -> "SparsityBudget":
        return cls(m=m, d=d, s=s, mode="soft", q=q, rq=rq)

    @classmethod
    def heterogeneous(
        cls, m: int, d: int, s: int, s_prime: int, s0: int | None = None
    ) -> "SparsityBudget":
        # s0 feeds the operator's column condition; defaults to ceil(s_prime/s).
        return cls(m=m, d=d, s=s, mode="heterogeneous", s_prime=s_prime, s0=s0)

    @property
    def p(self) -> int:
        return self.m * self.d

    def soft_regime_margin(self, n: int) -> float:
        """The ratio d / (rq * n^(q/2)); the soft-sparsity analysis assumes it
        is bounded below. Informational only."""
        if self.mode != "soft":
            raise ValueError("regime margin is defined for soft mode only")
        return self.d / (self.rq * n ** (self.q / 2.0))

    def check_soft_regime(self, n: int) -> float:
        """Evaluate the soft-mode regime margin and warn (not reject) when it
        drops below one."""
        margin = self.soft_regime_margin(n)
        if margin < 1.0:
            warnings.warn(
                f"soft-sparsity regime margin d/(rq*n^(q/2)) = {margin:.4g} < 1; "
                "the (n, d, rq) triple is outside the regime the rate formulas assume",
                stacklevel=2,
            )
        return margin

    def admits(self, theta: GroupedMatrix) -> bool:
        """Whether ``theta`` lies in this budget's parameter space."""
        if (theta.rows, theta.cols) != (self.d, self.m):
            return False
        supp = support_of(theta)
        if self.mode == "hard":
            return supp.in_hard_class(self.s, self.s0)
        if self.mode == "heterogeneous":
            return supp.in_heterogeneous_class(self.s, self.s_prime)
        # soft: column count plus per-column l_q mass
        if len(supp.columns) > self.s:
            return False
        mass = np.sum(np.abs(theta.values) ** self.q, axis=0)
        return bool(np.all(mass <= self.rq * (1 + 1e-12)))


@dataclass(frozen=True)
class NoiseModel:
    """Entrywise Gaussian noise with variance sigma^2 / n."""

    sigma: float
    n: int

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        if self.n < 1:
            raise ValueError("n must be a positive integer")

    @property
    def entry_std(self) -> float:
        return self.sigma / math.sqrt(self.n)


def stream(seed: int, *ids: int) -> np.random.Generator:
    """Deterministic generator for the stream identified by (seed, *ids).

    Distinct id tuples give statistically independent streams regardless of
    the order in which they are drawn.
    """
    return np.random.default_rng([int(seed), *[int(i) for i in ids]])
