"""Two-stage double-sparse hard-thresholding operator.

Stage 1 zeroes entries with magnitude below ``lam`` (keep on equality).
Stage 2 keeps columns whose squared mass reaches ``s0 * lam**2`` and prunes
rows past the largest order-statistic index whose cross-column squared mass
reaches ``s * lam**2``.

``literal_oracle`` re-implements the same definitions with plain Python
loops and no vectorized shortcuts; it exists so tests can cross-check the
fast path, including tie handling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import GroupedMatrix, SparsityBudget, SupportSet

__all__ = [
    "ThresholdOutcome",
    "step1_entrywise",
    "step2_matrix",
    "apply",
    "apply_heterogeneous",
    "literal_oracle",
]


@dataclass(frozen=True)
class ThresholdOutcome:
    """Result of the matrix-condition stage.

    ``selected_columns`` is the column index set passing the column condition,
    ``row_cut`` the largest admissible order-statistic rank (0 when no row
    qualifies, the full depth d for the row-condition-free variant), and
    ``active_set`` the index pairs the output keeps.
    """

    result: GroupedMatrix
    selected_columns: frozenset
    row_cut: int
    active_set: SupportSet


def step1_entrywise(U: GroupedMatrix, lam: float) -> GroupedMatrix:
    """Entrywise hard thresholding: keep entries with |value| >= lam."""
    if lam <= 0:
        raise ValueError("lam must be positive")
    V = U.values
    return GroupedMatrix(np.where(np.abs(V) >= lam, V, 0.0))


def step2_matrix(U: GroupedMatrix, lam: float, s: int, s0: int) -> ThresholdOutcome:
    """Matrix-condition stage: column selection plus row-rank pruning.

    A column j is selected when sum_i U_ij^2 >= s0*lam^2. The row cut i_max is
    the largest rank i such that the i-th largest squared magnitudes, summed
    over all m columns, reach s*lam^2 (0 if none). An entry (i, j) stays
    active when its magnitude rank within column j, counted as
    #{k : |U_kj| >= |U_ij|} with ties included, is at most i_max.
    """
    if lam <= 0:
        raise ValueError("lam must be positive")
    d, m = U.rows, U.cols
    if not 1 <= s <= m:
        raise ValueError(f"s must lie in [1, m]={m}")
    if not 1 <= s0 <= d:
        raise ValueError(f"s0 must lie in [1, d]={d}")
    V = U.values
    A = np.abs(V)

    col_scores = np.sum(V * V, axis=0)
    selected = col_scores >= s0 * lam * lam

    # i-th non-increasing magnitude order statistic per column, squared,
    # summed across columns
    order = np.sort(A, axis=0)[::-1, :]
    row_scores = np.sum(order * order, axis=1)
    qualifying = np.nonzero(row_scores >= s * lam * lam)[0]
    i_max = int(qualifying[-1]) + 1 if qualifying.size else 0

    # rank[i, j] = #{k : |U_kj| >= |U_ij|}, ties counted
    rank = np.sum(A[:, None, :] >= A[None, :, :], axis=0)
    active = (rank <= i_max) & selected[None, :]

    result = GroupedMatrix(np.where(active, V, 0.0))
    rows, cols = np.nonzero(active)
    active_set = SupportSet(frozenset(zip(rows.tolist(), cols.tolist())))
    sel_cols = frozenset(np.nonzero(selected)[0].tolist())
    return ThresholdOutcome(result, sel_cols, i_max, active_set)


def apply(U: GroupedMatrix, lam: float, budget: SparsityBudget) -> ThresholdOutcome:
    """The composed operator: entrywise stage followed by the matrix stage."""
    if budget.mode != "hard":
        raise ValueError("the composed operator is defined for hard-mode budgets only")
    return step2_matrix(step1_entrywise(U, lam), lam, budget.s, budget.s0)


def apply_heterogeneous(
    U: GroupedMatrix, lam: float, budget: SparsityBudget
) -> ThresholdOutcome:
    """Row-condition-free variant: entrywise stage, then the column condition
    only. Every surviving entry in a selected column stays active; the row
    cut is reported as the full depth d."""
    if budget.mode != "heterogeneous":
        raise ValueError("expected a heterogeneous-mode budget")
    if lam <= 0:
        raise ValueError("lam must be positive")
    V1 = step1_entrywise(U, lam)
    V = V1.values
    col_scores = np.sum(V * V, axis=0)
    selected = col_scores >= budget.s0 * lam * lam
    keep = (V != 0.0) & selected[None, :]
    result = GroupedMatrix(np.where(selected[None, :], V, 0.0))
    rows, cols = np.nonzero(keep)
    active_set = SupportSet(frozenset(zip(rows.tolist(), cols.tolist())))
    sel_cols = frozenset(np.nonzero(selected)[0].tolist())
    return ThresholdOutcome(result, sel_cols, U.rows, active_set)


def literal_oracle(
    U: GroupedMatrix,
    lam: float,
    s: int,
    s0: int,
    row_condition: bool = True,
) -> GroupedMatrix:
    """Loop-for-loop transcription of the operator definitions, used as an
    independent test oracle. Deliberately unoptimized."""
    if lam <= 0:
        raise ValueError("lam must be positive")
    d, m = U.rows, U.cols

    # stage 1: entrywise
    W = [[0.0] * m for _ in range(d)]
    for i in range(d):
        for j in range(m):
            u = U.values[i, j]
            if abs(u) >= lam:
                W[i][j] = u

    # column condition
    J = []
    for j in range(m):
        total = 0.0
        for i in range(d):
            total += W[i][j] ** 2
        if total >= s0 * lam * lam:
            J.append(j)

    if row_condition:
        # row condition over order statistics of every column
        i_max = 0
        for i in range(1, d + 1):
            total = 0.0
            for j in range(m):
                column = sorted((abs(W[k][j]) for k in range(d)), reverse=True)
                total += column[i - 1] ** 2
            if total >= s * lam * lam:
                i_max = i
    else:
        i_max = d

    out = [[0.0] * m for _ in range(d)]
    for j in J:
        for i in range(d):
            rank = 0
            for k in range(d):
                if abs(W[k][j]) >= abs(W[i][j]):
                    rank += 1
            if rank <= i_max:
                out[i][j] = W[i][j]
    return GroupedMatrix(np.array(out))
