"""Estimators: the iterative double-sparse hard-thresholding solver, its
heterogeneous variant, the exact double-sparse Euclidean projection, a
brute-force constrained least-squares oracle, and an ordinary top-k IHT
baseline."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from itertools import combinations, product

import numpy as np

from . import threshold
from .core import (
    GroupedMatrix,
    SparsityBudget,
    SupportSet,
    excess_support,
    matrix_to_vec,
    support_of,
    vec_to_matrix,
)

__all__ = [
    "ThresholdSchedule",
    "IterationTrace",
    "dsiht",
    "dsiht_heterogeneous",
    "default_lambda_inf",
    "default_lambda0",
    "project_double_sparse",
    "constrained_ls_bruteforce",
    "iht_baseline",
    "HARD_CONTRACTION_CONSTANT",
    "HETEROGENEOUS_CONTRACTION_CONSTANT",
]

# per-iteration error-bound constants of the two solver variants
HARD_CONTRACTION_CONSTANT = 2.0 + math.sqrt(3.0)
HETEROGENEOUS_CONTRACTION_CONSTANT = 2.0 + math.sqrt(2.0)


@dataclass(frozen=True)
class ThresholdSchedule:
    """Geometric threshold decay: lambda_{t+1} = sqrt(kappa) * lambda_t,
    iterating while lambda_t >= lambda_inf."""

    lambda0: float
    kappa: float
    lambda_inf: float

    def __post_init__(self):
        if self.lambda0 <= 0:
            raise ValueError("lambda0 must be positive")
        if not 0.0 < self.kappa < 1.0:
            raise ValueError("kappa must lie in (0, 1)")
        if self.lambda_inf <= 0:
            raise ValueError("lambda_inf must be positive")

    def value_at(self, t: int) -> float:
        return self.lambda0 * self.kappa ** (t / 2.0)


@dataclass
class IterationTrace:
    """Per-iteration diagnostics; index t runs over beta_0 .. beta_T."""

    lambdas: list = field(default_factory=list)
    betas: list = field(default_factory=list)
    errors: list | None = None
    excess_sizes: list | None = None
    excess_admissible: list | None = None
    bound_held: list | None = None
    bound_constant: float = HARD_CONTRACTION_CONSTANT
    empty_schedule: bool = False

    @property
    def iterations(self) -> int:
        return len(self.betas) - 1


def default_lambda_inf(
    sigma: float, n: int, p: int, d: int, s: int, s0: int
) -> float:
    """Terminal threshold level

        sqrt(40 * sigma^2 * ((1/s0) * ln(e*p/s) + ln(e*d/s0)) / n)

    at which the solver's decaying schedule stops."""
    if n < 1 or p < 1 or d < 1 or s < 1 or s0 < 1:
        raise ValueError("n, p, d, s, s0 must be positive")
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    inner = math.log(math.e * p / s) / s0 + math.log(math.e * d / s0)
    return math.sqrt(40.0 * sigma * sigma * inner / n)


def default_lambda0(X: np.ndarray, Y: np.ndarray, s: int, s0: int) -> float:
    """Data-driven starting threshold ||X^T Y / n||_2 / sqrt(s*s0); with a
    zero start it upper-bounds the signal scale the error analysis needs."""
    n = X.shape[0]
    return float(np.linalg.norm(X.T @ Y / n) / math.sqrt(s * s0))


def _validate_design(X: np.ndarray, Y: np.ndarray, p: int) -> int:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != p:
        raise ValueError(f"X must be n x p with p={p}, got shape {X.shape}")
    n = X.shape[0]
    if Y.shape != (n,):
        raise ValueError(f"Y must have shape ({n},), got {Y.shape}")
    norms = np.linalg.norm(X, axis=0)
    if not np.allclose(norms, math.sqrt(n), rtol=1e-8, atol=0.0):
        worst = float(np.max(np.abs(norms - math.sqrt(n))))
        raise ValueError(
            f"columns of X must have norm sqrt(n); worst deviation {worst:.3e}"
        )
    return n


def _iterate(X, Y, budget, schedule, beta0, truth, operator, bound_constant):
    p = budget.p
    n = _validate_design(X, Y, p)
    if beta0 is None:
        beta0 = np.zeros(p)
    beta0 = np.asarray(beta0, dtype=float)
    if beta0.shape != (p,):
        raise ValueError(f"beta0 must have shape ({p},)")

    truth_supp = None
    if truth is not None:
        truth = np.asarray(truth, dtype=float)
        truth_supp = support_of(vec_to_matrix(truth, budget.m, budget.d))

    trace = IterationTrace(bound_constant=bound_constant)
    if truth is not None:
        trace.errors = []
        trace.excess_sizes = []
        trace.excess_admissible = []
        trace.bound_held = []

    def record(beta, lam):
        trace.lambdas.append(lam)
        trace.betas.append(beta.copy())
        if truth is None:
            return
        err = float(np.linalg.norm(beta - truth))
        trace.errors.append(err)
        excess = excess_support(
            support_of(vec_to_matrix(beta, budget.m, budget.d)), truth_supp
        )
        trace.excess_sizes.append(len(excess))
        if budget.mode == "heterogeneous":
            admissible = excess.in_heterogeneous_class(budget.s, budget.s_prime)
        else:
            admissible = excess.in_hard_class(budget.s, budget.s0)
        trace.excess_admissible.append(admissible)
        bound = bound_constant * math.sqrt(budget.s * budget.s0) * lam
        trace.bound_held.append(err <= bound)

    lam = schedule.lambda0
    beta = beta0
    record(beta, lam)

    if lam < schedule.lambda_inf:
        trace.empty_schedule = True
        warnings.warn(
            "lambda_inf exceeds lambda0; the schedule is empty and the "
            "starting point is returned unchanged",
            stacklevel=3,
        )
        return beta0.copy(), trace

    sqrt_kappa = math.sqrt(schedule.kappa)
    while lam >= schedule.lambda_inf:
        grad_step = beta + X.T @ (Y - X @ beta) / n
        if not np.all(np.isfinite(grad_step)):
            raise FloatingPointError("non-finite values in the solver iterate")
        U = vec_to_matrix(grad_step, budget.m, budget.d)
        outcome = operator(U, lam, budget)
        beta = matrix_to_vec(outcome.result)
        lam = lam * sqrt_kappa
        record(beta, lam)

    # the schedule's output line: the last iterate computed before lambda
    # fell below lambda_inf is betas[-1]; the returned estimate is the one
    # before it
    beta_hat = trace.betas[-2] if len(trace.betas) >= 2 else trace.betas[-1]
    return beta_hat.copy(), trace


def dsiht(
    X: np.ndarray,
    Y: np.ndarray,
    budget: SparsityBudget,
    schedule: ThresholdSchedule,
    beta0: np.ndarray | None = None,
    truth: np.ndarray | None = None,
):
    """Iterative double-sparse hard thresholding.

    Iterates beta <- T_lam(beta + X^T (Y - X beta) / n) with the two-stage
    operator while the geometrically decaying lam stays at or above
    lambda_inf; returns the second-to-last iterate together with the trace.
    Columns of X must be normalized to norm sqrt(n).
    """
    if budget.mode != "hard":
        raise ValueError("dsiht expects a hard-mode budget")
    return _iterate(
        X, Y, budget, schedule, beta0, truth,
        threshold.apply, HARD_CONTRACTION_CONSTANT,
    )


def dsiht_heterogeneous(
    X: np.ndarray,
    Y: np.ndarray,
    budget: SparsityBudget,
    schedule: ThresholdSchedule,
    beta0: np.ndarray | None = None,
    truth: np.ndarray | None = None,
):
    """Same loop as :func:`dsiht` with the row-condition-free operator and the
    smaller per-iteration bound constant."""
    if budget.mode != "heterogeneous":
        raise ValueError("dsiht_heterogeneous expects a heterogeneous-mode budget")
    return _iterate(
        X, Y, budget, schedule, beta0, truth,
        threshold.apply_heterogeneous, HETEROGENEOUS_CONTRACTION_CONSTANT,
    )


def project_double_sparse(Y: GroupedMatrix, s: int, s0: int) -> GroupedMatrix:
    """Euclidean projection onto the set of matrices with at most ``s``
    nonzero columns and at most ``s0`` nonzeros per column.

    Per column keep the s0 largest-magnitude entries (ties to the lower row
    index), rank columns by truncated squared mass, keep the s best (ties to
    the lower column index)."""
    d, m = Y.rows, Y.cols
    if not 1 <= s <= m:
        raise ValueError(f"s must lie in [1, m]={m}")
    if not 1 <= s0 <= d:
        raise ValueError(f"s0 must lie in [1, d]={d}")
    V = Y.values
    A = np.abs(V)

    # stable argsort of -|.| puts lower row indices first among ties
    order = np.argsort(-A, axis=0, kind="stable")
    keep_rows = order[:s0, :]
    truncated = np.zeros_like(V)
    cols = np.arange(m)[None, :]
    truncated[keep_rows, cols] = V[keep_rows, cols]

    col_scores = np.sum(truncated * truncated, axis=0)
    keep_cols = np.argsort(-col_scores, kind="stable")[:s]
    out = np.zeros_like(V)
    out[:, keep_cols] = truncated[:, keep_cols]
    return GroupedMatrix(out)


_BRUTEFORCE_GUARD = 10**6


def constrained_ls_bruteforce(
    Y: GroupedMatrix, budget: SparsityBudget
) -> GroupedMatrix:
    """Global constrained least squares by support enumeration (test oracle).

    Minimizes the squared Frobenius distance to ``Y`` over the budget's
    parameter space. Guarded: raises when the candidate count exceeds 10^6.
    """
    d, m = Y.rows, Y.cols
    if (budget.d, budget.m) != (d, m):
        raise ValueError("budget grid does not match the matrix shape")
    V = Y.values
    sq = V * V

    if budget.mode == "hard":
        s, s0 = min(budget.s, m), min(budget.s0, d)
        n_candidates = math.comb(m, s) * math.comb(d, s0) ** s
        if n_candidates > _BRUTEFORCE_GUARD:
            raise ValueError(
                f"instance too large to enumerate: {n_candidates} support candidates"
            )
        row_subsets = list(combinations(range(d), s0))
        # captured energy of every (column, row-subset) pair
        energy = {
            (j, r): float(sum(sq[i, j] for i in r))
            for j in range(m)
            for r in row_subsets
        }
        best_gain = -1.0
        best = None
        for cols in combinations(range(m), s):
            for rows_choice in product(row_subsets, repeat=s):
                gain = sum(energy[(j, r)] for j, r in zip(cols, rows_choice))
                if gain > best_gain:
                    best_gain = gain
                    best = (cols, rows_choice)
        out = np.zeros_like(V)
        for j, r in zip(best[0], best[1]):
            for i in r:
                out[i, j] = V[i, j]
        return GroupedMatrix(out)

    if budget.mode == "heterogeneous":
        s, sp = min(budget.s, m), budget.s_prime
        n_candidates = math.comb(m, s)
        if n_candidates * s * d > _BRUTEFORCE_GUARD:
            raise ValueError(
                f"instance too large to enumerate: {n_candidates} column sets"
            )
        best_gain = -1.0
        best = None
        for cols in combinations(range(m), s):
            # for a fixed column set, the best support of size <= s_prime is
            # exactly the s_prime largest squared entries inside those columns
            vals = sorted(
                ((sq[i, j], i, j) for j in cols for i in range(d)), reverse=True
            )[:sp]
            gain = sum(v for v, _, _ in vals)
            if gain > best_gain:
                best_gain = gain
                best = vals
        out = np.zeros_like(V)
        for _, i, j in best:
            out[i, j] = V[i, j]
        return GroupedMatrix(out)

    raise ValueError("brute-force enumeration covers hard and heterogeneous modes")


def iht_baseline(X: np.ndarray, Y: np.ndarray, k: int, steps: int) -> np.ndarray:
    """Classical iterative hard thresholding: gradient step scaled by 1/n,
    then keep the k largest-magnitude components (ties to the lower index)."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    n, p = X.shape
    if not 1 <= k <= p:
        raise ValueError(f"k must lie in [1, p]={p}")
    beta = np.zeros(p)
    for _ in range(steps):
        beta = beta + X.T @ (Y - X @ beta) / n
        if k < p:
            order = np.argsort(-np.abs(beta), kind="stable")
            drop = order[k:]
            beta[drop] = 0.0
    return beta
