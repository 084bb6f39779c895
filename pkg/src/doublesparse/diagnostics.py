"""Design-matrix and noise diagnostics: restricted-isometry constants over
double-sparse supports, doubled-budget sparse eigenvalue constants, and the
support-restricted correlated-noise statistic with its probability bound."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from itertools import combinations, product

import numpy as np

from .core import stream

__all__ = [
    "DsripReport",
    "dsrip",
    "sparse_eigen_constants",
    "noise_event_stat",
    "noise_event_bound",
    "rec_slack",
    "NOISE_EVENT_CONSTANT",
]

# proof-artifact constant in the noise-event probability bound; exposed,
# not tuned
NOISE_EVENT_CONSTANT = 10.0

_EXHAUSTIVE_GUARD = 10**5
_DEGENERATE_TOL = 1e-12


@dataclass(frozen=True)
class DsripReport:
    """Extreme support-restricted eigenvalues of X^T X and their gap.

    ``delta_s = 1 - l_s / u_s``. Monte-Carlo reports maximize/minimize over a
    sampled subset of supports only, so their delta underestimates the truth;
    ``is_lower_bound_on_delta`` flags that.
    """

    u_s: float
    l_s: float
    delta_s: float
    method: str
    trials: int | None = None
    is_lower_bound_on_delta: bool = False
    degenerate_supports: int = 0

    def to_json(self) -> str:
        return json.dumps(asdict(self))


def _support_column_indices(cols, rows_choice, d):
    # p-index of entry (i, j) is d*j + i
    return [d * j + i for j, rows in zip(cols, rows_choice) for i in rows]


def _iter_supports(m, d, s, s0):
    for cols in combinations(range(m), s):
        for rows_choice in product(combinations(range(d), s0), repeat=s):
            yield cols, rows_choice


def _support_count(m, d, s, s0) -> int:
    return math.comb(m, s) * math.comb(d, s0) ** s


def _sample_support(rng, m, d, s, s0):
    cols = tuple(sorted(rng.choice(m, size=s, replace=False).tolist()))
    rows_choice = tuple(
        tuple(sorted(rng.choice(d, size=s0, replace=False).tolist())) for _ in cols
    )
    return cols, rows_choice


def _extreme_eigs(X, supports, d):
    u_s = -math.inf
    l_s = math.inf
    degenerate = 0
    for cols, rows_choice in supports:
        idx = _support_column_indices(cols, rows_choice, d)
        Xs = X[:, idx]
        eigs = np.linalg.eigvalsh(Xs.T @ Xs)
        top = float(eigs[-1])
        bottom = max(float(eigs[0]), 0.0)
        if top < _DEGENERATE_TOL:
            degenerate += 1
        u_s = max(u_s, top)
        l_s = min(l_s, bottom)
    return u_s, l_s, degenerate


def dsrip(
    X: np.ndarray,
    m: int,
    d: int,
    s: int,
    s0: int,
    method: str = "exhaustive",
    trials: int | None = None,
    seed: int = 0,
) -> DsripReport:
    """Restricted-isometry report over supports with exactly ``s`` occupied
    columns and exactly ``s0`` entries per occupied column.

    Enumerating only maximal supports is exact for both extremes: eigenvalue
    interlacing makes the minimum eigenvalue nonincreasing and the maximum
    nondecreasing as a support grows, so both are attained on maximal
    supports. ``monte_carlo`` samples supports uniformly instead.
    """
    X = np.asarray(X, dtype=float)
    if X.shape[1] != m * d:
        raise ValueError(f"X has {X.shape[1]} columns, expected m*d = {m * d}")
    if method == "exhaustive":
        count = _support_count(m, d, s, s0)
        if count > _EXHAUSTIVE_GUARD:
            raise ValueError(
                f"instance too large for exhaustive enumeration: {count} supports"
            )
        u_s, l_s, degenerate = _extreme_eigs(X, _iter_supports(m, d, s, s0), d)
        flagged = False
        trials_out = None
    elif method == "monte_carlo":
        if not trials or trials < 1:
            raise ValueError("monte_carlo requires a positive trial count")
        rng = stream(seed)
        supports = (_sample_support(rng, m, d, s, s0) for _ in range(trials))
        u_s, l_s, degenerate = _extreme_eigs(X, supports, d)
        flagged = True
        trials_out = trials
    else:
        raise ValueError(f"unknown method {method!r}")

    delta = 1.0 - l_s / u_s if u_s > _DEGENERATE_TOL else 1.0
    delta = min(max(delta, 0.0), 1.0)
    return DsripReport(
        u_s=u_s,
        l_s=l_s,
        delta_s=delta,
        method=method,
        trials=trials_out,
        is_lower_bound_on_delta=flagged,
        degenerate_supports=degenerate,
    )


def sparse_eigen_constants(
    X: np.ndarray,
    m: int,
    d: int,
    s2: int,
    s02: int,
    method: str = "exhaustive",
    trials: int | None = None,
    seed: int = 0,
):
    """Extreme singular values of support-restricted submatrices, scaled by
    1/sqrt(n), over the (doubled) budget class: pass s2 = 2s, s02 = 2s0."""
    n = X.shape[0]
    report = dsrip(X, m, d, s2, s02, method=method, trials=trials, seed=seed)
    tau_u = math.sqrt(report.u_s / n)
    tau_l = math.sqrt(max(report.l_s, 0.0) / n)
    return tau_u, tau_l


def noise_event_stat(
    X: np.ndarray, xi: np.ndarray, m: int, d: int, s: int, s0: int
) -> float:
    """max over admissible supports of the squared correlated-noise mass.

    With Xi the d x m reshape of X^T xi / n, the maximum over supports with at
    most s columns and at most s0 entries per column has the closed form: per
    column, sum of the s0 largest squared entries; then the sum of the s
    largest column scores.
    """
    X = np.asarray(X, dtype=float)
    xi = np.asarray(xi, dtype=float)
    n = X.shape[0]
    if X.shape[1] != m * d:
        raise ValueError(f"X has {X.shape[1]} columns, expected m*d = {m * d}")
    xi_corr = (X.T @ xi / n).reshape((d, m), order="F")
    sq = xi_corr * xi_corr
    top_rows = np.sort(sq, axis=0)[::-1, :][:s0, :]
    col_scores = np.sum(top_rows, axis=0)
    return float(np.sum(np.sort(col_scores)[::-1][:s]))


def noise_event_bound(sigma: float, n: int, p: int, d: int, s: int, s0: int) -> float:
    """High-probability envelope 10 * sigma^2 * s * (ln(e*p/s) + s0*ln(e*d/s0)) / n
    for the statistic of :func:`noise_event_stat`."""
    return (
        NOISE_EVENT_CONSTANT
        * sigma
        * sigma
        * s
        * (math.log(math.e * p / s) + s0 * math.log(math.e * d / s0))
        / n
    )


def rec_slack(rq: float, n: int, s: int, d: int, q: float) -> float:
    """Restricted-eigenvalue slack term s * rq * (ln(d)/n)^(1 - q/2)."""
    if not 0.0 < q <= 1.0:
        raise ValueError(f"q must lie in (0, 1], got {q}")
    return s * rq * (math.log(d) / n) ** (1.0 - q / 2.0)
