"""Monotone-regression maximum likelihood via the cusum diagram.

The fitted curve at the i-th order statistic is the left-hand slope of
the greatest convex minorant of the cumulative-sum diagram at the
cumulative sample fraction i/n; between order statistics it is extended
as a right-continuous step function that is 0 left of the data and
constant at and beyond the largest point.  A weighted pool-adjacent-
violators pass provides an independent oracle for the same fit, and the
argmin of the cusum polygon minus a linear ramp provides the estimator's
generalized inverse.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .model import Sample

__all__ = [
    "CusumDiagram",
    "ConvexMinorant",
    "StepEstimate",
    "cusum_diagram",
    "greatest_convex_minorant",
    "lower_hull_indices",
    "left_derivative",
    "npmle_fit",
    "npmle_values",
    "pava_fit",
    "inverse_process",
    "switch_check",
    "switch_check_weak",
    "log_likelihood",
    "empirical_cdf_at",
]


@dataclass(frozen=True)
class CusumDiagram:
    """Cumulative label sums against cumulative weight fractions.

    ``ts[0] = 0 < ts[1] < ... < ts[K] = 1``; for a genuine cusum ``vs[i]``
    is 1/n times the number of ones among the first i blocks (``vs[0] = 0``,
    nondecreasing).  General polygon ordinates are accepted so minorants of
    synthetic diagrams can be studied with the same machinery.
    """

    ts: np.ndarray
    vs: np.ndarray

    def __post_init__(self) -> None:
        ts = np.asarray(self.ts, dtype=float)
        vs = np.asarray(self.vs, dtype=float)
        object.__setattr__(self, "ts", ts)
        object.__setattr__(self, "vs", vs)
        if ts.size < 2 or ts[0] != 0.0 or abs(ts[-1] - 1.0) > 1e-12:
            raise ValueError("diagram abscissae must run from 0 to 1")
        if not np.all(np.diff(ts) > 0):
            raise ValueError("diagram abscissae must be strictly increasing")
        if ts.shape != vs.shape or not np.all(np.isfinite(vs)):
            raise ValueError("diagram ordinates must be finite, one per abscissa")


@dataclass(frozen=True)
class ConvexMinorant:
    """Lower convex hull of a diagram: vertices plus segment slopes."""

    hull_ts: np.ndarray
    hull_vs: np.ndarray
    slopes: np.ndarray  # slope of segment (hull_ts[j-1], hull_ts[j]]


@dataclass(frozen=True)
class StepEstimate:
    """Right-continuous nondecreasing step function into [0, 1].

    Zero left of the first jump; after the last jump it stays at the last
    value.  ``n`` records the sample size behind the fit (0 for synthetic
    steps).
    """

    jump_xs: np.ndarray
    values: np.ndarray
    n: int = 0

    def __post_init__(self) -> None:
        jx = np.asarray(self.jump_xs, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "jump_xs", jx)
        object.__setattr__(self, "values", vals)
        if jx.shape != vals.shape:
            raise ValueError("jump locations and values must have equal length")
        if jx.size > 1 and not np.all(np.diff(jx) > 0):
            raise ValueError("jump locations must be strictly increasing")
        if vals.size and (np.any(np.diff(vals) < 0) or vals[0] < 0 or vals[-1] > 1):
            raise ValueError("values must be nondecreasing within [0, 1]")

    def __call__(self, x):
        scalar = np.isscalar(x)
        idx = np.searchsorted(self.jump_xs, np.asarray(x, dtype=float), side="right") - 1
        padded = np.concatenate(([0.0], self.values))
        out = padded[idx + 1]
        return float(out) if scalar else out

    @property
    def breakpoints(self) -> np.ndarray:
        return self.jump_xs

    @classmethod
    def from_fitted(cls, xs: np.ndarray, fitted: np.ndarray, n: int) -> "StepEstimate":
        """Compress per-point fitted values to jump locations (value changes)."""
        fitted = np.asarray(fitted, dtype=float)
        prev = np.concatenate(([0.0], fitted[:-1]))
        keep = fitted != prev
        return cls(np.asarray(xs, dtype=float)[keep], fitted[keep], n)


def cusum_diagram(s: Sample) -> CusumDiagram:
    """Diagram of cumulative ones over cumulative weight fractions."""
    n = s.n
    ts = np.concatenate(([0.0], np.cumsum(s.weights) / n))
    vs = np.concatenate(([0.0], np.cumsum(s.ones) / n))
    return CusumDiagram(ts, vs)


def lower_hull_indices(ts, vs) -> np.ndarray:
    """Indices of the lower convex hull of points sorted by abscissa.

    Single monotone-stack pass; collinear middle points are dropped so
    segment slopes come out strictly increasing.  Cross products are
    evaluated on the raw floats with no epsilon.
    """
    ts = list(map(float, ts))
    vs = list(map(float, vs))
    idx: list[int] = []
    for i in range(len(ts)):
        ti = ts[i]
        vi = vs[i]
        while len(idx) >= 2:
            a = idx[-2]
            b = idx[-1]
            if (ts[b] - ts[a]) * (vi - vs[a]) - (ti - ts[a]) * (vs[b] - vs[a]) <= 0.0:
                idx.pop()
            else:
                break
        idx.append(i)
    return np.asarray(idx, dtype=np.int64)


def greatest_convex_minorant(d: CusumDiagram) -> ConvexMinorant:
    """Greatest convex function below the diagram (its lower convex hull)."""
    keep = lower_hull_indices(d.ts, d.vs)
    hts = d.ts[keep]
    hvs = d.vs[keep]
    slopes = np.diff(hvs) / np.diff(hts)
    return ConvexMinorant(hts, hvs, slopes)


def left_derivative(m: ConvexMinorant, t: float) -> float:
    """Left-hand slope of the minorant at ``t`` in (0, 1]."""
    if t <= 0.0:
        raise ValueError("left derivative requires t > 0")
    j = int(np.searchsorted(m.hull_ts, t, side="left"))
    j = min(j, len(m.hull_ts) - 1)
    return float(m.slopes[j - 1])


def npmle_values(s: Sample) -> np.ndarray:
    """Maximum-likelihood fitted values at the sample points.

    The hull runs in integer cumulative coordinates (counts rather than
    fractions), which leaves every cross product exact and every segment
    slope a correctly rounded ratio of counts, so the fitted values are
    nondecreasing and within [0, 1] with no epsilon games.
    """
    cw = np.concatenate(([0], np.cumsum(s.weights)))
    co = np.concatenate(([0], np.cumsum(s.ones)))
    keep = lower_hull_indices(cw, co)
    slopes = np.diff(co[keep]) / np.diff(cw[keep])
    j = np.searchsorted(cw[keep], cw[1:], side="left")
    return slopes[j - 1]


def npmle_fit(s: Sample) -> StepEstimate:
    """Maximum-likelihood step estimate over all monotone curves into [0, 1]."""
    return StepEstimate.from_fitted(s.xs, npmle_values(s), s.n)


def _pava(means: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Weighted pool-adjacent-violators; returns the isotonic fit."""
    vals: list[float] = []
    wts: list[float] = []
    counts: list[int] = []
    for m, w in zip(means, weights):
        vals.append(float(m))
        wts.append(float(w))
        counts.append(1)
        while len(vals) >= 2 and vals[-2] >= vals[-1]:
            v = (vals[-2] * wts[-2] + vals[-1] * wts[-1]) / (wts[-2] + wts[-1])
            wts[-2] += wts[-1]
            counts[-2] += counts[-1]
            vals[-2] = v
            vals.pop()
            wts.pop()
            counts.pop()
    return np.repeat(vals, counts)


def pava_fit(s: Sample) -> StepEstimate:
    """Pooling oracle: isotonic regression of block label means.

    Agrees with :func:`npmle_fit` at every sample point; kept as a fully
    independent computation path.
    """
    fitted = _pava(s.ones / s.weights, s.weights.astype(float))
    return StepEstimate.from_fitted(s.xs, fitted, s.n)


def inverse_process(s: Sample, a: float) -> tuple[float, float]:
    """Largest minimizer of the cusum polygon minus the ramp ``a * t``.

    Returns ``(grid_t, x_value)`` where ``grid_t`` is the largest diagram
    abscissa minimizing ``polygon(t) - a t`` (polygon minima sit at
    vertices) and ``x_value`` is the empirical quantile of ``grid_t``
    (``-inf`` when ``grid_t`` is 0).

    Minimization runs on floats; vertices within rounding distance of the
    float minimum are re-ranked in exact rational arithmetic, so exact
    ties (e.g. ``a`` equal to a block mean) break to the largest abscissa
    as the supremum-of-minimizers convention demands.
    """
    i = _inverse_index(s, a)
    cw = np.concatenate(([0], np.cumsum(s.weights)))
    grid_t = float(cw[i] / s.n)
    x_value = float(s.xs[i - 1]) if i > 0 else -np.inf
    return grid_t, x_value


def _inverse_index(s: Sample, a: float) -> int:
    """Index of the largest exact minimizer of ``cusum - a * ramp``."""
    if not 0.0 <= a <= 1.0:
        raise ValueError("level a must lie in [0, 1]")
    cw = np.concatenate(([0], np.cumsum(s.weights)))
    co = np.concatenate(([0], np.cumsum(s.ones)))
    crit = (co - a * cw) / s.n
    near = np.flatnonzero(crit <= crit.min() + 1e-12)
    if near.size == 1:
        return int(near[0])
    frac = Fraction(a)
    keys = [Fraction(int(co[j])) - frac * int(cw[j]) for j in near]
    best = min(keys)
    return int(near[max(k for k, key in enumerate(keys) if key == best)])


def empirical_cdf_at(s: Sample, x: float) -> float:
    """Weighted empirical distribution function of the features at ``x``."""
    k = int(np.searchsorted(s.xs, x, side="right"))
    return float(np.cumsum(s.weights)[k - 1] / s.n) if k > 0 else 0.0


def _fitted_value_exact(s: Sample, x: float) -> Fraction:
    """Fitted value at ``x`` as an exact ratio of label and weight counts."""
    k = int(np.searchsorted(s.xs, x, side="right"))
    if k == 0:
        return Fraction(0)
    cw = np.concatenate(([0], np.cumsum(s.weights)))
    co = np.concatenate(([0], np.cumsum(s.ones)))
    keep = lower_hull_indices(cw, co)
    j = int(np.searchsorted(cw[keep], cw[k], side="left"))
    j = min(max(j, 1), keep.size - 1)
    a, b = int(keep[j - 1]), int(keep[j])
    return Fraction(int(co[b] - co[a]), int(cw[b] - cw[a]))


def switch_check(s: Sample, x: float, a: float) -> dict:
    """Strict switch relation: fitted value above ``a`` iff inverse left of x.

    ``lhs`` is ``fit(x) > a``; ``rhs`` is ``inverse(a) < F_n(x)`` with the
    inverse taken as the largest minimizer.  Both sides are evaluated in
    exact rational arithmetic, so the equivalence holds for every ``x``
    within the sample range and every ``a`` in [0, 1], ties included.
    """
    lhs = _fitted_value_exact(s, x) > Fraction(a)
    k = int(np.searchsorted(s.xs, x, side="right"))
    rhs = _inverse_index(s, a) < k
    return {"lhs": bool(lhs), "rhs": bool(rhs)}


def switch_check_weak(s: Sample, x: float, a: float) -> dict:
    """Non-strict variant, exposed under an explicit tie convention.

    With the largest-minimizer inverse, the textbook equivalence
    ``fit(x) >= a  iff  inverse(a) <= F_n(x)`` fails on half-open
    minimizer sets, so the right-hand side here is taken as
    ``inverse(a) < F_n(x)``, or equality of the two with the fitted value
    still reaching ``a`` at ``x``.  This is a documented convention, not a
    contract; :func:`switch_check` is the tested form.
    """
    fit_x = _fitted_value_exact(s, x)
    lhs = fit_x >= Fraction(a)
    k = int(np.searchsorted(s.xs, x, side="right"))
    i = _inverse_index(s, a)
    rhs = i < k or (i == k and fit_x >= Fraction(a))
    return {"lhs": bool(lhs), "rhs": bool(rhs)}


def log_likelihood(f, s: Sample) -> float:
    """Bernoulli log-likelihood of a curve on a sample.

    ``f`` may be any callable into [0, 1] (a step estimate included).
    Blocks contribute ``ones * log p + (weight - ones) * log(1 - p)`` with
    the convention ``0 * log 0 = 0``; a positive count against probability
    zero yields ``-inf``.
    """
    p = np.asarray(f(s.xs), dtype=float)
    ones = s.ones.astype(float)
    zeros = (s.weights - s.ones).astype(float)
    with np.errstate(divide="ignore", invalid="ignore"):
        term1 = np.where(ones > 0, ones * np.log(p), 0.0)
        term0 = np.where(zeros > 0, zeros * np.log1p(-p), 0.0)
    total = term1.sum() + term0.sum()
    return float(total) if np.isfinite(total) else -np.inf
