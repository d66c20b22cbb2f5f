"""Model layer: link functions, feature distributions, sampling, hypotheses.

A regression scenario is a base link ``phi0`` (monotone, into [0,1]),
a feature distribution on a compact interval ``[-T, T]``, and an impact
schedule ``delta(n) = c * n**-gamma``.  Labels are Bernoulli draws with
success probability ``phi0(delta(n) * x)``, so the feature-label curve
flattens as ``n`` grows whenever ``gamma > 0``.

The module also builds the two-point and hypercube hypothesis families
used by the minimax lower-bound audits, together with a slope-band
membership checker (Lipschitz constant at most ``delta``, modulus of
continuity ratio at least ``delta / 2``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import erf

from .streams import stream

__all__ = [
    "LinkSpec",
    "FeatureLaw",
    "Scenario",
    "Sample",
    "PiecewiseAffine",
    "HypothesisPair",
    "HypothesisCube",
    "link_eval",
    "link_derivative",
    "link_inverse",
    "feature_eval",
    "phi_n",
    "sample_dataset",
    "draw_sample",
    "sample_to_csv_text",
    "sample_from_csv_text",
    "build_pointwise_hypotheses",
    "build_assouad_cube",
    "in_slope_band",
    "slope_band_report",
    "default_fast_pair_constant",
    "default_slow_pair_constant",
    "default_cube_constant",
]

_LINK_KINDS = ("logistic", "probit", "affine", "beta_flat", "constant")
_LAW_KINDS = ("uniform", "polynomial")

# Series-based derivative machinery is exact but factorially expensive;
# orders above this are refused rather than silently degraded.
_MAX_DERIVATIVE_ORDER = 12


# ---------------------------------------------------------------------------
# links


@dataclass(frozen=True)
class LinkSpec:
    """A base link: monotone map from the reals into [0, 1].

    kind
        One of ``logistic`` (1/(1+exp(-u))), ``probit`` (normal CDF with
        scale parameter), ``affine`` (clamped line, for hypothesis work),
        ``beta_flat`` (logistic of ``u**beta`` with odd ``beta``, flat to
        order ``beta - 1`` at zero) or ``constant`` (degenerate test link).
    beta
        Order of the first non-vanishing derivative at zero.  1 for all
        families except ``beta_flat``.
    params
        Family-specific parameters: probit ``(scale,)``, affine
        ``(intercept, slope)``, constant ``(level,)``.
    """

    kind: str
    beta: int = 1
    params: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in _LINK_KINDS:
            raise ValueError(f"unknown link kind {self.kind!r}")
        if self.beta < 1:
            raise ValueError("flatness order beta must be a positive integer")
        if self.kind == "beta_flat":
            if self.beta % 2 == 0:
                raise ValueError(
                    "beta_flat links require odd beta; even powers are not monotone"
                )
        elif self.kind == "logistic" and self.beta != 1:
            raise ValueError("logistic link has beta = 1")
        elif self.kind == "probit":
            scale = self.params[0] if self.params else 1.0
            if scale <= 0:
                raise ValueError("probit scale must be positive")
            if self.beta != 1:
                raise ValueError("probit link has beta = 1")
        elif self.kind == "affine":
            if len(self.params) != 2:
                raise ValueError("affine link needs params (intercept, slope)")
            a, b = self.params
            if not 0.0 < a < 1.0:
                raise ValueError("affine intercept (value at 0) must lie in (0, 1)")
            if b <= 0:
                raise ValueError("affine slope must be positive")
        elif self.kind == "constant":
            if len(self.params) != 1 or not 0.0 <= self.params[0] <= 1.0:
                raise ValueError("constant link needs params (level,) with level in [0, 1]")

    @property
    def value_at_zero(self) -> float:
        return float(link_eval(self, 0.0))

    @property
    def noise_scale(self) -> float:
        """sqrt(phi0(0) * (1 - phi0(0))): Bernoulli noise scale at the center."""
        p = self.value_at_zero
        return math.sqrt(p * (1.0 - p))


def _logistic(u):
    # Split form avoids overflow of exp for large |u|.
    u = np.asarray(u, dtype=float)
    out = np.empty_like(u)
    pos = u >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-u[pos]))
    eu = np.exp(u[~pos])
    out[~pos] = eu / (1.0 + eu)
    return out


def _logistic_derivative_polys(order: int) -> list[np.ndarray]:
    """Coefficients of P_k with d^k/du^k logistic = P_k(logistic).

    P_0(x) = x and P_{k+1} = P_k'(x) * (x - x^2).
    """
    polys = [np.array([0.0, 1.0])]
    for _ in range(order):
        p = polys[-1]
        dp = p[1:] * np.arange(1, len(p))
        nxt = np.zeros(len(p) + 1)
        nxt[1 : 1 + len(dp)] += dp
        nxt[2 : 2 + len(dp)] -= dp
        polys.append(nxt)
    return polys


def _logistic_derivative(u: float, order: int) -> float:
    p = _logistic_derivative_polys(order)[order]
    lam = float(_logistic(u))
    return float(np.polynomial.polynomial.polyval(lam, p))


def _normal_cdf_derivative(v: float, order: int) -> float:
    """order-th derivative of the standard normal CDF at v (order >= 1)."""
    phi = math.exp(-0.5 * v * v) / math.sqrt(2.0 * math.pi)
    j = order - 1
    # phi^{(j)}(v) = (-1)^j He_j(v) phi(v), probabilists' Hermite recursion.
    h_prev, h = 1.0, v
    if j == 0:
        return phi
    for k in range(1, j):
        h_prev, h = h, v * h - k * h_prev
    return (-1) ** j * h * phi


def _compose_series(outer: np.ndarray, inner: np.ndarray, order: int) -> np.ndarray:
    """Taylor coefficients of outer(inner(t)) where inner(0) contribution
    is already absorbed into outer's expansion point (inner[0] == 0)."""
    out = np.zeros(order + 1)
    out[0] = outer[0]
    power = np.zeros(order + 1)
    power[0] = 1.0
    for k in range(1, len(outer)):
        # power <- power * inner, truncated
        new = np.zeros(order + 1)
        for i in range(order + 1):
            if power[i] == 0.0:
                continue
            hi = min(order - i, len(inner) - 1)
            new[i : i + hi + 1] += power[i] * inner[: hi + 1]
        power = new
        if not power.any():
            break
        out += outer[k] * power
    return out


def _beta_flat_derivative(u: float, beta: int, order: int) -> float:
    """order-th derivative of logistic(u**beta) via truncated series composition."""
    y0 = u**beta
    outer = np.array(
        [_logistic_derivative(y0, k) / math.factorial(k) for k in range(order + 1)]
    )
    inner = np.zeros(order + 1)
    for j in range(1, min(beta, order) + 1):
        inner[j] = math.comb(beta, j) * u ** (beta - j)
    coeff = _compose_series(outer, inner, order)
    return float(coeff[order] * math.factorial(order))


def link_eval(link: LinkSpec, u) -> np.ndarray | float:
    """Evaluate the link at ``u`` (scalar or array); total on the reals."""
    scalar = np.isscalar(u)
    u = np.asarray(u, dtype=float)
    if link.kind == "logistic":
        out = _logistic(u)
    elif link.kind == "probit":
        scale = link.params[0] if link.params else 1.0
        out = 0.5 * (1.0 + erf(u / (scale * math.sqrt(2.0))))
    elif link.kind == "affine":
        a, b = link.params
        out = np.clip(a + b * u, 0.0, 1.0)
    elif link.kind == "beta_flat":
        out = _logistic(u**link.beta)
    else:  # constant
        out = np.full_like(u, link.params[0])
    return float(out) if scalar else out


def link_derivative(link: LinkSpec, u: float, order: int) -> float:
    """Analytic derivative of the link of the given order at ``u``."""
    if order < 1:
        raise ValueError("derivative order must be a positive integer")
    if link.kind == "affine":
        a, b = link.params
        inside = 0.0 < a + b * u < 1.0
        if order == 1:
            return b if inside else 0.0
        return 0.0
    if link.kind == "constant":
        return 0.0
    if order > _MAX_DERIVATIVE_ORDER:
        raise ValueError(
            f"unsupported derivative order {order} for {link.kind} "
            f"(orders up to {_MAX_DERIVATIVE_ORDER} are available)"
        )
    if link.kind == "logistic":
        return _logistic_derivative(float(u), order)
    if link.kind == "probit":
        scale = link.params[0] if link.params else 1.0
        return _normal_cdf_derivative(float(u) / scale, order) / scale**order
    return _beta_flat_derivative(float(u), link.beta, order)


def link_inverse(link: LinkSpec, p: float) -> float:
    """Inverse of the link at probability ``p`` (strictly inside its range)."""
    if link.kind == "logistic":
        return math.log(p / (1.0 - p))
    if link.kind == "probit":
        from scipy.special import erfinv

        scale = link.params[0] if link.params else 1.0
        return scale * math.sqrt(2.0) * float(erfinv(2.0 * p - 1.0))
    if link.kind == "affine":
        a, b = link.params
        return (p - a) / b
    if link.kind == "beta_flat":
        logit = math.log(p / (1.0 - p))
        return math.copysign(abs(logit) ** (1.0 / link.beta), logit)
    raise ValueError("constant link has no inverse")


# ---------------------------------------------------------------------------
# feature laws


@dataclass(frozen=True)
class FeatureLaw:
    """Feature distribution on ``[-half_width, half_width]``.

    kind
        ``uniform``, or ``polynomial``: a uniform/quadratic density
        mixture ``(1-tilt)/(2T) + tilt * 3x^2/(2T^3)`` with ``tilt`` in
        [0, 1), continuous and bounded away from zero on the support.
    """

    kind: str
    half_width: float = 1.0
    params: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in _LAW_KINDS:
            raise ValueError(f"unknown feature law kind {self.kind!r}")
        if self.half_width <= 0:
            raise ValueError("support half-width must be positive")
        if self.kind == "polynomial":
            tilt = self.params[0] if self.params else 0.5
            if not 0.0 <= tilt < 1.0:
                raise ValueError("polynomial tilt must lie in [0, 1)")

    @property
    def tilt(self) -> float:
        return self.params[0] if self.params else (0.5 if self.kind == "polynomial" else 0.0)

    def density(self, x) -> np.ndarray | float:
        scalar = np.isscalar(x)
        x = np.asarray(x, dtype=float)
        t = self.half_width
        if self.kind == "uniform":
            out = np.where(np.abs(x) <= t, 1.0 / (2.0 * t), 0.0)
        else:
            th = self.tilt
            out = np.where(
                np.abs(x) <= t,
                (1.0 - th) / (2.0 * t) + th * 3.0 * x * x / (2.0 * t**3),
                0.0,
            )
        return float(out) if scalar else out

    def cdf(self, x) -> np.ndarray | float:
        scalar = np.isscalar(x)
        x = np.clip(np.asarray(x, dtype=float), -self.half_width, self.half_width)
        t = self.half_width
        if self.kind == "uniform":
            out = (x + t) / (2.0 * t)
        else:
            th = self.tilt
            out = (1.0 - th) * (x + t) / (2.0 * t) + th * (x**3 + t**3) / (2.0 * t**3)
        return float(out) if scalar else out

    def quantile(self, s) -> np.ndarray | float:
        scalar = np.isscalar(s)
        s = np.asarray(s, dtype=float)
        if np.any(s < 0.0) or np.any(s > 1.0):
            raise ValueError("quantile argument must lie in [0, 1]")
        t = self.half_width
        if self.kind == "uniform":
            out = 2.0 * t * s - t
        else:
            lo = np.full(s.shape, -t)
            hi = np.full(s.shape, t)
            for _ in range(80):  # monotone cubic; bisection to double precision
                mid = 0.5 * (lo + hi)
                below = self.cdf(mid) < s
                lo = np.where(below, mid, lo)
                hi = np.where(below, hi, mid)
            out = 0.5 * (lo + hi)
        return float(out) if scalar else out

    def density_derivative(self, x) -> np.ndarray | float:
        scalar = np.isscalar(x)
        x = np.asarray(x, dtype=float)
        t = self.half_width
        if self.kind == "uniform":
            out = np.zeros_like(x)
        else:
            out = np.where(np.abs(x) <= t, self.tilt * 3.0 * x / t**3, 0.0)
        return float(out) if scalar else out

    @property
    def sup_density(self) -> float:
        if self.kind == "uniform":
            return 1.0 / (2.0 * self.half_width)
        return (1.0 + 2.0 * self.tilt) / (2.0 * self.half_width)


def feature_eval(law: FeatureLaw, which: str, u):
    """Dispatch to density / cdf / quantile / density_derivative."""
    table = {
        "density": law.density,
        "cdf": law.cdf,
        "quantile": law.quantile,
        "density_derivative": law.density_derivative,
    }
    if which not in table:
        raise ValueError(f"unknown feature functional {which!r}")
    return table[which](u)


# ---------------------------------------------------------------------------
# scenario and sampling


@dataclass(frozen=True)
class Scenario:
    """Link + feature law + impact schedule ``delta(n) = c * n**-gamma``."""

    link: LinkSpec
    law: FeatureLaw
    impact_scale: float = 1.0
    impact_exponent: float = 0.0
    beta: int = 1

    def __post_init__(self) -> None:
        if self.impact_scale <= 0:
            raise ValueError("impact scale c must be positive")
        if self.impact_exponent < 0:
            raise ValueError("impact exponent gamma must be nonnegative")
        if self.beta != self.link.beta:
            raise ValueError("scenario flatness order must match the link")

    def delta(self, n: int) -> float:
        return self.impact_scale * float(n) ** (-self.impact_exponent)

    def phi_fn(self, n: int) -> Callable[[np.ndarray], np.ndarray]:
        d = self.delta(n)
        link = self.link
        return lambda x: link_eval(link, d * np.asarray(x, dtype=float))


def phi_n(scn: Scenario, n: int, x):
    """Conditional success probability at feature value ``x`` for size ``n``."""
    x = x if np.isscalar(x) else np.asarray(x, dtype=float)
    return link_eval(scn.link, scn.delta(n) * x)


@dataclass(frozen=True)
class Sample:
    """Sorted feature-label data with duplicate features aggregated.

    ``xs`` is strictly increasing; block ``i`` holds ``weights[i]`` draws
    of which ``ones[i]`` had label one.  For duplicate-free data
    ``weights`` is all ones and ``ones`` is the 0/1 label vector.
    """

    xs: np.ndarray
    ones: np.ndarray
    weights: np.ndarray

    def __post_init__(self) -> None:
        xs = np.asarray(self.xs, dtype=float)
        ones = np.asarray(self.ones, dtype=np.int64)
        weights = np.asarray(self.weights, dtype=np.int64)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ones", ones)
        object.__setattr__(self, "weights", weights)
        if xs.size == 0:
            raise ValueError("empty sample")
        if not (len(xs) == len(ones) == len(weights)):
            raise ValueError("sample fields must have equal length")
        if xs.size > 1 and not np.all(np.diff(xs) > 0):
            raise ValueError("sample xs must be strictly increasing")
        if np.any(weights < 1):
            raise ValueError("weights must be positive integers")
        if np.any(ones < 0) or np.any(ones > weights):
            raise ValueError("label counts must lie in [0, weight] per block")

    @property
    def n(self) -> int:
        return int(self.weights.sum())

    @property
    def ys(self) -> np.ndarray:
        """Binary labels; defined only when no aggregation happened."""
        if np.any(self.weights != 1):
            raise ValueError("sample has aggregated duplicates; use ones/weights")
        return self.ones.copy()

    @classmethod
    def from_draws(cls, xs, ys) -> "Sample":
        """Sort raw draws by feature and aggregate duplicate feature values."""
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys)
        if xs.size == 0:
            raise ValueError("empty sample")
        if xs.shape != ys.shape:
            raise ValueError("xs and ys must have equal length")
        if not np.isin(ys, (0, 1)).all():
            raise ValueError("labels must be 0 or 1")
        order = np.argsort(xs, kind="stable")
        xs = xs[order]
        ys = ys[order].astype(np.int64)
        uniq, inverse, counts = np.unique(xs, return_inverse=True, return_counts=True)
        ones = np.bincount(inverse, weights=ys).astype(np.int64)
        return cls(uniq, ones, counts)


def sample_to_csv_text(s: Sample) -> str:
    """Two-column ``x,y`` text with one row per draw (weights expanded)."""
    lines = ["x,y"]
    for x, ones, w in zip(s.xs, s.ones, s.weights):
        lines.extend(f"{format(float(x), '.17g')},1" for _ in range(int(ones)))
        lines.extend(f"{format(float(x), '.17g')},0" for _ in range(int(w - ones)))
    return "\n".join(lines) + "\n"


def sample_from_csv_text(text: str) -> Sample:
    """Parse ``x,y`` rows (header required, labels 0/1, duplicates merged).

    Raises ValueError naming the offending line on malformed input.
    """
    lines = text.splitlines()
    if not lines or lines[0].strip().lower() != "x,y":
        raise ValueError("sample CSV must start with header 'x,y'")
    xs: list[float] = []
    ys: list[int] = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'x,y'")
        try:
            x = float(parts[0])
            y = float(parts[1])
        except ValueError:
            raise ValueError(f"line {lineno}: non-numeric field") from None
        if y not in (0.0, 1.0):
            raise ValueError(f"line {lineno}: label must be 0 or 1")
        xs.append(x)
        ys.append(int(y))
    if not xs:
        raise ValueError("empty sample")
    return Sample.from_draws(np.array(xs), np.array(ys))


def draw_sample(scn: Scenario, n: int, rng: np.random.Generator) -> Sample:
    """Draw ``n`` pairs from the scenario using the supplied generator.

    Consumption order is fixed: ``n`` uniforms for the quantile transform
    of the features, then ``n`` uniforms for the labels.
    """
    if n < 1:
        raise ValueError("sample size must be at least 1")
    u_x = rng.random(n)
    xs = np.asarray(scn.law.quantile(u_x), dtype=float)
    u_y = rng.random(n)
    probs = link_eval(scn.link, scn.delta(n) * xs)
    ys = (u_y < probs).astype(np.int64)
    return Sample.from_draws(xs, ys)


def sample_dataset(scn: Scenario, n: int, seed: int) -> Sample:
    """Deterministic dataset of size ``n`` for the given seed."""
    return draw_sample(scn, n, stream(seed))


# ---------------------------------------------------------------------------
# piecewise-affine monotone functions and hypothesis constructions


@dataclass(frozen=True)
class PiecewiseAffine:
    """Monotone piecewise-affine function, constant outside its knots."""

    knots: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        knots = np.asarray(self.knots, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "values", values)
        if knots.size < 2 or not np.all(np.diff(knots) > 0):
            raise ValueError("knots must be strictly increasing with length >= 2")
        if np.any(np.diff(values) < 0):
            raise ValueError("values must be nondecreasing")

    def __call__(self, x):
        scalar = np.isscalar(x)
        out = np.interp(np.asarray(x, dtype=float), self.knots, self.values)
        return float(out) if scalar else out

    @property
    def breakpoints(self) -> np.ndarray:
        return self.knots

    @property
    def max_slope(self) -> float:
        return float(np.max(np.diff(self.values) / np.diff(self.knots)))


@dataclass(frozen=True)
class HypothesisPair:
    """Two slope-band hypotheses separated at ``x0`` by the minimax gap."""

    upper: PiecewiseAffine
    lower: PiecewiseAffine
    case: str  # 'fast' (affine pair) or 'slow' (kinked pair)
    separation: float
    delta: float
    n: int
    constant: float
    x0: float


@dataclass(frozen=True)
class HypothesisCube:
    """Hypercube of monotone hypotheses; one bit toggles one cell's shape.

    Cell ``k`` covers ``[edges[k], edges[k+1]]`` of width ``2 * half_step``;
    bit 1 selects slopes (delta/2, delta) on the two half-cells, bit 0 the
    mirrored pattern.  All hypotheses start at 1/4 and stay below 3/4.
    """

    delta: float
    n: int
    constant: float
    half_width: float
    m: int
    half_step: float
    edges: np.ndarray

    def function(self, bits) -> PiecewiseAffine:
        bits = np.asarray(bits, dtype=np.int64)
        if bits.shape != (self.m,):
            raise ValueError(f"bit vector must have length {self.m}")
        if not np.isin(bits, (0, 1)).all():
            raise ValueError("bits must be 0 or 1")
        d, h = self.delta, self.half_step
        first = np.where(bits == 1, 0.5 * d * h, d * h)
        rises = np.empty(2 * self.m)
        rises[0::2] = first
        rises[1::2] = 1.5 * d * h - first
        knots = np.empty(2 * self.m + 1)
        knots[0::2] = self.edges
        knots[1::2] = self.edges[:-1] + h
        values = 0.25 + np.concatenate(([0.0], np.cumsum(rises)))
        return PiecewiseAffine(knots, values)

    def one_flip_l1(self) -> float:
        """Exact L1 gap on a cell between the two base shapes."""
        return 0.5 * self.delta * self.half_step**2

    def one_flip_l1_lower_bound(self) -> float:
        """Audited lower bound ``h * 2*T*C * (n/delta)**(-1/3)`` for the gap."""
        return (
            self.half_step
            * 2.0
            * self.half_width
            * self.constant
            * (self.n / self.delta) ** (-1.0 / 3.0)
        )


def default_fast_pair_constant() -> float:
    return 0.4


def default_slow_pair_constant(law: FeatureLaw) -> float:
    t = law.half_width
    return 0.5 * min((4.0 * t) ** (1.0 / 3.0) / 8.0, (32.0 * law.sup_density) ** (-1.0 / 3.0))


def default_cube_constant(law: FeatureLaw) -> float:
    return 0.5 * (1.0 / (32.0 * law.sup_density)) ** (1.0 / 3.0)


def build_pointwise_hypotheses(
    delta: float, n: int, C: float, law: FeatureLaw, x0: float
) -> HypothesisPair:
    """Two-point hypotheses achieving separation ``2C max(n^-1/2, (n/delta)^-1/3)``.

    For ``delta`` below ``n**-0.5`` the pair is two parallel lines of slope
    ``delta``; otherwise the pair is kinked around ``x0`` with slopes
    ``delta/2`` and ``delta``.  Raises if a constraint needed by the
    separation/affinity budget is violated, naming the constraint.
    """
    t = law.half_width
    if not 0.0 <= delta <= 1.0 / (4.0 * t):
        raise ValueError("delta outside [0, 1/(4T)]")
    if not -t < x0 < t:
        raise ValueError("x0 must be interior to the feature support")
    root_n = n ** (-0.5)
    if delta < root_n:
        if not 0.0 < C < 1.0 / math.sqrt(2.0):
            raise ValueError("fast-case constant violates 0 < C < 1/sqrt(2)")
        if n < 16.0 * (C + t) ** 2:
            raise ValueError("fast case needs n >= 16 (C + T)^2 to stay inside [1/4, 3/4]")
        eta = 0.5 - delta * t - C * root_n
        sep = 2.0 * C * root_n
        knots = np.array([-t, t])
        lower = PiecewiseAffine(knots, eta + delta * (knots + t))
        upper = PiecewiseAffine(knots, eta + sep + delta * (knots + t))
        return HypothesisPair(upper, lower, "fast", sep, delta, n, C, x0)

    c_max = min((4.0 * t) ** (1.0 / 3.0) / 8.0, (32.0 * law.sup_density) ** (-1.0 / 3.0))
    if not 0.0 < C < c_max:
        raise ValueError(
            "slow-case constant violates 0 < C < min((4T)^(1/3)/8, (32 sup p)^(-1/3))"
        )
    if n < 16.0**3 * C**3:
        raise ValueError("slow case needs n >= 16^3 C^3 to stay inside [1/4, 3/4]")
    kink = 4.0 * C * (n * delta**2) ** (-1.0 / 3.0)
    if x0 - kink <= -t or x0 + kink >= t:
        raise ValueError("kink offset 4C(n delta^2)^(-1/3) leaves the feature support")
    eta = 0.5 - 0.5 * delta * (x0 + t)
    sep = 2.0 * C * (n / delta) ** (-1.0 / 3.0)
    # upper: half slope until x0 - kink, full slope until x0, half slope after
    ku = np.array([-t, x0 - kink, x0, t])
    vu = np.array(
        [
            eta,
            eta + 0.5 * delta * (x0 - kink + t),
            eta + 0.5 * delta * (x0 + t) + sep,
            eta + 0.5 * delta * (t + t + kink),
        ]
    )
    # lower: half slope until x0, full slope until x0 + kink, half slope after
    kl = np.array([-t, x0, x0 + kink, t])
    vl = np.array(
        [
            eta,
            eta + 0.5 * delta * (x0 + t),
            eta + 0.5 * delta * (x0 + kink + t) + sep,
            eta + 0.5 * delta * (t + t + kink),
        ]
    )
    return HypothesisPair(
        PiecewiseAffine(ku, vu), PiecewiseAffine(kl, vl), "slow", sep, delta, n, C, x0
    )


def build_assouad_cube(delta: float, n: int, C: float, T: float) -> HypothesisCube:
    """Hypercube with ``m = floor((n delta^2)^(1/3) / (4C))`` cells on [-T, T]."""
    if T <= 0:
        raise ValueError("half-width T must be positive")
    if not n ** (-0.5) <= delta <= 1.0 / (4.0 * T):
        raise ValueError("delta outside [n^(-1/2), 1/(4T)]")
    if C <= 0:
        raise ValueError("cube constant must be positive")
    m = int(math.floor((n * delta**2) ** (1.0 / 3.0) / (4.0 * C)))
    if m == 0:
        raise ValueError("degenerate cube: m = 0 cells for these (n, delta, C)")
    h = T / m
    edges = -T + 2.0 * h * np.arange(m + 1)
    return HypothesisCube(delta, n, C, T, m, h, edges)


# ---------------------------------------------------------------------------
# slope-band membership


def slope_band_report(
    f: Callable[[np.ndarray], np.ndarray],
    delta: float,
    half_width: float,
    grid_size: int = 4097,
    dyadic_levels: int = 10,
) -> dict:
    """Numerical audit of slope-band membership on ``[-T, T]``.

    Checks monotonicity and range on a dense grid, the Lipschitz bound
    ``<= delta`` from consecutive difference quotients (the grid is the
    union of a uniform grid and any breakpoints the function exposes),
    and the modulus-of-continuity ratio ``>= delta/2`` over the dyadic
    spacings ``2T / 2**j``.
    """
    t = half_width
    grid = np.linspace(-t, t, grid_size)
    bp = getattr(f, "breakpoints", None)
    if bp is not None:
        inside = bp[(bp > -t) & (bp < t)]
        grid = np.unique(np.concatenate([grid, inside]))
        # drop near-coincident points whose quotients are pure rounding noise
        grid = grid[np.concatenate(([True], np.diff(grid) > 1e-12))]
    vals = np.asarray(f(grid), dtype=float)
    diffs = np.diff(vals)
    monotone = bool(np.all(diffs >= -1e-12))
    in_range = bool(np.all((vals >= -1e-12) & (vals <= 1.0 + 1e-12)))
    lipschitz = float(np.max(diffs / np.diff(grid))) if grid.size > 1 else 0.0

    uniform = np.linspace(-t, t, 2**dyadic_levels + 1)
    uvals = np.asarray(f(uniform), dtype=float)
    ratios = []
    for j in range(dyadic_levels + 1):
        k = 2 ** (dyadic_levels - j)  # spacing 2T / 2**j in index units
        nu = 2.0 * t / 2**j
        omega = float(np.max(uvals[k:] - uvals[:-k]))
        ratios.append(omega / nu)
    return {
        "monotone": monotone,
        "in_range": in_range,
        "lipschitz": lipschitz,
        "min_modulus_ratio": float(min(ratios)),
    }


def in_slope_band(
    f: Callable[[np.ndarray], np.ndarray],
    delta: float,
    half_width: float,
    tol: float = 1e-9,
) -> bool:
    """True when ``f`` passes the slope-band audit for level ``delta``."""
    rep = slope_band_report(f, delta, half_width)
    return (
        rep["monotone"]
        and rep["in_range"]
        and rep["lipschitz"] <= delta * (1.0 + tol) + tol
        and rep["min_modulus_ratio"] >= 0.5 * delta * (1.0 - tol) - tol
    )
