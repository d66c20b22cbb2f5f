"""Samplers for every limit law arising in the weak-impact scenario.

All samplers discretize Gaussian paths on a fixed grid and are pure
functions of (parameters, grid, seed).  Slope-type laws are obtained as
the left derivative of the greatest convex minorant of the simulated
path, computed through isotonic regression of its increments (the two
are the same object; the equivalence is exercised in the test suite
against the hull construction used by the estimator).

Grid policy: argmin-type samplers live on a two-sided window [-S, S]
with quadratic drift confining the minimizer; if a draw lands in the
outer 10% of the window it is re-simulated on a doubled window, at most
three times, after which a :class:`GridEscapeError` signals a mis-set
grid.  Unit-interval samplers need no window logic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import isotonic_regression

from .estimator import lower_hull_indices
from .metrics import QuadratureCfg, adaptive_simpson
from .model import FeatureLaw, LinkSpec, Scenario, link_derivative, link_eval
from .streams import stream

__all__ = [
    "PathGrid",
    "GridEscapeError",
    "LimitBatch",
    "CovIntegral",
    "DEFAULT_TWO_SIDED_GRID",
    "DEFAULT_UNIT_GRID",
    "LAW_TAGS",
    "brownian_path",
    "brownian_paths",
    "chernoff_sample",
    "chernoff_batch",
    "argmin_quadratic_sample",
    "argmin_quadratic_batch",
    "scaled_chernoff_constant",
    "slow_limit_sample",
    "slow_limit_batch",
    "boundary_drift",
    "boundary_limit_sample",
    "boundary_limit_batch",
    "l1_fast_limit_sample",
    "l1_fast_batch",
    "chernoff_abs_mean",
    "chernoff_cov_integral",
    "mu_n",
    "sigma_sq",
    "gcm_left_derivative_on_grid",
    "sample_limit_batch",
]

_CHUNK = 512  # fixed path-batch chunk so draws never depend on memory layout


class GridEscapeError(RuntimeError):
    """Argmin or minorant block kept hitting the grid boundary."""


@dataclass(frozen=True)
class PathGrid:
    """Uniform simulation grid: [-S, S] when two-sided, else [0, S]."""

    half_width: float
    step: float
    two_sided: bool = True

    def __post_init__(self) -> None:
        if self.half_width <= 0 or self.step <= 0:
            raise ValueError("grid extent and step must be positive")
        ratio = self.half_width / self.step
        if abs(ratio - round(ratio)) > 1e-9:
            raise ValueError("grid half-width must be an integer multiple of the step")
        if self.step > 0.01 * self.half_width + 1e-15:
            raise ValueError("grid step must not exceed 1% of the half-width")

    @property
    def n_steps(self) -> int:
        return int(round(self.half_width / self.step))

    def points(self) -> np.ndarray:
        n = self.n_steps
        if self.two_sided:
            return self.step * np.arange(-n, n + 1)
        return self.step * np.arange(n + 1)

    def doubled(self) -> "PathGrid":
        return PathGrid(2.0 * self.half_width, self.step, self.two_sided)


DEFAULT_TWO_SIDED_GRID = PathGrid(4.0, 0.002, True)
DEFAULT_UNIT_GRID = PathGrid(1.0, 2e-4, False)

LAW_TAGS = (
    "scaled_chernoff",
    "slow_fbeta",
    "boundary_gbc",
    "fast_w_slope",
    "l1_fast_maxA",
)


def _as_rng(seed_or_rng) -> np.random.Generator:
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return stream(int(seed_or_rng))


def brownian_paths(grid: PathGrid, m: int, rng: np.random.Generator) -> np.ndarray:
    """m standard Brownian paths on the grid, pinned to 0 at the origin.

    Two-sided paths are glued from two independent one-sided paths; the
    negative-side increments are consumed from the generator first.
    """
    n = grid.n_steps
    scale = math.sqrt(grid.step)
    if grid.two_sided:
        inc = rng.standard_normal((m, 2 * n)) * scale
        out = np.empty((m, 2 * n + 1))
        out[:, n] = 0.0
        out[:, n - 1 :: -1] = np.cumsum(inc[:, :n], axis=1)
        out[:, n + 1 :] = np.cumsum(inc[:, n:], axis=1)
        return out
    inc = rng.standard_normal((m, n)) * scale
    out = np.empty((m, n + 1))
    out[:, 0] = 0.0
    out[:, 1:] = np.cumsum(inc, axis=1)
    return out


def brownian_path(grid: PathGrid, seed_or_rng) -> np.ndarray:
    """One path; convenience wrapper around :func:`brownian_paths`."""
    return brownian_paths(grid, 1, _as_rng(seed_or_rng))[0]


def _argmin_last(values: np.ndarray) -> np.ndarray:
    """Row argmin with ties broken to the largest index."""
    return values.shape[1] - 1 - np.argmin(values[:, ::-1], axis=1)


def argmin_quadratic_batch(
    grid: PathGrid,
    m: int,
    seed_or_rng,
    a: float = 1.0,
    b: float = 1.0,
    c: float = 0.0,
    noise: bool = True,
) -> np.ndarray:
    """Draws of ``argmin_s {a Z(s) + b s^2 - c s}`` on the grid.

    ``noise=False`` drops the Brownian term (deterministic parabola),
    which is only useful for exercising the argmin plumbing.
    """
    if not grid.two_sided:
        raise ValueError("argmin samplers need a two-sided grid")
    if b <= 0:
        raise ValueError("quadratic coefficient b must be positive")
    rng = _as_rng(seed_or_rng)
    out = np.empty(m)
    pending = np.arange(m)
    g = grid
    for level in range(4):
        s = g.points()
        drift = b * s * s - c * s
        draws = np.empty(pending.size)
        for start in range(0, pending.size, _CHUNK):
            k = min(_CHUNK, pending.size - start)
            paths = a * brownian_paths(g, k, rng) if noise else np.zeros((k, s.size))
            draws[start : start + k] = s[_argmin_last(paths + drift[None, :])]
        esc = np.abs(draws) > 0.9 * g.half_width
        out[pending] = draws
        pending = pending[esc]
        if pending.size == 0:
            return out
        g = g.doubled()
    raise GridEscapeError(
        f"argmin stayed within the outer 10% after 3 window doublings "
        f"(last half-width {g.half_width}); grid is mis-set for (a={a}, b={b}, c={c})"
    )


def argmin_quadratic_sample(grid: PathGrid, seed_or_rng, a=1.0, b=1.0, c=0.0) -> float:
    return float(argmin_quadratic_batch(grid, 1, seed_or_rng, a, b, c)[0])


def chernoff_batch(grid: PathGrid, m: int, seed_or_rng) -> np.ndarray:
    """Draws of ``argmin_s {Z(s) + s^2}``."""
    return argmin_quadratic_batch(grid, m, seed_or_rng, 1.0, 1.0, 0.0)


def chernoff_sample(grid: PathGrid, seed_or_rng) -> float:
    return float(chernoff_batch(grid, 1, seed_or_rng)[0])


# ---------------------------------------------------------------------------
# greatest-convex-minorant slope samplers


def gcm_left_derivative_on_grid(s: np.ndarray, f: np.ndarray, at: float) -> float:
    """Left slope at ``at`` of the greatest convex minorant of (s, f).

    Hull-based evaluation for a single path; used by tests and the
    deterministic reductions.  ``at`` must lie strictly above the first
    grid point.
    """
    keep = lower_hull_indices(s, f)
    hs = s[keep]
    hv = f[keep]
    j = int(np.searchsorted(hs, at, side="left"))
    j = min(max(j, 1), hs.size - 1)
    return float((hv[j] - hv[j - 1]) / (hs[j] - hs[j - 1]))


def _gcm_slope_batch(
    paths: np.ndarray, slot: int, step: float
) -> tuple[np.ndarray, np.ndarray]:
    """Isotonic route: left minorant slope at increment ``slot`` per path.

    The isotonic fit of the path increments equals the minorant slopes
    scaled by the grid step.  Returns the slopes and a flag marking paths
    whose minorant block at ``slot`` touches the grid boundary (window
    too small to localize the slope).
    """
    m, npts = paths.shape
    n_inc = npts - 1
    out = np.empty(m)
    touched = np.zeros(m, dtype=bool)
    for i in range(m):
        res = isotonic_regression(np.diff(paths[i]))
        out[i] = res.x[slot] / step
        blocks = res.blocks
        b = int(np.searchsorted(blocks, slot, side="right")) - 1
        touched[i] = blocks[b] == 0 or blocks[b + 1] == n_inc
    return out, touched


def _slow_drift_coeff(beta: int, link: LinkSpec, law: FeatureLaw, x0: float) -> float:
    for k in range(1, beta):
        if abs(link_derivative(link, 0.0, k)) > 1e-12:
            raise ValueError(
                f"link derivative of order {k} does not vanish at 0; "
                f"flatness order {beta} is wrong for this link"
            )
    d_beta = link_derivative(link, 0.0, beta)
    if d_beta <= 0:
        raise ValueError("leading link derivative at 0 must be strictly positive")
    p0 = float(law.density(x0))
    return d_beta / (p0**beta * math.factorial(beta + 1))


def slow_limit_batch(
    beta: int,
    link: LinkSpec,
    law: FeatureLaw,
    x0: float,
    grid: PathGrid,
    m: int,
    seed_or_rng,
) -> np.ndarray:
    """Slow-regime pointwise limit draws.

    Simulates ``noise_scale * Z(s) + coef * s**(beta+1)`` on the two-sided
    grid and returns the left slope of its greatest convex minorant at 0.
    """
    if not grid.two_sided:
        raise ValueError("the slow-regime sampler needs a two-sided grid")
    coef = _slow_drift_coeff(beta, link, law, x0)
    sigma = link.noise_scale
    rng = _as_rng(seed_or_rng)
    out = np.empty(m)
    pending = np.arange(m)
    g = grid
    for level in range(4):
        s = g.points()
        drift = coef * s ** (beta + 1)
        slot = g.n_steps - 1  # increment ending at the origin
        draws = np.empty(pending.size)
        esc = np.zeros(pending.size, dtype=bool)
        for start in range(0, pending.size, _CHUNK):
            k = min(_CHUNK, pending.size - start)
            paths = sigma * brownian_paths(g, k, rng) + drift[None, :]
            vals, touched = _gcm_slope_batch(paths, slot, g.step)
            draws[start : start + k] = vals
            esc[start : start + k] = touched
        out[pending] = draws
        pending = pending[esc]
        if pending.size == 0:
            return out
        g = g.doubled()
    raise GridEscapeError(
        "minorant block at the origin kept touching the window boundary "
        f"after 3 doublings (last half-width {g.half_width})"
    )


def slow_limit_sample(beta, link, law, x0, grid, seed_or_rng) -> float:
    return float(slow_limit_batch(beta, link, law, x0, grid, 1, seed_or_rng)[0])


def scaled_chernoff_constant(
    link: LinkSpec, law: FeatureLaw, x0: float, beta: int = 1
) -> float:
    """Cube-root constant multiplying the Chernoff draw in the slow regime."""
    if beta != 1:
        raise ValueError(
            "the closed-form constant exists for flatness order 1 only; "
            "use the general slow-regime sampler for higher orders"
        )
    d1 = link_derivative(link, 0.0, 1)
    if d1 <= 0:
        raise ValueError(
            "link has vanishing first derivative at 0; "
            "use the general slow-regime sampler"
        )
    p0 = link.value_at_zero
    return (4.0 * p0 * (1.0 - p0) * d1 / float(law.density(x0))) ** (1.0 / 3.0)


def boundary_drift(
    beta: int, c: float, link: LinkSpec, law: FeatureLaw, x0: float, s: float
) -> float:
    """Drift of the boundary-case limit process at time ``s`` in [0, 1].

    ``sqrt(c) * d_beta * E[(X - x0)^beta 1{X <= quantile(s)}]`` computed by
    adaptive quadrature of ``(x - x0)^beta density(x)``.
    """
    if c < 0:
        raise ValueError("boundary constant c must be nonnegative")
    if not 0.0 <= s <= 1.0:
        raise ValueError("time argument must lie in [0, 1]")
    if c == 0.0 or s == 0.0:
        return 0.0
    upper = float(law.quantile(s))
    d_beta = link_derivative(link, 0.0, beta)
    val = adaptive_simpson(
        lambda x: (x - x0) ** beta * float(law.density(x)),
        -law.half_width,
        upper,
        QuadratureCfg(1e-12, 48),
    )
    return math.sqrt(c) * d_beta * val


def _boundary_drift_grid(
    beta: int, c: float, link: LinkSpec, law: FeatureLaw, x0: float, pts: np.ndarray
) -> np.ndarray:
    """Drift on a whole [0, 1] grid via the quantile substitution.

    ``E[(X-x0)^beta 1{X <= quantile(s)}] = int_0^s (quantile(u) - x0)^beta du``
    accumulated with composite Simpson on the grid.
    """
    if c == 0.0:
        return np.zeros(pts.size)
    q = np.asarray(law.quantile(pts), dtype=float)
    mids = 0.5 * (pts[:-1] + pts[1:])
    qm = np.asarray(law.quantile(mids), dtype=float)
    h = np.diff(pts)
    panel = h / 6.0 * ((q[:-1] - x0) ** beta + 4.0 * (qm - x0) ** beta + (q[1:] - x0) ** beta)
    d_beta = link_derivative(link, 0.0, beta)
    return math.sqrt(c) * d_beta * np.concatenate(([0.0], np.cumsum(panel)))


def boundary_limit_batch(
    beta: int,
    c: float,
    link: LinkSpec,
    law: FeatureLaw,
    x0: float,
    grid: PathGrid,
    m: int,
    seed_or_rng,
) -> np.ndarray:
    """Boundary-case pointwise limit draws (c = 0 gives the fast regime).

    Left slope at ``F_X(x0)`` of the greatest convex minorant of
    ``noise_scale * W + drift`` on [0, 1].
    """
    if grid.two_sided or abs(grid.half_width - 1.0) > 1e-12:
        raise ValueError("boundary sampler needs a one-sided grid on [0, 1]")
    f0 = float(law.cdf(x0))
    if not 0.0 < f0 < 1.0:
        raise ValueError("x0 must be interior to the feature support")
    pts = grid.points()
    drift = _boundary_drift_grid(beta, c, link, law, x0, pts)
    sigma = link.noise_scale
    slot = int(np.searchsorted(pts, f0, side="left")) - 1
    rng = _as_rng(seed_or_rng)
    out = np.empty(m)
    for start in range(0, m, _CHUNK):
        k = min(_CHUNK, m - start)
        paths = sigma * brownian_paths(grid, k, rng) + drift[None, :]
        vals, _ = _gcm_slope_batch(paths, slot, grid.step)
        out[start : start + k] = vals
    return out


def boundary_limit_sample(beta, c, link, law, x0, grid, seed_or_rng) -> float:
    return float(boundary_limit_batch(beta, c, link, law, x0, grid, 1, seed_or_rng)[0])


def l1_fast_batch(
    link: LinkSpec, law: FeatureLaw, grid: PathGrid, m: int, seed_or_rng
) -> np.ndarray:
    """Fast-regime L1 limit draws: ``noise_scale * (W(1) - 2 min W)``.

    This is the maximum of the limiting Gaussian process written through
    a single Brownian path; the feature law drops out because its CDF
    maps the support onto [0, 1].  Draws are always nonnegative.
    """
    if grid.two_sided or abs(grid.half_width - 1.0) > 1e-12:
        raise ValueError("the fast-regime L1 sampler needs a one-sided grid on [0, 1]")
    del law  # part of the interface; the law does not enter the draw
    sigma = link.noise_scale
    rng = _as_rng(seed_or_rng)
    out = np.empty(m)
    for start in range(0, m, _CHUNK):
        k = min(_CHUNK, m - start)
        w = brownian_paths(grid, k, rng)
        out[start : start + k] = sigma * (w[:, -1] - 2.0 * np.min(w, axis=1))
    return out


def l1_fast_limit_sample(link, law, grid, seed_or_rng) -> float:
    return float(l1_fast_batch(link, law, grid, 1, seed_or_rng)[0])


# ---------------------------------------------------------------------------
# Monte Carlo constants


def chernoff_abs_mean(grid: PathGrid, m: int, seed_or_rng) -> tuple[float, float]:
    """Monte Carlo mean of |argmin(Z + s^2)| with its standard error."""
    if m < 10_000:
        raise ValueError("first-absolute-moment runs need at least 10^4 draws")
    draws = np.abs(chernoff_batch(grid, m, seed_or_rng))
    return float(draws.mean()), float(draws.std(ddof=1) / math.sqrt(m))


@dataclass(frozen=True)
class CovIntegral:
    """Covariance integral of the shifted-argmin family, with diagnostics."""

    estimate: float
    se: float
    a_values: np.ndarray
    cov_curve: np.ndarray
    cov_se: np.ndarray

    @property
    def tail_cov(self) -> float:
        return float(self.cov_curve[-1])

    @property
    def tail_se(self) -> float:
        return float(self.cov_se[-1])


def chernoff_cov_integral(
    grid: PathGrid,
    a_max: float,
    a_step: float,
    m: int,
    seed_or_rng,
    bootstrap: int = 200,
) -> CovIntegral:
    """Trapezoid integral over [0, a_max] of Cov(|X(0)|, |X(a) - a|).

    ``X(a)`` is the argmin of ``Z(s) + (s - a)^2``; all shifts reuse one
    path per draw, since the covariance couples shifts within a path.
    The window is enlarged internally by ``a_max`` so shifted minimizers
    stay away from the boundary.
    """
    if a_max < 3.0:
        raise ValueError("shift range a_max must be at least 3")
    if not 0.0 < a_step <= 0.25:
        raise ValueError("shift step must lie in (0, 0.25]")
    if not grid.two_sided:
        raise ValueError("covariance runs need a two-sided grid")
    rng = _as_rng(seed_or_rng)
    big = PathGrid(grid.half_width + math.ceil(a_max), grid.step, True)
    s = big.points()
    n_a = int(round(a_max / a_step)) + 1
    a_values = a_step * np.arange(n_a)
    abs_x0 = np.empty(m)
    abs_shift = np.empty((m, n_a))
    for start in range(0, m, _CHUNK):
        k = min(_CHUNK, m - start)
        z = brownian_paths(big, k, rng)
        for j, a in enumerate(a_values):
            vals = z + (s[None, :] - a) ** 2
            x_a = s[_argmin_last(vals)]
            if np.any(np.abs(x_a) > 0.9 * big.half_width):
                raise GridEscapeError(
                    "shifted argmin reached the enlarged window boundary; "
                    "increase the base grid half-width"
                )
            if j == 0:
                abs_x0[start : start + k] = np.abs(x_a)
            abs_shift[start : start + k, j] = np.abs(x_a - a)
    cov_curve = (abs_x0[:, None] * abs_shift).mean(axis=0) - abs_x0.mean() * abs_shift.mean(
        axis=0
    )
    estimate = float(np.trapezoid(cov_curve, a_values))
    boots = np.empty(bootstrap)
    boot_curves = np.empty((bootstrap, n_a))
    for b in range(bootstrap):
        idx = rng.integers(0, m, m)
        a0 = abs_x0[idx]
        sh = abs_shift[idx]
        curve = (a0[:, None] * sh).mean(axis=0) - a0.mean() * sh.mean(axis=0)
        boot_curves[b] = curve
        boots[b] = np.trapezoid(curve, a_values)
    return CovIntegral(
        estimate,
        float(boots.std(ddof=1)),
        a_values,
        cov_curve,
        boot_curves.std(axis=0, ddof=1),
    )


def mu_n(
    scn: Scenario, n: int, chernoff_abs_mean_value: float, q: QuadratureCfg | None = None
) -> float:
    """Centering constant for the slow-regime L1 law at sample size ``n``.

    ``E|X(0)|`` times the integral over the support of
    ``(4 phi_n (1 - phi_n) phi0'(delta_n t) / density(t))^(1/3)``.
    """
    d1 = link_derivative(scn.link, 0.0, 1)
    if d1 <= 0:
        raise ValueError("centering needs a strictly positive link slope at 0")
    q = q or QuadratureCfg(1e-10, 48)
    delta = scn.delta(n)
    t = scn.law.half_width

    def integrand(x: float) -> float:
        p = float(link_eval(scn.link, delta * x))
        slope = link_derivative(scn.link, delta * x, 1)
        return (4.0 * p * (1.0 - p) * slope / float(scn.law.density(x))) ** (1.0 / 3.0)

    return chernoff_abs_mean_value * adaptive_simpson(integrand, -t, t, q)


def sigma_sq(
    link: LinkSpec, law: FeatureLaw, cov_integral_value: float, q: QuadratureCfg | None = None
) -> float:
    """Variance of the slow-regime L1 fluctuation.

    ``8 C int phi0(0)(1 - phi0(0)) / density(t) dt`` with ``C`` the
    covariance integral of the shifted-argmin family.
    """
    q = q or QuadratureCfg(1e-10, 48)
    t = law.half_width
    p0 = link.value_at_zero
    integral = adaptive_simpson(
        lambda x: p0 * (1.0 - p0) / float(law.density(x)), -t, t, q
    )
    return 8.0 * cov_integral_value * integral


# ---------------------------------------------------------------------------
# tagged batches


@dataclass(frozen=True)
class LimitBatch:
    """Draws from one simulated limit law plus the grid and parameters."""

    law_tag: str
    draws: np.ndarray
    grid: PathGrid
    params: dict = field(default_factory=dict)
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.law_tag not in LAW_TAGS:
            raise ValueError(f"unknown law tag {self.law_tag!r}")
        draws = np.asarray(self.draws, dtype=float)
        object.__setattr__(self, "draws", draws)
        if not np.all(np.isfinite(draws)):
            raise ValueError("limit batch draws must be finite")


def sample_limit_batch(
    law_tag: str,
    m: int,
    seed: int,
    *,
    link: LinkSpec,
    law: FeatureLaw,
    x0: float = 0.0,
    beta: int = 1,
    c: float = 0.0,
    grid: PathGrid | None = None,
) -> LimitBatch:
    """Generate a tagged batch of draws from one of the limit laws."""
    if law_tag not in LAW_TAGS:
        raise ValueError(f"unknown law tag {law_tag!r}")
    rng = stream(seed, LAW_TAGS.index(law_tag))
    params: dict = {"x0": x0, "beta": beta}
    if law_tag == "scaled_chernoff":
        grid = grid or DEFAULT_TWO_SIDED_GRID
        kappa = scaled_chernoff_constant(link, law, x0, beta)
        draws = kappa * chernoff_batch(grid, m, rng)
        params["kappa"] = kappa
    elif law_tag == "slow_fbeta":
        grid = grid or DEFAULT_TWO_SIDED_GRID
        draws = slow_limit_batch(beta, link, law, x0, grid, m, rng)
    elif law_tag == "boundary_gbc":
        grid = grid or DEFAULT_UNIT_GRID
        draws = boundary_limit_batch(beta, c, link, law, x0, grid, m, rng)
        params["c"] = c
    elif law_tag == "fast_w_slope":
        grid = grid or DEFAULT_UNIT_GRID
        draws = boundary_limit_batch(beta, 0.0, link, law, x0, grid, m, rng)
    elif law_tag == "l1_fast_maxA":
        grid = grid or DEFAULT_UNIT_GRID
        draws = l1_fast_batch(link, law, grid, m, rng)
        params.pop("x0")
    else:
        raise ValueError(f"unknown law tag {law_tag!r}")
    params["noise_scale"] = link.noise_scale
    return LimitBatch(law_tag, draws, grid, params, seed)
