"""Rotationally symmetric metrics g = dr^2 + f(r)^2 g_sphere and their curvature.

A profile stores the warp factor f on a sample grid together with optional
closed-form shape callables (logarithmic derivative S = f'/f and friends).
All geometric quantities of interest reduce to S:

    radial curvature   K_rad = -f''/f = -(S' + S^2)
    distance Laplacian Delta r = (n-1) S
    radial Ricci       Ric(dr,dr) = (n-1) K_rad

and the Riccati trace identity  d/dr(Delta r) + (n-1) S^2 + Ric(dr,dr) = 0
holds exactly; its finite-difference residual is the basic consistency check
for tabulated data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline
from scipy.special import gamma as _gamma
from scipy.special import roots_legendre

from .errors import (
    ComparisonFailureError,
    ConfigError,
    InvalidProfileError,
    ResolutionError,
)

__all__ = [
    "ShapeFns",
    "WarpProfile",
    "CurvatureField",
    "RiccatiBound",
    "ComparisonReport",
    "sphere_area",
    "uniform_grid",
    "euclidean_profile",
    "hyperbolic_profile",
    "cusp_profile",
    "profile_from_shape",
    "curvature_of_profile",
    "bochner_residual",
    "fd_derivative",
    "solve_riccati_bound",
    "hessian_comparison_check",
    "profile_to_json",
    "profile_from_json",
    "register_profile_kind",
]

# sampling must resolve the sin(2r) oscillation scale
MAX_GRID_STEP = math.pi / 20.0
DEFAULT_STEP = math.pi / 40.0


def sphere_area(n: int) -> float:
    """Surface area of the unit (n-1)-sphere in R^n."""
    return 2.0 * math.pi ** (n / 2.0) / _gamma(n / 2.0)


def uniform_grid(r_min: float, r_max: float, step: float = DEFAULT_STEP) -> np.ndarray:
    """Uniform grid r_min + k*step, last node <= r_max (deterministic)."""
    if not (r_max > r_min > 0 or (r_min >= 0 and r_max > r_min)):
        raise ConfigError(f"bad grid range [{r_min}, {r_max}]")
    m = int(math.floor((r_max - r_min) / step + 1e-9))
    return r_min + step * np.arange(m + 1)


@dataclass(frozen=True)
class ShapeFns:
    """Closed-form shape of a profile: S = f'/f and derivatives, log f.

    All callables accept scalars or arrays.  Higher derivatives are optional;
    routines that need them raise ConfigError when absent.
    """

    s: Callable[[np.ndarray], np.ndarray]
    s_prime: Callable[[np.ndarray], np.ndarray]
    log_f: Callable[[np.ndarray], np.ndarray]
    s_second: Callable[[np.ndarray], np.ndarray] | None = None
    s_third: Callable[[np.ndarray], np.ndarray] | None = None


@dataclass(frozen=True, eq=False)
class WarpProfile:
    """Sampled warp factor of g = dr^2 + f(r)^2 g_sphere with metadata.

    grid must be strictly increasing and f strictly positive.  junctions mark
    radii where the profile is glued from pieces (finite smoothness); grid
    nodes never sit exactly on a junction.  shape, when present, provides
    closed-form values valid on [grid[0], r_max] even where arrays stop
    (arrays are capped before exp overflow).
    """

    n: int
    kind: str
    params: Mapping[str, float]
    grid: np.ndarray
    f: np.ndarray
    f_prime: np.ndarray
    f_second: np.ndarray
    r_max: float
    junctions: tuple[float, ...] = ()
    shape: ShapeFns | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.n < 2:
            raise InvalidProfileError(f"need dimension n >= 2, got {self.n}")
        g = np.asarray(self.grid, dtype=float)
        if g.ndim != 1 or len(g) < 8:
            raise InvalidProfileError("grid must be 1-D with at least 8 nodes")
        if not np.all(np.diff(g) > 0):
            raise InvalidProfileError("grid must be strictly increasing")
        if g[0] < 0:
            raise InvalidProfileError("grid must start at a nonnegative radius")
        for name in ("f", "f_prime", "f_second"):
            arr = getattr(self, name)
            if arr.shape != g.shape:
                raise InvalidProfileError(f"{name} shape does not match grid")
        if not np.all(self.f > 0):
            raise InvalidProfileError("warp factor must be strictly positive on the grid")

    @property
    def s_values(self) -> np.ndarray:
        return self.f_prime / self.f

    def segment_slices(self) -> list[slice]:
        """Index ranges of maximal junction-free grid segments."""
        cuts = [0]
        for rj in self.junctions:
            idx = int(np.searchsorted(self.grid, rj))
            if 0 < idx < len(self.grid):
                cuts.append(idx)
        cuts.append(len(self.grid))
        cuts = sorted(set(cuts))
        return [slice(a, b) for a, b in zip(cuts[:-1], cuts[1:]) if b - a > 0]


@dataclass(frozen=True, eq=False)
class CurvatureField:
    """Curvature data of a profile on its grid, plus the trace-identity residual."""

    n: int
    grid: np.ndarray
    s: np.ndarray
    k_rad: np.ndarray
    laplacian_r: np.ndarray
    ricci_rr: np.ndarray
    junctions: tuple[float, ...]
    trace_residual: float


# 7-point first-derivative stencils on a uniform grid (6th order)
_CENTRAL7 = np.array([-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0]) / 60.0
_FORWARD7 = np.array([-147.0, 360.0, -450.0, 400.0, -225.0, 72.0, -10.0]) / 60.0


def _fd_uniform(y: np.ndarray, h: float) -> np.ndarray:
    """6th-order first derivative of samples on a uniform grid."""
    m = len(y)
    if m < 7:
        raise ResolutionError("need at least 7 samples per smooth segment")
    d = np.empty_like(y)
    d[3:-3] = (
        _CENTRAL7[0] * y[:-6]
        + _CENTRAL7[1] * y[1:-5]
        + _CENTRAL7[2] * y[2:-4]
        + _CENTRAL7[4] * y[4:-2]
        + _CENTRAL7[5] * y[5:-1]
        + _CENTRAL7[6] * y[6:]
    )
    for i in range(3):
        d[i] = np.dot(_FORWARD7, y[i : i + 7])
        d[m - 1 - i] = -np.dot(_FORWARD7, y[m - 1 - i :: -1][:7])
    return d / h


def fd_derivative(x: np.ndarray, y: np.ndarray, junctions: tuple[float, ...] = ()) -> np.ndarray:
    """First derivative of sampled data, one-sided at boundaries and junctions.

    The grid must be uniform within each junction-free segment; stencils never
    straddle a junction, so finite smoothness at glue radii does not pollute
    the result.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    out = np.empty_like(y)
    cuts = [0]
    for rj in junctions:
        idx = int(np.searchsorted(x, rj))
        if 0 < idx < len(x):
            cuts.append(idx)
    cuts.append(len(x))
    for a, b in zip(sorted(set(cuts))[:-1], sorted(set(cuts))[1:]):
        xs, ys = x[a:b], y[a:b]
        hs = np.diff(xs)
        h = hs[0]
        if np.max(np.abs(hs - h)) > 1e-9 * h:
            raise ResolutionError("fd_derivative requires uniform spacing within segments")
        out[a:b] = _fd_uniform(ys, h)
    return out


def _check_resolution(grid: np.ndarray) -> None:
    if np.max(np.diff(grid)) > MAX_GRID_STEP * (1 + 1e-12):
        raise ResolutionError(
            f"grid step {np.max(np.diff(grid)):.4g} exceeds the resolution policy "
            f"{MAX_GRID_STEP:.4g}"
        )


def curvature_of_profile(profile: WarpProfile) -> CurvatureField:
    """Radial curvature, Laplacian of r and radial Ricci, with trace residual."""
    _check_resolution(profile.grid)
    n = profile.n
    s = profile.f_prime / profile.f
    k_rad = -profile.f_second / profile.f
    lap = (n - 1) * s
    ric = (n - 1) * k_rad
    fld = CurvatureField(
        n=n,
        grid=profile.grid,
        s=s,
        k_rad=k_rad,
        laplacian_r=lap,
        ricci_rr=ric,
        junctions=profile.junctions,
        trace_residual=0.0,
    )
    breaks = tuple(float(b) for b in profile.params.get("breakpoints", ()))
    res = bochner_residual(fld, shape=profile.shape, breakpoints=breaks)
    object.__setattr__(fld, "trace_residual", res)
    return fld


def bochner_residual(
    fld: CurvatureField,
    *,
    shape: ShapeFns | None = None,
    breakpoints: Sequence[float] = (),
) -> float:
    """Max residual of d/dr(Delta r) + (n-1) S^2 + Ric(dr,dr) = 0 from samples.

    The derivative side is always a finite difference of sampled S (never the
    closed-form S'), so the identity tests the consistency of the tabulated
    pair (S, K_rad).  Differencing acts on r * Delta r and uses
    d(Delta r)/dr = (d(r Delta r)/dr - Delta r) / r: near a smooth pole
    Delta r ~ (n-1)/r is unresolvable on a uniform grid while r * Delta r is
    analytic, so the substitution keeps the stencil error uniformly small
    without excluding any grid points.

    When shape callables are available each smooth piece (between junctions
    and soft breakpoints, where S loses higher derivatives) is resampled on
    its own uniform grid fine enough for the 7-point stencil; otherwise the
    stored grid is differenced directly.
    """
    nm1 = fld.n - 1
    if shape is None:
        dr_lap = fd_derivative(fld.grid, fld.grid * fld.laplacian_r, fld.junctions)
        dlap = (dr_lap - fld.laplacian_r) / fld.grid
        res = dlap + nm1 * fld.s**2 + fld.ricci_rr
        return float(np.max(np.abs(res)))
    edges = np.unique(
        np.concatenate(
            [
                [fld.grid[0], fld.grid[-1]],
                [b for b in fld.junctions if fld.grid[0] < b < fld.grid[-1]],
                [b for b in breakpoints if fld.grid[0] < b < fld.grid[-1]],
            ]
        )
    )
    worst = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        width = b - a
        # open the piece a hair: at the edges S' has one-sided limits and the
        # piecewise dispatch of glued shapes is branch-ambiguous there
        a_in, b_in = a + 1e-9 * width, b - 1e-9 * width
        # subdivide geometrically so power-type behavior near small r and
        # short spline pieces both get steps matched to their local scale
        sub = [a_in]
        while sub[-1] * 10.0 < b_in:
            sub.append(sub[-1] * 10.0)
        sub.append(b_in)
        for alpha, beta in zip(sub[:-1], sub[1:]):
            h = min(DEFAULT_STEP, alpha / 50.0, width / 200.0)
            m = max(11, int(math.ceil((beta - alpha) / h)) + 1)
            x = np.linspace(alpha, beta, m)
            s_x = np.asarray(shape.s(x), dtype=float)
            sp_x = np.asarray(shape.s_prime(x), dtype=float)
            lap = nm1 * s_x
            dlap = (fd_derivative(x, x * lap, ()) - lap) / x
            res = dlap + nm1 * s_x**2 - nm1 * (sp_x + s_x**2)
            worst = max(worst, float(np.max(np.abs(res))))
    return worst


def _gl_cumulative(fn: Callable[[np.ndarray], np.ndarray], nodes: np.ndarray, order: int = 16) -> np.ndarray:
    """Cumulative integral of fn along nodes via per-panel Gauss-Legendre."""
    xg, wg = roots_legendre(order)
    a = nodes[:-1]
    b = nodes[1:]
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    pts = mid[:, None] + half[:, None] * xg[None, :]
    vals = fn(pts.ravel()).reshape(pts.shape)
    panel = half * (vals @ wg)
    out = np.empty(len(nodes))
    out[0] = 0.0
    np.cumsum(panel, out=out[1:])
    return out


def _profile_from_fns(
    *,
    n: int,
    kind: str,
    params: Mapping[str, float],
    grid: np.ndarray,
    shape: ShapeFns,
    junctions: tuple[float, ...] = (),
    r_max: float | None = None,
) -> WarpProfile:
    logf = shape.log_f(grid)
    f = np.exp(logf)
    s = shape.s(grid)
    sp = shape.s_prime(grid)
    return WarpProfile(
        n=n,
        kind=kind,
        params=dict(params),
        grid=grid,
        f=f,
        f_prime=s * f,
        f_second=(sp + s * s) * f,
        r_max=float(r_max if r_max is not None else grid[-1]),
        junctions=junctions,
        shape=shape,
    )


def euclidean_profile(n: int, *, r_min: float = 0.05, r_max: float = 40.0, step: float = DEFAULT_STEP) -> WarpProfile:
    """Flat cap: f(r) = r, curvature 0."""
    grid = uniform_grid(r_min, r_max, step)
    shape = ShapeFns(
        s=lambda r: 1.0 / np.asarray(r, dtype=float),
        s_prime=lambda r: -1.0 / np.asarray(r, dtype=float) ** 2,
        log_f=lambda r: np.log(np.asarray(r, dtype=float)),
        s_second=lambda r: 2.0 / np.asarray(r, dtype=float) ** 3,
        s_third=lambda r: -6.0 / np.asarray(r, dtype=float) ** 4,
    )
    return _profile_from_fns(
        n=n, kind="euclidean", params={"r_min": r_min, "r_max": r_max, "step": step}, grid=grid, shape=shape
    )


def hyperbolic_profile(n: int, *, r_min: float = 0.05, r_max: float = 40.0, step: float = DEFAULT_STEP) -> WarpProfile:
    """Constant curvature -1: f(r) = sinh r."""
    grid = uniform_grid(r_min, r_max, step)

    def _s(r):
        return 1.0 / np.tanh(np.asarray(r, dtype=float))

    shape = ShapeFns(
        s=_s,
        s_prime=lambda r: -1.0 / np.sinh(np.asarray(r, dtype=float)) ** 2,
        log_f=lambda r: np.log(np.sinh(np.asarray(r, dtype=float))),
        s_second=lambda r: 2.0 * np.cosh(r) / np.sinh(np.asarray(r, dtype=float)) ** 3,
        s_third=lambda r: (-4.0 / np.sinh(np.asarray(r, dtype=float)) ** 2 - 6.0 / np.sinh(np.asarray(r, dtype=float)) ** 4),
    )
    return _profile_from_fns(
        n=n, kind="hyperbolic", params={"r_min": r_min, "r_max": r_max, "step": step}, grid=grid, shape=shape
    )


def cusp_profile(n: int, *, r_min: float = 0.05, r_max: float = 40.0, step: float = DEFAULT_STEP) -> WarpProfile:
    """Exponential end: f(r) = e^r, so S is identically 1 and K_rad is -1."""
    grid = uniform_grid(r_min, r_max, step)
    shape = ShapeFns(
        s=lambda r: np.ones_like(np.asarray(r, dtype=float)),
        s_prime=lambda r: np.zeros_like(np.asarray(r, dtype=float)),
        log_f=lambda r: np.asarray(r, dtype=float),
        s_second=lambda r: np.zeros_like(np.asarray(r, dtype=float)),
        s_third=lambda r: np.zeros_like(np.asarray(r, dtype=float)),
    )
    return _profile_from_fns(
        n=n, kind="cusp", params={"r_min": r_min, "r_max": r_max, "step": step}, grid=grid, shape=shape
    )


def profile_from_shape(
    n: int,
    *,
    s: Callable[[np.ndarray], np.ndarray],
    s_prime: Callable[[np.ndarray], np.ndarray],
    grid: np.ndarray,
    log_f: Callable[[np.ndarray], np.ndarray] | None = None,
    s_second: Callable[[np.ndarray], np.ndarray] | None = None,
    s_third: Callable[[np.ndarray], np.ndarray] | None = None,
    kind: str = "tabulated",
    params: Mapping[str, float] | None = None,
    junctions: tuple[float, ...] = (),
    r_max: float | None = None,
) -> WarpProfile:
    """Build a profile from a shape curve S = f'/f.

    When log_f is omitted it is accumulated by Gauss-Legendre quadrature of S
    along a refined grid (normalized so f(grid[0]) = 1) and interpolated with
    a cubic spline; supply an exact log_f whenever one is available.
    """
    grid = np.asarray(grid, dtype=float)
    if log_f is None:
        span = grid[-1] - grid[0]
        dense = np.linspace(grid[0], grid[-1], max(2 * len(grid), int(span / 0.02) + 2))
        acc = _gl_cumulative(lambda x: np.asarray(s(x), dtype=float), dense)
        spl = CubicSpline(dense, acc)

        def log_f(r, _spl=spl):
            return _spl(np.asarray(r, dtype=float))

    shape = ShapeFns(s=s, s_prime=s_prime, log_f=log_f, s_second=s_second, s_third=s_third)
    return _profile_from_fns(
        n=n,
        kind=kind,
        params=dict(params or {}),
        grid=grid,
        shape=shape,
        junctions=junctions,
        r_max=r_max,
    )


@dataclass(frozen=True, eq=False)
class RiccatiBound:
    """Comparison shape curves from one-sided curvature decay bounds.

    f1 solves the Riccati equation with curvature -1 + 2*A1/r (upper curvature
    bound, lower shape bound, started at 0); f2 with curvature -1 - 2*B1/r
    (lower curvature bound, upper shape bound, started at upper_start).
    b1 = 2*B1 records the coefficient in the curvature normalization
    K >= -1 - b1/r used by the threshold predicates.
    """

    a1: float
    b1_half: float
    b1: float
    r0: float
    upper_start: float
    grid: np.ndarray
    f1: np.ndarray
    f2: np.ndarray
    # r^3 |f_i - (1 -+ C_i/r)| samples; note both curves carry a nonzero 1/r^2
    # term (-A1(1+A1)/2 resp. +B1(1-B1)/2), so these grow linearly in r and
    # boundedness is certified against that envelope, not a constant
    asymptotic_residuals: dict = field(default_factory=dict, compare=False, repr=False)


def solve_riccati_bound(
    *,
    a1: float,
    b1_half: float,
    r0: float,
    upper_start: float,
    grid: np.ndarray,
) -> RiccatiBound:
    """Integrate the comparison Riccati equations S' = -S^2 - K(r).

    Preconditions: A1, B1 >= 0 and the upper curvature bound -1 + 2*A1/r must
    be nonpositive at r0 (so f1 does not immediately leave [0, 1]).  A
    comparison curve reaching |f| = 1000 aborts with the blow-up radius.
    """
    if a1 < 0 or b1_half < 0:
        raise ConfigError("decay coefficients A1, B1 must be nonnegative")
    grid = np.asarray(grid, dtype=float)
    if grid[0] < r0 - 1e-12:
        raise ConfigError("grid must start at or after r0")
    if -1.0 + 2.0 * a1 / r0 > 0:
        raise ConfigError(f"upper curvature bound positive at r0={r0}; need r0 >= 2*A1")

    def rhs(r, y):
        k1 = -1.0 + 2.0 * a1 / r
        k2 = -1.0 - 2.0 * b1_half / r
        return [-y[0] * y[0] - k1, -y[1] * y[1] - k2]

    def blow_up(r, y):
        return 1.0e3 - max(abs(y[0]), abs(y[1]))

    blow_up.terminal = True

    sol = solve_ivp(
        rhs,
        (r0, grid[-1]),
        [0.0, float(upper_start)],
        t_eval=grid if abs(grid[0] - r0) < 1e-12 else None,
        rtol=1e-12,
        atol=1e-14,
        method="DOP853",
        events=blow_up,
        dense_output=abs(grid[0] - r0) >= 1e-12,
    )
    if sol.status == 1:
        radius = float(sol.t_events[0][0])
        raise ComparisonFailureError(
            f"comparison solution blew up at r = {radius:.6g}", blow_up_radius=radius
        )
    if abs(grid[0] - r0) < 1e-12:
        f1, f2 = sol.y[0], sol.y[1]
    else:
        vals = sol.sol(grid)
        f1, f2 = vals[0], vals[1]
    residuals = {
        "f1": grid**3 * np.abs(f1 - (1.0 - a1 / grid)),
        "f2": grid**3 * np.abs(f2 - (1.0 + b1_half / grid)),
    }
    return RiccatiBound(
        a1=float(a1),
        b1_half=float(b1_half),
        b1=float(2.0 * b1_half),
        r0=float(r0),
        upper_start=float(upper_start),
        grid=grid,
        asymptotic_residuals=residuals,
        f1=f1,
        f2=f2,
    )


@dataclass(frozen=True)
class ComparisonReport:
    ok: bool
    first_violation_radius: float | None
    which: str | None
    max_lower_gap: float
    max_upper_gap: float


def hessian_comparison_check(
    profile: WarpProfile,
    bound: RiccatiBound,
    *,
    tol: float = 1e-9,
) -> ComparisonReport:
    """Check the shape sandwich f1 <= S <= f2 on the overlap of the grids.

    The bound curves are interpolated onto the profile grid; pointwise slack
    tol absorbs interpolation noise.  Returns the first violating radius (and
    which side failed) when the sandwich breaks.
    """
    lo = max(profile.grid[0], bound.grid[0])
    hi = min(profile.grid[-1], bound.grid[-1])
    mask = (profile.grid >= lo) & (profile.grid <= hi)
    if not np.any(mask):
        raise ConfigError("profile and bound grids do not overlap")
    r = profile.grid[mask]
    s = profile.s_values[mask]
    f1 = CubicSpline(bound.grid, bound.f1)(r)
    f2 = CubicSpline(bound.grid, bound.f2)(r)
    lower_gap = f1 - s
    upper_gap = s - f2
    bad_low = lower_gap > tol
    bad_up = upper_gap > tol
    if np.any(bad_low) or np.any(bad_up):
        idx_low = np.argmax(bad_low) if np.any(bad_low) else len(r)
        idx_up = np.argmax(bad_up) if np.any(bad_up) else len(r)
        if idx_low <= idx_up:
            return ComparisonReport(False, float(r[idx_low]), "lower", float(np.max(lower_gap)), float(np.max(upper_gap)))
        return ComparisonReport(False, float(r[idx_up]), "upper", float(np.max(lower_gap)), float(np.max(upper_gap)))
    return ComparisonReport(True, None, None, float(np.max(lower_gap)), float(np.max(upper_gap)))


# profile (de)serialization; closed-form kinds rebuild from params via this registry
_PROFILE_BUILDERS: dict[str, Callable[..., WarpProfile]] = {}


def register_profile_kind(kind: str, builder: Callable[..., WarpProfile]) -> None:
    _PROFILE_BUILDERS[kind] = builder


register_profile_kind("euclidean", lambda n, **p: euclidean_profile(n, **p))
register_profile_kind("hyperbolic", lambda n, **p: hyperbolic_profile(n, **p))
register_profile_kind("cusp", lambda n, **p: cusp_profile(n, **p))


def profile_to_json(profile: WarpProfile) -> dict:
    """JSON-ready dict.  Closed-form kinds store parameters only."""
    doc: dict = {"n": profile.n, "kind": profile.kind, "r_max": profile.r_max}
    if profile.kind in _PROFILE_BUILDERS:
        doc["params"] = dict(profile.params)
    else:
        doc["params"] = dict(profile.params)
        doc["grid"] = profile.grid
        doc["f"] = profile.f
        doc["f_prime"] = profile.f_prime
        doc["f_second"] = profile.f_second
        doc["junctions"] = list(profile.junctions)
    return doc


def profile_from_json(doc: Mapping) -> WarpProfile:
    kind = doc["kind"]
    n = int(doc["n"])
    if kind in _PROFILE_BUILDERS:
        return _PROFILE_BUILDERS[kind](n, **doc.get("params", {}))
    return WarpProfile(
        n=n,
        kind=kind,
        params=dict(doc.get("params", {})),
        grid=np.asarray(doc["grid"], dtype=float),
        f=np.asarray(doc["f"], dtype=float),
        f_prime=np.asarray(doc["f_prime"], dtype=float),
        f_second=np.asarray(doc["f_second"], dtype=float),
        r_max=float(doc["r_max"]),
        junctions=tuple(doc.get("junctions", ())),
    )
