"""Schrodinger problems -w'' + q w = lam w on the half line.

Provides shooting integration with Wronskian verification, phase-amplitude
(Prufer) decomposition above the essential-spectrum edge, power-law decay
fitting, recovery of the decaying solution of an oscillatory-tail potential
by backward integration, and an embedded-eigenvalue detector based on the
envelope exponent of solutions.

Solutions crossing large angular-momentum barriers overflow float64 (growth
factors beyond e^700), so the core integrator renormalizes the state whenever
it reaches 1e150 and keeps an exact per-sample logarithmic offset ledger;
fits are done on log-amplitudes and never re-exponentiate.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import minimize_scalar

from .channel_reduction import ChannelPotential, decade_window, require_oscillatory
from .errors import (
    ConfigError,
    DetectorRefusalError,
    NoDecayingSolutionError,
    SingularOriginError,
    TwoRunMismatchError,
    WarpspecError,
)

__all__ = [
    "ShootingResult",
    "DecayFit",
    "EigenDetection",
    "ChannelScanReport",
    "integrate_schrodinger",
    "prufer_series",
    "fit_power_decay",
    "frobenius_init",
    "decaying_solution",
    "detect_embedded_eigenvalue",
    "scan_channels",
    "reversibility_check",
    "synthetic_channel",
    "fired_detections",
]

_MAX_STEP = math.pi / 10.0
_CAP_LOG = math.log(1e150)


@dataclass(frozen=True, eq=False)
class ShootingResult:
    """Solution samples on an ascending grid.

    When the integration was renormalized, w and w_prime hold rescaled values
    and log_offset the per-sample logarithm of the removed factor, so the true
    solution is w * exp(log_offset).  amplitude/phase are the Prufer data
    rho = hypot(w, w'/kappa), theta = atan2(kappa w, w') for lam above the
    potential limit (None otherwise); amplitude is in rescaled units too.
    """

    x: np.ndarray
    w: np.ndarray
    w_prime: np.ndarray
    lam: float
    direction: str
    kappa: float | None = None
    amplitude: np.ndarray | None = None
    phase: np.ndarray | None = None
    log_offset: np.ndarray | None = None
    wronskian_drift: float | None = None
    meta: dict = field(default_factory=dict, compare=False, repr=False)

    def log_amplitude(self) -> np.ndarray:
        """log of the true envelope, offsets folded back in."""
        if self.amplitude is None:
            raise ConfigError("no phase-amplitude data on this result")
        la = np.log(self.amplitude)
        if self.log_offset is not None:
            la = la + self.log_offset
        return la


@dataclass(frozen=True)
class DecayFit:
    """Least-squares power law |values| ~ C x^exponent over a log-log window."""

    exponent: float
    stderr: float
    intercept: float
    window: tuple[float, float]
    n_samples: int


@dataclass(frozen=True, eq=False)
class EigenDetection:
    """Verdict for one spectral grid point of one channel."""

    j: int
    lam: float
    verdict: bool
    envelope_exponent: float
    envelope_stderr: float
    integrand_exponent: float
    refined_lam: float | None = None
    refined_exponent: float | None = None
    evidence: dict = field(default_factory=dict, compare=False, repr=False)


@dataclass(frozen=True, eq=False)
class ChannelScanReport:
    j: int
    lam_sphere: float
    multiplicity: int
    detections: list[EigenDetection]
    wronskian_drift: float
    k_eff: float | None


def _loglog_fit(logx: np.ndarray, logy: np.ndarray) -> tuple[float, float, float]:
    """Slope, stderr of slope, intercept for logy ~ slope*logx + intercept."""
    design = np.column_stack([logx, np.ones_like(logx)])
    coef, *_ = np.linalg.lstsq(design, logy, rcond=None)
    res = logy - design @ coef
    dof = max(len(logx) - 2, 1)
    sigma2 = float(res @ res) / dof
    cov00 = sigma2 * np.linalg.inv(design.T @ design)[0, 0]
    return float(coef[0]), float(math.sqrt(max(cov00, 0.0))), float(coef[1])


def fit_power_decay(
    x: np.ndarray,
    values: np.ndarray,
    *,
    window: tuple[float, float],
    min_samples: int = 50,
) -> DecayFit:
    """Fit |values| ~ C x^e on a window spanning at least one decade."""
    x = np.asarray(x, dtype=float)
    values = np.asarray(values, dtype=float)
    mask = decade_window(x, window[0], window[1], min_samples=min_samples)
    xs = x[mask]
    ys = np.abs(values[mask])
    if np.any(ys <= 0):
        raise ConfigError("fit_power_decay needs nonzero values; fit log data directly instead")
    slope, stderr, intercept = _loglog_fit(np.log(xs), np.log(ys))
    return DecayFit(slope, stderr, intercept, (float(xs[0]), float(xs[-1])), int(len(xs)))


def frobenius_init(*, s: float, q_reg: float, lam: float, x0: float) -> tuple[float, float]:
    """Series start w = x^s (1 + beta x^2) for q ~ s(s-1)/x^2 + q_reg near 0.

    beta = (q_reg - lam) / (4 s + 2) is the first regular-series coefficient;
    returns (w(x0), w'(x0)).
    """
    beta = (q_reg - lam) / (4.0 * s + 2.0)
    w = x0**s * (1.0 + beta * x0 * x0)
    wp = s * x0 ** (s - 1.0) + (s + 2.0) * beta * x0 ** (s + 1.0)
    return float(w), float(wp)


def _q_callable(q) -> Callable[[float], float]:
    if isinstance(q, ChannelPotential):
        return q.q_fn
    if callable(q):
        return q
    raise ConfigError("q must be a ChannelPotential or a callable")


def _renorm_integrate(
    q_fn: Callable[[float], float],
    lams: np.ndarray,
    y0: np.ndarray,
    x0: float,
    x1: float,
    t_eval: np.ndarray,
    *,
    rtol: float = 1e-10,
    atol: float = 1e-300,
    max_step: float = _MAX_STEP,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Integrate w_i'' = (q - lam_i) w_i for all lam_i at once with rescaling.

    Whenever max|y| reaches 1e150 the whole state is divided by that maximum
    (a single common factor keeps the linear system exact) and the log of the
    factor is added to the offset ledger.  Returns (x ascending, y of shape
    (2, M, K) rescaled, offsets of shape (K,)).
    """
    lams = np.atleast_1d(np.asarray(lams, dtype=float))
    m = len(lams)
    forward = x1 > x0

    def rhs(x, y):
        y = y.reshape(2, m)
        return np.concatenate([y[1], (q_fn(x) - lams) * y[0]])

    def too_big(x, y):
        mx = np.max(np.abs(y))
        return _CAP_LOG - (math.log(mx) if mx > 0 else -1.0)

    too_big.terminal = True

    t_eval = np.asarray(t_eval, dtype=float)
    t_eval = np.sort(t_eval) if forward else np.sort(t_eval)[::-1]
    y_cur = np.asarray(y0, dtype=float).reshape(-1).copy()
    t_cur = float(x0)
    offset = 0.0
    mx0 = np.max(np.abs(y_cur))
    if mx0 > 1e100:
        y_cur /= mx0
        offset += math.log(mx0)

    ts: list[np.ndarray] = []
    ys: list[np.ndarray] = []
    offs: list[np.ndarray] = []
    while True:
        if forward:
            mask = (t_eval > t_cur) & (t_eval <= x1)
        else:
            mask = (t_eval < t_cur) & (t_eval >= x1)
        te = t_eval[mask]
        sol = solve_ivp(
            rhs,
            (t_cur, x1),
            y_cur,
            method="DOP853",
            rtol=rtol,
            atol=atol,
            max_step=max_step,
            t_eval=te if len(te) else None,
            events=too_big,
        )
        t_arr = np.asarray(sol.t, dtype=float)
        if sol.status == -1:
            raise WarpspecError(f"integration failed at x ~ {t_arr[-1] if t_arr.size else t_cur}: {sol.message}")
        if len(te) and t_arr.size:
            ts.append(t_arr)
            ys.append(np.asarray(sol.y, dtype=float))
            offs.append(np.full(t_arr.size, offset))
        if sol.status == 1:
            t_ev = float(sol.t_events[0][0])
            y_ev = np.asarray(sol.y_events[0][0], dtype=float)
            scale = np.max(np.abs(y_ev))
            y_cur = y_ev / scale
            offset += math.log(scale)
            t_cur = t_ev
            if (forward and t_cur >= x1) or (not forward and t_cur <= x1):
                break
            continue
        break

    if not ts:
        raise WarpspecError("no requested sample points were reached")
    x_all = np.concatenate(ts)
    y_all = np.concatenate(ys, axis=1).reshape(2, m, -1)
    off_all = np.concatenate(offs)
    if not forward:
        x_all = x_all[::-1]
        y_all = y_all[:, :, ::-1]
        off_all = off_all[::-1]
    return x_all, y_all, off_all


def integrate_schrodinger(
    q,
    lam: float,
    *,
    span: tuple[float, float],
    init: tuple[float, float],
    t_eval: np.ndarray | None = None,
    q_limit: float | None = None,
    companion: bool = False,
    rtol: float = 1e-10,
    atol: float = 1e-13,
    max_step: float = _MAX_STEP,
) -> ShootingResult:
    """Shooting integration of w'' = (q(x) - lam) w over span = (start, end).

    With companion=True a second, independent solution is propagated alongside
    and the relative Wronskian drift (measured against the local bilinear
    scale |w z'| + |z w'|) is recorded.  Raises SingularOriginError when the
    start point sits inside an x^-2 singular region; use frobenius_init and a
    start point outside instead.
    """
    q_fn = _q_callable(q)
    x0, x1 = float(span[0]), float(span[1])
    if min(x0, x1) <= 0:
        raise ConfigError("span must stay within x > 0")
    if x0 < 0.02 and abs(q_fn(x0)) * x0 * x0 > 0.05:
        raise SingularOriginError(
            f"q(x) ~ s(s-1)/x^2 is singular at start {x0}; seed with frobenius_init"
        )
    forward = x1 > x0
    if t_eval is None:
        npts = max(int(abs(x1 - x0) / (math.pi / 40.0)), 16)
        t_eval = np.linspace(x0, x1, npts + 1)
    t_eval = np.asarray(t_eval, dtype=float)
    te = np.sort(t_eval) if forward else np.sort(t_eval)[::-1]

    w0, wp0 = float(init[0]), float(init[1])
    if companion:
        nu = math.hypot(w0, wp0)
        if nu == 0:
            raise ConfigError("companion run needs a nonzero initial condition")
        y0 = [w0, -wp0 / nu, wp0, w0 / nu]

        def rhs(x, y):
            qq = q_fn(x) - lam
            return [y[2], y[3], qq * y[0], qq * y[1]]

    else:
        y0 = [w0, wp0]

        def rhs(x, y):
            return [y[1], (q_fn(x) - lam) * y[0]]

    sol = solve_ivp(rhs, (x0, x1), y0, method="DOP853", rtol=rtol, atol=atol, max_step=max_step, t_eval=te)
    if not sol.success:
        raise WarpspecError(f"integration failed: {sol.message}")
    x = sol.t
    drift = None
    if companion:
        w, z, wp, zp = sol.y
        w0_, z0_, wp0_, zp0_ = y0
        wr0 = w0_ * zp0_ - z0_ * wp0_
        wr = w * zp - z * wp
        scale = np.abs(w * zp) + np.abs(z * wp) + abs(wr0)
        drift = float(np.max(np.abs(wr - wr0) / scale))
    else:
        w, wp = sol.y
    if not forward:
        x, w, wp = x[::-1], w[::-1], wp[::-1]

    amplitude = phase = None
    kappa = None
    if q_limit is not None and lam > q_limit:
        kappa = math.sqrt(lam - q_limit)
        amplitude = np.hypot(w, wp / kappa)
        phase = np.arctan2(kappa * w, wp)
    return ShootingResult(
        x=x,
        w=w,
        w_prime=wp,
        lam=float(lam),
        direction="forward" if forward else "backward",
        kappa=kappa,
        amplitude=amplitude,
        phase=phase,
        wronskian_drift=drift,
    )


def prufer_series(result: ShootingResult, *, q_limit: float) -> ShootingResult:
    """Attach phase-amplitude data for lam above the essential-spectrum edge."""
    kappa = require_oscillatory(result.lam, q_limit)
    amplitude = np.hypot(result.w, result.w_prime / kappa)
    phase = np.arctan2(kappa * result.w, result.w_prime)
    return ShootingResult(
        x=result.x,
        w=result.w,
        w_prime=result.w_prime,
        lam=result.lam,
        direction=result.direction,
        kappa=kappa,
        amplitude=amplitude,
        phase=phase,
        log_offset=result.log_offset,
        wronskian_drift=result.wronskian_drift,
        meta=dict(result.meta),
    )


def reversibility_check(
    q,
    lam: float,
    *,
    span: tuple[float, float],
    init: tuple[float, float],
    rtol: float = 1e-10,
    atol: float = 1e-13,
) -> float:
    """Integrate forward then back; relative error of the recovered start state."""
    q_fn = _q_callable(q)
    fwd = integrate_schrodinger(q_fn, lam, span=span, init=init, rtol=rtol, atol=atol)
    end = (fwd.w[-1], fwd.w_prime[-1]) if span[1] > span[0] else (fwd.w[0], fwd.w_prime[0])
    back = integrate_schrodinger(q_fn, lam, span=(span[1], span[0]), init=end, rtol=rtol, atol=atol)
    rec = (back.w[0], back.w_prime[0]) if span[1] > span[0] else (back.w[-1], back.w_prime[-1])
    scale = max(abs(init[0]), abs(init[1]), 1e-300)
    return float(max(abs(rec[0] - init[0]), abs(rec[1] - init[1])) / scale)


def synthetic_channel(
    *,
    k_eff: float,
    limit: float = 0.0,
    phase: float = 0.0,
    remainder_fn: Callable[[np.ndarray], np.ndarray] | None = None,
    x_min: float = 1.0,
    x_max: float = 2000.0,
    n: int = 3,
    j: int = 0,
) -> ChannelPotential:
    """Channel potential q = limit + k_eff sin(2x + phase)/x + remainder.

    For detector and decay studies independent of any warp profile.  The tail
    fit metadata is computed from the samples exactly as channel_potential
    does, so the detector preconditions are exercised honestly.
    """

    def q_fn(x):
        x = np.asarray(x, dtype=float)
        out = limit + k_eff * np.sin(2.0 * x + phase) / x
        if remainder_fn is not None:
            out = out + remainder_fn(x)
        return out

    grid = x_min + (math.pi / 40.0) * np.arange(int((min(x_max, 600.0) - x_min) / (math.pi / 40.0)) + 1)
    q = q_fn(grid)
    from .channel_reduction import _block_max_slope, _fit_oscillation

    lo = max(50.0, 0.75 * grid[-1])
    mask = grid >= lo
    xs, ys = grid[mask], grid[mask] * (q[mask] - limit)
    amp, phi, _ = _fit_oscillation(xs, ys)
    rem = ys - amp * np.sin(2.0 * xs + phi)
    if np.max(np.abs(rem)) <= 1e-10 * max(amp, 1.0):
        slope = -math.inf
    else:
        slope = _block_max_slope(xs, rem)
    return ChannelPotential(
        n=n,
        j=j,
        lam_sphere=0.0,
        limit=float(limit),
        grid=grid,
        q=q,
        q_fn=q_fn,
        x_min=float(x_min),
        x_max=float(x_max),
        origin_exponent=None,
        k_eff=float(amp),
        phase=float(phi),
        remainder_slope=slope,
        fit_window=(float(xs[0]), float(xs[-1])),
    )


def _decaying_seed(k_eff: float, phase: float, kappa: float, r: float) -> tuple[float, float]:
    """Initial data at radius r selecting the square-integrable direction.

    The envelope equation of a resonant x^-1 sinusoid pins the decaying
    solution's phase to (phase + pi)/2 (mod pi); the derivative carries the
    first-order envelope correction -k_eff/(4 r).
    """
    phi_dec = 0.5 * (phase + math.pi) + math.pi
    th = kappa * r + phi_dec
    w = math.sin(th)
    wp = kappa * math.cos(th) - (k_eff / (4.0 * r)) * math.sin(th)
    return w, wp


def decaying_solution(
    q: ChannelPotential,
    lam: float,
    *,
    r_anchor: float = 2000.0,
    x_end: float = 1.0,
    step: float = math.pi / 40.0,
    verify: bool = True,
    fit_window: tuple[float, float] | None = None,
    rtol: float = 1e-11,
) -> ShootingResult:
    """Recover the solution decaying at infinity by backward integration.

    Above the potential limit this requires a resonant oscillatory tail with
    |k_eff| > 2 (otherwise no square-integrable solution exists and
    NoDecayingSolutionError is raised); the expected envelope is x^(-k_eff/4)
    and a power-law fit over fit_window (default [r_anchor/20, r_anchor/2])
    is stored in meta["decay_fit"].  Below the limit (spectral gap) any lam
    works and meta["gap_rate"] holds the fitted exponential rate of log rho
    against x, expected -sqrt(limit - lam).

    With verify=True the run is repeated from anchor 2 * r_anchor on the same
    grid and the two solutions are compared after least-squares rescaling;
    disagreement beyond 1e-4 raises TwoRunMismatchError and the achieved
    agreement lands in meta["two_run_agreement"].
    """
    if not isinstance(q, ChannelPotential):
        raise ConfigError("decaying_solution needs a ChannelPotential")
    grid = x_end + step * np.arange(int((r_anchor - x_end) / step + 1e-9) + 1)

    if lam < q.limit:
        kg = math.sqrt(q.limit - lam)
        seed = (1.0, -kg)
        kappa = None
    else:
        kappa = require_oscillatory(lam, q.limit)
        if q.k_eff is None:
            raise NoDecayingSolutionError("potential tail is not a fitted x^-1 sinusoid")
        if q.k_eff <= 2.0:
            raise NoDecayingSolutionError(
                f"k_eff = {q.k_eff:.6g} <= 2: envelope x^(-k_eff/4) is not square integrable"
            )
        if abs(lam - (q.limit + 1.0)) > 0.05:
            raise NoDecayingSolutionError(
                f"lam = {lam} is detuned from the resonance at {q.limit + 1.0}"
            )
        seed = _decaying_seed(q.k_eff, q.phase, kappa, r_anchor)

    def run(anchor: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        g = grid[grid <= anchor + 1e-12]
        s = seed if anchor == r_anchor else _reseed(anchor)
        y0 = np.array([[s[0]], [s[1]]])
        x, y, off = _renorm_integrate(q.q_fn, np.array([lam]), y0, anchor, x_end, g, rtol=rtol)
        return x, y[:, 0, :], off

    def _reseed(anchor: float) -> tuple[float, float]:
        if lam < q.limit:
            return seed
        return _decaying_seed(q.k_eff, q.phase, kappa, anchor)

    x, y, off = run(r_anchor)
    w, wp = y[0], y[1]

    agreement = None
    if verify:
        grid2 = x_end + step * np.arange(int((2.0 * r_anchor - x_end) / step + 1e-9) + 1)
        y0b = np.array([[_reseed(2.0 * r_anchor)[0]], [_reseed(2.0 * r_anchor)[1]]])
        xb, yb, offb = _renorm_integrate(q.q_fn, np.array([lam]), y0b, 2.0 * r_anchor, x_end, grid2, rtol=rtol)
        m = min(len(x), len(xb))
        if not np.allclose(x[:m], xb[:m], rtol=0, atol=1e-9):
            raise WarpspecError("two-run grids failed to align")
        if lam > q.limit:
            # no rescaling happens in the oscillatory regime; compare raw values
            wb = yb[0, 0, :m]
            sc = float(np.dot(wb, w[:m]) / np.dot(wb, wb))
            agreement = float(np.max(np.abs(sc * wb - w[:m])) / np.max(np.abs(w[:m])))
        else:
            # exponential regime: solutions differ by a scale factor only, so the
            # log envelopes (offsets folded in) must agree up to a constant
            kg = math.sqrt(q.limit - lam)
            la1 = np.log(np.hypot(w[:m], wp[:m] / kg)) + off[:m]
            la2 = np.log(np.hypot(yb[0, 0, :m], yb[1, 0, :m] / kg)) + offb[:m]
            delta = la1 - la2
            agreement = float(np.max(np.abs(delta - np.mean(delta))))
        if agreement > 1e-4:
            raise TwoRunMismatchError(
                f"backward runs from {r_anchor} and {2 * r_anchor} disagree by {agreement:.3g}"
            )

    res = ShootingResult(
        x=x,
        w=w,
        w_prime=wp,
        lam=float(lam),
        direction="backward",
        log_offset=off if np.max(np.abs(off)) > 0 else None,
    )
    if agreement is not None:
        res.meta["two_run_agreement"] = agreement
    if lam > q.limit:
        res = prufer_series(res, q_limit=q.limit)
        win = fit_window if fit_window is not None else (r_anchor / 20.0, r_anchor / 2.0)
        res.meta["decay_fit"] = fit_power_decay(res.x, res.amplitude, window=win)
    else:
        kg = math.sqrt(q.limit - lam)
        la = np.log(np.hypot(w, wp / kg)) + off
        lo = max(2.0 * x_end, 2.0)
        hi = r_anchor / 2.0
        mask = (x >= lo) & (x <= hi) & np.isfinite(la)
        slope, stderr, _ = _loglog_fit(x[mask], la[mask])
        res.meta["gap_rate"] = slope
        res.meta["gap_rate_stderr"] = stderr
    return res


def _detector_preflight(q: ChannelPotential, lambda_grid: np.ndarray) -> None:
    if not isinstance(q, ChannelPotential):
        raise DetectorRefusalError("detector needs a ChannelPotential with tail metadata")
    if q.k_eff is None:
        raise DetectorRefusalError(
            "tail of the potential is not a fitted x^-1 sinusoid; refusing to classify"
        )
    if q.remainder_slope is None or q.remainder_slope > -1.05:
        raise DetectorRefusalError(
            f"tail remainder decays like x^{q.remainder_slope}; need O(x^-1-eps) "
            "for envelope classification to be sound"
        )
    if np.any(np.asarray(lambda_grid) <= q.limit):
        raise ConfigError("lambda grid must stay above the essential-spectrum edge")


def _forward_start(q: ChannelPotential, lam: float | np.ndarray) -> tuple[float, np.ndarray]:
    """Start point and state column(s) for the regular solution at the origin."""
    lams = np.atleast_1d(np.asarray(lam, dtype=float))
    if q.origin_exponent is not None:
        s = q.origin_exponent
        x0 = 1e-3 if s <= 1.2 else 0.3
        q_reg = float(q.q_fn(x0)) - s * (s - 1.0) / (x0 * x0)
        cols = np.array([frobenius_init(s=s, q_reg=q_reg, lam=l, x0=x0) for l in lams]).T
        return x0, cols
    x0 = q.x_min
    if abs(q.q_fn(x0)) * x0 * x0 > 0.05 and x0 < 0.02:
        raise SingularOriginError("potential singular at its left endpoint; no regular start known")
    cols = np.tile(np.array([[0.0], [1.0]]), (1, len(lams)))
    return x0, cols


def _probe_exponents(
    q: ChannelPotential,
    lams: np.ndarray,
    *,
    origin_bc: str | None,
    r_max: float,
    rtol: float,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Envelope exponent, its stderr, and integrand exponent for each lam."""
    lams = np.atleast_1d(np.asarray(lams, dtype=float))
    t_eval = np.geomspace(r_max / 20.0, r_max, 100)
    if origin_bc == "regular":
        x0, cols = _forward_start(q, lams)
        x, y, off = _renorm_integrate(q.q_fn, lams, cols, x0, r_max, t_eval, rtol=rtol)
    elif origin_bc is None:
        cols = np.empty((2, len(lams)))
        for i, l in enumerate(lams):
            kap = math.sqrt(l - q.limit)
            cols[:, i] = _decaying_seed(q.k_eff, q.phase, kap, r_max)
        x, y, off = _renorm_integrate(q.q_fn, lams, cols, r_max, max(1.0, q.x_min), t_eval, rtol=rtol)
    else:
        raise ConfigError(f"origin_bc must be 'regular' or None, got {origin_bc!r}")

    kaps = np.sqrt(lams - q.limit)
    env = np.empty(len(lams))
    env_se = np.empty(len(lams))
    integ = np.empty(len(lams))
    lx = np.log(x)
    env_mask = x >= r_max / 10.0
    t_hi = r_max / 8.0
    for i in range(len(lams)):
        la = np.log(np.hypot(y[0, i], y[1, i] / kaps[i])) + off
        s, se, _ = _loglog_fit(lx[env_mask], la[env_mask])
        env[i], env_se[i] = s, se
        # partial integrals of the period-averaged integrand rho^2 / 2,
        # accumulated from the far end; shift-invariant in the offsets
        la2 = 2.0 * (la - np.max(la))
        rho2 = np.exp(la2)
        seg = 0.5 * np.diff(x) * (rho2[1:] + rho2[:-1]) * 0.5
        tail = np.concatenate([np.cumsum(seg[::-1])[::-1], [0.0]])
        tmask = (x <= t_hi) & (tail > 0)
        st, _, _ = _loglog_fit(lx[tmask], np.log(tail[tmask]))
        integ[i] = st - 1.0
    return env, env_se, integ


def detect_embedded_eigenvalue(
    q: ChannelPotential,
    lambda_grid: np.ndarray,
    *,
    origin_bc: str | None = None,
    r_max: float = 2000.0,
    envelope_threshold: float = -0.55,
    integrand_threshold: float = -1.1,
    refine: bool = True,
    rtol: float = 1e-10,
) -> list[EigenDetection]:
    """Classify each lam on the grid as embedded eigenvalue or not.

    origin_bc = "regular" probes the solution selected by the regular boundary
    condition at the origin (an eigenvalue fires only when that solution is
    itself square integrable); origin_bc = None probes for the existence of a
    square-integrable solution by seeding the decaying direction at r_max and
    integrating backward.  A point fires when the envelope exponent and the
    tail-integrand exponent both clear their thresholds; the top fired point
    is then refined by golden-section search on the envelope exponent.

    The detector refuses potentials without a verified x^-1 sinusoid tail
    (k_eff absent, or the fit remainder not provably O(x^-1-eps)).
    """
    lambda_grid = np.atleast_1d(np.asarray(lambda_grid, dtype=float))
    _detector_preflight(q, lambda_grid)
    env, env_se, integ = _probe_exponents(q, lambda_grid, origin_bc=origin_bc, r_max=r_max, rtol=rtol)
    fired = (env < envelope_threshold) & (integ < integrand_threshold)

    detections: list[EigenDetection] = []
    refine_target = None
    if refine and np.any(fired):
        refine_target = int(np.argmin(np.where(fired, env, np.inf)))

    for i, lam in enumerate(lambda_grid):
        refined_lam = refined_exp = None
        if refine_target is not None and i == refine_target:
            h = float(lambda_grid[1] - lambda_grid[0]) if len(lambda_grid) > 1 else 1e-3

            def objective(l):
                e, _, _ = _probe_exponents(q, np.array([l]), origin_bc=origin_bc, r_max=r_max, rtol=rtol)
                return float(e[0])

            try:
                opt = minimize_scalar(
                    objective,
                    bracket=(lam - h, lam, lam + h),
                    method="golden",
                    options={"xtol": 1e-7, "maxiter": 60},
                )
                refined_lam = float(opt.x)
                refined_exp = float(opt.fun)
            except (ValueError, WarpspecError):
                refined_lam = float(lam)
                refined_exp = float(env[i])
        detections.append(
            EigenDetection(
                j=q.j,
                lam=float(lam),
                verdict=bool(fired[i]),
                envelope_exponent=float(env[i]),
                envelope_stderr=float(env_se[i]),
                integrand_exponent=float(integ[i]),
                refined_lam=refined_lam,
                refined_exponent=refined_exp,
                evidence={"k_eff": q.k_eff, "origin_bc": origin_bc, "r_max": r_max},
            )
        )
    return detections


def fired_detections(detections: Sequence[EigenDetection]) -> list[EigenDetection]:
    return [d for d in detections if d.verdict]


def _channel_wronskian_drift(q: ChannelPotential, lam: float, r_max: float, rtol: float) -> float:
    """Relative Wronskian drift of an independent pair across the whole range.

    Measured against the local bilinear scale at every sample, which stays
    meaningful through angular-momentum barriers where the conserved value is
    exponentially small compared to the solutions.
    """
    x0, col = _forward_start(q, np.array([lam]))
    w0, wp0 = float(col[0, 0]), float(col[1, 0])
    nu = math.hypot(w0, wp0)
    y0 = np.array([[w0, -wp0 / nu], [wp0, w0 / nu]])
    t_eval = np.geomspace(max(1.0, 2.0 * x0), r_max, 120)
    x, y, off = _renorm_integrate(q.q_fn, np.array([lam, lam]), y0, x0, r_max, t_eval, rtol=rtol)
    w, wp = y[0, 0], y[1, 0]
    z, zp = y[0, 1], y[1, 1]
    wr = w * zp - z * wp
    wr0 = (w0 * w0 + wp0 * wp0) / nu
    expected = wr0 * np.exp(-2.0 * off)
    scale = np.abs(w * zp) + np.abs(z * wp) + np.abs(expected)
    return float(np.max(np.abs(wr - expected) / scale))


def scan_channels(
    channels: Sequence[ChannelPotential],
    lambda_grid: np.ndarray,
    *,
    origin_bc: str | None = "regular",
    r_max: float = 2000.0,
    refine: bool = True,
    rtol: float = 1e-10,
    threads: int = 1,
) -> list[ChannelScanReport]:
    """Run the detector over several channels, optionally on a thread pool.

    Results are assembled in channel order regardless of completion order, so
    output is independent of threads.  Each channel also records the relative
    Wronskian drift of an independent solution pair at the middle grid energy.
    """
    lambda_grid = np.atleast_1d(np.asarray(lambda_grid, dtype=float))

    def work(ch: ChannelPotential) -> ChannelScanReport:
        dets = detect_embedded_eigenvalue(
            ch, lambda_grid, origin_bc=origin_bc, r_max=r_max, refine=refine, rtol=rtol
        )
        lam_mid = float(lambda_grid[len(lambda_grid) // 2])
        drift = _channel_wronskian_drift(ch, lam_mid, r_max, rtol)
        from .channel_reduction import sphere_multiplicity

        return ChannelScanReport(
            j=ch.j,
            lam_sphere=ch.lam_sphere,
            multiplicity=sphere_multiplicity(ch.n, ch.j),
            detections=dets,
            wronskian_drift=drift,
            k_eff=ch.k_eff,
        )

    if threads > 1 and len(channels) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            reports = list(pool.map(work, channels))
    else:
        reports = [work(ch) for ch in channels]
    return reports
