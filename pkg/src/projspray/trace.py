"""Fixed-step integration of sprays and scalar equations, plus trace
post-processing: circle fitting, arc-length resampling, curvature sampling.

Classical RK4 throughout; trajectories here are short and smooth, and the
fixed step keeps convergence-order measurements clean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .finsler import Rectangle, Spray
from .jets import EvaluationError, ScalarField
from .randers import CurveSample, MetricField

__all__ = [
    "CircleFit",
    "DegenerateFitError",
    "DomainError",
    "GeodesicTrace",
    "OdeCurve",
    "circle_fit",
    "curve_samples",
    "integrate_flow",
    "integrate_ode",
    "integrate_spray",
    "unit_speed_resample",
    "winding_orientation",
]


class DomainError(ValueError):
    """Initial data outside the declared domain."""


class DegenerateFitError(ValueError):
    """Samples do not determine a circle."""


@dataclass(frozen=True)
class GeodesicTrace:
    t: np.ndarray
    xy: np.ndarray  # shape (n, 2)
    uv: np.ndarray  # shape (n, 2)
    method: str = "rk4"
    step: float = 0.0
    domain_exit: bool = False

    def __len__(self):
        return len(self.t)

    def state(self, i: int):
        return (*self.xy[i], *self.uv[i])


@dataclass(frozen=True)
class OdeCurve:
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    blown_up: bool = False


def _rk4_step(rhs, state, h):
    k1 = rhs(state)
    k2 = rhs(state + 0.5 * h * k1)
    k3 = rhs(state + 0.5 * h * k2)
    k4 = rhs(state + h * k3)
    return state + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate_flow(rhs, init, tmax: float, step: float, stop=None):
    """Generic fixed-step RK4 on a 4-state; stops early when ``stop`` fires."""
    n = int(round(tmax / step))
    states = [np.asarray(init, dtype=float)]
    times = [0.0]
    exited = False
    for i in range(n):
        try:
            nxt = _rk4_step(rhs, states[-1], step)
        except EvaluationError:
            exited = True
            break
        if not np.all(np.isfinite(nxt)) or (stop is not None and stop(nxt)):
            exited = True
            break
        states.append(nxt)
        times.append((i + 1) * step)
    return np.array(times), np.array(states), exited


def integrate_spray(
    spray: Spray, init: Sequence[float], tmax: float, step: float
) -> GeodesicTrace:
    """Integrate (x, y, u, v)' = (u, v, -2 G1, -2 G2) from ``init``.

    Halts with the domain-exit flag when the base point leaves the spray's
    rectangle or the fiber norm collapses below 1e-12.
    """
    x0, y0, u0, v0 = (float(c) for c in init)
    if not spray.domain.contains(x0, y0):
        raise DomainError(f"initial base point ({x0}, {y0}) outside the spray domain")
    if u0 * u0 + v0 * v0 <= 1e-24:
        raise DomainError("initial fiber vector is (numerically) zero")

    def rhs(state):
        x, y, u, v = state
        g1, g2 = spray.coefficients(float(x), float(y), float(u), float(v))
        return np.array([u, v, -2.0 * float(g1), -2.0 * float(g2)])

    def stop(state):
        x, y, u, v = state
        return (not spray.domain.contains(x, y)) or (u * u + v * v < 1e-24)

    times, states, exited = integrate_flow(rhs, (x0, y0, u0, v0), tmax, step, stop)
    return GeodesicTrace(
        t=times,
        xy=states[:, :2],
        uv=states[:, 2:],
        step=step,
        domain_exit=exited,
    )


def integrate_ode(
    f: ScalarField, init: Sequence[float], xmax: float, step: float, zmax: float = 1e6
) -> OdeCurve:
    """Integrate y'' = f(x, y, y') from (x0, y0, z0) up to xmax."""
    x0, y0, z0 = (float(c) for c in init)
    n = int(round((xmax - x0) / step))
    xs, ys, zs = [x0], [y0], [z0]
    blown = False
    for i in range(n):
        x = xs[-1]
        state = np.array([ys[-1], zs[-1]])

        def rhs_at(xx):
            def rhs(s):
                return np.array([s[1], float(f(xx, float(s[0]), float(s[1])))])

            return rhs

        k1 = rhs_at(x)(state)
        k2 = rhs_at(x + 0.5 * step)(state + 0.5 * step * k1)
        k3 = rhs_at(x + 0.5 * step)(state + 0.5 * step * k2)
        k4 = rhs_at(x + step)(state + step * k3)
        nxt = state + (step / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(nxt)) or abs(nxt[1]) > zmax:
            blown = True
            break
        xs.append(x + step)
        ys.append(float(nxt[0]))
        zs.append(float(nxt[1]))
    return OdeCurve(np.array(xs), np.array(ys), np.array(zs), blown_up=blown)


@dataclass(frozen=True)
class CircleFit:
    center: tuple
    radius: float
    rms: float


def circle_fit(trace) -> CircleFit:
    """Algebraic least-squares circle through the base points of a trace.

    Minimizes sum (x^2 + y^2 + D x + E y + F)^2, then reports the rms of
    the geometric radius defect.  Collinear input raises.
    """
    xy = trace.xy if isinstance(trace, GeodesicTrace) else np.asarray(trace, dtype=float)
    if len(xy) < 10:
        raise DegenerateFitError("need at least 10 samples for a circle fit")
    centered = xy - xy.mean(axis=0)
    svals = np.linalg.svd(centered, compute_uv=False)
    if svals[1] <= 1e-9 * max(svals[0], 1.0):
        raise DegenerateFitError("samples are collinear")
    A = np.column_stack([xy[:, 0], xy[:, 1], np.ones(len(xy))])
    b = -(xy[:, 0] ** 2 + xy[:, 1] ** 2)
    (D, E, F), *_ = np.linalg.lstsq(A, b, rcond=None)
    cx, cy = -D / 2.0, -E / 2.0
    r2 = cx * cx + cy * cy - F
    if r2 <= 0.0:
        raise DegenerateFitError("fit does not define a positive radius")
    radius = math.sqrt(r2)
    dist = np.hypot(xy[:, 0] - cx, xy[:, 1] - cy)
    rms = float(np.sqrt(np.mean((dist - radius) ** 2)))
    return CircleFit(center=(float(cx), float(cy)), radius=float(radius), rms=rms)


def winding_orientation(trace: GeodesicTrace) -> int:
    """+1 for counterclockwise velocity winding, -1 for clockwise."""
    u, v = trace.uv[:, 0], trace.uv[:, 1]
    dtheta = np.diff(np.unwrap(np.arctan2(v, u)))
    total = float(np.sum(dtheta))
    return 1 if total > 0 else -1


def _alpha_speeds(trace: GeodesicTrace, alpha: MetricField) -> np.ndarray:
    return np.array(
        [alpha.norm(x, y, (u, v)) for (x, y), (u, v) in zip(trace.xy, trace.uv)]
    )


def unit_speed_resample(trace: GeodesicTrace, alpha: MetricField) -> GeodesicTrace:
    """Resample a trace by its alpha-arc-length via cubic interpolation.

    The returned parameter is arc length, so velocities have alpha-norm 1
    up to interpolation error.
    """
    speeds = _alpha_speeds(trace, alpha)
    if np.any(speeds <= 0):
        raise EvaluationError("trace has a vanishing velocity sample")
    s = np.concatenate([[0.0], np.cumsum(0.5 * (speeds[1:] + speeds[:-1]) * np.diff(trace.t))])
    sx = CubicSpline(s, trace.xy[:, 0])
    sy = CubicSpline(s, trace.xy[:, 1])
    s_new = np.linspace(0.0, s[-1], len(s))
    xy = np.column_stack([sx(s_new), sy(s_new)])
    uv = np.column_stack([sx(s_new, 1), sy(s_new, 1)])
    return GeodesicTrace(t=s_new, xy=xy, uv=uv, method=trace.method, step=trace.step)


def curve_samples(trace: GeodesicTrace, interior: int = 50) -> list[CurveSample]:
    """Position/velocity/acceleration samples from splines through a trace.

    Sampled away from the ends, where the spline's derivatives are least
    accurate.
    """
    sx = CubicSpline(trace.t, trace.xy[:, 0])
    sy = CubicSpline(trace.t, trace.xy[:, 1])
    t0, t1 = trace.t[0], trace.t[-1]
    span = t1 - t0
    ts = np.linspace(t0 + 0.1 * span, t1 - 0.1 * span, interior)
    return [
        CurveSample(
            pos=(float(sx(t)), float(sy(t))),
            vel=(float(sx(t, 1)), float(sy(t, 1))),
            acc=(float(sx(t, 2)), float(sy(t, 2))),
        )
        for t in ts
    ]
