"""Finsler metrics, their geodesic sprays, induced scalar equations, and
projective-equivalence residuals.

Coordinates are (x, y) on the base and (u, v) on the fibers.  Sprays are
stored through their coefficient pair (G1, G2); the corresponding vector
field on the slit tangent bundle is u*dx + v*dy - 2*G1*du - 2*G2*dv.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .jets import (
    EvaluationError,
    Jet2,
    ScalarField,
    jet_value,
    lift,
    seed_jets,
    split_jet,
)

__all__ = [
    "ConvexityReport",
    "FinslerMetric",
    "OdePair",
    "Rectangle",
    "SmoothnessReport",
    "Spray",
    "TransposedOdePair",
    "fundamental_tensor",
    "geodesic_spray",
    "induced_ode_direct",
    "induced_odes",
    "is_strongly_convex",
    "projective_residual",
    "smoothness_at_zero",
    "transpose_odes",
]


@dataclass(frozen=True)
class Rectangle:
    """Open axis-aligned rectangle in the (x, y)-plane."""

    x0: float
    x1: float
    y0: float
    y1: float

    def contains(self, x: float, y: float) -> bool:
        return self.x0 < x < self.x1 and self.y0 < y < self.y1

    def shrunk(self, factor: float = 0.9) -> "Rectangle":
        cx, cy = 0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1)
        hx, hy = 0.5 * factor * (self.x1 - self.x0), 0.5 * factor * (self.y1 - self.y0)
        return Rectangle(cx - hx, cx + hx, cy - hy, cy + hy)

    def grid(self, nx: int = 5, ny: int = 5, margin: float = 0.9):
        r = self.shrunk(margin)
        xs = np.linspace(r.x0, r.x1, nx)
        ys = np.linspace(r.y0, r.y1, ny)
        return [(float(x), float(y)) for x in xs for y in ys]


def fiber_directions(n: int = 8, offset: float = 0.1):
    """Unit fiber directions, offset so none is axis-aligned."""
    return [
        (math.cos(offset + 2.0 * math.pi * i / n), math.sin(offset + 2.0 * math.pi * i / n))
        for i in range(n)
    ]


@dataclass(frozen=True)
class FinslerMetric:
    """Positively 1-homogeneous fiber norm F(x, y, u, v) over a base rectangle."""

    F: ScalarField  # arity 4
    kind: str  # "riemannian" | "randers" | "general"
    domain: Rectangle
    name: str = ""

    def __call__(self, x, y, u, v):
        return self.F(x, y, u, v)


@dataclass(frozen=True)
class Spray:
    """Coefficient pair of a spray, 2-homogeneous in the fiber variables."""

    G1: ScalarField  # arity 4
    G2: ScalarField
    domain: Rectangle
    name: str = ""
    pair_fn: Callable | None = None

    def coefficients(self, x, y, u, v):
        """Both coefficients in one evaluation (one pass for derived sprays)."""
        if self.pair_fn is not None:
            return self.pair_fn(x, y, u, v)
        return self.G1(x, y, u, v), self.G2(x, y, u, v)


@dataclass(frozen=True)
class OdePair:
    """Right-hand sides f(x, y, z) of the two x-parametrized geodesic equations."""

    fplus: ScalarField  # arity 3
    fminus: ScalarField
    name: str = ""


@dataclass(frozen=True)
class TransposedOdePair:
    """The same geodesics parametrized by y; piecewise across z = 0."""

    gplus: ScalarField  # arity 3
    gminus: ScalarField
    name: str = ""


def fundamental_tensor(metric: FinslerMetric, at: Sequence[float]) -> np.ndarray:
    """Half the fiber Hessian of F^2 as a 2x2 symmetric matrix."""
    x, y, u, v = at
    if u == 0.0 and v == 0.0:
        raise EvaluationError("fundamental tensor is undefined on the zero section")
    j = lift(lambda *a: metric.F(*a) ** 2, (x, y, u, v), active=(2, 3))
    return 0.5 * np.array(j.hess, dtype=float)


@dataclass(frozen=True)
class ConvexityReport:
    ok: bool
    min_eigenvalue: float
    witness: tuple | None = None


def is_strongly_convex(
    metric: FinslerMetric,
    region: Rectangle | None = None,
    nx: int = 5,
    ny: int = 5,
    ndirs: int = 16,
    margin: float = 0.9,
) -> ConvexityReport:
    """Sample the fundamental tensor over base points and unit fiber directions."""
    region = region or metric.domain
    worst = math.inf
    witness = None
    for (x, y) in region.grid(nx, ny, margin):
        for (u, v) in fiber_directions(ndirs):
            g = fundamental_tensor(metric, (x, y, u, v))
            lo = float(np.linalg.eigvalsh(g)[0])
            if lo < worst:
                worst = lo
                witness = (x, y, u, v)
    return ConvexityReport(ok=worst > 0.0, min_eigenvalue=worst, witness=witness)


def geodesic_spray(metric: FinslerMetric) -> Spray:
    """Spray whose integral curves project to the geodesics of ``metric``.

    Coefficients come from the fundamental tensor and its base derivatives:
    G^i = 1/4 g^{ij} (2 dg_{jk}/dx^l - dg_{kl}/dx^j) xi^k xi^l.  The base
    derivatives are obtained by lifting the tensor entries in (x, y); the
    whole evaluation stays jet-transparent, so derived sprays can be lifted
    again (projective-field residuals, induced-equation coefficients).
    """
    Ffn = metric.F.fn

    def pair(x, y, u, v):
        xb, yb = seed_jets((x, y), order=1)  # base register
        uf, vf = seed_jets((u, v), order=2)  # fiber register, nests above
        w = Ffn(xb, yb, uf, vf)
        w2 = w * w
        if not (isinstance(w2, Jet2) and w2.level == uf.level):
            raise EvaluationError("metric does not depend on the fiber variables")
        base = xb.level
        gval = [[None, None], [None, None]]
        dg = [[[None, None], [None, None]], [[None, None], [None, None]]]
        for i in range(2):
            for j in range(2):
                val, grad = split_jet(0.5 * w2.hess[i][j], base, 2)
                gval[i][j] = val
                dg[0][i][j] = grad[0]
                dg[1][i][j] = grad[1]
        det = gval[0][0] * gval[1][1] - gval[0][1] * gval[0][1]
        scale = max(abs(jet_value(gval[0][0])), abs(jet_value(gval[1][1])), 1e-30)
        if abs(jet_value(det)) <= 1e-15 * scale * scale:
            raise EvaluationError(
                f"singular fundamental tensor at ({jet_value(x)}, {jet_value(y)}, "
                f"{jet_value(u)}, {jet_value(v)})"
            )
        inv = [
            [gval[1][1] / det, -(gval[0][1] / det)],
            [-(gval[0][1] / det), gval[0][0] / det],
        ]
        xi = (u, v)
        term = []
        for j in range(2):
            t = 0.0
            for k in range(2):
                for l in range(2):
                    t = t + (2.0 * dg[l][j][k] - dg[j][k][l]) * (xi[k] * xi[l])
            term.append(t)
        g1 = 0.25 * (inv[0][0] * term[0] + inv[0][1] * term[1])
        g2 = 0.25 * (inv[1][0] * term[0] + inv[1][1] * term[1])
        return g1, g2

    return Spray(
        G1=ScalarField(4, lambda x, y, u, v: pair(x, y, u, v)[0], name="G1"),
        G2=ScalarField(4, lambda x, y, u, v: pair(x, y, u, v)[1], name="G2"),
        domain=metric.domain,
        name=f"geodesic({metric.name})" if metric.name else "geodesic",
        pair_fn=pair,
    )


def induced_odes(spray: Spray) -> OdePair:
    """Scalar equations for the x-parametrizations of the spray's curves."""

    def fplus(x, y, z):
        g1, g2 = spray.coefficients(x, y, 1.0, z)
        return 2.0 * g1 * z - 2.0 * g2

    def fminus(x, y, z):
        g1, g2 = spray.coefficients(x, y, -1.0, -z)
        return 2.0 * g1 * z - 2.0 * g2

    return OdePair(
        fplus=ScalarField(3, fplus, name="f+"),
        fminus=ScalarField(3, fminus, name="f-"),
        name=spray.name,
    )


def induced_ode_direct(metric: FinslerMetric) -> OdePair:
    """Same equations computed from F alone, bypassing the spray.

    Both branches come from the second Euler-Lagrange equation of the
    length functional along (t, y(t)) resp. (-t, y(-t)):
    y'' = (F_y - u F_xv - v F_yv) / F_vv at (x, y, u, v) = (x, y, ±1, ±y').
    The velocity components multiply the mixed partials; dropping them
    flips the sign of the F_xv term on the backward branch.
    """

    Ffn = metric.F.fn

    def branch(sign):
        def f(x, y, z):
            u = sign * 1.0
            v = sign * z if isinstance(z, Jet2) else sign * float(z)
            j = lift(Ffn, (x, y, u, v), active=(0, 1, 3))
            Fy = j.grad[1]
            Fxv = j.hess[0][2]
            Fyv = j.hess[1][2]
            Fvv = j.hess[2][2]
            if jet_value(Fvv) == 0.0:
                raise EvaluationError(
                    f"degenerate fiber direction at ({jet_value(x)}, {jet_value(y)}, z={jet_value(z)})"
                )
            return (Fy - u * Fxv - v * Fyv) / Fvv

        return f

    return OdePair(
        fplus=ScalarField(3, branch(+1), name="f+ direct"),
        fminus=ScalarField(3, branch(-1), name="f- direct"),
        name=f"direct({metric.name})" if metric.name else "direct",
    )


def transpose_odes(pair: OdePair) -> TransposedOdePair:
    """Equations for the y-parametrizations; the two x-branches glue across z = 0.

    At z = 0 the value is the numerical limit from z > 0 (Richardson over
    h in {1e-2, 1e-3}); one-sided regularity is the business of
    :func:`smoothness_at_zero`.
    """

    def make(f_pos, f_neg):
        def g(x, y, z):
            zv = jet_value(z)
            if zv > 0.0:
                return -(z * z * z) * f_pos(x, y, 1.0 / z)
            if zv < 0.0:
                return -(z * z * z) * f_neg(x, y, 1.0 / z)
            # quadratic extrapolation of the limit from z > 0
            hs = (1e-2, 1e-3, 1e-4)
            vals = [-(h**3) * f_pos(x, y, 1.0 / h) for h in hs]
            out = 0.0
            for i, hi in enumerate(hs):
                w = 1.0
                for j, hj in enumerate(hs):
                    if j != i:
                        w *= hj / (hj - hi)
                out = out + w * vals[i]
            return out

        return g

    return TransposedOdePair(
        gplus=ScalarField(3, make(pair.fplus, pair.fminus), name="g+"),
        gminus=ScalarField(3, make(pair.fminus, pair.fplus), name="g-"),
        name=pair.name,
    )


@dataclass(frozen=True)
class SmoothnessReport:
    smooth: bool
    mismatches: tuple  # (order, limit_from_above, limit_from_below)


def smoothness_at_zero(
    transposed: TransposedOdePair,
    at: Sequence[float],
    tol: float = 1e-5,
    steps=(1e-2, 1e-3),
    component: str = "gplus",
) -> SmoothnessReport:
    """Compare one-sided z-derivatives of a transposed equation up to order 2.

    Each side is sampled at the two step sizes and Richardson-extrapolated
    to z = 0; orders whose one-sided limits disagree beyond ``tol`` are
    reported as mismatches.
    """
    x, y = at
    g = getattr(transposed, component)
    h1, h2 = steps
    w = h1 / (h1 - h2)

    def one_sided(sign):
        vals = []
        for h in steps:
            j = lift(g, (x, y, sign * h), active=(2,), order=2)
            vals.append((j.value, j.grad[0], j.hess[0][0]))
        a, b = vals
        return tuple(w * b[k] - (w - 1.0) * a[k] for k in range(3))

    above = one_sided(+1.0)
    below = one_sided(-1.0)
    mism = tuple(
        (order, above[order], below[order])
        for order in range(3)
        if abs(above[order] - below[order]) > tol
    )
    return SmoothnessReport(smooth=not mism, mismatches=mism)


def projective_residual(s1: Spray, s2: Spray, at: Sequence[float]) -> float:
    """Size of the non-radial part of the difference of two sprays at a point.

    Zero exactly when the sprays differ by a multiple of the radial field,
    i.e. when they share oriented geodesics through the point.
    """
    x, y, u, v = (float(c) for c in at)
    if u == 0.0 and v == 0.0:
        raise EvaluationError("projective residual needs a nonzero fiber vector")
    a1, b1 = s1.coefficients(x, y, u, v)
    a2, b2 = s2.coefficients(x, y, u, v)
    w1 = -2.0 * (float(a1) - float(a2))
    w2 = -2.0 * (float(b1) - float(b2))
    n2 = u * u + v * v
    lam = (w1 * u + w2 * v) / n2
    return math.hypot(w1 - lam * u, w2 - lam * v)
