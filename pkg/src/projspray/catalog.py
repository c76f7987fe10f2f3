"""The classification catalog: six scalar-equation normal forms, the spray
normal forms, the metrics realizing them, and the seven three-dimensional
symmetry algebras with their bracket tables.

Notes on conventions, all confirmed by the residual suites:

* Spray b_k(+/-) carries (k*|xi| -/+ 2(y u - x v)) / (1 +/- (x^2+y^2)) as
  its rotational coefficient; with this inner sign its induced equation is
  exactly the C2 normal form (same sign on 2(x z - y) as on the
  denominator), and the Randers metric built from the positively oriented
  potential matches it with zero projective residual.  The opposite inner
  sign matches neither orientation of the potential.
* The C2 algebra basis lists the rotation first (isotropy at the origin),
  then the two transvections ordered so the computed brackets reproduce
  the complex-case table ([X0,X1], [X0,X2]) = (-X2, X1); with that order
  the sphere family closes on [X1,X2] = -X0 and the hyperbolic one on
  +X0.
* Spray (a) induces f+ = +(1+z^2)^{3/2} and f- = -(1+z^2)^{3/2} by direct
  substitution; those constants are the catalog values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .finsler import FinslerMetric, OdePair, Rectangle, Spray
from .jets import EvaluationError, ScalarField, arctan, exp, jet_value, power, sqrt
from .randers import (
    MetricField,
    OneFormField,
    beta_for,
    constant_curvature_metric,
    randers_metric,
    riemannian_metric,
)
from .symmetry import LieAlgebraCase, PlaneVectorField

__all__ = [
    "LIE_CASE_KEYS",
    "METRIC_KEYS",
    "ODE_KEYS",
    "SPRAY_KEYS",
    "SYMMETRY_PAIRS",
    "MetricEntry",
    "OdeEntry",
    "SprayEntry",
    "lie_case",
    "metric_entry",
    "ode_entry",
    "spray_entry",
    "symmetry_pairs",
]


def _vf(a: Callable, b: Callable, name: str = "") -> PlaneVectorField:
    return PlaneVectorField(ScalarField(2, a), ScalarField(2, b), name)


# --------------------------------------------------------------------------
# scalar-equation normal forms
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class OdeEntry:
    key: str
    f: ScalarField  # arity 3, the forward (xdot > 0) normal form
    params: dict
    base_domain: Rectangle
    z_values: tuple
    formula: str
    point_filter: Callable | None = None
    perturbed_factory: Callable | None = None  # eps -> (ScalarField, point_filter)

    def grid(self, n_spatial: int = 3):
        pts = []
        for (x, y) in self.base_domain.grid(n_spatial, n_spatial, margin=1.0 - 1e-12):
            for z in self.z_values:
                if self.point_filter is None or self.point_filter(x, y, z):
                    pts.append((x, y, float(z)))
        return pts

    def perturbed(self, eps: float = 0.01):
        if self.perturbed_factory is None:
            raise ValueError(f"no structural perturbation defined for {self.key}")
        return self.perturbed_factory(eps)


_SMALL_BOX = Rectangle(-0.3, 0.3, -0.3, 0.3)
_Z_FULL = (-2.0, -1.0, 0.0, 1.0, 2.0)
_Z_POS = (0.5, 1.0, 2.0)


def ode_entry(key: str, C: float = 1.0, lam: float = -1.0, sign: float = 1.0) -> OdeEntry:
    """Normal forms D1, D2, J1, J2, J3, C1, C2(+/-), and the flat equation."""
    if key == "flat":
        return OdeEntry(
            "flat",
            ScalarField(3, lambda x, y, z: 0.0, name="0"),
            {},
            _SMALL_BOX,
            _Z_FULL,
            "y'' = 0",
        )
    if key == "D1":
        def make(scale):
            def f(x, y, z):
                w = y * y - 2.0 * z
                return C * power(w, 1.5) - scale * (y**3) + scale * 3.0 * y * z

            return ScalarField(3, f, name="D1")

        return OdeEntry(
            "D1",
            make(1.0),
            {"C": C},
            _SMALL_BOX,
            _Z_FULL,
            "y'' = C (y^2 - 2 y')^{3/2} - y^3 + 3 y y'",
            point_filter=lambda x, y, z: y * y - 2.0 * z > 1e-6,
            perturbed_factory=lambda eps: (make(1.0 + eps), lambda x, y, z: y * y - 2.0 * z > 1e-6),
        )
    if key == "D2":
        if lam == 1.0:
            raise ValueError("D2 exponent is undefined for lam = 1")
        k = (lam - 2.0) / (lam - 1.0)
        integer_exp = float(k).is_integer() and k >= 0

        def make(exponent):
            def f(x, y, z):
                return C * power(z, exponent)

            return ScalarField(3, f, name="D2")

        filt = None if integer_exp else (lambda x, y, z: z > 0.0)
        pk = k + 0.01 * max(abs(k), 1.0)

        return OdeEntry(
            "D2",
            make(k),
            {"C": C, "lam": lam, "exponent": k},
            _SMALL_BOX,
            _Z_FULL if integer_exp else _Z_POS,
            f"y'' = C y'^({k:g})",
            point_filter=filt,
            perturbed_factory=lambda eps: (
                make(k + eps * max(abs(k), 1.0)),
                lambda x, y, z: z > 0.0,
            ),
        )
    if key == "J1":
        def make(s):
            def f(x, y, z):
                if jet_value(z) <= 0.0:
                    return 0.0  # smooth extension below z = 0
                return C * z**3 * exp(-s / z)

            return ScalarField(3, f, name="J1")

        return OdeEntry(
            "J1",
            make(1.0),
            {"C": C},
            _SMALL_BOX,
            _Z_POS,
            "y'' = C y'^3 exp(-1/y')  (0 for y' <= 0)",
            point_filter=lambda x, y, z: z > 0.0,
            perturbed_factory=lambda eps: (make(1.0 + eps), lambda x, y, z: z > 0.0),
        )
    if key == "J2":
        def make(half):
            def f(x, y, z):
                return half * z + C * exp(-2.0 * x) * z**3

            return ScalarField(3, f, name="J2")

        return OdeEntry(
            "J2",
            make(0.5),
            {"C": C},
            _SMALL_BOX,
            _Z_FULL,
            "y'' = y'/2 + C exp(-2x) y'^3",
            perturbed_factory=lambda eps: (make(0.5 * (1.0 + eps)), None),
        )
    if key == "J3":
        def f(x, y, z):
            return (1.0 + y) * z**3

        return OdeEntry(
            "J3",
            ScalarField(3, f, name="J3"),
            {"h": "1 + y"},
            _SMALL_BOX,
            _Z_FULL,
            "y'' = (1 + y) y'^3",
        )
    if key == "C1":
        def make(expo):
            def f(x, y, z):
                return C * (z * z + 1.0) ** expo * exp(-lam * arctan(z))

            return ScalarField(3, f, name="C1")

        return OdeEntry(
            "C1",
            make(1.5),
            {"C": C, "lam": lam},
            _SMALL_BOX,
            _Z_FULL,
            f"y'' = C (y'^2+1)^{{3/2}} exp(-{lam:g} arctan y')",
            perturbed_factory=lambda eps: (make(1.5 * (1.0 + eps)), None),
        )
    if key in ("C2+", "C2-"):
        s = 1.0 if key == "C2+" else -1.0

        def make(two):
            def f(x, y, z):
                return (C * (z * z + 1.0) ** 1.5 + s * two * (x * z - y) * (z * z + 1.0)) / (
                    1.0 + s * (x * x + y * y)
                )

            return ScalarField(3, f, name=key)

        return OdeEntry(
            key,
            make(2.0),
            {"C": C, "sign": s},
            _SMALL_BOX,
            _Z_FULL,
            f"y'' = (C (y'^2+1)^{{3/2}} {'+' if s > 0 else '-'} 2(x y' - y)(y'^2+1)) / (1 {'+' if s > 0 else '-'} (x^2+y^2))",
            perturbed_factory=lambda eps: (make(2.0 * (1.0 + eps)), None),
        )
    raise KeyError(f"unknown equation family {key!r}")


ODE_KEYS = ("flat", "D1", "D2", "J1", "J2", "J3", "C1", "C2+", "C2-")


# --------------------------------------------------------------------------
# spray normal forms
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SprayEntry:
    key: str
    spray: Spray
    formula: str
    params: dict = field(default_factory=dict)
    reversible: bool = False


def spray_entry(key: str, k: float = 1.0) -> SprayEntry:
    if key == "flat":
        zero = ScalarField(4, lambda x, y, u, v: 0.0)
        return SprayEntry(
            "flat",
            Spray(zero, zero, Rectangle(-3.0, 3.0, -3.0, 3.0), "flat", pair_fn=lambda *a: (0.0, 0.0)),
            "u dx + v dy",
        )
    if key == "a":
        def pair(x, y, u, v):
            r = sqrt(u * u + v * v)
            return 0.5 * r * v, -0.5 * r * u

        return SprayEntry(
            "a",
            Spray(
                ScalarField(4, lambda *a: pair(*a)[0]),
                ScalarField(4, lambda *a: pair(*a)[1]),
                Rectangle(-2.5, 2.5, -1.5, 3.5),
                "a",
                pair_fn=pair,
            ),
            "u dx + v dy - |xi| (v du - u dv)",
        )
    if key in ("bk+", "bk-"):
        s = 1.0 if key == "bk+" else -1.0
        if k <= 0:
            raise ValueError("the b-family needs k > 0")

        def pair(x, y, u, v):
            denom = 1.0 + s * (x * x + y * y)
            if jet_value(denom) <= 0.0:
                raise EvaluationError("outside the unit disk")
            q = (k * sqrt(u * u + v * v) - s * 2.0 * (y * u - x * v)) / denom
            return 0.5 * q * v, -0.5 * q * u

        dom = Rectangle(-2.0, 2.0, -2.0, 2.0) if s > 0 else Rectangle(-0.68, 0.68, -0.68, 0.68)
        return SprayEntry(
            key,
            Spray(
                ScalarField(4, lambda *a: pair(*a)[0]),
                ScalarField(4, lambda *a: pair(*a)[1]),
                dom,
                key,
                pair_fn=pair,
            ),
            f"u dx + v dy - (k|xi| {'-' if s > 0 else '+'} 2(yu - xv))/(1 {'+' if s > 0 else '-'} (x^2+y^2)) (v du - u dv), k={k:g}",
            params={"k": k},
        )
    if key in ("c+", "c-"):
        s = 1.0 if key == "c+" else -1.0

        def pair(x, y, u, v):
            return 0.25 * (3.0 * u * u + s * exp(-2.0 * x) * v * v), 0.5 * u * v

        dom = Rectangle(-math.log(2.0) + 1e-9, 2.0, -2.0, 2.0) if s > 0 else Rectangle(-2.0, 2.0, -2.0, 2.0)
        return SprayEntry(
            key,
            Spray(
                ScalarField(4, lambda *a: pair(*a)[0]),
                ScalarField(4, lambda *a: pair(*a)[1]),
                dom,
                key,
                pair_fn=pair,
            ),
            f"u dx + v dy - (3u^2 {'+' if s > 0 else '-'} exp(-2x) v^2)/2 du - uv dv",
            reversible=True,
        )
    raise KeyError(f"unknown spray {key!r}")


SPRAY_KEYS = ("flat", "a", "bk+", "bk-", "c+", "c-")


def spray_expected_pair(key: str, k: float = 1.0) -> OdePair:
    """Closed-form induced equations of a catalog spray (forward and backward)."""
    entry = spray_entry(key, k)
    from .finsler import induced_odes

    return induced_odes(entry.spray)


# --------------------------------------------------------------------------
# metrics
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class MetricEntry:
    key: str
    metric: FinslerMetric
    spray_key: str
    formula: str
    params: dict = field(default_factory=dict)
    alpha: MetricField | None = None  # background for Randers entries, g itself otherwise
    beta: OneFormField | None = None
    kcurv: float | None = None
    projective_basis: tuple = ()
    verify_domain: Rectangle | None = None

    @property
    def domain(self) -> Rectangle:
        return self.verify_domain or self.metric.domain


def _metric_c(sign: float) -> MetricField:
    if sign < 0:
        return MetricField(
            ScalarField(2, lambda x, y: exp(3.0 * x)),
            ScalarField(2, lambda x, y: 0.0),
            ScalarField(2, lambda x, y: exp(x)),
            Rectangle(-0.5, 0.5, -0.5, 0.5),
            name="c-",
        )

    def e11(x, y):
        w = 2.0 * exp(x) - 1.0
        if jet_value(w) <= 0.0:
            raise EvaluationError("outside 2 e^x - 1 > 0")
        return exp(3.0 * x) / (w * w)

    def e22(x, y):
        w = 2.0 * exp(x) - 1.0
        if jet_value(w) <= 0.0:
            raise EvaluationError("outside 2 e^x - 1 > 0")
        return exp(x) / w

    return MetricField(
        ScalarField(2, e11),
        ScalarField(2, lambda x, y: 0.0),
        ScalarField(2, e22),
        Rectangle(-0.5, 0.5, -0.5, 0.5),
        name="c+",
    )


def _j2_fields():
    return (
        _vf(lambda x, y: -y, lambda x, y: -0.5 * y * y, "J2.X0"),
        _vf(lambda x, y: -1.0, lambda x, y: -y, "J2.X1"),
        _vf(lambda x, y: 0.0, lambda x, y: -1.0, "J2.X2"),
    )


def _c1_fields(lam: float = 0.0):
    return (
        _vf(lambda x, y: -(lam * x - y), lambda x, y: -(x + lam * y), "C1.X0"),
        _vf(lambda x, y: 1.0, lambda x, y: 0.0, "C1.X1"),
        _vf(lambda x, y: 0.0, lambda x, y: -1.0, "C1.X2"),
    )


def _c2_fields(s: float):
    return (
        _vf(lambda x, y: y, lambda x, y: -x, "C2.X0"),
        _vf(lambda x, y: x * y, lambda x, y: 0.5 * (-x * x + y * y + s), "C2.X1"),
        _vf(lambda x, y: 0.5 * (x * x - y * y + s), lambda x, y: x * y, "C2.X2"),
    )


def metric_entry(key: str, k: float = 1.0) -> MetricEntry:
    if key == "euclidean":
        alpha = constant_curvature_metric("euclidean")
        return MetricEntry(
            "euclidean",
            riemannian_metric(alpha, name="euclidean"),
            "flat",
            "sqrt(dx^2 + dy^2)",
            alpha=alpha,
            projective_basis=(
                _vf(lambda x, y: 1.0, lambda x, y: 0.0, "dx"),
                _vf(lambda x, y: 0.0, lambda x, y: 1.0, "dy"),
                _vf(lambda x, y: y, lambda x, y: -x, "rot"),
            ),
            verify_domain=Rectangle(-1.0, 1.0, -1.0, 1.0),
        )
    if key == "a":
        alpha = constant_curvature_metric("euclidean")
        beta = beta_for("euclidean", 1.0)
        dom = Rectangle(-0.5, 0.5, -0.5, 0.5)
        return MetricEntry(
            "a",
            randers_metric(alpha, beta, domain=dom, name="a"),
            "a",
            "sqrt(dx^2 + dy^2) + (y dx - x dy)/2",
            alpha=alpha,
            beta=beta,
            kcurv=1.0,
            projective_basis=_c1_fields(0.0),
            verify_domain=dom,
        )
    if key in ("bk+", "bk-"):
        s = 1.0 if key == "bk+" else -1.0
        model = "sphere" if s > 0 else "hyperbolic"
        alpha = constant_curvature_metric(model)
        beta = beta_for(model, k)
        dom = Rectangle(-0.45, 0.45, -0.45, 0.45)
        return MetricEntry(
            key,
            randers_metric(alpha, beta, domain=dom, name=key),
            key,
            f"sqrt(dx^2+dy^2)/(1{'+' if s > 0 else '-'}(x^2+y^2)) + k(y dx - x dy)/(2(1{'+' if s > 0 else '-'}(x^2+y^2))), k={k:g}",
            params={"k": k},
            alpha=alpha,
            beta=beta,
            kcurv=k,
            projective_basis=_c2_fields(s),
            verify_domain=dom,
        )
    if key in ("c+", "c-"):
        s = 1.0 if key == "c+" else -1.0
        g = _metric_c(s)
        formula = (
            "sqrt(e^{3x}/(2e^x-1)^2 dx^2 + e^x/(2e^x-1) dy^2)"
            if s > 0
            else "sqrt(e^{3x} dx^2 + e^x dy^2)"
        )
        return MetricEntry(
            key,
            riemannian_metric(g, name=key),
            key,
            formula,
            alpha=g,
            projective_basis=_j2_fields(),
            verify_domain=g.domain,
        )
    raise KeyError(f"unknown metric {key!r}")


METRIC_KEYS = ("euclidean", "a", "bk+", "bk-", "c+", "c-")


# --------------------------------------------------------------------------
# symmetry algebras
# --------------------------------------------------------------------------


def lie_case(key: str, lam: float = -1.0, gamma=(1.0, 0.0)) -> LieAlgebraCase:
    if key == "D1":
        return LieAlgebraCase(
            "D1",
            (
                _vf(lambda x, y: -x, lambda x, y: y, "X0"),
                _vf(lambda x, y: 1.0, lambda x, y: 0.0, "X1"),
                _vf(lambda x, y: -0.5 * x * x, lambda x, y: x * y + 1.0, "X2"),
            ),
            {(0, 1): (0, 1, 0), (0, 2): (0, 0, -1), (1, 2): (1, 0, 0)},
        )
    if key == "D2":
        return LieAlgebraCase(
            "D2",
            (
                _vf(lambda x, y: -x, lambda x, y: -lam * y, "X0"),
                _vf(lambda x, y: 1.0, lambda x, y: 0.0, "X1"),
                _vf(lambda x, y: 0.0, lambda x, y: 1.0, "X2"),
            ),
            {(0, 1): (0, 1, 0), (0, 2): (0, 0, lam), (1, 2): (0, 0, 0)},
            parameters={"lam": lam},
        )
    if key == "J1":
        return LieAlgebraCase(
            "J1",
            (
                _vf(lambda x, y: -(x + y), lambda x, y: -y, "X0"),
                _vf(lambda x, y: 1.0, lambda x, y: 0.0, "X1"),
                _vf(lambda x, y: 0.0, lambda x, y: 1.0, "X2"),
            ),
            {(0, 1): (0, 1, 0), (0, 2): (0, 1, 1), (1, 2): (0, 0, 0)},
        )
    if key == "J2":
        return LieAlgebraCase(
            "J2",
            _j2_fields(),
            {(0, 1): (1, 0, 0), (0, 2): (0, 1, 0), (1, 2): (0, 0, 1)},
        )
    if key == "J3":
        g0, g1 = gamma
        return LieAlgebraCase(
            "J3",
            (
                _vf(lambda x, y: y, lambda x, y: 0.0, "X0"),
                _vf(lambda x, y: 1.0, lambda x, y: 0.0, "X1"),
                _vf(
                    lambda x, y: (g0 * y + g1) * x,
                    lambda x, y: g0 * y * y + g1 * y - 1.0,
                    "X2",
                ),
            ),
            {(0, 1): (0, 0, 0), (0, 2): (0, 1, 0), (1, 2): (g0, g1, 0)},
            parameters={"gamma0": g0, "gamma1": g1},
        )
    if key == "C1":
        return LieAlgebraCase(
            "C1",
            _c1_fields(lam),
            {(0, 1): (0, lam, -1), (0, 2): (0, 1, lam), (1, 2): (0, 0, 0)},
            parameters={"lam": lam},
        )
    if key in ("C2+", "C2-"):
        s = 1.0 if key == "C2+" else -1.0
        return LieAlgebraCase(
            key,
            _c2_fields(s),
            {(0, 1): (0, 0, -1), (0, 2): (0, 1, 0), (1, 2): (-s, 0, 0)},
            parameters={"sign": s},
            notes=(
                "basis ordered so the brackets reproduce the complex-case table; "
                "the sphere family closes on -X0, the hyperbolic one on +X0"
            ),
        )
    raise KeyError(f"unknown symmetry algebra {key!r}")


LIE_CASE_KEYS = ("D1", "D2", "J1", "J2", "J3", "C1", "C2+", "C2-")


def symmetry_pairs():
    """(label, algebra, equation) triples whose symmetry residuals vanish."""
    pairs = [("D1", lie_case("D1"), ode_entry("D1"))]
    for lam in (-1.0, 2.0):
        pairs.append((f"D2(lam={lam:g})", lie_case("D2", lam=lam), ode_entry("D2", lam=lam)))
    pairs.append(("J1", lie_case("J1"), ode_entry("J1")))
    pairs.append(("J2", lie_case("J2"), ode_entry("J2")))
    for lam in (-1.0, 2.0):
        pairs.append((f"C1(lam={lam:g})", lie_case("C1", lam=lam), ode_entry("C1", lam=lam)))
    pairs.append(("C2+", lie_case("C2+"), ode_entry("C2+")))
    pairs.append(("C2-", lie_case("C2-"), ode_entry("C2-")))
    return pairs


SYMMETRY_PAIRS = tuple(p[0] for p in symmetry_pairs())
