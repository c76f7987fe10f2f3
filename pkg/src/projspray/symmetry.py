"""Plane vector fields: prolongation, Lie brackets, structure constants,
point-symmetry and projective-vector-field residuals.

A field a(x,y) dx + b(x,y) dy acts on the equation space (x, y, z = y')
through its prolongation with third coefficient
c = b_x + z b_y - z (a_x + z a_y), and on the tangent bundle through its
complete lift.  All coefficient derivatives come from jets, so bracket
fields and prolongation coefficients remain liftable themselves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .finsler import Spray
from .jets import EvaluationError, ScalarField, jet_value, lift, seed_jets, split_jet

__all__ = [
    "CompleteLift",
    "DegenerateBasisError",
    "LieAlgebraCase",
    "NotClosedError",
    "PlaneVectorField",
    "ProlongedVectorField",
    "StructureConstants",
    "complete_lift",
    "jacobi_residual",
    "lie_bracket",
    "point_symmetry_residual",
    "projective_field_residual",
    "prolong",
    "structure_constants",
]


class DegenerateBasisError(ValueError):
    """Basis fields do not span enough directions at the sample points."""


class NotClosedError(ValueError):
    """Computed brackets do not lie in the span of the basis."""


@dataclass(frozen=True)
class PlaneVectorField:
    a: ScalarField  # arity 2, coefficient of d/dx
    b: ScalarField  # coefficient of d/dy
    name: str = ""

    def at(self, x, y):
        return self.a(x, y), self.b(x, y)


@dataclass(frozen=True)
class ProlongedVectorField:
    a: ScalarField
    b: ScalarField
    c: ScalarField  # arity 3 on (x, y, z)
    name: str = ""


@dataclass(frozen=True)
class CompleteLift:
    """Lift of a plane field to the tangent bundle: fiber part is the
    Jacobian of the base coefficients applied to (u, v)."""

    base: PlaneVectorField

    def components(self, x, y, u, v):
        ja = lift(self.base.a, (x, y), order=1)
        jb = lift(self.base.b, (x, y), order=1)
        return (
            ja.value,
            jb.value,
            ja.grad[0] * u + ja.grad[1] * v,
            jb.grad[0] * u + jb.grad[1] * v,
        )


def prolong(X: PlaneVectorField) -> ProlongedVectorField:
    def cfn(x, y, z):
        ja = lift(X.a, (x, y), order=1)
        jb = lift(X.b, (x, y), order=1)
        return jb.grad[0] + z * jb.grad[1] - z * (ja.grad[0] + z * ja.grad[1])

    return ProlongedVectorField(X.a, X.b, ScalarField(3, cfn, name=f"c[{X.name}]"), X.name)


def complete_lift(X: PlaneVectorField) -> CompleteLift:
    return CompleteLift(X)


def lie_bracket(X: PlaneVectorField, Y: PlaneVectorField) -> PlaneVectorField:
    """[X, Y]^i = X^j d_j Y^i - Y^j d_j X^i, returned as a new field."""

    def component(idx):
        def fn(x, y):
            jxa = lift(X.a, (x, y), order=1)
            jxb = lift(X.b, (x, y), order=1)
            jya = lift(Y.a, (x, y), order=1)
            jyb = lift(Y.b, (x, y), order=1)
            jy = jya if idx == 0 else jyb
            jx = jxa if idx == 0 else jxb
            return (
                jxa.value * jy.grad[0]
                + jxb.value * jy.grad[1]
                - jya.value * jx.grad[0]
                - jyb.value * jx.grad[1]
            )

        return ScalarField(2, fn)

    return PlaneVectorField(component(0), component(1), name=f"[{X.name},{Y.name}]")


def point_symmetry_residual(X: PlaneVectorField, f: ScalarField, at: Sequence[float]) -> float:
    """Defect of the prolonged field against the direction field of y'' = f.

    Zero when the flow of X takes solution trajectories to solution
    trajectories.
    """
    x, y, z = at
    jf = lift(f, (x, y, z), order=1)
    fval, fx, fy, fz = jf.value, jf.grad[0], jf.grad[1], jf.grad[2]
    ja = lift(X.a, (x, y), order=1)
    a, ax, ay = ja.value, ja.grad[0], ja.grad[1]
    b = X.b(x, y)
    jc = lift(prolong(X).c, (x, y, z), order=1)
    c, cx, cy, cz = jc.value, jc.grad[0], jc.grad[1], jc.grad[2]
    return abs(a * fx + b * fy + c * fz - (cz - ax - z * ay) * fval - cx - z * cy)


def projective_field_residual(X: PlaneVectorField, spray: Spray, at: Sequence[float]) -> float:
    """Non-radial part of the Lie derivative of the spray along the lift of X.

    The base components of [X^, spray] vanish identically for complete
    lifts; they are still computed and included as a consistency term.
    Zero (up to roundoff) exactly when the flow of X permutes the spray's
    oriented geodesics.
    """
    x, y, u, v = (float(c) for c in at)
    if u == 0.0 and v == 0.0:
        raise EvaluationError("projective field residual needs a nonzero fiber vector")
    ja = lift(X.a, (x, y), order=2)
    jb = lift(X.b, (x, y), order=2)
    a, (ax, ay) = ja.value, ja.grad
    b, (bx, by) = jb.value, jb.grad
    axx, axy, ayy = ja.hess[0][0], ja.hess[0][1], ja.hess[1][1]
    bxx, bxy, byy = jb.hess[0][0], jb.hess[0][1], jb.hess[1][1]

    seeds = seed_jets((x, y, u, v), order=1)
    level = seeds[0].level
    g1j, g2j = spray.coefficients(*seeds)
    G1, dG1 = split_jet(g1j, level, 4)
    G2, dG2 = split_jet(g2j, level, 4)
    G1, G2 = jet_value(G1), jet_value(G2)
    dG1 = tuple(jet_value(t) for t in dG1)
    dG2 = tuple(jet_value(t) for t in dG2)

    A3 = ax * u + ay * v
    B3 = bx * u + by * v
    comp1 = A3 - (u * ax + v * ay)
    comp2 = B3 - (u * bx + v * by)
    xhat_g1 = a * dG1[0] + b * dG1[1] + A3 * dG1[2] + B3 * dG1[3]
    xhat_g2 = a * dG2[0] + b * dG2[1] + A3 * dG2[2] + B3 * dG2[3]
    gamma_a3 = u * (axx * u + axy * v) + v * (axy * u + ayy * v) - 2.0 * G1 * ax - 2.0 * G2 * ay
    gamma_b3 = u * (bxx * u + bxy * v) + v * (bxy * u + byy * v) - 2.0 * G1 * bx - 2.0 * G2 * by
    comp3 = -2.0 * xhat_g1 - gamma_a3
    comp4 = -2.0 * xhat_g2 - gamma_b3

    n2 = u * u + v * v
    lam = (comp3 * u + comp4 * v) / n2
    return math.hypot(comp1, comp2) + math.hypot(comp3 - lam * u, comp4 - lam * v)


@dataclass(frozen=True)
class LieAlgebraCase:
    """A three-dimensional algebra of plane fields with its expected bracket table.

    ``expected`` maps the pairs (0,1), (0,2), (1,2) to expansion
    coefficients in the basis.  The first basis field spans the isotropy
    at the origin; the other two span the tangent plane there.
    """

    name: str
    basis: tuple  # three PlaneVectorFields
    expected: dict  # {(i, j): (c0, c1, c2)}
    parameters: dict = field(default_factory=dict)
    notes: str = ""

    def isotropy_ok(self, tol: float = 1e-12) -> bool:
        a0, b0 = self.basis[0].at(0.0, 0.0)
        return abs(a0) <= tol and abs(b0) <= tol

    def transitive_ok(self, tol: float = 1e-9) -> bool:
        v1 = self.basis[1].at(0.0, 0.0)
        v2 = self.basis[2].at(0.0, 0.0)
        return abs(v1[0] * v2[1] - v1[1] * v2[0]) > tol


_SAMPLE_POOL = (
    (0.137, 0.291, 0.713),
    (-0.218, 0.117, -0.437),
    (0.301, -0.157, 1.213),
    (-0.113, -0.271, 0.517),
    (0.243, 0.193, -0.871),
    (0.061, -0.329, 1.531),
    (-0.307, 0.251, -1.117),
    (0.173, 0.077, 0.337),
)


@dataclass(frozen=True)
class StructureConstants:
    constants: np.ndarray  # shape (3, 3, 3), antisymmetric in the first two slots
    residual: float

    def table(self):
        return {key: tuple(self.constants[key]) for key in ((0, 1), (0, 2), (1, 2))}


def structure_constants(
    case_or_basis,
    npoints: int = 5,
    tol: float = 1e-9,
) -> StructureConstants:
    """Expand the three brackets of a basis in the basis itself.

    At each sample point (x, y, z) the prolonged fields give a 3x3 system
    (components a, b, c), solved exactly; the constants must agree across
    points to ``tol``.  Singular sample points are skipped and replaced
    from a fixed pool.
    """
    basis = case_or_basis.basis if isinstance(case_or_basis, LieAlgebraCase) else tuple(case_or_basis)
    prolonged = [prolong(X) for X in basis]
    brackets = {
        (i, j): prolong(lie_bracket(basis[i], basis[j]))
        for (i, j) in ((0, 1), (0, 2), (1, 2))
    }

    per_point = []
    used = 0
    for (x, y, z) in _SAMPLE_POOL:
        if used >= npoints:
            break
        cols = []
        for P in prolonged:
            cols.append([P.a(x, y), P.b(x, y), P.c(x, y, z)])
        A = np.array(cols, dtype=float).T  # columns are the basis fields
        if abs(np.linalg.det(A)) < 1e-10 * max(1.0, float(np.abs(A).max()) ** 3):
            continue
        point_consts = {}
        for key, B in brackets.items():
            rhs = np.array([B.a(x, y), B.b(x, y), B.c(x, y, z)], dtype=float)
            point_consts[key] = np.linalg.solve(A, rhs)
        per_point.append(((x, y, z), A, point_consts))
        used += 1
    if used < npoints:
        raise DegenerateBasisError(
            f"only {used} of {npoints} sample points gave an invertible prolonged basis"
        )

    keys = ((0, 1), (0, 2), (1, 2))
    mean = {k: np.mean([pc[k] for (_, _, pc) in per_point], axis=0) for k in keys}
    spread = max(
        float(np.abs(pc[k] - mean[k]).max()) for (_, _, pc) in per_point for k in keys
    )
    residual = 0.0
    for (pt, A, _) in per_point:
        x, y, z = pt
        for k in keys:
            B = brackets[k]
            rhs = np.array([B.a(x, y), B.b(x, y), B.c(x, y, z)], dtype=float)
            residual = max(residual, float(np.abs(A @ mean[k] - rhs).max()))
    if spread > tol or residual > max(tol, 10 * spread):
        raise NotClosedError(
            f"bracket expansion disagrees across sample points "
            f"(spread {spread:.3e}, residual {residual:.3e})"
        )

    C = np.zeros((3, 3, 3))
    for (i, j) in keys:
        C[i, j] = mean[(i, j)]
        C[j, i] = -mean[(i, j)]
    return StructureConstants(constants=C, residual=max(residual, spread))


def jacobi_residual(constants) -> float:
    """Largest defect of the three Jacobi-identity relations.

    With [X0,X1] = sum a_i X_i, [X0,X2] = sum b_i X_i, [X1,X2] = sum g_i X_i
    the identity reduces to three bilinear relations in the coefficients.
    """
    C = constants.constants if isinstance(constants, StructureConstants) else np.asarray(constants)
    a = C[0, 1]
    b = C[0, 2]
    g = C[1, 2]
    eq1 = a[0] * g[1] + b[0] * g[2] - b[2] * g[0] - a[1] * g[0]
    eq2 = b[1] * g[2] + a[1] * b[0] - b[2] * g[1] - a[0] * b[1]
    eq3 = a[2] * g[1] + a[2] * b[0] - a[0] * b[2] - a[1] * g[2]
    return float(max(abs(eq1), abs(eq2), abs(eq3)))
