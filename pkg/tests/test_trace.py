import math

import numpy as np
import pytest

from projspray.catalog import metric_entry, spray_entry
from projspray.finsler import geodesic_spray, induced_odes
from projspray.randers import (
    area_form,
    constant_curvature_metric,
    geodesic_curvature,
    magnetic_residual,
    magnetic_rhs,
)
from projspray.trace import (
    CircleFit,
    DegenerateFitError,
    DomainError,
    GeodesicTrace,
    circle_fit,
    curve_samples,
    integrate_flow,
    integrate_ode,
    integrate_spray,
    unit_speed_resample,
    winding_orientation,
)


def test_flat_spray_straight_line():
    tr = integrate_spray(spray_entry("flat").spray, (0.0, 0.0, 1.0, 0.0), 1.0, 1e-2)
    assert not tr.domain_exit
    assert np.allclose(tr.state(-1), (1.0, 0.0, 1.0, 0.0), atol=1e-12)


def test_spray_a_unit_circle():
    tr = integrate_spray(spray_entry("a").spray, (0.0, 0.0, 1.0, 0.0), 2 * math.pi, 1e-3)
    assert not tr.domain_exit
    assert len(tr) == 6284
    # exact solution (sin t, 1 - cos t): closes after one period
    assert np.hypot(*tr.xy[-1]) <= 1e-6
    fit = circle_fit(tr)
    assert fit.center[0] == pytest.approx(0.0, abs=1e-6)
    assert fit.center[1] == pytest.approx(1.0, abs=1e-6)
    assert fit.radius == pytest.approx(1.0, abs=1e-6)
    assert fit.rms <= 1e-9
    assert winding_orientation(tr) == 1  # positively oriented


def test_spray_c_plus_domain_handling():
    s = spray_entry("c+").spray
    with pytest.raises(DomainError):
        integrate_spray(s, (-5.0, 0.0, 1.0, 0.0), 1.0, 1e-3)
    tr = integrate_spray(s, (-0.3, 0.0, -1.0, 0.0), 3.0, 1e-3)
    # moving toward the domain wall: either still inside or flagged exit
    assert tr.domain_exit or s.domain.contains(*tr.xy[-1])


def test_zero_fiber_vector_rejected():
    with pytest.raises(DomainError):
        integrate_spray(spray_entry("flat").spray, (0.0, 0.0, 0.0, 0.0), 1.0, 1e-2)


def test_integrate_ode_linear():
    c = integrate_ode(spray_entry("flat").spray.G1, (0.0, 0.0, 1.0), 1.0, 1e-2)
    # y'' = 0 with slope 1 through the origin: y = x (G1 of the flat spray is 0)
    assert c.y[-1] == pytest.approx(1.0, abs=1e-12)


def test_integrate_ode_circle_branch():
    pair = induced_odes(spray_entry("a").spray)
    c = integrate_ode(pair.fplus, (0.0, 0.0, 0.0), 0.5, 1e-3)
    want = 1.0 - np.sqrt(1.0 - c.x**2)
    assert float(np.abs(c.y - want).max()) <= 1e-8
    assert not c.blown_up


def test_integrate_ode_matches_spray_trace_c_minus():
    s = spray_entry("c-").spray
    tr = integrate_spray(s, (0.0, 0.0, 1.0, 0.2), 0.6, 1e-3)
    assert not tr.domain_exit
    pair = induced_odes(s)
    curve = integrate_ode(pair.fplus, (0.0, 0.0, 0.2), float(tr.xy[-1, 0]), 1e-3)
    yi = np.interp(tr.xy[:, 0], curve.x, curve.y)
    assert float(np.abs(yi - tr.xy[:, 1]).max()) <= 1e-7


def test_integrate_ode_blowup_guard():
    from projspray.jets import ScalarField

    f = ScalarField(3, lambda x, y, z: 1e4 * (1.0 + z * z))
    c = integrate_ode(f, (0.0, 0.0, 0.0), 2.0, 1e-3)
    assert c.blown_up


def test_circle_fit_exact_samples():
    t = np.linspace(0, 2 * math.pi, 100, endpoint=False)
    xy = np.column_stack([np.cos(t), np.sin(t)])
    fit = circle_fit(xy)
    assert fit.center == (pytest.approx(0.0, abs=1e-12), pytest.approx(0.0, abs=1e-12))
    assert fit.radius == pytest.approx(1.0, abs=1e-12)
    assert fit.rms <= 1e-12


def test_circle_fit_degenerate_cases():
    line = np.column_stack([np.linspace(0, 1, 50), np.zeros(50)])
    with pytest.raises(DegenerateFitError):
        circle_fit(line)
    with pytest.raises(DegenerateFitError):
        circle_fit(np.zeros((5, 2)))


def test_unit_speed_resample_fixed_point():
    t = np.linspace(0.0, 1.0, 101)
    tr = GeodesicTrace(t=t, xy=np.column_stack([t, np.zeros_like(t)]),
                       uv=np.column_stack([np.ones_like(t), np.zeros_like(t)]))
    alpha = constant_curvature_metric("euclidean")
    out = unit_speed_resample(tr, alpha)
    assert np.abs(out.xy - tr.xy).max() <= 1e-12
    speeds = [alpha.norm(x, y, (u, v)) for (x, y), (u, v) in zip(out.xy, out.uv)]
    assert max(abs(s - 1.0) for s in speeds) <= 1e-9


def test_unit_speed_resample_spray_a():
    tr = integrate_spray(spray_entry("a").spray, (0.0, 0.0, 1.0, 0.0), 4.0, 1e-3)
    alpha = constant_curvature_metric("euclidean")
    out = unit_speed_resample(tr, alpha)
    speeds = [alpha.norm(x, y, (u, v)) for (x, y), (u, v) in zip(out.xy, out.uv)]
    inner = speeds[2:-2]
    assert max(abs(s - 1.0) for s in inner) <= 1e-9
    assert np.all(np.diff(out.t) > 0)


def test_rk4_convergence_ratio_on_spray_a():
    s = spray_entry("a").spray
    tmax = 2.0
    exact = np.array([math.sin(tmax), 1.0 - math.cos(tmax)])

    def final_err(h):
        tr = integrate_spray(s, (0.0, 0.0, 1.0, 0.0), tmax, h)
        return float(np.hypot(*(tr.xy[-1] - exact)))

    ratio = final_err(4e-3) / final_err(2e-3)
    assert 12.0 <= ratio <= 20.0


def test_rk4_exact_on_flat_spray():
    s = spray_entry("flat").spray

    def final_err(h):
        tr = integrate_spray(s, (0.0, 0.0, 0.7, -0.4), 1.0, h)
        return float(np.hypot(*(tr.xy[-1] - np.array([0.7, -0.4]))))

    assert final_err(4e-3) <= 1e-13 and final_err(2e-3) <= 1e-13


def test_energy_first_integral_along_metric_spray():
    entry = metric_entry("a")
    s = geodesic_spray(entry.metric)
    tr = integrate_spray(s, (0.0, 0.0, 0.9, 0.1), 10.0, 5e-3)
    assert not tr.domain_exit
    F = entry.metric
    vals = [float(F(x, y, u, v)) for (x, y), (u, v) in zip(tr.xy[::50], tr.uv[::50])]
    assert max(vals) - min(vals) <= 1e-7


def test_magnetic_flow_constant_speed():
    alpha = constant_curvature_metric("sphere")
    om = area_form(alpha, 1.0)
    rhs = magnetic_rhs(alpha, om)
    times, states, exited = integrate_flow(rhs, (0.0, 0.0, 1.0, 0.0), 10.0, 1e-3)
    assert not exited
    speeds = np.array(
        [alpha.norm(x, y, (u, v)) for (x, y, u, v) in states[::100]]
    )
    assert float(np.abs(speeds - speeds[0]).max()) < 1e-7


@pytest.mark.parametrize("key,k,tmax", [("bk+", 0.5, 5.0), ("bk+", 2.0, 5.0), ("bk-", 2.0, 1.2)])
def test_constant_geodesic_curvature_of_b_traces(key, k, tmax):
    entry = spray_entry(key, k=k)
    tr = integrate_spray(entry.spray, (0.0, 0.0, 1.0, 0.0), tmax, 1e-3)
    model = "sphere" if key == "bk+" else "hyperbolic"
    alpha = constant_curvature_metric(model)
    resampled = unit_speed_resample(tr, alpha)
    kappas = [geodesic_curvature(alpha, s, speed_tol=1e-6) for s in curve_samples(resampled, 25)]
    assert max(abs(kap - k) for kap in kappas) <= 1e-5, (key, k)


def test_magnetic_residual_along_resampled_b_trace():
    k = 1.0
    entry = spray_entry("bk+", k=k)
    tr = integrate_spray(entry.spray, (0.0, 0.0, 1.0, 0.0), 5.0, 1e-3)
    alpha = constant_curvature_metric("sphere")
    om = area_form(alpha, k)
    resampled = unit_speed_resample(tr, alpha)
    res = [magnetic_residual(alpha, om, s) for s in curve_samples(resampled, 25)]
    assert max(res) <= 1e-6
