import numpy as np
import pytest

from dstls.battery import (
    BatteryError,
    CellTrace,
    EcmParamMap,
    arx_from_ecm,
    coulomb_count,
    lookup_params,
    overpotential_from_measurement,
    simulate_cell,
)


def test_arx_reference_values():
    th = arx_from_ecm(1e-3, 0.5e-3, 1e4, 1.0)
    assert th.theta1 == pytest.approx(0.818182, rel=1e-6)
    assert th.theta2 == pytest.approx(1.045455e-3, rel=1e-6)
    assert th.theta3 == pytest.approx(-7.72727e-4, rel=1e-6)
    assert th.theta2 - th.theta3 == pytest.approx(1.818182e-3, rel=1e-6)


def test_arx_large_capacitance_limit():
    th = arx_from_ecm(1e-3, 0.5e-3, 1e12, 1.0)
    np.testing.assert_allclose(th, (1.0, 1e-3, -1e-3), rtol=1e-6)


def test_arx_identity_on_random_inputs(rng):
    r0, r1 = rng.uniform(1e-4, 1e-2, (2, 1000))
    c1, t = rng.uniform(1e2, 1e5, 1000), rng.uniform(0.1, 10, 1000)
    th = arx_from_ecm(r0, r1, c1, t)
    np.testing.assert_allclose(th.theta2 - th.theta3, r0 * (1 + th.theta1), rtol=1e-12)
    assert np.all(np.abs(th.theta1) < 1)


@pytest.mark.parametrize("bad", [(0, 1, 1, 1), (1, -1, 1, 1), (1, 1, 0, 1), (1, 1, 1, 0)])
def test_arx_rejects_non_positive(bad):
    with pytest.raises(BatteryError):
        arx_from_ecm(*bad)


def test_lookup_exact_at_breakpoints():
    pm = EcmParamMap.default()
    for k, z in enumerate(pm.z):
        assert lookup_params(pm, float(z)) == (pm.v_oc[k], pm.r0[k], pm.r1[k], pm.c1[k])


def test_lookup_linear_midpoint():
    pm = EcmParamMap([0.0, 0.5, 1.0], [3.4, 3.6, 3.8], [1, 1, 1], [1, 1, 1], [1, 1, 1])
    assert lookup_params(pm, 0.75)[0] == pytest.approx(3.7, abs=1e-15)


def test_lookup_out_of_range():
    with pytest.raises(BatteryError, match="range"):
        lookup_params(EcmParamMap.default(), 1.2)


def test_default_map_shape():
    pm = EcmParamMap.default()
    assert pm.ocv(0.0) == pytest.approx(3.0) and pm.ocv(1.0) == pytest.approx(4.2)
    assert pm.r0[0] == pytest.approx(1.5e-3) and pm.r1[-1] == pytest.approx(0.5e-3)


@pytest.mark.parametrize("cols", [
    dict(z=[0, 1], v_oc=[3, 3], r0=[1, 1], r1=[1, 1], c1=[1, 1]),
    dict(z=[0, 0.9], v_oc=[3, 4], r0=[1, 1], r1=[1, 1], c1=[1, 1]),
    dict(z=[0, 1], v_oc=[3, 4], r0=[1, 0], r1=[1, 1], c1=[1, 1]),
])
def test_map_validation(cols):
    with pytest.raises(BatteryError):
        EcmParamMap(**cols)


def test_map_csv_round_trip(tmp_path):
    pm = EcmParamMap.default()
    pm.to_csv(tmp_path / "map.csv")
    back = EcmParamMap.from_csv(tmp_path / "map.csv")
    for name in ("z", "v_oc", "r0", "r1", "c1"):
        np.testing.assert_array_equal(getattr(back, name), getattr(pm, name))


def test_zero_current_equilibrium():
    pm = EcmParamMap.default()
    tr = simulate_cell(pm, np.zeros(50), 0.9, 50.0)
    assert np.all(tr.overpotential == 0)
    assert np.all(tr.soc == 0.9)
    np.testing.assert_allclose(tr.terminal_voltage, pm.ocv(0.9), rtol=0, atol=1e-15)


def test_constant_current_steady_state():
    pm = EcmParamMap.constant(3.7, 1e-3, 0.5e-3, 1e4)
    tr = simulate_cell(pm, np.full(2000, 10.0), 0.5, 1e6)
    assert tr.overpotential[-1] == pytest.approx(0.015, rel=1e-9)


def test_coulomb_counting_endpoint():
    z, sat = coulomb_count(np.full(3240, 50.0), 0.95, 50.0, 1.0)
    assert not sat
    np.testing.assert_allclose(np.diff(z), -1 / 3600, rtol=1e-9)
    assert z[-1] == pytest.approx(0.05, abs=1e-12)


def test_clamping_is_flagged():
    tr = simulate_cell(EcmParamMap.default(), np.full(100, 3600.0), 0.5, 1.0)
    assert tr.saturated
    assert tr.soc.min() == 0.0


def test_terminal_voltage_identity_and_stability(rng):
    pm = EcmParamMap.default()
    cur = rng.normal(0, 20, 3000)
    tr = simulate_cell(pm, cur, 0.9, 50.0)
    np.testing.assert_allclose(tr.terminal_voltage, tr.v_oc + tr.overpotential, rtol=0, atol=1e-15)
    assert np.all(np.abs(tr.theta_true[:, 0]) < 1)
    assert tr.soc[-1] - 0.9 == pytest.approx(-cur.sum() / (3600 * 50.0), rel=1e-9)


def test_geometric_decay_after_cut(rng):
    pm = EcmParamMap.default()
    cur = np.concatenate([rng.normal(0, 20, 200), np.zeros(100)])
    tr = simulate_cell(pm, cur, 0.8, 50.0)
    v, th1 = tr.overpotential, tr.theta_true[:, 0]
    # the first zero sample still sees the lagged current
    for k in range(201, 299):
        assert abs(v[k + 1]) == pytest.approx(abs(th1[k + 1] * v[k]), abs=1e-12)


def test_first_step_uses_current_as_its_own_lag():
    pm = EcmParamMap.constant(3.7, 1e-3, 0.5e-3, 1e4)
    tr = simulate_cell(pm, [5.0, 5.0], 0.5, 50.0)
    th = tr.theta_true[0]
    assert tr.overpotential[0] == pytest.approx((th[1] + th[2]) * 5.0, rel=1e-12)


@pytest.mark.parametrize("kwargs", [dict(current=[]), dict(capacity=0.0), dict(current=[np.nan])])
def test_simulate_errors(kwargs):
    args = dict(current=[1.0], capacity=1.0)
    args.update(kwargs)
    with pytest.raises(BatteryError):
        simulate_cell(EcmParamMap.default(), args["current"], 0.5, args["capacity"])


def test_overpotential_extraction(rng):
    pm = EcmParamMap.default()
    z = rng.uniform(0.1, 0.9, 20)
    assert np.all(overpotential_from_measurement(pm.ocv(z), z, pm) == 0)
    tr = simulate_cell(pm, rng.normal(0, 10, 100), 0.7, 50.0)
    np.testing.assert_allclose(overpotential_from_measurement(tr.terminal_voltage, tr.soc, pm),
                               tr.overpotential, rtol=0, atol=1e-15)
    v = tr.terminal_voltage.copy()
    v[17] += 2e-3
    diff = overpotential_from_measurement(v, tr.soc, pm) - tr.overpotential
    assert diff[17] == pytest.approx(2e-3, abs=1e-14)
    assert np.all(np.abs(np.delete(diff, 17)) < 1e-14)
    with pytest.raises(BatteryError):
        overpotential_from_measurement(v[:-1], tr.soc, pm)


def test_cell_trace_csv_round_trip(tmp_path, rng):
    tr = simulate_cell(EcmParamMap.default(), rng.normal(0, 10, 30), 0.7, 50.0)
    tr.to_csv(tmp_path / "cells.csv")
    back = CellTrace.from_csv(tmp_path / "cells.csv")
    np.testing.assert_array_equal(back.terminal_voltage, tr.terminal_voltage)
    np.testing.assert_array_equal(back.theta_true, tr.theta_true)
    np.testing.assert_array_equal(back.soc, tr.soc)
