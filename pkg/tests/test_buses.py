import numpy as np
import pytest

import dcgridcert as dc
from dcgridcert.buses import bus_vector_field, equilibrium_state
from dcgridcert.errors import NonPositiveVoltage, UnitError


def closed_form_bus_tf(bus: dc.BusSpec, v_eq: float, s: complex) -> complex:
    """Independent elimination of the bus equations in transfer form."""
    ci = bus.K_Pi + bus.K_Ii / s
    cv = bus.K_Pv + bus.K_Iv / s
    y = (1.0 / bus.Z_load if bus.Z_load is not None else 0.0) - bus.P_load / v_eq**2
    num = (bus.L_f * s + bus.R_f + ci) + ci * cv * bus.R_droop
    den = (bus.C_f * s + y) * (bus.L_f * s + bus.R_f + ci) + 1.0 + ci * cv
    return num / den


def random_bus(rng) -> dc.BusSpec:
    return dc.BusSpec(
        R_f=rng.uniform(0.01, 0.5),
        L_f=10 ** rng.uniform(-4, -2),
        C_f=10 ** rng.uniform(-4, -2),
        K_Pv=rng.uniform(0.0, 2.0),
        K_Iv=rng.uniform(5.0, 200.0),
        K_Pi=rng.uniform(0.5, 20.0),
        K_Ii=rng.uniform(50.0, 5000.0),
        R_droop=rng.uniform(0.0, 1.0),
        v_nom=rng.uniform(24.0, 400.0),
        i_bar=rng.uniform(0.0, 2.0),
        Z_load=10 ** rng.uniform(0.3, 2.0) if rng.random() < 0.8 else None,
        P_load=rng.uniform(0.0, 200.0),
    )


def test_symbolic_elimination_oracle(rng):
    bus = dc.BusSpec(R_f=0.2, L_f=1.8e-3, C_f=2.2e-3, K_Pv=0.4, K_Iv=40.0,
                     K_Pi=8.0, K_Ii=800.0, R_droop=0.0, v_nom=48.0, Z_load=None)
    ss = dc.linearize_bus(bus, 48.0, 0.0)
    for _ in range(20):
        s = complex(rng.normal(0, 200), rng.normal(0, 2000))
        got = dc.eval_frequency(ss, s)
        want = closed_form_bus_tf(bus, 48.0, s)
        assert abs(got - want) <= 1e-10 * abs(want)


def test_zip_jacobian_cancels_at_boundary():
    v = 48.0
    z = 8.0
    bus = dc.BusSpec(R_f=0.2, L_f=1.8e-3, C_f=2.2e-3, K_Pv=0.4, K_Iv=40.0,
                     K_Pi=8.0, K_Ii=800.0, R_droop=0.6, v_nom=v,
                     Z_load=z, P_load=v**2 / z)
    assert bus.load_conductance(v) == pytest.approx(0.0, abs=1e-15)
    # with the jacobian at zero the realization equals the no-load one
    free = dc.BusSpec(R_f=0.2, L_f=1.8e-3, C_f=2.2e-3, K_Pv=0.4, K_Iv=40.0,
                      K_Pi=8.0, K_Ii=800.0, R_droop=0.6, v_nom=v, Z_load=None)
    a = dc.linearize_bus(bus, v, 0.0)
    b = dc.linearize_bus(free, v, 0.0)
    assert np.allclose(a.A, b.A, rtol=0, atol=1e-12)


def test_finite_difference_jacobian_oracle():
    rng = np.random.default_rng(99)
    h = 1e-6
    for _ in range(50):
        bus = random_bus(rng)
        i_b = rng.uniform(-3.0, 3.0)
        v_eq = bus.v_nom + bus.R_droop * i_b  # true equilibrium voltage
        ss = dc.linearize_bus(bus, v_eq, i_b)
        x0 = equilibrium_state(bus, v_eq, i_b)
        assert np.max(np.abs(bus_vector_field(bus, x0, i_b))) < 1e-6
        A_fd = np.zeros((4, 4))
        for i in range(4):
            dx = np.zeros(4)
            dx[i] = h * max(1.0, abs(x0[i]))
            A_fd[:, i] = (bus_vector_field(bus, x0 + dx, i_b)
                          - bus_vector_field(bus, x0 - dx, i_b)) / (2 * dx[i])
        B_fd = (bus_vector_field(bus, x0, i_b + h)
                - bus_vector_field(bus, x0, i_b - h)) / (2 * h)
        assert np.max(np.abs(A_fd - ss.A) / (1.0 + np.abs(ss.A))) < 1e-5
        assert np.max(np.abs(B_fd - ss.B[:, 0]) / (1.0 + np.abs(ss.B[:, 0]))) < 1e-5


def test_nonpositive_voltage_rejected():
    bus = dc.BusSpec(R_f=0.2, L_f=1.8e-3, C_f=2.2e-3, K_Pv=0.4, K_Iv=40.0,
                     K_Pi=8.0, K_Ii=800.0, R_droop=0.6, v_nom=48.0)
    with pytest.raises(NonPositiveVoltage):
        dc.linearize_bus(bus, -1.0, 0.0)


def test_unit_validation():
    with pytest.raises(UnitError):
        dc.BusSpec(R_f=0.2, L_f=-1e-3, C_f=2.2e-3, K_Pv=0.4, K_Iv=40.0,
                   K_Pi=8.0, K_Ii=800.0, R_droop=0.6, v_nom=48.0)
    with pytest.raises(UnitError):
        dc.BusSpec(R_f=0.2, L_f=1e-3, C_f=2.2e-3, K_Pv=0.4, K_Iv=40.0,
                   K_Pi=8.0, K_Ii=800.0, R_droop=0.6, v_nom=48.0, P_load=-5.0)
