"""Converter bus model: averaged buck stage, double-PI cascade, droop, ZIP load.

State vector per bus: (inductor current i, output voltage v, voltage-loop
integrator z1, current-loop integrator z2).  Input is the network injection
current i_B, output is the bus voltage v.  The voltage reference follows the
droop law v_ref = v_nom + R_droop * i_B; the outer PI turns the tracking error
into a current reference, the inner PI turns the current error into the
converter input u.

The constant-power part of the ZIP load is the destabilizing element: around
an operating voltage v0 it contributes a negative conductance -P_load / v0^2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonPositiveVoltage, UnitError
from .lti import StateSpace

BUS_ORDER = 4


@dataclass(frozen=True)
class BusSpec:
    """Physical and control parameters of one converter bus (SI units).

    Z_load = None means no constant-impedance load branch.
    """

    R_f: float
    L_f: float
    C_f: float
    K_Pv: float
    K_Iv: float
    K_Pi: float
    K_Ii: float
    R_droop: float
    v_nom: float
    i_bar: float = 0.0
    Z_load: float | None = None
    P_load: float = 0.0

    def __post_init__(self):
        if self.L_f <= 0.0 or self.C_f <= 0.0:
            raise UnitError(f"filter L_f and C_f must be positive, got {self.L_f}, {self.C_f}")
        if self.R_f < 0.0:
            raise UnitError(f"filter resistance must be nonnegative, got {self.R_f}")
        if self.v_nom <= 0.0:
            raise UnitError(f"nominal voltage must be positive, got {self.v_nom}")
        if self.Z_load is not None and self.Z_load <= 0.0:
            raise UnitError(f"impedance load must be positive or absent, got {self.Z_load}")
        if self.P_load < 0.0:
            raise UnitError(f"power load must be nonnegative, got {self.P_load}")
        if self.K_Iv <= 0.0 or self.K_Ii <= 0.0:
            raise UnitError("integral gains K_Iv and K_Ii must be positive")
        if self.K_Pv < 0.0 or self.K_Pi < 0.0 or self.R_droop < 0.0:
            raise UnitError("K_Pv, K_Pi and R_droop must be nonnegative")

    def load_current(self, v: float) -> float:
        """ZIP load current at voltage v > 0."""
        i = self.i_bar + self.P_load / v
        if self.Z_load is not None:
            i += v / self.Z_load
        return i

    def load_conductance(self, v: float) -> float:
        """d(load current)/dv at voltage v: 1/Z_load - P_load/v^2 (negative under CPL dominance)."""
        g = -self.P_load / v**2
        if self.Z_load is not None:
            g += 1.0 / self.Z_load
        return g

    def control_input(self, x: np.ndarray, e_v: float) -> float:
        """Converter input u from the double-PI cascade at state x and tracking error e_v."""
        i, _, z1, z2 = x
        i_ref = self.K_Pv * e_v + self.K_Iv * z1
        return self.K_Pi * (i_ref - i) + self.K_Ii * z2


def bus_vector_field(spec: BusSpec, x: np.ndarray, i_B: float) -> np.ndarray:
    """Time derivative of (i, v, z1, z2) for injection current i_B."""
    i, v, z1, z2 = x
    if v <= 0.0:
        raise NonPositiveVoltage(f"bus voltage {v} is not positive")
    e_v = spec.v_nom + spec.R_droop * i_B - v
    u = spec.control_input(x, e_v)
    di = (-v - spec.R_f * i + u) / spec.L_f
    dv = (i - spec.load_current(v) + i_B) / spec.C_f
    dz1 = e_v
    dz2 = spec.K_Pv * e_v + spec.K_Iv * z1 - i
    return np.array([di, dv, dz1, dz2])


def bus_algebraic_residual(spec: BusSpec, x: np.ndarray, i_B: float) -> np.ndarray:
    """Equilibrium residual in volt/amp units (vector field with L_f, C_f cleared)."""
    f = bus_vector_field(spec, x, i_B)
    return f * np.array([spec.L_f, spec.C_f, 1.0, 1.0])


def bus_residual_jacobians(spec: BusSpec, x: np.ndarray, i_B: float) -> tuple[np.ndarray, np.ndarray]:
    """Analytic Jacobians (d residual/dx, d residual/d i_B) of the volt/amp residual."""
    _, v, _, _ = x
    kp = spec.K_Pi
    dudx = np.array([-kp, -kp * spec.K_Pv, kp * spec.K_Iv, spec.K_Ii])
    Jx = np.zeros((BUS_ORDER, BUS_ORDER))
    Jx[0] = dudx + np.array([-spec.R_f, -1.0, 0.0, 0.0])
    Jx[1] = np.array([1.0, -spec.load_conductance(v), 0.0, 0.0])
    Jx[2] = np.array([0.0, -1.0, 0.0, 0.0])
    Jx[3] = np.array([-1.0, -spec.K_Pv, spec.K_Iv, 0.0])
    Ji = np.array([
        kp * spec.K_Pv * spec.R_droop,
        1.0,
        spec.R_droop,
        spec.K_Pv * spec.R_droop,
    ])
    return Jx, Ji


def equilibrium_state(spec: BusSpec, v_eq: float, i_B_eq: float) -> np.ndarray:
    """Closed-form bus state at an equilibrium with output voltage v_eq, injection i_B_eq.

    The voltage integrator pins e_v = 0, the reference integrator pins
    z1 = i/K_Iv and the inductor equation pins z2 = (v + R_f i)/K_Ii.
    """
    if v_eq <= 0.0:
        raise NonPositiveVoltage(f"equilibrium voltage {v_eq} is not positive")
    i_eq = spec.load_current(v_eq) - i_B_eq
    z1 = i_eq / spec.K_Iv
    z2 = (v_eq + spec.R_f * i_eq) / spec.K_Ii
    return np.array([i_eq, v_eq, z1, z2])


def linearize_bus(spec: BusSpec, eq_voltage: float, eq_current: float) -> StateSpace:
    """Small-signal realization from injection-current to voltage deviations.

    Fourth order (inductor, capacitor, two controller integrators); the droop
    coupling of i_B into the reference shows up in the input matrix, the ZIP
    Jacobian 1/Z_load - P_load/eq_voltage^2 in the capacitor row.
    """
    if eq_voltage <= 0.0:
        raise NonPositiveVoltage(f"equilibrium voltage {eq_voltage} is not positive")
    x_eq = equilibrium_state(spec, eq_voltage, eq_current)
    Jx, Ji = bus_residual_jacobians(spec, x_eq, eq_current)
    scale = np.array([1.0 / spec.L_f, 1.0 / spec.C_f, 1.0, 1.0])
    A = Jx * scale[:, None]
    B = (Ji * scale)[:, None]
    C = np.array([[0.0, 1.0, 0.0, 0.0]])
    return StateSpace(A, B, C, [[0.0]])
