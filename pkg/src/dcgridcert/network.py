"""Network instance bundling and the steady-state (equilibrium) solver.

A NetworkSpec couples the graph, one model per bus and one line model per
edge.  Buses come in two flavors:

* converter buses (:class:`~dcgridcert.buses.BusSpec`): the physical nonlinear
  model; the small-signal transfer is obtained by solving the network
  equilibrium and linearizing there;
* transfer buses (:class:`TransferBus`): a directly supplied small-signal
  rational transfer from injection current to voltage.

The two flavors cannot be mixed in one network: a converter equilibrium is
only defined when every bus has a physical model.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .buses import BUS_ORDER, BusSpec, bus_algebraic_residual, bus_residual_jacobians, linearize_bus
from .errors import ModeMismatch, NoConvergence, NonPhysical, SchemaError
from .lti import POLE_AT_ORIGIN, LineModel, RationalTransfer, StateSpace, to_statespace
from .netgraph import CouplingOperators, NetworkGraph, build_coupling, build_incidence

MODE_RHINF = "theorem1"
MODE_ORIGIN_POLE = "theorem2"
MODES = (MODE_RHINF, MODE_ORIGIN_POLE)

NEWTON_TOL = 1e-12
NEWTON_MAXIT = 100


@dataclass(frozen=True)
class TransferBus:
    """Bus specified directly by its small-signal transfer (injection current -> voltage)."""

    tf: RationalTransfer


@dataclass(frozen=True)
class NetworkSpec:
    """A full microgrid instance."""

    graph: NetworkGraph
    buses: tuple
    lines: tuple[LineModel, ...]
    mode: str = MODE_RHINF

    def __post_init__(self):
        object.__setattr__(self, "buses", tuple(self.buses))
        object.__setattr__(self, "lines", tuple(self.lines))
        if len(self.buses) != self.graph.n_buses:
            raise SchemaError(
                f"{len(self.buses)} bus models for {self.graph.n_buses} buses", "/buses"
            )
        if len(self.lines) != self.graph.n_edges:
            raise SchemaError(
                f"{len(self.lines)} line models for {self.graph.n_edges} edges", "/lines"
            )
        kinds = {type(b) for b in self.buses}
        if kinds - {BusSpec, TransferBus}:
            raise SchemaError(f"unsupported bus model types: {kinds}", "/buses")
        if kinds == {BusSpec, TransferBus}:
            raise SchemaError(
                "converter and transfer buses cannot be mixed in one network", "/buses"
            )
        if self.mode not in MODES:
            raise SchemaError(f"unknown mode {self.mode!r}", "/mode")
        origin_pole = [line.kind == POLE_AT_ORIGIN for line in self.lines]
        if self.mode == MODE_ORIGIN_POLE and not all(origin_pole):
            raise ModeMismatch(f"{self.mode} requires every line to have kind {POLE_AT_ORIGIN}")
        if self.mode == MODE_RHINF and any(origin_pole):
            raise ModeMismatch(f"{self.mode} requires all lines to be strictly stable")

    @property
    def n_buses(self) -> int:
        return self.graph.n_buses

    @property
    def n_edges(self) -> int:
        return self.graph.n_edges

    @property
    def all_transfer(self) -> bool:
        return all(isinstance(b, TransferBus) for b in self.buses)


@dataclass(frozen=True)
class Equilibrium:
    """Network steady state: per-edge currents, per-bus voltages and bus states."""

    line_currents: np.ndarray
    bus_voltages: np.ndarray
    bus_states: np.ndarray
    residual: float


def _line_residual_row(line: LineModel, i_k: float, dv_k: float) -> tuple[float, float, float]:
    """Residual and its partials (d/di_k, d/d dv_k) for one line at steady state."""
    if line.kind == POLE_AT_ORIGIN:
        return dv_k, 0.0, 1.0
    if line.kind == "rl":
        return -line.r * i_k + dv_k, -line.r, 1.0
    g0 = line.dc_gain()
    return -i_k + g0 * dv_k, -1.0, g0


def network_residual(spec: NetworkSpec, q: np.ndarray, incidence: np.ndarray) -> np.ndarray:
    """Volt/amp residual of the steady-state equations at unknown vector q.

    q stacks the edge currents then, per bus, (i, v, z1, z2).
    """
    nl, nb = spec.n_edges, spec.n_buses
    i_L = q[:nl]
    x_B = q[nl:].reshape(nb, BUS_ORDER)
    v_B = x_B[:, 1]
    dv = incidence.T @ v_B
    i_inj = -(incidence @ i_L)
    res = np.empty(nl + nb * BUS_ORDER)
    for k, line in enumerate(spec.lines):
        res[k], _, _ = _line_residual_row(line, i_L[k], dv[k])
    for j, bus in enumerate(spec.buses):
        res[nl + 4 * j: nl + 4 * j + 4] = bus_algebraic_residual(bus, x_B[j], i_inj[j])
    return res


def _network_jacobian(spec: NetworkSpec, q: np.ndarray, incidence: np.ndarray) -> np.ndarray:
    nl, nb = spec.n_edges, spec.n_buses
    i_L = q[:nl]
    x_B = q[nl:].reshape(nb, BUS_ORDER)
    v_B = x_B[:, 1]
    dv = incidence.T @ v_B
    i_inj = -(incidence @ i_L)
    n = nl + nb * BUS_ORDER
    J = np.zeros((n, n))
    for k, line in enumerate(spec.lines):
        _, d_di, d_ddv = _line_residual_row(line, i_L[k], dv[k])
        J[k, k] = d_di
        for j in range(nb):
            J[k, nl + 4 * j + 1] = d_ddv * incidence[j, k]
    for j, bus in enumerate(spec.buses):
        Jx, Ji = bus_residual_jacobians(bus, x_B[j], i_inj[j])
        rows = slice(nl + 4 * j, nl + 4 * j + 4)
        J[rows, rows] = Jx
        J[rows, :nl] = -np.outer(Ji, incidence[j, :])
    return J


def solve_equilibrium(spec: NetworkSpec, tol: float = NEWTON_TOL,
                      maxit: int = NEWTON_MAXIT) -> Equilibrium:
    """Damped Newton solve of the steady-state equations.

    Initialization: all voltages at nominal, all currents zero.  Steps are
    halved while the residual norm does not decrease (or a bus voltage leaves
    the physical region); singular Jacobians (possible on rings of
    pole-at-origin lines, where a circulating current is free) fall back to
    minimum-norm least-squares steps.
    """
    if spec.all_transfer:
        raise NonPhysical("equilibrium is only defined for converter-bus networks")
    incidence = build_incidence(spec.graph)
    nl, nb = spec.n_edges, spec.n_buses
    q = np.zeros(nl + nb * BUS_ORDER)
    for j, bus in enumerate(spec.buses):
        q[nl + 4 * j + 1] = bus.v_nom
        q[nl + 4 * j + 3] = bus.v_nom / bus.K_Ii
    res = network_residual(spec, q, incidence)
    norm = float(np.max(np.abs(res)))
    for _ in range(maxit):
        if norm <= tol:
            break
        J = _network_jacobian(spec, q, incidence)
        try:
            step = np.linalg.solve(J, -res)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(J, -res, rcond=None)[0]
        if not np.isfinite(step).all():
            step = np.linalg.lstsq(J, -res, rcond=None)[0]
        alpha = 1.0
        for _ in range(60):
            q_new = q + alpha * step
            volts = q_new[nl:].reshape(nb, BUS_ORDER)[:, 1]
            if np.all(volts > 1e-9):
                res_new = network_residual(spec, q_new, incidence)
                norm_new = float(np.max(np.abs(res_new)))
                if norm_new < norm or norm_new <= tol:
                    break
            alpha *= 0.5
        else:
            raise NoConvergence(
                f"Newton line search stalled at residual {norm:.3e}", norm
            )
        q, res, norm = q_new, res_new, norm_new
    if norm > tol:
        raise NoConvergence(f"no convergence after {maxit} iterations, residual {norm:.3e}", norm)
    x_B = q[nl:].reshape(nb, BUS_ORDER)
    if np.any(x_B[:, 1] <= 0.0):
        raise NonPhysical(f"converged to nonpositive bus voltage: {x_B[:, 1]}")
    return Equilibrium(
        line_currents=q[:nl].copy(),
        bus_voltages=x_B[:, 1].copy(),
        bus_states=x_B.copy(),
        residual=norm,
    )


@dataclass(frozen=True)
class PreparedNetwork:
    """Instance with everything derived: incidence, coupling, bus realizations."""

    spec: NetworkSpec
    incidence: np.ndarray
    coupling: CouplingOperators
    bus_realizations: tuple[StateSpace, ...]
    equilibrium: Equilibrium | None


def prepare(spec: NetworkSpec) -> PreparedNetwork:
    """Resolve a NetworkSpec into evaluable small-signal models.

    Converter networks are linearized at the solved equilibrium; transfer
    networks realize the supplied rationals directly.
    """
    incidence = build_incidence(spec.graph)
    coupling = build_coupling(incidence)
    if spec.all_transfer:
        eq = None
        realizations = tuple(to_statespace(b.tf) for b in spec.buses)
    else:
        eq = solve_equilibrium(spec)
        i_inj = -(incidence @ eq.line_currents)
        realizations = tuple(
            linearize_bus(bus, eq.bus_voltages[j], i_inj[j])
            for j, bus in enumerate(spec.buses)
        )
    return PreparedNetwork(
        spec=spec,
        incidence=incidence,
        coupling=coupling,
        bus_realizations=realizations,
        equilibrium=eq,
    )
