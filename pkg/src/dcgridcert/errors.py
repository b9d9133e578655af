"""Exception hierarchy for the certifier.

Every error carries a machine-readable ``code`` (stable across releases) so the
CLI and report writers can map failures without string matching.
"""

from __future__ import annotations


class CertifierError(Exception):
    """Base class for all errors raised by this package."""

    code = "error"


class BadEdge(CertifierError):
    code = "bad_edge"


class DisconnectedGraph(CertifierError):
    code = "disconnected_graph"


class IsolatedBus(CertifierError):
    code = "isolated_bus"


class PoleHit(CertifierError):
    code = "pole_hit"


class BadLineParams(CertifierError):
    code = "bad_line_params"


class NotSPR(CertifierError):
    """A supplied line transfer function failed the strict positive-real test."""

    code = "not_spr"


class NoConvergence(CertifierError):
    """Newton iteration exhausted; ``last_residual`` holds the final infinity norm."""

    code = "no_convergence"

    def __init__(self, message: str, last_residual: float):
        super().__init__(message)
        self.last_residual = last_residual


class NonPhysical(CertifierError):
    code = "non_physical"


class NonPositiveVoltage(CertifierError):
    code = "non_positive_voltage"


class DimensionMismatch(CertifierError):
    code = "dimension_mismatch"


class AssumptionViolated(CertifierError):
    """A bus realization is not stable; the instance is refused.

    Attributes
    ----------
    bus : 0-based bus index
    eigenvalues : offending eigenvalues (real part >= threshold)
    """

    code = "assumption_violated"

    def __init__(self, message: str, bus: int, eigenvalues):
        super().__init__(message)
        self.bus = bus
        self.eigenvalues = list(eigenvalues)


class ModeMismatch(CertifierError):
    code = "mode_mismatch"


class AlgebraicLoop(CertifierError):
    code = "algebraic_loop"


class PhaseJump(CertifierError):
    """Contour under-sampled: adjacent determinant samples jump by more than pi/2."""

    code = "phase_jump"


class BadRadii(CertifierError):
    code = "bad_radii"


class SchemaError(CertifierError):
    """Input file violates the network schema; ``pointer`` is a JSON pointer."""

    code = "schema_error"

    def __init__(self, message: str, pointer: str = ""):
        super().__init__(message)
        self.pointer = pointer


class UnitError(CertifierError):
    """A physical constant has an impossible sign or magnitude."""

    code = "unit_error"

    def __init__(self, message: str, pointer: str = ""):
        super().__init__(message)
        self.pointer = pointer
