"""Decentralized stability certification for DC microgrids.

The certifier decides local stability of a DC microgrid from per-bus
frequency-domain conditions (passivity, weighted small gain, and coupled-block
conditions with a per-line multiplier search), and a ground-truth oracle
(closed-loop eigenvalues, determinant winding on Nyquist contours, split
equivalence, sampled homotopy) validates every certificate at desk scale.
"""

__version__ = "0.1.0"

from .buses import BusSpec, linearize_bus
from .criteria import (
    CertifyConfig,
    FrequencyGrid,
    LineMultiplier,
    QCMultiplier,
    SearchConfig,
    certify,
    coupled_block,
    dc_check,
    line_weight,
    qc_complement_holds,
    qc_holds,
    split1_check,
    split2_check,
)
from .errors import CertifierError
from .lti import LineModel, RationalTransfer, StateSpace, build_line, check_bus_assumption, eval_frequency
from .netgraph import CouplingOperators, NetworkGraph, build_coupling, build_incidence
from .network import Equilibrium, NetworkSpec, TransferBus, prepare, solve_equilibrium
from .oracle import (
    assemble_closed_loop,
    det_winding,
    eig_stability,
    homotopy_check,
    modified_contour,
    return_ratio,
    scaled_gain_bound,
    standard_contour,
)
from .report import StabilityReport

__all__ = [
    "BusSpec", "CertifierError", "CertifyConfig", "CouplingOperators", "Equilibrium",
    "FrequencyGrid", "LineModel", "LineMultiplier", "NetworkGraph", "NetworkSpec",
    "QCMultiplier", "RationalTransfer", "SearchConfig", "StabilityReport", "StateSpace",
    "TransferBus", "assemble_closed_loop", "build_coupling", "build_incidence",
    "build_line", "certify", "check_bus_assumption", "coupled_block", "dc_check",
    "det_winding", "eig_stability", "eval_frequency", "homotopy_check", "line_weight",
    "linearize_bus", "modified_contour", "prepare", "qc_complement_holds", "qc_holds",
    "return_ratio", "scaled_gain_bound", "solve_equilibrium", "split1_check",
    "split2_check", "standard_contour",
]
