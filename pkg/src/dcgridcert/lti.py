"""Small LTI toolbox: rational transfer functions, state-space models, line models.

Everything is immutable after construction and evaluation is pure, so models
can be shared freely across parallel frequency-sweep workers.  Coefficient
arrays are stored in ascending powers of s.  The frequency value ``inf``
(real or complex, any sign pattern) is the closure sentinel: evaluation
returns the feedthrough limit there, so conditions quantified over the
extended axis [0, inf] stay checkable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import BadLineParams, DimensionMismatch, NotSPR, PoleHit

POLE_TOL = 1e-12


def _trim(coeffs) -> np.ndarray:
    """Coefficients as a float array with trailing (highest-order) zeros dropped."""
    arr = np.atleast_1d(np.asarray(coeffs, dtype=float))
    nz = np.flatnonzero(arr != 0.0)
    if nz.size == 0:
        return np.zeros(1)
    return arr[: nz[-1] + 1]


@dataclass(frozen=True)
class RationalTransfer:
    """Proper scalar rational transfer function, real coefficients ascending in s."""

    num: np.ndarray
    den: np.ndarray

    def __post_init__(self):
        num = _trim(self.num)
        den = _trim(self.den)
        if den.size == 1 and den[0] == 0.0:
            raise BadLineParams("zero denominator")
        if num.size > den.size:
            raise BadLineParams(
                f"improper transfer function: deg(num)={num.size - 1} > deg(den)={den.size - 1}"
            )
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @property
    def poles(self) -> np.ndarray:
        if self.den.size == 1:
            return np.zeros(0, dtype=complex)
        return npoly.polyroots(self.den)

    @property
    def feedthrough(self) -> float:
        """Limit of the response as |s| -> inf (0 when strictly proper)."""
        if self.num.size == self.den.size:
            return float(self.num[-1] / self.den[-1])
        return 0.0

    def __call__(self, s: complex) -> complex:
        return eval_frequency(self, s)

    def times_inverse_s(self) -> "RationalTransfer":
        """This transfer multiplied by 1/s (denominator shifted one power up)."""
        return RationalTransfer(self.num, np.concatenate(([0.0], self.den)))


@dataclass(frozen=True)
class StateSpace:
    """Real state-space realization (A, B, C, D); evaluation is C (sI - A)^-1 B + D."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        B = np.atleast_2d(np.asarray(self.B, dtype=float))
        C = np.atleast_2d(np.asarray(self.C, dtype=float))
        D = np.atleast_2d(np.asarray(self.D, dtype=float))
        n = A.shape[0]
        if A.shape != (n, n):
            raise DimensionMismatch(f"A must be square, got {A.shape}")
        if B.shape[0] != n or C.shape[1] != n or D.shape != (C.shape[0], B.shape[1]):
            raise DimensionMismatch(
                f"inconsistent realization shapes A{A.shape} B{B.shape} C{C.shape} D{D.shape}"
            )
        if not all(np.isfinite(m).all() for m in (A, B, C, D)):
            raise DimensionMismatch("realization entries must be finite")
        for name, m in (("A", A), ("B", B), ("C", C), ("D", D)):
            object.__setattr__(self, name, m)

    @property
    def order(self) -> int:
        return self.A.shape[0]

    def __call__(self, s: complex) -> complex | np.ndarray:
        return eval_frequency(self, s)


def eval_frequency(model: RationalTransfer | StateSpace, s: complex):
    """Evaluate a model at a complex frequency; ``inf`` means the feedthrough limit.

    Returns a complex scalar for scalar models, a complex (p, q) matrix for
    state-space models with more than one input/output.  Raises PoleHit when s
    is within ``POLE_TOL`` of a pole.
    """
    s = complex(s)
    if np.isinf(s):
        if isinstance(model, RationalTransfer):
            return complex(model.feedthrough)
        D = model.D
        return complex(D[0, 0]) if D.shape == (1, 1) else D.astype(complex)
    if isinstance(model, RationalTransfer):
        poles = model.poles
        if poles.size and np.min(np.abs(poles - s)) < POLE_TOL:
            raise PoleHit(f"s={s} is within {POLE_TOL} of a pole")
        return complex(npoly.polyval(s, model.num) / npoly.polyval(s, model.den))
    n = model.order
    if n == 0:
        val = model.D.astype(complex)
    else:
        mat = s * np.eye(n) - model.A
        try:
            x = np.linalg.solve(mat, model.B.astype(complex))
        except np.linalg.LinAlgError:
            raise PoleHit(f"s={s} coincides with a pole of the realization") from None
        val = model.C @ x + model.D
    return complex(val[0, 0]) if val.shape == (1, 1) else val


def to_statespace(rtf: RationalTransfer) -> StateSpace:
    """Controllable-canonical realization of a proper scalar rational transfer."""
    den = rtf.den / rtf.den[-1]
    num = rtf.num / rtf.den[-1]
    n = den.size - 1
    if num.size == den.size:
        d = num[-1]
        num = _trim(num - d * den)
    else:
        d = 0.0
    if n == 0:
        return StateSpace(np.zeros((0, 0)), np.zeros((0, 1)), np.zeros((1, 0)), [[d]])
    A = np.zeros((n, n))
    A[:-1, 1:] = np.eye(n - 1)
    A[-1, :] = -den[:-1]
    B = np.zeros((n, 1))
    B[-1, 0] = 1.0
    C = np.zeros((1, n))
    C[0, : num.size] = num
    return StateSpace(A, B, C, [[d]])


def series_integrator(ss: StateSpace) -> StateSpace:
    """Realization of (1/s) * ss for a SISO realization (output integrated)."""
    if ss.B.shape[1] != 1 or ss.C.shape[0] != 1:
        raise DimensionMismatch("series_integrator expects a SISO realization")
    n = ss.order
    A = np.zeros((n + 1, n + 1))
    A[:n, :n] = ss.A
    A[n, :n] = ss.C[0]
    B = np.zeros((n + 1, 1))
    B[:n, 0] = ss.B[:, 0]
    B[n, 0] = ss.D[0, 0]
    C = np.zeros((1, n + 1))
    C[0, n] = 1.0
    return StateSpace(A, B, C, [[0.0]])


# -- line models ---------------------------------------------------------------

SPR_GRID = np.concatenate(([0.0], np.logspace(-6, 9, 2001)))

RL = "rl"
SPR = "spr"
POLE_AT_ORIGIN = "pole_at_origin"
LINE_KINDS = (RL, SPR, POLE_AT_ORIGIN)


@dataclass(frozen=True)
class LineModel:
    """A power line: voltage difference in, line current out (admittance units).

    ``kind`` is one of ``rl`` (series resistance/inductance), ``spr`` (a
    user-supplied strictly positive-real rational) or ``pole_at_origin``
    (positive real with a single integrator, tf = h/s).
    """

    kind: str
    tf: RationalTransfer
    r: float = 0.0
    l: float = 0.0
    h: RationalTransfer | None = None
    realization: StateSpace = field(init=False)

    def __post_init__(self):
        if self.kind not in LINE_KINDS:
            raise BadLineParams(f"unknown line kind {self.kind!r}")
        if self.kind == POLE_AT_ORIGIN:
            real = series_integrator(to_statespace(self.h))
        else:
            real = to_statespace(self.tf)
        object.__setattr__(self, "realization", real)

    @property
    def in_rh_inf(self) -> bool:
        return self.kind != POLE_AT_ORIGIN

    def __call__(self, s: complex) -> complex:
        return eval_frequency(self.tf, s)

    def dc_gain(self) -> float:
        """L(0); only defined for lines without the origin pole."""
        if not self.in_rh_inf:
            raise PoleHit("line has a pole at the origin; no finite DC gain")
        return float(eval_frequency(self.tf, 0.0).real)


def _check_spr(tf: RationalTransfer, what: str) -> None:
    poles = tf.poles
    if poles.size and np.max(poles.real) >= -POLE_TOL:
        raise NotSPR(f"{what}: pole in the closed right half-plane")
    # sign of Re(response) via Re(num * conj(den)): no cancellation-prone division;
    # tolerance relative to term magnitude (Re legitimately -> 0+ at high omega)
    nv = npoly.polyval(1j * SPR_GRID, tf.num)
    dv = npoly.polyval(1j * SPR_GRID, tf.den)
    re_scaled = (nv * dv.conj()).real
    floor = -1e-9 * np.abs(nv) * np.abs(dv)
    worst = int(np.argmin(re_scaled - floor))
    if re_scaled[worst] <= floor[worst]:
        val = re_scaled[worst] / abs(dv[worst]) ** 2
        raise NotSPR(
            f"{what}: Re of the response is {val:.3e} at omega={SPR_GRID[worst]:.6g}"
        )


def build_line(kind: str, *, r: float | None = None, l: float | None = None,
               tf: RationalTransfer | None = None, h: RationalTransfer | None = None) -> LineModel:
    """Construct and validate a line model.

    rl: requires r > 0, l > 0; tf = 1/(l s + r).
    spr: requires a strictly positive-real rational ``tf`` (dense-grid test).
    pole_at_origin: requires ``h`` positive real with h(0) > 0 and no closed
    right-half-plane poles; tf = h/s.
    """
    if kind == RL:
        if r is None or l is None or r <= 0.0 or l <= 0.0:
            raise BadLineParams(f"rl line needs r > 0 and l > 0, got r={r}, l={l}")
        return LineModel(kind=RL, tf=RationalTransfer([1.0], [r, l]), r=float(r), l=float(l))
    if kind == SPR:
        if tf is None:
            raise BadLineParams("spr line needs a transfer function")
        _check_spr(tf, "spr line")
        return LineModel(kind=SPR, tf=tf)
    if kind == POLE_AT_ORIGIN:
        if h is None:
            raise BadLineParams("pole_at_origin line needs the finite factor h")
        hpoles = h.poles
        if hpoles.size and np.max(hpoles.real) >= -POLE_TOL:
            raise BadLineParams("pole_at_origin line: h has a closed right-half-plane pole")
        h0 = eval_frequency(h, 0.0).real
        if h0 <= 0.0:
            raise BadLineParams(f"pole_at_origin line needs h(0) > 0, got {h0}")
        tf_full = h.times_inverse_s()
        grid = SPR_GRID[1:]
        vals = npoly.polyval(1j * grid, tf_full.num) / npoly.polyval(1j * grid, tf_full.den)
        if np.min(vals.real) < -1e-9:
            raise BadLineParams("pole_at_origin line is not positive real on the axis")
        return LineModel(kind=POLE_AT_ORIGIN, tf=tf_full, h=h, l=1.0 / h0)
    raise BadLineParams(f"unknown line kind {kind!r}")


# -- bus realization admissibility ----------------------------------------------

STABILITY_MARGIN = 1e-9


@dataclass(frozen=True)
class AssumptionDiagnostic:
    passed: bool
    eigenvalues: np.ndarray
    offending: np.ndarray


def check_bus_assumption(realization: StateSpace) -> AssumptionDiagnostic:
    """PASS iff every eigenvalue of the state matrix has real part < -1e-9."""
    if realization.order == 0:
        return AssumptionDiagnostic(True, np.zeros(0, dtype=complex), np.zeros(0, dtype=complex))
    eig = np.linalg.eigvals(realization.A)
    bad = eig[eig.real >= -STABILITY_MARGIN]
    return AssumptionDiagnostic(bad.size == 0, eig, bad)
