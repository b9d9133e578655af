"""Ground-truth machinery: closed-loop eigenvalues, determinant winding, homotopy.

Everything here is independent of the frequency-sweep certificate and exists
to validate it: assemble the full interconnected state matrix and inspect its
spectrum, walk the return-ratio determinant around a Nyquist contour and count
encirclements of the origin of det(I + Q), scale the buses from zero to one
and confirm the critical point is never touched, and check the two network
splits produce return-ratios with identical nonzero spectra.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AlgebraicLoop, BadRadii, PhaseJump, PoleHit
from .lti import eval_frequency
from .netgraph import build_coupling, build_incidence
from .network import MODE_ORIGIN_POLE, NetworkSpec, PreparedNetwork, prepare

STABLE = "STABLE"
UNSTABLE = "UNSTABLE"

EIG_MARGIN = 1e-9
RANK_TOL = 1e-8
DET_FLOOR = 1e-9


@dataclass(frozen=True)
class ClosedLoop:
    """Autonomous state matrix of the interconnected network with state labels."""

    statespace_A: np.ndarray
    labels: tuple[str, ...]

    @property
    def dimension(self) -> int:
        return self.statespace_A.shape[0]


def assemble_closed_loop(spec: NetworkSpec, prepared: PreparedNetwork | None = None) -> ClosedLoop:
    """Wire bus and line realizations through the incidence matrix.

    Bus inputs are minus the incident line currents, line inputs are the
    oriented bus voltage differences.  Well-posedness requires
    I + D_bus * A * D_line * A^T to be invertible (always true for strictly
    proper lines).
    """
    prep = prepared if prepared is not None else prepare(spec)
    inc = prep.incidence.astype(float)
    nb, nl = inc.shape
    bus_ss = prep.bus_realizations
    line_ss = [line.realization for line in spec.lines]

    labels = []
    for j, ss in enumerate(bus_ss):
        labels.extend(f"bus{j + 1}_x{i + 1}" for i in range(ss.order))
    for k, ss in enumerate(line_ss):
        labels.extend(f"line{k + 1}_x{i + 1}" for i in range(ss.order))

    n_bus = sum(ss.order for ss in bus_ss)
    n_line = sum(ss.order for ss in line_ss)
    A_B = np.zeros((n_bus, n_bus))
    B_B = np.zeros((n_bus, nb))
    C_B = np.zeros((nb, n_bus))
    D_B = np.zeros((nb, nb))
    pos = 0
    for j, ss in enumerate(bus_ss):
        sl = slice(pos, pos + ss.order)
        A_B[sl, sl] = ss.A
        B_B[sl, j] = ss.B[:, 0]
        C_B[j, sl] = ss.C[0, :]
        D_B[j, j] = ss.D[0, 0]
        pos += ss.order

    A_L = np.zeros((n_line, n_line))
    B_L = np.zeros((n_line, nl))
    C_L = np.zeros((nl, n_line))
    D_L = np.zeros((nl, nl))
    pos = 0
    for k, ss in enumerate(line_ss):
        sl = slice(pos, pos + ss.order)
        A_L[sl, sl] = ss.A
        B_L[sl, k] = ss.B[:, 0]
        C_L[k, sl] = ss.C[0, :]
        D_L[k, k] = ss.D[0, 0]
        pos += ss.order

    loop = np.eye(nb) + D_B @ inc @ D_L @ inc.T
    if abs(np.linalg.det(loop)) < 1e-12:
        raise AlgebraicLoop("bus and line feedthroughs close a singular algebraic loop")
    E = np.linalg.inv(loop)
    # v = E C_B x_B - E D_B inc C_L x_L;  i_line_out = C_L x_L + D_L inc^T v
    V_from_xB = E @ C_B
    V_from_xL = -E @ D_B @ inc @ C_L
    I_from_xB = D_L @ inc.T @ V_from_xB
    I_from_xL = C_L + D_L @ inc.T @ V_from_xL

    A_cl = np.zeros((n_bus + n_line, n_bus + n_line))
    A_cl[:n_bus, :n_bus] = A_B - B_B @ inc @ I_from_xB
    A_cl[:n_bus, n_bus:] = -B_B @ inc @ I_from_xL
    A_cl[n_bus:, :n_bus] = B_L @ inc.T @ V_from_xB
    A_cl[n_bus:, n_bus:] = A_L + B_L @ inc.T @ V_from_xL
    return ClosedLoop(A_cl, tuple(labels))


@dataclass(frozen=True)
class StabilityVerdict:
    verdict: str
    spectrum: np.ndarray
    spectral_abscissa: float
    zero_modes: int
    semisimple: bool | None


def eig_stability(cl: ClosedLoop, mode: str) -> StabilityVerdict:
    """Spectral stability test of the assembled network.

    Strictly stable lines: STABLE iff every eigenvalue has real part below
    -1e-9.  Origin-pole lines: eigenvalues on the axis must all be numerically
    zero and the zero eigenvalue semisimple (rank of A equals rank of A^2), so
    trajectories converge to a constant instead of growing.
    """
    A = cl.statespace_A
    if cl.dimension == 0:
        return StabilityVerdict(STABLE, np.zeros(0, dtype=complex), -math.inf, 0, None)
    eig = np.linalg.eigvals(A)
    abscissa = float(np.max(eig.real))
    if mode != MODE_ORIGIN_POLE:
        verdict = STABLE if abscissa < -EIG_MARGIN else UNSTABLE
        return StabilityVerdict(verdict, eig, abscissa, 0, None)
    scale = max(float(np.max(np.abs(eig))), 1.0)
    rank_A = np.linalg.matrix_rank(A, tol=RANK_TOL * float(np.linalg.norm(A, 2)))
    n_zero = cl.dimension - rank_A
    A2 = A @ A
    rank_A2 = np.linalg.matrix_rank(A2, tol=RANK_TOL * float(np.linalg.norm(A2, 2)))
    semisimple = (cl.dimension - rank_A2) == n_zero
    order = np.argsort(np.abs(eig))
    zero_group = eig[order[:n_zero]]
    rest = eig[order[n_zero:]]
    zero_ok = n_zero == 0 or np.max(np.abs(zero_group)) <= 1e-6 * scale
    rest_ok = rest.size == 0 or np.max(rest.real) < -EIG_MARGIN
    verdict = STABLE if (zero_ok and rest_ok and semisimple) else UNSTABLE
    return StabilityVerdict(verdict, eig, abscissa, int(n_zero), semisimple)


# -- return ratios -------------------------------------------------------------------

BUSLINE = "busline"
COUPLED = "coupled"


def _diag_values(models, s: complex) -> np.ndarray:
    return np.array([eval_frequency(m, s) for m in models])


def return_ratio(spec: NetworkSpec, s: complex, which: str = BUSLINE,
                 prepared: PreparedNetwork | None = None) -> np.ndarray:
    """Open-loop return ratio at a complex frequency.

    busline: B(s) A L(s) A^T (size n_buses); coupled: blockdiag(G_j) M M^T
    (size n_buses * n_edges).  Both have identical nonzero spectra.
    """
    prep = prepared if prepared is not None else prepare(spec)
    inc = prep.incidence.astype(float)
    B = _diag_values(prep.bus_realizations, s)
    L = _diag_values([line.tf for line in spec.lines], s)
    if which == BUSLINE:
        return B[:, None] * (inc * L[None, :]) @ inc.T
    if which == COUPLED:
        coupling = prep.coupling
        nb, nl = inc.shape
        G = np.zeros((nb * nl, nb * nl), dtype=complex)
        for j in range(nb):
            a = inc[j, :]
            G[j * nl:(j + 1) * nl, j * nl:(j + 1) * nl] = np.outer(L * a * B[j], a)
        return G @ coupling.gram.astype(float)
    raise ValueError(f"unknown return-ratio kind {which!r}")


def open_loop_poles(spec: NetworkSpec, prepared: PreparedNetwork | None = None) -> np.ndarray:
    """Poles of the open-loop return ratio (bus and line realization eigenvalues)."""
    prep = prepared if prepared is not None else prepare(spec)
    chunks = [np.linalg.eigvals(ss.A) for ss in prep.bus_realizations if ss.order]
    chunks += [np.linalg.eigvals(line.realization.A) for line in spec.lines
               if line.realization.order]
    if not chunks:
        return np.zeros(0, dtype=complex)
    return np.concatenate(chunks)


# -- contours ------------------------------------------------------------------------


@dataclass(frozen=True)
class NyquistContour:
    """Ordered samples of a closed contour around the right half-plane boundary."""

    points: np.ndarray
    kind: str
    r: float
    R: float


def _log_omegas(lo: float, hi: float, n: int) -> np.ndarray:
    return np.logspace(math.log10(lo), math.log10(hi), n)


def standard_contour(r: float, R: float, samples_per_segment: int = 400) -> NyquistContour:
    """Imaginary axis from -jR to +jR (through 0) closed by the right semicircle."""
    if not (0.0 < r < R):
        raise BadRadii(f"need 0 < r < R, got r={r}, R={R}")
    up = _log_omegas(r, R, samples_per_segment)
    axis = np.concatenate([-up[::-1], [0.0], up])
    theta = np.linspace(math.pi / 2, -math.pi / 2, samples_per_segment)
    arc = R * np.exp(1j * theta)
    points = np.concatenate([1j * axis, arc[1:]])
    return NyquistContour(points, "imaginary_axis", r, R)


def modified_contour(r: float, R: float, samples_per_segment: int = 400) -> NyquistContour:
    """Axis with a small right-half-plane detour around the origin pole.

    Traversal: -jR up to -jr, the semicircle through +r to +jr, up to +jR,
    then the large right semicircle back to -jR.
    """
    if not (0.0 < r < R):
        raise BadRadii(f"need 0 < r < R, got r={r}, R={R}")
    up = _log_omegas(r, R, samples_per_segment)
    lower_axis = 1j * (-up[::-1])
    detour_theta = np.linspace(-math.pi / 2, math.pi / 2, samples_per_segment)
    detour = r * np.exp(1j * detour_theta)
    upper_axis = 1j * up
    big_theta = np.linspace(math.pi / 2, -math.pi / 2, samples_per_segment)
    big = R * np.exp(1j * big_theta)
    points = np.concatenate([lower_axis, detour[1:], upper_axis[1:], big[1:]])
    return NyquistContour(points, "modified", r, R)


def default_contour(spec: NetworkSpec, prepared: PreparedNetwork | None = None,
                    samples_per_segment: int = 400) -> NyquistContour:
    """Contour sized from the open-loop poles (detour radius from the smallest, closure from the largest)."""
    poles = open_loop_poles(spec, prepared)
    mags = np.abs(poles)
    nonzero = mags[mags > 1e-12]
    largest = float(np.max(mags)) if mags.size else 1.0
    smallest = float(np.min(nonzero)) if nonzero.size else 1.0
    R = 1e3 * max(largest, 1.0)
    r = 1e-3 * min(smallest, 1.0)
    builder = modified_contour if spec.mode == MODE_ORIGIN_POLE else standard_contour
    return builder(r, R, samples_per_segment)


def _contour_midpoint(s1: complex, s2: complex) -> complex:
    """Midpoint refinement staying on the contour segment (arcs keep their radius)."""
    m1, m2 = abs(s1), abs(s2)
    on_axis = abs(s1.real) < 1e-12 * max(m1, 1.0) and abs(s2.real) < 1e-12 * max(m2, 1.0)
    if not on_axis and abs(m1 - m2) <= 1e-9 * max(m1, m2):
        mid = (s1 + s2) / 2.0
        if abs(mid) == 0.0:
            return mid
        return mid / abs(mid) * ((m1 + m2) / 2.0)
    return (s1 + s2) / 2.0


def _q_values(spec: NetworkSpec, prep: PreparedNetwork, points: np.ndarray) -> np.ndarray:
    """Batched busline return ratio along contour points: (npts, nb, nb)."""
    inc = prep.incidence.astype(float)
    B = np.stack([_diag_values(prep.bus_realizations, s) for s in points])
    L = np.stack([_diag_values([line.tf for line in spec.lines], s) for s in points])
    tmp = (inc[None, :, :] * L[:, None, :]) @ inc.T
    return B[:, :, None] * tmp


@dataclass(frozen=True)
class WindingResult:
    winding: int
    min_det: float
    samples: int


def det_winding(contour: NyquistContour, tau: float, spec: NetworkSpec,
                prepared: PreparedNetwork | None = None,
                max_refinements: int = 4) -> WindingResult:
    """Winding number of det(I + tau * Q) around the origin along the contour.

    The unwrapped phase increment is divided by 2*pi and rounded; segments
    where adjacent samples jump by more than pi/2 are refined (midpoint
    insertion) up to ``max_refinements`` times before raising PhaseJump.
    Also returns the minimum |det| along the contour, certifying the critical
    point stays off the eigenloci.
    """
    prep = prepared if prepared is not None else prepare(spec)
    points = np.asarray(contour.points, dtype=complex)
    dets = _det_along(spec, prep, points, tau)
    for _ in range(max_refinements):
        ang = np.angle(dets)
        d = np.diff(ang)
        d = (d + math.pi) % (2.0 * math.pi) - math.pi
        bad = np.flatnonzero(np.abs(d) > math.pi / 2)
        if bad.size == 0:
            break
        inserts = np.array([_contour_midpoint(points[i], points[i + 1]) for i in bad])
        new_points = []
        for i in range(points.size):
            new_points.append(points[i])
            if i in set(bad.tolist()):
                new_points.append(inserts[np.searchsorted(bad, i)])
        points = np.array(new_points)
        dets = _det_along(spec, prep, points, tau)
    else:
        ang = np.angle(dets)
        d = np.diff(ang)
        d = (d + math.pi) % (2.0 * math.pi) - math.pi
        if np.any(np.abs(d) > math.pi / 2):
            raise PhaseJump(
                f"contour under-sampled after {max_refinements} refinements "
                f"(max jump {float(np.max(np.abs(d))):.3f} rad)")
    ang = np.angle(dets)
    d = np.diff(ang)
    d = (d + math.pi) % (2.0 * math.pi) - math.pi
    total = float(np.sum(d))
    winding = int(round(total / (2.0 * math.pi)))
    return WindingResult(winding, float(np.min(np.abs(dets))), points.size)


def _det_along(spec: NetworkSpec, prep: PreparedNetwork, points: np.ndarray,
               tau: float) -> np.ndarray:
    poles = open_loop_poles(spec, prep)
    if spec.mode == MODE_ORIGIN_POLE:
        poles = np.concatenate([poles, np.zeros(1, dtype=complex)])
    if poles.size:
        dist = np.min(np.abs(points[:, None] - poles[None, :]), axis=1)
        if np.min(dist) < 1e-12:
            raise PoleHit("contour passes through an open-loop pole")
    Q = _q_values(spec, prep, points)
    nb = Q.shape[1]
    return np.linalg.det(np.eye(nb)[None, :, :] + tau * Q)


def homotopy_check(spec: NetworkSpec, contour: NyquistContour | None = None,
                   tau_grid: np.ndarray | None = None,
                   prepared: PreparedNetwork | None = None) -> tuple[bool, dict]:
    """Scale the buses from 0 to 1 and verify the critical point is never touched.

    True iff at every tau the winding number is zero and min |det(I + tau Q)|
    exceeds 1e-9 along the contour.
    """
    prep = prepared if prepared is not None else prepare(spec)
    if contour is None:
        contour = default_contour(spec, prep)
    taus = np.linspace(0.0, 1.0, 51) if tau_grid is None else np.asarray(tau_grid, dtype=float)
    points = np.asarray(contour.points, dtype=complex)
    Q = _q_values(spec, prep, points)
    eye = np.eye(Q.shape[1])
    details = {"taus": taus.tolist(), "winding": [], "min_det": []}
    ok = True
    for tau in taus:
        dets = np.linalg.det(eye[None, :, :] + float(tau) * Q)
        d = np.diff(np.angle(dets))
        d = (d + math.pi) % (2.0 * math.pi) - math.pi
        if np.any(np.abs(d) > math.pi / 2):
            # under-sampled for this tau: fall back to the self-refining walk
            res = det_winding(contour, float(tau), spec, prep)
            winding, min_det = res.winding, res.min_det
        else:
            winding = int(round(float(np.sum(d)) / (2.0 * math.pi)))
            min_det = float(np.min(np.abs(dets)))
        details["winding"].append(winding)
        details["min_det"].append(min_det)
        if winding != 0 or min_det <= DET_FLOOR:
            ok = False
    return ok, details


def scaled_gain_bound(omega: float, lines, incidence: np.ndarray) -> float:
    """Spectral radius of the weight-scaled two-sided line coupling at omega.

    F = J^-1 Xi* J^-1 Xi with Xi = A L A^T and J the diagonal of incident-line
    weights; the induced-norm argument bounds it by 1.
    """
    if math.isinf(omega):
        raise ValueError("finite frequency required")
    inc = np.asarray(incidence, dtype=float)
    nb = inc.shape[0]
    L = np.array([eval_frequency(line.tf, 1j * omega) for line in lines])
    Xi = (inc * L[None, :]) @ inc.T
    weights = np.empty(nb)
    for j in range(nb):
        edges = np.flatnonzero(inc[j, :] != 0)
        vals = L[edges]
        weights[j] = abs(vals.sum()) + np.abs(vals).sum()
    Jinv = np.diag(1.0 / weights)
    F = Jinv @ Xi.conj().T @ Jinv @ Xi
    return float(np.max(np.abs(np.linalg.eigvals(F))))


def eigenloci_distance(spec: NetworkSpec, omega: float,
                       prepared: PreparedNetwork | None = None) -> float:
    """Distance from the critical point -1 to the busline return-ratio spectrum at omega."""
    prep = prepared if prepared is not None else prepare(spec)
    s = 1j * omega if not math.isinf(omega) else complex(math.inf)
    Q = return_ratio(spec, s, BUSLINE, prep)
    eig = np.linalg.eigvals(Q)
    return float(np.min(np.abs(eig + 1.0)))


def nonzero_eig_mismatch(spec: NetworkSpec, s: complex,
                         prepared: PreparedNetwork | None = None,
                         tol_scale: float = 1e-8) -> float:
    """Relative multiset mismatch between the nonzero spectra of the two splits."""
    prep = prepared if prepared is not None else prepare(spec)
    eo = np.linalg.eigvals(return_ratio(spec, s, BUSLINE, prep))
    en = np.linalg.eigvals(return_ratio(spec, s, COUPLED, prep))
    scale = max(float(np.max(np.abs(eo))) if eo.size else 0.0,
                float(np.max(np.abs(en))) if en.size else 0.0, 1e-30)
    eo = eo[np.abs(eo) > tol_scale * scale]
    en = en[np.abs(en) > tol_scale * scale]
    if eo.size != en.size:
        return math.inf
    worst = 0.0
    remaining = list(en)
    for lam in eo:
        dists = [abs(lam - mu) for mu in remaining]
        idx = int(np.argmin(dists))
        worst = max(worst, dists[idx] / max(abs(lam), 1e-30))
        remaining.pop(idx)
    return worst
