"""Decentralized frequency-domain certification core.

Two network splits are checked pointwise in frequency.  Split 1 is the
classical bus/line split: every bus must be passive or satisfy a small-gain
bound weighted by its incident lines.  Split 2 groups each bus with its
incident lines into a rank-one coupled block and checks block passivity, a
block small-gain bound against the integer coupling Gram (whose norm is 2), or
a per-line multiplier family searched on a coarse grid.  The overall check at
one frequency is "split 1 holds at every bus" OR "split 2 holds at every bus";
the certificate requires that at every grid frequency (plus the zero-frequency
positivity check when lines carry an origin pole).

All checks are sufficient only: a failed frequency makes the instance
UNDECIDED, never "unstable".
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DimensionMismatch, IsolatedBus
from .lti import LineModel, eval_frequency
from .netgraph import neighbor_edges
from .network import MODE_ORIGIN_POLE, NetworkSpec, PreparedNetwork, prepare
from .report import (
    CERTIFIED,
    UNDECIDED,
    Band,
    BranchBoundary,
    BusChecks,
    FrequencyVerdict,
    MultiplierRecord,
    StabilityReport,
)

EIG_TOL = 1e-12


# -- quadratic-constraint predicates ---------------------------------------------


@dataclass(frozen=True)
class QCMultiplier:
    """Block multiplier (pi11, pi12, pi22) with Hermitian diagonal blocks."""

    pi11: np.ndarray
    pi12: np.ndarray
    pi22: np.ndarray

    def __post_init__(self):
        for name in ("pi11", "pi12", "pi22"):
            block = np.atleast_2d(np.asarray(getattr(self, name), dtype=complex))
            object.__setattr__(self, name, block)
        for name in ("pi11", "pi22"):
            block = getattr(self, name)
            if np.max(np.abs(block - block.conj().T)) > 1e-12:
                raise DimensionMismatch(f"{name} must be Hermitian")


def _as_matrix(X) -> np.ndarray:
    return np.atleast_2d(np.asarray(X, dtype=complex))


def _min_eig(H: np.ndarray) -> float:
    H = (H + H.conj().T) / 2.0
    return float(np.linalg.eigvalsh(H)[0])


def _max_eig(H: np.ndarray) -> float:
    H = (H + H.conj().T) / 2.0
    return float(np.linalg.eigvalsh(H)[-1])


def qc_holds(X, pi: QCMultiplier, eps: float = 0.0) -> tuple[bool, float]:
    """Membership of X in the quadratic constraint (pi, eps).

    True iff X* pi11 X + X* pi12 + pi12* X + pi22 - eps X*X is positive
    semidefinite; the returned slack is its minimum eigenvalue.
    """
    X = _as_matrix(X)
    m, n = X.shape
    if pi.pi11.shape != (m, m) or pi.pi12.shape != (m, n) or pi.pi22.shape != (n, n):
        raise DimensionMismatch(
            f"multiplier blocks {pi.pi11.shape}/{pi.pi12.shape}/{pi.pi22.shape} "
            f"do not fit X {X.shape}"
        )
    S = X.conj().T @ pi.pi11 @ X + X.conj().T @ pi.pi12 + pi.pi12.conj().T @ X + pi.pi22
    S = S - eps * (X.conj().T @ X)
    slack = _min_eig(S)
    return slack >= -EIG_TOL, slack


def qc_complement_holds(X, pi: QCMultiplier, eps_bar: float = 0.0) -> tuple[bool, float]:
    """Complementary membership used on the interconnection side.

    True iff pi11 - pi12 X - X* pi12* + X* pi22 X <= -eps_bar I; the returned
    slack is minus the maximum eigenvalue of the left side.
    """
    X = _as_matrix(X)
    n, m = X.shape
    if pi.pi11.shape != (m, m) or pi.pi12.shape != (m, n) or pi.pi22.shape != (n, n):
        raise DimensionMismatch(
            f"multiplier blocks {pi.pi11.shape}/{pi.pi12.shape}/{pi.pi22.shape} "
            f"do not fit X {X.shape}"
        )
    T = pi.pi11 - pi.pi12 @ X - X.conj().T @ pi.pi12.conj().T + X.conj().T @ pi.pi22 @ X
    slack = -_max_eig(T)
    return slack >= eps_bar - EIG_TOL, slack


def passivity_multiplier(n: int = 1) -> QCMultiplier:
    eye = np.eye(n)
    return QCMultiplier(np.zeros((n, n)), eye, np.zeros((n, n)))


def gain_multiplier(weight: float, n: int = 1) -> QCMultiplier:
    """Weighted small-gain multiplier diag(-w, 1/w)."""
    eye = np.eye(n)
    return QCMultiplier(-weight * eye, np.zeros((n, n)), eye / weight)


@dataclass(frozen=True)
class LineMultiplier:
    """One scalar multiplier triple per line, shared by every bus at a frequency.

    Constraints: pi11 <= 0, pi22 >= 0 and 2*pi22 <= 2*Re(pi12), so the
    coupling-side complement holds automatically for any selection.
    """

    pi11: np.ndarray
    pi12: np.ndarray
    pi22: np.ndarray

    def __post_init__(self):
        pi11 = np.atleast_1d(np.asarray(self.pi11, dtype=float))
        pi12 = np.atleast_1d(np.asarray(self.pi12, dtype=complex))
        pi22 = np.atleast_1d(np.asarray(self.pi22, dtype=float))
        if not (pi11.shape == pi12.shape == pi22.shape):
            raise DimensionMismatch("multiplier arrays must have one entry per line")
        if np.any(pi11 > EIG_TOL):
            raise DimensionMismatch("pi11 entries must be nonpositive")
        if np.any(pi22 < -EIG_TOL):
            raise DimensionMismatch("pi22 entries must be nonnegative")
        if np.any(-2.0 * pi12.real + 2.0 * pi22 > EIG_TOL):
            raise DimensionMismatch("side condition 2*pi22 <= 2*Re(pi12) violated")
        object.__setattr__(self, "pi11", pi11)
        object.__setattr__(self, "pi12", pi12)
        object.__setattr__(self, "pi22", pi22)

    @property
    def n_edges(self) -> int:
        return self.pi11.size

    def as_qc(self) -> QCMultiplier:
        return QCMultiplier(np.diag(self.pi11), np.diag(self.pi12), np.diag(self.pi22))

    def record(self) -> MultiplierRecord:
        return MultiplierRecord(
            pi11=[float(v) for v in self.pi11],
            pi12_re=[float(v.real) for v in self.pi12],
            pi12_im=[float(v.imag) for v in self.pi12],
            pi22=[float(v) for v in self.pi22],
        )


def zero_line_multiplier(n_edges: int) -> LineMultiplier:
    z = np.zeros(n_edges)
    return LineMultiplier(z, z.astype(complex), z.copy())


# -- per-bus checks ---------------------------------------------------------------


def line_weight(j: int, omega: float, lines: tuple[LineModel, ...],
                incidence: np.ndarray) -> float:
    """Incident-line weight |sum L_k| + sum |L_k| over the edges at bus j."""
    edges = neighbor_edges(incidence, j)
    if edges.size == 0:
        raise IsolatedBus(f"bus {j} has no incident lines")
    vals = np.array([eval_frequency(lines[k].tf, 1j * omega) for k in edges])
    return _weight_from_values(vals)


def _weight_from_values(vals: np.ndarray) -> float:
    return float(abs(vals.sum()) + np.abs(vals).sum())


@dataclass(frozen=True)
class Split1Result:
    passivity: bool
    passivity_margin: float
    smallgain: bool
    smallgain_margin: float
    passed: bool
    branch: str | None


def split1_check(bus_value: complex, weight: float, eps: float) -> Split1Result:
    """Bus/line split at one bus: passivity OR weighted small gain, with margin eps.

    The weight is the incident-line weight; a zero weight (lines vanished at
    the frequency-axis closure) makes the small-gain side hold with infinite
    margin.
    """
    b2 = abs(bus_value) ** 2
    p_slack = 2.0 * bus_value.real - eps * b2
    if weight == 0.0:
        sg_slack = math.inf
    else:
        sg_slack = 1.0 / weight - (weight + eps) * b2
    passivity = p_slack >= -EIG_TOL
    smallgain = sg_slack >= -EIG_TOL
    scale = max(b2, 1e-30)
    branch = None
    if passivity or smallgain:
        candidates = []
        if passivity:
            candidates.append((p_slack / scale, "passivity"))
        if smallgain:
            candidates.append((sg_slack / scale, "small_gain"))
        branch = max(candidates)[1]
    return Split1Result(passivity, p_slack, smallgain, sg_slack, passivity or smallgain, branch)


def coupled_block(j: int, omega: float, lines: tuple[LineModel, ...],
                  incidence: np.ndarray, bus_value: complex) -> np.ndarray:
    """Rank-one coupled block of bus j with its incident lines.

    G_j = diag(L_k) a_j^T B_j a_j with a_j the incidence row of bus j; support
    is confined to the incident edges.
    """
    vals = np.array([eval_frequency(line.tf, 1j * omega) for line in lines])
    return _coupled_from_values(incidence[j, :].astype(float), vals, bus_value)


def _coupled_from_values(a_row: np.ndarray, line_values: np.ndarray,
                         bus_value: complex) -> np.ndarray:
    return np.outer(line_values * a_row * bus_value, a_row)


@dataclass(frozen=True)
class Split2Result:
    passivity: bool
    passivity_margin: float
    smallgain: bool
    smallgain_margin: float
    multiplier_pass: bool
    multiplier_margin: float | None
    passed: bool
    branch: str | None
    delta: tuple | None
    multiplier: LineMultiplier | None


@dataclass(frozen=True)
class SearchConfig:
    """Knobs of the split-2 multiplier/conic search (deterministic grids)."""

    budget: int = 2000
    delta_values: tuple = (0.0, 1e-2, 1e-1, 1.0, 1e1, 1e2)
    value_scales: tuple = (1e-2, 1e-1, 1.0, 1e1, 1e2)
    rounds: int = 3


DEFAULT_SEARCH = SearchConfig()


def _restrict(G: np.ndarray, support: np.ndarray) -> np.ndarray:
    return G[np.ix_(support, support)]


def _split2_cheap(Gs: np.ndarray, eps: float) -> tuple[float, float]:
    """(passivity slack, small-gain slack) of the restricted coupled block."""
    if Gs.size == 0:
        return 0.0, 0.5
    gram = Gs.conj().T @ Gs
    p_slack = _min_eig(Gs + Gs.conj().T - eps * gram)
    sig2 = _max_eig(gram)
    sg_slack = 0.5 - (2.0 + eps) * sig2
    return p_slack, sg_slack


class _Budget:
    def __init__(self, limit: int):
        self.limit = limit
        self.used = 0

    def take(self) -> bool:
        if self.used >= self.limit:
            return False
        self.used += 1
        return True


def _conic_slack(Gs: np.ndarray, support: np.ndarray, mult: LineMultiplier,
                 eps: float, delta_values: tuple, budget: _Budget) -> tuple[float, tuple]:
    """Best slack over the conic grid (d1, d2, 1) for a fixed line multiplier."""
    gram = Gs.conj().T @ Gs
    herm = Gs + Gs.conj().T
    eye = np.eye(Gs.shape[0])
    d12 = np.diag(mult.pi12[support])
    F3 = (Gs.conj().T @ np.diag(mult.pi11[support]) @ Gs
          + Gs.conj().T @ d12 + d12.conj().T @ Gs + np.diag(mult.pi22[support]))
    best = (-math.inf, (0.0, 0.0, 1.0))
    for d1 in delta_values:
        for d2 in delta_values:
            if not budget.take():
                return best
            S = d1 * herm + d2 * (0.5 * eye - 2.0 * gram) + F3 - eps * gram
            slack = _min_eig(S)
            if slack > best[0]:
                best = (slack, (float(d1), float(d2), 1.0))
    return best


def split2_check(j: int, omega: float, G: np.ndarray, eps: float,
                 search: SearchConfig = DEFAULT_SEARCH,
                 shared: LineMultiplier | None = None) -> Split2Result:
    """Coupled-block conditions at one bus, escalating through the branches.

    Order: block passivity, block small gain, then the per-line multiplier
    family (a supplied shared multiplier is used as-is; otherwise a standalone
    coarse-grid search with coordinate refinement runs for this bus alone).
    """
    G = np.asarray(G, dtype=complex)
    support = np.flatnonzero(np.abs(G).sum(axis=1) + np.abs(G).sum(axis=0))
    Gs = _restrict(G, support)
    p_slack, sg_slack = _split2_cheap(Gs, eps)
    passivity = p_slack >= -EIG_TOL
    smallgain = sg_slack >= -EIG_TOL
    if passivity or smallgain:
        branch = "passivity" if passivity else "small_gain"
        if passivity and smallgain:
            branch = "passivity" if p_slack >= sg_slack else "small_gain"
        return Split2Result(passivity, p_slack, smallgain, sg_slack,
                            False, None, True, branch, None, None)
    budget = _Budget(search.budget)
    if shared is not None:
        slack, delta = _conic_slack(Gs, support, shared, eps, search.delta_values, budget)
        mult = shared
    else:
        mult, per_bus = _search_shared_multiplier(
            [(j, Gs, support)], G.shape[0], eps, search)
        if mult is None:
            return Split2Result(False, p_slack, False, sg_slack,
                                False, None, False, None, None, None)
        slack, delta = per_bus[j]
    ok = slack >= -EIG_TOL
    branch = None
    if ok:
        branch = "multiplier" if delta[:2] == (0.0, 0.0) else "conic"
    return Split2Result(passivity, p_slack, smallgain, sg_slack,
                        ok, slack, ok, branch, delta if ok else None,
                        mult if ok else None)


def _search_shared_multiplier(blocks: list[tuple[int, np.ndarray, np.ndarray]],
                              n_edges: int, eps: float,
                              search: SearchConfig) -> tuple[LineMultiplier | None, dict]:
    """Coarse-grid coordinate search for one multiplier feasible for every block.

    blocks: (bus index, restricted coupled block, support edge indices).
    Returns (multiplier, {bus: (slack, delta)}) on success, (None, best) otherwise.
    """
    budget = _Budget(search.budget)
    union = sorted({int(k) for _, _, sup in blocks for k in sup})
    gscale = max(max((float(np.linalg.norm(Gs, 2)) for _, Gs, _ in blocks), default=0.0), 1e-9)

    pi11 = np.zeros(n_edges)
    pi12 = np.zeros(n_edges, dtype=complex)
    pi22 = np.zeros(n_edges)

    def objective() -> tuple[float, dict]:
        mult = LineMultiplier(pi11, pi12, pi22)
        per_bus = {}
        worst = math.inf
        for busj, Gs, sup in blocks:
            slack, delta = _conic_slack(Gs, sup, mult, eps, search.delta_values, budget)
            per_bus[busj] = (slack, delta)
            worst = min(worst, slack)
        return worst, per_bus

    best_obj, best_per_bus = objective()
    best_state = (pi11.copy(), pi12.copy(), pi22.copy())

    def try_value(setter) -> None:
        nonlocal best_obj, best_per_bus, best_state
        setter()
        obj, per_bus = objective()
        if obj > best_obj:
            best_obj, best_per_bus = obj, per_bus
            best_state = (pi11.copy(), pi12.copy(), pi22.copy())
        else:
            pi11[:], pi12[:], pi22[:] = best_state

    def set_imag(k: int, c: float) -> None:
        pi12[k] = complex(pi12[k].real, c)

    def set_real(k: int, c: float) -> None:
        # side condition keeps 0 <= pi22 <= Re(pi12)
        pi12[k] = complex(max(c, 0.0), pi12[k].imag)
        pi22[k] = min(pi22[k], pi12[k].real)

    def set_pi22(k: int, c: float) -> None:
        pi22[k] = min(max(c, 0.0), pi12[k].real)

    def set_pi11(k: int, c: float) -> None:
        pi11[k] = min(c, 0.0)

    magnitudes = [m * gscale for m in search.value_scales]
    for _ in range(search.rounds):
        if best_obj >= -EIG_TOL or budget.used >= budget.limit:
            break
        start_obj = best_obj
        for k in union:
            for mag in magnitudes:
                for cand in (mag, -mag):
                    try_value(lambda k=k, c=cand: set_imag(k, c))
                try_value(lambda k=k, c=mag: set_real(k, c))
                try_value(lambda k=k, c=mag: set_pi22(k, c))
                try_value(lambda k=k, c=-mag: set_pi11(k, c))
            if best_obj >= -EIG_TOL or budget.used >= budget.limit:
                break
        if best_obj <= start_obj:
            break
    pi11[:], pi12[:], pi22[:] = best_state
    mult = LineMultiplier(pi11, pi12, pi22)
    if best_obj >= -EIG_TOL:
        return mult, best_per_bus
    return None, best_per_bus


def dc_check(bus_value_at_zero: complex, eps: float) -> tuple[bool, float]:
    """Zero-frequency positivity: the bus DC response must be strictly positive.

    Required when lines carry an origin pole (their gain is unbounded at 0).
    """
    b0 = complex(bus_value_at_zero)
    slack = 2.0 * b0.real - eps * abs(b0) ** 2
    return b0.real > 0.0 and slack >= -EIG_TOL, slack


# -- frequency sweep -----------------------------------------------------------------


@dataclass(frozen=True)
class FrequencyGrid:
    """Log-spaced sweep grid plus the closure points 0 and inf."""

    wmin: float = 1e-2
    wmax: float = 1e7
    per_decade: int = 240
    include_zero: bool = True
    include_inf: bool = True

    def finite_points(self) -> np.ndarray:
        decades = math.log10(self.wmax / self.wmin)
        n = max(2, int(round(decades * self.per_decade)) + 1)
        return np.logspace(math.log10(self.wmin), math.log10(self.wmax), n)

    def points(self) -> list[float]:
        pts = list(self.finite_points())
        if self.include_zero:
            pts.insert(0, 0.0)
        if self.include_inf:
            pts.append(math.inf)
        return pts


@dataclass(frozen=True)
class CertifyConfig:
    margin: float = 1e-6
    search: SearchConfig = DEFAULT_SEARCH
    refine_rel_width: float = 1e-3
    refine: bool = True


DEFAULT_CONFIG = CertifyConfig()


def _line_values(spec: NetworkSpec, omega: float) -> np.ndarray:
    s = 1j * omega if not math.isinf(omega) else complex(math.inf)
    return np.array([eval_frequency(line.tf, s) for line in spec.lines])


def _bus_values(prep: PreparedNetwork, omega: float) -> np.ndarray:
    s = 1j * omega if not math.isinf(omega) else complex(math.inf)
    return np.array([eval_frequency(real, s) for real in prep.bus_realizations])


def evaluate_point(prep: PreparedNetwork, omega: float,
                   config: CertifyConfig = DEFAULT_CONFIG) -> FrequencyVerdict:
    """Full per-bus verdict at one frequency (the sweep and bisection primitive)."""
    spec = prep.spec
    eps = config.margin
    nb = spec.n_buses
    if spec.mode == MODE_ORIGIN_POLE and omega == 0.0:
        checks = []
        for j in range(nb):
            b0 = eval_frequency(prep.bus_realizations[j], 0.0)
            ok, slack = dc_check(b0, eps)
            checks.append(BusChecks(
                s1_passivity=ok, s1_passivity_margin=slack,
                s1_smallgain=False, s1_smallgain_margin=-math.inf,
                s1=ok, s1_branch="passivity" if ok else None,
                s2_passivity=False, s2_passivity_margin=-math.inf,
                s2_smallgain=False, s2_smallgain_margin=-math.inf,
                s2_multiplier=False, s2_multiplier_margin=None,
                s2=False, s2_branch=None, dc=ok, dc_margin=slack,
            ))
        s1_all = all(c.s1 for c in checks)
        return FrequencyVerdict(0.0, checks, s1_all, False, s1_all, s1_all)

    line_vals = _line_values(spec, omega)
    bus_vals = _bus_values(prep, omega)
    inc = prep.incidence
    s1_results = []
    s2_results: list[Split2Result] = []
    pending: list[tuple[int, np.ndarray, np.ndarray]] = []
    for j in range(nb):
        edges = neighbor_edges(inc, j)
        weight = _weight_from_values(line_vals[edges]) if edges.size else 0.0
        s1_results.append(split1_check(bus_vals[j], weight, eps))
        G = _coupled_from_values(inc[j, :].astype(float), line_vals, bus_vals[j])
        support = edges
        Gs = _restrict(G, support)
        p_slack, sg_slack = _split2_cheap(Gs, eps)
        passivity = p_slack >= -EIG_TOL
        smallgain = sg_slack >= -EIG_TOL
        branch = None
        if passivity or smallgain:
            if passivity and smallgain:
                branch = "passivity" if p_slack >= sg_slack else "small_gain"
            else:
                branch = "passivity" if passivity else "small_gain"
        s2_results.append(Split2Result(passivity, p_slack, smallgain, sg_slack,
                                       False, None, passivity or smallgain,
                                       branch, None, None))
        if not (passivity or smallgain):
            pending.append((j, Gs, support))

    s1_all = all(r.passed for r in s1_results)
    multiplier = None
    # the multiplier stage only runs where it can change the combined verdict;
    # one shared multiplier per frequency, reused by every pending bus
    if pending and not s1_all:
        mult, per_bus = _search_shared_multiplier(pending, spec.n_edges, eps, config.search)
        if mult is not None:
            multiplier = mult
            for j, _, _ in pending:
                slack, delta = per_bus[j]
                branch = "multiplier" if delta[:2] == (0.0, 0.0) else "conic"
                s2_results[j] = replace(
                    s2_results[j], multiplier_pass=True, multiplier_margin=slack,
                    passed=True, branch=branch, delta=delta, multiplier=mult)

    s2_all = all(r.passed for r in s2_results)
    checks = []
    for j in range(nb):
        r1, r2 = s1_results[j], s2_results[j]
        checks.append(BusChecks(
            s1_passivity=r1.passivity, s1_passivity_margin=r1.passivity_margin,
            s1_smallgain=r1.smallgain, s1_smallgain_margin=r1.smallgain_margin,
            s1=r1.passed, s1_branch=r1.branch,
            s2_passivity=r2.passivity, s2_passivity_margin=r2.passivity_margin,
            s2_smallgain=r2.smallgain, s2_smallgain_margin=r2.smallgain_margin,
            s2_multiplier=r2.multiplier_pass, s2_multiplier_margin=r2.multiplier_margin,
            s2=r2.passed, s2_branch=r2.branch,
            s2_delta=r2.delta,
        ))
    mixed_all = all(c.s1 or c.s2 for c in checks)
    return FrequencyVerdict(
        omega, checks, s1_all, s2_all, s1_all or s2_all, mixed_all,
        multiplier.record() if multiplier is not None else None,
    )


_BOUNDARY_FLAGS = ("s1_passivity", "s1_smallgain", "s1", "s2_passivity", "s2_smallgain", "s2")


def _flag_vector(fv: FrequencyVerdict) -> list[tuple[str, int | None, bool]]:
    flags: list[tuple[str, int | None, bool]] = [
        ("combined", None, fv.combined),
        ("s1_all", None, fv.statement1_all),
        ("s2_all", None, fv.statement2_all),
    ]
    for j, c in enumerate(fv.per_bus):
        for name in _BOUNDARY_FLAGS:
            flags.append((name, j, getattr(c, name)))
    return flags


def _refine_boundaries(prep: PreparedNetwork, verdicts: list[FrequencyVerdict],
                       config: CertifyConfig) -> tuple[list[BranchBoundary],
                                                       list[FrequencyVerdict]]:
    """Bisect every flag switch between adjacent finite grid points.

    Returns boundary records and the extra verdicts evaluated along the way
    (merged into the report so the traces show the refined structure).
    """
    boundaries: list[BranchBoundary] = []
    extra: list[FrequencyVerdict] = []
    for left, right in zip(verdicts, verdicts[1:]):
        if not (0.0 < left.omega < math.inf and 0.0 < right.omega < math.inf):
            continue
        diffs = [
            (name, bus, vl)
            for (name, bus, vl), (_, _, vr) in zip(_flag_vector(left), _flag_vector(right))
            if vl != vr
        ]
        if not diffs:
            continue
        cache: dict[float, FrequencyVerdict] = {left.omega: left, right.omega: right}

        def at(w: float) -> FrequencyVerdict:
            if w not in cache:
                cache[w] = evaluate_point(prep, w, config)
                extra.append(cache[w])
            return cache[w]

        for name, bus, value_below in diffs:
            lo, hi = left.omega, right.omega
            lo_val = value_below
            while (hi - lo) / hi > config.refine_rel_width:
                mid = math.sqrt(lo * hi)
                if mid <= lo or mid >= hi:
                    break
                fv = at(mid)
                val = next(v for n, b, v in _flag_vector(fv) if n == name and b == bus)
                if val == lo_val:
                    lo = mid
                else:
                    hi = mid
            boundaries.append(BranchBoundary(name, bus, lo, hi, value_below))
    return boundaries, extra


def _failing_bands(verdicts: list[FrequencyVerdict]) -> list[Band]:
    bands: list[Band] = []
    run_start = None
    prev_omega = None
    for fv in verdicts:
        if not fv.combined:
            if run_start is None:
                run_start = fv.omega
            prev_omega = fv.omega
        else:
            if run_start is not None:
                bands.append(Band(run_start, prev_omega))
                run_start = None
    if run_start is not None:
        bands.append(Band(run_start, prev_omega))
    return bands


def certify(spec: NetworkSpec, grid: FrequencyGrid | None = None,
            config: CertifyConfig = DEFAULT_CONFIG,
            prepared: PreparedNetwork | None = None) -> StabilityReport:
    """Run the full decentralized certification sweep.

    Raises AssumptionViolated when any bus realization is unstable and
    ModeMismatch when line kinds do not match the declared mode (checked at
    NetworkSpec construction).  The verdict is CERTIFIED when the combined
    check holds at every grid point (certification on the sampled grid), else
    UNDECIDED with bisection-refined failing bands.
    """
    from .lti import check_bus_assumption
    from .errors import AssumptionViolated

    prep = prepared if prepared is not None else prepare(spec)
    for j, real in enumerate(prep.bus_realizations):
        diag = check_bus_assumption(real)
        if not diag.passed:
            raise AssumptionViolated(
                f"bus {j} realization has eigenvalues with nonnegative real part: "
                f"{diag.offending}", j, diag.offending)
    grid = grid if grid is not None else FrequencyGrid()
    if spec.n_edges == 0:
        # single isolated bus: nothing to couple, stability is the admissibility check
        return StabilityReport(CERTIFIED, spec.mode, [], [], [], [], None)
    omegas = grid.points()
    verdicts = [evaluate_point(prep, w, config) for w in omegas]
    boundaries: list[BranchBoundary] = []
    if config.refine:
        boundaries, extra = _refine_boundaries(prep, verdicts, config)
        verdicts = sorted(verdicts + extra, key=lambda fv: fv.omega)
    bands = _failing_bands(verdicts)
    verdict = CERTIFIED if not bands else UNDECIDED
    return StabilityReport(
        verdict=verdict,
        mode=spec.mode,
        grid=[float(w) for w in omegas],
        per_frequency=verdicts,
        failing_bands=bands,
        boundaries=boundaries,
        oracle=None,
    )
