"""Report data model, JSON/CSV serialization and figure rendering.

Reports must be byte-identical across runs with the same inputs, so the JSON
writer sorts keys, uses repr-exact floats and encodes non-finite values as the
strings "inf"/"-inf"/"nan" (the frequency axis legitimately contains the
closure point inf).  No timestamps anywhere.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

CERTIFIED = "CERTIFIED"
UNDECIDED = "UNDECIDED"
REJECTED = "REJECTED"


@dataclass
class BusChecks:
    """Per-bus outcome of the two decomposition checks at one frequency.

    s1_* are the bus/line split branches (bus passivity, weighted small gain);
    s2_* are the bus-with-incident-lines split branches (block passivity,
    block small gain, line-multiplier/conic stage).  Margins are the raw
    minimum-eigenvalue slacks of each quadratic-constraint test.
    """

    s1_passivity: bool
    s1_passivity_margin: float
    s1_smallgain: bool
    s1_smallgain_margin: float
    s1: bool
    s1_branch: str | None
    s2_passivity: bool
    s2_passivity_margin: float
    s2_smallgain: bool
    s2_smallgain_margin: float
    s2_multiplier: bool
    s2_multiplier_margin: float | None
    s2: bool
    s2_branch: str | None
    s2_delta: tuple | None = None
    dc: bool | None = None
    dc_margin: float | None = None


@dataclass
class MultiplierRecord:
    """Shared per-line multiplier scalars used by the split-2 search at one frequency."""

    pi11: list[float]
    pi12_re: list[float]
    pi12_im: list[float]
    pi22: list[float]


@dataclass
class FrequencyVerdict:
    omega: float
    per_bus: list[BusChecks]
    statement1_all: bool
    statement2_all: bool
    combined: bool
    mixed_all: bool
    multiplier: MultiplierRecord | None = None


@dataclass
class Band:
    """A contiguous frequency interval on which the combined check failed."""

    lo: float
    hi: float


@dataclass
class BranchBoundary:
    """Bisection-localized crossover of one boolean flag between lo and hi."""

    flag: str
    bus: int | None
    lo: float
    hi: float
    value_below: bool


@dataclass
class OracleRecord:
    eig_verdict: str | None = None
    spectral_abscissa: float | None = None
    zero_modes: int | None = None
    winding: int | None = None
    min_det: float | None = None
    homotopy_ok: bool | None = None
    equivalence_mismatch: float | None = None


@dataclass
class StabilityReport:
    verdict: str
    mode: str
    grid: list[float]
    per_frequency: list[FrequencyVerdict]
    failing_bands: list[Band]
    boundaries: list[BranchBoundary]
    oracle: OracleRecord | None
    provenance: dict = field(default_factory=dict)


def _sanitize(obj):
    """Recursively make an object JSON-safe and deterministic (numpy scalars included)."""
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        obj = float(obj)
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        if math.isnan(obj):
            return "nan"
        return obj
    if isinstance(obj, np.ndarray):
        return [_sanitize(v) for v in obj.tolist()]
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    return obj


def report_to_dict(report: StabilityReport) -> dict:
    return _sanitize(asdict(report))


def write_report(report: StabilityReport, path: str | Path) -> None:
    text = json.dumps(report_to_dict(report), indent=2, sort_keys=True)
    Path(path).write_text(text + "\n", encoding="utf-8")


BUS_COLUMNS = (
    "s1_passivity", "s1_smallgain", "s1",
    "s2_passivity", "s2_smallgain", "s2_multiplier", "s2", "combined",
)


def _omega_str(omega: float) -> str:
    if math.isinf(omega):
        return "inf"
    return repr(omega)


def write_plot_csv(report: StabilityReport, path: str | Path) -> None:
    """0/1 pass-fail traces per bus and per branch, one row per grid frequency."""
    n_buses = len(report.per_frequency[0].per_bus) if report.per_frequency else 0
    header = ["omega"]
    for j in range(n_buses):
        header.extend(f"bus{j + 1}_{name}" for name in BUS_COLUMNS)
    header.extend(["s1_all", "s2_all", "combined"])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for fv in report.per_frequency:
            row = [_omega_str(fv.omega)]
            for checks in fv.per_bus:
                row.extend([
                    int(checks.s1_passivity), int(checks.s1_smallgain), int(checks.s1),
                    int(checks.s2_passivity), int(checks.s2_smallgain),
                    int(checks.s2_multiplier), int(checks.s2), int(fv.combined),
                ])
            row.extend([int(fv.statement1_all), int(fv.statement2_all), int(fv.combined)])
            writer.writerow(row)


def render_figures(report: StabilityReport, path: str | Path) -> None:
    """Staircase pass/fail figures next to the CSV (finite positive frequencies only)."""
    finite = [fv for fv in report.per_frequency if 0.0 < fv.omega < math.inf]
    if not finite:
        return
    omegas = [fv.omega for fv in finite]
    n_buses = len(finite[0].per_bus)
    fig, axes = plt.subplots(3, 1, figsize=(7.0, 7.5), sharex=True)
    panels = [
        ("bus/line split", [("s1_passivity", "passivity"), ("s1_smallgain", "small gain"),
                            ("s1", "either")]),
        ("bus-with-lines split", [("s2_passivity", "passivity"), ("s2_smallgain", "small gain"),
                                  ("s2", "any")]),
    ]
    for ax, (title, traces) in zip(axes[:2], panels):
        for attr, label in traces:
            for j in range(n_buses):
                vals = [float(getattr(fv.per_bus[j], attr)) for fv in finite]
                ax.step(omegas, vals, where="post",
                        label=f"bus {j + 1}: {label}" if n_buses <= 4 else None,
                        alpha=0.8)
        ax.set_ylim(-0.1, 1.1)
        ax.set_ylabel("fail = 0 / pass = 1")
        ax.set_title(title)
        if n_buses <= 4:
            ax.legend(loc="center left", fontsize=7)
    ax = axes[2]
    ax.step(omegas, [float(fv.statement1_all) for fv in finite], where="post", label="split 1")
    ax.step(omegas, [float(fv.statement2_all) for fv in finite], where="post", label="split 2")
    ax.step(omegas, [float(fv.combined) for fv in finite], where="post", label="combined",
            linewidth=2)
    ax.set_ylim(-0.1, 1.1)
    ax.set_ylabel("fail = 0 / pass = 1")
    ax.set_xlabel("frequency (rad/s)")
    ax.set_title(f"combined verdict: {report.verdict}")
    ax.legend(loc="center left", fontsize=7)
    for ax in axes:
        ax.set_xscale("log")
        ax.grid(True, which="both", alpha=0.2)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
