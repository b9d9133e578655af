"""Network-description ingestion, sweep orchestration, report and plot emission.

Input is a JSON network description (schema version 1, documented in the
README: bus numbering is 1-based, units are Ohm/Henry/Farad/Volt/Ampere/Watt).
Outputs are a JSON report, an optional pass/fail CSV trace and, alongside the
CSV, rendered staircase figures.  Exit codes: 0 certified, 2 undecided,
3 instance rejected (inadmissible bus), 1 any other error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .buses import BusSpec
from .criteria import CertifyConfig, FrequencyGrid, SearchConfig, certify
from .errors import AssumptionViolated, CertifierError, SchemaError, UnitError
from .lti import RationalTransfer, build_line
from .netgraph import NetworkGraph
from .network import MODES, NetworkSpec, TransferBus, prepare
from .oracle import (
    assemble_closed_loop,
    default_contour,
    det_winding,
    eig_stability,
    homotopy_check,
    nonzero_eig_mismatch,
)
from .report import (
    REJECTED,
    CERTIFIED,
    UNDECIDED,
    OracleRecord,
    StabilityReport,
    render_figures,
    write_plot_csv,
    write_report,
)

SPEC_VERSION = 1

_coeffs = {"type": "array", "items": {"type": "number"}, "minItems": 1}

NETWORK_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["specVersion", "buses", "edges", "lines"],
    "properties": {
        "specVersion": {"const": SPEC_VERSION},
        "mode": {"enum": list(MODES)},
        "buses": {"type": "array", "minItems": 1,
                  "items": {"type": "object", "required": ["type"]}},
        "edges": {"type": "array",
                  "items": {"type": "array", "items": {"type": "integer"},
                            "minItems": 2, "maxItems": 2}},
        "lines": {"type": "array", "items": {"type": "object", "required": ["kind"]}},
    },
}

CONVERTER_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["type", "R_f", "L_f", "C_f", "K_Pv", "K_Iv", "K_Pi", "K_Ii",
                 "R_droop", "v_nom"],
    "properties": {
        "type": {"const": "converter"},
        "R_f": {"type": "number"}, "L_f": {"type": "number"}, "C_f": {"type": "number"},
        "K_Pv": {"type": "number"}, "K_Iv": {"type": "number"},
        "K_Pi": {"type": "number"}, "K_Ii": {"type": "number"},
        "R_droop": {"type": "number"}, "v_nom": {"type": "number"},
        "i_bar": {"type": "number"},
        "Z_load": {"type": ["number", "null"]},
        "P_load": {"type": "number"},
    },
}

TRANSFER_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["type", "num", "den"],
    "properties": {"type": {"const": "transfer"}, "num": _coeffs, "den": _coeffs},
}

LINE_SCHEMAS = {
    "rl": {
        "type": "object", "additionalProperties": False, "required": ["kind", "r", "l"],
        "properties": {"kind": {"const": "rl"}, "r": {"type": "number"},
                       "l": {"type": "number"}},
    },
    "spr": {
        "type": "object", "additionalProperties": False, "required": ["kind", "num", "den"],
        "properties": {"kind": {"const": "spr"}, "num": _coeffs, "den": _coeffs},
    },
    "pole_at_origin": {
        "type": "object", "additionalProperties": False,
        "required": ["kind", "h_num", "h_den"],
        "properties": {"kind": {"const": "pole_at_origin"}, "h_num": _coeffs,
                       "h_den": _coeffs},
    },
}


def _pointer(err: jsonschema.ValidationError) -> str:
    return "/" + "/".join(str(p) for p in err.absolute_path)


def _validate(data, schema, prefix: str = "") -> None:
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise SchemaError(err.message, prefix + _pointer(err))
    # `required` reports at the parent, which loses the missing key; surface it
    for key in schema.get("required", []):
        if isinstance(data, dict) and key not in data:
            raise SchemaError(f"missing required property {key!r}", f"{prefix}/{key}")


def parse_network_dict(data: dict) -> NetworkSpec:
    """Validate a decoded network description and build the NetworkSpec."""
    _validate(data, NETWORK_SCHEMA)
    for key in ("buses", "edges", "lines"):
        if key not in data:
            raise SchemaError(f"missing required property {key!r}", f"/{key}")
    buses = []
    for j, bus in enumerate(data["buses"]):
        ptr = f"/buses/{j}"
        kind = bus.get("type")
        if kind == "converter":
            _validate(bus, CONVERTER_SCHEMA, ptr)
            try:
                buses.append(BusSpec(
                    R_f=bus["R_f"], L_f=bus["L_f"], C_f=bus["C_f"],
                    K_Pv=bus["K_Pv"], K_Iv=bus["K_Iv"],
                    K_Pi=bus["K_Pi"], K_Ii=bus["K_Ii"],
                    R_droop=bus["R_droop"], v_nom=bus["v_nom"],
                    i_bar=bus.get("i_bar", 0.0),
                    Z_load=bus.get("Z_load"),
                    P_load=bus.get("P_load", 0.0),
                ))
            except UnitError as exc:
                raise UnitError(str(exc), ptr) from None
        elif kind == "transfer":
            _validate(bus, TRANSFER_SCHEMA, ptr)
            buses.append(TransferBus(RationalTransfer(bus["num"], bus["den"])))
        else:
            raise SchemaError(f"unknown bus type {kind!r}", f"{ptr}/type")
    n_buses = len(buses)
    edges = []
    for k, (tail, head) in enumerate(data["edges"]):
        if not (1 <= tail <= n_buses and 1 <= head <= n_buses):
            raise SchemaError(
                f"edge endpoints must be 1..{n_buses}, got ({tail}, {head})",
                f"/edges/{k}")
        edges.append((tail - 1, head - 1))
    lines = []
    for k, line in enumerate(data["lines"]):
        ptr = f"/lines/{k}"
        kind = line.get("kind")
        if kind not in LINE_SCHEMAS:
            raise SchemaError(f"unknown line kind {kind!r}", f"{ptr}/kind")
        _validate(line, LINE_SCHEMAS[kind], ptr)
        try:
            if kind == "rl":
                lines.append(build_line("rl", r=line["r"], l=line["l"]))
            elif kind == "spr":
                lines.append(build_line("spr", tf=RationalTransfer(line["num"], line["den"])))
            else:
                lines.append(build_line(
                    "pole_at_origin", h=RationalTransfer(line["h_num"], line["h_den"])))
        except CertifierError as exc:
            if exc.code in ("bad_line_params",):
                raise UnitError(str(exc), ptr) from None
            raise
    graph = NetworkGraph(n_buses=n_buses, edges=tuple(edges))
    return NetworkSpec(graph=graph, buses=tuple(buses), lines=tuple(lines),
                       mode=data.get("mode", "theorem1"))


def parse_network(path: str | Path) -> NetworkSpec:
    """Load, schema-validate and construct a NetworkSpec from a JSON file."""
    raw = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not valid JSON: {exc}", "") from None
    return parse_network_dict(data)


@dataclass
class RunFlags:
    wmin: float = 1e-2
    wmax: float = 1e7
    per_decade: int = 240
    margin: float = 1e-6
    mode: str | None = None
    oracle: bool = False
    homotopy: bool = False
    plot: str | None = None
    report: str | None = None
    figures: bool = True
    refine: bool = True
    seed: int = 0


def _provenance(data: dict, flags: RunFlags, mode: str) -> dict:
    return {
        "tool": "dcgridcert",
        "version": __version__,
        "config": {
            "wmin": flags.wmin, "wmax": flags.wmax, "per_decade": flags.per_decade,
            "margin": flags.margin, "mode": mode, "oracle": flags.oracle,
            "homotopy": flags.homotopy, "refine": flags.refine, "seed": flags.seed,
            "specVersion": SPEC_VERSION,
        },
        "network": data,
    }


def run(data: dict, flags: RunFlags) -> int:
    """Certify a decoded network description and write the requested artifacts."""
    if flags.mode is not None:
        data = dict(data)
        data["mode"] = flags.mode
    spec = parse_network_dict(data)
    grid = FrequencyGrid(wmin=flags.wmin, wmax=flags.wmax, per_decade=flags.per_decade)
    config = CertifyConfig(margin=flags.margin, search=SearchConfig(), refine=flags.refine)
    prep = prepare(spec)
    try:
        report = certify(spec, grid, config, prepared=prep)
    except AssumptionViolated as exc:
        report = StabilityReport(
            verdict=REJECTED, mode=spec.mode, grid=[], per_frequency=[],
            failing_bands=[], boundaries=[], oracle=None,
            provenance=_provenance(data, flags, spec.mode))
        report.provenance["rejection"] = {
            "code": exc.code, "bus": exc.bus,
            "eigenvalues_re": [float(v.real) for v in exc.eigenvalues],
            "eigenvalues_im": [float(v.imag) for v in exc.eigenvalues],
        }
        if flags.report:
            write_report(report, flags.report)
        print(f"verdict: {REJECTED} (bus {exc.bus + 1} inadmissible)")
        return 3
    report.provenance = _provenance(data, flags, spec.mode)

    if flags.oracle:
        oracle_rec = OracleRecord()
        cl = assemble_closed_loop(spec, prep)
        sv = eig_stability(cl, spec.mode)
        oracle_rec.eig_verdict = sv.verdict
        oracle_rec.spectral_abscissa = sv.spectral_abscissa
        oracle_rec.zero_modes = sv.zero_modes
        contour = default_contour(spec, prep)
        if spec.n_edges:
            wres = det_winding(contour, 1.0, spec, prep)
            oracle_rec.winding = wres.winding
            oracle_rec.min_det = wres.min_det
            rng = np.random.default_rng(flags.seed)
            omegas = 10.0 ** rng.uniform(np.log10(flags.wmin), np.log10(flags.wmax), 5)
            oracle_rec.equivalence_mismatch = max(
                nonzero_eig_mismatch(spec, 1j * w, prep) for w in omegas)
            if flags.homotopy:
                ok, _ = homotopy_check(spec, contour, prepared=prep)
                oracle_rec.homotopy_ok = ok
        report.oracle = oracle_rec

    if flags.report:
        write_report(report, flags.report)
    if flags.plot:
        write_plot_csv(report, flags.plot)
        if flags.figures:
            render_figures(report, Path(flags.plot).with_suffix(".png"))
    print(f"verdict: {report.verdict}")
    if report.verdict == CERTIFIED:
        return 0
    if report.verdict == UNDECIDED:
        for band in report.failing_bands:
            print(f"  failing band: [{band.lo:g}, {band.hi:g}] rad/s")
        return 2
    return 3


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="dcgridcert",
        description="Decentralized stability certification of a DC microgrid "
                    "description, with optional eigenvalue/Nyquist cross-checks.")
    parser.add_argument("network", help="network description JSON file")
    parser.add_argument("--wmin", type=float, default=1e-2, help="sweep start (rad/s)")
    parser.add_argument("--wmax", type=float, default=1e7, help="sweep end (rad/s)")
    parser.add_argument("--per-decade", type=int, default=240,
                        help="grid points per decade")
    parser.add_argument("--margin", type=float, default=1e-6,
                        help="relative strictness margin of every test")
    parser.add_argument("--mode", choices=list(MODES), default=None,
                        help="override the mode declared in the file")
    parser.add_argument("--oracle", action="store_true",
                        help="run eigenvalue/winding/equivalence cross-checks")
    parser.add_argument("--homotopy", action="store_true",
                        help="with --oracle: run the scaled-bus homotopy sweep")
    parser.add_argument("--plot", metavar="OUT.CSV", default=None,
                        help="write per-frequency pass/fail traces (CSV)")
    parser.add_argument("--report", metavar="OUT.JSON", default=None,
                        help="write the full report (JSON)")
    parser.add_argument("--no-figures", action="store_true",
                        help="do not render figures next to the plot CSV")
    parser.add_argument("--no-refine", action="store_true",
                        help="skip bisection refinement of branch boundaries")
    parser.add_argument("--seed", type=int, default=0,
                        help="seed recorded in provenance and used for oracle sampling")
    args = parser.parse_args(argv)
    flags = RunFlags(
        wmin=args.wmin, wmax=args.wmax, per_decade=args.per_decade,
        margin=args.margin, mode=args.mode, oracle=args.oracle,
        homotopy=args.homotopy, plot=args.plot, report=args.report,
        figures=not args.no_figures, refine=not args.no_refine, seed=args.seed)
    try:
        raw = Path(args.network).read_text(encoding="utf-8")
        data = json.loads(raw)
    except FileNotFoundError:
        print(f"error: no such file: {args.network}", file=sys.stderr)
        return 1
    except json.JSONDecodeError as exc:
        print(f"error [schema_error]: not valid JSON: {exc}", file=sys.stderr)
        return 1
    try:
        return run(data, flags)
    except CertifierError as exc:
        pointer = getattr(exc, "pointer", "")
        where = f" at {pointer}" if pointer else ""
        print(f"error [{exc.code}]{where}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
