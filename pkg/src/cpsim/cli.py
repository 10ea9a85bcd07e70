"""Command-line front end.

Subcommands: ``validate`` a model descriptor, ``simulate`` one model on one
platform, ``compare`` a sweep of models across platforms, and ``topology``
to dump the wired platform. Exit codes: 0 success, 1 validation/run
failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

from . import engine, report
from .config import KIND_ALIASES, ConfigError, SimConfig, default_config, load_config, with_kind
from .mapper import map_model
from .platform import build_topology
from .workload import (DescriptorError, DnnModelSpec, ModelValidationError, load_model_file,
                       load_shipped_model, param_count, shipped_model_names)

CONFIG_ENV_VAR = "CPS_CONFIG"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cpsim",
                                     description="Chiplet photonics accelerator simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="load a model descriptor and check its parameter count")
    p.add_argument("descriptor", help="descriptor path or shipped model name")

    p = sub.add_parser("simulate", help="run one model on one platform")
    p.add_argument("--model", required=True, help="descriptor path or shipped model name")
    p.add_argument("--platform", required=True, choices=sorted(KIND_ALIASES))
    _add_common(p)
    p.add_argument("--out", default="-", help="output path ('-' for stdout)")
    p.add_argument("--format", default="json", choices=("csv", "json", "tsv"))

    p = sub.add_parser("compare", help="sweep models x platforms and emit a comparison table")
    p.add_argument("--models", default="all", help="comma-separated names/paths, or 'all'")
    p.add_argument("--platforms", default="siph,elec,mono")
    p.add_argument("--baseline", default="mono", help="platform the ratios normalize against")
    _add_common(p)
    p.add_argument("--out", default="-", help="output path ('-' for stdout)")
    p.add_argument("--format", default="csv", choices=("csv", "json", "tsv"))
    p.add_argument("--no-references", action="store_true",
                   help="omit the published reference rows")

    p = sub.add_parser("topology", help="dump the wired platform for inspection")
    p.add_argument("--platform", default="siph", choices=sorted(KIND_ALIASES))
    p.add_argument("--config", default=None)
    p.add_argument("--out", default="-")
    return parser


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", default=None, help=f"platform config (or ${CONFIG_ENV_VAR})")
    p.add_argument("--no-overlap", action="store_true",
                   help="sum compute/read/write instead of overlapping them")
    p.add_argument("--no-resipi", action="store_true",
                   help="keep every gateway active (no epoch reconfiguration)")
    p.add_argument("--epoch-us", type=float, default=None, help="controller epoch length")


def _load_config(path: str | None) -> SimConfig:
    path = path or os.environ.get(CONFIG_ENV_VAR)
    if path:
        return load_config(path)
    return default_config()


def _apply_flags(cfg: SimConfig, args) -> SimConfig:
    options = cfg.options
    if getattr(args, "no_overlap", False):
        options = replace(options, overlap=False)
    if getattr(args, "no_resipi", False):
        options = replace(options, resipi_enabled=False)
    if getattr(args, "epoch_us", None) is not None:
        options = replace(options, epoch_s=args.epoch_us * 1e-6)
    return replace(cfg, options=options)


def _resolve_model(name: str) -> DnnModelSpec:
    if os.path.sep in name or name.endswith(".desc") or os.path.exists(name):
        return load_model_file(name)
    return load_shipped_model(name)


def _resolve_models(spec: str) -> list[DnnModelSpec]:
    if spec == "all":
        return [load_shipped_model(n) for n in shipped_model_names()]
    return [_resolve_model(n.strip()) for n in spec.split(",") if n.strip()]


def _write(text: str, destination: str) -> None:
    if destination == "-":
        sys.stdout.write(text)
    else:
        with open(destination, "w", encoding="utf-8", newline="") as f:
            f.write(text)


def _run_one(model: DnnModelSpec, cfg: SimConfig, kind: str) -> engine.RunMetrics:
    variant = with_kind(cfg, kind)
    topology = build_topology(variant)
    plan = map_model(model, topology)
    return engine.simulate_model(model, topology, plan, variant.devices, variant.options)


def _cmd_validate(args) -> int:
    model = _resolve_model(args.descriptor)
    print(f"{param_count(model)} parameters OK")
    return 0


def _fmt6(x: float) -> str:
    return f"{x:.6g}"


def _metrics_json(model: str, platform: str, metrics: engine.RunMetrics) -> str:
    doc = {
        "model": model,
        "platform": platform,
        "total_latency_s": metrics.total_latency_s,
        "total_energy_j": metrics.total_energy_j,
        "avg_power_w": metrics.avg_power_w,
        "total_bits": metrics.total_bits,
        "epb_j_per_bit": metrics.epb_j_per_bit,
        "energy_breakdown": metrics.energy_breakdown,
        "per_layer": [
            {
                "layer": r.layer_index,
                "compute_s": r.compute_s,
                "read_s": r.read_s,
                "write_s": r.write_s,
                "overhead_s": r.overhead_s,
                "latency_s": r.layer_latency_s,
                "bits_moved": r.bits_moved,
                "energy_j": r.energy_j,
            }
            for r in metrics.per_layer
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def _metrics_table(metrics: engine.RunMetrics, sep: str) -> str:
    cats = list(engine.ENERGY_CATEGORIES)
    header = ["row", "layer", "compute_s", "read_s", "write_s", "overhead_s", "latency_s",
              "bits_moved"] + [f"{c}_j" for c in cats] + ["energy_j", "avg_power_w",
                                                          "epb_j_per_bit"]
    lines = [sep.join(header)]
    for r in metrics.per_layer:
        cells = ["layer", str(r.layer_index), _fmt6(r.compute_s), _fmt6(r.read_s),
                 _fmt6(r.write_s), _fmt6(r.overhead_s), _fmt6(r.layer_latency_s),
                 _fmt6(r.bits_moved)]
        cells += [_fmt6(r.energy_j[c]) for c in cats]
        cells += [_fmt6(r.total_energy_j), "", ""]
        lines.append(sep.join(cells))
    totals = ["total", "", "", "", "", "", _fmt6(metrics.total_latency_s),
              _fmt6(float(metrics.total_bits))]
    totals += [_fmt6(metrics.energy_breakdown[c]) for c in cats]
    totals += [_fmt6(metrics.total_energy_j), _fmt6(metrics.avg_power_w),
               _fmt6(metrics.epb_j_per_bit)]
    lines.append(sep.join(totals))
    return "\n".join(lines) + "\n"


def _cmd_simulate(args) -> int:
    cfg = _apply_flags(_load_config(args.config), args)
    model = _resolve_model(args.model)
    metrics = _run_one(model, cfg, args.platform)
    if args.format == "json":
        _write(_metrics_json(model.name, KIND_ALIASES[args.platform], metrics), args.out)
    else:
        _write(_metrics_table(metrics, "," if args.format == "csv" else "\t"), args.out)
    return 0


def _cmd_compare(args, parser: argparse.ArgumentParser) -> int:
    cfg = _apply_flags(_load_config(args.config), args)
    platforms = [p.strip() for p in args.platforms.split(",") if p.strip()]
    unknown = [p for p in platforms if p not in KIND_ALIASES]
    if unknown:
        parser.error(f"unknown platforms: {', '.join(unknown)}")
    if args.baseline not in platforms:
        parser.error(f"baseline {args.baseline!r} not among platforms {platforms}")
    models = _resolve_models(args.models)
    if not models or not platforms:
        parser.error("nothing to sweep: need at least one model and one platform")

    pairs = [(model, platform) for model in models for platform in platforms]
    with ThreadPoolExecutor(max_workers=min(8, len(pairs))) as pool:
        futures = [pool.submit(_run_one, model, cfg, platform) for model, platform in pairs]
        runs = [report.LabeledRun(KIND_ALIASES[platform], model.name, f.result())
                for (model, platform), f in zip(pairs, futures)]

    rows = report.comparison_table(runs, KIND_ALIASES[args.baseline])
    if not args.no_references:
        rows += report.reference_rows()
    report.emit_report(rows, args.format, args.out)
    return 0


def _cmd_topology(args) -> int:
    cfg = _load_config(args.config)
    topology = build_topology(with_kind(cfg, args.platform))
    doc = {
        "kind": topology.kind,
        "n_wavelengths": topology.n_wavelengths,
        "link_rate_bps": topology.link_rate_bps,
        "gateway_freq_hz": topology.gateway_freq_hz,
        "interposer_side_mm": topology.interposer_side_mm,
        "mesh_dims": list(topology.mesh_dims),
        "total_mrs": topology.total_mrs(),
        "chiplets": [
            {
                "id": c.id, "role": c.role,
                "mac_type": c.mac_type.name if c.mac_type else None,
                "vector_len": c.mac_type.vector_len if c.mac_type else None,
                "macs": c.macs, "gateways": c.gateways,
                "position_mm": list(c.position), "grid_cell": list(c.grid_cell),
            }
            for c in topology.chiplets
        ],
        "mrgs": [
            {"owner_gateway": m.owner_gateway, "filter_rows": m.filter_rows,
             "modulator_rows": m.modulator_rows, "mrs_per_row": m.mrs_per_row}
            for m in topology.mrgs
        ],
        "routes": [
            {"writer": r.writer_gateway, "protocol": r.protocol, "readers": len(r.readers),
             "length_mm": r.length_mm, "split_fanout": r.path.split_fanout}
            for r in topology.routes
        ],
    }
    _write(json.dumps(doc, indent=2) + "\n", args.out)
    return 0


def cli_main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        if args.command == "validate":
            return _cmd_validate(args)
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "compare":
            return _cmd_compare(args, parser)
        if args.command == "topology":
            return _cmd_topology(args)
        parser.error(f"unknown command {args.command!r}")
    except SystemExit as exc:  # parser.error inside command handling
        return exc.code if isinstance(exc.code, int) else 2
    except (DescriptorError, ModelValidationError, ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def main(argv: list[str] | None = None) -> int:
    return cli_main(argv)


if __name__ == "__main__":
    sys.exit(main())
