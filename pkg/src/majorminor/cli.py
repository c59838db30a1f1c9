"""Command-line interface.

Usage::

    majorminor validate   [--config FILE | --preset NAME] [--grid-h H]
    majorminor solve      [...] [--output-dir DIR]      -> trajectories.csv
    majorminor decompose  [...]                         -> decomposition.csv
    majorminor costs      [...]                         -> costs.json
    majorminor amplitudes [...]                         -> amplitudes.json
    majorminor spectrum   [...]                         -> spectrum.csv
    majorminor nplayer    [...] [--n-players 2,10,100]  -> gap_report.json
    majorminor run        --config FILE                 -> artifacts listed in the file
    majorminor reproduce  --preset cos|twap|vwap|all [--check]

Exit status: 0 success, 2 configuration error, 3 solver error,
4 reference comparison failed (``reproduce --check``).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .config import ExperimentConfig, load_config, preset_config
from .errors import ConfigError, DomainError, MajorMinorError
from .model import validate_params
from .pipeline import Experiment, check_against_reference, run_pipeline, tables, trajectory_table
from .presets import PRESET_NAMES

__all__ = ["main", "run", "run_preset", "load_config", "write_outputs"]

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_CHECK = 0, 2, 3, 4

_COMMAND_ARTIFACT = {
    "solve": "trajectories",
    "decompose": "decomposition",
    "costs": "costs",
    "amplitudes": "amplitudes",
    "spectrum": "spectrum",
    "nplayer": "nplayer",
}


# --------------------------------------------------------------------------
# emission


def _write_csv(path: Path, header: str, columns: np.ndarray) -> None:
    lines = [header]
    for row in np.atleast_2d(columns):
        lines.append(",".join(_fmt(x) for x in row))
    path.write_text("\n".join(lines) + "\n")


def _fmt(x) -> str:
    s = f"{float(x):.12g}"
    return "0" if s == "-0" else s


def _to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)) and not isinstance(obj, bool):
        return int(obj)
    return obj


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(_to_jsonable(obj), indent=2) + "\n")


def write_outputs(exp: Experiment, outputs=None) -> list[Path]:
    """Write the requested artifacts of ``exp`` into its output directory."""
    cfg = exp.cfg
    outputs = tuple(cfg.outputs if outputs is None else outputs)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    if "trajectories" in outputs:
        path = out / "trajectories.csv"
        _write_csv(path, "t,q_major,q_minor,v_major,v_minor,price", trajectory_table(exp.nash, exp.price_nash))
        written.append(path)

    if "decomposition" in outputs and exp.decomposition is not None:
        d = exp.decomposition
        cols = np.column_stack([cfg.grid.t, d.periodic_major.values, d.periodic_minor.values,
                                d.trend_major.values, d.trend_minor.values])
        path = out / "decomposition.csv"
        _write_csv(path, "t,periodic_major,periodic_minor,trend_major,trend_minor", cols)
        written.append(path)

    if "costs" in outputs and exp.costs is not None:
        _write_json(out / "costs.json", exp.costs)
        written.append(out / "costs.json")

    if "amplitudes" in outputs and exp.amplitudes is not None:
        _write_json(out / "amplitudes.json", exp.amplitudes)
        written.append(out / "amplitudes.json")

    if "spectrum" in outputs and exp.spectra is not None:
        for fname, series in (("spectrum.csv", "aggregate_rate"), ("spectrum_price.csv", "price")):
            eq, ng = exp.spectra[series]
            cols = np.column_stack([eq.k, eq.amplitudes, ng.amplitudes])
            _write_csv(out / fname, "k,amp_equilibrium,amp_nogame", cols)
            written.append(out / fname)

    if "nplayer" in outputs:
        _write_json(out / "gap_report.json", [g.as_dict() for g in exp.gaps])
        written.append(out / "gap_report.json")
    return written


def _summary(exp: Experiment, checks) -> dict:
    summary = tables(exp)
    summary["validation"] = asdict(exp.validation)
    if exp.gaps:
        summary["nplayer"] = [g.as_dict() for g in exp.gaps]
    if checks:
        summary["checks"] = [asdict(c) for c in checks]
    return summary


# --------------------------------------------------------------------------
# entry points


def run(config: ExperimentConfig, outputs=None, check: bool = False, stream=sys.stdout) -> int:
    """Execute ``config``; write artifacts and ``summary.json``. Returns the exit status."""
    exp = run_pipeline(config, outputs)
    write_outputs(exp, outputs)
    checks = check_against_reference(exp) if check else []
    _write_json(Path(config.output_dir) / "summary.json", _summary(exp, checks))
    for c in checks:
        print(c.line(), file=stream)
    print(f"wrote outputs to {config.output_dir}", file=stream)
    if checks and not all(c.passed for c in checks):
        return EXIT_CHECK
    return EXIT_OK


def run_preset(name: str, h: float = 1e-3, output_dir=None, check: bool = False, stream=sys.stdout) -> int:
    """Reproduce one reference experiment (or ``"all"`` of them)."""
    if name == "all":
        base = Path(output_dir or "out")
        combined, status = {}, EXIT_OK
        for sub in PRESET_NAMES:
            cfg = preset_config(sub, h).with_output_dir(base / sub)
            code = run(cfg, check=check, stream=stream)
            status = max(status, code)
            part = json.loads((base / sub / "summary.json").read_text())
            combined.update({k: v for k, v in part.items() if k.startswith("table")})
            if sub == "vwap":
                combined["spectral"] = part["spectral"]
        _write_json(base / "summary.json", {k: combined[k] for k in sorted(combined)})
        return status
    cfg = preset_config(name, h)
    if output_dir is not None:
        cfg = cfg.with_output_dir(output_dir)
    return run(cfg, check=check, stream=stream)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="majorminor", description="Major/minor trader execution game solver")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, preset_choices=PRESET_NAMES):
        src = p.add_mutually_exclusive_group()
        src.add_argument("--config", type=Path, help="INI experiment file")
        src.add_argument("--preset", choices=preset_choices, help="reference experiment (default: cos)")
        p.add_argument("--grid-h", type=float, help="override the grid step")
        p.add_argument("--output-dir", type=Path, help="override the output directory")

    common(sub.add_parser("validate", help="check the weak-interaction condition"))
    for cmd, artifact in _COMMAND_ARTIFACT.items():
        p = sub.add_parser(cmd, help=f"write {artifact} output")
        common(p)
        if cmd == "nplayer":
            p.add_argument("--n-players", help="comma-separated population sizes")
    common(sub.add_parser("run", help="run every artifact listed in the config"))
    rp = sub.add_parser("reproduce", help="reproduce a reference experiment")
    rp.add_argument("--preset", choices=PRESET_NAMES + ("all",), required=True)
    rp.add_argument("--grid-h", type=float, default=1e-3)
    rp.add_argument("--output-dir", type=Path)
    rp.add_argument("--check", action="store_true", help="compare with published values; exit 4 on mismatch")
    return parser


def _resolve(args) -> ExperimentConfig:
    if args.config is not None:
        cfg = load_config(args.config)
    else:
        cfg = preset_config(args.preset or "cos")
    if args.grid_h is not None:
        cfg = cfg.with_grid_step(args.grid_h)
    if args.output_dir is not None:
        cfg = cfg.with_output_dir(args.output_dir)
    if getattr(args, "n_players", None):
        try:
            sizes = tuple(int(x) for x in args.n_players.split(","))
        except ValueError:
            raise DomainError(f"--n-players must be comma-separated integers, got {args.n_players!r}") from None
        if any(N < 1 for N in sizes):
            raise DomainError("--n-players entries must be positive")
        cfg = cfg.with_players(sizes)
    return cfg


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "reproduce":
            return run_preset(args.preset, args.grid_h, args.output_dir, args.check)
        cfg = _resolve(args)
        if args.command == "validate":
            report = validate_params(cfg.params)
            print(json.dumps(_to_jsonable(asdict(report)), indent=2))
            return EXIT_OK
        outputs = cfg.outputs if args.command == "run" else (_COMMAND_ARTIFACT[args.command],)
        return run(cfg, outputs)
    except (ConfigError, DomainError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MajorMinorError as exc:
        print(f"solver error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
