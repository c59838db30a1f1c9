"""INI configuration schema for experiments.

Example::

    [market]
    a0 = 0.001
    a = 0.001
    lambda0 = 0.01
    lambda = 0.005
    phi0 = 0.1
    phi = 0.01
    T = 10
    # sigma = 0            (optional, unused by the solvers)

    [inventories]
    q0_major = 10
    q0_minor = 0           # optional, default 0

    [target]
    kind = cosine          # dtwap | cosine | twap_step | vwap
    n = 10                 # cosine, twap_step
    b = 0.15915494309189535  # cosine only

    [grid]
    h = 0.001

    [options]              # optional section
    max_iter = 200
    tol = 1e-10
    oracle_quadrature_steps = 20000
    kmax = 50
    detrend = affine       # affine | none

    [outputs]              # optional section
    artifacts = trajectories, decomposition, costs, amplitudes, spectrum, nplayer
    n_players = 2, 10, 100
    output_dir = out

Keys are case-sensitive. Unknown sections or keys raise
:class:`SchemaError`; values violating a type invariant raise
:class:`DomainError`.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DomainError, ParseError, SchemaError
from .fdsolver import SolveOptions
from .model import DTwap, Grid, Inventories, MarketParams, TargetStrategy
from .presets import (
    BASE_PARAMS, BASE_Q0_MAJOR, BASE_Q0_MINOR, COSINE_B, cosine_target, twap_target, vwap_target,
)

__all__ = ["ExperimentConfig", "TargetSpec", "load_config", "parse_config", "preset_config", "ARTIFACTS"]

ARTIFACTS = ("trajectories", "decomposition", "costs", "amplitudes", "spectrum", "nplayer")
TARGET_KINDS = ("dtwap", "cosine", "twap_step", "vwap")

_SCHEMA = {
    "market": {"required": ("a0", "a", "lambda0", "lambda", "phi0", "phi", "T"), "optional": ("sigma",)},
    "inventories": {"required": ("q0_major",), "optional": ("q0_minor",)},
    "target": {"required": ("kind",), "optional": ("n", "b")},
    "grid": {"required": ("h",), "optional": ()},
    "options": {"required": (), "optional": ("max_iter", "tol", "oracle_quadrature_steps", "kmax", "detrend")},
    "outputs": {"required": (), "optional": ("artifacts", "n_players", "output_dir")},
}
_REQUIRED_SECTIONS = ("market", "inventories", "target", "grid")


@dataclass(frozen=True)
class TargetSpec:
    kind: str
    n: int | None = None
    b: float | None = None

    def build(self, q0: float, T: float, h: float) -> TargetStrategy:
        if self.kind == "dtwap":
            return DTwap(q0=q0, T=T)
        if self.kind == "cosine":
            return cosine_target(q0=q0, T=T, n=self.n, b=self.b)
        if self.kind == "twap_step":
            return twap_target(q0=q0, T=T, n=self.n)
        if self.kind == "vwap":
            return vwap_target(h, q0=q0, T=T)
        raise DomainError(f"unknown target kind {self.kind!r}")

    @property
    def periods(self) -> int | None:
        return self.n if self.kind in ("cosine", "twap_step") else None


@dataclass(frozen=True)
class ExperimentConfig:
    params: MarketParams
    inv: Inventories
    target_spec: TargetSpec
    grid: Grid
    options: SolveOptions = field(default_factory=SolveOptions)
    outputs: tuple[str, ...] = ARTIFACTS
    n_players: tuple[int, ...] = (2, 10, 100)
    output_dir: Path = Path("out")
    kmax: int = 50
    detrend: str = "affine"
    name: str = "custom"

    @property
    def target(self) -> TargetStrategy:
        return self.target_spec.build(self.inv.q0_major, self.params.T, self.grid.h)

    def with_grid_step(self, h: float) -> "ExperimentConfig":
        cfg = _replace(self, grid=Grid.from_step(self.params.T, h))
        _check_target(cfg)
        return cfg

    def with_output_dir(self, path) -> "ExperimentConfig":
        return _replace(self, output_dir=Path(path))

    def with_players(self, sizes) -> "ExperimentConfig":
        return _replace(self, n_players=tuple(int(N) for N in sizes))

    def with_outputs(self, outputs) -> "ExperimentConfig":
        return _replace(self, outputs=tuple(outputs))


def _replace(cfg, **changes):
    values = {f: getattr(cfg, f) for f in cfg.__dataclass_fields__}
    values.update(changes)
    return ExperimentConfig(**values)


def _float(section, key, raw):
    try:
        return float(raw)
    except ValueError:
        raise SchemaError(f"[{section}] {key}: expected a number, got {raw!r}") from None


def _int(section, key, raw):
    try:
        value = float(raw)
    except ValueError:
        raise SchemaError(f"[{section}] {key}: expected an integer, got {raw!r}") from None
    if value != int(value):
        raise SchemaError(f"[{section}] {key}: expected an integer, got {raw!r}")
    return int(value)


def _list(raw):
    return [item.strip() for item in raw.replace("\n", ",").split(",") if item.strip()]


def parse_config(text: str, base_dir: Path | None = None) -> ExperimentConfig:
    """Parse INI ``text`` into a validated :class:`ExperimentConfig`."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ParseError(str(exc)) from None

    for section in parser.sections():
        if section not in _SCHEMA:
            raise SchemaError(f"unknown section [{section}]")
        allowed = _SCHEMA[section]["required"] + _SCHEMA[section]["optional"]
        for key in parser[section]:
            if key not in allowed:
                raise SchemaError(f"unknown key {key!r} in [{section}]")
    for section in _REQUIRED_SECTIONS:
        if section not in parser:
            raise SchemaError(f"missing section [{section}]")
        for key in _SCHEMA[section]["required"]:
            if key not in parser[section]:
                raise SchemaError(f"missing key {key!r} in [{section}]")

    m = parser["market"]
    params = MarketParams(
        a0=_float("market", "a0", m["a0"]),
        a=_float("market", "a", m["a"]),
        lambda0=_float("market", "lambda0", m["lambda0"]),
        lambda_=_float("market", "lambda", m["lambda"]),
        phi0=_float("market", "phi0", m["phi0"]),
        phi=_float("market", "phi", m["phi"]),
        T=_float("market", "T", m["T"]),
        sigma=_float("market", "sigma", m.get("sigma", "0")),
    )
    iv = parser["inventories"]
    inv = Inventories(
        q0_major=_float("inventories", "q0_major", iv["q0_major"]),
        q0_minor=_float("inventories", "q0_minor", iv.get("q0_minor", "0")),
    )

    tg = parser["target"]
    kind = tg["kind"].strip()
    if kind not in TARGET_KINDS:
        raise SchemaError(f"[target] kind must be one of {TARGET_KINDS}, got {kind!r}")
    n = b = None
    if kind in ("cosine", "twap_step"):
        if "n" not in tg:
            raise SchemaError(f"[target] kind={kind} requires n")
        n = _int("target", "n", tg["n"])
        if n < 1:
            raise DomainError("[target] n must be a positive integer")
    elif "n" in tg:
        raise SchemaError(f"[target] n is not used by kind={kind}")
    if kind == "cosine":
        if "b" not in tg:
            raise SchemaError("[target] kind=cosine requires b")
        b = _float("target", "b", tg["b"])
    elif "b" in tg:
        raise SchemaError(f"[target] b is not used by kind={kind}")
    spec = TargetSpec(kind, n, b)

    grid = Grid.from_step(params.T, _float("grid", "h", parser["grid"]["h"]))

    opt = parser["options"] if "options" in parser else {}
    options = SolveOptions(
        max_iter=_int("options", "max_iter", opt.get("max_iter", "200")),
        tol=_float("options", "tol", opt.get("tol", "1e-10")),
        oracle_quadrature_steps=_int("options", "oracle_quadrature_steps", opt.get("oracle_quadrature_steps", "20000")),
    )
    kmax = _int("options", "kmax", opt.get("kmax", "50"))
    detrend = opt.get("detrend", "affine").strip()
    if detrend not in ("affine", "none"):
        raise SchemaError(f"[options] detrend must be 'affine' or 'none', got {detrend!r}")

    out = parser["outputs"] if "outputs" in parser else {}
    artifacts = tuple(_list(out.get("artifacts", ", ".join(ARTIFACTS))))
    for item in artifacts:
        if item not in ARTIFACTS:
            raise SchemaError(f"[outputs] unknown artifact {item!r}")
    n_players = tuple(_int("outputs", "n_players", x) for x in _list(out.get("n_players", "2, 10, 100")))
    if any(N < 1 for N in n_players):
        raise DomainError("[outputs] n_players entries must be positive")
    output_dir = Path(out.get("output_dir", "out").strip())
    if base_dir is not None and not output_dir.is_absolute():
        output_dir = base_dir / output_dir

    cfg = ExperimentConfig(params, inv, spec, grid, options, artifacts, n_players, output_dir, kmax, detrend)
    _check_target(cfg)
    return cfg


def _check_target(cfg: ExperimentConfig) -> None:
    # build once so target and grid invariants fail before any solve
    cfg.target
    n = cfg.target_spec.periods
    if cfg.target_spec.kind == "twap_step" and not cfg.grid.aligned_with(cfg.params.T / n):
        raise DomainError(f"grid step {cfg.grid.h} does not divide the trading period T/n = {cfg.params.T / n}")


def load_config(path) -> ExperimentConfig:
    """Read and validate an INI experiment file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None
    return parse_config(text)


def preset_config(name: str, h: float = 1e-3) -> ExperimentConfig:
    """Configuration of one of the reference experiments."""
    specs = {
        "cos": TargetSpec("cosine", 10, COSINE_B),
        "twap": TargetSpec("twap_step", 10),
        "vwap": TargetSpec("vwap"),
    }
    if name not in specs:
        raise SchemaError(f"unknown preset {name!r}; choose from {sorted(specs)}")
    cfg = ExperimentConfig(
        params=BASE_PARAMS,
        inv=Inventories(BASE_Q0_MAJOR, BASE_Q0_MINOR),
        target_spec=specs[name],
        grid=Grid.from_step(BASE_PARAMS.T, h),
        outputs=ARTIFACTS if name != "vwap" else ("trajectories", "costs", "spectrum", "nplayer"),
        output_dir=Path("out") / name,
        name=name,
    )
    _check_target(cfg)
    return cfg
