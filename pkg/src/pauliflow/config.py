"""Run configuration: INI-style sections of typed key = value pairs.

Parsing is schema-driven: every key has a declared type, default (or
required marker), and invariant check; unknown sections or keys are hard
errors naming the offending path, so typos like `espilon` cannot pass
silently. The resolved configuration (defaults filled in) can be
re-rendered as text that parses back to an identical RunConfig, which is
what run directories store for reproduction.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field

import numpy as np

from .fields import ASolveOptions, GaugeKind, as_gauge
from .evolution import StepScheme, as_scheme
from .grid import Grid
from .initial_data import InitialDataSpec, KINDS

__all__ = [
    "ConfigError",
    "MissingKeyError",
    "ConfigTypeError",
    "InvariantViolation",
    "GateOptions",
    "RunConfig",
    "parse_config",
    "load_config",
    "apply_overrides",
    "resolved_config_text",
]


class ConfigError(ValueError):
    """Base class; message always carries the section.key path."""


class MissingKeyError(ConfigError):
    pass


class ConfigTypeError(ConfigError):
    pass


class InvariantViolation(ConfigError):
    pass


_REQUIRED = object()


# -- leaf parsers -----------------------------------------------------------


def _parse_int(s: str) -> int:
    try:
        return int(s, 10)
    except ValueError:
        raise ValueError(f"expected an integer, got {s!r}") from None


def _parse_float(s: str) -> float:
    try:
        return float(s)
    except ValueError:
        raise ValueError(f"expected a number, got {s!r}") from None


_BOOL_WORDS = {
    "true": True, "yes": True, "on": True, "1": True,
    "false": False, "no": False, "off": False, "0": False,
}


def _parse_bool(s: str) -> bool:
    try:
        return _BOOL_WORDS[s.strip().lower()]
    except KeyError:
        raise ValueError(f"expected a boolean, got {s!r}") from None


def _split_items(s: str) -> list[str]:
    return s.replace(",", " ").split()


def _parse_vec3_float(s: str) -> tuple[float, float, float]:
    items = _split_items(s)
    if len(items) != 3:
        raise ValueError(f"expected 3 components, got {len(items)} in {s!r}")
    return tuple(_parse_float(x) for x in items)


def _parse_vec3_int(s: str) -> tuple[int, int, int]:
    items = _split_items(s)
    if len(items) != 3:
        raise ValueError(f"expected 3 components, got {len(items)} in {s!r}")
    return tuple(_parse_int(x) for x in items)


def _parse_complex_pair(s: str) -> tuple[complex, complex]:
    items = _split_items(s)
    if len(items) != 2:
        raise ValueError(f"expected 2 components, got {len(items)} in {s!r}")
    try:
        return tuple(complex(x) for x in items)
    except ValueError:
        raise ValueError(f"expected complex numbers, got {s!r}") from None


def _parse_str(s: str) -> str:
    return s.strip()


# -- rendering --------------------------------------------------------------


def _fmt_float(x: float) -> str:
    return repr(float(x))


def _fmt_complex(c: complex) -> str:
    sign = "+" if c.imag >= 0 else "-"
    return f"{c.real!r}{sign}{abs(c.imag)!r}j"


def _render(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, float):
        return _fmt_float(value)
    if isinstance(value, complex):
        return _fmt_complex(value)
    if isinstance(value, (tuple, list)):
        return " ".join(_render(v) for v in value)
    return str(value)


# -- schema -----------------------------------------------------------------

_SCHEMA = {
    "grid": {
        "n": (_parse_int, _REQUIRED),
        "box_length": (_parse_float, _REQUIRED),
    },
    "evolution": {
        "gauge": (_parse_str, _REQUIRED),
        "epsilon": (_parse_float, _REQUIRED),
        "dt": (_parse_float, _REQUIRED),
        "t_final": (_parse_float, _REQUIRED),
        "scheme": (_parse_str, "rk4"),
        "dealias": (_parse_bool, True),
        "picard_tol": (_parse_float, 1e-10),
        "picard_max_iterations": (_parse_int, 25),
        "blowup_factor": (_parse_float, 1e3),
    },
    "initial_data": {
        "kind": (_parse_str, _REQUIRED),
        "center": (_parse_vec3_float, None),
        "width": (_parse_float, None),
        "momentum": (_parse_vec3_int, (0, 0, 0)),
        "spin": (_parse_complex_pair, (1.0 + 0.0j, 0.0 + 0.0j)),
        "normalization": (_parse_float, 1.0),
        "path": (_parse_str, None),
    },
    "solver": {
        "tolerance": (_parse_float, 1e-10),
        "max_iterations": (_parse_int, 200),
        "damping": (_parse_float, 1.0),
    },
    "output": {
        "stride": (_parse_int, 10),
        "snapshots": (_parse_bool, False),
    },
    "diagnostics": {
        "sobolev_s": (_parse_float, 2.0),
    },
    "gates": {
        "charge_rel": (_parse_float, 1e-8),
        "energy_rel": (_parse_float, 1e-6),
        "energy_increase_rel": (_parse_float, 1e-8),
        "gauge_abs": (_parse_float, 1e-12),
        "gauge_factor": (_parse_float, 10.0),
        "h1_guard": (_parse_float, 10.0),
        "sweep_slope_min": (_parse_float, 0.9),
        "order_window": (_parse_float, 0.5),
    },
    "run": {
        "seed": (_parse_int, 0),
    },
}


@dataclass(frozen=True)
class GateOptions:
    charge_rel: float = 1e-8
    energy_rel: float = 1e-6
    energy_increase_rel: float = 1e-8
    gauge_abs: float = 1e-12
    gauge_factor: float = 10.0
    h1_guard: float = 10.0
    sweep_slope_min: float = 0.9
    order_window: float = 0.5


@dataclass(frozen=True)
class RunConfig:
    """Fully validated run description (all defaults resolved)."""

    grid_n: int
    box_length: float
    gauge: GaugeKind
    epsilon: float
    dt: float
    t_final: float
    scheme: StepScheme
    dealias: bool
    picard_tol: float
    picard_max_iterations: int
    blowup_factor: float
    initial: InitialDataSpec
    solver: ASolveOptions
    stride: int
    snapshots: bool
    sobolev_s: float
    gates: GateOptions
    seed: int

    def make_grid(self) -> Grid:
        return Grid(self.grid_n, self.box_length)


def _read_ini(text: str) -> dict[str, dict[str, str]]:
    parser = configparser.ConfigParser(interpolation=None, strict=True)
    parser.optionxform = str  # keep keys case-sensitive
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    return {sec: dict(parser.items(sec)) for sec in parser.sections()}


def _validate_tree(tree: dict[str, dict[str, str]]) -> dict[str, dict]:
    for section in tree:
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        for key in tree[section]:
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key {section}.{key}")

    resolved: dict[str, dict] = {}
    for section, keys in _SCHEMA.items():
        resolved[section] = {}
        for key, (parser, default) in keys.items():
            raw = tree.get(section, {}).get(key)
            if raw is None:
                if default is _REQUIRED:
                    raise MissingKeyError(f"missing required key {section}.{key}")
                resolved[section][key] = default
            else:
                try:
                    resolved[section][key] = parser(raw)
                except ValueError as exc:
                    raise ConfigTypeError(f"{section}.{key}: {exc}") from None
    return resolved


def _build_config(vals: dict[str, dict]) -> RunConfig:
    def invariant(path: str, exc: Exception) -> InvariantViolation:
        return InvariantViolation(f"{path}: {exc}")

    try:
        Grid(vals["grid"]["n"], vals["grid"]["box_length"])
    except ValueError as exc:
        raise invariant("grid", exc) from None

    try:
        gauge = as_gauge(vals["evolution"]["gauge"])
    except ValueError as exc:
        raise invariant("evolution.gauge", exc) from None
    try:
        scheme = as_scheme(vals["evolution"]["scheme"])
    except ValueError as exc:
        raise invariant("evolution.scheme", exc) from None

    ev = vals["evolution"]
    if ev["epsilon"] < 0.0:
        raise InvariantViolation(f"evolution.epsilon: must be >= 0, got {ev['epsilon']}")
    if not (ev["dt"] > 0.0):
        raise InvariantViolation(f"evolution.dt: must be positive, got {ev['dt']}")
    if ev["t_final"] < 0.0:
        raise InvariantViolation(f"evolution.t_final: must be >= 0, got {ev['t_final']}")
    if not (ev["picard_tol"] > 0.0):
        raise InvariantViolation(f"evolution.picard_tol: must be positive, got {ev['picard_tol']}")
    if ev["picard_max_iterations"] < 1:
        raise InvariantViolation(
            f"evolution.picard_max_iterations: must be >= 1, got {ev['picard_max_iterations']}"
        )
    if not (ev["blowup_factor"] > 1.0):
        raise InvariantViolation(
            f"evolution.blowup_factor: must exceed 1, got {ev['blowup_factor']}"
        )

    init = vals["initial_data"]
    if init["kind"] not in KINDS:
        raise InvariantViolation(
            f"initial_data.kind: unknown kind {init['kind']!r}; expected one of {KINDS}"
        )
    if init["kind"] == "gaussian_packet" and init["width"] is None:
        raise MissingKeyError("missing required key initial_data.width (gaussian packet)")
    if init["kind"] == "file" and not init["path"]:
        raise MissingKeyError("missing required key initial_data.path (file kind)")
    try:
        initial = InitialDataSpec(
            kind=init["kind"],
            center=init["center"],
            width=init["width"],
            momentum=init["momentum"],
            spin=init["spin"],
            normalization=init["normalization"],
            path=init["path"],
        )
    except ValueError as exc:
        raise invariant("initial_data", exc) from None

    try:
        solver = ASolveOptions(
            tolerance=vals["solver"]["tolerance"],
            max_iterations=vals["solver"]["max_iterations"],
            damping=vals["solver"]["damping"],
        )
    except ValueError as exc:
        raise invariant("solver", exc) from None

    out = vals["output"]
    if out["stride"] < 1:
        raise InvariantViolation(f"output.stride: must be >= 1, got {out['stride']}")

    gates = GateOptions(**vals["gates"])
    for name in ("charge_rel", "energy_rel", "energy_increase_rel", "gauge_abs"):
        if not (getattr(gates, name) > 0.0):
            raise InvariantViolation(f"gates.{name}: must be positive")

    return RunConfig(
        grid_n=vals["grid"]["n"],
        box_length=vals["grid"]["box_length"],
        gauge=gauge,
        epsilon=ev["epsilon"],
        dt=ev["dt"],
        t_final=ev["t_final"],
        scheme=scheme,
        dealias=ev["dealias"],
        picard_tol=ev["picard_tol"],
        picard_max_iterations=ev["picard_max_iterations"],
        blowup_factor=ev["blowup_factor"],
        initial=initial,
        solver=solver,
        stride=out["stride"],
        snapshots=out["snapshots"],
        sobolev_s=vals["diagnostics"]["sobolev_s"],
        gates=gates,
        seed=vals["run"]["seed"],
    )


def apply_overrides(tree: dict[str, dict[str, str]], overrides: list[str]) -> None:
    """Apply `--set section.key=value` strings onto a raw config tree."""
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form section.key=value")
        path, _, raw = item.partition("=")
        path = path.strip()
        if path.count(".") != 1:
            raise ConfigError(f"override path {path!r} is not of the form section.key")
        section, key = path.split(".")
        if section not in _SCHEMA or key not in _SCHEMA[section]:
            raise ConfigError(f"unknown key {section}.{key}")
        tree.setdefault(section, {})[key] = raw.strip()


def parse_config(text: str, overrides: list[str] | None = None) -> RunConfig:
    """Parse, override, validate. Raises ConfigError subclasses."""
    tree = _read_ini(text)
    if overrides:
        apply_overrides(tree, overrides)
    return _build_config(_validate_tree(tree))


def load_config(path, overrides: list[str] | None = None) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read(), overrides)


def resolved_config_text(cfg: RunConfig) -> str:
    """Render a RunConfig back to INI text that reparses identically."""
    tree = {
        "grid": {"n": cfg.grid_n, "box_length": cfg.box_length},
        "evolution": {
            "gauge": cfg.gauge.value,
            "epsilon": cfg.epsilon,
            "dt": cfg.dt,
            "t_final": cfg.t_final,
            "scheme": cfg.scheme.value,
            "dealias": cfg.dealias,
            "picard_tol": cfg.picard_tol,
            "picard_max_iterations": cfg.picard_max_iterations,
            "blowup_factor": cfg.blowup_factor,
        },
        "initial_data": {
            "kind": cfg.initial.kind,
            **({"center": cfg.initial.center} if cfg.initial.center is not None else {}),
            **({"width": cfg.initial.width} if cfg.initial.width is not None else {}),
            "momentum": cfg.initial.momentum,
            "spin": cfg.initial.spin,
            "normalization": cfg.initial.normalization,
            **({"path": cfg.initial.path} if cfg.initial.path else {}),
        },
        "solver": {
            "tolerance": cfg.solver.tolerance,
            "max_iterations": cfg.solver.max_iterations,
            "damping": cfg.solver.damping,
        },
        "output": {"stride": cfg.stride, "snapshots": cfg.snapshots},
        "diagnostics": {"sobolev_s": cfg.sobolev_s},
        "gates": {
            name: getattr(cfg.gates, name)
            for name in (
                "charge_rel", "energy_rel", "energy_increase_rel", "gauge_abs",
                "gauge_factor", "h1_guard", "sweep_slope_min", "order_window",
            )
        },
        "run": {"seed": cfg.seed},
    }
    buf = io.StringIO()
    for section, keys in tree.items():
        buf.write(f"[{section}]\n")
        for key, value in keys.items():
            buf.write(f"{key} = {_render(value)}\n")
        buf.write("\n")
    return buf.getvalue()
