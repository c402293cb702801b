"""Run configuration for the command-line tools.

A config is a YAML mapping. Lengths are in metres unless ``length_unit`` is
given in the ``geometry`` block; temperatures are in kelvin. Example::

    geometry:
      length_unit: nm
      h: 2500
      b: 500
      delta: {start: -600, stop: 600, num: 13}
    materials:
      wall: al_drude          # builtin name or path to a .mat file
      slab: al_drude
      gap: vacuum
    temperatures: [1, 300]
    tolerances:
      rel_tol: 1.0e-9
      matsubara_max_terms: 20000

Errors carry the line number of the offending node.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np
import yaml

from .dispersion import DispersionError, MaterialModel, resolve_material
from .fresnel import Stack
from .spectral import MatsubaraSpec, QuadratureSpec

LENGTH_UNITS = {"m": 1.0, "um": 1e-6, "nm": 1e-9}


class ConfigError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None, source: Optional[str] = None):
        self.line = line
        self.source = source
        where = source or "<config>"
        if line is not None:
            where = f"{where}:{line}"
        super().__init__(f"{where}: {message}")


class _Node:
    """A YAML value with the line it came from (1-based)."""

    def __init__(self, value, line):
        self.value = value
        self.line = line


def _convert(node: yaml.Node) -> _Node:
    line = node.start_mark.line + 1
    if isinstance(node, yaml.MappingNode):
        out = {}
        for k, v in node.value:
            key = _convert(k).value
            if key in out:
                raise ConfigError(f"duplicate key {key!r}", k.start_mark.line + 1)
            out[key] = _convert(v)
        return _Node(out, line)
    if isinstance(node, yaml.SequenceNode):
        return _Node([_convert(v) for v in node.value], line)
    return _Node(yaml.safe_load(yaml.serialize(node)), line)


class _Reader:
    """Typed access to a converted mapping, raising line-precise errors."""

    def __init__(self, node: _Node, source, path: str = ""):
        if not isinstance(node.value, dict):
            raise ConfigError(f"{path or 'top level'} must be a mapping", node.line, source)
        self.node = node
        self.source = source
        self.path = path
        self.used: set = set()

    def _err(self, msg, line=None):
        return ConfigError(msg, line if line is not None else self.node.line, self.source)

    def has(self, key) -> bool:
        return key in self.node.value

    def raw(self, key) -> _Node:
        self.used.add(key)
        return self.node.value[key]

    def section(self, key, required=True) -> Optional["_Reader"]:
        if not self.has(key):
            if required:
                raise self._err(f"missing section {self._name(key)!r}")
            return None
        return _Reader(self.raw(key), self.source, self._name(key))

    def _name(self, key):
        return f"{self.path}.{key}" if self.path else str(key)

    def number(self, key, default=None, required=False, positive=False, nonneg=False):
        if not self.has(key):
            if required:
                raise self._err(f"missing {self._name(key)!r}")
            return default
        n = self.raw(key)
        return self._coerce(n, self._name(key), positive, nonneg)

    def _coerce(self, n: _Node, name, positive=False, nonneg=False) -> float:
        v = n.value
        if isinstance(v, bool):
            raise self._err(f"{name} must be a number, got {v!r}", n.line)
        if isinstance(v, str):
            # PyYAML reads '1e-6' (no dot) as a string
            try:
                v = float(v.strip())
            except ValueError:
                raise self._err(f"{name} must be a number, got {n.value!r}", n.line) from None
        if not isinstance(v, (int, float)) or not math.isfinite(v):
            raise self._err(f"{name} must be a finite number, got {n.value!r}", n.line)
        if positive and not v > 0:
            raise self._err(f"{name} must be > 0, got {v!r}", n.line)
        if nonneg and not v >= 0:
            raise self._err(f"{name} must be >= 0, got {v!r}", n.line)
        return float(v)

    def grid(self, key, required=True, positive=False, nonneg=False, sort=True) -> Optional[list]:
        """A scalar, a list, or {start, stop, num}; returned as a sorted non-empty list."""
        if not self.has(key):
            if required:
                raise self._err(f"missing {self._name(key)!r}")
            return None
        n = self.raw(key)
        name = self._name(key)
        if isinstance(n.value, list):
            if not n.value:
                raise self._err(f"{name} must not be empty", n.line)
            vals = [self._coerce(x, name, positive, nonneg) for x in n.value]
        elif isinstance(n.value, dict):
            sub = _Reader(n, self.source, name)
            start = sub.number("start", required=True)
            stop = sub.number("stop", required=True)
            num = sub.number("num", required=True, positive=True)
            if num != int(num):
                raise self._err(f"{name}.num must be an integer", n.line)
            sub.finish()
            if stop < start:
                raise self._err(f"{name}: stop must be >= start", n.line)
            vals = [float(v) for v in np.linspace(start, stop, int(num))]
            for v in vals:
                if positive and not v > 0 or nonneg and not v >= 0:
                    raise self._err(f"{name} values must be {'> 0' if positive else '>= 0'}", n.line)
        else:
            vals = [self._coerce(n, name, positive, nonneg)]
        if sort and vals != sorted(vals):
            raise self._err(f"{name} must be sorted ascending", n.line)
        if len(set(vals)) != len(vals):
            raise self._err(f"{name} contains duplicates", n.line)
        return vals

    def string(self, key, default=None, choices=None):
        if not self.has(key):
            return default
        n = self.raw(key)
        if not isinstance(n.value, str):
            raise self._err(f"{self._name(key)} must be a string", n.line)
        if choices is not None and n.value not in choices:
            raise self._err(f"{self._name(key)} must be one of {sorted(choices)}, got {n.value!r}", n.line)
        return n.value

    def integer(self, key, default=None, minimum=None):
        v = self.number(key, default)
        if v is None:
            return None
        if v != int(v):
            raise self._err(f"{self._name(key)} must be an integer", self.raw(key).line)
        if minimum is not None and v < minimum:
            raise self._err(f"{self._name(key)} must be >= {minimum}", self.raw(key).line)
        return int(v)

    def finish(self):
        extra = [k for k in self.node.value if k not in self.used]
        if extra:
            k = extra[0]
            raise self._err(f"unknown key {self._name(k)!r}", self.node.value[k].line)


@dataclass
class RunConfig:
    """Validated configuration; only the fields a command needs must be present."""

    source: str
    base_dir: Path
    h: Optional[float] = None
    b: Optional[float] = None
    b_grid: Optional[list] = None
    delta_grid: Optional[list] = None
    temperatures: list = field(default_factory=lambda: [0.0])
    materials: dict = field(default_factory=dict)
    material_refs: dict = field(default_factory=dict)
    qspec: QuadratureSpec = field(default_factory=QuadratureSpec)
    matsubara_max_terms: int = 5000
    matsubara_term_rel_tol: float = 1e-10
    k_spring: Optional[float] = None
    m_area: Optional[float] = None
    accuracy: Optional[float] = None
    a: Optional[float] = None
    fd_fraction: float = 1e-3
    n_draws: int = 20
    seed: int = 20240607
    power_law_sigma: float = 4.0
    dispersive: bool = False

    @property
    def stack(self) -> Stack:
        m = self.materials
        return Stack(m["wall"], m["slab"], m["gap"])

    def mspec(self, temperature: float, scale: float = 1.0) -> Optional[MatsubaraSpec]:
        if temperature == 0:
            return None
        return MatsubaraSpec(temperature, max_terms=self.matsubara_max_terms,
                             term_rel_tol=self.matsubara_term_rel_tol * scale)

    def material_digests(self) -> dict:
        return {role: {"ref": self.material_refs[role], "name": mat.name, "sha256": mat.digest}
                for role, mat in sorted(self.materials.items())}


DEFAULT_MATERIALS = {"wall": "al_drude", "slab": "al_drude", "gap": "vacuum"}


def parse_config(text: str, source: str = "<config>", base_dir: Optional[Path] = None) -> RunConfig:
    try:
        root = yaml.compose(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"invalid YAML: {getattr(exc, 'problem', exc)}",
                          mark.line + 1 if mark else None, source) from None
    if root is None:
        root_node = _Node({}, 1)
    else:
        try:
            root_node = _convert(root)
        except ConfigError as exc:
            raise ConfigError(str(exc).split(": ", 1)[1], exc.line, source) from None
    top = _Reader(root_node, source)
    cfg = RunConfig(source=source, base_dir=base_dir or Path("."))

    geo = top.section("geometry", required=False)
    if geo is not None:
        unit = geo.string("length_unit", "m", choices=LENGTH_UNITS)
        f = LENGTH_UNITS[unit]
        if geo.has("h") and geo.has("c"):
            raise ConfigError("give either geometry.h or geometry.c, not both", geo.node.line, source)
        b_list = geo.grid("b", required=False, nonneg=True)
        if b_list is not None:
            cfg.b_grid = [v * f for v in b_list]
            cfg.b = cfg.b_grid[0]
        if geo.has("h"):
            cfg.h = geo.number("h", positive=True) * f
        elif geo.has("c"):
            c = geo.number("c", positive=True) * f
            if cfg.b is None:
                raise ConfigError("geometry.c needs geometry.b", geo.node.line, source)
            if len(cfg.b_grid) > 1:
                raise ConfigError("geometry.c cannot be combined with a b grid; give h", geo.node.line, source)
            cfg.h = c - cfg.b
            if not cfg.h > 0:
                raise ConfigError("geometry.c must exceed geometry.b", geo.raw("c").line, source)
        d = geo.grid("delta", required=False)
        if d is not None:
            cfg.delta_grid = [v * f for v in d]
            if cfg.h is not None:
                for v in cfg.delta_grid:
                    if not abs(v) < cfg.h / 2:
                        raise ConfigError(f"|delta| = {abs(v):g} m must be < h/2 = {cfg.h / 2:g} m",
                                          geo.raw("delta").line, source)
        a = geo.number("a", positive=True)
        if a is not None:
            cfg.a = a * f
        geo.finish()

    mats = top.section("materials", required=False)
    refs = dict(DEFAULT_MATERIALS)
    lines = {}
    if mats is not None:
        for role in ("wall", "slab", "gap"):
            if mats.has(role):
                refs[role] = mats.string(role)
                lines[role] = mats.raw(role).line
        mats.finish()
    for role, ref in refs.items():
        try:
            cfg.materials[role] = resolve_material(ref, cfg.base_dir)
        except (DispersionError, OSError) as exc:
            raise ConfigError(f"materials.{role}: {exc}", lines.get(role), source) from None
    cfg.material_refs = refs

    temps = top.grid("temperatures", required=False, nonneg=True)
    if temps is not None:
        cfg.temperatures = temps

    tol = top.section("tolerances", required=False)
    if tol is not None:
        q = QuadratureSpec()
        try:
            cfg.qspec = QuadratureSpec(
                rel_tol=tol.number("rel_tol", q.rel_tol, positive=True),
                abs_tol=tol.number("abs_tol", q.abs_tol, nonneg=True),
                max_subdivisions=tol.integer("max_subdivisions", q.max_subdivisions, minimum=1),
                tail_cutoff=tol.number("tail_cutoff", q.tail_cutoff, positive=True),
            )
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"tolerances: {exc}", tol.node.line, source) from None
        cfg.matsubara_max_terms = tol.integer("matsubara_max_terms", cfg.matsubara_max_terms, minimum=1)
        cfg.matsubara_term_rel_tol = tol.number("matsubara_term_rel_tol", cfg.matsubara_term_rel_tol,
                                                positive=True)
        tol.finish()

    osc = top.section("oscillator", required=False)
    if osc is not None:
        cfg.k_spring = osc.number("k_spring", positive=True)
        cfg.m_area = osc.number("m_area", positive=True)
        cfg.accuracy = osc.number("accuracy", positive=True)
        if cfg.accuracy is not None and not cfg.accuracy < 0.5:
            raise ConfigError("oscillator.accuracy must be < 0.5", osc.raw("accuracy").line, source)
        osc.finish()

    opts = top.section("options", required=False)
    if opts is not None:
        cfg.fd_fraction = opts.number("fd_fraction", cfg.fd_fraction, positive=True)
        cfg.n_draws = opts.integer("n_draws", cfg.n_draws, minimum=1)
        cfg.seed = opts.integer("seed", cfg.seed, minimum=0)
        cfg.power_law_sigma = opts.number("power_law_sigma", cfg.power_law_sigma, positive=True)
        if opts.has("dispersive"):
            n = opts.raw("dispersive")
            if not isinstance(n.value, bool):
                raise ConfigError("options.dispersive must be true or false", n.line, source)
            cfg.dispersive = n.value
        opts.finish()
    top.finish()
    return cfg


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", None, str(path)) from None
    return parse_config(text, str(path), path.parent)


def require(cfg: RunConfig, *names: str):
    missing = [n for n in names if getattr(cfg, n) is None]
    if missing:
        hint = {"h": "geometry.h", "b": "geometry.b", "delta_grid": "geometry.delta", "a": "geometry.a",
                "k_spring": "oscillator.k_spring", "m_area": "oscillator.m_area",
                "b_grid": "geometry.b"}
        raise ConfigError("missing " + ", ".join(hint.get(n, n) for n in missing), None, cfg.source)


def as_plain(value: Any):
    """Recursively convert numpy scalars for serialisation."""
    if isinstance(value, dict):
        return {k: as_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [as_plain(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    return value


__all__ = ["ConfigError", "RunConfig", "parse_config", "load_config", "require", "LENGTH_UNITS",
           "MaterialModel"]
