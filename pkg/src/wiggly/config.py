"""Declarative experiment documents (JSON) for the command-line runner."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .flow import FlowControls
from .harness import DEFAULT_EPS
from .landscape import EnergyLandscape, PiecewiseLinearLoad
from .potentials import DissipationPotential
from .profiles import WigglyProfile

__all__ = ["ConfigError", "Grid", "Tolerances", "ExperimentConfig", "load_config", "parse_config"]


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


@dataclass(frozen=True)
class Grid:
    start: float
    stop: float
    num: int

    def __post_init__(self):
        if int(self.num) < 1:
            raise ValueError("a grid needs at least one point")
        object.__setattr__(self, "num", int(self.num))

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.num)

    def to_list(self) -> list:
        return [self.start, self.stop, self.num]


@dataclass(frozen=True)
class Tolerances:
    edb: float = 1e-6
    contact: float = 1e-6
    route: float = 1e-6
    lower_bound: float = 1e-9
    meff: float = 1e-8

    def scaled(self, factor: float) -> "Tolerances":
        return Tolerances(*(factor * getattr(self, k) for k in self.__dataclass_fields__))

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass(frozen=True)
class ExperimentConfig:
    potential: DissipationPotential = field(default_factory=DissipationPotential.quadratic)
    profile: WigglyProfile = field(default_factory=lambda: WigglyProfile.sinusoidal(1.0))
    phi: tuple = (0.0,)
    load: PiecewiseLinearLoad = field(default_factory=lambda: PiecewiseLinearLoad.ramp(2.0, 1.0))
    amplitude: tuple = (1.0,)
    eps: float = 0.05
    u0: float = 0.0
    T: float = 1.0
    eps_list: tuple = DEFAULT_EPS
    xi_grid: Grid = Grid(-3.0, 3.0, 121)
    v_grid: Grid = Grid(0.0, 5.0, 101)
    h_grid: Grid = Grid(-4.0, -0.01, 41)
    surface: str = "v-xi"
    controls: FlowControls = field(default_factory=FlowControls)
    tolerances: Tolerances = field(default_factory=Tolerances)
    output: str = "out"

    def landscape(self, eps: float | None = None) -> EnergyLandscape:
        return EnergyLandscape(self.phi, self.load, self.profile,
                               self.eps if eps is None else eps, self.amplitude)

    def to_dict(self) -> dict:
        return {
            "potential": self.potential.to_dict(),
            "profile": self.profile.to_dict(),
            "landscape": {"phi": list(self.phi), "load": self.load.to_dict(),
                          "amplitude": list(self.amplitude), "eps": self.eps,
                          "u0": self.u0, "T": self.T},
            "grids": {"xi": self.xi_grid.to_list(), "v": self.v_grid.to_list(),
                      "h": self.h_grid.to_list(), "eps": list(self.eps_list),
                      "surface": self.surface},
            "integrator": self.controls.to_dict(),
            "tolerances": self.tolerances.to_dict(),
            "output": self.output,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _line_of(text: str | None, key: str) -> int | None:
    if not text:
        return None
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _read_samples(path: Path) -> list:
    raw = path.read_text().replace(",", " ").split()
    return [float(x) for x in raw]


def parse_config(doc: dict, text: str | None = None, base: Path | None = None) -> ExperimentConfig:
    """Build a config from a parsed document; text (if given) locates errors."""
    if not isinstance(doc, dict):
        raise ConfigError("the document must be an object", 1)
    known = {"potential", "profile", "landscape", "grids", "integrator", "tolerances", "output"}
    for k in doc:
        if k not in known:
            raise ConfigError(f"unknown section {k!r}", _line_of(text, k))
    kw = {}
    section = None
    try:
        section = "potential"
        if "potential" in doc:
            kw["potential"] = DissipationPotential.from_dict(doc["potential"])
        section = "profile"
        if "profile" in doc:
            prof = dict(doc["profile"])
            if prof.get("kind") == "tabulated" and "samples_file" in prof:
                p = Path(prof.pop("samples_file"))
                if not p.is_absolute() and base is not None:
                    p = base / p
                prof["samples"] = _read_samples(p)
            kw["profile"] = WigglyProfile.from_dict(prof)
        section = "landscape"
        land = doc.get("landscape", {})
        if "phi" in land:
            kw["phi"] = tuple(float(c) for c in land["phi"])
        if "load" in land:
            kw["load"] = PiecewiseLinearLoad(land["load"]["times"], land["load"]["values"])
        if "amplitude" in land:
            kw["amplitude"] = tuple(float(c) for c in land["amplitude"])
        for k in ("eps", "u0", "T"):
            if k in land:
                kw[k] = float(land[k])
        if kw.get("eps", 1.0) <= 0:
            section = "eps"
            raise ValueError("eps must be positive")
        if kw.get("T", 1.0) <= 0:
            section = "T"
            raise ValueError("T must be positive")
        section = "grids"
        grids = doc.get("grids", {})
        for name, attr in (("xi", "xi_grid"), ("v", "v_grid"), ("h", "h_grid")):
            if name in grids:
                section = name
                kw[attr] = Grid(*grids[name])
        if "eps" in grids:
            section = "grids"
            el = tuple(float(e) for e in grids["eps"])
            if not el or any(b >= a for a, b in zip(el[:-1], el[1:])) or el[-1] <= 0:
                raise ValueError("the eps list must be nonempty, positive and strictly decreasing")
            kw["eps_list"] = el
        if "surface" in grids:
            section = "surface"
            if grids["surface"] not in ("v-xi", "xi-h"):
                raise ValueError("surface is 'v-xi' or 'xi-h'")
            kw["surface"] = grids["surface"]
        section = "integrator"
        if "integrator" in doc:
            kw["controls"] = FlowControls(**doc["integrator"])
        section = "tolerances"
        if "tolerances" in doc:
            kw["tolerances"] = Tolerances(**doc["tolerances"])
        section = "output"
        if "output" in doc:
            kw["output"] = str(doc["output"])
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError, OSError) as exc:
        raise ConfigError(f"{section}: {exc}", _line_of(text, section)) from exc
    return ExperimentConfig(**kw)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(exc.msg, exc.lineno) from exc
    return parse_config(doc, text, path.parent)
