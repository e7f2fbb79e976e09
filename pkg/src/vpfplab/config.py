"""Run configuration: INI-style files with sections, validated up front.

A config names the grid, the dimensionless run parameters, the species,
and the initial profiles.  Profiles come from a deliberately small
expression vocabulary (constant, cosine, gaussian) so that a run is
reproducible from its manifest alone.  Example::

    [run]
    T = 0.5
    epsilon = 0.5 0.25 0.125 0.0625
    varpi = 1.0

    [grid]
    nx = 64
    nv = 64

    [species.cation]
    z = 1
    kappa = 1.0
    zeta = 1.0
    density = cosine base=1.0 amp=0.2 k=1

    [species.anion]
    z = -1
    kappa = 1.0
    zeta = 1.0
    density = cosine base=1.0 amp=-0.2 k=1

Every validation error names the offending key by path ("run.epsilon",
"species[0].kappa", ...).  Global neutrality of the configured data is
checked here, before any solver runs.
"""

from __future__ import annotations

import configparser
import math
import os
from dataclasses import dataclass, field as dc_field

import numpy as np

from .grid import PhaseGrid, SpeciesParams, check_neutrality, default_vmax
from .pnp import DIFFUSIVITY_MODES
from .poisson import NEUTRALITY_RTOL
from .transport import BC_MODES

__all__ = [
    "ConfigError",
    "Expression",
    "parse_expression",
    "SpeciesConfig",
    "RunConfig",
    "load_config",
]

SCALINGS = ("low-field", "high-field")


class ConfigError(ValueError):
    """A config file problem, with the offending key path in the message."""


@dataclass(frozen=True)
class Expression:
    """One profile from the constant/cosine/gaussian vocabulary."""

    kind: str
    params: tuple[tuple[str, float], ...]

    def evaluate(self, x: np.ndarray, lx: float) -> np.ndarray:
        p = dict(self.params)
        if self.kind == "constant":
            return np.full_like(x, p["value"])
        if self.kind == "cosine":
            return p["base"] + p["amp"] * np.cos(
                p["k"] * math.pi * x / lx)
        # gaussian
        return p["base"] + p["amp"] * np.exp(
            -((x - p["center"]) ** 2) / (2.0 * p["width"] ** 2))

    def describe(self) -> str:
        inner = " ".join(f"{k}={v!r}" for k, v in self.params)
        return f"{self.kind} {inner}"


_EXPR_PARAMS = {
    "constant": (("value", None),),
    "cosine": (("base", None), ("amp", None), ("k", 1.0)),
    "gaussian": (("base", 0.0), ("amp", None), ("center", None),
                 ("width", None)),
}


def parse_expression(text: str, path: str) -> Expression:
    """Parse "kind key=value ..." into an Expression; errors cite path."""
    tokens = text.split()
    if not tokens:
        raise ConfigError(f"{path}: empty profile expression")
    kind = tokens[0]
    if kind not in _EXPR_PARAMS:
        raise ConfigError(
            f"{path}: unknown profile kind {kind!r} "
            f"(expected one of {', '.join(_EXPR_PARAMS)})")
    given: dict[str, float] = {}
    for tok in tokens[1:]:
        if "=" not in tok:
            # bare value shorthand, only for the single-parameter constant
            if kind == "constant" and "value" not in given:
                tok = "value=" + tok
            else:
                raise ConfigError(f"{path}: expected key=value, got {tok!r}")
        key, _, raw = tok.partition("=")
        if key in given:
            raise ConfigError(f"{path}.{key}: given twice")
        try:
            given[key] = float(raw)
        except ValueError:
            raise ConfigError(f"{path}.{key}: not a number: {raw!r}") from None
    spec_params = _EXPR_PARAMS[kind]
    allowed = {k for k, _ in spec_params}
    for key in given:
        if key not in allowed:
            raise ConfigError(f"{path}.{key}: unknown parameter for {kind!r}")
    values = []
    for key, default in spec_params:
        if key in given:
            values.append((key, given[key]))
        elif default is not None:
            values.append((key, default))
        else:
            raise ConfigError(f"{path}.{key}: required for {kind!r}")
    expr = Expression(kind=kind, params=tuple(values))
    p = dict(values)
    if kind == "gaussian" and not p["width"] > 0.0:
        raise ConfigError(f"{path}.width: must be positive, got {p['width']!r}")
    if kind == "cosine" and p["k"] != round(p["k"]):
        raise ConfigError(
            f"{path}.k: must be an integer mode count (zero-flux walls), "
            f"got {p['k']!r}")
    return expr


@dataclass(frozen=True)
class SpeciesConfig:
    label: str
    z: float
    kappa: float
    zeta: float
    density: Expression


@dataclass
class RunConfig:
    """Fully validated run description, defaults filled in."""

    T: float
    epsilons: list[float]
    varpi: float
    cfl: float
    n_samples: int
    bc_mode: str
    diffusivity: str
    scaling: str
    nx: int
    lx: float
    nv: int
    vmax: float | None
    species: tuple[SpeciesConfig, ...]
    background: Expression
    source_path: str = ""
    source_text: str = dc_field(default="", repr=False)

    @property
    def is_sweep(self) -> bool:
        return len(self.epsilons) > 1

    def species_params(self) -> tuple[SpeciesParams, ...]:
        return tuple(SpeciesParams(label=s.label, z=s.z, kappa=s.kappa,
                                   zeta=s.zeta) for s in self.species)

    def resolved_vmax(self) -> float:
        if self.vmax is not None:
            return self.vmax
        return default_vmax(self.species_params())

    def build_grid(self) -> PhaseGrid:
        return PhaseGrid(nx=self.nx, lx=self.lx, nv=self.nv,
                         vmax=self.resolved_vmax())

    def build_n0(self, grid: PhaseGrid) -> np.ndarray:
        n0 = np.stack([s.density.evaluate(grid.x, grid.lx)
                       for s in self.species])
        for i, s in enumerate(self.species):
            if n0[i].min() < 0.0:
                raise ConfigError(
                    f"species[{i}].density: profile dips negative "
                    f"(min {n0[i].min():.6g}) on the grid")
        return n0

    def build_background(self, grid: PhaseGrid) -> np.ndarray:
        return self.background.evaluate(grid.x, grid.lx)

    def ensure_runnable(self):
        if self.scaling != "low-field":
            raise NotImplementedError(
                "high-field scaling is a configuration stub; only the "
                "low-field (parabolic) scaling is implemented")

    def echo(self) -> dict:
        """Resolved parameters for the run manifest."""
        return {
            "T": self.T,
            "epsilon": list(self.epsilons),
            "varpi": self.varpi,
            "cfl": self.cfl,
            "samples": self.n_samples,
            "mode": self.bc_mode,
            "diffusivity": self.diffusivity,
            "scaling": self.scaling,
            "grid": {"nx": self.nx, "lx": self.lx, "nv": self.nv,
                     "vmax": self.resolved_vmax(),
                     "vmax_auto": self.vmax is None},
            "background": self.background.describe(),
            "species": [
                {"label": s.label, "z": s.z, "kappa": s.kappa,
                 "zeta": s.zeta, "density": s.density.describe()}
                for s in self.species
            ],
        }


class _SectionReader:
    """Typed key access with path-naming errors and leftover detection."""

    def __init__(self, name: str, items: dict[str, str], path: str):
        self.name = name
        self.items = dict(items)
        self.path = path

    def take(self, key: str, default=None, required=False) -> str | None:
        if key in self.items:
            return self.items.pop(key)
        if required:
            raise ConfigError(f"{self.path}.{key}: missing required key")
        return default

    def take_float(self, key: str, default=None, required=False,
                   positive=False) -> float | None:
        raw = self.take(key, required=required)
        if raw is None:
            value = default
        else:
            try:
                value = float(raw)
            except ValueError:
                raise ConfigError(
                    f"{self.path}.{key}: not a number: {raw!r}") from None
        if value is not None and positive and not value > 0.0:
            raise ConfigError(
                f"{self.path}.{key}: must be positive, got {value!r}")
        return value

    def take_int(self, key: str, default=None, required=False,
                 minimum=None) -> int | None:
        raw = self.take(key, required=required)
        if raw is None:
            return default
        try:
            value = int(raw)
        except ValueError:
            raise ConfigError(
                f"{self.path}.{key}: not an integer: {raw!r}") from None
        if minimum is not None and value < minimum:
            raise ConfigError(
                f"{self.path}.{key}: must be at least {minimum}, got {value}")
        return value

    def take_choice(self, key: str, choices, default=None) -> str:
        raw = self.take(key, default=default)
        if raw not in choices:
            raise ConfigError(
                f"{self.path}.{key}: must be one of "
                f"{', '.join(choices)}; got {raw!r}")
        return raw

    def finish(self):
        if self.items:
            stray = ", ".join(sorted(self.items))
            raise ConfigError(f"{self.path}: unknown key(s): {stray}")


def load_config(path: str) -> RunConfig:
    """Parse and validate a config file; raises ConfigError on any defect.

    Validation covers types, positivity, grid sanity, profile
    expressions, and the global-neutrality compatibility of the initial
    data with the field solve, so an invalid run is rejected before any
    time stepping starts.
    """
    if not os.path.isfile(path):
        raise ConfigError(f"config file not found: {path}")
    cp = configparser.ConfigParser(interpolation=None,
                                   inline_comment_prefixes=("#", ";"))
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        cp.read_string(text, source=path)
    except configparser.Error as exc:
        raise ConfigError(f"config parse failure: {exc}") from None

    known = {"run", "grid", "background"}
    species_sections = []
    for section in cp.sections():
        if section in known:
            continue
        if section.startswith("species.") and len(section) > len("species."):
            species_sections.append(section)
            continue
        raise ConfigError(
            f"unknown section [{section}] (expected [run], [grid], "
            f"[background], or [species.NAME])")

    if "run" not in cp:
        raise ConfigError("missing required section [run]")
    if "grid" not in cp:
        raise ConfigError("missing required section [grid]")
    if not species_sections:
        raise ConfigError("at least one [species.NAME] section is required")

    run = _SectionReader("run", dict(cp["run"]), "run")
    t_final = run.take_float("t", required=True, positive=True)
    eps_raw = run.take("epsilon", required=True)
    eps_tokens = eps_raw.replace(",", " ").split()
    if not eps_tokens:
        raise ConfigError("run.epsilon: needs at least one value")
    epsilons = []
    for tok in eps_tokens:
        try:
            e = float(tok)
        except ValueError:
            raise ConfigError(
                f"run.epsilon: not a number: {tok!r}") from None
        if not e > 0.0:
            raise ConfigError(f"run.epsilon: must be positive, got {e!r}")
        epsilons.append(e)
    varpi = run.take_float("varpi", default=1.0, positive=True)
    cfl = run.take_float("cfl", default=0.9, positive=True)
    if cfl > 1.0:
        raise ConfigError(f"run.cfl: must be at most 1, got {cfl!r}")
    n_samples = run.take_int("samples", default=5, minimum=1)
    bc_mode = run.take_choice("mode", BC_MODES, default="diffuse")
    diffusivity = run.take_choice("diffusivity", DIFFUSIVITY_MODES,
                                  default="kappa-over-zeta")
    scaling = run.take_choice("scaling", SCALINGS, default="low-field")
    run.finish()

    gr = _SectionReader("grid", dict(cp["grid"]), "grid")
    nx = gr.take_int("nx", required=True, minimum=2)
    lx = gr.take_float("lx", default=1.0, positive=True)
    nv = gr.take_int("nv", required=True, minimum=2)
    if nv % 2:
        raise ConfigError(f"grid.nv: must be even, got {nv}")
    vmax_raw = gr.take("vmax")
    if vmax_raw is None or vmax_raw.strip().lower() == "auto":
        vmax = None
    else:
        try:
            vmax = float(vmax_raw)
        except ValueError:
            raise ConfigError(
                f"grid.vmax: not a number (or 'auto'): {vmax_raw!r}") from None
        if not vmax > 0.0:
            raise ConfigError(f"grid.vmax: must be positive, got {vmax!r}")
    gr.finish()

    if "background" in cp:
        bg = _SectionReader("background", dict(cp["background"]), "background")
        bg_raw = bg.take("profile", default="constant 0.0")
        bg.finish()
    else:
        bg_raw = "constant 0.0"
    background = parse_expression(bg_raw, "background.profile")

    species = []
    labels = set()
    for idx, section in enumerate(species_sections):
        label = section[len("species."):]
        if label in labels:
            raise ConfigError(f"species[{idx}]: duplicate label {label!r}")
        labels.add(label)
        sr = _SectionReader(section, dict(cp[section]), f"species[{idx}]")
        z = sr.take_float("z", required=True)
        kappa = sr.take_float("kappa", required=True, positive=True)
        zeta = sr.take_float("zeta", required=True, positive=True)
        dens_raw = sr.take("density", required=True)
        density = parse_expression(dens_raw, f"species[{idx}].density")
        sr.finish()
        species.append(SpeciesConfig(label=label, z=z, kappa=kappa,
                                     zeta=zeta, density=density))

    cfg = RunConfig(T=t_final, epsilons=epsilons, varpi=varpi, cfl=cfl,
                    n_samples=n_samples, bc_mode=bc_mode,
                    diffusivity=diffusivity, scaling=scaling,
                    nx=nx, lx=lx, nv=nv, vmax=vmax,
                    species=tuple(species), background=background,
                    source_path=str(path), source_text=text)

    # Reject neutrality-incompatible data before any solver runs: the
    # zero-flux field problem is only solvable for net-neutral sources.
    grid = cfg.build_grid()
    n0 = cfg.build_n0(grid)
    bgv = cfg.build_background(grid)
    zs = [s.z for s in cfg.species]
    defect = check_neutrality(n0, zs, bgv, grid.dx)
    scale = sum(abs(z) * float(n0[i].sum()) * grid.dx
                for i, z in enumerate(zs)) + float(np.abs(bgv).sum()) * grid.dx
    if abs(defect) > NEUTRALITY_RTOL * max(scale, 1e-30):
        raise ConfigError(
            f"initial data violates global neutrality: total charge "
            f"{defect:.3e} (tolerance {NEUTRALITY_RTOL:.1e} relative); "
            f"adjust species densities or the background profile")
    return cfg
