"""Experiment configuration: TOML schema, parsing, and validation.

A config file has sections [walk], [substrate], [coin], [initial],
[noise], [run], and optionally [multiwalker].  `parse_config` loads the
file leniently; `validate` returns a list of diagnostics, each naming
the offending field path, and an empty list means the config is
runnable.  See the README for the full grammar.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Union

try:
    import tomllib
except ImportError:  # Python 3.10
    import tomli as tomllib

from .analysis import DEFAULT_AMPLITUDE_BUDGET
from .decoherence import DENSITY_KINDS, NoiseKind, NoiseModel
from .errors import InvalidParameterError, QwalkError
from .multiwalker import InteractionKind, Statistics
from .substrate import read_adjacency

WALK_KINDS = ("discrete", "continuous")
METHODS = ("auto", "pure", "trajectory", "density")
GENERATORS = ("line", "lattice", "adjacency")
COIN_NAMES = ("hadamard", "grover", "dft")
BOUNDARIES = ("open", "periodic")
PERCOLATION_MODES = ("bond", "site")
OUTPUT_CHOICES = ("distribution", "moments", "ipr", "tv_vs_classical", "samples", "joint")


@dataclass
class Diagnostic:
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.path}: {self.message}"


@dataclass
class WalkSection:
    kind: str = "discrete"
    method: str = "auto"
    gamma: float = 1.0


@dataclass
class SubstrateSection:
    generator: str = "line"
    n_sites: Union[int, str] = "auto"
    dims: Optional[list] = None
    boundary: str = "open"
    path: Optional[str] = None
    percolation: Optional[dict] = None  # keys: mode, p, seed


@dataclass
class CoinSection:
    name: str = "hadamard"
    dimension: Optional[int] = None


@dataclass
class InitialSection:
    b: float = 0.5
    beta: float = math.pi / 2
    start: Union[int, str] = "center"


@dataclass
class NoiseSection:
    kind: str = "none"
    strength: float = 0.0
    seed: int = 0


@dataclass
class RunSection:
    steps: Union[int, list, None] = None
    time: Union[float, int, list, None] = None
    runs: int = 1
    seed: int = 0
    amplitude_budget: int = DEFAULT_AMPLITUDE_BUDGET
    outputs: list = field(default_factory=lambda: ["distribution", "moments"])
    samples: int = 0


@dataclass
class MultiwalkerSection:
    starts: Optional[list] = None
    statistics: str = "distinguishable"
    interaction: Optional[dict] = None  # keys: kind, phi, u


@dataclass
class ExperimentConfig:
    walk: WalkSection = field(default_factory=WalkSection)
    substrate: SubstrateSection = field(default_factory=SubstrateSection)
    coin: CoinSection = field(default_factory=CoinSection)
    initial: InitialSection = field(default_factory=InitialSection)
    noise: NoiseSection = field(default_factory=NoiseSection)
    run: RunSection = field(default_factory=RunSection)
    multiwalker: Optional[MultiwalkerSection] = None
    unknown_keys: list = field(default_factory=list)
    base_dir: Optional[Path] = None  # resolves relative adjacency paths


_SECTIONS = {
    "walk": WalkSection,
    "substrate": SubstrateSection,
    "coin": CoinSection,
    "initial": InitialSection,
    "noise": NoiseSection,
    "run": RunSection,
    "multiwalker": MultiwalkerSection,
}

# sub-tables that stay plain dicts on their section dataclass
_NESTED = {("substrate", "percolation"), ("multiwalker", "interaction")}


def _load_section(cls, data: dict, prefix: str, unknown: list):
    names = {f.name for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in data.items():
        if key in names:
            kwargs[key] = value
        else:
            unknown.append(f"{prefix}.{key}")
    return cls(**kwargs)


def parse_config_text(text: str, base_dir: Optional[Path] = None) -> ExperimentConfig:
    """Parse TOML text into the schema without judging field values."""
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise InvalidParameterError(f"config is not valid TOML: {exc}") from exc
    unknown: list[str] = []
    config = ExperimentConfig(unknown_keys=unknown, base_dir=base_dir)
    for name, data in raw.items():
        cls = _SECTIONS.get(name)
        if cls is None or not isinstance(data, dict):
            unknown.append(name)
            continue
        data = dict(data)
        for section, sub in _NESTED:
            if name == section and sub in data and not isinstance(data[sub], dict):
                unknown.append(f"{section}.{sub}")
                data.pop(sub)
        setattr(config, name, _load_section(cls, data, name, unknown))
    return config


def parse_config(path: Union[str, Path]) -> ExperimentConfig:
    path = Path(path)
    return parse_config_text(path.read_text(), base_dir=path.parent)


# -- validation -----------------------------------------------------------------


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def _is_num(x) -> bool:
    return _is_int(x) or isinstance(x, float)


def validate(config: ExperimentConfig) -> list[Diagnostic]:
    """Full semantic check; an empty result means `run` will accept it."""
    diags: list[Diagnostic] = []
    bad = diags.append
    for key in config.unknown_keys:
        bad(Diagnostic(key, "unknown key"))

    walk = config.walk
    if walk.kind not in WALK_KINDS:
        bad(Diagnostic("walk.kind", f"must be one of {WALK_KINDS}, got {walk.kind!r}"))
    if walk.method not in METHODS:
        bad(Diagnostic("walk.method", f"must be one of {METHODS}, got {walk.method!r}"))
    if not (_is_num(walk.gamma) and walk.gamma > 0):
        bad(Diagnostic("walk.gamma", f"must be a number > 0, got {walk.gamma!r}"))
    discrete = walk.kind == "discrete"
    if not discrete and walk.method in ("trajectory", "density"):
        bad(
            Diagnostic(
                "walk.method",
                f"{walk.method!r} applies to discrete walks only",
            )
        )

    # substrate
    sub = config.substrate
    n_known: Optional[int] = None
    if sub.generator not in GENERATORS:
        bad(
            Diagnostic(
                "substrate.generator", f"must be one of {GENERATORS}, got {sub.generator!r}"
            )
        )
    if sub.boundary not in BOUNDARIES:
        bad(
            Diagnostic(
                "substrate.boundary", f"must be one of {BOUNDARIES}, got {sub.boundary!r}"
            )
        )
    coin_dim_needed: Optional[int] = 2
    if sub.generator == "line":
        if sub.n_sites == "auto":
            pass
        elif _is_int(sub.n_sites):
            if sub.n_sites < 2:
                bad(Diagnostic("substrate.n_sites", f"line needs >= 2 sites, got {sub.n_sites}"))
            elif sub.boundary == "periodic" and sub.n_sites < 3:
                bad(Diagnostic("substrate.n_sites", "periodic line needs >= 3 sites"))
            else:
                n_known = sub.n_sites
        else:
            bad(
                Diagnostic(
                    "substrate.n_sites", f'must be an integer or "auto", got {sub.n_sites!r}'
                )
            )
        coin_dim_needed = 2
    elif sub.generator == "lattice":
        dims = sub.dims
        if not (isinstance(dims, list) and 1 <= len(dims) <= 3 and all(_is_int(d) for d in dims)):
            bad(Diagnostic("substrate.dims", f"must be a list of 1 to 3 integers, got {dims!r}"))
            coin_dim_needed = None
        else:
            floor = 3 if sub.boundary == "periodic" else 2
            if any(d < floor for d in dims):
                bad(
                    Diagnostic(
                        "substrate.dims",
                        f"every axis needs >= {floor} sites with {sub.boundary} boundaries, got {dims}",
                    )
                )
            else:
                n_known = math.prod(dims)
            coin_dim_needed = 2 * len(dims)
        if sub.n_sites != "auto":
            bad(Diagnostic("substrate.n_sites", "lattice size comes from dims; leave n_sites out"))
    elif sub.generator == "adjacency":
        coin_dim_needed = None
        if not isinstance(sub.path, str):
            bad(Diagnostic("substrate.path", "adjacency generator needs a file path"))
        else:
            p = Path(sub.path)
            if config.base_dir is not None and not p.is_absolute():
                p = config.base_dir / p
            if not p.exists():
                bad(Diagnostic("substrate.path", f"file not found: {p}"))
            else:
                try:
                    graph = read_adjacency(p)
                    n_known = graph.n_vertices
                    coin_dim_needed = graph.coin_dimension if discrete else None
                except QwalkError as exc:
                    bad(Diagnostic("substrate.path", f"unreadable graph: {exc}"))
        if sub.n_sites != "auto":
            bad(Diagnostic("substrate.n_sites", "adjacency size comes from the file; leave n_sites out"))

    perc = sub.percolation
    if perc is not None:
        mode = perc.get("mode")
        if mode not in PERCOLATION_MODES:
            bad(
                Diagnostic(
                    "substrate.percolation.mode",
                    f"must be one of {PERCOLATION_MODES}, got {mode!r}",
                )
            )
        p_val = perc.get("p")
        if not (_is_num(p_val) and 0.0 <= p_val <= 1.0):
            bad(Diagnostic("substrate.percolation.p", f"must be in [0, 1], got {p_val!r}"))
        if not _is_int(perc.get("seed", 0)):
            bad(Diagnostic("substrate.percolation.seed", "must be an integer"))
        for key in perc:
            if key not in ("mode", "p", "seed"):
                bad(Diagnostic(f"substrate.percolation.{key}", "unknown key"))

    # coin (discrete walks only)
    coin = config.coin
    if discrete:
        if coin.name not in COIN_NAMES:
            bad(Diagnostic("coin.name", f"must be one of {COIN_NAMES}, got {coin.name!r}"))
        if coin.dimension is not None and not (_is_int(coin.dimension) and coin.dimension >= 1):
            bad(Diagnostic("coin.dimension", f"must be an integer >= 1, got {coin.dimension!r}"))
        elif coin_dim_needed is not None:
            if coin.dimension is not None and coin.dimension != coin_dim_needed:
                bad(
                    Diagnostic(
                        "coin.dimension",
                        f"substrate needs coin dimension {coin_dim_needed}, got {coin.dimension}",
                    )
                )
            eff_dim = coin.dimension if coin.dimension is not None else coin_dim_needed
            if coin.name == "hadamard" and eff_dim != 2:
                bad(
                    Diagnostic(
                        "coin.name",
                        f"hadamard is two-dimensional but the substrate needs {eff_dim}; "
                        f"use grover or dft",
                    )
                )

    # initial state
    init = config.initial
    if not (_is_num(init.b) and 0.0 <= init.b <= 1.0):
        bad(Diagnostic("initial.b", f"must be in [0, 1], got {init.b!r}"))
    if not _is_num(init.beta):
        bad(Diagnostic("initial.beta", f"must be a number, got {init.beta!r}"))
    if init.start != "center" and not _is_int(init.start):
        bad(Diagnostic("initial.start", f'must be a vertex index or "center", got {init.start!r}'))
    elif _is_int(init.start) and init.start < 0:
        bad(Diagnostic("initial.start", f"must be >= 0, got {init.start}"))
    elif _is_int(init.start) and n_known is not None and init.start >= n_known:
        bad(Diagnostic("initial.start", f"vertex {init.start} out of range for {n_known} vertices"))

    # noise
    noise = config.noise
    noise_model: Optional[NoiseModel] = None
    try:
        kind = NoiseKind(noise.kind)
        if not _is_num(noise.strength):
            raise InvalidParameterError(f"strength must be a number, got {noise.strength!r}")
        noise_model = NoiseModel(kind=kind, strength=float(noise.strength), seed=noise.seed)
    except ValueError:
        bad(
            Diagnostic(
                "noise.kind",
                f"must be one of {[k.value for k in NoiseKind]}, got {noise.kind!r}",
            )
        )
    except InvalidParameterError as exc:
        bad(Diagnostic("noise.strength", str(exc)))
    if not _is_int(noise.seed):
        bad(Diagnostic("noise.seed", "must be an integer"))
    noisy = noise.kind != "none" or noise.strength != 0.0
    if noisy and not discrete:
        bad(Diagnostic("noise.kind", "noise models apply to discrete walks only"))

    # run section
    run = config.run
    if discrete:
        if run.time is not None:
            bad(Diagnostic("run.time", "discrete walks take run.steps, not run.time"))
        values = run.steps
        if values is None:
            bad(Diagnostic("run.steps", "discrete walks need run.steps"))
        else:
            as_list = values if isinstance(values, list) else [values]
            if not as_list or not all(_is_int(v) and v >= 0 for v in as_list):
                bad(Diagnostic("run.steps", f"must be an integer >= 0 or a list of them, got {values!r}"))
    else:
        if run.steps is not None:
            bad(Diagnostic("run.steps", "continuous walks take run.time, not run.steps"))
        values = run.time
        if values is None:
            bad(Diagnostic("run.time", "continuous walks need run.time"))
        else:
            as_list = values if isinstance(values, list) else [values]
            if not as_list or not all(_is_num(v) and v >= 0 for v in as_list):
                bad(Diagnostic("run.time", f"must be a number >= 0 or a list of them, got {values!r}"))
    if not (_is_int(run.runs) and run.runs >= 1):
        bad(Diagnostic("run.runs", f"must be an integer >= 1, got {run.runs!r}"))
    if not (_is_int(run.seed)):
        bad(Diagnostic("run.seed", "must be an integer"))
    if not (_is_int(run.amplitude_budget) and run.amplitude_budget >= 1):
        bad(Diagnostic("run.amplitude_budget", f"must be an integer >= 1, got {run.amplitude_budget!r}"))
    if not isinstance(run.outputs, list) or not run.outputs:
        bad(Diagnostic("run.outputs", f"must be a non-empty list, got {run.outputs!r}"))
    else:
        for out in run.outputs:
            if out not in OUTPUT_CHOICES:
                bad(Diagnostic("run.outputs", f"unknown output {out!r}; choices are {OUTPUT_CHOICES}"))
        if "samples" in run.outputs and not (_is_int(run.samples) and run.samples >= 1):
            bad(Diagnostic("run.samples", "samples output needs run.samples >= 1"))
        if "tv_vs_classical" in run.outputs:
            if not (discrete and sub.generator == "line" and config.multiwalker is None):
                bad(
                    Diagnostic(
                        "run.outputs",
                        "tv_vs_classical needs a discrete single-walker line walk",
                    )
                )
            elif sub.n_sites != "auto":
                bad(
                    Diagnostic(
                        "run.outputs",
                        'tv_vs_classical needs substrate.n_sites = "auto" so the line covers all steps',
                    )
                )
            else:
                steps_list = run.steps if isinstance(run.steps, list) else [run.steps]
                if any(_is_int(v) and v < 1 for v in steps_list):
                    bad(Diagnostic("run.outputs", "tv_vs_classical needs steps >= 1"))
        if "joint" in run.outputs and config.multiwalker is None:
            bad(Diagnostic("run.outputs", "joint output needs a [multiwalker] section"))
    if not _is_int(run.samples) or run.samples < 0:
        bad(Diagnostic("run.samples", f"must be an integer >= 0, got {run.samples!r}"))

    # method compatibility
    if walk.method == "density":
        if run.runs != 1:
            bad(Diagnostic("run.runs", "density evolution is exact; set runs = 1"))
        if noise_model is not None and noise_model.kind not in DENSITY_KINDS:
            bad(
                Diagnostic(
                    "walk.method",
                    f"noise kind {noise.kind!r} has no closed-form channel; "
                    f"use method trajectory",
                )
            )
    if walk.method == "pure" and noisy:
        bad(Diagnostic("walk.method", "pure evolution cannot carry noise; use trajectory or density"))

    # multiwalker
    mw = config.multiwalker
    if mw is not None:
        if noisy:
            bad(Diagnostic("noise.kind", "many-walker runs do not support noise"))
        if perc is not None:
            bad(Diagnostic("substrate.percolation", "many-walker runs do not support percolation"))
        if walk.method not in ("auto", "pure"):
            bad(Diagnostic("walk.method", "many-walker runs are pure; use auto or pure"))
        if run.runs != 1:
            bad(Diagnostic("run.runs", "many-walker runs are deterministic; set runs = 1"))
        if not (isinstance(mw.starts, list) and mw.starts and all(_is_int(s) for s in mw.starts)):
            bad(Diagnostic("multiwalker.starts", f"must be a non-empty list of vertex indices, got {mw.starts!r}"))
        elif n_known is not None:
            for s in mw.starts:
                if not 0 <= s < n_known:
                    bad(Diagnostic("multiwalker.starts", f"vertex {s} out of range for {n_known} vertices"))
        try:
            Statistics(mw.statistics)
        except ValueError:
            bad(
                Diagnostic(
                    "multiwalker.statistics",
                    f"must be one of {[s.value for s in Statistics]}, got {mw.statistics!r}",
                )
            )
        inter = mw.interaction
        if inter is not None:
            ikind = inter.get("kind", "none")
            try:
                ikind = InteractionKind(ikind)
                if ikind is InteractionKind.COLLISION_PHASE and not discrete:
                    bad(Diagnostic("multiwalker.interaction.kind", "collision_phase needs a discrete walk"))
                if ikind is InteractionKind.HUBBARD and discrete:
                    bad(Diagnostic("multiwalker.interaction.kind", "hubbard needs a continuous walk"))
            except ValueError:
                bad(
                    Diagnostic(
                        "multiwalker.interaction.kind",
                        f"must be one of {[k.value for k in InteractionKind]}, got {ikind!r}",
                    )
                )
            for key in inter:
                if key not in ("kind", "phi", "u"):
                    bad(Diagnostic(f"multiwalker.interaction.{key}", "unknown key"))
            if "phi" in inter and not _is_num(inter["phi"]):
                bad(Diagnostic("multiwalker.interaction.phi", "must be a number"))
            if "u" in inter and not _is_num(inter["u"]):
                bad(Diagnostic("multiwalker.interaction.u", "must be a number"))
        if sub.generator == "line" and sub.n_sites == "auto":
            bad(Diagnostic("substrate.n_sites", "many-walker line runs need an explicit n_sites"))

    return diags
