"""Experiment configuration: one JSON document per experiment.

Schema (all keys except ``name`` optional where a default is listed):

    {
      "name":     "disk_euclidean",
      "family":   {"name": "euclidean", ...family parameters...},
      "region":   {"kind": "disk", "radius": 1.0, "center": [0, 0]},
      "epsilons": [1e-2, 5e-3, 2.5e-3, 1.25e-3, 6.25e-4],
      "backend":  "pde" | "mc" | "both"            (default "pde"),
      "grid":     {"nx": 512, "halfwidth": 5.0}    (halfwidth optional),
      "mc":       {"n_paths": 200000, "n_steps": 128},
      "seed":     42                               (required with mc),
      "out":      "runs/disk_euclidean"            (default "runs/<name>")
    }

Region kinds: disk (radius, center), ellipse (semi_x, semi_y, center,
angle), square (side, corner), polygon (vertices).  A config is resolved by
path, then as ``configs/<name>.json`` under the working directory, then from
the configurations packaged with the library.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import ConfigError
from .families import MetricFamily, make_family
from .grid import Grid, grid_for
from .regions import (
    Region,
    disk,
    ellipse,
    polygon_region,
    rectangle_region,
    square,
)

__all__ = ["ExperimentConfig", "load_config", "resolve_config_path"]

_DEFAULT_EPS = (1e-2, 5e-3, 2.5e-3, 1.25e-3, 6.25e-4)


def _build_region(spec: dict) -> Region:
    kind = spec.get("kind")
    try:
        if kind == "disk":
            return disk(spec["radius"], tuple(spec.get("center", (0.0, 0.0))))
        if kind == "ellipse":
            return ellipse(spec["semi_x"], spec["semi_y"],
                           tuple(spec.get("center", (0.0, 0.0))),
                           spec.get("angle", 0.0))
        if kind == "square":
            return square(spec.get("side", 1.0),
                          tuple(spec.get("corner", (0.0, 0.0))))
        if kind == "rectangle":
            return rectangle_region(*spec["bounds"])
        if kind == "polygon":
            return polygon_region(spec["vertices"])
    except KeyError as exc:
        raise ConfigError(f"region spec {spec} is missing {exc}") from exc
    raise ConfigError(f"unknown region kind {kind!r}")


@dataclass
class ExperimentConfig:
    name: str
    family_spec: dict = field(default_factory=lambda: {"name": "euclidean"})
    region_spec: dict = field(default_factory=lambda: {"kind": "disk",
                                                       "radius": 1.0})
    epsilons: tuple = _DEFAULT_EPS
    backend: str = "pde"
    grid_spec: dict = field(default_factory=lambda: {"nx": 512})
    mc_spec: dict = field(default_factory=lambda: {"n_paths": 200_000,
                                                   "n_steps": 128})
    seed: int | None = None
    out: str | None = None

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        if "name" not in raw:
            raise ConfigError("config needs a 'name'")
        known = {"name", "family", "region", "epsilons", "backend", "grid",
                 "mc", "seed", "out"}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        cfg = cls(
            name=raw["name"],
            family_spec=raw.get("family", {"name": "euclidean"}),
            region_spec=raw.get("region", {"kind": "disk", "radius": 1.0}),
            epsilons=tuple(raw.get("epsilons", _DEFAULT_EPS)),
            backend=raw.get("backend", "pde"),
            grid_spec=raw.get("grid", {"nx": 512}),
            mc_spec=raw.get("mc", {"n_paths": 200_000, "n_steps": 128}),
            seed=raw.get("seed"),
            out=raw.get("out"),
        )
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.backend not in ("pde", "mc", "both"):
            raise ConfigError(f"backend must be pde|mc|both, "
                              f"got {self.backend!r}")
        if self.backend in ("mc", "both") and self.seed is None:
            raise ConfigError("a seed is mandatory when the backend "
                              "includes mc")
        if any(e < 0 for e in self.epsilons):
            raise ConfigError("diffusivities must be non-negative")
        self.build_family()
        self.build_region()

    # -- builders ---------------------------------------------------------
    def build_family(self) -> MetricFamily:
        spec = dict(self.family_spec)
        try:
            name = spec.pop("name")
        except KeyError:
            raise ConfigError("family spec needs a 'name'")
        return make_family(name, **spec)

    def build_region(self) -> Region:
        return _build_region(self.region_spec)

    def build_grid(self, family: MetricFamily | None = None,
                   region: Region | None = None) -> Grid:
        family = family or self.build_family()
        region = region or self.build_region()
        nx = self.grid_spec.get("nx", 512)
        return grid_for(region, family, max(self.epsilons), nx,
                        ny=self.grid_spec.get("ny"),
                        halfwidth=self.grid_spec.get("halfwidth"))

    @property
    def n_paths(self) -> int:
        return int(self.mc_spec.get("n_paths", 200_000))

    @property
    def n_steps(self) -> int:
        return int(self.mc_spec.get("n_steps", 128))

    def out_dir(self, override=None) -> Path:
        return Path(override or self.out or f"runs/{self.name}")


def resolve_config_path(ref: str) -> Path:
    """Resolve a config reference: path, configs/<name>.json, or packaged."""
    p = Path(ref)
    if p.is_file():
        return p
    candidates = [Path("configs") / f"{ref}.json", Path(f"{ref}.json")]
    for cand in candidates:
        if cand.is_file():
            return cand
    packaged = resources.files("mixlab").joinpath(f"configs/{ref}.json")
    if packaged.is_file():
        return Path(str(packaged))
    raise ConfigError(f"cannot resolve config {ref!r}: not a file, not in "
                      f"./configs/, not packaged")


def load_config(ref: str) -> ExperimentConfig:
    path = resolve_config_path(ref)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return ExperimentConfig.from_dict(raw)
